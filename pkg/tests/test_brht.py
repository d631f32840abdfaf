"""Blockwise randomized transform: sampling cost, application, moments.

Moment identities are checked by enumerating the whole seed space, so they
are statements about the exact distribution, not Monte Carlo estimates.
"""

import numpy as np
import pytest

from distmeantest import (
    BrhtSpec,
    DimensionError,
    PublicSeed,
    brht_apply,
    compression_probe,
    fourwise_rademacher,
    hadamard_matrix,
    is_pow2,
    next_pow2,
    pow2_floor,
    sample_brht,
)
from distmeantest.errors import ParameterError

RNG = np.random.default_rng(31337)


def fresh_seed(s=200, seed=0):
    return PublicSeed.random(s, np.random.default_rng(seed))


def enumerate_specs(d, L):
    """One BrhtSpec per value of the full 4*log2(d/L)-bit seed space."""
    b = d // L
    length = 4 * (b.bit_length() - 1)
    for value in range(1 << length):
        yield sample_brht(PublicSeed.from_int(value, length), d, L)


class TestSampling:
    def test_single_block_costs_nothing(self):
        seed = fresh_seed()
        spec = sample_brht(seed, 8, 8)
        assert spec.b == 1 and spec.bits_consumed == 0 and seed.consumed == 0
        # R = +/- H_8; with one block the sign convention pins it to +H_8
        x = RNG.standard_normal(8)
        h8 = hadamard_matrix(8)
        np.testing.assert_allclose(brht_apply(spec, x), h8 @ x, atol=1e-12)

    def test_four_blocks_cost_eight_bits(self):
        seed = fresh_seed()
        spec = sample_brht(seed, 8, 2)
        assert spec.b == 4
        assert spec.bits_consumed == 8 and seed.consumed == 8

    def test_nondividing_block_rejected(self):
        with pytest.raises(DimensionError):
            sample_brht(fresh_seed(), 8, 3)

    def test_block_longer_than_dimension_rejected(self):
        with pytest.raises(DimensionError):
            sample_brht(fresh_seed(), 4, 8)

    def test_expanded_signs_repeat_per_block(self):
        spec = sample_brht(fresh_seed(seed=9), 16, 4)
        np.testing.assert_array_equal(spec.expanded_signs(), np.repeat(spec.signs, 4))


class TestApply:
    def test_zero_maps_to_zero(self):
        spec = sample_brht(fresh_seed(), 16, 4)
        np.testing.assert_array_equal(brht_apply(spec, np.zeros(16)), np.zeros(16))

    @pytest.mark.parametrize("d,L", [(8, 8), (16, 4), (64, 8), (256, 2)])
    def test_isometry(self, d, L):
        spec = sample_brht(fresh_seed(seed=d + L), d, L)
        x = RNG.standard_normal(d)
        ratio = np.linalg.norm(brht_apply(spec, x)) / np.linalg.norm(x)
        assert abs(ratio - 1.0) <= 1e-9

    def test_dense_oracle_d4(self):
        """d=4, L=2, signs (+1,-1): R = H_4 diag(1,1,-1,-1) entry for entry."""
        spec = BrhtSpec(d=4, L=2, b=2, signs=np.array([1, -1], dtype=np.int8))
        dense = hadamard_matrix(4) @ np.diag([1.0, 1.0, -1.0, -1.0])
        for _ in range(10):
            x = RNG.standard_normal(4)
            np.testing.assert_allclose(brht_apply(spec, x), dense @ x, atol=1e-12)

    def test_prefix_matches_full_transform(self):
        # the folded fast path for power-of-two keep must agree with slicing
        spec = sample_brht(fresh_seed(seed=4), 64, 8)
        x = RNG.standard_normal(64)
        full = brht_apply(spec, x)
        for keep in (1, 2, 8, 16, 64):
            np.testing.assert_allclose(brht_apply(spec, x, keep=keep), full[:keep],
                                       atol=1e-9)

    def test_non_pow2_keep_matches_slice(self):
        spec = sample_brht(fresh_seed(seed=5), 32, 4)
        x = RNG.standard_normal(32)
        np.testing.assert_allclose(brht_apply(spec, x, keep=5),
                                   brht_apply(spec, x)[:5], atol=1e-12)

    def test_batch_shape(self):
        spec = sample_brht(fresh_seed(seed=6), 16, 4)
        batch = RNG.standard_normal((3, 5, 16))
        out = brht_apply(spec, batch, keep=4)
        assert out.shape == (3, 5, 4)
        np.testing.assert_allclose(out[1, 2], brht_apply(spec, batch[1, 2], keep=4),
                                   atol=1e-12)

    def test_length_mismatch_rejected(self):
        spec = sample_brht(fresh_seed(), 16, 4)
        with pytest.raises(DimensionError):
            brht_apply(spec, np.zeros(8))
        with pytest.raises(DimensionError):
            brht_apply(spec, np.zeros(16), keep=0)


class TestCompressionProbe:
    def test_full_prefix_recovers_norm(self):
        spec = sample_brht(fresh_seed(seed=2), 32, 4)
        mu = RNG.standard_normal(32)
        result = compression_probe(spec, mu, t=spec.b)
        assert result.z == pytest.approx(float(mu @ mu), rel=1e-9)

    def test_zero_mean(self):
        spec = sample_brht(fresh_seed(seed=2), 32, 4)
        result = compression_probe(spec, np.zeros(32), t=1)
        assert result.z == 0.0 and not result.exceeds_threshold

    def test_t_out_of_range(self):
        spec = sample_brht(fresh_seed(seed=2), 32, 4)
        with pytest.raises(DimensionError):
            compression_probe(spec, np.zeros(32), t=9)

    def test_exhaustive_first_moment_d8(self):
        """Average of Z over all 256 seeds equals ||mu||^2 / b for d=8, L=2."""
        mu = RNG.standard_normal(8)
        rho2 = float(mu @ mu)
        total = 0.0
        count = 0
        for spec in enumerate_specs(8, 2):
            total += compression_probe(spec, mu, t=1).z
            count += 1
        assert count == 256
        mean_z = total / count
        assert mean_z == pytest.approx(rho2 / 4, rel=1e-9), \
            f"E[Z]={mean_z}, expected {rho2 / 4}"

    @pytest.mark.parametrize("d,L", [(4, 2), (8, 2), (16, 2)])
    def test_exhaustive_moments_small(self, d, L):
        """E[Z] = t rho^2/b exactly; E[Z^2] <= 3 t^2 rho^4 / b^2 (whole seed space)."""
        b = d // L
        mu = RNG.standard_normal(d)
        rho2 = float(mu @ mu)
        specs = list(enumerate_specs(d, L))
        for t in sorted({1, 2, b}):
            zs = np.array([compression_probe(spec, mu, t=t).z for spec in specs])
            assert np.mean(zs) == pytest.approx(t * rho2 / b, rel=1e-9)
            bound = 3.0 * t * t * rho2 * rho2 / (b * b)
            assert np.mean(zs ** 2) <= bound * (1 + 1e-9), \
                f"E[Z^2]={np.mean(zs ** 2)} > {bound} at d={d} L={L} t={t}"

    def test_anti_concentration_sampled(self):
        """P(Z > threshold) >= 0.30 for a random unit mean (guarantee is 8/25)."""
        rng = np.random.default_rng(77)
        mu = rng.standard_normal(64)
        mu /= np.linalg.norm(mu)
        hits = 0
        trials = 2000
        for _ in range(trials):
            spec = sample_brht(PublicSeed.random(12, rng), 64, 8)
            if compression_probe(spec, mu, t=1).exceeds_threshold:
                hits += 1
        assert hits / trials >= 0.30, f"hit rate {hits / trials}"


class TestPow2Helpers:
    @pytest.mark.parametrize("x,expect", [(1, 1), (2, 2), (3, 2), (7, 4), (8, 8), (100, 64)])
    def test_pow2_floor(self, x, expect):
        assert pow2_floor(x) == expect

    @pytest.mark.parametrize("x,expect", [(1, 1), (2, 2), (3, 4), (9, 16), (64, 64)])
    def test_next_pow2(self, x, expect):
        assert next_pow2(x) == expect

    def test_is_pow2(self):
        assert [x for x in range(1, 17) if is_pow2(x)] == [1, 2, 4, 8, 16]

    def test_nonpositive_rejected(self):
        with pytest.raises(ParameterError):
            pow2_floor(0)
        with pytest.raises(ParameterError):
            next_pow2(0)
