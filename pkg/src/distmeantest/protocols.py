"""Distributed testing protocols and their referees.

Every protocol here consumes real-valued user samples, produces the exact
bits each user transmits (a `Transcript` with integer accounting), and runs a
referee on the assembled binary samples.  Shared structure:

* users sign-quantize (blocks of) a blockwise-randomized-Hadamard rotation of
  their data and send a slice of the resulting bits;
* the referee reassembles product-distributed binary samples and applies the
  centralized collision test at a protocol-specific threshold;
* amplified protocols run 7 independent repetitions and accept only if every
  repetition accepts.

Budget flooring policy: coordinate-block sizes (private/limited `ell`, the
per-repetition share of the heterogeneous-samples protocol, which doubles as
a transform block length) are floored to powers of two; wrap-around stream
segments (hetero-comm, mix-and-match) use exact integer shares since index
arithmetic needs no alignment.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .binary_test import ACCEPT, REJECT, bpmt_decide, bpmt_decide_threshold, collision_statistic
from .brht import BrhtSpec, RETENTION_FACTOR, brht_apply, is_pow2, pow2_floor, sample_brht
from .errors import (
    DegenerateInputError,
    DimensionError,
    InfeasiblePartitionError,
    InsufficientPopulationError,
    ParameterError,
)
from .randomness import PublicSeed

__all__ = [
    "UserSpec",
    "Decision",
    "Transcript",
    "sign_quantize",
    "aggregate_block",
    "wraparound_coords",
    "assemble_wraparound",
    "greedy_partition",
    "private_coin_protocol",
    "limited_coin_protocol",
    "hetero_samples_protocol",
    "hetero_comm_protocol",
    "mix_and_match_protocol",
]

REPETITIONS = 7
# Confidence/threshold constants baked into the protocol family.
SIGN_QUANTIZE_DISTANCE_FACTOR = 1.0 / np.sqrt(8.0)   # Gaussian -> binary distance loss
HETERO_DISTANCE_FACTOR = 1.0 / 80.0                  # heterogeneous referee prefactor


@dataclass(frozen=True)
class UserSpec:
    """Per-user resources: sample count m and bit budget ell."""

    m: int
    ell: int

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError(f"user sample count must be >= 1, got {self.m}")
        if self.ell < 1:
            raise ParameterError(f"user bit budget must be >= 1, got {self.ell}")


@dataclass
class Decision:
    """Referee outcome; repetition_accepts is set by the amplified protocols."""

    verdict: str
    repetition_accepts: tuple[bool, ...] | None = None

    def consistent(self) -> bool:
        if self.repetition_accepts is None:
            return self.verdict in (ACCEPT, REJECT)
        return (self.verdict == ACCEPT) == all(self.repetition_accepts)


class Transcript:
    """Per-user transmitted bits in compressed row storage, plus seed usage.

    `data` holds every transmitted bit (0/1 uint8) with user k's message at
    data[offsets[k]:offsets[k+1]]; lengths are exact integers, never padded.
    """

    def __init__(self, offsets: np.ndarray, data: np.ndarray, public_bits_used: int = 0):
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.uint8)
        self.public_bits_used = int(public_bits_used)
        if self.offsets.ndim != 1 or self.offsets[0] != 0 or self.offsets[-1] != self.data.shape[0]:
            raise ParameterError("malformed transcript offsets")

    @property
    def n_users(self) -> int:
        return self.offsets.shape[0] - 1

    @property
    def bits_sent(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def total_bits(self) -> int:
        return int(self.data.shape[0])

    def message(self, k: int) -> np.ndarray:
        return self.data[self.offsets[k]:self.offsets[k + 1]]

    def serialize(self) -> bytes:
        """Per user: 4-byte big-endian bit count, then bits packed MSB-first."""
        out = bytearray()
        for k in range(self.n_users):
            msg = self.message(k)
            out += struct.pack(">I", msg.shape[0])
            if msg.shape[0]:
                out += np.packbits(msg).tobytes()
        return bytes(out)

    @classmethod
    def from_lengths(cls, lengths: np.ndarray, public_bits_used: int = 0) -> "Transcript":
        """Allocate a zeroed transcript with the given per-user bit counts."""
        lengths = np.asarray(lengths, dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(lengths)])
        return cls(offsets, np.zeros(int(offsets[-1]), dtype=np.uint8), public_bits_used)

    def fill_block(self, user_indices: np.ndarray, bits: np.ndarray) -> None:
        """Write equal-length messages for a batch of users (bits: (u, len))."""
        if bits.size == 0:
            return
        idx = self.offsets[np.asarray(user_indices)][:, None] + np.arange(bits.shape[1])
        self.data[idx] = bits


# ---------------------------------------------------------------------------
# encoding / assembly primitives


def sign_quantize(x: np.ndarray) -> np.ndarray:
    """1 where a coordinate is strictly positive, else 0 (any shape)."""
    return (np.asarray(x) > 0).astype(np.uint8)


def aggregate_block(samples: np.ndarray, t: int, block: int) -> np.ndarray:
    """Scaled sum of the t-th disjoint block of `block` samples (t is 1-based).

    samples has shape (..., m, d); returns shape (..., d) equal to
    (1/sqrt(block)) * sum of samples[(t-1)*block : t*block].
    """
    samples = np.asarray(samples)
    if samples.ndim < 2:
        raise DimensionError(f"expected (..., m, d) samples, got shape {samples.shape}")
    m = samples.shape[-2]
    if block < 1:
        raise ParameterError(f"block size must be >= 1, got {block}")
    if t < 1 or t * block > m:
        raise ParameterError(f"block {t} of size {block} does not fit in {m} samples")
    window = samples[..., (t - 1) * block:t * block, :]
    return window.sum(axis=-2) / np.sqrt(block)


def wraparound_coords(lengths: np.ndarray, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened (user, own-coordinate) pairs of the wrap-around layout.

    The global stream position q belongs to user k(q) (users fill consecutive
    spans of lengths[k] positions) and carries coordinate q mod L of that
    user's own quantized length-L vector.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    if np.any(lengths < 0) or np.any(lengths > L):
        raise ParameterError(f"per-user lengths must lie in 0..L={L}")
    total = int(lengths.sum())
    users = np.repeat(np.arange(lengths.shape[0]), lengths)
    coords = np.arange(total, dtype=np.int64) % L
    return users, coords


def assemble_wraparound(quantized: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Referee-side assembly of full binary samples from partial-budget users.

    quantized: (n, L) bit matrix of per-user quantized vectors; user k
    contributes lengths[k] bits.  Returns the floor(sum(lengths)/L) assembled
    samples; trailing bits that do not fill a sample are dropped.
    """
    quantized = np.asarray(quantized, dtype=np.uint8)
    if quantized.ndim != 2:
        raise DimensionError(f"expected an (n, L) bit matrix, got shape {quantized.shape}")
    L = quantized.shape[1]
    users, coords = wraparound_coords(lengths, L)
    stream = quantized[users, coords]
    n_sim = stream.shape[0] // L
    if n_sim == 0:
        raise InsufficientPopulationError(
            f"{stream.shape[0]} transmitted bits cannot fill one {L}-coordinate sample"
        )
    return stream[:n_sim * L].reshape(n_sim, L)


def greedy_partition(users: list[UserSpec], L: int) -> list[list[int]]:
    """Group users so every group holds at least 7L message bits.

    Users are taken in order of descending sample count (ties by index), so
    groups collect similar m values and the within-group minimum loses
    little.  A trailing group that cannot reach 7L is merged into the
    previous one.  Raises InfeasiblePartitionError when the whole population
    is short of 7L.
    """
    if L < 1:
        raise ParameterError(f"L must be >= 1, got {L}")
    need = REPETITIONS * L
    total = sum(u.ell for u in users)
    if total < need:
        raise InfeasiblePartitionError(
            f"population holds {total} message bits, below the per-group requirement {need}"
        )
    order = sorted(range(len(users)), key=lambda i: (-users[i].m, i))
    groups: list[list[int]] = []
    current: list[int] = []
    budget = 0
    for idx in order:
        current.append(idx)
        budget += users[idx].ell
        if budget >= need:
            groups.append(current)
            current = []
            budget = 0
    if current:
        groups[-1].extend(current)
    return groups


def _amplified(rep_accepts: list[bool]) -> Decision:
    verdict = ACCEPT if all(rep_accepts) else REJECT
    return Decision(verdict=verdict, repetition_accepts=tuple(rep_accepts))


def _check_common(d: int, epsilon: float) -> None:
    if not is_pow2(d):
        raise DimensionError(f"protocol dimension must be a power of two, got {d}")
    if not (0.0 < epsilon <= 1.0):
        raise ParameterError(f"epsilon must be in (0, 1], got {epsilon}")


def _seed_delta(seed: PublicSeed | None, before: int) -> int:
    return 0 if seed is None else seed.consumed - before


# ---------------------------------------------------------------------------
# private-coin protocol: d/ell users jointly simulate one full binary sample


def private_coin_layout(n: int, d: int, ell: int) -> tuple[int, int, int]:
    """(effective block size, users per simulated sample, simulated samples)."""
    if not (1 <= ell <= d):
        raise ParameterError(f"bit budget must be in 1..{d}, got {ell}")
    ell_eff = pow2_floor(ell)
    group = d // ell_eff
    return ell_eff, group, n // group


def private_coin_protocol(samples: np.ndarray, d: int, ell: int,
                          epsilon: float) -> tuple[Decision, Transcript]:
    """Each user quantizes its sample and sends one designated coordinate block.

    Groups of d/ell users yield one simulated binary sample each; the referee
    runs the centralized test at distance epsilon/sqrt(8).  Leftover users
    (an incomplete trailing group) stay silent.
    """
    _check_common(d, epsilon)
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[1] != d:
        raise DimensionError(f"expected (n, {d}) samples, got shape {samples.shape}")
    n = samples.shape[0]
    ell_eff, group, n_sim = private_coin_layout(n, d, ell)
    if n_sim == 0:
        raise InsufficientPopulationError(
            f"{n} users with {ell_eff}-bit blocks cannot fill one {d}-coordinate sample"
        )
    active = n_sim * group
    quantized = sign_quantize(samples[:active]).reshape(n_sim, group, d)
    sim = np.empty((n_sim, group, ell_eff), dtype=np.uint8)
    for pos in range(group):
        sim[:, pos, :] = quantized[:, pos, pos * ell_eff:(pos + 1) * ell_eff]
    sim = sim.reshape(n_sim, d)
    verdict = bpmt_decide(sim, epsilon * SIGN_QUANTIZE_DISTANCE_FACTOR)

    lengths = np.zeros(n, dtype=np.int64)
    lengths[:active] = ell_eff
    transcript = Transcript.from_lengths(lengths)
    transcript.data[:active * ell_eff] = sim.reshape(-1)  # user-major == sample-major here
    return Decision(verdict=verdict), transcript


# ---------------------------------------------------------------------------
# limited-public-coin protocol: 7 cohorts, fresh coarse rotation per cohort


def limited_coin_params(d: int, ell: int, s: int) -> tuple[int, int, int, float]:
    """(block length d_s, kept length L, effective ell, distance scale).

    d_s = d / 2^floor(s/28) (capped at 1), L = max(d_s, ell); the inner test
    runs at epsilon * sqrt(L / (100 d)).
    """
    if s < 0:
        raise ParameterError(f"seed budget must be >= 0, got {s}")
    if not (1 <= ell <= d):
        raise ParameterError(f"bit budget must be in 1..{d}, got {ell}")
    exponent = min(s // 28, int(d).bit_length() - 1)
    d_s = d >> exponent
    ell_eff = pow2_floor(ell)
    L = max(d_s, ell_eff)
    scale = np.sqrt(RETENTION_FACTOR * L / d)
    return d_s, L, ell_eff, scale


def limited_coin_protocol(samples: np.ndarray, d: int, ell: int, epsilon: float,
                          seed: PublicSeed) -> tuple[Decision, Transcript]:
    """Seven disjoint cohorts, each running the private-coin protocol on a
    freshly rotated-and-truncated view of its samples.

    Per repetition a (d, d_s) transform is drawn from the shared seed
    (4*log2(d/d_s) bits, so all seven fit in s by construction); the cohort
    keeps L = max(d_s, ell) coordinates and tests at distance
    epsilon * sqrt(L/(100 d)).  Accept only if every repetition accepts.
    """
    _check_common(d, epsilon)
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[1] != d:
        raise DimensionError(f"expected (n, {d}) samples, got shape {samples.shape}")
    n = samples.shape[0]
    cohort_size = n // REPETITIONS
    if cohort_size == 0:
        raise InsufficientPopulationError(f"need at least {REPETITIONS} users, got {n}")
    d_s, L, ell_eff, scale = limited_coin_params(d, ell, seed.size)
    eps_eff = epsilon * scale

    before = seed.consumed
    lengths = np.zeros(n, dtype=np.int64)
    chunks: list[np.ndarray] = []
    rep_accepts: list[bool] = []
    for r in range(REPETITIONS):
        spec = sample_brht(seed, d, d_s)
        cohort = samples[r * cohort_size:(r + 1) * cohort_size]
        rotated = brht_apply(spec, cohort, keep=L)
        decision_r, transcript_r = private_coin_protocol(rotated, L, ell_eff, eps_eff)
        rep_accepts.append(decision_r.verdict == ACCEPT)
        lengths[r * cohort_size:(r + 1) * cohort_size] = transcript_r.bits_sent
        chunks.append(transcript_r.data)
    transcript = Transcript.from_lengths(lengths, public_bits_used=_seed_delta(seed, before))
    if transcript.total_bits:
        transcript.data[:] = np.concatenate(chunks)  # cohorts are contiguous in user order
    return _amplified(rep_accepts), transcript


# ---------------------------------------------------------------------------
# heterogeneous sample counts: aggregate-then-quantize, 7 shared rotations


def hetero_share(ell: int, d: int) -> int:
    """Per-repetition share: floor(ell/7) floored to a power of two, <= d."""
    if ell < REPETITIONS:
        raise ParameterError(f"budget {ell} cannot fund {REPETITIONS} repetitions")
    return min(pow2_floor(ell // REPETITIONS), d)


def hetero_pair_weight(m: np.ndarray, block_floor: bool = True) -> float:
    """N = sum over ordered user pairs of sqrt(w_k1 * w_k2), w = floor(m/7)
    (or w = m when block_floor is False, the variant maximized by balanced
    allocations)."""
    m = np.asarray(m, dtype=np.int64)
    if np.any(m < 1):
        raise ParameterError("sample counts must be >= 1")
    w = (m // REPETITIONS).astype(np.float64) if block_floor else m.astype(np.float64)
    roots = np.sqrt(w)
    return float(roots.sum() ** 2 - w.sum())


def hetero_threshold(epsilon: float, ell: int, N: float, d: int, n: int) -> float:
    """tau = ((epsilon/80) * sqrt(ell*N / (7*d*n*(n-1))))^2 / 2."""
    eps_prime = HETERO_DISTANCE_FACTOR * epsilon * np.sqrt(
        ell * N / (REPETITIONS * d * n * (n - 1.0)))
    return 0.5 * eps_prime * eps_prime


def hetero_samples_protocol(samples: list[np.ndarray], m: np.ndarray, d: int, ell: int,
                            epsilon: float, seed: PublicSeed) -> tuple[Decision, Transcript]:
    """Users with m_k samples aggregate floor(m_k/7) of them per repetition,
    rotate with one of 7 shared transforms, and send the quantized leading
    share.  The referee weights users by sqrt(floor(m/7)) pairwise.
    """
    _check_common(d, epsilon)
    m = np.asarray(m, dtype=np.int64)
    n = m.shape[0]
    if len(samples) != n:
        raise DimensionError(f"{len(samples)} sample sets for {n} users")
    if n < 2:
        raise DegenerateInputError(f"pairwise referee needs >= 2 users, got {n}")
    if np.any(m // REPETITIONS < 1):
        raise DegenerateInputError("every user needs at least 7 samples")
    share = hetero_share(ell, d)

    before = seed.consumed
    specs = [sample_brht(seed, d, share) for _ in range(REPETITIONS)]
    N = hetero_pair_weight(m)
    tau = hetero_threshold(epsilon, ell, N, d, n)

    rep_bits = np.empty((n, REPETITIONS, share), dtype=np.uint8)
    for value in np.unique(m):
        idx = np.flatnonzero(m == value)
        block = int(value) // REPETITIONS
        stacked = np.stack([np.asarray(samples[i], dtype=np.float64) for i in idx])
        if stacked.shape[1:] != (value, d):
            raise DimensionError(
                f"user samples must have shape ({value}, {d}), got {stacked.shape[1:]}")
        for t in range(1, REPETITIONS + 1):
            agg = aggregate_block(stacked, t, block)
            rep_bits[idx, t - 1, :] = sign_quantize(brht_apply(specs[t - 1], agg, keep=share))

    rep_accepts = [
        bpmt_decide_threshold(rep_bits[:, t, :], tau) == ACCEPT for t in range(REPETITIONS)
    ]
    transcript = Transcript.from_lengths(
        np.full(n, REPETITIONS * share, dtype=np.int64),
        public_bits_used=_seed_delta(seed, before))
    transcript.data[:] = rep_bits.reshape(-1)
    return _amplified(rep_accepts), transcript


# ---------------------------------------------------------------------------
# heterogeneous budgets: wrap-around assembly of partial quantized vectors


def hetero_comm_params(d: int, ells: np.ndarray, s: int) -> tuple[int, int, np.ndarray]:
    """(block length d_s, kept length L, per-user per-repetition shares)."""
    ells = np.asarray(ells, dtype=np.int64)
    if np.any(ells < 1):
        raise ParameterError("bit budgets must be >= 1")
    if s < 0:
        raise ParameterError(f"seed budget must be >= 0, got {s}")
    exponent = min(s // 28, int(d).bit_length() - 1)
    d_s = d >> exponent
    L = min(d, max(d_s, pow2_floor(int(min(ells.max(), d)))))
    shares = np.minimum(ells // REPETITIONS, L)
    return d_s, L, shares


def hetero_comm_protocol(samples: np.ndarray, d: int, ells: np.ndarray, epsilon: float,
                         seed: PublicSeed) -> tuple[Decision, Transcript]:
    """One sample per user, budgets ells; 7 repetitions of: rotate with a fresh
    shared (d, d_s) transform, keep L = max(d_s, max ell) coordinates,
    quantize, and send a floor(ell_k/7)-bit wrap-around share.  The referee
    assembles full L-coordinate samples across users and tests at distance
    (epsilon/sqrt(8)) * sqrt(L/(100 d)).
    """
    _check_common(d, epsilon)
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[1] != d:
        raise DimensionError(f"expected (n, {d}) samples, got shape {samples.shape}")
    n = samples.shape[0]
    ells = np.asarray(ells, dtype=np.int64)
    if ells.shape != (n,):
        raise DimensionError(f"need one budget per user, got shape {ells.shape}")
    d_s, L, shares = hetero_comm_params(d, ells, seed.size)
    eps_inner = epsilon * SIGN_QUANTIZE_DISTANCE_FACTOR * np.sqrt(RETENTION_FACTOR * L / d)
    total_share = int(shares.sum())
    if total_share < L:
        raise InsufficientPopulationError(
            f"{total_share} per-repetition bits cannot fill one {L}-coordinate sample")

    users, coords = wraparound_coords(shares, L)
    before = seed.consumed
    rep_accepts: list[bool] = []
    per_rep_bits: list[np.ndarray] = []
    for _ in range(REPETITIONS):
        spec = sample_brht(seed, d, d_s)
        quantized = sign_quantize(brht_apply(spec, samples, keep=L))
        transmitted = quantized[users, coords]
        n_sim = total_share // L
        sim = transmitted[:n_sim * L].reshape(n_sim, L)
        rep_accepts.append(bpmt_decide(sim, eps_inner) == ACCEPT)
        per_rep_bits.append(transmitted)

    transcript = Transcript.from_lengths(REPETITIONS * shares,
                                         public_bits_used=_seed_delta(seed, before))
    # user k's message is its 7 shares back to back (repetition-major per user)
    starts = np.cumsum(shares) - shares
    j_flat = np.arange(total_share) - starts[users]
    for r, transmitted in enumerate(per_rep_bits):
        transcript.data[transcript.offsets[users] + r * shares[users] + j_flat] = transmitted
    return _amplified(rep_accepts), transcript


# ---------------------------------------------------------------------------
# mix-and-match: greedy groups emulate strong users, then hetero referee


def mix_and_match_keep_length(d: int, ells: np.ndarray, s: int) -> int:
    """L = max(d/2^floor(s/28), max ell), floored to a power of two, capped at d."""
    ells = np.asarray(ells, dtype=np.int64)
    exponent = min(s // 28, int(d).bit_length() - 1)
    d_s = d >> exponent
    return min(d, max(d_s, pow2_floor(int(min(ells.max(), d)))))


def mix_and_match_protocol(samples: list[np.ndarray], users: list[UserSpec], d: int,
                           epsilon: float, seed: PublicSeed,
                           partition: list[list[int]] | None = None,
                           ) -> tuple[Decision, Transcript]:
    """Groups of users jointly emulate one strong user each.

    Every user in a group aggregates blocks of its first m' = min-group-m
    samples, rotates with the 7 shared (d, L) transforms, quantizes, and fills
    its span of the group's 7L-position stream (position p carries coordinate
    p mod L of the repetition-(p div L) vector).  Groups then act as K users
    of the heterogeneous-samples referee with weights floor(m'/7) and
    effective budget 7L.
    """
    _check_common(d, epsilon)
    n = len(users)
    if len(samples) != n:
        raise DimensionError(f"{len(samples)} sample sets for {n} users")
    ells = np.array([u.ell for u in users], dtype=np.int64)
    ms = np.array([u.m for u in users], dtype=np.int64)
    L = mix_and_match_keep_length(d, ells, seed.size)
    if partition is None:
        partition = greedy_partition(users, L)

    seen = sorted(i for group in partition for i in group)
    if seen != list(range(n)):
        raise ParameterError("partition must cover every user exactly once")
    need = REPETITIONS * L
    for group in partition:
        if int(ells[group].sum()) < need:
            raise InfeasiblePartitionError(
                f"group budget {int(ells[group].sum())} is below the requirement {need}")
    K = len(partition)
    if K < 2:
        raise DegenerateInputError(f"pairwise referee needs >= 2 groups, got {K}")
    group_min_m = np.array([int(ms[g].min()) for g in partition], dtype=np.int64)
    if np.any(group_min_m // REPETITIONS < 1):
        raise DegenerateInputError("every group needs min sample count >= 7")

    before = seed.consumed
    specs = [sample_brht(seed, d, L) for _ in range(REPETITIONS)]
    N = hetero_pair_weight(group_min_m)
    tau = hetero_threshold(epsilon, REPETITIONS * L, N, d, K)

    lengths = np.zeros(n, dtype=np.int64)
    sims = np.empty((K, REPETITIONS, L), dtype=np.uint8)
    message_of: dict[int, np.ndarray] = {}
    for j, group in enumerate(partition):
        block = int(group_min_m[j]) // REPETITIONS
        filled = 0
        for i in group:
            span = min(int(ells[i]), need - filled)
            if span <= 0:
                lengths[i] = 0
                continue
            arr = np.asarray(samples[i], dtype=np.float64)
            if arr.ndim != 2 or arr.shape[0] < ms[i] or arr.shape[1] != d:
                raise DimensionError(f"user {i} samples must have shape ({ms[i]}, {d})")
            quantized = np.empty((REPETITIONS, L), dtype=np.uint8)
            for t in range(1, REPETITIONS + 1):
                agg = aggregate_block(arr[:group_min_m[j]], t, block)
                quantized[t - 1] = sign_quantize(brht_apply(specs[t - 1], agg, keep=L))
            positions = np.arange(filled, filled + span)
            message_of[i] = quantized[positions // L, positions % L]
            sims[j].reshape(-1)[positions] = message_of[i]
            lengths[i] = span
            filled += span

    rep_accepts = [
        bpmt_decide_threshold(sims[:, t, :], tau) == ACCEPT for t in range(REPETITIONS)
    ]
    transcript = Transcript.from_lengths(lengths, public_bits_used=_seed_delta(seed, before))
    for i, msg in message_of.items():
        transcript.data[transcript.offsets[i]:transcript.offsets[i + 1]] = msg
    return _amplified(rep_accepts), transcript
