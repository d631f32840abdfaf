"""Monte Carlo harness: populations, trials, error estimation, calibration.

A `PopulationConfig` fixes the instance (dimension, distance, public-seed
budget, per-user resources, protocol); `run_trial` draws one mean vector and
one transcript-plus-decision; `estimate_error` turns repeated trials into
type-I/type-II rates with exact bit auditing on every transcript.

Two sampling paths produce identically distributed transcripts:

* ``literal``  — draw every user's Gaussian samples and push them through the
  protocol functions in :mod:`distmeantest.protocols`.
* ``law``      — draw each transmitted bit directly from its exact
  distribution.  A quantized rotated coordinate is 1 with probability
  Phi(mu_rot[c]) where mu_rot is the rotated (and aggregation-scaled) mean:
  rotations are orthogonal, so rotated samples are Gaussian with identity
  covariance around mu_rot, coordinates independent; distinct transmitted
  bits always come from distinct (user, coordinate) pairs.  The law path
  reuses the protocols' layout helpers and referees bit-for-bit, consumes
  the public seed identically, and produces transcripts with identical
  shapes — only the source of the transmitted bits differs.

The law path is the default: it makes six-figure populations tractable on a
single core.  Equivalence of the two paths is covered by the test suite.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .binary_test import ACCEPT, bpmt_decide, bpmt_decide_threshold
from .brht import brht_apply, next_pow2, sample_brht
from .errors import (
    CalibrationFailedError,
    DegenerateInputError,
    InfeasiblePartitionError,
    InsufficientPopulationError,
    ParameterError,
)
from .protocols import (
    Decision,
    REPETITIONS,
    SIGN_QUANTIZE_DISTANCE_FACTOR,
    Transcript,
    UserSpec,
    greedy_partition,
    hetero_comm_params,
    hetero_comm_protocol,
    hetero_pair_weight,
    hetero_samples_protocol,
    hetero_share,
    hetero_threshold,
    limited_coin_params,
    limited_coin_protocol,
    mix_and_match_keep_length,
    mix_and_match_protocol,
    private_coin_layout,
    private_coin_protocol,
    wraparound_coords,
)
from .randomness import PublicSeed

__all__ = [
    "MEAN_MODES",
    "PROTOCOL_NAMES",
    "MeanSpec",
    "PopulationConfig",
    "TrialRecord",
    "ErrorEstimate",
    "BatchResult",
    "AuditReport",
    "CalibrationResult",
    "sign_flip_prob",
    "make_mean",
    "gen_gaussian_samples",
    "run_trial",
    "budget_audit",
    "run_batch",
    "estimate_error",
    "calibrate",
    "bpmt_spike_alternative",
    "bpmt_spread_alternative",
    "bpmt_error_rates",
    "calibrate_bpmt",
    "write_records_csv",
    "CSV_COLUMNS",
]

MEAN_MODES = ("null", "spike", "spread", "random_direction")
PROTOCOL_NAMES = ("private", "limited", "hetero_samples", "hetero_comm", "mix_and_match")

CSV_COLUMNS = ("trial", "mean_mode", "verdict", "bits_total", "public_bits_used", "wall_micros")


# ---------------------------------------------------------------------------
# mean vectors and Gaussian sampling


def sign_flip_prob(mu_i: float) -> float:
    """P(coordinate with mean mu_i quantizes to 1) = 0.5 * erfc(-mu_i/sqrt(2))."""
    return 0.5 * math.erfc(-float(mu_i) / math.sqrt(2.0))


def _flip_probs(mu: np.ndarray) -> np.ndarray:
    """Vectorized sign_flip_prob for the small arrays the law path needs."""
    flat = np.asarray(mu, dtype=np.float64).reshape(-1)
    out = np.array([sign_flip_prob(v) for v in flat])
    return out.reshape(np.asarray(mu).shape)


@dataclass(frozen=True)
class MeanSpec:
    """Which alternative to draw: a mode name plus the target norm."""

    mode: str
    norm: float

    def __post_init__(self):
        if self.mode not in MEAN_MODES:
            raise ParameterError(f"unknown mean mode {self.mode!r}")
        if self.mode == "null":
            if self.norm != 0.0:
                raise ParameterError("null mode must have norm 0")
        elif not (self.norm > 0.0):
            raise ParameterError(f"alternative modes need norm > 0, got {self.norm}")


def make_mean(spec: MeanSpec, d: int, stream: np.random.Generator) -> np.ndarray:
    """Draw the mean vector: zero, a single spike, a flat spread, or a random
    direction, always with Euclidean norm spec.norm (to 1e-12)."""
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    if spec.mode == "null":
        return np.zeros(d)
    if spec.mode == "spike":
        mu = np.zeros(d)
        mu[0] = spec.norm
        return mu
    if spec.mode == "spread":
        return np.full(d, spec.norm / math.sqrt(d))
    direction = stream.standard_normal(d)
    nrm = np.linalg.norm(direction)
    while nrm == 0.0:
        direction = stream.standard_normal(d)
        nrm = np.linalg.norm(direction)
    return direction * (spec.norm / nrm)


def gen_gaussian_samples(mu: np.ndarray, count: int,
                         stream: np.random.Generator) -> np.ndarray:
    """count i.i.d. draws from the identity-covariance Gaussian around mu."""
    mu = np.asarray(mu, dtype=np.float64)
    if count < 1:
        raise ParameterError(f"sample count must be >= 1, got {count}")
    return stream.standard_normal((count, mu.shape[0])) + mu


# ---------------------------------------------------------------------------
# population configuration


@dataclass
class PopulationConfig:
    """An instance of the distributed testing problem plus simulation choices."""

    d: int
    epsilon: float
    s: int
    protocol: str
    users: list[UserSpec]
    partition: list[list[int]] | None = None
    mean_modes: list[str] = field(default_factory=lambda: list(MEAN_MODES))
    # trial-independent derived state (resource arrays, group layouts);
    # populations run to ~10^6 users, so these must not be rebuilt per trial
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError(f"dimension must be >= 1, got {self.d}")
        if not (0.0 < self.epsilon <= 1.0):
            raise ParameterError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.s < 0:
            raise ParameterError(f"public seed budget must be >= 0, got {self.s}")
        if self.protocol not in PROTOCOL_NAMES:
            raise ParameterError(f"unknown protocol {self.protocol!r}")
        if not self.users:
            raise ParameterError("population must contain at least one user")
        for mode in self.mean_modes:
            if mode not in MEAN_MODES:
                raise ParameterError(f"unknown mean mode {mode!r}")
        if "null" not in self.mean_modes:
            raise ParameterError("mean_modes must include 'null' for type-I estimation")
        if self.partition is not None and self.protocol != "mix_and_match":
            raise ParameterError("explicit partitions only apply to mix_and_match")
        self._validate_population()

    def _validate_population(self) -> None:
        ms = self.ms()
        ells = self.ells()
        if self.protocol in ("private", "limited", "hetero_comm") and np.any(ms != 1):
            raise ParameterError(f"{self.protocol} expects exactly one sample per user")
        if self.protocol in ("private", "limited", "hetero_samples"):
            if np.unique(ells).shape[0] != 1:
                raise ParameterError(f"{self.protocol} expects a uniform bit budget")

    def n_users(self) -> int:
        return len(self.users)

    def ms(self) -> np.ndarray:
        if "ms" not in self._cache:
            self._cache["ms"] = np.array([u.m for u in self.users], dtype=np.int64)
        return self._cache["ms"]

    def ells(self) -> np.ndarray:
        if "ells" not in self._cache:
            self._cache["ells"] = np.array([u.ell for u in self.users], dtype=np.int64)
        return self._cache["ells"]

    def scaled(self, multiplier: int) -> "PopulationConfig":
        """Repeat the user mix `multiplier` times (partition recomputed)."""
        if multiplier < 1:
            raise ParameterError(f"multiplier must be >= 1, got {multiplier}")
        return PopulationConfig(
            d=self.d, epsilon=self.epsilon, s=self.s, protocol=self.protocol,
            users=list(self.users) * multiplier, partition=None,
            mean_modes=list(self.mean_modes))

    @classmethod
    def from_dict(cls, raw: dict) -> "PopulationConfig":
        users: list[UserSpec] = []
        for entry in raw.get("users", []):
            count = int(entry.get("count", 1))
            if count < 1:
                raise ParameterError(f"user count must be >= 1, got {count}")
            users.extend(UserSpec(m=int(entry["m"]), ell=int(entry["ell"]))
                         for _ in range(count))
        kwargs = {}
        if "mean_modes" in raw:
            kwargs["mean_modes"] = list(raw["mean_modes"])
        return cls(d=int(raw["d"]), epsilon=float(raw["epsilon"]), s=int(raw["s"]),
                   protocol=str(raw["protocol"]), users=users,
                   partition=raw.get("partition"), **kwargs)

    def to_dict(self) -> dict:
        # run-length encode the user list to keep large configs readable
        runs: list[dict] = []
        for u in self.users:
            if runs and runs[-1]["m"] == u.m and runs[-1]["ell"] == u.ell:
                runs[-1]["count"] += 1
            else:
                runs.append({"m": u.m, "ell": u.ell, "count": 1})
        out = {"d": self.d, "epsilon": self.epsilon, "s": self.s,
               "protocol": self.protocol, "users": runs,
               "mean_modes": list(self.mean_modes)}
        if self.partition is not None:
            out["partition"] = self.partition
        return out

    @classmethod
    def from_json_file(cls, path: str) -> "PopulationConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# one trial


def _trial_streams(master_seed: int, mode: str, trial_index: int
                   ) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent (mean, public-seed, data) streams keyed by (mode, trial)."""
    root = np.random.SeedSequence(master_seed,
                                  spawn_key=(MEAN_MODES.index(mode), trial_index))
    kids = root.spawn(3)
    return tuple(np.random.Generator(np.random.PCG64(k)) for k in kids)


def _pad_mean(mu: np.ndarray, d_pad: int) -> np.ndarray:
    if mu.shape[0] == d_pad:
        return mu
    out = np.zeros(d_pad)
    out[:mu.shape[0]] = mu
    return out


def _law_private(n: int, d: int, ell: int, epsilon: float, mu: np.ndarray,
                 rng: np.random.Generator) -> tuple[Decision, Transcript]:
    """Exact-law twin of private_coin_protocol for a mean-mu population."""
    ell_eff, group, n_sim = private_coin_layout(n, d, ell)
    if n_sim == 0:
        raise InsufficientPopulationError(
            f"{n} users with {ell_eff}-bit blocks cannot fill one {d}-coordinate sample")
    p = _flip_probs(mu)
    sim = (rng.random((n_sim, d)) < p).astype(np.uint8)
    verdict = bpmt_decide(sim, epsilon * SIGN_QUANTIZE_DISTANCE_FACTOR)
    active = n_sim * group
    lengths = np.zeros(n, dtype=np.int64)
    lengths[:active] = ell_eff
    transcript = Transcript.from_lengths(lengths)
    transcript.data[:active * ell_eff] = sim.reshape(-1)
    return Decision(verdict=verdict), transcript


def _limited_offsets(config: "PopulationConfig", n: int, cohort_size: int,
                     ell_eff: int, L: int) -> np.ndarray:
    """Transcript offsets for the 7-cohort layout (constant across trials)."""
    key = ("limited_offsets", n, cohort_size, ell_eff, L)
    if key not in config._cache:
        active = (cohort_size // (L // ell_eff)) * (L // ell_eff)
        lengths = np.zeros(n, dtype=np.int64)
        for r in range(REPETITIONS):
            lengths[r * cohort_size:r * cohort_size + active] = ell_eff
        config._cache[key] = np.concatenate([[0], np.cumsum(lengths)])
    return config._cache[key]


def _law_limited(config: "PopulationConfig", mu: np.ndarray, d_pad: int,
                 seed: PublicSeed, rng: np.random.Generator) -> tuple[Decision, Transcript]:
    n = config.n_users()
    ell = int(config.ells()[0])
    cohort_size = n // REPETITIONS
    if cohort_size == 0:
        raise InsufficientPopulationError(f"need at least {REPETITIONS} users, got {n}")
    d_s, L, ell_eff, scale = limited_coin_params(d_pad, min(ell, d_pad), seed.size)
    eps_eff = config.epsilon * scale
    before = seed.consumed
    chunks: list[np.ndarray] = []
    rep_accepts: list[bool] = []
    for _ in range(REPETITIONS):
        spec = sample_brht(seed, d_pad, d_s)
        mu_rot = brht_apply(spec, mu, keep=L)
        decision_r, transcript_r = _law_private(cohort_size, L, ell_eff, eps_eff, mu_rot, rng)
        rep_accepts.append(decision_r.verdict == ACCEPT)
        chunks.append(transcript_r.data)
    verdict = ACCEPT if all(rep_accepts) else "reject"
    offsets = _limited_offsets(config, n, cohort_size, ell_eff, L)
    merged = Transcript(offsets, np.concatenate(chunks), seed.consumed - before)
    return Decision(verdict=verdict, repetition_accepts=tuple(rep_accepts)), merged


def _law_hetero_samples(config: "PopulationConfig", mu: np.ndarray, d_pad: int,
                        seed: PublicSeed, rng: np.random.Generator
                        ) -> tuple[Decision, Transcript]:
    m = config.ms()
    n = m.shape[0]
    if n < 2:
        raise DegenerateInputError(f"pairwise referee needs >= 2 users, got {n}")
    if np.any(m // REPETITIONS < 1):
        raise DegenerateInputError("every user needs at least 7 samples")
    ell = int(config.ells()[0])
    share = hetero_share(ell, d_pad)
    before = seed.consumed
    specs = [sample_brht(seed, d_pad, share) for _ in range(REPETITIONS)]
    N = hetero_pair_weight(m)
    tau = hetero_threshold(config.epsilon, ell, N, d_pad, n)

    mu_rot = np.stack([brht_apply(sp, mu, keep=share) for sp in specs])  # (7, share)
    bits = np.empty((n, REPETITIONS, share), dtype=np.uint8)
    for value in np.unique(m):
        idx = np.flatnonzero(m == value)
        scale = math.sqrt(int(value) // REPETITIONS)
        p = _flip_probs(scale * mu_rot)                                  # (7, share)
        bits[idx] = rng.random((idx.shape[0], REPETITIONS, share)) < p
    rep_accepts = [
        bpmt_decide_threshold(bits[:, t, :], tau) == ACCEPT for t in range(REPETITIONS)
    ]
    transcript = Transcript.from_lengths(np.full(n, REPETITIONS * share, dtype=np.int64),
                                         public_bits_used=seed.consumed - before)
    transcript.data[:] = bits.reshape(-1)
    verdict = ACCEPT if all(rep_accepts) else "reject"
    return Decision(verdict=verdict, repetition_accepts=tuple(rep_accepts)), transcript


def _law_hetero_comm(config: "PopulationConfig", mu: np.ndarray, d_pad: int,
                     seed: PublicSeed, rng: np.random.Generator
                     ) -> tuple[Decision, Transcript]:
    ells = config.ells()
    n = ells.shape[0]
    d_s, L, shares = hetero_comm_params(d_pad, ells, seed.size)
    eps_inner = (config.epsilon * SIGN_QUANTIZE_DISTANCE_FACTOR
                 * math.sqrt(L / (100.0 * d_pad)))
    total_share = int(shares.sum())
    if total_share < L:
        raise InsufficientPopulationError(
            f"{total_share} per-repetition bits cannot fill one {L}-coordinate sample")
    users, coords = wraparound_coords(shares, L)
    starts = np.cumsum(shares) - shares
    j_flat = np.arange(total_share) - starts[users]
    before = seed.consumed
    transcript = Transcript.from_lengths(REPETITIONS * shares)
    rep_accepts: list[bool] = []
    n_sim = total_share // L
    for r in range(REPETITIONS):
        spec = sample_brht(seed, d_pad, d_s)
        p = _flip_probs(brht_apply(spec, mu, keep=L))
        transmitted = (rng.random(total_share) < p[coords]).astype(np.uint8)
        sim = transmitted[:n_sim * L].reshape(n_sim, L)
        rep_accepts.append(bpmt_decide(sim, eps_inner) == ACCEPT)
        transcript.data[transcript.offsets[users] + r * shares[users] + j_flat] = transmitted
    transcript.public_bits_used = seed.consumed - before
    verdict = ACCEPT if all(rep_accepts) else "reject"
    return Decision(verdict=verdict, repetition_accepts=tuple(rep_accepts)), transcript


@dataclass
class _MixLayout:
    """Trial-independent geometry of a mix-and-match population."""

    d_pad: int
    s: int
    L: int
    K: int
    group_min_m: np.ndarray
    tau: float
    offsets: np.ndarray      # transcript offsets in user order
    gather: np.ndarray       # transcript.data = streams.reshape(-1)[gather]


def _mix_layout(config: "PopulationConfig", d_pad: int) -> _MixLayout:
    key = ("mix_layout", d_pad, config.s)
    cached = config._cache.get(key)
    if cached is not None:
        return cached
    users = config.users
    n = len(users)
    ells = config.ells()
    ms = config.ms()
    L = mix_and_match_keep_length(d_pad, ells, config.s)
    partition = config.partition
    if partition is None:
        partition = greedy_partition(users, L)
    seen = sorted(i for g in partition for i in g)
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
    N = hetero_pair_weight(group_min_m)
    tau = hetero_threshold(config.epsilon, need, N, d_pad, K)

    lengths = np.zeros(n, dtype=np.int64)
    spans: list[tuple[int, int, int, int]] = []   # (user, group, start, span)
    for j, group in enumerate(partition):
        filled = 0
        for i in group:
            span = min(int(ells[i]), need - filled)
            if span > 0:
                spans.append((i, j, filled, span))
                lengths[i] = span
                filled += span
    offsets = np.concatenate([[0], np.cumsum(lengths)])
    gather = np.empty(int(offsets[-1]), dtype=np.int64)
    for i, j, start, span in spans:
        gather[offsets[i]:offsets[i + 1]] = j * need + np.arange(start, start + span)
    layout = _MixLayout(d_pad=d_pad, s=config.s, L=L, K=K, group_min_m=group_min_m,
                        tau=tau, offsets=offsets, gather=gather)
    config._cache[key] = layout
    return layout


def _law_mix_and_match(config: "PopulationConfig", mu: np.ndarray, d_pad: int,
                       seed: PublicSeed, rng: np.random.Generator
                       ) -> tuple[Decision, Transcript]:
    lay = _mix_layout(config, d_pad)
    before = seed.consumed
    specs = [sample_brht(seed, d_pad, lay.L) for _ in range(REPETITIONS)]
    mu_rot = np.stack([brht_apply(sp, mu, keep=lay.L) for sp in specs])  # (7, L)

    blocks = lay.group_min_m // REPETITIONS
    p_of_block = {int(b): _flip_probs(math.sqrt(int(b)) * mu_rot)
                  for b in np.unique(blocks)}
    probs = np.stack([p_of_block[int(b)] for b in blocks])               # (K, 7, L)
    streams = (rng.random((lay.K, REPETITIONS, lay.L)) < probs).astype(np.uint8)

    rep_accepts = [
        bpmt_decide_threshold(streams[:, t, :], lay.tau) == ACCEPT
        for t in range(REPETITIONS)
    ]
    transcript = Transcript(lay.offsets, streams.reshape(-1)[lay.gather],
                            seed.consumed - before)
    verdict = ACCEPT if all(rep_accepts) else "reject"
    return Decision(verdict=verdict, repetition_accepts=tuple(rep_accepts)), transcript


def _literal_dispatch(config: "PopulationConfig", mu: np.ndarray, d_pad: int,
                      seed: PublicSeed, rng: np.random.Generator
                      ) -> tuple[Decision, Transcript]:
    name = config.protocol
    if name == "private":
        samples = gen_gaussian_samples(mu, config.n_users(), rng)
        return private_coin_protocol(samples, d_pad, min(int(config.ells()[0]), d_pad),
                                     config.epsilon)
    if name == "limited":
        samples = gen_gaussian_samples(mu, config.n_users(), rng)
        return limited_coin_protocol(samples, d_pad, min(int(config.ells()[0]), d_pad),
                                     config.epsilon, seed)
    if name == "hetero_samples":
        per_user = [gen_gaussian_samples(mu, int(m), rng) for m in config.ms()]
        return hetero_samples_protocol(per_user, config.ms(), d_pad,
                                       int(config.ells()[0]), config.epsilon, seed)
    if name == "hetero_comm":
        samples = gen_gaussian_samples(mu, config.n_users(), rng)
        return hetero_comm_protocol(samples, d_pad, config.ells(), config.epsilon, seed)
    per_user = [gen_gaussian_samples(mu, int(m), rng) for m in config.ms()]
    return mix_and_match_protocol(per_user, config.users, d_pad, config.epsilon, seed,
                                  partition=config.partition)


_LAW_DISPATCH = {
    "limited": _law_limited,
    "hetero_samples": _law_hetero_samples,
    "hetero_comm": _law_hetero_comm,
    "mix_and_match": _law_mix_and_match,
}


def run_trial(config: PopulationConfig, mean: MeanSpec, trial_index: int,
              master_seed: int = 0, sample_path: str = "law"
              ) -> tuple[Decision, Transcript]:
    """One full simulated protocol execution.

    Derives (mean, public-seed, data) streams from (master_seed, mode, trial),
    draws the mean and the shared seed, and runs the configured protocol.
    Dimensions that are not powers of two are embedded into the next power of
    two: the mean is zero-padded and samples carry fresh unit-variance noise
    in the padded coordinates (realized by sampling in the padded dimension).
    """
    if sample_path not in ("law", "literal"):
        raise ParameterError(f"unknown sample path {sample_path!r}")
    mean_rng, public_rng, data_rng = _trial_streams(master_seed, mean.mode, trial_index)
    mu = make_mean(mean, config.d, mean_rng)
    d_pad = next_pow2(config.d)
    mu = _pad_mean(mu, d_pad)
    seed = PublicSeed.random(config.s, public_rng)
    if sample_path == "literal":
        return _literal_dispatch(config, mu, d_pad, seed, data_rng)
    if config.protocol == "private":
        return _law_private(config.n_users(), d_pad, min(int(config.ells()[0]), d_pad),
                            config.epsilon, mu, data_rng)
    return _LAW_DISPATCH[config.protocol](config, mu, d_pad, seed, data_rng)


# ---------------------------------------------------------------------------
# audit, records, error estimation


@dataclass
class AuditReport:
    ok: bool
    violations: list[str]


def budget_audit(transcript: Transcript, config: PopulationConfig) -> AuditReport:
    """Exact integer checks: per-user bits within budget, seed within s."""
    violations: list[str] = []
    if transcript.n_users != config.n_users():
        violations.append(
            f"transcript covers {transcript.n_users} users, population has {config.n_users()}")
    else:
        ells = config.ells()
        sent = transcript.bits_sent
        for k in np.flatnonzero(sent > ells):
            violations.append(f"user {int(k)} sent {int(sent[k])} bits, budget {int(ells[k])}")
    if transcript.public_bits_used > config.s:
        violations.append(
            f"protocol consumed {transcript.public_bits_used} public bits, budget {config.s}")
    return AuditReport(ok=not violations, violations=violations)


@dataclass
class TrialRecord:
    trial: int
    mean_mode: str
    verdict: str
    bits_total: int
    public_bits_used: int
    wall_micros: int

    def row(self) -> tuple:
        return (self.trial, self.mean_mode, self.verdict, self.bits_total,
                self.public_bits_used, self.wall_micros)


@dataclass
class ErrorEstimate:
    """Empirical error rates; ci_halfwidth is the binomial 95% halfwidth of
    the worst measured rate: 1.96 * sqrt(rate*(1-rate)/trials)."""

    trials: int
    type1_rate: float
    type2_rates: dict[str, float]
    ci_halfwidth: float

    @property
    def worst_rate(self) -> float:
        return max([self.type1_rate, *self.type2_rates.values()])


@dataclass
class BatchResult:
    estimate: ErrorEstimate
    records: list[TrialRecord]
    audit_violations: list[str]


def run_batch(config: PopulationConfig, trials: int, master_seed: int = 0,
              mean_modes: list[str] | None = None, sample_path: str = "law",
              timing: bool = True, protocol_runner=None) -> BatchResult:
    """Run `trials` independent trials per mean mode, audit every transcript,
    and tally error rates.  `protocol_runner` (config, mean, trial) ->
    (decision, transcript) overrides the real protocol when injected."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    modes = list(mean_modes) if mean_modes is not None else list(config.mean_modes)
    if "null" not in modes:
        raise ParameterError("mean modes must include 'null'")
    records: list[TrialRecord] = []
    violations: list[str] = []
    wrong: dict[str, int] = {mode: 0 for mode in modes}
    for mode in modes:
        mean = MeanSpec(mode=mode, norm=0.0 if mode == "null" else config.epsilon)
        for trial in range(trials):
            t0 = time.perf_counter_ns()
            if protocol_runner is None:
                decision, transcript = run_trial(config, mean, trial, master_seed, sample_path)
            else:
                decision, transcript = protocol_runner(config, mean, trial)
            micros = (time.perf_counter_ns() - t0) // 1000 if timing else 0
            report = budget_audit(transcript, config)
            violations.extend(f"mode={mode} trial={trial}: {v}" for v in report.violations)
            wrong_call = (decision.verdict == "reject") if mode == "null" \
                else (decision.verdict == ACCEPT)
            wrong[mode] += int(wrong_call)
            records.append(TrialRecord(
                trial=trial, mean_mode=mode, verdict=decision.verdict,
                bits_total=transcript.total_bits,
                public_bits_used=transcript.public_bits_used, wall_micros=int(micros)))
    type1 = wrong["null"] / trials
    type2 = {mode: wrong[mode] / trials for mode in modes if mode != "null"}
    worst = max([type1, *type2.values()]) if type2 else type1
    ci = 1.96 * math.sqrt(worst * (1.0 - worst) / trials)
    estimate = ErrorEstimate(trials=trials, type1_rate=type1, type2_rates=type2,
                             ci_halfwidth=ci)
    return BatchResult(estimate=estimate, records=records, audit_violations=violations)


def estimate_error(config: PopulationConfig, trials: int, master_seed: int = 0,
                   mean_modes: list[str] | None = None, sample_path: str = "law",
                   protocol_runner=None) -> ErrorEstimate:
    return run_batch(config, trials, master_seed, mean_modes, sample_path,
                     timing=False, protocol_runner=protocol_runner).estimate


def write_records_csv(records: list[TrialRecord], path: str) -> None:
    """Deterministic CSV: fixed column order, \n newlines, integer fields."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(str(v) for v in rec.row()) + "\n")


# ---------------------------------------------------------------------------
# calibration


@dataclass
class CalibrationResult:
    multiplier: int
    n_users: int
    estimate: ErrorEstimate
    scaling_constant: float


def calibrate(config: PopulationConfig, target_error: float, trials: int = 200,
              master_seed: int = 0, max_multiplier: int = 1 << 14,
              sample_path: str = "law") -> CalibrationResult:
    """Double the population until the worst measured rate meets the target.

    The user mix is repeated 1x, 2x, 4x, ... and each candidate is measured
    with `trials` trials per mode; the first multiplier whose worst rate is
    <= target_error wins.  Raises CalibrationFailedError past max_multiplier.
    The scaling constant n * eps^2 * sqrt(mean ell) / d is reported for
    comparison across configurations.
    """
    if not (0.0 < target_error < 0.5):
        raise ParameterError(f"target error must be in (0, 0.5), got {target_error}")
    multiplier = 1
    while multiplier <= max_multiplier:
        candidate = config.scaled(multiplier)
        estimate = estimate_error(candidate, trials, master_seed, sample_path=sample_path)
        if estimate.worst_rate <= target_error:
            n = candidate.n_users()
            constant = (n * config.epsilon ** 2
                        * math.sqrt(float(candidate.ells().mean())) / config.d)
            return CalibrationResult(multiplier=multiplier, n_users=n,
                                     estimate=estimate, scaling_constant=constant)
        multiplier *= 2
    raise CalibrationFailedError(
        f"no multiplier up to {max_multiplier} reached worst error {target_error}")


# ---------------------------------------------------------------------------
# centralized binary-test calibration (no protocol, samples live at the referee)


def bpmt_spike_alternative(d: int, epsilon: float) -> np.ndarray:
    """Mean vector concentrating ||p - u|| = epsilon on as few coordinates as
    possible while keeping every coordinate deviation at most 0.45."""
    k = max(1, math.ceil((epsilon / 0.45) ** 2))
    if k > d:
        raise ParameterError(f"epsilon {epsilon} does not fit in {d} coordinates")
    p = np.full(d, 0.5)
    p[:k] += epsilon / math.sqrt(k)
    return p


def bpmt_spread_alternative(d: int, epsilon: float) -> np.ndarray:
    p = np.full(d, 0.5 + epsilon / math.sqrt(d))
    if p[0] >= 1.0:
        raise ParameterError(f"epsilon {epsilon} too large for a flat spread in {d} dims")
    return p


def bpmt_error_rates(d: int, epsilon: float, n: int, trials: int,
                     master_seed: int = 0) -> dict[str, float]:
    """Monte Carlo error rates of the centralized test at sample size n."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(
        master_seed, spawn_key=(97, n))))
    alternatives = {"spike": bpmt_spike_alternative(d, epsilon),
                    "spread": bpmt_spread_alternative(d, epsilon)}
    wrong = {"null": 0, "spike": 0, "spread": 0}
    for _ in range(trials):
        null_sample = (rng.random((n, d)) < 0.5).astype(np.uint8)
        wrong["null"] += int(bpmt_decide(null_sample, epsilon) == "reject")
        for name, p in alternatives.items():
            alt_sample = (rng.random((n, d)) < p).astype(np.uint8)
            wrong[name] += int(bpmt_decide(alt_sample, epsilon) == ACCEPT)
    return {name: count / trials for name, count in wrong.items()}


def calibrate_bpmt(d: int, epsilon: float, target_error: float, cap: float | None = None,
                   trials: int = 500, master_seed: int = 0) -> int:
    """Doubling search on the centralized test's sample size, capped at
    64 * sqrt(d) / epsilon^2 by default."""
    if cap is None:
        cap = 64.0 * math.sqrt(d) / (epsilon * epsilon)
    n = 8
    while n <= cap:
        rates = bpmt_error_rates(d, epsilon, n, trials, master_seed)
        if max(rates.values()) <= target_error:
            return n
        n *= 2
    raise CalibrationFailedError(
        f"centralized test needs more than {int(cap)} samples for error {target_error}")
