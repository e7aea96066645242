"""Zero-communication compression of a protocol, with exact analytics.

The pipeline:

* a single *sampling experiment*: both parties observe a shared draw
  (u, alpha, beta) and individually accept or reject it based on their own
  factor functions, with the acceptance thresholds inflated by 2**delta_exp;
* the full *zero-communication run*: T independent experiments, then a shared
  random hash h : [T] -> {0,1}^k and target r pick a common accepted
  experiment; each party outputs the transcript's value or aborts;
* an exact dynamic program over the T trials giving the full output law, and
  a vectorized Monte Carlo engine for cross-checking it;
* the conversion of runs into a labeled-rectangle strategy.

Experiment category probabilities are closed-form: with S = 2**delta_exp,

    Pr[both accept on u]  = min(p_a, S*q_b) * min(p_b, S*q_a) / (|U| * S^2)
    Pr[Alice accepts on u] = p_a * q_a / (|U| * S)

and the one-sided categories follow by inclusion-exclusion.  Everything is
exact in rational mode (Fraction inputs, integer delta_exp).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .caps import Caps, default_caps
from .core import FiniteDistribution, InputDistribution, Number, PartialFunction, Rectangle
from .errors import (
    CapacityError,
    ConditioningError,
    DimensionError,
    ParameterError,
)
from .protocol import Factorization, ProtocolTree, factorization, protocol_error

__all__ = [
    "ExperimentInputs",
    "ExperimentOutcome",
    "ExperimentTable",
    "CompressionParameters",
    "CompressionReport",
    "experiment_probabilities",
    "run_experiment",
    "compression_parameters",
    "run_zero_comm",
    "exact_output_distribution",
    "mc_output_distribution",
    "verify_compression",
    "extract_strategy",
    "conditional_distance_check",
    "BOT",
]

BOT = -1  # abort marker in output alphabets

_SUM_TOL = 1e-9


def _pow2(delta_exp) -> Number:
    if isinstance(delta_exp, int) or (
        isinstance(delta_exp, Fraction) and delta_exp.denominator == 1
    ):
        return Fraction(2) ** int(delta_exp)
    return 2.0 ** float(delta_exp)


@dataclass(frozen=True)
class ExperimentInputs:
    """Factor functions for one sampling experiment.

    p_a*p_b, p_a*q_a, and p_b*q_b must each be probability distributions over
    the universe (the target tau and the two parties' estimates nu_a, nu_b).
    """

    p_a: tuple[Number, ...]
    q_a: tuple[Number, ...]
    p_b: tuple[Number, ...]
    q_b: tuple[Number, ...]
    delta_exp: Number

    def __post_init__(self) -> None:
        size = len(self.p_a)
        if not (len(self.q_a) == len(self.p_b) == len(self.q_b) == size) or size == 0:
            raise DimensionError("factor maps must share a nonempty universe")
        if self.delta_exp <= 0:
            raise ParameterError("delta_exp must be positive")
        for name, vals in (
            ("p_a", self.p_a), ("q_a", self.q_a), ("p_b", self.p_b), ("q_b", self.q_b)
        ):
            if any(v < 0 or v > 1 for v in vals):
                raise ParameterError(f"{name} values must lie in [0, 1]")
        for name, total in (
            ("p_a*p_b", sum(a * b for a, b in zip(self.p_a, self.p_b))),
            ("p_a*q_a", sum(a * b for a, b in zip(self.p_a, self.q_a))),
            ("p_b*q_b", sum(a * b for a, b in zip(self.p_b, self.q_b))),
        ):
            if isinstance(total, Fraction):
                if total != 1:
                    raise ParameterError(f"{name} sums to {total}, not 1")
            elif abs(total - 1) > _SUM_TOL:
                raise ParameterError(f"{name} sums to {total}, not 1")

    @property
    def universe_size(self) -> int:
        return len(self.p_a)

    @classmethod
    def from_factorization(cls, fac: Factorization, delta_exp) -> "ExperimentInputs":
        return cls(fac.p_a, fac.q_a, fac.p_b, fac.q_b, delta_exp)


@dataclass(frozen=True)
class ExperimentOutcome:
    kind: Literal["both", "alice_only", "bob_only", "neither"]
    u: int | None

    def __post_init__(self) -> None:
        if (self.kind == "neither") != (self.u is None):
            raise ParameterError("u must be present exactly when someone accepted")


@dataclass(frozen=True)
class ExperimentTable:
    """Exact per-u category probabilities of one experiment."""

    both: tuple[Number, ...]
    alice_only: tuple[Number, ...]
    bob_only: tuple[Number, ...]
    neither: Number

    def alice_accept_total(self) -> Number:
        return sum(self.both) + sum(self.alice_only)

    def bob_accept_total(self) -> Number:
        return sum(self.both) + sum(self.bob_only)

    def accepted_distribution(self) -> FiniteDistribution:
        """Law of the experiment output conditioned on both parties accepting."""
        total = sum(self.both)
        if total == 0:
            raise ConditioningError("experiment never accepted")
        return FiniteDistribution(tuple(b / total for b in self.both))


def experiment_probabilities(inp: ExperimentInputs) -> ExperimentTable:
    """Closed-form category probabilities of a single experiment."""
    size = inp.universe_size
    scale = _pow2(inp.delta_exp)
    inv_u = Fraction(1, size) if isinstance(scale, Fraction) else 1.0 / size
    both, alice_only, bob_only = [], [], []
    for pa, qa, pb, qb in zip(inp.p_a, inp.q_a, inp.p_b, inp.q_b):
        # alpha <= min(pa, S*qb) and beta <= min(pb, S*qa), alpha/beta ~ U[0, S]
        p_both = inv_u * min(pa, scale * qb) * min(pb, scale * qa) / (scale * scale)
        p_alice = inv_u * pa * qa / scale
        p_bob = inv_u * pb * qb / scale
        both.append(p_both)
        alice_only.append(p_alice - p_both)
        bob_only.append(p_bob - p_both)
    covered = sum(both) + sum(alice_only) + sum(bob_only)
    return ExperimentTable(tuple(both), tuple(alice_only), tuple(bob_only), 1 - covered)


def run_experiment(inp: ExperimentInputs, rng: np.random.Generator) -> ExperimentOutcome:
    """Sample one experiment from an externally seeded stream."""
    size = inp.universe_size
    scale = float(_pow2(inp.delta_exp))
    u = int(rng.integers(size))
    alpha = rng.random() * scale
    beta = rng.random() * scale
    alice = alpha <= float(inp.p_a[u]) and beta <= scale * float(inp.q_a[u])
    bob = alpha <= scale * float(inp.q_b[u]) and beta <= float(inp.p_b[u])
    if alice and bob:
        return ExperimentOutcome("both", u)
    if alice:
        return ExperimentOutcome("alice_only", u)
    if bob:
        return ExperimentOutcome("bob_only", u)
    return ExperimentOutcome("neither", None)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompressionParameters:
    """(delta_exp, trials, hash_bits) driving a zero-communication run.

    In paper-exact mode the three are derived from the accuracy delta and the
    information cost by the ceiling formulas; lambda is always
    2**-(hash_bits + delta_exp).
    """

    delta: float
    info_cost: float
    delta_exp: int
    trials: int
    hash_bits: int
    mode: Literal["paper-exact", "override"]

    def __post_init__(self) -> None:
        if not (0 < self.delta < 1):
            raise ParameterError("delta must lie in (0, 1)")
        if self.info_cost < 0:
            raise ParameterError("info_cost must be nonnegative")
        if self.delta_exp < 1 or self.trials < 1 or self.hash_bits < 0:
            raise ParameterError("delta_exp, trials >= 1 and hash_bits >= 0 required")

    @property
    def lambda_exponent(self) -> int:
        return self.hash_bits + self.delta_exp

    @property
    def lambda_(self) -> float:
        return math.ldexp(1.0, -self.lambda_exponent)

    @property
    def lambda_exact(self) -> Fraction:
        return Fraction(1, 2**self.lambda_exponent)


def compression_parameters(
    delta: float,
    info_cost: float,
    universe_size: int,
    overrides: tuple[int, int, int] | None = None,
) -> CompressionParameters:
    """Derive (delta_exp, trials, hash_bits) from (delta, info_cost, |U|).

    Pass ``overrides=(delta_exp, trials, hash_bits)`` to bypass the derivation
    (the analytic guarantees are then not asserted)."""
    if not (0 < delta < 1):
        raise ParameterError("delta must lie in (0, 1)")
    if info_cost < 0:
        raise ParameterError("info_cost must be nonnegative")
    if overrides is not None:
        d, t, k = overrides
        if d < 1 or t < 1 or k < 0:
            raise ParameterError("override parameters must be positive (hash_bits >= 0)")
        return CompressionParameters(delta, info_cost, d, t, k, "override")
    if universe_size < 1:
        raise ParameterError("universe_size must be positive")
    delta_exp = math.ceil((4 / delta) * (8 * info_cost / delta + 1))
    log_term = math.log(8 / delta)
    # 2**delta_exp can be astronomically large; keep the product exact.
    trials = math.ceil(
        Fraction(universe_size * 2**delta_exp) * Fraction.from_float(log_term)
    )
    hash_bits = math.ceil(delta_exp + math.log2((64 / delta) * log_term**2))
    return CompressionParameters(
        delta, info_cost, delta_exp, trials, hash_bits, "paper-exact"
    )


# ---------------------------------------------------------------------------
# Zero-communication run (scalar, reproducible)
# ---------------------------------------------------------------------------


def _experiment_setup(pi: ProtocolTree, mu: InputDistribution, x: int, y: int, params):
    fac = factorization(pi, mu, x, y)
    return ExperimentInputs.from_factorization(fac, params.delta_exp)


def run_zero_comm(
    pi: ProtocolTree,
    mu: InputDistribution,
    x: int,
    y: int,
    params: CompressionParameters,
    seed: int,
) -> int:
    """One full zero-communication run; returns an output value or BOT.

    Fully deterministic given (seed, params, x, y): experiment i draws from a
    stream derived from (seed, i) and the hash draws come from a separate
    shared stream, so experiments could be replayed independently.
    """
    inp = _experiment_setup(pi, mu, x, y, params)
    root = np.random.SeedSequence(seed)
    shared_ss, exp_root = root.spawn(2)
    outputs = pi.leaf_outputs()
    trials = params.trials
    alice_accepts: list[tuple[int, int]] = []  # (index, u)
    bob_accepts: list[tuple[int, int]] = []
    for i, child in enumerate(exp_root.spawn(trials)):
        outcome = run_experiment(inp, np.random.Generator(np.random.Philox(child)))
        if outcome.kind in ("both", "alice_only"):
            alice_accepts.append((i, outcome.u))
        if outcome.kind in ("both", "bob_only"):
            bob_accepts.append((i, outcome.u))
    shared = np.random.Generator(np.random.Philox(shared_ss))
    space = 2**params.hash_bits
    hashes = shared.integers(0, space, size=trials)
    r = int(shared.integers(0, space))
    alice_out = BOT
    if alice_accepts:
        i, u = alice_accepts[0]
        if hashes[i] == r:
            alice_out = outputs[u]
    bob_out = BOT
    for j, u in bob_accepts:
        if hashes[j] == r:
            bob_out = outputs[u]
            break
    if alice_out != BOT and alice_out == bob_out:
        return alice_out
    return BOT


# ---------------------------------------------------------------------------
# Exact output-distribution DP
# ---------------------------------------------------------------------------

_A_PENDING = -2
_A_ABORT = -1
_B_SEARCHING = -2


@dataclass(frozen=True)
class ExactLaw:
    """Exact law of one zero-communication run on fixed inputs."""

    output: tuple[float, ...]      # over Z, index z
    abort: float
    not_abort: float
    collision: float               # Pr of the hash-collision event
    alice_output: tuple[float, ...]  # law of Alice's own output, BOT last
    bob_output: tuple[float, ...]

    def conditional_output(self) -> tuple[float, ...]:
        if self.not_abort == 0:
            raise ConditioningError("protocol always aborts")
        return tuple(p / self.not_abort for p in self.output)


def exact_output_distribution(
    pi: ProtocolTree,
    mu: InputDistribution,
    x: int,
    y: int,
    params: CompressionParameters,
    caps: Caps | None = None,
) -> ExactLaw:
    """Exact joint law of (Alice output, Bob output) via a trial-by-trial DP.

    Uses the independence of trials and the fact that the per-trial hash-match
    indicators are i.i.d. Bernoulli(2**-hash_bits) and independent of the
    experiment outcomes.
    """
    caps = caps or default_caps()
    if params.trials > caps.dp_trials:
        raise CapacityError(
            f"T={params.trials} exceeds the DP cap {caps.dp_trials}; "
            "use MC mode or raise the dp_trials cap"
        )
    if pi.universe_size > caps.dp_universe:
        raise CapacityError(
            f"|U|={pi.universe_size} exceeds the DP cap {caps.dp_universe}"
        )
    inp = _experiment_setup(pi, mu, x, y, params)
    table = experiment_probabilities(inp)
    outputs = pi.leaf_outputs()
    nz = pi.z_size
    # Aggregate categories by the transcript's output value.
    both_z = [0.0] * nz
    aonly_z = [0.0] * nz
    bonly_z = [0.0] * nz
    for u, z in enumerate(outputs):
        both_z[z] += float(table.both[u])
        aonly_z[z] += float(table.alice_only[u])
        bonly_z[z] += float(table.bob_only[u])
    return _dp_law(both_z, aonly_z, bonly_z, params, nz)


def _dp_law(both_z, aonly_z, bonly_z, params: CompressionParameters, nz: int) -> ExactLaw:
    rho = math.ldexp(1.0, -params.hash_bits)
    trials = params.trials
    alice_any = sum(both_z) + sum(aonly_z)       # Pr[Alice accepts a trial]
    bob_any_z = [b + o for b, o in zip(both_z, bonly_z)]
    bob_any = sum(bob_any_z)

    # State: (a, b); a in {-2 pending, -1 aborted, z}; b in {-2 searching, z}.
    state = {(_A_PENDING, _B_SEARCHING): 1.0}
    for _ in range(trials):
        nxt: dict[tuple[int, int], float] = {}

        def add(key, p):
            if p:
                nxt[key] = nxt.get(key, 0.0) + p

        for (a, b), p in state.items():
            if a != _A_PENDING and b != _B_SEARCHING:
                add((a, b), p)
                continue
            if a == _A_PENDING and b == _B_SEARCHING:
                for z in range(nz):
                    add((z, z), p * both_z[z] * rho)
                    add((z, _B_SEARCHING), p * aonly_z[z] * rho)
                    add((_A_PENDING, z), p * bonly_z[z] * rho)
                add((_A_ABORT, _B_SEARCHING), p * alice_any * (1.0 - rho))
                stay_p = 1.0 - alice_any - bob_any + sum(both_z)  # neither
                stay_p += sum(bonly_z) * (1.0 - rho)              # bob miss
                add((_A_PENDING, _B_SEARCHING), p * stay_p)
            elif a == _A_PENDING:  # Bob already found b
                for z in range(nz):
                    add((z, b), p * (both_z[z] + aonly_z[z]) * rho)
                add((_A_ABORT, b), p * alice_any * (1.0 - rho))
                add((_A_PENDING, b), p * (1.0 - alice_any))
            else:  # Alice decided, Bob still searching
                for z in range(nz):
                    add((a, z), p * bob_any_z[z] * rho)
                add((a, _B_SEARCHING), p * (1.0 - bob_any * rho))
        state = nxt

    output = [0.0] * nz
    alice_law = [0.0] * (nz + 1)
    bob_law = [0.0] * (nz + 1)
    not_abort = 0.0
    for (a, b), p in state.items():
        a_out = BOT if a in (_A_PENDING, _A_ABORT) else a
        b_out = BOT if b == _B_SEARCHING else b
        alice_law[a_out if a_out != BOT else nz] += p
        bob_law[b_out if b_out != BOT else nz] += p
        if a_out != BOT and a_out == b_out:
            output[a_out] += p
            not_abort += p

    union = alice_any + bob_any - sum(both_z)
    q = union * rho
    collision = 1.0 - (1.0 - q) ** trials - trials * q * (1.0 - q) ** (trials - 1)
    collision = max(collision, 0.0)
    return ExactLaw(
        tuple(output),
        1.0 - not_abort,
        not_abort,
        collision,
        tuple(alice_law),
        tuple(bob_law),
    )


# ---------------------------------------------------------------------------
# Monte Carlo engine (vectorized, chunked, reproducible)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McLaw:
    """Empirical law of the run output over Z plus BOT."""

    counts: tuple[int, ...]   # per z, then BOT last
    samples: int

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(c / self.samples for c in self.counts)

    def max_standard_error(self) -> float:
        return max(
            math.sqrt(p * (1 - p) / self.samples) for p in self.frequencies
        )


def mc_output_distribution(
    pi: ProtocolTree,
    mu: InputDistribution,
    x: int,
    y: int,
    params: CompressionParameters,
    samples: int,
    seed: int,
    chunk: int = 100_000,
) -> McLaw:
    """Empirical output law over many runs, sampled from the raw experiment
    coins (u, alpha, beta) plus the per-trial hash-match indicator."""
    inp = _experiment_setup(pi, mu, x, y, params)
    outputs = np.array(pi.leaf_outputs())
    size = inp.universe_size
    scale = float(_pow2(params.delta_exp))
    pa = np.array([float(v) for v in inp.p_a])
    qa = np.array([float(v) for v in inp.q_a])
    pb = np.array([float(v) for v in inp.p_b])
    qb = np.array([float(v) for v in inp.q_b])
    rho = math.ldexp(1.0, -params.hash_bits)
    trials = params.trials
    nz = pi.z_size

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    counts = np.zeros(nz + 1, dtype=np.int64)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        u = rng.integers(0, size, size=(n, trials))
        alpha = rng.random((n, trials)) * scale
        beta = rng.random((n, trials)) * scale
        match = rng.random((n, trials)) < rho
        acc_a = (alpha <= pa[u]) & (beta <= scale * qa[u])
        acc_b = (alpha <= scale * qb[u]) & (beta <= pb[u])

        rows = np.arange(n)
        has_a = acc_a.any(axis=1)
        first_a = acc_a.argmax(axis=1)
        a_ok = has_a & match[rows, first_a]
        a_out = np.where(a_ok, outputs[u[rows, first_a]], BOT)

        b_hits = acc_b & match
        has_b = b_hits.any(axis=1)
        first_b = b_hits.argmax(axis=1)
        b_out = np.where(has_b, outputs[u[rows, first_b]], BOT)

        agreed = (a_out != BOT) & (a_out == b_out)
        out = np.where(agreed, a_out, nz)  # nz slot counts aborts
        counts += np.bincount(out, minlength=nz + 1)
        done += n
    return McLaw(tuple(int(c) for c in counts), samples)


# ---------------------------------------------------------------------------
# Compression verification (Eqs. of the main compression guarantee)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InputReport:
    x: int
    y: int
    not_abort: float
    eq5_pass: bool
    collision: float
    standard_error: float | None = None


@dataclass(frozen=True)
class CompressionReport:
    """Per-input and aggregate verification of the compression guarantees."""

    params: CompressionParameters
    engine: Literal["dp", "mc"]
    inputs: tuple[InputReport, ...]
    aggregate_not_abort: float
    eq4_distance: float
    eq4_pass: bool
    eq5_pass: bool
    eq6_pass: bool
    collision_bound_pass: bool | None
    mc_samples: int | None = None

    @property
    def all_pass(self) -> bool:
        return self.eq4_pass and self.eq5_pass and self.eq6_pass

    def csv_rows(self) -> list[str]:
        lam = self.params.lambda_
        header = (
            f"# engine={self.engine} mode={self.params.mode} "
            f"delta={self.params.delta} delta_exp={self.params.delta_exp} "
            f"trials={self.params.trials} hash_bits={self.params.hash_bits} "
            f"lambda={lam!r}"
        )
        rows = [header, "x,y,prob_not_abort,lambda,eq5_pass,eq6_pass"]
        for rep in self.inputs:
            rows.append(
                f"{rep.x},{rep.y},{rep.not_abort!r},{lam!r},{rep.eq5_pass},"
            )
        rows.append(
            f"aggregate,,{self.aggregate_not_abort!r},{lam!r},,{self.eq6_pass}"
        )
        rows.append(
            f"eq4,,{self.eq4_distance!r},,,{self.eq4_pass}"
        )
        return rows


def _protocol_output_law(pi: ProtocolTree, x: int, y: int) -> list[float]:
    outputs = pi.leaf_outputs()
    from .protocol import transcript_distribution

    law = [0.0] * pi.z_size
    for u, p in enumerate(transcript_distribution(pi, x, y).weights):
        law[outputs[u]] += float(p)
    return law


def verify_compression(
    pi: ProtocolTree,
    f: PartialFunction | None,
    mu: InputDistribution,
    delta: float,
    params: CompressionParameters,
    engine: Literal["dp", "mc"] = "dp",
    mc_samples: int = 1_000_000,
    seed: int = 0,
    caps: Caps | None = None,
) -> CompressionReport:
    """Check the three compression guarantees against the exact (or
    sampled) law of the derived zero-communication protocol.

    Per input: Pr[not abort] <= (1+delta)*lambda.  Aggregated over mu:
    Pr[not abort] >= (1-delta)*lambda, and the statistical distance between
    (X, Y, original output) and (X, Y, run output | not abort) is at most
    delta.  In paper-exact mode a failure is a defect; under overrides the
    report is informational.
    """
    if not (0 < delta < 1):
        raise ParameterError("delta must lie in (0, 1)")
    caps = caps or default_caps()
    lam = params.lambda_
    tol = 1e-9 * lam  # float-rounding allowance on exact quantities

    cells = [
        (x, y)
        for x in range(pi.x_size)
        for y in range(pi.y_size)
        if mu.x_marginal(x) > 0 and mu.y_marginal(y) > 0
    ]
    reports = []
    run_laws: dict[tuple[int, int], tuple[list[float], float]] = {}
    collision_ok: bool | None = True if params.mode == "paper-exact" else None
    for x, y in cells:
        if engine == "dp":
            law = exact_output_distribution(pi, mu, x, y, params, caps)
            out, not_abort, collision = list(law.output), law.not_abort, law.collision
            se = None
        else:
            mc = mc_output_distribution(pi, mu, x, y, params, mc_samples, seed + 7919 * (x * pi.y_size + y))
            out = [c / mc.samples for c in mc.counts[:-1]]
            not_abort = sum(out)
            collision = float("nan")
            se = mc.max_standard_error()
        eq5 = not_abort <= (1 + delta) * lam + (tol if engine == "dp" else 5 * (se or 0))
        reports.append(InputReport(x, y, not_abort, eq5, collision, se))
        run_laws[(x, y)] = (out, not_abort)
        if collision_ok is not None and engine == "dp":
            if collision > (delta / 16) * lam + tol:
                collision_ok = False

    aggregate = sum(float(mu.prob(x, y)) * run_laws[(x, y)][1] for x, y in cells)
    eq6 = aggregate >= (1 - delta) * lam - (tol if engine == "dp" else 0.0)

    # Statistical distance between the two joint (X, Y, output) laws.
    if aggregate == 0:
        distance = 1.0
    else:
        distance = 0.0
        for x, y in cells:
            w = float(mu.prob(x, y))
            if w == 0:
                continue
            orig = _protocol_output_law(pi, x, y)
            run_out, _ = run_laws[(x, y)]
            for z in range(pi.z_size):
                p = w * orig[z]
                q = w * run_out[z] / aggregate
                distance += abs(p - q)
        distance /= 2.0
    eq4 = distance <= delta + 1e-9

    return CompressionReport(
        params,
        engine,
        tuple(reports),
        aggregate,
        distance,
        eq4,
        all(r.eq5_pass for r in reports),
        eq6,
        collision_ok,
        mc_samples if engine == "mc" else None,
    )


# ---------------------------------------------------------------------------
# Strategy extraction (zero-communication runs -> labeled rectangles)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StrategyReport:
    """Empirical feasibility of the extracted strategy for the relaxed
    partition program at error eps + 3*delta."""

    eps: float
    delta: float
    eta_target: float            # (1 + delta) * lambda / |Z|
    correctness_lhs: float       # empirical mu-weighted correct coverage
    correctness_threshold: float  # (1 - eps - 3 delta) * eta_target
    correctness_se: float
    max_coverage: float          # empirical max per-input coverage
    coverage_se: float
    weight_total: Fraction       # exact; must be 1
    seeds: int


def extract_strategy(
    pi: ProtocolTree,
    f: PartialFunction,
    mu: InputDistribution,
    delta: float,
    params: CompressionParameters,
    seed_count: int,
    seed: int = 0,
    caps: Caps | None = None,
):
    """Convert sampled zero-communication runs into a labeled-rectangle
    strategy and report its empirical feasibility.

    For each sampled shared-randomness seed, Alice's output map over X and
    Bob's over Y are computed (each depends only on the party's own input),
    every label z gets the rectangle a^{-1}(z) x b^{-1}(z) with weight
    1/(seeds * |Z|), and the empirical correctness/coverage statistics are
    compared against eta = (1 + delta) * lambda / |Z|.
    """
    from .bounds import LabeledRectangleStrategy

    caps = caps or default_caps()
    if pi.x_size * pi.y_size > caps.grid_cells:
        raise CapacityError(f"input grid exceeds {caps.grid_cells} cells")
    if seed_count < 1:
        raise ParameterError("seed_count must be positive")
    if not (0 < delta < 1):
        raise ParameterError("delta must lie in (0, 1)")
    mu.check_compatible(f)

    nx, ny, nz = pi.x_size, pi.y_size, pi.z_size
    size = pi.universe_size
    scale = float(_pow2(params.delta_exp))
    trials = params.trials
    rho = math.ldexp(1.0, -params.hash_bits)
    outputs = np.array(pi.leaf_outputs())

    pa = np.array([[float(v) for v in pi.alice_factors(x)] for x in range(nx)])
    pb = np.array([[float(v) for v in pi.bob_factors(y)] for y in range(ny)])
    qa = np.zeros((nx, size))
    qb = np.zeros((ny, size))
    for x in range(nx):
        fac = factorization(pi, mu, x, 0)
        qa[x] = [float(v) for v in fac.q_a]
    for y in range(ny):
        fac = factorization(pi, mu, 0, y)
        qb[y] = [float(v) for v in fac.q_b]

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    a_maps = np.full((seed_count, nx), BOT, dtype=np.int64)
    b_maps = np.full((seed_count, ny), BOT, dtype=np.int64)
    chunk = max(1, min(seed_count, 2_000_000 // max(trials, 1)))
    done = 0
    while done < seed_count:
        n = min(chunk, seed_count - done)
        u = rng.integers(0, size, size=(n, trials))
        alpha = rng.random((n, trials)) * scale
        beta = rng.random((n, trials)) * scale
        match = rng.random((n, trials)) < rho
        rows = np.arange(n)
        for x in range(nx):
            acc = (alpha <= pa[x][u]) & (beta <= scale * qa[x][u])
            has = acc.any(axis=1)
            first = acc.argmax(axis=1)
            ok = has & match[rows, first]
            a_maps[done:done + n, x] = np.where(ok, outputs[u[rows, first]], BOT)
        for y in range(ny):
            hits = (alpha <= scale * qb[y][u]) & (beta <= pb[y][u]) & match
            has = hits.any(axis=1)
            first = hits.argmax(axis=1)
            b_maps[done:done + n, y] = np.where(has, outputs[u[rows, first]], BOT)
        done += n

    # Accumulate rectangle weights: label z gets a^{-1}(z) x b^{-1}(z).
    xbits = 1 << np.arange(nx)
    ybits = 1 << np.arange(ny)
    weights: dict[tuple[Rectangle, int], int] = {}
    denom = seed_count * nz
    for z in range(nz):
        row_masks = ((a_maps == z) * xbits).sum(axis=1)
        col_masks = ((b_maps == z) * ybits).sum(axis=1)
        for rm, cm in zip(row_masks.tolist(), col_masks.tolist()):
            key = (Rectangle(rm, cm), z)
            weights[key] = weights.get(key, 0) + 1

    eps = protocol_error(pi, f, mu)
    eta = (1 + delta) * params.lambda_ / nz

    # Per-seed statistics for the correctness and coverage estimates.
    agree = a_maps[:, :, None] == b_maps[:, None, :]  # (seeds, nx, ny)
    valid = a_maps[:, :, None] != BOT
    joint_ok = agree & valid
    mu_arr = np.array([[float(mu.prob(x, y)) for y in range(ny)] for x in range(nx)])
    fvals = np.array(
        [[-1 if f.value(x, y) is None else f.value(x, y) for y in range(ny)]
         for x in range(nx)]
    )
    defined = fvals >= 0
    correct = joint_ok & (
        (~defined)[None, :, :] | (a_maps[:, :, None] == fvals[None, :, :])
    )
    per_seed_corr = (correct * mu_arr[None, :, :]).sum(axis=(1, 2)) / nz
    corr_mean = float(per_seed_corr.mean())
    corr_se = float(per_seed_corr.std(ddof=1) / math.sqrt(seed_count)) if seed_count > 1 else 0.0

    coverage = joint_ok.mean(axis=0) / nz  # per (x, y)
    max_cov = float(coverage.max())
    p_hat = max_cov * nz  # underlying per-seed indicator mean
    cov_se = math.sqrt(max(p_hat * (1 - p_hat), 0.0) / seed_count) / nz

    entries = [
        (rect, z, Fraction(count, denom)) for (rect, z), count in sorted(
            weights.items(), key=lambda kv: (kv[0][1], kv[0][0].row_mask, kv[0][0].col_mask)
        )
    ]
    efficiency = max(max_cov, eta) or eta
    strategy = LabeledRectangleStrategy.build(entries, efficiency, nx, ny)
    report = StrategyReport(
        eps=eps,
        delta=delta,
        eta_target=eta,
        correctness_lhs=corr_mean,
        correctness_threshold=(1 - eps - 3 * delta) * eta,
        correctness_se=corr_se,
        max_coverage=max_cov,
        coverage_se=cov_se,
        weight_total=sum((w for _, _, w in entries), Fraction(0)),
        seeds=seed_count,
    )
    return strategy, report


# ---------------------------------------------------------------------------
# Conditional-distance utility
# ---------------------------------------------------------------------------


def conditional_distance_check(
    pi_dist: FiniteDistribution,
    space_weights: Sequence[Number],
    value_map: Sequence[int],
    event_f: int,
    event_h: int,
    c: Number,
) -> tuple[bool, Number, Number]:
    """Check |Pi'_H - Pi| <= c + Pr[F] / Pr[H] on a finite space.

    ``space_weights`` is the law of the underlying space, ``value_map`` sends
    each point to the universe of ``pi_dist``, and events are bit masks over
    the space.  The caller guarantees |Pi'_{H minus F} - Pi| <= c.

    Returns (holds, measured |Pi'_H - Pi|, bound).
    """
    if len(space_weights) != len(value_map):
        raise DimensionError("space and value map sizes differ")
    n = len(space_weights)
    pr_h = sum(w for i, w in enumerate(space_weights) if (event_h >> i) & 1)
    if pr_h == 0:
        raise ConditioningError("conditioning event has zero probability")
    pr_f = sum(w for i, w in enumerate(space_weights) if (event_f >> i) & 1)
    cond = [0 * pi_dist.weights[0]] * pi_dist.size
    for i, w in enumerate(space_weights):
        if (event_h >> i) & 1 and w:
            cond[value_map[i]] = cond[value_map[i]] + w / pr_h
    measured = max(
        sum(cw - pw for cw, pw in zip(cond, pi_dist.weights) if cw > pw),
        sum(pw - cw for cw, pw in zip(cond, pi_dist.weights) if pw > cw),
    )
    bound = c + pr_f / pr_h
    slack = 0 if isinstance(measured, Fraction) and isinstance(bound, Fraction) else 1e-12
    return measured <= bound + slack, measured, bound
