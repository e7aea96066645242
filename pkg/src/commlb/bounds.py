"""Rectangle-based lower-bound quantities as linear programs.

Five quantities over a partial function f on an x_size * y_size grid:

* relaxed partition bound, fixed distribution (``bprt_mu``) and
  distribution-free (``bprt``);
* partition bound (``prt``);
* smooth rectangle bound per output label (``srec``);
* rectangle/corruption bound in dual form (``rect_dual``), plus the explicit
  corruption witness construction (``corruption_witness``);
* discrepancy (``discrepancy``), by direct enumeration.

Every LP result carries both a primal and a dual witness and the two
objective values are required to agree (1e-6 float, exact rational).  The
chain 1 - eps <= srec <= bprt <= prt is checked by ``verify_bound_chain``.

The distribution-free bprt is solved in its dual form: variables alpha_{x,y}
(one per input, rewarding correctness) and beta_{x,y} (one per input, paying
for coverage), maximizing (1-eps)*sum(alpha) - sum(beta) under one constraint
per (rectangle, label) pair.  The weight-form primal witness is read off the
LP row multipliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .caps import Caps, default_caps
from .core import (
    InputDistribution,
    Number,
    PartialFunction,
    Rectangle,
    enumerate_rectangles,
)
from .errors import DegenerateInputError, ParameterError, SolverError
from .solver import LpProblem, LpSolution, lp_solve

__all__ = [
    "LabeledRectangleStrategy",
    "BoundResult",
    "ChainReport",
    "bprt_mu",
    "bprt",
    "prt",
    "srec",
    "rect_dual",
    "corruption_witness",
    "discrepancy",
    "verify_bound_chain",
    "check_witness",
    "CSV_HEADER",
    "csv_row",
    "csv_label",
]

_GAP_TOL = 1e-6
_WITNESS_TOL = 1e-7
_NORM_TOL = 1e-9

CSV_HEADER = "bound_name,function,x_size,y_size,z_size,eps,value,log2_value,solver_status"


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabeledRectangleStrategy:
    """A distribution over (rectangle, label) pairs with efficiency eta.

    The normal form of a zero-communication protocol: weights p_{R,z} sum to
    1 and no input is covered with total weight above eta.
    """

    entries: tuple[tuple[Rectangle, int, Number], ...]
    efficiency: Number
    x_size: int
    y_size: int

    def __post_init__(self) -> None:
        if self.efficiency <= 0:
            raise ParameterError("efficiency must be positive")
        if any(w < 0 for _, _, w in self.entries):
            raise ParameterError("negative strategy weight")
        total = sum((w for _, _, w in self.entries), Fraction(0))
        if abs(total - 1) > _NORM_TOL:
            raise ParameterError(f"strategy weights sum to {float(total)}, not 1")
        slack = self.efficiency * (1 + _NORM_TOL)
        for x in range(self.x_size):
            for y in range(self.y_size):
                if self.coverage(x, y) > slack:
                    raise ParameterError(
                        f"coverage at ({x},{y}) exceeds efficiency {self.efficiency}"
                    )

    @classmethod
    def build(cls, entries, efficiency, x_size, y_size) -> "LabeledRectangleStrategy":
        return cls(tuple(entries), efficiency, x_size, y_size)

    def coverage(self, x: int, y: int) -> Number:
        return sum(w for rect, _, w in self.entries if rect.contains(x, y))

    def correct_coverage(self, x: int, y: int, z: int | None) -> Number:
        """Weight on pairs that answer (x, y) correctly; any label counts when
        z is None (the input is outside the promise)."""
        return sum(
            w
            for rect, label, w in self.entries
            if rect.contains(x, y) and (z is None or label == z)
        )

    def weight_map(self) -> dict[tuple[Rectangle, int], Number]:
        out: dict[tuple[Rectangle, int], Number] = {}
        for rect, z, w in self.entries:
            key = (rect, z)
            out[key] = out.get(key, 0) + w
        return out


@dataclass(frozen=True)
class BoundResult:
    bound_name: str
    value: Number
    epsilon: Number
    primal_witness: object
    dual_witness: object
    solver_status: str
    dual_value: Number | None = None

    def __post_init__(self) -> None:
        if self.value < -1e-9:
            raise SolverError(f"{self.bound_name} value {self.value} is negative")


@dataclass(frozen=True)
class ChainReport:
    eps: Number
    bprt_value: Number
    prt_value: Number
    srec_values: tuple[tuple[int, Number], ...]
    tol: Number
    passed: bool
    failures: tuple[str, ...]


# ---------------------------------------------------------------------------
# Shared construction helpers
# ---------------------------------------------------------------------------


def _check_eps(eps) -> None:
    if not (0 <= eps < 1):
        raise ParameterError(f"eps must lie in [0, 1), got {eps}")


def _rectangles(f: PartialFunction, caps: Caps) -> list[Rectangle]:
    return [r for r in enumerate_rectangles(f.x_size, f.y_size, caps) if not r.is_empty]


def _one(mode: str) -> Number:
    return Fraction(1) if mode == "rational" else 1.0


def _coerce(v, mode: str) -> Number:
    if mode == "rational":
        return v if isinstance(v, (Fraction, int)) else Fraction(v)
    return float(v)


def _strategy_from_weights(weights, value, x_size, y_size) -> LabeledRectangleStrategy:
    """Scale raw LP weights w (summing to `value`) into a normalized strategy
    with efficiency 1/value (inflated to the actual max coverage when float
    noise pushes a cell fractionally above it)."""
    total = sum((w for _, _, w in weights), Fraction(0))
    if total <= 0:
        raise SolverError("cannot normalize an all-zero weight vector")
    entries = [(rect, z, w / total) for rect, z, w in weights if w > 0]
    efficiency = 1 / total
    for x in range(x_size):
        for y in range(y_size):
            cov = sum(w for rect, _, w in entries if rect.contains(x, y))
            if cov > efficiency:
                efficiency = cov
    return LabeledRectangleStrategy.build(entries, efficiency, x_size, y_size)


def _require_optimal(sol: LpSolution, what: str) -> None:
    if sol.status != "optimal":
        raise SolverError(f"{what} LP terminated {sol.status}")


def _check_gap(primal_value, dual_value, mode: str, what: str) -> None:
    gap = abs(primal_value - dual_value)
    limit = 0 if mode == "rational" else _GAP_TOL
    if gap > limit:
        raise SolverError(f"{what}: primal/dual gap {float(gap)} exceeds {limit}")


# ---------------------------------------------------------------------------
# Relaxed partition bound
# ---------------------------------------------------------------------------


def bprt_mu(
    f: PartialFunction,
    mu: InputDistribution,
    eps,
    mode: str = "float",
    caps: Caps | None = None,
) -> BoundResult:
    """Relaxed partition bound under a fixed input distribution.

    Minimizes total weight over labeled rectangles subject to mu-weighted
    average correctness >= 1 - eps (inputs outside the promise count as
    correct under any label) and per-input coverage <= 1.
    """
    _check_eps(eps)
    mu.check_compatible(f)
    caps = caps or default_caps()
    eps = _coerce(eps, mode)
    one = _one(mode)
    rects = _rectangles(f, caps)
    cells = [(x, y) for x in range(f.x_size) for y in range(f.y_size)]
    nvars = len(rects) * f.z_size

    def var(r_idx: int, z: int) -> int:
        return r_idx * f.z_size + z

    correctness = [one * 0] * nvars
    for r_idx, rect in enumerate(rects):
        for x, y in rect.cells(f.x_size, f.y_size):
            fz = f.value(x, y)
            w = _coerce(mu.prob(x, y), mode)
            if fz is None:
                for z in range(f.z_size):
                    correctness[var(r_idx, z)] += w
            else:
                correctness[var(r_idx, fz)] += w
    rows = [correctness]
    relations = [">="]
    rhs = [one - eps]
    for x, y in cells:
        row = [one * 0] * nvars
        for r_idx, rect in enumerate(rects):
            if rect.contains(x, y):
                for z in range(f.z_size):
                    row[var(r_idx, z)] = one
        rows.append(row)
        relations.append("<=")
        rhs.append(one)

    problem = LpProblem.build("min", [one] * nvars, rows, relations, rhs)
    sol = lp_solve(problem, mode, caps)
    _require_optimal(sol, "bprt_mu")
    value = sol.objective_value

    weights = [
        (rects[j // f.z_size], j % f.z_size, sol.primal[j])
        for j in range(nvars)
        if sol.primal[j] > 0
    ]
    strategy = _strategy_from_weights(weights, value, f.x_size, f.y_size)

    y_corr = sol.dual[0]
    alpha = {
        (x, y): y_corr * _coerce(mu.prob(x, y), mode) for x, y in cells
    }
    beta = {cell: -sol.dual[1 + i] for i, cell in enumerate(cells)}
    dual_value = (one - eps) * y_corr - sum(beta.values())
    _check_gap(value, dual_value, mode, "bprt_mu")
    return BoundResult(
        "bprt_mu", value, eps, strategy, {"alpha": alpha, "beta": beta},
        sol.status, dual_value,
    )


def bprt(
    f: PartialFunction, eps, mode: str = "float", caps: Caps | None = None
) -> BoundResult:
    """Distribution-free relaxed partition bound (the max over mu of bprt_mu),
    solved as a single LP in the (alpha, beta) input-weight variables."""
    _check_eps(eps)
    caps = caps or default_caps()
    eps = _coerce(eps, mode)
    one = _one(mode)
    rects = _rectangles(f, caps)
    cells = [(x, y) for x in range(f.x_size) for y in range(f.y_size)]
    idx = {cell: i for i, cell in enumerate(cells)}
    n = len(cells)
    nvars = 2 * n  # alpha block then beta block

    objective = [one - eps] * n + [-one] * n
    rows, relations, rhs = [], [], []
    for rect in rects:
        members = list(rect.cells(f.x_size, f.y_size))
        for z in range(f.z_size):
            row = [one * 0] * nvars
            for x, y in members:
                fz = f.value(x, y)
                if fz is None or fz == z:
                    row[idx[(x, y)]] = one
                row[n + idx[(x, y)]] = -one
            rows.append(row)
            relations.append("<=")
            rhs.append(one)

    problem = LpProblem.build("max", objective, rows, relations, rhs)
    sol = lp_solve(problem, mode, caps)
    _require_optimal(sol, "bprt")
    value = sol.objective_value

    weights = []
    for i, y_val in enumerate(sol.dual):
        if y_val > 0:
            weights.append((rects[i // f.z_size], i % f.z_size, y_val))
    dual_value = sum((w for _, _, w in weights), Fraction(0))
    _check_gap(value, dual_value, mode, "bprt")
    strategy = _strategy_from_weights(weights, dual_value, f.x_size, f.y_size)
    alpha = {cell: sol.primal[idx[cell]] for cell in cells}
    beta = {cell: sol.primal[n + idx[cell]] for cell in cells}
    return BoundResult(
        "bprt", value, eps, strategy, {"alpha": alpha, "beta": beta},
        sol.status, dual_value,
    )


# ---------------------------------------------------------------------------
# Partition bound
# ---------------------------------------------------------------------------


def prt(
    f: PartialFunction, eps, mode: str = "float", caps: Caps | None = None
) -> BoundResult:
    """Partition bound: per-input correctness >= 1 - eps on the promise and
    per-input total coverage exactly 1.  Always feasible via singleton
    rectangles."""
    _check_eps(eps)
    caps = caps or default_caps()
    eps = _coerce(eps, mode)
    one = _one(mode)
    rects = _rectangles(f, caps)
    cells = [(x, y) for x in range(f.x_size) for y in range(f.y_size)]
    nvars = len(rects) * f.z_size

    def var(r_idx: int, z: int) -> int:
        return r_idx * f.z_size + z

    rows, relations, rhs = [], [], []
    setin = f.domain()
    for x, y in setin:
        row = [one * 0] * nvars
        fz = f.value(x, y)
        for r_idx, rect in enumerate(rects):
            if rect.contains(x, y):
                row[var(r_idx, fz)] = one
        rows.append(row)
        relations.append(">=")
        rhs.append(one - eps)
    for x, y in cells:
        row = [one * 0] * nvars
        for r_idx, rect in enumerate(rects):
            if rect.contains(x, y):
                for z in range(f.z_size):
                    row[var(r_idx, z)] = one
        rows.append(row)
        relations.append("=")
        rhs.append(one)

    problem = LpProblem.build("min", [one] * nvars, rows, relations, rhs)
    sol = lp_solve(problem, mode, caps)
    _require_optimal(sol, "prt")
    value = sol.objective_value

    weights = [
        (rects[j // f.z_size], j % f.z_size, sol.primal[j])
        for j in range(nvars)
        if sol.primal[j] > 0
    ]
    strategy = _strategy_from_weights(weights, value, f.x_size, f.y_size)
    alpha = {cell: sol.dual[i] for i, cell in enumerate(setin)}
    beta = {cell: sol.dual[len(setin) + i] for i, cell in enumerate(cells)}
    dual_value = (one - eps) * sum(alpha.values()) + sum(beta.values())
    _check_gap(value, dual_value, mode, "prt")
    return BoundResult(
        "prt", value, eps, strategy, {"alpha": alpha, "beta": beta},
        sol.status, dual_value,
    )


# ---------------------------------------------------------------------------
# Smooth rectangle bound
# ---------------------------------------------------------------------------


def srec(
    f: PartialFunction, eps, z0: int, mode: str = "float", caps: Caps | None = None
) -> BoundResult:
    """Smooth rectangle bound for output label z0: unlabeled weights w'_R
    with coverage in [1 - eps, 1] on f^{-1}(z0) and at most eps on the rest
    of the promise."""
    _check_eps(eps)
    if not (0 <= z0 < f.z_size):
        raise ParameterError(f"z0 must lie in [0, {f.z_size})")
    side = f.preimage(z0)
    if not side:
        raise DegenerateInputError(f"f^(-1)({z0}) is empty")
    caps = caps or default_caps()
    eps = _coerce(eps, mode)
    one = _one(mode)
    rects = _rectangles(f, caps)
    other = [cell for cell in f.domain() if f.value(*cell) != z0]

    rows, relations, rhs = [], [], []
    dual_keys = []
    for x, y in side:
        row = [one if rect.contains(x, y) else one * 0 for rect in rects]
        rows.append(row)
        relations.append(">=")
        rhs.append(one - eps)
        dual_keys.append(("lower", x, y))
    for x, y in side:
        row = [one if rect.contains(x, y) else one * 0 for rect in rects]
        rows.append(row)
        relations.append("<=")
        rhs.append(one)
        dual_keys.append(("upper", x, y))
    for x, y in other:
        row = [one if rect.contains(x, y) else one * 0 for rect in rects]
        rows.append(row)
        relations.append("<=")
        rhs.append(eps)
        dual_keys.append(("wrong", x, y))

    problem = LpProblem.build("min", [one] * len(rects), rows, relations, rhs)
    sol = lp_solve(problem, mode, caps)
    _require_optimal(sol, "srec")
    value = sol.objective_value
    witness = {
        rects[j]: sol.primal[j] for j in range(len(rects)) if sol.primal[j] > 0
    }
    duals = dict(zip(dual_keys, sol.dual))
    dual_value = sum(d * b for d, b in zip(sol.dual, rhs))
    _check_gap(value, dual_value, mode, "srec")
    return BoundResult("srec", value, eps, witness, duals, sol.status, dual_value)


# ---------------------------------------------------------------------------
# Rectangle / corruption bound
# ---------------------------------------------------------------------------


def rect_dual(
    f: PartialFunction,
    eps,
    z: int,
    mu: InputDistribution | None = None,
    mode: str = "float",
    caps: Caps | None = None,
) -> BoundResult:
    """Rectangle bound for label z in dual form: maximize
    (1-eps)*alpha(f^{-1}(z)) - eps*alpha(rest of promise) over alpha >= 0
    with alpha(R on the z side) - alpha(R off it) <= 1 for every rectangle.

    A supplied mu restricts the support of alpha to the cells mu charges.
    """
    _check_eps(eps)
    if not (0 <= z < f.z_size):
        raise ParameterError(f"z must lie in [0, {f.z_size})")
    if mu is not None:
        mu.check_compatible(f)
    caps = caps or default_caps()
    eps = _coerce(eps, mode)
    one = _one(mode)
    cells = [
        cell for cell in f.domain() if mu is None or mu.prob(*cell) > 0
    ]
    if not cells:
        zero = one * 0
        return BoundResult("rect", zero, eps, {}, {}, "optimal", zero)
    idx = {cell: i for i, cell in enumerate(cells)}
    rects = _rectangles(f, caps)

    objective = [
        (one - eps) if f.value(*cell) == z else -eps for cell in cells
    ]
    rows, relations, rhs = [], [], []
    for rect in rects:
        row = [one * 0] * len(cells)
        touched = False
        for cell in cells:
            if rect.contains(*cell):
                row[idx[cell]] = one if f.value(*cell) == z else -one
                touched = True
        if touched:
            rows.append(row)
            relations.append("<=")
            rhs.append(one)

    problem = LpProblem.build("max", objective, rows, relations, rhs)
    sol = lp_solve(problem, mode, caps)
    _require_optimal(sol, "rect_dual")
    value = sol.objective_value
    alpha = {cell: sol.primal[idx[cell]] for cell in cells}
    dual_value = sum(sol.dual)
    _check_gap(value, dual_value, mode, "rect_dual")
    if value < 0:
        # alpha = 0 is always feasible; clamp the tiny negative float residue.
        value = one * 0
    return BoundResult("rect", value, eps, alpha, tuple(sol.dual), sol.status, dual_value)


def corruption_witness(
    f: PartialFunction,
    mu: InputDistribution,
    beta,
    delta_c,
    z: int,
    eps=0,
    caps: Caps | None = None,
) -> tuple[dict[tuple[int, int], Number], bool, Number]:
    """The explicit corruption assignment for a two-output function:
    alpha = mu/beta on f^{-1}(z), mu/(delta_c * beta) on the other defined
    side, 0 off the promise.  Feasibility of every rectangle constraint is
    decided by enumeration; the rect_dual objective at this alpha is returned
    either way."""
    if f.z_size != 2:
        raise ParameterError("corruption witness requires a two-output function")
    if beta <= 0 or delta_c <= 0:
        raise ParameterError("beta and delta_c must be positive")
    _check_eps(eps)
    mu.check_compatible(f)
    caps = caps or default_caps()
    alpha: dict[tuple[int, int], Number] = {}
    for x, y in f.domain():
        m = mu.prob(x, y)
        alpha[(x, y)] = m / beta if f.value(x, y) == z else m / (delta_c * beta)

    exact = all(isinstance(v, (Fraction, int)) for v in alpha.values())
    slack = 0 if exact else 1e-12
    feasible = True
    for rect in _rectangles(f, caps):
        lhs = sum(
            (alpha[cell] if f.value(*cell) == z else -alpha[cell])
            for cell in f.domain()
            if rect.contains(*cell)
        )
        if lhs > 1 + slack:
            feasible = False
            break
    on_side = sum(alpha[cell] for cell in f.preimage(z))
    off_side = sum(alpha[cell] for cell in f.domain() if f.value(*cell) != z)
    objective = (1 - eps) * on_side - eps * off_side
    return alpha, feasible, objective


# ---------------------------------------------------------------------------
# Discrepancy
# ---------------------------------------------------------------------------


def discrepancy(
    f: PartialFunction, mu: InputDistribution, caps: Caps | None = None
) -> Number:
    """Maximum over rectangles of |mu(R on the 0 side) - mu(R on the 1 side)|;
    cells off the promise count in neither class."""
    if f.z_size != 2:
        raise ParameterError("discrepancy requires a two-output function")
    mu.check_compatible(f)
    caps = caps or default_caps()
    best = None
    for rect in enumerate_rectangles(f.x_size, f.y_size, caps):
        balance = 0
        for x, y in rect.cells(f.x_size, f.y_size):
            fz = f.value(x, y)
            if fz == 0:
                balance = balance + mu.prob(x, y)
            elif fz == 1:
                balance = balance - mu.prob(x, y)
        imbalance = abs(balance)
        if best is None or imbalance > best:
            best = imbalance
    return best


# ---------------------------------------------------------------------------
# Chain verification and independent witness checking
# ---------------------------------------------------------------------------


def verify_bound_chain(
    f: PartialFunction, eps, mode: str = "float", caps: Caps | None = None
) -> ChainReport:
    """Check 1 - eps <= bprt <= prt and srec_z <= bprt for every label with a
    nonempty preimage."""
    caps = caps or default_caps()
    tol = 0 if mode == "rational" else _GAP_TOL
    b = bprt(f, eps, mode, caps)
    p = prt(f, eps, mode, caps)
    srec_vals = []
    failures = []
    eps_c = _coerce(eps, mode)
    if b.value < (1 - eps_c) - tol:
        failures.append(f"bprt {float(b.value)} < 1 - eps")
    if b.value > p.value + tol:
        failures.append(f"bprt {float(b.value)} > prt {float(p.value)}")
    for z in range(f.z_size):
        if not f.preimage(z):
            continue
        s = srec(f, eps, z, mode, caps)
        srec_vals.append((z, s.value))
        if s.value > b.value + tol:
            failures.append(f"srec_{z} {float(s.value)} > bprt {float(b.value)}")
    return ChainReport(
        eps_c, b.value, p.value, tuple(srec_vals), tol, not failures, tuple(failures)
    )


def check_witness(
    result: BoundResult,
    f: PartialFunction,
    mu: InputDistribution | None = None,
    caps: Caps | None = None,
) -> tuple[bool, Number]:
    """Re-derive feasibility and objective of a primal witness from scratch.

    Returns (feasible within 1e-7, recomputed objective).  Exact witnesses
    are checked with zero tolerance.
    """
    caps = caps or default_caps()
    eps = result.epsilon
    name = result.bound_name

    if name in ("bprt", "bprt_mu", "prt"):
        strategy: LabeledRectangleStrategy = result.primal_witness
        exact = all(isinstance(w, (Fraction, int)) for _, _, w in strategy.entries)
        tol = 0 if exact and isinstance(eps, (Fraction, int)) else _WITNESS_TOL
        scale = 1 / strategy.efficiency  # back to raw LP weights w = p * scale
        objective = scale * sum((w for _, _, w in strategy.entries), Fraction(0))
        feasible = True
        if name == "bprt_mu":
            assert mu is not None
            correct = sum(
                mu.prob(x, y) * strategy.correct_coverage(x, y, f.value(x, y))
                for x in range(f.x_size)
                for y in range(f.y_size)
            ) * scale
            if correct < (1 - eps) - tol:
                feasible = False
        for x in range(f.x_size):
            for y in range(f.y_size):
                cov = strategy.coverage(x, y) * scale
                if cov > 1 + tol:
                    feasible = False
                if name == "prt" and abs(cov - 1) > tol:
                    feasible = False
                if name in ("bprt", "prt"):
                    fz = f.value(x, y)
                    if name == "prt" and fz is None:
                        continue
                    corr = strategy.correct_coverage(x, y, fz) * scale
                    if corr < (1 - eps) - tol:
                        feasible = False
        return feasible, objective

    if name == "srec":
        weights: dict[Rectangle, Number] = result.primal_witness
        exact = all(isinstance(w, (Fraction, int)) for w in weights.values())
        tol = 0 if exact and isinstance(eps, (Fraction, int)) else _WITNESS_TOL
        # The label is implicit in the constraints; accept if any label fits.
        feasible = any(
            f.preimage(z) and _srec_matches(weights, f, z, eps, tol)
            for z in range(f.z_size)
        )
        return feasible, sum(weights.values())

    if name == "rect":
        alpha: dict[tuple[int, int], Number] = result.primal_witness
        exact = all(isinstance(v, (Fraction, int)) for v in alpha.values())
        tol = 0 if exact and isinstance(eps, (Fraction, int)) else _WITNESS_TOL
        if any(v < -tol for v in alpha.values()):
            return False, 0
        best = None
        for z in range(f.z_size):
            ok = True
            for rect in _rectangles(f, caps):
                lhs = sum(
                    (alpha.get(cell, 0) if f.value(*cell) == z else -alpha.get(cell, 0))
                    for cell in f.domain()
                    if rect.contains(*cell)
                )
                if lhs > 1 + tol:
                    ok = False
                    break
            if not ok:
                continue
            obj = (1 - eps) * sum(
                alpha.get(cell, 0) for cell in f.preimage(z)
            ) - eps * sum(
                alpha.get(cell, 0) for cell in f.domain() if f.value(*cell) != z
            )
            if best is None or obj > best:
                best = obj
        if best is None:
            return False, 0
        return True, best

    raise ParameterError(f"unknown bound name {name!r}")


def _srec_matches(weights, f: PartialFunction, z0: int, eps, tol) -> bool:
    def cov(x, y):
        return sum(w for rect, w in weights.items() if rect.contains(x, y))

    for x, y in f.preimage(z0):
        c = cov(x, y)
        if c < (1 - eps) - tol or c > 1 + tol:
            return False
    for x, y in f.domain():
        if f.value(x, y) != z0 and cov(x, y) > eps + tol:
            return False
    return True


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------


def csv_label(fn_label: str) -> str:
    """Quote a function label for CSV when it contains a comma."""
    return f'"{fn_label}"' if "," in fn_label else fn_label


def csv_row(result: BoundResult, fn_label: str, f: PartialFunction) -> str:
    value = float(result.value)
    log2_value = repr(math.log2(value)) if value > 0 else "-inf"
    return (
        f"{result.bound_name},{csv_label(fn_label)},{f.x_size},{f.y_size},{f.z_size},"
        f"{float(result.epsilon)!r},{value!r},{log2_value},{result.solver_status}"
    )
