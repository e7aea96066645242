"""Self-contained dense LP engine.

Two-phase primal simplex over a full tableau, in two arithmetic modes:

* ``float``: numpy float64 tableau, Dantzig pricing with an automatic switch
  to Bland's least-index rule when the objective stalls (the bound LPs are
  highly degenerate);
* ``rational``: pure ``fractions.Fraction`` tableau with Bland's rule
  throughout, so termination and exactness are guaranteed.

Dual multipliers are recovered from the final basis and reported in the
standard sign convention: for a minimization problem, ``>=`` rows get
nonnegative multipliers and ``<=`` rows nonpositive ones (mirrored for
maximization), and the optimal value always equals ``dual . rhs``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .caps import Caps, default_caps
from .errors import CapacityError, DimensionError, ParameterError, SolverError

__all__ = ["LpProblem", "LpSolution", "lp_solve"]

Relation = Literal["<=", ">=", "="]
Mode = Literal["float", "rational"]

_FEAS_TOL = 1e-9
_STALL_LIMIT = 200
_PIVOT_LIMIT_FACTOR = 60


@dataclass(frozen=True)
class LpProblem:
    """min/max c.x subject to rows, with all variables nonnegative."""

    sense: Literal["min", "max"]
    objective: tuple
    rows: tuple
    relations: tuple
    rhs: tuple

    @classmethod
    def build(
        cls,
        sense: str,
        objective: Sequence,
        rows: Sequence[Sequence],
        relations: Sequence[str],
        rhs: Sequence,
    ) -> "LpProblem":
        if sense not in ("min", "max"):
            raise ParameterError(f"unknown sense {sense!r}")
        n = len(objective)
        if not all(len(row) == n for row in rows):
            raise DimensionError("row length must equal variable count")
        if not (len(rows) == len(relations) == len(rhs)):
            raise DimensionError("rows, relations, rhs lengths differ")
        if any(rel not in ("<=", ">=", "=") for rel in relations):
            raise ParameterError("relations must be one of <=, >=, =")
        for row in rows:
            for v in row:
                if isinstance(v, float) and not np.isfinite(v):
                    raise ParameterError("non-finite coefficient")
        return cls(
            sense,
            tuple(objective),
            tuple(tuple(row) for row in rows),
            tuple(relations),
            tuple(rhs),
        )

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @property
    def num_rows(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class LpSolution:
    status: Literal["optimal", "infeasible", "unbounded"]
    objective_value: object | None
    primal: tuple | None
    dual: tuple | None

    def primal_value(self, j: int):
        assert self.primal is not None
        return self.primal[j]


def lp_solve(problem: LpProblem, mode: Mode = "float", caps: Caps | None = None) -> LpSolution:
    """Solve an LP, returning primal and dual witnesses when optimal."""
    caps = caps or default_caps()
    n, m = problem.num_vars, problem.num_rows
    if mode == "float":
        if n > caps.lp_vars_float or m > caps.lp_rows_float:
            raise CapacityError(
                f"instance {n} vars x {m} rows exceeds float caps "
                f"({caps.lp_vars_float} x {caps.lp_rows_float})"
            )
        return _solve_float(problem)
    if mode == "rational":
        if n > caps.lp_vars_rational or m > caps.lp_rows_rational:
            raise CapacityError(
                f"instance {n} vars x {m} rows exceeds rational caps "
                f"({caps.lp_vars_rational} x {caps.lp_rows_rational})"
            )
        return _solve_rational(problem)
    raise ParameterError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Shared standard-form setup
# ---------------------------------------------------------------------------


def _standardize(problem: LpProblem, exact: bool):
    """Return (c, rows, rhs, flips, minimize-sign).

    Rows are normalized so every right-hand side is nonnegative; ``flips``
    records rows whose sign (and relation) was reversed.  The objective is
    negated for max problems so the core always minimizes.
    """
    conv = Fraction if exact else float
    sign = 1 if problem.sense == "min" else -1
    c = [conv(v) * sign for v in problem.objective]
    rows, rels, rhs, flips = [], [], [], []
    for row, rel, b in zip(problem.rows, problem.relations, problem.rhs):
        row = [conv(v) for v in row]
        b = conv(b)
        if b < 0:
            row = [-v for v in row]
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
            flips.append(True)
        else:
            flips.append(False)
        rows.append(row)
        rels.append(rel)
        rhs.append(b)
    return c, rows, rels, rhs, flips, sign


def _finalize_duals(problem: LpProblem, y_norm, flips, sign):
    """Map duals of the normalized minimization back to the original problem."""
    duals = []
    for yi, flipped in zip(y_norm, flips):
        v = -yi if flipped else yi
        duals.append(v * sign)
    return tuple(duals)


# ---------------------------------------------------------------------------
# Float path (numpy tableau)
# ---------------------------------------------------------------------------


def _solve_float(problem: LpProblem) -> LpSolution:
    c, rows, rels, rhs, flips, sign = _standardize(problem, exact=False)
    n, m = len(c), len(rows)

    n_slack = sum(1 for r in rels if r != "=")
    total = n + n_slack + m  # artificials for every row keep unit columns handy
    T = np.zeros((m, total + 1))
    slack_col = {}
    art_col = {}
    basis = [0] * m
    col = n
    for i, rel in enumerate(rels):
        T[i, :n] = rows[i]
        T[i, total] = rhs[i]
        if rel != "=":
            T[i, col] = 1.0 if rel == "<=" else -1.0
            slack_col[i] = col
            col += 1
    for i in range(m):
        T[i, n + n_slack + i] = 1.0
        art_col[i] = n + n_slack + i
        if rels[i] == "<=":
            basis[i] = slack_col[i]
        else:
            basis[i] = art_col[i]
    # '<=' rows start with the slack basic; zero out their unused artificials.
    artificial = np.zeros(total, dtype=bool)
    for i in range(m):
        artificial[art_col[i]] = True

    pivot_limit = _PIVOT_LIMIT_FACTOR * (m + total)

    def run_phase(cost: np.ndarray) -> str:
        stall = 0
        last_obj = np.inf
        for _ in range(pivot_limit):
            cb = cost[basis]
            # reduced costs d_j = c_j - cb . T[:, j]
            d = cost[: total] - cb @ T[:, :total]
            d[artificial & (cost[:total] == 0)] = 0.0  # block artificials in phase 2
            candidates = np.flatnonzero(d < -_FEAS_TOL)
            if candidates.size == 0:
                return "optimal"
            if stall > _STALL_LIMIT:
                j = int(candidates[0])  # Bland
            else:
                j = int(candidates[np.argmin(d[candidates])])  # Dantzig
            colj = T[:, j]
            positive = colj > _FEAS_TOL
            if not positive.any():
                return "unbounded"
            ratios = np.full(m, np.inf)
            ratios[positive] = T[positive, total] / colj[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + _FEAS_TOL * (1 + abs(best)))
            i = int(min(ties, key=lambda t: basis[t]))  # least-index tie-break
            _pivot_float(T, basis, i, j)
            obj = float(cost[basis] @ T[:, total])
            if obj < last_obj - 1e-12 * (1 + abs(last_obj)):
                stall = 0
            else:
                stall += 1
            last_obj = obj
        raise SolverError(
            "simplex stalled (pivot limit reached); try rational mode"
        )

    # Phase 1
    cost1 = np.zeros(total)
    cost1[artificial] = 1.0
    # Price out artificials that start basic.
    status = run_phase(cost1)
    if status == "unbounded":  # cannot happen in phase 1
        raise SolverError("phase 1 reported unbounded")
    phase1_obj = float(cost1[basis] @ T[:, total])
    if phase1_obj > 1e-7:
        return LpSolution("infeasible", None, None, None)
    _drive_out_artificials_float(T, basis, artificial, n + n_slack)

    # Phase 2
    cost2 = np.zeros(total)
    cost2[:n] = c
    status = run_phase(cost2)
    if status == "unbounded":
        return LpSolution("unbounded", None, None, None)

    x = np.zeros(total)
    for i, bi in enumerate(basis):
        x[bi] = T[i, total]
    obj = float(cost2[:n] @ x[:n]) * sign

    # Duals: y_i = cb . (B^{-1} e_i), and B^{-1} e_i is the final artificial
    # column of row i.
    cb = cost2[basis]
    y_norm = [float(cb @ T[:, art_col[i]]) for i in range(m)]
    duals = _finalize_duals(problem, y_norm, flips, sign)
    primal = tuple(max(v, 0.0) for v in x[:n])
    return LpSolution("optimal", obj, primal, duals)


def _pivot_float(T: np.ndarray, basis: list[int], i: int, j: int) -> None:
    T[i] /= T[i, j]
    colj = T[:, j].copy()
    colj[i] = 0.0
    T -= np.outer(colj, T[i])
    T[:, j] = 0.0
    T[i, j] = 1.0
    basis[i] = j


def _drive_out_artificials_float(T, basis, artificial, n_real) -> None:
    m = T.shape[0]
    for i in range(m):
        if not artificial[basis[i]]:
            continue
        # Basic artificial at value ~0: pivot any usable real column in.
        for j in range(n_real):
            if abs(T[i, j]) > 1e-7:
                _pivot_float(T, basis, i, j)
                break
        # If the row is all zeros the constraint was redundant; harmless.


# ---------------------------------------------------------------------------
# Rational path (Fraction tableau, Bland's rule)
# ---------------------------------------------------------------------------


def _solve_rational(problem: LpProblem) -> LpSolution:
    c, rows, rels, rhs, flips, sign = _standardize(problem, exact=True)
    n, m = len(c), len(rows)
    zero, one = Fraction(0), Fraction(1)

    n_slack = sum(1 for r in rels if r != "=")
    total = n + n_slack + m
    T = [[zero] * (total + 1) for _ in range(m)]
    slack_col = {}
    art_col = {}
    basis = [0] * m
    col = n
    for i, rel in enumerate(rels):
        for j, v in enumerate(rows[i]):
            T[i][j] = v
        T[i][total] = rhs[i]
        if rel != "=":
            T[i][col] = one if rel == "<=" else -one
            slack_col[i] = col
            col += 1
    for i in range(m):
        T[i][n + n_slack + i] = one
        art_col[i] = n + n_slack + i
        basis[i] = slack_col[i] if rels[i] == "<=" else art_col[i]
    artificial = [False] * total
    for i in range(m):
        artificial[art_col[i]] = True

    def run_phase(cost: list[Fraction]) -> str:
        while True:
            cb = [cost[b] for b in basis]
            entering = -1
            for j in range(total):  # Bland: first improving column
                if artificial[j] and cost[j] == 0:
                    continue
                d = cost[j] - sum(cb[i] * T[i][j] for i in range(m) if T[i][j])
                if d < 0:
                    entering = j
                    break
            if entering < 0:
                return "optimal"
            leave = -1
            best = None
            for i in range(m):
                if T[i][entering] > 0:
                    ratio = T[i][total] / T[i][entering]
                    if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]
                    ):
                        best = ratio
                        leave = i
            if leave < 0:
                return "unbounded"
            _pivot_rational(T, basis, leave, entering, total)

    cost1 = [one if artificial[j] else zero for j in range(total)]
    run_phase(cost1)
    if sum(T[i][total] for i in range(m) if artificial[basis[i]]) > 0:
        return LpSolution("infeasible", None, None, None)
    for i in range(m):
        if artificial[basis[i]]:
            for j in range(n + n_slack):
                if T[i][j] != 0:
                    _pivot_rational(T, basis, i, j, total)
                    break

    cost2 = [zero] * total
    for j in range(n):
        cost2[j] = c[j]
    if run_phase(cost2) == "unbounded":
        return LpSolution("unbounded", None, None, None)

    x = [zero] * total
    for i, bi in enumerate(basis):
        x[bi] = T[i][total]
    obj = sum(cost2[j] * x[j] for j in range(n)) * sign
    cb = [cost2[b] for b in basis]
    y_norm = [
        sum(cb[r] * T[r][art_col[i]] for r in range(m) if T[r][art_col[i]])
        for i in range(m)
    ]
    duals = _finalize_duals(problem, y_norm, flips, sign)
    return LpSolution("optimal", obj, tuple(x[:n]), duals)


def _pivot_rational(T, basis, i, j, total) -> None:
    piv = T[i][j]
    T[i] = [v / piv for v in T[i]]
    for r in range(len(T)):
        if r != i and T[r][j] != 0:
            factor = T[r][j]
            T[r] = [a - factor * b for a, b in zip(T[r], T[i])]
    basis[i] = j
