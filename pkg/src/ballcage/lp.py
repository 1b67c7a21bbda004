"""Dense linear programming and polytope predicates.

A two-phase tableau simplex with Bland's anti-cycling rule (entering: lowest
eligible column index; leaving: minimum ratio, ties to the lowest basic
variable index) over systems A.x <= b with free variables, plus the polytope
machinery built on it: feasibility, facet-by-facet containment, Euclidean
projection by cyclic Dykstra corrections, and hit-and-run sampling.
Everything is deterministic given its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .instance import HPolytope

TOL_FEAS = 1e-9
TOL_CONTAIN = 1e-8
MAX_PIVOTS = 20000


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    x: np.ndarray | None = None
    value: float = float("nan")


@dataclass
class ContainmentReport:
    """inner subset-of outer, decided by maximizing each outer facet over inner."""

    contained: bool
    per_facet: list[tuple[str, float, float, float]]  # label, max value, bound, slack
    witness: np.ndarray | None
    worst_label: str | None
    vacuous: bool = False  # inner was empty
    unbounded: bool = False  # some facet LP was unbounded
    facet_witnesses: list[np.ndarray] | None = None  # per facet, when requested

    @property
    def min_slack(self) -> float:
        return min((s for _, _, _, s in self.per_facet), default=float("inf"))

    def violated_witnesses(self, tol: float = TOL_CONTAIN) -> list[tuple[str, np.ndarray]]:
        """(label, maximizer) for every facet violated beyond tol."""
        if self.facet_witnesses is None:
            return []
        return [
            (label, w)
            for (label, _, _, slack), w in zip(self.per_facet, self.facet_witnesses)
            if slack < -tol and w is not None
        ]


class _Unbounded(Exception):
    pass


def _pivot(T: np.ndarray, basis: np.ndarray, i: int, j: int) -> None:
    T[i, :] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i, :])
    T[:, j] = 0.0
    T[i, j] = 1.0
    basis[i] = j


def _bland_loop(T: np.ndarray, basis: np.ndarray, ncols: int, tol: float) -> None:
    """Minimize the cost row in place; raises _Unbounded."""
    for _ in range(MAX_PIVOTS):
        cost = T[-1, :ncols]
        eligible = np.nonzero(cost < -tol)[0]
        if eligible.size == 0:
            return
        j = int(eligible[0])
        col = T[:-1, j]
        rows = np.nonzero(col > tol)[0]
        if rows.size == 0:
            raise _Unbounded()
        ratios = T[rows, -1] / col[rows]
        rmin = float(ratios.min())
        ties = rows[ratios <= rmin + 1e-10 * (1.0 + abs(rmin))]
        i = int(ties[np.argmin(basis[ties])])
        _pivot(T, basis, i, j)
    raise RuntimeError("simplex pivot cap exceeded")


def _solve_max(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> LpResult:
    """max c.x subject to A.x <= b with x free; basic optimal solution."""
    m, n = A.shape
    if m == 0:
        if np.allclose(c, 0.0):
            return LpResult(LpStatus.OPTIMAL, np.zeros(n), 0.0)
        return LpResult(LpStatus.UNBOUNDED)
    # standard form with x = u - v, one slack per row, artificials where b < 0
    neg = b < 0
    k = int(neg.sum())
    A2 = np.hstack([A, -A])
    b2 = b.copy()
    A2[neg] *= -1.0
    b2[neg] *= -1.0
    slacks = np.eye(m)
    slacks[neg] *= -1.0
    ncols = 2 * n + m + k
    T = np.zeros((m + 1, ncols + 1))
    T[:m, : 2 * n] = A2
    T[:m, 2 * n : 2 * n + m] = slacks
    T[:m, -1] = b2
    basis = np.empty(m, dtype=int)
    art_rows = np.nonzero(neg)[0]
    for pos, i in enumerate(art_rows):
        T[i, 2 * n + m + pos] = 1.0
        basis[i] = 2 * n + m + pos
    basis[~neg] = 2 * n + np.nonzero(~neg)[0]

    if k > 0:  # phase 1: minimize the artificial total
        T[-1, :] = -T[art_rows, :].sum(axis=0)
        T[-1, 2 * n + m : ncols] = 0.0
        try:
            _bland_loop(T, basis, 2 * n + m, TOL_FEAS)
        except _Unbounded:  # pragma: no cover - phase-1 objective is bounded below
            raise RuntimeError("phase-1 simplex reported unbounded")
        if -T[-1, -1] > 1e-7:
            return LpResult(LpStatus.INFEASIBLE)
        for i in range(m):  # drive leftover artificials out of the basis
            if basis[i] >= 2 * n + m:
                nzs = np.nonzero(np.abs(T[i, : 2 * n + m]) > TOL_FEAS)[0]
                if nzs.size:
                    _pivot(T, basis, i, int(nzs[0]))
        T[:, 2 * n + m : ncols] = 0.0

    # phase 2 cost row: minimize -c.x
    cost = np.zeros(ncols + 1)
    cost[:n] = -c
    cost[n : 2 * n] = c
    T[-1, :] = cost
    for i in range(m):
        if basis[i] < 2 * n + m and abs(T[-1, basis[i]]) > 0:
            T[-1, :] -= T[-1, basis[i]] * T[i, :]
    try:
        _bland_loop(T, basis, 2 * n + m, TOL_FEAS)
    except _Unbounded:
        return LpResult(LpStatus.UNBOUNDED)
    xfull = np.zeros(ncols)
    for i in range(m):
        if basis[i] < ncols:
            xfull[basis[i]] = T[i, -1]
    x = xfull[:n] - xfull[n : 2 * n]
    return LpResult(LpStatus.OPTIMAL, x, float(c @ x))


def lp_solve(
    c: np.ndarray,
    P: HPolytope,
    sense: str = "max",
    feasible_point: np.ndarray | None = None,
) -> LpResult:
    """Optimize c.x over {A.x <= b}.

    A known feasible point shifts the origin so the slack basis starts
    feasible and phase 1 is skipped; the result is identical either way.
    """
    c = np.asarray(c, dtype=float)
    if c.size != P.n:
        raise ValueError("objective dimension mismatch")
    sign = 1.0 if sense == "max" else -1.0
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    if feasible_point is not None and P.m > 0:
        x0 = np.asarray(feasible_point, dtype=float)
        resid = P.residuals(x0)
        if np.all(resid <= TOL_FEAS):
            b_shift = np.maximum(P.b - P.A @ x0, 0.0)
            res = _solve_max(P.A, b_shift, sign * c)
            if res.status is LpStatus.OPTIMAL:
                x = res.x + x0
                return LpResult(LpStatus.OPTIMAL, x, float(c @ x))
            return LpResult(res.status)
    res = _solve_max(P.A, P.b, sign * c)
    if res.status is LpStatus.OPTIMAL:
        return LpResult(LpStatus.OPTIMAL, res.x, sign * res.value)
    return res


def polytope_feasible(P: HPolytope) -> tuple[bool, np.ndarray | None]:
    """Phase-1 feasibility; returns a feasible basic point when one exists."""
    if P.m == 0:
        return True, np.zeros(P.n)
    res = _solve_max(P.A, P.b, np.zeros(P.n))
    if res.status is LpStatus.OPTIMAL:
        return True, res.x
    return False, None


def chebyshev_center(P: HPolytope) -> tuple[np.ndarray | None, float]:
    """Center and radius of a largest inscribed ball (deterministic LP)."""
    if P.m == 0:
        return np.zeros(P.n), float("inf")
    norms = np.linalg.norm(P.A, axis=1)
    A_ext = np.hstack([P.A, norms[:, None]])
    rows = np.vstack([A_ext, np.concatenate([np.zeros(P.n), [-1.0]])])
    b_ext = np.concatenate([P.b, [0.0]])
    labels = [f"r{i}" for i in range(P.m)] + ["rad"]
    res = lp_solve(
        np.concatenate([np.zeros(P.n), [1.0]]), HPolytope(labels, rows, b_ext), "max"
    )
    if res.status is not LpStatus.OPTIMAL:
        return None, float("nan")
    return res.x[:-1], float(res.x[-1])


def polytope_contains(
    outer: HPolytope,
    inner: HPolytope,
    tol: float = TOL_CONTAIN,
    inner_point: np.ndarray | None = None,
    keep_witnesses: bool = False,
) -> ContainmentReport:
    """Decide inner subset-of outer with one LP per outer facet.

    Empty inner is vacuously contained (flagged); an unbounded facet LP
    refutes containment (flagged).  keep_witnesses retains every facet's
    maximizer, not just the most violated one.
    """
    per_facet: list[tuple[str, float, float, float]] = []
    maximizers: list[np.ndarray] = []
    witness = None
    worst = None
    worst_slack = float("inf")
    for label, a, bound in zip(outer.labels, outer.A, outer.b):
        res = lp_solve(a, inner, "max", feasible_point=inner_point)
        if res.status is LpStatus.INFEASIBLE:
            return ContainmentReport(True, [], None, None, vacuous=True)
        if res.status is LpStatus.UNBOUNDED:
            per_facet.append((label, float("inf"), float(bound), float("-inf")))
            return ContainmentReport(
                False, per_facet, None, label, unbounded=True
            )
        slack = float(bound - res.value)
        per_facet.append((label, float(res.value), float(bound), slack))
        maximizers.append(res.x)
        if slack < worst_slack:
            worst_slack = slack
            worst = label
            witness = res.x
    return ContainmentReport(
        worst_slack >= -tol,
        per_facet,
        witness,
        worst,
        facet_witnesses=maximizers if keep_witnesses else None,
    )


@dataclass(frozen=True)
class ProjectionResult:
    point: np.ndarray
    distance: float
    converged: bool
    max_violation: float
    iterations: int


def project_onto_polytope(
    x: np.ndarray,
    P: HPolytope,
    tol: float = 1e-8,
    max_iter: int = 100000,
) -> ProjectionResult:
    """Euclidean projection by Dykstra's cyclic halfspace corrections.

    Iteration order is row order; the count caps individual halfspace
    projections.  If the cap is hit the achieved tolerance is reported
    rather than raised.
    """
    x = np.asarray(x, dtype=float)
    resid = P.residuals(x)
    if np.all(resid <= tol):
        return ProjectionResult(x.copy(), 0.0, True, float(max(resid.max(), 0.0)), 0)
    norms_sq = np.einsum("ij,ij->i", P.A, P.A)
    if np.any(norms_sq == 0.0):
        raise ValueError("zero rows cannot be projected onto")
    y = x.copy()
    corr = np.zeros((P.m, P.n))
    it = 0
    while it < max_iter:
        y_prev = y.copy()
        for i in range(P.m):
            z = y + corr[i]
            viol = float(P.A[i] @ z - P.b[i])
            if viol > 0.0:
                y = z - (viol / norms_sq[i]) * P.A[i]
            else:
                y = z
            corr[i] = z - y
            it += 1
            if it >= max_iter:
                break
        if float(np.max(np.abs(y - y_prev))) <= 0.1 * tol:
            break
    max_violation = float(max(P.residuals(y).max(), 0.0))
    converged = it < max_iter and max_violation <= tol
    return ProjectionResult(y, float(np.linalg.norm(y - x)), converged, max_violation, it)


def sample_polytope(P: HPolytope, count: int, seed: int) -> np.ndarray:
    """Hit-and-run chain over a feasible bounded polytope.

    Starts at the Chebyshev center so the first chords are full length;
    a direction with no finite chord end raises (unbounded polytope).
    """
    feasible, _ = polytope_feasible(P)
    if not feasible:
        raise ValueError("cannot sample an infeasible polytope")
    if count == 0:
        return np.empty((0, P.n))
    start, _radius = chebyshev_center(P)
    if start is None:
        raise ValueError("unbounded polytope: no Chebyshev center")
    rng = np.random.default_rng(seed)
    x = start.copy()
    out = np.empty((count, P.n))
    for i in range(count):
        d = rng.normal(size=P.n)
        d /= np.linalg.norm(d)
        Ad = P.A @ d
        gap = P.b - P.A @ x
        up = Ad > 1e-12
        dn = Ad < -1e-12
        if not np.any(up) or not np.any(dn):
            raise ValueError("unbounded direction detected while sampling")
        t_hi = float(np.min(gap[up] / Ad[up]))
        t_lo = float(np.max(gap[dn] / Ad[dn]))
        t_lo, t_hi = min(t_lo, 0.0), max(t_hi, 0.0)
        x = x + rng.uniform(t_lo, t_hi) * d
        out[i] = x
    return out


__all__ = [
    "ContainmentReport",
    "LpResult",
    "LpStatus",
    "ProjectionResult",
    "TOL_CONTAIN",
    "TOL_FEAS",
    "chebyshev_center",
    "lp_solve",
    "polytope_contains",
    "polytope_feasible",
    "project_onto_polytope",
    "sample_polytope",
]
