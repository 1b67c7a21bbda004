"""The convex program selecting the algorithm branch: minimize
h_rho(x) - ||x - C||^2 over the inflated cage {h_rho <= 1}.

After cancelling the quadratic terms the objective is a maximum of affine
functions, so Kelley cutting planes over the epigraph LP solve it with a
certified bound: ball constraints enter lazily as tangent cuts.  The sign of
h_rho at the minimizer picks the branch (bisection, direct radius, or
separation), and a pair of perturbed re-solves flags flat optima that break
the construction's singleton assumption.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import BallIntersection, h_rho
from .instance import HPolytope
from . import lp

TOL_CASE = 1e-7
TOL_CUT = 1e-8
MAX_ROUNDS = 300


class Case(str, Enum):
    INTERIOR_NEGATIVE = "InteriorNegative"
    BOUNDARY = "Boundary"
    EXTERIOR_POSITIVE = "ExteriorPositive"


class EmptySearchRegionError(RuntimeError):
    """The inflated cage {h_rho <= 1} carved down to nothing."""


class IterationCapError(RuntimeError):
    pass


@dataclass
class InnerPointResult:
    x_star: np.ndarray
    value: float  # the minimum; equals -R_bar^2
    h_at_star: float
    case: Case
    in_int_P: bool | None
    singleton_confidence: str  # "Unique" | "SuspectedFlat"
    iterations: int


def max_affine_rows(Q: BallIntersection, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Slopes and intercepts of l_p(x) = 2(C - C_p).x + ||C_p||^2 - ||C||^2 - r_p^2."""
    C = np.asarray(C, dtype=float)
    slopes = 2.0 * (C[None, :] - Q.centers)
    intercepts = (
        np.einsum("ij,ij->i", Q.centers, Q.centers) - float(C @ C) - Q.radii_sq
    )
    return slopes, intercepts


def max_affine_value(Q: BallIntersection, C: np.ndarray, x: np.ndarray) -> float:
    slopes, intercepts = max_affine_rows(Q, C)
    return float(np.max(slopes @ np.asarray(x, dtype=float) + intercepts))


def search_box(Q: BallIntersection, inflate: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate box containing {h_rho <= inflate} (intersection of ball boxes)."""
    radii = np.sqrt(Q.radii_sq + inflate)
    lo = np.max(Q.centers - radii[:, None], axis=0)
    hi = np.min(Q.centers + radii[:, None], axis=0)
    return lo, hi


def _box_rows(lo: np.ndarray, hi: np.ndarray, extra_cols: int) -> tuple[list, list, list]:
    n = lo.size
    labels, rows, rhs = [], [], []
    eye = np.eye(n + extra_cols)
    for i in range(n):
        labels.append(f"box_hi_{i}")
        rows.append(eye[i][: n + extra_cols])
        rhs.append(hi[i])
        labels.append(f"box_lo_{i}")
        rows.append(-eye[i][: n + extra_cols])
        rhs.append(-lo[i])
    return labels, rows, rhs


class _CutPool:
    """Tangent cuts of the inflated ball constraints, shared across re-solves."""

    def __init__(self, Q: BallIntersection, inflate: float) -> None:
        self.Q = Q
        self.inflate = inflate
        self.rows: list[np.ndarray] = []
        self.rhs: list[float] = []

    def violations(self, x: np.ndarray) -> np.ndarray:
        rel = x - self.Q.centers
        return np.einsum("ij,ij->i", rel, rel) - self.Q.radii_sq - self.inflate

    def add_at(self, x: np.ndarray, viols: np.ndarray, tol: float) -> int:
        added = 0
        for p in np.nonzero(viols > tol)[0]:
            grad = 2.0 * (x - self.Q.centers[p])
            self.rows.append(grad)
            self.rhs.append(float(grad @ x - viols[p]))
            added += 1
        return added


def _solve_epigraph(
    Q: BallIntersection,
    C: np.ndarray,
    pool: _CutPool,
    tilt: np.ndarray,
    feasible_point: np.ndarray | None,
) -> tuple[np.ndarray, float, int]:
    """min (max_p l_p(x)) + tilt.x over {h_rho <= 1} by Kelley iterations.

    Returns (x, objective value without the tilt, LP rounds used).
    """
    n = Q.n
    slopes, intercepts = max_affine_rows(Q, C)
    lo, hi = search_box(Q, inflate=pool.inflate)
    box_labels, box_rows, box_rhs = _box_rows(lo, hi, extra_cols=1)
    epi_rows = [np.concatenate([slopes[p], [-1.0]]) for p in range(len(Q.balls))]
    epi_rhs = [-intercepts[p] for p in range(len(Q.balls))]
    epi_labels = [f"epi_{t}" for t in Q.tags]
    c_obj = np.concatenate([-tilt, [-1.0]])  # maximize -(t + tilt.x)

    y_feas = None
    if feasible_point is not None:
        xf = np.asarray(feasible_point, dtype=float)
        y_feas = np.concatenate([xf, [float(np.max(slopes @ xf + intercepts))]])

    for rounds in range(1, MAX_ROUNDS + 1):
        cut_rows = [np.concatenate([r, [0.0]]) for r in pool.rows]
        cut_labels = [f"cut_{i}" for i in range(len(pool.rows))]
        system = HPolytope(
            epi_labels + box_labels + cut_labels,
            np.vstack(epi_rows + box_rows + cut_rows),
            np.array(epi_rhs + box_rhs + pool.rhs),
        )
        res = lp.lp_solve(c_obj, system, "max", feasible_point=y_feas)
        if res.status is lp.LpStatus.INFEASIBLE:
            raise EmptySearchRegionError("search region {h <= 1} is empty")
        if res.status is lp.LpStatus.UNBOUNDED:  # pragma: no cover - boxed
            raise RuntimeError("epigraph LP unbounded despite box rows")
        x = res.x[:n]
        viols = pool.violations(x)
        if float(viols.max()) <= TOL_CUT:
            return x, float(np.max(slopes @ x + intercepts)), rounds
        pool.add_at(x, viols, TOL_CUT)
    raise IterationCapError("cutting-plane rounds exhausted")


def classify_case(h_at_star: float, tol_case: float = TOL_CASE) -> Case:
    """Dead-band sign classification of h_rho at the inner minimizer."""
    if h_at_star < -tol_case:
        return Case.INTERIOR_NEGATIVE
    if h_at_star > tol_case:
        return Case.EXTERIOR_POSITIVE
    return Case.BOUNDARY


def minimize_h_minus_f(
    Q: BallIntersection,
    C: np.ndarray,
    *,
    seed: int = 0,
    polytope: HPolytope | None = None,
    feasible_point: np.ndarray | None = None,
    tol_case: float = TOL_CASE,
    flat_threshold: float = 1e-4,
) -> InnerPointResult:
    """Solve the branch-selection program and diagnose the minimizer.

    Two re-solves under tiny seeded linear tilts probe the singleton
    assumption; minimizers drifting more than flat_threshold apart mark the
    optimum SuspectedFlat, and the run continues from the first tilted
    minimizer.  in_int_P is strict satisfaction (slack > 1e-6) of the given
    polytope's rows.
    """
    C = np.asarray(C, dtype=float)
    pool = _CutPool(Q, inflate=1.0)
    x0, value, rounds0 = _solve_epigraph(Q, C, pool, np.zeros(Q.n), feasible_point)

    slopes, _ = max_affine_rows(Q, C)
    eps_pert = 1e-6 * (1.0 + float(np.abs(slopes).max()))
    rng = np.random.default_rng(seed)
    perturbed = []
    rounds_extra = 0
    for _ in range(2):
        u = rng.normal(size=Q.n)
        u /= np.linalg.norm(u)
        xp, _, r = _solve_epigraph(Q, C, pool, eps_pert * u, feasible_point)
        perturbed.append(xp)
        rounds_extra += r
    drift = float(np.max(np.abs(perturbed[0] - perturbed[1])))
    flat = drift > flat_threshold
    x_star = perturbed[0] if flat else x0

    h_at_star = h_rho(x_star, Q)[0]
    in_int = None
    if polytope is not None:
        in_int = bool(np.all(polytope.residuals(x_star) < -1e-6))
    return InnerPointResult(
        x_star=x_star,
        value=value,
        h_at_star=h_at_star,
        case=classify_case(h_at_star, tol_case),
        in_int_P=in_int,
        singleton_confidence="SuspectedFlat" if flat else "Unique",
        iterations=rounds0 + rounds_extra,
    )


def min_h_over_polytope(
    P: HPolytope,
    Q: BallIntersection,
    *,
    tol: float = 1e-9,
    feasible_point: np.ndarray | None = None,
) -> tuple[float, np.ndarray | None, bool]:
    """min h_rho over {A.x <= b} by Kelley cuts; decides emptiness of the
    intersection with the cage.

    Returns (min estimate, witness or None, nonempty) where nonempty means a
    point with h_rho <= tol was certified.  An infeasible polytope counts as
    empty intersection.
    """
    n = Q.n
    lo, hi = search_box(Q, inflate=1.0)
    box_labels, box_rows, box_rhs = _box_rows(lo, hi, extra_cols=1)
    base_rows = [np.concatenate([a, [0.0]]) for a in P.A]
    base_labels = [f"poly_{lab}" for lab in P.labels]
    base_rhs = list(P.b)
    cuts_rows: list[np.ndarray] = []
    cuts_rhs: list[float] = []

    anchor = 0.5 * (lo + hi)  # seed tangents so the epigraph is bounded below
    rel = anchor - Q.centers
    g = np.einsum("ij,ij->i", rel, rel) - Q.radii_sq
    for p in range(len(Q.balls)):
        grad = 2.0 * (anchor - Q.centers[p])
        cuts_rows.append(np.concatenate([grad, [-1.0]]))
        cuts_rhs.append(float(grad @ anchor - g[p]))

    c_obj = np.concatenate([np.zeros(n), [-1.0]])
    best_h = float("inf")
    best_x = None
    for _ in range(MAX_ROUNDS):
        system = HPolytope(
            base_labels + box_labels + [f"cut_{i}" for i in range(len(cuts_rows))],
            np.vstack(base_rows + box_rows + cuts_rows),
            np.array(base_rhs + box_rhs + cuts_rhs),
        )
        res = lp.lp_solve(c_obj, system, "max")
        if res.status is lp.LpStatus.INFEASIBLE:
            return float("inf"), None, False
        if res.status is lp.LpStatus.UNBOUNDED:  # pragma: no cover - boxed
            raise RuntimeError("separation LP unbounded despite box rows")
        x = res.x[:n]
        t = float(res.x[n])
        h_val = h_rho(x, Q)[0]
        if h_val < best_h:
            best_h, best_x = h_val, x
        if h_val <= tol:
            return h_val, x, True
        if t > tol:
            return t, None, False
        if h_val - t <= TOL_CUT:
            return h_val, best_x, h_val <= tol
        rel = x - Q.centers
        g = np.einsum("ij,ij->i", rel, rel) - Q.radii_sq
        for p in np.nonzero(g >= h_val - 1e-12)[0]:
            grad = 2.0 * (x - Q.centers[p])
            cuts_rows.append(np.concatenate([grad, [-1.0]]))
            cuts_rhs.append(float(grad @ x - g[p]))
    raise IterationCapError("separation cutting-plane rounds exhausted")


__all__ = [
    "Case",
    "EmptySearchRegionError",
    "InnerPointResult",
    "IterationCapError",
    "MAX_ROUNDS",
    "TOL_CASE",
    "classify_case",
    "max_affine_rows",
    "max_affine_value",
    "min_h_over_polytope",
    "minimize_h_minus_f",
    "search_box",
]
