"""Level sets of h_rho(x) - ||x - C||^2 as linear inequality systems, and the
alpha-scaled construction whose level sets coincide with the original's.

Each ball constraint ||x - C_p||^2 - r_p^2 <= ||x - C||^2 - R^2 loses its
quadratic term when expanded, leaving one linear row per ball.  Scaling all
center offsets and the target by alpha > 1 reproduces exactly the same
polytope at the remapped radius R_hat, which is what makes the containment
threshold observable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Ball, BallIntersection, build_Q, cube_ball, rho_bar, s_foot, h_foot
from .instance import HPolytope, RsspInstance, build_center


class NegativeRadicandError(ValueError):
    """The remapped level radius R_hat^2 came out negative."""


@dataclass(frozen=True)
class LevelSetParams:
    R: float
    C: np.ndarray
    Q: BallIntersection

    def __post_init__(self) -> None:
        if not np.isfinite(self.R) or self.R < 0:
            raise ValueError("R must be finite and nonnegative")
        if np.asarray(self.C).size != self.Q.n:
            raise ValueError("dimension mismatch between C and Q")


def levelset_polytope(Q: BallIntersection, C: np.ndarray, R: float) -> HPolytope:
    """Rows 2(C - C_p).x <= ||C||^2 - ||C_p||^2 + r_p^2 - R^2, tagged per ball.

    A ball centered exactly at C yields an all-zero coefficient row; it is
    kept (constant feasibility) so row tags stay aligned across scaled and
    unscaled systems.
    """
    params = LevelSetParams(R, np.asarray(C, dtype=float), Q)
    C = params.C
    c_norm_sq = float(C @ C)
    A = 2.0 * (C[None, :] - Q.centers)
    center_norms = np.einsum("ij,ij->i", Q.centers, Q.centers)
    b = c_norm_sq - center_norms + Q.radii_sq - R**2
    return HPolytope(list(Q.tags), A, b)


def zero_rows(P: HPolytope, tol: float = 1e-12) -> list[str]:
    """Labels of constant (all-zero coefficient) rows."""
    norms = np.abs(P.A).max(axis=1, initial=0.0)
    return [lab for lab, nn in zip(P.labels, norms) if nn <= tol]


def scale_construction(
    inst: RsspInstance, rho: float, beta: float, alpha: float
) -> tuple[BallIntersection, np.ndarray]:
    """The enlarged cage and target: offsets alpha*rho, target offset
    alpha*beta/2, radii rebuilt from the same hyperplane feet and imprints.
    """
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    base = build_Q(inst, rho)  # validates rho and the hyperplane geometry
    n = inst.n
    a_rho = alpha * rho
    balls: list[Ball] = []
    for k in range(1, n + 1):
        balls.append(cube_ball(k, +1, a_rho, n))
        balls.append(cube_ball(k, -1, a_rho, n))
    unit = inst.S / inst.norm
    u = inst.alignment
    offset_s = a_rho - u / 2.0
    balls.append(
        Ball("s", 0.5 * np.ones(n) - a_rho * unit, offset_s**2 + base.imprint_s_sq)
    )
    offset_h = a_rho + (n - 1) / (2.0 * np.sqrt(n))
    balls.append(
        Ball(
            "h",
            0.5 * np.ones(n) + a_rho * np.ones(n) / np.sqrt(n),
            offset_h**2 + base.imprint_h_sq,
        )
    )
    Q_hat = BallIntersection(
        balls=balls,
        rho=a_rho,
        foot_s=s_foot(inst),
        foot_h=h_foot(n),
        imprint_s_sq=base.imprint_s_sq,
        imprint_h_sq=base.imprint_h_sq,
        offset_s=offset_s,
        offset_h=offset_h,
    )
    C_hat = build_center(inst, alpha * beta)
    return Q_hat, C_hat


def r_hat(R: float, alpha: float, beta: float, n: int) -> float:
    """Remapped level radius: R_hat^2 = a R^2 + a(a-1) b^2/4 - (a-1) n/4."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    val = alpha * R**2 + alpha * (alpha - 1.0) * beta**2 / 4.0 - (alpha - 1.0) * n / 4.0
    if val < 0:
        raise NegativeRadicandError(
            f"R_hat^2 = {val:g} < 0 for R={R:g}, alpha={alpha:g}, beta={beta:g}, n={n}"
        )
    return float(np.sqrt(val))


def verify_scaling_identity(
    inst: RsspInstance, rho: float, beta: float, alpha: float, R: float
) -> float:
    """Row-by-row check that the scaled level set is alpha times the original.

    Builds both inequality systems, matches rows by tag, and returns the
    maximum absolute discrepancy over all coefficients and right-hand sides
    of (a_hat, b_hat) - alpha * (a, b).  Zero in exact arithmetic.
    """
    Q = build_Q(inst, rho)
    C = build_center(inst, beta)
    base = levelset_polytope(Q, C, R)
    Q_hat, C_hat = scale_construction(inst, rho, beta, alpha)
    hat = levelset_polytope(Q_hat, C_hat, r_hat(R, alpha, beta, inst.n))
    if base.labels != hat.labels:
        raise AssertionError("row tags diverged between scaled and unscaled systems")
    return float(
        max(
            np.abs(hat.A - alpha * base.A).max(),
            np.abs(hat.b - alpha * base.b).max(),
        )
    )


__all__ = [
    "LevelSetParams",
    "NegativeRadicandError",
    "levelset_polytope",
    "r_hat",
    "scale_construction",
    "verify_scaling_identity",
    "zero_rows",
]
