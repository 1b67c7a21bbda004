"""Construction and analysis of the ball intersection that outer-approximates
the feasibility polytope.

One ball per facet family: two per coordinate (the cube), one for the weight
halfspace S.x <= 0, one for the mass halfspace sum(x) >= 1/2.  Every ball
leaves the same imprint on the sphere circumscribing the unit cube as the
hyperplane it replaces, so binary corners (and corners on the weight
hyperplane) stay exactly on the boundary.  A single offset parameter rho
controls how far the centers sit from the cube center; larger rho means a
tighter cage.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .instance import RsspInstance

EPS_MARGIN = 1e-6  # padding that keeps the strict inequalities of the construction strict


class DegenerateHyperplaneError(ValueError):
    """The weight hyperplane misses the circumscribed sphere (S parallel to 1)."""


@dataclass(frozen=True)
class Ball:
    """Closed ball, radius stored squared to keep boundary equalities exact."""

    tag: str
    center: np.ndarray
    radius_sq: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not np.all(np.isfinite(self.center)) or not np.isfinite(self.radius_sq):
            raise ValueError("non-finite ball parameters")
        if self.radius_sq <= 0:
            raise ValueError("radius_sq must be positive")

    def value(self, x: np.ndarray) -> float:
        """||x - center||^2 - r^2; <= 0 inside."""
        d = np.asarray(x, dtype=float) - self.center
        return float(d @ d - self.radius_sq)


@dataclass
class BallIntersection:
    """An intersection of closed balls, kept in frozen tag order.

    For the canonical construction the order is 1+, 1-, ..., n+, n-, s, h and
    the construction intermediates (feet and imprint radii of the two
    halfspace balls) are retained for the property suites.  Hand-built
    intersections (used by the desk checks) may omit rho and aux.
    """

    balls: list[Ball]
    rho: float | None = None
    foot_s: np.ndarray | None = None
    foot_h: np.ndarray | None = None
    imprint_s_sq: float | None = None
    imprint_h_sq: float | None = None
    offset_s: float | None = None
    offset_h: float | None = None

    @property
    def n(self) -> int:
        return int(self.balls[0].center.size)

    @property
    def tags(self) -> list[str]:
        return [b.tag for b in self.balls]

    @cached_property
    def centers(self) -> np.ndarray:
        return np.vstack([b.center for b in self.balls])

    @cached_property
    def radii_sq(self) -> np.ndarray:
        return np.array([b.radius_sq for b in self.balls])


def cube_ball(k: int, sign: int, rho: float, n: int) -> Ball:
    """Ball replacing the cube facet x_k = (1 -+ sign)/2.

    Center 1/2 +- rho e_k; the radius makes every binary corner with the
    opposite k-th coordinate sit exactly on the sphere.
    """
    if not 1 <= k <= n:
        raise ValueError("k out of range")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    center = 0.5 * np.ones(n)
    center[k - 1] += sign * rho
    radius_sq = (0.5 + rho) ** 2 + (n - 1) / 4.0
    return Ball(f"{k}{'+' if sign > 0 else '-'}", center, radius_sq)


def halfspace_ball_s(inst: RsspInstance, rho: float) -> Ball:
    """Ball replacing the halfspace S.x <= 0.

    The foot P_s is the orthogonal projection of the cube center onto the
    hyperplane; the radius preserves the hyperplane's imprint on the
    circumscribed sphere, so binary corners with S.x = 0 lie exactly on this
    sphere.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    n = inst.n
    u = inst.alignment  # S.1 / ||S||; distance of 1/2 to the hyperplane is |u|/2
    imprint_sq = n / 4.0 - (u / 2.0) ** 2
    if imprint_sq <= 0:
        raise DegenerateHyperplaneError(
            "hyperplane S.x = 0 does not cut the circumscribed sphere "
            "(S is parallel to the all-ones vector)"
        )
    unit = inst.S / inst.norm
    offset = rho - u / 2.0  # distance from the center to the foot, signed toward S
    center = 0.5 * np.ones(n) - rho * unit
    radius_sq = offset**2 + imprint_sq
    return Ball("s", center, radius_sq)


def halfspace_ball_h(n: int, rho: float) -> Ball:
    """Ball replacing the halfspace sum(x) >= 1/2."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    offset = rho + (n - 1) / (2.0 * np.sqrt(n))
    imprint_sq = 0.5 - 1.0 / (4.0 * n)
    center = 0.5 * np.ones(n) + rho * np.ones(n) / np.sqrt(n)
    return Ball("h", center, offset**2 + imprint_sq)


def s_foot(inst: RsspInstance) -> np.ndarray:
    """Orthogonal projection of the cube center onto {S.x = 0}."""
    return 0.5 * np.ones(inst.n) - (inst.S.sum() / (2.0 * inst.norm**2)) * inst.S


def h_foot(n: int) -> np.ndarray:
    """Projection of the cube center onto {sum(x) = 1/2}."""
    return np.full(n, 1.0 / (2.0 * n))


def build_Q(inst: RsspInstance, rho: float) -> BallIntersection:
    """Assemble the 2n+2 balls in frozen order 1+, 1-, ..., n+, n-, s, h."""
    if rho < rho_bar(inst):
        warnings.warn(
            f"rho={rho:g} is below rho_bar={rho_bar(inst):g}; "
            "the outer-approximation guarantees do not apply",
            stacklevel=2,
        )
    n = inst.n
    balls: list[Ball] = []
    for k in range(1, n + 1):
        balls.append(cube_ball(k, +1, rho, n))
        balls.append(cube_ball(k, -1, rho, n))
    ball_s = halfspace_ball_s(inst, rho)
    ball_h = halfspace_ball_h(n, rho)
    balls.append(ball_s)
    balls.append(ball_h)
    u = inst.alignment
    return BallIntersection(
        balls=balls,
        rho=rho,
        foot_s=s_foot(inst),
        foot_h=h_foot(n),
        imprint_s_sq=n / 4.0 - (u / 2.0) ** 2,
        imprint_h_sq=0.5 - 1.0 / (4.0 * n),
        offset_s=rho - u / 2.0,
        offset_h=rho + (n - 1) / (2.0 * np.sqrt(n)),
    )


def h_rho(x: np.ndarray, Q: BallIntersection) -> tuple[float, str]:
    """max over balls of ||x - C_p||^2 - r_p^2 and the achieving tag.

    The intersection is the zero sublevel set.  Ties resolve to the first
    tag in the frozen ball order.
    """
    x = np.asarray(x, dtype=float)
    diffs = Q.centers - x
    values = np.einsum("ij,ij->i", diffs, diffs) - Q.radii_sq
    idx = int(np.argmax(values))
    return float(values[idx]), Q.balls[idx].tag


def h_rho_batch(X: np.ndarray, Q: BallIntersection) -> np.ndarray:
    """h_rho over the rows of X, vectorized."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    sq = (
        np.sum(X * X, axis=1)[:, None]
        - 2.0 * X @ Q.centers.T
        + np.sum(Q.centers * Q.centers, axis=1)[None, :]
    )
    return np.max(sq - Q.radii_sq[None, :], axis=1)


def rho_bar(inst: RsspInstance) -> float:
    """Smallest safe offset for the outer approximation.

    Derivation (the source construction only asserts existence): cube and
    mass-halfspace radii exceed sqrt(n)/2 for any rho > 0; the weight ball
    needs (rho - u/2)^2 >= (u/2)^2 with u = S.1/||S||, i.e. rho >= u, and its
    center is inside the halfspace iff rho > u/2.  Using 2*max(0, u) is
    deliberately conservative; the margins keep strict inequalities strict.
    """
    u = inst.alignment
    return max(EPS_MARGIN, 2.0 * max(0.0, u)) + EPS_MARGIN


def rho_delta(inst: RsspInstance, delta: float) -> float:
    """Offset beyond which the cage hugs the polytope to within delta.

    Each ball bulges past its hyperplane by a^2 / (q + sqrt(q^2 + a^2)) where
    q is the center-to-foot distance and a the imprint radius; with the
    uniform bound a^2 = n/4, requiring q >= (n/4 - delta^2) / (2 delta) caps
    every bulge at delta.  Returns the smallest rho meeting that for all
    2n+2 balls, floored at rho_bar.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = inst.n
    q_req = max(0.0, (n / 4.0 - delta**2) / (2.0 * delta))
    u = inst.alignment
    need = [
        q_req - 0.5,  # cube balls: q = rho + 1/2
        q_req + u / 2.0,  # weight ball: q = rho - u/2
        q_req - (n - 1) / (2.0 * np.sqrt(n)),  # mass ball
    ]
    return max(rho_bar(inst), *need)


@dataclass
class SharedSphereDisks:
    """Three coaxial balls sharing one equatorial sphere on {x_1 = 0}.

    Centers sit at -q_i * e_1; the shared sphere has radius a with
    a^2 = r_i^2 - q_i^2 for every i.  Hypotheses: q_1, q_2 > 0 and
    r_1 > r_2 > r_3 > 0.
    """

    q: tuple[float, float, float]
    r_sq: tuple[float, float, float]
    n: int
    tol: float = 1e-9
    a_sq: float = field(init=False)

    def __post_init__(self) -> None:
        q1, q2, q3 = self.q
        r1, r2, r3 = (np.sqrt(v) for v in self.r_sq)
        a_sqs = [rs - qq**2 for rs, qq in zip(self.r_sq, self.q)]
        if max(a_sqs) - min(a_sqs) > self.tol:
            raise ValueError("balls do not share a common equatorial sphere")
        if a_sqs[0] <= 0:
            raise ValueError("shared sphere radius must be positive")
        if not (q1 > 0 and q2 > 0):
            raise ValueError("q_1 and q_2 must be positive")
        if not (r1 > r2 > r3 > 0):
            raise ValueError("radii must satisfy r_1 > r_2 > r_3 > 0")
        if self.n < 1:
            raise ValueError("dimension must be positive")
        self.a_sq = float(np.mean(a_sqs))

    def memberships(self, X: np.ndarray) -> list[np.ndarray]:
        """Boolean membership of each row of X in D_1, D_2, D_3."""
        out = []
        for qi, rsq in zip(self.q, self.r_sq):
            d = X.copy()
            d[:, 0] += qi
            out.append(np.einsum("ij,ij->i", d, d) <= rsq)
        return out


def check_ball_lemma(
    q: tuple[float, float, float],
    r_sq: tuple[float, float, float],
    n: int,
    samples: int,
    seed: int,
) -> int:
    """Monte-Carlo check of the coaxial inclusion chains.

    With H = {x_1 <= 0} and G = {x_1 >= 0}, the chains are
    H&D3 <= D1&D3 <= D2&D3 <= D2 and G&D1 <= G&D2 <= G&D3.
    Returns the number of sampled violations (expected 0).
    """
    disks = SharedSphereDisks(q, r_sq, n)
    rng = np.random.default_rng(seed)
    r_max = float(np.sqrt(max(r_sq)))
    lo = min(-qi - r_max for qi in q)
    hi = max(-qi + r_max for qi in q)
    X = rng.uniform(-r_max, r_max, size=(samples, n))
    X[:, 0] = rng.uniform(lo, hi, size=samples)
    in1, in2, in3 = disks.memberships(X)
    in_h = X[:, 0] <= 0.0
    in_g = X[:, 0] >= 0.0
    bad = 0
    bad += int(np.sum((in_h & in3) & ~(in1 & in3)))
    bad += int(np.sum((in1 & in3) & ~(in2 & in3)))
    bad += int(np.sum((in_g & in1) & ~(in_g & in2)))
    bad += int(np.sum((in_g & in2) & ~(in_g & in3)))
    return bad


def sample_ball_intersection(
    Q: BallIntersection,
    count: int,
    seed: int,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Hit-and-run chain over the ball intersection.

    The start must be strictly inside; the canonical construction always
    admits the cube center for the cube and mass balls but the weight ball
    may exclude it, so callers can pass any interior point.
    """
    n = Q.n
    x = 0.5 * np.ones(n) if start is None else np.asarray(start, dtype=float).copy()
    if h_rho(x, Q)[0] >= 0:
        raise ValueError("start point is not strictly inside the intersection")
    if count == 0:
        return np.empty((0, n))
    rng = np.random.default_rng(seed)
    centers, radii_sq = Q.centers, Q.radii_sq
    out = np.empty((count, n))
    for i in range(count):
        d = rng.normal(size=n)
        d /= np.linalg.norm(d)
        rel = x - centers
        B = rel @ d
        C0 = np.einsum("ij,ij->i", rel, rel) - radii_sq
        disc = np.sqrt(np.maximum(B * B - C0, 0.0))
        t_lo = float(np.max(-B - disc))
        t_hi = float(np.min(-B + disc))
        t_lo, t_hi = min(t_lo, 0.0), max(t_hi, 0.0)
        x = x + rng.uniform(t_lo, t_hi) * d
        out[i] = x
    return out


__all__ = [
    "Ball",
    "BallIntersection",
    "DegenerateHyperplaneError",
    "EPS_MARGIN",
    "SharedSphereDisks",
    "build_Q",
    "check_ball_lemma",
    "cube_ball",
    "h_foot",
    "h_rho",
    "h_rho_batch",
    "halfspace_ball_h",
    "halfspace_ball_s",
    "rho_bar",
    "rho_delta",
    "s_foot",
    "sample_ball_intersection",
]
