"""Problem definition: the weight vector, the feasibility polytope, the target
point, the quadratic objective, and candidate verification.

The decision problem: given S in R^n, does a nonzero binary vector x exist
with S.x = 0?  The search region is the unit hypercube cut by S.x <= 0 and
sum(x) >= 1/2 (the last constraint removes the origin).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DegenerateInstanceError(ValueError):
    """Raised for an all-zero (or otherwise unusable) weight vector."""


class BallcageError(RuntimeError):
    """Base class for solver-side failures that carry a diagnostic."""


@dataclass(frozen=True)
class RsspInstance:
    """A subset-sum instance over the reals.

    S holds the n weights; every entry must be finite and at least one must
    be nonzero.
    """

    S: np.ndarray

    def __post_init__(self) -> None:
        S = np.asarray(self.S, dtype=float)
        object.__setattr__(self, "S", S)
        if S.ndim != 1 or S.size < 1:
            raise DegenerateInstanceError("S must be a nonempty 1-d vector")
        if not np.all(np.isfinite(S)):
            raise DegenerateInstanceError("S contains non-finite entries")
        if float(np.linalg.norm(S)) == 0.0:
            raise DegenerateInstanceError(
                "all-zero S is degenerate: any nonzero corner is a solution"
            )

    @property
    def n(self) -> int:
        return int(self.S.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.S))

    @property
    def alignment(self) -> float:
        """S.1 / ||S||, the signed offset of the cube center from {S.x = 0}
        measured in units of ||S|| (twice the actual distance)."""
        return float(self.S.sum() / self.norm)

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.S == np.round(self.S)))

    @classmethod
    def from_json(cls, text: str) -> "RsspInstance":
        data = json.loads(text)
        if not isinstance(data, dict) or "S" not in data:
            raise ValueError('instance JSON must be an object with an "S" array')
        return cls(np.asarray(data["S"], dtype=float))

    @classmethod
    def load(cls, path: str | Path) -> "RsspInstance":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        return json.dumps({"S": [float(v) for v in self.S]})


@dataclass
class HPolytope:
    """Labeled inequality system  a.x <= b, one row per constraint.

    Row labels must be unique; they identify which facet a containment
    witness violates.
    """

    labels: list[str]
    A: np.ndarray  # (m, n)
    b: np.ndarray  # (m,)

    def __post_init__(self) -> None:
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.shape[0] != self.b.size or self.A.shape[0] != len(self.labels):
            raise ValueError("row count mismatch between labels, A and b")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("non-finite polytope coefficients")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("row labels must be unique")

    @property
    def m(self) -> int:
        return int(self.A.shape[0])

    @property
    def n(self) -> int:
        return int(self.A.shape[1])

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """a.x - b per row; <= 0 means satisfied."""
        return self.A @ np.asarray(x, dtype=float) - self.b

    def contains_point(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(self.residuals(x) <= tol))


@dataclass(frozen=True)
class CandidateVerdict:
    """Outcome of checking a candidate point against the problem definition.

    residual is |S.x| / ||S|| on the raw point, residual_rounded the same on
    the nearest binary vector; acceptance tests the rounded residual so that
    integer instances verify exactly.
    """

    is_binary: bool
    max_binary_deviation: float
    residual: float
    residual_rounded: float
    nonzero: bool
    accepted: bool
    rounded: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "is_binary": self.is_binary,
            "max_binary_deviation": self.max_binary_deviation,
            "residual": self.residual,
            "residual_rounded": self.residual_rounded,
            "nonzero": self.nonzero,
            "accepted": self.accepted,
            "rounded": [float(v) for v in self.rounded],
        }


def build_polytope(inst: RsspInstance) -> HPolytope:
    """The feasibility polytope: S.x <= 0, 0 <= x_k <= 1, sum(x) >= 1/2.

    Row order is frozen (s, lo_1..lo_n, hi_1..hi_n, h) so witnesses and the
    scaling identity tests are reproducible.
    """
    n = inst.n
    eye = np.eye(n)
    rows = [inst.S.copy()]
    labels = ["s"]
    bs = [0.0]
    for k in range(n):
        rows.append(-eye[k])
        labels.append(f"lo_{k + 1}")
        bs.append(0.0)
    for k in range(n):
        rows.append(eye[k])
        labels.append(f"hi_{k + 1}")
        bs.append(1.0)
    rows.append(-np.ones(n))
    labels.append("h")
    bs.append(-0.5)
    return HPolytope(labels, np.vstack(rows), np.array(bs))


def build_center(inst: RsspInstance, beta: float) -> np.ndarray:
    """The fixed target point C = 1/2 - (beta/2) S/||S||.

    Maximizing distance to C over the feasibility polytope answers the
    decision problem: the max equals ||C|| exactly when a solution exists.
    """
    return 0.5 * np.ones(inst.n) - (beta / 2.0) * inst.S / inst.norm


def objective_value(x: np.ndarray, inst: RsspInstance, beta_hat: float) -> float:
    """Quadratic objective sum x_k (x_k - 1) + beta_hat * sum x_k s_k.

    Equals ||x - (1 - beta_hat*S)/2||^2 - ||beta_hat*S - 1||^2 / 4; zero at a
    binary x iff S.x = 0.
    """
    x = np.asarray(x, dtype=float)
    if x.size != inst.n:
        raise ValueError("dimension mismatch")
    return float(np.dot(x, x - 1.0) + beta_hat * np.dot(x, inst.S))


def verify_candidate(
    x: np.ndarray, inst: RsspInstance, eps_feas: float = 1e-6
) -> CandidateVerdict:
    """Round x to the nearest binary vector and check it solves the problem.

    accepted requires: x within eps_feas of its rounding in every coordinate,
    |S.x_rounded| <= eps_feas * ||S||, and the rounding nonzero.
    """
    x = np.asarray(x, dtype=float)
    if x.size != inst.n:
        raise ValueError("dimension mismatch")
    if eps_feas <= 0:
        raise ValueError("eps_feas must be positive")
    rounded = np.where(x >= 0.5, 1.0, 0.0)
    deviation = float(np.max(np.abs(x - rounded)))
    is_binary = deviation <= eps_feas
    residual = float(abs(np.dot(inst.S, x)) / inst.norm)
    residual_rounded = float(abs(np.dot(inst.S, rounded)) / inst.norm)
    nonzero = bool(np.any(rounded != 0.0))
    accepted = bool(is_binary and residual_rounded <= eps_feas and nonzero)
    return CandidateVerdict(
        is_binary=is_binary,
        max_binary_deviation=deviation,
        residual=residual,
        residual_rounded=residual_rounded,
        nonzero=nonzero,
        accepted=accepted,
        rounded=rounded,
    )


def check_remark_1(x_star: np.ndarray, C: np.ndarray, tol: float) -> bool:
    """True iff the farthest distance ||x*-C|| equals ||C|| within tol."""
    x_star = np.asarray(x_star, dtype=float)
    C = np.asarray(C, dtype=float)
    if x_star.shape != C.shape:
        raise ValueError("dimension mismatch")
    return bool(
        abs(float(np.linalg.norm(x_star - C)) - float(np.linalg.norm(C))) <= tol
    )


def beta_hat(inst: RsspInstance, beta: float) -> float:
    """Convert the scaled offset beta back to the raw objective weight."""
    return beta / inst.norm


def center_norm_sq(inst: RsspInstance, beta: float) -> float:
    """Closed form ||C||^2 = n/4 + beta^2/4 - (beta/2) S.1/||S||."""
    return inst.n / 4.0 + beta**2 / 4.0 - (beta / 2.0) * inst.alignment


__all__ = [
    "BallcageError",
    "CandidateVerdict",
    "DegenerateInstanceError",
    "HPolytope",
    "RsspInstance",
    "beta_hat",
    "build_center",
    "build_polytope",
    "center_norm_sq",
    "check_remark_1",
    "objective_value",
    "verify_candidate",
]
