"""Independent ground truth: exhaustive corner enumeration, the boolean
achievable-sum table for integer weights, and a vertex-enumeration
farthest-point oracle for tiny dimensions.

These never touch the geometric pipeline; they exist to check it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .instance import HPolytope, RsspInstance

BRUTE_FORCE_CAP = 24
VERTEX_CAP = 8


def brute_force(
    inst: RsspInstance, tol: float = 0.0
) -> tuple[bool, list[np.ndarray]]:
    """Enumerate every nonzero binary vector and keep those with |S.x| <= tol.

    Use tol = 0 for integer weights.  Capped at n = 24.
    """
    n = inst.n
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"brute force capped at n={BRUTE_FORCE_CAP}")
    solutions: list[np.ndarray] = []
    feasible = False
    chunk = 1 << min(n, 16)
    total = 1 << n
    for start in range(1, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (codes[:, None] >> np.arange(n)) & 1
        sums = bits.astype(float) @ inst.S
        hits = np.nonzero(np.abs(sums) <= tol)[0]
        if hits.size:
            feasible = True
            solutions.extend(bits[h].astype(float) for h in hits)
    return feasible, solutions


@dataclass(frozen=True)
class DpTable:
    """Achievable-sum table: cells[k, v + offset] says whether some nonempty
    subset of the first k+1 weights sums to v."""

    cells: np.ndarray  # (n, width) bool
    offset: int  # column index of sum 0

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])


def dp_feasible(S_int: np.ndarray) -> tuple[bool, DpTable]:
    """Boolean dynamic program over the integer sum range [-M-, M+].

    The textbook table assumes positive weights; mixed signs are handled by
    indexing sums with an offset of M- (the magnitude of the negative part).
    Feasible iff the final row marks sum 0.
    """
    S = np.asarray(S_int)
    if not np.all(S == np.round(S)):
        raise ValueError("dp_feasible requires integer weights")
    S = S.astype(np.int64)
    if S.size == 0 or np.all(S == 0):
        raise ValueError("weights must not be all zero")
    m_pos = int(S[S > 0].sum())
    m_neg = int(-S[S < 0].sum())
    if m_pos + m_neg > 10**7:
        raise ValueError("sum range exceeds the 1e7-cell guard")
    width = m_pos + m_neg + 1
    offset = m_neg
    n = S.size
    cells = np.zeros((n, width), dtype=bool)
    row = np.zeros(width, dtype=bool)
    for k, s in enumerate(S):
        new = row.copy()
        s = int(s)
        if s >= 0:
            new[s:] |= row[: width - s]
        else:
            new[: width + s] |= row[-s:]
        new[offset + s] = True  # the singleton subset {k}
        cells[k] = new
        row = new
    return bool(row[offset]), DpTable(cells, offset)


def enumerate_vertices(P: HPolytope, cap: int = VERTEX_CAP) -> np.ndarray:
    """All vertices of {A.x <= b} by intersecting every n-subset of facets.

    Deterministic: vertices are deduplicated on rounded coordinates and
    returned in lexicographic order.  Capped at n = 8.
    """
    n = P.n
    if n > cap:
        raise ValueError(f"vertex enumeration capped at n={cap}")
    if P.m < n:
        raise ValueError("fewer facets than dimensions: no vertices")
    seen: dict[tuple, np.ndarray] = {}
    for rows in combinations(range(P.m), n):
        A_sub = P.A[list(rows)]
        b_sub = P.b[list(rows)]
        if abs(np.linalg.det(A_sub)) < 1e-12:
            continue
        v = np.linalg.solve(A_sub, b_sub)
        if np.all(P.residuals(v) <= 1e-9):
            seen.setdefault(tuple(np.round(v, 9)), v)
    if not seen:
        raise ValueError("polytope has no vertices (empty or degenerate)")
    return np.vstack([seen[k] for k in sorted(seen)])


def farthest_vertex(
    P: HPolytope, C: np.ndarray, n_cap: int = VERTEX_CAP
) -> tuple[np.ndarray, float]:
    """argmax ||v - C|| over the vertices of P.

    Valid as a farthest-point oracle because a convex function attains its
    maximum over a polytope at a vertex.  Distance ties resolve to the
    lexicographically smallest vertex.
    """
    verts = enumerate_vertices(P, cap=n_cap)
    C = np.asarray(C, dtype=float)
    dists_sq = np.einsum("ij,ij->i", verts - C, verts - C)
    best = float(dists_sq.max())
    tied = np.nonzero(dists_sq >= best - 1e-9 * (1.0 + best))[0]
    v = verts[tied[0]]  # verts already lexicographically sorted
    return v, float(np.sqrt(dists_sq[tied[0]]))


def planted_instance(
    rng: np.random.Generator, n: int, lo: int = -15, hi: int = 15
) -> tuple[np.ndarray, np.ndarray]:
    """Random integer weights with a planted nonzero binary solution.

    Entries stay inside [lo, hi]; the planted support is returned for
    recovery bookkeeping.
    """
    while True:
        S = rng.integers(lo, hi + 1, size=n)
        mask = rng.integers(0, 2, size=n).astype(bool)
        if not mask.any():
            continue
        idx = np.nonzero(mask)[0]
        j = int(idx[rng.integers(idx.size)])
        S[j] -= int(S[mask].sum())
        if S[j] < lo or S[j] > hi or np.all(S == 0):
            continue
        return S.astype(float), mask.astype(float)


__all__ = [
    "BRUTE_FORCE_CAP",
    "DpTable",
    "VERTEX_CAP",
    "brute_force",
    "dp_feasible",
    "enumerate_vertices",
    "farthest_vertex",
    "planted_instance",
]
