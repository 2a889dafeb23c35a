"""Optimal D2D-to-CU channel assignment.

The admissible pairs and the union of their candidate CUs form a bipartite
graph weighted by the sharing power increase.  The graph is padded to a
square cost matrix and solved with the Hungarian method:

* missing real edges carry a finite sentinel ``big_weight``;
* virtual columns (a CU left unshared) cost 0, as do virtual rows when
  admissible pairs outnumber candidate CUs;
* a real pair that ends up on a sentinel edge is reported unmatched.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .power import CandidateStructure

log = logging.getLogger(__name__)

SENTINEL_FACTOR = 1e6


@njit(cache=True)
def _augment_all(a):
    """Shortest-augmenting-path Hungarian core; returns match[col] = row,
    1-based, with column 0 as the virtual root of each search tree."""
    n = a.shape[0]
    inf = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1)
    used = np.empty(n + 1, dtype=np.bool_)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv[:] = inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = a[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    return match


def hungarian(cost) -> np.ndarray:
    """Minimum-cost perfect matching on a square, non-negative cost matrix.

    Returns ``col`` with ``col[r]`` the column assigned to row ``r``.  Uses
    the shortest-augmenting-path form with row/column potentials, O(n^3).
    Rows are inserted in index order and ties go to the lowest column, so
    the result depends only on the matrix.
    """
    a = np.asarray(cost, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int)
    if not np.all(np.isfinite(a)):
        raise ValueError("cost matrix must be finite")
    if np.any(a < 0):
        raise ValueError("cost matrix must be non-negative")

    match = _augment_all(np.ascontiguousarray(a))
    col = np.empty(n, dtype=int)
    col[match[1:] - 1] = np.arange(n)
    return col


@dataclass(frozen=True)
class AssignmentProblem:
    cost: np.ndarray
    row_labels: list        # CU index, or None for a virtual row
    col_labels: list        # D2D index, or None for a virtual column
    big_weight: float


@dataclass(frozen=True)
class Assignment:
    matches: list[tuple[int, int]] = field(default_factory=list)   # (cu, d2d)
    total_inc: float = 0.0
    unmatched_d2d: list[int] = field(default_factory=list)

    @property
    def matched_d2d(self) -> list[int]:
        return [j for _, j in self.matches]

    def as_matrix(self, num_cus: int, num_d2d_pairs: int) -> np.ndarray:
        """The 0/1 assignment matrix rho, shape (N, M)."""
        rho = np.zeros((num_cus, num_d2d_pairs), dtype=int)
        for i, j in self.matches:
            rho[i, j] = 1
        return rho


def default_big_weight(cand: CandidateStructure) -> float:
    finite = cand.p_inc[cand.mask]
    top = float(finite.max()) if finite.size else 0.0
    return SENTINEL_FACTOR * (1.0 + top)


def build_assignment_problem(cand: CandidateStructure, big_weight: float | None = None) -> AssignmentProblem:
    rows = cand.cu_union
    cols = cand.admissible_set
    if not cols:
        raise ValueError("no admissible D2D pairs to assign")
    big = default_big_weight(cand) if big_weight is None else float(big_weight)
    n = max(len(rows), len(cols))

    cost = np.zeros((n, n))
    real = cand.p_inc[np.ix_(rows, cols)]
    cost[:len(rows), :len(cols)] = np.where(cand.mask[np.ix_(rows, cols)], real, big)
    row_labels = list(rows) + [None] * (n - len(rows))
    col_labels = list(cols) + [None] * (n - len(cols))
    return AssignmentProblem(cost, row_labels, col_labels, big)


def solve_allocation(cand: CandidateStructure, big_weight: float | None = None) -> Assignment:
    S = cand.admissible_set
    if not S:
        return Assignment()
    if len(S) == 1:
        j = S[0]
        i = int(np.nanargmin(cand.p_inc[:, j]))
        return Assignment([(i, j)], float(cand.p_inc[i, j]), [])

    prob = build_assignment_problem(cand, big_weight)
    col = hungarian(prob.cost)
    matches, dropped = [], []
    for r, c in enumerate(col):
        i, j = prob.row_labels[r], prob.col_labels[c]
        if j is None:
            continue
        if i is None or not cand.mask[i, j]:
            dropped.append(j)
        else:
            matches.append((i, j))
    matches.sort(key=lambda m: m[1])
    dropped.sort()
    if dropped:
        log.debug("candidate conflicts left %d admissible pair(s) unmatched: %s", len(dropped), dropped)
    total = float(sum(cand.p_inc[i, j] for i, j in matches))
    return Assignment(matches, total, dropped)


@dataclass(frozen=True)
class AllocationOutcome:
    """Final per-user powers of one scheme on one realization."""

    assignment: Assignment
    cu_powers: np.ndarray    # (N,) mW
    d2d_powers: np.ndarray   # (M,) mW, zero when unmatched
    candidates: CandidateStructure


def allocate(cand: CandidateStructure, big_weight: float | None = None) -> AllocationOutcome:
    """Solve the assignment and read the powers off the candidate structure.

    Unshared CUs stay at their exclusive minimum power; pairs without a
    channel transmit nothing.
    """
    asg = solve_allocation(cand, big_weight)
    cu = cand.p_min_exclusive.astype(float).copy()
    d2d = np.zeros(cand.num_d2d_pairs)
    for i, j in asg.matches:
        cu[i] = cand.p_cu[i, j]
        d2d[j] = cand.p_d2d[i, j]
    return AllocationOutcome(asg, cu, d2d, cand)
