"""Dense two-phase simplex for small linear programs.

Solves  minimize c @ x  subject to  A @ x = b,  x >= 0  on dense arrays.
Pivot selection uses Bland's rule (lowest eligible index enters, ties on
the ratio test break toward the lowest basis index), which is anti-cycling
and makes every solve deterministic.  Artificial variables never re-enter
the basis.  Intended for desk-scale problems (hundreds of columns), where
a self-contained deterministic core beats calling out to a big solver.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_MAX_ITER = 50_000


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None = None
    value: float | None = None


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row, :] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row, :])
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _iterate(T: np.ndarray, basis: np.ndarray, n_enterable: int, tol: float) -> str:
    """Run simplex pivots until optimal or unbounded."""
    m = T.shape[0] - 1
    for _ in range(_MAX_ITER):
        negative = np.where(T[m, :n_enterable] < -tol)[0]
        if negative.size == 0:
            return OPTIMAL
        col = int(negative[0])  # Bland: smallest index enters
        positive = np.where(T[:m, col] > tol)[0]
        if positive.size == 0:
            if T[m, col] < -1e3 * tol:
                return UNBOUNDED
            # cost this close to zero on a pivotless column is round-off
            # noise at the optimality boundary, not an unbounded ray
            T[m, col] = 0.0
            continue
        ratios = T[positive, -1] / T[positive, col]
        best = ratios.min()
        ties = positive[ratios <= best + 1e-9 * (1.0 + abs(best))]
        row = int(ties[np.argmin(basis[ties])])  # Bland: smallest basis index leaves
        _pivot(T, basis, row, col)
    raise RuntimeError("simplex iteration limit exceeded")


def solve_lp(c, A, b, *, tol: float = 1e-9) -> LPResult:
    """Minimize ``c @ x`` over ``A @ x = b, x >= 0``.

    Returns an :class:`LPResult`; ``x`` is a basic solution when the status
    is ``optimal``.  Infeasibility is decided by the phase-1 objective
    exceeding ``tol``.
    """
    A = np.array(A, dtype=float, copy=True)
    if A.ndim != 2:
        raise ValueError("A must be a 2-D array")
    b = np.array(b, dtype=float, copy=True)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("c, A, b shapes are inconsistent")

    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: minimize the sum of one artificial variable per row
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m)

    status = _iterate(T, basis, n, tol)
    if status == UNBOUNDED:  # sum of artificials is bounded below by 0
        raise RuntimeError("phase-1 objective reported unbounded")
    if -T[m, -1] > tol:
        return LPResult(INFEASIBLE)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] < n:
            keep.append(i)
            continue
        if abs(T[i, -1]) <= tol:
            T[i, -1] = 0.0
        candidates = np.where(np.abs(T[i, :n]) > tol)[0]
        if candidates.size:
            _pivot(T, basis, i, int(candidates[0]))
            keep.append(i)
        # else: the row is 0 = 0, redundant
    if len(keep) < m:
        T = np.vstack([T[keep], T[-1:]])
        basis = basis[keep]
        m = len(keep)

    # phase 2 on the original objective, artificial columns dropped
    T = np.hstack([T[:, :n], T[:, -1:]])
    T[m, :n] = c
    T[m, -1] = 0.0
    for i in range(m):
        coeff = T[m, basis[i]]
        if coeff != 0.0:
            T[m, :] -= coeff * T[i, :]

    status = _iterate(T, basis, n, tol)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = np.zeros(n)
    x[basis] = np.maximum(T[:m, -1], 0.0)
    return LPResult(OPTIMAL, x, float(c @ x))
