"""Affine maps, polytopes and polyhedral norms on R^n.

Conventions: points are 1-D float64 arrays, matrices are row-major 2-D
arrays, and a polytope is the convex hull of an explicit vertex list
(one vertex per row).  All values are frozen after construction; the
operations below are pure functions, so everything here is safe to share
between threads.

Membership and intersection questions are decided by a small dense
simplex core (:mod:`fixmk.lp`): a point is in a hull iff convex weights
over the vertices reproduce it within tolerance.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatchError, InvalidWeightsError
from .lp import INFEASIBLE, OPTIMAL, solve_lp

DEFAULT_MEMBERSHIP_TOL = 1e-9


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite, read-only 1-D float64 array."""
    v = np.array(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    v.setflags(write=False)
    return v


def as_matrix(a, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite, read-only square float64 matrix."""
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class AffineMap:
    """The transformation x -> matrix @ x + offset."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        b = as_vector(self.offset, m.shape[0])
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", b)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def linear(cls, matrix) -> "AffineMap":
        m = as_matrix(matrix)
        return cls(m, np.zeros(m.shape[0]))

    @classmethod
    def translation(cls, offset) -> "AffineMap":
        b = as_vector(offset)
        return cls(np.eye(b.shape[0]), b)

    def __call__(self, x) -> np.ndarray:
        return affine_apply(self, x)

    def __repr__(self):
        return f"AffineMap(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of a nonempty vertex list (V-representation)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise DimensionMismatchError(
                f"expected a nonempty (vertices x dim) array, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("polytope has non-finite vertex coordinates")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @classmethod
    def box(cls, lower, upper) -> "Polytope":
        lo = as_vector(lower)
        hi = as_vector(upper, lo.shape[0])
        corners = [
            [pair[i] for pair, i in zip(zip(lo, hi), choice)]
            for choice in itertools.product((0, 1), repeat=lo.shape[0])
        ]
        return cls(np.array(corners))

    @classmethod
    def standard_simplex(cls, dim: int) -> "Polytope":
        return cls(np.eye(dim))

    def __repr__(self):
        return f"Polytope(dim={self.dim}, vertices={self.n_vertices})"


class NormKind(Enum):
    MAX_ABS = "max-abs"  # l-infinity
    SUM_ABS = "sum-abs"  # l-1


@dataclass(frozen=True)
class NormSpec:
    """A polyhedral norm (max-abs or sum-abs) on R^dim."""

    kind: NormKind
    dim: int

    def value(self, x) -> float:
        v = as_vector(x, self.dim)
        if self.kind is NormKind.MAX_ABS:
            return float(np.max(np.abs(v)))
        return float(np.sum(np.abs(v)))

    def dual(self) -> "NormSpec":
        other = NormKind.SUM_ABS if self.kind is NormKind.MAX_ABS else NormKind.MAX_ABS
        return NormSpec(other, self.dim)

    def unit_ball(self) -> Polytope:
        if self.kind is NormKind.MAX_ABS:
            return Polytope(
                np.array(list(itertools.product((-1.0, 1.0), repeat=self.dim)))
            )
        eye = np.eye(self.dim)
        return Polytope(np.vstack([eye, -eye]))

    def operator_norm(self, matrix) -> float:
        """Induced operator norm: max row sum for max-abs, max column sum for sum-abs."""
        m = as_matrix(matrix, self.dim)
        axis = 1 if self.kind is NormKind.MAX_ABS else 0
        return float(np.max(np.sum(np.abs(m), axis=axis)))


# ---------------------------------------------------------------------------
# affine-map algebra


def affine_apply(m: AffineMap, x) -> np.ndarray:
    v = as_vector(x, m.dim)
    return m.matrix @ v + m.offset


def affine_compose(f: AffineMap, g: AffineMap) -> AffineMap:
    """The map x -> f(g(x))."""
    if f.dim != g.dim:
        raise DimensionMismatchError(f"compose dims {f.dim} vs {g.dim}")
    return AffineMap(f.matrix @ g.matrix, f.matrix @ g.offset + f.offset)


def map_deviation(f: AffineMap, g: AffineMap) -> float:
    """Max entrywise deviation between two maps (matrix and offset)."""
    if f.dim != g.dim:
        raise DimensionMismatchError(f"deviation dims {f.dim} vs {g.dim}")
    return max(
        float(np.max(np.abs(f.matrix - g.matrix))),
        float(np.max(np.abs(f.offset - g.offset))),
    )


def flatten_map(m: AffineMap) -> np.ndarray:
    """Entries of matrix and offset as one flat vector (row-major)."""
    return np.concatenate([m.matrix.ravel(), m.offset])


def convex_combination(maps, weights, *, weight_tol: float = 1e-9) -> AffineMap:
    """Entrywise weighted mixture of affine maps with convex weights."""
    maps = list(maps)
    w = np.asarray(weights, dtype=float)
    if len(maps) == 0 or w.shape != (len(maps),):
        raise InvalidWeightsError("need one weight per map, at least one map")
    if np.any(w < -weight_tol):
        raise InvalidWeightsError(f"negative weight {w.min():.3e}")
    if abs(w.sum() - 1.0) > weight_tol:
        raise InvalidWeightsError(f"weights sum to {w.sum():.12f}, expected 1")
    dim = maps[0].dim
    matrix = np.zeros((dim, dim))
    offset = np.zeros(dim)
    for wi, m in zip(w, maps):
        if m.dim != dim:
            raise DimensionMismatchError("maps in combination have mixed dims")
        matrix += wi * m.matrix
        offset += wi * m.offset
    return AffineMap(matrix, offset)


def _power_sum(matrix: np.ndarray, offset: np.ndarray, n: int):
    """Return (sum of powers 0..n-1, n-th power), each as (matrix, offset).

    Doubling recursion: the block of powers m..2m-1 equals the m-th power
    composed with the block 0..m-1, which keeps the cost at O(log n)
    matrix products and makes depth budgets like 2^40 affordable.
    """
    d = offset.shape[0]
    if n == 0:
        return (np.zeros((d, d)), np.zeros(d)), (np.eye(d), np.zeros(d))
    (s_m, s_o), (p_m, p_o) = _power_sum(matrix, offset, n // 2)
    half = n // 2
    s_m, s_o = s_m + p_m @ s_m, s_o + p_m @ s_o + half * p_o
    p_m, p_o = p_m @ p_m, p_m @ p_o + p_o
    if n % 2:
        s_m, s_o = s_m + p_m, s_o + p_o
        p_m, p_o = p_m @ matrix, p_m @ offset + p_o
    return (s_m, s_o), (p_m, p_o)


def cesaro_average(m: AffineMap, n: int) -> AffineMap:
    """(1/n) * (I + m + m^2 + ... + m^(n-1))."""
    if n < 1:
        raise ValueError("averaging depth n must be >= 1")
    (s_m, s_o), _ = _power_sum(m.matrix, m.offset, n)
    return AffineMap(s_m / n, s_o / n)


def affine_power(m: AffineMap, n: int) -> AffineMap:
    """n-fold composition of m with itself; n = 0 gives the identity."""
    if n < 0:
        raise ValueError("negative powers are not defined here")
    _, (p_m, p_o) = _power_sum(m.matrix, m.offset, n)
    return AffineMap(p_m, p_o)


# ---------------------------------------------------------------------------
# polytope operations


def polytope_image(m: AffineMap, K: Polytope) -> Polytope:
    """Hull of the mapped vertices; affine maps carry hulls to hulls."""
    if m.dim != K.dim:
        raise DimensionMismatchError(f"map dim {m.dim} vs polytope dim {K.dim}")
    mapped = K.vertices @ m.matrix.T + m.offset
    return Polytope(np.unique(mapped, axis=0))


def hull_fit(K: Polytope, x) -> tuple[float, np.ndarray]:
    """Best max-abs deviation between x and the hull, plus achieving weights.

    Minimizes t over convex weights lam with |sum(lam_v v) - x| <= t
    coordinate-wise.  t = 0 (up to arithmetic) iff x is in the hull.
    """
    point = as_vector(x, K.dim)
    V = K.vertices
    n_v, d = V.shape
    # columns: lam (n_v) | t | u (d) | w (d)
    n_cols = n_v + 1 + 2 * d
    A = np.zeros((2 * d + 1, n_cols))
    b = np.zeros(2 * d + 1)
    for i in range(d):
        A[i, :n_v] = V[:, i]
        A[i, n_v] = -1.0
        A[i, n_v + 1 + i] = 1.0
        b[i] = point[i]
        A[d + i, :n_v] = V[:, i]
        A[d + i, n_v] = 1.0
        A[d + i, n_v + 1 + d + i] = -1.0
        b[d + i] = point[i]
    A[2 * d, :n_v] = 1.0
    b[2 * d] = 1.0
    c = np.zeros(n_cols)
    c[n_v] = 1.0
    res = solve_lp(c, A, b)
    if res.status != OPTIMAL:  # the system is always feasible for large t
        raise RuntimeError(f"hull fit LP unexpectedly {res.status}")
    return max(res.value, 0.0), res.x[:n_v]


def hull_distance(K: Polytope, x) -> float:
    return hull_fit(K, x)[0]


def contains(K: Polytope, x, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
    """True iff convex weights over the vertices reproduce x within tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return hull_distance(K, x) <= tol


def diameter(K: Polytope, norm: NormSpec) -> float:
    """Max distance between vertex pairs; attained at vertices by convexity."""
    if norm.dim != K.dim:
        raise DimensionMismatchError(f"norm dim {norm.dim} vs polytope dim {K.dim}")
    V = K.vertices
    diffs = np.abs(V[:, None, :] - V[None, :, :])
    if norm.kind is NormKind.MAX_ABS:
        return float(diffs.max(axis=2).max())
    return float(diffs.sum(axis=2).max())


def _feasibility_tableau(vertex_sets: list[np.ndarray], d: int):
    """Constraint block for: shared x, per-set convex weights, deviation t.

    Variables: lam_1..lam_J | x+ | x- | t | u (J*d) | w (J*d); for every set
    j and coordinate i the hull point strays from x by at most t.
    """
    sizes = [V.shape[0] for V in vertex_sets]
    total_lam = sum(sizes)
    J = len(vertex_sets)
    n_cols = total_lam + 2 * d + 1 + 2 * J * d
    n_rows = 2 * J * d + J
    A = np.zeros((n_rows, n_cols))
    b = np.zeros(n_rows)
    xp, xn = total_lam, total_lam + d
    t_col = total_lam + 2 * d
    u0 = t_col + 1
    w0 = u0 + J * d
    row = 0
    offset = 0
    for j, V in enumerate(vertex_sets):
        n_v = V.shape[0]
        for i in range(d):
            A[row, offset : offset + n_v] = V[:, i]
            A[row, xp + i] = -1.0
            A[row, xn + i] = 1.0
            A[row, t_col] = -1.0
            A[row, u0 + j * d + i] = 1.0
            row += 1
            A[row, offset : offset + n_v] = V[:, i]
            A[row, xp + i] = -1.0
            A[row, xn + i] = 1.0
            A[row, t_col] = 1.0
            A[row, w0 + j * d + i] = -1.0
            row += 1
        A[row, offset : offset + n_v] = 1.0
        b[row] = 1.0
        row += 1
        offset += n_v
    return A, b, xp, xn, t_col, n_cols


def feasible_point(constraint_sets, tol: float = DEFAULT_MEMBERSHIP_TOL, canonical: bool = True):
    """A point lying in every hull within tol, or None when there is none.

    One linear program ties a shared point to convex weights for each
    polytope; the hulls intersect iff the optimal deviation is <= tol.
    By default the witness is canonical: with the deviation capped at tol,
    each coordinate is pushed to its extremes and the probe solutions
    averaged, an interior-leaning pick that identical inputs always
    reproduce.  ``canonical=False`` returns the raw basic solution of the
    first program, which is still deterministic but cheaper.
    """
    sets = list(constraint_sets)
    if not sets:
        raise ValueError("need at least one polytope")
    d = sets[0].dim
    for K in sets:
        if K.dim != d:
            raise DimensionMismatchError("polytopes have mixed dims")
    A, b, xp, xn, t_col, n_cols = _feasibility_tableau([K.vertices for K in sets], d)

    c = np.zeros(n_cols)
    c[t_col] = 1.0
    res = solve_lp(c, A, b)
    if res.status != OPTIMAL:
        raise RuntimeError(f"feasibility LP unexpectedly {res.status}")
    if res.value > tol:
        return None
    if not canonical:
        return res.x[xp : xp + d] - res.x[xn : xn + d]

    # cap the deviation at tol and probe each coordinate both ways
    cap_row = np.zeros((1, n_cols + 1))
    cap_row[0, t_col] = 1.0
    cap_row[0, -1] = 1.0  # slack for t <= tol
    A_probe = np.hstack([A, np.zeros((A.shape[0], 1))])
    A_probe = np.vstack([A_probe, cap_row])
    b_probe = np.concatenate([b, [tol]])
    probes = []
    for i in range(d):
        for sign in (-1.0, 1.0):
            c_probe = np.zeros(n_cols + 1)
            c_probe[xp + i] = sign
            c_probe[xn + i] = -sign
            r = solve_lp(c_probe, A_probe, b_probe)
            if r.status != OPTIMAL:
                raise RuntimeError(f"probe LP unexpectedly {r.status}")
            probes.append(r.x[xp : xp + d] - r.x[xn : xn + d])
    return np.mean(probes, axis=0)
