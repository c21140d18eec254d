"""Structure trees of affine semigroups and their validation.

A tree is either a :class:`Leaf` (a list of pairwise-commuting generators)
or a :class:`Product` whose normal child commutes past the quotient child:
for every normal generator h and quotient generator g there is a word h'
in the normal generators with h.g = g.h'.  Trees built this way always
admit a common fixed point on any invariant compact convex polytope, which
is what :mod:`fixmk.solver` computes.

Validation is entirely numerical: commutation is checked entrywise, the
normal relation by searching words up to a budget, and invariance by hull
membership of mapped vertices.  Reports carry the offending generator
labels and the worst residual so failures are actionable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DimensionMismatchError, EnumerationCapError
from .geometry import (
    AffineMap,
    Polytope,
    affine_compose,
    flatten_map,
    hull_distance,
    hull_fit,
    map_deviation,
)

DEFAULT_ABELIAN_TOL = 1e-12
DEFAULT_RELATION_TOL = 1e-9
DEFAULT_WORD_BUDGET = 6
DEFAULT_ELEMENT_CAP = 10_000
_DEDUP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Leaf:
    """Generators of an abelian semigroup."""

    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("a leaf needs at least one generator")
        d = gens[0].dim
        for g in gens:
            if g.dim != d:
                raise DimensionMismatchError("leaf generators have mixed dims")
        object.__setattr__(self, "generators", gens)

    @property
    def dim(self) -> int:
        return self.generators[0].dim


@dataclass(frozen=True, eq=False)
class Product:
    """A semigroup presented as (normal factor) composed after (quotient)."""

    normal: "SemigroupNode"
    quotient: "SemigroupNode"

    def __post_init__(self):
        if self.normal.dim != self.quotient.dim:
            raise DimensionMismatchError("product children have mixed dims")

    @property
    def dim(self) -> int:
        return self.normal.dim


SemigroupNode = Union[Leaf, Product]


def flatten(node: SemigroupNode) -> list[tuple[str, AffineMap]]:
    """All generators of the tree, normal-first, labeled g0..gN."""
    maps: list[AffineMap] = []

    def walk(n):
        if isinstance(n, Leaf):
            maps.extend(n.generators)
        else:
            walk(n.normal)
            walk(n.quotient)

    walk(node)
    return [(f"g{i}", m) for i, m in enumerate(maps)]


@dataclass
class Failure:
    kind: str
    witness: tuple[str, ...]
    residual: float


@dataclass
class ValidationReport:
    ok: bool
    depth: int
    failures: list[Failure] = field(default_factory=list)


def _report(depth: int, failures: list[Failure]) -> ValidationReport:
    return ValidationReport(ok=not failures, depth=depth, failures=failures)


def _abelian_failures(labeled, tol: float) -> list[Failure]:
    failures = []
    for i in range(len(labeled)):
        for j in range(i + 1, len(labeled)):
            (la, a), (lb, b) = labeled[i], labeled[j]
            dev = map_deviation(affine_compose(a, b), affine_compose(b, a))
            if dev > tol:
                failures.append(Failure("non-commuting-pair", (la, lb), dev))
    return failures


def check_abelian(generators, tol: float = DEFAULT_ABELIAN_TOL) -> ValidationReport:
    """Every pair of generators must commute entrywise within tol."""
    labeled = [(f"g{i}", g) for i, g in enumerate(generators)]
    if not labeled:
        raise ValueError("need at least one generator")
    return _report(1, _abelian_failures(labeled, tol))


def _invariance_failures(labeled, K: Polytope, tol: float) -> list[Failure]:
    failures = []
    for label, g in labeled:
        if g.dim != K.dim:
            raise DimensionMismatchError("generator and polytope dims differ")
        worst = 0.0
        for v in K.vertices:
            worst = max(worst, hull_distance(K, g(v)))
        if worst > tol:
            failures.append(Failure("not-invariant", (label,), worst))
    return failures


def check_invariance(generators, K: Polytope, tol: float) -> ValidationReport:
    """Every generator must map every vertex of K back into K within tol."""
    labeled = [(f"g{i}", g) for i, g in enumerate(generators)]
    return _report(1, _invariance_failures(labeled, K, tol))


def enumerate_elements(
    node: SemigroupNode,
    max_word_length: int,
    cap: int = DEFAULT_ELEMENT_CAP,
) -> list[AffineMap]:
    """Distinct products of generators up to the word length, identity included.

    Deduplication is entrywise within 1e-10, far below round-off growth at
    this scale.  Raises :class:`EnumerationCapError` past ``cap`` elements,
    which guards against free semigroups that never close up.
    """
    if max_word_length < 1:
        raise ValueError("max_word_length must be >= 1")
    gens = [m for _, m in flatten(node)]
    identity = AffineMap.identity(node.dim)
    elements = [identity]
    flat = [flatten_map(identity)]
    frontier = [identity]
    for _ in range(max_word_length):
        fresh = []
        for w in frontier:
            for g in gens:
                cand = affine_compose(w, g)
                fc = flatten_map(cand)
                known = np.abs(np.asarray(flat) - fc).max(axis=1).min()
                if known <= _DEDUP_TOL:
                    continue
                if len(elements) >= cap:
                    raise EnumerationCapError(cap)
                elements.append(cand)
                flat.append(fc)
                fresh.append(cand)
        if not fresh:
            break
        frontier = fresh
    return elements


def _try_inverse(m: AffineMap) -> AffineMap | None:
    """Inverse as an affine map, or None when the linear part is singular."""
    try:
        inv = np.linalg.inv(m.matrix)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(inv)) or np.max(np.abs(m.matrix @ inv - np.eye(m.dim))) > 1e-9:
        return None
    return AffineMap(inv, -inv @ m.offset)


def check_normal_factor(
    normal: SemigroupNode,
    quotient: SemigroupNode,
    word_budget: int = DEFAULT_WORD_BUDGET,
    tol: float = DEFAULT_RELATION_TOL,
) -> ValidationReport:
    """Resolve h.g = g.h' with h' a word in the normal generators.

    For each generator pair the closed-form candidate g^-1.h.g is tried
    first (when g is invertible) against the enumerated words; otherwise
    the words are scanned directly for the relation.
    """
    if word_budget < 1:
        raise ValueError("word_budget must be >= 1")
    words = enumerate_elements(normal, word_budget)
    h_gens = [(f"normal:{l}", m) for l, m in flatten(normal)]
    g_gens = [(f"quotient:{l}", m) for l, m in flatten(quotient)]
    failures = []
    for hl, h in h_gens:
        for gl, g in g_gens:
            target = affine_compose(h, g)
            resolved = False
            g_inv = _try_inverse(g)
            if g_inv is not None:
                candidate = affine_compose(g_inv, target)
                nearest = min(map_deviation(candidate, w) for w in words)
                if nearest <= tol:
                    resolved = True
            if not resolved:
                best = min(map_deviation(target, affine_compose(g, w)) for w in words)
                if best <= tol:
                    resolved = True
                else:
                    failures.append(Failure("normal-relation", (hl, gl), best))
    return _report(1, failures)


def validate_structure(
    node: SemigroupNode,
    K: Polytope,
    word_budget: int = DEFAULT_WORD_BUDGET,
    tol: float = DEFAULT_RELATION_TOL,
    abelian_tol: float = DEFAULT_ABELIAN_TOL,
) -> ValidationReport:
    """Recursively validate a structure tree against the polytope K.

    Leaves must be abelian and invariant; products additionally need the
    normal relation between their children.  The depth field records the
    height of the tree (1 for leaves, 1 + max child depth for products).
    Purely deterministic: identical inputs give identical reports.
    """
    if isinstance(node, Leaf):
        labeled = [(f"g{i}", g) for i, g in enumerate(node.generators)]
        failures = _abelian_failures(labeled, abelian_tol)
        failures += _invariance_failures(labeled, K, tol)
        return _report(1, failures)

    left = validate_structure(node.normal, K, word_budget, tol, abelian_tol)
    right = validate_structure(node.quotient, K, word_budget, tol, abelian_tol)
    failures = list(left.failures) + list(right.failures)
    failures += check_normal_factor(node.normal, node.quotient, word_budget, tol).failures
    failures += _invariance_failures(flatten(node), K, tol)
    return _report(1 + max(left.depth, right.depth), failures)


def commuting_combination(
    h: AffineMap,
    g: AffineMap,
    normal_words,
    tol: float = 1e-8,
) -> AffineMap | None:
    """Convex combination h'' of normal words with h.g = g.h'', or None.

    Works at the level of convex hulls rather than single words: flattening
    maps to vectors turns the search into hull membership of h.g among
    {g.w : w word}, solved by the same feasibility core as everything else.
    """
    words = list(normal_words)
    target = flatten_map(affine_compose(h, g))
    columns = np.array([flatten_map(affine_compose(g, w)) for w in words])
    deviation, weights = hull_fit(Polytope(columns), target)
    if deviation > tol:
        return None
    weights = weights / weights.sum()
    matrix = sum(wi * w.matrix for wi, w in zip(weights, words))
    offset = sum(wi * w.offset for wi, w in zip(weights, words))
    return AffineMap(matrix, offset)
