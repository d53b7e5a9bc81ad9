"""Exact permutation-group arithmetic.

Permutations act on the points 0..degree-1 and compose right to left:
``(p * q)(i) == p(q(i))``. Groups of moderate size cache their sorted element
list; order and membership otherwise go through a stabilizer chain.
"""
import logging
import re
from collections import Counter
from dataclasses import dataclass
from math import lcm, prod
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from sympy.combinatorics import Permutation as SymPermutation
from sympy.combinatorics import PermutationGroup as SymPermutationGroup
from sympy.combinatorics.util import _distribute_gens_by_base, _orbits_transversals_from_bsgs, _strip

from src.config import Limits, LimitExceededError

logger = logging.getLogger(__name__)

_CYCLE_TEXT = re.compile(r"^(\([^()]*\))*$")
_CYCLE = re.compile(r"\(([^()]*)\)")


class Perm:
    """A permutation of {0, ..., degree-1} stored as its image tuple."""

    __slots__ = ('images', '_hash')

    def __init__(self, images: Sequence[int]):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"Not a permutation of 0..{len(images) - 1}: {images}")
        self.images = images
        self._hash = hash(images)

    @classmethod
    def _trusted(cls, images: Tuple[int, ...]) -> "Perm":
        perm = object.__new__(cls)
        perm.images = images
        perm._hash = hash(images)
        return perm

    @classmethod
    def identity(cls, degree: int) -> "Perm":
        return cls._trusted(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, text: str, degree: Optional[int] = None) -> "Perm":
        """Parse 1-based cycle notation such as "(1 2 3)(4 5)"; "()" is the identity.

        Cycles are composed right to left, so disjoint cycles may come in any order.
        """
        compact = re.sub(r"\s+", " ", text.strip())
        if not _CYCLE_TEXT.match(compact.replace(" ", "")):
            raise ValueError(f"Invalid cycle notation: {text!r}")
        cycles = []
        for body in _CYCLE.findall(compact):
            tokens = [tok for tok in re.split(r"[\s,]+", body.strip()) if tok]
            try:
                points = [int(tok) for tok in tokens]
            except ValueError:
                raise ValueError(f"Invalid point in cycle ({body}) of {text!r}")
            if any(p < 1 for p in points):
                raise ValueError(f"Cycle points are 1-based, got ({body})")
            if len(set(points)) != len(points):
                raise ValueError(f"Repeated point in cycle ({body})")
            cycles.append([p - 1 for p in points])
        largest = max((p + 1 for cycle in cycles for p in cycle), default=0)
        if degree is None:
            degree = max(largest, 1)
        elif largest > degree:
            raise ValueError(f"Cycle notation {text!r} moves point {largest} beyond degree {degree}")
        result = cls.identity(degree)
        for cycle in reversed(cycles):
            images = list(range(degree))
            for i, point in enumerate(cycle):
                images[point] = cycle[(i + 1) % len(cycle)]
            result = cls._trusted(tuple(images)) * result
        return result

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, point: int) -> int:
        return self.images[point]

    def __mul__(self, other: "Perm") -> "Perm":
        mine = self.images
        return Perm._trusted(tuple([mine[i] for i in other.images]))

    def inverse(self) -> "Perm":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Perm._trusted(tuple(inv))

    def conjugated_by(self, g: "Perm") -> "Perm":
        """Return g * self * g^-1."""
        return g * self * g.inverse()

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self) -> List[Tuple[int, ...]]:
        seen = set()
        result = []
        for start in range(len(self.images)):
            if start in seen or self.images[start] == start:
                continue
            cycle = [start]
            seen.add(start)
            nxt = self.images[start]
            while nxt != start:
                cycle.append(nxt)
                seen.add(nxt)
                nxt = self.images[nxt]
            result.append(tuple(cycle))
        return result

    def order(self) -> int:
        return lcm(*(len(c) for c in self.cycles())) if not self.is_identity() else 1

    def moved_points(self) -> List[int]:
        return [i for i, j in enumerate(self.images) if i != j]

    def __eq__(self, other) -> bool:
        return isinstance(other, Perm) and self.images == other.images

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Perm") -> bool:
        return self.images < other.images

    def __le__(self, other: "Perm") -> bool:
        return self.images <= other.images

    def __gt__(self, other: "Perm") -> bool:
        return self.images > other.images

    def __ge__(self, other: "Perm") -> bool:
        return self.images >= other.images

    def __str__(self) -> str:
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + " ".join(str(p + 1) for p in c) + ")" for c in cycles)

    def __repr__(self) -> str:
        return f"Perm({str(self)}, degree={self.degree})"


def closure(degree: int, generators: Iterable[Perm], limit: Optional[int] = None) -> Set[Perm]:
    """Enumerate the group generated by ``generators`` by breadth-first products."""
    gens = [g for g in generators if not g.is_identity()]
    identity = Perm.identity(degree)
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = x * s
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if limit is not None and len(seen) > limit:
            raise LimitExceededError('element cache', limit, len(seen))
        frontier = nxt
    return seen


@dataclass(frozen=True)
class StabilizerChain:
    """Base, basic orbits and transversals of a permutation group."""
    base: Tuple[int, ...]
    orbits: Tuple[Tuple[int, ...], ...]
    transversals: Tuple[dict, ...]
    strong_generators: Tuple[SymPermutation, ...]

    @property
    def order(self) -> int:
        return prod(len(orbit) for orbit in self.orbits)

    def sift(self, p: Perm) -> bool:
        if not self.base:
            return p.is_identity()
        residue, level = _strip(SymPermutation(list(p.images)), list(self.base),
                                [list(o) for o in self.orbits], list(self.transversals))
        return level == len(self.base) + 1 and residue.is_Identity


def build_chain(degree: int, generators: Sequence[Perm]) -> StabilizerChain:
    """Schreier-Sims with the base seeded by the moved points in increasing order."""
    moving = [g for g in generators if not g.is_identity()]
    if not moving:
        return StabilizerChain(base=(), orbits=(), transversals=(), strong_generators=())
    seed = sorted({i for g in moving for i in g.moved_points()})
    group = SymPermutationGroup([SymPermutation(list(g.images)) for g in moving])
    base, strong = group.schreier_sims_incremental(base=seed)
    distributed = _distribute_gens_by_base(base, strong)
    orbits, transversals = _orbits_transversals_from_bsgs(base, distributed)
    return StabilizerChain(
        base=tuple(base),
        orbits=tuple(tuple(o) for o in orbits),
        transversals=tuple(transversals),
        strong_generators=tuple(strong),
    )


class PermGroup:
    """A permutation group given by generators, with optional cached elements."""

    def __init__(self, degree: int, generators: Iterable[Perm] = (), *,
                 elements: Optional[Iterable[Perm]] = None,
                 cache_limit: int = Limits.ELEMENT_CACHE_LIMIT):
        gens = tuple(generators)
        for g in gens:
            if g.degree != degree:
                raise ValueError(f"Degree mismatch: generator {g} has degree {g.degree}, expected {degree}")
        self.degree = degree
        self.generators = gens
        self.cache_limit = cache_limit
        self._chain: Optional[StabilizerChain] = None
        self._elements: Optional[Tuple[Perm, ...]] = None
        self._element_set: Optional[FrozenSet[Perm]] = None
        self._order: Optional[int] = None
        self._census: Optional[Counter] = None
        if elements is not None:
            self._set_elements(elements)

    def _set_elements(self, elements: Iterable[Perm]) -> None:
        self._element_set = frozenset(elements)
        self._elements = tuple(sorted(self._element_set))
        self._order = len(self._elements)

    @classmethod
    def from_elements(cls, degree: int, elements: Iterable[Perm],
                      cache_limit: int = Limits.ELEMENT_CACHE_LIMIT) -> "PermGroup":
        """Build a group from a closed element set, choosing generators greedily
        (smallest element not yet generated)."""
        members = sorted(set(elements))
        gens: List[Perm] = []
        generated = {Perm.identity(degree)}
        for x in members:
            if x not in generated:
                gens.append(x)
                generated = closure(degree, gens)
                if len(generated) == len(members):
                    break
        if len(generated) != len(members):
            raise ValueError("Element set is not closed under multiplication")
        return cls(degree, gens, elements=members, cache_limit=cache_limit)

    @property
    def chain(self) -> StabilizerChain:
        if self._chain is None:
            self._chain = build_chain(self.degree, self.generators)
        return self._chain

    @property
    def order(self) -> int:
        if self._order is None:
            self._order = self.chain.order
        return self._order

    @property
    def elements(self) -> Optional[Tuple[Perm, ...]]:
        if self._elements is None and self.order <= self.cache_limit:
            self._set_elements(closure(self.degree, self.generators))
        return self._elements

    @property
    def element_set(self) -> Optional[FrozenSet[Perm]]:
        if self.elements is None:
            return None
        return self._element_set

    @property
    def key(self) -> FrozenSet[Perm]:
        return self.require_elements()

    def require_elements(self) -> FrozenSet[Perm]:
        members = self.element_set
        if members is None:
            raise LimitExceededError('element cache', self.cache_limit, self.order)
        return members

    @property
    def identity(self) -> Perm:
        return Perm.identity(self.degree)

    def contains(self, p: Perm) -> bool:
        if p.degree != self.degree:
            raise ValueError(f"Degree mismatch: {p} has degree {p.degree}, group has degree {self.degree}")
        members = self.element_set
        if members is not None:
            return p in members
        return self.chain.sift(p)

    def __contains__(self, p: Perm) -> bool:
        return self.contains(p)

    def __iter__(self):
        return iter(self.elements or ())

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return self.degree == other.degree and all(other.contains(g) for g in self.generators)

    def is_normal_in(self, other: "PermGroup") -> bool:
        if not self.is_subgroup_of(other):
            return False
        return all(s.conjugated_by(g) in self for g in other.generators for s in self.generators)

    def is_abelian(self) -> bool:
        gens = self.generators
        return all(a * b == b * a for i, a in enumerate(gens) for b in gens[i + 1:])

    def order_census(self) -> Counter:
        """Multiset of element orders."""
        if self._census is None:
            self._census = Counter(x.order() for x in self.require_elements())
        return self._census

    def exponent(self) -> int:
        return lcm(*self.order_census().keys())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PermGroup):
            return NotImplemented
        if self.degree != other.degree or self.order != other.order:
            return False
        if self._element_set is not None and other._element_set is not None:
            return self._element_set == other._element_set
        return all(self.contains(g) for g in other.generators)

    def __hash__(self) -> int:
        return hash((self.degree, self.order))

    def __repr__(self) -> str:
        return f"PermGroup(degree={self.degree}, order={self.order})"


@dataclass(frozen=True)
class CosetDecomposition:
    """Representatives (canonically smallest) and sizes of a coset partition."""
    representatives: Tuple[Perm, ...]
    sizes: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.representatives)


def build_group(degree: int, generators: Sequence[Perm],
                cache_limit: int = Limits.ELEMENT_CACHE_LIMIT) -> PermGroup:
    group = PermGroup(degree, generators, cache_limit=cache_limit)
    chain = group.chain
    for g in group.generators:
        if not chain.sift(g):
            raise RuntimeError(f"Stabilizer chain rejects its own generator {g}")
    logger.debug(f"Built group of degree {degree} and order {group.order} with base {chain.base}")
    return group


def contains(G: PermGroup, p: Perm) -> bool:
    return G.contains(p)


def _require_subgroup(T: PermGroup, G: PermGroup, what: str) -> None:
    if T.degree != G.degree:
        raise ValueError(f"{what}: degree mismatch ({T.degree} vs {G.degree})")
    if not T.is_subgroup_of(G):
        raise ValueError(f"{what}: {T!r} is not a subgroup of {G!r}")


def normalizer(G: PermGroup, T: PermGroup) -> PermGroup:
    _require_subgroup(T, G, "normalizer")
    if T == G:
        return G
    members = []
    for g in G.require_elements():
        g_inv = g.inverse()
        if all((g * t * g_inv) in T for t in T.generators):
            members.append(g)
    return PermGroup.from_elements(G.degree, members, cache_limit=G.cache_limit)


def centralizer(G: PermGroup, X: PermGroup) -> PermGroup:
    _require_subgroup(X, G, "centralizer")
    members = [g for g in G.require_elements() if all(g * x == x * g for x in X.generators)]
    return PermGroup.from_elements(G.degree, members, cache_limit=G.cache_limit)


def intersection(A: PermGroup, B: PermGroup) -> PermGroup:
    if A.degree != B.degree:
        raise ValueError(f"intersection: degree mismatch ({A.degree} vs {B.degree})")
    if A.order <= B.order:
        members = [a for a in A.require_elements() if B.contains(a)]
    else:
        members = [b for b in B.require_elements() if A.contains(b)]
    return PermGroup.from_elements(A.degree, members, cache_limit=A.cache_limit)


def product_order(A: PermGroup, B: PermGroup) -> int:
    """Size of the set product AB."""
    common = sum(1 for a in A.require_elements() if B.contains(a))
    return A.order * B.order // common


def _sorted_elements(G: PermGroup) -> Tuple[Perm, ...]:
    G.require_elements()
    return G.elements


def _two_sided_orbit(seed: Perm, left: Sequence[Perm], right: Sequence[Perm]) -> Set[Perm]:
    orbit = {seed}
    frontier = [seed]
    while frontier:
        nxt = []
        for x in frontier:
            for b in left:
                y = b * x
                if y not in orbit:
                    orbit.add(y)
                    nxt.append(y)
            for t in right:
                y = x * t
                if y not in orbit:
                    orbit.add(y)
                    nxt.append(y)
        frontier = nxt
    return orbit


def double_coset_reps(G: PermGroup, B: PermGroup, T: PermGroup) -> CosetDecomposition:
    """One representative per double coset BgT, the smallest element of each."""
    _require_subgroup(B, G, "double_coset_reps")
    _require_subgroup(T, G, "double_coset_reps")
    covered: Set[Perm] = set()
    reps, sizes = [], []
    for g in _sorted_elements(G):
        if g in covered:
            continue
        block = _two_sided_orbit(g, B.generators, T.generators)
        covered |= block
        reps.append(g)
        sizes.append(len(block))
    return CosetDecomposition(representatives=tuple(reps), sizes=tuple(sizes))


def coset_reps(G: PermGroup, T: PermGroup) -> List[Perm]:
    """Smallest representative of each left coset gT."""
    _require_subgroup(T, G, "coset_reps")
    covered: Set[Perm] = set()
    reps = []
    for g in _sorted_elements(G):
        if g in covered:
            continue
        covered |= _two_sided_orbit(g, (), T.generators)
        reps.append(g)
    return reps


def conjugate_subgroup(T: PermGroup, g: Perm) -> PermGroup:
    """The subgroup g T g^-1."""
    if g.degree != T.degree:
        raise ValueError(f"conjugate_subgroup: degree mismatch ({g.degree} vs {T.degree})")
    g_inv = g.inverse()
    gens = [g * t * g_inv for t in T.generators]
    members = T.element_set
    if members is None:
        return PermGroup(T.degree, gens, cache_limit=T.cache_limit)
    return PermGroup(T.degree, gens, elements=[g * t * g_inv for t in members], cache_limit=T.cache_limit)


def element_index(elements: Sequence[Perm]) -> Dict[Perm, int]:
    return {x: i for i, x in enumerate(elements)}
