"""Structural computations on permutation groups: subgroup lattices, quotients,
Frattini and derived subgroups, isomorphisms and outer automorphism groups."""
import logging
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from sympy import factorint

from src.config import Limits, check_limit
from src.permcore import Perm, PermGroup, closure, conjugate_subgroup, coset_reps

logger = logging.getLogger(__name__)

MAX_GENERATORS = 3


def _canonical_key(K: PermGroup):
    return (K.order, K.elements)


class SubgroupLattice:
    """Every subgroup of an ambient group, grouped into conjugacy classes.

    Subgroups are sorted by order, then by their sorted element lists.
    """

    def __init__(self, ambient: PermGroup, subgroups: Sequence[PermGroup],
                 classes: Sequence[Tuple[int, Tuple[int, ...]]]):
        self.ambient = ambient
        self.all_subgroups: List[PermGroup] = list(subgroups)
        self.conjugacy_classes: List[Tuple[int, Tuple[int, ...]]] = list(classes)
        self._index: Dict[FrozenSet[Perm], int] = {K.key: i for i, K in enumerate(self.all_subgroups)}
        self._class_of: Dict[int, int] = {}
        for c, (_, members) in enumerate(self.conjugacy_classes):
            for i in members:
                self._class_of[i] = c
        self._maximal: Dict[int, List[PermGroup]] = {}

    def __len__(self) -> int:
        return len(self.all_subgroups)

    def __iter__(self):
        return iter(self.all_subgroups)

    def contains(self, K: PermGroup) -> bool:
        return K.degree == self.ambient.degree and K.element_set in self._index

    def index_of(self, K: PermGroup) -> int:
        if K.degree != self.ambient.degree or K.element_set not in self._index:
            raise ValueError(f"{K!r} is not a member of the subgroup lattice of {self.ambient!r}")
        return self._index[K.element_set]

    def member(self, K: PermGroup) -> PermGroup:
        """The lattice's own instance of K."""
        return self.all_subgroups[self.index_of(K)]

    def class_of(self, K: PermGroup) -> int:
        return self._class_of[self.index_of(K)]

    def class_representatives(self) -> List[PermGroup]:
        return [self.all_subgroups[rep] for rep, _ in self.conjugacy_classes]

    def class_members(self, c: int) -> List[PermGroup]:
        return [self.all_subgroups[i] for i in self.conjugacy_classes[c][1]]

    def subgroups_of(self, T: PermGroup) -> List[PermGroup]:
        keys = self.member(T).key
        return [K for K in self.all_subgroups
                if T.order % K.order == 0 and K.key <= keys]

    def maximal_subgroups(self, T: PermGroup) -> List[PermGroup]:
        i = self.index_of(T)
        if i not in self._maximal:
            proper = [K for K in self.subgroups_of(T) if K.order < T.order]
            proper.sort(key=lambda K: -K.order)
            kept: List[PermGroup] = []
            for K in proper:
                if not any(K.order < M.order and K.key <= M.key for M in kept):
                    kept.append(K)
            self._maximal[i] = kept
        return self._maximal[i]

    def is_normal(self, K: PermGroup) -> bool:
        c = self.class_of(K)
        return len(self.conjugacy_classes[c][1]) == 1


def _conjugacy_class(G: PermGroup, K: PermGroup) -> List[PermGroup]:
    """Orbit of K under conjugation by the generators of G."""
    seen = {K.key: K}
    queue = deque([K])
    while queue:
        L = queue.popleft()
        for g in G.generators:
            M = conjugate_subgroup(L, g)
            if M.key not in seen:
                seen[M.key] = M
                queue.append(M)
    return list(seen.values())


def subgroup_lattice(G: PermGroup, limit: int = Limits.LATTICE_LIMIT) -> SubgroupLattice:
    """Enumerate every subgroup of G.

    Only one representative per conjugacy class is extended: for each element g
    outside K, <K, g> is closed and deduplicated. Elements g' in K g^j K with j
    prime to the order of g give the same subgroup and are skipped.
    """
    check_limit('lattice', limit, G.order)
    G.require_elements()
    degree = G.degree
    trivial = PermGroup(degree, (), elements=[G.identity], cache_limit=G.cache_limit)
    known: Dict[FrozenSet[Perm], PermGroup] = {trivial.key: trivial}
    classes: List[List[PermGroup]] = [[trivial]]
    queue = deque([trivial])
    while queue:
        K = queue.popleft()
        covered = set(K.key)
        for g in G.elements:
            if g in covered:
                continue
            n = g.order()
            power = g
            for j in range(1, n):
                if gcd(j, n) == 1 and power not in covered:
                    covered |= _double_coset(power, K.generators)
                power = power * g
            gens = K.generators + (g,)
            members = closure(degree, gens)
            key = frozenset(members)
            if key in known:
                continue
            L = PermGroup(degree, gens, elements=members, cache_limit=G.cache_limit)
            orbit = _conjugacy_class(G, L)
            for M in orbit:
                known[M.key] = M
            classes.append(orbit)
            queue.append(min(orbit, key=_canonical_key))
    ordered = sorted(known.values(), key=_canonical_key)
    index = {K.key: i for i, K in enumerate(ordered)}
    class_rows = []
    for orbit in classes:
        members = tuple(sorted(index[M.key] for M in orbit))
        class_rows.append((members[0], members))
    class_rows.sort()
    logger.info(f"Subgroup lattice of order-{G.order} group: {len(ordered)} subgroups "
                f"in {len(class_rows)} conjugacy classes")
    return SubgroupLattice(G, ordered, class_rows)


def _double_coset(g: Perm, gens: Sequence[Perm]) -> set:
    orbit = {g}
    frontier = [g]
    while frontier:
        nxt = []
        for x in frontier:
            for k in gens:
                for y in (k * x, x * k):
                    if y not in orbit:
                        orbit.add(y)
                        nxt.append(y)
        frontier = nxt
    return orbit


def normal_subgroups(T: PermGroup, lattice: SubgroupLattice) -> List[PermGroup]:
    return [S for S in lattice.subgroups_of(T) if S.is_normal_in(T)]


@dataclass(frozen=True)
class QuotientGroup:
    """T/S acting on the left cosets of S in T. Coset 0 is S itself."""
    T: PermGroup
    S: PermGroup
    perm_rep: PermGroup
    representatives: Tuple[Perm, ...]
    coset_of: Dict[Perm, int] = field(repr=False)

    @property
    def order(self) -> int:
        return self.perm_rep.order

    def project(self, t: Perm) -> Perm:
        coset_of = self.coset_of
        return Perm._trusted(tuple(coset_of[t * r] for r in self.representatives))

    def lift(self, q: Perm) -> Perm:
        return self.representatives[q(0)]


def quotient(T: PermGroup, S: PermGroup) -> QuotientGroup:
    if not S.is_normal_in(T):
        raise ValueError(f"quotient: {S!r} is not a normal subgroup of {T!r}")
    reps = tuple(coset_reps(T, S))
    coset_of: Dict[Perm, int] = {}
    for i, r in enumerate(reps):
        for s in S.require_elements():
            coset_of[r * s] = i
    degree = len(reps)
    gens = [Perm._trusted(tuple(coset_of[t * r] for r in reps)) for t in T.generators]
    gens = [q for q in gens if not q.is_identity()]
    perm_rep = PermGroup(degree, gens, elements=closure(degree, gens), cache_limit=T.cache_limit)
    return QuotientGroup(T=T, S=S, perm_rep=perm_rep, representatives=reps, coset_of=coset_of)


def frattini(T: PermGroup, lattice: SubgroupLattice) -> PermGroup:
    """Intersection of the maximal subgroups of T."""
    T = lattice.member(T)
    if T.is_trivial():
        return T
    common = None
    for M in lattice.maximal_subgroups(T):
        common = M.key if common is None else common & M.key
    return lattice.all_subgroups[lattice._index[frozenset(common)]]


def derived_subgroup(G: PermGroup) -> PermGroup:
    """Normal closure of the commutators of generator pairs."""
    gens = []
    for a in G.generators:
        for b in G.generators:
            c = a * b * a.inverse() * b.inverse()
            if not c.is_identity():
                gens.append(c)
    members = closure(G.degree, gens)
    changed = True
    while changed:
        changed = False
        for g in G.generators:
            for c in list(gens):
                x = c.conjugated_by(g)
                if x not in members:
                    gens.append(x)
                    members = closure(G.degree, gens)
                    changed = True
    return PermGroup.from_elements(G.degree, members, cache_limit=G.cache_limit)


def is_abelian(G: PermGroup) -> bool:
    return G.is_abelian()


def element_order_census(G: PermGroup) -> Dict[int, int]:
    return dict(G.order_census())


class GroupIso:
    """A homomorphism ``source -> target`` given by a full element mapping."""

    def __init__(self, source: PermGroup, target: PermGroup, mapping: Dict[Perm, Perm]):
        self.source = source
        self.target = target
        self.mapping = mapping
        self.gen_images = tuple(mapping[g] for g in source.generators)

    @classmethod
    def extend(cls, source: PermGroup, target: PermGroup,
               generators: Sequence[Perm], images: Sequence[Perm]) -> Optional["GroupIso"]:
        """Extend generators -> images to an isomorphism, or return None.

        Walks the Cayley graph of ``source`` and checks f(x s) = f(x) f(s) on
        every edge, then injectivity.
        """
        identity = source.identity
        mapping = {identity: target.identity}
        frontier = [identity]
        pairs = list(zip(generators, images))
        while frontier:
            nxt = []
            for x in frontier:
                fx = mapping[x]
                for s, t in pairs:
                    y = x * s
                    fy = fx * t
                    seen = mapping.get(y)
                    if seen is None:
                        mapping[y] = fy
                        nxt.append(y)
                    elif seen != fy:
                        return None
            frontier = nxt
        if len(mapping) != source.order or source.order != target.order:
            return None
        if len(set(mapping.values())) != len(mapping):
            return None
        return cls(source, target, mapping)

    def __call__(self, x: Perm) -> Perm:
        return self.mapping[x]

    def inverse(self) -> "GroupIso":
        return GroupIso(self.target, self.source, {y: x for x, y in self.mapping.items()})

    def compose(self, other: "GroupIso") -> "GroupIso":
        """self after other."""
        return GroupIso(other.source, self.target, {x: self.mapping[y] for x, y in other.mapping.items()})

    def __repr__(self) -> str:
        images = ", ".join(str(y) for y in self.gen_images)
        return f"GroupIso(order={self.source.order}, generator images=[{images}])"


def small_generating_set(G: PermGroup) -> List[Perm]:
    """Greedy generating set: repeatedly take the element of largest order
    (smallest first on ties) not yet generated."""
    if G.is_trivial():
        return []
    candidates = sorted(G.require_elements(), key=lambda x: (-x.order(), x.images))
    gens: List[Perm] = []
    generated = {G.identity}
    while len(generated) < G.order:
        x = next(c for c in candidates if c not in generated)
        gens.append(x)
        if len(gens) > MAX_GENERATORS:
            raise RuntimeError(f"{G!r} is not generated greedily by {MAX_GENERATORS} elements")
        generated = closure(G.degree, gens)
    return gens


def _iter_isomorphisms(A: PermGroup, B: PermGroup, gens: Sequence[Perm]) -> Iterator[Tuple[Perm, ...]]:
    """All generator image tuples extending to isomorphisms A -> B, in canonical order."""
    candidates = [[y for y in B.elements if y.order() == g.order()] for g in gens]
    product_orders = {(i, j): (gens[i] * gens[j]).order() for i in range(len(gens)) for j in range(i)}
    chosen: List[Perm] = []

    def search(depth: int):
        if depth == len(gens):
            if GroupIso.extend(A, B, gens, chosen) is not None:
                yield tuple(chosen)
            return
        for y in candidates[depth]:
            if any((y * chosen[j]).order() != product_orders[(depth, j)] for j in range(depth)):
                continue
            chosen.append(y)
            yield from search(depth + 1)
            chosen.pop()

    yield from search(0)


def _invariants_match(A: PermGroup, B: PermGroup) -> bool:
    if A.order != B.order:
        return False
    if A.order_census() != B.order_census():
        return False
    if A.is_abelian() != B.is_abelian():
        return False
    return derived_subgroup(A).order == derived_subgroup(B).order


def find_isomorphism(A: PermGroup, B: PermGroup, limit: int = Limits.ISO_LIMIT) -> Optional[GroupIso]:
    check_limit('isomorphism', limit, A.order)
    check_limit('isomorphism', limit, B.order)
    if not _invariants_match(A, B):
        return None
    if A.is_trivial():
        return GroupIso(A, B, {A.identity: B.identity})
    gens = small_generating_set(A)
    for images in _iter_isomorphisms(A, B, gens):
        logger.debug(f"Isomorphism of order-{A.order} groups found: {[str(y) for y in images]}")
        return GroupIso.extend(A, B, gens, images)
    return None


@dataclass
class OutGroup:
    """Out(H), one class per Inn(H)-coset of Aut(H).

    Automorphisms are keyed by their images of ``generators``; class 0 holds
    the identity and the remaining classes are ordered by their smallest key.
    """
    base: PermGroup
    generators: Tuple[Perm, ...]
    inn_index_map: Dict[Tuple[Perm, ...], int]
    out_reps: Tuple[Tuple[Perm, ...], ...]
    rep_isos: Tuple[GroupIso, ...]
    mult_table: Tuple[Tuple[int, ...], ...]
    aut_order: int
    inner_order: int

    @property
    def out_order(self) -> int:
        return len(self.out_reps)

    @property
    def aut_gens(self) -> Tuple[GroupIso, ...]:
        return self.rep_isos

    def rep_automorphism(self, i: int) -> GroupIso:
        return self.rep_isos[i]

    def index_of_images(self, images: Sequence[Perm]) -> int:
        key = tuple(images)
        if key not in self.inn_index_map:
            raise ValueError("Generator images do not define an automorphism of the base group")
        return self.inn_index_map[key]

    def multiply(self, a: int, b: int) -> int:
        return self.mult_table[a][b]

    def inverse(self, a: int) -> int:
        return self.mult_table[a].index(0)

    def conjugate(self, a: int, by: int) -> int:
        """by * a * by^-1."""
        return self.mult_table[self.mult_table[by][a]][self.inverse(by)]

    def same_enumeration(self, other: "OutGroup") -> bool:
        """True when class indices of ``other`` name the same automorphisms."""
        if other is self:
            return True
        return (other.base.key == self.base.key and other.generators == self.generators
                and other.out_reps == self.out_reps and other.mult_table == self.mult_table)


def out_group(H: PermGroup, limit: int = Limits.ISO_LIMIT) -> OutGroup:
    check_limit('isomorphism', limit, H.order)
    elements = H.require_elements()
    gens = tuple(small_generating_set(H))
    if not gens:
        identity = GroupIso(H, H, {H.identity: H.identity})
        return OutGroup(base=H, generators=(), inn_index_map={(): 0}, out_reps=((),),
                        rep_isos=(identity,), mult_table=((0,),), aut_order=1, inner_order=1)

    automorphisms = list(_iter_isomorphisms(H, H, gens))
    inverses = {c: c.inverse() for c in elements}
    class_of: Dict[Tuple[Perm, ...], int] = {}
    smallest: List[Tuple[Perm, ...]] = []
    for images in automorphisms:
        if images in class_of:
            continue
        coset = {tuple(c * y * inverses[c] for y in images) for c in elements}
        for key in coset:
            class_of[key] = len(smallest)
        smallest.append(min(coset))

    identity_class = class_of[gens]
    others = sorted((c for c in range(len(smallest)) if c != identity_class), key=lambda c: smallest[c])
    relabel = {old: new for new, old in enumerate([identity_class] + others)}
    inn_index_map = {key: relabel[c] for key, c in class_of.items()}
    out_reps = (gens,) + tuple(smallest[c] for c in others)

    rep_isos = tuple(GroupIso.extend(H, H, gens, images) for images in out_reps)
    mult_table = tuple(
        tuple(inn_index_map[tuple(a(y) for y in b_images)] for b_images in out_reps)
        for a in rep_isos
    )
    out = OutGroup(base=H, generators=gens, inn_index_map=inn_index_map, out_reps=out_reps,
                   rep_isos=rep_isos, mult_table=mult_table, aut_order=len(automorphisms),
                   inner_order=H.order // _center_order(H))
    logger.info(f"Out of order-{H.order} group: |Aut| = {out.aut_order}, |Out| = {out.out_order}")
    return out


def _center_order(H: PermGroup) -> int:
    return sum(1 for z in H.require_elements() if all(z * g == g * z for g in H.generators))


def outer_class(out: OutGroup, phi: GroupIso) -> int:
    if phi.source.degree != out.base.degree or phi.source.order != out.base.order:
        raise ValueError("outer_class: map is not an endomorphism of the base group")
    return out.index_of_images(tuple(phi(g) for g in out.generators))


def sectional_rank(G: PermGroup, lattice: SubgroupLattice) -> int:
    """Largest rank of an elementary abelian section of a p-group."""
    if G.is_trivial():
        return 0
    primes = factorint(G.order)
    if len(primes) != 1:
        raise ValueError(f"sectional_rank: group of order {G.order} is not a p-group")
    p = next(iter(primes))
    best = 0
    for T in lattice.subgroups_of(G):
        index = T.order // frattini(T, lattice).order
        best = max(best, factorint(index).get(p, 0))
    return best
