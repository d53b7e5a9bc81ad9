"""Sections (T, S) of an ambient group: orbits under conjugation, the order
relation between sections, linking, minimality and the normalizer action on
the subquotient T/S."""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from src.config import Limits
from src.permcore import (Perm, PermGroup, conjugate_subgroup, coset_reps, double_coset_reps,
                          normalizer, product_order)
from src.structure import (GroupIso, OutGroup, QuotientGroup, SubgroupLattice, find_isomorphism,
                           frattini, normal_subgroups, quotient)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Section:
    T: PermGroup
    S: PermGroup
    quotient: QuotientGroup = field(repr=False, compare=False)

    @property
    def key(self):
        return (self.T.key, self.S.key)

    def __eq__(self, other) -> bool:
        return isinstance(other, Section) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def describe(self) -> str:
        return f"({self.T.order}, {self.S.order})"


@dataclass
class SectionOrbit:
    """One conjugacy class of sections with subquotient isomorphic to H."""
    rep: Section
    sigma: GroupIso
    orbit_size: int
    minimal: bool
    normalizer: PermGroup
    nbar_reps: List[Perm]
    gamma: List[Tuple[Perm, int]]

    @property
    def gamma_indices(self) -> List[int]:
        return [index for _, index in self.gamma]

    @property
    def gamma_image(self) -> List[int]:
        """Gamma as a subgroup of Out(H), as sorted class indices."""
        return sorted(set(self.gamma_indices))


@dataclass(frozen=True)
class Linking:
    """Linking of ``target`` = (B, A) with ``source`` = (T, S); ``induced_iso``
    maps T/S to B/A by xS -> xA for x in B n T."""
    target: Section
    source: Section
    induced_iso: GroupIso


def make_section(T: PermGroup, S: PermGroup) -> Section:
    return Section(T=T, S=S, quotient=quotient(T, S))


def conjugate_section(sec: Section, g: Perm) -> Section:
    return make_section(conjugate_subgroup(sec.T, g), conjugate_subgroup(sec.S, g))


def preceq(a: Section, b: Section) -> bool:
    """(V, U) below (T, S): V <= T, V S = T and V n S = U."""
    if not a.T.key <= b.T.key:
        return False
    if product_order(a.T, b.S) != b.T.order:
        return False
    return (a.T.key & b.S.key) == a.S.key


def linking_conditions(B: PermGroup, A: PermGroup, T: PermGroup, S: PermGroup) -> bool:
    """|B/A| = |T/S|, S (B n T) = T and A n T <= S."""
    if B.order * S.order != T.order * A.order:
        return False
    common = B.key & T.key
    # S (B n T) is a subgroup of T since S is normal in T
    if S.order * len(common) != T.order * len(S.require_elements() & common):
        return False
    return (A.key & T.key) <= S.key


def linked(a: Section, b: Section) -> Optional[Linking]:
    if not linking_conditions(a.T, a.S, b.T, b.S):
        return None
    mapping = {}
    for x in a.T.key & b.T.key:
        q = b.quotient.project(x)
        image = a.quotient.project(x)
        seen = mapping.get(q)
        if seen is None:
            mapping[q] = image
        elif seen != image:
            logger.debug(f"Linking of {a.describe()} and {b.describe()} is not well defined")
            return None
    return Linking(target=a, source=b,
                   induced_iso=GroupIso(b.quotient.perm_rep, a.quotient.perm_rep, mapping))


def is_minimal(sec: Section, lattice: SubgroupLattice) -> bool:
    return sec.S.key <= frattini(sec.T, lattice).key


def section_normalizer(G: PermGroup, sec: Section) -> PermGroup:
    return normalizer(normalizer(G, sec.T), sec.S)


def induced_automorphism(sec: Section, sigma: GroupIso, g: Perm, out: OutGroup) -> int:
    """Out class of h -> sigma^-1(g lift(sigma(h)) g^-1 S)."""
    back = sigma.inverse()
    g_inv = g.inverse()
    images = []
    for h in out.generators:
        t = sec.quotient.lift(sigma(h))
        images.append(back(sec.quotient.project(g * t * g_inv)))
    return out.index_of_images(images)


def gamma_map(G: PermGroup, sec: Section, sigma: GroupIso, out: OutGroup,
              normalizer_group: Optional[PermGroup] = None) -> List[Tuple[Perm, int]]:
    N = normalizer_group if normalizer_group is not None else section_normalizer(G, sec)
    return [(g, induced_automorphism(sec, sigma, g, out)) for g in coset_reps(N, sec.T)]


def _normal_orbit(N: PermGroup, S: PermGroup) -> set:
    keys = {S.key}
    frontier = [S]
    while frontier:
        nxt = []
        for K in frontier:
            for g in N.generators:
                L = conjugate_subgroup(K, g)
                if L.key not in keys:
                    keys.add(L.key)
                    nxt.append(L)
        frontier = nxt
    return keys


def _candidate_kernels(T: PermGroup, H: PermGroup, lattice: SubgroupLattice) -> List[PermGroup]:
    target = T.order // H.order
    return [S for S in lattice.subgroups_of(T) if S.order == target and S.is_normal_in(T)]


def enumerate_section_orbits(G: PermGroup, H: PermGroup, lattice: SubgroupLattice, out: OutGroup,
                             iso_limit: int = Limits.ISO_LIMIT) -> List[SectionOrbit]:
    orbits: List[SectionOrbit] = []
    for T in lattice.class_representatives():
        if T.order % H.order:
            continue
        N_T = normalizer(G, T)
        seen = set()
        for S in _candidate_kernels(T, H, lattice):
            if S.key in seen:
                continue
            seen |= _normal_orbit(N_T, S)
            sec = make_section(T, S)
            sigma = find_isomorphism(H, sec.quotient.perm_rep, iso_limit)
            if sigma is None:
                continue
            N = normalizer(N_T, S)
            orbits.append(SectionOrbit(
                rep=sec,
                sigma=sigma,
                orbit_size=G.order // N.order,
                minimal=is_minimal(sec, lattice),
                normalizer=N,
                nbar_reps=coset_reps(N, T),
                gamma=gamma_map(G, sec, sigma, out, N),
            ))
    orbits.sort(key=lambda o: (lattice.index_of(o.rep.T), lattice.index_of(o.rep.S)))
    logger.info(f"Found {len(orbits)} section orbits with subquotient of order {H.order} "
                f"in group of order {G.order}")
    return orbits


def count_sections(G: PermGroup, H: PermGroup, lattice: SubgroupLattice,
                   iso_limit: int = Limits.ISO_LIMIT) -> int:
    """Number of sections (T, S) of G with T/S isomorphic to H."""
    total = 0
    for T in lattice:
        if T.order % H.order:
            continue
        for S in _candidate_kernels(T, H, lattice):
            if find_isomorphism(H, quotient(T, S).perm_rep, iso_limit) is not None:
                total += 1
    return total


def is_expansive(G: PermGroup, S: PermGroup, lattice: SubgroupLattice) -> bool:
    """For each g outside N = N_G(S), some normal subgroup M of N satisfies
    S < M <= S (gSg^-1 n N)."""
    N = normalizer(G, S)
    if N.order == G.order:
        return True
    above = [M for M in normal_subgroups(N, lattice) if S.key < M.key]
    S_members = S.require_elements()
    for g in double_coset_reps(G, N, N).representatives:
        if N.contains(g):
            continue
        inside = conjugate_subgroup(S, g).require_elements() & N.require_elements()
        product = {s * x for s in S_members for x in inside}
        if not any(M.key <= product for M in above):
            logger.debug(f"Subgroup of order {S.order} fails expansivity at {g}")
            return False
    return True


def subquotient_types(G: PermGroup, lattice: SubgroupLattice,
                      iso_limit: int = Limits.ISO_LIMIT) -> List[PermGroup]:
    """One group per isomorphism type of subquotient T/S of G, by increasing order."""
    types: List[PermGroup] = []
    for T in lattice.class_representatives():
        if T.order > iso_limit:
            continue
        for S in normal_subgroups(T, lattice):
            Q = quotient(T, S).perm_rep
            if not any(P.order == Q.order and find_isomorphism(P, Q, iso_limit) is not None for P in types):
                types.append(Q)
    types.sort(key=lambda P: P.order)
    return types
