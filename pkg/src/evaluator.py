"""Dimension and vanishing of S_{H,V}(G).

The dimension is the rank of the block matrix whose (i, j) block is the action
on V of the pairing element between section orbits i and j. When every section
is minimal the closed formula (a sum of relative trace ranks) gives the same
number more cheaply.
"""
import logging
from dataclasses import dataclass
from math import gcd
from typing import Dict, List, Optional, Tuple

from sympy import factorint

from src.config import Config
from src.exactlin import FormalSum, KModule, Matrix, act, rank, trace_image_dim
from src.permcore import PermGroup, centralizer, conjugate_subgroup, double_coset_reps, normalizer
from src.schemas import CertificateModel, EvaluationReport, OrbitTrace
from src.sections import (SectionOrbit, conjugate_section, enumerate_section_orbits, is_expansive,
                          linked, linking_conditions)
from src.structure import (OutGroup, SubgroupLattice, derived_subgroup, find_isomorphism, out_group,
                           quotient, sectional_rank, subgroup_lattice)

logger = logging.getLogger(__name__)

NONVANISHING = ('a', 'b', 'c', 'd', 'e', 'f', 'g')


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


@dataclass
class PairingMatrix:
    orbits: List[SectionOrbit]
    blocks: List[List[Matrix]]
    assembled: Matrix

    def all_blocks_zero(self) -> bool:
        return all(block.is_zero() for row in self.blocks for block in row)


def _prime_of(order: int) -> Optional[int]:
    primes = factorint(order)
    return next(iter(primes)) if len(primes) == 1 else None


class Evaluator:
    """Holds G, H, the subgroup lattice of G, Out(H) and the section orbits,
    so one enumeration serves every computation on the pair."""

    def __init__(self, G: PermGroup, H: PermGroup, config: Optional[Config] = None,
                 lattice: Optional[SubgroupLattice] = None, out: Optional[OutGroup] = None,
                 group_name: str = 'G', subquotient_name: str = 'H'):
        self.config = config or Config()
        self.G = G
        self.H = H
        self.group_name = group_name
        self.subquotient_name = subquotient_name
        try:
            self.lattice = lattice if lattice is not None else subgroup_lattice(G, self.config.lattice_limit)
            self.out = out if out is not None else out_group(H, self.config.iso_limit)
            self.orbits = enumerate_section_orbits(G, H, self.lattice, self.out, self.config.iso_limit)
        except Exception as e:
            logger.error(f"Failed to prepare evaluation of {subquotient_name} in {group_name}: {str(e)}",
                         exc_info=True)
            raise
        self._pairings: Dict[Tuple[int, int], FormalSum] = {}

    def pairing_element(self, i: int, j: int) -> FormalSum:
        if (i, j) not in self._pairings:
            u = pairing_element(self.G, self.orbits[i], self.orbits[j], self.out)
            logger.debug(f"Pairing element ({i}, {j}) = {u}")
            self._pairings[(i, j)] = u
        return self._pairings[(i, j)]

    def pairing_matrix(self, module: KModule) -> PairingMatrix:
        m = len(self.orbits)
        blocks = [[act(module, self.pairing_element(i, j)) for j in range(m)] for i in range(m)]
        if blocks:
            assembled = Matrix.blocks(module.field, blocks)
        else:
            assembled = Matrix.zero(module.field, 0, 0)
        return PairingMatrix(orbits=self.orbits, blocks=blocks, assembled=assembled)

    def evaluation_dim(self, module: KModule) -> int:
        self._check_module(module)
        pairing = self.pairing_matrix(module)
        dim = rank(pairing.assembled)
        if (dim == 0) != pairing.all_blocks_zero():
            raise ConsistencyError(f"Rank {dim} disagrees with the block-zero test")
        return dim

    def orbit_traces(self, module: KModule) -> List[OrbitTrace]:
        return [
            OrbitTrace(orbit=i, t_order=o.rep.T.order, s_order=o.rep.S.order, minimal=o.minimal,
                       trace_dim=trace_image_dim(module, o.gamma_indices))
            for i, o in enumerate(self.orbits)
        ]

    def closed_formula_dim(self, module: KModule) -> Optional[int]:
        """Sum of relative trace ranks, defined only when every section is minimal."""
        if not all(o.minimal for o in self.orbits):
            return None
        return sum(t.trace_dim for t in self.orbit_traces(module))

    def lower_bound_dim(self, module: KModule) -> int:
        return sum(t.trace_dim for t in self.orbit_traces(module) if t.minimal)

    def _check_module(self, module: KModule) -> None:
        if module.out is self.out:
            return
        if module.out.out_order != self.out.out_order:
            raise ValueError(f"Module is defined for an Out group of order {module.out.out_order}, "
                             f"not {self.out.out_order}")
        if not self.out.same_enumeration(module.out):
            raise ValueError("Module is defined for a different enumeration of Out(H); "
                             "build it from the Out group of this evaluation")

    def _single_orbit_at(self, T: PermGroup, what: str) -> int:
        """Index of the orbit of (T, 1), which must be the only one."""
        if len(self.orbits) == 1 and self.orbits[0].rep.T.key == T.key and self.orbits[0].rep.S.is_trivial():
            return 0
        raise ConsistencyError(f"{what} subgroup of order {T.order} should give the only section orbit, "
                               f"found {len(self.orbits)}")

    # Certificates

    def certificates(self, module: KModule) -> List[CertificateModel]:
        traces = self.orbit_traces(module)
        fired: List[CertificateModel] = []
        for check in (self._cert_quotient, self._cert_abelianized, self._cert_never_linked,
                      self._cert_self_normalizing, self._cert_expansive):
            cert = check()
            if cert is not None:
                fired.append(cert)
        fired.extend(self._cert_traces(module, traces))
        for check in (self._cert_unique_section, self._cert_normal_hall, self._cert_sylow,
                      self._cert_p_groups):
            cert = check(traces)
            if cert is not None:
                fired.append(cert)
        return fired

    def _cert_quotient(self) -> Optional[CertificateModel]:
        if self.G.order % self.H.order:
            return None
        for N in self.lattice.class_representatives():
            if N.order * self.H.order != self.G.order or not self.lattice.is_normal(N):
                continue
            if find_isomorphism(self.H, quotient(self.G, N).perm_rep, self.config.iso_limit) is not None:
                return CertificateModel(code='a', name='quotient', kind='nonvanishing',
                                        witness={'kernel_order': N.order})
        return None

    def _cert_abelianized(self) -> Optional[CertificateModel]:
        if not self.H.is_abelian():
            return None
        D = derived_subgroup(self.G)
        Q = quotient(self.G, D).perm_rep
        if Q.order % self.H.order:
            return None
        for K in subgroup_lattice(Q, self.config.lattice_limit):
            if K.order == self.H.order and find_isomorphism(self.H, K, self.config.iso_limit) is not None:
                return CertificateModel(code='b', name='abelianized', kind='nonvanishing',
                                        witness={'abelianization_order': Q.order})
        return None

    def _cert_never_linked(self) -> Optional[CertificateModel]:
        for i, o in enumerate(self.orbits):
            T, S = o.rep.T, o.rep.S
            never = True
            for g in double_coset_reps(self.G, T, T).representatives:
                if T.contains(g):
                    continue
                if linking_conditions(T, S, conjugate_subgroup(T, g), conjugate_subgroup(S, g)):
                    never = False
                    break
            if never:
                return CertificateModel(code='c', name='never-linked', kind='nonvanishing',
                                        witness={'orbit': i, 't_order': T.order, 's_order': S.order})
        return None

    def _cert_self_normalizing(self) -> Optional[CertificateModel]:
        for T in self.lattice.class_representatives():
            if T.order != self.H.order or normalizer(self.G, T).order != T.order:
                continue
            if find_isomorphism(self.H, T, self.config.iso_limit) is not None:
                return CertificateModel(code='d', name='self-normalizing', kind='nonvanishing',
                                        witness={'t_order': T.order,
                                                 't_generators': [str(g) for g in T.generators]})
        return None

    def _cert_expansive(self) -> Optional[CertificateModel]:
        for S in self.lattice.class_representatives():
            N = normalizer(self.G, S)
            if N.order != S.order * self.H.order:
                continue
            if find_isomorphism(self.H, quotient(N, S).perm_rep, self.config.iso_limit) is None:
                continue
            if is_expansive(self.G, S, self.lattice):
                return CertificateModel(code='e', name='expansive', kind='nonvanishing',
                                        witness={'s_order': S.order, 'normalizer_order': N.order})
        return None

    def _cert_traces(self, module: KModule, traces: List[OrbitTrace]) -> List[CertificateModel]:
        fired = []
        witness = next((t for t in traces if t.minimal and t.trace_dim > 0), None)
        if witness is not None:
            fired.append(CertificateModel(code='f', name='trace-witness', kind='nonvanishing',
                                          witness={'orbit': witness.orbit, 'trace_dim': witness.trace_dim}))
        p = module.field.characteristic
        for i, o in enumerate(self.orbits):
            nbar = len(o.nbar_reps)
            if o.minimal and all(idx == 0 for idx in o.gamma_indices) and (p == 0 or nbar % p):
                fired.append(CertificateModel(code='g', name='inner-normalizer', kind='nonvanishing',
                                              witness={'orbit': i, 'nbar_order': nbar}))
                break
        return fired

    def _cert_unique_section(self, traces: List[OrbitTrace]) -> Optional[CertificateModel]:
        if len(self.orbits) != 1:
            return None
        o = self.orbits[0]
        return CertificateModel(code='h', name='unique-section', kind='prediction',
                                witness={'t_order': o.rep.T.order, 's_order': o.rep.S.order},
                                predicted_dim=traces[0].trace_dim)

    def _cert_normal_hall(self, traces: List[OrbitTrace]) -> Optional[CertificateModel]:
        h = self.H.order
        if h == 1 or self.G.order % h or gcd(h, self.G.order // h) != 1:
            return None
        for K in self.lattice.class_representatives():
            if K.order != h or not self.lattice.is_normal(K):
                continue
            if find_isomorphism(self.H, K, self.config.iso_limit) is None:
                continue
            if not centralizer(self.G, K).key <= K.key:
                return None
            i = self._single_orbit_at(K, 'normal Hall')
            return CertificateModel(code='i', name='normal-hall', kind='prediction',
                                    witness={'complement_order': self.G.order // h},
                                    predicted_dim=traces[i].trace_dim)
        return None

    def _cert_sylow(self, traces: List[OrbitTrace]) -> Optional[CertificateModel]:
        h = self.H.order
        p = _prime_of(h) if h > 1 else None
        if p is None or factorint(self.G.order).get(p, 0) != factorint(h)[p]:
            return None
        P = next(T for T in self.lattice.class_representatives() if T.order == h)
        if find_isomorphism(self.H, P, self.config.iso_limit) is None:
            return None
        for Q in self.lattice:
            q = _prime_of(Q.order) if Q.order > 1 else None
            if q is None or q == p:
                continue
            if all(x.conjugated_by(g) in Q for g in P.generators for x in Q.generators):
                return None
        i = self._single_orbit_at(P, 'Sylow')
        return CertificateModel(code='j', name='sylow', kind='prediction',
                                witness={'prime': p, 'normalizer_order': normalizer(self.G, P).order},
                                predicted_dim=traces[i].trace_dim)

    def _cert_p_groups(self, traces: List[OrbitTrace]) -> Optional[CertificateModel]:
        if self.H.order == 1:
            return None
        p = _prime_of(self.G.order)
        if p is None or _prime_of(self.H.order) != p:
            return None
        rank_g = sectional_rank(self.G, self.lattice)
        rank_h = sectional_rank(self.H, subgroup_lattice(self.H, self.config.lattice_limit))
        if rank_g != rank_h:
            return None
        if not all(o.minimal for o in self.orbits):
            raise ConsistencyError("Equal sectional rank p-groups with a non-minimal section")
        return CertificateModel(code='k', name='p-group-rank', kind='applicability',
                                witness={'prime': p, 'sectional_rank': rank_g},
                                predicted_dim=sum(t.trace_dim for t in traces))

    def _check_certificates(self, certificates: List[CertificateModel], dim: int) -> None:
        for cert in certificates:
            if cert.code in NONVANISHING and dim == 0:
                raise ConsistencyError(f"Certificate ({cert.code}) {cert.name} fired but the dimension is 0")
            if cert.predicted_dim is not None and cert.predicted_dim != dim:
                raise ConsistencyError(f"Certificate ({cert.code}) {cert.name} predicts dimension "
                                       f"{cert.predicted_dim}, evaluated {dim}")

    def evaluate(self, module: KModule, verify: Optional[bool] = None,
                 method: Optional[str] = None) -> EvaluationReport:
        """Evaluate with method selection: empty sigma, then the closed formula
        when applicable, and the rank formula when forced, needed or verifying."""
        self._check_module(module)
        if method not in (None, 'rank-formula', 'closed-formula'):
            raise ValueError(f"Unknown evaluation method: {method}")
        verify = self.config.verify if verify is None else verify
        try:
            closed = rank_dim = None
            if not self.orbits:
                dim, chosen = 0, 'empty-sigma'
            elif method == 'rank-formula':
                rank_dim = self.evaluation_dim(module)
                dim, chosen = rank_dim, 'rank-formula'
                if verify:
                    closed = self.closed_formula_dim(module)
            else:
                closed = self.closed_formula_dim(module)
                if closed is None or verify:
                    rank_dim = self.evaluation_dim(module)
                if closed is not None:
                    dim, chosen = closed, 'closed-formula'
                else:
                    dim, chosen = rank_dim, 'rank-formula'
            if verify and closed is not None and closed != rank_dim:
                raise ConsistencyError(f"Closed formula gives {closed}, rank formula gives {rank_dim}")
            lower = self.lower_bound_dim(module)
            if lower > dim:
                raise ConsistencyError(f"Lower bound {lower} exceeds dimension {dim}")
            certificates = self.certificates(module)
            self._check_certificates(certificates, dim)
        except ConsistencyError as e:
            logger.error(f"Consistency failure for {self.subquotient_name} in {self.group_name}: {str(e)}",
                         exc_info=True)
            raise
        logger.info(f"dim S_{{{self.subquotient_name},{module.name}}}({self.group_name}) over "
                    f"{module.field} = {dim} via {chosen}")
        return EvaluationReport(
            group=self.group_name, subquotient=self.subquotient_name, module=module.name,
            field=module.field.label, module_dim=module.dim, dim=dim, vanishes=dim == 0,
            method=chosen, lower_bound=lower, rank_formula_dim=rank_dim, closed_formula_dim=closed,
            verified=verify, per_orbit_traces=self.orbit_traces(module), certificates=certificates,
        )


def pairing_element(G: PermGroup, orb_b: SectionOrbit, orb_t: SectionOrbit, out: OutGroup) -> FormalSum:
    """Sum over g in [B\\G/T] with (B, A) linked to g(T, S) of the Out class
    of sigma_B^-1 phi Conj_g sigma_T."""
    B, A = orb_b.rep.T, orb_b.rep.S
    back = orb_b.sigma.inverse()
    u = FormalSum()
    for g in double_coset_reps(G, B, orb_t.rep.T).representatives:
        if not linking_conditions(B, A, conjugate_subgroup(orb_t.rep.T, g), conjugate_subgroup(orb_t.rep.S, g)):
            continue
        conj = conjugate_section(orb_t.rep, g)
        link = linked(orb_b.rep, conj)
        if link is None:
            continue
        g_inv = g.inverse()
        images = []
        for h in out.generators:
            t = orb_t.rep.quotient.lift(orb_t.sigma(h))
            images.append(back(link.induced_iso(conj.quotient.project(g * t * g_inv))))
        u.add(out.index_of_images(images))
    return u


def evaluation_dim(G: PermGroup, H: PermGroup, V: KModule, lattice: SubgroupLattice, out: OutGroup,
                   config: Optional[Config] = None) -> EvaluationReport:
    return Evaluator(G, H, config=config, lattice=lattice, out=out).evaluate(V, method='rank-formula')


def closed_formula_dim(G: PermGroup, H: PermGroup, V: KModule, lattice: SubgroupLattice, out: OutGroup,
                       config: Optional[Config] = None) -> Optional[int]:
    return Evaluator(G, H, config=config, lattice=lattice, out=out).closed_formula_dim(V)


def lower_bound_dim(G: PermGroup, H: PermGroup, V: KModule, lattice: SubgroupLattice, out: OutGroup,
                    config: Optional[Config] = None) -> int:
    return Evaluator(G, H, config=config, lattice=lattice, out=out).lower_bound_dim(V)


def certificates(G: PermGroup, H: PermGroup, V: KModule, lattice: SubgroupLattice, out: OutGroup,
                 config: Optional[Config] = None) -> List[CertificateModel]:
    return Evaluator(G, H, config=config, lattice=lattice, out=out).certificates(V)
