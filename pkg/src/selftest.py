"""Self-test catalog run by ``main.py selftest``.

Each check raises AssertionError with a readable message on failure; the
runner records pass/fail and wall time per check.
"""
import logging
import time
from typing import Callable, Dict, List, Optional, Tuple

from src.config import Config, LimitExceededError
from src.evaluator import ConsistencyError, Evaluator
from src.exactlin import Field, KModule, cyclic_character_module, load_module, sign_module, trivial_module
from src.permcore import PermGroup, double_coset_reps
from src.presets import load_group
from src.schemas import EvaluationReport, SelftestReport, SelftestResult
from src.sections import subquotient_types
from src.structure import OutGroup, out_group, sectional_rank, subgroup_lattice

logger = logging.getLogger(__name__)

MINIMAL_GROUPS = ('C2', 'C3', 'C4', 'V4', 'S3', 'D8', 'Q8', 'A4', 'A5')
SWEEP_GROUPS = ('S3', 'C4', 'V4', 'C6', 'D8', 'Q8', 'C4xC2', 'C2xC2xC2', 'D10', 'A4', 'D12',
                'S3xC3', 'S4', 'C2xS4')
P_GROUPS = ('D8', 'Q8', 'C4xC2', 'C2xC2xC2')
P_SUBQUOTIENTS = ('C2', 'C4', 'V4')
LATTICE_COUNTS = {'S3': 6, 'D8': 10, 'Q8': 6, 'A4': 10, 'S4': 30, 'A5': 59}
QUICK_ORDER_BOUND = 48


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


def involution_module(out: OutGroup, field: Field) -> KModule:
    """Sum-zero part of the permutation module on the involutions of H.

    For H = V4 this is the 2-dimensional module of Out(V4) ~ S3."""
    involutions = sorted(x for x in out.base.require_elements() if x.order() == 2)
    if len(involutions) < 2:
        raise ValueError("The involution module needs at least two involutions")
    position = {x: k for k, x in enumerate(involutions)}
    last = len(involutions) - 1
    matrices = []
    for i in range(out.out_order):
        phi = out.rep_automorphism(i)
        pi = [position[phi(x)] for x in involutions]
        matrices.append([[int(pi[k] == r) - int(pi[last] == r) for k in range(last)] for r in range(last)])
    return KModule.from_matrices(field, out, matrices, name="involutions")


class SelftestRunner:
    def __init__(self, config: Optional[Config] = None, quick: bool = False, stretch: bool = False):
        self.config = config or Config()
        self.quick = quick
        self.stretch = stretch
        self._groups: Dict[str, PermGroup] = {}
        self._evaluators: Dict[Tuple[str, str], Evaluator] = {}

    def group(self, name: str) -> PermGroup:
        if name not in self._groups:
            self._groups[name] = load_group(name, self.config.element_cache_limit)
        return self._groups[name]

    def evaluator(self, g_name: str, h_name: str) -> Evaluator:
        key = (g_name, h_name)
        if key not in self._evaluators:
            self._evaluators[key] = Evaluator(self.group(g_name), self.group(h_name), self.config,
                                              group_name=g_name, subquotient_name=h_name)
        return self._evaluators[key]

    def evaluate(self, g_name: str, h_name: str, module: str, field: str = 'Q') -> EvaluationReport:
        ev = self.evaluator(g_name, h_name)
        return ev.evaluate(load_module(module, ev.out, Field.parse(field)), verify=True)

    def _expect_dim(self, g_name: str, h_name: str, module: str, field: str, expected: int) -> EvaluationReport:
        report = self.evaluate(g_name, h_name, module, field)
        _expect(report.dim == expected,
                f"dim S_{{{h_name},{module}}}({g_name}) over {field} is {report.dim}, expected {expected}")
        return report

    # Checks

    def check_out_orders(self) -> str:
        expected = {'A5': 2, 'C7': 6, 'S3': 1, 'V4': 6, 'Q8': 6}
        for name, order in expected.items():
            out = out_group(self.group(name), self.config.iso_limit)
            _expect(out.out_order == order, f"|Out({name})| = {out.out_order}, expected {order}")
        return f"{len(expected)} Out groups"

    def check_lattice_counts(self) -> str:
        for name, count in LATTICE_COUNTS.items():
            lattice = subgroup_lattice(self.group(name), self.config.lattice_limit)
            _expect(len(lattice) == count, f"{name} has {len(lattice)} subgroups, expected {count}")
            G = self.group(name)
            reps = lattice.class_representatives()
            decomposition = double_coset_reps(G, reps[1], reps[len(reps) // 2])
            _expect(sum(decomposition.sizes) == G.order, f"double cosets of {name} do not partition it")
        return f"{len(LATTICE_COUNTS)} lattices"

    def check_sections(self) -> str:
        orbits = self.evaluator('S5', 'A5').orbits
        _expect(len(orbits) == 1, f"S5 has {len(orbits)} orbits of A5 sections, expected 1")
        only = orbits[0]
        _expect(only.minimal and only.normalizer.order == 120 and len(only.gamma_image) == 2,
                "the A5 section of S5 should be minimal with normalizer S5 and Gamma of order 2")
        c4 = self.evaluator('C4', 'C2').orbits
        _expect(len(c4) == 2 and all(o.minimal for o in c4), "C4 should have two minimal C2 section orbits")
        _expect(not self.evaluator('C4', 'C3').orbits, "C4 has no C3 sections")
        return "S5/A5, C4/C2, C4/C3"

    def check_examples(self) -> str:
        for g_name, expected in (('S5', 0), ('SL(2,5)', 1)):
            report = self._expect_dim(g_name, 'A5', 'sign', 'Q', expected)
            _expect(report.rank_formula_dim == report.closed_formula_dim == expected,
                    f"{g_name}: rank formula {report.rank_formula_dim}, closed formula {report.closed_formula_dim}")
        return "S5 -> 0, SL(2,5) -> 1"

    def check_sign_in_configured_field(self) -> str:
        field = self.config.field_label
        if self.config.characteristic == 2:
            try:
                self.evaluate('S5', 'A5', 'sign', field)
            except ValueError as e:
                return f"load error as expected: {e}"
            raise AssertionError("the sign module loaded in characteristic 2")
        self._expect_dim('S5', 'A5', 'sign', field, 0)
        return f"S5 -> 0 over {field}"

    def check_minimal_group_identity(self) -> str:
        cases = 0
        for name in MINIMAL_GROUPS:
            ev = self.evaluator(name, name)
            modules = [trivial_module(ev.out, Field(0))]
            if ev.out.out_order == 2:
                modules.append(sign_module(ev.out, Field(0)))
            if name == 'V4':
                modules.append(involution_module(ev.out, Field(3)))
            for module in modules:
                report = ev.evaluate(module, verify=True)
                _expect(report.dim == module.dim,
                        f"dim S_{{{name},{module.name}}}({name}) = {report.dim}, expected {module.dim}")
                cases += 1
        return f"{cases} cases"

    def check_characteristic(self) -> str:
        self._expect_dim('S5', 'A5', 'trivial', 'F2', 0)
        self._expect_dim('S5', 'A5', 'trivial', 'Q', 1)
        self._expect_dim('C4', 'C2', 'trivial', 'Q', 2)
        self._expect_dim('C4', 'C2', 'trivial', 'F2', 1)
        return "S5/A5 and C4/C2 trivial"

    def check_normal_hall(self) -> str:
        ev = self.evaluator('F21', 'C7')
        dims = {}
        for j in range(6):
            report = ev.evaluate(cyclic_character_module(ev.out, Field(7), j), verify=True)
            _expect(any(c.code == 'i' for c in report.certificates), f"normal Hall certificate missing for j={j}")
            dims[j] = report.dim
        expected = {j: int(j in (0, 3)) for j in range(6)}
        _expect(dims == expected, f"F21/C7 character dims {dims}, expected {expected}")
        return "F21/C7 characters over F7"

    def check_p_groups(self) -> str:
        cases = 0
        for g_name in P_GROUPS:
            G = self.group(g_name)
            rank_g = sectional_rank(G, subgroup_lattice(G, self.config.lattice_limit))
            for h_name in P_SUBQUOTIENTS:
                ev = self.evaluator(g_name, h_name)
                H = self.group(h_name)
                if not ev.orbits or sectional_rank(H, subgroup_lattice(H, self.config.lattice_limit)) != rank_g:
                    continue
                _expect(all(o.minimal for o in ev.orbits), f"{h_name} in {g_name} has a non-minimal section")
                for p in (0, 2, 3):
                    report = ev.evaluate(trivial_module(ev.out, Field(p)), verify=True)
                    _expect(report.method == 'closed-formula' and report.rank_formula_dim == report.dim,
                            f"{h_name} in {g_name} over {Field(p)}: closed formula not confirmed")
                    _expect(any(c.code == 'k' for c in report.certificates),
                            f"{h_name} in {g_name}: p-group certificate did not fire")
                    cases += 1
        _expect(cases > 0, "no p-group case had equal sectional rank")
        return f"{cases} cases"

    def check_limit(self) -> str:
        try:
            subgroup_lattice(self.group('S5'), 10)
        except LimitExceededError as e:
            return str(e)
        raise AssertionError("S5 with limit 10 did not raise a limit error")

    def _sweep_modules(self, ev: Evaluator) -> List[KModule]:
        modules = [trivial_module(ev.out, Field(p)) for p in (0, 2, 3)]
        if ev.out.out_order == 2:
            modules.extend(sign_module(ev.out, Field(p)) for p in (0, 3))
        return modules

    def check_sweep(self) -> str:
        cases = closed = 0
        for g_name in SWEEP_GROUPS:
            G = self.group(g_name)
            if self.quick and G.order >= QUICK_ORDER_BOUND:
                continue
            lattice = subgroup_lattice(G, self.config.lattice_limit)
            for H in subquotient_types(G, lattice, self.config.iso_limit):
                ev = Evaluator(G, H, self.config, lattice=lattice, group_name=g_name,
                               subquotient_name=f"H{H.order}")
                for module in self._sweep_modules(ev):
                    report = ev.evaluate(module, verify=True)
                    cases += 1
                    closed += report.closed_formula_dim is not None
        return f"{cases} evaluations, {closed} with the closed formula"

    def check_stretch(self) -> str:
        config = Config(lattice_limit=40320, iso_limit=self.config.iso_limit,
                        element_cache_limit=max(self.config.element_cache_limit, 5040))
        G, H = self.group('S7'), self.group('A5')
        ev = Evaluator(G, H, config, group_name='S7', subquotient_name='A5')
        report = ev.evaluate(sign_module(ev.out, Field(0)), verify=True)
        _expect(report.dim == 0, f"dim S_{{A5,sign}}(S7) = {report.dim}, expected 0")
        return "S7 -> 0"

    def checks(self) -> List[Tuple[str, Callable[[], str]]]:
        catalog = [
            ('out-orders', self.check_out_orders),
            ('lattice-counts', self.check_lattice_counts),
            ('sections', self.check_sections),
            ('examples', self.check_examples),
            ('sign-in-configured-field', self.check_sign_in_configured_field),
            ('minimal-group-identity', self.check_minimal_group_identity),
            ('characteristic', self.check_characteristic),
            ('normal-hall', self.check_normal_hall),
            ('p-groups', self.check_p_groups),
            ('limit', self.check_limit),
            ('sweep', self.check_sweep),
        ]
        if self.stretch:
            catalog.append(('stretch-s7', self.check_stretch))
        return catalog

    def run(self) -> SelftestReport:
        results = []
        for name, check in self.checks():
            start = time.perf_counter()
            try:
                detail, passed, error = check(), True, None
            except (AssertionError, ConsistencyError, ValueError) as e:
                detail, passed, error = f"{type(e).__name__}: {e}", False, type(e).__name__
                logger.error(f"Self-test check {name} failed: {str(e)}", exc_info=True)
            seconds = time.perf_counter() - start
            logger.info(f"Self-test check {name}: {'pass' if passed else 'FAIL'} in {seconds:.2f}s")
            results.append(SelftestResult(name=name, passed=passed, detail=detail, seconds=round(seconds, 3),
                                           error=error))
        return SelftestReport(field=self.config.field_label, results=results)


def run_selftest(config: Optional[Config] = None, quick: bool = False, stretch: bool = False) -> SelftestReport:
    return SelftestRunner(config, quick=quick, stretch=stretch).run()
