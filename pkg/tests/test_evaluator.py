from unittest.mock import patch

import pytest

from src.config import Config
from src.evaluator import (ConsistencyError, Evaluator, certificates, closed_formula_dim, evaluation_dim,
                           lower_bound_dim)
from src.exactlin import Field, cyclic_character_module, load_module, sign_module, trivial_module
from src.presets import load_group
from src.sections import subquotient_types
from src.selftest import involution_module
from src.structure import out_group, subgroup_lattice

Q = Field(0)


def make(g_name: str, h_name: str) -> Evaluator:
    return Evaluator(load_group(g_name), load_group(h_name), Config(), group_name=g_name, subquotient_name=h_name)


@pytest.fixture(scope="module")
def s5_a5():
    return make('S5', 'A5')


@pytest.fixture(scope="module")
def sl25_a5():
    return make('SL(2,5)', 'A5')


@pytest.fixture(scope="module")
def c4_c2():
    return make('C4', 'C2')


def codes(report):
    return {c.code for c in report.certificates}


class TestExamples:
    """Test the A5 examples and characteristic sensitivity"""

    def test_s5_sign_vanishes(self, s5_a5):
        report = s5_a5.evaluate(sign_module(s5_a5.out, Q), verify=True)
        assert report.dim == 0
        assert report.vanishes
        assert report.rank_formula_dim == report.closed_formula_dim == 0
        assert report.verified

    def test_sl25_sign_survives(self, sl25_a5):
        report = sl25_a5.evaluate(sign_module(sl25_a5.out, Q), verify=True)
        assert report.dim == 1
        assert report.rank_formula_dim == report.closed_formula_dim == 1
        # SL(2,5) maps onto A5
        assert 'a' in codes(report)

    def test_pairing_element(self, s5_a5):
        assert s5_a5.pairing_element(0, 0).as_dict() == {0: 1, 1: 1}

    def test_trivial_depends_on_characteristic(self, s5_a5):
        assert s5_a5.evaluate(trivial_module(s5_a5.out, Q), verify=True).dim == 1
        assert s5_a5.evaluate(trivial_module(s5_a5.out, Field(2)), verify=True).dim == 0

    def test_sign_over_f3(self, s5_a5):
        assert s5_a5.evaluate(load_module('sign', s5_a5.out, Field(3)), verify=True).dim == 0

    def test_unique_section_prediction(self, s5_a5):
        report = s5_a5.evaluate(trivial_module(s5_a5.out, Q))
        unique = next(c for c in report.certificates if c.code == 'h')
        assert unique.predicted_dim == report.dim == 1


class TestMethods:
    """Test the rank formula, closed formula and lower bound"""

    def test_cyclic_quotient(self, c4_c2):
        assert c4_c2.evaluate(trivial_module(c4_c2.out, Q), verify=True).dim == 2
        assert c4_c2.evaluate(trivial_module(c4_c2.out, Field(2)), verify=True).dim == 1

    def test_pairing_matrix_blocks(self, c4_c2):
        assert c4_c2.pairing_element(0, 0).as_dict() == {0: 2}
        assert c4_c2.pairing_element(0, 1).is_empty()
        assert c4_c2.pairing_element(1, 0).is_empty()
        assert c4_c2.pairing_element(1, 1).as_dict() == {0: 1}
        matrix = c4_c2.pairing_matrix(trivial_module(c4_c2.out, Q)).assembled
        assert (matrix.rows, matrix.cols) == (2, 2)

    def test_method_selection(self, c4_c2):
        module = trivial_module(c4_c2.out, Q)
        assert c4_c2.evaluate(module).method == 'closed-formula'
        assert c4_c2.evaluate(module, method='rank-formula').method == 'rank-formula'

    def test_unknown_method(self, c4_c2):
        with pytest.raises(ValueError, match="Unknown evaluation method"):
            c4_c2.evaluate(trivial_module(c4_c2.out, Q), method='magic')

    def test_non_minimal_uses_rank_formula(self):
        ev = make('S4', 'C2')
        report = ev.evaluate(trivial_module(ev.out, Q), verify=True)
        assert report.closed_formula_dim is None
        assert report.method == 'rank-formula'
        assert report.lower_bound <= report.dim
        # S4 maps onto C2
        assert report.dim > 0

    def test_empty_sigma(self):
        ev = make('C4', 'C3')
        report = ev.evaluate(trivial_module(ev.out, Q))
        assert report.method == 'empty-sigma'
        assert report.dim == 0

    def test_mismatch_is_consistency_error(self, c4_c2):
        module = trivial_module(c4_c2.out, Q)
        with patch.object(Evaluator, 'closed_formula_dim', return_value=5):
            with pytest.raises(ConsistencyError, match="Closed formula gives 5"):
                c4_c2.evaluate(module, verify=True)

    def test_module_for_other_out_group(self, c4_c2):
        other = trivial_module(out_group(load_group('V4')), Q)
        with pytest.raises(ValueError, match="Out group of order 6"):
            c4_c2.evaluate(other)

    def test_module_for_same_order_out_group(self, s5_a5):
        """Out(C3) has order 2 like Out(A5), but its classes are different automorphisms."""
        other = sign_module(out_group(load_group('C3')), Q)
        with pytest.raises(ValueError, match="different enumeration"):
            s5_a5.evaluate(other)

    def test_module_for_rebuilt_out_group(self, s5_a5):
        rebuilt = sign_module(out_group(load_group('A5')), Q)
        assert rebuilt.out is not s5_a5.out
        assert s5_a5.evaluate(rebuilt).dim == 0

    def test_module_level_functions(self):
        G, H = load_group('C4'), load_group('C2')
        lattice, out = subgroup_lattice(G), out_group(H)
        module = trivial_module(out, Q)
        assert evaluation_dim(G, H, module, lattice, out).dim == 2
        assert closed_formula_dim(G, H, module, lattice, out) == 2
        assert lower_bound_dim(G, H, module, lattice, out) == 2
        assert {c.code for c in certificates(G, H, module, lattice, out)} >= {'a'}


class TestMinimalGroups:
    """dim S_{H,V}(H) = dim V"""

    @pytest.mark.parametrize("name", ['C2', 'C3', 'C4', 'V4', 'S3', 'D8', 'Q8', 'A4', 'A5'])
    def test_trivial(self, name):
        ev = make(name, name)
        assert ev.evaluate(trivial_module(ev.out, Q), verify=True).dim == 1

    @pytest.mark.parametrize("name", ['C3', 'C4', 'D8', 'A4', 'A5'])
    def test_sign(self, name):
        ev = make(name, name)
        assert ev.evaluate(sign_module(ev.out, Q), verify=True).dim == 1

    def test_two_dimensional_module(self):
        ev = make('V4', 'V4')
        module = involution_module(ev.out, Field(3))
        assert module.dim == 2
        assert ev.evaluate(module, verify=True).dim == 2


class TestCertificates:
    """Test certificate firing and predictions"""

    def test_normal_hall_characters(self):
        ev = make('F21', 'C7')
        dims = []
        for j in range(6):
            report = ev.evaluate(cyclic_character_module(ev.out, Field(7), j), verify=True)
            hall = next(c for c in report.certificates if c.code == 'i')
            assert hall.predicted_dim == report.dim
            dims.append(report.dim)
        assert dims == [1, 0, 0, 1, 0, 0]

    def test_sylow(self):
        # C3 is a normal Sylow subgroup of S3 with no normalizing 2-subgroup
        ev = make('S3', 'C3')
        report = ev.evaluate(sign_module(ev.out, Q), verify=True)
        assert {'i', 'j'} <= codes(report)
        # the quotient S3/C3 inverts C3, so the trace of the sign character is zero
        assert report.dim == 0

    @pytest.mark.parametrize("g_name", ['D8', 'Q8', 'C4xC2'])
    def test_p_group_closed_formula(self, g_name):
        ev = make(g_name, 'V4')
        assert all(o.minimal for o in ev.orbits)
        for p in (0, 2, 3):
            report = ev.evaluate(trivial_module(ev.out, Field(p)), verify=True)
            assert report.method == 'closed-formula'
            assert report.rank_formula_dim == report.dim
            assert 'k' in codes(report)

    def test_self_normalizing(self):
        # The transposition subgroups of S3 are self-normalizing
        ev = make('S3', 'C2')
        report = ev.evaluate(trivial_module(ev.out, Q))
        assert 'd' in codes(report)
        assert report.dim > 0


@pytest.mark.slow
class TestSweep:
    """Every subquotient of small groups evaluates consistently"""

    @pytest.mark.parametrize("g_name", ['S3', 'C4', 'V4', 'D8', 'Q8', 'A4', 'C4xC2', 'D12', 'S4'])
    def test_sweep(self, g_name):
        G = load_group(g_name)
        lattice = subgroup_lattice(G)
        for H in subquotient_types(G, lattice):
            ev = Evaluator(G, H, Config(), lattice=lattice)
            modules = [trivial_module(ev.out, Field(p)) for p in (0, 2, 3)]
            if ev.out.out_order == 2:
                modules += [sign_module(ev.out, Field(p)) for p in (0, 3)]
            for module in modules:
                report = ev.evaluate(module, verify=True)
                assert report.lower_bound <= report.dim
                if report.closed_formula_dim is not None:
                    assert report.closed_formula_dim == report.rank_formula_dim
                if any(c.kind == 'nonvanishing' for c in report.certificates):
                    assert report.dim > 0
