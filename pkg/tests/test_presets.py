import pytest

from src.permcore import Perm
from src.presets import load_group, parse_group_spec


class TestPresets:
    """Test preset names and their frozen generators"""

    @pytest.mark.parametrize("name,degree,order", [
        ('S1', 1, 1), ('S3', 3, 6), ('S5', 5, 120), ('A4', 4, 12), ('A5', 5, 60), ('A6', 6, 360),
        ('C1', 1, 1), ('C7', 7, 7), ('D8', 4, 8), ('D10', 5, 10), ('V4', 4, 4), ('Q8', 8, 8),
        ('SL(2,5)', 24, 120), ('F21', 7, 21),
    ])
    def test_orders(self, name, degree, order):
        G = load_group(name)
        assert G.degree == degree
        assert G.order == order

    def test_symmetric_generators(self):
        spec = parse_group_spec('S4')
        assert [str(g) for g in spec.generators] == ['(1 2 3 4)', '(1 2)']

    def test_alternating_generators(self):
        assert [str(g) for g in parse_group_spec('A5').generators] == ['(1 2 3)', '(1 2 3 4 5)']
        assert [str(g) for g in parse_group_spec('A4').generators] == ['(1 2 3)', '(2 3 4)']

    def test_frobenius_generators(self):
        assert [str(g) for g in parse_group_spec('F21').generators] == ['(1 2 3 4 5 6 7)', '(2 3 5)(4 7 6)']

    def test_quaternion_is_not_dihedral(self):
        Q8 = load_group('Q8')
        assert Q8.order_census() == {1: 1, 2: 1, 4: 6}

    def test_sl25_has_central_involution(self):
        G = load_group('SL(2,5)')
        central = [z for z in G.elements if not z.is_identity() and all(z * g == g * z for g in G.generators)]
        assert len(central) == 1
        assert central[0].order() == 2

    def test_case_and_spacing(self):
        assert load_group('sl(2, 5)').order == 120
        assert load_group('q8').order == 8


class TestProductsAndExplicit:
    """Test direct products and explicit generator lists"""

    def test_direct_product(self):
        G = load_group('C4xC2')
        assert G.degree == 6
        assert G.order == 8
        assert G.is_abelian()

    def test_triple_product(self):
        G = load_group('C2xC2xC2')
        assert G.order == 8
        assert G.exponent() == 2

    def test_mixed_product(self):
        assert load_group('S3xC3').order == 18
        assert load_group('C2xS4').order == 48

    def test_explicit(self):
        spec = parse_group_spec('5:(1 2 3 4 5);(1 2)')
        assert spec.degree == 5
        assert spec.generators == (Perm.from_cycles('(1 2 3 4 5)', 5), Perm.from_cycles('(1 2)', 5))
        assert spec.build().order == 120

    def test_explicit_identity_generator(self):
        assert load_group('3:()').order == 1


class TestInvalidSpecs:
    """Test group spec validation"""

    @pytest.mark.parametrize("text,message", [
        ('', "Empty group spec"),
        ('M11', "Unknown group"),
        ('D7', "even order"),
        ('D4', "at least 6"),
        ('x:(1 2)', "Invalid degree"),
        ('3:(1 4)', "beyond degree"),
        ('3:(1 2', "Invalid cycle notation"),
    ])
    def test_rejected(self, text, message):
        with pytest.raises(ValueError, match=message):
            parse_group_spec(text)
