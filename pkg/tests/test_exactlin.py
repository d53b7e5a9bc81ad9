import random
from fractions import Fraction

import pytest
from sympy import GF
from sympy import Matrix as SymMatrix
from sympy.polys.matrices import DomainMatrix

from src.exactlin import (Field, FormalSum, KModule, Matrix, act, cyclic_character_module, load_module, rank,
                          sign_module, trace_image_dim, trivial_module)
from src.presets import load_group
from src.selftest import involution_module
from src.structure import out_group

Q = Field(0)


def random_matrix(rng: random.Random, rows: int, cols: int, low: int = -3, high: int = 3):
    # Low-rank products show up often, so mix in dependent rows
    base = [[rng.randint(low, high) for _ in range(cols)] for _ in range(rows)]
    if rows > 2:
        base[-1] = [a + b for a, b in zip(base[0], base[1])]
    return base


@pytest.fixture(scope="module")
def out_c3():
    return out_group(load_group('C3'))


@pytest.fixture(scope="module")
def out_v4():
    return out_group(load_group('V4'))


class TestField:
    """Test field parsing and scalar reduction"""

    def test_labels(self):
        assert Field.parse('Q').label == 'Q'
        assert Field.parse('F5').label == 'F5'
        assert Field(0).is_rational

    def test_reduction(self):
        F5 = Field(5)
        assert F5.scalar(7) == 2
        assert F5.scalar(-1) == 4
        assert F5.scalar(Fraction(1, 2)) == 3

    def test_denominator_divisible_by_p(self):
        with pytest.raises(ValueError, match="no image"):
            Field(3).scalar(Fraction(1, 3))


class TestRank:
    """Test exact rank over Q and F_p against sympy"""

    def test_small_examples(self):
        m = [[1, 2], [3, 4]]
        assert rank(Matrix(Q, m)) == 2
        assert rank(Matrix(Field(2), m)) == 1
        assert rank(Matrix(Field(3), m)) == 2
        assert rank(Matrix(Field(2), [[2]])) == 0

    def test_fractions(self):
        m = Matrix(Q, [[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), 1]])
        assert rank(m) == 1

    def test_empty(self):
        assert rank(Matrix.zero(Q, 0, 0)) == 0
        assert rank(Matrix.zero(Q, 3, 2)) == 0

    def test_rational_matches_sympy(self):
        rng = random.Random(7)
        for _ in range(60):
            rows, cols = rng.randint(1, 7), rng.randint(1, 7)
            entries = random_matrix(rng, rows, cols)
            assert rank(Matrix(Q, entries)) == SymMatrix(entries).rank()

    @pytest.mark.parametrize("p", [2, 3, 5, 7])
    def test_prime_field_matches_sympy(self, p):
        rng = random.Random(p)
        K = GF(p)
        for _ in range(40):
            rows, cols = rng.randint(1, 7), rng.randint(1, 7)
            entries = random_matrix(rng, rows, cols, 0, p - 1)
            oracle = DomainMatrix([[K(x) for x in row] for row in entries], (rows, cols), K).rank()
            assert rank(Matrix(Field(p), entries)) == oracle

    def test_large_prime_uses_exact_arithmetic(self):
        p = 2147483659
        m = Matrix(Field(p), [[p - 1, 1], [1, p - 1]])
        # -1 and 1 rows are dependent
        assert rank(m) == 1


class TestMatrix:
    """Test matrix arithmetic"""

    def test_blocks(self):
        I = Matrix.identity(Q, 2)
        Z = Matrix.zero(Q, 2, 2)
        M = Matrix.blocks(Q, [[I, Z], [Z, I]])
        assert (M.rows, M.cols) == (4, 4)
        assert M == Matrix.identity(Q, 4)

    def test_field_mismatch(self):
        with pytest.raises(ValueError, match="field mismatch"):
            Matrix.identity(Q, 2) + Matrix.identity(Field(3), 2)

    def test_product(self):
        a = Matrix(Q, [[1, 2], [0, 1]])
        assert a * a == Matrix(Q, [[1, 4], [0, 1]])


class TestFormalSum:
    """Test formal sums of Out classes"""

    def test_accumulates(self):
        u = FormalSum.from_indices([0, 1, 1])
        assert u.as_dict() == {0: 1, 1: 2}
        assert u.size == 3
        assert (u + FormalSum({2: 1})).as_dict() == {0: 1, 1: 2, 2: 1}

    def test_empty(self):
        assert FormalSum().is_empty()

    def test_negative_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            FormalSum({0: -1})


class TestModules:
    """Test module construction, validation and loading"""

    def test_trivial_and_sign(self, out_c3):
        triv = trivial_module(out_c3, Q)
        sign = sign_module(out_c3, Q)
        u = FormalSum.from_indices([0, 1])
        assert act(triv, u) == Matrix(Q, [[2]])
        assert act(sign, u).is_zero()

    def test_multiplicities_reduce_in_field(self, out_c3):
        triv = trivial_module(out_c3, Field(2))
        assert act(triv, FormalSum.from_indices([0, 1])).is_zero()

    def test_sign_needs_out_of_order_two(self, out_v4):
        with pytest.raises(ValueError, match="order 2"):
            sign_module(out_v4, Q)

    def test_sign_in_characteristic_two(self, out_c3):
        with pytest.raises(ValueError, match="characteristic 2"):
            sign_module(out_c3, Field(2))

    def test_act_index_out_of_range(self, out_c3):
        with pytest.raises(ValueError, match="out of range"):
            act(trivial_module(out_c3, Q), FormalSum({5: 1}))

    def test_trace_image(self, out_c3):
        assert trace_image_dim(trivial_module(out_c3, Q), [0, 1]) == 1
        assert trace_image_dim(sign_module(out_c3, Q), [0, 1]) == 0
        assert trace_image_dim(trivial_module(out_c3, Field(2)), [0, 1]) == 0

    def test_cyclic_characters(self):
        out = out_group(load_group('C7'))
        for j in range(6):
            module = cyclic_character_module(out, Field(7), j)
            assert module.dim == 1
        assert cyclic_character_module(out, Field(7), 0).rho == trivial_module(out, Field(7)).rho

    def test_act_is_additive(self, out_v4):
        """act(u + v) = act(u) + act(v), with overlapping and disjoint supports."""
        module = involution_module(out_v4, Field(3))
        rng = random.Random(11)
        for _ in range(20):
            u = FormalSum({i: rng.randint(0, 4) for i in rng.sample(range(6), 3)})
            v = FormalSum({i: rng.randint(0, 4) for i in rng.sample(range(6), 3)})
            assert act(module, u + v) == act(module, u) + act(module, v)
        u, v = FormalSum.from_indices([0, 1, 2]), FormalSum.from_indices([3, 4, 5])
        assert act(module, u + v) == act(module, FormalSum.from_indices(range(6)))

    def test_not_a_representation(self, out_c3):
        with pytest.raises(ValueError, match="Not a representation"):
            KModule.from_matrices(Q, out_c3, [[[1]], [[2]]])

    def test_wrong_matrix_count(self, out_c3):
        with pytest.raises(ValueError, match="gives 1 matrices"):
            KModule.from_matrices(Q, out_c3, [[[1]]])


class TestLoadModule:
    """Test ModuleSpec loading"""

    def test_by_name(self, out_c3):
        assert load_module('trivial', out_c3).name == 'trivial'
        assert load_module('sign', out_c3, Field(3)).field == Field(3)

    def test_explicit_text(self, out_c3):
        text = "# sign over F3\nfield F3\ndim 1\nrep 1\n2\n"
        module = load_module(text, out_c3)
        assert module.field == Field(3)
        assert module.rho[1] == Matrix(Field(3), [[2]])
        assert module.rho[0] == Matrix.identity(Field(3), 1)

    def test_from_file(self, out_v4, tmp_path):
        # Out(V4) acts on the three involutions; class order follows out_v4
        rows = []
        for i in range(out_v4.out_order):
            phi = out_v4.rep_automorphism(i)
            involutions = sorted(x for x in out_v4.base.elements if x.order() == 2)
            pi = [involutions.index(phi(x)) for x in involutions]
            matrix = [[int(pi[k] == r) - int(pi[2] == r) for k in range(2)] for r in range(2)]
            rows.append(f"rep {i}")
            rows.extend(" ".join(str(x) for x in row) for row in matrix)
        path = tmp_path / "v4.module"
        path.write_text("field F3\ndim 2\n" + "\n".join(rows) + "\n")
        module = load_module(str(path), out_v4)
        assert module.dim == 2
        assert len(module.rho) == 6

    def test_character_defaults_to_native_field(self):
        out = out_group(load_group('C7'))
        module = load_module('char3', out)
        assert module.field == Field(7)
        assert sorted({m.entries[0][0] for m in module.rho}) == [1, 6]

    def test_quadratic_character_over_other_fields(self):
        out = out_group(load_group('C7'))
        native = load_module('char3', out)
        rational = load_module('char3', out, Q)
        assert rational.field == Q
        for a, b in zip(native.rho, rational.rho):
            assert (a.entries[0][0] == 1) == (b.entries[0][0] == 1)
            assert b.entries[0][0] in (1, -1)
        assert load_module('char3', out, Field(5)).dim == 1

    def test_character_not_realized(self):
        out = out_group(load_group('C7'))
        with pytest.raises(ValueError, match="needs the field F7"):
            load_module('char1', out, Q)
        with pytest.raises(ValueError, match="characteristic 2"):
            load_module('char3', out, Field(2))

    def test_character_of_non_prime_cyclic_group(self):
        out = out_group(load_group('C4'))
        with pytest.raises(ValueError, match="not of prime order"):
            load_module('char1', out)
        assert load_module('char1', out, Q).dim == 1

    def test_field_disagreement(self, out_c3):
        with pytest.raises(ValueError, match="disagrees"):
            load_module("field F3\ndim 1\nrep 1\n2\n", out_c3, Field(5))

    def test_missing_rep(self, out_v4):
        with pytest.raises(ValueError, match="Missing rep blocks"):
            load_module("dim 1\nrep 1\n1\n", out_v4)

    def test_bad_index(self, out_c3):
        with pytest.raises(ValueError, match="out of range"):
            load_module("dim 1\nrep 4\n1\n", out_c3)

    def test_unknown_name(self, out_c3):
        with pytest.raises(ValueError, match="Unknown module name"):
            load_module("name steinberg\n", out_c3)

    def test_short_block(self, out_c3):
        with pytest.raises(ValueError, match="expected 2 rows"):
            load_module("dim 2\nrep 1\n1 0\n", out_c3)
