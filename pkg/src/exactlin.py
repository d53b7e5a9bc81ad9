"""Exact linear algebra over Q and F_p, and matrix representations of Out(H)."""
import logging
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import isprime

from src.config import parse_field_spec
from src.structure import OutGroup

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]

# Entries below this bound keep p^2 inside int64 during elimination.
_INT64_PRIME_BOUND = 2 ** 31

_CHARACTER = re.compile(r"^char(\d+)$")


@dataclass(frozen=True)
class Field:
    """Q when characteristic is 0, otherwise the prime field F_p."""
    characteristic: int = 0

    @classmethod
    def parse(cls, text: str) -> "Field":
        return cls(parse_field_spec(text))

    @property
    def is_rational(self) -> bool:
        return self.characteristic == 0

    @property
    def label(self) -> str:
        return 'Q' if self.is_rational else f"F{self.characteristic}"

    def scalar(self, value: Scalar) -> Scalar:
        if self.is_rational:
            return Fraction(value)
        p = self.characteristic
        value = Fraction(value)
        if value.denominator % p == 0:
            raise ValueError(f"{value} has no image in {self.label}")
        return value.numerator * pow(value.denominator, -1, p) % p

    def __str__(self) -> str:
        return self.label


class Matrix:
    """Dense matrix with entries reduced into ``field``."""

    __slots__ = ('field', 'rows', 'cols', 'entries')

    def __init__(self, field: Field, entries: Sequence[Sequence[Scalar]], cols: Optional[int] = None):
        self.field = field
        self.entries = tuple(tuple(field.scalar(x) for x in row) for row in entries)
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else (cols or 0)
        if any(len(row) != self.cols for row in self.entries):
            raise ValueError("Matrix rows have inconsistent lengths")

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        return cls(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def zero(cls, field: Field, rows: int, cols: int) -> "Matrix":
        return cls(field, [[0] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def blocks(cls, field: Field, grid: Sequence[Sequence["Matrix"]]) -> "Matrix":
        """Assemble a block matrix row-major from a grid of equally sized blocks."""
        rows = []
        for block_row in grid:
            for r in range(block_row[0].rows if block_row else 0):
                rows.append([x for block in block_row for x in block.entries[r]])
        return cls(field, rows)

    def _check_shape(self, other: "Matrix", what: str) -> None:
        if self.field != other.field:
            raise ValueError(f"{what}: field mismatch ({self.field} vs {other.field})")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_shape(other, "add")
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("add: shape mismatch")
        return Matrix(self.field, [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                      cols=self.cols)

    def __mul__(self, other: "Matrix") -> "Matrix":
        self._check_shape(other, "multiply")
        if self.cols != other.rows:
            raise ValueError("multiply: shape mismatch")
        columns = list(zip(*other.entries)) if other.entries else [()] * other.cols
        return Matrix(self.field, [[sum(a * b for a, b in zip(row, col)) for col in columns]
                                   for row in self.entries], cols=other.cols)

    def scaled(self, k: int) -> "Matrix":
        return Matrix(self.field, [[k * x for x in row] for row in self.entries], cols=self.cols)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Matrix) and self.field == other.field
                and (self.rows, self.cols) == (other.rows, other.cols) and self.entries == other.entries)

    def __hash__(self) -> int:
        return hash((self.field, self.entries))

    def to_lists(self) -> List[List[str]]:
        return [[str(x) for x in row] for row in self.entries]

    def __repr__(self) -> str:
        return f"Matrix({self.field}, {self.to_lists()})"


def _rank_bareiss(entries: Sequence[Sequence[Fraction]]) -> int:
    """Fraction-free elimination after clearing denominators row by row."""
    rows = []
    for row in entries:
        scale = lcm(*(x.denominator for x in row)) if row else 1
        rows.append([int(x * scale) for x in row])
    m = len(rows)
    n = len(rows[0]) if rows else 0
    rank = 0
    previous = 1
    for col in range(n):
        pivot = next((r for r in range(rank, m) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        head = rows[rank]
        for r in range(rank + 1, m):
            row = rows[r]
            factor = row[col]
            for c in range(col + 1, n):
                row[c] = (head[col] * row[c] - factor * head[c]) // previous
            row[col] = 0
        previous = head[col]
        rank += 1
        if rank == m:
            break
    return rank


def _rank_mod_p(entries: Sequence[Sequence[int]], p: int) -> int:
    dtype = np.int64 if p < _INT64_PRIME_BOUND else object
    A = np.array(entries, dtype=dtype) % p
    m, n = A.shape
    rank = 0
    for col in range(n):
        nonzero = np.nonzero(A[rank:, col])[0]
        if nonzero.size == 0:
            continue
        pivot = rank + int(nonzero[0])
        if pivot != rank:
            A[[rank, pivot]] = A[[pivot, rank]]
        A[rank] = (A[rank] * pow(int(A[rank, col]), -1, p)) % p
        factors = A[rank + 1:, col].reshape(-1, 1)
        A[rank + 1:] = (A[rank + 1:] - factors * A[rank]) % p
        rank += 1
        if rank == m:
            break
    return rank


def rank(m: Matrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.field.is_rational:
        return _rank_bareiss(m.entries)
    return _rank_mod_p(m.entries, m.field.characteristic)


class FormalSum:
    """A multiset of Out(H) class indices with positive integer multiplicities."""

    def __init__(self, terms: Optional[Dict[int, int]] = None):
        self.terms: Counter = Counter()
        for index, multiplicity in (terms or {}).items():
            self.add(index, multiplicity)

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "FormalSum":
        total = cls()
        for i in indices:
            total.add(i)
        return total

    def add(self, index: int, multiplicity: int = 1) -> None:
        if multiplicity < 0:
            raise ValueError("FormalSum multiplicities are nonnegative")
        if multiplicity:
            self.terms[index] += multiplicity

    def __add__(self, other: "FormalSum") -> "FormalSum":
        return FormalSum(dict(self.terms + other.terms))

    def items(self) -> List[Tuple[int, int]]:
        return sorted(self.terms.items())

    @property
    def size(self) -> int:
        return sum(self.terms.values())

    def is_empty(self) -> bool:
        return not self.terms

    def as_dict(self) -> Dict[int, int]:
        return dict(self.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalSum) and self.terms == other.terms

    def __repr__(self) -> str:
        inner = ", ".join(f"{i}: {m}" for i, m in self.items())
        return f"FormalSum({{{inner}}})"


@dataclass(frozen=True)
class KModule:
    """A representation Out(H) -> GL_n(k), one matrix per Out class index."""
    field: Field
    dim: int
    out: OutGroup
    rho: Tuple[Matrix, ...]
    name: str = "explicit"

    @classmethod
    def from_matrices(cls, field: Field, out: OutGroup, matrices: Sequence[Sequence[Sequence[Scalar]]],
                      name: str = "explicit") -> "KModule":
        rho = tuple(Matrix(field, m) for m in matrices)
        dim = rho[0].rows if rho else 0
        module = cls(field=field, dim=dim, out=out, rho=rho, name=name)
        module.validate()
        return module

    def validate(self) -> None:
        if len(self.rho) != self.out.out_order:
            raise ValueError(f"Module gives {len(self.rho)} matrices for an Out group of order {self.out.out_order}")
        for i, m in enumerate(self.rho):
            if (m.rows, m.cols) != (self.dim, self.dim):
                raise ValueError(f"Matrix for class {i} is not {self.dim}x{self.dim}")
        if self.rho[0] != Matrix.identity(self.field, self.dim):
            raise ValueError("The identity class must act as the identity matrix")
        for a in range(self.out.out_order):
            for b in range(self.out.out_order):
                if self.rho[a] * self.rho[b] != self.rho[self.out.multiply(a, b)]:
                    raise ValueError(f"Not a representation: rho({a}) rho({b}) != rho({self.out.multiply(a, b)})")
        for i, m in enumerate(self.rho):
            if rank(m) != self.dim:
                raise ValueError(f"Matrix for class {i} is not invertible")


def act(module: KModule, u: FormalSum) -> Matrix:
    """The matrix of sum(multiplicity * rho(index)); multiplicities reduce into k here."""
    total = Matrix.zero(module.field, module.dim, module.dim)
    for index, multiplicity in u.items():
        if not 0 <= index < module.out.out_order:
            raise ValueError(f"Out class index {index} out of range 0..{module.out.out_order - 1}")
        total = total + module.rho[index].scaled(multiplicity)
    return total


def trace_image_dim(module: KModule, gamma_entries: Sequence[int]) -> int:
    """Dimension of the relative trace image, one term per normalizer coset."""
    return rank(act(module, FormalSum.from_indices(gamma_entries)))


def trivial_module(out: OutGroup, field: Field) -> KModule:
    return KModule.from_matrices(field, out, [[[1]]] * out.out_order, name="trivial")


def sign_module(out: OutGroup, field: Field) -> KModule:
    if out.out_order != 2:
        raise ValueError(f"The sign module needs an Out group of order 2, got {out.out_order}")
    if field.characteristic == 2:
        raise ValueError("The sign module is trivial in characteristic 2; use a field of other characteristic")
    return KModule.from_matrices(field, out, [[[1]], [[-1]]], name="sign")


def cyclic_character_module(out: OutGroup, field: Optional[Field], exponent: int) -> KModule:
    """For cyclic H = <c> of order n, the character of Out(H) = (Z/n)^* sending
    x -> x^k to k^exponent.

    The values live in F_n when n is prime. A character with values in {1, -1}
    is also realized over any field of characteristic other than 2; with no
    field given, F_n is used.
    """
    if len(out.generators) != 1 or out.generators[0].order() != out.base.order:
        raise ValueError("Cyclic characters need a cyclic base group")
    c = out.generators[0]
    n = c.order()
    powers = {}
    x = c
    for k in range(1, n + 1):
        powers[x] = k
        x = x * c
    values = [pow(powers[out.rep_automorphism(i)(c)], exponent, n) for i in range(out.out_order)]
    name = f"character^{exponent}"
    native = Field(n) if isprime(n) else None

    if field is None:
        if native is None:
            raise ValueError(f"The character {name} of Out(C{n}) has no default field; C{n} is not of prime order")
        field = native
    if native is not None and field == native:
        return KModule.from_matrices(field, out, [[[v]] for v in values], name=name)
    if not set(values) <= {1, n - 1}:
        need = f"the field F{n}" if native is not None else "a field containing its values"
        raise ValueError(f"The character {name} of Out(C{n}) is not realized over {field.label}; it needs {need}")
    if field.characteristic == 2 and (n - 1) in values and n != 2:
        raise ValueError(f"The character {name} of Out(C{n}) takes the value -1, which is 1 in characteristic 2")
    return KModule.from_matrices(field, out, [[[1 if v == 1 else -1]] for v in values], name=name)


def _parse_scalar(token: str) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"Invalid matrix entry {token!r}")


def load_module(spec: str, out: OutGroup, field: Optional[Field] = None) -> KModule:
    """Load a module from a name, a ModuleSpec file path, or ModuleSpec text.

    Names are ``trivial``, ``sign`` and ``char<j>`` (see cyclic_character_module).
    ModuleSpec lines: ``field Q|F<p>``, ``dim <n>``, ``name trivial|sign`` or
    ``rep <index>`` followed by n rows of n entries. '#' starts a comment.
    """
    character = _CHARACTER.match(spec.strip())
    if character:
        return cyclic_character_module(out, field, int(character.group(1)))
    text = spec
    if '\n' not in spec and Path(spec).is_file():
        text = Path(spec).read_text()
    elif spec.strip() in ('trivial', 'sign'):
        text = f"name {spec.strip()}"

    lines = [line.split('#', 1)[0].strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    declared: Optional[Field] = None
    dim: Optional[int] = None
    name: Optional[str] = None
    reps: Dict[int, List[List[Fraction]]] = {}
    i = 0
    while i < len(lines):
        keyword, _, rest = lines[i].partition(' ')
        rest = rest.strip()
        if keyword == 'field':
            declared = Field.parse(rest)
        elif keyword == 'dim':
            if not rest.isdigit() or int(rest) < 1:
                raise ValueError(f"Invalid module dimension {rest!r}")
            dim = int(rest)
        elif keyword == 'name':
            name = rest
        elif keyword == 'rep':
            if dim is None:
                raise ValueError("'dim' must precede the first 'rep' block")
            if not rest.isdigit():
                raise ValueError(f"Invalid Out class index {rest!r}")
            block = lines[i + 1:i + 1 + dim]
            if len(block) != dim:
                raise ValueError(f"rep {rest}: expected {dim} rows")
            rows = [[_parse_scalar(tok) for tok in row.split()] for row in block]
            if any(len(row) != dim for row in rows):
                raise ValueError(f"rep {rest}: expected rows of {dim} entries")
            reps[int(rest)] = rows
            i += dim
        else:
            raise ValueError(f"Unknown module spec line: {lines[i]!r}")
        i += 1

    if declared is not None and field is not None and declared != field:
        raise ValueError(f"Module field {declared} disagrees with requested field {field}")
    k = declared or field or Field(0)

    if name == 'trivial':
        return trivial_module(out, k)
    if name == 'sign':
        return sign_module(out, k)
    if name is not None and not reps:
        raise ValueError(f"Unknown module name {name!r}")
    if dim is None or not reps:
        raise ValueError("Explicit modules need 'dim' and at least one 'rep' block")
    unknown = [idx for idx in reps if idx >= out.out_order]
    if unknown:
        raise ValueError(f"Out class index {unknown[0]} out of range 0..{out.out_order - 1}")
    reps.setdefault(0, [[1 if r == c else 0 for c in range(dim)] for r in range(dim)])
    missing = [idx for idx in range(out.out_order) if idx not in reps]
    if missing:
        raise ValueError(f"Missing rep blocks for Out classes {missing}")
    module = KModule.from_matrices(k, out, [reps[idx] for idx in range(out.out_order)], name=name or "explicit")
    logger.info(f"Loaded {module.dim}-dimensional module over {k} for Out of order {out.out_order}")
    return module
