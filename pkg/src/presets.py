"""Group specs: preset names, direct products and explicit generators.

Preset generators are fixed so that Out class indices never drift:
  S<n>      (1 2 ... n), (1 2)
  A<n>      (1 2 3) and (1 2 ... n) for odd n, (2 3 ... n) for even n
  C<n>      (1 2 ... n)
  D<2n>     rotation i -> i+1 and reflection i -> -i on n points (order 2n, n >= 3)
  V4        (1 2)(3 4), (1 3)(2 4)
  Q8        left multiplication by i and j on {1, -1, i, -i, j, -j, k, -k}
  SL(2,5)   [[1,1],[0,1]] and [[0,-1],[1,0]] on the nonzero vectors of F5^2,
            ordered lexicographically
  F21       x -> x+1 and x -> 2x on F7
  AxB       direct product on disjoint point sets, e.g. C4xC2
  explicit  <degree>:<cycles>;<cycles>, e.g. 5:(1 2 3 4 5);(1 2)
"""
import logging
import re
from dataclasses import dataclass
from typing import List, Tuple

from src.config import Limits
from src.permcore import Perm, PermGroup, build_group

logger = logging.getLogger(__name__)

_FAMILY = re.compile(r"^([SACD])(\d+)$")


@dataclass(frozen=True)
class GroupSpec:
    name: str
    degree: int
    generators: Tuple[Perm, ...]

    def build(self, cache_limit: int = Limits.ELEMENT_CACHE_LIMIT) -> PermGroup:
        return build_group(self.degree, list(self.generators), cache_limit=cache_limit)


def _cycle(points: List[int], degree: int) -> Perm:
    images = list(range(degree))
    for i, p in enumerate(points):
        images[p] = points[(i + 1) % len(points)]
    return Perm(images)


def symmetric(n: int) -> Tuple[int, List[Perm]]:
    if n < 2:
        return max(n, 1), []
    return n, [_cycle(list(range(n)), n), _cycle([0, 1], n)]


def alternating(n: int) -> Tuple[int, List[Perm]]:
    if n < 3:
        return max(n, 1), []
    long_cycle = list(range(n)) if n % 2 else list(range(1, n))
    return n, [_cycle([0, 1, 2], n), _cycle(long_cycle, n)]


def cyclic(n: int) -> Tuple[int, List[Perm]]:
    if n < 1:
        raise ValueError("Cyclic groups need a positive order")
    return n, [_cycle(list(range(n)), n)] if n > 1 else []


def dihedral(order: int) -> Tuple[int, List[Perm]]:
    if order % 2 or order < 6:
        raise ValueError(f"D<2n> needs an even order of at least 6, got {order}")
    n = order // 2
    return n, [_cycle(list(range(n)), n), Perm([(-i) % n for i in range(n)])]


def klein_four() -> Tuple[int, List[Perm]]:
    return 4, [Perm([1, 0, 3, 2]), Perm([2, 3, 0, 1])]


# Quaternion units 1, i, j, k; element (sign, unit) sits at index 2 * unit + sign.
_UNIT_PRODUCTS = {
    (0, 0): (0, 0), (0, 1): (0, 1), (0, 2): (0, 2), (0, 3): (0, 3),
    (1, 0): (0, 1), (1, 1): (1, 0), (1, 2): (0, 3), (1, 3): (1, 2),
    (2, 0): (0, 2), (2, 1): (1, 3), (2, 2): (1, 0), (2, 3): (0, 1),
    (3, 0): (0, 3), (3, 1): (0, 2), (3, 2): (1, 1), (3, 3): (1, 0),
}


def quaternion() -> Tuple[int, List[Perm]]:
    def left_multiplication(unit: int) -> Perm:
        images = []
        for x in range(8):
            x_unit, x_sign = divmod(x, 2)
            sign, product = _UNIT_PRODUCTS[(unit, x_unit)]
            images.append(2 * product + (sign ^ x_sign))
        return Perm(images)

    return 8, [left_multiplication(1), left_multiplication(2)]


def special_linear_2_5() -> Tuple[int, List[Perm]]:
    p = 5
    vectors = [(a, b) for a in range(p) for b in range(p) if (a, b) != (0, 0)]
    index = {v: i for i, v in enumerate(vectors)}

    def matrix_action(m) -> Perm:
        (a, b), (c, d) = m
        return Perm([index[((a * x + b * y) % p, (c * x + d * y) % p)] for x, y in vectors])

    return len(vectors), [matrix_action(((1, 1), (0, 1))), matrix_action(((0, -1), (1, 0)))]


def frobenius_21() -> Tuple[int, List[Perm]]:
    return 7, [Perm([(x + 1) % 7 for x in range(7)]), Perm([(2 * x) % 7 for x in range(7)])]


def _shift(p: Perm, offset: int, degree: int) -> Perm:
    images = list(range(degree))
    for i, j in enumerate(p.images):
        images[offset + i] = offset + j
    return Perm(images)


def direct_product(factors: List[Tuple[int, List[Perm]]]) -> Tuple[int, List[Perm]]:
    degree = sum(d for d, _ in factors)
    gens = []
    offset = 0
    for d, factor_gens in factors:
        gens.extend(_shift(g, offset, degree) for g in factor_gens)
        offset += d
    return degree, gens


def _parse_explicit(text: str) -> Tuple[int, List[Perm]]:
    degree_text, _, cycles = text.partition(':')
    if not degree_text.strip().isdigit() or int(degree_text) < 1:
        raise ValueError(f"Invalid degree in explicit group {text!r}")
    degree = int(degree_text)
    gens = [Perm.from_cycles(part, degree) for part in cycles.split(';') if part.strip()]
    return degree, gens


def _parse_factor(text: str) -> Tuple[int, List[Perm]]:
    name = text.strip()
    upper = name.upper()
    if upper == 'V4':
        return klein_four()
    if upper == 'Q8':
        return quaternion()
    if upper.replace(' ', '') == 'SL(2,5)':
        return special_linear_2_5()
    if upper == 'F21':
        return frobenius_21()
    match = _FAMILY.match(upper)
    if match:
        family, n = match.group(1), int(match.group(2))
        if family == 'S':
            return symmetric(n)
        if family == 'A':
            return alternating(n)
        if family == 'C':
            return cyclic(n)
        return dihedral(n)
    raise ValueError(f"Unknown group {name!r}")


def parse_group_spec(text: str) -> GroupSpec:
    name = text.strip()
    if not name:
        raise ValueError("Empty group spec")
    if ':' in name:
        degree, gens = _parse_explicit(name)
    else:
        factors = [_parse_factor(part) for part in re.split(r"[xX]", name)]
        degree, gens = factors[0] if len(factors) == 1 else direct_product(factors)
    return GroupSpec(name=name, degree=degree, generators=tuple(gens))


def load_group(text: str, cache_limit: int = Limits.ELEMENT_CACHE_LIMIT) -> PermGroup:
    spec = parse_group_spec(text)
    group = spec.build(cache_limit)
    logger.info(f"Group {spec.name}: degree {spec.degree}, order {group.order}")
    return group
