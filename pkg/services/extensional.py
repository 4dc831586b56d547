"""Extensional monotone basis on truncated circle unions: enumeration,
neighbours, interpolation and the extension operators with their preduals"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from services.errors import BasisError
from services.measures import LinearOperator, LipschitzFunction, Measure, zero_matrix
from services.projections import CoefficientLedger, projections_from_coefficients
from services.spaces import PointedMetricSpace, build_circle_union, directed_distance, union_label
from services.transport import operator_norm

logger = logging.getLogger(__name__)


def level_of_index(i: int) -> int:
    """k with (4^k - 1)/3 <= i < (4^(k+1) - 1)/3; the base has level 0"""
    if i < 0:
        raise BasisError(f"enumeration index {i} is negative")
    k = 0
    while (4 ** (k + 1) - 1) // 3 <= i:
        k += 1
    return k


@dataclass(frozen=True, eq=False)
class CircleUnionEnumeration:
    """x_0 = centre, then every circle C_{4^k} in turn.

    By default each circle is walked rightwards from rim index 1; `permutations`
    may reorder the rim indices of any level.
    """

    space: PointedMetricSpace
    k_max: int
    order: Tuple[int, ...]

    @cached_property
    def index_of(self) -> Dict[int, int]:
        return {point: i for i, point in enumerate(self.order)}

    @property
    def last(self) -> int:
        return len(self.order) - 1

    def level(self, i: int) -> int:
        return level_of_index(i)

    def point_level(self, x: int) -> int:
        n = self.space.circle_of[x]
        return 0 if n == 0 else _log4(n)

    def level_range(self, k: int) -> range:
        return range((4 ** k - 1) // 3, (4 ** (k + 1) - 1) // 3)

    @cached_property
    def rim_points(self) -> Dict[int, List[int]]:
        """Point indices of C_{4^k} ordered by rim index 1..4^k"""
        points: Dict[int, List[int]] = {}
        for x in range(self.space.size):
            if x == self.space.base_index:
                continue
            points.setdefault(_log4(self.space.circle_of[x]), []).append(x)
        for level in points.values():
            level.sort(key=lambda p: self.space.rim_index[p])
        return points

    def in_D(self, i: int, x: int) -> bool:
        return self.index_of[x] <= i

    def covered(self, i: int, x: int) -> bool:
        return x == self.space.base_index or self.point_level(x) <= self.level(i)


def _log4(n: int) -> int:
    k = 0
    while 4 ** k < n:
        k += 1
    return k


def enumerate_circle_union(
    k_max: int, permutations: Optional[Mapping[int, Sequence[int]]] = None
) -> CircleUnionEnumeration:
    space = build_circle_union(k_max)
    permutations = permutations or {}
    order = [space.base_index]
    for level in range(1, k_max + 1):
        n = 4 ** level
        rims = list(permutations.get(level, range(1, n + 1)))
        if sorted(rims) != list(range(1, n + 1)):
            raise BasisError(f"level {level} permutation must reorder 1..{n}")
        order.extend(space.index(union_label(level, r)) for r in rims)
    return CircleUnionEnumeration(space=space, k_max=k_max, order=tuple(order))


def _check_index(enum: CircleUnionEnumeration, i: int):
    if not 0 <= i <= enum.last:
        raise BasisError(f"index {i} outside 0..{enum.last}")


def neighbours(enum: CircleUnionEnumeration, i: int, x: int) -> Tuple[int, int]:
    """Closest points of D_i walking left and right along x's circle"""
    _check_index(enum, i)
    space = enum.space
    if x == space.base_index:
        return x, x
    if not enum.covered(i, x):
        raise BasisError(f"{space.label(x)!r} lies on a circle above level {enum.level(i)}")
    if enum.in_D(i, x):
        return x, x
    rim = enum.rim_points[enum.point_level(x)]
    n = len(rim)
    start = space.rim_index[x] - 1
    left = next(rim[(start - s) % n] for s in range(1, n) if enum.in_D(i, rim[(start - s) % n]))
    right = next(rim[(start + s) % n] for s in range(1, n) if enum.in_D(i, rim[(start + s) % n]))
    return left, right


def _weights(enum: CircleUnionEnumeration, x: int, left: int, right: int) -> Tuple[int, int]:
    """(d^l(x, nu^l), d^r(x, nu^r))"""
    n = enum.space.circle_of[x]
    rim = enum.space.rim_index
    return (
        directed_distance(n, rim[x], rim[left], "left"),
        directed_distance(n, rim[x], rim[right], "right"),
    )


def interpolate(enum: CircleUnionEnumeration, i: int, f: Mapping[int, object], x: int):
    """I_i(f, x) = [d^r(x, nu^r) f(nu^l) + d^l(x, nu^l) f(nu^r)] / [d^l + d^r]"""
    left, right = neighbours(enum, i, x)
    if left == x:
        return f[x] if x != enum.space.base_index else Fraction(0)
    d_left, d_right = _weights(enum, x, left, right)
    return Fraction(d_right * Fraction(f[left]) + d_left * Fraction(f[right]), d_left + d_right)


def extension_operator(enum: CircleUnionEnumeration, i: int) -> LinearOperator:
    """Predual T_i: delta_x goes to gamma delta_{nu^l} + (1 - gamma) delta_{nu^r},
    gamma = d^r / (d^l + d^r), and to 0 on circles above level k(i)"""
    _check_index(enum, i)
    space = enum.space
    matrix = zero_matrix(space.dimension, True)
    for x in space.non_base:
        if not enum.covered(i, x):
            continue
        left, right = neighbours(enum, i, x)
        col = space.coord_of[x]
        if left == x:
            matrix[col, col] = Fraction(1)
            continue
        d_left, d_right = _weights(enum, x, left, right)
        gamma = Fraction(d_right, d_left + d_right)
        matrix[space.coord_of[left], col] += gamma
        matrix[space.coord_of[right], col] += 1 - gamma
    return LinearOperator(space, matrix)


def apply_function(enum: CircleUnionEnumeration, i: int, f: LipschitzFunction) -> LipschitzFunction:
    """P_i f: interpolation on covered circles, zero beyond"""
    _check_index(enum, i)
    values = {}
    for x in range(enum.space.size):
        if enum.covered(i, x):
            values[x] = interpolate(enum, i, f.values, x)
    return LipschitzFunction.from_mapping(enum.space, values)


def ledger_from_enumeration(enum: CircleUnionEnumeration) -> CoefficientLedger:
    """Row n: T_{n-1}'s column at x_n in enumeration positions"""
    ledger: CoefficientLedger = [{}]
    for n in range(1, enum.last + 1):
        x = enum.order[n]
        row: Dict[int, object] = {}
        if enum.covered(n - 1, x):
            left, right = neighbours(enum, n - 1, x)
            d_left, d_right = _weights(enum, x, left, right)
            gamma = Fraction(d_right, d_left + d_right)
            row[enum.index_of[left]] = row.get(enum.index_of[left], 0) + gamma
            row[enum.index_of[right]] = row.get(enum.index_of[right], 0) + 1 - gamma
        ledger.append({k: v for k, v in row.items() if v != 0})
    return ledger


PAIR_CASES = ("centre", "cross_circle", "shared_neighbours", "left_arc", "right_arc")


def pair_case(
    enum: CircleUnionEnumeration, i: int, x: int, y: int, nbrs: Optional[Mapping[int, Tuple[int, int]]] = None
) -> str:
    space = enum.space
    nbrs = nbrs if nbrs is not None else {p: neighbours(enum, i, p) for p in (x, y)}
    if space.base_index in (x, y):
        return "centre"
    if space.circle_of[x] != space.circle_of[y]:
        return "cross_circle"
    if nbrs[x] == nbrs[y]:
        return "shared_neighbours"
    n = space.circle_of[x]
    leftwards = directed_distance(n, space.rim_index[x], space.rim_index[y], "left")
    return "left_arc" if leftwards == space.dist[x, y] else "right_arc"


@dataclass
class ExtensionalRow:
    i: int
    level: int
    norm: Fraction
    rank: int
    fixes_D: bool
    convex: bool
    commutes_next: Optional[bool]
    ledger_match: bool


@dataclass
class ExtensionalReport:
    k_max: int
    rows: List[ExtensionalRow]
    commutation_failures: List[Tuple[int, int]] = field(default_factory=list)
    contraction_checks: int = 0
    contraction_failures: List[int] = field(default_factory=list)
    pair_cases: Dict[str, int] = field(default_factory=dict)
    passed: bool = True


def _column_convex(op: LinearOperator, x: int) -> bool:
    column = op.column(x)
    if all(v == 0 for v in column):
        return True
    return all(0 <= v <= 1 for v in column) and sum(column) == 1


def random_function(space: PointedMetricSpace, rng: np.random.Generator, spread: int = 8) -> LipschitzFunction:
    values = {x: Fraction(int(rng.integers(-spread * 4, spread * 4 + 1)), 4) for x in space.non_base}
    return LipschitzFunction.from_mapping(space, values)


def verify_extensional_suite(
    enum: CircleUnionEnumeration,
    i_range: Optional[Tuple[int, int]] = None,
    all_pairs: bool = False,
    samples: int = 20,
    seed: int = 0,
    threads: int = 1,
) -> ExtensionalReport:
    """Exact checks of the extension operators over an index range.

    Norms and ranks of every T_i, identity on D_i, convex columns,
    T_{i+1} T_i = T_i T_{i+1} = T_i (all pairs on request), agreement with
    the iterated one-step ledger, and ||P_i f|| <= ||f|| on seeded random f.
    """
    first, last = i_range or (0, enum.last)
    if not (0 <= first <= last <= enum.last):
        raise BasisError(f"index range {first}..{last} outside 0..{enum.last}")
    space = enum.space
    operators = {i: extension_operator(enum, i) for i in range(first, min(last + 1, enum.last) + 1)}
    ledger_family = projections_from_coefficients(space, enum.order, ledger_from_enumeration(enum))

    rows = []
    for i in range(first, last + 1):
        op = operators[i]
        fixes = all(op.image(x).equals(Measure.dirac(space, x)) for x in enum.order[1:i + 1])
        convex = all(_column_convex(op, x) for x in space.non_base)
        commutes = None
        if i + 1 in operators:
            nxt = operators[i + 1]
            commutes = (nxt @ op).equals(op) and (op @ nxt).equals(op)
        rows.append(
            ExtensionalRow(
                i=i,
                level=enum.level(i),
                norm=operator_norm(op, threads),
                rank=op.rank(),
                fixes_D=fixes,
                convex=convex,
                commutes_next=commutes,
                ledger_match=ledger_family[i].equals(op),
            )
        )
        logger.debug("T_%d: norm %s rank %d", i, rows[-1].norm, rows[-1].rank)

    failures = []
    if all_pairs:
        indices = list(range(first, last + 1))
        for a in indices:
            for b in indices:
                if a < b:
                    ta, tb = operators[a], operators[b]
                    if not ((tb @ ta).equals(ta) and (ta @ tb).equals(ta)):
                        failures.append((a, b))

    rng = np.random.default_rng(seed)
    cases = {case: 0 for case in PAIR_CASES}
    contraction_failures = []
    checks = 0
    for i in range(first, last + 1):
        for _ in range(samples):
            f = random_function(space, rng)
            image = apply_function(enum, i, f)
            checks += 1
            if image.lipschitz_constant() > f.lipschitz_constant():
                contraction_failures.append(i)
        covered = [x for x in range(space.size) if enum.covered(i, x)]
        nbrs = {x: neighbours(enum, i, x) for x in covered}
        for a, x in enumerate(covered):
            for y in covered[a + 1:]:
                cases[pair_case(enum, i, x, y, nbrs)] += 1

    passed = (
        not failures
        and not contraction_failures
        and all(
            r.fixes_D
            and r.convex
            and r.commutes_next is not False
            and r.ledger_match
            and r.rank == r.i
            and r.norm == (1 if r.i > 0 else 0)
            for r in rows
        )
    )
    if passed:
        logger.info("extensional suite passed for k_max=%d, i in %d..%d", enum.k_max, first, last)
    else:
        logger.warning("extensional suite found failures for k_max=%d", enum.k_max)
    return ExtensionalReport(
        k_max=enum.k_max,
        rows=rows,
        commutation_failures=failures,
        contraction_checks=checks,
        contraction_failures=contraction_failures,
        pair_cases=cases,
        passed=passed,
    )
