"""Kantorovich-Rubinstein norm on F(M): primal transport, dual LP, operator norms"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import ot
from scipy.optimize import linprog

from services.errors import MeasureError
from services.exact_lp import maximize
from services.measures import LinearOperator, LipschitzFunction, Measure
from services.spaces import PointedMetricSpace
from utils.constants import FREELAB_FLOAT_TOL
from utils.rationals import common_denominator

logger = logging.getLogger(__name__)


@dataclass
class DualSolution:
    value: object
    witness: LipschitzFunction


@dataclass
class NormAttainment:
    """Operator norm with the molecule (x, y) that attains it"""

    value: object
    pair: Optional[Tuple[int, int]]


def _shortcut(measure: Measure):
    """Closed forms for single Diracs and balanced two-point measures"""
    space = measure.space
    coeffs = measure.coeffs
    if not coeffs:
        return space.zero()
    if len(coeffs) == 1:
        (x, a), = coeffs.items()
        return abs(a) * space.dist[x, space.base_index]
    if len(coeffs) == 2:
        (x, a), (y, b) = coeffs.items()
        if a + b == 0:
            return abs(a) * space.dist[x, y]
    return None


def _signed_nodes(measure: Measure) -> Tuple[List[int], List]:
    """Support plus the base, with the base absorbing the total mass"""
    space = measure.space
    nodes = list(measure.support) + [space.base_index]
    weights = list(measure.coeffs.values()) + [-measure.total_mass]
    return nodes, weights


def _exact_primal(measure: Measure) -> Fraction:
    space = measure.space
    nodes, weights = _signed_nodes(measure)
    mass_scale = common_denominator(weights)
    dist_scale = common_denominator(space.dist[x, y] for x in nodes for y in nodes)
    graph = nx.DiGraph()
    for node, weight in zip(nodes, weights):
        # networkx demand is inflow minus outflow; positive mass is a supply
        graph.add_node(node, demand=-int(weight * mass_scale))
    for x in nodes:
        for y in nodes:
            if x != y:
                graph.add_edge(x, y, weight=int(space.dist[x, y] * dist_scale))
    cost, _ = nx.network_simplex(graph)
    return Fraction(cost, mass_scale * dist_scale)


def _float_primal(measure: Measure) -> float:
    space = measure.space
    nodes, weights = _signed_nodes(measure)
    signed = np.array(weights, dtype=float)
    supply = np.clip(signed, 0, None)
    demand = np.clip(-signed, 0, None)
    cost = np.ascontiguousarray(space.dist[np.ix_(nodes, nodes)], dtype=float)
    return float(ot.emd2(supply, demand, cost))


def kr_norm(measure: Measure):
    """Free-space norm as optimal transport of the positive part onto the
    negative part, the base point covering any imbalance."""
    value = _shortcut(measure)
    if value is not None:
        return value
    if measure.space.exact:
        return _exact_primal(measure)
    return _float_primal(measure)


def _dual_constraints(space: PointedMetricSpace, support: Sequence[int]):
    """Rows of A g <= b for g_x = f(x) + d(x, 0) >= 0.

    Pairwise: g_x - g_y <= d(x,y) + d(x,0) - d(y,0); against the base:
    g_x <= 2 d(x,0). Every right-hand side is nonnegative by the triangle
    inequality, so g = 0 is feasible.
    """
    base = space.base_index
    size = len(support)
    zero = space.zero()
    rows, rhs = [], []
    for a, x in enumerate(support):
        for c, y in enumerate(support):
            if a == c:
                continue
            row = [zero] * size
            row[a], row[c] = zero + 1, zero - 1
            rows.append(row)
            rhs.append(space.dist[x, y] + space.dist[x, base] - space.dist[y, base])
        row = [zero] * size
        row[a] = zero + 1
        rows.append(row)
        rhs.append(2 * space.dist[x, base])
    return rows, rhs


def _exact_lexmin(rows, rhs, objective, optimum) -> List[Fraction]:
    """Lexicographically smallest optimal g over the support order"""
    size = len(objective)
    fixed: List[Fraction] = []
    for k in range(size):
        extra_rows = [[-v for v in objective]]
        extra_rhs = [-optimum]
        for t, value in enumerate(fixed):
            unit = [Fraction(0)] * size
            unit[t] = Fraction(1)
            extra_rows += [unit, [-v for v in unit]]
            extra_rhs += [value, -value]
        target = [Fraction(0)] * size
        target[k] = Fraction(-1)
        result = maximize(rows + extra_rows, rhs + extra_rhs, target)
        if result.status != "optimal":
            raise MeasureError(f"lexicographic refinement failed at coordinate {k}: {result.status}")
        fixed.append(-result.value)
    return fixed


def _float_lexmin(A, b, objective, optimum, tol) -> np.ndarray:
    size = len(objective)
    fixed: List[float] = []
    for k in range(size):
        A_ub = np.vstack([A, -objective[None, :]])
        b_ub = np.append(b, -optimum + tol * max(1.0, abs(optimum)))
        A_eq = np.zeros((len(fixed), size)) if fixed else None
        for t in range(len(fixed)):
            A_eq[t, t] = 1.0
        target = np.zeros(size)
        target[k] = 1.0
        res = linprog(
            target,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=A_eq,
            b_eq=np.array(fixed) if fixed else None,
            bounds=[(0, None)] * size,
            method="highs",
        )
        if res.status != 0:
            raise MeasureError(f"lexicographic refinement failed at coordinate {k}: {res.message}")
        fixed.append(float(res.x[k]))
    return np.array(fixed)


def smallest_extension(space: PointedMetricSpace, values: Dict[int, object]) -> LipschitzFunction:
    """Least 1-Lipschitz extension of values given on a subset (base included implicitly)"""
    known = dict(values)
    known[space.base_index] = space.zero()
    full = []
    for x in range(space.size):
        if x in known:
            full.append(known[x])
        else:
            full.append(max(v - space.dist[x, s] for s, v in known.items()))
    return LipschitzFunction(space, tuple(full))


def kr_norm_dual(measure: Measure, canonical: bool = True, tol: float = FREELAB_FLOAT_TOL) -> DualSolution:
    """Maximise <f, mu> over 1-Lipschitz f vanishing at the base.

    The LP lives on the support only; the witness is completed by the
    smallest extension. With `canonical` the support values are the
    lexicographically smallest optimal vector.
    """
    space = measure.space
    if measure.is_zero():
        return DualSolution(space.zero(), LipschitzFunction.from_mapping(space, {}))
    support = list(measure.support)
    base = space.base_index
    offsets = [space.dist[x, base] for x in support]
    coeffs = [measure.coeffs[x] for x in support]
    constant = sum((a * o for a, o in zip(coeffs, offsets)), space.zero())
    rows, rhs = _dual_constraints(space, support)

    if space.exact:
        result = maximize(rows, rhs, coeffs)
        if result.status != "optimal":
            raise MeasureError(f"dual LP ended {result.status}")
        g = _exact_lexmin(rows, rhs, coeffs, result.value) if canonical else result.x
        value = result.value - constant
    else:
        A = np.array(rows, dtype=float)
        b = np.array(rhs, dtype=float)
        c = np.array(coeffs, dtype=float)
        res = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, None)] * len(support), method="highs")
        if res.status != 0:
            raise MeasureError(f"dual LP failed: {res.message}")
        optimum = float(-res.fun)
        g = _float_lexmin(A, b, c, optimum, tol) if canonical else res.x
        value = optimum - float(constant)

    values = {x: g[k] - offsets[k] for k, x in enumerate(support)}
    witness = smallest_extension(space, values)
    return DualSolution(value, witness)


def molecule_pairs(space: PointedMetricSpace) -> List[Tuple[int, int]]:
    """Unordered point pairs, base included; the norm is symmetric in (x, y)"""
    return [(x, y) for x in range(space.size) for y in range(x + 1, space.size)]


def _molecule_image(operator: LinearOperator, x: int, y: int) -> Measure:
    vector = operator.column(x) - operator.column(y)
    return Measure.from_vector(operator.space, vector)


def _best_molecule(operator: LinearOperator, pairs: Sequence[Tuple[int, int]]) -> NormAttainment:
    space = operator.space
    best = NormAttainment(space.zero(), None)
    for x, y in pairs:
        ratio = kr_norm(_molecule_image(operator, x, y)) / space.dist[x, y]
        if best.pair is None or ratio > best.value:
            best = NormAttainment(ratio, (x, y))
    return best


def _best_molecule_task(args) -> NormAttainment:
    operator, pairs = args
    return _best_molecule(operator, pairs)


def operator_norm_attained(operator: LinearOperator, threads: int = 1) -> NormAttainment:
    """Max of ||T(delta_x - delta_y)|| / d(x, y) over molecules.

    The first pair in enumeration order wins ties, whatever the worker count.
    """
    pairs = molecule_pairs(operator.space)
    if threads <= 1 or len(pairs) < 2 * threads:
        return _best_molecule(operator, pairs)
    size = -(-len(pairs) // threads)
    chunks = [pairs[i:i + size] for i in range(0, len(pairs), size)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        partial = list(pool.map(_best_molecule_task, [(operator, chunk) for chunk in chunks]))
    best = partial[0]
    for candidate in partial[1:]:
        if candidate.value > best.value:
            best = candidate
    logger.debug("operator norm over %d molecules in %d chunks", len(pairs), len(chunks))
    return best


def operator_norm(operator: LinearOperator, threads: int = 1):
    return operator_norm_attained(operator, threads).value
