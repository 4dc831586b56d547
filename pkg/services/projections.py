"""Schauder projections on F(M): families, basis and unconditional constants,
and the sign-pattern witness for conditionality along divergent chains"""
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.errors import BasisError
from services.measures import LinearOperator, LipschitzFunction, Measure, zero_matrix, zero_vector
from services.retractions import (
    Chain,
    RetractionSystem,
    chain_difference,
    chain_intersection,
    chain_to,
    is_chain,
    row_major_grid_system,
)
from services.spaces import PointedMetricSpace, build_grid_net, net_parameters
from services.transport import operator_norm
from utils.constants import FREELAB_EXHAUSTIVE_CAP, FREELAB_FLOAT_TOL

logger = logging.getLogger(__name__)

# Row n maps earlier positions i < n to a_i^n
CoefficientLedger = List[Dict[int, object]]


@dataclass(frozen=True, eq=False)
class ProjectionFamily:
    space: PointedMetricSpace
    order: Tuple[int, ...]
    operators: Tuple[LinearOperator, ...]

    @property
    def N(self) -> int:
        return len(self.operators) - 1

    def __getitem__(self, n: int) -> LinearOperator:
        return self.operators[n]


def projections_from_system(system: RetractionSystem) -> ProjectionFamily:
    """P_n sends delta_x to delta_{phi_n(x)}"""
    space = system.space
    one = space.scalar(1)
    operators = []
    for n in range(system.N + 1):
        matrix = zero_matrix(space.dimension, space.exact)
        row = system.phi_table[n]
        for x in space.non_base:
            image = int(row[x])
            if image != space.base_index:
                matrix[space.coord_of[image], space.coord_of[x]] = one
        operators.append(LinearOperator(space, matrix))
    return ProjectionFamily(space, system.order, tuple(operators))


def ledger_from_system(system: RetractionSystem) -> CoefficientLedger:
    """Retractional ledger: a single coefficient 1 at the parent"""
    return [{}] + [{system.parent[k]: 1} for k in range(1, len(system.order))]


def _check_ledger(order: Sequence[int], ledger: CoefficientLedger):
    if len(ledger) != len(order):
        raise BasisError(f"ledger needs {len(order)} rows, got {len(ledger)}")
    for n, row in enumerate(ledger):
        for i in row:
            if not 0 <= i < n:
                raise BasisError(f"ledger row {n} references index {i}, which is not earlier")


def projections_from_coefficients(
    space: PointedMetricSpace, order: Sequence[int], ledger: CoefficientLedger
) -> ProjectionFamily:
    """P_n fixes delta_{mu_j} for j <= n and sends delta_{mu_j}, j > n, to
    sum_i a_i^j P_n delta_{mu_i}; the adjoint extends functions step by step."""
    order = tuple(order)
    _check_ledger(order, ledger)
    rows = [{i: space.scalar(a) for i, a in row.items()} for row in ledger]
    operators = []
    for n in range(len(order)):
        columns: List[np.ndarray] = []
        for j, point in enumerate(order):
            if j <= n:
                column = zero_vector(space.dimension, space.exact)
                if point != space.base_index:
                    column[space.coord_of[point]] = space.scalar(1)
            else:
                column = zero_vector(space.dimension, space.exact)
                for i, a in rows[j].items():
                    column = column + a * columns[i]
            columns.append(column)
        matrix = zero_matrix(space.dimension, space.exact)
        for j, point in enumerate(order):
            if point != space.base_index:
                matrix[:, space.coord_of[point]] = columns[j]
        operators.append(LinearOperator(space, matrix))
    return ProjectionFamily(space, order, tuple(operators))


def basis_vectors(space: PointedMetricSpace, order: Sequence[int], ledger: CoefficientLedger) -> List[Measure]:
    """e_n = delta_{mu_n} - sum_i a_i^n delta_{mu_i} with c_n = 1"""
    _check_ledger(order, ledger)
    vectors = []
    for n in range(1, len(order)):
        coeffs: Dict[int, object] = {order[n]: 1}
        for i, a in ledger[n].items():
            coeffs[order[i]] = coeffs.get(order[i], 0) - space.scalar(a)
        vectors.append(Measure(space, coeffs))
    return vectors


@dataclass
class BasisConstant:
    value: object
    per_n: List[object]


def basis_constant(family: ProjectionFamily, threads: int = 1) -> BasisConstant:
    norms = [operator_norm(op, threads) for op in family.operators]
    return BasisConstant(value=max(norms), per_n=norms)


def signed_sum_operator(family: ProjectionFamily, eps: Sequence[int]) -> LinearOperator:
    """sum_i eps_i (P_{i+1} - P_i), i = 0..N-1"""
    if len(eps) != family.N:
        raise BasisError(f"sign vector needs length {family.N}, got {len(eps)}")
    if any(e not in (1, -1) for e in eps):
        raise BasisError("signs must be +1 or -1")
    space = family.space
    matrix = zero_matrix(space.dimension, space.exact)
    for i, e in enumerate(eps):
        matrix = matrix + e * (family[i + 1].matrix - family[i].matrix)
    return LinearOperator(space, matrix)


def signed_sum_norm(family: ProjectionFamily, eps: Sequence[int], threads: int = 1):
    return operator_norm(signed_sum_operator(family, eps), threads)


@dataclass
class UnconditionalResult:
    value: object
    eps: Tuple[int, ...]
    mode: str
    patterns: int
    seed: Optional[int] = None
    lower_bound: bool = False


def _best_pattern(family: ProjectionFamily, patterns: Sequence[Tuple[int, ...]]):
    best_value, best_eps = None, None
    for eps in patterns:
        value = signed_sum_norm(family, eps)
        if best_value is None or value > best_value:
            best_value, best_eps = value, eps
    return best_value, best_eps


def _best_pattern_task(args):
    family, patterns = args
    return _best_pattern(family, patterns)


def _search_patterns(family: ProjectionFamily, patterns: List[Tuple[int, ...]], threads: int):
    if threads <= 1 or len(patterns) < 2 * threads:
        return _best_pattern(family, patterns)
    size = -(-len(patterns) // threads)
    chunks = [patterns[i:i + size] for i in range(0, len(patterns), size)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        partial = list(pool.map(_best_pattern_task, [(family, chunk) for chunk in chunks]))
    best_value, best_eps = partial[0]
    for value, eps in partial[1:]:
        if value > best_value:
            best_value, best_eps = value, eps
    return best_value, best_eps


def unconditional_constant(
    family: ProjectionFamily,
    mode: str = "exhaustive",
    samples: int = 100,
    seed: int = 0,
    cap: int = FREELAB_EXHAUSTIVE_CAP,
    threads: int = 1,
) -> UnconditionalResult:
    """Max of signed_sum_norm over sign patterns.

    A global sign flip leaves the norm unchanged, so eps_0 is fixed to +1.
    Sampled mode reports a lower bound from `samples` seeded patterns.
    """
    N = family.N
    if N < 1:
        raise BasisError("family has no basis vectors")
    if mode == "exhaustive":
        if N > cap:
            raise BasisError(f"exhaustive enumeration needs N <= {cap}, got {N}")
        patterns = [(1,) + rest for rest in itertools.product((1, -1), repeat=N - 1)]
        value, eps = _search_patterns(family, patterns, threads)
        return UnconditionalResult(value=value, eps=tuple(eps), mode=mode, patterns=len(patterns))
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        patterns = []
        for _ in range(samples):
            draw = rng.choice((1, -1), size=N)
            patterns.append(tuple(int(v * draw[0]) for v in draw))
        value, eps = _search_patterns(family, patterns, threads)
        return UnconditionalResult(
            value=value, eps=tuple(eps), mode=mode, patterns=len(patterns), seed=seed, lower_bound=True
        )
    raise BasisError(f"unknown mode {mode!r}")


@dataclass
class FamilyReport:
    valid: bool
    p0_zero: bool
    pN_identity: bool
    ranks: List[int]
    commutation_failures: List[Tuple[int, int]] = field(default_factory=list)
    telescoping: bool = True
    norms: Optional[List[object]] = None


def verify_family(family: ProjectionFamily, with_norms: bool = False, threads: int = 1) -> FamilyReport:
    """Finite-scale operator conditions of a Schauder projection family"""
    space = family.space
    p0_zero = family[0].equals(LinearOperator.zero(space))
    pN_identity = family[family.N].equals(LinearOperator.identity(space))
    ranks = [op.rank() for op in family.operators]
    failures = []
    for n in range(family.N + 1):
        for m in range(n, family.N + 1):
            if not ((family[m] @ family[n]).equals(family[n]) and (family[n] @ family[m]).equals(family[n])):
                failures.append((m, n))
    total = LinearOperator.zero(space)
    for i in range(family.N):
        total = total + (family[i + 1] - family[i])
    telescoping = total.equals(family[family.N] - family[0])
    norms = [operator_norm(op, threads) for op in family.operators] if with_norms else None
    valid = (
        p0_zero and pN_identity and not failures and telescoping and ranks == list(range(family.N + 1))
    )
    return FamilyReport(
        valid=valid,
        p0_zero=p0_zero,
        pN_identity=pN_identity,
        ranks=ranks,
        commutation_failures=failures,
        telescoping=telescoping,
        norms=norms,
    )


@dataclass
class DivergentPair:
    x: int
    y: int
    n: int


def find_divergent_chains(
    system: RetractionSystem,
    beta,
    n_min: int = 2,
    tol: float = FREELAB_FLOAT_TOL,
    both_orientations: bool = False,
) -> List[DivergentPair]:
    """Pairs with d(x, y) <= beta whose chains differ in at least n_min
    points, deepest first; n counts the points of x's chain missing from y's.

    By default only x before y in the order is reported, the orientation the
    conditionality witness is built for; `both_orientations` adds the
    reversed pairs."""
    space = system.space
    slack = 0 if space.exact else tol
    beta = space.scalar(beta)
    chains = {x: chain_to(system, x) for x in range(space.size)}
    found = []
    for kx, x in enumerate(system.order):
        for y in system.order[kx + 1:]:
            if space.dist[x, y] > beta + slack:
                continue
            for a, b in ((x, y), (y, x)) if both_orientations else ((x, y),):
                rest = chain_difference(chains[a], chains[b])
                n = len(rest) if rest else 0
                if n >= n_min:
                    found.append(DivergentPair(a, b, n))
    found.sort(key=lambda p: (-p.n, system.position[p.x], system.position[p.y]))
    return found


@dataclass
class ConditionalityWitness:
    f: LipschitzFunction
    eps: Tuple[int, ...]
    bound: object
    n: int
    t: int
    certified: object


def lemma41_witness(
    system: RetractionSystem,
    S: Chain,
    T: Chain,
    beta,
    alpha=None,
    family: Optional[ProjectionFamily] = None,
    tol: float = FREELAB_FLOAT_TOL,
) -> ConditionalityWitness:
    """Test function and sign pattern showing ||sum eps_i (P_{i+1} - P_i)|| >= alpha (n-1) / beta.

    f alternates +alpha/2, -alpha/2 along S past its last point shared with
    T, and eps flips sign at every position of S.
    """
    space = system.space
    slack = 0 if space.exact else tol
    base = space.base_index
    for name, chain in (("S", S), ("T", T)):
        if chain.initial != base or not is_chain(system, chain.points):
            raise BasisError(f"chain {name} must be a chain of the system starting at the base")
    separation, _ = net_parameters(space)
    alpha = separation if alpha is None else space.scalar(alpha)
    if alpha > separation + slack:
        raise BasisError(f"space is not {alpha}-separated (separation {separation})")
    beta = space.scalar(beta)
    gap = space.dist[S.final, T.final]
    if gap > beta + slack:
        raise BasisError(f"final points are {gap} apart, more than beta = {beta}")
    rest = chain_difference(S, T)
    n = len(rest) if rest else 0
    if n < 2:
        raise BasisError(f"chains share all but {n} points; need |S \\ T| >= 2")
    shared = chain_intersection(S, T)
    t = max(S.points.index(p) for p in shared.points)

    half = alpha / 2
    values = {}
    for j in range(t + 1, len(S)):
        values[S.points[j]] = half if j % 2 == 1 else -half
    f = LipschitzFunction.from_mapping(space, values)
    if not f.is_feasible(tol):
        raise BasisError("test function is not 1-Lipschitz; separation hypothesis fails")

    flips = {system.position[p] for p in S.points[1:]}
    eps, sign = [], 1
    for i in range(system.N):
        if i >= 1 and i in flips:
            sign = -sign
        eps.append(sign)
    bound = alpha * (n - 1) / beta

    if family is None:
        family = projections_from_system(system)
    image = signed_sum_operator(family, eps).adjoint_apply(f)
    certified = abs(image(S.final) - image(T.final)) / gap
    logger.info("conditionality witness: n=%d bound=%s certified=%s", n, bound, certified)
    return ConditionalityWitness(f=f, eps=tuple(eps), bound=bound, n=n, t=t, certified=certified)


@dataclass
class GrowthRow:
    m: int
    x: str
    y: str
    n: int
    bound: object
    certified: object
    signed_sum_norm: object


def conditionality_growth(
    ms: Sequence[int], beta=1, dim: int = 2, threads: int = 1
) -> List[GrowthRow]:
    """Conditionality witness on row-major grid systems for each grid size"""
    rows = []
    for m in ms:
        space = build_grid_net(m, dim)
        system = row_major_grid_system(space)
        pairs = find_divergent_chains(system, beta, n_min=2)
        if not pairs:
            raise BasisError(f"grid m={m} has no divergent chain pair at beta={beta}")
        deepest = pairs[0]
        family = projections_from_system(system)
        witness = lemma41_witness(
            system, chain_to(system, deepest.x), chain_to(system, deepest.y), beta, family=family
        )
        norm = signed_sum_norm(family, witness.eps, threads)
        rows.append(
            GrowthRow(
                m=m,
                x=space.label(deepest.x),
                y=space.label(deepest.y),
                n=witness.n,
                bound=witness.bound,
                certified=witness.certified,
                signed_sum_norm=norm,
            )
        )
        logger.info("grid m=%d: n=%d signed sum norm %s", m, witness.n, norm)
    return rows
