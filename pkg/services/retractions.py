"""Commuting retraction systems encoded as an order plus a parent tree"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from services.errors import RetractionError
from services.measures import Measure
from services.spaces import PointedMetricSpace
from utils.constants import FREELAB_FLOAT_TOL

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RetractionSystem:
    """Enumeration mu_0..mu_N of the points with a parent for every mu_k, k >= 1.

    `order[k]` is the point index of mu_k and `parent[k]` the position of its
    parent (always < k; `parent[0]` is -1). phi_i(x) is the last element of
    the chain from the base to x whose position is at most i.
    """

    space: PointedMetricSpace
    order: Tuple[int, ...]
    parent: Tuple[int, ...]

    @property
    def N(self) -> int:
        return len(self.order) - 1

    @cached_property
    def position(self) -> Dict[int, int]:
        return {point: k for k, point in enumerate(self.order)}

    def parent_point(self, point: int) -> Optional[int]:
        k = self.position[point]
        return None if k == 0 else self.order[self.parent[k]]

    @cached_property
    def chain_positions(self) -> Tuple[Tuple[int, ...], ...]:
        """Ascending chain positions from the base, indexed by position"""
        chains: List[Tuple[int, ...]] = [(0,)]
        for k in range(1, len(self.order)):
            chains.append(chains[self.parent[k]] + (k,))
        return tuple(chains)

    @cached_property
    def phi_table(self) -> np.ndarray:
        """table[i, x] = phi_i(x) as point indices"""
        size = self.space.size
        table = np.empty((self.N + 1, size), dtype=int)
        for x in range(size):
            chain = self.chain_positions[self.position[x]]
            current = 0
            for i in range(self.N + 1):
                while current + 1 < len(chain) and chain[current + 1] <= i:
                    current += 1
                table[i, x] = self.order[chain[current]]
        table.flags.writeable = False
        return table

    def label(self, point: int) -> str:
        return self.space.label(point)


@dataclass
class Chain:
    """Points (mu_k1, ..., mu_kl) with increasing positions"""

    points: Tuple[int, ...]

    @property
    def initial(self) -> int:
        return self.points[0]

    @property
    def final(self) -> int:
        return self.points[-1]

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, point: int) -> bool:
        return point in self.points


@dataclass
class SystemViolation:
    kind: str
    indices: Tuple[int, ...]
    detail: str


@dataclass
class SystemReport:
    valid: bool
    violations: List[SystemViolation] = field(default_factory=list)
    checked_triples: int = 0


def build_system(space: PointedMetricSpace, order: Sequence[int], parent: Mapping[int, int]) -> RetractionSystem:
    """Build a system from point indices; `parent` maps child point to parent point"""
    order = tuple(int(p) for p in order)
    if sorted(order) != list(range(space.size)):
        raise RetractionError("order must enumerate every point exactly once")
    if order[0] != space.base_index:
        raise RetractionError(f"order must start at the base point {space.label(space.base_index)!r}")
    position = {point: k for k, point in enumerate(order)}
    parents = [-1]
    for k in range(1, len(order)):
        child = order[k]
        if k == 1 and child not in parent:
            parents.append(0)
            continue
        if child not in parent:
            raise RetractionError(f"point {space.label(child)!r} has no parent")
        p = position.get(parent[child])
        if p is None:
            raise RetractionError(f"unknown parent for {space.label(child)!r}")
        if p >= k:
            raise RetractionError(
                f"parent {space.label(parent[child])!r} of {space.label(child)!r} is not earlier in the order"
            )
        if k == 1 and p != 0:
            raise RetractionError("the parent of mu_1 must be the base point")
        parents.append(p)
    return RetractionSystem(space=space, order=order, parent=tuple(parents))


def validate_phi_table(space: PointedMetricSpace, order: Sequence[int], table: np.ndarray) -> SystemReport:
    """Check image and retraction property of every phi_n and phi_m phi_n = phi_n phi_m = phi_n"""
    table = np.asarray(table, dtype=int)
    n_max = len(order) - 1
    violations: List[SystemViolation] = []
    if table.shape != (n_max + 1, space.size):
        raise RetractionError(f"phi table must have shape {(n_max + 1, space.size)}")
    if table.size and (table.min() < 0 or table.max() >= space.size):
        raise RetractionError("phi table references unknown points")
    for n in range(n_max + 1):
        prefix = np.array(order[: n + 1])
        image = set(int(v) for v in table[n])
        if image != set(int(v) for v in prefix):
            violations.append(
                SystemViolation("image", (n,), f"phi_{n}(M) differs from mu_0..mu_{n}")
            )
        moved = prefix[table[n][prefix] != prefix]
        for x in moved:
            violations.append(SystemViolation("retraction", (n, int(x)), f"phi_{n} moves a point of its image"))
    checked = 0
    for n in range(n_max + 1):
        row_n = table[n]
        for m in range(n, n_max + 1):
            row_m = table[m]
            left = row_m[row_n]
            right = row_n[row_m]
            bad = np.nonzero((left != row_n) | (right != row_n))[0]
            checked += space.size
            for x in bad:
                violations.append(
                    SystemViolation("commutation", (m, n, int(x)), f"phi_{m} and phi_{n} do not compose to phi_{n}")
                )
    return SystemReport(valid=not violations, violations=violations, checked_triples=checked)


def validate_system(system: RetractionSystem) -> SystemReport:
    report = validate_phi_table(system.space, system.order, system.phi_table)
    if system.phi_table[system.N].tolist() != list(range(system.space.size)):
        report.violations.append(SystemViolation("identity", (system.N,), "phi_N is not the identity"))
        report.valid = False
    return report


def system_from_phi_table(space: PointedMetricSpace, order: Sequence[int], table) -> RetractionSystem:
    """Recover the tree from raw phi tables: the parent of mu_k is phi_{k-1}(mu_k)"""
    table = np.asarray(table, dtype=int)
    report = validate_phi_table(space, order, table)
    if not report.valid:
        first = report.violations[0]
        raise RetractionError(f"{len(report.violations)} violations, first {first.kind} at {first.indices}")
    parent = {order[k]: int(table[k - 1][order[k]]) for k in range(1, len(order))}
    system = build_system(space, order, parent)
    if not np.array_equal(system.phi_table, table):
        raise RetractionError("phi table is not induced by its parent tree")
    return system


def phi(system: RetractionSystem, i: int, x: int) -> int:
    if not 0 <= i <= system.N:
        raise RetractionError(f"retraction index {i} outside 0..{system.N}")
    return int(system.phi_table[i, x])


def _pair_ratios(space: PointedMetricSpace, row: np.ndarray):
    upper = np.triu_indices(space.size, 1)
    image = space.dist[row[upper[0]], row[upper[1]]]
    return image / space.dist[upper]


def lip_constant(system: RetractionSystem, i: int):
    """Exact Lipschitz constant of phi_i over all point pairs"""
    if not 0 <= i <= system.N:
        raise RetractionError(f"retraction index {i} outside 0..{system.N}")
    if system.space.size < 2:
        return system.space.zero()
    return max(_pair_ratios(system.space, system.phi_table[i]))


def lip_constants(system: RetractionSystem) -> List:
    return [lip_constant(system, i) for i in range(system.N + 1)]


def chain_to(system: RetractionSystem, x: int) -> Chain:
    positions = system.chain_positions[system.position[x]]
    return Chain(tuple(system.order[k] for k in positions))


def chain_by_phi(system: RetractionSystem, x: int) -> Chain:
    """The same chain recomputed as the set {phi_i(x)} ordered by position"""
    points = {int(system.phi_table[i, x]) for i in range(system.N + 1)}
    return Chain(tuple(sorted(points, key=system.position.__getitem__)))


def is_chain(system: RetractionSystem, points: Sequence[int]) -> bool:
    """Consecutive elements satisfy phi_{k-1}(mu_k) = previous element"""
    positions = [system.position[p] for p in points]
    if any(b <= a for a, b in zip(positions, positions[1:])):
        return False
    return all(
        system.phi_table[positions[j] - 1, points[j]] == points[j - 1] for j in range(1, len(points))
    )


def make_chain(system: RetractionSystem, points: Sequence[int]) -> Chain:
    if not points or not is_chain(system, points):
        raise RetractionError("points do not form a chain of the system")
    return Chain(tuple(points))


def precedes(system: RetractionSystem, x: int, y: int) -> bool:
    """x strictly before y on the chain from the base to y"""
    return x != y and x in chain_to(system, y)


def chain_intersection(first: Chain, second: Chain) -> Optional[Chain]:
    common = tuple(p for p in first.points if p in second.points)
    return Chain(common) if common else None


def chain_difference(first: Chain, second: Chain) -> Optional[Chain]:
    rest = tuple(p for p in first.points if p not in second.points)
    return Chain(rest) if rest else None


def fiber(system: RetractionSystem, i: int, p: int) -> FrozenSet[int]:
    if not 0 <= i <= system.N:
        raise RetractionError(f"retraction index {i} outside 0..{system.N}")
    if system.position[p] > i:
        raise RetractionError(f"{system.label(p)!r} is not in the image of phi_{i}")
    return frozenset(int(y) for y in np.nonzero(system.phi_table[i] == p)[0])


@dataclass
class StepLemmaResult:
    holds: bool
    worst_gap: object
    bound: object
    K: object
    alpha: object
    # K*alpha > gap/2 for every link means the separating balls are disjoint
    k_alpha: object = None


def step_lemma_check(
    system: RetractionSystem,
    chain: Chain,
    path: Sequence[int],
    alpha,
    K=None,
    tol: float = FREELAB_FLOAT_TOL,
) -> StepLemmaResult:
    """Consecutive chain gaps against 2*K*alpha, given an alpha-step path
    from the chain's final point back to its initial point."""
    space = system.space
    alpha = space.scalar(alpha)
    if not path or path[0] != chain.final or path[-1] != chain.initial:
        raise RetractionError("path must run from the chain's final point to its initial point")
    if len(set(path)) != len(path):
        raise RetractionError("path must not revisit a point")
    slack = 0 if space.exact else tol
    for a, b in zip(path, path[1:]):
        if space.dist[a, b] > alpha + slack:
            raise RetractionError(
                f"path step {space.label(a)!r} -> {space.label(b)!r} exceeds alpha = {alpha}"
            )
    if K is None:
        first, last = system.position[chain.initial], system.position[chain.final]
        K = max(lip_constant(system, i) for i in range(first, last + 1))
        K = max(K, space.scalar(1))
    else:
        K = space.scalar(K)
    gaps = [space.dist[a, b] for a, b in zip(chain.points, chain.points[1:])]
    worst = max(gaps) if gaps else space.zero()
    bound = 2 * K * alpha
    holds = worst <= bound + slack
    if not holds:
        logger.warning("step lemma gap %s exceeds 2K alpha = %s", worst, bound)
    return StepLemmaResult(holds=holds, worst_gap=worst, bound=bound, K=K, alpha=alpha, k_alpha=K * alpha)


def basis_molecules(system: RetractionSystem) -> List[Measure]:
    """e_n = delta_{mu_n} - delta_{parent(mu_n)}, n = 1..N"""
    space = system.space
    return [
        Measure(space, {system.order[k]: 1}) - Measure(space, {system.order[system.parent[k]]: 1})
        for k in range(1, len(system.order))
    ]


def row_major_grid_system(space: PointedMetricSpace) -> RetractionSystem:
    """Lexicographic order; the parent lowers the last nonzero coordinate by one"""
    if space.coords is None:
        raise RetractionError("row-major systems need a grid net")
    index = {coords: i for i, coords in enumerate(space.coords)}
    order = sorted(range(space.size), key=lambda i: space.coords[i])
    parent = {}
    for point in order[1:]:
        coords = list(space.coords[point])
        last = max(j for j, c in enumerate(coords) if c != 0)
        coords[last] -= 1
        parent[point] = index[tuple(coords)]
    return build_system(space, order, parent)


def random_system(space: PointedMetricSpace, rng: np.random.Generator) -> RetractionSystem:
    """Random order starting at the base, each point hung under a random earlier one"""
    rest = [int(p) for p in rng.permutation(list(space.non_base))]
    order = [space.base_index] + rest
    parent = {order[k]: order[int(rng.integers(0, k))] for k in range(1, len(order))}
    return build_system(space, order, parent)


@dataclass
class Phi1Dichotomy:
    circle_size: int
    escapes: bool
    lip_phi1: object
    holds: bool


def phi1_dichotomy(system: RetractionSystem) -> Phi1Dichotomy:
    """If phi_1 sends a rim point of mu_1's circle to the centre, Lip phi_1 >= n"""
    space = system.space
    if space.circle_of is None:
        raise RetractionError("dichotomy needs a circle space")
    mu1 = system.order[1]
    n = space.circle_of[mu1]
    rim = [x for x in range(space.size) if space.circle_of[x] == n]
    escapes = any(system.phi_table[1, x] == space.base_index for x in rim)
    lip = lip_constant(system, 1)
    holds = (not escapes) or lip >= n
    return Phi1Dichotomy(circle_size=n, escapes=escapes, lip_phi1=lip, holds=holds)
