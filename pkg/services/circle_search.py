"""Branch-and-bound certification of the circle lower bound on max Lip phi_i,
heuristic systems on circles and circle unions, and the union restriction"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.errors import SearchError
from services.retractions import (
    RetractionSystem,
    build_system,
    lip_constant,
    lip_constants,
    system_from_phi_table,
)
from services.spaces import build_circle, build_circle_union, circle_levels, subspace, union_label
from utils.constants import FREELAB_BUDGET_NODES, FREELAB_BUDGET_SECS

logger = logging.getLogger(__name__)

STRATEGIES = ("peel-balanced", "peel-one-arc", "greedy-min-lip")


@dataclass
class Theorem32Bound:
    n: int
    value: float
    radicand: int
    hypothesis_met: bool


def theorem32_bound(n: int) -> Theorem32Bound:
    """(sqrt(8n+1) - 1) / 8, with the radicand kept for exact comparisons"""
    if n < 10:
        logger.warning("circle bound evaluated for n=%d < 10, outside its hypothesis", n)
    radicand = 8 * n + 1
    return Theorem32Bound(n=n, value=(math.sqrt(radicand) - 1) / 8, radicand=radicand, hypothesis_met=n >= 10)


@dataclass(frozen=True)
class Target:
    """Either a rational value or (sqrt(radicand) - 1) / 8; compared exactly"""

    rational: Optional[Fraction] = None
    radicand: Optional[int] = None

    @classmethod
    def auto(cls, n: int) -> "Target":
        return cls(radicand=theorem32_bound(n).radicand)

    @classmethod
    def parse(cls, text: str, n: int) -> "Target":
        if str(text).strip() == "auto":
            return cls.auto(n)
        try:
            value = Fraction(str(text).strip())
        except ValueError:
            raise SearchError(f"target must be 'auto' or a positive rational, got {text!r}") from None
        if value <= 0:
            raise SearchError("target must be positive")
        return cls(rational=value)

    def reached_by(self, value) -> bool:
        """value >= target, exactly"""
        value = Fraction(value)
        if self.rational is not None:
            return value >= self.rational
        lhs = 8 * value + 1
        return lhs > 0 and lhs * lhs >= self.radicand

    def ratio_reached(self, num: int, den: int) -> bool:
        if self.rational is not None:
            return num * self.rational.denominator >= self.rational.numerator * den
        return (8 * num + den) ** 2 >= self.radicand * den * den

    @property
    def value(self) -> float:
        if self.rational is not None:
            return float(self.rational)
        return (math.sqrt(self.radicand) - 1) / 8

    def describe(self) -> str:
        if self.rational is not None:
            return str(self.rational)
        return f"(sqrt({self.radicand})-1)/8"


@dataclass
class Budget:
    nodes: int = FREELAB_BUDGET_NODES
    seconds: float = FREELAB_BUDGET_SECS

    def __post_init__(self):
        if self.nodes <= 0 or self.seconds <= 0:
            raise SearchError("search budget must be positive")


Prefix = Tuple[Tuple[int, ...], Tuple[int, ...]]


@dataclass
class SearchCertificate:
    n: int
    target: Target
    outcome: str  # "certified" | "counterexample" | "indeterminate"
    nodes_explored: int
    wall_time: float
    system: Optional[RetractionSystem] = None
    achieved: Optional[Fraction] = None
    frontier: List[Prefix] = field(default_factory=list)
    heuristics: Dict[str, Fraction] = field(default_factory=dict)
    pruned_samples: List[Prefix] = field(default_factory=list)


class _Search:
    """Depth-first construction of (order, parent) on C_n^0.

    A node stores, for every placed point, its row phi_0..phi_K and, for every
    unplaced point y, the placed points that may still end up as the last
    placed element of y's chain without forcing a ratio >= target. An empty
    domain prunes the node.
    """

    def __init__(self, n: int, target: Target):
        self.n = n
        self.target = target
        self.space = build_circle(n)
        self.D = [[int(v) for v in row] for row in self.space.dist]
        # bad[a][b]: a ratio a/b reaches the target
        self.bad = [[False] + [target.ratio_reached(a, b) for b in range(1, n + 1)] for a in range(n + 1)]
        self.pruned_samples: List[Prefix] = []

    def off_axis(self, point: int) -> bool:
        r = (point - 1) % self.n
        return r != 0 and 2 * r != self.n

    def right_side(self, point: int) -> bool:
        r = (point - 1) % self.n
        return 1 <= r and 2 * r < self.n

    def from_prefix(self, order: Sequence[int], parent: Sequence[int]):
        """Node for an (order, parent) prefix computed from scratch; None if pruned"""
        D, bad = self.D, self.bad
        K = len(order) - 1
        rows: Dict[int, List[int]] = {}
        for k, point in enumerate(order):
            rows[point] = [order[0]] if k == 0 else rows[order[parent[k]]][:k] + [point]
            rows[point] = rows[point] + [point] * (K + 1 - len(rows[point]))
        placed = list(order)
        for i in range(K + 1):
            for a_idx, a in enumerate(placed):
                for b in placed[a_idx + 1:]:
                    if bad[D[rows[a][i]][rows[b][i]]][D[a][b]]:
                        return None
        dom: Dict[int, List[int]] = {}
        for y in range(self.space.size):
            if y in rows:
                continue
            dom[y] = [
                p
                for p in placed
                if not any(
                    bad[D[rows[p][i]][rows[w][i]]][D[y][w]] for i in range(K + 1) for w in placed
                )
            ]
            if not dom[y]:
                return None
        return _Node(tuple(order), tuple(parent), rows, dom)

    def child(self, node: "_Node", z: int, q: int):
        D, bad = self.D, self.bad
        K = len(node.order) - 1
        rows = {w: r + [w] for w, r in node.rows.items()}
        rz = node.rows[q] + [z]
        rows[z] = rz
        dom: Dict[int, List[int]] = {}
        for y, candidates in node.dom.items():
            if y == z:
                continue
            dyz = D[y][z]
            kept = [
                p for p in candidates if not any(bad[D[rows[p][i]][rz[i]]][dyz] for i in range(K + 2))
            ]
            if q in candidates and not any(bad[D[z][w]][D[y][w]] for w in node.order):
                kept.append(z)
            if not kept:
                return None
            dom[y] = kept
        return _Node(node.order + (z,), node.parent + (node.order.index(q),), rows, dom)

    def children(self, node: "_Node") -> List["_Node"]:
        moves = sorted(
            (len(candidates), y, node.order.index(q), q)
            for y, candidates in node.dom.items()
            for q in candidates
        )
        mirrored = not any(self.off_axis(p) for p in node.order[1:])
        kids = []
        for _, z, _, q in moves:
            if mirrored and self.off_axis(z) and not self.right_side(z):
                # reflection through x_1 maps this branch onto a right-side one
                continue
            kid = self.child(node, z, q)
            if kid is None:
                if len(self.pruned_samples) < 16:
                    self.pruned_samples.append((node.order + (z,), node.parent + (node.order.index(q),)))
                continue
            kids.append(kid)
        return kids

    def root(self):
        return self.from_prefix((0, 1), (-1, 0))

    def to_system(self, node: "_Node") -> RetractionSystem:
        parent = {node.order[k]: node.order[node.parent[k]] for k in range(1, len(node.order))}
        return build_system(self.space, node.order, parent)


@dataclass
class _Node:
    order: Tuple[int, ...]
    parent: Tuple[int, ...]
    rows: Dict[int, List[int]]
    dom: Dict[int, List[int]]

    @property
    def complete(self) -> bool:
        return not self.dom

    @property
    def prefix(self) -> Prefix:
        return self.order, self.parent


@dataclass
class _SubtreeResult:
    outcome: str
    nodes: int
    prefix: Optional[Prefix] = None
    frontier: List[Prefix] = field(default_factory=list)
    pruned_samples: List[Prefix] = field(default_factory=list)


def _run_dfs(search: _Search, start: List[_Node], budget: Budget, started: float) -> _SubtreeResult:
    stack = list(reversed(start))
    nodes = 0
    while stack:
        if nodes >= budget.nodes or time.monotonic() - started > budget.seconds:
            logger.info("circle search budget exhausted after %d nodes", nodes)
            return _SubtreeResult(
                "indeterminate", nodes, frontier=[node.prefix for node in reversed(stack)],
                pruned_samples=search.pruned_samples,
            )
        node = stack.pop()
        nodes += 1
        if node.complete:
            return _SubtreeResult("counterexample", nodes, prefix=node.prefix, pruned_samples=search.pruned_samples)
        stack.extend(reversed(search.children(node)))
        if nodes % 100000 == 0:
            logger.info("circle search: %d nodes, depth %d, %.1fs", nodes, len(node.order), time.monotonic() - started)
    return _SubtreeResult("certified", nodes, pruned_samples=search.pruned_samples)


def _subtree_task(args) -> _SubtreeResult:
    n, target, prefixes, budget = args
    search = _Search(n, target)
    start = [node for node in (search.from_prefix(o, p) for o, p in prefixes) if node is not None]
    return _run_dfs(search, start, budget, time.monotonic())


def certify_circle_lower_bound(
    n: int,
    target: Target,
    budget: Optional[Budget] = None,
    resume: Optional[Sequence[Prefix]] = None,
    threads: int = 1,
    try_heuristics: bool = True,
) -> SearchCertificate:
    """Exhaust all systems on C_n^0 up to rotation and reflection; "certified"
    means every one has some Lip phi_i >= target."""
    if n < 3:
        raise SearchError(f"circle search needs n >= 3, got {n}")
    budget = budget or Budget()
    started = time.monotonic()
    heuristics: Dict[str, Fraction] = {}
    if try_heuristics and resume is None:
        for strategy in STRATEGIES:
            result = heuristic_circle_system(n, strategy)
            heuristics[strategy] = result.achieved
            if not target.reached_by(result.achieved):
                logger.info("heuristic %s beats target with %s", strategy, result.achieved)
                return SearchCertificate(
                    n=n, target=target, outcome="counterexample", nodes_explored=0,
                    wall_time=time.monotonic() - started, system=result.system,
                    achieved=result.achieved, heuristics=heuristics,
                )

    search = _Search(n, target)
    if resume is not None:
        start = [node for node in (search.from_prefix(o, p) for o, p in resume) if node is not None]
    else:
        root = search.root()
        start = [root] if root is not None else []

    if threads > 1 and start:
        # split one level below the start nodes; results are combined in order
        tasks: List[Prefix] = []
        for node in start:
            if node.complete:
                tasks.append(node.prefix)
            else:
                tasks.extend(kid.prefix for kid in search.children(node))
        # the node budget is split evenly over the subtrees
        share = Budget(nodes=max(1, budget.nodes // max(1, len(tasks))), seconds=budget.seconds)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_subtree_task, [(n, target, [t], share) for t in tasks]))
        nodes = len(start) + sum(r.nodes for r in results)
        outcome, prefix, frontier = "certified", None, []
        for r in results:
            if r.outcome == "counterexample":
                outcome, prefix = "counterexample", r.prefix
                break
            if r.outcome == "indeterminate":
                outcome = "indeterminate"
                frontier.extend(r.frontier)
        pruned = [p for r in results for p in r.pruned_samples][:16]
        result = _SubtreeResult(outcome, nodes, prefix=prefix, frontier=frontier if outcome == "indeterminate" else [])
        result.pruned_samples = pruned
    else:
        result = _run_dfs(search, start, budget, started)

    certificate = SearchCertificate(
        n=n, target=target, outcome=result.outcome, nodes_explored=result.nodes,
        wall_time=time.monotonic() - started, frontier=result.frontier,
        heuristics=heuristics, pruned_samples=result.pruned_samples,
    )
    if result.outcome == "counterexample":
        order, parent = result.prefix
        system = build_system(
            search.space, order, {order[k]: order[parent[k]] for k in range(1, len(order))}
        )
        certificate.system = system
        certificate.achieved = max(lip_constants(system))
    if result.outcome == "indeterminate":
        logger.warning("circle search n=%d stopped by its budget after %d nodes", n, result.nodes)
    logger.info("circle search n=%d target=%s: %s after %d nodes", n, target.describe(), result.outcome, result.nodes)
    return certificate


def prefix_forces_target(n: int, target: Target, order: Sequence[int], parent: Sequence[int]) -> bool:
    """Re-evaluate a partial system from scratch: True when it cannot be completed below target"""
    return _Search(n, target).from_prefix(tuple(order), tuple(parent)) is None


@dataclass
class HeuristicResult:
    system: RetractionSystem
    achieved: Fraction
    strategy: str


# circles up to this size get the search-driven descent, larger ones the image greedy
_DESCENT_MAX_N = 24


def _circle_distances(n: int) -> List[List[int]]:
    """Integer distances of C_n^0, rim points numbered 1..n and the centre 0"""
    D = [[n] * (n + 1) for _ in range(n + 1)]
    D[0][0] = 0
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            gap = abs(a - b)
            D[a][b] = min(gap, n - gap)
    return D


class _ImagePlan:
    """A system on C_n^0 grown one point at a time, tracked through the image
    of every rim point under the latest retraction.

    image[y] is the last placed point of y's chain. Placing z hangs it under
    image[z]; unplaced points sharing that image may be routed through z, and
    no other image can change. While every rim chain runs through x_1 the
    latest retraction has Lip equal to the largest distance between images of
    neighbouring rim points, and at least 1.
    """

    def __init__(self, n: int):
        self.n = n
        self.D = _circle_distances(n)
        self.image = [0] + [1] * n
        self.order = [0, 1]
        self.parent: Dict[int, int] = {1: 0}
        self.unplaced = set(range(2, n + 1))
        self.worst = 1

    def routed(self, z: int) -> List[int]:
        """Unplaced points sharing z's image that lie strictly closer to z"""
        D, q = self.D, self.image[z]
        return sorted(y for y in self.unplaced if y != z and self.image[y] == q and D[y][z] < D[y][q])

    def lip_after(self, z: int, moved: Sequence[int]) -> int:
        image = list(self.image)
        image[z] = z
        for y in moved:
            image[y] = z
        n, D = self.n, self.D
        return max([1] + [D[image[y]][image[y % n + 1]] for y in range(1, n + 1)])

    def place(self, z: int, moved: Sequence[int]):
        self.worst = max(self.worst, self.lip_after(z, moved))
        self.parent[z] = self.image[z]
        self.order.append(z)
        self.unplaced.discard(z)
        self.image[z] = z
        for y in moved:
            self.image[y] = z


def _peel_plan(n: int, strategy: str) -> _ImagePlan:
    """Fixed rim order, each point routing the nearer part of its parent's fiber"""
    if strategy == "peel-one-arc":
        rim = list(range(2, n + 1))
    else:
        rim, left, right = [], 2, n
        while left <= right:
            rim.append(left)
            left += 1
            if left <= right:
                rim.append(right)
                right -= 1
    plan = _ImagePlan(n)
    for z in rim:
        plan.place(z, plan.routed(z))
    return plan


def _image_greedy_plan(n: int) -> _ImagePlan:
    """Next point is the one keeping the latest retraction's Lip smallest"""
    plan = _ImagePlan(n)
    while plan.unplaced:
        best = None
        for z in sorted(plan.unplaced):
            moved = plan.routed(z)
            key = (plan.lip_after(z, moved), plan.D[z][plan.image[z]], z)
            if best is None or key < best[0]:
                best = (key, z, moved)
        _, z, moved = best
        plan.place(z, moved)
    return plan


def _descent_system(n: int) -> Optional[RetractionSystem]:
    """First integer cap, tried in increasing order, under which the search
    completes a system within a small node budget"""
    budget = Budget(nodes=2 * n, seconds=FREELAB_BUDGET_SECS)
    for cap in range(2, n // 2 + 2):
        cert = certify_circle_lower_bound(n, Target(rational=Fraction(cap)), budget, try_heuristics=False)
        if cert.outcome == "counterexample":
            logger.debug("descent on C_%d completed under cap %d", n, cap)
            return cert.system
    return None


def _circle_plan(n: int, strategy: str) -> Tuple[List[int], Dict[int, int]]:
    """(order, parent) on C_n^0 as point indices, rim points numbered 1..n"""
    if strategy in ("peel-one-arc", "peel-balanced"):
        plan = _peel_plan(n, strategy)
        return plan.order, plan.parent
    if strategy != "greedy-min-lip":
        raise SearchError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    plan = _image_greedy_plan(n)
    if n <= _DESCENT_MAX_N:
        system = _descent_system(n)
        if system is not None and max(lip_constants(system)) <= plan.worst:
            return list(system.order), {p: system.parent_point(p) for p in system.order[1:]}
    return plan.order, plan.parent


def heuristic_circle_system(n: int, strategy: str = "greedy-min-lip") -> HeuristicResult:
    if n < 3:
        raise SearchError(f"circle heuristics need n >= 3, got {n}")
    order, parent = _circle_plan(n, strategy)
    system = build_system(build_circle(n), order, parent)
    achieved = max(lip_constants(system))
    logger.debug("heuristic %s on C_%d achieves %s", strategy, n, achieved)
    return HeuristicResult(system=system, achieved=achieved, strategy=strategy)


def union_heuristic_system(k_max: int, strategy: str = "greedy-min-lip") -> RetractionSystem:
    """Circle heuristics run per circle, circles taken in increasing size"""
    space = build_circle_union(k_max)
    order = [space.base_index]
    parent: Dict[int, int] = {}
    for level in range(1, k_max + 1):
        circle_order, circle_parent = _circle_plan(4 ** level, strategy)

        def lift(point: int) -> int:
            return space.base_index if point == 0 else space.index(union_label(level, point))

        for point in circle_order[1:]:
            order.append(lift(point))
            parent[lift(point)] = lift(circle_parent[point])
    return build_system(space, order, parent)


@dataclass
class RestrictionReport:
    level: int
    circle_size: int
    first_position: int
    escaped: bool
    escape: Optional[Tuple[int, int]]
    lip: Fraction
    bound: float
    holds: bool
    restricted: Optional[RetractionSystem] = None


def restrict_to_circle(system: RetractionSystem, level: int) -> RestrictionReport:
    """Either some phi_j, j past the circle's first point, moves a rim point of
    C_{4^k} off that circle (then Lip phi_j >= 4^k), or the retractions at the
    circle's positions restrict to a system on C_{4^k}^0."""
    space = system.space
    if space.kind != "union":
        raise SearchError("restriction needs a circle-union space")
    levels = circle_levels(space)
    rim = [x for x in range(space.size) if levels[x] == level]
    if not rim:
        raise SearchError(f"no circle at level {level}")
    n = 4 ** level
    on_circle = set(rim)
    positions = sorted(system.position[x] for x in rim)
    first = positions[0]
    table = system.phi_table
    for j in range(first, system.N + 1):
        for x in rim:
            if int(table[j, x]) not in on_circle:
                lip = lip_constant(system, j)
                return RestrictionReport(
                    level=level, circle_size=n, first_position=first, escaped=True,
                    escape=(j, x), lip=lip, bound=float(n), holds=lip >= n,
                )
    indices = [space.base_index] + sorted(rim, key=lambda x: space.rim_index[x])
    local = {x: k for k, x in enumerate(indices)}
    circle = subspace(space, indices)
    order = [0] + [local[system.order[p]] for p in positions]
    rows = [[0] * len(indices)]
    for p in positions:
        rows.append([local[int(table[p, x])] for x in indices])
    restricted = system_from_phi_table(circle, order, np.array(rows))
    lip = max(lip_constants(restricted))
    bound = theorem32_bound(n)
    holds = Target(radicand=bound.radicand).reached_by(lip)
    return RestrictionReport(
        level=level, circle_size=n, first_position=first, escaped=False, escape=None,
        lip=lip, bound=bound.value, holds=holds, restricted=restricted,
    )
