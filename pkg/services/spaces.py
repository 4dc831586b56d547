"""Finite pointed metric spaces: generic matrices, circles, circle unions, grid nets"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.errors import MetricError
from utils.constants import FREELAB_FLOAT_TOL, FREELAB_GRID_CAP

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PointedMetricSpace:
    """Finite metric space with a distinguished base point.

    `dist` holds Fractions (object dtype) when `exact`, float64 otherwise.
    Circle metadata (`circle_of`, `rim_index`) is filled for circles and
    circle unions, `coords` for grid nets.
    """

    points: Tuple[str, ...]
    dist: np.ndarray
    base_index: int = 0
    exact: bool = True
    kind: str = "generic"
    circle_of: Optional[Tuple[int, ...]] = None
    rim_index: Optional[Tuple[int, ...]] = None
    coords: Optional[Tuple[Tuple[int, ...], ...]] = None
    params: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.dist.flags.writeable = False

    @property
    def size(self) -> int:
        return len(self.points)

    def d(self, i: int, j: int):
        return self.dist[i, j]

    def index(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise MetricError(f"unknown point label {label!r}") from None

    def label(self, i: int) -> str:
        return self.points[i]

    @cached_property
    def _label_index(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self.points)}

    @cached_property
    def non_base(self) -> Tuple[int, ...]:
        """Point indices carrying a Dirac coordinate (everything but the base)"""
        return tuple(i for i in range(self.size) if i != self.base_index)

    @cached_property
    def coord_of(self) -> Dict[int, int]:
        return {p: c for c, p in enumerate(self.non_base)}

    @property
    def dimension(self) -> int:
        return self.size - 1

    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def scalar(self, value):
        """Coerce a value into this space's arithmetic (Fraction or float)"""
        if self.exact:
            if isinstance(value, float):
                raise MetricError("float value in an exact space")
            return Fraction(value)
        return float(value)

    def is_rim(self, i: int) -> bool:
        return self.circle_of is not None and self.circle_of[i] > 0


class Orientation(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    BOTH = "both"
    NEITHER = "neither"


class Direction(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass
class MetricViolation:
    kind: str
    indices: Tuple[int, ...]
    detail: str


@dataclass
class MetricReport:
    valid: bool
    violations: List[MetricViolation]
    space: Optional[PointedMetricSpace] = None
    labels: Tuple[str, ...] = ()

    def describe(self, labels: Optional[Sequence[str]] = None) -> str:
        if self.valid:
            return "metric valid"
        labels = labels or self.labels
        lines = []
        for v in self.violations:
            names = [labels[i] for i in v.indices] if labels else list(v.indices)
            lines.append(f"{v.kind} at {tuple(names)}: {v.detail}")
        return "; ".join(lines)


def _object_matrix(rows: Sequence[Sequence]) -> np.ndarray:
    n = len(rows)
    matrix = np.empty((n, n), dtype=object)
    for i, row in enumerate(rows):
        for j, value in enumerate(row):
            matrix[i, j] = Fraction(value)
    return matrix


def validate_metric(
    labels: Sequence[str],
    dist: Sequence[Sequence],
    base: int = 0,
    exact: bool = True,
    tol: float = FREELAB_FLOAT_TOL,
) -> MetricReport:
    """Check the metric axioms and report every violating pair or triple.

    Malformed shapes and non-finite entries are precondition failures and
    raise MetricError; axiom violations are collected in the report.
    """
    n = len(labels)
    if len(dist) != n or any(len(row) != n for row in dist):
        raise MetricError(f"distance matrix must be {n}x{n}")
    if len(set(labels)) != n:
        raise MetricError("point labels must be distinct")
    if exact:
        matrix = _object_matrix(dist)
        eps = 0
    else:
        matrix = np.array(dist, dtype=float)
        if not np.all(np.isfinite(matrix)):
            raise MetricError("distance matrix has non-finite entries")
        eps = tol

    violations: List[MetricViolation] = []
    if not 0 <= base < n:
        violations.append(MetricViolation("base", (), f"base index {base} out of range"))
    for i in range(n):
        if abs(matrix[i, i]) > eps:
            violations.append(MetricViolation("diagonal", (i,), f"d = {matrix[i, i]} != 0"))
    for i, j in itertools.combinations(range(n), 2):
        if abs(matrix[i, j] - matrix[j, i]) > eps:
            violations.append(
                MetricViolation("asymmetry", (i, j), f"{matrix[i, j]} != {matrix[j, i]}")
            )
    for i, j in itertools.permutations(range(n), 2):
        if matrix[i, j] <= eps and (i < j or abs(matrix[i, j] - matrix[j, i]) > eps):
            violations.append(
                MetricViolation("separation", (i, j), f"d = {matrix[i, j]} is not positive")
            )
    for j in range(n):
        # d(i, k) > d(i, j) + d(j, k) for all i, k at once
        detour = matrix[:, j][:, None] + matrix[j, :][None, :]
        bad = np.argwhere(matrix - detour > eps)
        for i, k in bad:
            i, k = int(i), int(k)
            if i == j or k == j or i == k:
                continue
            if i > k and abs(matrix[i, k] - matrix[k, i]) <= eps:
                continue
            violations.append(
                MetricViolation(
                    "triangle",
                    (i, j, k),
                    f"d = {matrix[i, k]} > {matrix[i, j]} + {matrix[j, k]}",
                )
            )

    if violations:
        logger.debug("metric rejected with %d violations", len(violations))
        return MetricReport(valid=False, violations=violations, labels=tuple(labels))
    space = PointedMetricSpace(
        points=tuple(labels), dist=matrix, base_index=base, exact=exact
    )
    return MetricReport(valid=True, violations=[], space=space, labels=tuple(labels))


def make_space(labels, dist, base: int = 0, exact: bool = True) -> PointedMetricSpace:
    report = validate_metric(labels, dist, base, exact)
    if not report.valid:
        raise MetricError(report.describe(labels))
    return report.space


def build_circle(n: int) -> PointedMetricSpace:
    """C_n^0: rim x_1..x_n with the cycle metric, centre x_0 at distance n"""
    if n < 3:
        raise MetricError(f"circle needs n >= 3, got {n}")
    size = n + 1
    matrix = np.empty((size, size), dtype=object)
    for k in range(size):
        for l in range(size):
            if k == l:
                matrix[k, l] = Fraction(0)
            elif k == 0 or l == 0:
                matrix[k, l] = Fraction(n)
            else:
                gap = abs(k - l)
                matrix[k, l] = Fraction(min(gap, n - gap))
    return PointedMetricSpace(
        points=tuple(f"x{k}" for k in range(size)),
        dist=matrix,
        base_index=0,
        exact=True,
        kind="circle",
        circle_of=(0,) + (n,) * n,
        rim_index=tuple(range(size)),
        params={"n": n},
    )


def union_label(level: int, rim: int) -> str:
    return f"c{level}_{rim}"


def build_circle_union(k_max: int) -> PointedMetricSpace:
    """Circles C_{4^k}^0, k = 1..k_max, glued at a common centre.

    Points of different circles are at distance max(4^i, 4^j).
    """
    if k_max < 1:
        raise MetricError(f"circle union needs k_max >= 1, got {k_max}")
    labels = ["0"]
    circle_of = [0]
    rim_index = [0]
    for level in range(1, k_max + 1):
        n = 4 ** level
        for rim in range(1, n + 1):
            labels.append(union_label(level, rim))
            circle_of.append(n)
            rim_index.append(rim)
    size = len(labels)
    matrix = np.empty((size, size), dtype=object)
    for a in range(size):
        for b in range(size):
            na, nb = circle_of[a], circle_of[b]
            if a == b:
                value = 0
            elif na == 0 or nb == 0:
                value = max(na, nb)
            elif na != nb:
                value = max(na, nb)
            else:
                gap = abs(rim_index[a] - rim_index[b])
                value = min(gap, na - gap)
            matrix[a, b] = Fraction(value)
    return PointedMetricSpace(
        points=tuple(labels),
        dist=matrix,
        base_index=0,
        exact=True,
        kind="union",
        circle_of=tuple(circle_of),
        rim_index=tuple(rim_index),
        params={"k_max": k_max},
    )


def grid_label(coords: Sequence[int]) -> str:
    return "(" + ",".join(str(c) for c in coords) + ")"


def build_grid_net(m: int, dim: int = 2, cap: int = FREELAB_GRID_CAP) -> PointedMetricSpace:
    """Integer lattice {0..m}^dim with the Euclidean metric, base at the origin"""
    if m < 1 or dim < 2:
        raise MetricError(f"grid needs m >= 1 and dim >= 2, got m={m}, dim={dim}")
    count = (m + 1) ** dim
    if count > cap:
        raise MetricError(f"grid with {count} points exceeds the cap of {cap}")
    coords = list(itertools.product(range(m + 1), repeat=dim))
    array = np.array(coords, dtype=float)
    diff = array[:, None, :] - array[None, :, :]
    matrix = np.sqrt((diff ** 2).sum(axis=2))
    return PointedMetricSpace(
        points=tuple(grid_label(c) for c in coords),
        dist=matrix,
        base_index=0,
        exact=False,
        kind="grid",
        coords=tuple(coords),
        params={"m": m, "dim": dim},
    )


def subspace(space: PointedMetricSpace, indices: Sequence[int]) -> PointedMetricSpace:
    """Restriction of the metric to `indices`, which must contain the base"""
    if space.base_index not in indices:
        raise MetricError("a subspace must contain the base point")
    indices = list(indices)
    matrix = space.dist[np.ix_(indices, indices)].copy()
    return PointedMetricSpace(
        points=tuple(space.points[i] for i in indices),
        dist=matrix,
        base_index=indices.index(space.base_index),
        exact=space.exact,
        kind="subspace",
        circle_of=tuple(space.circle_of[i] for i in indices) if space.circle_of else None,
        rim_index=tuple(space.rim_index[i] for i in indices) if space.rim_index else None,
        coords=tuple(space.coords[i] for i in indices) if space.coords else None,
    )


def net_parameters(space: PointedMetricSpace) -> Tuple[object, Optional[float]]:
    """(separation, density) of the space seen as a net.

    Density is only known for grid nets, where the unit lattice is
    sqrt(dim)/2-dense in the cube.
    """
    off = space.dist[~np.eye(space.size, dtype=bool)]
    alpha = min(off)
    beta = math.sqrt(space.params["dim"]) / 2 if space.kind == "grid" else None
    return alpha, beta


def circle_levels(space: PointedMetricSpace) -> Dict[int, int]:
    """Circle level k of every point (circle C_{4^k}); 0 for the centre"""
    if space.circle_of is None:
        raise MetricError("space has no circle structure")
    levels = {}
    for i, n in enumerate(space.circle_of):
        levels[i] = 0 if n == 0 else round(math.log(n, 4))
    return levels


def orientation(n: int, k: int, l: int) -> Orientation:
    """Where x_l lies relative to x_k on the uncentred circle C_n"""
    if not (1 <= k <= n and 1 <= l <= n):
        raise MetricError(f"rim indices must lie in 1..{n}")
    half = (n + 1) // 2
    if 2 * k > n - 1:
        left = set(range(k - half + 1, k + 1))
        right = set(range(k, n + 1)) | set(range(1, half - (n - k + 1) + 1))
    else:
        left = set(range(1, k + 1)) | set(range(n - half + k + 1, n + 1))
        right = set(range(k, k + half + 1))
    in_left, in_right = l in left, l in right
    if in_left and in_right:
        return Orientation.BOTH
    if in_left:
        return Orientation.LEFT
    if in_right:
        return Orientation.RIGHT
    return Orientation.NEITHER


def directed_distance(n: int, x: int, y: int, direction) -> int:
    """Length of the rim path from x_x to x_y walking left or right"""
    if not (1 <= x <= n and 1 <= y <= n):
        raise MetricError(f"rim indices must lie in 1..{n}")
    if Direction(direction) is Direction.RIGHT:
        return (y - x) % n
    return (x - y) % n
