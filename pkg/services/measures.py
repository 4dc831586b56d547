"""Elements of F(M), functions in Lip_0(M) and linear operators on F(M)"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from services.errors import MeasureError
from services.exact_lp import fraction_rank
from services.spaces import PointedMetricSpace
from utils.constants import FREELAB_FLOAT_TOL


def _coerce(space: PointedMetricSpace, value):
    if space.exact:
        if isinstance(value, (float, np.floating)):
            raise MeasureError("float coefficient in an exact space")
        return Fraction(value)
    return float(value)


@dataclass(frozen=True, eq=False)
class Measure:
    """Finitely supported sum of Diracs; the base point carries no coordinate"""

    space: PointedMetricSpace
    coeffs: Mapping[int, object]

    def __post_init__(self):
        clean = {}
        for point, value in self.coeffs.items():
            if not 0 <= point < self.space.size:
                raise MeasureError(f"point index {point} out of range")
            if point == self.space.base_index:
                continue
            value = _coerce(self.space, value)
            if value != 0:
                clean[point] = clean.get(point, 0) + value
        object.__setattr__(self, "coeffs", {p: v for p, v in sorted(clean.items()) if v != 0})

    @classmethod
    def zero(cls, space: PointedMetricSpace) -> "Measure":
        return cls(space, {})

    @classmethod
    def dirac(cls, space: PointedMetricSpace, point: int) -> "Measure":
        return cls(space, {point: 1})

    @classmethod
    def molecule(cls, space: PointedMetricSpace, x: int, y: int) -> "Measure":
        """delta_x - delta_y (not normalised)"""
        return cls(space, {x: 1}) - cls(space, {y: 1})

    @classmethod
    def from_vector(cls, space: PointedMetricSpace, vector: Sequence) -> "Measure":
        if len(vector) != space.dimension:
            raise MeasureError(f"vector length {len(vector)} != {space.dimension}")
        return cls(space, {p: vector[c] for c, p in enumerate(space.non_base) if vector[c] != 0})

    @classmethod
    def from_pairs(cls, space: PointedMetricSpace, pairs: Iterable[Tuple[str, object]]) -> "Measure":
        coeffs: Dict[int, object] = {}
        for label, value in pairs:
            point = space.index(label)
            coeffs[point] = coeffs.get(point, 0) + _coerce(space, value)
        return cls(space, coeffs)

    def to_vector(self) -> np.ndarray:
        vector = zero_vector(self.space.dimension, self.space.exact)
        for point, value in self.coeffs.items():
            vector[self.space.coord_of[point]] = value
        return vector

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(self.coeffs)

    @property
    def total_mass(self):
        return sum(self.coeffs.values(), self.space.zero())

    def is_zero(self) -> bool:
        return not self.coeffs

    def _check(self, other: "Measure"):
        if other.space is not self.space:
            raise MeasureError("measures live on different spaces")

    def __add__(self, other: "Measure") -> "Measure":
        self._check(other)
        merged = dict(self.coeffs)
        for point, value in other.coeffs.items():
            merged[point] = merged.get(point, 0) + value
        return Measure(self.space, merged)

    def __neg__(self) -> "Measure":
        return Measure(self.space, {p: -v for p, v in self.coeffs.items()})

    def __sub__(self, other: "Measure") -> "Measure":
        return self + (-other)

    def __mul__(self, scalar) -> "Measure":
        scalar = _coerce(self.space, scalar)
        return Measure(self.space, {p: scalar * v for p, v in self.coeffs.items()})

    __rmul__ = __mul__

    def equals(self, other: "Measure", tol: float = FREELAB_FLOAT_TOL) -> bool:
        diff = self - other
        if self.space.exact:
            return diff.is_zero()
        return all(abs(v) <= tol for v in diff.coeffs.values())

    def labelled(self) -> Dict[str, object]:
        return {self.space.label(p): v for p, v in self.coeffs.items()}


@dataclass(frozen=True, eq=False)
class LipschitzFunction:
    """Function on the points of a space vanishing at the base"""

    space: PointedMetricSpace
    values: Tuple

    def __post_init__(self):
        if len(self.values) != self.space.size:
            raise MeasureError("function needs one value per point")
        values = tuple(_coerce(self.space, v) for v in self.values)
        if values[self.space.base_index] != 0:
            raise MeasureError("function must vanish at the base point")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, space: PointedMetricSpace, values: Mapping[int, object]) -> "LipschitzFunction":
        return cls(space, tuple(values.get(i, 0) for i in range(space.size)))

    def __call__(self, point: int):
        return self.values[point]

    def pair(self, measure: Measure):
        """<f, mu> = sum of a_x f(x)"""
        return sum((value * self.values[p] for p, value in measure.coeffs.items()), self.space.zero())

    def lipschitz_constant(self):
        best = self.space.zero()
        size = self.space.size
        for x in range(size):
            for y in range(x + 1, size):
                ratio = abs(self.values[x] - self.values[y]) / self.space.dist[x, y]
                if ratio > best:
                    best = ratio
        return best

    def is_feasible(self, tol: float = FREELAB_FLOAT_TOL) -> bool:
        """Whether the function is 1-Lipschitz"""
        slack = 0 if self.space.exact else tol
        return self.lipschitz_constant() <= 1 + slack


def zero_vector(n: int, exact: bool) -> np.ndarray:
    if exact:
        vector = np.empty(n, dtype=object)
        vector.fill(Fraction(0))
        return vector
    return np.zeros(n)


def zero_matrix(n: int, exact: bool) -> np.ndarray:
    if exact:
        matrix = np.empty((n, n), dtype=object)
        matrix.fill(Fraction(0))
        return matrix
    return np.zeros((n, n))


def identity_matrix(n: int, exact: bool) -> np.ndarray:
    matrix = zero_matrix(n, exact)
    for i in range(n):
        matrix[i, i] = Fraction(1) if exact else 1.0
    return matrix


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Matrix over the non-base Dirac coordinates; column c is T(delta)"""

    space: PointedMetricSpace
    matrix: np.ndarray

    def __post_init__(self):
        n = self.space.dimension
        if self.matrix.shape != (n, n):
            raise MeasureError(f"operator matrix must be {n}x{n}, got {self.matrix.shape}")

    @classmethod
    def identity(cls, space: PointedMetricSpace) -> "LinearOperator":
        return cls(space, identity_matrix(space.dimension, space.exact))

    @classmethod
    def zero(cls, space: PointedMetricSpace) -> "LinearOperator":
        return cls(space, zero_matrix(space.dimension, space.exact))

    @classmethod
    def from_columns(cls, space: PointedMetricSpace, columns: Mapping[int, Measure]) -> "LinearOperator":
        """Operator sending delta_x to columns[x]; missing points go to 0"""
        matrix = zero_matrix(space.dimension, space.exact)
        for point, image in columns.items():
            if point == space.base_index:
                continue
            matrix[:, space.coord_of[point]] = image.to_vector()
        return cls(space, matrix)

    def column(self, point: int) -> np.ndarray:
        """T(delta_point) as a coordinate vector; the base maps to 0"""
        if point == self.space.base_index:
            return zero_vector(self.space.dimension, self.space.exact)
        return self.matrix[:, self.space.coord_of[point]]

    def image(self, point: int) -> Measure:
        return Measure.from_vector(self.space, self.column(point))

    def apply(self, measure: Measure) -> Measure:
        return Measure.from_vector(self.space, self.matrix.dot(measure.to_vector()))

    def adjoint_apply(self, f: LipschitzFunction) -> LipschitzFunction:
        """(T* f)(x) = <f, T delta_x>"""
        values = np.array([f(p) for p in self.space.non_base], dtype=self.matrix.dtype)
        image = values.dot(self.matrix)
        mapping = {p: image[c] for c, p in enumerate(self.space.non_base)}
        return LipschitzFunction.from_mapping(self.space, mapping)

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.space, self.matrix.dot(other.matrix))

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "LinearOperator":
        return LinearOperator(self.space, -self.matrix)

    def scaled(self, scalar) -> "LinearOperator":
        return LinearOperator(self.space, self.matrix * _coerce(self.space, scalar))

    def equals(self, other: "LinearOperator", tol: float = FREELAB_FLOAT_TOL) -> bool:
        diff = self.matrix - other.matrix
        if self.space.exact:
            return not any(v != 0 for v in diff.flat)
        return bool(np.all(np.abs(diff) <= tol))

    def rank(self, tol: Optional[float] = None) -> int:
        if self.space.exact:
            return fraction_rank(self.matrix.tolist())
        return int(np.linalg.matrix_rank(self.matrix.astype(float), tol=tol))
