"""
Closed convex target sets with exact Euclidean projection, distance and membership.
"""

import itertools
import logging
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from Common.constants import (
    DYKSTRA_MAX_SWEEPS, DYKSTRA_TOLERANCE, MAX_VERTEX_DIMENSION, MEMBERSHIP_TOLERANCE
)
from Common.errors import ConvergenceError, DimensionError, UnboundedSetError
from Services.Solvers.solver_stats import record_dykstra_sweeps

logger = logging.getLogger(__name__)

Halfspaces = Tuple[np.ndarray, np.ndarray]


def _vector(values: Sequence[float], name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != 1 or array.size == 0:
        raise DimensionError(f"{name} must be a non-empty vector")
    array.flags.writeable = False
    return array


def _num(value: float) -> str:
    return repr(float(value))


class TargetSet(ABC):
    """Base class for closed convex target sets in R^d"""

    @property
    @abstractmethod
    def dim(self) -> int:
        pass

    @abstractmethod
    def _project(self, v: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def to_config(self) -> Dict:
        """Nested tagged record (variant name + numeric parameters)"""
        pass

    def project(self, v: Sequence[float]) -> np.ndarray:
        return self._project(self._check(v))

    def distance(self, v: Sequence[float]) -> float:
        v = self._check(v)
        return float(np.linalg.norm(v - self._project(v)))

    def contains(self, v: Sequence[float], tol: float = 0.0) -> bool:
        return self.distance(v) <= tol

    def bounding_box(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        return None

    def halfspaces(self) -> Optional[Halfspaces]:
        """Rows (a, b) with a.v <= b describing the set, when it is a small polyhedron"""
        return None

    def vertices(self) -> np.ndarray:
        """Vertices of a bounded polytope, one per row"""
        box = self.bounding_box()
        if box is None or not (np.all(np.isfinite(box[0])) and np.all(np.isfinite(box[1]))):
            raise UnboundedSetError(f"{type(self).__name__} is unbounded and has no vertex list")
        description = self.halfspaces()
        if description is None:
            raise DimensionError(f"{type(self).__name__} has no small halfspace description")
        return _enumerate_vertices(*description, self.dim)

    def _check(self, v: Sequence[float]) -> np.ndarray:
        array = np.asarray(v, dtype=float)
        if array.shape != (self.dim,):
            raise DimensionError(f"{type(self).__name__} lives in R^{self.dim}, got shape {array.shape}")
        return array


class Orthant(TargetSet):
    """[0, inf)^d"""

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionError("Orthant dimension must be >= 1")
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    def _project(self, v: np.ndarray) -> np.ndarray:
        return np.maximum(v, 0.0)

    def halfspaces(self) -> Halfspaces:
        return -np.eye(self._dim), np.zeros(self._dim)

    def to_config(self) -> Dict:
        return {"type": "orthant", "dim": self._dim}

    def __repr__(self) -> str:
        return f"Orthant({self._dim})"


class WeightedL1Ball(TargetSet):
    """{v : sum_i w_i |v_i| <= r} with w_i > 0"""

    def __init__(self, weights: Sequence[float], radius: float):
        self.weights = _vector(weights, "weights")
        if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
            raise DimensionError("WeightedL1Ball weights must be strictly positive and finite")
        if radius < 0 or not np.isfinite(radius):
            raise DimensionError("WeightedL1Ball radius must be finite and >= 0")
        self.radius = float(radius)

    @classmethod
    def unit(cls, dim: int) -> "WeightedL1Ball":
        return cls(np.ones(dim), 1.0)

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def _project(self, v: np.ndarray) -> np.ndarray:
        if self.radius == 0.0:
            return np.zeros_like(v)
        magnitudes = np.abs(v)
        if np.dot(self.weights, magnitudes) <= self.radius:
            return v.copy()
        # soft threshold |v_i| - lambda w_i; search lambda over sorted breakpoints |v_i|/w_i
        breakpoints = magnitudes / self.weights
        order = np.argsort(-breakpoints, kind="stable")
        sorted_breakpoints = breakpoints[order]
        numerators = np.cumsum((self.weights * magnitudes)[order]) - self.radius
        denominators = np.cumsum((self.weights ** 2)[order])
        lambdas = numerators / denominators
        next_breakpoints = np.append(sorted_breakpoints[1:], 0.0)
        valid = lambdas >= next_breakpoints
        k = int(np.argmax(valid)) if valid.any() else len(lambdas) - 1
        threshold = max(lambdas[k], 0.0)
        return np.sign(v) * np.maximum(magnitudes - threshold * self.weights, 0.0)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        extent = self.radius / self.weights
        return -extent, extent

    def vertices(self) -> np.ndarray:
        if self.radius == 0.0:
            return np.zeros((1, self.dim))
        extent = np.diag(self.radius / self.weights)
        return np.vstack([extent, -extent])

    def halfspaces(self) -> Optional[Halfspaces]:
        if self.dim > MAX_VERTEX_DIMENSION // 2 + 2:
            return None
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=self.dim)))
        return signs * self.weights, np.full(signs.shape[0], self.radius)

    def to_config(self) -> Dict:
        return {"type": "weighted_l1_ball", "weights": [_num(w) for w in self.weights],
                "radius": _num(self.radius)}

    def __repr__(self) -> str:
        return f"WeightedL1Ball(weights={self.weights.tolist()}, radius={self.radius})"


class WeightedSlab(TargetSet):
    """{v : |<w, v>| <= delta}"""

    def __init__(self, normal: Sequence[float], half_width: float):
        self.normal = _vector(normal, "normal")
        if not np.all(np.isfinite(self.normal)):
            raise DimensionError("WeightedSlab normal must be finite")
        if half_width < 0 or not np.isfinite(half_width):
            raise DimensionError("WeightedSlab half-width must be finite and >= 0")
        self.half_width = float(half_width)
        self._norm_squared = float(np.dot(self.normal, self.normal))

    @property
    def dim(self) -> int:
        return int(self.normal.shape[0])

    def _project(self, v: np.ndarray) -> np.ndarray:
        if self._norm_squared == 0.0:
            return v.copy()
        level = float(np.dot(self.normal, v))
        if abs(level) <= self.half_width:
            return v.copy()
        excess = level - np.sign(level) * self.half_width
        return v - (excess / self._norm_squared) * self.normal

    def halfspaces(self) -> Halfspaces:
        return np.vstack([self.normal, -self.normal]), np.full(2, self.half_width)

    def to_config(self) -> Dict:
        return {"type": "weighted_slab", "normal": [_num(w) for w in self.normal],
                "half_width": _num(self.half_width)}

    def __repr__(self) -> str:
        return f"WeightedSlab(normal={self.normal.tolist()}, half_width={self.half_width})"


class Box(TargetSet):
    """Coordinatewise bounds lower <= v <= upper (infinite bounds allowed)"""

    def __init__(self, lower: Sequence[float], upper: Sequence[float]):
        self.lower = _vector(lower, "lower")
        self.upper = _vector(upper, "upper")
        if self.lower.shape != self.upper.shape:
            raise DimensionError("Box bounds must have the same length")
        if np.any(self.lower > self.upper):
            raise DimensionError("Box is empty: some lower bound exceeds its upper bound")

    @classmethod
    def unit(cls, dim: int) -> "Box":
        return cls(np.zeros(dim), np.ones(dim))

    @property
    def dim(self) -> int:
        return int(self.lower.shape[0])

    def _project(self, v: np.ndarray) -> np.ndarray:
        return np.clip(v, self.lower, self.upper)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.lower.copy(), self.upper.copy()

    def halfspaces(self) -> Halfspaces:
        identity = np.eye(self.dim)
        rows = np.vstack([identity, -identity])
        bounds = np.concatenate([self.upper, -self.lower])
        finite = np.isfinite(bounds)
        return rows[finite], bounds[finite]

    def vertices(self) -> np.ndarray:
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise UnboundedSetError("Box with infinite bounds has no vertex list")
        if self.dim > MAX_VERTEX_DIMENSION:
            raise DimensionError(f"Box of dimension {self.dim} has too many vertices to list")
        corners = itertools.product(*zip(self.lower, self.upper))
        return np.unique(np.array(list(corners)), axis=0)

    def to_config(self) -> Dict:
        return {"type": "box", "lower": [_num(x) for x in self.lower],
                "upper": [_num(x) for x in self.upper]}

    def __repr__(self) -> str:
        return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


class Product(TargetSet):
    """Cartesian product; coordinates split consecutively across the factors"""

    def __init__(self, factors: Sequence[TargetSet], split: Optional[Sequence[int]] = None):
        self.factors = tuple(factors)
        if not self.factors:
            raise DimensionError("Product needs at least one factor")
        dims = [factor.dim for factor in self.factors]
        if split is not None and list(split) != dims:
            raise DimensionError(f"Declared split {list(split)} does not match factor dimensions {dims}")
        self.split = tuple(dims)
        self._offsets = np.cumsum((0,) + self.split)

    @property
    def dim(self) -> int:
        return int(self._offsets[-1])

    def blocks(self, v: np.ndarray) -> List[np.ndarray]:
        return [v[start:stop] for start, stop in zip(self._offsets[:-1], self._offsets[1:])]

    def _project(self, v: np.ndarray) -> np.ndarray:
        return np.concatenate([factor.project(block) for factor, block in zip(self.factors, self.blocks(v))])

    def distance(self, v: Sequence[float]) -> float:
        v = self._check(v)
        squared = sum(factor.distance(block) ** 2 for factor, block in zip(self.factors, self.blocks(v)))
        return float(np.sqrt(squared))

    def bounding_box(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        boxes = [factor.bounding_box() for factor in self.factors]
        if any(box is None for box in boxes):
            return None
        return np.concatenate([box[0] for box in boxes]), np.concatenate([box[1] for box in boxes])

    def halfspaces(self) -> Optional[Halfspaces]:
        descriptions = [factor.halfspaces() for factor in self.factors]
        if any(description is None for description in descriptions):
            return None
        rows, bounds = [], []
        for (start, stop), (a, b) in zip(zip(self._offsets[:-1], self._offsets[1:]), descriptions):
            padded = np.zeros((a.shape[0], self.dim))
            padded[:, start:stop] = a
            rows.append(padded)
            bounds.append(b)
        return np.vstack(rows), np.concatenate(bounds)

    def vertices(self) -> np.ndarray:
        factor_vertices = [factor.vertices() for factor in self.factors]
        count = int(np.prod([len(block) for block in factor_vertices]))
        if count > 100_000:
            raise DimensionError(f"Product has {count} vertices, too many to list")
        return np.array([np.concatenate(combo) for combo in itertools.product(*factor_vertices)])

    def to_config(self) -> Dict:
        return {"type": "product", "split": list(self.split),
                "factors": [factor.to_config() for factor in self.factors]}

    def __repr__(self) -> str:
        return f"Product({list(self.factors)})"


class Intersection(TargetSet):
    """Intersection of convex sets; projection by Dykstra's alternating projections"""

    def __init__(self, members: Sequence[TargetSet], max_sweeps: int = DYKSTRA_MAX_SWEEPS,
                 tol: float = DYKSTRA_TOLERANCE):
        self.members = tuple(members)
        if not self.members:
            raise DimensionError("Intersection needs at least one member")
        dims = {member.dim for member in self.members}
        if len(dims) != 1:
            raise DimensionError(f"Intersection members have different dimensions {sorted(dims)}")
        self.max_sweeps = max_sweeps
        self.tol = tol

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def _project(self, v: np.ndarray) -> np.ndarray:
        if len(self.members) == 1:
            return self.members[0].project(v)
        x = v.copy()
        increments = [np.zeros_like(v) for _ in self.members]
        for sweep in range(1, self.max_sweeps + 1):
            previous = x
            change = 0.0
            for i, member in enumerate(self.members):
                shifted = x + increments[i]
                x = member.project(shifted)
                updated = shifted - x
                change = max(change, float(np.linalg.norm(updated - increments[i])))
                increments[i] = updated
            # x can stall for a sweep while the increments still move
            if (float(np.linalg.norm(x - previous)) < self.tol and change < self.tol
                    and max(member.distance(x) for member in self.members) <= self.tol):
                record_dykstra_sweeps(sweep)
                return x
        record_dykstra_sweeps(self.max_sweeps)
        residual = max(member.distance(x) for member in self.members)
        raise ConvergenceError(f"Dykstra projection did not converge after {self.max_sweeps} sweeps", residual)

    def contains(self, v: Sequence[float], tol: float = 0.0) -> bool:
        if tol == 0.0 and all(member.contains(v) for member in self.members):
            return True
        return self.distance(v) <= tol

    def bounding_box(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        boxes = [box for box in (member.bounding_box() for member in self.members) if box is not None]
        if not boxes:
            return None
        lower = np.max([box[0] for box in boxes], axis=0)
        upper = np.min([box[1] for box in boxes], axis=0)
        return lower, upper

    def halfspaces(self) -> Optional[Halfspaces]:
        descriptions = [member.halfspaces() for member in self.members]
        if any(description is None for description in descriptions):
            return None
        return np.vstack([a for a, _ in descriptions]), np.concatenate([b for _, b in descriptions])

    def vertices(self) -> np.ndarray:
        # a member whose vertices all lie in the other members carries the intersection
        for member in self.members:
            try:
                candidates = member.vertices()
            except (UnboundedSetError, DimensionError):
                continue
            others = [other for other in self.members if other is not member]
            if all(other.contains(vertex, MEMBERSHIP_TOLERANCE) for other in others for vertex in candidates):
                return candidates
        return super().vertices()

    def to_config(self) -> Dict:
        return {"type": "intersection", "members": [member.to_config() for member in self.members]}

    def __repr__(self) -> str:
        return f"Intersection({list(self.members)})"


def _enumerate_vertices(rows: np.ndarray, bounds: np.ndarray, dim: int) -> np.ndarray:
    if dim > MAX_VERTEX_DIMENSION:
        raise DimensionError(f"Vertex enumeration in dimension {dim} is not supported")
    vertices = []
    for combo in itertools.combinations(range(rows.shape[0]), dim):
        system = rows[list(combo)]
        if abs(np.linalg.det(system)) < 1e-12:
            continue
        point = np.linalg.solve(system, bounds[list(combo)])
        if np.all(rows @ point <= bounds + MEMBERSHIP_TOLERANCE):
            vertices.append(point)
    if not vertices:
        raise UnboundedSetError("Halfspace description has no vertices")
    return np.unique(np.round(np.array(vertices), 12), axis=0)


def is_subset(inner: TargetSet, outer: TargetSet, tol: float = MEMBERSHIP_TOLERANCE) -> bool:
    """Polytope containment by vertex test, factor by factor for aligned products"""
    if isinstance(inner, Product) and isinstance(outer, Product) and inner.split == outer.split:
        return all(is_subset(a, b, tol) for a, b in zip(inner.factors, outer.factors))
    return all(outer.contains(vertex, tol) for vertex in inner.vertices())


def hausdorff_onesided(A: TargetSet, B: TargetSet, n_samples: int, rng: np.random.Generator,
                       box: Optional[Tuple[Sequence[float], Sequence[float]]] = None) -> float:
    """
    One-sided Hausdorff distance sup over A of the distance to B.

    The distance to a convex B is convex, so on a listable polytope A the sup is
    attained at a vertex and the value is exact. Otherwise it is a lower
    estimate from points drawn uniformly in a slightly expanded bounding box and
    projected onto A.

    Raises:
        UnboundedSetError: If A has no bounding box and none is supplied
    """
    if A.dim != B.dim:
        raise DimensionError(f"Sets live in R^{A.dim} and R^{B.dim}")
    if box is None:
        box = A.bounding_box()
    if box is None:
        raise UnboundedSetError(f"{type(A).__name__} is unbounded; supply a sampling box")
    lower, upper = (np.asarray(bound, dtype=float) for bound in box)
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise UnboundedSetError("Sampling box must be finite")
    margin = 0.1 * (upper - lower)
    points = rng.uniform(lower - margin, upper + margin, size=(n_samples, A.dim))
    best = 0.0
    for point in points:
        best = max(best, B.distance(A.project(point)))
    try:
        for vertex in A.vertices():
            best = max(best, B.distance(vertex))
    except (UnboundedSetError, DimensionError):
        pass
    return best
