# -*- coding: utf-8 -*-
"""
Finite-dimensional ordered Banach spaces

A space is a cone descriptor plus a norm descriptor on ℝ^dim. Cones are given
by inequality systems (orthant, transformed orthant, polyhedral) or as images
of other cones; norms are weighted ℓ¹, sup, order-unit, or the infimum norms
of sums and images. Every norm is LP-representable, which is what the
dominator searches in ``models.cones`` rely on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from models.lp import LpStatus, ProgramBuilder, coefficient_block
from utils.errors import (
    ArgumentError, CapabilityError, CarrierError, NotInSpaceError, OrderError,
    SolverError, SpaceError,
)

logger = logging.getLogger(__name__)


def _array(values, name: str, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise ArgumentError(f'{name} must be {ndim}-dimensional, got shape {array.shape}')
    if not np.all(np.isfinite(array)):
        raise ArgumentError(f'{name} has non-finite entries')
    array.setflags(write=False)
    return array


# ==================== CONES ====================

@dataclass(frozen=True, eq=False)
class ConeSpec:
    """
    Closed convex cone in ℝ^dim

    kind ``orthant``: x ≥ 0; ``transformed_orthant``: T·x ≥ 0 with T invertible;
    ``polyhedral``: A·x ≥ 0; ``image``: {Σ Mᵢ·xᵢ : xᵢ ∈ Cᵢ} for parts (Cᵢ, Mᵢ).
    """

    kind: str
    dim: int
    matrix: Optional[np.ndarray] = None
    parts: Tuple[Tuple['ConeSpec', np.ndarray], ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise SpaceError(f'cone dimension must be positive, got {self.dim}')
        if self.kind == 'transformed_orthant':
            if self.matrix.shape != (self.dim, self.dim):
                raise SpaceError('transformed orthant needs a square matrix')
            if abs(np.linalg.det(self.matrix)) <= Config.TOL_LP:
                raise SpaceError('transformed orthant matrix is singular')
        elif self.kind == 'polyhedral':
            if self.matrix.shape[1] != self.dim:
                raise SpaceError(f'polyhedral matrix has {self.matrix.shape[1]} columns, expected {self.dim}')
        elif self.kind == 'image':
            if not self.parts:
                raise SpaceError('image cone without parts')
            for cone, mapping in self.parts:
                if mapping.shape != (self.dim, cone.dim):
                    raise SpaceError(f'image part map has shape {mapping.shape}, expected {(self.dim, cone.dim)}')
        elif self.kind != 'orthant':
            raise SpaceError(f'unknown cone kind {self.kind!r}')

    @classmethod
    def orthant(cls, dim: int) -> 'ConeSpec':
        return cls('orthant', int(dim))

    @classmethod
    def transformed(cls, T) -> 'ConeSpec':
        T = _array(T, 'T', 2)
        return cls('transformed_orthant', T.shape[1], matrix=T)

    @classmethod
    def polyhedral(cls, A) -> 'ConeSpec':
        A = _array(A, 'A', 2)
        return cls('polyhedral', A.shape[1], matrix=A)

    @classmethod
    def image(cls, parts: Sequence[Tuple['ConeSpec', object]]) -> 'ConeSpec':
        frozen = tuple((cone, _array(mapping, 'image map', 2)) for cone, mapping in parts)
        return cls('image', frozen[0][1].shape[0], parts=frozen)

    def inequalities(self) -> Optional[np.ndarray]:
        """A with cone = {x : A·x ≥ 0}; None for image cones."""
        if self.kind == 'orthant':
            return np.eye(self.dim)
        if self.kind == 'image':
            return None
        return self.matrix

    @property
    def simplicial(self) -> bool:
        if self.kind in ('orthant', 'transformed_orthant'):
            return True
        if self.kind == 'polyhedral' and self.matrix.shape[0] == self.dim:
            return abs(np.linalg.det(self.matrix)) > Config.TOL_LP
        return False


def cone_generators(cone: ConeSpec) -> np.ndarray:
    """Extreme rays of a simplicial cone, as columns."""
    if not cone.simplicial:
        raise CapabilityError(f'generators are only available for simplicial cones, not {cone.kind}')
    return np.linalg.inv(cone.inequalities())


def constrain_to_cone(builder: ProgramBuilder, cone: ConeSpec, terms, const):
    """
    Add constraints forcing Σ M·v + const into the cone

    :param terms: list of (variable block, coefficient) pairs
    :param const: constant part of the expression
    """
    const = np.asarray(const, dtype=float)
    terms = [(block, coefficient_block(coef, cone.dim, block.stop - block.start)) for block, coef in terms]
    A = cone.inequalities()
    if A is not None:
        if A.shape[0]:
            builder.add_le([(block, -A @ coef) for block, coef in terms], A @ const)
        return
    lifted = []
    for part, mapping in cone.parts:
        inner = builder.variables(part.dim)
        constrain_to_cone(builder, part, [(inner, 1.0)], np.zeros(part.dim))
        lifted.append((inner, -mapping))
    builder.add_eq(terms + lifted, -const)


def in_cone(cone: ConeSpec, coords: np.ndarray, tol: Optional[float] = None) -> bool:
    tol = Config.TOL_CONE if tol is None else tol
    slack = tol * max(1.0, float(np.abs(coords).max(initial=0.0)))
    A = cone.inequalities()
    if A is not None:
        return bool(A.shape[0] == 0 or np.all(A @ coords >= -slack))
    builder = ProgramBuilder()
    constrain_to_cone(builder, cone, [], coords)
    if builder.size == 0:
        return True
    return builder.solve().ok


# ==================== NORMS ====================

@dataclass(frozen=True, eq=False)
class NormSpec:
    kind: str
    weights: Optional[np.ndarray] = None
    unit: Optional[np.ndarray] = None
    left: Optional['OrderedSpace'] = None
    right: Optional['OrderedSpace'] = None
    left_map: Optional[np.ndarray] = None
    right_map: Optional[np.ndarray] = None
    source: Optional['OrderedSpace'] = None
    map: Optional[np.ndarray] = None
    # ambient coordinates of the intrinsic basis (inf_sum and quotient)
    basis: Optional[np.ndarray] = None

    @classmethod
    def weighted_l1(cls, weights) -> 'NormSpec':
        return cls('weighted_l1', weights=_array(weights, 'weights', 1))

    @classmethod
    def sup(cls) -> 'NormSpec':
        return cls('sup')

    @classmethod
    def order_unit(cls, unit) -> 'NormSpec':
        return cls('order_unit', unit=_array(unit, 'unit', 1))

    @classmethod
    def inf_sum(cls, left, right, left_map, right_map, basis) -> 'NormSpec':
        return cls('inf_sum', left=left, right=right,
                   left_map=_array(left_map, 'left_map', 2),
                   right_map=_array(right_map, 'right_map', 2),
                   basis=_array(basis, 'basis', 2))

    @classmethod
    def quotient(cls, source, T, basis) -> 'NormSpec':
        return cls('quotient', source=source, map=_array(T, 'T', 2), basis=_array(basis, 'basis', 2))

    @property
    def lattice_compatible(self) -> bool:
        return self.kind in ('weighted_l1', 'sup')


def _order_unit_value(cone: ConeSpec, unit: np.ndarray, coords: np.ndarray) -> float:
    """Smallest s ≥ 0 with −s·unit ⪯ coords ⪯ s·unit; inf if none exists."""
    A = cone.inequalities()
    if A is not None:
        scaled_unit = A @ unit
        scaled_x = np.abs(A @ coords)
        tol = Config.TOL_CONE
        value = 0.0
        for height, reach in zip(scaled_unit, scaled_x):
            if height > tol:
                value = max(value, reach / height)
            elif reach > tol * max(1.0, float(np.abs(coords).max(initial=0.0))):
                return float('inf')
        return value

    builder = ProgramBuilder()
    s = builder.variables(1, lower=0.0)
    column = unit.reshape(-1, 1)
    constrain_to_cone(builder, cone, [(s, column)], -coords)
    constrain_to_cone(builder, cone, [(s, column)], coords)
    builder.minimize([(s, 1.0)])
    solution = builder.solve()
    return solution.objective if solution.ok else float('inf')


def norm_epigraph(builder: ProgramBuilder, space: 'OrderedSpace', terms, const) -> slice:
    """
    Add a variable t with t ≥ ∥Σ M·v + const∥ to the program

    Minimizing t (or any increasing function of it) makes the bound tight.

    :return: the one-variable block of t
    """
    dim = space.dim
    const = np.asarray(const, dtype=float)
    terms = [(block, coefficient_block(coef, dim, block.stop - block.start)) for block, coef in terms]
    negated = [(block, -coef) for block, coef in terms]
    spec = space.norm

    if spec.kind == 'weighted_l1':
        modulus = builder.variables(dim)
        builder.add_le(terms + [(modulus, -1.0)], -const)
        builder.add_le(negated + [(modulus, -1.0)], const)
        t = builder.variables(1)
        builder.add_le([(modulus, spec.weights), (t, -1.0)], 0.0)
        return t

    if spec.kind == 'sup':
        t = builder.variables(1)
        column = -np.ones((dim, 1))
        builder.add_le(terms + [(t, column)], -const)
        builder.add_le(negated + [(t, column)], const)
        return t

    if spec.kind == 'order_unit':
        t = builder.variables(1, lower=0.0)
        column = spec.unit.reshape(dim, 1)
        constrain_to_cone(builder, space.cone, [(t, column)] + negated, -const)
        constrain_to_cone(builder, space.cone, [(t, column)] + terms, const)
        return t

    if spec.kind == 'inf_sum':
        left = builder.variables(spec.left.dim)
        right = builder.variables(spec.right.dim)
        t_left = norm_epigraph(builder, spec.left, [(left, 1.0)], np.zeros(spec.left.dim))
        t_right = norm_epigraph(builder, spec.right, [(right, 1.0)], np.zeros(spec.right.dim))
        V = spec.basis
        builder.add_eq([(left, spec.left_map), (right, spec.right_map)]
                       + [(block, -V @ coef) for block, coef in terms], V @ const)
        t = builder.variables(1)
        builder.add_le([(t_left, 1.0), (t_right, 1.0), (t, -1.0)], 0.0)
        return t

    if spec.kind == 'quotient':
        fiber = builder.variables(spec.source.dim)
        t = norm_epigraph(builder, spec.source, [(fiber, 1.0)], np.zeros(spec.source.dim))
        V = spec.basis
        builder.add_eq([(fiber, spec.map)] + [(block, -V @ coef) for block, coef in terms], V @ const)
        return t

    raise CapabilityError(f'norm kind {spec.kind!r} is not LP-representable')


# ==================== SPACES AND VECTORS ====================

@dataclass(frozen=True, eq=False)
class Vector:
    space: str
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).ravel()
        coords.setflags(write=False)
        object.__setattr__(self, 'coords', coords)

    def _same_space(self, other: 'Vector'):
        if other.space != self.space or other.coords.shape != self.coords.shape:
            raise CarrierError(f'vectors of {self.space!r} and {other.space!r} cannot be combined')

    def __add__(self, other: 'Vector') -> 'Vector':
        self._same_space(other)
        return Vector(self.space, self.coords + other.coords)

    def __sub__(self, other: 'Vector') -> 'Vector':
        self._same_space(other)
        return Vector(self.space, self.coords - other.coords)

    def __mul__(self, scalar: float) -> 'Vector':
        return Vector(self.space, float(scalar) * self.coords)

    __rmul__ = __mul__

    def __neg__(self) -> 'Vector':
        return Vector(self.space, -self.coords)

    def abs(self) -> 'Vector':
        return Vector(self.space, np.abs(self.coords))

    def tolist(self) -> List[float]:
        return self.coords.tolist()


@dataclass(frozen=True, eq=False)
class OrderedSpace:
    """
    Ordered Banach space (ℝ^dim, cone, norm)

    ``basis`` maps intrinsic coordinates to the ambient coordinates of a
    constructed subspace; ``pushed_cone`` is T(D⁺) for image spaces.
    Spaces compare equal by id.
    """

    id: str
    cone: ConeSpec
    norm: NormSpec
    require_directed: bool = True
    basis: Optional[np.ndarray] = None
    pushed_cone: Optional[ConeSpec] = None
    directed: bool = field(init=False, default=False)

    def __post_init__(self):
        self._validate_norm()
        # simplicial cones span the space
        directed = self.cone.simplicial or all(
            _decompose(self.cone, unit) is not None for unit in np.eye(self.dim))
        object.__setattr__(self, 'directed', directed)
        if not directed and self.require_directed:
            raise SpaceError(f'cone of space {self.id!r} is not generating')
        logger.debug('space %s: dim %d, cone %s, norm %s, directed %s',
                     self.id, self.dim, self.cone.kind, self.norm.kind, directed)

    def _validate_norm(self):
        spec = self.norm
        if spec.kind == 'weighted_l1':
            if spec.weights.shape != (self.dim,):
                raise SpaceError(f'{spec.weights.shape[0]} weights for dimension {self.dim}')
            if np.any(spec.weights <= 0):
                raise SpaceError('weighted ℓ¹ weights must be strictly positive')
        elif spec.kind == 'order_unit':
            if spec.unit.shape != (self.dim,):
                raise SpaceError(f'order unit has length {spec.unit.shape[0]}, expected {self.dim}')
            for unit in np.eye(self.dim):
                if not np.isfinite(_order_unit_value(self.cone, spec.unit, unit)):
                    raise SpaceError('element is not an order unit of the cone', unit=spec.unit.tolist())
        elif spec.kind in ('inf_sum', 'quotient'):
            if spec.basis.shape[1] != self.dim:
                raise SpaceError(f'basis has {spec.basis.shape[1]} columns, expected {self.dim}')
        elif spec.kind != 'sup':
            raise SpaceError(f'unknown norm kind {spec.kind!r}')
        if self.basis is not None and self.basis.shape[1] != self.dim:
            raise SpaceError(f'embedding has {self.basis.shape[1]} columns, expected {self.dim}')

    def __eq__(self, other):
        return isinstance(other, OrderedSpace) and other.id == self.id

    def __hash__(self):
        return hash(self.id)

    @property
    def dim(self) -> int:
        return self.cone.dim

    @property
    def is_lattice(self) -> bool:
        return self.cone.kind == 'orthant' and self.norm.lattice_compatible

    def vector(self, coords) -> Vector:
        coords = np.asarray(coords, dtype=float).ravel()
        if coords.shape[0] != self.dim:
            raise CarrierError(f'{coords.shape[0]} coordinates for space {self.id!r} of dimension {self.dim}')
        return Vector(self.id, coords)

    def zero(self) -> Vector:
        return Vector(self.id, np.zeros(self.dim))

    def to_ambient(self, x: Vector) -> np.ndarray:
        check_carrier(self, x)
        return x.coords.copy() if self.basis is None else self.basis @ x.coords

    def from_ambient(self, z) -> Vector:
        """Intrinsic coordinates of an ambient vector; not-in-space error off the span."""
        z = np.asarray(z, dtype=float).ravel()
        if self.basis is None:
            return self.vector(z)
        if z.shape[0] != self.basis.shape[0]:
            raise CarrierError(f'ambient vector of length {z.shape[0]}, expected {self.basis.shape[0]}')
        coords, *_ = np.linalg.lstsq(self.basis, z, rcond=None)
        if np.abs(self.basis @ coords - z).max(initial=0.0) > Config.TOL_NUM * max(1.0, np.abs(z).max(initial=0.0)):
            raise NotInSpaceError(f'vector is not in the span of space {self.id!r}')
        return Vector(self.id, coords)


def check_carrier(space: OrderedSpace, *vectors: Vector):
    for x in vectors:
        if x.space != space.id:
            raise CarrierError(f'vector carried by {x.space!r}, expected {space.id!r}')
        if x.coords.shape[0] != space.dim:
            raise CarrierError(f'vector of length {x.coords.shape[0]} in space of dimension {space.dim}')


def _decompose(cone: ConeSpec, coords: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    builder = ProgramBuilder()
    p = builder.variables(cone.dim)
    q = builder.variables(cone.dim)
    constrain_to_cone(builder, cone, [(p, 1.0)], np.zeros(cone.dim))
    constrain_to_cone(builder, cone, [(q, 1.0)], np.zeros(cone.dim))
    builder.add_eq([(p, 1.0), (q, -1.0)], coords)
    solution = builder.solve()
    if not solution.ok:
        return None
    return solution.x[p], solution.x[q]


# ==================== OPERATIONS ====================

def cone_contains(space: OrderedSpace, x: Vector, tol: Optional[float] = None) -> bool:
    check_carrier(space, x)
    return in_cone(space.cone, x.coords, tol)


def leq(space: OrderedSpace, x: Vector, y: Vector, tol: Optional[float] = None) -> bool:
    check_carrier(space, x, y)
    return in_cone(space.cone, y.coords - x.coords, tol)


def norm(space: OrderedSpace, x: Vector) -> float:
    """
    Norm of x in its space

    :param space: carrier space
    :param x: vector carried by space
    :return: the norm; infimum norms are solved by LP and attained
    """
    check_carrier(space, x)
    spec = space.norm
    if spec.kind == 'weighted_l1':
        return float(spec.weights @ np.abs(x.coords))
    if spec.kind == 'sup':
        return float(np.abs(x.coords).max(initial=0.0))
    if spec.kind == 'order_unit':
        value = _order_unit_value(space.cone, spec.unit, x.coords)
        if not np.isfinite(value):
            raise NotInSpaceError(f'vector is not order-bounded by the unit of {space.id!r}')
        return value
    return lp_norm(space, x.coords)


def lp_norm(space: OrderedSpace, coords: np.ndarray) -> float:
    builder = ProgramBuilder()
    t = norm_epigraph(builder, space, [], np.asarray(coords, dtype=float))
    builder.minimize([(t, 1.0)])
    solution = builder.solve()
    if solution.status is LpStatus.INFEASIBLE:
        raise NotInSpaceError(f'vector lies outside space {space.id!r}')
    if not solution.ok:
        raise SolverError(f'norm program of {space.id!r} is unbounded')
    return max(float(solution.objective), 0.0)


def dual_generators(space: OrderedSpace) -> np.ndarray:
    """Rows αᵢ with x ⪯ y iff αᵢ(x) ≤ αᵢ(y) for all i (simplicial cones only)."""
    if not space.cone.simplicial:
        raise CapabilityError(f'dual generators need a simplicial cone; {space.id!r} has {space.cone.kind}')
    return np.array(space.cone.inequalities(), dtype=float)


def generating_witness(space: OrderedSpace, x: Vector) -> Tuple[Vector, Vector]:
    """Positive p, q with x = p − q."""
    check_carrier(space, x)
    pair = _decompose(space.cone, x.coords)
    if pair is None:
        raise SpaceError(f'no positive decomposition in {space.id!r}; the cone is not generating')
    return space.vector(pair[0]), space.vector(pair[1])


def _span_basis(columns: np.ndarray) -> np.ndarray:
    """Identity when the columns span everything, else a sign-normalized orthonormal basis."""
    rank = np.linalg.matrix_rank(columns, tol=Config.TOL_NUM)
    ambient = columns.shape[0]
    if rank == ambient:
        return np.eye(ambient)
    U, _, _ = np.linalg.svd(columns)
    V = U[:, :rank]
    signs = np.sign(V[np.argmax(np.abs(V), axis=0), np.arange(rank)])
    return V * signs


def _restrict_cone(cone: ConeSpec, V: np.ndarray) -> ConeSpec:
    if V.shape[0] == V.shape[1] and np.allclose(V, np.eye(V.shape[0])):
        return cone
    A = cone.inequalities()
    if A is None:
        raise CapabilityError('cannot restrict an image cone to a subspace')
    return ConeSpec.polyhedral(A @ V)


def sum_space(D1: OrderedSpace, D2: OrderedSpace, left_map=None, right_map=None,
              ambient_cone: Optional[ConeSpec] = None, space_id: Optional[str] = None) -> OrderedSpace:
    """
    Space on D1 + D2 with the infimum norm over decompositions

    :param left_map: embedding of D1 into the ambient coordinates (D1.basis by default)
    :param right_map: embedding of D2 (D2.basis by default)
    :param ambient_cone: inherit the order from this cone instead of D1⁺ + D2⁺
    """
    E1 = D1.basis if left_map is None else np.asarray(left_map, dtype=float)
    E2 = D2.basis if right_map is None else np.asarray(right_map, dtype=float)
    if E1 is None or E2 is None:
        raise ArgumentError('sum space needs embeddings of both factors')
    if E1.shape[0] != E2.shape[0]:
        raise CarrierError(f'inconsistent ambient dimensions {E1.shape[0]} and {E2.shape[0]}')
    if E1.shape[1] != D1.dim or E2.shape[1] != D2.dim:
        raise CarrierError('embedding does not match the factor dimension')
    for E, factor in ((E1, D1), (E2, D2)):
        if np.linalg.matrix_rank(E, tol=Config.TOL_NUM) != factor.dim:
            raise ArgumentError(f'embedding of {factor.id!r} is not injective')

    V = _span_basis(np.hstack([E1, E2]))
    if ambient_cone is not None:
        if ambient_cone.dim != E1.shape[0]:
            raise CarrierError('ambient cone dimension differs from the embeddings')
        cone = _restrict_cone(ambient_cone, V)
    else:
        cone = ConeSpec.image([(D1.cone, V.T @ E1), (D2.cone, V.T @ E2)])

    space = OrderedSpace(
        id=space_id or f'{D1.id}+{D2.id}',
        cone=cone,
        norm=NormSpec.inf_sum(D1, D2, E1, E2, V),
        require_directed=False,
        basis=V,
    )
    logger.info('sum space %s: dim %d in ambient %d, directed %s', space.id, space.dim, V.shape[0], space.directed)
    return space


def order_unit_space(a, xs: Sequence, ambient_cone: ConeSpec, space_id: Optional[str] = None) -> OrderedSpace:
    """
    Order-unit space on span{a, x₁, …, x_k} with the order of ambient_cone

    Requires −a ⪯ xᵢ ⪯ a; intrinsic coordinates put a first.
    """
    a = np.asarray(a.coords if isinstance(a, Vector) else a, dtype=float).ravel()
    xs = [np.asarray(x.coords if isinstance(x, Vector) else x, dtype=float).ravel() for x in xs]
    if a.shape[0] != ambient_cone.dim or any(x.shape[0] != ambient_cone.dim for x in xs):
        raise CarrierError('vectors do not match the ambient cone dimension')
    if not np.any(np.abs(a) > Config.TOL_CONE):
        raise OrderError('order unit must be nonzero')
    for x in xs:
        if not (in_cone(ambient_cone, a - x) and in_cone(ambient_cone, a + x)):
            raise OrderError('element is not in the order interval [−a, a]', x=x.tolist())

    columns = [a]
    for x in xs:
        if np.linalg.matrix_rank(np.column_stack(columns + [x]), tol=Config.TOL_NUM) > len(columns):
            columns.append(x)
    V = np.column_stack(columns)
    unit = np.zeros(V.shape[1])
    unit[0] = 1.0

    A = ambient_cone.inequalities()
    if A is None:
        raise CapabilityError('order-unit spaces need an inequality-described ambient cone')
    return OrderedSpace(
        id=space_id or f'line[{len(columns)}]',
        cone=ConeSpec.polyhedral(A @ V),
        norm=NormSpec.order_unit(unit),
        basis=V,
    )


def line_space(a, x, ambient_cone: ConeSpec, space_id: Optional[str] = None) -> OrderedSpace:
    """ℝa + ℝx with the order-unit norm of a."""
    return order_unit_space(a, [x], ambient_cone, space_id=space_id)


def is_order_preserving(T, source: ConeSpec, target: ConeSpec) -> bool:
    T = np.asarray(T, dtype=float)
    if T.shape != (target.dim, source.dim):
        raise CarrierError(f'map of shape {T.shape} between dimensions {source.dim} and {target.dim}')
    if source.simplicial:
        return all(in_cone(target, T @ ray) for ray in cone_generators(source).T)

    A = target.inequalities()
    if A is None:
        raise CapabilityError('order preservation into an image cone is not supported')
    for row in A:
        builder = ProgramBuilder()
        x = builder.variables(source.dim, lower=-1.0, upper=1.0)
        constrain_to_cone(builder, source, [(x, 1.0)], np.zeros(source.dim))
        builder.minimize([(x, row @ T)])
        solution = builder.solve()
        if solution.ok and solution.objective < -Config.TOL_CONE:
            return False
    return True


def image_space(D: OrderedSpace, T, target_cone: ConeSpec, space_id: Optional[str] = None) -> OrderedSpace:
    """T(D) with the quotient norm inf{∥x∥ : Tx = z} and the target order restricted to T(D)."""
    T = _array(T, 'T', 2)
    if T.shape[1] != D.dim:
        raise CarrierError(f'map has {T.shape[1]} columns, space {D.id!r} has dimension {D.dim}')
    if T.shape[0] != target_cone.dim:
        raise CarrierError(f'map has {T.shape[0]} rows, target cone has dimension {target_cone.dim}')
    if not is_order_preserving(T, D.cone, target_cone):
        raise OrderError('map is not order preserving on the cone generators')

    V = _span_basis(T)
    space = OrderedSpace(
        id=space_id or f'T({D.id})',
        cone=_restrict_cone(target_cone, V),
        norm=NormSpec.quotient(D, T, V),
        basis=V,
        pushed_cone=ConeSpec.image([(D.cone, V.T @ T)]),
    )
    logger.info('image space %s: dim %d', space.id, space.dim)
    return space


def pushed_cone_is_strict(space: OrderedSpace) -> bool:
    """True when T(D⁺) is a strict subcone of the image space's cone."""
    if space.pushed_cone is None:
        raise ArgumentError(f'space {space.id!r} is not an image space')
    rays = cone_generators(space.cone)
    return any(not in_cone(space.pushed_cone, ray) for ray in rays.T)
