# -*- coding: utf-8 -*-
"""
Banach covers of an ambient space and the B-integral

A cover is a registry of members, each an ordered Banach space sitting inside
the ambient coordinates, closed under a join rule. Three families are
supported: ordered subspaces of a directed space, principal ideals E_u of a
coordinate lattice, and Köthe spaces L_{ρ_w} over an atomic measure.
Registries are partial; only the members constructed or registered so far exist.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from config import Config
from models.bochner import bochner_integral
from models.lp import ProgramBuilder
from models.measure import IntegrableFunction, MeasureSpace
from models.spaces import (
    ConeSpec, NormSpec, OrderedSpace, Vector, constrain_to_cone, line_space, norm, norm_epigraph,
    order_unit_space, sum_space,
)
from utils.errors import (
    ArgumentError, ConstructionError, MismatchError, NotInIdealError, NotInSpaceError, OrderError, SpaceError,
    UncoverableError,
)

logger = logging.getLogger(__name__)

ORDERED_SUBSPACES = 'ordered_subspaces'
PRINCIPAL_IDEALS = 'principal_ideals'
KOETHE_WEIGHTS = 'koethe_weights'
COVER_KINDS = (ORDERED_SUBSPACES, PRINCIPAL_IDEALS, KOETHE_WEIGHTS)


# ==================== FUNCTION NORMS ====================

def _masses(nu) -> np.ndarray:
    masses = nu.weights if isinstance(nu, MeasureSpace) else np.asarray(nu, dtype=float)
    if np.any(masses <= 0):
        raise ArgumentError('measure masses must be positive')
    return masses


def principal_ideal_norm(u, f) -> float:
    """
    Smallest λ with |f| ≤ λ·u

    :raises NotInIdealError: f is nonzero where u vanishes
    """
    u = np.asarray(u, dtype=float)
    f = np.abs(np.asarray(f, dtype=float))
    if u.shape != f.shape:
        raise MismatchError(f'unit of shape {u.shape} and function of shape {f.shape}')
    if np.any(u < 0):
        raise ArgumentError('unit must be nonnegative')
    support = u > 0
    if np.any(f[~support] > Config.TOL_NUM):
        raise NotInIdealError('function is not dominated by a multiple of the unit')
    return float((f[support] / u[support]).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class FunctionNorm:
    """
    Function norm on an atomic measure space

    ``koethe``: ρ_w(f) = Σ |fᵢ|·wᵢ·νᵢ. ``merged``: inf{ρ₁(g) + ρ₂(h) : g, h ≥ 0, g + h ≥ |f|}.
    """

    kind: str
    masses: np.ndarray
    weight: Optional[np.ndarray] = None
    parts: Tuple['FunctionNorm', ...] = ()

    @classmethod
    def koethe(cls, weight, nu) -> 'FunctionNorm':
        weight = np.asarray(weight, dtype=float)
        masses = _masses(nu)
        if weight.shape != masses.shape:
            raise MismatchError(f'{weight.shape[0]} weights for {masses.shape[0]} atoms')
        if np.any(weight <= 0):
            raise ArgumentError('Köthe weights must be strictly positive')
        return cls('koethe', masses, weight)

    @classmethod
    def merged(cls, left: 'FunctionNorm', right: 'FunctionNorm') -> 'FunctionNorm':
        if left.masses.shape != right.masses.shape or not np.array_equal(left.masses, right.masses):
            raise MismatchError('merged function norms must share the measure space')
        return cls('merged', left.masses, parts=(left, right))

    @property
    def effective_weight(self) -> np.ndarray:
        """Pointwise weight of the equivalent Köthe norm."""
        if self.kind == 'koethe':
            return self.weight
        return np.minimum(self.parts[0].effective_weight, self.parts[1].effective_weight)

    def __call__(self, f) -> Union[float, np.ndarray]:
        """Norm of f, or of every row when f is two-dimensional."""
        f = np.asarray(f, dtype=float)
        if f.shape[-1] != self.masses.shape[0]:
            raise MismatchError(f'function on {f.shape[-1]} atoms, norm on {self.masses.shape[0]}')
        values = np.abs(f) @ (self.effective_weight * self.masses)
        return float(values) if f.ndim == 1 else values


def koethe_norm(w, nu, f) -> float:
    return FunctionNorm.koethe(w, nu)(f)


def merged_norm(rho1: FunctionNorm, rho2: FunctionNorm, f) -> float:
    """Closed form Σ |fᵢ|·νᵢ·min(w₁ᵢ, w₂ᵢ)."""
    return FunctionNorm.merged(rho1, rho2)(f)


def merged_norm_grid(rho1: FunctionNorm, rho2: FunctionNorm, f, step: Optional[float] = None,
                     points: int = 11) -> float:
    """
    Brute-force infimum of ρ₁(g) + ρ₂((|f| − g)⁺) over g ∈ Π[0, |fᵢ|]

    Coarse-to-fine: each round searches a product grid with endpoints and
    shrinks the box around the best point until the spacing is below step.
    """
    FunctionNorm.merged(rho1, rho2)
    step = Config.MERGED_GRID_STEP if step is None else step
    target = np.abs(np.asarray(f, dtype=float))
    if points ** target.shape[0] > 10 ** 6:
        raise ArgumentError(f'grid of {points}^{target.shape[0]} points is too large')

    lo, hi = np.zeros_like(target), target.copy()
    best, best_g = float('inf'), lo
    tolerance = step * max(1.0, float(target.max(initial=0.0)))
    while True:
        axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
        G = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, target.shape[0])
        values = rho1(G) + rho2(np.clip(target - G, 0.0, None))
        index = int(np.argmin(values))
        if values[index] < best:
            best, best_g = float(values[index]), G[index]
        spacing = (hi - lo) / (points - 1)
        if np.all(spacing <= tolerance):
            return best
        lo = np.maximum(0.0, best_g - spacing)
        hi = np.minimum(target, best_g + spacing)


# ==================== COVERS ====================

@dataclass(frozen=True, eq=False)
class Member:
    id: str
    space: OrderedSpace
    unit: Optional[np.ndarray] = None
    weight: Optional[np.ndarray] = None

    def embed(self, z) -> Vector:
        return self.space.from_ambient(z)

    def lift(self, x: Vector) -> np.ndarray:
        return self.space.to_ambient(x)

    def to_dict(self) -> dict:
        data = {'id': self.id, 'dim': self.space.dim}
        if self.unit is not None:
            data['unit'] = self.unit.tolist()
        if self.weight is not None:
            data['weight'] = self.weight.tolist()
        if self.space.basis is not None:
            data['basis'] = self.space.basis.tolist()
        return data


@dataclass(frozen=True)
class CoverIntegral:
    value: Vector
    member_id: str
    join_id: str
    checks: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {'value': self.value.tolist(), 'member': self.member_id, 'join': self.join_id, 'checks': self.checks}


class Cover:
    """
    Registry of members of one cover family over an ambient space

    Registration is serialized by a lock; members() returns a snapshot.
    """

    def __init__(self, kind: str, ambient: OrderedSpace, measure: Optional[MeasureSpace] = None,
                 reference: Optional[np.ndarray] = None, delta: Optional[float] = None):
        if kind not in COVER_KINDS:
            raise ArgumentError(f'unknown cover kind {kind!r}')
        self.kind = kind
        self.ambient = ambient
        self.measure = measure
        self.reference = reference
        self.delta = Config.IDEAL_DELTA if delta is None else delta
        self._members: Dict[str, Member] = {}
        self._keys: Dict[bytes, str] = {}
        self._lock = threading.Lock()

    @classmethod
    def ordered_subspaces(cls, ambient: OrderedSpace) -> 'Cover':
        if not ambient.directed:
            raise UncoverableError(f'ambient space {ambient.id!r} is not directed')
        return cls(ORDERED_SUBSPACES, ambient)

    @classmethod
    def principal_ideals(cls, dim: int, delta: Optional[float] = None) -> 'Cover':
        ambient = OrderedSpace(f'R{dim}', ConeSpec.orthant(dim), NormSpec.sup())
        return cls(PRINCIPAL_IDEALS, ambient, delta=delta)

    @classmethod
    def koethe_weights(cls, measure: MeasureSpace, ratio: Optional[float] = None) -> 'Cover':
        """Köthe cover with reference summable weight uᵢ = ratioⁱ (i from 0)."""
        ratio = Config.KOETHE_REFERENCE_RATIO if ratio is None else ratio
        if not 0 < ratio < 1:
            raise ArgumentError(f'reference ratio must lie in (0, 1), got {ratio}')
        dim = len(measure)
        ambient = OrderedSpace(f'M{dim}', ConeSpec.orthant(dim), NormSpec.sup())
        return cls(KOETHE_WEIGHTS, ambient, measure=measure, reference=ratio ** np.arange(dim, dtype=float))

    # -------------------- registry --------------------

    def members(self) -> Tuple[Member, ...]:
        with self._lock:
            return tuple(self._members.values())

    def member(self, member_id: str) -> Member:
        with self._lock:
            try:
                return self._members[member_id]
            except KeyError:
                raise ArgumentError(f'{member_id!r} is not a member of the cover') from None

    def _register(self, key: bytes, build) -> str:
        with self._lock:
            if key in self._keys:
                return self._keys[key]
            member = build(f'{self._prefix}{len(self._members) + 1}')
            self._members[member.id] = member
            self._keys[key] = member.id
        logger.info('cover %s: registered member %s (dim %d)', self.kind, member.id, member.space.dim)
        return member.id

    @property
    def _prefix(self) -> str:
        return {ORDERED_SUBSPACES: 'D', PRINCIPAL_IDEALS: 'E', KOETHE_WEIGHTS: 'L'}[self.kind]

    def register(self, item) -> str:
        """Register a space (subspace covers), a unit (principal ideals) or a weight (Köthe)."""
        if self.kind == ORDERED_SUBSPACES:
            return self.register_space(item)
        if self.kind == PRINCIPAL_IDEALS:
            return self.register_unit(item)
        return self.register_weight(item)

    def register_space(self, space: OrderedSpace) -> str:
        """Register an ordered subspace given by its ambient embedding."""
        if self.kind != ORDERED_SUBSPACES:
            raise ArgumentError('only subspace covers take explicit spaces')
        basis = np.eye(space.dim) if space.basis is None else space.basis
        if basis.shape[0] != self.ambient.dim:
            raise MismatchError(f'member embeds into dimension {basis.shape[0]}, ambient is {self.ambient.dim}')
        return self._register(b'space:' + space.id.encode(), lambda _: Member(space.id, space))

    def register_unit(self, u) -> str:
        """Register E_u; coordinates where u vanishes lie outside the ideal."""
        if self.kind != PRINCIPAL_IDEALS:
            raise ArgumentError('only principal-ideal covers take units')
        u = np.asarray(u, dtype=float)
        if u.shape != (self.ambient.dim,) or np.any(u < 0) or not np.any(u > 0):
            raise ArgumentError('unit must be a nonzero positive vector of the ambient dimension')

        def build(member_id):
            support = np.flatnonzero(u > 0)
            basis = None if support.size == u.size else np.eye(u.size)[:, support]
            space = OrderedSpace(member_id, ConeSpec.orthant(support.size), NormSpec.order_unit(u[support]),
                                 basis=basis)
            return Member(member_id, space, unit=u)

        return self._register(u.tobytes(), build)

    def register_weight(self, w) -> str:
        """Register L_{ρ_w}."""
        if self.kind != KOETHE_WEIGHTS:
            raise ArgumentError('only Köthe covers take weights')
        w = np.asarray(w, dtype=float)
        rho = FunctionNorm.koethe(w, self.measure)

        def build(member_id):
            space = OrderedSpace(member_id, ConeSpec.orthant(w.size), NormSpec.weighted_l1(w * rho.masses))
            return Member(member_id, space, weight=w)

        return self._register(w.tobytes(), build)

    def default_member(self) -> str:
        """Member assigned to the zero function."""
        if self.kind == PRINCIPAL_IDEALS:
            return self.register_unit(np.ones(self.ambient.dim))
        if self.kind == KOETHE_WEIGHTS:
            return self.register_weight(self.reference)
        a = _common_dominator(self.ambient, list(np.eye(self.ambient.dim)))
        return self._register_line(a, [])

    def _register_line(self, a: np.ndarray, xs: List[np.ndarray]) -> str:
        key = b'line:' + a.tobytes() + b''.join(x.tobytes() for x in xs)

        def build(member_id):
            if len(xs) == 1:
                space = line_space(a, xs[0], self.ambient.cone, space_id=member_id)
            else:
                space = order_unit_space(a, xs, self.ambient.cone, space_id=member_id)
            return Member(member_id, space)

        return self._register(key, build)


def _values(cover: Cover, f) -> np.ndarray:
    if isinstance(f, IntegrableFunction):
        if f.carrier.id != cover.ambient.id:
            raise MismatchError(f'function carried by {f.carrier.id!r}, cover ambient is {cover.ambient.id!r}')
        return np.asarray(f.values)
    values = np.atleast_2d(np.asarray(f.coords if isinstance(f, Vector) else f, dtype=float))
    if values.shape[1] != cover.ambient.dim:
        raise MismatchError(f'values of length {values.shape[1]}, ambient dimension {cover.ambient.dim}')
    return values


def _common_dominator(space: OrderedSpace, xs: List[np.ndarray]) -> np.ndarray:
    """Minimal-norm a ∈ D⁺ with −a ⪯ x ⪯ a for every x."""
    builder = ProgramBuilder()
    a = builder.variables(space.dim)
    constrain_to_cone(builder, space.cone, [(a, 1.0)], np.zeros(space.dim))
    for x in xs:
        constrain_to_cone(builder, space.cone, [(a, 1.0)], -x)
        constrain_to_cone(builder, space.cone, [(a, 1.0)], x)
    t = norm_epigraph(builder, space, [(a, 1.0)], np.zeros(space.dim))
    builder.minimize([(t, 1.0)])
    solution = builder.solve()
    if not solution.ok:
        raise UncoverableError(f'values have no common dominator in {space.id!r}')
    return solution.x[a]


def _contains(member: Member, values: np.ndarray) -> bool:
    try:
        for row in values:
            member.embed(row)
    except NotInSpaceError:
        return False
    return True


def assign_member(cover: Cover, f) -> str:
    """
    Member of the cover holding every value of f, registered if needed

    :param f: IntegrableFunction on the ambient space, a Vector, or raw values (one row per value)
    :return: member id
    """
    values = _values(cover, f)
    nonzero = [row for row in values if np.any(np.abs(row) > Config.TOL_NUM)]
    if not nonzero:
        return cover.default_member()

    if cover.kind == PRINCIPAL_IDEALS:
        return cover.register_unit(np.abs(values).max(axis=0) + cover.delta)
    if cover.kind == KOETHE_WEIGHTS:
        return cover.register_weight(cover.reference / (np.abs(values).max(axis=0) + 1.0))

    for member in cover.members():
        if _contains(member, values):
            return member.id
    distinct = list({row.tobytes(): row for row in nonzero}.values())
    a = _common_dominator(cover.ambient, distinct)
    try:
        return cover._register_line(a, distinct)
    except (OrderError, SpaceError) as exc:
        raise UncoverableError(f'values are not order bounded: {exc.message}') from exc


def _embedding(member: Member) -> np.ndarray:
    return np.eye(member.space.dim) if member.space.basis is None else member.space.basis


def _check_inclusion(cover: Cover, member: Member, joined: Member):
    """∥x∥_join ≤ ∥x∥_member on the member's generators."""
    for coords in np.eye(member.space.dim):
        x = member.space.vector(coords)
        inner = norm(joined.space, joined.embed(member.lift(x)))
        outer = norm(member.space, x)
        if inner > outer + Config.TOL_NUM * max(1.0, outer):
            logger.error('inclusion of %s into %s expands norm %.9g > %.9g', member.id, joined.id, inner, outer)
            raise ConstructionError(f'inclusion of {member.id} into {joined.id} is not contractive',
                                    inner=inner, outer=outer)


def join(cover: Cover, first: str, second: str) -> str:
    """Member containing both with contractive inclusions."""
    left, right = cover.member(first), cover.member(second)
    if first == second:
        return first
    if cover.kind == PRINCIPAL_IDEALS:
        joined_id = cover.register_unit(left.unit + right.unit)
    elif cover.kind == KOETHE_WEIGHTS:
        joined_id = cover.register_weight(np.minimum(left.weight, right.weight))
    else:
        key_id = f'{first}+{second}'
        try:
            joined_id = cover.member(key_id).id
        except ArgumentError:
            space = sum_space(left.space, right.space, left_map=_embedding(left), right_map=_embedding(right),
                              ambient_cone=cover.ambient.cone, space_id=key_id)
            joined_id = cover.register_space(space)

    joined = cover.member(joined_id)
    for member in (left, right):
        _check_inclusion(cover, member, joined)
    return joined_id


def _integrate_in(cover: Cover, member: Member, f: IntegrableFunction) -> np.ndarray:
    try:
        rows = np.array([member.embed(row).coords for row in f.values])
    except NotInSpaceError as exc:
        raise UncoverableError(f'values of the function are not in member {member.id}') from exc
    lifted = IntegrableFunction(f.space, member.space, rows, f.tail_norm_bound)
    return member.lift(bochner_integral(lifted))


def u_integral(cover: Cover, f: IntegrableFunction, member_id: Optional[str] = None,
               alternative_id: Optional[str] = None) -> CoverIntegral:
    """
    Bochner integral of f inside a covering member, checked against a second member

    The comparison member is join(member, alternative), the alternative being
    the cover's default member unless given.
    """
    member = cover.member(member_id or assign_member(cover, f))
    alternative = alternative_id or cover.default_member()
    joined = cover.member(join(cover, member.id, alternative))

    first = _integrate_in(cover, member, f)
    second = _integrate_in(cover, joined, f)
    deviation = float(np.abs(first - second).max(initial=0.0))
    tol = Config.TOL_NUM * max(1.0, float(np.abs(first).max(initial=0.0)))
    checks = [{
        'name': 'member_independent',
        'passed': deviation <= tol,
        'detail': f'{member.id} vs {joined.id}: deviation {deviation:.3e}',
    }]
    if deviation > tol:
        logger.error('cover integral differs between %s and %s by %.3e', member.id, joined.id, deviation)
        raise ConstructionError('B-integral depends on the covering member', deviation=deviation)
    return CoverIntegral(cover.ambient.vector(first), member.id, joined.id, checks)
