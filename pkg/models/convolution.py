# -*- coding: utf-8 -*-
"""
Translations and convolution on discrete groups

Groups are either finite (Cayley table) or ℤ observed through a window
[−R, R]. Translation follows (L_x f)(y) = f(x⁻¹y). The weight w built here
puts every translate L_x f into the principal ideal of w, so μ ∗ f can be
computed as a B-integral of x ↦ L_x f and compared with the direct sum.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from config import Config
from models.covers import Cover, principal_ideal_norm, u_integral
from models.measure import IntegrableFunction, MeasureSpace
from utils.errors import ArgumentError, ConstructionError, RangeError

logger = logging.getLogger(__name__)

FINITE = 'finite'
INTEGERS = 'integers'
CHAINS = ('linear', 'dyadic')


# ==================== GROUPS ====================

@dataclass(frozen=True, eq=False)
class Group:
    """
    Discrete group

    Finite groups act on element indices 0..order−1 through the Cayley table.
    For ℤ the compact chain is K₀ = {0} and, for n ≥ 1, K_n = [−n, n]
    (``linear``) or [−2ⁿ⁻¹, 2ⁿ⁻¹] (``dyadic``). Finite groups use K₀ = {e}, K_n = G.
    """

    kind: str
    table: Optional[np.ndarray] = None
    identity: int = 0
    radius: int = 0
    chain: str = 'linear'
    labels: Tuple[str, ...] = ()
    _inverses: Dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind == FINITE:
            self._validate_table()
        elif self.kind == INTEGERS:
            if self.radius < 0:
                raise ArgumentError(f'window radius must be nonnegative, got {self.radius}')
            if self.chain not in CHAINS:
                raise ArgumentError(f'unknown chain {self.chain!r}')
        else:
            raise ArgumentError(f'unknown group kind {self.kind!r}')

    def _validate_table(self):
        table = self.table
        order = table.shape[0]
        if table.shape != (order, order) or np.any(table < 0) or np.any(table >= order):
            raise ArgumentError('Cayley table must be a square table of element indices')
        elements = np.arange(order)
        if not (np.array_equal(table[self.identity], elements) and np.array_equal(table[:, self.identity], elements)):
            raise ArgumentError(f'element {self.identity} is not an identity')
        for x in elements:
            inverse = np.flatnonzero(table[x] == self.identity)
            if inverse.size != 1 or table[inverse[0], x] != self.identity:
                raise ArgumentError(f'element {x} has no two-sided inverse')
            self._inverses[int(x)] = int(inverse[0])

        if order <= 16:
            triples = [(x, y, z) for x in elements for y in elements for z in elements]
        else:
            rng = np.random.default_rng(Config.SEED)
            triples = rng.integers(0, order, size=(4096, 3))
        for x, y, z in triples:
            if table[table[x, y], z] != table[x, table[y, z]]:
                raise ArgumentError(f'Cayley table is not associative at ({x}, {y}, {z})')

    @classmethod
    def cyclic(cls, order: int) -> 'Group':
        elements = np.arange(order)
        return cls(FINITE, table=(elements[:, None] + elements[None, :]) % order)

    @classmethod
    def from_table(cls, table, identity: int = 0, labels: Sequence[str] = ()) -> 'Group':
        return cls(FINITE, table=np.asarray(table, dtype=int), identity=identity, labels=tuple(labels))

    @classmethod
    def integers(cls, radius: int, chain: str = 'linear') -> 'Group':
        return cls(INTEGERS, radius=int(radius), chain=chain)

    @property
    def order(self) -> Optional[int]:
        return self.table.shape[0] if self.kind == FINITE else None

    def elements(self) -> List[int]:
        """All elements of a finite group; the window for ℤ."""
        if self.kind == FINITE:
            return list(range(self.order))
        return list(range(-self.radius, self.radius + 1))

    def contains(self, x: int) -> bool:
        return self.kind == INTEGERS or 0 <= x < self.order

    def require_element(self, x: int):
        if not self.contains(x):
            raise ArgumentError(f'{x} is not an element of the group')

    def op(self, x: int, y: int) -> int:
        if self.kind == INTEGERS:
            return x + y
        self.require_element(x)
        self.require_element(y)
        return int(self.table[x, y])

    def inverse(self, x: int) -> int:
        if self.kind == INTEGERS:
            return -x
        self.require_element(x)
        return self._inverses[x]

    @property
    def neutral(self) -> int:
        return 0 if self.kind == INTEGERS else self.identity

    def chain_bounds(self, n: int) -> Tuple[int, int]:
        """K_n of ℤ as an integer interval."""
        if n <= 0:
            return 0, 0
        half = n if self.chain == 'linear' else 2 ** (n - 1)
        return -half, half

    def chain_index(self, x: int) -> int:
        """[x]: the smallest n ≥ 1 with x ∈ K_n."""
        if self.kind == FINITE:
            return 1
        if self.chain == 'linear':
            return max(1, abs(x))
        n = 1
        while self.chain_bounds(n)[1] < abs(x):
            n += 1
        return n

    def chain_level(self, x: int) -> int:
        """Smallest n ≥ 0 with x ∈ K_n, counting K₀ = {e}."""
        return 0 if x == self.neutral else self.chain_index(x)

    def chain_product_holds(self, levels: Optional[int] = None) -> bool:
        """K_n·K_n ⊆ K_{n+1} for the chain levels reaching the window."""
        if self.kind == FINITE:
            return True
        levels = self.chain_index(self.radius) if levels is None else levels
        for n in range(1, levels + 1):
            lo, hi = self.chain_bounds(n)
            next_lo, next_hi = self.chain_bounds(n + 1)
            if 2 * lo < next_lo or 2 * hi > next_hi:
                return False
        return True

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)


# ==================== FUNCTIONS AND MEASURES ====================

@dataclass(frozen=True, eq=False)
class GroupFunction:
    """
    Real function on a group

    On ℤ the stored values cover offset..offset+len−1. Outside that range f is
    evaluated from an exact polynomial when one is attached; a growth bound
    (c, d) meaning |f(n)| ≤ c·(1+|n|)^d only bounds suprema.
    """

    group: Group
    values: np.ndarray
    offset: int = 0
    polynomial: Optional[Polynomial] = None
    growth: Optional[Tuple[float, int]] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        if not np.all(np.isfinite(values)):
            raise ArgumentError('function values must be finite')
        if self.group.kind == FINITE:
            if values.size != self.group.order:
                raise ArgumentError(f'{values.size} values for a group of order {self.group.order}')
            return
        points = self.points()
        if self.polynomial is not None:
            deviation = np.abs(self.polynomial(points) - values).max(initial=0.0)
            if deviation > Config.TOL_NUM * max(1.0, float(np.abs(values).max(initial=0.0))):
                raise ArgumentError('polynomial does not match the stored values', deviation=float(deviation))
        if self.growth is not None:
            c, d = self.growth
            if np.any(np.abs(values) > c * (1.0 + np.abs(points)) ** d * (1 + Config.TOL_NUM)):
                raise ArgumentError('growth bound is violated by the stored values')

    @classmethod
    def from_values(cls, group: Group, values, offset: Optional[int] = None,
                    growth: Optional[Tuple[float, int]] = None) -> 'GroupFunction':
        if offset is None:
            offset = -group.radius if group.kind == INTEGERS else 0
        return cls(group, values, offset, growth=growth)

    @classmethod
    def from_polynomial(cls, group: Group, coefficients, radius: Optional[int] = None) -> 'GroupFunction':
        """p(n) = Σ cₖ nᵏ stored on [−radius, radius] (the window by default)."""
        if group.kind != INTEGERS:
            raise ArgumentError('polynomial functions live on ℤ')
        radius = group.radius if radius is None else radius
        poly = Polynomial(np.asarray(coefficients, dtype=float))
        points = np.arange(-radius, radius + 1)
        growth = (float(np.abs(poly.coef).sum()), poly.degree())
        return cls(group, poly(points), -radius, polynomial=poly, growth=growth)

    @classmethod
    def indicator(cls, group: Group, elements: Iterable[int]) -> 'GroupFunction':
        support = set(elements)
        return cls.from_values(group, [1.0 if x in support else 0.0 for x in group.elements()])

    def points(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.values.size)

    def can_evaluate(self, y: int) -> bool:
        if self.group.kind == FINITE:
            return self.group.contains(y)
        return self.polynomial is not None or self.offset <= y < self.offset + self.values.size

    def __call__(self, y: int) -> float:
        if self.group.kind == FINITE:
            self.group.require_element(y)
            return float(self.values[y])
        if self.offset <= y < self.offset + self.values.size:
            return float(self.values[y - self.offset])
        if self.polynomial is not None:
            return float(self.polynomial(y))
        raise RangeError(f'f({y}) lies outside the stored range and no polynomial is attached', point=y)

    def on(self, elements: Iterable[int]) -> np.ndarray:
        return np.array([self(y) for y in elements])

    def sup_abs(self, lo: int, hi: int) -> float:
        """sup |f| over the integers lo..hi."""
        if self.group.kind == FINITE:
            return float(np.abs(self.values).max(initial=0.0))
        inside = [n for n in range(lo, hi + 1) if self.can_evaluate(n)]
        best = float(np.abs(self.on(inside)).max(initial=0.0))
        if len(inside) < hi - lo + 1:
            if self.growth is None:
                raise RangeError(f'sup over [{lo}, {hi}] needs values outside the stored range', lo=lo, hi=hi)
            c, d = self.growth
            best = max(best, c * (1.0 + max(abs(lo), abs(hi))) ** d)
        return best

    def to_dict(self) -> dict:
        data = {'values': self.values.tolist()}
        if self.group.kind == INTEGERS:
            data['offset'] = self.offset
        if self.polynomial is not None:
            data['polynomial'] = self.polynomial.coef.tolist()
        return data


@dataclass(frozen=True, eq=False)
class FiniteMeasureOnGroup:
    """Finitely supported measure; zero masses are dropped."""

    group: Group
    masses: Dict[int, float]

    def __post_init__(self):
        cleaned = {}
        for x, mass in self.masses.items():
            x, mass = int(x), float(mass)
            if not np.isfinite(mass) or mass < 0:
                raise ArgumentError(f'mass at {x} must be finite and nonnegative, got {mass}')
            self.group.require_element(x)
            if self.group.kind == INTEGERS and abs(x) > self.group.radius:
                raise RangeError(f'support point {x} lies outside the window [−{self.group.radius}, {self.group.radius}]')
            if mass > 0:
                cleaned[x] = cleaned.get(x, 0.0) + mass
        object.__setattr__(self, 'masses', cleaned)

    @classmethod
    def delta(cls, group: Group, x: int, mass: float = 1.0) -> 'FiniteMeasureOnGroup':
        return cls(group, {x: mass})

    @property
    def support(self) -> List[int]:
        return sorted(self.masses)

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses.values()))

    def as_measure_space(self) -> MeasureSpace:
        return MeasureSpace.finite((self.group.label(x), self.masses[x]) for x in self.support)


# ==================== TRANSLATION ====================

def translate(f: GroupFunction, x: int) -> GroupFunction:
    """(L_x f)(y) = f(x⁻¹y)."""
    group = f.group
    if group.kind == FINITE:
        inverse = group.inverse(x)
        return GroupFunction(group, [f(group.op(inverse, y)) for y in group.elements()])
    polynomial = None if f.polynomial is None else f.polynomial(Polynomial([-float(x), 1.0]))
    growth = None
    if f.growth is not None:
        c, d = f.growth
        growth = (c * (1.0 + abs(x)) ** d, d)
    return GroupFunction(group, f.values, f.offset + x, polynomial, growth)


# ==================== WEIGHT ====================

@dataclass
class WeightResult:
    """
    Weight w on the window with the bounds it certifies

    u(x) = 1 + sup|f(K_{[x]+1})|, v(x) = [x]·u(x), αₙ = n·(1 + sup|f(K_{n+1})|)
    and w(y) = Σ_{n=0}^{level(y)} α_{n+1}.
    """

    group: Group
    elements: List[int]
    w: np.ndarray
    u: np.ndarray
    v: np.ndarray
    alphas: List[float]
    checked_pairs: int = 0

    def unit_bound(self, x: int) -> float:
        return float(self.u[self.elements.index(x)])

    def as_function(self) -> GroupFunction:
        return GroupFunction.from_values(self.group, self.w, offset=self.elements[0])

    def to_dict(self) -> dict:
        return {
            'elements': self.elements,
            'w': self.w.tolist(),
            'u': self.u.tolist(),
            'v': self.v.tolist(),
            'alphas': self.alphas,
            'checked_pairs': self.checked_pairs,
            'chain': self.group.chain if self.group.kind == INTEGERS else 'stable',
            'chain_product_holds': self.group.chain_product_holds(),
        }


def _sup_on_chain(f: GroupFunction, n: int) -> float:
    lo, hi = f.group.chain_bounds(n)
    return f.sup_abs(lo, hi)


def weight_builder(f: GroupFunction) -> WeightResult:
    """
    Weight w with |L_x f| ≤ u(x)·w and w ≥ v on the window

    Both inequalities are verified on every pair of window elements where
    f(x⁻¹y) can be evaluated.

    :raises RangeError: a needed supremum lies beyond the stored range without growth data
    :raises ConstructionError: a verified bound fails
    """
    group = f.group
    elements = group.elements()
    levels = [group.chain_level(y) for y in elements]

    alphas = [n * (1.0 + _sup_on_chain(f, n + 1)) for n in range(1, max(levels) + 2)]
    cumulative = np.cumsum(alphas)
    w = np.array([cumulative[level] for level in levels])
    u = np.array([1.0 + _sup_on_chain(f, group.chain_index(x) + 1) for x in elements])
    v = np.array([group.chain_index(x) for x in elements]) * u

    if np.any(w < v - Config.TOL_NUM):
        raise ConstructionError('weight does not dominate v on the window')
    if not group.chain_product_holds():
        logger.warning('chain %s violates K_n·K_n ⊆ K_{n+1}; bounds are verified numerically', group.chain)

    checked = 0
    for i, x in enumerate(elements):
        inverse = group.inverse(x)
        for j, y in enumerate(elements):
            point = group.op(inverse, y)
            if not f.can_evaluate(point):
                continue
            checked += 1
            if abs(f(point)) > u[i] * w[j] * (1 + Config.TOL_NUM):
                logger.error('translate bound fails at x=%s, y=%s: %.9g > %.9g', x, y, abs(f(point)), u[i] * w[j])
                raise ConstructionError('translate escapes the principal ideal of the weight', x=x, y=y)

    logger.info('weight on %d elements: w ranges %.6g..%.6g, %d pairs verified',
                len(elements), w.min(), w.max(), checked)
    return WeightResult(group, elements, w, u, v, [float(a) for a in alphas], checked)


# ==================== CONVOLUTION ====================

def convolve_direct(mu: FiniteMeasureOnGroup, f: GroupFunction) -> GroupFunction:
    """(μ ∗ f)(y) = Σ_x μ({x})·f(x⁻¹y) on the window."""
    group = f.group
    elements = group.elements()
    values = np.zeros(len(elements))
    for x, mass in mu.masses.items():
        values += mass * translate(f, x).on(elements)
    if group.kind == FINITE:
        return GroupFunction(group, values)

    polynomial = None
    if f.polynomial is not None:
        polynomial = Polynomial([0.0])
        for x, mass in mu.masses.items():
            polynomial = polynomial + mass * translate(f, x).polynomial
    return GroupFunction(group, values, elements[0], polynomial)


@dataclass
class ConvolutionResult:
    function: GroupFunction
    direct: GroupFunction
    weight: WeightResult
    member_id: str
    deviation: float
    checks: List[dict] = field(default_factory=list)


def convolve_via_integral(mu: FiniteMeasureOnGroup, f: GroupFunction,
                          cover: Optional[Cover] = None) -> ConvolutionResult:
    """
    μ ∗ f as the B-integral of x ↦ L_x f in the principal ideal of the weight

    :param cover: principal-ideal cover over the window (created if omitted)
    """
    group = f.group
    shape = (group.kind, group.radius, group.order)
    if mu.group is not group and (mu.group.kind, mu.group.radius, mu.group.order) != shape:
        raise ArgumentError('measure and function live on different groups')
    weight = weight_builder(f)
    elements = weight.elements
    cover = cover or Cover.principal_ideals(len(elements))
    if cover.ambient.dim != len(elements):
        raise ArgumentError(f'cover of dimension {cover.ambient.dim} for a window of {len(elements)} elements')

    member_id = cover.register_unit(weight.w)
    rows = []
    for x in mu.support:
        translated = translate(f, x).on(elements)
        bound = principal_ideal_norm(weight.w, translated)
        if bound > weight.unit_bound(x) * (1 + Config.TOL_NUM):
            raise ConstructionError(f'translate by {x} has ∥·∥_w = {bound:.6g} above u(x)', x=x)
        rows.append(translated)

    measure = mu.as_measure_space()
    integrand = IntegrableFunction(measure, cover.ambient, np.array(rows))
    integral = u_integral(cover, integrand, member_id=member_id)

    direct = convolve_direct(mu, f)
    deviation = float(np.abs(integral.value.coords - direct.values).max(initial=0.0))
    tol = Config.TOL_NUM * max(1.0, float(np.abs(direct.values).max(initial=0.0)))
    checks = integral.checks + [{
        'name': 'integral_matches_direct',
        'passed': deviation <= tol,
        'detail': f'max deviation {deviation:.3e} on {len(elements)} points',
    }]
    if deviation > tol:
        logger.error('B-integral convolution deviates from the direct sum by %.3e', deviation)
        raise ConstructionError('convolution via the integral disagrees with the direct formula',
                                deviation=deviation)

    offset = elements[0] if group.kind == INTEGERS else 0
    function = GroupFunction(group, integral.value.coords, offset)
    return ConvolutionResult(function, direct, weight, member_id, deviation, checks)


def translation_continuity_table(f: GroupFunction, anchors: Sequence[int],
                                 weight: Optional[WeightResult] = None) -> List[dict]:
    """∥L_x f − L_a f∥_w for window pairs, recorded as a table."""
    weight = weight or weight_builder(f)
    elements = weight.elements
    table = []
    for a in anchors:
        base = translate(f, a).on(elements)
        for x in elements:
            distance = principal_ideal_norm(weight.w, translate(f, x).on(elements) - base)
            table.append({'anchor': a, 'x': x, 'distance': distance})
    return table
