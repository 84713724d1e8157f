# -*- coding: utf-8 -*-
"""
Absolutely dominating norms and the N-norm

N(x) = inf{∥a∥ : a ∈ D⁺, −a ⪯ x ⪯ a} is computed as one linear program per
vector. Sampled scans bound the dominating constant from below and expose
non-normal cones; RenormedSpace implements ρ = ε·N + ∥·∥.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from models.lp import ProgramBuilder
from models.spaces import (
    OrderedSpace, Vector, check_carrier, constrain_to_cone, norm, norm_epigraph,
)
from utils.errors import ArgumentError, ConstructionError, NoDominatorError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DominatorResult:
    a: Vector
    value: float
    residuals: Dict[str, float] = field(default_factory=dict)
    # True when a is the lattice modulus |x| rather than an LP optimum
    exact: bool = False


def _require_directed(space: OrderedSpace):
    if not space.directed:
        raise NoDominatorError(f'space {space.id!r} is not directed; no dominating element exists')


def min_dominator(space: OrderedSpace, x: Vector, use_lattice_modulus: bool = True) -> DominatorResult:
    """
    Minimal-norm a ∈ D⁺ with −a ⪯ x ⪯ a

    :param space: directed carrier space
    :param x: the vector to dominate
    :param use_lattice_modulus: return |x| directly on lattices instead of solving the LP
    :return: DominatorResult with value = N(x)
    """
    check_carrier(space, x)
    _require_directed(space)
    if not np.any(x.coords):
        return DominatorResult(space.zero(), 0.0, {'lp': 0.0}, exact=True)
    if use_lattice_modulus and space.is_lattice:
        modulus = x.abs()
        return DominatorResult(modulus, norm(space, modulus), {'lp': 0.0}, exact=True)

    dim = space.dim
    builder = ProgramBuilder()
    a = builder.variables(dim)
    constrain_to_cone(builder, space.cone, [(a, 1.0)], np.zeros(dim))
    constrain_to_cone(builder, space.cone, [(a, 1.0)], -x.coords)
    constrain_to_cone(builder, space.cone, [(a, 1.0)], x.coords)
    t = norm_epigraph(builder, space, [(a, 1.0)], np.zeros(dim))
    builder.minimize([(t, 1.0)])
    solution = builder.solve()
    if not solution.ok:
        raise NoDominatorError(f'dominator program is {solution.status.value} in {space.id!r}')

    dominator = space.vector(solution.x[a])
    value = norm(space, dominator)
    return DominatorResult(dominator, value, {
        'lp': solution.residual,
        'objective_gap': abs(value - float(solution.objective)),
    })


def n_norm(space: OrderedSpace, x: Vector) -> float:
    return min_dominator(space, x).value


# ==================== SCANS ====================

@dataclass
class ScanReport:
    space: str
    samples: int
    seed: int
    c_lower: float = 0.0
    witness: Optional[Vector] = None
    normality_ratio: float = 0.0
    normality_witness: Optional[Vector] = None
    exact: bool = False
    below_one: bool = False

    def to_dict(self) -> dict:
        return {
            'space': self.space,
            'samples': self.samples,
            'seed': self.seed,
            'C_lower': self.c_lower,
            'normality_ratio': self.normality_ratio,
            'witness': self.witness.tolist() if self.witness is not None else None,
            'normality_witness': self.normality_witness.tolist() if self.normality_witness is not None else None,
            'exact': self.exact,
            'below_one': self.below_one,
        }


def sample_unit_vectors(space: OrderedSpace, sample_count: int, seed: int,
                        extra: Sequence = (), unit_norm: Callable = None) -> List[Vector]:
    """
    Standard basis vectors, caller-supplied vectors and seeded random directions, normalized

    :param unit_norm: norm used for normalization (the space norm by default)
    """
    unit_norm = unit_norm or (lambda v: norm(space, v))
    rng = np.random.default_rng(seed)
    raw = [row for row in np.eye(space.dim)]
    raw += [np.asarray(v.coords if isinstance(v, Vector) else v, dtype=float) for v in extra]
    raw += [rng.standard_normal(space.dim) for _ in range(sample_count)]

    vectors = []
    for coords in raw:
        if not np.any(coords):
            continue
        v = space.vector(coords)
        vectors.append(v * (1.0 / unit_norm(v)))
    return vectors


def _map(func, items, jobs: int):
    if jobs <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def ratio_scan(space: OrderedSpace, sample_count: Optional[int] = None, seed: Optional[int] = None,
               extra: Sequence = (), jobs: int = 1) -> ScanReport:
    """
    Sampled max of N(x)/∥x∥ (dominating ratio) and of ∥x∥/N(x) (normality ratio)

    Max-reduction keeps the first witness on ties, so results do not depend on jobs.
    """
    sample_count = Config.SCAN_SAMPLES if sample_count is None else sample_count
    seed = Config.SEED if seed is None else seed
    if sample_count <= 0:
        raise ArgumentError('sample_count must be positive')
    _require_directed(space)

    vectors = sample_unit_vectors(space, sample_count, seed, extra)
    pairs = _map(lambda v: (n_norm(space, v), norm(space, v)), vectors, jobs)

    report = ScanReport(space=space.id, samples=sample_count, seed=seed,
                        exact=space.is_lattice or space.norm.kind == 'order_unit')
    for v, (n_value, value) in zip(vectors, pairs):
        if n_value / value > report.c_lower:
            report.c_lower, report.witness = n_value / value, v
        if n_value >= Config.RATIO_GUARD and value / n_value > report.normality_ratio:
            report.normality_ratio, report.normality_witness = value / n_value, v

    if report.c_lower < 1.0 - Config.TOL_NUM:
        report.below_one = True
        logger.warning('scan of %s reports dominating ratio %.6g below 1', space.id, report.c_lower)
    logger.info('scan %s: %d samples, C_lower %.6g, normality ratio %.6g',
                space.id, sample_count, report.c_lower, report.normality_ratio)
    return report


def dominating_ratio_scan(space: OrderedSpace, sample_count: Optional[int] = None,
                          seed: Optional[int] = None, extra: Sequence = (), jobs: int = 1) -> ScanReport:
    """Lower bound C_lower on the dominating constant, with its witness."""
    return ratio_scan(space, sample_count, seed, extra, jobs)


def normality_ratio_scan(space: OrderedSpace, sample_count: Optional[int] = None,
                         seed: Optional[int] = None, extra: Sequence = (), jobs: int = 1) -> ScanReport:
    """Sampled sup of ∥x∥/N(x); growth across dimensions signals a non-normal cone."""
    return ratio_scan(space, sample_count, seed, extra, jobs)


@dataclass(frozen=True)
class DominatingConstant:
    c_lower: float
    c_used: float
    exact: bool


def dominating_constant(space: OrderedSpace, sample_count: Optional[int] = None,
                        seed: Optional[int] = None) -> DominatingConstant:
    """Constant for downstream bounds: max(C_lower, 1) inflated by the safety factor."""
    if space.is_lattice or space.norm.kind == 'order_unit':
        return DominatingConstant(1.0, Config.SAFETY_FACTOR, True)
    report = dominating_ratio_scan(space, sample_count, seed)
    return DominatingConstant(report.c_lower, max(report.c_lower, 1.0) * Config.SAFETY_FACTOR, False)


def interval_union_radius(space: OrderedSpace, sample_count: Optional[int] = None,
                          seed: Optional[int] = None) -> Tuple[float, Optional[Vector]]:
    """
    Sampled radius of the largest ball inside ⋃_{∥a∥≤1} [−a, a]

    A unit vector x lies in that union scaled by N(x), so the radius is 1/sup N.
    """
    report = dominating_ratio_scan(space, sample_count, seed)
    return 1.0 / report.c_lower, report.witness


# ==================== UNIFORM REGULATOR ====================

@dataclass(frozen=True)
class RegulatorResult:
    regulator: Vector
    epsilons: List[float]


def uniform_regulator(space: OrderedSpace, xs: Sequence[Vector]) -> RegulatorResult:
    """
    a ∈ D⁺ and εₙ ↓ 0 with −εₙa ⪯ xₙ ⪯ εₙa for a summable sequence xₙ

    εₙ is the square root of the tail Σ_{k≥n} N(x_k), which keeps Σ N(xₙ)/εₙ finite.
    """
    if not xs:
        raise ArgumentError('empty sequence')
    dominators = [min_dominator(space, x) for x in xs]
    values = np.array([d.value for d in dominators])
    tails = np.cumsum(values[::-1])[::-1]
    epsilons = np.sqrt(tails)

    regulator = np.zeros(space.dim)
    for eps, dominator in zip(epsilons, dominators):
        if eps > 0:
            regulator += dominator.a.coords / eps
    logger.info('uniform regulator in %s for %d terms, ε₁ = %.6g', space.id, len(xs), epsilons[0])
    return RegulatorResult(space.vector(regulator), epsilons.tolist())


# ==================== RENORMING ====================

@dataclass(frozen=True)
class RenormedSpace:
    """ρ = ε·N + ∥·∥ on the base space."""

    base: OrderedSpace
    epsilon: float

    @property
    def id(self) -> str:
        return f'{self.base.id}~rho[{self.epsilon:g}]'

    def addends(self, x: Vector) -> Tuple[float, float]:
        return self.epsilon * n_norm(self.base, x), norm(self.base, x)

    def norm(self, x: Vector) -> float:
        return sum(self.addends(x))

    def min_dominator(self, x: Vector) -> DominatorResult:
        """a ∈ D⁺ with −a ⪯ x ⪯ a minimizing ρ(a)."""
        space = self.base
        check_carrier(space, x)
        if not np.any(x.coords):
            return DominatorResult(space.zero(), 0.0, {'lp': 0.0}, exact=True)

        dim = space.dim
        zero = np.zeros(dim)
        builder = ProgramBuilder()
        a = builder.variables(dim)
        b = builder.variables(dim)
        constrain_to_cone(builder, space.cone, [(a, 1.0)], -x.coords)
        constrain_to_cone(builder, space.cone, [(a, 1.0)], x.coords)
        constrain_to_cone(builder, space.cone, [(b, 1.0), (a, -1.0)], zero)
        constrain_to_cone(builder, space.cone, [(b, 1.0), (a, 1.0)], zero)
        t_b = norm_epigraph(builder, space, [(b, 1.0)], zero)
        t_a = norm_epigraph(builder, space, [(a, 1.0)], zero)
        builder.minimize([(t_b, self.epsilon), (t_a, 1.0)])
        solution = builder.solve()
        if not solution.ok:
            raise NoDominatorError(f'ρ-dominator program is {solution.status.value} in {space.id!r}')

        dominator = space.vector(solution.x[a])
        value = self.norm(dominator)
        return DominatorResult(dominator, value, {
            'lp': solution.residual,
            'objective_gap': abs(value - float(solution.objective)),
        })

    def ratio_scan(self, sample_count: Optional[int] = None, seed: Optional[int] = None,
                   extra: Sequence = (), jobs: int = 1) -> ScanReport:
        """Sampled max of inf ρ(a) / ρ(x); bounded by (1+ε)²."""
        sample_count = Config.SCAN_SAMPLES if sample_count is None else sample_count
        seed = Config.SEED if seed is None else seed
        if sample_count <= 0:
            raise ArgumentError('sample_count must be positive')
        vectors = sample_unit_vectors(self.base, sample_count, seed, extra, unit_norm=self.norm)
        values = _map(lambda v: (self.min_dominator(v).value, self.norm(v)), vectors, jobs)

        report = ScanReport(space=self.id, samples=sample_count, seed=seed)
        for v, (dominated, value) in zip(vectors, values):
            if dominated / value > report.c_lower:
                report.c_lower, report.witness = dominated / value, v

        bound = (1.0 + self.epsilon) ** 2
        if report.c_lower > bound + Config.TOL_NUM:
            logger.error('ρ-dominating ratio %.9g exceeds (1+ε)² = %.9g', report.c_lower, bound)
            raise ConstructionError('renormed dominating ratio exceeds (1+ε)²',
                                    ratio=report.c_lower, bound=bound)
        return report

    def equivalence_bounds(self, sample_count: Optional[int] = None,
                           seed: Optional[int] = None) -> Tuple[float, float]:
        """(m, M) with m∥x∥ ≤ ρ(x) ≤ M∥x∥, M from the sampled dominating constant."""
        constant = dominating_constant(self.base, sample_count, seed)
        return 1.0, 1.0 + self.epsilon * constant.c_used


def renorm_eps(space: OrderedSpace, epsilon: float) -> RenormedSpace:
    if epsilon <= 0:
        raise ArgumentError(f'epsilon must be positive, got {epsilon}')
    _require_directed(space)
    logger.info('renorming %s with ε = %g', space.id, epsilon)
    return RenormedSpace(space, float(epsilon))
