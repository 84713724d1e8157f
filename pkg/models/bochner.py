# -*- coding: utf-8 -*-
"""
Bochner integral on ordered Banach spaces over atomic measure spaces

Besides evaluation this module builds dominating functions: for a simple f a
simple g with −g ⪯ f ⪯ g and ∫∥g∥ ≤ C∫∥f∥ + ε, and for a function on a
truncated ℕ the telescoping construction over dyadic slack levels.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from config import Config
from models.cones import DominatingConstant, dominating_constant, min_dominator
from models.measure import (
    IntegrableFunction, atom_norms, l1_norm, phi_integral,
)
from models.spaces import (
    OrderedSpace, Vector, dual_generators, generating_witness, in_cone, is_order_preserving, norm,
)
from utils.errors import (
    ArgumentError, CapabilityError, ConstructionError, NoDominatorError, NotIntegrableError,
    OrderError, ScheduleError,
)

logger = logging.getLogger(__name__)


def _scale(*arrays) -> float:
    return max([1.0] + [float(np.abs(a).max(initial=0.0)) for a in arrays])


def bochner_integral(f: IntegrableFunction) -> Vector:
    """
    Integral of f; on a truncated space the sum over the stored atoms

    The omitted part is bounded in norm by integration_error(f).
    """
    if not np.isfinite(f.tail):
        raise NotIntegrableError('l1 norm of the function is not bounded')
    return phi_integral(f.restrict(len(f.space)))


def integration_error(f: IntegrableFunction) -> float:
    return f.tail


def approximating_sequence(f: IntegrableFunction, scheme: str = 'truncation',
                           length: Optional[int] = None) -> List[IntegrableFunction]:
    """
    Simple functions sₖ with ∫∥f − sₖ∥ → 0

    ``truncation``: f on the first k atoms; ``dyadic``: values rounded to the grid 2⁻ᵏℤ.
    """
    if scheme == 'truncation':
        count = len(f.space) if length is None else min(length, len(f.space))
        return [f.restrict(k) for k in range(1, count + 1)]
    if scheme == 'dyadic':
        steps = 30 if length is None else length
        return [f.with_values(f.carrier, np.round(f.values * 2.0 ** k) / 2.0 ** k, 0.0)
                for k in range(1, steps + 1)]
    raise ArgumentError(f'unknown approximation scheme {scheme!r}')


def pushforward_integrate(T, f: IntegrableFunction, target: OrderedSpace,
                          tail_norm_bound: Optional[float] = None) -> Vector:
    """
    ∫ T∘f, checked against T(∫f)

    :param T: matrix of an order-preserving map from f's carrier into target
    :param tail_norm_bound: certified tail of T∘f when f has one
    """
    T = np.asarray(T, dtype=float)
    if not is_order_preserving(T, f.carrier.cone, target.cone):
        raise OrderError(f'map from {f.carrier.id!r} to {target.id!r} is not order preserving')

    pushed = bochner_integral(f.map_values(T, target, tail_norm_bound))
    direct = T @ bochner_integral(f).coords
    deviation = float(np.abs(pushed.coords - direct).max(initial=0.0))
    if deviation > Config.TOL_NUM * _scale(direct):
        logger.error('pushforward mismatch %.3e between ∫T∘f and T∫f', deviation)
        raise ConstructionError('integral does not commute with the map', deviation=deviation)
    return pushed


# ==================== DOMINATION ====================

@dataclass(frozen=True)
class DominationLevel:
    level: int
    first_atom: int
    stop_atom: int
    f_norm: float
    g_norm: float
    bound: float


@dataclass
class DominatedPair:
    f: IntegrableFunction
    g: IntegrableFunction
    epsilon: float
    constant: DominatingConstant
    levels: List[DominationLevel] = field(default_factory=list)

    def sandwich_holds(self) -> bool:
        cone = self.f.carrier.cone
        return all(in_cone(cone, upper) and in_cone(cone, lower)
                   for upper, lower in zip(self.g.values - self.f.values, self.g.values + self.f.values))

    @property
    def bound(self) -> float:
        return self.constant.c_used * (l1_norm(self.f).value + self.epsilon)

    def verify(self):
        if not self.sandwich_holds():
            raise ConstructionError('dominating function does not sandwich f')
        g_norm = l1_norm(self.g).value
        if g_norm > self.bound + Config.TOL_NUM:
            raise ConstructionError('dominating function exceeds the norm bound',
                                    l1_g=g_norm, bound=self.bound)

    def to_dict(self) -> dict:
        return {
            'epsilon': self.epsilon,
            'C_lower': self.constant.c_lower,
            'C_used': self.constant.c_used,
            'exact_constant': self.constant.exact,
            'l1_f': l1_norm(self.f).to_dict(),
            'l1_g': l1_norm(self.g).value,
            'bound': self.bound,
            'g': self.g.values.tolist(),
            'levels': [vars(level) for level in self.levels],
        }


def simple_dominate(f: IntegrableFunction, epsilon: float,
                    constant: Optional[DominatingConstant] = None) -> DominatedPair:
    """
    Simple g ⪰ ±f with ∫∥g∥ ≤ C∫∥f∥ + ε

    Each distinct value xₙ on Aₙ gets a minimal dominator aₙ, which must satisfy
    ∥aₙ∥ ≤ C∥xₙ∥ + ε/κ with κ the mass of the support of f.
    """
    if epsilon <= 0:
        raise ArgumentError(f'epsilon must be positive, got {epsilon}')
    if not f.is_simple:
        raise ArgumentError('simple_dominate needs a simple function')
    carrier = f.carrier
    if not carrier.directed:
        raise NoDominatorError(f'carrier {carrier.id!r} is not directed')
    constant = constant or dominating_constant(carrier)

    weights = f.space.weights
    groups = [(v, idx) for v, idx in f.distinct_values() if np.any(v.coords)]
    kappa = sum(weights[idx].sum() for _, idx in groups)

    g_values = np.zeros_like(f.values)
    for value, indices in groups:
        dominator = min_dominator(carrier, value)
        allowed = constant.c_used * norm(carrier, value) + epsilon / kappa
        if dominator.value > allowed + Config.TOL_NUM:
            logger.error('dominator of norm %.9g exceeds C∥x∥ + ε/κ = %.9g', dominator.value, allowed)
            raise ConstructionError('sampled dominating constant is too small',
                                    value=dominator.value, allowed=allowed)
        g_values[indices] = dominator.a.coords

    pair = DominatedPair(f, f.with_values(carrier, g_values, 0.0), epsilon, constant)
    pair.verify()
    return pair


def bochner_dominate(f: IntegrableFunction, epsilon: float,
                     constant: Optional[DominatingConstant] = None) -> DominatedPair:
    """
    g with −g ⪯ f ⪯ g and ∫∥g∥ ≤ C(∫∥f∥ + ε) by telescoping simple approximants

    Level n uses sₙ = f on the first mₙ atoms with ∫∥f − sₙ∥ < ε·2⁻ⁿ⁻¹
    (certified tail included) and dominates fₙ = sₙ − sₙ₋₁. The schedule ends
    when every stored atom is used; the certified tail must then be below the
    last level's budget.

    :param f: function with a certified (finite) tail
    :param epsilon: slack, > 0
    :param constant: dominating constant of the carrier (scanned if omitted)
    """
    if epsilon <= 0:
        raise ArgumentError(f'epsilon must be positive, got {epsilon}')
    if not np.isfinite(f.tail):
        raise ScheduleError('tail of the function is not certified')
    carrier = f.carrier
    if not carrier.directed:
        raise NoDominatorError(f'carrier {carrier.id!r} is not directed')
    constant = constant or dominating_constant(carrier)
    C = constant.c_used

    masses = f.space.weights * atom_norms(f)
    count = len(masses)
    # remainder[m] = ∫∥f − f·1_{first m atoms}∥, tail included
    remainder = f.tail + np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])
    total = l1_norm(f).value

    g_values = np.zeros_like(f.values)
    levels = []
    start, level = 0, 1
    while True:
        budget = epsilon * 2.0 ** -(level + 1)
        reachable = np.flatnonzero(remainder[start:] < budget)
        if reachable.size == 0:
            raise ScheduleError(
                f'slack schedule infeasible at level {level}: certified tail {f.tail:.3e} '
                f'is not below ε·2^-{level + 1} = {budget:.3e}',
                level=level, tail=f.tail, budget=budget,
            )
        stop = start + int(reachable[0])
        if stop == start:
            # the rest already fits this level's budget
            stop = count

        piece = np.zeros_like(f.values)
        piece[start:stop] = f.values[start:stop]
        f_level = f.with_values(carrier, piece, 0.0)
        f_norm = float(masses[start:stop].sum())
        if level == 1:
            bound = C * (total + epsilon * 2.0 ** -2)
            slack = C * epsilon * 2.0 ** -2
        else:
            bound = C * epsilon * 2.0 ** -level
            slack = C * (epsilon * 2.0 ** -level - f_norm)

        g_norm = 0.0
        if f_norm > 0:
            pair = simple_dominate(f_level, slack, constant)
            g_values[start:stop] = pair.g.values[start:stop]
            g_norm = l1_norm(pair.g).value
        if g_norm > bound + Config.TOL_NUM:
            raise ConstructionError(f'level {level} dominator exceeds its budget', g_norm=g_norm, bound=bound)
        levels.append(DominationLevel(level, start, stop, f_norm, g_norm, bound))

        if stop == count:
            break
        start, level = stop, level + 1

    pair = DominatedPair(f, f.with_values(carrier, g_values, 0.0), epsilon, constant, levels)
    pair.verify()
    logger.info('dominated function on %d atoms in %d levels: ∫∥g∥ = %.6g ≤ %.6g',
                count, len(levels), l1_norm(pair.g).value, pair.bound)
    return pair


# ==================== DUALITY AND STRUCTURE ====================

def pettis_check(f: IntegrableFunction, functionals=None, candidate: Optional[Vector] = None) -> bool:
    """
    True iff α(I) = Σ wᵢ·α(fᵢ) for every functional and I is the only such vector

    :param functionals: rows α (dual generators of the carrier by default)
    :param candidate: vector to test (the Bochner integral by default)
    """
    functionals = dual_generators(f.carrier) if functionals is None else np.atleast_2d(
        np.asarray(functionals, dtype=float))
    if np.linalg.matrix_rank(functionals) < f.carrier.dim:
        raise CapabilityError('functionals do not separate the points of the carrier')
    integral = bochner_integral(f) if candidate is None else candidate

    expected = f.space.weights @ (f.values @ functionals.T)
    tol = Config.TOL_NUM * _scale(expected)
    if np.abs(functionals @ integral.coords - expected).max(initial=0.0) > tol:
        return False
    solution, *_ = np.linalg.lstsq(functionals, expected, rcond=None)
    return bool(np.abs(solution - integral.coords).max(initial=0.0) <= tol)


def positive_decomposition(f: IntegrableFunction) -> Tuple[IntegrableFunction, IntegrableFunction]:
    """Atomwise p, q ⪰ 0 with f = p − q."""
    p_values, q_values = np.zeros_like(f.values), np.zeros_like(f.values)
    for index in range(len(f.space)):
        p, q = generating_witness(f.carrier, f.value(index))
        p_values[index], q_values[index] = p.coords, q.coords
    return f.with_values(f.carrier, p_values, f.tail), f.with_values(f.carrier, q_values, f.tail)


def atomwise_embedding(f: IntegrableFunction) -> np.ndarray:
    """Rows μ(Aᵢ)·xᵢ; with the ℓ¹-sum of carrier norms this is an isometric order embedding."""
    return f.space.weights[:, None] * f.values


def product_norm(carrier: OrderedSpace, rows: np.ndarray) -> float:
    return float(sum(norm(carrier, carrier.vector(row)) for row in rows))


def lattice_modulus(f: IntegrableFunction) -> IntegrableFunction:
    if not f.carrier.is_lattice:
        raise CapabilityError(f'carrier {f.carrier.id!r} is not a lattice')
    return f.with_values(f.carrier, np.abs(f.values), f.tail)
