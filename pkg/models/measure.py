# -*- coding: utf-8 -*-
"""
Atomic measure spaces and vector-valued functions on them

Every atom has strictly positive mass, so "almost everywhere" means
"at every atom". A truncated space stands in for the counting measure on ℕ:
only the first atoms are stored and the caller certifies the omitted tail.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from models.spaces import OrderedSpace, Vector, in_cone, norm
from utils.errors import ArgumentError, CarrierError, MismatchError

logger = logging.getLogger(__name__)

FINITE = 'finite'
TRUNCATED_N = 'truncated_n'


@dataclass(frozen=True)
class Atom:
    label: str
    weight: float


@dataclass(frozen=True)
class MeasureSpace:
    atoms: Tuple[Atom, ...]
    kind: str = FINITE
    tail_bound: float = 0.0

    def __post_init__(self):
        if not self.atoms:
            raise ArgumentError('measure space needs at least one atom')
        if self.kind not in (FINITE, TRUNCATED_N):
            raise ArgumentError(f'unknown measure space kind {self.kind!r}')
        for atom in self.atoms:
            if not (np.isfinite(atom.weight) and atom.weight > 0):
                raise ArgumentError(f'atom {atom.label!r} has non-positive mass {atom.weight}')
        if np.isnan(self.tail_bound) or self.tail_bound < 0:
            raise ArgumentError(f'tail bound must be nonnegative, got {self.tail_bound}')

    @classmethod
    def finite(cls, atoms: Iterable[Union[Atom, Tuple[str, float]]]) -> 'MeasureSpace':
        return cls(tuple(a if isinstance(a, Atom) else Atom(str(a[0]), float(a[1])) for a in atoms))

    @classmethod
    def truncated_n(cls, weights: Union[int, Sequence[float]], tail_bound: float = 0.0) -> 'MeasureSpace':
        """Atoms 1..N of ℕ; an integer N means counting measure."""
        if isinstance(weights, int):
            weights = [1.0] * weights
        atoms = tuple(Atom(str(n), float(w)) for n, w in enumerate(weights, start=1))
        return cls(atoms, TRUNCATED_N, float(tail_bound))

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([atom.weight for atom in self.atoms])

    @property
    def labels(self) -> List[str]:
        return [atom.label for atom in self.atoms]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class Estimate:
    """A value known up to ± uncertainty."""

    value: float
    uncertainty: float = 0.0

    @property
    def upper(self) -> float:
        return self.value + self.uncertainty

    def to_dict(self) -> dict:
        return {'value': self.value, 'uncertainty': self.uncertainty}


@dataclass(frozen=True, eq=False)
class IntegrableFunction:
    """
    Per-atom values in a carrier space

    values has one row per atom. tail_norm_bound certifies ∫∥f∥ over the
    omitted atoms of a truncated space (the space's tail_bound by default).
    """

    space: MeasureSpace
    carrier: OrderedSpace
    values: np.ndarray
    tail_norm_bound: Optional[float] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1 and self.carrier.dim == 1:
            values = values.reshape(-1, 1)
        if values.shape != (len(self.space), self.carrier.dim):
            raise CarrierError(f'values of shape {values.shape}, expected {(len(self.space), self.carrier.dim)}')
        if not np.all(np.isfinite(values)):
            raise ArgumentError('function values must be finite')
        if self.tail_norm_bound is not None and (np.isnan(self.tail_norm_bound) or self.tail_norm_bound < 0):
            raise ArgumentError(f'tail norm bound must be nonnegative, got {self.tail_norm_bound}')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_vectors(cls, space: MeasureSpace, carrier: OrderedSpace, vectors: Sequence[Vector],
                     tail_norm_bound: Optional[float] = None) -> 'IntegrableFunction':
        for v in vectors:
            if v.space != carrier.id:
                raise CarrierError(f'value carried by {v.space!r}, expected {carrier.id!r}')
        if len(vectors) != len(space):
            raise CarrierError(f'{len(vectors)} values for {len(space)} atoms')
        return cls(space, carrier, np.array([v.coords for v in vectors]), tail_norm_bound)

    @classmethod
    def zero(cls, space: MeasureSpace, carrier: OrderedSpace) -> 'IntegrableFunction':
        return cls(space, carrier, np.zeros((len(space), carrier.dim)))

    @classmethod
    def indicator(cls, space: MeasureSpace, carrier: OrderedSpace, atoms: Iterable[int], value) -> 'IntegrableFunction':
        """value·1_A for the set A of atom indices."""
        values = np.zeros((len(space), carrier.dim))
        values[list(atoms)] = np.asarray(value.coords if isinstance(value, Vector) else value, dtype=float)
        return cls(space, carrier, values)

    def value(self, index: int) -> Vector:
        return Vector(self.carrier.id, self.values[index])

    @property
    def tail(self) -> float:
        if self.tail_norm_bound is not None:
            return float(self.tail_norm_bound)
        return self.space.tail_bound if self.space.kind == TRUNCATED_N else 0.0

    @property
    def is_simple(self) -> bool:
        return self.space.kind == FINITE or self.tail == 0.0

    def distinct_values(self) -> List[Tuple[Vector, np.ndarray]]:
        """(value, atom indices) pairs of the representation Σ aₙ·1_{Aₙ}, in first-seen order."""
        groups = {}
        for index, row in enumerate(self.values):
            groups.setdefault(row.tobytes(), []).append(index)
        return [(self.value(indices[0]), np.array(indices)) for indices in groups.values()]

    def _compatible(self, other: 'IntegrableFunction'):
        if other.space != self.space:
            raise MismatchError('functions live on different measure spaces')
        if other.carrier.id != self.carrier.id:
            raise CarrierError(f'carriers {self.carrier.id!r} and {other.carrier.id!r} differ')

    def __add__(self, other: 'IntegrableFunction') -> 'IntegrableFunction':
        self._compatible(other)
        return IntegrableFunction(self.space, self.carrier, self.values + other.values, self.tail + other.tail)

    def __sub__(self, other: 'IntegrableFunction') -> 'IntegrableFunction':
        self._compatible(other)
        return IntegrableFunction(self.space, self.carrier, self.values - other.values, self.tail + other.tail)

    def __mul__(self, scalar: float) -> 'IntegrableFunction':
        return IntegrableFunction(self.space, self.carrier, float(scalar) * self.values, abs(scalar) * self.tail)

    __rmul__ = __mul__

    def __neg__(self) -> 'IntegrableFunction':
        return self * -1.0

    def restrict(self, count: int) -> 'IntegrableFunction':
        """f·1_{first count atoms}; a simple function on the same space."""
        values = np.zeros_like(self.values)
        values[:count] = self.values[:count]
        return IntegrableFunction(self.space, self.carrier, values, 0.0)

    def with_values(self, carrier: OrderedSpace, values: np.ndarray,
                    tail_norm_bound: Optional[float] = None) -> 'IntegrableFunction':
        return IntegrableFunction(self.space, carrier, values, tail_norm_bound)

    def map_values(self, T, target: OrderedSpace, tail_norm_bound: Optional[float] = None) -> 'IntegrableFunction':
        """T∘f; a nonzero tail needs the caller's bound for the image tail."""
        T = np.asarray(T, dtype=float)
        if T.shape != (target.dim, self.carrier.dim):
            raise CarrierError(f'map of shape {T.shape} from {self.carrier.id!r} to {target.id!r}')
        if self.tail > 0 and tail_norm_bound is None:
            raise ArgumentError('mapping a function with a tail needs a tail bound for the image')
        return IntegrableFunction(self.space, target, self.values @ T.T,
                                  tail_norm_bound if self.tail > 0 else None)


def atom_norms(f: IntegrableFunction) -> np.ndarray:
    return np.array([norm(f.carrier, f.value(i)) for i in range(len(f.space))])


def phi_integral(f: IntegrableFunction) -> Vector:
    """
    Elementary integral Σ μ(Aₙ)·aₙ of a simple function

    :param f: simple function (finite space, or truncated space with zero tail)
    :return: vector in the carrier space
    """
    if not f.is_simple:
        raise ArgumentError('φ is only defined for simple functions')
    weights = f.space.weights
    total = np.zeros(f.carrier.dim)
    for value, indices in f.distinct_values():
        total += weights[indices].sum() * value.coords
    return Vector(f.carrier.id, total)


def l1_norm(f: IntegrableFunction) -> Estimate:
    """∫∥f∥ dμ over the stored atoms, with the certified tail as uncertainty."""
    return Estimate(float(f.space.weights @ atom_norms(f)), f.tail)


def ae_leq(f: IntegrableFunction, g: IntegrableFunction) -> bool:
    f._compatible(g)
    return all(in_cone(f.carrier.cone, row) for row in g.values - f.values)
