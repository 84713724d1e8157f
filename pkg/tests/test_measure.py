import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis.extra.numpy import arrays
from hypothesis.strategies import floats, sampled_from

from models.bochner import approximating_sequence, bochner_integral
from models.measure import (
    TRUNCATED_N, Atom, IntegrableFunction, MeasureSpace, ae_leq, atom_norms, l1_norm, phi_integral,
)
from models.spaces import ConeSpec, NormSpec, OrderedSpace, norm
from utils.errors import ArgumentError, CarrierError, MismatchError
from utils.serialization import lattice_space, partial_sums_space

VALUES = arrays(np.float64, (3, 2), elements=floats(-50, 50))
SUP_2 = OrderedSpace('sup-2', ConeSpec.orthant(2), NormSpec.sup())


@pytest.fixture
def three_atoms():
    return MeasureSpace.finite([('a', 1.0), ('b', 2.0), ('c', 0.5)])


def test_measure_space_construction(three_atoms):
    assert len(three_atoms) == 3
    assert three_atoms.labels == ['a', 'b', 'c']
    assert three_atoms.total_mass == pytest.approx(3.5)

    counting = MeasureSpace.truncated_n(4, tail_bound=0.25)
    assert counting.kind == TRUNCATED_N
    assert counting.labels == ['1', '2', '3', '4']
    assert np.array_equal(counting.weights, np.ones(4))


@pytest.mark.parametrize('atoms', [[], [('a', 0.0)], [('a', -1.0)], [('a', float('inf'))]])
def test_invalid_atoms(atoms):
    with pytest.raises(ArgumentError):
        MeasureSpace.finite(atoms)


def test_invalid_tail_and_kind():
    with pytest.raises(ArgumentError):
        MeasureSpace.truncated_n(2, tail_bound=-1.0)
    with pytest.raises(ArgumentError):
        MeasureSpace((Atom('a', 1.0),), kind='continuous')


def test_values_must_match_the_carrier(three_atoms, l1_2):
    with pytest.raises(CarrierError):
        IntegrableFunction(three_atoms, l1_2, np.zeros((3, 3)))
    with pytest.raises(ArgumentError):
        IntegrableFunction(three_atoms, l1_2, [[1.0, np.nan], [0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(CarrierError):
        IntegrableFunction.from_vectors(three_atoms, l1_2, [l1_2.vector([1.0, 0.0])])


def test_phi_integral_sums_over_distinct_values(three_atoms, l1_2):
    f = IntegrableFunction(three_atoms, l1_2, [[1.0, -1.0], [1.0, -1.0], [0.0, 2.0]])
    groups = f.distinct_values()
    assert len(groups) == 2
    assert np.array_equal(groups[0][1], [0, 1])
    assert np.allclose(phi_integral(f).coords, [3.0, -2.0])


def test_phi_needs_a_simple_function(l1_2):
    space = MeasureSpace.truncated_n(2, tail_bound=0.5)
    f = IntegrableFunction(space, l1_2, [[1.0, 0.0], [0.0, 1.0]])
    assert not f.is_simple
    with pytest.raises(ArgumentError):
        phi_integral(f)
    assert phi_integral(f.restrict(2)).tolist() == [1.0, 1.0]


def test_l1_norm_carries_the_tail(l1_2):
    space = MeasureSpace.truncated_n([1.0, 0.5], tail_bound=0.125)
    f = IntegrableFunction(space, l1_2, [[1.0, -1.0], [4.0, 0.0]])
    assert np.allclose(atom_norms(f), [2.0, 4.0])
    estimate = l1_norm(f)
    assert estimate.value == pytest.approx(4.0)
    assert estimate.uncertainty == 0.125
    assert estimate.upper == pytest.approx(4.125)
    assert l1_norm(f.restrict(1)).to_dict() == {'value': 2.0, 'uncertainty': 0.0}


def test_arithmetic_tracks_tails(l1_2):
    space = MeasureSpace.truncated_n(2, tail_bound=0.25)
    f = IntegrableFunction(space, l1_2, [[1.0, 0.0], [0.0, 1.0]])
    assert (f + f).tail == 0.5
    assert (f - f).tail == 0.5
    assert (-2.0 * f).tail == 0.5
    assert np.array_equal((-f).values, -f.values)


def test_functions_on_different_spaces_do_not_mix(three_atoms, l1_2, l1_3):
    f = IntegrableFunction.zero(three_atoms, l1_2)
    other_space = IntegrableFunction.zero(MeasureSpace.finite([('x', 1.0)] * 3), l1_2)
    with pytest.raises(MismatchError):
        f + other_space
    with pytest.raises(CarrierError):
        f + IntegrableFunction.zero(three_atoms, l1_3)


def test_indicator_and_ae_order(three_atoms, l1_2):
    f = IntegrableFunction.indicator(three_atoms, l1_2, [0, 2], [1.0, 1.0])
    g = IntegrableFunction.indicator(three_atoms, l1_2, [0, 1, 2], [2.0, 1.0])
    assert ae_leq(f, g)
    assert not ae_leq(g, f)
    assert ae_leq(IntegrableFunction.zero(three_atoms, l1_2), f)


def test_map_values(three_atoms, l1_2):
    f = IntegrableFunction(three_atoms, l1_2, [[1.0, 2.0], [0.0, 1.0], [3.0, 0.0]])
    line = lattice_space(1)
    summed = f.map_values([[1.0, 1.0]], line)
    assert summed.carrier is line
    assert summed.values.ravel().tolist() == [3.0, 1.0, 3.0]
    with pytest.raises(CarrierError):
        f.map_values(np.eye(3), l1_2)


def test_mapping_a_tail_needs_a_bound(l1_2):
    space = MeasureSpace.truncated_n(1, tail_bound=0.5)
    f = IntegrableFunction(space, l1_2, [[1.0, 1.0]])
    with pytest.raises(ArgumentError):
        f.map_values(np.eye(2), l1_2)
    assert f.map_values(np.eye(2), l1_2, tail_norm_bound=0.5).tail == 0.5


# ==== properties of φ ====

@seed(3)
@settings(max_examples=40, deadline=None)
@given(x=VALUES, y=VALUES, a=floats(-5, 5), b=floats(-5, 5))
def test_phi_is_linear(x, y, a, b):
    space = MeasureSpace.finite([('a', 1.0), ('b', 2.0), ('c', 0.5)])
    carrier = lattice_space(2)
    f, g = IntegrableFunction(space, carrier, x), IntegrableFunction(space, carrier, y)
    combined = phi_integral(a * f + b * g).coords
    expected = a * phi_integral(f).coords + b * phi_integral(g).coords
    assert np.allclose(combined, expected, atol=1e-8)


@seed(5)
@settings(max_examples=30, deadline=None)
@given(x=VALUES, carrier=sampled_from([lattice_space(2, [1.0, 3.0]), SUP_2, partial_sums_space(2)]))
def test_phi_is_bounded_by_the_l1_norm(x, carrier):
    space = MeasureSpace.finite([('a', 1.0), ('b', 2.0), ('c', 0.5)])
    f = IntegrableFunction(space, carrier, x)
    assert norm(carrier, phi_integral(f)) <= l1_norm(f).value + 1e-8


def _distance(carrier, u, v):
    return norm(carrier, carrier.vector(u.coords - v.coords))


@seed(9)
@settings(max_examples=25, deadline=None)
@given(x=arrays(np.float64, (6, 2), elements=floats(-20, 20)))
def test_dominated_convergence_of_truncations(x):
    space = MeasureSpace.truncated_n([1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125])
    carrier = lattice_space(2)
    f = IntegrableFunction(space, carrier, x)
    target = bochner_integral(f)
    sequence = approximating_sequence(f)
    for s in sequence:
        # ∥sₖ∥ ≤ ∥f∥ atomwise
        assert np.all(atom_norms(s) <= atom_norms(f) + 1e-12)
        assert _distance(carrier, bochner_integral(s), target) <= l1_norm(f - s).value + 1e-9
    distances = [l1_norm(f - s).value for s in sequence]
    assert all(d1 >= d2 - 1e-12 for d1, d2 in zip(distances, distances[1:]))
    assert _distance(carrier, bochner_integral(sequence[-1]), target) <= 1e-9


def test_dominated_convergence_of_dyadic_roundings():
    space = MeasureSpace.finite([('a', 1.0), ('b', 2.0), ('c', 0.5)])
    carrier = lattice_space(2)
    f = IntegrableFunction(space, carrier, [[0.3, -1.7], [2.2, 0.1], [-0.9, 5.05]])
    target = bochner_integral(f)
    sequence = approximating_sequence(f, 'dyadic', length=24)
    # |round(2ᵏx)/2ᵏ| ≤ |x| + 2⁻ᵏ⁻¹ ≤ |x| + 1
    bound = atom_norms(f) + carrier.dim
    assert all(np.all(atom_norms(s) <= bound) for s in sequence)
    errors = [_distance(carrier, bochner_integral(s), target) for s in sequence]
    assert errors[-1] <= 1e-6
