import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis.extra.numpy import arrays
from hypothesis.strategies import floats, integers

from config import Config
from models.cones import (
    dominating_constant, interval_union_radius, min_dominator, n_norm, ratio_scan, renorm_eps,
    sample_unit_vectors, uniform_regulator,
)
from models.spaces import ConeSpec, NormSpec, OrderedSpace, cone_contains, leq, norm
from oracles import alternating
from utils.errors import ArgumentError, NoDominatorError
from utils.serialization import lattice_space, partial_sums_space


@pytest.fixture
def ray():
    cone = ConeSpec.polyhedral([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    return OrderedSpace('ray', cone, NormSpec.weighted_l1([1.0, 1.0]), require_directed=False)


# ==== minimal dominators ====

def test_alternating_vector_is_dominated_by_first_unit(a11_4):
    result = min_dominator(a11_4, a11_4.vector(alternating(4)))
    assert result.value == pytest.approx(1.0, abs=1e-7)
    assert np.allclose(result.a.coords, [1.0, 0.0, 0.0, 0.0], atol=1e-7)
    assert not result.exact
    assert result.residuals['lp'] <= 1e-9


def test_dominator_sandwiches_the_vector(a11_4, rng):
    for _ in range(10):
        x = a11_4.vector(rng.standard_normal(4))
        a = min_dominator(a11_4, x).a
        assert cone_contains(a11_4, a, tol=1e-7)
        assert leq(a11_4, -a, x, tol=1e-7) and leq(a11_4, x, a, tol=1e-7)
        # a itself dominates x, so N(x) never exceeds ∥a∥ and a = max |S_k| e1 gives an upper bound
        partial_sums = np.cumsum(x.coords)
        assert n_norm(a11_4, x) <= np.abs(partial_sums).max() + 1e-7


def test_lattice_dominator_is_the_modulus(l1_3):
    x = l1_3.vector([1.0, -1.0, 2.0])
    result = min_dominator(l1_3, x)
    assert result.exact
    assert np.array_equal(result.a.coords, [1.0, 1.0, 2.0])
    assert result.value == pytest.approx(4.0)

    solved = min_dominator(l1_3, x, use_lattice_modulus=False)
    assert solved.value == pytest.approx(4.0, abs=1e-7)


def test_zero_is_its_own_dominator(a11_4):
    result = min_dominator(a11_4, a11_4.zero())
    assert result.value == 0.0 and result.exact


def test_non_directed_space_has_no_dominator(ray):
    with pytest.raises(NoDominatorError):
        min_dominator(ray, ray.vector([0.0, 1.0]))
    with pytest.raises(NoDominatorError):
        ratio_scan(ray, 5)
    with pytest.raises(NoDominatorError):
        renorm_eps(ray, 0.5)



# ==== N-norm structure ====

@seed(13)
@settings(max_examples=30, deadline=None)
@given(dim=integers(2, 5), data=arrays(np.float64, 5, elements=floats(-10, 10)))
def test_n_norm_of_the_partial_sum_order(dim, data):
    space = partial_sums_space(dim)
    x = space.vector(data[:dim])
    largest_partial_sum = np.abs(np.cumsum(x.coords)).max()
    assert n_norm(space, x) == pytest.approx(largest_partial_sum, rel=1e-6, abs=1e-7)
    # N vanishes only at 0: ∥x∥₁ ≤ 2·dim·max|S_k| ≤ 2·dim·N(x)
    assert norm(space, x) <= 2 * dim * n_norm(space, x) + 1e-6


@pytest.mark.parametrize('dim', [2, 4, 8])
def test_n_norm_is_positive_off_zero(dim):
    space = partial_sums_space(dim)
    for scale in (1.0, 1e-3, 1e-6):
        x = space.vector(scale * alternating(dim))
        assert n_norm(space, x) == pytest.approx(scale, rel=1e-6)
    assert n_norm(space, space.zero()) == 0.0


@pytest.mark.parametrize("space", [partial_sums_space(4), lattice_space(3, [1.0, 2.0, 0.5])], ids=['a11', 'l1'])
def test_n_norm_is_self_consistent(space, rng):
    for _ in range(8):
        x = space.vector(rng.standard_normal(space.dim))
        a = min_dominator(space, x).a
        # every dominator of a dominates x, and a dominates itself
        assert n_norm(space, a) == pytest.approx(n_norm(space, x), abs=1e-7)


def test_renormed_dominators_are_self_consistent(a11_4, rng):
    renormed = renorm_eps(a11_4, 0.5)
    for _ in range(5):
        x = a11_4.vector(rng.standard_normal(4))
        best = renormed.min_dominator(x)
        assert renormed.min_dominator(best.a).value == pytest.approx(best.value, abs=1e-6)
        assert best.value <= 1.5 ** 2 * renormed.norm(x) + 1e-7


# ==== scans ====

def test_sampled_vectors_are_normalized(a11_4):
    vectors = sample_unit_vectors(a11_4, 10, Config.SEED, extra=[np.zeros(4), alternating(4)])
    assert len(vectors) == 4 + 1 + 10
    assert all(norm(a11_4, v) == pytest.approx(1.0) for v in vectors)


@pytest.mark.parametrize('dim', [2, 3, 5, 8])
def test_partial_sum_order_is_not_normal(dim):
    space = partial_sums_space(dim)
    report = ratio_scan(space, 20, extra=[alternating(dim)])
    assert report.normality_ratio >= dim - 1e-6
    assert report.c_lower == pytest.approx(1.0, abs=1e-6)
    assert not report.below_one


def test_lattice_scan_is_exact(l1_3):
    report = ratio_scan(l1_3, 25)
    assert report.exact
    assert report.c_lower == pytest.approx(1.0)
    assert report.normality_ratio == pytest.approx(1.0)
    assert report.to_dict()['C_lower'] == report.c_lower


def test_scan_does_not_depend_on_workers(a11_4):
    serial = ratio_scan(a11_4, 30, seed=7)
    parallel = ratio_scan(a11_4, 30, seed=7, jobs=4)
    assert serial.c_lower == parallel.c_lower
    assert np.array_equal(serial.witness.coords, parallel.witness.coords)
    assert serial.normality_ratio == parallel.normality_ratio


def test_scan_needs_samples(a11_4):
    with pytest.raises(ArgumentError):
        ratio_scan(a11_4, 0)


def test_dominating_constants(l1_3, a11_4):
    lattice = dominating_constant(l1_3)
    assert (lattice.c_lower, lattice.c_used, lattice.exact) == (1.0, Config.SAFETY_FACTOR, True)

    sampled = dominating_constant(a11_4, 20)
    assert not sampled.exact
    assert sampled.c_used == pytest.approx(max(sampled.c_lower, 1.0) * Config.SAFETY_FACTOR)


def test_interval_union_radius(l1_3):
    radius, witness = interval_union_radius(l1_3, 10)
    assert radius == pytest.approx(1.0)
    assert witness is not None


# ==== regulators and renorming ====

@pytest.mark.parametrize('space_name', ['l1_2', 'a11_4'])
def test_uniform_regulator(space_name, request):
    space = request.getfixturevalue(space_name)
    base = np.zeros(space.dim)
    base[0], base[-1] = 1.0, -1.0
    xs = [space.vector(base * 2.0 ** -k) for k in range(6)]

    result = uniform_regulator(space, xs)
    assert all(e1 >= e2 for e1, e2 in zip(result.epsilons, result.epsilons[1:]))
    for eps, x in zip(result.epsilons, xs):
        bound = result.regulator * eps
        assert leq(space, -bound, x, tol=1e-7) and leq(space, x, bound, tol=1e-7)


def test_uniform_regulator_needs_terms(l1_2):
    with pytest.raises(ArgumentError):
        uniform_regulator(l1_2, [])


def test_renormed_norm(a11_4):
    renormed = renorm_eps(a11_4, 0.5)
    x = a11_4.vector(alternating(4))
    assert renormed.norm(x) == pytest.approx(0.5 * 1.0 + 4.0, abs=1e-7)
    assert renormed.min_dominator(a11_4.vector([1.0, 0.0, 0.0, 0.0])).value == pytest.approx(1.5, abs=1e-7)


def test_renormed_scan_respects_bound(a11_4):
    renormed = renorm_eps(a11_4, 0.5)
    report = renormed.ratio_scan(15)
    assert report.c_lower <= 1.5 ** 2 + 1e-8
    lower, upper = renormed.equivalence_bounds(15)
    assert lower == 1.0
    assert upper >= 1.0 + 0.5 * Config.SAFETY_FACTOR - 1e-8


@pytest.mark.parametrize('epsilon', [0.0, -1.0])
def test_renorm_needs_positive_epsilon(a11_4, epsilon):
    with pytest.raises(ArgumentError):
        renorm_eps(a11_4, epsilon)
