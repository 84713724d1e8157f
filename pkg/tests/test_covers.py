from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis.extra.numpy import arrays
from hypothesis.strategies import floats

from models.covers import (
    Cover, FunctionNorm, assign_member, join, koethe_norm, merged_norm, merged_norm_grid, principal_ideal_norm,
    u_integral,
)
from models.measure import IntegrableFunction, MeasureSpace
from models.spaces import ConeSpec, NormSpec, OrderedSpace, norm
from oracles import alternating
from utils.errors import ArgumentError, MismatchError, NotInIdealError, UncoverableError


@pytest.fixture
def two_atoms():
    return MeasureSpace.finite([('a', 1.0), ('b', 0.5)])


# ==== function norms ====

def test_principal_ideal_norm():
    assert principal_ideal_norm([1.0, 2.0], [1.0, 1.0]) == 1.0
    assert principal_ideal_norm([1.0, 2.0], [0.0, -4.0]) == 2.0
    with pytest.raises(NotInIdealError):
        principal_ideal_norm([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(ArgumentError):
        principal_ideal_norm([-1.0, 1.0], [0.0, 1.0])
    with pytest.raises(MismatchError):
        principal_ideal_norm([1.0, 1.0], [1.0, 1.0, 1.0])


def test_koethe_and_merged_norms():
    assert koethe_norm([1.0, 2.0], [1.0, 1.0], [3.0, -4.0]) == pytest.approx(11.0)

    rho1 = FunctionNorm.koethe([1.0, 2.0], [1.0, 1.0])
    rho2 = FunctionNorm.koethe([2.0, 1.0], [1.0, 1.0])
    assert merged_norm(rho1, rho2, [3.0, 4.0]) == pytest.approx(7.0)
    assert merged_norm_grid(rho1, rho2, [3.0, 4.0]) == pytest.approx(7.0, abs=1e-2)


def test_merged_norm_matches_grid_search(rng):
    masses = [1.0, 0.5, 2.0]
    for _ in range(5):
        rho1 = FunctionNorm.koethe(rng.uniform(0.5, 2.0, 3), masses)
        rho2 = FunctionNorm.koethe(rng.uniform(0.5, 2.0, 3), masses)
        f = rng.uniform(-2.0, 2.0, 3)
        exact = merged_norm(rho1, rho2, f)
        assert merged_norm_grid(rho1, rho2, f) == pytest.approx(exact, rel=1e-2)
        assert merged_norm_grid(rho1, rho2, f) >= exact - 1e-9


def test_function_norm_arguments():
    with pytest.raises(MismatchError):
        FunctionNorm.koethe([1.0], [1.0, 1.0])
    with pytest.raises(ArgumentError):
        FunctionNorm.koethe([1.0, 0.0], [1.0, 1.0])
    with pytest.raises(ArgumentError):
        FunctionNorm.koethe([1.0, 1.0], [1.0, -1.0])
    with pytest.raises(MismatchError):
        FunctionNorm.merged(FunctionNorm.koethe([1.0], [1.0]), FunctionNorm.koethe([1.0], [2.0]))
    with pytest.raises(MismatchError):
        FunctionNorm.koethe([1.0, 1.0], [1.0, 1.0])([1.0])


MASSES = [1.0, 0.5, 2.0]
FUNCTIONS = arrays(np.float64, 3, elements=floats(-10, 10, allow_subnormal=False))
WEIGHTS = arrays(np.float64, 3, elements=floats(0.1, 4))


def _function_norm(kind, w1, w2):
    rho1 = FunctionNorm.koethe(w1, MASSES)
    if kind == 'koethe':
        return rho1
    return FunctionNorm.merged(rho1, FunctionNorm.koethe(w2, MASSES))


@pytest.mark.parametrize('kind', ['koethe', 'merged'])
@seed(17)
@settings(max_examples=40, deadline=None)
@given(f=FUNCTIONS, g=FUNCTIONS, shrink=arrays(np.float64, 3, elements=floats(0, 1)), t=floats(-5, 5),
       w1=WEIGHTS, w2=WEIGHTS)
def test_function_norm_axioms(kind, f, g, shrink, t, w1, w2):
    rho = _function_norm(kind, w1, w2)
    assert rho(f) >= 0.0
    assert (rho(f) > 0.0) == bool(f.any())
    assert rho(t * f) == pytest.approx(abs(t) * rho(f), rel=1e-9, abs=1e-12)
    assert rho(f + g) <= rho(f) + rho(g) + 1e-9
    # |shrink·g| ≤ |g| pointwise
    assert rho(shrink * g) <= rho(g) + 1e-9

    # 0 ≤ min(|f|, level) increases to |f|
    levels = np.linspace(0.0, np.abs(f).max(), 6)
    values = [rho(np.minimum(np.abs(f), level)) for level in levels]
    assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(rho(f))


@seed(19)
@settings(max_examples=40, deadline=None)
@given(f=FUNCTIONS, w1=WEIGHTS, w2=WEIGHTS)
def test_merged_norm_is_definite_and_below_both(f, w1, w2):
    rho1, rho2 = FunctionNorm.koethe(w1, MASSES), FunctionNorm.koethe(w2, MASSES)
    merged = merged_norm(rho1, rho2, f)
    assert merged <= min(rho1(f), rho2(f)) + 1e-12
    # the smallest weight·mass bounds the merged norm from below
    floor = float(np.minimum(w1, w2).min() * min(MASSES) * np.abs(f).sum())
    assert merged >= floor - 1e-12
    assert (merged > 0.0) == bool(f.any())


# ==== principal ideals ====

def test_principal_ideal_assignment_and_join():
    cover = Cover.principal_ideals(3)
    first = assign_member(cover, [[1.0, -2.0, 0.0]])
    second = assign_member(cover, [[0.0, 0.0, 5.0]])
    assert first != second
    assert np.allclose(cover.member(first).unit, [1.0, 2.0, 0.0], atol=1e-8)

    joined = join(cover, first, second)
    assert np.allclose(cover.member(joined).unit, cover.member(first).unit + cover.member(second).unit)
    assert join(cover, first, first) == first


@seed(23)
@settings(max_examples=30, deadline=None)
@given(u=WEIGHTS, v=WEIGHTS, t=arrays(np.float64, 3, elements=floats(-1, 1)))
def test_ideal_join_does_not_increase_norms(u, v, t):
    cover = Cover.principal_ideals(3)
    first, second = cover.register_unit(u), cover.register_unit(v)
    joined = cover.member(join(cover, first, second))
    for member_id, unit in ((first, u), (second, v)):
        x = t * unit
        member = cover.member(member_id)
        assert norm(joined.space, joined.embed(x)) <= norm(member.space, member.embed(x)) + 1e-9


def test_registration_is_deduplicated():
    cover = Cover.principal_ideals(2)
    assert cover.register_unit([1.0, 2.0]) == cover.register_unit([1.0, 2.0])
    assert len(cover.members()) == 1
    assert assign_member(cover, np.zeros((2, 2))) == cover.default_member()
    assert len(cover.members()) == 2


def test_concurrent_registration():
    cover = Cover.principal_ideals(2)
    units = [[1.0, float(k)] for k in range(1, 6)] * 20
    with ThreadPoolExecutor(max_workers=8) as pool:
        ids = list(pool.map(cover.register, units))
    assert len(cover.members()) == 5
    assert len(set(ids)) == 5
    assert sorted(member.id for member in cover.members()) == [f'E{k}' for k in range(1, 6)]


def test_ideal_member_outside_its_support():
    cover = Cover.principal_ideals(3)
    narrow = cover.register_unit([1.0, 0.0, 0.0])
    member = cover.member(narrow)
    assert member.space.dim == 1
    space = MeasureSpace.finite([('a', 1.0)])
    f = IntegrableFunction(space, cover.ambient, [[0.0, 1.0, 0.0]])
    with pytest.raises(UncoverableError):
        u_integral(cover, f, member_id=narrow)


def test_ideal_integral_agrees_across_members(two_atoms):
    cover = Cover.principal_ideals(3)
    f = IntegrableFunction(two_atoms, cover.ambient, [[1.0, -1.0, 0.0], [2.0, 0.0, 4.0]])
    result = u_integral(cover, f)
    assert result.value.tolist() == pytest.approx([2.0, -1.0, 2.0])
    assert all(check['passed'] for check in result.checks)
    assert result.to_dict()['member'] == result.member_id


@pytest.mark.parametrize('unit', [[0.0, 0.0], [1.0, -1.0], [1.0, 1.0, 1.0]])
def test_invalid_units(unit):
    with pytest.raises(ArgumentError):
        Cover.principal_ideals(2).register_unit(unit)


# ==== Köthe weights ====

def test_koethe_assignment():
    cover = Cover.koethe_weights(MeasureSpace.truncated_n(3))
    member = cover.member(assign_member(cover, [[0.0, 3.0, 0.0]]))
    assert np.allclose(member.weight, [1.0, 0.125, 0.25])
    assert norm(member.space, member.embed([0.0, 3.0, 0.0])) == pytest.approx(0.375)


def test_koethe_join_takes_the_smaller_weight():
    cover = Cover.koethe_weights(MeasureSpace.truncated_n(2))
    first = cover.register_weight([1.0, 0.25])
    second = cover.register_weight([0.5, 0.5])
    joined = cover.member(join(cover, first, second))
    assert joined.weight.tolist() == [0.5, 0.25]


@seed(29)
@settings(max_examples=30, deadline=None)
@given(w1=WEIGHTS, w2=WEIGHTS, f=FUNCTIONS)
def test_koethe_join_does_not_increase_norms(w1, w2, f):
    cover = Cover.koethe_weights(MeasureSpace.finite(list(zip('abc', MASSES))))
    first, second = cover.register_weight(w1), cover.register_weight(w2)
    joined = cover.member(join(cover, first, second))
    for member_id in (first, second):
        member = cover.member(member_id)
        assert norm(joined.space, joined.embed(f)) <= norm(member.space, member.embed(f)) + 1e-9


def test_koethe_integral(two_atoms):
    cover = Cover.koethe_weights(two_atoms)
    f = IntegrableFunction(two_atoms, cover.ambient, [[1.0, 2.0], [-2.0, 0.0]])
    assert u_integral(cover, f).value.tolist() == pytest.approx([0.0, 2.0])


@pytest.mark.parametrize('ratio', [0.0, 1.0, 1.5])
def test_koethe_reference_ratio(ratio):
    with pytest.raises(ArgumentError):
        Cover.koethe_weights(MeasureSpace.truncated_n(2), ratio)


# ==== ordered subspaces ====

def test_subspace_cover_needs_a_directed_space():
    cone = ConeSpec.polyhedral([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    ray = OrderedSpace('ray', cone, NormSpec.weighted_l1([1.0, 1.0]), require_directed=False)
    with pytest.raises(UncoverableError):
        Cover.ordered_subspaces(ray)


def test_subspace_cover_integral(a11_4):
    cover = Cover.ordered_subspaces(a11_4)
    space = MeasureSpace.finite([('a', 1.0), ('b', 0.5)])
    f = IntegrableFunction(space, a11_4, [alternating(4), 2.0 * alternating(4)])

    member_id = assign_member(cover, f)
    assert cover.member(member_id).space.dim == 2
    assert assign_member(cover, [alternating(4)]) == member_id

    result = u_integral(cover, f)
    assert result.member_id == member_id
    assert np.allclose(result.value.coords, 2.0 * alternating(4), atol=1e-8)
    assert result.checks[0]['name'] == 'member_independent'


def test_cover_rejects_foreign_functions(a11_4, l1_2):
    cover = Cover.ordered_subspaces(a11_4)
    f = IntegrableFunction.zero(MeasureSpace.finite([('a', 1.0)]), l1_2)
    with pytest.raises(MismatchError):
        assign_member(cover, f)
    with pytest.raises(MismatchError):
        assign_member(cover, [[1.0, 2.0]])
    with pytest.raises(ArgumentError):
        cover.member('D99')


def test_unknown_cover_kind(a11_4):
    with pytest.raises(ArgumentError):
        Cover('hexagons', a11_4)
