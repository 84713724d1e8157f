import numpy as np
import pytest

from models.convolution import Group
from models.covers import KOETHE_WEIGHTS, PRINCIPAL_IDEALS
from models.measure import TRUNCATED_N
from models.spaces import norm
from utils.errors import ScenarioError, SpaceError
from utils.serialization import (
    cone_from_dict, cover_from_manifest, cover_to_manifest, function_from_dict, function_to_dict,
    group_from_dict, group_function_from_dict, group_measure_from_dict, load_spaces, measure_from_dict,
    space_from_dict, space_to_dict,
)

LINES = [
    {'id': 'x', 'cone': {'kind': 'orthant', 'dim': 1}, 'norm': {'kind': 'weighted_l1', 'weights': [1.0]}},
    {'id': 'y', 'cone': {'kind': 'orthant', 'dim': 1}, 'norm': {'kind': 'weighted_l1', 'weights': [1.0]}},
    {'id': 'plane', 'kind': 'sum', 'left': 'x', 'right': 'y', 'left_map': [[1.0], [0.0]], 'right_map': [[0.0], [1.0]]},
]


# ==== spaces ====

def test_presets():
    space = space_from_dict({'id': 'A', 'preset': 'a11', 'dim': 3})
    assert space.id == 'A' and space.cone.kind == 'transformed_orthant'
    lattice = space_from_dict({'id': 'L', 'preset': 'lattice', 'dim': 2, 'weights': [1.0, 3.0]})
    assert lattice.is_lattice
    assert norm(lattice, lattice.vector([1.0, 1.0])) == 4.0


def test_constructions_refer_to_earlier_spaces():
    registry = load_spaces(LINES)
    plane = registry['plane']
    assert norm(plane, plane.from_ambient([3.0, -4.0])) == pytest.approx(7.0, abs=1e-9)
    data = space_to_dict(plane)
    assert data['norm'] == {'kind': 'inf_sum', 'left': 'x', 'right': 'y'}
    assert data['cone']['kind'] == 'image'


def test_line_and_image_descriptors():
    registry = load_spaces([
        {'id': 'l1', 'preset': 'lattice', 'dim': 2},
        {'id': 'ou', 'kind': 'line', 'a': [1.0, 1.0], 'x': [1.0, -1.0], 'ambient_cone': {'kind': 'orthant', 'dim': 2}},
        {'id': 'shear', 'kind': 'image', 'source': 'l1', 'T': [[1.0, 0.0], [1.0, 1.0]],
         'target_cone': {'kind': 'orthant', 'dim': 2}},
    ])
    assert norm(registry['ou'], registry['ou'].from_ambient([2.0, 0.0])) == pytest.approx(2.0, abs=1e-9)
    assert space_to_dict(registry['shear'])['norm']['source'] == 'l1'


@pytest.mark.parametrize('descriptors', [
    [{'id': 'a', 'preset': 'a11', 'dim': 2}, {'id': 'a', 'preset': 'lattice', 'dim': 2}],
    [{'id': 's', 'kind': 'sum', 'left': 'missing', 'right': 'missing'}],
    [{'id': 'p', 'preset': 'hilbert', 'dim': 2}],
    [{'id': 'q', 'kind': 'tensor'}],
    [{'cone': {'kind': 'orthant', 'dim': 1}}],
    [{'id': 'c', 'cone': {'kind': 'ice_cream', 'dim': 3}, 'norm': {'kind': 'sup'}}],
    [{'id': 'n', 'cone': {'kind': 'orthant', 'dim': 1}, 'norm': {'kind': 'energy'}}],
    [{'id': 'm', 'cone': {'kind': 'polyhedral', 'A': [1.0, 2.0]}, 'norm': {'kind': 'sup'}}],
])
def test_malformed_space_descriptors(descriptors):
    with pytest.raises(ScenarioError):
        load_spaces(descriptors)


def test_invalid_space_is_a_library_error():
    with pytest.raises(SpaceError):
        space_from_dict({'id': 'bad', 'cone': {'kind': 'orthant', 'dim': 2},
                         'norm': {'kind': 'weighted_l1', 'weights': [1.0, -1.0]}})


def test_non_generating_cone_can_be_declared():
    space = space_from_dict({'id': 'ray', 'cone': {'kind': 'polyhedral', 'A': [[1, 0], [-1, 0], [0, 1]]},
                             'norm': {'kind': 'sup'}, 'require_directed': False})
    assert not space.directed
    assert cone_from_dict({'kind': 'partial_sums', 'dim': 2}).simplicial


# ==== measures and functions ====

def test_measures():
    finite = measure_from_dict({'atoms': [{'label': 'A', 'weight': 2.0}, {'label': 'B', 'weight': 0.5}]})
    assert finite.labels == ['A', 'B']
    truncated = measure_from_dict({'kind': 'truncated_n', 'count': 3, 'tail_bound': 0.5})
    assert truncated.kind == TRUNCATED_N and len(truncated) == 3 and truncated.tail_bound == 0.5
    weighted = measure_from_dict({'kind': 'truncated_n', 'weights': [1.0, 0.5]})
    assert weighted.weights.tolist() == [1.0, 0.5]


@pytest.mark.parametrize('data', [
    {'kind': 'lebesgue'},
    {'atoms': [{'label': 'A'}]},
    {'kind': 'truncated_n'},
    'atoms',
])
def test_malformed_measures(data):
    with pytest.raises(ScenarioError):
        measure_from_dict(data)


def test_function_descriptor():
    registry = load_spaces([{'id': 'A', 'preset': 'a11', 'dim': 2}])
    data = {
        'measure': {'kind': 'truncated_n', 'count': 2},
        'carrier': 'A',
        'values': [[1.0, -1.0], [0.5, 0.0]],
        'tail_norm_bound': 0.25,
    }
    f = function_from_dict(data, registry)
    assert f.tail == 0.25
    assert function_to_dict(f)['values'] == data['values']
    with pytest.raises(ScenarioError):
        function_from_dict(dict(data, carrier='B'), registry)
    with pytest.raises(ScenarioError):
        function_from_dict(dict(data, values=[1.0, 2.0]), registry)


# ==== covers ====

def test_ideal_cover_manifest():
    cover = cover_from_manifest({'kind': PRINCIPAL_IDEALS, 'dim': 2, 'members': [{'unit': [1.0, 2.0]}]})
    manifest = cover_to_manifest(cover)
    assert manifest['dim'] == 2
    assert manifest['members'][0]['unit'] == [1.0, 2.0]


def test_koethe_cover_manifest():
    cover = cover_from_manifest({'kind': KOETHE_WEIGHTS, 'measure': {'kind': 'truncated_n', 'count': 2},
                                 'ratio': 0.25, 'members': [{'weight': [1.0, 0.5]}]})
    manifest = cover_to_manifest(cover)
    assert manifest['reference'] == [1.0, 0.25]
    assert manifest['members'][0]['weight'] == [1.0, 0.5]


def test_subspace_cover_manifest():
    registry = load_spaces([{'id': 'A', 'preset': 'a11', 'dim': 2}, {'id': 'B', 'preset': 'a11', 'dim': 2}])
    cover = cover_from_manifest({'kind': 'ordered_subspaces', 'ambient': 'A', 'members': ['B']}, registry)
    manifest = cover_to_manifest(cover)
    assert manifest['ambient'] == 'A'
    assert [member['id'] for member in manifest['members']] == ['B']


def test_unknown_cover_kind():
    with pytest.raises(ScenarioError):
        cover_from_manifest({'kind': 'atlas'})


# ==== groups ====

def test_group_descriptors():
    assert group_from_dict({'kind': 'zn', 'order': 6}).order == 6
    z = group_from_dict({'kind': 'z', 'radius': 4, 'chain': 'dyadic'})
    assert z.chain == 'dyadic' and z.elements()[0] == -4
    klein = group_from_dict({'kind': 'table', 'table': [[0, 1], [1, 0]], 'labels': ['e', 'g']})
    assert klein.label(1) == 'g'
    with pytest.raises(ScenarioError):
        group_from_dict({'kind': 'lie'})


def test_group_function_descriptors():
    z = Group.integers(2)
    assert group_function_from_dict({'polynomial': [0.0, 1.0]}, z)(5) == 5.0
    assert group_function_from_dict({'indicator': [0]}, z).values.tolist() == [0.0, 0.0, 1.0, 0.0, 0.0]
    bounded = group_function_from_dict({'values': [1.0, 1.0, 1.0, 1.0, 1.0], 'growth': [1.0, 0]}, z)
    assert bounded.growth == (1.0, 0)
    with pytest.raises(ScenarioError):
        group_function_from_dict({'samples': [1.0]}, z)


def test_group_measure_descriptors():
    z = Group.integers(2)
    assert group_measure_from_dict({'masses': {'1': 0.5, '-1': 0.5}}, z).support == [-1, 1]
    assert group_measure_from_dict([[0, 2.0]], z).masses == {0: 2.0}
    with pytest.raises(ScenarioError):
        group_measure_from_dict({'masses': 'uniform'}, z)
    assert np.isclose(group_measure_from_dict({'0': 1.0}, z).total_mass, 1.0)
