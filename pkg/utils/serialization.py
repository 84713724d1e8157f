# -*- coding: utf-8 -*-
"""
JSON descriptors for spaces, measures, functions, covers and groups

Descriptors are plain dicts as parsed from scenario files. Malformed
descriptors raise ScenarioError; mathematically invalid ones raise the
library's own errors (SpaceError, OrderError, ...).
"""

import logging
from typing import Dict, Mapping, Optional

import numpy as np

from models.convolution import FiniteMeasureOnGroup, Group, GroupFunction
from models.covers import KOETHE_WEIGHTS, ORDERED_SUBSPACES, PRINCIPAL_IDEALS, Cover
from models.measure import FINITE, TRUNCATED_N, IntegrableFunction, MeasureSpace
from models.spaces import ConeSpec, NormSpec, OrderedSpace, image_space, line_space, sum_space
from utils.errors import ScenarioError

logger = logging.getLogger(__name__)

SpaceRegistry = Dict[str, OrderedSpace]


def _field(data: Mapping, key: str, kind: str):
    if not isinstance(data, Mapping):
        raise ScenarioError(f'{kind} descriptor must be an object')
    try:
        return data[key]
    except KeyError:
        raise ScenarioError(f'{kind} descriptor is missing {key!r}') from None


def _matrix(value, name: str) -> np.ndarray:
    try:
        array = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f'{name} must be numeric') from None
    if array.ndim != 2:
        raise ScenarioError(f'{name} must be an array of rows')
    return array


def _vector(value, name: str) -> np.ndarray:
    try:
        array = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f'{name} must be numeric') from None
    if array.ndim != 1:
        raise ScenarioError(f'{name} must be a flat array')
    return array


# ==================== SPACES ====================

def partial_sums_matrix(dim: int) -> np.ndarray:
    """Lower-triangular ones: x ⪰ 0 iff every partial sum is nonnegative."""
    return np.tril(np.ones((dim, dim)))


def partial_sums_space(dim: int, space_id: Optional[str] = None) -> OrderedSpace:
    """ℝⁿ with the partial-sum order and the ℓ¹ norm."""
    return OrderedSpace(space_id or f'a11-{dim}', ConeSpec.transformed(partial_sums_matrix(dim)),
                        NormSpec.weighted_l1(np.ones(dim)))


def lattice_space(dim: int, weights=None, space_id: Optional[str] = None) -> OrderedSpace:
    weights = np.ones(dim) if weights is None else weights
    return OrderedSpace(space_id or f'l1-{dim}', ConeSpec.orthant(dim), NormSpec.weighted_l1(weights))


def cone_from_dict(data: Mapping) -> ConeSpec:
    kind = _field(data, 'kind', 'cone')
    if kind == 'orthant':
        return ConeSpec.orthant(int(_field(data, 'dim', 'cone')))
    if kind == 'transformed_orthant':
        return ConeSpec.transformed(_matrix(_field(data, 'T', 'cone'), 'T'))
    if kind == 'polyhedral':
        return ConeSpec.polyhedral(_matrix(_field(data, 'A', 'cone'), 'A'))
    if kind == 'partial_sums':
        return ConeSpec.transformed(partial_sums_matrix(int(_field(data, 'dim', 'cone'))))
    raise ScenarioError(f'unknown cone kind {kind!r}')


def cone_to_dict(cone: ConeSpec) -> dict:
    if cone.kind == 'orthant':
        return {'kind': 'orthant', 'dim': cone.dim}
    if cone.kind == 'transformed_orthant':
        return {'kind': 'transformed_orthant', 'T': cone.matrix.tolist()}
    if cone.kind == 'polyhedral':
        return {'kind': 'polyhedral', 'A': cone.matrix.tolist()}
    return {'kind': 'image', 'dim': cone.dim, 'parts': len(cone.parts)}


def norm_from_dict(data: Mapping) -> NormSpec:
    kind = _field(data, 'kind', 'norm')
    if kind == 'weighted_l1':
        return NormSpec.weighted_l1(_vector(_field(data, 'weights', 'norm'), 'weights'))
    if kind == 'sup':
        return NormSpec.sup()
    if kind == 'order_unit':
        return NormSpec.order_unit(_vector(_field(data, 'unit', 'norm'), 'unit'))
    raise ScenarioError(f'unknown norm kind {kind!r}')


def norm_to_dict(spec: NormSpec) -> dict:
    if spec.kind == 'weighted_l1':
        return {'kind': 'weighted_l1', 'weights': spec.weights.tolist()}
    if spec.kind == 'order_unit':
        return {'kind': 'order_unit', 'unit': spec.unit.tolist()}
    if spec.kind == 'inf_sum':
        return {'kind': 'inf_sum', 'left': spec.left.id, 'right': spec.right.id}
    if spec.kind == 'quotient':
        return {'kind': 'quotient', 'source': spec.source.id, 'T': spec.map.tolist()}
    return {'kind': spec.kind}


def space_to_dict(space: OrderedSpace) -> dict:
    data = {
        'id': space.id,
        'dim': space.dim,
        'cone': cone_to_dict(space.cone),
        'norm': norm_to_dict(space.norm),
        'directed': space.directed,
    }
    if space.basis is not None:
        data['basis'] = space.basis.tolist()
    return data


def _resolve(registry: SpaceRegistry, space_id) -> OrderedSpace:
    try:
        return registry[space_id]
    except (KeyError, TypeError):
        raise ScenarioError(f'unknown space {space_id!r}') from None


def space_from_dict(data: Mapping, registry: Optional[SpaceRegistry] = None) -> OrderedSpace:
    """
    Build one space; constructed kinds refer to earlier spaces by id

    Plain spaces: {"id", "cone", "norm"}. Presets: {"preset": "a11" | "lattice", "dim"}.
    Constructions: {"kind": "sum" | "line" | "image", ...}.
    """
    registry = registry if registry is not None else {}
    space_id = _field(data, 'id', 'space')
    if 'preset' in data:
        dim = int(_field(data, 'dim', 'space'))
        if data['preset'] == 'a11':
            return partial_sums_space(dim, space_id)
        if data['preset'] == 'lattice':
            weights = _vector(data['weights'], 'weights') if 'weights' in data else None
            return lattice_space(dim, weights, space_id)
        raise ScenarioError(f'unknown space preset {data["preset"]!r}')

    kind = data.get('kind', 'plain')
    if kind == 'plain':
        return OrderedSpace(space_id, cone_from_dict(_field(data, 'cone', 'space')),
                            norm_from_dict(_field(data, 'norm', 'space')),
                            require_directed=bool(data.get('require_directed', True)))
    if kind == 'sum':
        left = _resolve(registry, _field(data, 'left', 'sum space'))
        right = _resolve(registry, _field(data, 'right', 'sum space'))
        ambient = cone_from_dict(data['ambient_cone']) if 'ambient_cone' in data else None
        return sum_space(left, right,
                         _matrix(data['left_map'], 'left_map') if 'left_map' in data else None,
                         _matrix(data['right_map'], 'right_map') if 'right_map' in data else None,
                         ambient_cone=ambient, space_id=space_id)
    if kind == 'line':
        return line_space(_vector(_field(data, 'a', 'line space'), 'a'),
                          _vector(_field(data, 'x', 'line space'), 'x'),
                          cone_from_dict(_field(data, 'ambient_cone', 'line space')), space_id=space_id)
    if kind == 'image':
        source = _resolve(registry, _field(data, 'source', 'image space'))
        return image_space(source, _matrix(_field(data, 'T', 'image space'), 'T'),
                           cone_from_dict(_field(data, 'target_cone', 'image space')), space_id=space_id)
    raise ScenarioError(f'unknown space kind {kind!r}')


def load_spaces(descriptors) -> SpaceRegistry:
    """Build spaces in order so later descriptors can refer to earlier ones."""
    registry: SpaceRegistry = {}
    for data in descriptors or []:
        space = space_from_dict(data, registry)
        if space.id in registry:
            raise ScenarioError(f'space {space.id!r} is defined twice')
        registry[space.id] = space
    return registry


# ==================== MEASURES AND FUNCTIONS ====================

def measure_from_dict(data: Mapping) -> MeasureSpace:
    kind = data.get('kind', FINITE) if isinstance(data, Mapping) else None
    if kind == FINITE:
        atoms = _field(data, 'atoms', 'measure')
        try:
            return MeasureSpace.finite((a['label'], float(a['weight'])) for a in atoms)
        except (KeyError, TypeError):
            raise ScenarioError('atoms must be objects with label and weight') from None
    if kind == TRUNCATED_N:
        weights = data.get('weights', data.get('count'))
        if weights is None:
            raise ScenarioError('truncated measure needs weights or count')
        return MeasureSpace.truncated_n(weights if isinstance(weights, int) else list(_vector(weights, 'weights')),
                                        float(data.get('tail_bound', 0.0)))
    raise ScenarioError(f'unknown measure kind {kind!r}')


def measure_to_dict(space: MeasureSpace) -> dict:
    data = {'kind': space.kind, 'atoms': [{'label': a.label, 'weight': a.weight} for a in space.atoms]}
    if space.kind == TRUNCATED_N:
        data['tail_bound'] = space.tail_bound
    return data


def function_from_dict(data: Mapping, registry: SpaceRegistry) -> IntegrableFunction:
    """{"measure": {...}, "carrier": id, "values": [[...], ...], "tail_norm_bound"?}"""
    space = measure_from_dict(_field(data, 'measure', 'function'))
    carrier = _resolve(registry, _field(data, 'carrier', 'function'))
    values = _matrix(_field(data, 'values', 'function'), 'values')
    tail = data.get('tail_norm_bound')
    return IntegrableFunction(space, carrier, values, None if tail is None else float(tail))


def function_to_dict(f: IntegrableFunction) -> dict:
    data = {'measure': measure_to_dict(f.space), 'carrier': f.carrier.id, 'values': f.values.tolist()}
    if f.tail_norm_bound is not None:
        data['tail_norm_bound'] = f.tail_norm_bound
    return data


# ==================== COVERS ====================

def cover_from_manifest(data: Mapping, registry: Optional[SpaceRegistry] = None) -> Cover:
    """{"kind": ..., "members": [...]} plus the family's parameters."""
    kind = _field(data, 'kind', 'cover')
    members = data.get('members', [])
    if kind == PRINCIPAL_IDEALS:
        cover = Cover.principal_ideals(int(_field(data, 'dim', 'cover')), data.get('delta'))
        for member in members:
            cover.register_unit(_vector(_field(member, 'unit', 'member'), 'unit'))
    elif kind == KOETHE_WEIGHTS:
        cover = Cover.koethe_weights(measure_from_dict(_field(data, 'measure', 'cover')), data.get('ratio'))
        for member in members:
            cover.register_weight(_vector(_field(member, 'weight', 'member'), 'weight'))
    elif kind == ORDERED_SUBSPACES:
        registry = registry if registry is not None else {}
        cover = Cover.ordered_subspaces(_resolve(registry, _field(data, 'ambient', 'cover')))
        for member in members:
            cover.register_space(_resolve(registry, member))
    else:
        raise ScenarioError(f'unknown cover kind {kind!r}')
    return cover


def cover_to_manifest(cover: Cover) -> dict:
    data = {'kind': cover.kind, 'members': [member.to_dict() for member in cover.members()]}
    if cover.kind == PRINCIPAL_IDEALS:
        data.update(dim=cover.ambient.dim, delta=cover.delta)
    elif cover.kind == KOETHE_WEIGHTS:
        data.update(measure=measure_to_dict(cover.measure), reference=cover.reference.tolist())
    else:
        data['ambient'] = cover.ambient.id
    return data


# ==================== GROUPS ====================

def group_from_dict(data: Mapping) -> Group:
    kind = _field(data, 'kind', 'group')
    if kind in ('cyclic', 'zn'):
        return Group.cyclic(int(_field(data, 'order', 'group')))
    if kind in ('integers', 'z'):
        return Group.integers(int(_field(data, 'radius', 'group')), data.get('chain', 'linear'))
    if kind == 'table':
        return Group.from_table(_field(data, 'table', 'group'), int(data.get('identity', 0)), data.get('labels', ()))
    raise ScenarioError(f'unknown group kind {kind!r}')


def group_function_from_dict(data: Mapping, group: Group) -> GroupFunction:
    """{"polynomial": [c₀, c₁, ...]} | {"values": [...], "offset"?, "growth"?} | {"indicator": [...]}"""
    if not isinstance(data, Mapping):
        raise ScenarioError('function descriptor must be an object')
    if 'polynomial' in data:
        return GroupFunction.from_polynomial(group, _vector(data['polynomial'], 'polynomial'), data.get('radius'))
    if 'indicator' in data:
        return GroupFunction.indicator(group, [int(x) for x in data['indicator']])
    if 'values' in data:
        growth = data.get('growth')
        return GroupFunction.from_values(group, _vector(data['values'], 'values'), data.get('offset'),
                                         None if growth is None else (float(growth[0]), int(growth[1])))
    raise ScenarioError('function descriptor needs polynomial, indicator or values')


def group_measure_from_dict(data, group: Group) -> FiniteMeasureOnGroup:
    """{"masses": {"0": 0.5, "1": 0.5}} or a list of [element, mass] pairs."""
    masses = data.get('masses', data) if isinstance(data, Mapping) else data
    try:
        pairs = masses.items() if isinstance(masses, Mapping) else [(x, m) for x, m in masses]
        return FiniteMeasureOnGroup(group, {int(x): float(m) for x, m in pairs})
    except (TypeError, ValueError):
        raise ScenarioError('measure must map group elements to masses') from None
