# -*- coding: utf-8 -*-
"""
Scenarios: schema, operation registry and bundled reproductions

A scenario names one registered operation, the spaces it needs and the
operation inputs. Running it yields a schema-versioned report with the
outputs and the pass/fail transcript of every attached check.
"""

import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from config import Config
from models.bochner import (
    approximating_sequence, bochner_dominate, bochner_integral, integration_error, pettis_check,
)
from models.cones import dominating_constant, min_dominator, n_norm, ratio_scan, renorm_eps
from models.convolution import (
    FINITE, FiniteMeasureOnGroup, GroupFunction, convolve_direct, convolve_via_integral, weight_builder,
)
from models.covers import (
    KOETHE_WEIGHTS, PRINCIPAL_IDEALS, FunctionNorm, assign_member, koethe_norm,
    merged_norm, merged_norm_grid, principal_ideal_norm, u_integral,
)
from models.measure import IntegrableFunction, MeasureSpace, l1_norm, phi_integral
from models.spaces import OrderedSpace, cone_contains, dual_generators, leq, norm
from utils.errors import ConstructionError, OrbaError, ScenarioError
from utils.serialization import (
    SpaceRegistry, cover_from_manifest, cover_to_manifest, function_from_dict, group_from_dict,
    group_function_from_dict, group_measure_from_dict, lattice_space, load_spaces, partial_sums_space,
    space_to_dict,
)

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / 'scenarios'
EXAMPLE_IDS = (
    'a11', 'sum-norm', 'koethe-cover', 'convolution-z', 'renorm',
    'lattice', 'merged-norm', 'pettis', 'bochner-domination',
)
TOLERANCE_KEYS = {'cone': 'TOL_CONE', 'lp': 'TOL_LP', 'num': 'TOL_NUM'}
SCENARIO_FIELDS = ('name', 'description', 'operation', 'seed', 'tolerances', 'spaces', 'inputs', 'expect')


# ==================== REGISTRY ====================

@dataclass(frozen=True)
class Operation:
    name: str
    handler: Callable
    required: Tuple[str, ...]
    optional: Tuple[str, ...]
    description: str


OPERATIONS: Dict[str, Operation] = {}


def operation(name: str, required=(), optional=()):
    def decorator(func):
        summary = (func.__doc__ or '').strip().splitlines()
        OPERATIONS[name] = Operation(name, func, tuple(required), tuple(optional), summary[0] if summary else '')
        return func
    return decorator


@dataclass
class ScenarioContext:
    seed: int
    spaces: SpaceRegistry
    jobs: int = 1
    checks: List[dict] = field(default_factory=list)

    def check(self, name: str, passed, detail: str = '') -> bool:
        passed = bool(passed)
        self.checks.append({'name': name, 'passed': passed, 'detail': detail})
        if not passed:
            logger.warning('check %s failed: %s', name, detail)
        return passed

    def space(self, space_id) -> OrderedSpace:
        try:
            return self.spaces[space_id]
        except (KeyError, TypeError):
            raise ScenarioError(f'unknown space {space_id!r}') from None

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


_config_lock = threading.RLock()


@contextmanager
def config_override(**values):
    """Replace Config attributes for the duration of a run; runs with overrides are serialized."""
    with _config_lock if values else nullcontext():
        saved = {key: getattr(Config, key) for key in values}
        for key, value in values.items():
            setattr(Config, key, value)
        try:
            yield
        finally:
            for key, value in saved.items():
                setattr(Config, key, value)


# ==================== VALIDATION ====================

def validate_scenario(data) -> dict:
    if not isinstance(data, Mapping):
        raise ScenarioError('scenario must be a JSON object')
    unknown = set(data) - set(SCENARIO_FIELDS)
    if unknown:
        raise ScenarioError(f'unknown scenario fields: {", ".join(sorted(unknown))}')
    name = data.get('operation')
    if name not in OPERATIONS:
        raise ScenarioError(f'unknown operation {name!r}')
    op = OPERATIONS[name]

    inputs = data.get('inputs', {})
    if not isinstance(inputs, Mapping):
        raise ScenarioError('inputs must be an object')
    missing = [key for key in op.required if key not in inputs]
    if missing:
        raise ScenarioError(f'operation {name!r} is missing inputs: {", ".join(missing)}')
    extra = set(inputs) - set(op.required) - set(op.optional)
    if extra:
        raise ScenarioError(f'operation {name!r} does not take inputs: {", ".join(sorted(extra))}')

    if 'seed' in data and not isinstance(data['seed'], int):
        raise ScenarioError('seed must be an integer')
    tolerances = data.get('tolerances', {})
    if not isinstance(tolerances, Mapping) or set(tolerances) - set(TOLERANCE_KEYS):
        raise ScenarioError(f'tolerances may only set {", ".join(TOLERANCE_KEYS)}')
    if not isinstance(data.get('spaces', []), list):
        raise ScenarioError('spaces must be a list of descriptors')
    expect = data.get('expect', [])
    if not isinstance(expect, list) or not all(isinstance(e, Mapping) and 'output' in e for e in expect):
        raise ScenarioError('expect must be a list of objects with an output path')

    scenario = dict(data)
    scenario.setdefault('name', name)
    scenario['inputs'] = dict(inputs)
    return scenario


def _lookup(outputs, path: str):
    value = outputs
    for part in path.split('.'):
        try:
            value = value[int(part)] if isinstance(value, list) else value[part]
        except (KeyError, IndexError, ValueError, TypeError):
            raise ScenarioError(f'expected output {path!r} is not produced') from None
    return value


def _check_expectation(ctx: ScenarioContext, outputs: dict, expectation: Mapping):
    path = expectation['output']
    actual = _lookup(outputs, path)
    source = expectation.get('source', 'derived')
    tol = float(expectation.get('tol', Config.TOL_NUM))
    if 'value' in expectation:
        expected = expectation['value']
        if isinstance(expected, (bool, str)) or expected is None:
            passed = actual == expected
        else:
            try:
                passed = np.allclose(np.asarray(actual, dtype=float), np.asarray(expected, dtype=float),
                                     rtol=0.0, atol=tol)
            except (TypeError, ValueError):
                passed = False
        ctx.check(f'expect {path}', passed, f'[{source}] expected {expected}, got {actual}')
    if 'at_most' in expectation:
        ctx.check(f'expect {path} <= {expectation["at_most"]}', float(actual) <= float(expectation['at_most']) + tol,
                  f'[{source}] got {actual}')
    if 'at_least' in expectation:
        ctx.check(f'expect {path} >= {expectation["at_least"]}', float(actual) >= float(expectation['at_least']) - tol,
                  f'[{source}] got {actual}')


# ==================== RUNNING ====================

def run_scenario(data, seed: Optional[int] = None, jobs: int = 1, tolerances: Optional[Mapping] = None) -> dict:
    """
    Execute one scenario

    :param seed: overrides the scenario's seed (itself defaulting to Config.SEED)
    :return: report dict; library errors propagate
    """
    scenario = validate_scenario(data)
    seed = seed if seed is not None else scenario.get('seed', Config.SEED)
    merged = dict(scenario.get('tolerances', {}), **(tolerances or {}))
    overrides = {TOLERANCE_KEYS[key]: float(value) for key, value in merged.items() if value is not None}
    op = OPERATIONS[scenario['operation']]

    started = time.perf_counter()
    with config_override(**overrides):
        ctx = ScenarioContext(seed, load_spaces(scenario.get('spaces')), jobs)
        outputs = op.handler(ctx, scenario['inputs'])
        for expectation in scenario.get('expect', []):
            _check_expectation(ctx, outputs, expectation)
    wall_time = time.perf_counter() - started

    passed = all(check['passed'] for check in ctx.checks)
    logger.info('scenario %s (%s): %s in %.3fs', scenario['name'], op.name, 'PASS' if passed else 'FAIL', wall_time)
    return {
        'schema_version': Config.REPORT_SCHEMA_VERSION,
        'scenario': scenario['name'],
        'operation': op.name,
        'seed': seed,
        'inputs': scenario['inputs'],
        'outputs': outputs,
        'checks': ctx.checks,
        'passed': passed,
        'wall_time': wall_time,
    }


def _run_or_report(data, seed, jobs, tolerances) -> dict:
    try:
        return run_scenario(data, seed, jobs, tolerances)
    except ScenarioError:
        raise
    except OrbaError as exc:
        logger.error('scenario %s failed: %s', data.get('name', data.get('operation')), exc.message)
        return {
            'schema_version': Config.REPORT_SCHEMA_VERSION,
            'scenario': data.get('name', data.get('operation')),
            'operation': data.get('operation'),
            'seed': seed if seed is not None else data.get('seed', Config.SEED),
            'passed': False,
            'error': exc.to_dict(),
        }


def run_batch(scenarios: List[dict], seed: Optional[int] = None, jobs: int = 1,
              tolerances: Optional[Mapping] = None) -> dict:
    """Run scenarios on up to ``jobs`` threads; reports keep the input order."""
    for data in scenarios:
        validate_scenario(data)
    if jobs > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(lambda data: _run_or_report(data, seed, 1, tolerances), scenarios))
    else:
        reports = [_run_or_report(data, seed, jobs, tolerances) for data in scenarios]
    return {
        'schema_version': Config.REPORT_SCHEMA_VERSION,
        'reports': reports,
        'passed': all(report['passed'] for report in reports),
    }


def parse_scenarios(document) -> Tuple[List[dict], bool]:
    """(scenarios, is_batch) from one scenario, a bare list of them or {"scenarios": [...]}."""
    if isinstance(document, list):
        return document, True
    if isinstance(document, Mapping) and 'scenarios' in document:
        scenarios = document['scenarios']
        if not isinstance(scenarios, list):
            raise ScenarioError('"scenarios" must be a list')
        return scenarios, True
    return [document], False


def load_scenario_file(path) -> Tuple[List[dict], bool]:
    try:
        with open(path, encoding='utf-8') as handle:
            document = json.load(handle)
    except FileNotFoundError:
        raise ScenarioError(f'scenario file {path} does not exist') from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f'scenario file {path} is not valid JSON: {exc}') from None
    return parse_scenarios(document)


def run_document(document, seed: Optional[int] = None, jobs: int = 1,
                 tolerances: Optional[Mapping] = None) -> dict:
    scenarios, is_batch = parse_scenarios(document)
    if is_batch:
        return run_batch(scenarios, seed, jobs, tolerances)
    return run_scenario(scenarios[0], seed, jobs, tolerances)


def example_path(example_id: str) -> Path:
    if example_id not in EXAMPLE_IDS:
        raise ScenarioError(f'unknown example {example_id!r}; known: {", ".join(EXAMPLE_IDS)}')
    return SCENARIO_DIR / f'{example_id}.json'


def reproduce(example_id: str, seed: Optional[int] = None, jobs: int = 1,
              tolerances: Optional[Mapping] = None) -> dict:
    scenarios, is_batch = load_scenario_file(example_path(example_id))
    if is_batch:
        return run_batch(scenarios, seed, jobs, tolerances)
    return run_scenario(scenarios[0], seed, jobs, tolerances)


def list_examples() -> List[dict]:
    examples = []
    for example_id in EXAMPLE_IDS:
        scenarios, _ = load_scenario_file(example_path(example_id))
        examples.append({
            'id': example_id,
            'description': scenarios[0].get('description', '') if scenarios else '',
            'operations': sorted({s.get('operation') for s in scenarios}),
        })
    return examples


def describe_schema() -> dict:
    return {
        'schema_version': Config.REPORT_SCHEMA_VERSION,
        'scenario': {
            'fields': list(SCENARIO_FIELDS),
            'batch': '{"scenarios": [scenario, ...]}',
            'tolerances': sorted(TOLERANCE_KEYS),
            'expect': {'output': 'dotted path into outputs', 'value': 'expected value',
                       'at_most': 'upper bound', 'at_least': 'lower bound', 'tol': 'absolute tolerance',
                       'source': 'provenance tag'},
        },
        'operations': {
            name: {'required': list(op.required), 'optional': list(op.optional), 'description': op.description}
            for name, op in sorted(OPERATIONS.items())
        },
        'report': ['schema_version', 'scenario', 'operation', 'seed', 'inputs', 'outputs', 'checks',
                   'passed', 'wall_time'],
    }


# ==================== SPACES AND CONES ====================

def _vector(space: OrderedSpace, coords):
    """Scenario vectors are given in ambient coordinates."""
    return space.from_ambient(coords)


@operation('cone_contains', required=('space', 'x'))
def _cone_contains(ctx, inputs):
    """Membership of x in the cone of a space."""
    space = ctx.space(inputs['space'])
    return {'result': cone_contains(space, _vector(space, inputs['x']))}


@operation('leq', required=('space', 'x', 'y'))
def _leq(ctx, inputs):
    """Order comparison x ⪯ y, cross-checked against the dual generators when available."""
    space = ctx.space(inputs['space'])
    x, y = _vector(space, inputs['x']), _vector(space, inputs['y'])
    result = leq(space, x, y)
    if space.cone.simplicial:
        functionals = dual_generators(space)
        by_duals = bool(np.all(functionals @ x.coords <= functionals @ y.coords + Config.TOL_CONE))
        ctx.check('order_via_duals', by_duals == result, f'cone {result}, functionals {by_duals}')
    return {'result': result}


@operation('norm', required=('space', 'x'))
def _norm(ctx, inputs):
    """Norm of one vector."""
    space = ctx.space(inputs['space'])
    return {'norm': norm(space, _vector(space, inputs['x'])), 'space': space_to_dict(space)}


@operation('norm_table', required=('space', 'vectors'), optional=('scan_samples',))
def _norm_table(ctx, inputs):
    """Norms of several vectors, optionally with a dominating-ratio scan of the space."""
    space = ctx.space(inputs['space'])
    table = [{'x': list(map(float, coords)), 'norm': norm(space, _vector(space, coords))}
             for coords in inputs['vectors']]
    outputs = {'norms': [row['norm'] for row in table], 'table': table}
    if inputs.get('scan_samples'):
        outputs['scan'] = ratio_scan(space, int(inputs['scan_samples']), ctx.seed, jobs=ctx.jobs).to_dict()
    return outputs


@operation('dual_generators', required=('space',))
def _dual_generators(ctx, inputs):
    """Functionals characterizing the order of a simplicial cone."""
    return {'functionals': dual_generators(ctx.space(inputs['space'])).tolist()}


@operation('min_dominator', required=('space', 'x'), optional=('use_lattice_modulus',))
def _min_dominator(ctx, inputs):
    """Minimal-norm dominating element a with −a ⪯ x ⪯ a."""
    space = ctx.space(inputs['space'])
    x = _vector(space, inputs['x'])
    result = min_dominator(space, x, bool(inputs.get('use_lattice_modulus', True)))
    ctx.check('sandwich', leq(space, -result.a, x) and leq(space, x, result.a), f'a = {result.a.tolist()}')
    ctx.check('value_is_norm_of_a', abs(result.value - norm(space, result.a)) <= Config.TOL_NUM,
              f'value {result.value}')
    return {'a': space.to_ambient(result.a).tolist(), 'value': result.value,
            'residuals': result.residuals, 'exact': result.exact}


@operation('ratio_scan', required=('space',), optional=('samples',))
def _ratio_scan(ctx, inputs):
    """Sampled dominating and normality ratios."""
    report = ratio_scan(ctx.space(inputs['space']), inputs.get('samples'), ctx.seed, jobs=ctx.jobs)
    ctx.check('dominating_ratio_not_below_one', not report.below_one, f'C_lower = {report.c_lower:.9g}')
    return report.to_dict()


def _alternating(dim: int) -> np.ndarray:
    return np.array([(-1.0) ** k for k in range(dim)])


@operation('example_a11', optional=('dims',))
def _example_a11(ctx, inputs):
    """Partial-sum order on ℝⁿ: xₙ = (1, −1, 1, …) is dominated by e₁ while ∥xₙ∥₁ = n."""
    table = []
    for dim in inputs.get('dims', [2, 4, 8, 16]):
        space = partial_sums_space(int(dim))
        x, a = space.vector(_alternating(space.dim)), space.vector(np.eye(space.dim)[0])
        n_value = n_norm(space, x)
        row = {
            'n': space.dim,
            'norm_x': norm(space, x),
            'norm_a': norm(space, a),
            'N_x': n_value,
            'ratio': norm(space, x) / n_value,
            'sandwich': leq(space, -a, x) and leq(space, x, a),
        }
        table.append(row)
        ctx.check(f'sandwich[{dim}]', row['sandwich'], '−a ⪯ xₙ ⪯ a')
        ctx.check(f'norm_x[{dim}]', row['norm_x'] == space.dim, f'∥xₙ∥ = {row["norm_x"]}')
        ctx.check(f'norm_a[{dim}]', row['norm_a'] == 1.0, f'∥a∥ = {row["norm_a"]}')
        ctx.check(f'N_x[{dim}]', abs(n_value - 1.0) <= 1e-9, f'N(xₙ) = {n_value:.12g}')
        ctx.check(f'ratio[{dim}]', row['ratio'] >= space.dim - 1e-6, f'∥xₙ∥/N(xₙ) = {row["ratio"]:.9g}')
    return {'table': table, 'ratios': [row['ratio'] for row in table]}


@operation('renorm_scan', required=('space', 'epsilons'), optional=('samples',))
def _renorm_scan(ctx, inputs):
    """Dominating ratio under ρ = εN + ∥·∥ against (1+ε)²."""
    space = ctx.space(inputs['space'])
    table = []
    for epsilon in inputs['epsilons']:
        renormed = renorm_eps(space, float(epsilon))
        report = renormed.ratio_scan(inputs.get('samples'), ctx.seed, jobs=ctx.jobs)
        bound = (1.0 + renormed.epsilon) ** 2
        n_part, base_part = renormed.addends(report.witness)
        table.append({'epsilon': renormed.epsilon, 'ratio': report.c_lower, 'bound': bound,
                      'witness_eps_N': n_part, 'witness_norm': base_part})
        ctx.check(f'renorm_bound[{epsilon}]', report.c_lower <= bound + 1e-6,
                  f'ratio {report.c_lower:.9g} vs (1+ε)² = {bound:.9g}')
    return {'table': table}


@operation('lattice_domination', optional=('dims', 'samples'))
def _lattice_domination(ctx, inputs):
    """LP dominators on weighted ℓ¹ lattices equal |x| with N(x) = ∥x∥."""
    rng = ctx.rng()
    dims = inputs.get('dims', list(range(2, 9)))
    samples = int(inputs.get('samples', 200))
    value_error = modulus_error = 0.0
    for index in range(samples):
        dim = int(dims[index % len(dims)])
        space = lattice_space(dim, rng.uniform(0.5, 2.0, dim), f'lattice-{dim}-{index}')
        x = space.vector(rng.standard_normal(dim))
        result = min_dominator(space, x, use_lattice_modulus=False)
        scale = max(1.0, norm(space, x))
        value_error = max(value_error, abs(result.value - norm(space, x)) / scale)
        modulus_error = max(modulus_error, float(np.abs(result.a.coords - np.abs(x.coords)).max()) / scale)
    ctx.check('value_equals_norm', value_error <= 1e-9, f'max relative error {value_error:.3e}')
    ctx.check('dominator_is_modulus', modulus_error <= 1e-9, f'max relative error {modulus_error:.3e}')
    return {'samples': samples, 'max_value_error': value_error, 'max_modulus_error': modulus_error}


# ==================== INTEGRALS ====================

@operation('phi_integral', required=('function',))
def _phi_integral(ctx, inputs):
    """Elementary integral of a simple function."""
    f = function_from_dict(inputs['function'], ctx.spaces)
    return {'value': phi_integral(f).tolist(), 'l1_norm': l1_norm(f).to_dict()}


@operation('bochner_integral', required=('function',), optional=('dyadic_steps',))
def _bochner_integral(ctx, inputs):
    """Bochner integral with its error bound, compared with two approximating sequences."""
    f = function_from_dict(inputs['function'], ctx.spaces)
    value = bochner_integral(f)
    steps = int(inputs.get('dyadic_steps', 30))

    truncated = phi_integral(approximating_sequence(f, 'truncation')[-1])
    dyadic = phi_integral(approximating_sequence(f, 'dyadic', steps)[-1])
    ctx.check('truncation_limit', np.allclose(truncated.coords, value.coords, rtol=0.0, atol=Config.TOL_NUM),
              f'truncation gives {truncated.tolist()}')
    rounding = f.space.total_mass * 2.0 ** -(steps + 1)
    ctx.check('dyadic_limit', np.abs(dyadic.coords - value.coords).max() <= rounding + Config.TOL_NUM,
              f'dyadic gives {dyadic.tolist()} (rounding bound {rounding:.3e})')
    return {'value': value.tolist(), 'error_bound': integration_error(f), 'l1_norm': l1_norm(f).to_dict()}


def _random_function(rng, space: MeasureSpace, carrier: OrderedSpace, decay: bool) -> IntegrableFunction:
    values = rng.standard_normal((len(space), carrier.dim))
    if decay:
        values *= 2.0 ** -np.arange(1, len(space) + 1)[:, None]
    return IntegrableFunction(space, carrier, values)


@operation('bochner_dominate', required=('carrier', 'epsilon'),
           optional=('function', 'runs', 'atoms', 'tail_bound', 'samples'))
def _bochner_dominate(ctx, inputs):
    """Dominating functions g with −g ⪯ f ⪯ g and ∫∥g∥ ≤ C(∫∥f∥ + ε)."""
    carrier = ctx.space(inputs['carrier'])
    epsilon = float(inputs['epsilon'])
    constant = dominating_constant(carrier, inputs.get('samples'), ctx.seed)

    if 'function' in inputs:
        functions = [function_from_dict(inputs['function'], ctx.spaces)]
    else:
        rng = ctx.rng()
        space = MeasureSpace.truncated_n(int(inputs.get('atoms', 20)), float(inputs.get('tail_bound', 0.0)))
        functions = [_random_function(rng, space, carrier, decay=True) for _ in range(int(inputs.get('runs', 50)))]

    table = []
    for run, f in enumerate(functions):
        try:
            pair = bochner_dominate(f, epsilon, constant)
        except ConstructionError as exc:
            table.append({'run': run, 'passed': False, 'error': exc.message})
            continue
        l1_g = l1_norm(pair.g).value
        table.append({'run': run, 'passed': True, 'l1_f': l1_norm(f).value, 'l1_g': l1_g,
                      'bound': pair.bound, 'levels': len(pair.levels)})

    passed = sum(row['passed'] for row in table)
    ctx.check('all_runs_dominated', passed == len(table), f'{passed}/{len(table)} runs')
    return {'C_lower': constant.c_lower, 'C_used': constant.c_used, 'exact_constant': constant.exact,
            'runs': len(table), 'passed_runs': passed, 'table': table}


@operation('integral_positivity', required=('carriers',), optional=('runs', 'atoms'))
def _integral_positivity(ctx, inputs):
    """Integrals of atomwise-positive functions stay in the cone."""
    rng = ctx.rng()
    worst = 0.0
    runs = int(inputs.get('runs', 100))
    for run in range(runs):
        carrier = ctx.space(inputs['carriers'][run % len(inputs['carriers'])])
        functionals = dual_generators(carrier)
        rays = np.linalg.inv(functionals)
        atoms = int(inputs.get('atoms', 5))
        space = MeasureSpace.finite((str(k), w) for k, w in enumerate(rng.uniform(0.1, 2.0, atoms)))
        values = rng.uniform(0.0, 1.0, (atoms, carrier.dim)) @ rays.T
        value = bochner_integral(IntegrableFunction(space, carrier, values))
        worst = min(worst, float((functionals @ value.coords).min()))
    ctx.check('integral_in_cone', worst >= -1e-9, f'smallest dual value {worst:.3e}')
    return {'runs': runs, 'min_dual_value': worst}


@operation('pettis_check', required=('function',), optional=('perturbation',))
def _pettis_check(ctx, inputs):
    """The integral is the unique vector matching every dual-functional integral."""
    f = function_from_dict(inputs['function'], ctx.spaces)
    value = bochner_integral(f)
    direction = ctx.rng().standard_normal(f.carrier.dim)
    perturbed = value + f.carrier.vector(float(inputs.get('perturbation', 1e-3)) * direction
                                         / np.abs(direction).max())
    accepted = pettis_check(f)
    rejected = not pettis_check(f, candidate=perturbed)
    ctx.check('integral_accepted', accepted)
    ctx.check('perturbation_rejected', rejected, f'perturbed to {perturbed.tolist()}')
    return {'value': value.tolist(), 'accepted': accepted, 'perturbation_rejected': rejected}


# ==================== COVERS ====================

def _alternative_member(cover, values: np.ndarray) -> str:
    """A second member holding the values, distinct from the assigned one."""
    peak = np.abs(values).max(axis=0)
    if cover.kind == PRINCIPAL_IDEALS:
        return cover.register_unit(2.0 * peak + 1.0)
    if cover.kind == KOETHE_WEIGHTS:
        return cover.register_weight(cover.reference / (2.0 * peak + 2.0))
    return cover.register_space(cover.ambient)


@operation('assign_member', required=('cover', 'values'))
def _assign_member(ctx, inputs):
    """Member of a cover holding the given values."""
    cover = cover_from_manifest(inputs['cover'], ctx.spaces)
    values = np.atleast_2d(np.asarray(inputs['values'], dtype=float))
    member = cover.member(assign_member(cover, values))
    norms = [norm(member.space, member.embed(row)) for row in values]
    return {'member': member.id, 'description': member.to_dict(), 'member_norms': norms,
            'manifest': cover_to_manifest(cover)}


@operation('u_integral', required=('cover',), optional=('function', 'runs', 'atoms'))
def _u_integral(ctx, inputs):
    """B-integral in two covering members and their join."""
    cover = cover_from_manifest(inputs['cover'], ctx.spaces)
    registry = dict(ctx.spaces, **{cover.ambient.id: cover.ambient})
    if 'function' in inputs:
        functions = [function_from_dict(inputs['function'], registry)]
    else:
        rng = ctx.rng()
        atoms = int(inputs.get('atoms', 4))
        functions = []
        for _ in range(int(inputs.get('runs', 50))):
            space = MeasureSpace.finite((str(k), w) for k, w in enumerate(rng.uniform(0.1, 2.0, atoms)))
            functions.append(_random_function(rng, space, cover.ambient, decay=False))

    table = []
    worst = 0.0
    for run, f in enumerate(functions):
        member = assign_member(cover, f)
        alternative = _alternative_member(cover, f.values)
        first = u_integral(cover, f, member_id=member, alternative_id=alternative)
        second = u_integral(cover, f, member_id=alternative, alternative_id=member)
        direct = phi_integral(f).coords
        deviations = [
            float(np.abs(first.value.coords - second.value.coords).max()),
            float(np.abs(first.value.coords - direct).max()),
        ]
        scale = max(1.0, float(np.abs(direct).max()))
        worst = max(worst, max(deviations) / scale)
        table.append({'run': run, 'member': first.member_id, 'alternative': second.member_id,
                      'join': first.join_id, 'value': first.value.tolist(), 'deviation': max(deviations)})

    ctx.check('members_agree', worst <= 1e-9, f'max relative deviation {worst:.3e} over {len(table)} functions')
    return {'kind': cover.kind, 'value': table[0]['value'], 'max_deviation': worst,
            'members': len(cover.members()), 'table': table}


@operation('koethe_norm', required=('weights', 'nu', 'f'))
def _koethe_norm(ctx, inputs):
    """ρ_w(f) = Σ |fᵢ|·wᵢ·νᵢ."""
    return {'value': koethe_norm(inputs['weights'], inputs['nu'], inputs['f'])}


@operation('merged_norm', required=('w1', 'w2', 'nu', 'f'), optional=('step', 'random_instances'))
def _merged_norm(ctx, inputs):
    """Merged Köthe norm in closed form, against the grid infimum."""
    def compare(w1, w2, nu, f):
        rho1, rho2 = FunctionNorm.koethe(w1, nu), FunctionNorm.koethe(w2, nu)
        closed = merged_norm(rho1, rho2, f)
        grid = merged_norm_grid(rho1, rho2, f, inputs.get('step'))
        return closed, grid

    closed, grid = compare(inputs['w1'], inputs['w2'], inputs['nu'], inputs['f'])
    ctx.check('closed_form_matches_grid', abs(closed - grid) <= 1e-6 * max(1.0, closed),
              f'closed {closed:.12g}, grid {grid:.12g}')

    table = []
    rng = ctx.rng()
    for index in range(int(inputs.get('random_instances', 0))):
        atoms = int(rng.integers(2, 5))
        w1, w2 = rng.uniform(0.1, 3.0, atoms), rng.uniform(0.1, 3.0, atoms)
        nu, f = rng.uniform(0.5, 2.0, atoms), rng.uniform(-5.0, 5.0, atoms)
        row_closed, row_grid = compare(w1, w2, nu, f)
        table.append({'instance': index, 'atoms': atoms, 'closed': row_closed, 'grid': row_grid})
    if table:
        worst = max(abs(row['closed'] - row['grid']) / max(1.0, row['closed']) for row in table)
        ctx.check('random_instances_match', worst <= 1e-6, f'max relative gap {worst:.3e}')
    return {'value': closed, 'grid': grid, 'table': table}


@operation('principal_ideal_norm', required=('u', 'f'))
def _principal_ideal_norm(ctx, inputs):
    """Smallest λ with |f| ≤ λu."""
    return {'value': principal_ideal_norm(inputs['u'], inputs['f'])}


# ==================== CONVOLUTION ====================

@operation('weight_builder', required=('group', 'f'))
def _weight_builder(ctx, inputs):
    """Weight putting every translate into one principal ideal."""
    group = group_from_dict(inputs['group'])
    weight = weight_builder(group_function_from_dict(inputs['f'], group))
    ctx.check('w_dominates_v', bool(np.all(weight.w >= weight.v - Config.TOL_NUM)))
    ctx.check('translate_bound', weight.checked_pairs > 0, f'{weight.checked_pairs} pairs verified')
    return weight.to_dict()


@operation('convolve', required=('group', 'mu', 'f'), optional=('check_integral', 'max_deviation'))
def _convolve(ctx, inputs):
    """μ ∗ f directly and, optionally, as a B-integral."""
    group = group_from_dict(inputs['group'])
    f = group_function_from_dict(inputs['f'], group)
    mu = group_measure_from_dict(inputs['mu'], group)
    direct = convolve_direct(mu, f)
    elements = group.elements()
    outputs = {'elements': elements, 'direct': direct.values.tolist()}
    if not inputs.get('check_integral', True):
        outputs['table'] = [{'y': y, 'direct': v} for y, v in zip(elements, direct.values.tolist())]
        return outputs

    result = convolve_via_integral(mu, f)
    limit = float(inputs.get('max_deviation', Config.TOL_NUM))
    ctx.checks.extend(result.checks)
    ctx.check('max_deviation', result.deviation <= limit, f'{result.deviation:.3e} ≤ {limit:.0e}')
    outputs.update(
        integral=result.function.values.tolist(),
        deviation=result.deviation,
        member=result.member_id,
        alphas=result.weight.alphas,
        table=[{'y': y, 'direct': d, 'integral': i}
               for y, d, i in zip(elements, direct.values.tolist(), result.function.values.tolist())],
    )
    return outputs


@operation('convolution_sweep', required=('group',), optional=('measures', 'denominator'))
def _convolution_sweep(ctx, inputs):
    """Both convolution paths for every basis indicator against seeded rational measures."""
    group = group_from_dict(inputs['group'])
    if group.kind != FINITE:
        raise ScenarioError('convolution_sweep needs a finite group')
    rng = ctx.rng()
    denominator = int(inputs.get('denominator', 4))
    measures = []
    while len(measures) < int(inputs.get('measures', 20)):
        numerators = rng.integers(0, denominator + 1, group.order)
        if numerators.any():
            measures.append(FiniteMeasureOnGroup(group, dict(enumerate(numerators / denominator))))

    worst, count = 0.0, 0
    for element in group.elements():
        f = GroupFunction.indicator(group, [element])
        for mu in measures:
            worst = max(worst, convolve_via_integral(mu, f).deviation)
            count += 1
    ctx.check('integral_matches_direct', worst <= 1e-12, f'max deviation {worst:.3e} over {count} pairs')
    return {'pairs': count, 'max_deviation': worst}
