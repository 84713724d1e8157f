import pytest

from config import Config
from utils.errors import ScenarioError
from web.scenarios import (
    EXAMPLE_IDS, OPERATIONS, config_override, describe_schema, example_path, list_examples, reproduce,
    run_batch, run_document, run_scenario, validate_scenario,
)

LATTICE_NORM = {
    'name': 'lattice-norm',
    'operation': 'norm',
    'spaces': [{'id': 'l', 'preset': 'lattice', 'dim': 2}],
    'inputs': {'space': 'l', 'x': [3, -4]},
    'expect': [{'output': 'norm', 'value': 7, 'source': 'trivial'}],
}

RAY_DOMINATOR = {
    'name': 'ray-dominator',
    'operation': 'min_dominator',
    'spaces': [{'id': 'ray', 'cone': {'kind': 'polyhedral', 'A': [[1, 0], [-1, 0], [0, 1]]},
                'norm': {'kind': 'sup'}, 'require_directed': False}],
    'inputs': {'space': 'ray', 'x': [0, 1]},
}


@pytest.mark.parametrize('example_id', EXAMPLE_IDS)
def test_bundled_reproductions_pass(example_id):
    report = reproduce(example_id)
    failed = [check for item in report.get('reports', [report]) for check in item.get('checks', [])
              if not check['passed']]
    assert report['passed'], failed
    assert report['schema_version'] == Config.REPORT_SCHEMA_VERSION


def test_single_scenario_report():
    report = run_scenario(LATTICE_NORM)
    assert report['passed']
    assert report['outputs']['norm'] == 7.0
    assert report['seed'] == Config.SEED
    assert report['checks'] == [{'name': 'expect norm', 'passed': True,
                                 'detail': '[trivial] expected 7, got 7.0'}]


def test_failed_expectation_fails_the_report():
    scenario = dict(LATTICE_NORM, expect=[{'output': 'norm', 'value': 8}, {'output': 'norm', 'at_least': 6}])
    report = run_scenario(scenario)
    assert not report['passed']
    assert [check['passed'] for check in report['checks']] == [False, True]


def test_bounds_in_expectations():
    scenario = dict(LATTICE_NORM, expect=[{'output': 'norm', 'at_most': 7}, {'output': 'norm', 'at_least': 7.5}])
    assert [check['passed'] for check in run_scenario(scenario)['checks']] == [True, False]


def test_missing_output_is_invalid():
    with pytest.raises(ScenarioError):
        run_scenario(dict(LATTICE_NORM, expect=[{'output': 'space.cone.parts.3', 'value': 1}]))


@pytest.mark.parametrize('patch', [
    {'colour': 'blue'},
    {'operation': 'integrate_everything'},
    {'inputs': {'space': 'l'}},
    {'inputs': {'space': 'l', 'x': [1, 1], 'y': [0, 0]}},
    {'inputs': [1, 2]},
    {'seed': 'forty-two'},
    {'tolerances': {'cone': 1e-6, 'gap': 1e-3}},
    {'spaces': {'id': 'l'}},
    {'expect': [{'value': 7}]},
])
def test_invalid_scenarios(patch):
    with pytest.raises(ScenarioError):
        validate_scenario(dict(LATTICE_NORM, **patch))


def test_non_object_scenario():
    with pytest.raises(ScenarioError):
        validate_scenario(['norm'])


def test_validation_fills_in_the_name():
    scenario = {key: value for key, value in LATTICE_NORM.items() if key != 'name'}
    assert validate_scenario(scenario)['name'] == 'norm'


def test_seed_override():
    assert run_scenario(dict(LATTICE_NORM, seed=3))['seed'] == 3
    assert run_scenario(dict(LATTICE_NORM, seed=3), seed=7)['seed'] == 7


def test_tolerance_overrides_are_restored():
    before, before_lp = Config.TOL_NUM, Config.TOL_LP
    report = run_scenario(dict(LATTICE_NORM, tolerances={'num': 1e-6}), tolerances={'lp': 1e-10})
    assert report['passed']
    assert Config.TOL_NUM == before
    assert Config.TOL_LP == before_lp


def test_config_override_restores_on_error():
    before = Config.TOL_CONE
    with pytest.raises(RuntimeError):
        with config_override(TOL_CONE=1.0):
            assert Config.TOL_CONE == 1.0
            raise RuntimeError('boom')
    assert Config.TOL_CONE == before


def test_batch_reports_failures_in_place():
    report = run_batch([LATTICE_NORM, RAY_DOMINATOR, LATTICE_NORM], jobs=2)
    assert not report['passed']
    assert [item['passed'] for item in report['reports']] == [True, False, True]
    assert report['reports'][1]['error']['kind'] == 'no_dominator'
    assert report['reports'][1]['scenario'] == 'ray-dominator'


def test_batch_validates_every_scenario_first():
    with pytest.raises(ScenarioError):
        run_batch([LATTICE_NORM, {'operation': 'nope'}])


def test_empty_batch_passes():
    report = run_document({'scenarios': []})
    assert report == {'schema_version': Config.REPORT_SCHEMA_VERSION, 'reports': [], 'passed': True}
    assert run_document([]) == report


def test_batch_document_must_hold_a_list():
    with pytest.raises(ScenarioError):
        run_document({'scenarios': LATTICE_NORM})


def test_examples_and_schema():
    examples = list_examples()
    assert [example['id'] for example in examples] == list(EXAMPLE_IDS)
    assert all(example['operations'] for example in examples)
    schema = describe_schema()
    assert set(schema['operations']) == set(OPERATIONS)
    assert schema['operations']['convolve']['required'] == ['group', 'mu', 'f']
    with pytest.raises(ScenarioError):
        example_path('a12')
