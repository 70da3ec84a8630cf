"""Tests for the module-level API (run_scenario, batch, get_reports_data, get_reports_output)."""
import json

import pytest
import yaml

import app
import catalog
import cohom
import settings


Q8_IN_SL23 = [[5, 2, 0, 6, 3, 1, 7, 4], [4, 6, 3, 5, 1, 7, 0, 2]]


def scenario(**kw):
    kw.setdefault('id', 't')
    return app.Scenario(**kw)


def verdicts(report):
    return {c['check']: c['verdict'] for c in report.checks}


# ---------------------------------------------------------------------------
# Scenario files and generators
# ---------------------------------------------------------------------------


def test_load_scenarios_defaults():
    [s] = app.load_scenarios(text="format: 1\nscenarios:\n  - {id: a, group: S3, p: 3}\n")
    assert s.checks == ['saturation']
    assert s.subgroup_gens is None
    assert s.max_degree is None


def test_load_scenarios_maps_check_aliases():
    [s] = app.load_scenarios(text="format: 1\nscenarios:\n  - {id: a, group: S3, p: 3, checks: [weyl]}\n")
    assert s.checks == ['remark14']


def test_load_scenarios_rejects_bad_entries():
    with pytest.raises(catalog.CatalogError) as info:
        app.load_scenarios(path='s.yaml', text="format: 1\nscenarios:\n  - {id: a, group: S3, p: 3, checks: [nope]}\n")
    assert info.value.line == 3
    assert info.value.field == 'checks'
    with pytest.raises(catalog.CatalogError, match="duplicate id"):
        app.load_scenarios(text="format: 1\nscenarios:\n  - {id: a, group: S3, p: 3}\n  - {id: a, group: S4, p: 2}\n")
    with pytest.raises(catalog.CatalogError, match="expected int"):
        app.load_scenarios(text="format: 1\nscenarios:\n  - {id: a, group: S3, p: three}\n")
    with pytest.raises(catalog.CatalogError, match="unknown field"):
        app.load_scenarios(text="format: 1\nscenarios:\n  - {id: a, group: S3, p: 3, colour: red}\n")


def test_parse_generator_forms():
    as_list = app.parse_generator([1, 2, 0], 3)
    assert app.parse_generator("[1, 2, 0]", 3) == as_list
    assert app.parse_generator("(0 1 2)", 3) == as_list
    with pytest.raises(catalog.CatalogError):
        app.parse_generator([1, 1, 0], 3)


# ---------------------------------------------------------------------------
# run_scenario
# ---------------------------------------------------------------------------


def test_mislin_scenario_in_s3():
    s = scenario(group='S3', p=3, ambient_sub_gens=[[1, 2, 0]], max_degree=7,
                 checks=['control', 'mislin', 'dims', 'transport', 'probe'], probe={'n': 2, 'rmax': 1})
    report = app.run_scenario(s)
    assert report.error is None
    assert verdicts(report) == {'control': 'does_not_control', 'mislin': 'consistent', 'dims': 'detected',
                                'transport': 'skipped', 'probe': 'none'}
    dims = next(c for c in report.checks if c['check'] == 'dims')
    assert dims['dims'] == [1, 0, 0, 1, 1, 0, 0, 1]
    assert dims['result']['strict_at'] == [1, 2, 5, 6]
    assert report.status == 'ok'
    assert report.subgroup_order == 3


def test_dims_below_degree_four_can_stay_undetected():
    report = app.run_scenario(scenario(group='S3', p=3, ambient_sub_gens=[[1, 2, 0]], max_degree=0,
                                       checks=['dims']))
    assert verdicts(report) == {'dims': 'undetected'}
    assert app.exit_code([report]) == app.EXIT_OK


def test_dims_without_strict_inclusion_by_degree_four(monkeypatch):
    monkeypatch.setattr(app.cohom, 'stable_inclusion',
                        lambda Gsys, Fsys, n: cohom.StableInclusion(n, 1, 1, True, False))
    odd = app.run_scenario(scenario(group='S3', p=3, ambient_sub_gens=[[1, 2, 0]], max_degree=4,
                                    checks=['dims']))
    assert verdicts(odd) == {'dims': 'inconsistent'}
    assert app.exit_code([odd]) == app.EXIT_INCONSISTENT
    two = app.run_scenario(scenario(group='SL(2,3)', p=2, ambient_sub_gens=Q8_IN_SL23, max_degree=4,
                                    checks=['dims']))
    assert verdicts(two) == {'dims': 'undetected'}


def test_quaternion_scenario_is_recorded():
    s = scenario(group='SL(2,3)', p=2, ambient_sub_gens=Q8_IN_SL23, max_degree=2,
                 checks=['control', 'mislin', 'dims', 'transport'])
    report = app.run_scenario(s)
    assert verdicts(report) == {'control': 'controls', 'mislin': 'recorded', 'dims': 'detected',
                                'transport': 'consistent'}
    assert not report.inconsistent


def test_identity_scenario():
    report = app.run_scenario(scenario(group='C3xC3', p=3, max_degree=3,
                                       checks=['mislin', 'dims', 'strata', 'weyl']))
    v = verdicts(report)
    assert v['mislin'] == 'consistent'
    assert v['dims'] == 'computed'
    assert v['remark14'] == 'consistent'
    dims = next(c for c in report.checks if c['check'] == 'dims')
    assert dims['dims'] == [1, 2, 3, 4]


def test_nonsaturated_scenario():
    report = app.run_scenario(scenario(group='S4', p=2, subgroup_gens=[[1, 2, 3, 0]],
                                       checks=['saturation', 'mislin']))
    sat, mis = report.checks
    assert sat['verdict'] == 'not_saturated'
    assert 'has no fully automized member' in sat['detail']
    assert mis['verdict'] == 'precondition_failed'
    assert report.input_error


def test_local_scenario():
    s = scenario(group='S4', p=2, subgroup_gens=["(0 1 2 3)", "(1 3)"], local_gens=["(0 2)(1 3)"],
                 checks=['local'])
    [row] = app.run_scenario(s).checks
    assert row['verdict'] == 'recorded'
    assert row['result']['local'] == '<(0 2)(1 3)>'


def test_local_needs_generators():
    [row] = app.run_scenario(scenario(group='S4', p=2, checks=['local'])).checks
    assert row['verdict'] == 'precondition_failed'


@pytest.mark.parametrize("kw, fragment", [
    ({'group': 'S5', 'p': 2}, 'unknown group'),
    ({'group': 'S3', 'p': 4}, 'not prime'),
    ({'group': 'S3', 'p': 3, 'subgroup_gens': [[1, 0, 2]]}, 'not a 3-group'),
    ({'group': 'S3', 'p': 3, 'ambient_sub_gens': [[1, 0, 2]]}, 'does not contain P'),
    ({'group': 'A4', 'p': 2, 'ambient_sub_gens': ["(0 1)"]}, 'ambient_sub_gens'),
])
def test_input_errors(kw, fragment):
    report = app.run_scenario(scenario(**kw))
    assert fragment in report.error
    assert report.status == 'error'
    assert report.checks == []


def test_cap_exceeded_is_recorded_not_fatal():
    settings.configure(max_cochain_dim=10)
    report = app.run_scenario(scenario(group='Q8', p=2, max_degree=3, checks=['dims']))
    [row] = report.checks
    assert row['verdict'] == 'cap_exceeded'
    assert row['result']['limit'] == 10
    assert app.exit_code([report]) == app.EXIT_OK


def test_max_degree_falls_back_to_settings():
    settings.configure(max_degree=1)
    report = app.run_scenario(scenario(group='S3', p=3, checks=['dims']))
    assert report.checks[0]['result']['N'] == 1


def test_millis_are_zero_unless_timings_requested():
    report = app.run_scenario(scenario(group='S3', p=3))
    assert report.checks[0]['millis'] == 0


# ---------------------------------------------------------------------------
# batch and exit codes
# ---------------------------------------------------------------------------


def test_batch_empty_is_ok():
    code, reports, df = app.batch([])
    assert code == app.EXIT_OK
    assert reports == []
    assert df.empty


def test_batch_exit_codes(monkeypatch):
    good = scenario(id='good', group='S3', p=3, checks=['strata'])
    bad = scenario(id='bad', group='nope', p=3)
    assert app.batch([good])[0] == app.EXIT_OK
    monkeypatch.setitem(app.CHECK_RUNNERS, 'strata', lambda setup, s: {'verdict': 'inconsistent'})
    assert app.batch([good])[0] == app.EXIT_INCONSISTENT
    code, reports, df = app.batch([good, bad])
    assert code == app.EXIT_INPUT
    assert [r.scenario_id for r in reports] == ['good', 'bad']
    assert list(df['status']) == ['inconsistent', 'error']


def test_batch_is_deterministic():
    scenarios = [scenario(id='a', group='S3', p=3, ambient_sub_gens=[[1, 2, 0]], checks=['mislin', 'dims']),
                 scenario(id='b', group='D8', p=2, checks=['saturation', 'strata'])]
    _, first, _ = app.batch(scenarios)
    _, second, _ = app.batch(scenarios, parallelism=2)
    assert app.to_json(first) == app.to_json(second)


# ---------------------------------------------------------------------------
# get_reports_data / get_reports_output
# ---------------------------------------------------------------------------


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / 'scen.yaml'
    path.write_text("format: 1\nscenarios:\n"
                    "  - {id: s3, group: S3, p: 3, ambient_sub_gens: ['(0 1 2)'], checks: [control, mislin]}\n"
                    "  - {id: q8, group: Q8, p: 2, checks: [saturation]}\n")
    return str(path)


def test_get_reports_data(scenario_file):
    data = app.get_reports_data([scenario_file])
    assert data['status'] == 'ok'
    assert data['exit_code'] == 0
    assert data['count'] == 2 == len(data['reports'])
    assert data['reports'][0]['scenario_id'] == 's3'


def test_get_reports_output_json(scenario_file):
    data = json.loads(app.get_reports_output([scenario_file]))
    assert data['version'] == app.VERSION
    assert data['reports'][1]['checks'][0]['verdict'] == 'saturated'


def test_get_reports_output_yaml(scenario_file):
    data = yaml.safe_load(app.get_reports_output([scenario_file], format='yaml'))
    assert data['count'] == 2


def test_get_reports_output_csv(scenario_file):
    lines = app.get_reports_output([scenario_file], format='csv').splitlines()
    assert lines[0] == ','.join(app.CSV_COLUMNS)
    assert lines[1].startswith('s3,control,does_not_control,')
    assert len(lines) == 4


def test_get_reports_data_raises_on_bad_file(tmp_path):
    path = tmp_path / 'bad.yaml'
    path.write_text("format: 1\nscenarios: 3\n")
    with pytest.raises(catalog.CatalogError):
        app.get_reports_data([str(path)])
