import json

import pandas as pd
import pytest

from thermosteer import cli
from thermosteer.routines.definitions import *
from thermosteer.routines.prjbuild import readwrite_json

from conftest import TELEPORT_OPTIMUM

# ------------------------------------------------------------------------------
def test_template(tmp_path):
    outfile = str(tmp_path / 'project.json')
    assert cli.main(['template', '--out', outfile, '--set', 'Machine.g=0.3',
                     '--set', 'Analysis.measurements=pauli3']) == 0
    project = readwrite_json(outfile)
    assert project['Machine']['g'] == 0.3
    assert project['Analysis']['measurements'] == 'pauli3'

def test_template_list_and_underscore_paths(tmp_path):
    outfile = str(tmp_path / 'project.json')
    assert cli.main(['template', '--out', outfile, '--set', 'Sweep.Axes[1].count=20',
                     '--set', 'Tradeoff_seed=4', '--set', 'Machine.limits=["TB_zero"]']) == 0
    project = readwrite_json(outfile)
    assert project['Sweep']['Axes'][1]['count'] == 20
    assert project['Sweep']['Axes'][0]['count'] == 50
    assert project['Tradeoff']['seed'] == 4
    assert project['Machine']['limits'] == ['TB_zero']

def test_template_unknown_entry(tmp_path):
    outfile = str(tmp_path / 'project.json')
    assert cli.main(['template', '--out', outfile, '--set', 'Machine.h=1']) == 2

def test_analyze_preset(tmp_path):
    outfile = str(tmp_path / 'report.json')
    assert cli.main(['analyze', '--preset', 'teleport-optimal', '--no-steering',
                     '--json', outfile]) == 0
    r = readwrite_json(outfile)
    assert r['singlet_fraction'] == pytest.approx(TELEPORT_OPTIMUM, abs = 1e-12)
    assert r['teleport_useful'] is True
    assert r['q_star'] is None
    assert r['params']['model'] == 'FermionInversion'

def test_analyze_to_stdout(capsys):
    assert cli.main(['analyze', '--preset', 'g0', '--no-steering']) == 0
    r = json.loads(capsys.readouterr().out)
    assert r['concurrence'] == 0.0
    assert r['no_go']['telecond2']

def test_analyze_numeric_matches_analytic(tmp_path):
    params = tmp_path / 'machine.json'
    params.write_text(json.dumps({
        'bath': 'fermionic', 'g': 0.03, 'gammaA': 0.05, 'gammaB': 0.07,
        'limits': ['TA_zero_minus', 'TB_zero'],
    }))
    numeric, analytic = str(tmp_path / 'numeric.json'), str(tmp_path / 'analytic.json')
    assert cli.main(['analyze', '--params', str(params), '--no-steering', '--json', numeric]) == 0
    assert cli.main(['analyze', '--params', str(params), '--model', 'FermionInversion',
                     '--no-steering', '--json', analytic]) == 0
    a, b = readwrite_json(numeric), readwrite_json(analytic)
    for key in ('singlet_fraction', 'chsh', 'concurrence', 'purity'):
        assert a[key] == pytest.approx(b[key], abs = 1e-7)

def test_analyze_project_file(tmp_path):
    project = str(tmp_path / 'project.json')
    cli.main(['template', '--out', project, '--set', 'Analysis.steering=false'])
    outfile = str(tmp_path / 'report.json')
    assert cli.main(['analyze', '--params', project, '--json', outfile]) == 0
    r = readwrite_json(outfile)
    assert r['params']['model'] == 'FermionInversion'
    assert r['steering_verdict'] is None

def test_analyze_with_steering(tmp_path):
    outfile = str(tmp_path / 'report.json')
    assert cli.main(['analyze', '--preset', 'inversion-steer', '--json', outfile]) == 0
    r = readwrite_json(outfile)
    assert r['steering_verdict'] == 'Steerable'
    assert r['q_star'] == pytest.approx(0.109, abs = 5e-3)
    assert r['params']['measurements'] == 'dodecahedron'

@pytest.mark.parametrize('argv', [
    ['analyze', '--preset', 'g0', '--model', 'FermionBogus'],
    ['analyze', '--preset', 'nope'],
    ['analyze', '--preset', 'g0', '--measurements', 'tetrahedron'],
    ['analyze', '--params', 'does-not-exist.json'],
    ['analyze', '--preset', 'inversion-steer', '--model', 'BosonColdB'],
    ['analyze', '--preset', 'g0', '--tolerance', 'x_support=2'],
    ['analyze', '--preset', 'g0', '--tolerance', 'speed=0.1'],
    ['analyze', '--preset', 'g0', '--tolerance', 'garbage'],
    ['sweep', '--model', 'FermionInversion', '--grid', 'g=0.1:1', '--grid', 'gammaB=1:2:2',
     '--out', 'x.csv'],
    ['sweep', '--model', 'FermionInversion', '--grid', 'g=0.1:1:2', '--grid', 'gammaB=1:2:2'],
    ['tradeoff', '--model', 'FermionInversion', '--objective', 'Chsh', '--pgrid', '0.1',
     '--out', 'x.csv'],
    ['tradeoff', '--model', 'FermionInversion', '--objective', 'Fidelity', '--pgrid', '0.1',
     '--seed', '0', '--out', 'x.csv'],
])
def test_invalid_input_exit_code(argv):
    assert cli.main(argv) == 2

def test_workers_must_be_positive():
    assert cli.main(['analyze', '--preset', 'g0', '--no-steering', '--workers', '0']) == 2

# ------------------------------------------------------------------------------
def test_sweep(tmp_path):
    outfile = str(tmp_path / 'grid.csv')
    assert cli.main(['sweep', '--model', 'FermionInversion', '--grid', 'g=0.1:0.5:2',
                     '--grid', 'gammaB=1:2:2', '--no-steering', '--out', outfile,
                     '--workers', '1']) == 0
    data = pd.read_csv(outfile, comment = '#')
    assert len(data) == 4
    assert list(data['gammaB_over_gammaA']) == pytest.approx([1.0, 2.0, 1.0, 2.0])

def test_sweep_from_project(tmp_path):
    project = str(tmp_path / 'project.json')
    cli.main(['template', '--out', project, '--set', 'Sweep.Axes[0].count=2',
              '--set', 'Sweep.Axes[1].count=3', '--set', 'Sweep.steering=false'])
    outfile = str(tmp_path / 'grid.csv')
    assert cli.main(['sweep', '--project', project, '--out', outfile]) == 0
    assert len(pd.read_csv(outfile, comment = '#')) == 6

def test_tolerance_overrides_project(tmp_path):
    project = str(tmp_path / 'project.json')
    cli.main(['template', '--out', project])
    parser = cli.build_parser()
    args = parser.parse_args(['sweep', '--project', project, '--out', 'x.csv',
                              '--tolerance', 'kernel_rank=1e-6'])
    config = cli.RunConfig.from_args(args)
    assert config.tolerances['kernel_rank'] == 1e-6
    assert config.tolerances['x_support'] == X_SUPPORT_TOL

def test_tradeoff_settings():
    args = cli.build_parser().parse_args(['tradeoff', '--preset', 'inversion-chsh-88',
                                          '--seed', '3', '--out', 'x.csv'])
    config = cli.RunConfig.from_args(args)
    assert config.seed == 3
    assert config.model.label.startswith('FermionChargedFinite')
    assert config.pgrid[0] == 0.01
    args = cli.build_parser().parse_args(['tradeoff', '--model', 'FermionChargedFinite',
                                          '--u', '10', '--population', '0.75',
                                          '--objective', 'Chsh', '--pgrid', '0.1:0.3:3',
                                          '--seed', '1', '--out', 'x.csv'])
    config = cli.RunConfig.from_args(args)
    assert config.model.u == 10.0
    assert config.pgrid == pytest.approx([0.1, 0.2, 0.3])

# ------------------------------------------------------------------------------
def test_solver_stall_exit_code(monkeypatch):
    def stalled(*args, **kwargs):
        raise SolverStalled('status infeasible_inaccurate')
    monkeypatch.setattr(cli, 'noise_robustness', stalled)
    assert cli.main(['analyze', '--preset', 'inversion-steer']) == 3

def test_regression_failure_exit_code(monkeypatch, tmp_path):
    summary = {'passed': False, 'seed': 0, 'checks': {'teleport_optimum': {'passed': False}}}
    monkeypatch.setattr(cli, 'regress', lambda **kwargs: summary)
    outfile = str(tmp_path / 'regress.json')
    assert cli.main(['regress', '--json', outfile]) == 1
    assert readwrite_json(outfile) == summary

def test_regress_skip_slow(monkeypatch):
    seen = {}
    def fake(**kwargs):
        seen.update(kwargs)
        return {'passed': True, 'seed': kwargs['seed'], 'checks': {}}
    monkeypatch.setattr(cli, 'regress', fake)
    assert cli.main(['regress', '--skip-slow', '--seed', '5']) == 0
    assert seen == {'skip_slow': True, 'seed': 5}
