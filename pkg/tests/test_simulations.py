import math

import numpy as np
import pandas as pd
import pytest

from thermosteer.routines.definitions import *
from thermosteer.routines.filtering import FermionChargedFinite, FilterScope, Objective
from thermosteer.routines.machine import AnalyticModel
from thermosteer.simulations.presets import *
from thermosteer.simulations.sweep import COLUMNS, MAX_GRID_POINTS, Sweep, parse_grid_spec
from thermosteer.simulations.tradeoff import Tradeoff, parse_model, parse_pgrid

# ------------------------------------------------------------------------------
def test_parse_grid_spec():
    name, values = parse_grid_spec('g=0.1:1:10')
    assert name == 'g' and len(values) == 10
    assert values[0] == pytest.approx(0.1) and values[-1] == pytest.approx(1.0)
    name, values = parse_grid_spec('TA=0.1:10:3:log')
    assert name == 'TA'
    assert np.allclose(values, [0.1, 1.0, 10.0])

@pytest.mark.parametrize('spec', [
    'g=0.1:1', 'g0.1:1:3', 'g=a:1:3', 'g=0.1:1:3:lin', 'u=0.1:1:3',
    'g=0:1:3', 'g=-1:1:3', 'g=0.1:inf:3', 'g=0.1:1:0',
])
def test_malformed_grid_specs(spec):
    with pytest.raises(InvalidInput):
        parse_grid_spec(spec)

def test_grid_order():
    sweep = Sweep(AnalyticModel.FERMION_CHARGED_COLD_B_UINF,
                  ['g=0.1:0.2:2', 'gammaB=1:3:3', 'TA=0.5:1:2'], steering = False)
    assert len(sweep.grid) == 12
    # TA outermost, then g, then gammaB
    assert sweep.grid[0] == pytest.approx((0.1, 1.0, 0.5))
    assert sweep.grid[1] == pytest.approx((0.1, 2.0, 0.5))
    assert sweep.grid[3] == pytest.approx((0.2, 1.0, 0.5))
    assert sweep.grid[6] == pytest.approx((0.1, 1.0, 1.0))

def test_sweep_validation():
    with pytest.raises(InvalidInput):
        Sweep(AnalyticModel.FERMION_INVERSION, ['g=0.1:1:1000', 'gammaB=0.1:1:1000'])
    with pytest.raises(InvalidInput):
        Sweep(AnalyticModel.FERMION_INVERSION, ['g=0.1:1:3'])
    with pytest.raises(InvalidInput):
        Sweep(AnalyticModel.FERMION_INVERSION, ['g=0.1:1:3', 'g=0.2:1:3', 'gammaB=1:2:2'])
    with pytest.raises(InvalidParams):
        Sweep(AnalyticModel.BOSON_COLD_B, ['g=0.1:1:3', 'gammaB=1:2:2'])
    assert MAX_GRID_POINTS == 10**5

def test_sweep_rows(tmp_path):
    sweep = Sweep(AnalyticModel.FERMION_UNCHARGED_HOT_COLD,
                  ['g=0.1:0.5:2', 'gammaB=1:4:2'], steering = False)
    frame = sweep.run(parallel = False)
    assert list(frame.columns) == COLUMNS
    assert len(frame) == 4
    assert list(frame['g_over_gammaA']) == pytest.approx([0.1, 0.1, 0.5, 0.5])
    assert frame['TA'].map(math.isinf).all()
    # the simple uncharged machine never beats the classical bounds
    assert frame['telecond2'].all() and frame['chshcond'].all()
    assert (frame['singlet_fraction'] <= 0.5 + 1e-12).all()
    assert frame['q_star'].isna().all()

    outfile = str(tmp_path / 'grid.csv')
    sweep.save(outfile)
    with open(outfile) as file:
        lines = file.read().splitlines()
    assert lines[0].startswith('# thermosteer sweep')
    data = pd.read_csv(outfile, comment = '#')
    assert list(data.columns) == COLUMNS and len(data) == 4

def test_parallel_sweep_keeps_order():
    axes = ['g=0.05:1:4', 'gammaB=0.5:5:3']
    serial = Sweep(AnalyticModel.FERMION_INVERSION, axes, steering = False).run(parallel = False)
    threaded = Sweep(AnalyticModel.FERMION_INVERSION, axes, steering = False).run(workers = 3)
    pd.testing.assert_frame_equal(serial, threaded)

@pytest.mark.slow
def test_sweep_with_steering():
    sweep = Sweep(AnalyticModel.FERMION_INVERSION, ['g=0.38:0.38:1', 'gammaB=1.9:1.9:1'])
    frame = sweep.run(parallel = False)
    assert frame['verdict'][0] == 'Steerable'
    assert frame['q_star'][0] == pytest.approx(0.109, abs = 5e-3)

# ------------------------------------------------------------------------------
def test_presets():
    model, p = analyze_preset('teleport-optimal')
    assert model is AnalyticModel.FERMION_INVERSION
    assert p.g == pytest.approx((math.sqrt(5.0) - 1.0) / 4.0)
    for name in ANALYZE_PRESETS:
        analyze_preset(name)
    for name in SWEEP_PRESETS:
        preset = sweep_preset(name)
        Sweep(preset['model'], preset['axes'], steering = False)
    for name in TRADEOFF_PRESETS:
        preset = tradeoff_preset(name)
        assert preset['pgrid'] == sorted(preset['pgrid'])
    assert isinstance(tradeoff_preset('inversion-chsh-88')['model'], FermionChargedFinite)
    with pytest.raises(InvalidInput):
        analyze_preset('nope')
    with pytest.raises(InvalidInput):
        sweep_preset('nope')
    with pytest.raises(InvalidInput):
        tradeoff_preset('nope')

# ------------------------------------------------------------------------------
def test_parse_pgrid():
    assert parse_pgrid('0.1, 0.2,0.5') == [0.1, 0.2, 0.5]
    assert parse_pgrid('0.1:0.3:3') == pytest.approx([0.1, 0.2, 0.3])
    assert parse_pgrid('0.001:0.1:3:log') == pytest.approx([0.001, 0.01, 0.1])
    assert parse_pgrid([0.2, 0.4]) == [0.2, 0.4]
    for spec in ('0.1:0.2', 'a,b', '0.1:0.2:3:lin'):
        with pytest.raises(InvalidInput):
            parse_pgrid(spec)

def test_parse_model():
    assert parse_model('FermionInversion') is AnalyticModel.FERMION_INVERSION
    model = parse_model('FermionChargedFinite', u = 10.0, population = 0.75)
    assert model.u == 10.0
    with pytest.raises(InvalidInput):
        parse_model('FermionSomething')

def test_tradeoff_settings():
    t = Tradeoff('FermionInversion', 'Chsh', [0.1, 0.2])
    assert t.scope is FilterScope.QUBIT_B_ONLY
    assert t.objective is Objective.CHSH
    t = Tradeoff(AnalyticModel.BOSON_COLD_B, 'SingletFraction', [0.5])
    assert t.scope is FilterScope.BOTH_QUBITS
    with pytest.raises(InvalidInput):
        Tradeoff('FermionInversion', 'Chsh', [0.1], seed = None)
    with pytest.raises(InvalidInput):
        Tradeoff('Nope', 'Chsh', [0.1])

@pytest.mark.slow
def test_tradeoff_save(tmp_path):
    t = Tradeoff('FermionInversion', 'SingletFraction', [1.0], seed = 0, restarts = 4)
    outfile = str(tmp_path / 'curve.csv')
    t.save(outfile, workers = 1)
    with open(outfile) as file:
        text = file.read()
    assert text.splitlines()[-1] == '# ' + t.summary()
    assert t.crossing() == 1.0
    data = pd.read_csv(outfile, comment = '#')
    assert len(data) == 1 and data['value'][0] > 0.65
