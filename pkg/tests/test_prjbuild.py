import json
import math

import pytest

from thermosteer.routines.definitions import *
from thermosteer.routines.prjbuild import *

# ------------------------------------------------------------------------------
def test_template_sections():
    template = generate_template()
    assert set(template) == {'Machine', 'Analysis', 'Sweep', 'Tradeoff', 'Regress', 'Tolerances'}
    assert template['Tolerances']['p_target'] == P_TARGET_TOL
    assert [axis['id'] for axis in template['Sweep']['Axes']] == [0, 1]

def test_template_overrides():
    template = generate_template(Machine_g = 0.3, Sweep_Axes_1_count = 7,
                                 **{'Tolerances.kernel_rank': 1e-9})
    assert template['Machine']['g'] == 0.3
    assert template['Sweep']['Axes'][1]['count'] == 7
    assert template['Tolerances']['kernel_rank'] == 1e-9

def test_parse_kwargs_to_path():
    assert parse_kwargs_to_path('Machine_g') == 'Machine.g'
    assert parse_kwargs_to_path('Sweep_Axes_0_count') == 'Sweep.Axes[0].count'
    assert parse_kwargs_to_path('Tolerances.x_support') == 'Tolerances.x_support'

def test_unknown_entries_are_rejected():
    template = generate_template()
    with pytest.raises(InvalidInput):
        set_value_in_dict(template, 'Machine.h', 1.0)
    with pytest.raises(InvalidInput):
        set_value_in_dict(template, 'Sweep.Axes[5].count', 1)

# ------------------------------------------------------------------------------
def test_prjbuild_writes_readable_file(tmp_path):
    outfile = str(tmp_path / 'project.json')
    written = prjbuild(outfile, Machine_g = 0.25)
    assert readwrite_json(outfile) == written
    with open(outfile) as file:
        assert json.load(file)['Machine']['g'] == 0.25

def test_readwrite_json_rejects_garbage(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"Machine": ')
    with pytest.raises(InvalidInput):
        readwrite_json(str(path))

def test_load_machine_params(tmp_path):
    outfile = str(tmp_path / 'project.json')
    prjbuild(outfile)
    p = load_machine_params(outfile)
    assert p.g == 0.38 and p.gammaB == 1.9
    assert p.limits == {'TA_zero_minus', 'TB_zero'}
    assert math.copysign(1.0, p.effective_TA()) < 0

    flat = {'bath': 'bosonic', 'g': 0.1, 'gammaB': 2.0, 'TA': 1.5, 'TB': None,
            'limits': ['TB_zero']}
    q = load_machine_params(flat)
    assert q.bath.value == 'bosonic' and q.TA == 1.5
    with pytest.raises(InvalidParams):
        load_machine_params({'Machine': {'g': 0.1, 'limits': ['TA_inf', 'TA_zero_minus']}})
