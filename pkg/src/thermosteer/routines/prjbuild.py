#!/usr/bin/env python3
#
# Build and read the JSON project file that drives the thermosteer
# commands: machine parameters plus the settings of each command.
#
# -----------------------------------------------------------------------------

import json
from typing import Union

from thermosteer.routines.definitions import *
from thermosteer.routines.machine import MachineParams

__all__ = [
    'prjbuild',
    'generate_template',
    'parse_kwargs_to_path',
    'set_value_in_dict',
    'readwrite_json',
    'load_machine_params',
]

# ------------------------------------------------------------------------------
def generate_template(**kwargs) -> dict:
    """
    Default project dictionary. Keyword arguments override entries by path,
    e.g. ``Machine_g = 0.3`` or ``**{'Tradeoff.seed': 7}``.
    """
    template = {
        "Machine": {
            "bath": "fermionic",
            "g": 0.38,
            "u": 0.0,
            "gammaA": 1.0,
            "gammaB": 1.9,
            "TA": None,
            "TB": None,
            "limits": ["TA_zero_minus", "TB_zero"]
        },
        "Analysis": {
            "model": "FermionInversion",
            "measurements": "dodecahedron",
            "budget": 10,
            "steering": True
        },
        "Sweep": {
            "model": "FermionInversion",
            "TA": None,
            "Axes": [
                {
                    "id": 0,
                    "name": "g",
                    "start": 0.02,
                    "stop": 1.0,
                    "count": 50,
                    "log": False
                },
                {
                    "id": 1,
                    "name": "gammaB",
                    "start": 0.4,
                    "stop": 20.0,
                    "count": 50,
                    "log": False
                }
            ],
            "steering": True,
            "classify": False,
            "workers": None
        },
        "Tradeoff": {
            "model": "FermionChargedColdB_uInf",
            "objective": "SingletFraction",
            "pgrid": [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.55],
            "scope": None,
            "u": 20.0,
            "population": 1.0,
            "seed": 0,
            "restarts": 32,
            "steering": False,
            "workers": None
        },
        "Regress": {
            "slow": True,
            "seed": 0
        },
        "Tolerances": {
            "kernel_rank": KERNEL_RANK_TOL,
            "x_support": X_SUPPORT_TOL,
            "solver_gap": FEASIBILITY_TOL,
            "p_target": P_TARGET_TOL
        }
    }

    # Apply updates from **kwargs
    for kwarg_key, value in kwargs.items():
        path = parse_kwargs_to_path(kwarg_key)
        set_value_in_dict(template, path, value)

    return template

# ------------------------------------------------------------------------------
def parse_kwargs_to_path(kwarg_key: str) -> str:
    """
    Converts a kwarg like 'Machine_g' into 'Machine.g'. Digits become list
    indices, so 'Sweep_Axes_0_count' is 'Sweep.Axes[0].count'. Keys that
    themselves contain underscores (``Tolerances.kernel_rank``) must be
    given in dot notation, which is returned as is.
    """
    if '.' in kwarg_key:
        return kwarg_key

    keys = kwarg_key.split('_')
    path = []
    for key in keys:
        if key.isdigit():
            path[-1] = f'{path[-1]}[{key}]'
        else:
            path.append(key)
    return '.'.join(path)

# ------------------------------------------------------------------------------
def _step(d, key: str):
    if '[' in key and ']' in key:
        key, idx = key.split('[')
        return d[key][int(idx[:-1])]
    return d[key]

def set_value_in_dict(data: dict, path: str, value) -> None:
    """Set a value in a nested dictionary addressed by a dot path."""
    keys = path.split('.')
    d = data
    try:
        for key in keys[:-1]:
            d = _step(d, key)
        if '[' in keys[-1] and ']' in keys[-1]:
            key, idx = keys[-1].split('[')
            d[key][int(idx[:-1])] = value
        else:
            if keys[-1] not in d:
                raise KeyError(keys[-1])
            d[keys[-1]] = value
    except (KeyError, IndexError, TypeError) as e:
        raise InvalidInput(f'Project file has no entry {path}') from e

# ------------------------------------------------------------------------------
def readwrite_json(jsonfile: str, data: dict = None):
    """
    Write ``data`` to ``jsonfile`` (indent 4, sorted keys) or, without data,
    read and return the file's contents.
    """
    if data:
        with open(jsonfile, 'w') as file:
            json.dump(data, file, indent = 4, sort_keys = True)
            file.write('\n')
        return None
    try:
        with open(jsonfile, 'r') as file:
            return json.load(file)
    except json.JSONDecodeError as e:
        raise InvalidInput(f'{jsonfile} is not valid JSON: {e}') from e

# ------------------------------------------------------------------------------
def load_machine_params(source: Union[str, dict]) -> MachineParams:
    """
    Machine parameters from a flat JSON object or from the ``Machine``
    section of a project file, given as a path or an already loaded dict.
    """
    data = readwrite_json(source) if isinstance(source, str) else source
    if not isinstance(data, dict):
        raise InvalidParams('Machine parameters must be a JSON object')
    if 'Machine' in data:
        data = data['Machine']
    return MachineParams.from_dict(data)

# ------------------------------------------------------------------------------
def prjbuild(outputjson: str, **kwargs) -> dict:
    """
    Writes a project template, with any keyword overrides applied, to
    ``outputjson`` and returns it.

    :param outputjson: The path where the project file is to be saved.
    :type outputjson: str
    """
    template = generate_template(**kwargs)
    readwrite_json(outputjson, template)
    return template
