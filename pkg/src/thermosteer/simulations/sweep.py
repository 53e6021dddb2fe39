import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from thermosteer.routines.definitions import *
from thermosteer.routines.machine import (
    AnalyticModel, TwoQubitState, model_params, steady_state_analytic
)
from thermosteer.routines.nonclassicality import report
from thermosteer.routines.steering import (
    dodecahedron_measurements, noise_robustness, robustness_verdict,
    steerability_classify
)

__all__ = [
    'Sweep',
    'parse_grid_spec',
    'write_csv',
    'MAX_GRID_POINTS',
]

logger = logging.getLogger(__name__)

MAX_GRID_POINTS = 10**5
AXES = ('g', 'gammaB', 'TA')
COLUMNS = [
    'g_over_gammaA', 'gammaB_over_gammaA', 'TA', 'verdict', 'q_star',
    'singlet_fraction', 'fidelity', 'chsh', 'concurrence', 'purity',
    'telecond2', 'telecond', 'chshcond', 'chshcond2',
]

# ------------------------------------------------------------------------------
def parse_grid_spec(spec: str) -> Tuple[str, np.ndarray]:
    """
    Parse ``axis=start:stop:count[:log]`` into the axis name and its values.
    Bounds must be positive; ``log`` spaces the values geometrically.

    :param spec: Grid specification, e.g. ``g=0.05:1:20``.
    :type spec: str
    :return: Axis name and values.
    :rtype: Tuple[str, np.ndarray]
    """
    try:
        name, rest = spec.split('=')
        fields = rest.split(':')
        if len(fields) not in (3, 4) or (len(fields) == 4 and fields[3] != 'log'):
            raise ValueError(spec)
        start, stop, count = float(fields[0]), float(fields[1]), int(fields[2])
    except ValueError:
        raise InvalidInput(f'Malformed grid {spec!r}; expected axis=start:stop:count[:log]') from None
    name = name.strip()
    if name not in AXES:
        raise InvalidInput(f'Unknown grid axis {name!r}; choose from {AXES}')
    if not (start > 0 and stop > 0 and math.isfinite(start) and math.isfinite(stop)):
        raise InvalidInput(f'Grid bounds must be positive and finite in {spec!r}')
    if count < 1:
        raise InvalidInput(f'Grid count must be at least 1 in {spec!r}')
    if len(fields) == 4:
        return name, np.geomspace(start, stop, count)
    return name, np.linspace(start, stop, count)

# ------------------------------------------------------------------------------
def write_csv(frame: pd.DataFrame, outfile: str, header: Sequence[str]) -> None:
    """CSV with ``#`` comment lines above the column row."""
    with open(outfile, 'w', newline = '') as file:
        for line in header:
            file.write(f'# {line}\n')
        frame.to_csv(file, index = False, lineterminator = '\n')

# =============================================================================
class Sweep:
    """
    Steady-state nonclassicality over a grid of (g/gammaA, gammaB/gammaA)
    and optionally TA, for one analytic model with gammaA = 1.
    """
    def __init__(
            self,
            model: Union[AnalyticModel, str],
            axes: Sequence[str],
            TA: Optional[float] = None,
            steering: bool = True,
            classify: bool = False,
            budget: int = 10,
        ):
        """
        :param model: Analytic limit.
        :param axes: Grid specifications, one per axis. ``g`` and ``gammaB``
            are required; ``TA`` is optional.
        :param TA: Temperature of bath A when it is not a grid axis.
        :param steering: Compute the dodecahedral noise robustness.
        :type steering: bool
        :param classify: Run the full steerability classifier per point.
        :type classify: bool
        :param budget: Measurement budget of the classifier.
        :type budget: int
        """
        self.model = AnalyticModel(model)
        self.axes = list(axes)
        self.TA = TA
        self.steering = steering
        self.classify = classify
        self.budget = budget
        self.grid = None
        self.params = None
        self.results = None
        self.build()

    def build(self) -> None:
        values = {}
        for spec in self.axes:
            name, v = parse_grid_spec(spec)
            if name in values:
                raise InvalidInput(f'Axis {name} given twice')
            values[name] = v
        for name in ('g', 'gammaB'):
            if name not in values:
                raise InvalidInput(f'Sweep needs a grid for {name}')
        TA_values = values.get('TA', np.array([self.TA]))
        size = len(values['g']) * len(values['gammaB']) * len(TA_values)
        if size > MAX_GRID_POINTS:
            raise InvalidInput(f'Grid of {size} points exceeds {MAX_GRID_POINTS}')
        # TA outermost, then g, then gammaB
        self.grid = [
            (g, gammaB, TA) for TA, g, gammaB in itertools.product(
                TA_values, values['g'], values['gammaB']
            )
        ]
        # Validate every point before any work is done
        self.params = [model_params(self.model, g, gammaB, TA) for g, gammaB, TA in self.grid]

    # -------------------------------------------------------------------------
    def process_point(self, i: int) -> dict:
        """One CSV row for grid point ``i``."""
        p = self.params[i]
        x = steady_state_analytic(self.model, p)
        state = TwoQubitState.from_x(x)
        q_star = None
        if self.steering:
            try:
                q_star = noise_robustness(state, dodecahedron_measurements())
            except SolverStalled as e:
                logger.warning(f'Grid point {i}: {e}')
        if self.classify:
            verdict = steerability_classify(state, self.budget).verdict
        else:
            verdict = robustness_verdict(state, q_star)
        r = report(state, q_star = q_star, steering_verdict = verdict.value)
        return {
            'g_over_gammaA': p.g / p.gammaA,
            'gammaB_over_gammaA': p.gammaB / p.gammaA,
            'TA': p.effective_TA(),
            'verdict': verdict.value,
            'q_star': np.nan if q_star is None else q_star,
            'singlet_fraction': r.singlet_fraction,
            'fidelity': r.fidelity,
            'chsh': r.chsh,
            'concurrence': r.concurrence,
            'purity': r.purity,
            **{key: r.no_go[key] for key in ('telecond2', 'telecond', 'chshcond', 'chshcond2')},
        }

    def run(self, parallel: bool = True, workers: Optional[int] = None) -> pd.DataFrame:
        """
        Evaluate every grid point. Rows come back in grid order whatever the
        completion order of the workers.
        """
        n = len(self.grid)
        print(f'Sweeping {n} points of {self.model.value}')
        if parallel and workers != 1:
            with ThreadPoolExecutor(max_workers = workers) as executor:
                rows = list(executor.map(self.process_point, range(n)))
        else:
            rows = [self.process_point(i) for i in range(n)]
        self.results = pd.DataFrame(rows, columns = COLUMNS)
        return self.results

    def header(self) -> List[str]:
        return [
            f'thermosteer sweep, model {self.model.value}',
            'units: E = hbar = k_B = 1; g_over_gammaA and gammaB_over_gammaA are ratios with gammaA = 1',
            'TA = inf is the limit TA -> inf and -0.0 the limit TA -> 0-; TB -> 0 throughout',
            'q_star: critical white noise rate for the dodecahedral measurements on qubit A',
        ]

    def save(self, outfile: str) -> None:
        if self.results is None:
            self.run()
        write_csv(self.results, outfile, self.header())
        print(f'Wrote {len(self.results)} rows to {outfile}')
