import logging
from typing import List, Optional, Sequence, Union

import numpy as np

from thermosteer.routines.definitions import *
from thermosteer.routines.filtering import (
    FermionChargedFinite, FilterScope, Objective, TradeoffCurve, default_scope,
    model_label, tradeoff_curve
)
from thermosteer.routines.machine import AnalyticModel
from thermosteer.simulations.sweep import write_csv

__all__ = [
    'Tradeoff',
    'parse_pgrid',
    'parse_model',
]

logger = logging.getLogger(__name__)

CURVE_COLUMNS = [
    'p_target', 'objective', 'value', 'g', 'gammaA', 'gammaB', 'TA', 'u',
    'aA', 'bA', 'aB', 'bB', 'seed', 'p_suc', 'smoothed', 'q_star',
]

# ------------------------------------------------------------------------------
def parse_pgrid(spec: Union[str, Sequence[float]]) -> List[float]:
    """
    Heralding efficiencies from a comma separated list (``0.1,0.2,0.5``) or
    ``start:stop:count[:log]``.
    """
    if not isinstance(spec, str):
        return [float(p) for p in spec]
    try:
        if ':' in spec:
            fields = spec.split(':')
            if len(fields) not in (3, 4) or (len(fields) == 4 and fields[3] != 'log'):
                raise ValueError(spec)
            start, stop, count = float(fields[0]), float(fields[1]), int(fields[2])
            space = np.geomspace if len(fields) == 4 else np.linspace
            return [float(p) for p in space(start, stop, count)]
        return [float(p) for p in spec.split(',') if p.strip()]
    except ValueError:
        raise InvalidInput(f'Malformed p_suc grid {spec!r}') from None

def parse_model(name: str, u: float = 20.0, population: float = 1.0):
    """An analytic model name, or ``FermionChargedFinite`` with ``u`` and a population."""
    if name == 'FermionChargedFinite':
        return FermionChargedFinite.from_population(u = u, population = population)
    try:
        return AnalyticModel(name)
    except ValueError:
        choices = [m.value for m in AnalyticModel] + ['FermionChargedFinite']
        raise InvalidInput(f'Unknown model {name!r}; choose from {choices}') from None

# =============================================================================
class Tradeoff:
    """Best nonclassicality against heralding efficiency for one model."""
    def __init__(
            self,
            model,
            objective: Union[Objective, str],
            pgrid: Sequence[float],
            scope: Union[FilterScope, str, None] = None,
            seed: int = 0,
            restarts: int = 32,
            steering: bool = False,
            p_tol: float = P_TARGET_TOL,
        ):
        self.model = model
        self.objective = Objective(objective)
        self.pgrid = list(pgrid)
        self.scope = scope
        self.seed = seed
        self.restarts = restarts
        self.steering = steering
        self.p_tol = p_tol
        self.curve = None
        self.build()

    def build(self) -> None:
        if not isinstance(self.model, FermionChargedFinite):
            self.model = parse_model(self.model) if isinstance(self.model, str) else AnalyticModel(self.model)
        self.scope = default_scope(self.model) if self.scope is None else FilterScope(self.scope)
        if self.seed is None:
            raise InvalidInput('Trade-off optimization needs a seed')

    # -------------------------------------------------------------------------
    def run(self, workers: Optional[int] = None) -> TradeoffCurve:
        self.curve = tradeoff_curve(
            self.model, self.objective, self.pgrid, self.scope, seed = self.seed,
            restarts = self.restarts, workers = workers,
            evaluate_steering = self.steering, p_tol = self.p_tol,
        )
        return self.curve

    def crossing(self) -> Optional[float]:
        return self.curve.crossing(self.objective.threshold)

    def summary(self) -> str:
        p = self.crossing()
        where = 'none' if p is None else f'{p:.6g}'
        return (
            f'crossing: largest p_suc with {self.objective.value} above '
            f'{self.objective.threshold:g} is {where}'
        )

    def save(self, outfile: str, workers: Optional[int] = None) -> None:
        if self.curve is None:
            self.run(workers)
        frame = self.curve.to_frame().reindex(columns = CURVE_COLUMNS)
        header = [
            f'thermosteer tradeoff, model {model_label(self.model)}, objective '
            f'{self.objective.value}, scope {self.scope.value}, seed {self.seed}',
            'units: E = hbar = k_B = 1; gammaA = 1; TA = inf is TA -> inf, -0.0 is TA -> 0-',
            'filters: F_k = a_k |0><0| + b_k |1><1|; smoothed rows took a better point at larger p_suc',
        ]
        write_csv(frame, outfile, header)
        with open(outfile, 'a') as file:
            file.write(f'# {self.summary()}\n')
        print(self.summary())
