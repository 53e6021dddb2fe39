#!/usr/bin/env python3
#
# Command line front end. Single machines are reported as JSON, verdict grids
# and heralded trade-off curves are written as CSV, and the regression suite
# exits nonzero when a golden value is missed.
#
# -----------------------------------------------------------------------------

import argparse
import json
import logging
import sys
from typing import List, Optional, Tuple

from thermosteer.routines.definitions import *
from thermosteer.routines.filtering import FilterScope, Objective
from thermosteer.routines.machine import (
    AnalyticModel, TwoQubitState, steady_state_analytic, steady_state_numeric
)
from thermosteer.routines.nonclassicality import report
from thermosteer.routines.prjbuild import load_machine_params, prjbuild, readwrite_json
from thermosteer.routines.steering import (
    dodecahedron_measurements, geodesic_measurements, icosahedron_measurements,
    noise_robustness, pauli_measurements, robustness_verdict, steerability_classify
)
from thermosteer.simulations.presets import analyze_preset, sweep_preset, tradeoff_preset
from thermosteer.simulations.regress import regress, write_summary
from thermosteer.simulations.sweep import Sweep, parse_grid_spec
from thermosteer.simulations.tradeoff import Tradeoff, parse_model, parse_pgrid

__all__ = [
    'RunConfig',
    'build_parser',
    'main',
]

logger = logging.getLogger(__name__)

TOLERANCE_DEFAULTS = {
    'kernel_rank': KERNEL_RANK_TOL,
    'x_support': X_SUPPORT_TOL,
    'solver_gap': FEASIBILITY_TOL,
    'p_target': P_TARGET_TOL,
}

MEASUREMENTS = {
    'pauli2': lambda: pauli_measurements(2),
    'pauli3': lambda: pauli_measurements(3),
    'icosahedron': icosahedron_measurements,
    'dodecahedron': dodecahedron_measurements,
    'geodesic': geodesic_measurements,
}

# ------------------------------------------------------------------------------
def _assignment(text: str) -> Tuple[str, object]:
    """``key=value`` with the value read as JSON when possible."""
    key, sep, value = text.partition('=')
    if not sep or not key.strip():
        raise InvalidInput(f'Expected key=value, got {text!r}')
    try:
        return key.strip(), json.loads(value)
    except json.JSONDecodeError:
        return key.strip(), value

def _axis_spec(axis: dict) -> str:
    try:
        spec = f"{axis['name']}={axis['start']}:{axis['stop']}:{axis['count']}"
    except (KeyError, TypeError) as e:
        raise InvalidInput(f'Malformed sweep axis {axis}') from e
    return spec + (':log' if axis.get('log') else '')

# =============================================================================
class RunConfig:
    """
    Settings of one command collected, in increasing priority, from a project
    file, a named preset and the command line flags.
    """
    def __init__(self, command: str):
        self.command = command
        self.build()

    def build(self):
        self.model = None
        self.params = None
        self.axes = []
        self.TA = None
        self.objective = None
        self.pgrid = None
        self.scope = None
        self.u = 20.0
        self.population = 1.0
        self.seed = None
        self.restarts = 32
        self.outfile = None
        self.jsonfile = None
        self.measurements = 'dodecahedron'
        self.steering = True
        self.classify = False
        self.budget = 10
        self.skip_slow = False
        self.workers = None
        self.overrides = {}
        self.tolerances = dict(TOLERANCE_DEFAULTS)
        self.exit_status = 1

    # -------------------------------------------------------------------------
    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        config = cls(args.command)
        config.workers = args.workers
        project = {}
        if getattr(args, 'project', None):
            project = readwrite_json(args.project)
            if not isinstance(project, dict):
                raise InvalidInput(f'{args.project} is not a project file')
        config.tolerances.update(project.get('Tolerances', {}))
        getattr(config, f'_from_{args.command}')(args, project)
        for text in args.tolerance or []:
            key, value = _assignment(text)
            config.tolerances[key] = value
        config.parameter_check()
        return config

    def _from_analyze(self, args, project) -> None:
        if args.preset:
            self.model, self.params = analyze_preset(args.preset)
        else:
            data = readwrite_json(args.params)
            self.params = load_machine_params(data)
            if 'Machine' in data:
                analysis = data.get('Analysis', {})
                self.model = analysis.get('model')
                self.measurements = analysis.get('measurements', self.measurements)
                self.budget = analysis.get('budget', self.budget)
                self.steering = analysis.get('steering', self.steering)
                self.tolerances.update(data.get('Tolerances', {}))
        if args.model:
            self.model = args.model
        if args.measurements:
            self.measurements = args.measurements
        if args.budget is not None:
            self.budget = args.budget
        if args.no_steering:
            self.steering = False
        self.classify = args.classify
        self.jsonfile = args.json

    def _from_sweep(self, args, project) -> None:
        section = project.get('Sweep', {})
        if section:
            self.model = section.get('model')
            self.TA = section.get('TA')
            self.axes = [_axis_spec(axis) for axis in section.get('Axes', [])]
            self.steering = section.get('steering', True)
            self.classify = section.get('classify', False)
            if self.workers is None:
                self.workers = section.get('workers')
        if args.preset:
            preset = sweep_preset(args.preset)
            self.model = preset['model']
            self.axes = list(preset['axes'])
            self.classify = preset.get('classify', False)
        if args.model:
            self.model = args.model
        if args.grid:
            self.axes = list(args.grid)
        if args.TA is not None:
            self.TA = args.TA
        if args.classify:
            self.classify = True
        if args.no_steering:
            self.steering = False
        if args.budget is not None:
            self.budget = args.budget
        self.outfile = args.out

    def _from_tradeoff(self, args, project) -> None:
        self.steering = False
        section = project.get('Tradeoff', {})
        for key in ('model', 'objective', 'pgrid', 'scope', 'u', 'population',
                    'seed', 'restarts', 'steering'):
            if key in section:
                setattr(self, key, section[key])
        if self.workers is None:
            self.workers = section.get('workers')
        if args.preset:
            preset = tradeoff_preset(args.preset)
            for key in ('model', 'objective', 'pgrid', 'scope'):
                setattr(self, key, preset[key])
            self.steering = preset.get('steering', False)
        for key in ('model', 'objective', 'pgrid', 'scope', 'u', 'population',
                    'seed', 'restarts'):
            value = getattr(args, key)
            if value is not None:
                setattr(self, key, value)
        if args.steering:
            self.steering = True
        self.outfile = args.out

    def _from_regress(self, args, project) -> None:
        section = project.get('Regress', {})
        self.skip_slow = args.skip_slow or not section.get('slow', True)
        self.seed = args.seed if args.seed is not None else section.get('seed', 0)
        self.jsonfile = args.json

    def _from_template(self, args, project) -> None:
        self.outfile = args.out
        self.overrides = dict(_assignment(text) for text in args.set or [])

    # -------------------------------------------------------------------------
    def parameter_check(self) -> None:
        """
        Validates and normalizes the settings of the command. Every problem is
        printed before ``InvalidInput`` is raised.
        """
        self.exit_status = 0
        problems = []

        for key, value in self.tolerances.items():
            if key not in TOLERANCE_DEFAULTS:
                problems.append(
                    f'Unknown tolerance {key}; choose from {sorted(TOLERANCE_DEFAULTS)}'
                )
            elif isinstance(value, bool) or not isinstance(value, (int, float)) \
                    or not 0 < value < 1:
                problems.append(f'Tolerance {key} must be a number in (0, 1), got {value!r}')
        if self.workers is not None and self.workers < 1:
            problems.append('--workers must be at least 1')

        if self.command == 'analyze':
            if self.params is None:
                problems.append('No machine parameters given')
            if self.model is not None:
                try:
                    self.model = AnalyticModel(self.model)
                except ValueError:
                    problems.append(f'Unknown analytic model {self.model}')
            if self.measurements not in MEASUREMENTS:
                problems.append(
                    f'Unknown measurement set {self.measurements}; '
                    f'choose from {sorted(MEASUREMENTS)}'
                )
            if self.budget < 1:
                problems.append('The measurement budget must be at least 1')

        elif self.command == 'sweep':
            try:
                self.model = AnalyticModel(self.model)
            except ValueError:
                problems.append(f'Sweep needs an analytic model, got {self.model}')
            if not self.axes:
                problems.append('No grid given')
            for spec in self.axes:
                try:
                    parse_grid_spec(spec)
                except InvalidInput as e:
                    problems.append(str(e))
            if self.outfile is None:
                problems.append('No output file given')

        elif self.command == 'tradeoff':
            if self.model is None:
                problems.append('No model given')
            elif isinstance(self.model, str):
                try:
                    self.model = parse_model(self.model, self.u, self.population)
                except ValueError as e:
                    problems.append(str(e))
            try:
                self.objective = Objective(self.objective)
            except ValueError:
                problems.append(f'Unknown objective {self.objective}')
            if self.scope is not None:
                try:
                    self.scope = FilterScope(self.scope)
                except ValueError:
                    problems.append(f'Unknown filter scope {self.scope}')
            if self.pgrid is None:
                problems.append('No p_suc grid given')
            else:
                try:
                    self.pgrid = parse_pgrid(self.pgrid)
                except InvalidInput as e:
                    problems.append(str(e))
            if self.seed is None:
                problems.append('Trade-off optimization needs --seed')
            if self.restarts < 1:
                problems.append('--restarts must be at least 1')
            if self.outfile is None:
                problems.append('No output file given')

        elif self.command == 'template':
            if self.outfile is None:
                problems.append('No output file given')

        if problems:
            self.exit_status = 1
            for problem in problems:
                print(problem)
            raise InvalidInput(f'{len(problems)} problem(s) with the {self.command} settings')

# =============================================================================
def cmd_analyze(config: RunConfig) -> int:
    p = config.params
    tol = config.tolerances
    params = p.to_dict()
    if config.model is not None:
        state = TwoQubitState.from_x(steady_state_analytic(config.model, p))
        params['model'] = config.model.value
    else:
        state = steady_state_numeric(p, rtol = tol['kernel_rank'])

    q_star = None
    verdict = None
    if config.steering:
        m = MEASUREMENTS[config.measurements]()
        q_star = noise_robustness(state, m, tol = tol['solver_gap'])
        if config.classify:
            verdict = steerability_classify(state, config.budget).verdict.value
        else:
            verdict = robustness_verdict(state, q_star).value
        params['measurements'] = m.name

    r = report(
        state, params = params, q_star = q_star, steering_verdict = verdict,
        tol = tol['x_support']
    )
    if config.jsonfile:
        readwrite_json(config.jsonfile, r.to_dict())
        print(f'Wrote report to {config.jsonfile}')
    else:
        print(json.dumps(r.to_dict(), indent = 4, sort_keys = True))
    return 0

def cmd_sweep(config: RunConfig) -> int:
    sweep = Sweep(
        config.model, config.axes, TA = config.TA, steering = config.steering,
        classify = config.classify, budget = config.budget
    )
    sweep.run(workers = config.workers)
    sweep.save(config.outfile)
    return 0

def cmd_tradeoff(config: RunConfig) -> int:
    tradeoff = Tradeoff(
        config.model, config.objective, config.pgrid, config.scope,
        seed = config.seed, restarts = config.restarts, steering = config.steering,
        p_tol = config.tolerances['p_target'],
    )
    tradeoff.run(config.workers)
    tradeoff.save(config.outfile)
    return 0

def cmd_regress(config: RunConfig) -> int:
    summary = regress(skip_slow = config.skip_slow, seed = config.seed)
    if config.jsonfile:
        write_summary(summary, config.jsonfile)
    failed = [name for name, record in summary['checks'].items() if not record['passed']]
    if failed:
        raise RegressionFailure(f'failed checks: {", ".join(failed)}')
    print('All checks passed')
    return 0

def cmd_template(config: RunConfig) -> int:
    prjbuild(config.outfile, **config.overrides)
    print(f'Wrote project template to {config.outfile}')
    return 0

COMMANDS = {
    'analyze': cmd_analyze,
    'sweep': cmd_sweep,
    'tradeoff': cmd_tradeoff,
    'regress': cmd_regress,
    'template': cmd_template,
}

# -------------------------- Command Line Arguments ---------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help = False)
    common.add_argument(
        '-w', '--workers', type = int, default = None,
        help = """Number of worker threads for grid points and optimizer
        restarts. 1 runs sequentially."""
    )
    common.add_argument(
        '-v', '--verbose', action = 'store_true',
        help = """Log solver and optimizer details at DEBUG level."""
    )
    common.add_argument(
        '--tolerance', action = 'append', metavar = 'KEY=VALUE',
        help = """Override a tolerance: kernel_rank, x_support, solver_gap or
        p_target. May be repeated."""
    )

    parser = argparse.ArgumentParser(
        prog = 'thermosteer',
        description = """Steady states of two-qubit autonomous thermal machines
        and the steering, teleportation and Bell nonlocality they support, with
        and without local filtering."""
    )
    subparsers = parser.add_subparsers(dest = 'command', required = True)

    # analyze
    analyze = subparsers.add_parser(
        'analyze', parents = [common],
        help = 'Report the nonclassicality of one steady state as JSON.'
    )
    source = analyze.add_mutually_exclusive_group(required = True)
    source.add_argument(
        '-p', '--params', type = str,
        help = """Machine parameters as a flat JSON object or a project file
        with a Machine section."""
    )
    source.add_argument(
        '--preset', type = str,
        help = """Named machine: teleport-optimal, g0, inversion-steer,
        uncharged-steer, charged-steer, boson-steer."""
    )
    analyze.add_argument(
        '-m', '--model', type = str, default = None,
        help = """Analytic limit used for the steady state. Without it the
        Liouvillian kernel is computed numerically."""
    )
    analyze.add_argument(
        '--measurements', type = str, default = None,
        help = """Measurement set for q*: pauli2, pauli3, icosahedron,
        dodecahedron (default) or geodesic."""
    )
    analyze.add_argument(
        '--classify', action = 'store_true',
        help = """Run the steerability classifier for the verdict."""
    )
    analyze.add_argument('--budget', type = int, default = None,
        help = """Largest measurement set tried by the classifier.""")
    analyze.add_argument('--no-steering', action = 'store_true',
        help = """Skip the steering program.""")
    analyze.add_argument('--json', type = str, default = None,
        help = """Write the report to this file instead of stdout.""")

    # sweep
    sweep = subparsers.add_parser(
        'sweep', parents = [common],
        help = 'Verdicts and functionals over a parameter grid as CSV.'
    )
    sweep.add_argument('--project', type = str, default = None,
        help = """Project file whose Sweep section gives the defaults.""")
    sweep.add_argument('--preset', type = str, default = None,
        help = """Named grid: boson-grid, uncharged-grid, inversion-grid or charged-grid.""")
    sweep.add_argument('-m', '--model', type = str, default = None,
        help = """Analytic limit.""")
    sweep.add_argument(
        '-g', '--grid', action = 'append', default = None,
        help = """Axis specification axis=start:stop:count[:log] for the axes
        g, gammaB and TA. Repeat for each axis."""
    )
    sweep.add_argument('--TA', type = float, default = None,
        help = """Temperature of bath A when it is not a grid axis.""")
    sweep.add_argument('--classify', action = 'store_true',
        help = """Run the steerability classifier at every point.""")
    sweep.add_argument('--budget', type = int, default = None,
        help = """Largest measurement set tried by the classifier.""")
    sweep.add_argument('--no-steering', action = 'store_true',
        help = """Skip the dodecahedral noise robustness.""")
    sweep.add_argument('-o', '--out', type = str, default = None,
        help = """Output CSV file.""")

    # tradeoff
    tradeoff = subparsers.add_parser(
        'tradeoff', parents = [common],
        help = 'Best heralded nonclassicality against p_suc as CSV.'
    )
    tradeoff.add_argument('--project', type = str, default = None,
        help = """Project file whose Tradeoff section gives the defaults.""")
    tradeoff.add_argument(
        '--preset', type = str, default = None,
        help = """Named curve: boson-singlet, charged-singlet, charged-chsh, inversion-singlet,
        inversion-chsh, inversion-chsh-88 or inversion-chsh-75."""
    )
    tradeoff.add_argument(
        '-m', '--model', type = str, default = None,
        help = """Analytic limit or FermionChargedFinite (inverted bath A with
        finite charge u)."""
    )
    tradeoff.add_argument('--objective', type = str, default = None,
        help = """SingletFraction, Chsh or SteeringRobustness.""")
    tradeoff.add_argument('--pgrid', type = str, default = None,
        help = """Heralding efficiencies as a comma list or start:stop:count[:log].""")
    tradeoff.add_argument('--scope', type = str, default = None,
        help = """BothQubits or QubitBOnly. Defaults per model.""")
    tradeoff.add_argument('-s', '--seed', type = int, default = None,
        help = """Seed of the optimizer restarts.""")
    tradeoff.add_argument('--restarts', type = int, default = None,
        help = """Optimizer restarts per p_suc value.""")
    tradeoff.add_argument('--u', type = float, default = None,
        help = """Charge energy of FermionChargedFinite.""")
    tradeoff.add_argument('--population', type = float, default = None,
        help = """Excited population of bath A for FermionChargedFinite.""")
    tradeoff.add_argument('--steering', action = 'store_true',
        help = """Report the dodecahedral q* of every optimum.""")
    tradeoff.add_argument('-o', '--out', type = str, default = None,
        help = """Output CSV file.""")

    # regress
    regression = subparsers.add_parser(
        'regress', parents = [common],
        help = 'Run the golden-value regression suite.'
    )
    regression.add_argument('--project', type = str, default = None,
        help = """Project file whose Regress section gives the defaults.""")
    regression.add_argument('--json', type = str, default = None,
        help = """Write the machine readable summary to this file.""")
    regression.add_argument('--skip-slow', action = 'store_true',
        help = """Skip the optimizer-backed checks.""")
    regression.add_argument('-s', '--seed', type = int, default = None,
        help = """Seed of the sampled and optimizer checks.""")

    # template
    template = subparsers.add_parser(
        'template', parents = [common],
        help = 'Write a project file template.'
    )
    template.add_argument('-o', '--out', type = str, required = True,
        help = """Project file to write.""")
    template.add_argument(
        '--set', action = 'append', metavar = 'PATH=VALUE',
        help = """Override a template entry by dot or underscore path, e.g.
        Machine.g=0.3. May be repeated."""
    )
    return parser

def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level = logging.DEBUG if args.verbose else logging.WARNING,
        format = '%(levelname)s %(name)s: %(message)s'
    )
    try:
        config = RunConfig.from_args(args)
        return COMMANDS[config.command](config)
    except RegressionFailure as e:
        print(f'Regression failed, {e}', file = sys.stderr)
        return 1
    except SolverStalled as e:
        print(f'Solver stalled: {e}', file = sys.stderr)
        return 3
    except (ThermosteerError, ValueError, OSError) as e:
        print(f'{type(e).__name__}: {e}', file = sys.stderr)
        return 2

if __name__ == '__main__':
    sys.exit(main())
