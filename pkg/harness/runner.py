"""Run orchestration: builds initial data, dispatches on the mode, writes artifacts."""
import csv
import json
import multiprocessing as mp
import time
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np

from diagnostics.functionals import FunctionalTracker, sample_terms, top_order
from diagnostics.norms import linf_norm, sobolev_squared
from dynamics.solver import simulate
from dynamics.state import State, Trajectory
from fields.angular import zero_angular_mode
from fields.background import d_theta_coefficients
from fields.generators import random_symmetric_field
from harness.config import RunConfig, serialize_config
from harness.records import RunRecord, format_float, sha256_file, write_rows, write_snapshot
from inequality_lab.survey import InequalityReport, ensemble_survey
from spectral.core import ParityClass, VectorField
from utils.cleanup import cleanup
from utils.console import print_step, print_substep, set_quiet
from utils.exceptions import LabError
from utils.id import id

ZERO_MODE_RADII = 8
INEQUALITY_COLUMNS = ("inequality_id", "k", "trials", "max_ratio", "median_ratio", "violations")


def initial_state(config: RunConfig) -> State:
    """Seeded u and b; b is zero when b_scale == 0."""
    ini = config.initial
    grid = config.grid
    u_seed, b_seed = np.random.SeedSequence(ini.seed).spawn(2)
    u = random_symmetric_field(u_seed, ini.envelope, ini.u_class, ini.amplitude, grid, config.s, config.sigma)
    if ini.b_scale > 0:
        b = random_symmetric_field(
            b_seed, ini.envelope, ini.b_class, ini.amplitude * ini.b_scale, grid, config.s, config.sigma
        )
    else:
        b = VectorField.zeros(grid, ParityClass.MAGNETIC_LIKE)
    return State(u, b, 0.0).validate()


def zero_mode_radii(grid) -> List[float]:
    return [grid.core_radius * j / (ZERO_MODE_RADII + 1) for j in range(1, ZERO_MODE_RADII + 1)]


class DiagnosticsCollector:
    """Trajectory observer that turns every new sample into a diagnostics row."""

    def __init__(self, s: int, sigma: float):
        self.s = s
        self.sigma = sigma
        self.tracker = FunctionalTracker(s, sigma)
        self.rows: List[Dict[str, float]] = []
        self.series: Dict[str, List[float]] = {"u_Hdot4": [], "weighted_A1": []}
        self._energy0 = None

    def __call__(self, traj: Trajectory) -> None:
        i = len(traj) - 1
        state = traj.samples[i]
        derived = traj.derived[i]
        self.rows.append(self.row(state, derived, traj.integrals["dissipation"][i], traj.leakage[i], traj.parity_drift[i]))

    def row(self, state: State, derived, dissipation: float, leakage: float, parity_drift) -> Dict[str, float]:
        g = state.grid
        u = state.u.coefficients
        b = state.b.coefficients
        u_t, b_t = derived
        terms = sample_terms(state, derived, self.s, self.sigma)
        functionals = self.tracker.update(terms)

        energy = sobolev_squared(u, g, 0) + sobolev_squared(b, g, 0) + 2.0 * dissipation
        if self._energy0 is None:
            self._energy0 = energy
        drift = abs(energy - self._energy0) / self._energy0 if self._energy0 > 0 else 0.0

        radii = zero_mode_radii(g)
        scale = max(linf_norm(state.u), linf_norm(state.b))
        circle = max(zero_angular_mode(state.u, radii) + zero_angular_mode(state.b, radii))
        order = top_order(self.s)

        self.series["u_Hdot4"].append(float(np.sqrt(sobolev_squared(u, g, 4))))
        self.series["weighted_A1"].append(float((1.0 + state.t) ** 2 * terms.sup_terms[min(1, self.s)]))
        return {
            "t": state.t,
            "L2_u": np.sqrt(sobolev_squared(u, g, 0)),
            "L2_b": np.sqrt(sobolev_squared(b, g, 0)),
            "H2_u": np.sqrt(sobolev_squared(u, g, 2, homogeneous=False)),
            "H2_b": np.sqrt(sobolev_squared(b, g, 2, homogeneous=False)),
            "Hs_top_u": np.sqrt(sobolev_squared(u, g, order, homogeneous=False)),
            "Hs_top_b": np.sqrt(sobolev_squared(b, g, order, homogeneous=False)),
            "Hneg_u": np.sqrt(sobolev_squared(u, g, -self.sigma)),
            "Hneg_b": np.sqrt(sobolev_squared(b, g, -self.sigma)),
            "dtheta_H1_u": np.sqrt(sobolev_squared(d_theta_coefficients(u, g), g, 1, homogeneous=False)),
            "dtheta_H1_b": np.sqrt(sobolev_squared(d_theta_coefficients(b, g), g, 1, homogeneous=False)),
            "ut_L2": np.sqrt(sobolev_squared(u_t.coefficients, g, 0)),
            "bt_L2": np.sqrt(sobolev_squared(b_t.coefficients, g, 0)),
            "energy_law_drift": drift,
            "parity_err_u": parity_drift[0],
            "parity_err_b": parity_drift[1],
            "zero_mode_max": circle / scale if scale > 0 else 0.0,
            "leakage": leakage,
            "E0": functionals.E0,
            "E1": functionals.E1,
            "e0": functionals.e0,
            "e1": functionals.e1,
            "E_total": functionals.E_total,
        }


def _evolve(config: RunConfig, run_dir: Path, record: RunRecord) -> None:
    linear = config.mode == "linear"
    solver = replace(config.solver, linear=linear)
    print_step(f"Evolving the {'linearized' if linear else 'full'} system to t={solver.t_end:g}")
    state = initial_state(config)
    collector = DiagnosticsCollector(config.s, config.sigma)
    traj = simulate(state, solver, observer=collector)

    write_rows(run_dir / "diagnostics.csv", collector.rows)
    if config.snapshots:
        write_snapshot(run_dir / "initial.snap", state)
        if len(traj):
            write_snapshot(run_dir / "final.snap", traj.samples[-1])
    functionals = collector.tracker.current
    record.rows = [{k: float(v) for k, v in row.items()} for row in collector.rows]
    record.functionals = functionals.as_dict()
    record.series = collector.series
    record.abort_reason = traj.abort_reason
    if traj.abort_reason:
        record.exit_code = 3
    if functionals.under_resolved:
        print_substep(
            f"The H^{top_order(config.s)} norms are under-resolved on n={config.grid.n}", style="bold red"
        )
    print_substep(f"Wrote {len(collector.rows)} samples to {run_dir / 'diagnostics.csv'}", style="bold green")


def _survey_plan(config: RunConfig) -> List[Tuple[str, int]]:
    ineq = config.inequalities
    plan = [("poincare", k) for k in ineq.poincare_orders]
    plan += [("product", k) for k in ineq.product_orders]
    plan += [("commutator", k) for k in ineq.commutator_orders]
    plan += [(preset, 0) for preset in ineq.selected_presets]
    return plan


def write_inequality_reports(run_dir: Path, reports: List[InequalityReport]) -> None:
    with open(run_dir / "inequality_reports.json", "w", encoding="utf-8") as f:
        json.dump([r.as_dict() for r in reports], f, indent=2)
    with open(run_dir / "inequalities.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(INEQUALITY_COLUMNS)
        for r in reports:
            writer.writerow(
                [
                    r.inequality_id,
                    r.parameters.get("k", 0),
                    r.trials,
                    format_float(r.max_ratio),
                    format_float(r.median_ratio),
                    r.violations,
                ]
            )


def _inequalities(config: RunConfig, run_dir: Path, record: RunRecord) -> None:
    plan = _survey_plan(config)
    print_step(f"Surveying {len(plan)} inequalities with {config.inequalities.trials} trials each")
    reports = []
    for name, k in plan:
        report = ensemble_survey(
            name,
            config.grid,
            config.inequalities.trials,
            config.initial.seed,
            config.initial.envelope,
            k=k,
            parity=config.initial.u_class,
            sigma=config.sigma,
        )
        reports.append(report)
        style = "bold red" if report.violations else ""
        print_substep(
            f"{name} k={k}: max ratio {report.max_ratio:.6g}, median {report.median_ratio:.6g}, "
            f"{report.violations} violation(s)",
            style=style,
        )
    write_inequality_reports(run_dir, reports)
    record.reports = [r.as_dict() for r in reports]


def child_configs(config: RunConfig, run_dir: Path) -> List[RunConfig]:
    """One config per sweep amplitude, each with its own seed and run directory."""
    seeds = np.random.SeedSequence(config.initial.seed).spawn(len(config.sweep.amplitudes))
    children = []
    for i, (amplitude, seed) in enumerate(zip(config.sweep.amplitudes, seeds)):
        child = replace(
            config,
            mode=config.sweep.mode,
            solver=replace(config.solver, linear=config.sweep.mode == "linear"),
            initial=replace(config.initial, amplitude=amplitude, seed=int(seed.generate_state(1)[0])),
            output_directory=str(run_dir),
            run_id=f"child{i:02d}",
            source_text="",
        )
        children.append(replace(child, source_text=serialize_config(child)))
    return children


def _run_child(config: RunConfig) -> Tuple[str, int]:
    set_quiet(True)
    record = run(config)
    return record.name, record.exit_code


def _sweep(config: RunConfig, run_dir: Path, record: RunRecord) -> None:
    children = child_configs(config, run_dir)
    processes = min(config.sweep.process_budget, len(children))
    print_step(f"Sweeping {len(children)} amplitudes on {processes} process(es)")
    if processes <= 1:
        results = [(c.name, run(c).exit_code) for c in children]
    else:
        with mp.Pool(processes=processes) as pool:
            results = pool.map(_run_child, children)
    record.children = [name for name, _ in results]
    record.exit_code = max([code for _, code in results] + [0])
    for name, code in results:
        print_substep(f"{name}: exit code {code}", style="bold red" if code else "bold green")


HANDLERS: Dict[str, Callable[[RunConfig, Path, RunRecord], None]] = {
    "simulate": _evolve,
    "linear": _evolve,
    "inequalities": _inequalities,
    "sweep": _sweep,
}


def run(config: RunConfig) -> RunRecord:
    """Executes one run and writes its directory; errors end up in the record."""
    name = id(config.name)
    run_dir = Path(config.output_directory) / name
    run_dir.mkdir(parents=True, exist_ok=True)
    cleanup(run_dir)
    config_text = config.source_text or serialize_config(config)
    with open(run_dir / "config.toml", "w", encoding="utf-8", newline="") as f:
        f.write(config_text)

    record = RunRecord(name=name, mode=config.mode, config_text=config_text)
    start = time.time()
    try:
        HANDLERS[config.mode](config, run_dir, record)
    except LabError as err:
        record.error = str(err)
        record.exit_code = err.exit_code
        print_substep(f"{name} failed: {err}", style="bold red")
    end = time.time()
    record.wall_clock = {"start": start, "end": end, "seconds": end - start}
    record.checksums = {
        p.name: sha256_file(p) for p in sorted(run_dir.iterdir()) if p.is_file() and p.name != "record.json"
    }
    record.write(run_dir / "record.json")
    return record
