"""Summary tables over finished runs.

    summary.csv           one row per run: final functionals, decay exponent, worst drifts
    timeseries_long.csv   run, t, quantity, value for every diagnostics column
"""
import csv
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

from diagnostics.decay import decay_fit
from diagnostics.norms import NormLabel, NormSeries
from harness.records import COLUMNS, RunRecord, format_float
from utils.console import print_step, print_substep, print_table
from utils.exceptions import LabError

SUMMARY_COLUMNS = (
    "run",
    "mode",
    "t_final",
    "E0",
    "E1",
    "e0",
    "e1",
    "E_total",
    "E_total_growth",
    "decay_exponent",
    "decay_r2",
    "weighted_A1_growth",
    "max_parity_err",
    "max_leakage",
    "max_energy_law_drift",
    "abort_reason",
    "exit_code",
)


def _record_path(path: Path) -> Path:
    path = Path(path)
    return path / "record.json" if path.is_dir() else path


def _growth(values: List[float]) -> float:
    if not values or values[0] == 0:
        return 0.0
    return float(max(values) / values[0])


def decay_columns(record: RunRecord) -> Tuple[float, float]:
    """Fitted exponent of ||u||_{Hdot^4}; nan when the series is too short."""
    values = record.series.get("u_Hdot4", [])
    times = [row["t"] for row in record.rows][: len(values)]
    try:
        return decay_fit(NormSeries.from_lists(times, values, NormLabel(4.0)))
    except LabError:
        return float("nan"), float("nan")


def summary_row(record: RunRecord) -> Dict[str, object]:
    rows = record.rows
    functionals = record.functionals or {}
    exponent, r2 = decay_columns(record)
    return {
        "run": record.name,
        "mode": record.mode,
        "t_final": rows[-1]["t"] if rows else float("nan"),
        "E0": functionals.get("E0", float("nan")),
        "E1": functionals.get("E1", float("nan")),
        "e0": functionals.get("e0", float("nan")),
        "e1": functionals.get("e1", float("nan")),
        "E_total": functionals.get("E_total", float("nan")),
        "E_total_growth": _growth([row["E_total"] for row in rows]),
        "decay_exponent": exponent,
        "decay_r2": r2,
        "weighted_A1_growth": _growth(record.series.get("weighted_A1", [])),
        "max_parity_err": max((max(r["parity_err_u"], r["parity_err_b"]) for r in rows), default=0.0),
        "max_leakage": max((r["leakage"] for r in rows), default=0.0),
        "max_energy_law_drift": max((r["energy_law_drift"] for r in rows), default=0.0),
        "abort_reason": record.abort_reason or "",
        "exit_code": record.exit_code,
    }


def _cell(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def collect(paths: Iterable[Path]) -> Tuple[List[RunRecord], List[Tuple[str, str]]]:
    """Loads records (following sweep children); unreadable ones are listed, not fatal."""
    records, failures = [], []
    queue = [Path(p) for p in paths]
    while queue:
        path = queue.pop(0)
        try:
            record = RunRecord.read(_record_path(path))
        except (LabError, OSError) as err:
            failures.append((str(path), str(err)))
            continue
        records.append(record)
        base = _record_path(path).parent
        queue.extend(base / child for child in record.children)
    return records, failures


def report(paths: Iterable[Path], out_dir: Path) -> Tuple[List[Dict[str, object]], List[Tuple[str, str]]]:
    """Writes summary.csv and timeseries_long.csv into out_dir; returns (summary rows, failures)."""
    print_step("Summarizing runs")
    records, failures = collect(paths)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = [summary_row(r) for r in records]
    with open(out_dir / "summary.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary:
            writer.writerow([_cell(row[c]) for c in SUMMARY_COLUMNS])
    with open(out_dir / "timeseries_long.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("run", "t", "quantity", "value"))
        for record in records:
            for row in record.rows:
                for column in COLUMNS[1:]:
                    writer.writerow((record.name, format_float(row["t"]), column, format_float(row[column])))
    print_table([f"{row['run']}: E_total {row['E_total']:.3e}" for row in summary])
    for path, reason in failures:
        print_substep(f"Skipped {path}: {reason}", style="bold red")
    print_substep(f"Summarized {len(summary)} run(s) into {out_dir}", style="bold green")
    return summary, failures
