"""On-disk artifacts of a run.

    diagnostics.csv   one row per sample, fixed column order, floats with 17 significant digits
    *.snap            text header + little-endian float64 samples (row-major) + SHA256 trailer
    record.json       config echo, rows, final functionals, abort reason, timing, checksums
"""
import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from dynamics.state import State
from spectral.core import Grid, ParityClass, VectorField
from utils.exceptions import ConfigError, RecordError

COLUMNS = (
    "t",
    "L2_u",
    "L2_b",
    "H2_u",
    "H2_b",
    "Hs_top_u",
    "Hs_top_b",
    "Hneg_u",
    "Hneg_b",
    "dtheta_H1_u",
    "dtheta_H1_b",
    "ut_L2",
    "bt_L2",
    "energy_law_drift",
    "parity_err_u",
    "parity_err_b",
    "zero_mode_max",
    "leakage",
    "E0",
    "E1",
    "e0",
    "e1",
    "E_total",
)

SNAPSHOT_MAGIC = "MHDLAB-SNAPSHOT 1"
END_HEADER = "END_HEADER"
SNAPSHOT_FIELDS = ("u1", "u2", "b1", "b2")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_rows(path: Path, rows: Iterable[Dict[str, float]], columns: Tuple[str, ...] = COLUMNS) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_float(row[c]) for c in columns])


def read_rows(path: Path) -> List[Dict[str, float]]:
    with open(path, newline="", encoding="utf-8") as f:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(f)]


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _snapshot_header(state: State) -> str:
    g = state.grid
    lines = [
        SNAPSHOT_MAGIC,
        "fields " + " ".join(SNAPSHOT_FIELDS),
        f"n {g.n}",
        f"box_half_length {format_float(g.box_half_length)}",
        f"dealias_fraction {format_float(g.dealias_fraction)}",
        f"window_core_fraction {format_float(g.window_core_fraction)}",
        f"window_outer_fraction {format_float(g.window_outer_fraction)}",
        f"t {format_float(state.t)}",
        "endianness little",
        "dtype float64",
        f"shape {len(SNAPSHOT_FIELDS)} {g.n} {g.n}",
        "order row-major",
        END_HEADER,
    ]
    return "\n".join(lines) + "\n"


def write_snapshot(path: Path, state: State) -> str:
    """Writes the physical samples of u and b; returns the SHA-256 in the trailer."""
    header = _snapshot_header(state).encode("ascii")
    values = np.concatenate([state.u.values, state.b.values]).astype("<f8", copy=False)
    body = header + np.ascontiguousarray(values).tobytes(order="C")
    checksum = hashlib.sha256(body).hexdigest()
    with open(path, "wb") as f:
        f.write(body)
        f.write(f"SHA256 {checksum}\n".encode("ascii"))
    return checksum


def read_snapshot(path: Path) -> Tuple[State, Dict[str, str]]:
    """Reads a snapshot back, verifying its checksum.

    Raises:
        RecordError: malformed header, wrong size or checksum mismatch.
        OSError: the file cannot be read.
    """
    data = Path(path).read_bytes()
    marker = f"{END_HEADER}\n".encode("ascii")
    split = data.find(marker)
    if not data.startswith(SNAPSHOT_MAGIC.encode("ascii")) or split < 0:
        raise RecordError(f"{path} is not a snapshot")
    header_end = split + len(marker)
    header = {}
    for line in data[:header_end].decode("ascii").splitlines()[1:-1]:
        key, _, value = line.partition(" ")
        header[key] = value
    try:
        n = int(header["n"])
    except (KeyError, ValueError):
        raise RecordError(f"{path} has no valid grid size in its header")
    size = len(SNAPSHOT_FIELDS) * n * n * 8
    body, trailer = data[: header_end + size], data[header_end + size :].decode("ascii", "replace").strip()
    if len(body) != header_end + size or not trailer.startswith("SHA256 "):
        raise RecordError(f"{path} is truncated")
    if hashlib.sha256(body).hexdigest() != trailer.split(" ", 1)[1]:
        raise RecordError(f"{path} fails its checksum")
    values = np.frombuffer(body[header_end:], dtype="<f8").reshape(len(SNAPSHOT_FIELDS), n, n)
    try:
        grid = Grid(
            n,
            float(header["box_half_length"]),
            float(header["dealias_fraction"]),
            float(header["window_core_fraction"]),
            float(header["window_outer_fraction"]),
        )
        t = float(header["t"])
    except (KeyError, ValueError, ConfigError) as err:
        raise RecordError(f"{path} has an incomplete header: {err}")
    state = State(
        VectorField.from_values(grid, values[:2].copy(), ParityClass.VELOCITY_LIKE, True),
        VectorField.from_values(grid, values[2:].copy(), ParityClass.MAGNETIC_LIKE, True),
        t,
    )
    return state, header


@dataclass
class RunRecord:
    """Everything a run leaves behind, serialized as record.json."""

    name: str
    mode: str
    config_text: str
    rows: List[Dict[str, float]] = field(default_factory=list)
    functionals: Optional[Dict[str, Any]] = None
    abort_reason: Optional[str] = None
    wall_clock: Dict[str, float] = field(default_factory=dict)
    checksums: Dict[str, str] = field(default_factory=dict)
    series: Dict[str, List[float]] = field(default_factory=dict)
    reports: List[Dict[str, Any]] = field(default_factory=list)
    children: List[str] = field(default_factory=list)
    error: Optional[str] = None
    exit_code: int = 0

    def write(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, allow_nan=True)

    @classmethod
    def read(cls, path: Path) -> "RunRecord":
        """Raises RecordError for a record that does not parse or has incomplete rows."""
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
            record = cls(**data)
        except (json.JSONDecodeError, TypeError) as err:
            raise RecordError(f"{path} is not a run record: {err}")
        for i, row in enumerate(record.rows):
            missing = [c for c in COLUMNS if not isinstance(row, dict) or c not in row]
            if missing:
                raise RecordError(f"{path}: row {i} lacks the column(s) {', '.join(missing)}")
            bad = [c for c in COLUMNS if isinstance(row[c], bool) or not isinstance(row[c], (int, float))]
            if bad:
                raise RecordError(f"{path}: row {i} has non-numeric {', '.join(bad)}")
        return record
