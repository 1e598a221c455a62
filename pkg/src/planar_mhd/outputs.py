"""CSV/JSON writers and their readers.

Every CSV starts with a ``#`` line naming the format and its version,
followed by a plain header row. Floats are written with ``repr`` so a value
read back is bit-identical to the one written.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsSample
from .grid import State

SERIES_FORMAT = "planar_mhd-series v1"
SNAPSHOT_FORMAT = "planar_mhd-snapshot v1"
NODES_FORMAT = "planar_mhd-nodes v1"
REPRESENTATION_FORMAT = "planar_mhd-representation v1"

SERIES_COLUMNS = DiagnosticsSample.columns()
SNAPSHOT_COLUMNS = ("x", "v", "u", "w1", "w2", "b1", "b2", "theta")
NODES_COLUMNS = ("x", "u", "w1", "w2")
REPRESENTATION_COLUMNS = ("t", "Y", "max_rel_err")


class FormatError(ValueError):
    pass


def _fmt(x) -> str:
    return repr(float(x))


class CsvTable:
    """Append-only CSV table with a versioned comment header."""

    def __init__(self, path: Path, fmt: str, columns: tuple[str, ...]):
        self.path = Path(path)
        self.columns = columns
        self._fh = open(self.path, "w", newline="")
        self._fh.write(f"# {fmt} columns={','.join(columns)}\n")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(columns)

    def write(self, row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} values, table has {len(self.columns)} columns")
        self._writer.writerow([_fmt(x) for x in row])

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_table(path, fmt: str) -> dict[str, np.ndarray]:
    """Read a table written by ``CsvTable``; checks the format line."""
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith(f"# {fmt} "):
            raise FormatError(f"{path}: expected a '{fmt}' file, got header {first.strip()!r}")
        declared = first.strip().split("columns=", 1)[1].split(",")
        reader = csv.reader(fh)
        header = next(reader)
        if header != declared:
            raise FormatError(f"{path}: header row does not match declared columns")
        rows = [[float(x) for x in r] for r in reader if r]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def series_table(path) -> CsvTable:
    return CsvTable(path, SERIES_FORMAT, SERIES_COLUMNS)


def read_series(path) -> list[DiagnosticsSample]:
    cols = read_table(path, SERIES_FORMAT)
    missing = set(SERIES_COLUMNS) - set(cols)
    if missing:
        raise FormatError(f"{path}: missing series columns {sorted(missing)}")
    n = len(cols["t"])
    return [DiagnosticsSample(**{c: float(cols[c][i]) for c in SERIES_COLUMNS}) for i in range(n)]


def representation_table(path) -> CsvTable:
    return CsvTable(path, REPRESENTATION_FORMAT, REPRESENTATION_COLUMNS)


def read_representation(path) -> dict[str, np.ndarray]:
    return read_table(path, REPRESENTATION_FORMAT)


def snapshot_paths(directory, t: float) -> tuple[Path, Path]:
    stem = f"t={t:.9f}"
    directory = Path(directory)
    return directory / f"{stem}.csv", directory / f"{stem}.nodes.csv"


def write_snapshot(directory, state: State) -> tuple[Path, Path]:
    """Dump a state as a centers file (node fields averaged) plus a nodes file."""
    g = state.grid
    centers_path, nodes_path = snapshot_paths(directory, state.t)
    uc = g.node_to_center_mean(state.u)
    wc = 0.5 * (state.w[:-1] + state.w[1:])
    with CsvTable(centers_path, SNAPSHOT_FORMAT, SNAPSHOT_COLUMNS) as tab:
        for i in range(g.n_cells):
            tab.write([g.centers[i], state.v[i], uc[i], wc[i, 0], wc[i, 1],
                       state.b[i, 0], state.b[i, 1], state.theta[i]])
    with CsvTable(nodes_path, NODES_FORMAT, NODES_COLUMNS) as tab:
        for j in range(g.n_cells + 1):
            tab.write([g.nodes[j], state.u[j], state.w[j, 0], state.w[j, 1]])
    return centers_path, nodes_path


def read_snapshot(centers_path, nodes_path, t: float = 0.0) -> State:
    """Rebuild a state from a centers file and a nodes file."""
    c = read_table(centers_path, SNAPSHOT_FORMAT)
    nd = read_table(nodes_path, NODES_FORMAT)
    if len(nd["x"]) != len(c["x"]) + 1:
        raise FormatError("nodes file must have exactly one more row than the centers file")
    return State(
        t=t,
        v=c["v"],
        u=nd["u"],
        w=np.column_stack([nd["w1"], nd["w2"]]),
        b=np.column_stack([c["b1"], c["b2"]]),
        theta=c["theta"],
    )


def write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
