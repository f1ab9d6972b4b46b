"""Binary and CSV serialisation shared by the toolkit.

All binary formats use the same 32-byte little-endian header layout as the
increment files ("STBL"): magic, version (u16), dim (u16), count (u32),
spare float32, a float64 scale field, and a u64 slot, followed by raw
float64 data.  CSV files carry a frozen schema tag in their first line,
``#schema=<name>/<version>``, so downstream readers can detect drift.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
import time

import numpy as np

from .besov import PeriodicGrid
from .errors import ShapeError

_HEADER = struct.Struct("<4sHHIfdQ")
_GRID_MAGIC = b"GRID"
_PATH_MAGIC = b"PATH"
_VERSION = 1


def save_grid_function(path, f: np.ndarray, grid: PeriodicGrid) -> None:
    header = _HEADER.pack(_GRID_MAGIC, _VERSION, grid.dim, grid.n_points, 0.0, grid.period, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f, dtype="<f8").tobytes())


def load_grid_function(path):
    with open(path, "rb") as fh:
        magic, version, dim, n, _, period, _ = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _GRID_MAGIC or version != _VERSION:
            raise ShapeError("not a GRID v1 file")
        grid = PeriodicGrid(n_points=n, period=period, dim=dim)
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(grid.shape()).copy()
    return data, grid


def grid_function_to_csv(path, f: np.ndarray, grid: PeriodicGrid) -> None:
    if grid.dim != 1:
        raise ShapeError("CSV export of grid functions is 1-d only")
    rows = [{"x": x, "f": v} for x, v in zip(grid.axis(), np.asarray(f).ravel())]
    write_csv(path, ["x", "f"], rows, schema="grid-function/1")


def save_paths(path, paths: np.ndarray, dt: float) -> None:
    """Ensemble block: (M, n_steps + 1, d) float64."""
    paths = np.ascontiguousarray(paths, dtype="<f8")
    m, n_plus, d = paths.shape
    header = _HEADER.pack(_PATH_MAGIC, _VERSION, d, n_plus - 1, 0.0, dt, m)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(paths.tobytes())


def load_paths(path):
    with open(path, "rb") as fh:
        magic, version, d, n_steps, _, dt, m = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _PATH_MAGIC or version != _VERSION:
            raise ShapeError("not a PATH v1 file")
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(int(m), n_steps + 1, d).copy()
    return data, dt


def solution_to_csv(path, solution) -> str:
    """PDE snapshots in long format: one row per (t, x)."""
    grid = solution.spec.grid
    if grid.dim != 1:
        raise ShapeError("CSV export of solutions is 1-d only")
    xs = grid.axis()
    rows = [
        {"t": t, "x": x, "u": u}
        for t, snap in zip(solution.times, solution.snapshots)
        for x, u in zip(xs, snap)
    ]
    return write_csv(path, ["t", "x", "u"], rows, schema="pde-solution/1")


def ensemble_to_csv(path, paths: np.ndarray, dt: float) -> str:
    """Long-format ensemble export: one row per (path_id, time)."""
    paths = np.asarray(paths, dtype=float)
    m, n_plus, d = paths.shape
    cols = ["path_id", "t"] + [f"x{i + 1}" for i in range(d)]
    rows = []
    for pid in range(m):
        for k in range(n_plus):
            row = {"path_id": pid, "t": k * dt}
            for i in range(d):
                row[f"x{i + 1}"] = paths[pid, k, i]
            rows.append(row)
    return write_csv(path, cols, rows, schema="path-ensemble/1")


def format_csv(columns, rows, schema: str) -> str:
    """Render rows deterministically; floats at full round-trip precision."""
    buf = io.StringIO()
    buf.write(f"#schema={schema}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        cells = []
        for col in columns:
            v = row[col]
            cells.append(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def write_csv(path, columns, rows, schema: str) -> str:
    body = format_csv(columns, rows, schema)
    with open(path, "w") as fh:
        fh.write(body)
    return hashlib.sha256(body.encode()).hexdigest()


def write_manifest(path, config_echo: dict, csv_hashes: dict) -> None:
    manifest = {
        "config": config_echo,
        "csv_sha256": csv_hashes,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
