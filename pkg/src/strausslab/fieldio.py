"""On-disk formats for fields and space-time snapshots.

Binary field file: a 64-byte little-endian header followed by the row-major
complex128 samples.  Header layout (``struct`` format ``<8sIIdd32s``):

    magic  b"SLFIELD1"
    dim    spatial dimension (d for periodic grids, n for radial grids)
    N      points per axis (periodic) or radial nodes
    L      box half-width (periodic) or R (radial)
    rho    0 (periodic) or rho_max (radial)
    dtype  b"complex128", zero padded

A space-time snapshot is a directory with ``manifest.json`` (grid, times,
weights, meta) and one binary file per node.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError, GridMismatchError
from .grids import PeriodicGrid, RadialGrid

HEADER = struct.Struct("<8sIIdd32s")
MAGIC = b"SLFIELD1"
FORMAT_VERSION = 1

__all__ = ["grid_to_dict", "grid_from_dict", "write_field", "read_field",
           "save_snapshot", "load_snapshot", "norm_rows", "write_norm_csv"]


def grid_to_dict(grid) -> dict:
    if isinstance(grid, PeriodicGrid):
        return {"kind": "periodic", "d": grid.d, "N": grid.N, "L": grid.L}
    return {"kind": "radial", "n": grid.n, "R": grid.R, "rho_max": grid.rho_max,
            "panels": grid.panels, "nodes_per_panel": grid.nodes_per_panel,
            "rho_panels": grid.rho_panels, "breaks": list(grid.breaks),
            "rho_breaks": list(grid.rho_breaks)}


def grid_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind")
    if kind == "periodic":
        return PeriodicGrid(**d)
    if kind == "radial":
        return RadialGrid(**d)
    raise ConfigurationError(f"unknown grid kind {kind!r}")


def write_field(path, grid, values) -> None:
    values = np.ascontiguousarray(values, dtype=np.complex128)
    if values.shape != tuple(grid.shape):
        raise GridMismatchError("values do not match grid shape")
    if isinstance(grid, PeriodicGrid):
        head = HEADER.pack(MAGIC, grid.d, grid.N, grid.L, 0.0, b"complex128")
    else:
        head = HEADER.pack(MAGIC, grid.n, grid.r.size, grid.R, grid.rho_max, b"complex128")
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(values.tobytes(order="C"))


def read_field(path, grid=None):
    """Return (header dict, samples); checks the header against ``grid``."""
    raw = Path(path).read_bytes()
    magic, dim, npts, length, rho, dtype = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ConfigurationError(f"{path}: not a field file")
    header = {"dim": dim, "N": npts, "L": length, "rho_max": rho,
              "dtype": dtype.rstrip(b"\0").decode()}
    data = np.frombuffer(raw, dtype=np.complex128, offset=HEADER.size).copy()
    if grid is not None:
        if data.size != int(np.prod(grid.shape)):
            raise GridMismatchError(f"{path}: sample count does not match {grid!r}")
        data = data.reshape(grid.shape)
    return header, data


def save_snapshot(u, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for m in range(len(u)):
        name = f"node_{m:05d}.bin"
        write_field(directory / name, u.grid, u.values[m])
        files.append(name)
    manifest = {
        "format_version": FORMAT_VERSION,
        "grid": grid_to_dict(u.grid),
        "times": [float(t) for t in u.times],
        "weights": [float(w) for w in u.weights],
        "real": not np.iscomplexobj(u.values),
        "files": files,
        "meta": {k: v for k, v in u.meta.items() if isinstance(v, (int, float, str, bool))},
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return directory


def load_snapshot(directory):
    from .propagator import SpaceTimeField
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    grid = grid_from_dict(manifest["grid"])
    vals = np.stack([read_field(directory / f, grid)[1] for f in manifest["files"]])
    if manifest.get("real", False):
        vals = vals.real.copy()
    return SpaceTimeField(grid, np.asarray(manifest["times"]), vals, meta=manifest.get("meta"))


def norm_rows(u, profile, system=None):
    """Rows (t, ||u(t)||_{B^0_r}, ||u(t)||_{B^{gap}_{r0}}, running X_t norm)."""
    from .littlewood_paley import NormSpec, besov_norms
    inv = lambda x: np.inf if x == 0 else 1.0 / float(x)
    first = besov_norms(u.values, u.grid, NormSpec(inv(profile.inv_r), 0.0), system)
    second = besov_norms(u.values, u.grid,
                         NormSpec(inv(profile.inv_r0), float(profile.s_gap)), system)
    q, q0 = inv(profile.inv_q), inv(profile.inv_q0)
    rows = []
    for m, t in enumerate(u.times):
        w = u.restrict(t).weights
        a = float(np.max(first[: m + 1])) if np.isinf(q) else float(np.sum(w * first[: m + 1] ** q) ** (1 / q))
        b = float(np.max(second[: m + 1])) if np.isinf(q0) else float(np.sum(w * second[: m + 1] ** q0) ** (1 / q0))
        rows.append({"t": float(t), "norm_q_r": float(first[m]),
                     "norm_q0_r0": float(second[m]), "xt_running": max(a, b)})
    return rows


def write_norm_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["t", "norm_q_r", "norm_q0_r0", "xt_running"])
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) for k, v in row.items()})
