"""Independent radial finite-difference solver for u_tt = u_rr + (n-1)/r u_r + |u|^p.

Cell-centred grid r_i = (i + 1/2) dr with the finite-volume Laplacian

    (L u)_i = [A_{i+1/2} (u_{i+1} - u_i) - A_{i-1/2} (u_i - u_{i-1})] / (dr V_i),

A = r^{n-1} at the faces and V_i the cell volume divided by |S^{n-1}|.  The
face at the origin has zero area, which imposes u_r(t, 0) = 0.  The outer face
is a homogeneous Dirichlet wall placed far enough out that no signal reaches
it.  Time stepping is leapfrog (second order).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .exceptions import CFLError, ConfigurationError, DomainError
from .grids import sphere_area

__all__ = ["FDRadialGrid", "FDResult", "radial_reference_solve", "blowup_scan",
           "transition_amplitudes", "SCAN_COLUMNS", "write_scan_csv", "write_scan_dat"]

BLOWUP_THRESHOLD = 1e6
SCAN_COLUMNS = ["n", "p", "epsilon", "lifespan", "verdict"]


class FDRadialGrid:
    """Uniform cell-centred radial grid (duck-types the spatial grid API)."""

    kind = "radial-fd"

    def __init__(self, n: int, dr: float, R: float):
        if n < 1:
            raise DomainError("n must be >= 1")
        if dr <= 0 or R <= dr:
            raise ConfigurationError("need 0 < dr < R")
        self.n, self.dr = int(n), float(dr)
        self.M = int(round(R / dr))
        self.R = self.M * self.dr
        self.r = (np.arange(self.M) + 0.5) * self.dr
        faces = np.arange(self.M + 1) * self.dr
        self.area_faces = faces ** (self.n - 1)
        self.cell_volume = (faces[1:] ** self.n - faces[:-1] ** self.n) / self.n
        self.shape = (self.M,)
        self.axes = (-1,)

    @property
    def dim(self):
        return self.n

    @property
    def radius(self):
        return self.r

    @property
    def volume_weights(self):
        return sphere_area(self.n) * self.cell_volume

    def lp_norm(self, u, p):
        u = np.abs(u)
        if math.isinf(p):
            return u.max(axis=-1)
        return np.sum(u ** p * self.volume_weights, axis=-1) ** (1.0 / p)

    def integrate(self, u):
        return np.sum(u * self.volume_weights, axis=-1)

    def laplacian_coefficients(self):
        """(lower, diag, upper) of the finite-volume operator."""
        A = self.area_faces
        lower = A[1:-1] / (self.dr * self.cell_volume[1:])
        upper = A[1:-1] / (self.dr * self.cell_volume[:-1])
        diag = -(A[:-1] + A[1:]) / (self.dr * self.cell_volume)
        return lower, diag, upper

    def apply_laplacian(self, u):
        lower, diag, upper = self._coef
        out = diag * u
        out[..., :-1] += upper * u[..., 1:]
        out[..., 1:] += lower * u[..., :-1]
        return out

    @property
    def _coef(self):
        if not hasattr(self, "_cached_coef"):
            self._cached_coef = self.laplacian_coefficients()
        return self._cached_coef

    def spectral_radius(self) -> float:
        """Largest eigenvalue of -L (symmetrised with the cell volumes)."""
        lower, diag, upper = self._coef
        off = np.sqrt(lower * upper)
        return float(-eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0])

    def same_as(self, other) -> bool:
        return (isinstance(other, FDRadialGrid) and other.n == self.n
                and other.dr == self.dr and other.M == self.M)

    def __repr__(self):
        return f"FDRadialGrid(n={self.n}, dr={self.dr}, R={self.R})"


@dataclass
class FDResult:
    grid: FDRadialGrid
    times: np.ndarray
    values: np.ndarray
    blowup_time: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def lifespan(self) -> float:
        return self.blowup_time if self.blowup_time is not None else float(self.times[-1])

    def to_spacetime(self):
        from .propagator import SpaceTimeField
        return SpaceTimeField(self.grid, self.times, self.values, meta=dict(self.meta))


def _step_plan(T, dr, cfl, n_out):
    n_out = max(int(n_out), 1)
    per = max(int(math.ceil(T / (cfl * dr) / n_out)), 1)
    steps = per * n_out
    return T / steps, steps, per


def _check_cfl(grid, dt, cfl):
    if cfl > 0.5:
        raise CFLError(f"CFL number {cfl} exceeds 0.5 (dt <= dr/2 required)")
    lam = grid.spectral_radius()
    if dt * dt * lam > 4.0:
        raise CFLError(f"dt={dt:.4g} violates the leapfrog stability bound "
                       f"2/sqrt(lambda_max)={2 / math.sqrt(lam):.4g}")


def radial_reference_solve(f: Callable, g: Callable, n: int, p: float, T: float,
                           eps: float = 1.0, dr: float = 0.05, R: Optional[float] = None,
                           cfl: float = 0.25, n_out: int = 64, nonlinear: bool = True,
                           threshold: float = BLOWUP_THRESHOLD) -> FDResult:
    """Leapfrog solution with data (eps f, eps g) on [0, T].

    ``f`` and ``g`` are callables of r (even, smooth at the origin).  Output
    is stored at ``n_out + 1`` equally spaced times.  If |u| exceeds
    ``threshold`` or becomes non-finite the output is truncated at that node
    and ``blowup_time`` is set.
    """
    if nonlinear and p <= 1:
        raise DomainError("nonlinearity needs p > 1")
    R = R if R is not None else 20.0 + T
    grid = FDRadialGrid(n, dr, R)
    dt, steps, per = _step_plan(T, dr, cfl, n_out)
    _check_cfl(grid, dt, cfl)
    r = grid.r
    u_prev = eps * np.asarray(f(r), dtype=float)
    v0 = eps * np.asarray(g(r), dtype=float)

    def accel(u):
        a = grid.apply_laplacian(u)
        if nonlinear:
            a = a + np.abs(u) ** p
        return a

    u = u_prev + dt * v0 + 0.5 * dt * dt * accel(u_prev)
    out_t, out_u = [0.0], [u_prev.copy()]
    blow = None
    for k in range(1, steps + 1):
        if k % per == 0:
            out_t.append(k * dt)
            out_u.append(u.copy())
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > threshold:
            blow = k * dt
            break
        if k == steps:
            break
        u_next = 2.0 * u - u_prev + dt * dt * accel(u)
        u_prev, u = u, u_next
    times = np.asarray(out_t)
    vals = np.stack(out_u)
    meta = {"dt": dt, "dr": dr, "cfl": cfl, "p": p, "eps": eps, "nonlinear": nonlinear}
    return FDResult(grid, times, vals, blow, meta)


def _scan_cell_batch(f, g, n, p, eps_list, T_max, dr, cfl, threshold, R):
    """Lifespans for several amplitudes at once (rows evolve independently)."""
    grid = FDRadialGrid(n, dr, R)
    dt, steps, _ = _step_plan(T_max, dr, cfl, 1)
    _check_cfl(grid, dt, cfl)
    eps = np.asarray(eps_list, dtype=float)[:, None]
    u_prev = eps * f(grid.r)[None, :]
    v0 = eps * g(grid.r)[None, :]
    life = np.full(eps.shape[0], np.inf)
    alive = np.ones(eps.shape[0], dtype=bool)

    def accel(u):
        return grid.apply_laplacian(u) + np.abs(u) ** p

    u = u_prev + dt * v0 + 0.5 * dt * dt * accel(u_prev)
    for k in range(1, steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            peak = np.max(np.abs(u), axis=1)
        hit = alive & (~np.isfinite(peak) | (peak > threshold))
        life[hit] = k * dt
        alive &= ~hit
        if not alive.any() or k == steps:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            u_next = 2.0 * u - u_prev + dt * dt * accel(u)
        u_next[~alive] = 0.0
        u_prev, u = u, u_next
    return life


def blowup_scan(n: int, f: Callable, g: Callable, p_grid: Sequence[float],
                eps_grid: Sequence[float], T_max: float = 20.0, dr: float = 0.05,
                cfl: float = 0.25, threshold: float = BLOWUP_THRESHOLD,
                R: Optional[float] = None) -> list[dict]:
    """Lifespan table: one row per (p, eps) with columns SCAN_COLUMNS.

    ``lifespan`` is the first time ||u(t)||_inf exceeds ``threshold`` (or a
    value turns non-finite); rows without blow-up report T_max with verdict
    ``"global"`` (meaning: no blow-up up to T_max).
    """
    R = R if R is not None else T_max + 12.0
    rows = []
    for p in p_grid:
        eps_nonzero = [e for e in eps_grid if e > 0]
        life = dict(zip(eps_nonzero, _scan_cell_batch(f, g, n, float(p), eps_nonzero, T_max,
                                                       dr, cfl, threshold, R)))
        for e in eps_grid:
            t = life.get(e, math.inf)
            blew = math.isfinite(t)
            rows.append({"n": int(n), "p": float(p), "epsilon": float(e),
                         "lifespan": float(t) if blew else float(T_max),
                         "verdict": "blowup" if blew else "global"})
    return rows


def transition_amplitudes(rows) -> dict:
    """eps*(p): the smallest tested amplitude that blows up before T_max
    (inf when none does)."""
    out = {}
    for row in rows:
        p = row["p"]
        out.setdefault(p, math.inf)
        if row["verdict"] == "blowup":
            out[p] = min(out[p], row["epsilon"])
    return dict(sorted(out.items()))


def write_scan_csv(rows, stream=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(row[k]) if isinstance(row[k], float) else row[k]) for k in SCAN_COLUMNS})
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def write_scan_dat(rows, stream=None) -> str:
    """Whitespace-separated columns (p, epsilon, lifespan, blowup flag),
    blank line between p blocks, for gnuplot ``splot``/``plot``."""
    lines = ["# p epsilon lifespan blowup"]
    last = None
    for row in rows:
        if last is not None and row["p"] != last:
            lines.append("")
        last = row["p"]
        lines.append(f"{row['p']!r} {row['epsilon']!r} {row['lifespan']!r} "
                     f"{1 if row['verdict'] == 'blowup' else 0}")
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text
