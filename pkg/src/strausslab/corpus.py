"""Closed-form test functions and random data families.

Every member is a callable of the radius/coordinates so that dyadic
rescalings u(2^m x) are evaluated exactly rather than interpolated.
Random draws take a ``numpy.random.Generator``; per-draw generators are
derived from ``(seed, index)`` so results do not depend on draw order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .grids import PeriodicGrid, RadialGrid
from .littlewood_paley import DyadicField, RadialProfile

__all__ = ["draw_rng", "bump", "CorpusMember", "periodic_corpus", "radial_corpus",
           "corpus_manifest", "FAMILIES", "make_family_draw"]


def draw_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for draw ``index`` of a run seeded by ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def bump(x):
    """C-infinity bump exp(1 - 1/(1 - x^2)) on |x| < 1 (value 1 at 0)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


@dataclass
class CorpusMember:
    """One named test function; ``params`` fully determine it."""

    name: str
    kind: str
    params: dict = field(default_factory=dict)

    def __call__(self, coords, scale: float = 1.0):
        """Evaluate u(scale * x); ``coords`` is a list of axis arrays or a radius."""
        p = self.params
        if isinstance(coords, (list, tuple)):
            shifted = [scale * c - x0 for c, x0 in zip(coords, p.get("center", [0.0] * len(coords)))]
            rad = np.sqrt(sum(c ** 2 for c in shifted))
            phase_axis = shifted[0]
        else:
            rad = scale * np.asarray(coords)
            phase_axis = rad
        if self.kind == "gaussian":
            env = np.exp(-0.5 * (rad / p["width"]) ** 2)
            return p["amp"] * env * np.cos(p.get("mod", 0.0) * phase_axis)
        if self.kind == "bump":
            return p["amp"] * bump(rad / p["width"])
        if self.kind == "band":
            # sum of modulated Gaussians with a common frequency band
            out = np.zeros_like(rad, dtype=float)
            for a, k, w in zip(p["amps"], p["freqs"], p["widths"]):
                out = out + a * np.exp(-0.5 * (rad / w) ** 2) * np.cos(k * phase_axis)
            return out
        raise ValueError(f"unknown corpus kind {self.kind}")


def _gaussian_member(rng, name, dim, radial, width_range=(0.8, 1.2), mod_max=2.0):
    center = [0.0] * dim if radial else [float(c) for c in rng.uniform(-1.0, 1.0, dim)]
    return CorpusMember(name, "gaussian", {
        "center": center,
        "width": float(rng.uniform(*width_range)),
        "mod": float(rng.uniform(0.0, mod_max)),
        "amp": float(rng.uniform(0.5, 2.0)),
    })


def _bump_member(rng, name, dim, radial):
    center = [0.0] * dim if radial else [float(c) for c in rng.uniform(-1.0, 1.0, dim)]
    return CorpusMember(name, "bump", {
        "center": center,
        "width": float(rng.uniform(2.0, 3.0)),
        "amp": float(rng.uniform(0.5, 2.0)),
    })


def _band_member(rng, name, dim, radial):
    m = 3
    center = [0.0] * dim if radial else [float(c) for c in rng.uniform(-1.0, 1.0, dim)]
    return CorpusMember(name, "band", {
        "center": center,
        "amps": [float(a) for a in rng.normal(size=m)],
        "freqs": [float(k) for k in rng.uniform(1.5, 3.0, m)],
        "widths": [float(w) for w in rng.uniform(1.2, 1.8, m)],
    })


def _corpus(seed, dim, radial, size=20):
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 20]))
    members = []
    for i in range(size):
        kind = ("gaussian", "bump", "band")[i % 3]
        name = f"{kind}_{i:02d}"
        if kind == "gaussian":
            members.append(_gaussian_member(rng, name, dim, radial))
        elif kind == "bump":
            members.append(_bump_member(rng, name, dim, radial))
        else:
            members.append(_band_member(rng, name, dim, radial))
    return members


def periodic_corpus(d: int = 2, seed: int = 0, size: int = 20):
    """Twenty smooth, well-localised functions for grid checks."""
    return _corpus(seed, d, radial=False, size=size)


def radial_corpus(n: int = 8, seed: int = 0, size: int = 20):
    """Radial members (centred at the origin, even in r)."""
    return _corpus(seed, n, radial=True, size=size)


def field_from_member(grid, member: CorpusMember, scale: float = 1.0):
    if isinstance(grid, PeriodicGrid):
        return DyadicField(grid, member(list(grid.coords), scale))
    return RadialProfile(grid, member(grid.r, scale))


def corpus_manifest(members, grid=None, seed=None) -> str:
    """JSON manifest of a corpus (sorted keys, stable across runs)."""
    from .fieldio import grid_to_dict
    doc = {"seed": seed, "members": [asdict(m) for m in members]}
    if grid is not None:
        doc["grid"] = grid_to_dict(grid)
    return json.dumps(doc, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# random Cauchy-data families for Strichartz sampling
# ---------------------------------------------------------------------------

def _coords(grid):
    return list(grid.coords) if isinstance(grid, PeriodicGrid) else grid.r


def _wrap(grid, values):
    cls = DyadicField if isinstance(grid, PeriodicGrid) else RadialProfile
    return cls(grid, values)


def gaussian_family(grid, rng, j: float, w0: float = 1.0, with_g: bool = True,
                    spread: float = 0.2, mod: float = 1.5):
    """Gaussian bump of width w0 (1 +- spread) 2^{-j} with random modulation
    up to mod / w0; the velocity is an independent bump of the same family
    (or zero)."""
    dim = grid.dim
    radial = isinstance(grid, RadialGrid)
    scale = 2.0 ** j

    def member():
        return _gaussian_member(rng, "draw", dim, radial,
                                width_range=((1 - spread) * w0, (1 + spread) * w0),
                                mod_max=mod / w0)

    mf = member()
    mg = member() if with_g else None
    if not radial:
        # keep random centres on the same scale as the width
        mf.params["center"] = [0.25 * c * w0 for c in mf.params["center"]]
        if mg is not None:
            mg.params["center"] = [0.25 * c * w0 for c in mg.params["center"]]
    f = mf(_coords(grid), scale)
    g = np.zeros_like(f) if mg is None else scale * _mean_free(grid, mg, scale)
    return _wrap(grid, f), _wrap(grid, g)


def _mean_free(grid, member, scale):
    """(d - |y|^2) exp(-|y|^2/2) with y = (scale x - c)/w: the Laplacian
    shape of a Gaussian, so the velocity has zero mean and H^{s-1} norms stay
    finite at low frequency in every dimension."""
    p = member.params
    coords = _coords(grid)
    if isinstance(coords, list):
        y2 = sum((scale * c - x0) ** 2 for c, x0 in zip(coords, p["center"])) / p["width"] ** 2
    else:
        y2 = (scale * coords / p["width"]) ** 2
    return p["amp"] * (grid.dim - y2) * np.exp(-0.5 * y2)


def band_family(grid, rng, j: float, w0: float = 1.0, with_g: bool = True):
    """Single-annulus band noise: random combination of modulated Gaussians
    whose spectra sit in the annulus |xi| ~ 2^j / w0."""
    dim = grid.dim
    radial = isinstance(grid, RadialGrid)
    scale = 2.0 ** j

    def member():
        m = 3
        return CorpusMember("draw", "band", {
            "center": [0.0] * dim,
            "amps": [float(a) for a in rng.normal(size=m)],
            "freqs": [float(k) / w0 for k in rng.uniform(1.5, 2.5, m)],
            "widths": [float(w) * w0 for w in rng.uniform(1.6, 2.0, m)],
        })

    mf = member()
    mg = member() if with_g else None
    f = mf(_coords(grid), scale)
    g = np.zeros_like(f) if mg is None else scale * mg(_coords(grid), scale)
    return _wrap(grid, f), _wrap(grid, g)


def knapp_family(grid, rng, j: float, k0: float = 8.0, with_g: bool = False):
    """Knapp-type cap (d = 2 grids): spectrum a smooth box of size
    c x sqrt(c) around (c, 0) with c = k0 2^j, random small tilt."""
    if not isinstance(grid, PeriodicGrid) or grid.d != 2:
        raise ValueError("Knapp caps are defined on d = 2 periodic grids")
    c = k0 * 2.0 ** j
    tilt = float(rng.uniform(-0.05, 0.05))
    kx, ky = grid.kvec
    k1 = math.cos(tilt) * kx + math.sin(tilt) * ky
    k2 = -math.sin(tilt) * kx + math.cos(tilt) * ky
    spec = bump((k1 - c) / (0.5 * c)) * bump(k2 / math.sqrt(c))
    f = grid.inverse(spec).real * grid.N ** 2
    g = np.zeros_like(f)
    return _wrap(grid, f), _wrap(grid, g)


FAMILIES: dict[str, Callable] = {
    "gaussian": gaussian_family,
    "band": band_family,
    "knapp": knapp_family,
}


def make_family_draw(family: str):
    try:
        return FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown data family {family!r}; choose from {sorted(FAMILIES)}")
