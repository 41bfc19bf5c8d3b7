"""Measured constants (Monte Carlo fixtures) and their versioned JSON file.

The constants C and C1 that drive the Picard thresholds are never derived
in closed form; they are the largest ratios seen by the samplers in
``estimates`` on fixed grids, families and seeds.  Every entry records
what produced it so it can be regenerated bit for bit::

    python -m strausslab.fixtures            # rewrite data/fixtures.json
"""

from __future__ import annotations

import argparse
import json
import warnings
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional

from .corpus import field_from_member, periodic_corpus, radial_corpus
from .estimates import (bernstein_sample, bernstein_suite, chain_rule_suite, embedding_suite,
                        homogeneous_strichartz_sample, inhomogeneous_strichartz_sample,
                        key_linear_estimate_sample, leibniz_suite, measure_c1)
from .exponents import exponent_profile
from .fieldio import grid_from_dict, grid_to_dict
from .grids import RadialGrid
from .littlewood_paley import BanachRegimeWarning, square_function_ratio

FIXTURE_VERSION = 1
FIXTURE_FILE = "data/fixtures.json"

CORPUS_GRID = {"kind": "periodic", "d": 2, "N": 256, "L": 24.0}
BERNSTEIN_GRID = {"kind": "periodic", "d": 2, "N": 1024, "L": 64.0}
STRICHARTZ_GRID = {"kind": "periodic", "d": 2, "N": 192, "L": 18.0}
PROFILE = (8, "9/5")


def radial_grid() -> RadialGrid:
    return RadialGrid(8, R=16.0, rho_max=16.0, panels=20)


def _report_entry(rep, **extra) -> dict:
    out = {"value": rep.max_ratio, "samples": rep.samples, "skipped": rep.skipped,
           "slope": rep.slope, "verdict": rep.verdict, "estimate_id": rep.estimate_id,
           "meta": rep.meta}
    out.update(extra)
    return out


def _key(seed=0):
    prof = exponent_profile(*PROFILE)
    rep = key_linear_estimate_sample(prof, radial_grid(), samples=100, seed=seed)
    return _report_entry(rep)


def _chain(seed=0):
    prof = exponent_profile(*PROFILE)
    grid = radial_grid()
    rep = chain_rule_suite(grid, radial_corpus(8, seed=seed, size=100), prof)
    return _report_entry(rep, seed=seed, family="radial_corpus[100]")


def _c1(seed=0):
    prof = exponent_profile(*PROFILE)
    res = measure_c1(prof, radial_grid(), samples=24, seed=seed)
    return {"value": res["C1"], "duhamel": res["duhamel"], "embedding": res["embedding"],
            "pointwise": res["pointwise"], "seed": seed, "family": "gaussian",
            "grid": grid_to_dict(radial_grid()), "slopes": [r.slope for r in res["reports"]]}


def _p0(seed=0):
    prof = exponent_profile(*PROFILE)
    rep = inhomogeneous_strichartz_sample(prof, radial_grid(), samples=100, seed=seed,
                                          localized=True)
    return _report_entry(rep)


def _square_function(seed=0):
    out = {}
    for label, grid, corpus in (("periodic_d2", grid_from_dict(CORPUS_GRID), periodic_corpus(2, seed)),
                                ("radial_n8", radial_grid(), radial_corpus(8, seed))):
        vals = []
        for member in corpus:
            u = field_from_member(grid, member)
            u = u.with_values(grid.remove_mean(u.values))
            vals.append(float(square_function_ratio(u, 0.0)))
        out[label] = {"min": min(vals), "max": max(vals)}
    return {"value": max(v["max"] for v in out.values()), "by_grid": out, "seed": seed,
            "family": "corpus[20]", "grids": [CORPUS_GRID, grid_to_dict(radial_grid())]}


def _bernstein_draws(seed=0):
    rep = bernstein_sample(grid_from_dict(BERNSTEIN_GRID), samples=200, seed=seed)
    return _report_entry(rep)


def _corpus_suites(seed=0):
    grid = grid_from_dict(CORPUS_GRID)
    corpus = periodic_corpus(2, seed)
    bern = bernstein_suite(grid, corpus)
    leib = leibniz_suite(grid, corpus)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BanachRegimeWarning)
        emb = embedding_suite(grid, corpus)
    return {"bernstein": _report_entry(bern, seed=seed), "leibniz": _report_entry(leib, seed=seed),
            "embedding": {"value": max(emb.values()), "by_p": emb, "seed": seed,
                          "grid": CORPUS_GRID}}


def _strichartz_d2(seed=0):
    rep = homogeneous_strichartz_sample(grid_from_dict(STRICHARTZ_GRID), "1/8", "1/4", samples=200,
                                        seed=seed, js=(0, 1), T0=1.0)
    return _report_entry(rep)


MEASUREMENTS: dict[str, Callable] = {
    "C_key": _key,
    "C_chain": _chain,
    "C1": _c1,
    "p0_localized": _p0,
    "square_function": _square_function,
    "bernstein_draws_d2": _bernstein_draws,
    "corpus_suites_d2": _corpus_suites,
    "strichartz_d2": _strichartz_d2,
}


def measure_fixtures(names: Optional[Iterable[str]] = None, seed: int = 0,
                     base: Optional[dict] = None) -> dict:
    """Run the named measurements (all by default), updating ``base``."""
    names = list(MEASUREMENTS) if names is None else list(names)
    doc = {"version": FIXTURE_VERSION, "profile": {"n": PROFILE[0], "p": PROFILE[1]}, "entries": {}}
    if base is not None:
        doc["entries"].update(base.get("entries", {}))
    for name in names:
        doc["entries"][name] = MEASUREMENTS[name](seed)
    if "C_key" in doc["entries"] and "C_chain" in doc["entries"]:
        doc["C"] = doc["entries"]["C_key"]["value"] * doc["entries"]["C_chain"]["value"]
    if "C1" in doc["entries"]:
        doc["C1"] = doc["entries"]["C1"]["value"]
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@lru_cache(maxsize=1)
def load_fixtures() -> dict:
    text = resources.files("strausslab").joinpath(FIXTURE_FILE).read_text()
    doc = json.loads(text)
    if doc.get("version") != FIXTURE_VERSION:
        raise ValueError(f"fixture file version {doc.get('version')} != {FIXTURE_VERSION}")
    return doc


def constants() -> tuple[float, float]:
    """(C, C1) from the fixture file."""
    doc = load_fixtures()
    return float(doc["C"]), float(doc["C1"])


def main(argv=None):
    ap = argparse.ArgumentParser(description="Regenerate the measured-constant fixture file.")
    ap.add_argument("--out", type=Path, default=None, help="output path (default: package data)")
    ap.add_argument("--only", nargs="*", default=None, choices=sorted(MEASUREMENTS))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    out = args.out or Path(__file__).parent / FIXTURE_FILE
    base = json.loads(out.read_text()) if (args.only and out.exists()) else None
    doc = measure_fixtures(args.only, args.seed, base)
    out.write_text(dumps(doc))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
