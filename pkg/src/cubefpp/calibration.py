"""Pilot-frozen bands for finite-n statistics that only have asymptotic targets.

The pilot runs fpp trials at a few dimensions with its own seed, then writes
bands to a JSON file that acceptance runs read back unchanged:

* Theta(1)-type constants (n * ||T_n - theta||_1, n^2 Var T_n):
  ``[0.5 * min, 2 * max]`` over the pilot dimensions.
* Upper-bounded constants (n * E T_n^-): ``[0, 2 * max]``.
* Geodesic length / n at the largest pilot dimension: the pilot mean
  +- 5 standard errors, widened to include the limit sqrt(2) * theta.
"""

import json
import math
import os
from importlib import resources
from typing import Dict, Optional, Sequence

from . import __version__
from .analytic import constants
from .experiments import ExperimentConfig, run_fpp

PILOT_SEED = 0x5EED_0F_1A7
DEFAULT_NS = (8, 12, 16)
DEFAULT_TRIALS = 10_000
GEODESIC_SE_MULT = 5.0

THETA_TYPE = ("n_l1", "n2_var")
UPPER_ONLY = ("n_minus_l1",)


def default_path() -> str:
    return str(resources.files("cubefpp").joinpath("data", "calibration.json"))


def pilot_measurements(ns: Sequence[int] = DEFAULT_NS, trials: int = DEFAULT_TRIALS,
                       seed: int = PILOT_SEED, threads: int = 1, log=None) -> Dict[int, dict]:
    out = {}
    for n in ns:
        s = run_fpp(ExperimentConfig("fpp", n=n, trials=trials, seed=seed, threads=threads))
        lpn = s.metric("length_per_n")
        out[n] = {k: s.metric(k).mean for k in THETA_TYPE + UPPER_ONLY}
        out[n].update(t_mean=s.metric("t_first").mean, below_theta=s.metric("below_theta").mean,
                      length_per_n=lpn.mean, length_per_n_se=lpn.stderr)
        if log:
            log(f"pilot n={n}: " + ", ".join(f"{k}={v:.6g}" for k, v in out[n].items()))
    return out


def bands_from(measurements: Dict[int, dict]) -> Dict[str, list]:
    bands = {}
    for key in THETA_TYPE:
        vals = [m[key] for m in measurements.values()]
        bands[key] = [0.5 * min(vals), 2.0 * max(vals)]
    for key in UPPER_ONLY:
        bands[key] = [0.0, 2.0 * max(m[key] for m in measurements.values())]
    top = max(measurements)
    m = measurements[top]
    slope = constants().geodesic_slope
    delta = GEODESIC_SE_MULT * m["length_per_n_se"]
    bands["geodesic_length_per_n"] = [min(slope, m["length_per_n"] - delta),
                                      max(slope, m["length_per_n"] + delta)]
    return bands


def run_pilot(ns: Sequence[int] = DEFAULT_NS, trials: int = DEFAULT_TRIALS, seed: int = PILOT_SEED,
              out: Optional[str] = None, threads: int = 1, log=None) -> dict:
    meas = pilot_measurements(ns, trials, seed, threads, log)
    doc = {
        "schema_version": 1,
        "version": __version__,
        "pilot_seed": seed,
        "trials": trials,
        "ns": list(ns),
        "geodesic_n": max(ns),
        "geodesic_se_mult": GEODESIC_SE_MULT,
        "pilot": {str(n): v for n, v in meas.items()},
        "bands": bands_from(meas),
    }
    path = out or default_path()
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return doc


def load(path: Optional[str] = None) -> dict:
    with open(path or default_path()) as fh:
        doc = json.load(fh)
    for key, (lo, hi) in doc["bands"].items():
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ValueError(f"malformed band {key}: [{lo}, {hi}]")
    return doc


def in_band(doc: dict, key: str, value: float) -> bool:
    lo, hi = doc["bands"][key]
    return lo <= value <= hi
