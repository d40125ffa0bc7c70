"""Monte Carlo harness: seeded trials over fpp, btp and walks, summaries, file output.

Every trial ``i`` of a run with master seed ``s`` uses ``derive_seed(s, i)``,
so results do not depend on the number of worker threads or on scheduling.
Records are collected in trial order before any aggregation.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from . import analytic, btp, fpp, walks
from . import hypercube as hc
from .rng import derive_seed, generator
from .stats import (SUMMARY_FIELDS, MetricSummary, compare_distributions, deviation_summary,
                    summarize, z_score)

SCHEMA_VERSION = 1
THETA = analytic.THETA
COMMANDS = ("analytic", "fpp", "btp", "walk", "verify", "pilot")
FORMATS = ("csv", "json")

FPP_TRIAL_FIELDS = ("trial", "seed", "t_first", "length", "backsteps", "covering_time")
BTP_TRIAL_FIELDS = ("trial", "seed", "z", "z0", "alive", "t_a", "t_b", "simple", "population",
                    "alive_arrival", "violations")
WALK_TRIAL_FIELDS = ("trial", "seed", "length", "backsteps", "oriented", "endpoint_ok")
COMPARE_FIELDS = ("metric", "estimate", "stderr", "reference", "z", "kind")

# fields that do not influence results and stay out of embedded configs
_VOLATILE = ("threads", "out")


@dataclass
class ExperimentConfig:
    command: str = "fpp"
    n: int = 10
    trials: int = 1000
    seed: int = 0
    u: Optional[float] = None  # time / horizon; None means theta
    tol: float = 1e-9
    covering: bool = False
    max_particles: int = btp.DEFAULT_MAX_PARTICLES
    p: Tuple[int, ...] = (1, 2)
    format: str = "csv"
    out: Optional[str] = None
    threads: int = 1
    pilot_ns: Tuple[int, ...] = (8, 12, 16)
    inject_negative: bool = False
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.p = tuple(int(q) for q in self.p)
        self.pilot_ns = tuple(int(k) for k in self.pilot_ns)
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if any(q < 1 for q in self.p):
            raise ValueError("norm orders must be >= 1")
        if self.u is not None and not self.u > 0:
            raise ValueError("time must be positive")
        if self.max_particles < 1:
            raise ValueError("max_particles must be positive")
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}")

    @property
    def time(self) -> float:
        return THETA if self.u is None else float(self.u)

    def to_dict(self, full: bool = True) -> dict:
        d = asdict(self)
        d["p"] = list(self.p)
        d["pilot_ns"] = list(self.pilot_ns)
        if not full:
            for k in _VOLATILE:
                d.pop(k)
        return d

    def to_json(self, full: bool = True) -> str:
        return json.dumps(self.to_dict(full), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        d = dict(d)
        for k in ("p", "pilot_ns"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# parallel map in trial order


def map_trials(fn: Callable[[int, int], dict], cfg: ExperimentConfig, trials: Optional[int] = None) -> List[dict]:
    """``fn(trial, seed)`` for every trial; result list is in trial order."""
    count = cfg.trials if trials is None else trials
    seeds = [derive_seed(cfg.seed, i) for i in range(count)]
    if cfg.threads == 1:
        return [fn(i, s) for i, s in enumerate(seeds)]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, range(count), seeds, chunksize=1))


def column(records: Sequence[dict], key: str) -> np.ndarray:
    return np.array([r[key] for r in records], dtype=float)


@dataclass
class Comparison:
    metric: str
    estimate: float
    stderr: float
    reference: float
    kind: str = "two-sided"  # or "lower-bound": estimate should be >= reference

    @property
    def z(self) -> float:
        return z_score(self.estimate, self.stderr, self.reference)

    @property
    def ok(self) -> bool:
        if self.kind == "lower-bound":
            return self.estimate >= self.reference
        return abs(self.z) < 3.0

    def row(self) -> dict:
        return {"metric": self.metric, "estimate": self.estimate, "stderr": self.stderr,
                "reference": self.reference, "z": self.z, "kind": self.kind}


@dataclass
class TrialSummary:
    config: ExperimentConfig
    metrics: List[MetricSummary]
    records: List[dict] = field(repr=False)
    record_fields: Tuple[str, ...] = ()
    comparisons: List[Comparison] = field(default_factory=list)
    deviation: Optional[object] = None

    def metric(self, name: str) -> MetricSummary:
        for m in self.metrics:
            if m.metric == name:
                return m
        raise KeyError(name)

    def comparison(self, name: str) -> Comparison:
        for c in self.comparisons:
            if c.metric == name:
                return c
        raise KeyError(name)

    def column(self, key: str) -> np.ndarray:
        return column(self.records, key)


def _scalar(metric: str, count: int, value: float, stderr: float = math.nan) -> MetricSummary:
    nan = math.nan
    return MetricSummary(metric, count, value, nan, stderr, nan, nan, nan, nan, nan)


def _variance_stderr(x: np.ndarray) -> float:
    # large-sample standard error of the sample variance
    if len(x) < 4:
        return math.nan
    d = x - x.mean()
    m2 = np.mean(d**2)
    m4 = np.mean(d**4)
    return float(math.sqrt(max(m4 - m2**2, 0.0) / len(x)))


def deviation_metrics(t: np.ndarray, n: int, orders=(1, 2), centre: float = THETA) -> Tuple[List[MetricSummary], object]:
    """Rows for T - centre: parts, L^p norms, P(T <= centre) and the scaled forms."""
    dev = deviation_summary(t, centre, n, tuple(sorted(set(orders) | {1, 2})))
    d = t - centre
    count = len(t)
    rows = [summarize("t_plus", np.maximum(d, 0.0)), summarize("t_minus", np.maximum(-d, 0.0)),
            summarize("below_theta", (t <= centre).astype(float))]
    norm_rows = {}
    for q in sorted(set(orders) | {1}):
        powered = np.abs(d) ** q
        mean = float(powered.mean())
        se = float(powered.std(ddof=1) / math.sqrt(count)) if count > 1 else math.nan
        norm = mean ** (1.0 / q)
        se_norm = se * norm / (q * mean) if mean > 0 else math.nan
        norm_rows[q] = _scalar(f"norm_p{q}", count, norm, se_norm)
    rows.extend(norm_rows[q] for q in orders)
    rows.append(_scalar("n_l1", count, n * norm_rows[1].mean, n * norm_rows[1].stderr))
    rows.append(_scalar("n_minus_l1", count, n * dev.mean_minus, n * rows[1].stderr))
    rows.append(_scalar("n2_var", count, dev.scaled_variance, n**2 * _variance_stderr(t)))
    return rows, dev


# ---------------------------------------------------------------------------
# fpp


def fpp_trial(cfg: ExperimentConfig, trial: int, seed: int) -> dict:
    model = fpp.WeightModel(seed, cfg.n)
    r = fpp.first_passage(model, want_geodesic=True, want_covering=cfg.covering)
    return {"trial": trial, "seed": seed, "t_first": r.t_first, "length": r.geodesic_length,
            "backsteps": r.backsteps,
            "covering_time": r.covering_time if cfg.covering else math.nan}


def run_fpp(cfg: ExperimentConfig) -> TrialSummary:
    """Independent first-passage trials; T_n, geodesic statistics and covering time."""
    hc.check_dimension(cfg.n, bytes_per_edge=8)
    records = map_trials(lambda i, s: fpp_trial(cfg, i, s), cfg)
    t = column(records, "t_first")
    length = column(records, "length")
    metrics = [summarize("t_first", t), summarize("length", length),
               summarize("length_per_n", length / cfg.n),
               summarize("backsteps", column(records, "backsteps"))]
    if cfg.covering:
        metrics.append(summarize("covering_time", column(records, "covering_time")))
    rows, dev = deviation_metrics(t, cfg.n, cfg.p)
    metrics.extend(rows)
    return TrialSummary(cfg, metrics, records, FPP_TRIAL_FIELDS, deviation=dev)


# ---------------------------------------------------------------------------
# btp


def btp_trial(cfg: ExperimentConfig, trial: int, seed: int, line_lengths=()) -> dict:
    n, u = cfg.n, cfg.time
    run = btp.mark_alive(btp.simulate(n, u, 0, seed, cfg.max_particles))
    target = hc.one(n)
    ids = run.at(target)
    a, c = run.a[ids], run.c[ids]
    rec = {"trial": trial, "seed": seed, "z": len(ids), "z0": int(np.any(c == 0)),
           "alive": int(np.any(run.alive[ids])), "t_a": int(a.sum()), "t_b": int((c - a).sum()),
           "simple": int(np.sum(a == 0)), "population": run.size,
           "alive_arrival": btp.alive_arrival(run, target),
           "violations": len(btp.coupling_violations(run))}
    if line_lengths:
        depth = run.depth[ids]
        for k in line_lengths:
            rec[f"line_{k}"] = int(np.sum(depth == k))
    return rec


def bridge_lengths(n: int, count: int = 4) -> Tuple[int, ...]:
    """Ancestral line lengths n, n+2, ... compared against conditioned walks."""
    return tuple(n + 2 * j for j in range(count))


def run_btp(cfg: ExperimentConfig) -> TrialSummary:
    """BTP runs to the horizon, observed at 1̂; analytic counterparts side by side."""
    n, u = cfg.n, cfg.time
    lengths = bridge_lengths(n)
    records = map_trials(lambda i, s: btp_trial(cfg, i, s, lengths), cfg)
    metrics = [summarize(k, column(records, k)) for k in
               ("z", "z0", "alive", "t_a", "t_b", "simple", "population", "violations")]
    ab = column(records, "t_a") + column(records, "t_b")
    metrics.append(summarize("t_ab", ab))
    arr = column(records, "alive_arrival")
    metrics.append(summarize("alive_arrival", arr[np.isfinite(arr)]))
    for k in lengths:
        metrics.append(summarize(f"line_{k}", column(records, f"line_{k}")))
    summary = TrialSummary(cfg, metrics, records, BTP_TRIAL_FIELDS + tuple(f"line_{k}" for k in lengths))
    summary.comparisons = btp_comparisons(summary)
    return summary


def btp_comparisons(s: TrialSummary) -> List[Comparison]:
    n, u, tol = s.config.n, s.config.time, s.config.tol
    acfg = analytic.AnalyticConfig(tol=min(tol, 1e-6))
    m = lambda k: s.metric(k)
    out = [Comparison("z", m("z").mean, m("z").stderr, float(analytic.occupancy_mean(n, u, n))),
           Comparison("population", m("population").mean, m("population").stderr,
                      btp.expected_population(n, u)),
           Comparison("t_a", m("t_a").mean, m("t_a").stderr, analytic.a_expected(n, u, acfg).value),
           Comparison("t_ab", m("t_ab").mean, m("t_ab").stderr, analytic.ab_expected(n, u, acfg).value),
           Comparison("t_b", m("t_b").mean, m("t_b").stderr, analytic.b_expected(n, u, acfg).value)]
    s_lo, s_hi = analytic.s_bounds(n, u, acfg)
    out.append(Comparison("simple_upper", s_hi, m("simple").stderr, m("simple").mean, "lower-bound"))
    out.append(Comparison("simple_lower", m("simple").mean, m("simple").stderr, s_lo, "lower-bound"))
    try:
        bound = analytic.success_lower_bound(n, u, acfg).value
    except analytic.DegenerateBoundError:
        bound = None
    if bound is not None:
        out.append(Comparison("z0_success", m("z0").mean, m("z0").stderr, bound, "lower-bound"))
    # Richardson is sandwiched: P(Z0>0) <= P(R=1) <= E Z
    out.append(Comparison("alive_ge_z0", m("alive").mean, m("alive").stderr, m("z0").mean, "lower-bound"))
    return out


def line_class_ratios(s: TrialSummary) -> Dict[int, Tuple[float, float]]:
    """Ratio estimates E[line_k]/E[Z] with delta-method standard errors."""
    z = s.column("z")
    out = {}
    for k in bridge_lengths(s.config.n):
        x = s.column(f"line_{k}")
        r = x.mean() / z.mean()
        resid = x - r * z
        se = float(resid.std(ddof=1) / (math.sqrt(len(z)) * z.mean()))
        out[k] = (float(r), se)
    return out


# ---------------------------------------------------------------------------
# walks


def walk_trial(cfg: ExperimentConfig, trial: int, seed: int) -> dict:
    path = walks.sample_conditioned_walk(cfg.n, cfg.time, generator(seed))
    st = walks.walk_stats(path)
    ok = path.endpoint == hc.one(cfg.n) and bool(np.all(st.per_coordinate % 2 == 1))
    return {"trial": trial, "seed": seed, "length": st.length, "backsteps": st.backsteps,
            "oriented": int(st.oriented), "endpoint_ok": int(ok)}


def run_walks(cfg: ExperimentConfig) -> TrialSummary:
    """Endpoint-conditioned walks: length, backsteps and orientedness."""
    n, u = cfg.n, cfg.time
    records = map_trials(lambda i, s: walk_trial(cfg, i, s), cfg)
    length = column(records, "length")
    metrics = [summarize("length", length), summarize("length_per_n", length / n),
               summarize("backsteps", column(records, "backsteps")),
               summarize("oriented", column(records, "oriented")),
               summarize("endpoint_ok", column(records, "endpoint_ok"))]
    s = TrialSummary(cfg, metrics, records, WALK_TRIAL_FIELDS)
    lpn = s.metric("length_per_n")
    s.comparisons.append(Comparison("length_per_n", lpn.mean, lpn.stderr,
                                    walks.expected_length_per_n(u)))
    ori = s.metric("oriented")
    ref = analytic.oriented_mass_ratio(n, u)
    # a proportion: score-test standard error, finite even when no trial was oriented
    s.comparisons.append(Comparison("oriented", ori.mean, math.sqrt(ref * (1 - ref) / ori.count), ref))
    return s


def walk_class_frequencies(s: TrialSummary) -> Dict[int, Tuple[float, float]]:
    length = s.column("length")
    out = {}
    for k in bridge_lengths(s.config.n):
        x = (length == k).astype(float)
        out[k] = (float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))))
    return out


def bridge_comparisons(walk: TrialSummary, branching: TrialSummary) -> List[Comparison]:
    """Walk path-class frequencies against BTP line-class ratios, per length."""
    wf = walk_class_frequencies(walk)
    br = line_class_ratios(branching)
    out = []
    for k, (f, se_f) in wf.items():
        r, se_r = br[k]
        se = math.hypot(se_f, se_r)
        out.append(Comparison(f"length_{k}", f - r, se, 0.0))
    return out


def truncated_model_samples(n: int, horizon: float, trials: int, seed: int, threads: int = 1):
    """Alive first arrival at 1̂ (BTP) and T_n (Dijkstra), both capped at ``horizon``."""
    cfg_b = ExperimentConfig("btp", n=n, trials=trials, seed=seed, u=horizon, threads=threads)
    cfg_f = ExperimentConfig("fpp", n=n, trials=trials, seed=seed ^ 0x5DEECE66D, threads=threads)
    b = map_trials(lambda i, s: {"x": btp.alive_arrival(btp.simulate(n, horizon, 0, s), hc.one(n))},
                   cfg_b)
    f = map_trials(lambda i, s: {"x": fpp.first_passage(fpp.WeightModel(s, n), want_geodesic=False).t_first},
                   cfg_f)
    return np.minimum(column(b, "x"), horizon), np.minimum(column(f, "x"), horizon)


def model_equivalence(n: int = 3, horizon: float = THETA + 1.0, trials: int = 10_000, seed: int = 0,
                      threads: int = 1):
    a, b = truncated_model_samples(n, horizon, trials, seed, threads)
    return compare_distributions(a, b)


# ---------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def render(rows: Sequence[dict], header: Sequence[str], cfg: ExperimentConfig, fmt: str) -> str:
    """CSV (with ``#`` preamble) or JSON text for one table."""
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "version": __version__, "seed": cfg.seed,
               "config": cfg.to_dict(full=False),
               "rows": [{k: _json_value(r.get(k)) for k in header} for r in rows]}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    lines = [f"# schema_version={SCHEMA_VERSION}", f"# version={__version__}", f"# seed={cfg.seed}",
             f"# config={cfg.to_json(full=False)}", ",".join(header)]
    for r in rows:
        lines.append(",".join(_fmt(r.get(k)) for k in header))
    return "\n".join(lines) + "\n"


def read_csv(path: str) -> Tuple[dict, List[dict]]:
    """Preamble key/values and rows (as strings) of a file written by :func:`render`."""
    meta = {}
    rows = []
    header = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append(dict(zip(header, line.split(","))))
    if "config" in meta:
        meta["config"] = json.loads(meta["config"])
    return meta, rows


def output_paths(out: str, fmt: str) -> Dict[str, str]:
    base, ext = os.path.splitext(out)
    if ext.lower() not in (".csv", ".json"):
        base = out
    return {kind: f"{base}_{kind}.{fmt}" for kind in ("trials", "summary", "compare")}


def write_summary(s: TrialSummary, out: Optional[str] = None, fmt: Optional[str] = None) -> Dict[str, str]:
    """Write per-trial, summary and (if any) comparison files; returns their paths."""
    cfg = s.config
    fmt = fmt or cfg.format
    out = out or cfg.out
    if out is None:
        raise ValueError("no output path")
    paths = output_paths(out, fmt)
    d = os.path.dirname(paths["summary"])
    if d:
        os.makedirs(d, exist_ok=True)
    written = {}
    tables = [("trials", s.records, s.record_fields),
              ("summary", [m.row() for m in s.metrics], SUMMARY_FIELDS)]
    if s.comparisons:
        tables.append(("compare", [c.row() for c in s.comparisons], COMPARE_FIELDS))
    for kind, rows, header in tables:
        with open(paths[kind], "w", newline="") as fh:
            fh.write(render(rows, header, cfg, fmt))
        written[kind] = paths[kind]
    return written
