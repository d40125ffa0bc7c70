"""Release gate: invariant checks across all modules and the analytic identities."""

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from . import analytic, btp, fpp, walks
from . import hypercube as hc
from .rng import derive_seed, generator
from .stats import deviation_summary


@dataclass
class Check:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"


def check_constants() -> Check:
    c = analytic.constants()
    err = abs(math.sinh(c.theta) - 1.0)
    return Check("constants", err <= 1e-14, f"|sinh(theta) - 1| = {err:.2e}")


def check_master_equation(ns=(1, 2, 3, 5, 8), h=1e-5) -> Check:
    """Central difference of m(k, t) against the neighbour sum."""
    worst = 0.0
    grid = np.linspace(0.05, 1.5, 30)
    for n in ns:
        for k in range(n + 1):
            fd = (analytic.occupancy_mean(k, grid + h, n) - analytic.occupancy_mean(k, grid - h, n)) / (2 * h)
            rhs = analytic.occupancy_derivative(k, grid, n)
            worst = max(worst, float(np.max(np.abs(fd - rhs) / np.abs(rhs))))
    return Check("master equation", worst <= 1e-6, f"max relative residual {worst:.2e}")


def check_convolution(max_n=4) -> Check:
    worst = 0.0
    for n in range(1, max_n + 1):
        for k in range(n + 1):
            for s, t in ((0.1, 0.3), (0.5, 0.381), (0.2, 1.1), (0.0, 0.7)):
                lhs = analytic.convolve_occupancy(k, s, t, n)
                rhs = float(analytic.occupancy_mean(k, s + t, n))
                worst = max(worst, abs(lhs - rhs) / rhs)
    return Check("convolution identity", worst <= 1e-10, f"n <= {max_n}, max relative error {worst:.2e}")


def check_log_sinh_bound(points=2001) -> Check:
    th = analytic.THETA
    t = np.linspace(0.0, th, points)[:-1]
    gap = np.log(np.sinh(th - t)) + math.sqrt(2.0) * t
    return Check("ln sinh(theta - t) <= -sqrt(2) t", bool(np.all(gap <= 1e-15)),
                 f"max of ln sinh(theta - t) + sqrt(2) t = {gap.max():.2e}")


def check_reduced_forms(ns=(1, 2, 3), rel=1e-4) -> Check:
    worst = 0.0
    for n in ns:
        for reduced, brute in ((analytic.a_expected, analytic.a_expected_bruteforce),
                               (analytic.ab_expected, analytic.ab_expected_bruteforce)):
            r = reduced(n).value
            b = brute(n)
            worst = max(worst, abs(r - b) / abs(b))
    return Check("reduced vs brute-force quadrature", worst <= rel, f"max relative gap {worst:.2e}")


def check_fpp(seeds=100, inject_negative=False, master=0) -> Check:
    """Dijkstra against enumeration for n <= 3, and label consistency at n = 6."""
    bad = []
    models = []
    for n in (1, 2, 3):
        for i in range(seeds):
            models.append(fpp.WeightModel(derive_seed(master, i), n))
    models.append(fpp.WeightModel(derive_seed(master, 10**6), 6))
    if inject_negative:
        m = models[-2]
        w = m.table.copy()
        w[1] = -0.75
        models[-2] = fpp.WeightModel.from_array(m.n, w)
    for m in models:
        w = m.table
        if not (np.all(np.isfinite(w)) and np.all(w >= 0)):
            bad.append(f"n={m.n} seed={m.seed}: negative or non-finite weight at edge "
                       f"{int(np.flatnonzero(~(w >= 0))[0]) if np.any(~(w >= 0)) else -1}")
        r = fpp.first_passage(m, want_geodesic=True, want_covering=True)
        if m.n <= 3 and r.t_first != fpp.brute_force_oracle(m):
            bad.append(f"n={m.n} seed={m.seed}: Dijkstra {r.t_first!r} != enumeration")
        nv = fpp.triangle_violations(m, r.distances)
        if nv:
            bad.append(f"n={m.n} seed={m.seed}: {nv} triangle violations")
        if abs(fpp.path_passage_time(m, r.geodesic) - r.t_first) > 1e-12:
            bad.append(f"n={m.n} seed={m.seed}: geodesic time mismatch")
    return Check("fpp", not bad, f"{len(models)} weight models" if not bad else "; ".join(bad[:5]))


def check_btp(runs=500, n=3, master=0) -> Check:
    bad = []
    for i in range(runs):
        run = btp.simulate(n, analytic.THETA + 0.5, 0, derive_seed(master, i))
        v = btp.coupling_violations(run)
        if v:
            bad.append(f"seed index {i}: {v[0]}")
        a = run.a
        for x in range(0, run.size, max(1, run.size // 8)):
            if (a[x] == 0) != btp.ancestral_path(run, x).simple:
                bad.append(f"seed index {i}: a == 0 disagrees with simple line at particle {x}")
            if btp.contest_counts(run, x) != (int(a[x]), int(run.b[x]), int(run.c[x])):
                bad.append(f"seed index {i}: contest counts disagree at particle {x}")
    return Check("btp coupling", not bad, f"{runs} runs at n={n}" if not bad else "; ".join(bad[:5]))


def check_walks(samples=2000, n=5, master=0) -> Check:
    bad = 0
    for i in range(samples):
        p = walks.sample_conditioned_walk(n, analytic.THETA, generator(derive_seed(master, i)))
        c = p.counts
        if p.endpoint != hc.one(n) or np.any(c % 2 == 0) or np.any(np.diff(p.times) <= 0):
            bad += 1
    return Check("walk paths", bad == 0, f"{bad} malformed of {samples}")


def check_stats(master=0) -> Check:
    rng = generator(master)
    worst = -np.inf
    for _ in range(50):
        x = rng.exponential(size=int(rng.integers(2, 200)))
        d = deviation_summary(x, analytic.THETA, 10)
        worst = max(worst, d.norms[1] - d.norms[2])
    return Check("norm ordering", worst <= 1e-15, f"max ||.||_1 - ||.||_2 = {worst:.2e}")


def run_all(inject_negative: bool = False, seed: int = 0, quick: bool = False) -> List[Check]:
    scale = 5 if quick else 1
    steps: List[Callable[[], Check]] = [
        check_constants, check_master_equation, check_convolution, check_log_sinh_bound,
        check_reduced_forms,
        lambda: check_fpp(seeds=100 // scale, inject_negative=inject_negative, master=seed),
        lambda: check_btp(runs=500 // scale, master=seed),
        lambda: check_walks(samples=2000 // scale, master=seed),
        lambda: check_stats(master=seed),
    ]
    out = []
    for step in steps:
        try:
            out.append(step())
        except Exception as exc:  # report, do not abort the sweep
            out.append(Check(getattr(step, "__name__", "check"), False, f"{type(exc).__name__}: {exc}"))
    return out
