"""Rate-n simple random walk on Q_n over [0, t_end], conditioned to end at 1̂.

Each coordinate of such a walk flips at the times of an independent rate-1
Poisson process; conditioning on the endpoint 1̂ makes every coordinate's flip
count an odd-conditioned Poisson variable, and given the count the flip times
are i.i.d. uniform on [0, t_end].
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

TAIL_CUTOFF = 1e-15
REJECTION_RATE = 30.0


@lru_cache(maxsize=64)
def _odd_table(rate: float):
    """Odd support values and their cumulative conditioned probabilities."""
    log_norm = math.log(math.sinh(rate)) if rate < 700 else rate - math.log(2.0)
    ks = []
    cdf = []
    total = 0.0
    k = 1
    while True:
        p = math.exp(k * math.log(rate) - gammaln(k + 1) - log_norm)
        total += p
        ks.append(k)
        cdf.append(total)
        if k > rate and (1.0 - total < TAIL_CUTOFF or p < 1e-3 * TAIL_CUTOFF):
            break
        k += 2
    cdf = np.array(cdf)
    cdf[-1] = max(cdf[-1], 1.0)
    return np.array(ks, dtype=np.int64), cdf


def odd_poisson_pmf(k, rate: float):
    """P(K = k) for Poisson(rate) conditioned to be odd."""
    k = np.asarray(k)
    logp = k * np.log(rate) - gammaln(k + 1) - np.log(np.sinh(rate))
    return np.where(k % 2 == 1, np.exp(logp), 0.0)


def sample_odd_poisson(rate: float, rng: np.random.Generator, size=None):
    """Poisson(rate) conditioned on an odd outcome.

    Inverse CDF over the odd terms for moderate rates; above ``REJECTION_RATE``
    draws plain Poisson variates until an odd one appears (acceptance is
    close to 1/2 there).
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    shape = () if size is None else size
    if rate > REJECTION_RATE:
        out = rng.poisson(rate, size=shape)
        out = np.asarray(out)
        bad = out % 2 == 0
        while np.any(bad):
            out[bad] = rng.poisson(rate, size=int(bad.sum()))
            bad = out % 2 == 0
    else:
        ks, cdf = _odd_table(float(rate))
        u = rng.random(size=shape)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(ks) - 1)
        out = ks[idx]
    return int(out) if size is None else out


@dataclass(frozen=True)
class WalkPath:
    n: int
    t_end: float
    times: np.ndarray  # strictly increasing
    coords: np.ndarray  # coordinate flipped at each time
    endpoint: int

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.coords, minlength=self.n)

    def vertices(self) -> list:
        """Vertex sequence from 0̂, one entry per event plus the start."""
        out = [0]
        for i in self.coords:
            out.append(out[-1] ^ (1 << int(i)))
        return out


def sample_conditioned_walk(n: int, t_end: float, rng: np.random.Generator) -> WalkPath:
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    counts = sample_odd_poisson(t_end, rng, size=n)
    coords = np.repeat(np.arange(n), counts)
    times = rng.uniform(0.0, t_end, size=len(coords))
    order = np.argsort(times, kind="stable")
    times, coords = times[order], coords[order]
    # equal times have probability zero; redraw until the order is strict
    while len(times) > 1 and np.any(np.diff(times) <= 0):
        dup = np.flatnonzero(np.diff(times) <= 0) + 1
        times[dup] = rng.uniform(0.0, t_end, size=len(dup))
        order = np.argsort(times, kind="stable")
        times, coords = times[order], coords[order]
    endpoint = 0
    for i in np.flatnonzero(counts % 2):
        endpoint |= 1 << int(i)
    return WalkPath(n, float(t_end), times, coords, endpoint)


@dataclass(frozen=True)
class WalkStats:
    length: int
    per_coordinate: np.ndarray
    backsteps: int
    length_per_n: float

    @property
    def oriented(self) -> bool:
        return self.backsteps == 0


def walk_stats(p: WalkPath) -> WalkStats:
    length = len(p.coords)
    back, rem = divmod(length - p.n, 2)
    if rem:
        raise ValueError("walk ending at 1̂ must have length of the parity of n")
    return WalkStats(length, p.counts, back, length / p.n)


def expected_length_per_n(t_end: float) -> float:
    """E[length]/n = t coth t; equals sqrt(2) * theta at t = theta."""
    return t_end / math.tanh(t_end)
