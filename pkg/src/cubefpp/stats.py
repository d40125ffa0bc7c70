"""Summary statistics for Monte Carlo output."""

import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np
from scipy import stats as sps

SUMMARY_FIELDS = ("metric", "count", "mean", "variance", "stderr", "min", "max", "q05", "q50", "q95")


@dataclass(frozen=True)
class MetricSummary:
    metric: str
    count: int
    mean: float
    variance: float
    stderr: float
    min: float
    max: float
    q05: float
    q50: float
    q95: float

    def row(self) -> dict:
        return asdict(self)


def summarize(metric: str, values: Iterable[float]) -> MetricSummary:
    x = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if x.size == 0:
        nan = math.nan
        return MetricSummary(metric, 0, nan, nan, nan, nan, nan, nan, nan, nan)
    var = float(np.var(x, ddof=1)) if x.size > 1 else 0.0
    q05, q50, q95 = (float(q) for q in np.quantile(x, [0.05, 0.5, 0.95]))
    return MetricSummary(metric, int(x.size), float(np.mean(x)), var, math.sqrt(var / x.size),
                         float(np.min(x)), float(np.max(x)), q05, q50, q95)


@dataclass(frozen=True)
class DeviationSummary:
    """Deviation of a sample of T_n from a centre (normally theta)."""

    centre: float
    mean_plus: float
    mean_minus: float
    norms: Dict[int, float]
    p_below: float
    variance: float
    n: int

    @property
    def scaled_l1(self) -> float:
        return self.n * self.norms[1]

    @property
    def scaled_variance(self) -> float:
        return self.n**2 * self.variance


def lp_norm(x: np.ndarray, p: float) -> float:
    """Empirical (mean |x|^p)^(1/p)."""
    return float(np.mean(np.abs(x) ** p) ** (1.0 / p))


def deviation_summary(samples: Sequence[float], centre: float, n: int,
                      orders: Tuple[int, ...] = (1, 2)) -> DeviationSummary:
    x = np.asarray(samples, dtype=float)
    d = x - centre
    plus = np.maximum(d, 0.0)
    minus = np.maximum(-d, 0.0)
    norms = {p: lp_norm(d, p) for p in orders}
    return DeviationSummary(centre, float(plus.mean()), float(minus.mean()), norms,
                            float(np.mean(x <= centre)), float(np.var(x, ddof=1)), n)


def z_score(mean: float, stderr: float, reference: float) -> float:
    if stderr == 0:
        return 0.0 if mean == reference else math.copysign(math.inf, mean - reference)
    return (mean - reference) / stderr


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float


def compare_distributions(sample_a, sample_b) -> KSResult:
    """Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    res = sps.ks_2samp(a, b, method="asymp")
    return KSResult(float(res.statistic), float(res.pvalue))


def ks_statistic(sample_a, sample_b) -> float:
    """Sup distance between the two empirical CDFs, evaluated at every data point."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
