"""First-passage percolation on Q_n with i.i.d. Exp(1) edge passage times.

Weights are never drawn from a stateful generator: the weight of edge ``e``
is ``Exp(1)`` evaluated at counter ``edge_index(e)`` of a Philox stream keyed
by the model seed.  ``scheme="stored"`` materialises all of them once,
``scheme="derived"`` recomputes them inside the search; both give the same
numbers.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from numba import njit

from . import hypercube as hc
from .rng import STREAM_WEIGHTS, exponential, exponential_block

SCHEMES = ("stored", "derived", "explicit")


@njit(cache=True, nogil=True)
def _fill_weights(seed, n):
    m = n << (n - 1)
    out = np.empty(m, dtype=np.float64)
    exponential_block(np.uint64(seed), STREAM_WEIGHTS, 0, out)
    return out


@dataclass(frozen=True)
class WeightModel:
    """Seed-deterministic Exp(1) passage times on the edges of Q_n."""

    seed: int
    n: int
    scheme: str = "stored"
    explicit: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown weight scheme {self.scheme!r}")
        bytes_per_edge = 8 if self.scheme != "derived" else 0
        hc.check_dimension(self.n, bytes_per_edge=bytes_per_edge)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.scheme == "explicit":
            if self.explicit is None or self.explicit.shape != (hc.edge_count(self.n),):
                raise ValueError("explicit scheme needs one weight per edge")

    @classmethod
    def from_array(cls, n: int, weights) -> "WeightModel":
        """Wrap a caller-supplied weight per edge index (tests, negative controls)."""
        w = np.ascontiguousarray(weights, dtype=np.float64)
        return cls(seed=0, n=n, scheme="explicit", explicit=w)

    @cached_property
    def table(self) -> np.ndarray:
        """All weights indexed by :func:`hypercube.edge_index`."""
        if self.scheme == "explicit":
            return self.explicit
        return _fill_weights(np.uint64(self.seed), self.n)

    def weight_at(self, index: int) -> float:
        if self.scheme == "derived":
            return float(exponential(np.uint64(self.seed), STREAM_WEIGHTS, np.uint64(index)))
        return float(self.table[index])

    def weight(self, base: int, direction: int) -> float:
        return self.weight_at(hc.edge_index(base, direction, self.n))

    def between(self, v: int, w: int) -> float:
        return self.weight(*hc.edge_ref(v, w))

    def _kernel_args(self):
        if self.scheme == "derived":
            return np.empty(0, dtype=np.float64), True
        return self.table, False


# ---------------------------------------------------------------------------
# label-setting search


@njit(cache=True, nogil=True, inline="always")
def _less(ka, va, kb, vb):
    return ka < kb or (ka == kb and va < vb)


@njit(cache=True, nogil=True)
def _dijkstra(n, source, target, table, derived, seed, full):
    nv = 1 << n
    dist = np.full(nv, np.inf)
    pred = np.full(nv, -1, dtype=np.int8)
    done = np.zeros(nv, dtype=np.bool_)
    cap = max(nv, 16)
    keys = np.empty(cap, dtype=np.float64)
    verts = np.empty(cap, dtype=np.int64)
    size = 0
    half = n - 1
    s = np.uint64(seed)

    dist[source] = 0.0
    keys[0] = 0.0
    verts[0] = source
    size = 1
    while size > 0:
        # pop the minimum (key, vertex)
        k = keys[0]
        v = verts[0]
        size -= 1
        if size > 0:
            lk = keys[size]
            lv = verts[size]
            i = 0
            while True:
                c = 2 * i + 1
                if c >= size:
                    break
                if c + 1 < size and _less(keys[c + 1], verts[c + 1], keys[c], verts[c]):
                    c += 1
                if _less(keys[c], verts[c], lk, lv):
                    keys[i] = keys[c]
                    verts[i] = verts[c]
                    i = c
                else:
                    break
            keys[i] = lk
            verts[i] = lv
        if done[v] or k > dist[v]:
            continue
        done[v] = True
        if v == target and not full:
            break
        for d in range(n):
            w = v ^ (1 << d)
            if done[w]:
                continue
            base = v & ~(1 << d)
            idx = (d << half) | ((base >> (d + 1)) << d) | (base & ((1 << d) - 1))
            if derived:
                we = exponential(s, STREAM_WEIGHTS, np.uint64(idx))
            else:
                we = table[idx]
            nd = k + we
            if nd < dist[w]:
                dist[w] = nd
                pred[w] = d
                if size == cap:
                    cap *= 2
                    nk = np.empty(cap, dtype=np.float64)
                    nvv = np.empty(cap, dtype=np.int64)
                    nk[:size] = keys[:size]
                    nvv[:size] = verts[:size]
                    keys = nk
                    verts = nvv
                # sift up
                i = size
                size += 1
                while i > 0:
                    p = (i - 1) // 2
                    if _less(nd, w, keys[p], verts[p]):
                        keys[i] = keys[p]
                        verts[i] = verts[p]
                        i = p
                    else:
                        break
                keys[i] = nd
                verts[i] = w
    return dist, pred, done


@njit(cache=True, nogil=True)
def _triangle_violations(n, dist, table, derived, seed):
    """Number of edges with |dist[v] - dist[w]| > weight."""
    bad = 0
    half = n - 1
    s = np.uint64(seed)
    for d in range(n):
        for rank in range(1 << half):
            low = rank & ((1 << d) - 1)
            base = ((rank >> d) << (d + 1)) | low
            other = base | (1 << d)
            idx = (d << half) | rank
            if derived:
                we = exponential(s, STREAM_WEIGHTS, np.uint64(idx))
            else:
                we = table[idx]
            if dist[other] > dist[base] + we or dist[base] > dist[other] + we:
                bad += 1
    return bad


@dataclass
class Distances:
    dist: np.ndarray
    pred: np.ndarray  # direction of the edge into each vertex, -1 at the source
    settled: np.ndarray
    source: int


@dataclass
class PassageResult:
    t_first: float
    geodesic: Optional[np.ndarray]
    geodesic_length: Optional[int]
    backsteps: Optional[int]
    covering_time: Optional[float]
    per_direction_steps: Optional[np.ndarray]
    distances: Optional[Distances] = field(default=None, repr=False)


def shortest_paths(model: WeightModel, source: int = 0, target: int = -1, full: bool = True) -> Distances:
    """Exact first-passage times from ``source``; stops at ``target`` unless ``full``."""
    table, derived = model._kernel_args()
    dist, pred, done = _dijkstra(model.n, source, target, table, derived,
                                 np.uint64(model.seed), full)
    return Distances(dist, pred, done, source)


def _trace(dists: Distances, target: int) -> np.ndarray:
    path = [target]
    v = target
    while v != dists.source:
        d = int(dists.pred[v])
        if d < 0:
            raise RuntimeError(f"vertex {v} unreachable")
        v ^= 1 << d
        path.append(v)
    return np.array(path[::-1], dtype=np.int64)


def first_passage(model: WeightModel, target: Optional[int] = None, want_geodesic: bool = True,
                  want_covering: bool = False, source: int = 0) -> PassageResult:
    """First-passage time from ``source`` (default 0̂) to ``target`` (default 1̂)."""
    n = model.n
    if target is None:
        target = hc.one(n) ^ source
    dists = shortest_paths(model, source, target, full=want_covering)
    t_first = float(dists.dist[target])
    covering = float(dists.dist.max()) if want_covering else None
    geodesic = length = back = steps = None
    if want_geodesic:
        geodesic = _trace(dists, target)
        length = len(geodesic) - 1
        flips = geodesic[1:] ^ geodesic[:-1]
        dirs = np.log2(flips).astype(np.int64) if length else np.empty(0, dtype=np.int64)
        steps = np.bincount(dirs, minlength=n)
        w = np.bitwise_count(geodesic.astype(np.uint64) ^ np.uint64(source)).astype(np.int64)
        back = int(np.sum(np.diff(w) < 0))
    return PassageResult(t_first, geodesic, length, back, covering, steps, dists)


def triangle_violations(model: WeightModel, dists: Distances) -> int:
    """Edges where the computed labels break the triangle inequality."""
    if not dists.settled.all():
        raise ValueError("triangle check needs a full (covering) search")
    table, derived = model._kernel_args()
    return int(_triangle_violations(model.n, dists.dist, table, derived, np.uint64(model.seed)))


def path_passage_time(model: WeightModel, path) -> float:
    """Passage time of a vertex path, summed left to right."""
    total = 0.0
    for v, w in zip(path[:-1], path[1:]):
        total += model.between(int(v), int(w))
    return total


def brute_force_oracle(model: WeightModel) -> float:
    """Minimum passage time over all simple 0̂ -> 1̂ paths, by enumeration (n <= 3)."""
    n = model.n
    if n > 3:
        raise ValueError("brute-force enumeration is limited to n <= 3")
    target = hc.one(n)
    best = np.inf

    def extend(path, visited, t):
        nonlocal best
        v = path[-1]
        if v == target:
            best = min(best, t)
            return
        for w in hc.neighbors(v, n):
            if w not in visited:
                visited.add(w)
                path.append(w)
                extend(path, visited, t + model.between(v, w))
                path.pop()
                visited.discard(w)

    extend([0], {0}, 0.0)
    return best


@dataclass(frozen=True)
class GeodesicStats:
    length: int
    backsteps: int
    per_direction_steps: np.ndarray
    length_per_n: float


def geodesic_stats(r: PassageResult) -> GeodesicStats:
    if r.geodesic is None:
        raise ValueError("result carries no geodesic")
    n = len(r.per_direction_steps)
    return GeodesicStats(r.geodesic_length, r.backsteps, r.per_direction_steps,
                         r.geodesic_length / n)


def permuted_model(model: WeightModel, perm) -> WeightModel:
    """Weights relabelled by the coordinate permutation ``perm`` (i -> perm[i])."""
    n = model.n
    perm = list(perm)
    out = np.empty(hc.edge_count(n))
    for idx in range(hc.edge_count(n)):
        base, d = hc.edge_from_index(idx, n)
        pb = sum(1 << perm[i] for i in range(n) if base >> i & 1)
        out[hc.edge_index(pb, perm[d], n)] = model.weight_at(idx)
    return WeightModel.from_array(n, out)


__all__ = [
    "WeightModel", "PassageResult", "Distances", "GeodesicStats", "first_passage",
    "shortest_paths", "brute_force_oracle", "geodesic_stats", "triangle_violations",
    "path_passage_time", "permuted_model",
]
