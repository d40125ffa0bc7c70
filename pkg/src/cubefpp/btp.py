"""Branching translation process (BTP) on Q_n.

Every particle spawns a child across each of its n edges at the times of an
independent rate-1 Poisson process.  The simulation is event driven and
truncated at a horizon; particles are stored in birth order, so a particle's
id is also its birth rank and ``parent[x] < x``.

On top of the raw process this module provides the alive/ghost marking (the
alive particles form Richardson's model), the contest counters ``a``, ``b``,
``c`` and the derived uncontested-occupancy and triple counts.
"""

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, NamedTuple, Optional, TextIO, Tuple

import numpy as np
from numba import njit

from . import hypercube as hc
from .rng import STREAM_BTP, exponential

DEFAULT_MAX_PARTICLES = 10_000_000


class PopulationCapExceeded(RuntimeError):
    """Raised when a run would exceed ``max_particles``.

    ``particles`` and ``time_reached`` describe the partial run.
    """

    def __init__(self, message, particles, time_reached):
        super().__init__(message)
        self.particles = particles
        self.time_reached = time_reached


def expected_population(n: int, horizon: float) -> float:
    """Expected number of particles ever born by ``horizon``: e^(n horizon)."""
    return math.exp(n * horizon)


# ---------------------------------------------------------------------------
# event loop


@njit(cache=True, nogil=True)
def _heap_push(ht, hp, hd, hs, size, t, p, d, seq):
    i = size
    while i > 0:
        q = (i - 1) // 2
        if t < ht[q] or (t == ht[q] and seq < hs[q]):
            ht[i] = ht[q]
            hp[i] = hp[q]
            hd[i] = hd[q]
            hs[i] = hs[q]
            i = q
        else:
            break
    ht[i] = t
    hp[i] = p
    hd[i] = d
    hs[i] = seq


@njit(cache=True, nogil=True)
def _heap_pop(ht, hp, hd, hs, size):
    # removes the root; caller reads it first.  size is the size before removal
    size -= 1
    if size == 0:
        return
    lt = ht[size]
    lp = hp[size]
    ld = hd[size]
    ls = hs[size]
    i = 0
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and (ht[c + 1] < ht[c] or (ht[c + 1] == ht[c] and hs[c + 1] < hs[c])):
            c += 1
        if ht[c] < lt or (ht[c] == lt and hs[c] < ls):
            ht[i] = ht[c]
            hp[i] = hp[c]
            hd[i] = hd[c]
            hs[i] = hs[c]
            i = c
        else:
            break
    ht[i] = lt
    hp[i] = lp
    hd[i] = ld
    hs[i] = ls


@njit(cache=True, nogil=True)
def _simulate(n, horizon, origin, seed, max_particles):
    cap = 64
    parent = np.empty(cap, dtype=np.int64)
    vertex = np.empty(cap, dtype=np.int64)
    birth = np.empty(cap, dtype=np.float64)
    direction = np.empty(cap, dtype=np.int8)
    hcap = 64
    ht = np.empty(hcap, dtype=np.float64)
    hp = np.empty(hcap, dtype=np.int64)
    hd = np.empty(hcap, dtype=np.int64)
    hs = np.empty(hcap, dtype=np.int64)
    size = 0
    seq = 0
    draws = np.uint64(0)
    s = np.uint64(seed)

    parent[0] = -1
    vertex[0] = origin
    birth[0] = 0.0
    direction[0] = -1
    count = 1
    collisions = 0
    status = 0
    last = 0.0

    for d in range(n):
        t = exponential(s, STREAM_BTP, draws)
        draws += np.uint64(1)
        if t <= horizon:
            if size == hcap:
                hcap *= 2
                ht = np.concatenate((ht, np.empty_like(ht)))
                hp = np.concatenate((hp, np.empty_like(hp)))
                hd = np.concatenate((hd, np.empty_like(hd)))
                hs = np.concatenate((hs, np.empty_like(hs)))
            _heap_push(ht, hp, hd, hs, size, t, 0, d, seq)
            size += 1
            seq += 1

    while size > 0:
        t = ht[0]
        p = hp[0]
        d = hd[0]
        _heap_pop(ht, hp, hd, hs, size)
        size -= 1
        if count >= max_particles:
            status = 1
            last = t
            break
        if t <= last:
            # equal birth times: keep the order of the queue, break the tie upward
            t = np.nextafter(last, np.inf)
            collisions += 1
        last = t
        if count == cap:
            cap *= 2
            parent = np.concatenate((parent, np.empty_like(parent)))
            vertex = np.concatenate((vertex, np.empty_like(vertex)))
            birth = np.concatenate((birth, np.empty_like(birth)))
            direction = np.concatenate((direction, np.empty_like(direction)))
        c = count
        parent[c] = p
        vertex[c] = vertex[p] ^ (1 << d)
        birth[c] = t
        direction[c] = d
        count += 1
        # the child's n clocks, then the parent's clock on edge d restarts
        for k in range(n + 1):
            if k < n:
                owner = c
                dk = k
            else:
                owner = p
                dk = d
            tn = t + exponential(s, STREAM_BTP, draws)
            draws += np.uint64(1)
            if tn <= horizon:
                if size == hcap:
                    hcap *= 2
                    ht = np.concatenate((ht, np.empty_like(ht)))
                    hp = np.concatenate((hp, np.empty_like(hp)))
                    hd = np.concatenate((hd, np.empty_like(hd)))
                    hs = np.concatenate((hs, np.empty_like(hs)))
                _heap_push(ht, hp, hd, hs, size, tn, owner, dk, seq)
                size += 1
                seq += 1
    return (parent[:count].copy(), vertex[:count].copy(), birth[:count].copy(),
            direction[:count].copy(), collisions, status, last)


@njit(cache=True, nogil=True)
def _annotate(n, parent, vertex):
    """Alive flags, per-vertex birth rank, contest counters a and c, line lengths."""
    m = parent.shape[0]
    nv = 1 << n
    alive = np.zeros(m, dtype=np.bool_)
    rank = np.empty(m, dtype=np.int64)
    c = np.empty(m, dtype=np.int64)
    a = np.empty(m, dtype=np.int64)
    depth = np.zeros(m, dtype=np.int64)
    seen = np.zeros(nv, dtype=np.int64)
    occupied = np.zeros(nv, dtype=np.bool_)
    for x in range(m):
        v = vertex[x]
        rank[x] = seen[v]
        seen[v] += 1
        if x == 0:
            alive[x] = True
            occupied[v] = True
            c[x] = rank[x]
        else:
            alive[x] = alive[parent[x]] and not occupied[v]
            if alive[x]:
                occupied[v] = True
            c[x] = c[parent[x]] + rank[x]
            depth[x] = depth[parent[x]] + 1

    # a(x) = a(parent) + (ancestors of the parent sitting at vertex(x)):
    # depth-first over the particle tree with a per-vertex counter of the
    # current ancestral line
    nchild = np.zeros(m + 1, dtype=np.int64)
    for x in range(1, m):
        nchild[parent[x] + 1] += 1
    for x in range(m):
        nchild[x + 1] += nchild[x]
    fill = nchild[:m].copy()
    kids = np.empty(max(m - 1, 1), dtype=np.int64)
    for x in range(1, m):
        kids[fill[parent[x]]] = x
        fill[parent[x]] += 1
    online = np.zeros(nv, dtype=np.int64)
    stack = np.empty(m, dtype=np.int64)
    cursor = np.empty(m, dtype=np.int64)
    a[0] = 0
    online[vertex[0]] = 1
    stack[0] = 0
    cursor[0] = nchild[0]
    top = 1
    while top > 0:
        x = stack[top - 1]
        if cursor[x] < nchild[x + 1]:
            y = kids[cursor[x]]
            cursor[x] += 1
            a[y] = a[x] + online[vertex[y]]
            online[vertex[y]] += 1
            cursor[y] = nchild[y]
            stack[top] = y
            top += 1
        else:
            online[vertex[x]] -= 1
            top -= 1
    return alive, rank, a, c, depth


# ---------------------------------------------------------------------------
# run container


@dataclass(frozen=True)
class BtpRun:
    n: int
    horizon: float
    origin: int
    seed: int
    parent: np.ndarray = field(repr=False)
    vertex: np.ndarray = field(repr=False)
    birth: np.ndarray = field(repr=False)
    direction: np.ndarray = field(repr=False)
    alive: Optional[np.ndarray] = field(default=None, repr=False)
    truncated: bool = False
    collisions: int = 0

    @property
    def size(self) -> int:
        return len(self.birth)

    @cached_property
    def _annotations(self):
        return _annotate(self.n, self.parent, self.vertex)

    @cached_property
    def vertex_index(self) -> Dict[int, np.ndarray]:
        """Vertex -> ids of the particles born there, in birth order."""
        order = np.argsort(self.vertex, kind="stable")
        verts, starts = np.unique(self.vertex[order], return_index=True)
        groups = np.split(order, starts[1:])
        return {int(v): g for v, g in zip(verts, groups)}

    @property
    def rank(self) -> np.ndarray:
        """Number of particles born at the same vertex strictly earlier."""
        return self._annotations[1]

    @property
    def a(self) -> np.ndarray:
        return self._annotations[2]

    @property
    def c(self) -> np.ndarray:
        return self._annotations[3]

    @property
    def depth(self) -> np.ndarray:
        """Length of each particle's ancestral line (root: 0)."""
        return self._annotations[4]

    @property
    def b(self) -> np.ndarray:
        return self.c - self.a

    def at(self, v: int, t: Optional[float] = None) -> np.ndarray:
        """Ids of particles at ``v`` born no later than ``t`` (default: horizon)."""
        t = self._check_time(t)
        ids = self.vertex_index.get(int(v))
        if ids is None:
            return np.empty(0, dtype=np.int64)
        return ids[self.birth[ids] <= t]

    def count(self, v: int, t: Optional[float] = None) -> int:
        """Z(v, t)."""
        return len(self.at(v, t))

    def _check_time(self, t):
        if t is None:
            return self.horizon
        if t > self.horizon:
            raise ValueError(f"time {t} is beyond the simulated horizon {self.horizon}")
        return t


def simulate(n: int, horizon: float, origin: int = 0, seed: int = 0,
             max_particles: int = DEFAULT_MAX_PARTICLES) -> BtpRun:
    """Run the BTP on Q_n from a single particle at ``origin`` up to ``horizon``.

    Raises PopulationCapExceeded when more than ``max_particles`` particles
    would be born; the expected total is ``expected_population(n, horizon)``.
    """
    hc.check_dimension(n, bytes_per_edge=0)
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if not 0 <= origin < (1 << n):
        raise ValueError("origin is not a vertex of Q_n")
    if max_particles < 1:
        raise ValueError("max_particles must be positive")
    parent, vertex, birth, direction, collisions, status, last = _simulate(
        n, float(horizon), origin, np.uint64(seed), max_particles)
    if status:
        raise PopulationCapExceeded(
            f"more than {max_particles} particles by time {last:.4g} "
            f"(expected e^(n*horizon) = {expected_population(n, horizon):.3g})",
            particles=len(birth), time_reached=last)
    return BtpRun(n, float(horizon), origin, seed, parent, vertex, birth, direction,
                  truncated=False, collisions=int(collisions))


def mark_alive(run: BtpRun) -> BtpRun:
    """Same run with the alive/ghost flags filled in.

    In birth order: the root is alive; a particle is alive iff its parent is
    alive and no alive particle already occupies its vertex.
    """
    if run.alive is not None:
        return run
    out = replace(run, alive=run._annotations[0])
    out.__dict__["_annotations"] = run._annotations
    return out


# ---------------------------------------------------------------------------
# per-particle queries


def ancestors(run: BtpRun, x: int) -> List[int]:
    """Ancestral line of ``x``, root first, ``x`` last."""
    line = []
    while x >= 0:
        line.append(int(x))
        x = int(run.parent[x])
    return line[::-1]


class AncestralPath(NamedTuple):
    vertices: List[int]
    simple: bool
    length: int


def ancestral_path(run: BtpRun, x: int) -> AncestralPath:
    verts = [int(run.vertex[y]) for y in ancestors(run, x)]
    return AncestralPath(verts, len(set(verts)) == len(verts), len(verts) - 1)


def contest_counts(run: BtpRun, x: int) -> Tuple[int, int, int]:
    """(a, b, c) of particle ``x`` by walking its ancestral line.

    For each ancestor y, every particle born at y's vertex strictly before y
    is counted, in ``a`` when it is itself an ancestor of ``x`` and in ``b``
    otherwise.
    """
    line = ancestors(run, x)
    on_line = set(line)
    a = b = 0
    for y in line:
        earlier = run.vertex_index[int(run.vertex[y])]
        earlier = earlier[: int(np.searchsorted(earlier, y))]
        k = sum(1 for z in earlier if int(z) in on_line)
        a += k
        b += len(earlier) - k
    return a, b, a + b


def uncontested_occupancy(run: BtpRun, v: int, t: Optional[float] = None) -> int:
    """Z_0(v, t): 1 iff some particle at ``v`` born by ``t`` has c = 0."""
    ids = run.at(v, t)
    return int(np.any(run.c[ids] == 0))


def alive_arrival(run: BtpRun, v: int) -> float:
    """Birth time of the alive particle at ``v``, inf if none by the horizon."""
    run = mark_alive(run)
    ids = run.at(v)
    ids = ids[run.alive[ids]]
    return float(run.birth[ids[0]]) if len(ids) else math.inf


@dataclass
class TripleCounts:
    t_a: int
    t_b: int
    per_particle: Dict[int, Tuple[int, int, int]]

    @property
    def total(self) -> int:
        return self.t_a + self.t_b


def count_triples(run: BtpRun, v: int, t: Optional[float] = None) -> TripleCounts:
    """Sums of a and b over the particles at ``v`` born by ``t``."""
    ids = run.at(v, t)
    a, c = run.a[ids], run.c[ids]
    per = {int(x): (int(ax), int(cx - ax), int(cx)) for x, ax, cx in zip(ids, a, c)}
    return TripleCounts(int(a.sum()), int((c - a).sum()), per)


# ---------------------------------------------------------------------------
# coupling invariants


def coupling_violations(run: BtpRun) -> List[str]:
    """Every broken coupling invariant of ``run``, as human-readable strings.

    Checked per vertex: at most one alive and one uncontested particle,
    uncontested implies alive and first-born, and the step functions satisfy
    Z_0(v, .) <= alive(v, .) <= Z(v, .) on the whole time range.
    """
    run = mark_alive(run)
    out = []
    alive, a, c = run.alive, run.a, run.c
    unc = c == 0
    if np.any(a > c):
        out.append(f"a > c for particles {np.flatnonzero(a > c)[:5].tolist()}")
    if np.any(unc & ~alive):
        out.append(f"uncontested ghost {np.flatnonzero(unc & ~alive)[:5].tolist()}")
    if np.any(unc & (run.rank > 0)):
        out.append(f"uncontested but not first at its vertex: {np.flatnonzero(unc & (run.rank > 0))[:5].tolist()}")
    nv = 1 << run.n
    n_alive = np.bincount(run.vertex[alive], minlength=nv)
    n_unc = np.bincount(run.vertex[unc], minlength=nv)
    if np.any(n_alive > 1):
        out.append(f"several alive particles at vertices {np.flatnonzero(n_alive > 1)[:5].tolist()}")
    if np.any(n_unc > 1):
        out.append(f"several uncontested particles at vertices {np.flatnonzero(n_unc > 1)[:5].tolist()}")
    # jump times of the three step functions at each vertex
    first = np.full(nv, np.inf)
    np.minimum.at(first, run.vertex, run.birth)
    t_alive = np.full(nv, np.inf)
    np.minimum.at(t_alive, run.vertex[alive], run.birth[alive])
    t_unc = np.full(nv, np.inf)
    np.minimum.at(t_unc, run.vertex[unc], run.birth[unc])
    if np.any(t_unc < t_alive) or np.any(t_alive < first):
        out.append("sandwich Z_0 <= alive <= Z broken")
    coincide = np.isfinite(t_unc) & ((t_unc != first) | (t_alive != first))
    if np.any(coincide):
        out.append(f"first arrival mismatch at vertices {np.flatnonzero(coincide)[:5].tolist()}")
    if not run.alive[0]:
        out.append("root is not alive")
    par = run.parent[1:]
    if np.any(par >= np.arange(1, run.size)) or np.any(np.diff(run.birth) < 0):
        out.append("particle table not in birth order")
    if np.any(run.vertex[1:] != run.vertex[par] ^ (1 << run.direction[1:].astype(np.int64))):
        out.append("child not adjacent to parent")
    return out


# ---------------------------------------------------------------------------
# text dump


def dump_run(run: BtpRun, fh: TextIO) -> None:
    """One particle per line: ``id parent vertex birth direction alive``.

    Birth times are written as hex floats, so loading is bit exact.
    """
    run = mark_alive(run)
    fh.write(f"# btp n={run.n} horizon={run.horizon.hex()} origin={run.origin} "
             f"seed={run.seed} collisions={run.collisions}\n")
    fh.write("# id parent vertex birth direction alive\n")
    for x in range(run.size):
        fh.write(f"{x} {run.parent[x]} {run.vertex[x]} {float(run.birth[x]).hex()} "
                 f"{run.direction[x]} {int(run.alive[x])}\n")


def load_run(fh: TextIO) -> BtpRun:
    header = dict(kv.split("=") for kv in fh.readline().split()[2:])
    fh.readline()
    rows = [line.split() for line in fh if line.strip()]
    parent = np.array([int(r[1]) for r in rows], dtype=np.int64)
    vertex = np.array([int(r[2]) for r in rows], dtype=np.int64)
    birth = np.array([float.fromhex(r[3]) for r in rows])
    direction = np.array([int(r[4]) for r in rows], dtype=np.int8)
    alive = np.array([r[5] == "1" for r in rows])
    return BtpRun(int(header["n"]), float.fromhex(header["horizon"]), int(header["origin"]),
                  int(header["seed"]), parent, vertex, birth, direction, alive,
                  collisions=int(header["collisions"]))


def line_length_counts(run: BtpRun, v: int, t: Optional[float] = None) -> Counter:
    """Histogram of ancestral-line lengths of the particles at ``v`` by ``t``."""
    return Counter(int(d) for d in run.depth[run.at(v, t)])
