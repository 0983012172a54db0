"""Site percolation Monte Carlo on finite regions of G, G* and G-hat.

Regions Lambda_n are the unions of faces lying inside the graph ball of radius
n about the root; their outer boundary is the target set.  Every host is flattened into
CSR arrays whose first nodes are the region's vertices in BFS order (so local
ids agree between hosts built from the same region) followed, for G-hat, by
the facial sites of faces lying wholly inside the region.

Randomness is drawn per trial from a seed derived deterministically from the
master seed, so results do not depend on the number of worker threads and
different hosts fed the same seeds see identical vertex states.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange
from scipy import optimize, stats

from . import hypgeo
from .planegraph import ball, build_hat, build_matching

# numba probes TBB on first parallel launch and warns when the installed one is old
warnings.filterwarnings("ignore", message="The TBB threading layer")

HOSTS = ("g", "star", "hat")
THREADS_ENV = "MATCHPERC_THREADS"
_CHUNKS = 64


def set_threads(k=None):
    """Cap numba worker threads (None reads MATCHPERC_THREADS)."""
    if k is None:
        k = os.environ.get(THREADS_ENV)
        if k is None:
            return numba.get_num_threads()
    k = max(1, min(int(k), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(k)
    return k


def trial_seeds(seed, trials, stream=0):
    """Per-trial 32-bit seeds, split deterministically from the master seed."""
    ss = np.random.SeedSequence([int(seed), int(stream)])
    return ss.generate_state(trials, dtype=np.uint32).astype(np.int64)


# -- instances ----------------------------------------------------------------------------

@dataclass
class PercolationInstance:
    host: str
    n: int
    indptr: np.ndarray
    indices: np.ndarray
    n_vertices: int
    n_sites: int
    boundary: np.ndarray        # bool per node: target set, the outer boundary of the region
    arcs: np.ndarray            # uint8 per node: bit k set on the closed boundary arc k
    hops: np.ndarray            # graph distance from the root, per vertex
    base_ids: np.ndarray        # base-graph id per vertex
    site_faces: list = field(default_factory=list)
    graph_hash: str = ""
    max_degree: int = 0
    source: int = 0

    @property
    def n_nodes(self):
        return self.n_vertices + self.n_sites

    def neighbors(self, x):
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def describe(self):
        return {"host": self.host, "n": self.n, "vertices": self.n_vertices,
                "sites": self.n_sites, "boundary": int(self.boundary.sum()),
                "graph_hash": self.graph_hash}


def _csr(adj):
    indptr = np.zeros(len(adj) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    indices = np.fromiter((w for a in adj for w in sorted(a)), dtype=np.int64,
                          count=int(indptr[-1]))
    return indptr, indices


def make_instance(g, host="g", n=None, arc_offset=0.0, m=None, h=None):
    """Percolation region Lambda_n of g, seen through host g | star | hat."""
    if host not in HOSTS:
        raise ValueError(f"host must be one of {HOSTS}")
    if n is None:
        n = g.radius - 1
    if n < 1:
        raise ValueError("region radius must be at least 1")
    inside, _ = ball(g, g.root, n)
    hop = g.bfs(g.root, limit=n)
    # the region is the union of faces inside the ball, so it is a closed disc
    # whose boundary is the set of vertices on edges with a single inner face
    inner_faces = [f for f in g.complete_faces if all(v in inside for v in f.cycle)]
    on_face = {}
    for f in inner_faces:
        k = len(f.cycle)
        for i in range(k):
            e = frozenset((f.cycle[i], f.cycle[(i + 1) % k]))
            on_face[e] = on_face.get(e, 0) + 1
    region = {v for f in inner_faces for v in f.cycle} or {g.root}
    bnd = {v for e, c in on_face.items() if c == 1 for v in e}
    if g.root in bnd:
        raise ValueError(f"region radius {n} is too small to surround the root")
    verts = sorted(region, key=lambda v: (hop[v], v))
    local = {v: i for i, v in enumerate(verts)}
    nv = len(verts)

    adj = [set() for _ in range(nv)]
    for v in verts:
        for w in g.adj[v]:
            if w in local:
                adj[local[v]].add(local[w])
    site_faces = []
    if host == "star":
        for f in inner_faces:
            cyc = [local[v] for v in f.cycle]
            for i, x in enumerate(cyc):
                for y in cyc[i + 1:]:
                    adj[x].add(y)
                    adj[y].add(x)
    elif host == "hat":
        for f in inner_faces:
            if len(f) < 4:
                continue
            s = len(adj)
            adj.append({local[v] for v in f.cycle})
            for v in f.cycle:
                adj[local[v]].add(s)
            site_faces.append(f.id)
    indptr, indices = _csr(adj)
    N = len(adj)
    boundary = np.zeros(N, dtype=np.bool_)
    arcs = np.zeros(N, dtype=np.uint8)
    root = g.coords[g.root]
    quarter = math.pi / 2
    ring = []
    for v in bnd:
        boundary[local[v]] = True
        ang = float(hypgeo.direction_at(root, g.coords[v], g.mode)) - arc_offset
        ring.append((ang % (2 * math.pi), local[v]))
    # closed arcs: each quadrant run plus the first vertex of the next run, like box sides
    ring.sort()
    quad = [int(a // quarter) % 4 for a, _ in ring]
    for i, (_, x) in enumerate(ring):
        arcs[x] |= 1 << quad[i]
        prev = quad[i - 1]
        if prev != quad[i]:
            arcs[x] |= 1 << prev
    return PercolationInstance(
        host, n, indptr, indices, nv, len(site_faces), boundary, arcs,
        np.array([hop[v] for v in verts], dtype=np.int64), np.array(verts, dtype=np.int64),
        site_faces, g.graph_hash(), int(np.diff(indptr[:nv + 1]).max()) if nv else 0)


def instance_from_spec(spec, host="g", n=8, arc_offset=0.0):
    """Generate the tiling at radius n + 1 and cut Lambda_n out of it."""
    from .tilings import TilingSpec, generate

    s = TilingSpec(spec.kind, spec.p, spec.q, spec.config, n + 1, spec.custom)
    return make_instance(generate(s), host, n, arc_offset)


# -- numba kernels ---------------------------------------------------------------------------

@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]


@njit(cache=True)
def _draw_states(nv, ns, p, s, seed):
    np.random.seed(seed)
    u = np.random.random(nv)
    w = np.random.random(ns)
    out = np.empty(nv + ns, dtype=np.bool_)
    for i in range(nv):
        out[i] = u[i] < p
    for i in range(ns):
        out[nv + i] = w[i] < s
    return out


@njit(cache=True)
def _connects(indptr, indices, is_open, src, dst):
    """Union-find over open nodes; does an open src node reach an open dst node?"""
    N = is_open.shape[0]
    parent = np.arange(N + 2)
    size = np.ones(N + 2, dtype=np.int64)
    A, B = N, N + 1
    for x in range(N):
        if not is_open[x]:
            continue
        if src[x]:
            _union(parent, size, x, A)
        if dst[x]:
            _union(parent, size, x, B)
        for k in range(indptr[x], indptr[x + 1]):
            y = indices[k]
            if y > x and is_open[y]:
                _union(parent, size, x, y)
    return _find(parent, A) == _find(parent, B)


@njit(parallel=True, cache=True)
def _direct_events(indptr, indices, nv, ns, src, dst, p, s, seeds):
    T = seeds.shape[0]
    out = np.zeros(T, dtype=np.bool_)
    for t in prange(T):
        st = _draw_states(nv, ns, p, s, seeds[t])
        out[t] = _connects(indptr, indices, st, src, dst)
    return out


@njit(parallel=True, cache=True)
def _nz_thresholds(indptr, indices, src, dst, seeds):
    """Occupation number at which src first meets dst when nodes open in random order."""
    N = src.shape[0]
    T = seeds.shape[0]
    out = np.full(T, N + 1, dtype=np.int64)
    for t in prange(T):
        np.random.seed(seeds[t])
        order = np.random.permutation(N)
        parent = np.arange(N + 2)
        size = np.ones(N + 2, dtype=np.int64)
        is_open = np.zeros(N, dtype=np.bool_)
        A, B = N, N + 1
        for k in range(N):
            x = order[k]
            is_open[x] = True
            if src[x]:
                _union(parent, size, x, A)
            if dst[x]:
                _union(parent, size, x, B)
            for j in range(indptr[x], indptr[x + 1]):
                y = indices[j]
                if is_open[y]:
                    _union(parent, size, x, y)
            if _find(parent, A) == _find(parent, B):
                out[t] = k + 1
                break
    return out


@njit(cache=True)
def _pivotal(indptr, indices, is_open, root, dst):
    """Exact pivotal mask for {root open and root <-> dst}; returns (event, mask)."""
    N = is_open.shape[0]
    piv = np.zeros(N, dtype=np.bool_)
    T = N
    parent = np.arange(N + 1)
    size = np.ones(N + 1, dtype=np.int64)
    for x in range(N):
        if not is_open[x]:
            continue
        if dst[x]:
            _union(parent, size, x, T)
        for k in range(indptr[x], indptr[x + 1]):
            y = indices[k]
            if y > x and is_open[y]:
                _union(parent, size, x, y)
    rT = _find(parent, T)
    event = is_open[root] and _find(parent, root) == rT
    if not event:
        if is_open[root]:
            r0 = _find(parent, root)
            for z in range(N):
                if is_open[z]:
                    continue
                near0 = False
                nearT = dst[z]
                for k in range(indptr[z], indptr[z + 1]):
                    y = indices[k]
                    if is_open[y]:
                        ry = _find(parent, y)
                        if ry == r0:
                            near0 = True
                        elif ry == rT:
                            nearT = True
                if near0 and nearT:
                    piv[z] = True
        else:
            for k in range(indptr[root], indptr[root + 1]):
                y = indices[k]
                if is_open[y] and _find(parent, y) == rT:
                    piv[root] = True
                    break
        return event, piv
    # separating vertices between root and the virtual target: iterative lowlink DFS
    piv[root] = True
    tdst = np.empty(N, dtype=np.int64)
    nt = 0
    for x in range(N):
        if dst[x] and is_open[x]:
            tdst[nt] = x
            nt += 1
    disc = np.full(N + 1, -1, dtype=np.int64)
    low = np.zeros(N + 1, dtype=np.int64)
    par = np.full(N + 1, -1, dtype=np.int64)
    ptr = np.zeros(N + 1, dtype=np.int64)
    stack = np.empty(N + 1, dtype=np.int64)
    top = 0
    stack[0] = root
    disc[root] = 0
    low[root] = 0
    clock = 1
    while top >= 0:
        x = stack[top]
        if x == T:
            deg = nt
        else:
            deg = indptr[x + 1] - indptr[x] + (1 if dst[x] else 0)
        if ptr[x] < deg:
            i = ptr[x]
            ptr[x] += 1
            if x == T:
                y = tdst[i]
            elif i == indptr[x + 1] - indptr[x]:
                y = T
            else:
                y = indices[indptr[x] + i]
            if y != T and not is_open[y]:
                continue
            if disc[y] < 0:
                disc[y] = clock
                low[y] = clock
                clock += 1
                par[y] = x
                top += 1
                stack[top] = y
            elif y != par[x]:
                if disc[y] < low[x]:
                    low[x] = disc[y]
        else:
            top -= 1
            px = par[x]
            if px >= 0 and low[x] < low[px]:
                low[px] = low[x]
    c = T
    u = par[T]
    while u != root:
        if low[c] >= disc[u]:
            piv[u] = True
        c = u
        u = par[u]
    return event, piv


@njit(parallel=True, cache=True)
def _pivotal_trials(indptr, indices, nv, ns, root, dst, p, s, seeds, probe, window):
    """Per-trial event, |Pi|, |Di|, probe pivotal, window hit; per-chunk node frequencies."""
    T = seeds.shape[0]
    N = nv + ns
    ev = np.zeros(T, dtype=np.bool_)
    npi = np.zeros(T, dtype=np.int64)
    ndi = np.zeros(T, dtype=np.int64)
    zp = np.zeros(T, dtype=np.bool_)
    wh = np.zeros(T, dtype=np.bool_)
    freq = np.zeros((_CHUNKS, N), dtype=np.int64)
    for c in prange(_CHUNKS):
        for t in range(c, T, _CHUNKS):
            st = _draw_states(nv, ns, p, s, seeds[t])
            e, piv = _pivotal(indptr, indices, st, root, dst)
            ev[t] = e
            a = 0
            b = 0
            hit = False
            for x in range(N):
                if piv[x]:
                    freq[c, x] += 1
                    if x < nv:
                        a += 1
                    else:
                        b += 1
                        if window[x]:
                            hit = True
            npi[t] = a
            ndi[t] = b
            zp[t] = probe >= 0 and piv[probe]
            wh[t] = hit
    return ev, npi, ndi, zp, wh, freq.sum(axis=0)


@njit(parallel=True, cache=True)
def _verify_trials(indptr, indices, nv, ns, root, dst, p, s, seeds, nodes_per_trial):
    """Flip-and-retest by full recomputation; counts (tested, mismatches) per trial."""
    T = seeds.shape[0]
    N = nv + ns
    tested = np.zeros(T, dtype=np.int64)
    bad = np.zeros(T, dtype=np.int64)
    src = np.zeros(N, dtype=np.bool_)
    src[root] = True
    for t in prange(T):
        st = _draw_states(nv, ns, p, s, seeds[t])
        _, piv = _pivotal(indptr, indices, st, root, dst)
        np.random.seed(seeds[t] ^ 0x5bd1e995)
        for z in np.random.permutation(N)[:nodes_per_trial]:
            w = st.copy()
            w[z] = True
            up = _connects(indptr, indices, w, src, dst)
            w[z] = False
            down = _connects(indptr, indices, w, src, dst)
            tested[t] += 1
            if (up != down) != piv[z]:
                bad[t] += 1
    return tested, bad


# -- helpers over instances -----------------------------------------------------------------

def _masks(inst, event):
    N = inst.n_nodes
    if event == "theta":
        src = np.zeros(N, dtype=np.bool_)
        src[inst.source] = True
        return src, inst.boundary
    if event == "crossing":
        return (inst.arcs & 1) > 0, (inst.arcs & 4) > 0
    if event == "crossing-dual":
        return (inst.arcs & 2) > 0, (inst.arcs & 8) > 0
    raise ValueError(f"unknown event {event!r}")


def configuration(inst, p, s, seed):
    """Open/closed state of every node for one trial seed (vertices first, then sites)."""
    return _draw_states(inst.n_vertices, inst.n_sites, float(p), float(s), int(seed))


def event_holds(inst, state, event="theta"):
    src, dst = _masks(inst, event)
    return bool(_connects(inst.indptr, inst.indices, np.asarray(state, dtype=np.bool_),
                          src, dst))


def events(inst, p, s=0.0, trials=1000, seed=0, event="theta"):
    """Per-trial indicator of the event; same seed -> same vertex states on every host."""
    src, dst = _masks(inst, event)
    seeds = trial_seeds(seed, trials)
    return _direct_events(inst.indptr, inst.indices, inst.n_vertices, inst.n_sites,
                          src, dst, float(p), float(s), seeds)


def _check_unit(x, name):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1]")


# -- theta ----------------------------------------------------------------------------------

@dataclass
class ThetaCell:
    p: float
    s: float
    theta: float
    stderr: float
    trials: int
    seed: int


@dataclass
class SweepResult:
    host: str
    n: int
    seed: int
    trials: int
    graph_hash: str
    cells: list

    def grid(self):
        ps = sorted({c.p for c in self.cells})
        ss = sorted({c.s for c in self.cells})
        th = np.full((len(ps), len(ss)), np.nan)
        for c in self.cells:
            th[ps.index(c.p), ss.index(c.s)] = c.theta
        return ps, ss, th

    def rows(self):
        return [(self.host, self.n, c.p, c.s, c.theta, c.stderr, c.trials, c.seed)
                for c in self.cells]

    def to_json_dict(self):
        return {"host": self.host, "n": self.n, "seed": self.seed, "trials": self.trials,
                "graph_hash": self.graph_hash,
                "cells": [c.__dict__ for c in self.cells]}


def _bernoulli(hits, trials):
    th = hits / trials
    return th, math.sqrt(th * (1 - th) / trials)


def sample_theta(inst, p, s=0.0, trials=1000, seed=0):
    """theta_n(p, s): P(root open and connected to the boundary) on the instance's host."""
    _check_unit(p, "p")
    _check_unit(s, "s")
    if trials < 1:
        raise ValueError("trials must be positive")
    hits = int(events(inst, p, s, trials, seed).sum())
    th, se = _bernoulli(hits, trials)
    return ThetaCell(float(p), float(s), th, se, trials, seed)


def sweep(inst, ps, ss=(0.0,), trials=1000, seed=0):
    """Grid of theta estimates; every cell reuses the same trial seeds, so the grid is monotone."""
    cells = [sample_theta(inst, p, s, trials, seed) for p in ps for s in ss]
    return SweepResult(inst.host, inst.n, seed, trials, inst.graph_hash, cells)


# -- critical point ------------------------------------------------------------------------

@dataclass
class CrossingCurve:
    """Newman-Ziff crossing thresholds of one region; R(p) follows by binomial convolution."""
    n: int
    n_nodes: int
    kc: np.ndarray
    seed: int

    @property
    def trials(self):
        return len(self.kc)

    def per_trial(self, p):
        return stats.binom.sf(self.kc - 1, self.n_nodes, p)

    def R(self, p):
        return float(self.per_trial(p).mean())

    def p_star(self, level=0.5):
        """Where R crosses the level, with a delta-method standard error."""
        f = lambda p: self.R(p) - level
        lo, hi = 1e-9, 1 - 1e-9
        if f(lo) > 0 or f(hi) < 0:
            raise ValueError("crossing probability never reaches the level")
        ps = optimize.brentq(f, lo, hi, xtol=1e-12)
        sd = float(self.per_trial(ps).std(ddof=1)) / math.sqrt(self.trials)
        h = 1e-4
        slope = (self.R(min(ps + h, 1)) - self.R(max(ps - h, 0))) / (2 * h)
        return ps, sd / slope if slope > 0 else math.inf


def crossing_thresholds(inst, trials=1000, seed=0, event="crossing"):
    if inst.n_sites:
        raise ValueError("crossing thresholds need a vertex-only host (g or star)")
    src, dst = _masks(inst, event)
    kc = _nz_thresholds(inst.indptr, inst.indices, src, dst, trial_seeds(seed, trials))
    return CrossingCurve(inst.n, inst.n_nodes, kc, seed)


def crossing_half(inst, trials=1000, seed=0, tol=1e-3, event="crossing"):
    """Canonical fallback: bisection on p with direct sampling at shared seeds."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if events(inst, mid, 0.0, trials, seed, event).mean() < 0.5:
            lo = mid
        else:
            hi = mid
    p = (lo + hi) / 2
    fr = events(inst, p, 0.0, trials, seed, event).mean()
    return p, max(tol, math.sqrt(max(fr * (1 - fr), 0.25) / trials))


@dataclass
class PcEstimate:
    host: str
    tiling: str
    sizes: list
    p_star: list
    p_star_err: list
    pc: float
    pc_err: float
    residual: float
    method: str
    monotone: bool
    low_confidence: bool
    max_degree: int
    degree_bound_ok: bool
    trials: int
    seed: int
    notes: list = field(default_factory=list)

    def to_json_dict(self):
        return dict(self.__dict__)


def extrapolate(sizes, values, errors):
    """Weighted least-squares fit of values against 1/n; (intercept, its error, chi2/dof)."""
    x = 1.0 / np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    w = 1.0 / np.maximum(np.asarray(errors, dtype=float), 1e-12) ** 2
    X = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    beta = cov @ (X.T @ (w * y))
    res = y - X @ beta
    dof = len(y) - 2
    chi2 = float((w * res ** 2).sum() / dof) if dof > 0 else 0.0
    return float(beta[0]), float(math.sqrt(cov[0, 0])), chi2


def estimate_pc(spec, host="g", sizes=(32, 64), trials=10000, seed=0,
                method="newman-ziff", arc_offset=0.0, instances=None):
    """Crossing-probability half points p*(n) and their 1/n extrapolation."""
    if len(sizes) < 2:
        raise ValueError("need at least two region sizes")
    if host == "hat":
        raise ValueError("critical points are estimated on g or star")
    pts, errs, maxdeg = [], [], 0
    for i, n in enumerate(sizes):
        inst = (instances or {}).get(n) or instance_from_spec(spec, host, n, arc_offset)
        maxdeg = max(maxdeg, _interior_max_degree(inst))
        if method == "newman-ziff":
            p, e = crossing_thresholds(inst, trials, seed + i).p_star()
        elif method == "crossing-half":
            p, e = crossing_half(inst, trials, seed + i)
        else:
            raise ValueError(f"unknown method {method!r}")
        pts.append(p)
        errs.append(e)
    pc, pc_err, chi2 = extrapolate(sizes, pts, errs)
    diffs = np.diff(pts)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    notes = ["finite-size extrapolation against 1/n is heuristic"]
    low = not monotone or chi2 > 4.0 or not 0 < pc < 1
    if not monotone:
        notes.append("p*(n) is not monotone in n")
    pc = min(max(pc, 1e-9), 1 - 1e-9)
    bound = 1 / (maxdeg - 1) if maxdeg > 1 else 0.0
    return PcEstimate(host, _tiling_name(spec), list(sizes), pts, errs, pc, pc_err, chi2,
                      method, monotone, low, maxdeg, pc >= bound - 0.01, trials, seed, notes)


def _interior_max_degree(inst):
    deg = np.diff(inst.indptr[:inst.n_vertices + 1])
    inner = ~inst.boundary[:inst.n_vertices]
    return int(deg[inner].max()) if inner.any() else int(deg.max())


def _tiling_name(spec):
    if spec.kind == "archimedean":
        return spec.config
    if spec.kind == "custom":
        return "custom"
    return f"{{{spec.p},{spec.q}}}"


# -- pivotality -----------------------------------------------------------------------------

@dataclass
class PivotalStats:
    host: str
    n: int
    p: float
    s: float
    trials: int
    seed: int
    theta: float
    mean_pi: float
    mean_pi_err: float
    mean_di: float
    mean_di_err: float
    vertex_freq: np.ndarray
    site_freq: np.ndarray
    probe: int = -1
    window_radius: int = 0
    p_probe: float = 0.0
    p_probe_err: float = 0.0
    p_window: float = 0.0
    p_window_err: float = 0.0
    verified: int = 0
    mismatches: int = 0

    def to_json_dict(self):
        d = dict(self.__dict__)
        d["vertex_freq"] = self.vertex_freq.tolist()
        d["site_freq"] = self.site_freq.tolist()
        return d


def pivotal_sets(inst, state):
    """(Pi, Di) of one configuration for the event {root open and root <-> boundary}."""
    src, dst = _masks(inst, "theta")
    _, piv = _pivotal(inst.indptr, inst.indices, np.asarray(state, dtype=np.bool_),
                      inst.source, dst)
    idx = np.flatnonzero(piv)
    return set(idx[idx < inst.n_vertices].tolist()), set(idx[idx >= inst.n_vertices].tolist())


def window_sites(inst, z, M):
    """Facial sites whose face lies inside the radius-M ball of G about vertex z."""
    nv = inst.n_vertices
    mask = np.zeros(inst.n_nodes, dtype=np.bool_)
    if inst.host != "hat":
        return mask
    dist = {z: 0}
    frontier = [z]
    for d in range(M):
        nxt = []
        for x in frontier:
            for y in inst.neighbors(x):
                if y < nv and y not in dist:
                    dist[y] = d + 1
                    nxt.append(int(y))
        frontier = nxt
    for k in range(inst.n_sites):
        sid = nv + k
        if all(int(v) in dist for v in inst.neighbors(sid)):
            mask[sid] = True
    return mask


def default_probe(inst):
    """A vertex at distance n // 4 from the root (lowest id)."""
    target = max(1, inst.n // 4)
    return int(np.flatnonzero(inst.hops == target)[0])


def pivotal_stats(inst, p, s, trials=1000, seed=0, probe=None, M=0, verify=0.1):
    """Pivotal vertex and facial-site statistics, with a flip-and-retest audit."""
    _check_unit(p, "p")
    _check_unit(s, "s")
    src, dst = _masks(inst, "theta")
    seeds = trial_seeds(seed, trials)
    if probe is None:
        probe = default_probe(inst)
    window = window_sites(inst, probe, M) if M > 0 else np.zeros(inst.n_nodes, np.bool_)
    ev, npi, ndi, zp, wh, freq = _pivotal_trials(
        inst.indptr, inst.indices, inst.n_vertices, inst.n_sites, inst.source, dst,
        float(p), float(s), seeds, int(probe), window)
    verified = bad = 0
    if verify > 0:
        rng = np.random.default_rng([seed, 1])
        k = max(1, int(round(verify * trials)))
        pick = np.sort(rng.choice(trials, size=min(k, trials), replace=False))
        per = max(1, int(math.ceil(verify * inst.n_nodes)))
        tested, mism = _verify_trials(inst.indptr, inst.indices, inst.n_vertices,
                                      inst.n_sites, inst.source, dst, float(p), float(s),
                                      seeds[pick], per)
        verified, bad = int(tested.sum()), int(mism.sum())
    T = trials
    th = float(ev.mean())
    pz, pz_e = _bernoulli(int(zp.sum()), T)
    pw, pw_e = _bernoulli(int(wh.sum()), T)
    return PivotalStats(
        inst.host, inst.n, float(p), float(s), T, seed, th,
        float(npi.mean()), float(npi.std(ddof=1) / math.sqrt(T)) if T > 1 else 0.0,
        float(ndi.mean()), float(ndi.std(ddof=1) / math.sqrt(T)) if T > 1 else 0.0,
        freq[:inst.n_vertices] / T, freq[inst.n_vertices:] / T,
        int(probe), int(M), pz, pz_e, pw, pw_e, verified, bad)


@dataclass
class EnhancementRatio:
    probe: int
    M: int
    p_pivotal: float
    p_pivotal_err: float
    p_window: float
    p_window_err: float
    ratio: float
    ratio_flag: str       # finite | infinite | undefined
    precondition_met: bool
    stats: PivotalStats

    def to_json_dict(self):
        d = {k: v for k, v in self.__dict__.items() if k != "stats"}
        d["verified"] = self.stats.verified
        d["mismatches"] = self.stats.mismatches
        return d


def enhancement_ratio(inst, p, s, z=None, M=2, trials=1000, seed=0, verify=0.1):
    """Estimates of P(z in Pi_n) and P(Di_n meets the M-ball of z), and their ratio."""
    ok = inst.n > 4 * M
    if not ok:
        warnings.warn(f"region radius {inst.n} is not larger than 4M = {4 * M}",
                      RuntimeWarning, stacklevel=2)
    st = pivotal_stats(inst, p, s, trials, seed, z, M, verify)
    if inst.n_sites == 0 or (st.p_probe == 0 and st.p_window == 0):
        ratio, flag = math.nan, "undefined"
    elif st.p_window == 0:
        ratio, flag = math.inf, "infinite"
    else:
        ratio, flag = st.p_probe / st.p_window, "finite"
    return EnhancementRatio(st.probe, M, st.p_probe, st.p_probe_err, st.p_window,
                            st.p_window_err, ratio, flag, ok, st)


@dataclass
class RussoEstimate:
    dtheta_dp: float
    dtheta_dp_err: float
    dtheta_ds: float
    dtheta_ds_err: float
    fd_dp: float
    fd_dp_err: float
    fd_ds: float
    fd_ds_err: float
    delta: float

    def to_json_dict(self):
        return dict(self.__dict__)


def _paired_difference(inst, p0, s0, p1, s1, trials, seed, delta):
    a = events(inst, p1, s1, trials, seed).astype(float)
    b = events(inst, p0, s0, trials, seed).astype(float)
    d = (a - b) / (2 * delta)
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(trials))


def russo_derivatives(inst, p, s, trials=1000, seed=0, delta=0.02):
    """d theta/dp as E|Pi_n| and d theta/ds as E|Di_n|, next to paired central differences."""
    if not (0 < p < 1 and 0 < s < 1):
        raise ValueError("p and s must lie strictly inside (0, 1)")
    st = pivotal_stats(inst, p, s, trials, seed, verify=0)
    fdp = _paired_difference(inst, p - delta, s, p + delta, s, trials, seed + 1, delta)
    fds = _paired_difference(inst, p, s - delta, p, s + delta, trials, seed + 2, delta)
    return RussoEstimate(st.mean_pi, st.mean_pi_err, st.mean_di, st.mean_di_err,
                         fdp[0], fdp[1], fds[0], fds[1], delta)
