"""Maximal diagonals, geodesic-tracking paths of G* and the two-sided path assembly."""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

from . import hypgeo
from .hypgeo import EUCLIDEAN, GeodesicParam
from .nst import is_nst, remove_oxbows_path
from .planegraph import build_matching

TOL = 1e-9


class DegeneracyWarning(RuntimeWarning):
    pass


def _at_precision(fn):
    @functools.wraps(fn)
    def run(m, *args, **kw):
        with m.base.precision():
            return fn(m, *args, **kw)
    return run


def _lib_side(W, mode):
    """Signed distance-like measure of a frame point from the real axis (positive above)."""
    if mode == EUCLIDEAN:
        return W.imag
    L = hypgeo._lib(W)
    return L.asinh(2 * W.imag / (1 - abs(W) ** 2))


class Frame:
    """Parametrization of the geodesic through a and b, oriented so that p(a) = 0 < p(b)."""

    def __init__(self, a, b, mode):
        g = hypgeo.geodesic_through(a, b, mode)
        param = GeodesicParam(g, a)
        if param.value(b) < 0:
            param = GeodesicParam(g, a, -1)
        self.param = param
        self.mode = mode
        self.F = param.frame()

    def p(self, z):
        return float(self.param.value(z, self.F))

    def side(self, z):
        return float(_lib_side(self.F(z), self.mode))

    def crossing(self, x, y):
        return float(self.param.crossing_value(x, y, self.F))


def edge_span(e, f, mode):
    """rho between the projections of f's endpoints onto the geodesic through e's endpoints."""
    fr = Frame(e[0], e[1], mode)
    return abs(fr.p(f[0]) - fr.p(f[1]))


# -- maximality -----------------------------------------------------------------------------

@dataclass
class MaximalityReport:
    edge: tuple
    rho: float
    violator: tuple | None
    violator_span: float
    verdict: str                 # maximal | not-maximal | indeterminate
    tested: int
    radius: int | None
    hint: str = ""

    @property
    def maximal(self):
        return self.verdict == "maximal"

    def to_json_dict(self):
        return {"edge": list(self.edge), "rho": self.rho,
                "violator": list(self.violator) if self.violator else None,
                "violator_span": self.violator_span, "verdict": self.verdict,
                "tested": self.tested, "radius": self.radius, "hint": self.hint}


@_at_precision
def is_maximal(m, e, tol=TOL, min_margin=2):
    """Compare rho(e) with the projected span of every edge of the generated ball."""
    g = m.base
    a, b = g.coords[e[0]], g.coords[e[1]]
    fr = Frame(a, b, g.mode)
    rho = float(hypgeo.distance(a, b, g.mode))
    p = [None] * len(g)
    best, worst = None, -1.0
    for x, y in g.edges:
        if p[x] is None:
            p[x] = fr.p(g.coords[x])
        if p[y] is None:
            p[y] = fr.p(g.coords[y])
        s = abs(p[x] - p[y])
        if s > worst:
            best, worst = (x, y), s
    if worst > rho + tol:
        verdict, hint = "not-maximal", ""
    else:
        verdict, hint = "maximal", ""
        if g.radius is not None:
            margin = g.radius - max(g.root_distance(e[0]), g.root_distance(e[1]))
            if margin < min_margin:
                verdict = "indeterminate"
                hint = f"regenerate with radius >= {g.radius + min_margin - margin}"
    return MaximalityReport(tuple(e), rho, best, worst, verdict, len(g.edges), g.radius, hint)


def max_edge_span(m, d):
    return is_maximal(m, d).violator_span


def select_diagonal(m):
    """A longest diagonal of a largest complete face, taking the face nearest the root."""
    g = m.base
    if not m.diagonals:
        return None
    r = max(len(f) for f in g.complete_faces if any(fid == f.id for *_, fid in m.diagonals))
    faces = [f for f in g.complete_faces if len(f) == r]
    face = min(faces, key=lambda f: (max(g.root_distance(v) for v in f.cycle), sorted(f.cycle)))
    best = None
    for x, y, fid in m.diagonals:
        if fid != face.id:
            continue
        rho = float(g.distance(x, y))
        key = (-round(rho, 9), min(x, y), max(x, y))
        if best is None or key < best[0]:
            best = (key, (x, y))
    x, y = best[1]
    # a is the endpoint nearer the root so the + direction points outwards deterministically
    if (g.root_distance(y), y) < (g.root_distance(x), x):
        x, y = y, x
    return (x, y)


# -- traces ----------------------------------------------------------------------------------

@dataclass
class GeodesicPathTrace:
    diagonal: tuple
    vertices: list
    pvalues: list
    window: float
    truncated: bool
    covered_to: float
    degenerate: list = field(default_factory=list)

    def __len__(self):
        return len(self.vertices)

    def to_json_dict(self):
        return {"diagonal": list(self.diagonal), "vertices": list(self.vertices),
                "pvalues": list(self.pvalues), "window": self.window,
                "truncated": self.truncated, "covered_to": self.covered_to,
                "degenerate": list(self.degenerate)}


@_at_precision
def trace_geodesic_path(m, d, direction=1, window=math.inf, tol=TOL):
    """Vertex list recorded while following the geodesic of d beyond its endpoint.

    direction=+1 starts at d[1] moving away from d[0]; direction=-1 starts at d[0]
    moving away from d[1]. p-values are reported in the frame with p(d[0]) = 0.
    """
    g = m.base
    a, b = g.coords[d[0]], g.coords[d[1]]
    fr = Frame(a, b, g.mode)
    sgn = 1 if direction == 1 else -1
    start = d[1] if direction == 1 else d[0]
    cache = {}

    def P(v):
        if v not in cache:
            cache[v] = (sgn * fr.p(g.coords[v]), fr.side(g.coords[v]))
        return cache[v]

    p0 = P(start)[0]
    intervals = []     # (enter, exit, added vertex, exit position)
    events = []
    for f in g.complete_faces:
        cyc = f.cycle
        sides = [P(v)[1] for v in cyc]
        if not (max(sides) > tol and min(sides) < -tol):
            continue
        pts = []
        k = len(cyc)
        for i in range(k):
            x, y = cyc[i], cyc[(i + 1) % k]
            sx, sy = sides[i], sides[(i + 1) % k]
            if abs(sx) <= tol:
                pts.append((P(x)[0], x, None))
            if (sx > tol and sy < -tol) or (sx < -tol and sy > tol):
                pts.append((sgn * fr.crossing(g.coords[x], g.coords[y]), x, y))
        lo = min(q[0] for q in pts)
        hi = max(q[0] for q in pts)
        if hi <= p0 + tol:
            continue
        intervals.append((lo, hi))
        exit_pts = [q for q in pts if q[0] >= hi - tol]
        # a vertex exit takes precedence over an edge crossing at the same spot
        vex = [q for q in exit_pts if q[2] is None]
        if vex:
            w = vex[0][1]
        else:
            _, x, y = exit_pts[0]
            px, py = P(x)[0], P(y)[0]
            if abs(px - py) <= tol:
                # perpendicular exit edge: take the endpoint on the left
                w = x if sgn * P(x)[1] > sgn * P(y)[1] else y
            else:
                w = x if px > py else y
        events.append((hi, P(w)[0], w))
    for x, y in g.edges:
        if abs(P(x)[1]) <= tol and abs(P(y)[1]) <= tol:
            lo, hi = sorted((P(x)[0], P(y)[0]))
            if hi > p0 + tol:
                intervals.append((lo, hi))
                events.append((P(x)[0], P(x)[0], x))
                events.append((P(y)[0], P(y)[0], y))
    # coverage of [p0, p0 + window] by faces and edges lying on the geodesic
    intervals.sort()
    covered = p0
    for lo, hi in intervals:
        if lo > covered + 1e-7:
            break
        covered = max(covered, hi)
    limit = min(covered, p0 + window)
    truncated = covered < p0 + window
    events = sorted(e for e in events if p0 + tol < e[0] <= limit + tol)
    verts, pv = [start], [p0]
    for _, pw, w in events:
        if w == verts[-1]:
            continue
        if w in verts:
            # revisiting means the trace has become degenerate; stop here
            truncated = True
            break
        verts.append(w)
        pv.append(pw)
    degenerate = []
    for i in range(1, len(pv)):
        if pv[i] <= pv[i - 1] + tol:
            degenerate.append(i)
    if degenerate:
        warnings.warn(f"p-values not strictly increasing at {degenerate}", DegeneracyWarning)
    return GeodesicPathTrace(tuple(d), verts, [sgn * q for q in pv], float(window),
                             truncated, sgn * covered, degenerate)


def check_trace(m, tr, direction=1, tol=TOL):
    """Path of G* with strictly monotone p-values."""
    for x, y in zip(tr.vertices, tr.vertices[1:]):
        if y not in m.adj[x]:
            return False
    s = 1 if direction == 1 else -1
    return all(s * (q - p) > tol for p, q in zip(tr.pvalues, tr.pvalues[1:]))


# -- two-sided assembly -----------------------------------------------------------------------

@dataclass
class Assembly:
    diagonal: tuple
    path: list              # nu_{-k}, ..., nu_{-1}=a, nu_0=b, ..., nu_t
    pvalues: list
    offset: int             # index of nu_0 (= b) in path
    nst: bool
    chords: list            # violating (s, t, span) with indices relative to nu_0
    plus_steps: int
    minus_steps: int

    def nu(self, k):
        return self.path[self.offset + k]

    def p(self, k):
        return self.pvalues[self.offset + k]

    def to_json_dict(self):
        return {"diagonal": list(self.diagonal), "path": list(self.path),
                "pvalues": list(self.pvalues), "offset": self.offset, "nst": self.nst,
                "chords": [list(c) for c in self.chords], "plus_steps": self.plus_steps,
                "minus_steps": self.minus_steps}


def assemble_two_sided(m, d, plus, minus):
    """Oxbow-clean both traces, join them through d and look for cross chords."""
    pv = dict(zip(plus.vertices, plus.pvalues))
    pv.update(zip(minus.vertices, minus.pvalues))
    nplus = remove_oxbows_path(m, plus.vertices)
    nminus = remove_oxbows_path(m, minus.vertices)
    path = nminus[::-1] + nplus
    off = len(nminus)
    pvals = [pv[x] for x in path]
    chords = []
    index = {x: i for i, x in enumerate(path)}
    for s_i in range(off):
        x = path[s_i]
        for y in m.adj[x]:
            t_i = index.get(y)
            if t_i is None or t_i < off:
                continue
            s, t = s_i - off, t_i - off
            if (s, t) != (-1, 0):
                chords.append((s, t, pvals[t_i] - pvals[s_i]))
    ok = is_nst(m, path)
    return Assembly(tuple(d), path, pvals, off, ok, sorted(chords), len(nplus) - 1,
                    len(nminus) - 1)


def two_sided(m, d, window=math.inf):
    plus = trace_geodesic_path(m, d, 1, window)
    minus = trace_geodesic_path(m, d, -1, window)
    return plus, minus, assemble_two_sided(m, d, plus, minus)


# -- the weak criterion -----------------------------------------------------------------------

def weak_criterion(m, d, s, t, assembly=None, span_bound=None, tol=TOL):
    """Both clauses: nu_s..nu_t is nst in G*, and p(nu_t) - p(nu_s) beats every edge's projected span."""
    if s >= 0 or t < 1:
        return False
    if assembly is None:
        assembly = two_sided(m, d)[2]
    if -s > assembly.offset or t >= len(assembly.path) - assembly.offset:
        return False
    seq = assembly.path[assembly.offset + s:assembly.offset + t + 1]
    if not is_nst(m, seq):
        return False
    bound = span_bound if span_bound is not None else max_edge_span(m, d)
    return assembly.p(t) - assembly.p(s) > bound + tol


@dataclass
class WeakCertificate:
    diagonal: tuple
    s: int
    t: int
    span: float
    bound: float
    path: list

    def to_json_dict(self):
        return {"diagonal": list(self.diagonal), "s": self.s, "t": self.t, "span": self.span,
                "bound": self.bound, "path": list(self.path)}


def _shortest_window(m, d, max_window):
    asm = two_sided(m, d)[2]
    bound = max_edge_span(m, d)
    for width in range(2, max_window + 1):
        for s in range(-1, -width, -1):
            t = width + s
            if weak_criterion(m, d, s, t, asm, bound):
                return WeakCertificate(d, s, t, asm.p(t) - asm.p(s), bound,
                                       asm.path[asm.offset + s:asm.offset + t + 1])
    return None


def find_weak_certificate(m, max_window=6, near=2):
    """Shortest window (s, t) passing the weak criterion among diagonals of faces near the root."""
    g = m.base
    cands = sorted({(x, y) for x, y, _ in m.diagonals
                    if max(g.root_distance(x), g.root_distance(y)) <= near})
    best = None
    for x, y in cands:
        for d in ((x, y), (y, x)):
            cert = _shortest_window(m, d, max_window)
            if cert and (best is None or cert.t - cert.s < best.t - best.s):
                best = cert
    return best


def metric_summary(g, m=None):
    """Every diagonal orbit near the root tested for maximality."""
    m = m or build_matching(g)
    near = sorted({(x, y) for x, y, _ in m.diagonals
                   if max(g.root_distance(x), g.root_distance(y)) <= 2})
    reports = [is_maximal(m, d) for d in near]
    return reports


def tube_matching(spec, g, d, half_length, width=2.0):
    """G* of a tube of the tiling around the geodesic of d, with d's ids translated to the tube."""
    from .tilings import generate_tube

    a, b = g.coords[d[0]], g.coords[d[1]]
    tube = generate_tube(spec, a, b, half_length, width)

    def locate(z):
        k = min(range(len(tube)), key=lambda i: abs(complex(tube.coords[i]) - complex(z)))
        if abs(complex(tube.coords[k]) - complex(z)) > 1e-6:
            raise LookupError("diagonal endpoint missing from the tube")
        return k

    return build_matching(tube), (locate(a), locate(b))
