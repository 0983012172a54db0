"""Finite patches of Euclidean lattices, hyperbolic {p,q} tilings and custom periodic tilings."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import mpmath

from . import hypgeo
from .hypgeo import EUCLIDEAN, HYPERBOLIC, Isometry
from .planegraph import PlaneGraph


class TilingError(ValueError):
    pass


class ResolutionError(TilingError):
    """Requested patch would need coordinates closer to the ideal boundary than allowed."""

    def __init__(self, msg, max_radius):
        super().__init__(msg)
        self.max_radius = max_radius


SQ3 = math.sqrt(3.0)
SQ2 = math.sqrt(2.0)


@dataclass
class TilingSpec:
    kind: str = "regular"           # regular | archimedean | custom
    p: int = 4
    q: int = 4
    config: str | None = None       # e.g. "3.6.3.6"
    radius: int = 3
    custom: "CustomTiling | None" = None

    @property
    def mode(self):
        if self.kind == "regular":
            return regular_mode(self.p, self.q)
        if self.kind == "custom" and self.custom is not None:
            return self.custom.mode
        return EUCLIDEAN

    def to_json_dict(self):
        d = {"kind": self.kind, "radius": self.radius}
        if self.kind == "regular":
            d.update(p=self.p, q=self.q)
        elif self.kind == "archimedean":
            d["config"] = self.config
        else:
            d["custom"] = self.custom.to_json_dict()
        return d


def regular_mode(p, q):
    if p < 3 or q < 3:
        raise TilingError("{p,q} needs p, q >= 3")
    k = (p - 2) * (q - 2)
    if k < 4:
        raise TilingError(f"{{{p},{q}}} tiles the sphere")
    return EUCLIDEAN if k == 4 else HYPERBOLIC


# -- periodic Euclidean lattices -------------------------------------------------

@dataclass
class PeriodicCell:
    """Sites in a unit cell plus edges ``(i, j, (dx, dy))`` from site i in cell 0 to j in cell (dx, dy)."""

    a1: complex
    a2: complex
    sites: list
    edges: list
    orbits: list | None = None
    edge_length: float = 1.0

    def position(self, site, cell):
        return self.sites[site] + cell[0] * self.a1 + cell[1] * self.a2

    def __post_init__(self):
        if self.orbits is None:
            self.orbits = [0] * len(self.sites)
        nb = [[] for _ in self.sites]
        for i, j, (dx, dy) in self.edges:
            nb[i].append((j, (dx, dy)))
            nb[j].append((i, (-dx, -dy)))
        # ccw order by direction of the edge vector
        for i in range(len(nb)):
            nb[i].sort(key=lambda jo: math.atan2(
                *reversed(_xy(self.position(jo[0], jo[1]) - self.sites[i]))))
        self.nb = nb
        self.tile_classes = self._tile_classes()

    def neighbors(self, site, cell):
        cx, cy = cell
        return [(j, (cx + dx, cy + dy)) for j, (dx, dy) in self.nb[site]]

    def _tile_classes(self):
        def nxt(a, b):
            # arriving at b from a; turn to the clockwise-next neighbour of b
            (sa, ca), (sb, cb) = a, b
            rel = (ca[0] - cb[0], ca[1] - cb[1])
            lst = self.nb[sb]
            k = lst.index((sa, rel))
            j, off = lst[(k - 1) % len(lst)]
            return b, (j, (cb[0] + off[0], cb[1] + off[1]))

        seen = set()
        classes = []
        for i in range(len(self.sites)):
            for j, off in self.nb[i]:
                start = ((i, (0, 0)), (j, off))
                cyc = []
                a, b = start
                for _ in range(100):
                    cyc.append(a)
                    a, b = nxt(a, b)
                    if (a[0], b[0]) == (start[0][0], start[1][0]) and \
                            (b[1][0] - a[1][0], b[1][1] - a[1][1]) == \
                            (start[1][1][0] - start[0][1][0], start[1][1][1] - start[0][1][1]):
                        break
                else:
                    raise TilingError("face traversal of the cell did not close")
                # normalise: translate so the smallest (site, offset) element sits in cell 0
                canon = _canon_periodic(cyc)
                if canon not in seen:
                    seen.add(canon)
                    classes.append(canon)
        return classes


def _xy(z):
    return (z.real, z.imag)


def _canon_periodic(cyc):
    best = None
    for k in range(len(cyc)):
        s0, c0 = cyc[k]
        rot = cyc[k:] + cyc[:k]
        t = tuple((s, (c[0] - c0[0], c[1] - c0[1])) for s, c in rot)
        if best is None or t < best:
            best = t
    return best


def _lattice_cells():
    w = complex(0.5, SQ3 / 2)
    h = 1 / SQ2
    L = 1 + SQ2
    return {
        "4.4.4.4": PeriodicCell(1, 1j, [0j], [(0, 0, (1, 0)), (0, 0, (0, 1))]),
        "3.3.3.3.3.3": PeriodicCell(1, w, [0j], [(0, 0, (1, 0)), (0, 0, (0, 1)), (0, 0, (-1, 1))]),
        "6.6.6": PeriodicCell(complex(SQ3, 0), complex(SQ3 / 2, 1.5),
                              [0j, complex(SQ3 / 2, 0.5)],
                              [(0, 1, (0, 0)), (0, 1, (-1, 0)), (0, 1, (0, -1))]),
        "3.6.3.6": PeriodicCell(2, 2 * w, [0j, 1 + 0j, w],
                                [(0, 1, (0, 0)), (0, 2, (0, 0)), (1, 2, (0, 0)),
                                 (1, 0, (1, 0)), (2, 0, (0, 1)), (2, 1, (-1, 1))]),
        "4.8.8": PeriodicCell(complex(L, 0), complex(0, L),
                              [complex(h, 0), complex(0, h), complex(-h, 0), complex(0, -h)],
                              [(0, 1, (0, 0)), (1, 2, (0, 0)), (2, 3, (0, 0)), (3, 0, (0, 0)),
                               (0, 2, (1, 0)), (1, 3, (0, 1))]),
    }


LATTICES = _lattice_cells()
_REGULAR_EUCLIDEAN = {(4, 4): "4.4.4.4", (3, 6): "3.3.3.3.3.3", (6, 3): "6.6.6"}
ARCHIMEDEAN = sorted(LATTICES)


def _finish(coords_by_key, edges_by_key, tiles_by_key, orbit_by_key, root_key, mode,
            radius, scale, meta):
    """Index vertices deterministically (distance from root, then angle) and build the graph."""
    adj = {k: set() for k in coords_by_key}
    for a, b in edges_by_key:
        adj[a].add(b)
        adj[b].add(a)
    dist = {root_key: 0}
    dq = deque([root_key])
    while dq:
        x = dq.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                dq.append(y)
    keys = [k for k in coords_by_key if k in dist]
    r0 = coords_by_key[root_key]

    def order(k):
        z = coords_by_key[k]
        if k == root_key:
            return (0, 0.0, 0.0)
        ang = float(hypgeo.direction_at(r0, z, mode)) % (2 * math.pi)
        return (dist[k], round(ang, 9), round(float(abs(complex(z) - complex(r0))), 9))

    keys.sort(key=order)
    idx = {k: i for i, k in enumerate(keys)}
    coords = [coords_by_key[k] for k in keys]
    orbits = [orbit_by_key[k] for k in keys]
    edges = [(idx[a], idx[b]) for a, b in edges_by_key if a in idx and b in idx]
    tiles = [tuple(idx[k] for k in t) for t in tiles_by_key if all(k in idx for k in t)]
    return PlaneGraph(coords, edges, orbits, mode, 0, tiles=tiles, radius=radius,
                      scale=scale, meta=meta)


def _lattice_region(cell, root_site, accept, limit):
    """BFS over lattice vertices passing ``accept(key, dist)``."""
    root = (root_site, (0, 0))
    dist = {root: 0}
    dq = deque([root])
    while dq:
        x = dq.popleft()
        d = dist[x]
        if limit is not None and d >= limit:
            continue
        for y in cell.neighbors(*x):
            if y not in dist and accept(y, d + 1):
                dist[y] = d + 1
                dq.append(y)
    return dist


def _lattice_graph(cell, keys, radius, meta, root_site=0):
    keyset = set(keys)
    coords = {k: cell.position(*k) for k in keys}
    edges = set()
    for k in keys:
        for y in cell.neighbors(*k):
            if y in keyset:
                edges.add(tuple(sorted((k, y))))
    tiles = []
    for k in keys:
        s, (cx, cy) = k
        for cls in cell.tile_classes:
            if cls[0][0] != s:
                continue
            t = tuple((ss, (cx + ox, cy + oy)) for ss, (ox, oy) in cls)
            if all(v in keyset for v in t):
                tiles.append(t)
    orbit = {k: cell.orbits[k[0]] for k in keys}
    return _finish(coords, sorted(edges), tiles, orbit, (root_site, (0, 0)), EUCLIDEAN,
                   radius, 1.0 / cell.edge_length, meta)


def lattice_ball(name, n):
    cell = LATTICES[name]
    dist = _lattice_region(cell, 0, lambda k, d: True, n)
    return _lattice_graph(cell, list(dist), n, {"tiling": name, "radius": n})


def lattice_tube(name, a, b, half_length, width, root_site=0):
    """Lattice vertices near the line through a, b and within ``half_length`` along it.

    ``width`` is measured beyond one lattice period, so every tile the line
    crosses ends up complete however large the tiles are.
    """
    cell = LATTICES[name]
    width = width + abs(cell.a1)
    g = hypgeo.geodesic_through(a, b, EUCLIDEAN)
    mid = (a + b) / 2
    param = hypgeo.GeodesicParam(g, mid)
    F = param.frame()
    # grow from the root through a corridor wide enough to reach the tube
    keys = set()
    start = (root_site, (0, 0))
    seen = {start}
    dq = deque([start])
    while dq:
        x = dq.popleft()
        w = F(cell.position(*x))
        inside = abs(w.imag) <= width and abs(w.real) <= half_length
        if inside:
            keys.add(x)
        if abs(w.imag) > width + 2 * abs(cell.a1) + 2 or abs(w.real) > half_length + 2:
            continue
        for y in cell.neighbors(*x):
            if y not in seen:
                seen.add(y)
                dq.append(y)
    keys.add(start)
    return _lattice_graph(cell, sorted(keys), None,
                          {"tiling": name, "tube": [half_length, width]})


# -- hyperbolic {p,q} ---------------------------------------------------------------

def regular_geometry(p, q):
    """Circumradius and edge length of the regular p-gon of a {p,q} tiling."""
    R = math.acosh(1 / (math.tan(math.pi / p) * math.tan(math.pi / q)))
    L = 2 * math.acosh(math.cos(math.pi / p) / math.sin(math.pi / q))
    return R, L


class _PointIndex:
    """Coordinate snapping with neighbour-cell lookup."""

    def __init__(self, tol):
        self.tol = tol
        # buckets are never finer than float resolution allows
        self.cell = max(float(tol), 1e-9)
        self.cells = {}
        self.points = []

    def _key(self, z):
        if isinstance(z, mpmath.mpc):
            # hyperboloid coordinates keep one vertex per bucket however deep the point is
            d = 1 - (z.real * z.real + z.imag * z.imag)
            return (int(mpmath.floor(8 * z.real / d)), int(mpmath.floor(8 * z.imag / d)))
        return (math.floor(float(z.real) / self.cell), math.floor(float(z.imag) / self.cell))

    def find(self, z):
        kx, ky = self._key(z)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for i in self.cells.get((kx + dx, ky + dy), ()):
                    if abs(self.points[i] - z) < self.tol:
                        return i
        return None

    def add(self, z):
        i = self.find(z)
        if i is not None:
            return i, False
        i = len(self.points)
        self.points.append(z)
        self.cells.setdefault(self._key(z), []).append(i)
        return i, True


class _FaceExpansion:
    """Faces of a tiling grown by reflecting tiles across their edges."""

    def __init__(self, first_face, mode, tol, orbit_of=None):
        self.mode = mode
        self.index = _PointIndex(tol)
        self.faces = []
        self.face_keys = {}
        self.vertex_faces = []
        self.orbit_of = orbit_of
        self.add_face(first_face)

    def add_face(self, pts):
        ids = []
        for z in pts:
            i, new = self.index.add(z)
            if new:
                self.vertex_faces.append([])
            ids.append(i)
        key = frozenset(ids)
        if key in self.face_keys:
            return self.face_keys[key], False
        fid = len(self.faces)
        self.faces.append(tuple(ids))
        self.face_keys[key] = fid
        for i in ids:
            self.vertex_faces[i].append(fid)
        return fid, True

    def coords(self, fid):
        return [self.index.points[i] for i in self.faces[fid]]

    def neighbours(self, fid):
        pts = self.coords(fid)
        k = len(pts)
        out = []
        for e in range(k):
            a, b = pts[e], pts[(e + 1) % k]
            refl = Isometry.reflection_through(a, b, self.mode)
            img = [refl(z) for z in pts]
            out.append(img[::-1])
        return out


def _regular_first_face(p, q, dps):
    R, _ = regular_geometry(p, q)
    if dps:
        with mpmath.workdps(dps):
            R = mpmath.acosh(mpmath.cot(mpmath.pi / p) * mpmath.cot(mpmath.pi / q))
            r = mpmath.tanh(R / 2)
            pts = [r * mpmath.expjpi(mpmath.mpf(2 * k) / p) for k in range(p)]
            a = pts[0]
            pts = [(z - a) / (1 - a.conjugate() * z) for z in pts]
            pts[0] = mpmath.mpc(0)
            return pts
    r = math.tanh(R / 2)
    pts = [r * complex(math.cos(2 * math.pi * k / p), math.sin(2 * math.pi * k / p)) for k in range(p)]
    a = pts[0]
    pts = [(z - a) / (1 - a.conjugate() * z) for z in pts]
    pts[0] = 0j
    # put the root face's first edge along a fixed direction
    return pts


def _regular_hyperbolic(p, q, accept, dps=None, max_faces=200000):
    """Grow faces of {p,q} breadth first; ``accept(exp, fid)`` gates expansion from a face."""
    tol = 1e-7 if not dps else mpmath.mpf(10) ** (-(dps // 2))
    ctx = mpmath.workdps(dps) if dps else _nullctx()
    with ctx:
        exp = _FaceExpansion(_regular_first_face(p, q, dps), HYPERBOLIC, tol)
        frontier = [0]
        while frontier:
            nxt = []
            for fid in frontier:
                if not accept(exp, fid):
                    continue
                for pts in exp.neighbours(fid):
                    nid, new = exp.add_face(pts)
                    if new:
                        nxt.append(nid)
                        if len(exp.faces) > max_faces:
                            raise TilingError("face budget exhausted")
            frontier = nxt
    return exp


class _nullctx:
    def __enter__(self):
        return self

    def __exit__(self, *a):
        return False


def _graph_from_expansion(exp, q, radius, keep, scale, meta, orbit=None):
    pts = exp.index.points
    keepset = set(keep)
    coords = {i: pts[i] for i in keepset}
    edges = set()
    tiles = []
    for f in exp.faces:
        k = len(f)
        for e in range(k):
            a, b = f[e], f[(e + 1) % k]
            if a in keepset and b in keepset:
                edges.add((min(a, b), max(a, b)))
        if all(v in keepset for v in f):
            tiles.append(f)
    orbit_by = {i: (orbit[i] if orbit else 0) for i in keepset}
    return _finish(coords, sorted(edges), tiles, orbit_by, 0, HYPERBOLIC, radius, scale, meta)


def _expansion_distances(exp):
    adj = {}
    for f in exp.faces:
        k = len(f)
        for e in range(k):
            a, b = f[e], f[(e + 1) % k]
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
    dist = {0: 0}
    dq = deque([0])
    while dq:
        x = dq.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                dq.append(y)
    return dist


BOUNDARY_MARGIN = 1e-9


def regular_hyperbolic_ball(p, q, n, dps=None):
    _, L = regular_geometry(p, q)
    state = {"dist": {0: 0}}

    def accept(exp, fid):
        d = state["dist"]
        return any(d.get(v, math.inf) <= n for v in exp.faces[fid])

    # grow layer by layer until every vertex within distance n has its full fan
    tol = 1e-7 if not dps else mpmath.mpf(10) ** (-(dps // 2))
    ctx = mpmath.workdps(dps) if dps else _nullctx()
    with ctx:
        exp = _FaceExpansion(_regular_first_face(p, q, dps), HYPERBOLIC, tol)
        frontier = [0]
        while True:
            nxt = []
            for fid in frontier:
                if not accept(exp, fid):
                    continue
                for pts in exp.neighbours(fid):
                    if not dps and abs(complex(pts[0])) ** 2 > 1 - 1e-10:
                        raise ResolutionError("double precision exhausted", _feasible(exp))
                    nid, new = exp.add_face(pts)
                    if new:
                        nxt.append(nid)
            state["dist"] = _expansion_distances(exp)
            d = state["dist"]
            done = all(len(exp.vertex_faces[v]) == q for v, dv in d.items() if dv <= n)
            if done or not nxt:
                break
            frontier = nxt
        keep = [v for v, dv in state["dist"].items() if dv <= n]
        for v in keep:
            if not dps and 1 - abs(complex(exp.index.points[v])) < BOUNDARY_MARGIN:
                raise ResolutionError("coordinates too close to the boundary", _feasible(exp))
        return _graph_from_expansion(exp, q, n, keep, 1 / L,
                                     {"tiling": f"{{{p},{q}}}", "radius": n,
                                      "edge_length": L, "dps": dps})


def _feasible(exp):
    d = _expansion_distances(exp)
    bad = [dv for v, dv in d.items() if 1 - abs(complex(exp.index.points[v])) < 1e-6]
    return max(min(bad) - 2, 0) if bad else max(d.values())


def regular_hyperbolic_tube(p, q, a, b, half_length, width, dps=None):
    """Faces of {p,q} meeting the tube of the given width around the geodesic through a, b.

    Coordinates are mpmath numbers with ``dps`` digits, so the tube may run far
    towards the ideal boundary. By default the precision grows with the reach of
    the tube: a point at distance r from the origin sits about e^-r from the
    boundary, and merging uses half of the digits.
    """
    R, L = regular_geometry(p, q)
    if dps is None:
        far = max(abs(complex(a)), abs(complex(b)))
        reach = 2 * math.atanh(far) + half_length + 2 * width + R
        dps = 40 + int(math.ceil(reach))
    with mpmath.workdps(dps):
        a, b = mpmath.mpc(a), mpmath.mpc(b)
        g = hypgeo.geodesic_through(a, b, HYPERBOLIC)
        mid_param = hypgeo.GeodesicParam(g, a)
        m = mid_param.point_at(hypgeo.distance(a, b) / 2)
        param = hypgeo.GeodesicParam(g, m)
        F = param.frame()
        def near(z):
            w = F(z)
            s = param.value(z, F)
            foot = hypgeo._foot_on_axis(w, HYPERBOLIC)
            h = hypgeo.distance(w, foot + 0 * w)
            return h <= width and abs(s) <= half_length + width

        def accept(exp, fid):
            return any(near(z) for z in exp.coords(fid))

        exp = _regular_hyperbolic(p, q, accept, dps=dps)
        keep = set()
        for fid, f in enumerate(exp.faces):
            if accept(exp, fid):
                keep.update(f)
        keep.add(0)
        return _graph_from_expansion(exp, q, None, sorted(keep), 1 / L,
                                     {"tiling": f"{{{p},{q}}}", "tube": [half_length, width],
                                      "edge_length": L, "dps": dps})


# -- custom tilings ---------------------------------------------------------------------

@dataclass
class CustomTiling:
    """A fundamental patch and a set of isometries whose images tile the plane."""

    mode: str
    vertices: list                 # complex coordinates
    edges: list                    # pairs of patch indices
    faces: list                    # face cycles in patch indices (ccw)
    orbits: list
    generators: list = field(default_factory=list)   # Isometry values
    name: str = "custom"

    def to_json_dict(self):
        def iso(g):
            return {"a": _cx(g.a), "b": _cx(g.b), "c": _cx(g.c), "d": _cx(g.d),
                    "reverse": g.reverse}
        return {
            "name": self.name, "mode": self.mode,
            "vertices": [[z.real, z.imag] for z in self.vertices],
            "edges": [list(e) for e in self.edges],
            "faces": [list(f) for f in self.faces],
            "orbits": list(self.orbits),
            "generators": [iso(g) for g in self.generators],
        }

    @classmethod
    def from_json_dict(cls, d):
        def iso(g):
            return Isometry(complex(*g["a"]), complex(*g["b"]), complex(*g["c"]),
                            complex(*g["d"]), g.get("reverse", False))
        if "translations" in d and "generators" not in d:
            gens = [Isometry.translation(complex(*t), EUCLIDEAN) for t in d["translations"]]
        else:
            gens = [iso(g) for g in d.get("generators", [])]
        return cls(d.get("mode", EUCLIDEAN), [complex(x, y) for x, y in d["vertices"]],
                   [tuple(e) for e in d["edges"]], [tuple(f) for f in d["faces"]],
                   d.get("orbits", [0] * len(d["vertices"])), gens, d.get("name", "custom"))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def _cx(z):
    return [float(z.real), float(z.imag)]


def framed_square_tiling(inner=1 / 3):
    """Unit square with a concentric inner square joined corner to corner, tiled by translations.

    Faces are the inner square and four trapezoids; vertices fall into two
    orbits (outer corners, inner corners).
    """
    c = inner
    verts = [0j, 1 + 0j, 1 + 1j, 1j, complex(c, c), complex(1 - c, c),
             complex(1 - c, 1 - c), complex(c, 1 - c)]
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
             (0, 4), (1, 5), (2, 6), (3, 7)]
    faces = [(4, 5, 6, 7), (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)]
    gens = [Isometry.translation(1 + 0j, EUCLIDEAN), Isometry.translation(1j, EUCLIDEAN)]
    return CustomTiling(EUCLIDEAN, verts, edges, faces, [0, 0, 0, 0, 1, 1, 1, 1], gens, "framed-square")


def square_patch_tiling():
    gens = [Isometry.translation(1 + 0j, EUCLIDEAN), Isometry.translation(1j, EUCLIDEAN)]
    return CustomTiling(EUCLIDEAN, [0j, 1 + 0j, 1 + 1j, 1j], [(0, 1), (1, 2), (2, 3), (3, 0)],
                        [(0, 1, 2, 3)], [0, 0, 0, 0], gens, "square")


def _custom_copies(t, depth):
    """Group elements given by words of length <= depth in the generators and their inverses."""
    gens = list(t.generators) + [g.inverse() for g in t.generators]
    elems = [Isometry.identity()]
    index = _PointIndex(1e-7)
    index.add(_iso_signature(elems[0], t))
    frontier = list(elems)
    for _ in range(depth):
        nxt = []
        for e in frontier:
            for g in gens:
                h = e @ g
                _, new = index.add(_iso_signature(h, t))
                if new:
                    elems.append(h)
                    nxt.append(h)
        frontier = nxt
    return elems


def _iso_signature(iso, t):
    # image of the first patch vertex plus a second point distinguishes copies
    z0 = iso(t.vertices[0])
    z1 = iso(t.vertices[1])
    return z0 + 1e3 * z1 if t.mode == EUCLIDEAN else z0 + 7 * z1


def generate_custom(t, n):
    """Ball of combinatorial radius n about patch vertex 0 in the tiling generated by ``t``."""
    if n == 0:
        return PlaneGraph(list(t.vertices), t.edges, t.orbits, t.mode, 0, tiles=t.faces,
                          radius=0, meta={"tiling": t.name, "radius": 0})
    prev = None
    depth = 1
    while True:
        g = _custom_assemble(t, _custom_copies(t, depth), n)
        sig = (len(g), len(g.edges), len(g.complete_faces))
        if sig == prev:
            return g
        prev = sig
        depth += 1
        if depth > 4 * n + 8:
            raise TilingError("custom tiling did not stabilise")


def _custom_assemble(t, elems, n):
    index = _PointIndex(1e-7)
    orbit = {}
    edges = set()
    tiles = []
    for e in elems:
        ids = []
        for z, o in zip(t.vertices, t.orbits):
            i, _ = index.add(e(z))
            orbit[i] = o
            ids.append(i)
        for a, b in t.edges:
            edges.add((min(ids[a], ids[b]), max(ids[a], ids[b])))
        for f in t.faces:
            cyc = tuple(ids[i] for i in f)
            tiles.append(cyc[::-1] if e.reverse else cyc)
    adj = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    dist = {0: 0}
    dq = deque([0])
    while dq:
        x = dq.popleft()
        if dist[x] >= n:
            continue
        for y in adj.get(x, ()):
            if y not in dist:
                dist[y] = dist[x] + 1
                dq.append(y)
    keep = set(dist)
    coords = {i: index.points[i] for i in keep}
    es = sorted((a, b) for a, b in edges if a in keep and b in keep)
    seen = set()
    ts = []
    for f in tiles:
        k = frozenset(f)
        if k not in seen and k <= keep:
            seen.add(k)
            ts.append(f)
    return _finish(coords, es, ts, {i: orbit[i] for i in keep}, 0, t.mode, n, 1.0,
                   {"tiling": t.name, "radius": n})


def custom_tube(t, a, b, half_length, width, depth=None):
    """Custom-tiling vertices near the line through a, b (Euclidean only)."""
    if t.mode != EUCLIDEAN:
        raise TilingError("custom tubes are only supported for Euclidean tilings")
    depth = depth or int(half_length + width) + 4
    elems = _custom_copies(t, depth)
    index = _PointIndex(1e-7)
    orbit = {}
    edges = set()
    tiles = []
    for e in elems:
        ids = []
        for z, o in zip(t.vertices, t.orbits):
            i, _ = index.add(e(z))
            orbit[i] = o
            ids.append(i)
        for x, y in t.edges:
            edges.add((min(ids[x], ids[y]), max(ids[x], ids[y])))
        for f in t.faces:
            tiles.append(tuple(ids[i] for i in f))
    g = hypgeo.geodesic_through(a, b, EUCLIDEAN)
    F = hypgeo.GeodesicParam(g, (a + b) / 2).frame()
    keep = set()
    for f in tiles:
        if any(abs(F(index.points[i]).imag) <= width and abs(F(index.points[i]).real) <= half_length
               for i in f):
            keep.update(f)
    keep.add(0)
    coords = {i: index.points[i] for i in keep}
    es = sorted((x, y) for x, y in edges if x in keep and y in keep)
    ts = list({frozenset(f): f for f in tiles if set(f) <= keep}.values())
    return _finish(coords, es, ts, {i: orbit[i] for i in keep}, 0, EUCLIDEAN, None, 1.0,
                   {"tiling": t.name, "tube": [half_length, width]})


# -- public entry points ------------------------------------------------------------------

def generate(spec):
    """Ball of radius spec.radius about the root vertex, as a PlaneGraph."""
    g = _generate(spec)
    g.meta["spec"] = spec.to_json_dict()
    return g


def _generate(spec):
    if spec.radius < 0:
        raise TilingError("radius must be non-negative")
    if spec.kind == "custom":
        if spec.custom is None:
            raise TilingError("custom spec without a tiling")
        return generate_custom(spec.custom, spec.radius)
    if spec.kind == "archimedean":
        if spec.config not in LATTICES:
            raise TilingError(f"unknown vertex configuration {spec.config!r}; "
                              f"known: {', '.join(ARCHIMEDEAN)}")
        return lattice_ball(spec.config, spec.radius)
    mode = regular_mode(spec.p, spec.q)
    if mode == EUCLIDEAN:
        return lattice_ball(_REGULAR_EUCLIDEAN[(spec.p, spec.q)], spec.radius)
    return regular_hyperbolic_ball(spec.p, spec.q, spec.radius)


def generate_tube(spec, a, b, half_length, width=2.0):
    """Faces of the tiling near the geodesic through a and b (coordinates of the root-ball embedding)."""
    if spec.kind == "custom":
        return custom_tube(spec.custom, a, b, half_length, width)
    if spec.kind == "archimedean":
        return lattice_tube(spec.config, a, b, half_length, width)
    mode = regular_mode(spec.p, spec.q)
    if mode == EUCLIDEAN:
        return lattice_tube(_REGULAR_EUCLIDEAN[(spec.p, spec.q)], a, b, half_length, width)
    return regular_hyperbolic_tube(spec.p, spec.q, a, b, half_length, width)


def spec_from_json_dict(d):
    custom = None
    if d.get("kind") == "custom":
        custom = CustomTiling.from_json_dict(d["custom"])
    return TilingSpec(d.get("kind", "regular"), d.get("p", 4), d.get("q", 4),
                      d.get("config"), d.get("radius", 3), custom)
