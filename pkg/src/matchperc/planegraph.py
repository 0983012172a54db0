"""Embedded plane graphs, their matching graphs and facial-site graphs."""

from __future__ import annotations

import contextlib
import hashlib
import json
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import mpmath

from . import hypgeo
from .hypgeo import EUCLIDEAN, HYPERBOLIC


class StructureError(ValueError):
    """Inconsistent rotation system or malformed graph data."""


class InsufficientGraphError(ValueError):
    """The generated region is too small for the requested query."""


@dataclass(frozen=True)
class Face:
    id: int
    cycle: tuple
    complete: bool

    def __len__(self):
        return len(self.cycle)


def _canonical_cycle(cycle):
    i = min(range(len(cycle)), key=cycle.__getitem__)
    return tuple(cycle[i:] + cycle[:i])


def _signed_area(pts):
    # relative to the first point, so tiny faces far out keep their sign at mp precision
    o = pts[0]
    s = 0
    n = len(pts)
    for i in range(1, n - 1):
        a, b = pts[i] - o, pts[i + 1] - o
        s += a.real * b.imag - b.real * a.imag
    return s / 2


class PlaneGraph:
    """A finite plane graph with coordinates, orbit labels and a rotation system.

    ``tiles`` are the face cycles known to be genuine faces of the infinite
    tiling; traversed faces matching a tile are marked complete.  Without
    tiles every bounded face is complete.  ``radius`` is the combinatorial
    radius around ``root`` within which neighbourhoods are known to be
    complete (None when unknown).
    """

    def __init__(self, coords, edges, orbits=None, mode=HYPERBOLIC, root=0,
                 tiles=None, radius=None, scale=1.0, meta=None):
        if mode not in hypgeo.MODES:
            raise StructureError(f"unknown mode {mode!r}")
        self.mode = mode
        self.coords = list(coords)
        n = len(self.coords)
        self.orbits = list(orbits) if orbits is not None else [0] * n
        self.root = root
        self.radius = radius
        self.scale = scale
        self.meta = dict(meta or {})
        es = set()
        for u, v in edges:
            if u == v:
                raise StructureError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise StructureError(f"edge ({u}, {v}) out of range")
            es.add((min(u, v), max(u, v)))
        self.edges = sorted(es)
        self.adj = [set() for _ in range(n)]
        for u, v in self.edges:
            self.adj[u].add(v)
            self.adj[v].add(u)
        self._tiles = None if tiles is None else [tuple(t) for t in tiles]
        with self.precision():
            self.rotation = self._rotation_system()
            self.faces = self._trace_faces()
        self._dist_cache = {}

    # -- basic queries ------------------------------------------------------

    def __len__(self):
        return len(self.coords)

    @property
    def n_vertices(self):
        return len(self.coords)

    def neighbors(self, v):
        return self.adj[v]

    def has_edge(self, u, v):
        return v in self.adj[u]

    def degree(self, v):
        return len(self.adj[v])

    def distance(self, u, v):
        return hypgeo.distance(self.coords[u], self.coords[v], self.mode)

    @property
    def complete_faces(self):
        return [f for f in self.faces if f.complete]

    @property
    def is_triangulation(self):
        return all(len(f) == 3 for f in self.complete_faces)

    def faces_of_vertex(self):
        out = [[] for _ in range(len(self))]
        for f in self.faces:
            for v in set(f.cycle):
                out[v].append(f.id)
        return out

    # -- rotation system and faces ------------------------------------------

    def _rotation_system(self):
        rot = []
        for v in range(len(self)):
            a = self.coords[v]
            nb = sorted(self.adj[v], key=lambda w: float(
                hypgeo.direction_at(a, self.coords[w], self.mode)))
            rot.append(nb)
        return rot

    def _trace_faces(self):
        pos = [{w: i for i, w in enumerate(r)} for r in self.rotation]
        used = set()
        raw = []
        for u, v in self.edges:
            for start in ((u, v), (v, u)):
                if start in used:
                    continue
                cyc = []
                a, b = start
                while (a, b) not in used:
                    used.add((a, b))
                    cyc.append(a)
                    r = self.rotation[b]
                    if a not in pos[b]:
                        raise StructureError("rotation system inconsistent with edges")
                    a, b = b, r[(pos[b][a] - 1) % len(r)]
                if (a, b) != start:
                    raise StructureError("face traversal did not close")
                raw.append(cyc)
        tileset = None
        if self._tiles is not None:
            tileset = {frozenset(t) for t in self._tiles}
        faces = []
        for cyc in raw:
            simple = len(set(cyc)) == len(cyc)
            area = _signed_area([self.coords[v] for v in cyc])
            if tileset is not None:
                complete = simple and frozenset(cyc) in tileset and area > 0
            else:
                complete = simple and area > 0 and len(cyc) >= 3
            faces.append((_canonical_cycle(cyc) if complete else tuple(cyc), complete))
        faces.sort(key=lambda fc: (not fc[1], len(fc[0]), fc[0]))
        return [Face(i, c, ok) for i, (c, ok) in enumerate(faces)]

    # -- distances and balls --------------------------------------------------

    def precision(self):
        """Context running mpmath at the digits the coordinates were built with."""
        dps = self.meta.get("dps")
        return mpmath.workdps(dps) if dps else contextlib.nullcontext()

    def bfs(self, source, adj=None, limit=None):
        """Graph distances from ``source`` (dict vertex -> distance)."""
        adj = adj or self.adj
        dist = {source: 0}
        dq = deque([source])
        while dq:
            x = dq.popleft()
            d = dist[x]
            if limit is not None and d >= limit:
                continue
            for y in adj[x]:
                if y not in dist:
                    dist[y] = d + 1
                    dq.append(y)
        return dist

    def graph_distance(self, u, v):
        if u not in self._dist_cache:
            self._dist_cache[u] = self.bfs(u)
        return self._dist_cache[u].get(v, math.inf)

    def root_distance(self, v):
        return self.graph_distance(self.root, v)

    def to_json_dict(self):
        verts = []
        for i, z in enumerate(self.coords):
            d = {"id": i, "x": float(z.real), "y": float(z.imag), "orbit": self.orbits[i]}
            if isinstance(z, mpmath.mpc):
                d["hp"] = [mpmath.nstr(z.real, 40), mpmath.nstr(z.imag, 40)]
            verts.append(d)
        out = {
            "mode": self.mode,
            "scale": float(self.scale),
            "root": self.root,
            "radius": self.radius,
            "vertices": verts,
            "edges": [list(e) for e in self.edges],
            "faces": [{"cycle": list(f.cycle), "complete": f.complete} for f in self.faces],
        }
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_json_dict(cls, d):
        coords = []
        for v in sorted(d["vertices"], key=lambda v: v["id"]):
            if "hp" in v:
                coords.append(mpmath.mpc(mpmath.mpf(v["hp"][0]), mpmath.mpf(v["hp"][1])))
            else:
                coords.append(complex(v["x"], v["y"]))
        orbits = [v.get("orbit", 0) for v in sorted(d["vertices"], key=lambda v: v["id"])]
        tiles = [f["cycle"] for f in d.get("faces", []) if f["complete"]]
        return cls(coords, [tuple(e) for e in d["edges"]], orbits, d["mode"],
                   d.get("root", 0), tiles=tiles, radius=d.get("radius"),
                   scale=d.get("scale", 1.0), meta=d.get("meta"))

    def graph_hash(self):
        return graph_hash(self.to_json_dict())

    def summary(self):
        return {
            "mode": self.mode,
            "V": len(self),
            "E": len(self.edges),
            "F": len(self.complete_faces),
            "orbits": len(set(self.orbits)),
            "radius": self.radius,
        }


def graph_hash(obj):
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def faces(g):
    """Face cycles of ``g`` with completeness flags."""
    return g.faces


def ball(g, v, n):
    """Vertex set of the graph-distance ball of radius n about v, and its boundary."""
    if n < 0:
        raise ValueError("radius must be non-negative")
    if g.radius is not None and g.root_distance(v) + n > g.radius:
        raise InsufficientGraphError(
            f"ball of radius {n} about {v} exceeds generated radius {g.radius}")
    dist = g.bfs(v, limit=n)
    inside = {w for w, d in dist.items() if d <= n}
    boundary = {w for w, d in dist.items() if d == n}
    return inside, boundary


# -- matching graph -----------------------------------------------------------

class MatchingGraph:
    """G* : the base graph plus every diagonal of every complete face."""

    def __init__(self, base):
        self.base = base
        diags = []
        for f in base.complete_faces:
            for x, y in combinations(sorted(f.cycle), 2):
                if not base.has_edge(x, y):
                    diags.append((x, y, f.id))
        self.diagonals = diags
        self.adj = [set(s) for s in base.adj]
        self.diagonal_face = {}
        for x, y, fid in diags:
            self.adj[x].add(y)
            self.adj[y].add(x)
            self.diagonal_face.setdefault((x, y), fid)

    def __len__(self):
        return len(self.base)

    @property
    def mode(self):
        return self.base.mode

    @property
    def coords(self):
        return self.base.coords

    def neighbors(self, v):
        return self.adj[v]

    def has_edge(self, u, v):
        return v in self.adj[u]

    def is_diagonal(self, u, v):
        return (min(u, v), max(u, v)) in self.diagonal_face

    def face_of(self, u, v):
        return self.diagonal_face[(min(u, v), max(u, v))]

    def star_edges(self):
        """All pairs of E* (parallel diagonals collapsed)."""
        return sorted(set(self.base.edges) | set(self.diagonal_face))

    def to_json_dict(self):
        d = self.base.to_json_dict()
        d["diagonals"] = [[x, y, f] for x, y, f in self.diagonals]
        return d


def build_matching(g):
    return MatchingGraph(g)


class HatGraph:
    """G-hat: a facial site inside every complete face of size >= 4, joined to its boundary."""

    def __init__(self, base):
        self.base = base
        n = len(base)
        self.site_face = []
        self.site_coords = []
        for f in base.complete_faces:
            if len(f) >= 4:
                self.site_face.append(f.id)
                pts = [base.coords[v] for v in f.cycle]
                self.site_coords.append(sum(pts) / len(pts))
        self.face_site = {fid: n + i for i, fid in enumerate(self.site_face)}
        self.adj = [set(s) for s in base.adj] + [set() for _ in self.site_face]
        self.spokes = []
        for fid, s in self.face_site.items():
            for v in base.faces[fid].cycle:
                self.adj[s].add(v)
                self.adj[v].add(s)
                self.spokes.append((s, v))

    def __len__(self):
        return len(self.adj)

    @property
    def n_vertices(self):
        return len(self.base)

    @property
    def n_sites(self):
        return len(self.site_face)

    def is_site(self, x):
        return x >= len(self.base)

    def neighbors(self, v):
        return self.adj[v]

    def has_edge(self, u, v):
        return v in self.adj[u]

    def site_of_pair(self, matching, u, v):
        return self.face_site[matching.face_of(u, v)]

    def position(self, x):
        if self.is_site(x):
            return self.site_coords[x - len(self.base)]
        return self.base.coords[x]

    def to_json_dict(self):
        d = self.base.to_json_dict()
        d["facial_sites"] = [
            {"id": self.face_site[fid], "face": fid, "x": float(complex(z).real),
             "y": float(complex(z).imag)}
            for fid, z in zip(self.site_face, self.site_coords)]
        return d


def build_hat(g):
    return HatGraph(g)


# -- graph constants ------------------------------------------------------------

@dataclass
class GraphConstants:
    phi: float
    zeta: int
    A: float
    delta: int
    max_degree: int
    radius: int | None = None
    stable: bool = True
    notes: list = field(default_factory=list)

    def to_json_dict(self):
        return {"Phi": self.phi, "zeta": self.zeta, "A": self.A, "Delta": self.delta,
                "max_degree": self.max_degree, "radius": self.radius,
                "stable": self.stable, "notes": list(self.notes)}


def _interior_angles_convex(g, cycle):
    pts = [complex(g.coords[v]) for v in cycle]
    k = len(pts)
    for i in range(k):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % k]
        if g.mode == HYPERBOLIC:
            ang_in = hypgeo.direction_at(b, a, HYPERBOLIC)
            ang_out = hypgeo.direction_at(b, c, HYPERBOLIC)
        else:
            ang_in = math.atan2((a - b).imag, (a - b).real)
            ang_out = math.atan2((c - b).imag, (c - b).real)
        # ccw face: interior angle measured from outgoing to incoming direction
        theta = (ang_in - ang_out) % (2 * math.pi)
        if theta >= math.pi - 1e-12:
            return False
    return True


def _segment_inside(pts, i, j):
    """Is the chord between polygon vertices i and j inside the (simple, ccw) polygon?"""
    k = len(pts)
    a, b = pts[i], pts[j]

    def cross(o, p, q):
        return (p - o).real * (q - o).imag - (p - o).imag * (q - o).real

    for m in range(k):
        c, d = pts[m], pts[(m + 1) % k]
        if m in (i, j) or (m + 1) % k in (i, j):
            continue
        d1, d2 = cross(a, b, c), cross(a, b, d)
        d3, d4 = cross(c, d, a), cross(c, d, b)
        if d1 * d2 < 0 and d3 * d4 < 0:
            return False
    mid = (a + b) / 2
    wn = 0
    for m in range(k):
        c, d = pts[m], pts[(m + 1) % k]
        if c.imag <= mid.imag < d.imag and cross(c, d, mid) > 0:
            wn += 1
        elif d.imag <= mid.imag < c.imag and cross(c, d, mid) < 0:
            wn -= 1
    return wn != 0


def face_diameter(g, face):
    """sup over boundary pairs of the shortest length of a curve through the face."""
    cyc = face.cycle
    if _interior_angles_convex(g, cyc):
        return max(g.distance(x, y) for x, y in combinations(cyc, 2))
    # non-convex: shortest paths in the visibility graph of the polygon
    pts = [complex(g.coords[v]) for v in cyc]
    k = len(cyc)
    w = [[math.inf] * k for _ in range(k)]
    for i in range(k):
        w[i][i] = 0.0
        for j in range(i + 1, k):
            if j == i + 1 or (i == 0 and j == k - 1) or _segment_inside(pts, i, j):
                w[i][j] = w[j][i] = float(g.distance(cyc[i], cyc[j]))
    for m in range(k):
        for i in range(k):
            for j in range(k):
                if w[i][m] + w[m][j] < w[i][j]:
                    w[i][j] = w[i][m] + w[m][j]
    return max(max(row) for row in w)


def _orbit_representatives(g, candidates):
    reps = {}
    for v in sorted(candidates, key=lambda v: (g.root_distance(v), v)):
        reps.setdefault(g.orbits[v], v)
    return reps


def constants(g, m=None):
    """Phi, zeta, A(G), Delta and the maximum degree, estimated on the finite ball."""
    m = m or build_matching(g)
    notes = []
    faces_ = g.complete_faces
    if not faces_:
        raise InsufficientGraphError("graph has no complete faces")
    phi = max(float(face_diameter(g, f)) for f in faces_)

    R = g.radius if g.radius is not None else max(g.bfs(g.root).values())
    interior = [v for v in range(len(g)) if g.root_distance(v) <= max(R // 2, 1)]
    reps = _orbit_representatives(g, interior)

    def zeta_at(limit):
        z = 1
        for u in reps.values():
            du = g.bfs(u, limit=limit)
            for w, d in du.items():
                if d >= z and float(g.distance(u, w)) < 2 * phi - 1e-9:
                    z = d + 1
        return z

    reach = max(R - max(g.root_distance(u) for u in reps.values()), 2)
    z_hi = zeta_at(reach)
    z_lo = zeta_at(reach - 1)
    stable = z_hi == z_lo and z_hi < reach
    if not stable:
        notes.append(f"zeta not stabilised within reach {reach}")
        warnings.warn("zeta did not stabilise; enlarge the generated radius", RuntimeWarning)

    diag_span = max((g.graph_distance(x, y) for x, y, _ in m.diagonals), default=0)
    A = z_hi + diag_span

    orbit_ids = sorted(set(g.orbits[v] for v in range(len(g))))
    delta = 0
    for o1, u in reps.items():
        du = g.bfs(u)
        for o2 in orbit_ids:
            dmin = min((d for w, d in du.items() if g.orbits[w] == o2), default=math.inf)
            if dmin < math.inf:
                delta = max(delta, dmin)
    inner = [v for v in range(len(g)) if g.radius is None or g.root_distance(v) < g.radius]
    max_degree = max((g.degree(v) for v in inner), default=0)
    return GraphConstants(phi, z_hi, A, delta, max_degree, R, stable, notes)
