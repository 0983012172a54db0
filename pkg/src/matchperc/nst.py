"""Non-self-touching paths and cycles, oxbow removal, annulus cycles and the local path properties."""

from __future__ import annotations

import cmath
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .hypgeo import HYPERBOLIC
from .planegraph import HatGraph, InsufficientGraphError, MatchingGraph, PlaneGraph, StructureError


class PreconditionError(ValueError):
    pass


class NotFoundError(LookupError):
    pass


# -- host helpers ---------------------------------------------------------------------

def host_tag(host):
    if isinstance(host, HatGraph):
        return "hat"
    if isinstance(host, MatchingGraph):
        return "star"
    return "g"


def base_of(host):
    return host if isinstance(host, PlaneGraph) else host.base


def position(host, x):
    if isinstance(host, HatGraph):
        return complex(host.position(x))
    return complex(base_of(host).coords[x])


def step_kind(host, u, v):
    if isinstance(host, HatGraph) and (host.is_site(u) or host.is_site(v)):
        return "spoke"
    if base_of(host).has_edge(u, v):
        return "edge"
    return "diagonal"


@dataclass
class NstPath:
    host: str
    seq: list
    kinds: list
    cyclic: bool = False

    def __len__(self):
        return len(self.seq)

    def to_json_dict(self):
        return {"host": self.host, "seq": list(self.seq), "kinds": list(self.kinds),
                "cyclic": self.cyclic}


def make_path(host, seq, cyclic=False):
    seq = list(seq)
    pairs = list(zip(seq, seq[1:] + (seq[:1] if cyclic else [])))
    return NstPath(host_tag(host), seq, [step_kind(host, u, v) for u, v in pairs], cyclic)


# -- the predicate ----------------------------------------------------------------------

def is_path(host, seq, cyclic=False):
    if len(set(seq)) != len(seq):
        return False
    adj = host.adj
    for a, b in zip(seq, seq[1:]):
        if b not in adj[a]:
            return False
    if cyclic and len(seq) > 2 and seq[0] not in adj[seq[-1]]:
        return False
    return True


def is_nst(host, seq, cyclic=False):
    """True when consecutive elements are adjacent and no other pair is adjacent or equal."""
    seq = list(seq)
    if not is_path(host, seq, cyclic):
        return False
    n = len(seq)
    where = {x: i for i, x in enumerate(seq)}
    adj = host.adj
    for i, x in enumerate(seq):
        for y in adj[x]:
            j = where.get(y)
            if j is None:
                continue
            gap = abs(i - j)
            if cyclic:
                gap = min(gap, n - gap)
            if gap >= 2:
                return False
    return True


# -- winding numbers ----------------------------------------------------------------------

def _frame_at(z, mode):
    if mode == HYPERBOLIC:
        return lambda w: (w - z) / (1 - z.conjugate() * w)
    return lambda w: w - z


def winding_number(host, cycle, point):
    """Winding number of the embedded cycle (geodesic edges) about ``point``.

    Geodesics through ``point`` are straight lines in its frame, and a geodesic
    segment meets each of them at most once, so the principal arguments add up.
    """
    mode = base_of(host).mode
    F = _frame_at(complex(point), mode)
    ws = [F(position(host, x)) for x in cycle]
    total = 0.0
    for a, b in zip(ws, ws[1:] + ws[:1]):
        if abs(a) < 1e-13 or abs(b) < 1e-13:
            raise PreconditionError("point lies on the cycle")
        total += cmath.phase(b / a)
    return round(total / (2 * math.pi))


def surrounds(host, cycle, point):
    return winding_number(host, cycle, point) != 0


# -- oxbow removal ------------------------------------------------------------------------

def _first_chord(adj, seq, cyclic):
    """Least J, then earliest I <= J-2, with seq[I] ~ seq[J] (the cyclic closing pair excluded)."""
    n = len(seq)
    where = {x: i for i, x in enumerate(seq)}
    for j in range(2, n):
        best = None
        for y in adj[seq[j]]:
            i = where.get(y)
            if i is None or i > j - 2:
                continue
            if cyclic and i == 0 and j == n - 1:
                continue
            if best is None or i < best:
                best = i
        if best is not None:
            return best, j
    return None


def remove_oxbows_path(host, path):
    """Shortcut chords until the path is non-self-touching; endpoints are kept."""
    seq = list(path)
    if not is_path(host, seq):
        raise StructureError("input is not a path of the host")
    while True:
        ch = _first_chord(host.adj, seq, False)
        if ch is None:
            return seq
        i, j = ch
        seq = seq[:i + 1] + seq[j:]


def remove_oxbows_cycle(host, cycle, witness):
    """Cut oxbows off a cycle, keeping at each step a piece that still surrounds ``witness``."""
    seq = list(cycle)
    if not is_path(host, seq, cyclic=True) or len(seq) < 3:
        raise StructureError("input is not a cycle of the host")
    if not surrounds(host, seq, witness):
        raise PreconditionError("cycle does not surround the witness point")
    while True:
        ch = _first_chord(host.adj, seq, True)
        if ch is None:
            return seq
        i, j = ch
        outer = seq[:i + 1] + seq[j:]
        inner = seq[i:j + 1]
        if surrounds(host, outer, witness):
            seq = outer
        elif surrounds(host, inner, witness):
            seq = inner
        else:
            raise PreconditionError("neither oxbow surrounds the witness (cycle not plane?)")


# -- annulus cycles -----------------------------------------------------------------------

def _crosses_ray(a, b, theta):
    """Signed crossing of the segment a->b (in a frame centred on the ray's origin) with the ray."""
    pa = cmath.phase(a * cmath.exp(-1j * theta))
    d = cmath.phase(b / a)
    pb = pa + d
    # the ray sits at phase 0 (mod 2 pi)
    if pa < 0 <= pb:
        return 1
    if pb < 0 <= pa:
        return -1
    # wrap past +-pi means no crossing of phase 0
    return 0


def annulus_cycle(host, v, r, zeta):
    """A non-self-touching cycle of ``host`` in the annulus r-zeta < d_G(v, .) <= r surrounding v.

    Thin outer annuli are tried first. Within one, the cycle is a shortest closed
    walk with odd crossing parity against a ray from v, reduced to a simple
    cycle and then oxbow-cleaned.
    """
    g = base_of(host)
    if r <= zeta:
        raise PreconditionError("need r > zeta")
    if g.radius is not None and g.root_distance(v) + r > g.radius:
        raise InsufficientGraphError(f"ball of radius {g.radius} too small for r={r} about {v}")
    dist = g.bfs(v, limit=r)
    for width in range(1, zeta + 1):
        try:
            return _annulus_cycle(host, g, v, r, width, dist)
        except NotFoundError:
            if width == zeta:
                raise


def _annulus_cycle(host, g, v, r, zeta, dist):
    S = {u for u, d in dist.items() if r - zeta < d <= r}
    if isinstance(host, HatGraph):
        for s in range(host.n_vertices, len(host)):
            if host.adj[s] and all(u in S for u in host.adj[s]):
                S.add(s)
    F = _frame_at(position(host, v), g.mode)
    pos = {u: F(position(host, u)) for u in S}
    theta = 0.1234567
    # start near the ray on the outer layer
    outer = [u for u in S if not (isinstance(host, HatGraph) and host.is_site(u)) and dist[u] == r]
    if not outer:
        raise NotFoundError("empty annulus")
    start = min(outer, key=lambda u: (abs(cmath.phase(pos[u] * cmath.exp(-1j * theta))), u))
    prev = {(start, 0): None}
    dq = deque([(start, 0)])
    target = (start, 1)
    while dq and target not in prev:
        x, par = dq.popleft()
        for y in sorted(host.adj[x]):
            if y not in S:
                continue
            c = _crosses_ray(pos[x], pos[y], theta)
            st = (y, par ^ (c & 1))
            if st not in prev:
                prev[st] = (x, par)
                dq.append(st)
    if target not in prev:
        raise NotFoundError(f"annulus around {v} at r={r} has no surrounding cycle")
    walk = [start]
    st = prev[target]
    while st is not None:
        walk.append(st[0])
        st = prev[st]
    walk = walk[::-1][:-1]   # closed walk start..(back to start), last repeat dropped
    cyc = _odd_simple_cycle(walk, pos, theta)
    cyc = remove_oxbows_cycle(host, cyc, position(host, v))
    if not surrounds(host, cyc, position(host, v)) or not is_nst(host, cyc, cyclic=True):
        raise NotFoundError("annulus cycle failed verification")
    return cyc


def _parity(walk, pos, theta):
    return sum(_crosses_ray(pos[a], pos[b], theta) for a, b in zip(walk, walk[1:] + walk[:1])) & 1


def _odd_simple_cycle(walk, pos, theta):
    """Split a closed walk at repeated vertices until a simple piece with odd ray parity remains."""
    while True:
        seen = {}
        split = None
        for k, x in enumerate(walk):
            if x in seen:
                split = (seen[x], k)
                break
            seen[x] = k
        if split is None:
            return walk
        i, j = split
        inner = walk[i:j]
        outer = walk[:i] + walk[j:]
        walk = inner if _parity(inner, pos, theta) else outer


def hat_cycle(hat, m, star_cycle):
    """Replace every diagonal of a G* cycle by the two spokes through its facial site."""
    out = []
    n = len(star_cycle)
    for k in range(n):
        a, b = star_cycle[k], star_cycle[(k + 1) % n]
        out.append(a)
        if m.is_diagonal(a, b):
            out.append(hat.site_of_pair(m, a, b))
    return out


def closure_members(host, cycle, candidates):
    """Candidates on the cycle or strictly surrounded by it."""
    on = set(cycle)
    out = set()
    for x in candidates:
        if x in on:
            out.add(x)
            continue
        try:
            if surrounds(host, cycle, position(host, x)):
                out.add(x)
        except PreconditionError:
            out.add(x)
    return out


# -- local path properties ---------------------------------------------------------------

class Verdict(str, Enum):
    PRESENT = "present"
    ABSENT = "absent"
    INDETERMINATE = "indeterminate"


@dataclass
class PiWitness:
    kind: str               # "star" or "hat"
    center: int
    A: int
    path: list
    index: int              # position of the centre in the path
    sigma: list
    step: list = field(default_factory=list)   # the diagonal (v, w) or (v, site, w)

    def to_json_dict(self):
        return {"kind": self.kind, "center": self.center, "A": self.A, "path": list(self.path),
                "index": self.index, "sigma": list(self.sigma), "step": list(self.step)}

    @classmethod
    def from_json_dict(cls, d):
        return cls(d["kind"], d["center"], d["A"], d["path"], d["index"], d["sigma"], d["step"])


@dataclass
class PiResult:
    verdict: Verdict
    witness: PiWitness | None = None
    nodes: int = 0
    notes: list = field(default_factory=list)

    def to_json_dict(self):
        return {"verdict": self.verdict.value, "nodes": self.nodes, "notes": list(self.notes),
                "witness": self.witness.to_json_dict() if self.witness else None}


DEFAULT_BUDGET = 10 ** 7


class _Budget(Exception):
    pass


def _search_arms(adj, centre, allowed, goal, order_key, budget):
    """Extend ``centre`` at both ends to a non-self-touching path ending on ``goal`` at both ends.

    Each arm stops at its first goal vertex. Returns (path, nodes) or (None, nodes);
    raises _Budget when the node budget runs out.
    """
    nodes = [0]
    path_set = set(centre)
    # how many path vertices each vertex is adjacent to
    touch = {}

    def add(x):
        for y in adj[x]:
            touch[y] = touch.get(y, 0) + 1
        path_set.add(x)

    def remove(x):
        for y in adj[x]:
            touch[y] -= 1
        path_set.discard(x)

    for x in centre:
        for y in adj[x]:
            touch[y] = touch.get(y, 0) + 1

    def candidates(tip):
        out = []
        for y in adj[tip]:
            if y in path_set or y not in allowed:
                continue
            # y may only touch the tip
            if touch.get(y, 0) != 1:
                continue
            out.append(y)
        out.sort(key=order_key)
        return out

    def grow(arm, other_done, other_arm):
        nodes[0] += 1
        if nodes[0] > budget:
            raise _Budget
        tip = arm[-1]
        for y in candidates(tip):
            add(y)
            arm.append(y)
            if y in goal:
                if other_done:
                    return True
                if grow(other_arm, True, arm):
                    return True
            elif grow(arm, other_done, other_arm):
                return True
            arm.pop()
            remove(y)
        return False

    left = [centre[0]]
    right = [centre[-1]]
    if centre[0] in goal or centre[-1] in goal:
        return None, nodes[0]
    ok = grow(right, False, left)
    if not ok:
        return None, nodes[0]
    return left[::-1] + list(centre[1:-1]) + right, nodes[0]


def _pi_setup(m, v, A, zeta):
    g = m.base
    margin = 1
    if g.radius is not None and g.root_distance(v) + A + margin > g.radius:
        raise InsufficientGraphError(
            f"need generated radius >= {g.root_distance(v) + A + margin} for A={A} about {v}")
    return g


def check_pi_A(m, v, A, zeta, A_G=None, budget=DEFAULT_BUDGET):
    """Search for a non-self-touching path of G* inside sigma*_A(v) through a diagonal at v."""
    if not m.diagonals:
        return PiResult(Verdict.ABSENT, None, 0, ["no diagonals: G* = G"])
    g = _pi_setup(m, v, A, zeta)
    notes = []
    if A_G is not None and A <= A_G:
        warnings.warn(f"A={A} does not exceed A(G)={A_G}", RuntimeWarning)
        notes.append(f"A={A} <= A(G)={A_G}")
    sigma = annulus_cycle(m, v, A, zeta)
    dist = g.bfs(v, limit=A)
    allowed = closure_members(m, sigma, list(dist))
    goal = set(sigma)
    partners = sorted(w for w in m.adj[v] if m.is_diagonal(v, w) and w in allowed)
    total = 0
    key = _order_key(dist)
    try:
        for w in partners:
            path, k = _search_arms(m.adj, [v, w], allowed, goal, key, budget - total)
            total += k
            if path is not None:
                wit = PiWitness("star", v, A, path, path.index(v), sigma, [v, w])
                if not verify_pi_witness(m, wit):
                    raise AssertionError("search produced an invalid witness")
                return PiResult(Verdict.PRESENT, wit, total, notes)
    except _Budget:
        return PiResult(Verdict.INDETERMINATE, None, budget, notes + ["node budget exhausted"])
    return PiResult(Verdict.ABSENT, None, total, notes)


def check_pi_hat_A(h, m, v, A, zeta, A_G=None, budget=DEFAULT_BUDGET):
    """As check_pi_A but in G-hat, with a facial site immediately after v."""
    if h.n_sites == 0:
        return PiResult(Verdict.ABSENT, None, 0, ["no facial sites"])
    g = _pi_setup(m, v, A, zeta)
    notes = []
    if A_G is not None and A <= A_G:
        warnings.warn(f"A={A} does not exceed A(G)={A_G}", RuntimeWarning)
        notes.append(f"A={A} <= A(G)={A_G}")
    sigma = hat_cycle(h, m, annulus_cycle(m, v, A, zeta))
    dist = g.bfs(v, limit=A)
    cand = list(dist) + [s for s in range(h.n_vertices, len(h))
                         if all(u in dist for u in h.adj[s])]
    allowed = closure_members(h, sigma, cand)
    goal = set(sigma)
    key = _order_key(dist)
    total = 0
    steps = []
    for s in sorted(h.adj[v]):
        if not h.is_site(s) or s not in allowed:
            continue
        for w in sorted(h.adj[s]):
            if w != v and w not in h.adj[v] and w in allowed:
                steps.append([v, s, w])
    try:
        for step in steps:
            path, k = _search_arms(h.adj, step, allowed, goal, key, budget - total)
            total += k
            if path is not None:
                wit = PiWitness("hat", v, A, path, path.index(v), sigma, step)
                if not verify_pi_witness(h, wit, m):
                    raise AssertionError("search produced an invalid witness")
                return PiResult(Verdict.PRESENT, wit, total, notes)
    except _Budget:
        return PiResult(Verdict.INDETERMINATE, None, budget, notes + ["node budget exhausted"])
    return PiResult(Verdict.ABSENT, None, total, notes)


def _order_key(dist):
    return lambda x: (-dist.get(x, 0), x)


def hat_witness_from_star(h, m, wit):
    """Insert the facial site between the endpoints of every diagonal of a G* witness."""
    path = []
    seq = wit.path
    for k, x in enumerate(seq):
        path.append(x)
        if k + 1 < len(seq) and m.is_diagonal(x, seq[k + 1]):
            path.append(h.site_of_pair(m, x, seq[k + 1]))
    v, w = wit.step
    sigma = hat_cycle(h, m, wit.sigma)
    i = path.index(v)
    return PiWitness("hat", v, wit.A, path, i, sigma, [v, path[i + 1], w])


def verify_pi_witness(host, wit, m=None):
    """Re-check every clause of a witness from its stored data (pairwise, no search code)."""
    p = wit.path
    n = len(p)
    if n < 2 or len(set(p)) != n:
        return False
    for a, b in zip(p, p[1:]):
        if not host.has_edge(a, b):
            return False
    for i in range(n):
        for j in range(i + 2, n):
            if host.has_edge(p[i], p[j]):
                return False
    sig = wit.sigma
    for a, b in zip(sig, sig[1:] + sig[:1]):
        if not host.has_edge(a, b):
            return False
    if p[0] not in sig or p[-1] not in sig:
        return False
    on = set(sig)
    for x in p:
        if x not in on and winding_number(host, sig, position(host, x)) == 0:
            return False
    i = wit.index
    if p[i] != wit.center or i + 1 >= n:
        return False
    g = base_of(host)
    if wit.kind == "star":
        w = p[i + 1]
        return not g.has_edge(wit.center, w) and w in host.adj[wit.center] \
            and w in _face_mates(g, wit.center)
    if i + 2 >= n or not isinstance(host, HatGraph):
        return False
    s, w = p[i + 1], p[i + 2]
    if not host.is_site(s):
        return False
    face = g.faces[host.site_face[s - host.n_vertices]].cycle
    return wit.center in face and w in face and not g.has_edge(wit.center, w)


def _face_mates(g, v):
    out = set()
    for f in g.complete_faces:
        if v in f.cycle:
            out.update(f.cycle)
    out.discard(v)
    return out


def face_vertex_counts(m, seq):
    """Audit: for each complete face met by ``seq``, the number of its vertices on it."""
    g = m.base
    where = {x: i for i, x in enumerate(seq)}
    out = []
    for f in g.complete_faces:
        idx = sorted(where[x] for x in f.cycle if x in where)
        if idx:
            out.append((f.id, idx))
    return out
