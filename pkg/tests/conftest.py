import pytest

from matchperc import planegraph as pg
from matchperc import tilings as tl

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def ball(p, q, radius):
    return tl.generate(tl.TilingSpec("regular", p, q, radius=radius))


@pytest.fixture(scope="session")
def square():
    return ball(4, 4, 8)


@pytest.fixture(scope="session")
def square_star(square):
    return pg.build_matching(square)


@pytest.fixture(scope="session")
def triangular():
    return ball(3, 6, 6)


@pytest.fixture(scope="session")
def hexagonal():
    return ball(6, 3, 9)


@pytest.fixture(scope="session")
def h37():
    return ball(3, 7, 3)


@pytest.fixture(scope="session")
def h45():
    return ball(4, 5, 3)


@pytest.fixture(scope="session")
def framed_square():
    return tl.generate(tl.TilingSpec("custom", radius=7, custom=tl.framed_square_tiling()))


def random_saw(adj, start, length, rng, allowed=None):
    """Self-avoiding walk grown greedily at random until stuck or ``length`` steps."""
    walk = [start]
    seen = {start}
    while len(walk) <= length:
        nxt = [y for y in sorted(adj[walk[-1]]) if y not in seen
               and (allowed is None or y in allowed)]
        if not nxt:
            break
        y = nxt[rng.integers(len(nxt))]
        walk.append(y)
        seen.add(y)
    return walk


def random_polygon(g, rng, n_faces, max_dist):
    """Boundary of a random simply connected union of complete faces, with a witness inside.

    Returns (cycle, witness) or None when the grown region has a pinched or
    disconnected boundary.
    """
    faces = [f for f in g.complete_faces if all(g.root_distance(v) <= max_dist for v in f.cycle)]
    by_edge = {}
    for f in faces:
        c = f.cycle
        for a, b in zip(c, c[1:] + c[:1]):
            by_edge.setdefault((min(a, b), max(a, b)), []).append(f.id)
    start = faces[rng.integers(len(faces))].id
    region = {start}
    for _ in range(n_faces - 1):
        frontier = sorted({h for e, fs in by_edge.items() if len(set(fs) & region) == 1
                           for h in fs if h not in region})
        if not frontier:
            break
        region.add(frontier[rng.integers(len(frontier))])
    bedges = [e for e, fs in by_edge.items() if len(set(fs) & region) == 1]
    nbr = {}
    for a, b in bedges:
        nbr.setdefault(a, []).append(b)
        nbr.setdefault(b, []).append(a)
    if any(len(v) != 2 for v in nbr.values()):
        return None
    cyc = [bedges[0][0], bedges[0][1]]
    while True:
        a, b = nbr[cyc[-1]]
        nxt = a if a != cyc[-2] else b
        if nxt == cyc[0]:
            break
        cyc.append(nxt)
    if len(cyc) != len(nbr):
        return None
    # witness: inside the region's face that carries the first boundary edge, near that edge
    x, y = cyc[0], cyc[1]
    fid = next(h for h in by_edge[(min(x, y), max(x, y))] if h in region)
    pts = [complex(g.coords[v]) for v in g.faces[fid].cycle]
    centre = sum(pts) / len(pts)
    witness = 0.5 * centre + 0.25 * complex(g.coords[x]) + 0.25 * complex(g.coords[y])
    return cyc, witness
