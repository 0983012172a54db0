import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchperc import planegraph as pg
from matchperc.hypgeo import EUCLIDEAN


def test_rejects_bad_input():
    with pytest.raises(pg.StructureError):
        pg.PlaneGraph([0j, 1 + 0j], [(0, 0)], mode=EUCLIDEAN)
    with pytest.raises(pg.StructureError):
        pg.PlaneGraph([0j, 1 + 0j], [(0, 2)], mode=EUCLIDEAN)
    with pytest.raises(pg.StructureError):
        pg.PlaneGraph([0j], [], mode="spherical")


def test_single_square_faces():
    g = pg.PlaneGraph([0j, 1 + 0j, 1 + 1j, 1j], [(0, 1), (1, 2), (2, 3), (3, 0)], mode=EUCLIDEAN)
    assert len(g.faces) == 2
    assert len(g.complete_faces) == 1
    m = pg.build_matching(g)
    assert sorted((x, y) for x, y, _ in m.diagonals) == [(0, 2), (1, 3)]
    h = pg.build_hat(g)
    assert h.n_sites == 1 and len(h.adj[4]) == 4
    assert h.position(4) == pytest.approx(0.5 + 0.5j)


@pytest.mark.parametrize("name,per_face", [("square", 2), ("hexagonal", 9), ("h45", 2)])
def test_matching_adds_all_face_diagonals(request, name, per_face):
    g = request.getfixturevalue(name)
    m = pg.build_matching(g)
    assert len(m.diagonals) == per_face * len(g.complete_faces)
    for x, y, fid in m.diagonals:
        assert not g.has_edge(x, y)
        assert {x, y} <= set(g.faces[fid].cycle)
        assert m.is_diagonal(x, y) and m.has_edge(y, x)
    assert pg.build_hat(g).n_sites == len(g.complete_faces)


@pytest.mark.parametrize("name", ["triangular", "h37"])
def test_triangulations_are_self_matching(request, name):
    g = request.getfixturevalue(name)
    assert g.is_triangulation
    assert pg.build_matching(g).diagonals == []
    h = pg.build_hat(g)
    assert h.n_sites == 0 and len(h) == len(g)


def test_hat_sites_join_their_face(square):
    m, h = pg.build_matching(square), pg.build_hat(square)
    for x, y, _ in m.diagonals[:50]:
        s = h.site_of_pair(m, x, y)
        assert h.is_site(s) and h.has_edge(s, x) and h.has_edge(s, y)
    for s in range(h.n_vertices, len(h)):
        assert all(not h.is_site(v) for v in h.adj[s])


@pytest.mark.parametrize("name,phi,zeta,A", [
    ("square", math.sqrt(2), 4, 6),
    ("triangular", 1.0, 3, 3),
    ("hexagonal", 2.0, 6, 9),
])
def test_euclidean_constants(request, name, phi, zeta, A):
    c = pg.constants(request.getfixturevalue(name))
    assert c.phi == pytest.approx(phi, abs=1e-12)
    assert (c.zeta, c.A) == (zeta, A)
    assert c.stable


def test_unstable_constants_warn(h45):
    with pytest.warns(RuntimeWarning):
        c = pg.constants(h45)
    assert not c.stable and c.notes


def test_ball_and_insufficient_graph(square):
    inside, boundary = pg.ball(square, square.root, 3)
    assert len(inside) == 25 and len(boundary) == 12
    with pytest.raises(pg.InsufficientGraphError):
        pg.ball(square, square.root, 9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_rotation_system_is_angular(seed):
    import random
    rnd = random.Random(seed)
    pts = [complex(rnd.uniform(-1, 1), rnd.uniform(-1, 1)) for _ in range(6)]
    centre = 0j
    g = pg.PlaneGraph([centre] + pts, [(0, i) for i in range(1, 7)], mode=EUCLIDEAN)
    rot = g.rotation[0]
    angles = [math.atan2((pts[v - 1]).imag, (pts[v - 1]).real) for v in rot]
    # consecutive neighbours turn counterclockwise; exactly one wrap-around
    drops = sum(1 for a, b in zip(angles, angles[1:] + angles[:1]) if b < a)
    assert drops == 1


def test_json_roundtrip_keeps_precision(h45):
    d = h45.to_json_dict()
    h = pg.PlaneGraph.from_json_dict(d)
    assert h.graph_hash() == h45.graph_hash()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert pg.constants(h).A == pg.constants(h45).A
