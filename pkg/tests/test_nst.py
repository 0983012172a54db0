import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchperc import nst
from matchperc import planegraph as pg
from matchperc.nst import Verdict

from conftest import random_polygon, random_saw


def is_subsequence(sub, seq, cyclic=False):
    if cyclic:
        k = seq.index(sub[0])
        seq = seq[k:] + seq[:k]
    it = iter(seq)
    return all(x in it for x in sub)


def test_is_nst_on_the_square_lattice(square, square_star):
    r = square.root
    right = [v for v in square.adj[r] if (square.coords[v] - square.coords[r]).real > 0.5][0]
    right2 = [v for v in square.adj[right]
              if (square.coords[v] - square.coords[right]).real > 0.5][0]
    up = [v for v in square.adj[right2] if (square.coords[v] - square.coords[right2]).imag > 0.5][0]
    straight = [r, right, right2]
    assert nst.is_nst(square, straight)
    assert nst.is_nst(square_star, straight)
    # a turn touches diagonally in G*
    assert nst.is_nst(square, straight + [up])
    assert not nst.is_nst(square_star, [right, right2, up])
    assert not nst.is_nst(square, [r, right, r])
    assert not nst.is_nst(square, [r, right2])


def test_face_boundary_cycle_is_nst_only_in_g(square, square_star):
    f = square.complete_faces[0].cycle
    assert nst.is_nst(square, f, cyclic=True)
    assert not nst.is_nst(square_star, f, cyclic=True)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["square", "square_star", "h37"]),
       st.integers(2, 60))
def test_oxbow_removal_on_paths(request, seed, name, length):
    host = request.getfixturevalue(name)
    g = nst.base_of(host)
    rng = np.random.default_rng(seed)
    walk = random_saw(g.adj, g.root, length, rng)
    out = nst.remove_oxbows_path(host, walk)
    assert nst.is_nst(host, out)
    assert out[0] == walk[0] and out[-1] == walk[-1]
    assert is_subsequence(out, walk)
    assert nst.remove_oxbows_path(host, out) == out


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([("square", 5), ("square_star", 5), ("h37", 2)]),
       st.integers(1, 25))
def test_oxbow_removal_on_cycles(request, seed, host_r, n_faces):
    name, reach = host_r
    host = request.getfixturevalue(name)
    g = nst.base_of(host)
    poly = random_polygon(g, np.random.default_rng(seed), n_faces, reach)
    if poly is None:
        return
    cyc, w = poly
    out = nst.remove_oxbows_cycle(host, cyc, w)
    assert nst.is_nst(host, out, cyclic=True)
    assert nst.surrounds(host, out, w)
    assert is_subsequence(out, cyc, cyclic=True)
    assert nst.remove_oxbows_cycle(host, out, w) == out


def test_oxbow_inputs_are_validated(square):
    with pytest.raises(pg.StructureError):
        nst.remove_oxbows_path(square, [square.root, square.root])
    f = list(square.complete_faces[0].cycle)
    far = complex(square.coords[f[0]]) + 50
    with pytest.raises(nst.PreconditionError):
        nst.remove_oxbows_cycle(square, f, far)


@pytest.mark.parametrize("name,r", [("square", 5), ("square_star", 6), ("hexagonal", 7),
                                    ("triangular", 4)])
def test_annulus_cycle(request, name, r):
    host = request.getfixturevalue(name)
    g = nst.base_of(host)
    zeta = pg.constants(g).zeta
    if r <= zeta:
        r = zeta + 1
    cyc = nst.annulus_cycle(host, g.root, r, zeta)
    assert nst.is_nst(host, cyc, cyclic=True)
    assert nst.surrounds(host, cyc, g.coords[g.root])
    assert all(r - zeta < g.root_distance(v) <= r for v in cyc)


def test_annulus_cycle_needs_room(square):
    with pytest.raises(pg.InsufficientGraphError):
        nst.annulus_cycle(square, square.root, 9, 4)
    with pytest.raises(nst.PreconditionError):
        nst.annulus_cycle(square, square.root, 3, 4)


def test_pi_present_on_square(square, square_star):
    res = nst.check_pi_A(square_star, square.root, 5, 4)
    assert res.verdict == Verdict.PRESENT
    wit = res.witness
    assert nst.verify_pi_witness(square_star, wit)
    assert nst.is_nst(square_star, wit.path)
    # tampering with the path or the cycle breaks the certificate
    bad = nst.PiWitness.from_json_dict(wit.to_json_dict())
    bad.path = bad.path[:-1]
    assert not nst.verify_pi_witness(square_star, bad)
    bad = nst.PiWitness.from_json_dict(wit.to_json_dict())
    bad.sigma = bad.sigma[1:]
    assert not nst.verify_pi_witness(square_star, bad)


def test_pi_hat_present_on_square(square, square_star):
    h = pg.build_hat(square)
    res = nst.check_pi_hat_A(h, square_star, square.root, 5, 4)
    assert res.verdict == Verdict.PRESENT
    assert nst.verify_pi_witness(h, res.witness, square_star)
    star = nst.check_pi_A(square_star, square.root, 5, 4).witness
    assert nst.verify_pi_witness(h, nst.hat_witness_from_star(h, square_star, star), square_star)


@pytest.mark.parametrize("name", ["triangular", "h37"])
def test_pi_absent_on_triangulations(request, name):
    g = request.getfixturevalue(name)
    m = pg.build_matching(g)
    for A in range(3, 7):
        assert nst.check_pi_A(m, g.root, A, 3).verdict == Verdict.ABSENT
        assert nst.check_pi_hat_A(pg.build_hat(g), m, g.root, A, 3).verdict == Verdict.ABSENT


def test_pi_budget_gives_indeterminate(square, square_star):
    res = nst.check_pi_A(square_star, square.root, 5, 4, budget=1)
    assert res.verdict == Verdict.INDETERMINATE


def test_pi_radius_guard(square_star, square):
    with pytest.raises(pg.InsufficientGraphError):
        nst.check_pi_A(square_star, square.root, 8, 4)


def test_pi_present_on_framed_square(framed_square):
    m = pg.build_matching(framed_square)
    res = nst.check_pi_A(m, framed_square.root, 5, 4)
    assert res.verdict == Verdict.PRESENT
    assert nst.verify_pi_witness(m, res.witness)


def vertex_at(g, z):
    return min(range(len(g)), key=lambda v: abs(complex(g.coords[v]) - z))


def test_square_turn_is_shortcut(square):
    o = complex(square.coords[square.root])
    path = [vertex_at(square, o + dz) for dz in (0, 1, 1 + 1j, 1j)]
    assert not nst.is_nst(square, path)
    assert nst.remove_oxbows_path(square, path) == [path[0], path[-1]]


def test_diagonal_staircase_against_brute_force(square, square_star):
    o = complex(square.coords[square.root])
    for steps in ([0, 1 + 1j, 2 + 2j], [0, 1 + 1j, 2 + 2j, 3 + 1j], [0, 1 + 1j, 1 + 2j],
                  [0, 1 - 1j, 2, 3 + 1j, 4]):
        path = [vertex_at(square, o + dz) for dz in steps]
        # oracle from coordinates: G* neighbours are exactly the points at chessboard distance 1
        def adj(a, b):
            d = complex(square.coords[a]) - complex(square.coords[b])
            return max(abs(round(d.real)), abs(round(d.imag))) == 1
        expect = all(adj(a, b) for a, b in zip(path, path[1:])) and all(
            not adj(path[i], path[j]) for i in range(len(path)) for j in range(i + 2, len(path)))
        assert nst.is_nst(square_star, path) == expect


def test_diamond_annulus_in_the_matching_graph(square_star, square):
    cyc = nst.annulus_cycle(square_star, square.root, 3, 1)
    assert len(cyc) == 12 and {square.root_distance(v) for v in cyc} == {3}
    assert nst.is_nst(square_star, cyc, cyclic=True)


def test_pi_present_on_45():
    from conftest import ball
    g = ball(4, 5, 6)
    m = pg.build_matching(g)
    res = nst.check_pi_A(m, g.root, 5, 4)
    assert res.verdict == Verdict.PRESENT and nst.verify_pi_witness(m, res.witness)
