import math
import warnings
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchperc import percolation as pc
from matchperc import tilings as tl

HOSTS = ("g", "star", "hat")


@pytest.fixture(scope="module")
def z2(square):
    return {h: pc.make_instance(square, h, 6) for h in HOSTS}


@pytest.fixture(scope="module")
def hex_inst(hexagonal):
    return {h: pc.make_instance(hexagonal, h, 7) for h in HOSTS}


@pytest.fixture(scope="module")
def tri_inst(triangular):
    return {h: pc.make_instance(triangular, h, 5) for h in HOSTS}


def bfs_event(inst, state, src, dst):
    seen = set()
    dq = deque(int(x) for x in np.flatnonzero(src & state))
    seen.update(dq)
    while dq:
        x = dq.popleft()
        if dst[x]:
            return True
        for y in inst.neighbors(x):
            y = int(y)
            if state[y] and y not in seen:
                seen.add(y)
                dq.append(y)
    return False


def test_instances_share_vertex_numbering(z2, square):
    g, star, hat = z2["g"], z2["star"], z2["hat"]
    assert g.n_vertices == star.n_vertices == hat.n_vertices
    assert np.array_equal(g.base_ids, hat.base_ids)
    assert hat.n_sites > 0 and star.n_sites == g.n_sites == 0
    assert g.base_ids[0] == square.root and not g.boundary[0]
    # every quadrant arc is non-empty and the arcs cover the boundary
    assert all(((g.arcs >> k) & 1).any() for k in range(4))
    assert np.array_equal(g.arcs > 0, g.boundary)


def test_bad_arguments(square, z2):
    with pytest.raises(ValueError):
        pc.make_instance(square, "dual", 4)
    with pytest.raises(ValueError):
        pc.sample_theta(z2["g"], 1.5)
    with pytest.raises(ValueError):
        pc.crossing_thresholds(z2["hat"], 10)


@pytest.mark.parametrize("host", HOSTS)
def test_trivial_probabilities(z2, host):
    inst = z2[host]
    assert pc.sample_theta(inst, 0.0, 0.0, 50).theta == 0.0
    assert pc.sample_theta(inst, 1.0, 1.0, 50).theta == 1.0


@pytest.mark.parametrize("fixture", ["z2", "hex_inst", "tri_inst"])
@pytest.mark.parametrize("event", ["theta", "crossing", "crossing-dual"])
def test_union_find_matches_bfs(request, fixture, event):
    for host, inst in request.getfixturevalue(fixture).items():
        src, dst = pc._masks(inst, event)
        for seed in range(200):
            state = pc.configuration(inst, 0.5 + 0.1 * math.sin(seed), 0.5, seed)
            assert pc.event_holds(inst, state, event) == bfs_event(inst, state, src, dst)


def test_runs_are_reproducible(z2):
    a = pc.sweep(z2["hat"], [0.5, 0.6], [0.0, 0.5], trials=300, seed=7)
    b = pc.sweep(z2["hat"], [0.5, 0.6], [0.0, 0.5], trials=300, seed=7)
    assert a.rows() == b.rows()
    c = pc.sweep(z2["hat"], [0.5, 0.6], [0.0, 0.5], trials=300, seed=8)
    assert a.rows() != c.rows()


def test_thread_count_does_not_change_results(z2):
    before = pc.set_threads()
    try:
        pc.set_threads(1)
        one = pc.events(z2["star"], 0.45, 0.0, 400, seed=3)
        pc.set_threads(before)
        many = pc.events(z2["star"], 0.45, 0.0, 400, seed=3)
    finally:
        pc.set_threads(before)
    assert np.array_equal(one, many)


def test_sweep_is_monotone_per_trial(z2):
    ps = np.linspace(0.3, 0.9, 7)
    for s in (0.0, 0.5, 1.0):
        rows = [pc.events(z2["hat"], p, s, 300, seed=11) for p in ps]
        assert all(np.all(a <= b) for a, b in zip(rows, rows[1:]))


@pytest.mark.parametrize("fixture", ["z2", "hex_inst"])
def test_hat_interpolates_exactly(request, fixture):
    inst = request.getfixturevalue(fixture)
    for p in (0.4, 0.55, 0.7):
        g = pc.events(inst["g"], p, 0.0, 500, seed=5)
        star = pc.events(inst["star"], p, 0.0, 500, seed=5)
        h0 = pc.events(inst["hat"], p, 0.0, 500, seed=5)
        hs = pc.events(inst["hat"], p, 0.5, 500, seed=5)
        hp = pc.events(inst["hat"], p, p, 500, seed=5)
        h1 = pc.events(inst["hat"], p, 1.0, 500, seed=5)
        assert np.array_equal(g, h0) and np.array_equal(star, h1)
        assert np.all(h0 <= hs) and np.all(hs <= h1)
        assert np.all(g <= hp) and np.all(hp <= star)


@pytest.mark.parametrize("fixture", ["z2", "hex_inst", "tri_inst"])
def test_crossing_duality(request, fixture):
    # exactly one of: open G crossing, closed G* crossing between the other two arcs
    inst = request.getfixturevalue(fixture)
    g, star = inst["g"], inst["star"]
    for seed in range(300):
        state = pc.configuration(g, 0.5, 0.0, seed)
        assert pc.event_holds(g, state, "crossing") != \
            pc.event_holds(star, ~state, "crossing-dual")


def test_triangulation_is_self_matching_for_crossings(tri_inst):
    g, star = tri_inst["g"], tri_inst["star"]
    assert np.array_equal(g.indices, star.indices)


def test_newman_ziff_matches_direct_sampling(z2):
    curve = pc.crossing_thresholds(z2["g"], 2000, seed=2)
    for p in (0.5, 0.6, 0.7):
        direct = pc.events(z2["g"], p, 0.0, 2000, seed=9, event="crossing").mean()
        assert curve.R(p) == pytest.approx(direct, abs=4 * math.sqrt(0.25 / 2000) * 1.5)
    p_star, err = curve.p_star()
    assert 0.5 < p_star < 0.7 and 0 < err < 0.02


def test_extrapolation_recovers_synthetic_limit():
    sizes = [16, 32, 64, 128]
    vals = [0.6 - 0.3 / n for n in sizes]
    pc_hat, err, chi2 = pc.extrapolate(sizes, vals, [1e-4] * 4)
    assert pc_hat == pytest.approx(0.6, abs=1e-9)
    assert chi2 == pytest.approx(0.0, abs=1e-9)


def test_estimate_pc_small():
    spec = tl.TilingSpec("regular", 4, 4)
    est = pc.estimate_pc(spec, "g", sizes=(8, 12), trials=2000, seed=1)
    assert 0.5 < est.pc < 0.7
    assert est.max_degree == 4 and est.degree_bound_ok
    alt = pc.estimate_pc(spec, "g", sizes=(8, 12), trials=500, seed=1, method="crossing-half")
    assert abs(alt.pc - est.pc) < 0.1


def test_pivotal_sets_in_extreme_states(z2):
    inst = z2["hat"]
    N = inst.n_nodes
    Pi, Di = pc.pivotal_sets(inst, np.ones(N, dtype=bool))
    # everything open: only the root matters (it is the source)
    assert Pi == {0} and Di == set()
    Pi, Di = pc.pivotal_sets(inst, np.zeros(N, dtype=bool))
    assert Pi == set() and Di == set()


def test_single_open_path_is_all_pivotal(z2):
    inst = z2["g"]
    # shortest root-to-boundary path by BFS
    prev = {0: None}
    dq = deque([0])
    end = None
    while dq:
        x = dq.popleft()
        if inst.boundary[x]:
            end = x
            break
        for y in inst.neighbors(x):
            y = int(y)
            if y not in prev:
                prev[y] = x
                dq.append(y)
    path = []
    while end is not None:
        path.append(end)
        end = prev[end]
    state = np.zeros(inst.n_nodes, dtype=bool)
    state[path] = True
    Pi, _ = pc.pivotal_sets(inst, state)
    assert Pi == set(path)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.35, 0.8), st.floats(0, 1))
def test_pivotal_sets_match_flips(z2, seed, p, s):
    inst = z2["hat"]
    state = pc.configuration(inst, p, s, seed)
    Pi, Di = pc.pivotal_sets(inst, state)
    base = pc.event_holds(inst, state)
    for x in range(inst.n_nodes):
        flipped = state.copy()
        flipped[x] = not flipped[x]
        toggles = pc.event_holds(inst, flipped) != base
        assert toggles == (x in Pi or x in Di)


def test_pivotal_stats_audit(z2):
    st_ = pc.pivotal_stats(z2["hat"], 0.55, 0.3, trials=500, seed=4, M=2)
    assert st_.verified > 0 and st_.mismatches == 0
    assert 0 < st_.theta < 1 and st_.mean_pi > 0


def test_enhancement_on_triangulation_is_undefined(tri_inst):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = pc.enhancement_ratio(tri_inst["hat"], 0.5, 0.5, M=1, trials=200)
    assert r.ratio_flag == "undefined" and math.isnan(r.ratio)


def test_enhancement_warns_on_small_regions(z2):
    with pytest.warns(RuntimeWarning):
        r = pc.enhancement_ratio(z2["hat"], 0.55, 0.3, M=2, trials=200)
    assert not r.precondition_met


def test_russo_formula(z2):
    r = pc.russo_derivatives(z2["hat"], 0.6, 0.4, trials=4000, seed=3)
    assert abs(r.dtheta_dp - r.fd_dp) < 4 * math.hypot(r.dtheta_dp_err, r.fd_dp_err) + 0.05
    assert abs(r.dtheta_ds - r.fd_ds) < 4 * math.hypot(r.dtheta_ds_err, r.fd_ds_err) + 0.05
