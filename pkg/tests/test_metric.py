import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchperc import hypgeo as hg
from matchperc import metric as mt
from matchperc import nst
from matchperc import planegraph as pg
from matchperc import tilings as tl
from matchperc.hypgeo import EUCLIDEAN, HYPERBOLIC

from conftest import ball


def disk(r=0.9):
    return st.builds(lambda t, s: r * math.sqrt(s) * complex(math.cos(t), math.sin(t)),
                     st.floats(0, 2 * math.pi), st.floats(0, 1))


@settings(max_examples=300, deadline=None)
@given(disk(), disk(), disk(), disk())
def test_projection_contracts(a, b, x, y):
    if abs(a - b) < 1e-3:
        return
    g = hg.geodesic_through(a, b)
    px, py = hg.project(x, g), hg.project(y, g)
    assert hg.distance(px, py) <= hg.distance(x, y) + 1e-9


@settings(max_examples=200, deadline=None)
@given(disk(), disk())
def test_edge_span_of_itself_is_its_length(a, b):
    if abs(a - b) < 1e-3:
        return
    assert mt.edge_span((a, b), (a, b), HYPERBOLIC) == pytest.approx(hg.distance(a, b), abs=1e-8)
    assert mt.edge_span((a, b), (b, a), HYPERBOLIC) == pytest.approx(hg.distance(a, b), abs=1e-8)


def test_euclidean_edge_span():
    assert mt.edge_span((0j, 2 + 0j), (1 + 1j, 3 - 4j), EUCLIDEAN) == pytest.approx(2.0)


@pytest.mark.parametrize("name", ["square", "hexagonal"])
def test_euclidean_lattices_have_maximal_diagonals(request, name):
    g = request.getfixturevalue(name)
    m = pg.build_matching(g)
    d = mt.select_diagonal(m)
    assert m.is_diagonal(*d)
    rep = mt.is_maximal(m, d)
    assert rep.verdict == "maximal"
    assert rep.violator_span <= rep.rho + 1e-9


def test_maximality_needs_margin():
    g = ball(4, 4, 2)
    m = pg.build_matching(g)
    far = next((x, y) for x, y, _ in m.diagonals if max(g.root_distance(x), g.root_distance(y)) == 2)
    rep = mt.is_maximal(m, far)
    assert rep.verdict == "indeterminate" and "radius" in rep.hint


def test_triangulation_has_no_diagonal(triangular):
    assert mt.select_diagonal(pg.build_matching(triangular)) is None


def test_framed_square_fails_metric_but_passes_weak(framed_square):
    m = pg.build_matching(framed_square)
    reports = mt.metric_summary(framed_square, m)
    assert reports and all(r.verdict == "not-maximal" for r in reports)
    cert = mt.find_weak_certificate(m)
    assert cert is not None and cert.span > cert.bound
    assert mt.weak_criterion(m, cert.diagonal, cert.s, cert.t)
    assert nst.is_nst(m, cert.path)
    # the certificate's window cannot be widened past the start of the traces
    assert not mt.weak_criterion(m, cert.diagonal, 0, cert.t)


@pytest.mark.parametrize("spec,hl", [(tl.TilingSpec("regular", 4, 4), 12.0),
                                     (tl.TilingSpec("regular", 4, 5), 14.0)])
def test_traces_are_monotone_paths(spec, hl):
    g = tl.generate(tl.TilingSpec(spec.kind, spec.p, spec.q, radius=3))
    m0 = pg.build_matching(g)
    d = mt.select_diagonal(m0)
    m, dd = mt.tube_matching(spec, g, d, hl)
    plus, minus, asm = mt.two_sided(m, dd, window=hl - 4)
    assert mt.check_trace(m, plus, 1) and mt.check_trace(m, minus, -1)
    assert asm.nu(0) == dd[1] and asm.nu(-1) == dd[0]
    assert asm.nst and not asm.chords
    assert all(q > p for p, q in zip(asm.pvalues, asm.pvalues[1:]))
    assert asm.plus_steps >= 5 and asm.minus_steps >= 5


def moved(g, iso):
    tiles = [f.cycle[::-1] if iso.reverse else f.cycle for f in g.complete_faces]
    return pg.PlaneGraph([iso(z) for z in g.coords], g.edges, g.orbits, g.mode, g.root,
                         tiles=tiles, radius=g.radius, meta=g.meta)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(4, 5), (5, 4), (4, 4)]))
def test_maximality_is_isometry_invariant(seed, pq):
    g = ball(*pq, 4)
    iso = hg.Isometry.random(np.random.default_rng(seed), g.mode)
    h = moved(g, iso)
    assert len(h.complete_faces) == len(g.complete_faces)
    mg, mh = pg.build_matching(g), pg.build_matching(h)
    for d in sorted({(x, y) for x, y, _ in mg.diagonals if g.root_distance(x) <= 1})[:6]:
        a, b = mt.is_maximal(mg, d), mt.is_maximal(mh, d)
        assert a.verdict == b.verdict
        assert a.violator_span == pytest.approx(b.violator_span, abs=1e-7)


@pytest.mark.parametrize("name", ["h45", "square", "framed_square"])
def test_edge_span_never_exceeds_edge_length(request, name):
    g = request.getfixturevalue(name)
    rng = np.random.default_rng(3)
    edges = g.edges
    for _ in range(1000):
        e = edges[rng.integers(len(edges))]
        f = edges[rng.integers(len(edges))]
        ce = (g.coords[e[0]], g.coords[e[1]])
        cf = (g.coords[f[0]], g.coords[f[1]])
        assert mt.edge_span(ce, cf, g.mode) <= float(hg.distance(*cf, g.mode)) + 1e-9
