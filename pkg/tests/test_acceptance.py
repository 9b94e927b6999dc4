"""Acceptance criteria, one test per criterion.

Every test prints a single ``PASS``/``FAIL`` line with its runtime, also
under pytest's output capture.  Run directly with
``python3 tests/test_acceptance.py`` or through pytest.
"""

import cmath
import contextlib
import math
import sys
import time

import numpy as np
import pytest
import sympy

from curvespine.fiber0 import (corner_data, euler_audit, fiber_model,
                               fiber_pieces)
from curvespine.flow import (DegenerateMetric, FlowConfig, NumBivariate,
                             fiber_points, linear_change, phi0_criticals,
                             phi0_gradient, spine_workflow, trace_to_curve)
from curvespine.invariants import (analyze, milnor_number, polar_node_check)
from curvespine.parser import parse_poly
from curvespine.resolution import pullback_order, tangent_cone

CORPUS = ["x*y", "y^2+x^3", "y^2+x^5", "y^3+x^4", "y^3+x^4+x^3*y",
          "y^4+x^6+x^5*y", "y^4+x^3*y^2+x^6+x^5*y",
          "y^7+x^3*y^4+x^7*y^2+x^12", "(y^2+x^3)*(y-x)", "y^3+x^5"]
WORKED = "y^3+x^4+x^3*y"

# Milnor numbers frozen from Kouchnirenko's Newton number (see
# test_invariants.newton_number); the node is 1.
MU = dict(zip(CORPUS, [1, 2, 4, 6, 6, 15, 15, 49, 5, 8]))


def _say(line, capsys):
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


@contextlib.contextmanager
def criterion(number, title, budget, capsys=None):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        dt = time.perf_counter() - t0
        _say(f"FAIL criterion {number:2d} ({dt:6.2f} s): {title}: "
             f"{type(exc).__name__}: {exc}".rstrip(), capsys)
        raise
    dt = time.perf_counter() - t0
    if dt > budget:
        _say(f"FAIL criterion {number:2d} ({dt:6.2f} s): {title}: over the "
             f"{budget} s budget", capsys)
        raise AssertionError(f"runtime {dt:.2f} s exceeds {budget} s")
    _say(f"PASS criterion {number:2d} ({dt:6.2f} s): {title}", capsys)


def _row(t, order, attr):
    return tuple(getattr(t.rows[v], attr) for v in order)


def test_criterion_01_worked_invariant_table(capsys):
    with criterion(1, "worked invariant table", 5, capsys):
        t = analyze(parse_poly(WORKED), seed=0)
        order = (0, 3, 2, 1)
        assert _row(t, order, "c0") == (1, 3, 2, 1)
        assert _row(t, order, "c1") == (1, 4, 3, 2)
        assert _row(t, order, "m") == (3, 12, 8, 4)
        assert _row(t, order, "p") == (2, 8, 6, 3)
        assert _row(t, order, "tau") == (2, 8, 5, 3)
        assert _row(t, order, "varpi") == (0, 0, 1, 1)
        assert t.upsilon == {0, 3}


def test_criterion_02_worked_fiber_combinatorics(capsys):
    with criterion(2, "worked fiber combinatorics", 5, capsys):
        t = analyze(parse_poly(WORKED), seed=0)
        m = fiber_model(t.graph, t)
        by_m = {p.m: p for p in m.pieces}
        top, d0 = by_m[12], by_m[3]
        assert (top.n_components, top.genus_per_component,
                top.n_boundary) == (1, 3, 8)
        assert d0.n_components == 3 and d0.genus_per_component == 0
        assert d0.n_boundary == 3                       # one circle each
        corners = {(c.src, c.dst): (c.reds_total, c.reds_per_circle)
                   for c in m.corners}
        assert corners[(3, 2)] == (12, 3) and corners[(2, 1)] == (4, 1)
        (dish,) = m.dishes
        assert (dish.n_dishes, dish.saddles, dish.prongs) == (4, 2, 3)


def test_criterion_03_brieskorn_criticals(capsys):
    with criterion(3, "D0 criticals of y^3+x^3", 10, capsys):
        crits = phi0_criticals(parse_poly("y^3+x^3"))
        fin = [c for c in crits if c.chart == "A"]
        inf = [c for c in crits if c.chart == "B"]
        zero = [c for c in fin if abs(c.v) < 1e-9]
        assert len(zero) == 1 and zero[0].kind == "fountain"
        assert np.allclose(zero[0].hessian, [[3, 0], [0, 3]], atol=1e-9)
        saddles = [c for c in fin if c.kind == "saddle"]
        assert len(saddles) == 3
        for k in range(3):
            w = cmath.exp(2j * math.pi * k / 3)
            assert min(abs(c.v - w) for c in saddles) < 1e-9
        one = min(saddles, key=lambda c: abs(c.v - 1))
        lo, hi = sorted(np.linalg.eigvalsh(np.array(one.hessian)))
        assert lo < 0 < hi and abs(lo / hi + 1 / 3) < 1e-6
        H = np.array(one.hessian)
        assert abs(H[0, 1]) < 1e-6 and H[0, 0] < 0 < H[1, 1]
        assert len(inf) == 1 and abs(inf[0].v) < 1e-9
        assert inf[0].kind == "fountain"
        F = sum(c.kind == "fountain" for c in crits)
        S = sum(c.kind == "saddle" for c in crits)
        assert F - S == -1 == 2 - 3


def test_criterion_04_degenerate_metric_workflow(capsys):
    with criterion(4, "metric-degeneracy workflow", 10, capsys):
        f = parse_poly("y^2+x^2")
        with pytest.raises(DegenerateMetric):
            phi0_criticals(f)
        g = linear_change(f, (1, 1, 0, 1))               # x <- x + y
        assert g == parse_poly("y^2+(x+y)^2")
        crits = phi0_criticals(g)
        # chart B points are reported at 1 / v_B in the first chart
        found = []
        for c in crits:
            z = c.v if c.chart == "A" else 1 / c.v
            found.append((z.real, z.imag, c.kind))
        found.sort()
        assert len(found) == 2
        (r0, i0, k0), (r1, i1, k1) = found
        assert abs(r0 - (1 - math.sqrt(5)) / 2) < 1e-9 and abs(i0) < 1e-9
        assert abs(r1 - (1 + math.sqrt(5)) / 2) < 1e-9 and abs(i1) < 1e-9
        assert (k0, k1) == ("saddle", "fountain")


def _smallest_subtree(graph):
    # smallest connected subgraph containing 0 and all arrow hosts
    hosts = {graph.neighbors(a.vid)[0] for a in graph.arrows()}
    keep = {v.vid for v in graph.exceptional()}
    changed = True
    while changed:
        changed = False
        for v in sorted(keep):
            nb = [u for u in graph.neighbors(v) if u in keep]
            if v != 0 and v not in hosts and len(nb) <= 1:
                keep.discard(v)
                changed = True
    return keep


def test_criterion_05_invariant_suites(capsys):
    with criterion(5, "invariant suites over the corpus", 60, capsys):
        for text in CORPUS:
            f = parse_poly(text)
            t = analyze(f, seed=0)
            rows = t.rows
            for vid, r in rows.items():
                assert r.nu == r.c0 + r.c1, (text, vid)
                assert r.tau + r.varpi == 2 * r.c1, (text, vid)
                assert r.varpi >= 0, (text, vid)
            # both characterizations of the invariant subgraph
            assert t.upsilon == {v for v, r in rows.items() if r.varpi == 0}
            assert t.upsilon == _smallest_subtree(t.graph), text
            for e in t.edges:
                if e.to_arrow:
                    continue
                i, j = rows[e.dst], rows[e.src]
                hi, hj = i.m * j.c0, j.m * i.c0
                assert (hi > hj) if e.invariant else (hi == hj), text
                d = i.c0 * j.varpi - i.varpi * j.c0
                assert d <= 0 and (d == 0) == (i.varpi == j.varpi == 0)
            _, _, tang = tangent_cone(f)
            assert t.graph.polar.get(0, 0) == tang - 1
            for n in t.nodes:
                assert polar_node_check(t, n)[3], (text, n.node)
            ids, M = t.matrix_ids, t.matrix
            for a, i in enumerate(ids):
                lhs = sum((rows[j].nu - 1) * M[b][a] for b, j in enumerate(ids))
                assert lhs == -M[a][a] - 2, (text, i)
            mu1, mu2 = milnor_number(t.graph, t.min_graph)
            assert mu1 == mu2 == MU[text], text
            assert all(c.passed for c in t.checks), text


def test_criterion_06_euler_audit(capsys):
    with criterion(6, "Euler / Poincare-Hopf audit over the corpus", 60,
                   capsys):
        for text in CORPUS:
            t = analyze(parse_poly(text), seed=0)
            pieces = fiber_pieces(t.graph, t)
            audit = euler_audit(t.graph, t, pieces, corner_data(t),
                                raise_on_fail=True)
            assert len(audit) == len(pieces) and all(c.passed for c in audit)
            total = sum(t.graph.vertex(p.vertex).m * (2 - len(
                t.graph.neighbors(p.vertex))) for p in pieces)
            assert total == 1 - MU[text], text


def test_criterion_07_worked_spine(capsys):
    with criterion(7, "numeric spine of the worked example at theta=1", 120,
                   capsys):
        table, runs, spine = spine_workflow(parse_poly(WORKED), 1.0,
                                            FlowConfig(), seed=0)
        assert spine.b1 == 6 == table.mu
        assert spine.V - spine.E == -5
        assert spine.n_components == 1
        assert not spine.flags


def _tangent_coeffs(text):
    x, y = sympy.symbols("x y")
    p = sympy.Poly(sympy.sympify(text.replace("^", "**")), x, y)
    e = min(sum(m) for m in p.monoms())
    coeffs = [0.0] * (e + 1)
    for (i, j), c in p.as_dict().items():
        if i + j == e:
            coeffs[j] = float(c)
    return np.array(coeffs[::-1]), e


def test_criterion_08_gradient_finite_differences(capsys):
    with criterion(8, "finite-difference gradient of the D0 potential", 30,
                   capsys):
        rng = np.random.default_rng(20240601)
        h = 1e-6
        worst = 0.0
        for text in CORPUS:
            coeffs, e = _tangent_coeffs(text)

            def phi(z):
                return (-math.log(abs(np.polyval(coeffs, z)))
                        + 0.5 * e * math.log1p(abs(z) ** 2))
            f = parse_poly(text)
            used = 0
            while used < 1000:
                z = complex(*rng.uniform(-2.5, 2.5, 2))
                if abs(np.polyval(coeffs, z)) < 1e-3:
                    continue
                an = phi0_gradient(f, z)
                if abs(an) < 1e-3:
                    continue
                fd = complex(phi(z + h) - phi(z - h),
                             phi(z + 1j * h) - phi(z - 1j * h)) / (2 * h)
                worst = max(worst, abs(fd - an) / abs(an))
                used += 1
        assert worst < 1e-6, worst


def _distance_to_curve(text, x, y):
    if text == "x*y":
        return min(abs(x), abs(y))
    # vertical distance to the nearest root of y^2 = -x^3 bounds the distance
    r = cmath.sqrt(-x ** 3)
    return min(abs(y - r), abs(y + r))


def test_criterion_09_trajectories(capsys):
    with criterion(9, "trajectory properties for x*y and y^2+x^3", 60,
                   capsys):
        cfg = FlowConfig()
        for text in ("x*y", "y^2+x^3"):
            f = parse_poly(text)
            num = NumBivariate(f)
            for p in fiber_points(f, 1e-3, 200, seed=11):
                tr = trace_to_curve(f, p, cfg, num)
                assert np.all(np.diff(tr.abs_f) < 0)
                assert tr.arc_length <= cfg.max_arc_length
                x, y = tr.terminal
                assert abs(num(x, y)) < 2 * cfg.curve_threshold
                assert _distance_to_curve(text, x, y) < 1e-6


def test_criterion_10_toric_weights(capsys):
    with criterion(10, "toric c0/c1 weights", 20, capsys):
        X, Y = parse_poly("x"), parse_poly("y")
        for a, b in [(2, 3), (3, 4), (3, 5), (4, 7)]:
            t = analyze(parse_poly(f"y^{a}+x^{b}"), seed=0)
            for vid, r in t.rows.items():
                wx = pullback_order(t.graph, X, vid)
                wy = pullback_order(t.graph, Y, vid)
                assert (r.c0, r.c1) == (min(wx, wy), max(wx, wy)), (a, b, vid)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn(None)
            except BaseException:
                failed += 1
    sys.exit(1 if failed else 0)
