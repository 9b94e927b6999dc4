import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from curvespine.algebra import BivariatePoly
from curvespine.invariants import (NonReducedInput, analyze, milnor_number,
                                   negative_definite, polar_node_check,
                                   toric_check)
from curvespine.parser import parse_poly
from curvespine.resolution import pullback_order

from conftest import CORPUS, table_for


def newton_number(text):
    """Kouchnirenko's 2V - a - b + 1 with a nondegeneracy assertion.

    Written from the support alone, independently of the resolution code.
    """
    x, y = sympy.symbols("x y")
    expr = sympy.expand(sympy.sympify(text.replace("^", "**")))
    pts = [tuple(m) for m in sympy.Poly(expr, x, y).monoms()]
    hull = []
    for p in sorted(set(pts)):
        while len(hull) >= 2 and (
                (hull[-1][0] - hull[-2][0]) * (p[1] - hull[-2][1])
                - (hull[-1][1] - hull[-2][1]) * (p[0] - hull[-2][0])) <= 0:
            hull.pop()
        hull.append(p)
    a = min(i for i, j in pts if j == 0)
    b = min(j for i, j in pts if i == 0)
    chain = [p for p in hull if p[0] <= a]
    chain = [p for k, p in enumerate(chain) if k == 0 or p[1] < chain[k - 1][1]]
    area = sum((q[0] - p[0]) * (p[1] + q[1]) for p, q in zip(chain, chain[1:]))
    coeffs = sympy.Poly(expr, x, y).as_dict()
    for p, q in zip(chain, chain[1:]):
        n1, n2 = p[1] - q[1], q[0] - p[0]
        w = n1 * p[0] + n2 * p[1]
        face = sum(c * x ** i * y ** j for (i, j), c in coeffs.items()
                   if n1 * i + n2 * j == w)
        face = sympy.cancel(face / (x ** min(p[0], q[0]) * y ** min(p[1], q[1])))
        sqf = sympy.sqf_list(face.subs(x, 1))
        assert all(k == 1 for _, k in sqf[1]), f"degenerate face {face}"
    return area - a - b + 1


# exact oracles frozen from the Newton polygon
NEWTON = {"y^2+x^3": 2, "y^2+x^5": 4, "y^3+x^4": 6, "y^3+x^4+x^3*y": 6,
          "y^4+x^6+x^5*y": 15, "y^4+x^3*y^2+x^6+x^5*y": 15,
          "y^7+x^3*y^4+x^7*y^2+x^12": 49, "(y^2+x^3)*(y-x)": 5,
          "y^3+x^5": 8}


@pytest.mark.parametrize("text", sorted(NEWTON))
def test_newton_number_oracle(text):
    assert newton_number(text) == NEWTON[text]


@pytest.mark.parametrize("text", CORPUS)
def test_milnor_number_matches_oracle(text):
    t = table_for(text)
    mu1, mu2 = milnor_number(t.graph, t.min_graph)
    assert mu1 == mu2 == t.mu == NEWTON.get(text, 1)


@pytest.mark.parametrize("a, b", [(2, 3), (2, 7), (3, 4), (3, 5), (4, 5),
                                  (5, 6)])
def test_brieskorn_milnor_number(a, b):
    t = analyze(parse_poly(f"y^{a}+x^{b}"))
    assert t.mu == (a - 1) * (b - 1)


def rows(t, order, attr):
    return tuple(getattr(t.rows[v], attr) for v in order)


def test_worked_table(worked_table):
    t = worked_table
    order = (0, 3, 2, 1)
    assert rows(t, order, "c0") == (1, 3, 2, 1)
    assert rows(t, order, "c1") == (1, 4, 3, 2)
    assert rows(t, order, "m") == (3, 12, 8, 4)
    assert rows(t, order, "p") == (2, 8, 6, 3)
    assert rows(t, order, "tau") == (2, 8, 5, 3)
    assert rows(t, order, "varpi") == (0, 0, 1, 1)
    assert t.upsilon == {0, 3}
    oriented = {(e.src, e.dst) for e in t.edges if not e.to_arrow}
    assert oriented == {(0, 3), (3, 2), (2, 1)}


def test_worked_node_alpha(worked_table):
    (node,) = worked_table.nodes
    assert node.node == 3 and node.alpha == 3
    lhs_min, lhs_pol, rhs, ok = polar_node_check(worked_table, node)
    assert rhs == 8 and lhs_min == lhs_pol == 8 and ok


def test_cusp_table():
    t = table_for("y^2+x^3")
    by_m = {r.m: r for r in t.rows.values()}
    assert [(by_m[m].c0, by_m[m].c1) for m in (2, 3, 6)] == \
        [(1, 1), (1, 2), (2, 3)]
    assert by_m[6].p == 3 and by_m[6].varpi == 0
    (node,) = t.nodes
    assert node.alpha == 2
    assert polar_node_check(t, node)[2] == 3


def test_node_curve_table():
    t = table_for("x*y")
    assert t.upsilon == {0}
    assert (t.rows[0].p, t.rows[0].varpi) == (1, 0)


def test_non_invariant_vertex_of_newton_example():
    t = table_for("y^7+x^3*y^4+x^7*y^2+x^12")
    outside = [v for v, r in t.rows.items() if v not in t.upsilon]
    assert [(t.rows[v].c0, t.rows[v].c1) for v in outside] == [(1, 3)]


def test_node_without_non_invariant_neighbour():
    t = table_for("y^7+x^3*y^4+x^7*y^2+x^12")
    n = next(n for n in t.nodes if n.alpha == math.inf)
    m = t.graph.vertex(n.node).m
    deg = len(t.graph.neighbors(n.node))
    assert polar_node_check(t, n)[2] == m * (deg - 2)


@pytest.mark.parametrize("text", CORPUS)
def test_vertex_identities(text):
    t = table_for(text)
    for vid, r in t.rows.items():
        assert r.nu == r.c0 + r.c1
        assert r.tau + r.varpi == 2 * r.c1
        assert r.varpi == r.c1 - r.m + r.p
        assert r.varpi >= 0
        assert (r.c1 == r.c0) == (vid == 0)
        assert (r.varpi == 0) == (vid in t.upsilon)
        if not r.in_min:
            assert r.varpi > 0
    for u in t.graph.neighbors(0):
        if u in t.rows:
            assert t.rows[u].c1 == t.rows[u].c0 + 1


@pytest.mark.parametrize("text", CORPUS)
def test_edge_determinants(text):
    t = table_for(text)
    for e in t.edges:
        if e.to_arrow:
            continue
        i, j = t.rows[e.dst], t.rows[e.src]
        d_m = i.c0 * j.m - i.m * j.c0
        d_w = i.c0 * j.varpi - i.varpi * j.c0
        assert d_m <= 0 and d_w <= 0
        assert (d_m != 0) == e.invariant
        assert (d_w == 0) == (i.varpi == 0 and j.varpi == 0)
        # hironaka number: increasing on invariant edges, constant otherwise
        hj, hi = Fraction(j.m, j.c0), Fraction(i.m, i.c0)
        assert hi > hj if e.invariant else hi == hj


@pytest.mark.parametrize("text", CORPUS)
def test_every_recorded_check_passes(text):
    t = table_for(text)
    failed = [c.name for c in t.checks if not c.passed]
    assert failed == []
    assert negative_definite(t.matrix)


def test_upsilon_is_connected_and_contains_arrow_hosts():
    for text in CORPUS:
        t = table_for(text)
        g = t.graph
        hosts = {g.neighbors(a.vid)[0] for a in g.arrows()}
        assert hosts <= t.upsilon and 0 in t.upsilon
        seen, stack = {0}, [0]
        while stack:
            v = stack.pop()
            for u in g.neighbors(v):
                if u in t.upsilon and u not in seen:
                    seen.add(u)
                    stack.append(u)
        assert seen == t.upsilon


@pytest.mark.parametrize("a, b", [(2, 3), (3, 4), (3, 5), (4, 7)])
def test_toric_weights(a, b):
    t = analyze(parse_poly(f"y^{a}+x^{b}"))
    checks = toric_check(t)
    assert checks and all(c.passed for c in checks)


def test_non_reduced_has_no_milnor_number():
    t = analyze(parse_poly("y^2*(y+x^2)"))
    assert t.mu is None
    from curvespine.fiber0 import invariant_fiber, fiber_pieces
    with pytest.raises(NonReducedInput):
        invariant_fiber(t.graph, t, fiber_pieces(t.graph, t))


line_polys = st.dictionaries(
    st.tuples(st.integers(0, 5), st.integers(0, 5)),
    st.integers(-4, 4).filter(bool), min_size=1, max_size=5).map(
    lambda d: BivariatePoly({k: Fraction(c) for k, c in d.items()}))


@given(line_polys)
def test_order_determinant_sign_for_any_h(h):
    t = table_for("y^3+x^4+x^3*y")
    for e in t.edges:
        if e.to_arrow:
            continue
        oi = pullback_order(t.graph, h, e.dst)
        oj = pullback_order(t.graph, h, e.src)
        assert t.rows[e.dst].c0 * oj - oi * t.rows[e.src].c0 <= 0
