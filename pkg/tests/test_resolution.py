import pytest

from curvespine.algebra import ExtensionDegreeExceeded, UniPoly
from curvespine.parser import parse_poly
from curvespine.resolution import (GenericityFailure, NotSingularAtOrigin,
                                   ZeroPolynomial, milnor_from_centers,
                                   nc_certificate, pullback_order,
                                   resolve_min, resolve_pol, tangent_cone,
                                   total_transform)

from conftest import CORPUS, WORKED


def exc_ms(g):
    return [v.m for v in g.exceptional()]


def arrow_hosts(g):
    out = []
    for a in g.arrows():
        (host,) = g.neighbors(a.vid)
        out.append(g.vertex(host).m)
    return sorted(out)


def test_tangent_cone_examples():
    assert tangent_cone(parse_poly(WORKED))[1:] == (3, 1)
    assert tangent_cone(parse_poly("y^3+x^3"))[1:] == (3, 3)
    assert tangent_cone(parse_poly("x*y"))[1:] == (2, 2)


def test_cusp_chain():
    g = resolve_min(parse_poly("y^2+x^3"))
    assert sorted(exc_ms(g)) == [2, 3, 6]
    node = next(v for v in g.exceptional() if v.m == 6)
    assert sorted(g.vertex(u).m for u in g.neighbors(node.vid)) == [1, 2, 3]
    assert arrow_hosts(g) == [6]


def test_node_single_blowup():
    g = resolve_min(parse_poly("x*y"))
    assert exc_ms(g) == [2] and arrow_hosts(g) == [2, 2]


def test_worked_graph_shape():
    g = resolve_min(parse_poly(WORKED))
    assert exc_ms(g) == [3, 4, 8, 12]
    m = {v.vid: v.m for v in g.vertices}
    pairs = {tuple(sorted((m[a], m[b]))) for a, b in g.edges}
    assert pairs == {(3, 12), (8, 12), (4, 8), (1, 12)}


def test_worked_polar():
    f = parse_poly(WORKED)
    g = resolve_pol(f)
    assert exc_ms(g) == [3, 4, 8, 12]
    assert {g.vertex(k).m: n for k, n in g.polar.items() if n} == {8: 1}


def test_worked_f_y_strict_transform():
    # the strict transform of f_y meets the m=8 divisor at one point off the
    # corners; in the chart reached by A, B, A that point is v = -3
    f = parse_poly(WORKED)
    g = resolve_pol(f)
    i = next(v.vid for v in g.exceptional() if v.m == 8)
    h = total_transform(g, f.diff(1), i)
    k = h.ord_u()
    assert k == 6
    strict = h.divide_monomial(k, 0).restrict_u0()
    assert strict == UniPoly([0, 0, 3, 1])        # v^2 (v + 3)
    assert strict(-3) == 0


def test_pullback_orders_on_worked_example():
    f = parse_poly(WORKED)
    g = resolve_pol(f)
    by_m = {v.m: v.vid for v in g.exceptional()}
    assert [pullback_order(g, f, by_m[m]) for m in (3, 4, 8, 12)] == \
        [3, 4, 8, 12]
    assert [pullback_order(g, parse_poly("x"), by_m[m])
            for m in (3, 4, 8, 12)] == [1, 1, 2, 3]
    assert pullback_order(g, f.diff(1), by_m[8]) == 6


def test_same_minimal_graph_different_polar():
    a = parse_poly("y^4+x^6+x^5*y")
    b = parse_poly("y^4+x^3*y^2+x^6+x^5*y")
    assert resolve_min(a).shape() == resolve_min(b).shape()
    ga, gb = resolve_pol(a), resolve_pol(b)
    # exactly one of the two needs an extra blow-up for its polar curve
    extra = sorted([len(ga.exceptional()) - 3, len(gb.exceptional()) - 3])
    assert extra == [0, 1]
    assert len(ga.exceptional()) == 4


def test_node_polar_meets_first_divisor_once():
    g = resolve_pol(parse_poly("x*y"))
    assert g.polar == {0: 1}


@pytest.mark.parametrize("text", CORPUS)
def test_polar_genericity_invariants(text):
    f = parse_poly(text)
    g = resolve_pol(f)
    _, _, t = tangent_cone(f)
    assert g.polar.get(0, 0) == t - 1
    assert any(a["ok"] for a in g.attempts)
    assert all(ok for _, _, ok in nc_certificate(g))
    assert len(g.edges) == len(g.vertices) - 1


@pytest.mark.parametrize("text", CORPUS)
def test_multiplicity_is_pullback_order(text):
    f = parse_poly(text)
    g = resolve_pol(f)
    for v in g.exceptional():
        assert pullback_order(g, f, v.vid) == v.m


def test_extension_bound_enforced():
    f = parse_poly("(y^2-2*x^2)^2+x^5")
    with pytest.raises(ExtensionDegreeExceeded):
        resolve_min(f, max_ext_degree=1)
    g = resolve_min(f)
    assert max(v.conjugacy_degree for v in g.vertices) == 2
    # two cusps with distinct tangents: 2 + 2 + 2*4 - 2 + 1
    assert milnor_from_centers(g) == 11


def test_input_errors():
    with pytest.raises(ZeroPolynomial):
        resolve_min(parse_poly("0"))
    with pytest.raises(NotSingularAtOrigin):
        resolve_min(parse_poly("x+1"))


def test_genericity_failure_when_no_attempts():
    with pytest.raises(GenericityFailure):
        resolve_pol(parse_poly("y^2+x^3"), retry_limit=0)


def test_seed_independence_of_shape():
    f = parse_poly(WORKED)
    assert resolve_pol(f, seed=0).shape() == resolve_pol(f, seed=7).shape()
