from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from curvespine.algebra import (BivariatePoly, ExtensionDegreeExceeded,
                                FieldTower, UniPoly, extend_tower,
                                full_factor, irreducible_factor,
                                newton_polygon, resultant, squarefree_factor,
                                vanishing_order_u)
from curvespine.parser import parse_poly

V = UniPoly([0, 1])

small_ints = st.integers(-6, 6)
uni_polys = st.lists(small_ints, min_size=2, max_size=7).map(UniPoly).filter(
    lambda p: not p.is_zero() and p.degree() >= 1)


def prod(factors, one):
    out = one
    for q, k in factors:
        out = out * q ** k
    return out


# squarefree decomposition

def test_squarefree_perfect_square():
    assert squarefree_factor((V - 1) ** 2) == [(V - 1, 2)]


def test_squarefree_already_squarefree():
    assert squarefree_factor(V ** 3 + 1) == [(V ** 3 + 1, 1)]


def test_squarefree_mixed():
    p = V * (V ** 2 + 1) ** 3
    assert squarefree_factor(p) == [(V, 1), (V ** 2 + 1, 3)]


@given(uni_polys)
def test_squarefree_roundtrip_and_coprime(p):
    facs = squarefree_factor(p)
    assert prod(facs, UniPoly([1])).scale(p.lc()) == p
    for q, _ in facs:
        assert q.gcd(q.derivative()).degree() == 0
    for a in range(len(facs)):
        for b in range(a + 1, len(facs)):
            assert facs[a][0].gcd(facs[b][0]).degree() == 0


# irreducible factorization

def test_factor_over_rationals():
    assert irreducible_factor(V ** 3 + 1) == [V + 1, V ** 2 - V + 1]
    assert irreducible_factor(V ** 2 + 1) == [V ** 2 + 1]


def test_factor_over_eisenstein_field():
    T = extend_tower(FieldTower.rationals(), UniPoly([1, -1, 1]))
    w = T.gen()
    facs = irreducible_factor(UniPoly([1, -1, 1]), T)
    assert len(facs) == 2 and all(q.degree() == 1 for q in facs)
    roots = sorted((-q.coeffs[0] for q in facs), key=repr)
    assert set(map(repr, roots)) == {repr(w), repr(1 - w)}
    for r in roots:
        assert (r * r - r + 1) == 0


@given(uni_polys)
def test_full_factor_agrees_with_sympy(p):
    v = sympy.Symbol("v")
    expr = sum(int(c) * v ** k for k, c in enumerate(p.coeffs))
    _, ref = sympy.factor_list(expr)
    degs_ref = sorted((sympy.degree(q, v), k) for q, k in ref
                      if sympy.degree(q, v) > 0)
    facs = full_factor(p)
    assert sorted((q.degree(), k) for q, k in facs) == degs_ref
    assert prod(facs, UniPoly([1])).scale(p.lc()) == p


@given(st.lists(st.tuples(small_ints, small_ints), min_size=1, max_size=4))
def test_factor_roundtrip_over_sqrt2(pairs):
    T = extend_tower(FieldTower.rationals(), UniPoly([-2, 0, 1]))
    a = T.gen()
    # product of linear factors v - (p + q a) gives known roots
    p = UniPoly([T.one()])
    for x, y in pairs:
        p = p * UniPoly([-(T.coerce(Fraction(x)) + a * y), T.one()])
    facs = full_factor(p, T)
    assert prod(facs, UniPoly([T.one()])) == p
    assert sum(q.degree() * k for q, k in facs) == len(pairs)


# towers

def test_tower_degree_four():
    T1 = extend_tower(FieldTower.rationals(), UniPoly([-2, 0, 1]))
    t = T1.gen()
    T2 = extend_tower(T1, UniPoly([-t, 0, 1]))
    s = T2.gen()
    assert T2.degree == 4
    assert s ** 4 - 2 == 0


def test_tower_degree_bound():
    with pytest.raises(ExtensionDegreeExceeded):
        extend_tower(FieldTower.rationals(max_ext_degree=1),
                     UniPoly([1, 0, 1]))


@given(small_ints, small_ints.filter(bool))
def test_tower_inverse(x, y):
    T = extend_tower(FieldTower.rationals(), UniPoly([1, 1, 1]))
    z = T.coerce(Fraction(x)) + T.gen() * y
    assert z * z.inverse() == 1


def test_resultant_detects_common_root():
    assert resultant(V ** 2 - 1, V - 1) == 0
    assert resultant(V ** 2 + 1, V - 1) == 2


# bivariate utilities

def test_vanishing_order_examples():
    assert vanishing_order_u(parse_poly("x^3*(y^3+x+x*y)")) == 3
    assert vanishing_order_u(parse_poly("y+1")) == 0
    assert vanishing_order_u(parse_poly("x^8*y^4*(1+x*y^2+x*y)")) == 8


bi_polys = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)),
                           st.integers(-5, 5).filter(bool), min_size=1,
                           max_size=6).map(
    lambda d: BivariatePoly({k: Fraction(c) for k, c in d.items()}))


@given(bi_polys, bi_polys)
def test_vanishing_order_additive(f, g):
    assert vanishing_order_u(f * g) == vanishing_order_u(f) + \
        vanishing_order_u(g)
    assert (f * g).ord() == f.ord() + g.ord()


def test_newton_polygon_examples():
    N = newton_polygon(parse_poly("y^7+x^3*y^4+x^7*y^2+x^12"))
    assert N.vertices == [(0, 7), (3, 4), (7, 2), (12, 0)]
    assert len(N.faces) == 3
    N = newton_polygon(parse_poly("y^3+x^4"))
    assert [(a, b, n) for a, b, n in N.faces] == [((0, 3), (4, 0), (3, 4))]
    N = newton_polygon(parse_poly("y^4+x^3*y^2+x^6"))
    assert len(N.faces) == 1 and N.faces[0][2] == (2, 3)
    assert N.initial((2, 3)) == parse_poly("y^4+x^3*y^2+x^6")


@given(bi_polys.filter(lambda f: (0, 0) not in f.terms))
def test_newton_faces_are_supporting(f):
    N = newton_polygon(f)
    for a, b, (n1, n2) in N.faces:
        w = n1 * a[0] + n2 * a[1]
        assert n1 * b[0] + n2 * b[1] == w
        assert all(n1 * i + n2 * j >= w for i, j in f.terms)
        assert len(N.initial((n1, n2)).terms) >= 2
    for (i0, j0), (i1, j1) in zip(N.vertices, N.vertices[1:]):
        assert i1 > i0 and j1 < j0
