import cmath
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from curvespine.flow import (DegenerateMetric, EscapedBall, FlowConfig,
                             NumBivariate, OnCurve, apply_random_isometryish_change,
                             d0_criticals, d0_field, divisor_potential,
                             fiber_points, index_sum_check, linear_change,
                             morse_workflow, phi0_criticals, phi0_gradient,
                             poincare_hopf_d0, puncture_probe, sample_field,
                             spine_workflow, trace_to_curve, xi_eval)
from curvespine.parser import parse_poly
from curvespine.resolution import tangent_cone

from conftest import CORPUS, table_for

MORSE = [s for s in CORPUS if s != "x*y"]


# the field on C^2

def test_xi_node_at_one_one():
    assert np.allclose(xi_eval(parse_poly("x*y"), (1, 1)), [-1, 0, -1, 0])


def test_xi_cusp_at_one_zero():
    assert np.allclose(xi_eval(parse_poly("y^2+x^3"), (1, 0)), [-3, 0, 0, 0])


def test_xi_on_curve_raises():
    with pytest.raises(OnCurve):
        xi_eval(parse_poly("x*y"), (0, 0.3))


def _sympy_partials(text):
    x, y = sympy.symbols("x y")
    e = sympy.sympify(text.replace("^", "**"))
    return [sympy.lambdify((x, y), d, "numpy") for d in
            (e, sympy.diff(e, x), sympy.diff(e, y))]


coords = st.floats(-0.8, 0.8, allow_nan=False)


@pytest.mark.parametrize("text", ["x*y", "y^2+x^3", "y^3+x^4+x^3*y"])
@given(st.tuples(coords, coords, coords, coords))
def test_xi_satisfies_differential_identity(text, c):
    f, fx, fy = _sympy_partials(text)
    x, y = complex(c[0], c[1]), complex(c[2], c[3])
    fv = f(x, y)
    if abs(fv) < 1e-8:
        return
    r = xi_eval(parse_poly(text), (x, y))
    grad_log = -complex(r[0], r[1]), -complex(r[2], r[3])
    lhs = fx(x, y) * grad_log[0] + fy(x, y) * grad_log[1]
    rhs = (abs(grad_log[0]) ** 2 + abs(grad_log[1]) ** 2) * fv
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


# trajectories

def test_trajectory_for_coordinate_function():
    tr = trace_to_curve(parse_poly("y"), (0.1, 0.05))
    assert abs(tr.terminal[0] - 0.1) < 1e-9 and abs(tr.terminal[1]) < 1e-12
    assert tr.arc_length == pytest.approx(0.05, rel=1e-6)


def test_trajectory_for_node():
    tr = trace_to_curve(parse_poly("x*y"), (0.2, 0.1))
    x, y = tr.terminal
    assert abs(x * y) < 1e-12
    assert min(abs(x), abs(y)) < 1e-6
    assert abs(y) < abs(x)                   # lands on the x-axis
    assert np.all(np.diff(tr.abs_f) < 0)


def test_double_line_has_two_preimages():
    f = parse_poly("y^2")
    t = 1e-4
    q = 0.1
    ends = [trace_to_curve(f, (q, s)).terminal
            for s in (math.sqrt(t), -math.sqrt(t))]
    for x, y in ends:
        assert abs(x - q) < 1e-9 and abs(y) < 1e-6


def test_escape_from_ball_raises():
    with pytest.raises(EscapedBall):
        trace_to_curve(parse_poly("x*y"), (2.0, 1.0))


def test_fiber_points_lie_on_fiber():
    f = parse_poly("y^2+x^3")
    num = NumBivariate(f)
    for p in fiber_points(f, 1e-3, 10, seed=3):
        assert abs(num(*p) - 1e-3) < 1e-12


# potential on the first divisor

def test_brieskorn_criticals():
    crits = phi0_criticals(parse_poly("y^3+x^3"))
    kinds = sorted((c.kind, c.chart) for c in crits)
    assert kinds == [("fountain", "A"), ("fountain", "B"), ("saddle", "A"),
                     ("saddle", "A"), ("saddle", "A")]
    saddles = [c.v for c in crits if c.kind == "saddle"]
    for k in range(3):
        w = cmath.exp(2j * math.pi * k / 3)
        assert min(abs(s - w) for s in saddles) < 1e-9
    one = next(c for c in crits if abs(c.v - 1) < 1e-9)
    assert np.allclose(one.field_jacobian, [[-1.5, 0], [0, 4.5]], atol=1e-9)
    zero = next(c for c in crits if c.chart == "A" and abs(c.v) < 1e-9)
    assert np.allclose(zero.hessian, [[3, 0], [0, 3]], atol=1e-9)


def test_worked_example_has_only_fountain_at_infinity():
    crits = phi0_criticals(parse_poly("y^3+x^4+x^3*y"))
    assert [(c.chart, c.kind) for c in crits] == [("B", "fountain")]
    assert abs(crits[0].v) < 1e-9
    assert index_sum_check(crits, 1) == (1, 1, True)


def test_degenerate_metric_raises():
    for text in ("y^2+x^2", "x*y"):
        with pytest.raises(DegenerateMetric):
            phi0_criticals(parse_poly(text))


def test_morse_workflow_retries_once():
    runs = morse_workflow(parse_poly("y^2+x^2"), change=(1, 1, 0, 1))
    assert len(runs) == 2 and runs[0].error and runs[0].criticals is None
    assert runs[1].f == parse_poly("y^2+(x+y)^2")
    pos = sorted((c.v if c.chart == "A" else 1 / c.v for c in
                  runs[1].criticals), key=lambda z: z.real)
    assert [c.kind for c in sorted(runs[1].criticals, key=lambda c: (
        c.v if c.chart == "A" else 1 / c.v).real)] == ["saddle", "fountain"]
    assert max(abs(z.imag) for z in pos) < 1e-9
    assert [c.real for c in pos] == pytest.approx(
        [(1 - math.sqrt(5)) / 2, (1 + math.sqrt(5)) / 2], abs=1e-9)


def test_random_change_is_invertible():
    f = parse_poly("y^2+x^2")
    assert apply_random_isometryish_change(f, None) == (f, (1, 0, 0, 1))
    for seed in range(20):
        g, (a, b, c, d) = apply_random_isometryish_change(f, seed)
        assert a * d - b * c != 0
        assert g == linear_change(f, (a, b, c, d))


def test_singular_change_rejected():
    with pytest.raises(ValueError):
        linear_change(parse_poly("x*y"), (1, 2, 2, 4))


@pytest.mark.parametrize("text", MORSE)
def test_index_identities(text):
    f = parse_poly(text)
    _, _, t = tangent_cone(f)
    crits = d0_criticals(f)
    assert index_sum_check(crits, t)[2]
    assert poincare_hopf_d0(crits, t) == 2
    assert all(c.kind in ("fountain", "saddle") for c in crits)


@pytest.mark.parametrize("text", CORPUS)
def test_field_points_into_punctures(text):
    assert puncture_probe(parse_poly(text)) > 0.9


@pytest.mark.parametrize("text", MORSE)
def test_field_vanishes_at_criticals(text):
    f = parse_poly(text)
    for c in phi0_criticals(f):
        assert abs(d0_field(f, c.v, c.chart)) < 1e-8


def test_sample_field_empty_grid():
    assert sample_field(parse_poly("y^3+x^3"), n=0) == []


def test_brieskorn_phase_portrait_signs():
    f = parse_poly("y^3+x^3")
    eps = 1e-2
    assert d0_field(f, complex(eps)).real > 0               # away from 0
    assert d0_field(f, 1 + eps).real < 0                    # back to v=1
    assert d0_field(f, 1 + 1j * eps).imag > 0               # away from v=1
    samples = sample_field(f, n=11)
    assert samples and all(np.isfinite(abs(w)) for _, w in samples)


def _tangent_form(text):
    # in f(1, v) as a coefficient list, from sympy, lowest degree first
    x, y = sympy.symbols("x y")
    p = sympy.Poly(sympy.sympify(text.replace("^", "**")), x, y)
    e = min(sum(m) for m in p.monoms())
    coeffs = [0.0] * (e + 1)
    for (i, j), c in p.as_dict().items():
        if i + j == e:
            coeffs[j] = float(c)
    return coeffs, e


def _phi_direct(text, z):
    coeffs, e = _tangent_form(text)
    g = np.polyval(coeffs[::-1], z)
    return -math.log(abs(g)) + 0.5 * e * math.log1p(abs(z) ** 2)


@pytest.mark.parametrize("text", ["y^3+x^3", "y^2+x^3", "(y^2+x^3)*(y-x)"])
@given(st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_gradient_matches_finite_differences(text, c):
    v = complex(*c)
    h = 1e-6
    coeffs, _ = _tangent_form(text)
    if abs(np.polyval(coeffs[::-1], v)) < 1e-3:
        return
    fd = complex(_phi_direct(text, v + h) - _phi_direct(text, v - h),
                 _phi_direct(text, v + 1j * h) - _phi_direct(text, v - 1j * h)
                 ) / (2 * h)
    an = phi0_gradient(parse_poly(text), v)
    if abs(an) < 1e-3:
        return
    assert abs(fd - an) <= 1e-6 * abs(an)


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(ode_rel_tol=-1)
    with pytest.raises(ValueError):
        FlowConfig(stop_radius=1.0, dedup_radius=1e-3)


# potentials on invariant divisors

def test_worked_top_divisor_has_no_criticals(worked_table):
    r = divisor_potential(worked_table.graph, worked_table, 3)
    assert r["criticals"] == [] and r["count"] == 0


def test_cusp_node_has_no_criticals():
    t = table_for("y^2+x^3")
    node = next(v for v, row in t.rows.items() if row.m == 6)
    r = divisor_potential(t.graph, t, node)
    assert r["count"] == t.graph.polar.get(node, 0) == 0


def test_divisor_criticals_are_saddles_matching_polar_counts():
    t = table_for("y^7+x^3*y^4+x^7*y^2+x^12")
    for i in sorted(t.upsilon - {0}):
        r = divisor_potential(t.graph, t, i)
        assert r["count"] == t.graph.polar.get(i, 0) <= r["degree_bound"]
        assert all(c.kind == "saddle" for c in r["criticals"])


# spines

@pytest.mark.parametrize("text, V, E", [("y^2+x^3", 5, 6), ("y^3+x^3", 15, 18),
                                       ("x*y", 4, 4)])
def test_small_spines(text, V, E):
    table, runs, spine = spine_workflow(parse_poly(text), 1.0)
    assert (spine.V, spine.E) == (V, E)
    assert spine.b1 == table.mu and spine.n_components == 1
    assert spine.flags == [] or spine.flags == ()
    assert all(c.passed for c in spine.checks)


@pytest.mark.parametrize("theta", [1.0, 2.5])
@pytest.mark.parametrize("text", CORPUS)
def test_spine_first_betti_number_is_milnor_number(text, theta):
    table, _, spine = spine_workflow(parse_poly(text), theta)
    assert spine.b1 == table.mu
    assert spine.V - spine.E == 1 - table.mu
    assert spine.n_components == 1
