"""Numerical gradient flow of ``-log|f|`` and its radius-zero shadow.

Three layers live here.

* Flow in C^2: evaluation of xi = -grad log|f| and integration of its
  trajectories down to the curve (the collapsing map).
* Potentials on exceptional divisors: the Fubini-Study potential on the
  first exceptional divisor ``D_0`` and the potentials
  ``-log|g| + (m/c0) log|X|`` on invariant divisors, their critical points
  and Morse data.
* Spine tracing: descending trajectories of the divisor potentials,
  lifted to the ``m``-fold covers that make up the fiber at radius zero and
  glued across invariant corners.

Only trajectory geometry matters for the spine, so gradients are taken
with respect to the flat metric of each chart; conformal factors change
speeds, not trajectories.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from .algebra import (BivariatePoly, Embedding, UniPoly, full_factor,
                      rational_value)
from .resolution import replay, tangent_cone, _check_input


class OnCurve(ValueError):
    """The field was evaluated on the curve itself."""


class StepLimit(RuntimeError):
    """Trajectory integration exceeded its step budget."""


class EscapedBall(RuntimeError):
    """Trajectory left the configured Milnor ball."""


class SinkDetected(AssertionError):
    """A sink of the divisor potential flow was found (theory violation)."""


class DegenerateMetric(RuntimeError):
    """A critical point is degenerate or critical points are not isolated."""


class IndexMismatch(AssertionError):
    """Fountains minus saddles differs from 2 - t."""


class PolarCountMismatch(AssertionError):
    """Critical points of a divisor potential disagree with polar counts."""


class TraceDivergence(RuntimeError):
    """A divisor trajectory did not reach a valid endpoint."""


class ChiMismatch(AssertionError):
    """Traced spine has the wrong Euler characteristic."""


@dataclass
class FlowConfig:
    """Numerical parameters of the flow module.

    ``stop_radius`` is the distance at which a divisor trajectory counts
    as having reached a corner; ``dedup_radius`` merges critical points.
    """
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    stop_radius: float = 1e-8
    newton_tol: float = 1e-12
    grid_density: int = 60
    grid_radius: float = 3.0
    dedup_radius: float = 1e-6
    hessian_degenerate_tol: float = 1e-8
    max_arc_length: float = 50.0
    seed: int = 0
    curve_threshold: float = 1e-13
    milnor_radius: float = 1.0
    max_steps: int = 200000
    tie_radius: float = 1e-4
    start_radius: float = 1e-6
    fountain_radius: float = 1e-3
    max_step: float = 0.02

    def __post_init__(self):
        for name in ("ode_rel_tol", "ode_abs_tol", "stop_radius", "newton_tol",
                     "dedup_radius", "hessian_degenerate_tol",
                     "max_arc_length", "curve_threshold", "milnor_radius",
                     "tie_radius", "start_radius", "fountain_radius",
                     "max_step", "grid_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.grid_density < 1:
            raise ValueError("grid_density must be positive")
        if not self.stop_radius < self.dedup_radius:
            raise ValueError("stop_radius must be smaller than dedup_radius")


# ---------------------------------------------------------------------------
# numeric polynomials


class NumBivariate:
    """Complex evaluation of a bivariate polynomial and its partials."""

    def __init__(self, f, emb=None):
        conv = emb if emb is not None else (lambda c: complex(Fraction(c)))
        self.terms = [(i, j, complex(conv(c))) for (i, j), c in
                      sorted(f.terms.items())]
        self.dx = [(i - 1, j, c * i) for i, j, c in self.terms if i]
        self.dy = [(i, j - 1, c * j) for i, j, c in self.terms if j]

    @staticmethod
    def _ev(terms, x, y):
        return sum(c * x ** i * y ** j for i, j, c in terms)

    def __call__(self, x, y):
        return self._ev(self.terms, x, y)

    def grad(self, x, y):
        return self._ev(self.dx, x, y), self._ev(self.dy, x, y)


@dataclass
class RootForm:
    """``lc * prod (v - r)**k`` with numeric roots; stable near roots."""
    lc: complex
    roots: list            # list of (complex root, multiplicity)

    def __call__(self, v):
        out = self.lc
        for r, k in self.roots:
            out *= (v - r) ** k
        return out

    def arg(self, v):
        a = cmath.phase(self.lc)
        for r, k in self.roots:
            a += k * cmath.phase(v - r)
        return a

    def log_abs(self, v):
        out = math.log(abs(self.lc))
        for r, k in self.roots:
            out += k * math.log(abs(v - r))
        return out

    def logd(self, v):
        """Logarithmic derivative g'/g."""
        return sum(k / (v - r) for r, k in self.roots)

    def logd2(self, v):
        """Derivative of g'/g."""
        return -sum(k / (v - r) ** 2 for r, k in self.roots)

    def degree(self):
        return sum(k for _, k in self.roots)

    def nearest(self, v):
        if not self.roots:
            return math.inf
        return min(abs(v - r) for r, _ in self.roots)


def _numeric_roots(q, emb):
    """Roots of an irreducible factor under an embedding, refined."""
    coeffs = [complex(emb(c)) if emb is not None else complex(Fraction(c))
              for c in q.coeffs]
    if len(coeffs) == 2:
        return [-coeffs[0] / coeffs[1]]
    with mpmath.workdps(40):
        rs = mpmath.polyroots([mpmath.mpc(c) for c in reversed(coeffs)],
                              maxsteps=400, extraprec=120)
    return [complex(r) for r in rs]


def root_form(p, tower=None, emb=None):
    """Numeric product form of an exact univariate polynomial."""
    if p.is_zero():
        raise ValueError("root form of the zero polynomial")
    lc = complex(emb(p.lc())) if emb is not None else complex(Fraction(p.lc()))
    roots = []
    for q, k in full_factor(p, tower if tower is not None and tower.levels
                            else None):
        for r in _numeric_roots(q, emb):
            roots.append((r, k))
    return RootForm(lc, roots)


def exact_root_form(p, tower, emb):
    """Like :func:`root_form` but also returns the exact factors."""
    facs = full_factor(p, tower if tower is not None and tower.levels else None)
    lc = complex(emb(p.lc())) if emb is not None else complex(Fraction(p.lc()))
    roots, byfac = [], []
    for q, k in facs:
        rs = _numeric_roots(q, emb)
        roots.extend((r, k) for r in rs)
        byfac.append((q, k, rs))
    return RootForm(lc, roots), byfac


# ---------------------------------------------------------------------------
# flow in C^2


def xi_eval(f, point, num=None):
    """The field ``xi = -grad log|f|`` at a point of C^2 off the curve.

    Parameters
    ----------
    f : BivariatePoly
    point : (complex, complex)

    Returns
    -------
    numpy.ndarray
        Real 4-vector (Re xi_1, Im xi_1, Re xi_2, Im xi_2), where
        ``xi_k = -conj(df/dz_k) / conj(f)``.

    Raises
    ------
    OnCurve
    """
    num = num or NumBivariate(f)
    x, y = point
    fv = num(x, y)
    if abs(fv) < 1e-300:
        raise OnCurve(f"|f| = {abs(fv)} at {point}")
    fx, fy = num.grad(x, y)
    a = -(fx.conjugate() / fv.conjugate())
    b = -(fy.conjugate() / fv.conjugate())
    return np.array([a.real, a.imag, b.real, b.imag])


def xi_complex(num, x, y):
    fv = num(x, y)
    fx, fy = num.grad(x, y)
    return -(fx / fv).conjugate(), -(fy / fv).conjugate(), fv


@dataclass
class TrajectoryRecord:
    start: tuple
    samples: np.ndarray            # rows (tau, Re x, Im x, Re y, Im y)
    abs_f: np.ndarray
    arc_length: float
    terminal: tuple
    classification: str

    def as_dict(self):
        return {"start": [_c(z) for z in self.start],
                "terminal": [_c(z) for z in self.terminal],
                "arc_length": self.arc_length,
                "classification": self.classification,
                "n_samples": int(len(self.samples))}


def _c(z):
    return [float(z.real), float(z.imag)]


def trace_to_curve(f, p, cfg=None, num=None):
    """Integrate xi from ``p`` until ``|f|`` drops below the threshold.

    The field is reparametrized as ``xi / |xi|**2`` so that ``log|f|``
    decreases at unit rate; the integration length is then known in
    advance and arc length is integrated alongside.

    Raises
    ------
    EscapedBall, StepLimit
    """
    cfg = cfg or FlowConfig()
    num = num or NumBivariate(f)
    x0, y0 = complex(p[0]), complex(p[1])
    f0 = num(x0, y0)
    if abs(f0) == 0:
        raise OnCurve("start point lies on the curve")
    if abs(x0) ** 2 + abs(y0) ** 2 > cfg.milnor_radius ** 2:
        raise EscapedBall("start point outside the Milnor ball")
    T = math.log(abs(f0)) - math.log(cfg.curve_threshold)
    if T <= 0:
        return TrajectoryRecord((x0, y0), np.array([[0, x0.real, x0.imag,
                                                    y0.real, y0.imag]]),
                                np.array([abs(f0)]), 0.0, (x0, y0), "on-curve")

    def rhs(_, s):
        x = complex(s[0], s[1])
        y = complex(s[2], s[3])
        a, b, _ = xi_complex(num, x, y)
        n2 = abs(a) ** 2 + abs(b) ** 2
        a, b = a / n2, b / n2
        return [a.real, a.imag, b.real, b.imag, math.sqrt(n2) / n2]

    def escape(_, s):
        return cfg.milnor_radius ** 2 - (s[0] ** 2 + s[1] ** 2
                                         + s[2] ** 2 + s[3] ** 2)
    escape.terminal = True

    state = [x0.real, x0.imag, y0.real, y0.imag, 0.0]
    ts, ys = [np.zeros(1)], [np.array(state).reshape(5, 1)]
    t0 = 0.0
    for _ in range(6):
        sol = solve_ivp(rhs, (t0, t0 + T), state, method="RK45",
                        rtol=cfg.ode_rel_tol, atol=cfg.ode_abs_tol,
                        events=escape)
        if sol.status == 1:
            raise EscapedBall("trajectory left the Milnor ball")
        if sol.status != 0 or sum(len(t) for t in ts) > cfg.max_steps:
            raise StepLimit(sol.message)
        ts.append(sol.t[1:])
        ys.append(sol.y[:, 1:])
        state = list(sol.y[:, -1])
        t0 = sol.t[-1]
        # integration error leaves log|f| slightly above target: resume
        fend = abs(num(complex(state[0], state[1]), complex(state[2], state[3])))
        if fend < cfg.curve_threshold * 2:
            break
        T = math.log(fend) - math.log(cfg.curve_threshold)
    ys = np.concatenate(ys, axis=1)
    tt = np.concatenate(ts)
    xs = ys[0] + 1j * ys[1]
    ys2 = ys[2] + 1j * ys[3]
    absf = np.array([abs(num(a, b)) for a, b in zip(xs, ys2)])
    samples = np.column_stack([tt, ys[0], ys[1], ys[2], ys[3]])
    arc = float(ys[4, -1])
    term = (complex(xs[-1]), complex(ys2[-1]))
    cls = "on-curve" if absf[-1] < cfg.curve_threshold * 2 else "step-limit"
    return TrajectoryRecord((x0, y0), samples, absf, arc, term, cls)


def fiber_points(f, t, n, seed=0, radius=0.3):
    """Points on ``{f = t}`` near the origin: random x, solve for y."""
    rng = np.random.default_rng(seed)
    out = []
    degy = max((j for _, j in f.terms), default=0)
    while len(out) < n:
        x = complex(*(rng.uniform(-radius, radius, 2)))
        coeffs = [0j] * (degy + 1)
        for (i, j), c in f.terms.items():
            coeffs[j] += complex(Fraction(c)) * x ** i
        coeffs[0] -= t
        if degy == 0:
            continue
        rs = np.roots(list(reversed(coeffs)))
        rs = [r for r in rs if abs(x) ** 2 + abs(r) ** 2 < radius ** 2 * 2]
        if rs:
            out.append((x, complex(rs[rng.integers(len(rs))])))
    return out


# ---------------------------------------------------------------------------
# potential on D_0


@dataclass
class FlowCritical:
    chart: str
    position: tuple
    kind: str
    eigenvalues: tuple
    index: int
    hessian: tuple = None
    field_jacobian: tuple = None
    vertex: int = 0

    @property
    def v(self):
        return complex(*self.position)

    def as_dict(self):
        return {"chart": self.chart, "vertex": self.vertex,
                "position": list(self.position), "kind": self.kind,
                "eigenvalues": list(self.eigenvalues), "index": self.index,
                "hessian": [list(r) for r in self.hessian] if self.hessian
                else None,
                "field_jacobian": [list(r) for r in self.field_jacobian]
                if self.field_jacobian else None}


class D0Potential:
    """``phi_0 = -log|g| + (e/2) log(1 + |v|^2)`` in both charts of D_0.

    Chart "A" uses ``g(v) = in(f)(1, v)``, chart "B" uses
    ``g(v) = in(f)(v, 1)``; ``v_B = 1 / v_A``.
    """

    def __init__(self, f):
        form = f.initial_form()
        self.e = form.total_degree()
        self.forms = {"A": form.dehomogenize("x"), "B": form.dehomogenize("y")}
        self.g = {k: root_form(p) for k, p in self.forms.items()}

    def phi(self, chart, v):
        return -self.g[chart].log_abs(v) + 0.5 * self.e * math.log1p(abs(v) ** 2)

    def grad(self, chart, v):
        """Euclidean gradient as a complex number (d/da + i d/db)."""
        L = self.g[chart].logd(v)
        return -L.conjugate() + self.e * v / (1 + abs(v) ** 2)

    def hessian(self, chart, v):
        h2 = self.g[chart].logd2(v)
        a, b = v.real, v.imag
        r2 = 1 + a * a + b * b
        e = self.e
        return np.array([
            [-h2.real + e * (r2 - 2 * a * a) / r2 ** 2,
             h2.imag - 2 * e * a * b / r2 ** 2],
            [h2.imag - 2 * e * a * b / r2 ** 2,
             h2.real + e * (r2 - 2 * b * b) / r2 ** 2]])

    def arg_g(self, chart, v):
        return self.g[chart].arg(v)


def _newton(grad, hess, v, cfg, max_iter=80):
    F = grad(v)
    for _ in range(max_iter):
        if abs(F) < cfg.newton_tol:
            return v, F
        H = hess(v)
        rhs = np.array([F.real, F.imag])
        try:
            step = np.linalg.solve(H, -rhs)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, -rhs, rcond=None)[0]
        dv = complex(step[0], step[1])
        if abs(dv) > 0.5:
            dv *= 0.5 / abs(dv)
        lam = 1.0
        while lam > 1e-6:
            vn = v + lam * dv
            try:
                Fn = grad(vn)
            except ZeroDivisionError:
                Fn = complex(math.inf)
            if abs(Fn) < abs(F) or abs(Fn) < cfg.newton_tol:
                break
            lam *= 0.5
        else:
            return v, F
        if abs(vn - v) < 1e-16 * (1 + abs(v)):
            return vn, Fn
        v, F = vn, Fn
    return v, F


def _classify(H, cfg, scale=1.0):
    ev = np.linalg.eigvalsh(H)
    tol = cfg.hessian_degenerate_tol * max(1.0, float(np.max(np.abs(ev))))
    if np.min(np.abs(ev)) < tol:
        return "degenerate", ev, 0
    if ev[0] > 0:
        return "fountain", ev, 1
    if ev[1] < 0:
        return "sink_forbidden", ev, 1
    return "saddle", ev, -1


def _vector_newton(pot, chart, v, cfg, iters=60):
    """Pseudo-inverse Newton on many starts at once.

    Directions with near-zero curvature are dropped from the step, so
    starts near a curve of critical points converge onto it instead of
    drifting along it.
    """
    g = pot.g[chart]
    e = pot.e
    for _ in range(iters):
        L = sum(k / (v - r) for r, k in g.roots) if g.roots else 0 * v
        d2 = -sum(k / (v - r) ** 2 for r, k in g.roots) if g.roots else 0 * v
        r2 = 1 + np.abs(v) ** 2
        F = -np.conj(L) + e * v / r2
        a, b = v.real, v.imag
        H = np.empty(v.shape + (2, 2))
        H[..., 0, 0] = -d2.real + e * (r2 - 2 * a * a) / r2 ** 2
        H[..., 0, 1] = H[..., 1, 0] = d2.imag - 2 * e * a * b / r2 ** 2
        H[..., 1, 1] = d2.real + e * (r2 - 2 * b * b) / r2 ** 2
        lam, Q = np.linalg.eigh(H)
        scale = np.maximum(np.abs(lam).max(axis=-1, keepdims=True), 1.0)
        keep = np.abs(lam) > 1e-8 * scale
        rhs = np.stack([F.real, F.imag], axis=-1)
        coef = np.einsum("...ji,...j->...i", Q, rhs)
        coef = np.where(keep, coef / np.where(keep, lam, 1.0), 0.0)
        step = -np.einsum("...ij,...j->...i", Q, coef)
        dv = step[..., 0] + 1j * step[..., 1]
        n = np.abs(dv)
        dv = np.where(n > 0.5, dv * 0.5 / np.maximum(n, 1e-300), dv)
        v = v + dv
        if np.all(n < 1e-15):
            break
    return v


def phi0_criticals(f, cfg=None, density=None):
    """Critical points of the potential on ``D_0`` in both charts.

    Grid multistart plus Newton on the Euclidean gradient in each chart;
    chart A keeps ``|v| <= 1``, chart B keeps ``|v_B| < 1``, and points
    are merged within ``dedup_radius``.

    Raises
    ------
    SinkDetected
        If a local maximum is found.
    DegenerateMetric
        If any critical point is degenerate (including curves of zeros).
    """
    cfg = cfg or FlowConfig()
    _check_input(f)
    pot = D0Potential(f)
    n = density or cfg.grid_density
    R = cfg.grid_radius
    grid = np.linspace(-R, R, n)
    aa, bb = np.meshgrid(grid, grid)
    starts = (aa + 1j * bb).ravel()
    starts = starts[np.abs(starts) <= R]
    found = []
    with np.errstate(all="ignore"):
        for chart in ("A", "B"):
            g = pot.g[chart]
            v0 = np.array([z for z in starts if g.nearest(z) >= 1e-3])
            vs = _vector_newton(pot, chart, v0, cfg)
            for v in vs:
                v = complex(v)
                if not np.isfinite(abs(v)) or g.nearest(v) < 1e-6:
                    continue
                if abs(pot.grad(chart, v)) > 1e3 * cfg.newton_tol:
                    continue
                if chart == "A" and abs(v) > 1 + 1e-9:
                    continue
                if chart == "B" and abs(v) >= 1 - 1e-9:
                    continue
                if any(c[0] == chart and abs(c[1] - v) < cfg.dedup_radius
                       for c in found):
                    continue
                if chart == "B" and abs(v) > 1e-3 and any(
                        c[0] == "A" and abs(c[1] - 1 / v) < cfg.dedup_radius
                        for c in found):
                    continue
                found.append((chart, v))
    out = []
    for chart, v in sorted(found, key=lambda cv: (cv[0], round(cv[1].real, 9),
                                                   round(cv[1].imag, 9))):
        H = pot.hessian(chart, v)
        kind, ev, idx = _classify(H, cfg)
        J = (1 + abs(v) ** 2) * H
        out.append(FlowCritical(chart, (v.real, v.imag), kind,
                                tuple(float(x) for x in ev), idx,
                                tuple(tuple(float(x) for x in r) for r in H),
                                tuple(tuple(float(x) for x in r) for r in J)))
    sinks = [c for c in out if c.kind == "sink_forbidden"]
    if sinks:
        raise SinkDetected(f"sink of the D0 potential at {sinks[0].position}")
    degen = [c for c in out if c.kind == "degenerate"]
    if degen:
        raise DegenerateMetric(f"{len(degen)} degenerate critical points, "
                               f"first at {degen[0].position} "
                               f"({degen[0].chart})")
    return out


def index_sum_check(criticals, t):
    """``(F_0 - S_0, 2 - t, equal)``."""
    F = sum(1 for c in criticals if c.kind == "fountain")
    S = sum(1 for c in criticals if c.kind == "saddle")
    return F - S, 2 - t, F - S == 2 - t


def d0_criticals(f, cfg=None):
    """Critical points with the index identity enforced.

    On a mismatch the grid is densified once.

    Raises
    ------
    IndexMismatch
    """
    cfg = cfg or FlowConfig()
    _, _, t = tangent_cone(f)
    crits = phi0_criticals(f, cfg)
    if index_sum_check(crits, t)[2]:
        return crits
    crits = phi0_criticals(f, cfg, density=2 * cfg.grid_density)
    lhs, rhs, ok = index_sum_check(crits, t)
    if not ok:
        raise IndexMismatch(f"F0 - S0 = {lhs} but 2 - t = {rhs}")
    return crits


@dataclass
class MorseRun:
    """One attempt at the D_0 critical points, possibly after a change."""
    f: BivariatePoly
    change: tuple
    criticals: list = None
    error: str = None

    def as_dict(self):
        from .parser import to_text
        return {"f": to_text(self.f), "change": [str(c) for c in self.change],
                "criticals": [c.as_dict() for c in self.criticals]
                if self.criticals is not None else None,
                "error": self.error}


def morse_workflow(f, cfg=None, seed=None, change=None):
    """Critical points on ``D_0``, retrying once after a linear change.

    Parameters
    ----------
    change : tuple or None
        Explicit matrix ``(a, b, c, d)`` for the retry; otherwise a random
        change drawn from ``seed`` (``cfg.seed`` when None).

    Returns
    -------
    list of MorseRun
        One run when the metric is Morse-generic, two otherwise.  The last
        run's ``f`` is the polynomial later stages should use.

    Raises
    ------
    DegenerateMetric
        If the retry is degenerate as well.
    """
    cfg = cfg or FlowConfig()
    runs = [MorseRun(f, (1, 0, 0, 1))]
    try:
        runs[0].criticals = d0_criticals(f, cfg)
        return runs
    except DegenerateMetric as exc:
        runs[0].error = str(exc)
    if change is not None:
        g, mat = linear_change(f, change), tuple(change)
    else:
        g, mat = apply_random_isometryish_change(
            f, cfg.seed if seed is None else seed)
    runs.append(MorseRun(g, mat))
    runs[1].criticals = d0_criticals(g, cfg)
    return runs


def spine_workflow(f, theta, cfg=None, seed=0, change=None):
    """Analyze, make the metric Morse-generic if needed, trace the spine.

    Returns
    -------
    (InvariantTable, list of MorseRun, NumericSpine)
    """
    from .invariants import analyze
    cfg = cfg or FlowConfig()
    runs = morse_workflow(f, cfg, seed=seed, change=change)
    g = runs[-1].f
    table = analyze(g, seed=seed)
    spine = trace_invariant_spine(table.graph, table, theta, cfg,
                                  d0_crits=runs[-1].criticals)
    return table, runs, spine


def phi0_gradient(f, v, chart="A"):
    """Analytic Euclidean gradient of the D_0 potential (complex form)."""
    return D0Potential(f).grad(chart, complex(v))


def puncture_probe(f, radius=1e-3, n=16):
    """Field direction on small circles around tangent directions.

    Returns the minimum over probes of the cosine between the field and
    the direction towards the puncture; positive means the field points
    towards every puncture.
    """
    pot = D0Potential(f)
    worst = 1.0
    for chart in ("A", "B"):
        for r, _ in pot.g[chart].roots:
            if chart == "B" and abs(r) > 1e-12:
                continue                # finite roots seen from chart A
            for k in range(n):
                v = r + radius * cmath.exp(2j * math.pi * k / n)
                w = pot.grad(chart, v)
                to_p = r - v
                worst = min(worst, (w.conjugate() * to_p).real
                            / (abs(w) * abs(to_p)))
    return worst


def poincare_hopf_d0(criticals, t):
    """Fountains, saddles and punctures on the sphere: sum must be 2."""
    F = sum(1 for c in criticals if c.kind == "fountain")
    S = sum(1 for c in criticals if c.kind == "saddle")
    return F - S + t


def linear_change(f, mat):
    """Substitute x <- a x + b y, y <- c x + d y."""
    a, b, c, d = (Fraction(z) for z in mat)
    if a * d - b * c == 0:
        raise ValueError("singular linear change")
    X = BivariatePoly({(1, 0): a, (0, 1): b}) if b else \
        BivariatePoly({(1, 0): a})
    Y = BivariatePoly({(1, 0): c, (0, 1): d}) if c else \
        BivariatePoly({(0, 1): d})
    return f.substitute(X, Y).renamed(f.names)


def apply_random_isometryish_change(f, seed=None):
    """Random invertible linear change with small integer entries.

    ``seed=None`` returns ``f`` unchanged.  Returns the new polynomial and
    the matrix ``(a, b, c, d)`` used.
    """
    if seed is None:
        return f, (1, 0, 0, 1)
    rng = random.Random(seed)
    while True:
        a, b, c, d = (rng.randint(-3, 3) for _ in range(4))
        if a * d - b * c != 0 and (b, c) != (0, 0):
            return linear_change(f, (a, b, c, d)), (a, b, c, d)


def sample_field(f, n=21, radius=2.0, chart="A"):
    """Samples of the field ``(1 + |v|^2) grad phi_0`` on a square grid.

    Returns a list of ``(v, vector)`` with points near punctures skipped;
    ``n = 0`` gives an empty list.
    """
    if n <= 0:
        return []
    pot = D0Potential(f)
    out = []
    for a in np.linspace(-radius, radius, n):
        for b in np.linspace(-radius, radius, n):
            v = complex(a, b)
            if pot.g[chart].nearest(v) < 1e-2:
                continue
            w = (1 + abs(v) ** 2) * pot.grad(chart, v)
            if np.isfinite(abs(w)):
                out.append((v, w))
    return out


def d0_field(f, v, chart="A"):
    return (1 + abs(v) ** 2) * D0Potential(f).grad(chart, v)


# ---------------------------------------------------------------------------
# potentials on invariant divisors


def _copy_path(tower, copy):
    """Mixed-radix decoding of a copy index into an embedding path."""
    degs = [p.degree() for _, p in tower.levels]
    path = []
    for d in reversed(degs):
        path.append(copy % d)
        copy //= d
    return tuple(reversed(path))


def vertex_embedding(graph, vid, dps=None):
    v = graph.vertex(vid)
    rec = graph.records[v.record]
    return Embedding(rec.tower, _copy_path(rec.tower, v.copy), dps)


def line_form(graph):
    from .invariants import generic_line
    return generic_line(graph)


@dataclass
class DivisorChartData:
    g: RootForm
    X: object                   # RootForm or None on D_0
    g_exact: UniPoly
    X_exact: object


class DivisorField:
    """Potential and sheet data of one physical invariant divisor."""

    def __init__(self, graph, table, vid):
        self.vid = vid
        self.graph = graph
        v = graph.vertex(vid)
        self.rec = graph.records[v.record]
        self.m = v.m
        self.c0 = table.rows[vid].c0
        self.is_root = vid == 0
        self.emb = vertex_embedding(graph, vid)
        self.charts = {}
        ell = line_form(graph)
        for name, ch in (("A", self.rec.chart_a), ("B", self.rec.chart_b)):
            gex = ch.funcs["f"].g()
            if self.is_root:
                Xex = None
            else:
                L = replay(ell, ch.steps, ch.tower)
                Xex = L.divide_monomial(self.c0, 0).restrict_u0()
            tower = self.rec.tower
            g = root_form(gex, tower, self.emb)
            X = root_form(Xex, tower, self.emb) if Xex is not None else None
            self.charts[name] = DivisorChartData(g, X, gex, Xex)
        # net exponents of g * X^(-m/c0); shared roots cancel exactly
        self.net = {}
        for name, d in self.charts.items():
            roots = [[r, float(k)] for r, k in d.g.roots]
            lc = d.g.lc
            if d.X is not None:
                w = self.m / self.c0
                lc = lc / d.X.lc ** w
                for r, k in d.X.roots:
                    for item in roots:
                        if abs(item[0] - r) < 1e-12 * (1 + abs(r)):
                            item[1] -= w * k
                            break
                    else:
                        roots.append([r, -w * k])
            self.net[name] = RootForm(lc, [(r, k) for r, k in roots
                                           if abs(k) > 1e-12])

    def phi(self, chart, v):
        h = self.net[chart]
        if self.is_root:
            return -h.log_abs(v) + 0.5 * self.m * math.log1p(abs(v) ** 2)
        return -h.log_abs(v)

    def grad(self, chart, v):
        """Ascending Euclidean gradient as a complex number."""
        L = self.net[chart].logd(v)
        if self.is_root:
            return -L.conjugate() + self.m * v / (1 + abs(v) ** 2)
        return -L.conjugate()

    def arg_g(self, chart, v):
        return self.charts[chart].g.arg(v)

    def punctures(self, chart):
        d = self.charts[chart]
        pts = [r for r, _ in d.g.roots]
        if d.X is not None:
            pts += [r for r, _ in d.X.roots]
        return pts


def divisor_potential(graph, table, i):
    """Potential on an invariant divisor ``D_i`` with ``i != 0``.

    Returns
    -------
    dict
        ``g`` (exact restriction of the pulled back f), ``X`` (restriction
        of a pulled back generic line divided by ``u**c0``), ``W`` the
        critical polynomial ``c0 g' X - m g X'``, the admissible critical
        points (roots of ``W`` off the zeros of ``g X``) in chart A of the
        vertex, with multiplicities and classification.

    Raises
    ------
    PolarCountMismatch
        If the number of admissible roots differs from the number of polar
        points on ``D_i``.
    """
    if i == 0 or i not in table.upsilon:
        raise ValueError("divisor_potential needs an invariant vertex != 0")
    fld = DivisorField(graph, table, i)
    d = fld.charts["A"]
    g, X = d.g_exact, d.X_exact
    m, c0 = fld.m, fld.c0
    W = g.derivative() * X * c0 - g * X.derivative() * m
    tower = fld.rec.tower
    gx = g * X
    crit = []
    count = 0
    for q, k in full_factor(W, tower if tower.levels else None):
        if gx.multiplicity_of(q) > 0:
            continue
        count += q.degree() * k
        for r in _numeric_roots(q, fld.emb):
            crit.append((r, k))
    recorded = graph.polar.get(i, 0)
    if count != recorded:
        raise PolarCountMismatch(f"vertex {i}: {count} critical points, "
                                 f"{recorded} polar points")
    out = []
    for r, k in crit:
        h2 = d.g.logd2(r) - m / c0 * d.X.logd2(r)
        H = np.array([[-h2.real, h2.imag], [h2.imag, h2.real]])
        kind = "saddle" if k == 1 else "degenerate"
        ev = np.linalg.eigvalsh(H)
        out.append(FlowCritical("A", (r.real, r.imag), kind,
                                tuple(float(x) for x in ev), -k,
                                tuple(tuple(float(x) for x in row) for row in H),
                                None, vertex=i))
    if any(c.eigenvalues[0] > 0 and c.kind != "degenerate" for c in out):
        raise SinkDetected("non-saddle critical point on an invariant divisor")
    return {"g": g, "X": X, "W": W, "criticals": out, "count": count,
            "degree_bound": max(W.degree(), 0)}


# ---------------------------------------------------------------------------
# chart maps for corner crossing


class ChartMap:
    """Forward map (u, v) -> (x, y) and its inverse for one chart copy."""

    def __init__(self, graph, vid, chart, dps):
        v = graph.vertex(vid)
        rec = graph.records[v.record]
        self.ch = rec.chart_a if chart == "A" else rec.chart_b
        self.emb = Embedding(rec.tower, _copy_path(rec.tower, v.copy), dps)
        self.dps = dps
        x, y = self.ch.coordinate_maps()
        self.x = [(i, j, self.emb(c)) for (i, j), c in x.terms.items()]
        self.y = [(i, j, self.emb(c)) for (i, j), c in y.terms.items()]
        self.steps = [(s.kind, self.emb(s.c) if s.kind == "T" else 0)
                      for s in self.ch.steps]

    def forward(self, u, v):
        X = sum(c * u ** i * v ** j for i, j, c in self.x)
        Y = sum(c * u ** i * v ** j for i, j, c in self.y)
        return X, Y

    def inverse(self, x, y):
        p, q = x, y
        for kind, c in self.steps:
            if kind == "A":
                p, q = p, q / p
            elif kind == "B":
                p, q = q, p / q
            else:
                q = q - c
        return p, q


def corner_location(graph, a, b):
    """Chart of ``D_a`` and numeric coordinate of the corner with ``D_b``.

    The later of the two divisors was created at a point of the earlier
    one; in its own charts the earlier divisor is a coordinate axis, while
    in the charts of the earlier one the corner is read off from the first
    substitution of the later chain.
    """
    va, vb = graph.vertex(a), graph.vertex(b)
    ra, rb = graph.records[va.record], graph.records[vb.record]
    if ra.rid > rb.rid:
        if ra.chart_a.dv == rb.rid:
            return "A", 0j
        if ra.chart_b.dv == rb.rid:
            return "B", 0j
        raise ValueError(f"{b} is not a parent divisor of {a}")
    keys_b = [s.key() for s in rb.chart_a.steps]
    for name, ch in (("A", ra.chart_a), ("B", ra.chart_b)):
        ka = [s.key() for s in ch.steps]
        if keys_b[:len(ka)] == ka and len(keys_b) > len(ka):
            nxt = rb.chart_a.steps[len(ka)]
            emb = Embedding(rb.tower, _copy_path(rb.tower, vb.copy))
            c = complex(emb(nxt.c)) if nxt.kind == "T" else 0j
            return name, c
    raise ValueError(f"no chart of {a} contains the center of {b}")


# ---------------------------------------------------------------------------
# spine tracing


@dataclass
class SpineNode:
    key: tuple
    kind: str                 # repeller, saddle, pronged
    vertex: int
    chart: str
    position: tuple
    valence: int = 0

    def as_dict(self):
        return {"key": [str(k) for k in self.key], "kind": self.kind,
                "vertex": self.vertex, "chart": self.chart,
                "position": list(self.position), "valence": self.valence}


@dataclass
class SpineEdge:
    a: tuple
    b: tuple
    path: list                # (vertex, chart, complex v) samples
    tie: bool = False

    def as_dict(self):
        return {"from": [str(k) for k in self.a], "to": [str(k) for k in self.b],
                "n_samples": len(self.path), "tie": self.tie}


@dataclass
class NumericSpine:
    theta: float
    nodes: list
    edges: list
    b1: int
    n_components: int
    flags: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def V(self):
        return len(self.nodes)

    @property
    def E(self):
        return len(self.edges)

    def as_dict(self):
        return {"theta": self.theta, "V": self.V, "E": self.E, "b1": self.b1,
                "n_components": self.n_components, "flags": list(self.flags),
                "nodes": [n.as_dict() for n in self.nodes],
                "edges": [e.as_dict() for e in self.edges]}


_DP = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0)
_DP_E = (71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525,
         -1 / 40)


def _dp_step(F, v, h):
    ks = []
    for row in _DP:
        z = v + h * sum(a * k for a, k in zip(row, ks))
        ks.append(F(z))
    new = v + h * sum(b * k for b, k in zip(_DP_B, ks))
    err = h * sum(e * k for e, k in zip(_DP_E, ks))
    return new, abs(err)


class _Tracer:
    def __init__(self, graph, table, theta, cfg, d0_crits):
        self.graph, self.table, self.theta, self.cfg = graph, table, theta, cfg
        self.fields = {vid: DivisorField(graph, table, vid)
                       for vid in sorted(table.upsilon)}
        self.parent = {}
        for e in table.edges:
            if not e.to_arrow and e.dst in table.upsilon:
                self.parent[e.dst] = e.src
        self.incoming = {vid: corner_location(graph, vid, self.parent[vid])
                         for vid in self.fields if vid != 0}
        self.crits = {0: [(c.chart, c.v, c.kind) for c in d0_crits]}
        for vid in self.fields:
            if vid == 0:
                continue
            data = divisor_potential(graph, table, vid)
            self.crits[vid] = [("A", c.v, c.kind) for c in data["criticals"]]
        self.flags = []
        self.maps = {}
        self.red_corners = {}

    # -- integration on one divisor
    def descend(self, vid, chart, v, sigma, skip=None):
        """Descend from (v, sigma) until a fountain or the incoming corner.

        Returns (vid, chart, v, sigma, event, info, path).
        """
        fld = self.fields[vid]
        cfg = self.cfg
        path = [(vid, chart, v)]
        arc = 0.0
        h = cfg.max_step * 0.1

        def F(z, ch=None):
            gr = fld.grad(ch or chart, z)
            n = abs(gr)
            return -gr / n if n > 0 else 0j

        steps = 0
        near_saddle = None
        flagged = False
        while True:
            steps += 1
            if steps > cfg.max_steps or arc > cfg.max_arc_length:
                raise TraceDivergence(f"no endpoint on D_{vid} from {v} (steps {steps}, arc {arc:.3g}, h {h:.3g})")
            # endpoint tests
            if vid != 0:
                tc = _pos(*self.incoming[vid], chart)
                if tc is not None and abs(v - tc) < max(cfg.stop_radius * 100,
                                                        1e-6):
                    tch = self.incoming[vid][0]
                    if tch != chart:
                        sigma += cmath.phase(v)
                        v, chart = 1 / v, tch
                    return vid, chart, v, sigma, "corner", None, path
            for k, (cch, cv, kind) in enumerate(self.crits[vid]):
                pos = _pos(cch, cv, chart)
                if pos is None:
                    continue
                dist = abs(v - pos)
                if kind == "fountain" and dist < cfg.fountain_radius:
                    if cch != chart:
                        sigma += cmath.phase(v)
                        v, chart = 1 / v, cch
                    return vid, chart, v, sigma, "fountain", k, path
                if kind != "fountain" and dist < cfg.tie_radius and \
                        (skip is None or k != skip or arc > 10 * cfg.tie_radius):
                    near_saddle = k
            for k, rc in enumerate(self.red_corners.get(vid, ())):
                pos = _pos(rc["chart"], rc["c"], chart)
                if pos is None or abs(v - pos) >= cfg.tie_radius or \
                        arc < 10 * cfg.tie_radius:
                    continue
                if rc["chart"] != chart:
                    sigma += cmath.phase(v)
                    v, chart = 1 / v, rc["chart"]
                if rc["reds"] >= 2:
                    return vid, chart, v, sigma, "dish", k, path
                if not flagged:
                    self.flags.append(f"trajectory on D_{vid} passes through "
                                      f"a regular corner point")
                flagged = True
            if near_saddle is not None and abs(fld.grad(chart, v)) < 1e-6:
                cch = self.crits[vid][near_saddle][0]
                if cch != chart:
                    sigma += cmath.phase(v)
                    v, chart = 1 / v, cch
                return vid, chart, v, sigma, "saddle", near_saddle, path
            # chart switch
            if abs(v) > 2.0:
                w = 1 / v
                sigma = sigma + cmath.phase(v)
                chart = "B" if chart == "A" else "A"
                v = w
                path.append((vid, chart, v))
                continue
            # adaptive step, limited near the target corner
            hmax = cfg.max_step
            if vid != 0:
                tc = _pos(*self.incoming[vid], chart)
                if tc is not None:
                    hmax = min(hmax, 0.5 * abs(v - tc))
            for cch, cv, kind in self.crits[vid]:
                pos = _pos(cch, cv, chart)
                if pos is not None:
                    hmax = min(hmax, max(0.5 * abs(v - pos), 1e-7))
            for rc in self.red_corners.get(vid, ()):
                pos = _pos(rc["chart"], rc["c"], chart)
                if pos is not None:
                    hmax = min(hmax, max(0.5 * abs(v - pos), 0.1 * cfg.tie_radius))
            h = min(h, hmax)
            while True:
                new, err = _dp_step(F, v, h)
                tol = 1e-9 * h + 1e-13
                if err <= tol or h < 1e-12:
                    break
                h *= max(0.2, 0.9 * (tol / err) ** 0.2)
            dg = fld.arg_g(chart, new) - fld.arg_g(chart, v)
            dg = (dg + math.pi) % (2 * math.pi) - math.pi
            sigma -= dg / fld.m
            arc += abs(new - v)
            v = new
            path.append((vid, chart, v))
            if err > 0:
                h = min(hmax, h * min(5.0, 0.9 * (1e-9 * h / err) ** 0.2))
            else:
                h = min(hmax, 2 * h)
            if near_saddle is not None:
                if not flagged:
                    self.flags.append(f"trajectory on D_{vid} passes within "
                                      f"{cfg.tie_radius} of a critical point")
                flagged = True
                near_saddle = None

    # -- crossing an invariant corner from D_j to its parent D_k
    def cross(self, j, chart, v, sigma):
        k = self.parent[j]
        tch, tc = self.incoming[j]
        fj = self.fields[j]
        kch, kc = corner_location(self.graph, k, j)
        delta = abs(v - tc)
        # order of g_j at the corner gives the twisting exponent of u_j
        gj = self.fields[j].charts[tch].g
        ord_g = sum(mult for r, mult in gj.roots if abs(r - tc) < 1e-8)
        kk = max(0, (self.graph.vertex(k).m - ord_g) // fj.m)
        K = kk + 3
        dps = 40 + int(8 * K * max(1.0, -math.log10(delta)))
        key = (j, tch, k, kch, dps)
        if key not in self.maps:
            self.maps[key] = (ChartMap(self.graph, j, tch, dps),
                              ChartMap(self.graph, k, kch, dps))
        mj, mk = self.maps[key]
        with mpmath.workdps(dps):
            rho = mpmath.mpf(delta) ** K
            u = rho * mpmath.expj(sigma)
            vv = mpmath.mpc(v)
            x, y = mj.forward(u, vv)
            uk, vk = mk.inverse(x, y)
            kc_mp = mpmath.mpc(kc)
            dv = vk - kc_mp
            sig_k = float(mpmath.arg(uk))
            psi = float(mpmath.arg(dv))
        fk = self.fields[k]
        r0 = max(self.cfg.start_radius * 10, 1e-5)
        start = kc + r0 * cmath.exp(1j * psi)
        # radial jump: arg g changes only through the regular part
        gk = fk.charts[kch].g
        reg = [(r, m) for r, m in gk.roots if abs(r - kc) > 1e-8]
        dvk = complex(dv)
        d_reg = sum(m * (cmath.phase(start - r) - cmath.phase(kc + dvk - r))
                    for r, m in reg)
        sig_start = sig_k - d_reg / fk.m
        return k, kch, start, sig_start

    def run_to_repeller(self, vid, chart, v, sigma, skip=None):
        path = []
        tie = False
        while True:
            vid, chart, v, sigma, ev, info, seg = self.descend(vid, chart, v,
                                                               sigma, skip)
            path.extend(seg)
            skip = None
            if ev == "fountain":
                return ("fountain", info, self.lift_label(0, chart,
                                                          self.crits[0][info][1],
                                                          v, sigma)), path, tie
            if ev == "dish":
                rc = self.red_corners[vid][info]
                psi = cmath.phase(v - rc["c"])
                return rc["key"](self.circle_label(rc, psi, sigma)), path, True
            if ev == "saddle":
                tie = True
                cch, cv, _ = self.crits[vid][info]
                return ("saddle", vid, info,
                        self.lift_label(vid, chart, cv, v, sigma)), path, tie
            vid, chart, v, sigma = self.cross(vid, chart, v, sigma)

    def circle_label(self, rc, psi, sigma):
        """Index of the boundary circle through a point of a corner torus."""
        n = rc["n"]
        T = (rc["mi"] // n) * psi + (rc["mj"] // n) * (sigma - rc["kk"] * psi)
        return int(round((T - rc["ref"]) * n / (2 * math.pi))) % n

    def lift_label(self, vid, chart, p, v, sigma):
        fld = self.fields[vid]
        m = fld.m
        ref = fld.arg_g(chart, p)
        dg = fld.arg_g(chart, v) - ref
        dg = (dg + math.pi) % (2 * math.pi) - math.pi
        base = (self.theta - ref - dg) / m
        s = (sigma - base) * m / (2 * math.pi)
        return int(round(s)) % m

    def saddle_starts(self, vid):
        """Descending directions at each critical point (circle sampling)."""
        fld = self.fields[vid]
        out = []
        for k, (chart, p, kind) in enumerate(self.crits[vid]):
            if kind == "fountain":
                continue
            r = max(self.cfg.start_radius * 100, 1e-4)
            dirs = _local_min_dirs(lambda z: fld.phi(chart, z), p, r)
            out.append((k, chart, p, [p + r * cmath.exp(1j * a) for a in dirs]))
        return out

    def red_starts(self, j, i):
        """Red points on the corner of invariant ``D_j`` with ``D_i``."""
        fld = self.fields[j]
        chart, c = corner_location(self.graph, j, i)
        r = max(self.cfg.start_radius, 1e-6)
        if j == 0:
            dirs = _local_min_dirs(lambda z: fld.phi(chart, z), c, r * 100)
            ords = 0
        else:
            d = fld.charts[chart]
            og = sum(mm for rr, mm in d.g.roots if abs(rr - c) < 1e-8)
            ox = sum(mm for rr, mm in d.X.roots if abs(rr - c) < 1e-8)
            qexp = og - fld.m / fld.c0 * ox
            if abs(qexp) > 1e-9:
                raise TraceDivergence(f"corner {j}-{i} is not balanced")
            dirs = _local_min_dirs(lambda z: fld.phi(chart, z), c, r * 100)
            ords = og
        return chart, c, dirs, ords

    def lift_start(self, vid, chart, p, start):
        """Sheets at a start point, continued from the reference point p."""
        fld = self.fields[vid]
        m = fld.m
        ref = fld.arg_g(chart, p) if fld.charts[chart].g.nearest(p) > 1e-12 \
            else None
        out = []
        ag = fld.arg_g(chart, start)
        for s in range(m):
            out.append((self.theta - ag) / m + 2 * math.pi * s / m)
        return out


def _pos(cch, cv, chart):
    """Coordinate of a chart point in ``chart`` (None at infinity)."""
    if cch == chart:
        return cv
    if abs(cv) < 1e-300:
        return None
    return 1 / cv


def _local_min_dirs(fn, center, r, n=720):
    """Angles of local minima of ``fn`` on a circle, golden-refined."""
    angs = np.linspace(0, 2 * math.pi, n, endpoint=False)
    vals = np.array([fn(center + r * cmath.exp(1j * a)) for a in angs])
    out = []
    for k in range(n):
        if vals[k] < vals[k - 1] and vals[k] <= vals[(k + 1) % n]:
            lo, hi = angs[k] - 2 * math.pi / n, angs[k] + 2 * math.pi / n
            g = (math.sqrt(5) - 1) / 2
            for _ in range(60):
                a1 = hi - g * (hi - lo)
                a2 = lo + g * (hi - lo)
                if fn(center + r * cmath.exp(1j * a1)) < \
                        fn(center + r * cmath.exp(1j * a2)):
                    hi = a2
                else:
                    lo = a1
            out.append(0.5 * (lo + hi))
    return out


class _UF:
    def __init__(self):
        self.p = {}

    def find(self, a):
        self.p.setdefault(a, a)
        while self.p[a] != a:
            self.p[a] = self.p[self.p[a]]
            a = self.p[a]
        return a

    def union(self, a, b):
        self.p[self.find(a)] = self.find(b)


def trace_invariant_spine(graph, table, theta, cfg=None, d0_crits=None,
                          fiber=None):
    """Numerically traced spine of the invariant fiber at angle ``theta``.

    Saddle lifts and collapsed Petri dishes (pronged vertices) send their
    stable manifolds backward along the descending flow of the divisor
    potentials; trajectories reaching an invariant corner continue on the
    upstream divisor through the chart transition, and end at lifts of the
    fountains of ``D_0``.

    Raises
    ------
    TraceDivergence
    ChiMismatch
        If ``V - E != 1 - mu``.
    """
    from .fiber0 import fiber_model
    from .invariants import Check
    cfg = cfg or FlowConfig()
    if d0_crits is None:
        d0_crits = d0_criticals(graph.f, cfg)
    tr = _Tracer(graph, table, theta, cfg, d0_crits)
    fm = fiber or fiber_model(graph, table)
    nodes, edges = {}, []
    m0 = graph.vertex(0).m
    for k, (chart, p, kind) in enumerate(tr.crits[0]):
        if kind == "fountain":
            for s in range(m0):
                key = ("fountain", k, s)
                nodes[key] = SpineNode(key, "repeller", 0, chart,
                                       (p.real, p.imag))

    def add_edge(a, b, path, tie):
        edges.append(SpineEdge(a, b, path, tie))
        nodes[a].valence += 1
        if b in nodes:
            nodes[b].valence += 1
        if tie:
            tr.flags.append(f"tie on edge {a} -> {b}")

    # collapsed Petri dishes: red points and circle labels
    red_runs = []
    for dish in fm.dishes:
        j, i = dish.attach, dish.root
        chart, c, dirs, ords = tr.red_starts(j, i)
        n = dish.n_dishes
        mi, mj = graph.vertex(i).m, graph.vertex(j).m
        rc = {"chart": chart, "c": c, "n": n, "mi": mi, "mj": mj,
              "kk": (mi - ords) // mj, "reds": dish.reds, "ref": 0.0,
              "key": (lambda lab, i=i, j=j: ("dish", i, j, lab))}
        tr.red_corners.setdefault(j, []).append(rc)
        if dish.reds < 2:
            continue
        r0 = max(cfg.start_radius, 1e-6)
        reds = []
        for psi in dirs:
            st = c + r0 * cmath.exp(1j * psi)
            for sig in tr.lift_start(j, chart, c, st):
                reds.append((st, sig, psi))
        T0 = tr.circle_label
        n_ = rc["n"]
        first = ((mi // n_) * reds[0][2]
                 + (mj // n_) * (reds[0][1] - rc["kk"] * reds[0][2]))
        rc["ref"] = first
        counts = {}
        for st, sig, psi in reds:
            lab = T0(rc, psi, sig)
            key = rc["key"](lab)
            if key not in nodes:
                nodes[key] = SpineNode(key, "pronged", i, chart, (c.real, c.imag))
            counts[lab] = counts.get(lab, 0) + 1
            red_runs.append((key, j, chart, st, sig))
        if sorted(counts.values()) != [dish.reds] * n:
            tr.flags.append(f"red points per circle at {j}-{i}: {counts}")
    # saddles on invariant divisors (including D_0)
    for vid in sorted(tr.fields):
        fld = tr.fields[vid]
        for k, chart, p, starts in tr.saddle_starts(vid):
            for s in range(fld.m):
                key = ("saddle", vid, k, s)
                nodes[key] = SpineNode(key, "saddle", vid, chart,
                                       (p.real, p.imag))
            for st in starts:
                sheets = tr.lift_start(vid, chart, p, st)
                for sig in sheets:
                    s = tr.lift_label(vid, chart, p, st, sig)
                    end, path, tie = tr.run_to_repeller(vid, chart, st, sig,
                                                        skip=k)
                    add_edge(("saddle", vid, k, s), end, path, tie)
    for key, j, chart, st, sig in red_runs:
        end, path, tie = tr.run_to_repeller(j, chart, st, sig)
        add_edge(key, end, path, tie)
    for e in edges:
        if e.b not in nodes:
            raise TraceDivergence(f"edge ends at unknown node {e.b}")
    uf = _UF()
    for key in nodes:
        uf.find(key)
    for e in edges:
        uf.union(e.a, e.b)
    comps = len({uf.find(k) for k in nodes})
    V, E = len(nodes), len(edges)
    b1 = E - V + comps
    spine = NumericSpine(theta, list(nodes.values()), edges, b1, comps,
                         tr.flags)
    mu = table.mu
    spine.checks.append(Check("spine V - E = 1 - mu", V - E, 1 - mu,
                              V - E == 1 - mu))
    spine.checks.append(Check("spine b1 = mu", b1, mu, b1 == mu))
    if fm.census is not None and fm.census.vertices is not None:
        spine.checks.append(Check("spine vertex count matches census", V,
                                  fm.census.vertices,
                                  V == fm.census.vertices))
    if V - E != 1 - mu:
        raise ChiMismatch(f"V - E = {V - E} but 1 - mu = {1 - mu}")
    return spine
