"""Embedded resolution of plane curve singularities by point blow-ups.

The engine works in local charts.  At each infinitely near point it keeps
the field of definition, the chain of elementary substitutions leading to
the point, the exceptional divisors through it (``{u=0}`` and ``{v=0}``)
and, for every tracked function ``h``, a factorization of the total
transform ``u**a * v**b * S``.

Elementary substitutions
------------------------
``A``: (u, v) -> (u, u*v), the exceptional divisor is ``{u=0}``.
``B``: (u, v) -> (u*v, u), the exceptional divisor is ``{u=0}``.
``T``: (u, v) -> (u, v + c), recenter along ``{u=0}``.

Points whose coordinates are not rational over the current field are
handled once over the extension generated by their minimal polynomial; the
resulting records stand for ``tower.degree`` Galois-conjugate copies and are
expanded into physical vertices at the end.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (BivariatePoly, FieldTower, UniPoly, branch_factors,
                      extend_tower, full_factor, irreducible_factor,
                      is_reduced, rational_value, reduced, squarefree_factor,
                      uni_to_str, DEFAULT_MAX_EXT_DEGREE)

UV = ("u", "v")
MAX_BLOWUPS = 4000


class NotSingularAtOrigin(ValueError):
    """f does not vanish at the origin."""


class ZeroPolynomial(ValueError):
    """The input polynomial is identically zero."""


class GenericityFailure(RuntimeError):
    """No generic polar direction found within the retry budget."""


class ResolutionError(RuntimeError):
    """Internal consistency failure of the blow-up engine."""


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class Step:
    kind: str            # "A", "B" or "T"
    c: object = 0        # translation constant for "T"

    def key(self):
        from .algebra import _key
        return (self.kind, _key(self.c))


def apply_step(h, step):
    if step.kind == "A":
        return h.blowup_a()
    if step.kind == "B":
        return h.blowup_b()
    return h.translate_v(step.c)


def replay(h, steps, tower=None):
    """Pull back ``h`` (in x, y) through a chain of substitutions."""
    g = h.renamed(UV)
    if tower is not None:
        g = g.coerce(tower)
    for s in steps:
        g = apply_step(g, s)
    return g


@dataclass
class Tracked:
    """Total transform ``u**a * v**b * S`` of one function in a chart."""
    a: int
    b: int
    S: BivariatePoly

    def g(self):
        """Restriction ``v**b * S(0, v)`` to the divisor ``{u=0}``."""
        return UniPoly([0] * self.b + list(self.S.restrict_u0().coeffs))


@dataclass
class Chart:
    """Coordinates (u, v) near a divisor, with ``{u=0}`` exceptional.

    Attributes
    ----------
    tower : FieldTower
    steps : tuple of Step
        Substitutions from (x, y) to (u, v).
    du, dv : int or None
        Records of the divisors ``{u=0}`` and ``{v=0}`` (None if absent).
    funcs : dict
        ``name -> Tracked`` for "f", "fr" (reduced f) and "P" (polar).
    """
    tower: FieldTower
    steps: tuple
    du: object
    dv: object
    funcs: dict

    def coordinate_maps(self):
        """Closed forms x(u, v), y(u, v) as exact polynomials."""
        x = BivariatePoly.var(0, UV)
        y = BivariatePoly.var(1, UV)
        return replay(x.renamed(("x", "y")), self.steps, self.tower), \
            replay(y.renamed(("x", "y")), self.steps, self.tower)

    def signature(self):
        return tuple(s.key() for s in self.steps)


@dataclass
class PointRecord:
    """A point on a divisor record: arrow, polar intersection or center."""
    kind: str            # "arrow", "polar", "center"
    chart: str           # "A" or "B"
    factor: UniPoly      # irreducible factor in v of the point(s)
    degree: int          # number of points per copy of the divisor
    mult: int = 1        # arrow multiplicity m_a
    child: object = None


@dataclass
class Record:
    """One exceptional divisor, possibly standing for conjugate copies."""
    rid: int
    tower: FieldTower
    chart_a: Chart
    chart_b: Chart
    m: int
    self_int: int
    is_min: bool
    center_mult: dict            # name -> multiplicity of S at the center
    parents: tuple               # records of du, dv at the center
    corner: bool
    points: list = field(default_factory=list)
    tangent: str = ""

    @property
    def conj(self):
        return self.tower.degree


@dataclass
class Vertex:
    vid: int
    kind: str            # "exceptional" or "arrowhead"
    m: int
    record: object       # record id (exceptional) or None
    copy: int
    self_intersection: object = None
    conjugacy_degree: int = 1
    tangent_class: str = ""
    parent_vertex: object = None
    is_min: bool = True


@dataclass
class ResolutionGraph:
    """Dual graph of an embedded resolution with per-record chart data.

    ``vertices`` holds physical vertices (conjugate copies expanded),
    exceptional ones first in record order, then arrowheads.  ``edges`` is
    a list of unordered pairs of vertex ids.  ``polar`` maps an exceptional
    vertex id to its number of polar intersection points on ``D_i``.
    """
    f: BivariatePoly
    f_red: BivariatePoly
    mode: str
    records: list
    vertices: list
    edges: list
    polar: dict
    polar_factors: dict
    w: object = None
    polar_poly: object = None
    center_log: list = field(default_factory=list)
    min_map: dict = field(default_factory=dict)
    attempts: list = field(default_factory=list)

    def exceptional(self):
        return [v for v in self.vertices if v.kind == "exceptional"]

    def arrows(self):
        return [v for v in self.vertices if v.kind == "arrowhead"]

    def neighbors(self, vid):
        out = []
        for a, b in self.edges:
            if a == vid:
                out.append(b)
            elif b == vid:
                out.append(a)
        return sorted(out)

    def degree(self, vid):
        return len(self.neighbors(vid))

    def vertex(self, vid):
        return self.vertices[vid]

    def record_of(self, vid):
        return self.records[self.vertices[vid].record]

    def chart(self, vid, which="A"):
        r = self.record_of(vid)
        return r.chart_a if which == "A" else r.chart_b

    def copies(self, rid):
        return [v.vid for v in self.vertices
                if v.kind == "exceptional" and v.record == rid]

    def shape(self):
        """Sorted (m, degree, polar count) triples, for genericity tests."""
        return sorted((v.m, self.degree(v.vid), self.polar.get(v.vid, 0))
                      for v in self.exceptional())


# ---------------------------------------------------------------------------
# tangent cone


def tangent_cone(f):
    """Tangent lines of ``{f = 0}`` at the origin.

    Returns
    -------
    lines : list of (str, int, int)
        ``(description, multiplicity, number of conjugate lines)``.
    e : int
        Multiplicity of ``f`` at the origin.
    t : int
        Number of distinct tangent lines, conjugates counted individually.
    """
    _check_input(f)
    form = f.initial_form()
    e = form.total_degree()
    g = form.dehomogenize("x")
    lines = []
    for q, k in full_factor(g):
        lines.append((_line_text(q), k, q.degree()))
    if g.degree() < e:
        lines.append(("x = 0", e - g.degree(), 1))
    t = sum(d for _, _, d in lines)
    return lines, e, t


def _line_text(q):
    if q.degree() == 1:
        c = -q.coeffs[0]
        return "y = 0" if c == 0 else f"y = {c}*x"
    return f"{uni_to_str(q, 'v')} = 0 at v = y/x"


def _check_input(f):
    if f.is_zero():
        raise ZeroPolynomial("f is the zero polynomial")
    if f.terms.get((0, 0), 0) != 0:
        raise NotSingularAtOrigin("f(0, 0) != 0")


# ---------------------------------------------------------------------------
# engine


class _Engine:
    def __init__(self, f, polar=None, max_ext_degree=DEFAULT_MAX_EXT_DEGREE,
                 mode="min"):
        _check_input(f)
        self.f = f
        self.f_red = reduced(f)
        self.polar = polar
        self.mode = mode
        self.tower0 = FieldTower.rationals(max_ext_degree)
        self.records = []
        self.edges = []          # record-level unordered pairs
        self.center_log = []     # (rid, name -> mult, conj)
        self.count = 0

    def active(self):
        return ("fr", "P") if self.polar is not None else ("fr",)

    def run(self):
        funcs = {"f": Tracked(0, 0, self.f.renamed(UV)),
                 "fr": Tracked(0, 0, self.f_red.renamed(UV))}
        if self.polar is not None:
            funcs["P"] = Tracked(0, 0, self.polar.renamed(UV))
        origin = Chart(self.tower0, (), None, None, funcs)
        self.blowup(origin, is_min=True, tangent="")
        return self

    # -- blow-up of the center of a local chart
    def blowup(self, local, is_min, tangent):
        self.count += 1
        if self.count > MAX_BLOWUPS:
            raise ResolutionError("blow-up budget exhausted")
        rid = len(self.records)
        K = local.tower
        mult = {}
        fa, fb = {}, {}
        for name, tr in local.funcs.items():
            e = tr.S.ord()
            mult[name] = e
            S_a = tr.S.blowup_a().divide_monomial(e, 0)
            S_b = tr.S.blowup_b().divide_monomial(e, 0)
            fa[name] = Tracked(tr.a + tr.b + e, tr.b, S_a)
            fb[name] = Tracked(tr.a + tr.b + e, tr.a, S_b)
        chart_a = Chart(K, local.steps + (Step("A"),), rid, local.dv, fa)
        chart_b = Chart(K, local.steps + (Step("B"),), rid, local.du, fb)
        parents = tuple(p for p in (local.du, local.dv) if p is not None)
        rec = Record(rid, K, chart_a, chart_b, fa["f"].a, -1, is_min, mult,
                     parents, len(parents) == 2, tangent=tangent)
        self.records.append(rec)
        self.center_log.append((rid, dict(mult), K.degree))
        for p in parents:
            pr = self.records[p]
            pr.self_int -= K.degree // pr.conj
        if len(parents) == 2:
            pair = _pair(*parents)
            if pair not in self.edges:
                raise ResolutionError("corner blow-up without an edge")
            self.edges.remove(pair)
        for p in parents:
            self.edges.append(_pair(p, rid))
        if rid == 0:
            rec.tangent = ""
        self.examine(rec)
        return rid

    def examine(self, rec):
        self._examine_a(rec)
        self._examine_b(rec)

    def _restricted(self, chart, names):
        out = UniPoly([1])
        for n in names:
            out = out * chart.funcs[n].S.restrict_u0()
        return out

    def _examine_a(self, rec):
        ch = rec.chart_a
        K = ch.tower
        R = self._restricted(ch, self.active())
        if R.is_zero():
            raise ResolutionError("tracked function vanishes on a divisor")
        vpoly = UniPoly([0, 1])
        for q, k in sorted(full_factor(R, K if K.levels else None),
                           key=lambda qk: (qk[0].degree(), repr(qk[0]))):
            is_zero_root = (q == vpoly)
            if is_zero_root and ch.dv is not None:
                # corner with the divisor {v=0}
                fr0 = ch.funcs["fr"].S.restrict_u0().order_at_zero() > 0
                child = self.blowup(Chart(K, ch.steps, ch.du, ch.dv,
                                          dict(ch.funcs)),
                                    is_min=fr0 and rec.is_min,
                                    tangent=rec.tangent)
                rec.points.append(PointRecord("center", "A", q, 1, child=child))
                continue
            self._smooth_point(rec, ch, "A", q, k)

    def _examine_b(self, rec):
        ch = rec.chart_b
        K = ch.tower
        R = self._restricted(ch, self.active())
        k0 = R.order_at_zero()
        vpoly = UniPoly([0, 1])
        if ch.dv is not None:
            if k0 > 0:
                fr0 = ch.funcs["fr"].S.restrict_u0().order_at_zero() > 0
                child = self.blowup(Chart(K, ch.steps, ch.du, ch.dv,
                                          dict(ch.funcs)),
                                    is_min=fr0 and rec.is_min,
                                    tangent=rec.tangent)
                rec.points.append(PointRecord("center", "B", vpoly, 1,
                                              child=child))
            return
        if k0 > 0:
            self._smooth_point(rec, ch, "B", vpoly, k0)

    def _smooth_point(self, rec, ch, which, q, k):
        """Handle the point(s) ``q(v) = 0`` on ``{u=0}`` away from corners."""
        K = ch.tower
        frq = ch.funcs["fr"].S.restrict_u0().multiplicity_of(q)
        if k == 1:
            if frq == 1:
                ma = ch.funcs["f"].S.restrict_u0().multiplicity_of(q)
                rec.points.append(PointRecord("arrow", which, q, q.degree(),
                                              mult=ma))
            else:
                rec.points.append(PointRecord("polar", which, q, q.degree()))
            return
        tangent = rec.tangent
        if rec.rid == 0:
            tangent = "x = 0" if which == "B" else _line_text(q)
        if q.degree() == 1:
            c = -q.coeffs[0]
            K2 = K
        else:
            K2 = extend_tower(K, q, name=f"a{K.depth + 1}")
            c = K2.gen()
        funcs = {}
        for name, tr in ch.funcs.items():
            S = tr.S.coerce(K2) if K2 is not K else tr.S
            if c != 0:
                S = S.translate_v(c)
                if tr.b:
                    lin = BivariatePoly({(0, 1): 1, (0, 0): c}, UV)
                    S = S * lin ** tr.b
                funcs[name] = Tracked(tr.a, 0, S)
            else:
                funcs[name] = Tracked(tr.a, tr.b, S)
        steps = ch.steps + ((Step("T", c),) if c != 0 else ())
        local = Chart(K2, steps, ch.du, ch.dv if c == 0 else None, funcs)
        child = self.blowup(local, is_min=(frq >= 2) and rec.is_min,
                            tangent=tangent)
        rec.points.append(PointRecord("center", which, q, q.degree(),
                                      child=child))


def _pair(a, b):
    return (a, b) if a < b else (b, a)


# ---------------------------------------------------------------------------
# physical expansion


def _expand(engine, mode):
    recs = engine.records
    vertices = []
    first = {}
    for r in recs:
        first[r.rid] = len(vertices)
        for k in range(r.conj):
            vertices.append(Vertex(len(vertices), "exceptional", r.m, r.rid, k,
                                   r.self_int, r.conj, r.tangent, None,
                                   r.is_min))
    edges = []

    def copy_id(rid, k_child, c_child):
        r = recs[rid]
        return first[rid] + k_child // (c_child // r.conj)

    for a, b in engine.edges:
        lo, hi = (a, b) if recs[a].conj <= recs[b].conj else (b, a)
        ch = recs[hi].conj
        for k in range(ch):
            edges.append(_pair(first[hi] + k, copy_id(lo, k, ch)))
    polar, polar_factors = {}, {}
    for r in recs:
        for k in range(r.conj):
            vid = first[r.rid] + k
            polar[vid] = 0
            polar_factors[vid] = []
    for r in recs:
        for pt in r.points:
            if pt.kind == "arrow":
                for k in range(r.conj):
                    host = first[r.rid] + k
                    for _ in range(pt.degree):
                        aid = len(vertices)
                        vertices.append(Vertex(aid, "arrowhead", pt.mult, None,
                                               0, None, 1, r.tangent, host,
                                               True))
                        edges.append(_pair(host, aid))
            elif pt.kind == "polar":
                for k in range(r.conj):
                    host = first[r.rid] + k
                    polar[host] += pt.degree
                    polar_factors[host].append((pt.chart, pt.factor))
    for v in vertices:
        if v.kind == "exceptional" and v.record != 0 and v.parent_vertex is None:
            r = recs[v.record]
            # parent = divisor whose chart contains the center, first listed
            if r.parents:
                v.parent_vertex = copy_id(r.parents[0], v.copy, r.conj)
    return vertices, sorted(edges), polar, polar_factors


def _build(engine, mode, w=None):
    vertices, edges, polar, pf = _expand(engine, mode)
    g = ResolutionGraph(engine.f, engine.f_red, mode, engine.records, vertices,
                        edges, polar, pf, w=w, polar_poly=engine.polar,
                        center_log=engine.center_log)
    _check_tree(g)
    return g


def _check_tree(g):
    n = len(g.vertices)
    if len(g.edges) != n - 1:
        raise ResolutionError("dual graph is not a tree")
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in g.neighbors(v):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    if len(seen) != n:
        raise ResolutionError("dual graph is disconnected")


# ---------------------------------------------------------------------------
# public operations


def resolve_min(f, max_ext_degree=DEFAULT_MAX_EXT_DEGREE):
    """Minimal embedded resolution of ``{f = 0}`` at the origin.

    Parameters
    ----------
    f : BivariatePoly
        Rational polynomial with ``f(0, 0) = 0``; may be non-reduced.
    max_ext_degree : int
        Bound on the degree of field extensions.

    Returns
    -------
    ResolutionGraph
    """
    eng = _Engine(f, None, max_ext_degree, mode="min").run()
    return _build(eng, "min")


def polar_of(f, w):
    """Reduced polar ``a f_x + b f_y`` with the components of f removed."""
    a, b = w
    fw = f.diff(0) * Fraction(a) + f.diff(1) * Fraction(b)
    if fw.is_zero():
        return None
    fac = branch_factors(fw)
    own = {repr(_normalize(q)) for q, _ in branch_factors(f)}
    keep = BivariatePoly.const(Fraction(1))
    for q, _ in fac:
        if q.total_degree() <= 0 or repr(_normalize(q)) in own:
            continue
        keep = keep * q
    return keep


def _normalize(q):
    # scale so that the leading term in canonical order has coefficient 1
    k = sorted(q.terms, key=lambda t: (-(t[0] + t[1]), -t[0]))[0]
    return q * (Fraction(1) / Fraction(q.terms[k]))


def polar_direction(rng):
    while True:
        a, b = rng.randint(-9, 9), rng.randint(-9, 9)
        if a and b and math.gcd(a, b) == 1:
            return (a, b)


def resolve_pol(f, seed=0, max_ext_degree=DEFAULT_MAX_EXT_DEGREE,
                retry_limit=5, rng=None):
    """Resolution of ``C`` together with a generic polar curve.

    A direction ``w`` is drawn from a seeded generator, ``f_w`` is resolved
    jointly with ``f`` and the result is kept when the genericity checks
    pass: ``|D_0 ∩ P~| = t - 1``, no extra center on the strict transform
    of ``C``, ``ord_{D_i}(f_w) = p_i`` at every vertex, and the per-vertex
    data is unchanged for one fresh direction.

    Raises
    ------
    GenericityFailure
        When ``retry_limit`` directions all fail.
    """
    _check_input(f)
    rng = rng or random.Random(seed)
    gmin = resolve_min(f, max_ext_degree)
    _, _, t = tangent_cone(f)
    attempts = []
    for _ in range(retry_limit):
        w = polar_direction(rng)
        g, why = _try_polar(f, w, t, gmin, max_ext_degree)
        if g is None:
            attempts.append({"w": w, "ok": False, "reason": why})
            continue
        w2 = polar_direction(rng)
        g2, why2 = _try_polar(f, w2, t, gmin, max_ext_degree)
        if g2 is None or g2.shape() != g.shape():
            attempts.append({"w": w, "ok": False,
                             "reason": f"redraw {w2} disagrees: {why2 or 'shape'}"})
            continue
        attempts.append({"w": w, "ok": True, "redraw": w2})
        g.attempts = attempts
        g.min_map = _match_min(g, gmin)
        g.min_graph = gmin
        return g
    raise GenericityFailure(f"no generic polar direction in {retry_limit} "
                            f"attempts: {attempts}")


def _try_polar(f, w, t, gmin, max_ext_degree):
    P = polar_of(f, w)
    if P is None:
        return None, "polar vanishes"
    if not is_reduced(P):
        return None, "polar not reduced"
    eng = _Engine(f, P, max_ext_degree, mode="pol").run()
    g = _build(eng, "pol", w=w)
    d0 = g.polar.get(0, 0)
    if d0 != t - 1:
        return None, f"|D0 ∩ P| = {d0} != t - 1 = {t - 1}"
    for r in eng.records:
        if not r.is_min and r.center_mult.get("fr", 0) > 0:
            return None, "extra center on the strict transform of C"
    fw = f.diff(0) * w[0] + f.diff(1) * w[1]
    fx, fy = f.diff(0), f.diff(1)
    for r in eng.records:
        ox = _ord_record(r, fx)
        oy = _ord_record(r, fy)
        if _ord_record(r, fw) != min(ox, oy):
            return None, f"ord(f_w) != p at record {r.rid}"
    return g, None


def _ord_record(r, h):
    if h.is_zero():
        return math.inf
    return replay(h, r.chart_a.steps, r.tower).ord_u()


def _match_min(g, gmin):
    sig = {r.chart_a.signature(): r.rid for r in gmin.records}
    out = {}
    for r in g.records:
        s = r.chart_a.signature()
        if s in sig:
            out[r.rid] = sig[s]
    return out


def pullback_order(graph, h, i):
    """Vanishing order of ``h`` along the exceptional vertex ``i``."""
    if h.is_zero():
        raise ValueError("pullback order of the zero polynomial")
    r = graph.record_of(i)
    return replay(h, r.chart_a.steps, r.tower).ord_u()


def total_transform(graph, h, i, which="A"):
    """Pullback of ``h`` in the chart of vertex ``i``."""
    r = graph.record_of(i)
    ch = r.chart_a if which == "A" else r.chart_b
    return replay(h, ch.steps, r.tower)


def nc_certificate(graph):
    """Re-verify normal crossings at every arrow, polar point and corner.

    Returns a list of ``(record, description, ok)``.
    """
    out = []
    active = ("fr", "P") if graph.mode == "pol" else ("fr",)
    for r in graph.records:
        for which, ch in (("A", r.chart_a), ("B", r.chart_b)):
            R = UniPoly([1])
            for n in active:
                R = R * ch.funcs[n].S.restrict_u0()
            for pt in r.points:
                if pt.chart != which or pt.kind == "center":
                    continue
                ok = R.multiplicity_of(pt.factor) == 1
                out.append((r.rid, f"{pt.kind} {pt.factor!r} ({which})", ok))
        for which, ch in (("A", r.chart_a), ("B", r.chart_b)):
            if ch.dv is None:
                continue
            has_center = any(p.kind == "center" and p.chart == which
                             and p.factor == UniPoly([0, 1]) for p in r.points)
            if has_center:
                continue
            val = 1
            for n in active:
                val = val * ch.funcs[n].S.terms.get((0, 0), 0)
            out.append((r.rid, f"corner ({which})", val != 0))
    return out


def milnor_from_centers(graph):
    """``sum e_p (e_p - 1) - r + 1`` over centers (conjugates counted)."""
    total = 0
    for rid, mult, conj in graph.center_log:
        e = mult.get("fr", 0)
        total += conj * e * (e - 1)
    r = len(graph.arrows())
    return total - r + 1
