"""Numerical invariants of resolution graphs and their consistency checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import BivariatePoly, is_reduced
from .resolution import (ResolutionGraph, milnor_from_centers, pullback_order,
                         replay, resolve_pol, tangent_cone)


class OrientationMismatch(AssertionError):
    """Determinant sign disagrees with tree distance from vertex 0."""


class UpsilonMismatch(AssertionError):
    """The two characterizations of the invariant subgraph disagree."""


class NonReducedInput(ValueError):
    """An operation that needs a reduced curve was given a non-reduced one."""


@dataclass
class Check:
    name: str
    lhs: object
    rhs: object
    passed: bool

    def as_dict(self):
        return {"name": self.name, "lhs": _plain(self.lhs),
                "rhs": _plain(self.rhs), "pass": bool(self.passed)}


def _plain(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (list, tuple)):
        return [_plain(y) for y in x]
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


@dataclass
class VertexInvariants:
    vid: int
    c0: int
    c1: int
    nu: int
    m: int
    p: int = None
    varpi: int = None
    tau: int = None
    in_upsilon: bool = False
    in_min: bool = True
    euler: int = 0

    @property
    def hironaka(self):
        return Fraction(self.m, self.c0)


@dataclass
class EdgeInfo:
    src: int
    dst: int
    invariant: bool = True
    to_arrow: bool = False


@dataclass
class NodeData:
    node: int
    alpha: object                  # Fraction or math.inf
    bamboo: list = field(default_factory=list)
    euler_numbers: list = field(default_factory=list)
    alphas: list = field(default_factory=list)


@dataclass
class InvariantTable:
    graph: ResolutionGraph
    min_graph: ResolutionGraph
    rows: dict
    edges: list = field(default_factory=list)
    min_edges: list = field(default_factory=list)
    upsilon: set = field(default_factory=set)
    pol_to_min: dict = field(default_factory=dict)
    matrix: list = None
    matrix_inv: list = None
    matrix_ids: list = None
    nodes: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def row(self, vid):
        return self.rows[vid]

    def check(self, name, lhs, rhs, passed=None):
        ok = (lhs == rhs) if passed is None else passed
        self.checks.append(Check(name, lhs, rhs, bool(ok)))
        return ok

    def exceptional_ids(self):
        return sorted(self.rows)

    def oriented(self, vid):
        """Edges leaving ``vid`` in the oriented pol graph."""
        return [e for e in self.edges if e.src == vid]


# ---------------------------------------------------------------------------
# helpers


def generic_line(graph):
    return BivariatePoly({(1, 0): Fraction(1), (0, 1): Fraction(3, 7)})


def _x():
    return BivariatePoly({(1, 0): Fraction(1)})


def _y():
    return BivariatePoly({(0, 1): Fraction(1)})


def jacobian_order(graph, vid):
    """Order along ``D_vid`` of the Jacobian determinant of the chart map."""
    ch = graph.chart(vid)
    x, y = ch.coordinate_maps()
    det = x.diff(0) * y.diff(1) - x.diff(1) * y.diff(0)
    return det.ord_u()


def intersection_matrix(graph, vids=None):
    """Exact intersection matrix on exceptional vertices (sorted ids)."""
    ids = sorted(vids if vids is not None else
                 [v.vid for v in graph.exceptional()])
    pos = {v: k for k, v in enumerate(ids)}
    n = len(ids)
    M = [[Fraction(0)] * n for _ in range(n)]
    for v in ids:
        M[pos[v]][pos[v]] = Fraction(graph.vertex(v).self_intersection)
    for a, b in graph.edges:
        if a in pos and b in pos:
            M[pos[a]][pos[b]] = M[pos[b]][pos[a]] = Fraction(1)
    return ids, M


def mat_inverse(M):
    """Gauss-Jordan inverse over the rationals."""
    n = len(M)
    A = [list(row) + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular intersection matrix")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [a * inv for a in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                fct = A[r][col]
                A[r] = [a - fct * b for a, b in zip(A[r], A[col])]
    return [row[n:] for row in A]


def leading_minors(M):
    """Leading principal minors by fraction-exact elimination."""
    n = len(M)
    A = [list(r) for r in M]
    out = []
    det = Fraction(1)
    for k in range(n):
        if A[k][k] == 0:
            out.extend([Fraction(0)] * (n - k))
            return out
        det *= A[k][k]
        out.append(det)
        for r in range(k + 1, n):
            fct = A[r][k] / A[k][k]
            for c in range(k, n):
                A[r][c] -= fct * A[k][c]
    return out


def negative_definite(M):
    minors = leading_minors(M)
    return all((m < 0) if k % 2 == 0 else (m > 0) for k, m in enumerate(minors))


def _bfs_depth(graph):
    depth = {0: 0}
    order = [0]
    for v in order:
        for u in graph.neighbors(v):
            if u not in depth:
                depth[u] = depth[v] + 1
                order.append(u)
    return depth


# ---------------------------------------------------------------------------
# operations


def compute_c01(graph):
    """Per-vertex (c0, c1) by the blow-up recursion.

    The first blow-up gets (1, 1); a center at a smooth point of ``D_j``
    gives (c0_j, c1_j + 1), a corner of ``D_j`` and ``D_k`` gives the sums.

    Returns
    -------
    dict
        vertex id -> (c0, c1), on exceptional vertices.
    """
    per_rec = {}
    for r in graph.records:
        if r.rid == 0:
            per_rec[0] = (1, 1)
        elif len(r.parents) == 1:
            c0, c1 = per_rec[r.parents[0]]
            per_rec[r.rid] = (c0, c1 + 1)
        else:
            (a0, a1), (b0, b1) = (per_rec[p] for p in r.parents)
            per_rec[r.rid] = (a0 + b0, a1 + b1)
    return {v.vid: per_rec[v.record] for v in graph.exceptional()}


def c01_cross_check(graph, c01):
    """Compare the recursion with pullback orders and the Jacobian.

    c0 must equal ``min(ord x, ord y)`` and ``c0 + c1 - 1`` the vanishing
    order of the Jacobian determinant of the chart map.
    """
    out = []
    seen = set()
    for v in graph.exceptional():
        if v.record in seen:
            continue
        seen.add(v.record)
        c0, c1 = c01[v.vid]
        ox = pullback_order(graph, _x(), v.vid)
        oy = pullback_order(graph, _y(), v.vid)
        jac = jacobian_order(graph, v.vid)
        out.append(Check(f"c0 via coordinate orders at {v.vid}",
                         c0, min(ox, oy), c0 == min(ox, oy)))
        out.append(Check(f"nu - 1 = ord det Jac at {v.vid}",
                         c0 + c1 - 1, jac, c0 + c1 - 1 == jac))
    return out


def _pol_min_map(gpol, gmin):
    """Physical vertex map pol -> min for exceptional vertices in both."""
    rec_map = gpol.min_map
    out = {}
    for v in gpol.exceptional():
        if v.record in rec_map:
            mr = rec_map[v.record]
            cands = [u.vid for u in gmin.exceptional()
                     if u.record == mr and u.copy == v.copy]
            out[v.vid] = cands[0]
    return out


def orient_edges(table):
    """Orient every edge away from vertex 0 and audit determinant signs.

    Raises
    ------
    OrientationMismatch
        If ``det[[c0_i, c1_i], [c0_j, c1_j]]`` is not negative on an edge
        ``j -> i`` between exceptional vertices.
    """
    graph = table.graph
    depth = _bfs_depth(graph)
    edges = []
    for a, b in graph.edges:
        j, i = (a, b) if depth[a] < depth[b] else (b, a)
        to_arrow = graph.vertex(i).kind == "arrowhead"
        if not to_arrow:
            ri, rj = table.rows[i], table.rows[j]
            det = ri.c0 * rj.c1 - ri.c1 * rj.c0
            if det >= 0:
                raise OrientationMismatch(
                    f"edge {j}->{i}: det = {det} is not negative")
        edges.append(EdgeInfo(j, i, True, to_arrow))
    table.edges = sorted(edges, key=lambda e: (e.src, e.dst))
    return table.edges


def compute_p_varpi_tau(graph, table):
    """Fill p, polar weight and radial weight on every exceptional vertex."""
    f = graph.f
    fx, fy = f.diff(0), f.diff(1)
    cache = {}
    for vid, row in table.rows.items():
        rec = graph.vertex(vid).record
        if rec not in cache:
            ox = pullback_order(graph, fx, vid) if not fx.is_zero() else math.inf
            oy = pullback_order(graph, fy, vid) if not fy.is_zero() else math.inf
            cache[rec] = min(ox, oy)
        row.p = cache[rec]
        row.varpi = row.c1 - row.m + row.p
        row.tau = row.c1 + row.m - row.p
    return table


def arrow_p(graph):
    return {v.vid: v.m - 1 for v in graph.arrows()}


def _min_upsilon(gmin):
    """Smallest connected subgraph of the min graph containing 0 and every
    vertex adjacent to an arrowhead."""
    targets = {v.parent_vertex for v in gmin.arrows()}
    parent = {0: None}
    order = [0]
    for v in order:
        for u in gmin.neighbors(v):
            if u not in parent:
                parent[u] = v
                order.append(u)
    ups = {0}
    for t in targets:
        while t is not None:
            ups.add(t)
            t = parent[t]
    return {v for v in ups if gmin.vertex(v).kind == "exceptional"}


def compute_upsilon(table):
    """Invariant subgraph, with the polar-weight characterization audited.

    Raises
    ------
    UpsilonMismatch
        If ``{i : varpi_i = 0}`` differs from the combinatorial definition.
    """
    gmin = table.min_graph
    ups_min = _min_upsilon(gmin)
    inv = {a: b for a, b in table.pol_to_min.items()}
    min_to_pol = {b: a for a, b in inv.items()}
    ups = {min_to_pol[v] for v in ups_min}
    zero = {vid for vid, r in table.rows.items() if r.varpi == 0}
    if zero != ups:
        raise UpsilonMismatch(f"varpi = 0 on {sorted(zero)} but the "
                              f"arrow-spanned subgraph is {sorted(ups)}")
    for vid, row in table.rows.items():
        row.in_upsilon = vid in ups
    table.upsilon = ups
    # complement components in the min graph are bamboos
    comp_ok = True
    rest = {v.vid for v in gmin.exceptional()} - ups_min
    seen = set()
    for s in sorted(rest):
        if s in seen:
            continue
        comp, stack = {s}, [s]
        while stack:
            a = stack.pop()
            for b in gmin.neighbors(a):
                if b in rest and b not in comp:
                    comp.add(b)
                    stack.append(b)
        seen |= comp
        inner = [sum(1 for b in gmin.neighbors(a) if b in comp) for a in comp]
        attach = sum(1 for a in comp for b in gmin.neighbors(a)
                     if b not in comp)
        if max(inner) > 2 or attach != 1 or sum(inner) != 2 * (len(comp) - 1):
            comp_ok = False
    table.check("complement of Upsilon is a union of bamboos", comp_ok, True)
    table.check("Upsilon equals the zero set of the polar weight",
                sorted(zero), sorted(ups))
    return ups


def node_alphas(table):
    """Continued-fraction data at nodes of the minimal graph.

    For each node ``n != 0`` (degree at least 3 in the min graph, arrows
    counted) with a non-invariant bamboo ``i_1 ... i_h`` hanging off it,
    ``alpha_h = 1``, ``alpha_{h-1} = b_h`` and
    ``alpha_{j-1} = b_j alpha_j - alpha_{j+1}``; ``alpha_n = alpha_0``.
    Nodes without such a bamboo get ``alpha = inf``.
    """
    gmin = table.min_graph
    min_to_pol = {b: a for a, b in table.pol_to_min.items()}
    ups_min = {table.pol_to_min[v] for v in table.upsilon}
    out = []
    for v in gmin.exceptional():
        n = v.vid
        if n == 0 or gmin.degree(n) < 3 or n not in ups_min:
            continue
        outside = [u for u in gmin.neighbors(n)
                   if gmin.vertex(u).kind == "exceptional" and u not in ups_min]
        if len(outside) > 1:
            raise AssertionError(f"node {n} has {len(outside)} "
                                 "non-invariant neighbors")
        if not outside:
            out.append(NodeData(min_to_pol[n], math.inf))
            continue
        chain = [outside[0]]
        prev = n
        while True:
            nxt = [u for u in gmin.neighbors(chain[-1]) if u != prev
                   and gmin.vertex(u).kind == "exceptional"]
            if not nxt:
                break
            if len(nxt) > 1:
                raise AssertionError("non-invariant branch is not a bamboo")
            prev = chain[-1]
            chain.append(nxt[0])
        b = [-gmin.vertex(u).self_intersection for u in chain]
        h = len(chain)
        alpha = [None] * (h + 1)      # alpha[0] is the node value
        alpha[h] = Fraction(1)
        if h >= 1:
            alpha[h - 1] = Fraction(b[h - 1])
        for j in range(h - 1, 0, -1):
            alpha[j - 1] = b[j - 1] * alpha[j] - alpha[j + 1]
        ms = [gmin.vertex(u).m for u in chain]
        ratios = [Fraction(ms[j - 1], ms[-1]) for j in range(1, h + 1)]
        table.check(f"alpha ratios equal multiplicity ratios at node "
                    f"{min_to_pol[n]}", alpha[1:], ratios)
        c0 = [table.rows[min_to_pol[u]].c0 for u in chain]
        table.check(f"alpha ratios equal c0 ratios at node {min_to_pol[n]}",
                    alpha[1:], [Fraction(c, c0[-1]) for c in c0])
        alpha_n = alpha[0]
        table.check(f"alpha at node {min_to_pol[n]} equals m_n / m_end",
                    alpha_n, Fraction(v.m, ms[-1]))
        out.append(NodeData(min_to_pol[n], alpha_n,
                            [min_to_pol[u] for u in chain], b, alpha[1:]))
    table.nodes = out
    return out


def polar_intersections(graph, table, p_values, vids=None):
    """``(P~, D_i) = -sum_j p_j (D_j . D_i)`` from the intersection matrix."""
    ids, M = intersection_matrix(graph, vids)
    pos = {v: k for k, v in enumerate(ids)}
    out = {}
    for i in ids:
        s = Fraction(0)
        for j in ids:
            s += p_values[j] * M[pos[j]][pos[i]]
        out[i] = -s
    return out


def _hironaka_zone(graph, rows_by_vid, start):
    q = rows_by_vid[start]
    zone, stack = {start}, [start]
    while stack:
        a = stack.pop()
        for b in graph.neighbors(a):
            if b in rows_by_vid and b not in zone and rows_by_vid[b] == q:
                zone.add(b)
                stack.append(b)
    return zone


def polar_node_check(table, node):
    """Both sides of the polar node formula at one node.

    ``lhs`` sums ``m_i (P~, D_i)`` over the rupture zone of the node, the
    connected set of vertices sharing its Hironaka number; it is evaluated
    in the min graph from intersection numbers and in the pol graph from
    the recorded polar points.  ``rhs = m_n (deg - 2 - 1/alpha_n)``.

    Returns
    -------
    (lhs_min, lhs_pol, rhs, passed)
    """
    gmin, gpol = table.min_graph, table.graph
    min_to_pol = {b: a for a, b in table.pol_to_min.items()}
    n_pol = node.node
    n_min = table.pol_to_min[n_pol]
    pmin = {u.vid: table.rows[min_to_pol[u.vid]].p for u in gmin.exceptional()}
    inter = polar_intersections(gmin, table, pmin)
    hmin = {u.vid: Fraction(u.m, table.rows[min_to_pol[u.vid]].c0)
            for u in gmin.exceptional()}
    zone = _hironaka_zone(gmin, hmin, n_min)
    lhs_min = sum(gmin.vertex(i).m * inter[i] for i in zone)
    hpol = {vid: r.hironaka for vid, r in table.rows.items()}
    zone_p = _hironaka_zone(gpol, hpol, n_pol)
    lhs_pol = sum(gpol.vertex(i).m * gpol.polar.get(i, 0) for i in zone_p)
    inv_alpha = Fraction(0) if node.alpha == math.inf else 1 / node.alpha
    rhs = gmin.vertex(n_min).m * (gmin.degree(n_min) - 2 - inv_alpha)
    return lhs_min, lhs_pol, rhs, (lhs_min == rhs and lhs_pol == rhs)


def _branch_has_arrow(graph, j, i):
    """Does the component of ``graph - {j}`` containing ``i`` hold an arrow?"""
    seen, stack = {i, j}, [i]
    while stack:
        a = stack.pop()
        if graph.vertex(a).kind == "arrowhead":
            return True
        for b in graph.neighbors(a):
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return False


def milnor_number(graph, min_graph=None):
    """Milnor number computed two ways.

    ``mu1`` sums ``e_p (e_p - 1)`` over the centers, minus the number of
    branches, plus one.  ``mu2 = 1 - sum m_i chi(D_i°)`` on the minimal
    graph, with ``chi(D_i°) = 2 - deg_i``.

    Raises
    ------
    NonReducedInput
    """
    if not is_reduced(graph.f):
        raise NonReducedInput("Milnor number needs a reduced curve")
    gmin = min_graph or getattr(graph, "min_graph", graph)
    mu1 = milnor_from_centers(gmin)
    mu2 = 1 - sum(v.m * (2 - gmin.degree(v.vid)) for v in gmin.exceptional())
    return mu1, mu2


# ---------------------------------------------------------------------------
# driver


def compute_invariants(graph):
    """Full invariant table for a pol graph, with all consistency checks.

    Parameters
    ----------
    graph : ResolutionGraph
        Output of :func:`resolve_pol` (carries its minimal graph).
    """
    gmin = getattr(graph, "min_graph", None)
    if gmin is None:
        raise ValueError("compute_invariants needs a resolve_pol graph")
    c01 = compute_c01(graph)
    rows = {}
    for v in graph.exceptional():
        c0, c1 = c01[v.vid]
        rows[v.vid] = VertexInvariants(v.vid, c0, c1, c0 + c1, v.m,
                                       in_min=v.is_min,
                                       euler=v.self_intersection)
    table = InvariantTable(graph, gmin, rows)
    table.pol_to_min = _pol_min_map(graph, gmin)
    for c in c01_cross_check(graph, c01):
        table.checks.append(c)
    # recursion multiplicities versus pullback orders
    for v in graph.exceptional():
        if v.copy:
            continue
        m2 = pullback_order(graph, graph.f, v.vid)
        table.check(f"multiplicity by pullback at {v.vid}", v.m, m2)
    orient_edges(table)
    compute_p_varpi_tau(graph, table)
    compute_upsilon(table)
    for e in table.edges:
        if not e.to_arrow:
            e.invariant = e.src in table.upsilon and e.dst in table.upsilon
    ids, M = intersection_matrix(graph)
    table.matrix_ids, table.matrix = ids, M
    table.matrix_inv = mat_inverse(M)
    table.check("intersection matrix negative definite",
                negative_definite(M), True)
    _edge_checks(table)
    _vertex_checks(table)
    node_alphas(table)
    for nd in table.nodes:
        lm, lp, rhs, ok = polar_node_check(table, nd)
        table.check(f"polar node formula (min zone) at {nd.node}", lm, rhs)
        table.check(f"polar node formula (pol zone) at {nd.node}", lp, rhs)
    _polar_checks(table)
    _adjunction(table)
    if is_reduced(graph.f):
        mu1, mu2 = milnor_number(graph, gmin)
        table.check("Milnor number two ways", mu1, mu2)
        table.mu = mu1
    else:
        table.mu = None
    return table


def _edge_checks(table):
    graph = table.graph
    rows = table.rows
    for e in table.edges:
        if e.to_arrow:
            continue
        i, j = rows[e.dst], rows[e.src]
        tag = f"{e.src}->{e.dst}"
        d_varpi = i.c0 * j.varpi - i.varpi * j.c0
        both = i.varpi == 0 and j.varpi == 0
        table.check(f"polar-weight determinant sign on {tag}",
                    (d_varpi <= 0, d_varpi == 0), (True, both))
        d_m = i.c0 * j.m - i.m * j.c0
        arrows = _branch_has_arrow(graph, e.src, e.dst)
        hir_up = i.hironaka > j.hironaka
        hir_eq = i.hironaka == j.hironaka
        table.check(f"invariant-edge equivalences on {tag}",
                    [e.invariant, d_m != 0, arrows, hir_up],
                    [e.invariant] * 4)
        table.check(f"Hironaka monotonicity on {tag}",
                    hir_up if e.invariant else hir_eq, True)
        # det[[c0_i, ord_i h], [c0_j, ord_j h]] <= 0 for several h
        for name, h in (("f", graph.f), ("f_x", graph.f.diff(0)),
                        ("f_y", graph.f.diff(1)),
                        ("line", generic_line(graph))):
            if h.is_zero():
                continue
            oi = pullback_order(graph, h, e.dst)
            oj = pullback_order(graph, h, e.src)
            det = i.c0 * oj - oi * j.c0
            table.check(f"c0-order determinant for {name} on {tag}",
                        det <= 0, True)


def _vertex_checks(table):
    graph = table.graph
    for vid, r in table.rows.items():
        table.check(f"nu = c0 + c1 at {vid}", r.nu, r.c0 + r.c1)
        table.check(f"tau + varpi = 2 c1 at {vid}", r.tau + r.varpi, 2 * r.c1)
        table.check(f"varpi >= 0 at {vid}", r.varpi >= 0, True)
        table.check(f"c1 >= c0, equality only at 0 at {vid}",
                    (r.c1 >= r.c0, r.c1 == r.c0), (True, vid == 0))
        if not r.in_min:
            table.check(f"extra pol vertex has varpi > 0 at {vid}",
                        r.varpi > 0, True)
    for u in graph.neighbors(0):
        if u in table.rows:
            r = table.rows[u]
            table.check(f"neighbor of 0 has c1 = c0 + 1 at {u}",
                        r.c1, r.c0 + 1)
    # conjugate copies carry identical data
    by_rec = {}
    for vid, r in table.rows.items():
        key = graph.vertex(vid).record
        data = (r.m, r.c0, r.c1, graph.vertex(vid).self_intersection)
        by_rec.setdefault(key, set()).add(data)
    table.check("conjugate copies agree",
                all(len(s) == 1 for s in by_rec.values()), True)


def _polar_checks(table):
    graph = table.graph
    p = {vid: r.p for vid, r in table.rows.items()}
    inter = polar_intersections(graph, table, p)
    counted = {vid: graph.polar.get(vid, 0) for vid in table.rows}
    table.check("polar intersections: matrix versus strict transforms",
                [inter[v] for v in sorted(inter)],
                [counted[v] for v in sorted(counted)])
    _, _, t = tangent_cone(graph.f)
    table.check("|D0 ∩ P~| = t - 1 (matrix)", inter[0], t - 1)
    table.check("|D0 ∩ P~| = t - 1 (strict transform)", counted[0], t - 1)
    # invariant non-node vertices of the min graph miss the polar
    gmin = table.min_graph
    min_to_pol = {b: a for a, b in table.pol_to_min.items()}
    pmin = {u.vid: table.rows[min_to_pol[u.vid]].p for u in gmin.exceptional()}
    imin = polar_intersections(gmin, table, pmin)
    nodes = {table.pol_to_min[nd.node] for nd in table.nodes}
    for u in gmin.exceptional():
        vid = min_to_pol[u.vid]
        if vid in table.upsilon and u.vid != 0 and u.vid not in nodes:
            table.check(f"invariant non-node misses the polar at {vid}",
                        imin[u.vid], 0)
    table.polar_min = {min_to_pol[k]: v for k, v in imin.items()}
    table.polar_pol = inter


def _adjunction(table):
    graph = table.graph
    ids, M = table.matrix_ids, table.matrix
    pos = {v: k for k, v in enumerate(ids)}
    for i in ids:
        lhs = sum((table.rows[j].nu - 1) * M[pos[j]][pos[i]] for j in ids)
        rhs = -M[pos[i]][pos[i]] - 2
        table.check(f"adjunction at {i}", lhs, rhs)


def toric_check(table):
    """c0 = min and c1 = max of the coordinate weights at each vertex."""
    graph = table.graph
    out = []
    for vid, r in table.rows.items():
        ch = graph.chart(vid)
        x, y = ch.coordinate_maps()
        wx, wy = x.ord_u(), y.ord_u()
        out.append(Check(f"toric weights at {vid}", (r.c0, r.c1),
                         (min(wx, wy), max(wx, wy)),
                         (r.c0, r.c1) == (min(wx, wy), max(wx, wy))))
    return out


def analyze(f, seed=0, max_ext_degree=64, retry_limit=5):
    """Resolve with a generic polar and compute the invariant table."""
    g = resolve_pol(f, seed=seed, max_ext_degree=max_ext_degree,
                    retry_limit=retry_limit)
    return compute_invariants(g)
