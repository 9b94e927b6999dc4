"""Combinatorics of the Milnor fiber at radius zero.

Over each exceptional divisor ``D_i`` the fiber is an ``m_i``-fold cover of
``D_i°``; boundary circles sit over corners and arrowheads.  Corners on
non-invariant edges carry red and green points of the extended gradient
field, non-invariant branches carry Petri dishes, and the invariant part
assembles into a fiber whose spine is counted here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .algebra import gcd_list
from .invariants import Check, NonReducedInput


class NonIntegralGenus(ArithmeticError):
    """Genus from the component-count rule is not a nonnegative integer."""


class NegativeCount(ArithmeticError):
    """A red/green corner count came out negative."""


class AuditFailure(AssertionError):
    """Capped Poincaré-Hopf sum differs from the Euler characteristic."""

    def __init__(self, vertex, lhs, rhs):
        self.vertex, self.lhs, self.rhs = vertex, lhs, rhs
        super().__init__(f"vertex {vertex}: index sum {lhs} != chi {rhs}")


@dataclass
class FiberPiece:
    vertex: int
    m: int
    n_components: int
    circles: dict            # neighbor id -> number of boundary circles
    euler_char_total: int
    genus_per_component: int

    @property
    def n_boundary(self):
        return sum(self.circles.values())

    def as_dict(self):
        return {"vertex": self.vertex, "m": self.m,
                "n_components": self.n_components,
                "boundary_circles": {str(k): v for k, v in
                                     sorted(self.circles.items())},
                "n_boundary": self.n_boundary,
                "euler_char_total": self.euler_char_total,
                "genus_per_component": self.genus_per_component}


@dataclass
class CornerData:
    src: int                 # upstream vertex j
    dst: int                 # downstream vertex i
    n_circles: int
    reds_total: int
    greens_total: int
    reds_per_circle: int
    invariant: bool

    def as_dict(self):
        return {"from": self.src, "to": self.dst, "n_circles": self.n_circles,
                "reds_total": self.reds_total,
                "greens_total": self.greens_total,
                "reds_per_circle": self.reds_per_circle,
                "invariant": self.invariant}


@dataclass
class PetriDish:
    root: int                # first non-invariant vertex of the branch
    attach: int              # invariant vertex it hangs from
    branch: list
    n_dishes: int
    reds: int                # R per dish
    saddles: int             # I per dish

    @property
    def prongs(self):
        return self.reds

    def as_dict(self):
        return {"root": self.root, "attach": self.attach,
                "branch": list(self.branch), "n_dishes": self.n_dishes,
                "reds": self.reds, "saddles": self.saddles,
                "prongs": self.prongs}


@dataclass
class SpineCensus:
    invariant_saddles: int           # interior saddles of pieces over Υ∖{0}
    d0_saddles: object               # m0 * S0 (None when unknown)
    repellers: object                # m0 * F0 (None when unknown)
    pronged: list                    # prong count per collapsed dish (R >= 2)
    regular_dishes: int              # dishes with R = 1, regular points
    chi_target: object               # 1 - mu
    chi_fiber: int                   # sum over pieces
    vertices: object = None
    edges: object = None
    checks: list = field(default_factory=list)

    def as_dict(self):
        return {"invariant_saddles": self.invariant_saddles,
                "d0_saddles": self.d0_saddles, "repellers": self.repellers,
                "pronged": list(self.pronged),
                "regular_dishes": self.regular_dishes,
                "chi_target": self.chi_target, "chi_fiber": self.chi_fiber,
                "vertices": self.vertices, "edges": self.edges}


# ---------------------------------------------------------------------------


def _neighbors_m(graph, vid):
    return {u: graph.vertex(u).m for u in graph.neighbors(vid)}


def fiber_pieces(graph, table):
    """One :class:`FiberPiece` per exceptional vertex of the pol graph.

    The number of components is ``gcd`` of ``m_i`` and all adjacent
    multiplicities, arrows included; the genus follows from
    ``chi = n (2 - 2 g) - (boundary circles)``.

    Raises
    ------
    NonIntegralGenus
    """
    out = []
    for vid in table.exceptional_ids():
        m = graph.vertex(vid).m
        nb = _neighbors_m(graph, vid)
        n = gcd_list([m] + list(nb.values()))
        circles = {u: math.gcd(m, mu) for u, mu in nb.items()}
        chi = m * (2 - len(nb))
        B = sum(circles.values())
        num = 2 * n - B - chi
        if num % (2 * n) or num < 0:
            raise NonIntegralGenus(f"vertex {vid}: genus {num}/{2 * n}")
        out.append(FiberPiece(vid, m, n, circles, chi, num // (2 * n)))
    return out


def corner_data(table):
    """Red/green counts on every oriented edge between exceptional vertices.

    Raises
    ------
    NegativeCount
    """
    graph = table.graph
    out = []
    for e in table.edges:
        if e.to_arrow:
            continue
        i, j = table.rows[e.dst], table.rows[e.src]
        total = j.m * i.varpi - i.m * j.varpi
        if total < 0:
            raise NegativeCount(f"edge {e.src}->{e.dst}: {total}")
        n = math.gcd(i.m, j.m)
        if total % n:
            raise NegativeCount(f"edge {e.src}->{e.dst}: {total} not "
                                f"divisible by {n}")
        out.append(CornerData(e.src, e.dst, n, total, total, total // n,
                              e.invariant))
    return out


def _downstream(table, vid):
    return [e.dst for e in table.edges if e.src == vid and not e.to_arrow]


def petri_dishes(graph, table, corners=None):
    """One entry per maximal non-invariant branch of the pol graph."""
    corners = corners or corner_data(table)
    by_edge = {(c.src, c.dst): c for c in corners}
    out = []
    for e in table.edges:
        if e.to_arrow or e.src not in table.upsilon or e.dst in table.upsilon:
            continue
        branch, stack = [], [e.dst]
        while stack:
            a = stack.pop()
            branch.append(a)
            stack.extend(_downstream(table, a))
        c = by_edge[(e.src, e.dst)]
        R = c.reds_per_circle
        out.append(PetriDish(e.dst, e.src, sorted(branch), c.n_circles, R,
                             R - 1))
    return out


def dish_checks(graph, table, dishes):
    """Consistency of dish data with polar counts and prong formula."""
    out = []
    for d in dishes:
        inside = sum(graph.vertex(k).m * graph.polar.get(k, 0)
                     for k in d.branch)
        out.append(Check(f"dish saddles equal lifted polar points under "
                         f"{d.root}", d.n_dishes * d.saddles, inside,
                         d.n_dishes * d.saddles == inside))
        mi, mj = graph.vertex(d.root).m, graph.vertex(d.attach).m
        prongs = table.rows[d.root].varpi * mj // math.gcd(mi, mj)
        out.append(Check(f"prong count formula under {d.root}", d.prongs,
                         prongs, d.prongs == prongs))
        out.append(Check(f"dish tree Euler characteristic under {d.root}",
                         (d.saddles + d.reds) - 2 * d.saddles, 1,
                         (d.saddles + d.reds) - 2 * d.saddles == 1))
        out.append(Check(f"dish saddles nonnegative under {d.root}",
                         d.saddles >= 0, True, d.saddles >= 0))
    return out


def euler_audit(graph, table, pieces, corners, raise_on_fail=True,
                d0_balance=None):
    """Capped Poincaré-Hopf audit on every fiber piece.

    Each boundary circle is capped by a disk.  Capped indices: a circle over
    an invariant edge or an arrowhead contributes 1, a circle over a
    non-invariant corner contributes ``R + 1`` on the downstream side and
    ``1 - R`` on the upstream side, with ``R`` the reds per circle.  Lifted
    polar points on ``D_i`` (``i != 0``) are saddles, ``m_i`` per point;
    on ``D_0`` the lifted fountains and saddles contribute
    ``m_0 (F_0 - S_0)``.

    Parameters
    ----------
    d0_balance : int or None
        Numerical ``F_0 - S_0``; defaults to ``2 - t``.

    Returns
    -------
    list of Check
    """
    from .resolution import tangent_cone
    if d0_balance is None:
        _, _, t = tangent_cone(graph.f)
        d0_balance = 2 - t
    corner = {}
    for c in corners:
        corner[(c.src, c.dst)] = c
    out = []
    for pc in pieces:
        i = pc.vertex
        total = 0
        for u, ncirc in pc.circles.items():
            if graph.vertex(u).kind == "arrowhead":
                total += ncirc
            elif (u, i) in corner:
                total += ncirc * (corner[(u, i)].reds_per_circle + 1)
            else:
                total += ncirc * (1 - corner[(i, u)].reds_per_circle)
        if i == 0:
            total += pc.m * d0_balance
        else:
            total -= pc.m * graph.polar.get(i, 0)
        capped = pc.euler_char_total + pc.n_boundary
        ok = total == capped
        out.append(Check(f"capped index sum at vertex {i}", total, capped, ok))
        if not ok and raise_on_fail:
            raise AuditFailure(i, total, capped)
    return out


def invariant_fiber(graph, table, pieces, corners=None, d0_counts=None):
    """Census of the invariant fiber and its spine.

    Parameters
    ----------
    d0_counts : (int, int) or None
        Numbers of fountains and saddles of the potential on ``D_0``.

    Raises
    ------
    NonReducedInput
    """
    if table.mu is None:
        raise NonReducedInput("invariant fiber needs a reduced curve")
    corners = corners or corner_data(table)
    dishes = petri_dishes(graph, table, corners)
    m0 = graph.vertex(0).m
    inv_saddles = sum(graph.vertex(i).m * graph.polar.get(i, 0)
                      for i in table.upsilon if i != 0)
    pronged, regular = [], 0
    for d in dishes:
        if d.reds >= 2:
            pronged.extend([d.reds] * d.n_dishes)
        else:
            regular += d.n_dishes
    chi = sum(p.euler_char_total for p in pieces)
    census = SpineCensus(inv_saddles, None, None, pronged, regular,
                         1 - table.mu, chi)
    census.checks.append(Check("sum of m_i chi(D_i°) = 1 - mu", chi,
                               1 - table.mu, chi == 1 - table.mu))
    if d0_counts is not None:
        F0, S0 = d0_counts
        census.repellers = m0 * F0
        census.d0_saddles = m0 * S0
        saddles = inv_saddles + m0 * S0
        V = census.repellers + saddles + len(pronged)
        E = 2 * saddles + sum(pronged)
        census.vertices, census.edges = V, E
        census.checks.append(Check("spine census V - E = 1 - mu", V - E,
                                   1 - table.mu, V - E == 1 - table.mu))
    return census


def fiber_model(graph, table, d0_counts=None):
    """Run every fiber0 operation and collect checks."""
    pieces = fiber_pieces(graph, table)
    corners = corner_data(table)
    dishes = petri_dishes(graph, table, corners)
    checks = []
    for c in corners:
        checks.append(Check(f"reds equal greens on {c.src}->{c.dst}",
                            c.reds_total, c.greens_total, True))
        checks.append(Check(f"zero reds iff invariant on {c.src}->{c.dst}",
                            c.reds_total == 0, c.invariant,
                            (c.reds_total == 0) == c.invariant))
    checks += dish_checks(graph, table, dishes)
    balance = None
    if d0_counts is not None:
        balance = d0_counts[0] - d0_counts[1]
    checks += euler_audit(graph, table, pieces, corners, raise_on_fail=False,
                          d0_balance=balance)
    census = None
    if table.mu is not None:
        census = invariant_fiber(graph, table, pieces, corners, d0_counts)
        checks += census.checks
    return FiberModel(pieces, corners, dishes, census, checks)


@dataclass
class FiberModel:
    pieces: list
    corners: list
    dishes: list
    census: object
    checks: list
