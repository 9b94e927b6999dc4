"""Exact arithmetic kernel.

Rationals are :class:`fractions.Fraction`.  Algebraic numbers live in a
:class:`FieldTower`, a chain of simple extensions of the rationals, with
elements stored as coefficient tuples over the previous level.  On top of
that sit dense univariate polynomials (:class:`UniPoly`), sparse bivariate
polynomials (:class:`BivariatePoly`), squarefree and irreducible
factorization, and Newton polygon utilities.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from itertools import count

import sympy

DEFAULT_MAX_EXT_DEGREE = 64


class ExtensionDegreeExceeded(ArithmeticError):
    """A field extension would exceed the configured degree bound."""


class TowerMismatch(TypeError):
    """Elements of two unrelated field towers were combined."""


# ---------------------------------------------------------------------------
# field tower


def _is_rational(x):
    return isinstance(x, (int, Fraction))


class FieldTower:
    """Chain of simple algebraic extensions of the rationals.

    Parameters
    ----------
    levels : tuple
        Pairs ``(name, minpoly)`` where ``minpoly`` is a monic
        :class:`UniPoly` over the field obtained from the preceding levels.
    max_ext_degree : int
        Bound on the absolute degree ``[K : Q]``.

    Notes
    -----
    Construct towers through :meth:`rationals` and :func:`extend_tower`;
    the latter certifies irreducibility of each new minimal polynomial.
    """

    __slots__ = ("levels", "max_ext_degree", "base", "degree", "_hash")

    def __init__(self, levels=(), max_ext_degree=DEFAULT_MAX_EXT_DEGREE):
        self.levels = tuple(levels)
        self.max_ext_degree = max_ext_degree
        if self.levels:
            self.base = FieldTower(self.levels[:-1], max_ext_degree)
            self.degree = self.base.degree * self.levels[-1][1].degree()
        else:
            self.base = None
            self.degree = 1
        if self.degree > max_ext_degree:
            raise ExtensionDegreeExceeded(
                f"absolute degree {self.degree} exceeds bound {max_ext_degree}")
        self._hash = hash(tuple((n, tuple(map(_key, p.coeffs)))
                                for n, p in self.levels))

    @classmethod
    def rationals(cls, max_ext_degree=DEFAULT_MAX_EXT_DEGREE):
        return cls((), max_ext_degree)

    @property
    def depth(self):
        return len(self.levels)

    @property
    def minpoly(self):
        """Minimal polynomial of the top generator over ``base``."""
        return self.levels[-1][1] if self.levels else None

    @property
    def top_degree(self):
        return self.levels[-1][1].degree() if self.levels else 1

    def __eq__(self, other):
        return (isinstance(other, FieldTower)
                and self.levels == other.levels)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.levels:
            return "QQ"
        parts = [f"{n}: {p}" for n, p in self.levels]
        return "QQ(" + "; ".join(parts) + ")"

    def is_prefix_of(self, other):
        """True when ``self`` is one of the levels of ``other``."""
        return (self.depth <= other.depth
                and other.levels[:self.depth] == self.levels)

    def truncate(self, depth):
        return FieldTower(self.levels[:depth], self.max_ext_degree)

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def gen(self):
        """The top-level generator as an element."""
        if not self.levels:
            raise ValueError("the rationals have no generator")
        d = self.top_degree
        return TowerElement(self, (0, 1) + (0,) * (d - 2))

    def coerce(self, x):
        """Lift ``x`` from any prefix field into this tower."""
        if isinstance(x, TowerElement):
            if x.tower == self:
                return x
            if not x.tower.is_prefix_of(self):
                raise TowerMismatch(f"{x.tower!r} is not a subfield of {self!r}")
            inner = x
        elif _is_rational(x):
            inner = Fraction(x)
        else:
            raise TypeError(f"cannot coerce {type(x).__name__} into a tower")
        if not self.levels:
            return inner
        return TowerElement(self, (self.base.coerce(inner),)
                            + (0,) * (self.top_degree - 1))

    def common(self, other):
        """Larger of two nested towers."""
        if self.is_prefix_of(other):
            return other
        if other.is_prefix_of(self):
            return self
        raise TowerMismatch(f"{self!r} and {other!r} are not nested")


def tower_of(x):
    """Field tower of a scalar (rationals for plain numbers)."""
    if isinstance(x, TowerElement):
        return x.tower
    return None


def _key(c):
    """Hashable canonical key of a scalar."""
    if isinstance(c, TowerElement):
        return c._key()
    return Fraction(c)


def _strip(seq):
    seq = list(seq)
    while seq and seq[-1] == 0:
        seq.pop()
    return seq


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj != 0:
                out[i + j] = out[i + j] + ai * bj
    return out


def _poly_rem_monic(a, mod):
    """Remainder of coefficient list ``a`` by the monic list ``mod``."""
    a = list(a)
    d = len(mod) - 1
    for k in range(len(a) - 1, d - 1, -1):
        c = a[k]
        if c == 0:
            continue
        for t in range(d):
            a[k - d + t] = a[k - d + t] - c * mod[t]
        a[k] = 0
    return a[:d] + [0] * max(0, d - len(a))


class TowerElement:
    """Element of the top level of a :class:`FieldTower`.

    Stored as ``sum(coeffs[k] * gen**k)`` with ``coeffs`` in the base level.
    Arithmetic coerces rationals and elements of prefix towers.
    """

    __slots__ = ("tower", "coeffs")

    def __init__(self, tower, coeffs):
        d = tower.top_degree
        coeffs = tuple(coeffs)
        if len(coeffs) < d:
            coeffs = coeffs + (0,) * (d - len(coeffs))
        elif len(coeffs) > d:
            coeffs = tuple(_poly_rem_monic(list(coeffs),
                                           list(tower.minpoly.coeffs))[:d])
        base = tower.base
        self.tower = tower
        self.coeffs = tuple(base.coerce(c) for c in coeffs)

    # coercion helpers
    def _lift(self, other):
        """Return (tower, self', other') in a shared tower, or None."""
        if isinstance(other, TowerElement):
            t = self.tower.common(other.tower)
            return t, t.coerce(self), t.coerce(other)
        if _is_rational(other):
            return self.tower, self, self.tower.coerce(other)
        return None

    def _key(self):
        nz = [i for i, c in enumerate(self.coeffs) if c != 0]
        if not nz:
            return Fraction(0)
        if nz == [0]:
            return _key(self.coeffs[0])
        return (self.tower._hash, tuple(_key(c) for c in self.coeffs))

    def __hash__(self):
        return hash(self._key())

    def __eq__(self, other):
        if _is_rational(other):
            return (all(c == 0 for c in self.coeffs[1:])
                    and self.coeffs[0] == other)
        if isinstance(other, TowerElement):
            try:
                t, a, b = self._lift(other)
            except TowerMismatch:
                return False
            return a.coeffs == b.coeffs
        return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __bool__(self):
        return any(c != 0 for c in self.coeffs)

    def __add__(self, other):
        r = self._lift(other)
        if r is None:
            return NotImplemented
        t, a, b = r
        return TowerElement(t, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.tower, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        r = self._lift(other)
        if r is None:
            return NotImplemented
        t, a, b = r
        return TowerElement(t, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_rational(other):
            return TowerElement(self.tower, tuple(c * other for c in self.coeffs))
        r = self._lift(other)
        if r is None:
            return NotImplemented
        t, a, b = r
        prod = _poly_mul(list(a.coeffs), list(b.coeffs))
        rem = _poly_rem_monic(prod, list(t.minpoly.coeffs))
        return TowerElement(t, rem[:t.top_degree])

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero in a field tower")
        base = self.tower.base
        a = UniPoly(self.coeffs)
        m = self.tower.minpoly
        g, s, _ = a.xgcd(m)
        # g is a nonzero constant since m is irreducible
        c = g.coeffs[0]
        inv = s * (base.one() / c if base.levels else Fraction(1) / c)
        return TowerElement(self.tower, inv.coeffs)

    def __truediv__(self, other):
        if _is_rational(other):
            return self * (Fraction(1) / Fraction(other))
        r = self._lift(other)
        if r is None:
            return NotImplemented
        t, a, b = r
        return a * b.inverse()

    def __rtruediv__(self, other):
        r = self._lift(other)
        if r is None:
            return NotImplemented
        t, a, b = r
        return b * a.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.tower.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def norm(self):
        """Norm down to the base level, ``Res_t(minpoly, a(t))``."""
        return resultant(self.tower.minpoly, UniPoly(self.coeffs))

    def __repr__(self):
        name = self.tower.levels[-1][0]
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            cs = str(c) if _is_rational(c) or not isinstance(c, TowerElement) \
                else f"({c!r})"
            if k == 0:
                parts.append(cs)
            else:
                mon = name if k == 1 else f"{name}^{k}"
                parts.append(mon if c == 1 else f"{cs}*{mon}")
        return " + ".join(parts) if parts else "0"


def rational_value(x):
    """Return ``x`` as a Fraction if it lies in the rationals, else None."""
    if _is_rational(x):
        return Fraction(x)
    if isinstance(x, TowerElement):
        if all(c == 0 for c in x.coeffs[1:]):
            return rational_value(x.coeffs[0])
    return None


def scalar_inverse(c):
    if _is_rational(c):
        return Fraction(1) / Fraction(c)
    return c.inverse()


# ---------------------------------------------------------------------------
# univariate polynomials


class UniPoly:
    """Dense univariate polynomial with ascending coefficients.

    Coefficients are rationals or :class:`TowerElement` values; mixing is
    allowed as long as the towers are nested.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        self.coeffs = tuple(_strip(coeffs))

    @classmethod
    def monomial(cls, k, c=1):
        return cls([0] * k + [c])

    @classmethod
    def from_roots(cls, roots):
        p = cls([1])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else -1

    def is_zero(self):
        return not self.coeffs

    def lc(self):
        return self.coeffs[-1] if self.coeffs else 0

    def tower(self):
        """Smallest tower containing all coefficients (None for rationals)."""
        t = None
        for c in self.coeffs:
            ct = tower_of(c)
            if ct is not None:
                t = ct if t is None else t.common(ct)
        return t

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return (len(self.coeffs) == len(other.coeffs)
                    and all(a == b for a, b in zip(self.coeffs, other.coeffs)))
        if _is_rational(other) or isinstance(other, TowerElement):
            return self == UniPoly([other])
        return NotImplemented

    def __hash__(self):
        return hash(tuple(_key(c) for c in self.coeffs))

    def __add__(self, other):
        other = _as_uni(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return UniPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_uni(other))

    def __rsub__(self, other):
        return _as_uni(other) - self

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            return UniPoly(_poly_mul(list(self.coeffs), list(other.coeffs)))
        return UniPoly([c * other for c in self.coeffs])

    __rmul__ = __mul__

    def __pow__(self, n):
        out = UniPoly([1])
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c):
        return UniPoly([c * a for a in self.coeffs])

    def monic(self):
        if not self.coeffs:
            return self
        inv = scalar_inverse(self.lc())
        return UniPoly([c * inv for c in self.coeffs])

    def derivative(self):
        return UniPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        inv = scalar_inverse(other.lc())
        r = list(self.coeffs)
        db = other.degree()
        q = [0] * max(0, len(r) - db)
        for k in range(len(r) - 1, db - 1, -1):
            c = r[k]
            if c == 0:
                continue
            c = c * inv
            q[k - db] = c
            for t, b in enumerate(other.coeffs):
                r[k - db + t] = r[k - db + t] - c * b
        return UniPoly(q), UniPoly(r[:db] if db > 0 else [])

    def __floordiv__(self, other):
        return self.divmod(_as_uni(other))[0]

    def __mod__(self, other):
        return self.divmod(_as_uni(other))[1]

    def exact_div(self, other):
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def gcd(self, other):
        """Monic gcd (zero if both are zero)."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def xgcd(self, other):
        """Return (g, s, t) with s*self + t*other = g."""
        r0, r1 = self, other
        s0, s1 = UniPoly([1]), UniPoly()
        t0, t1 = UniPoly(), UniPoly([1])
        while not r1.is_zero():
            q, r = r0.divmod(r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        return r0, s0, t0

    def order_at_zero(self):
        for k, c in enumerate(self.coeffs):
            if c != 0:
                return k
        return math.inf

    def shift(self, c):
        """Return p(v + c)."""
        out = UniPoly()
        lin = UniPoly([c, 1])
        for a in reversed(self.coeffs):
            out = out * lin + UniPoly([a])
        return out

    def compose(self, other):
        out = UniPoly()
        for a in reversed(self.coeffs):
            out = out * other + UniPoly([a])
        return out

    def reverse(self, degree=None):
        """Coefficient reversal ``v**d * p(1/v)``."""
        d = self.degree() if degree is None else degree
        c = list(self.coeffs) + [0] * (d + 1 - len(self.coeffs))
        return UniPoly(c[::-1])

    def map_coeffs(self, fn):
        return UniPoly([fn(c) for c in self.coeffs])

    def multiplicity_of(self, factor):
        """Largest k with ``factor**k`` dividing ``self``."""
        if self.is_zero():
            return math.inf
        k, p = 0, self
        while True:
            q, r = p.divmod(factor)
            if not r.is_zero():
                return k
            k, p = k + 1, q

    def __repr__(self):
        return uni_to_str(self, "v")


def _as_uni(x):
    return x if isinstance(x, UniPoly) else UniPoly([x])


def uni_to_str(p, var="v"):
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree(), -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        cs = str(c) if _is_rational(c) else f"({c!r})"
        mon = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mon:
            parts.append(cs)
        elif c == 1:
            parts.append(mon)
        elif _is_rational(c) and c == -1:
            parts.append("-" + mon)
        else:
            parts.append(f"{cs}*{mon}")
    return " + ".join(parts).replace("+ -", "- ")


def resultant(a, b):
    """Resultant of two univariate polynomials over a field (Euclid)."""
    if a.is_zero() or b.is_zero():
        return 0
    res = 1
    while True:
        da, db = a.degree(), b.degree()
        if db == 0:
            return res * b.lc() ** da
        r = a % b
        if r.is_zero():
            return 0
        dr = r.degree()
        if (da * db) % 2:
            res = -res
        res = res * b.lc() ** (da - dr)
        a, b = b, r


# ---------------------------------------------------------------------------
# factorization


def squarefree_factor(p):
    """Squarefree decomposition by Yun's algorithm.

    Parameters
    ----------
    p : UniPoly
        Nonzero polynomial over a field of characteristic zero.

    Returns
    -------
    list of (UniPoly, int)
        Monic, pairwise coprime, squarefree factors with multiplicities;
        their product equals ``p`` up to the leading coefficient.
    """
    if p.is_zero():
        raise ValueError("squarefree_factor of the zero polynomial")
    if p.degree() == 0:
        return []
    p = p.monic()
    dp = p.derivative()
    a = p.gcd(dp)
    b = p.exact_div(a)
    c = dp.exact_div(a) if not a.is_zero() else dp
    d = c - b.derivative()
    out = []
    for i in count(1):
        if b.degree() == 0:
            break
        g = b.gcd(d)
        b = b.exact_div(g)
        c = d.exact_div(g)
        d = c - b.derivative()
        if g.degree() > 0:
            out.append((g, i))
    return out


def _factor_rational(p):
    """Irreducible monic factors over Q (sympy factor_list)."""
    v = sympy.Symbol("v")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * v ** k
               for k, c in enumerate(map(Fraction, p.coeffs)))
    _, facs = sympy.factor_list(sympy.Poly(expr, v, domain="QQ"))
    out = []
    for fac, mult in facs:
        coeffs = [Fraction(int(c.p), int(c.q))
                  for c in reversed(sympy.Poly(fac, v).all_coeffs())]
        q = UniPoly(coeffs).monic()
        out.extend([q] * mult)
    return out


def _lagrange(points, values):
    """Interpolating polynomial through (points, values) by divided differences."""
    n = len(points)
    coef = list(values)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (points[i] - points[i - j])
    p = UniPoly([coef[-1]])
    for i in range(n - 2, -1, -1):
        p = p * UniPoly([-points[i], 1]) + UniPoly([coef[i]])
    return p


def _norm_poly(p, tower):
    """Norm of p in K[v] down to the base of K, by interpolation.

    N(v) = Res_t(minpoly(t), P(v, t)) has degree deg(p) * [K : base]; it is
    evaluated exactly at deg + 1 rational points.
    """
    deg = p.degree() * tower.top_degree
    pts = [Fraction(k) for k in range(deg + 1)]
    vals = []
    for x in pts:
        val = tower.coerce(p(x))
        vals.append(val.norm())
    return _lagrange(pts, vals)


def _coerce_poly(p, tower):
    if tower is None or not tower.levels:
        return p.map_coeffs(lambda c: Fraction(rational_value(c))
                            if rational_value(c) is not None else c)
    return p.map_coeffs(tower.coerce)


def irreducible_factor(p, tower=None):
    """Monic irreducible factors of a squarefree polynomial over ``tower``.

    Parameters
    ----------
    p : UniPoly
        Squarefree, nonzero.
    tower : FieldTower or None
        Coefficient field; None or depth 0 means the rationals.

    Returns
    -------
    list of UniPoly
        Monic irreducible factors whose product is ``p`` up to a unit.

    Notes
    -----
    Over an extension K = F(a) the norm method is used: shift v -> v - s*a
    until the norm N(v) in F[v] is squarefree, factor N over F, and recover
    each factor over K as gcd(p(v - s*a), N_k(v)).
    """
    if p.is_zero():
        raise ValueError("irreducible_factor of the zero polynomial")
    if p.degree() <= 0:
        return []
    if tower is None or not tower.levels:
        if any(rational_value(c) is None for c in p.coeffs):
            raise TowerMismatch("coefficients outside the rationals")
        return _factor_rational(p.map_coeffs(rational_value))
    p = _coerce_poly(p, tower).monic()
    if p.degree() == 1:
        return [p]
    alpha = tower.gen()
    for s in range(0, 50):
        shifted = p.shift(-s * alpha) if s else p
        norm = _norm_poly(shifted, tower)
        if norm.gcd(norm.derivative()).degree() == 0:
            break
    else:
        raise ArithmeticError("no squarefree norm found in shift search")
    base_factors = irreducible_factor(norm, tower.base)
    out = []
    rest = shifted
    for q in base_factors:
        qk = _coerce_poly(q, tower)
        g = rest.gcd(qk)
        if g.degree() > 0:
            rest = rest.exact_div(g)
            out.append(g.shift(s * alpha).monic() if s else g.monic())
    if rest.degree() > 0:
        raise ArithmeticError("norm-method factorization incomplete")
    return out


def extend_tower(tower, minpoly, name=None):
    """Adjoin a root of ``minpoly`` to ``tower``.

    Raises
    ------
    ValueError
        If ``minpoly`` is not monic irreducible of degree >= 2.
    ExtensionDegreeExceeded
        If the absolute degree would exceed ``tower.max_ext_degree``.
    """
    if minpoly.degree() < 2:
        raise ValueError("extension needs a minimal polynomial of degree >= 2")
    if tower.degree * minpoly.degree() > tower.max_ext_degree:
        raise ExtensionDegreeExceeded(
            f"degree {tower.degree * minpoly.degree()} exceeds bound "
            f"{tower.max_ext_degree}")
    minpoly = _coerce_poly(minpoly, tower if tower.levels else None)
    if minpoly.lc() != 1:
        raise ValueError("minimal polynomial must be monic")
    facs = irreducible_factor(minpoly, tower)
    if len(facs) != 1:
        raise ValueError(f"{minpoly} is reducible over {tower!r}")
    name = name or f"a{tower.depth + 1}"
    return FieldTower(tower.levels + ((name, minpoly),), tower.max_ext_degree)


def full_factor(p, tower=None):
    """Irreducible factorization with multiplicities, ``[(q, k), ...]``."""
    out = []
    for s, k in squarefree_factor(p):
        for q in irreducible_factor(s, tower):
            out.append((q, k))
    return out


# ---------------------------------------------------------------------------
# bivariate polynomials


class BivariatePoly:
    """Sparse bivariate polynomial, terms ``{(i, j): coefficient}``.

    ``i`` is the exponent of the first variable and ``j`` of the second.
    Zero coefficients are never stored.
    """

    __slots__ = ("terms", "names")

    def __init__(self, terms=None, names=("x", "y")):
        clean = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            if c != 0:
                clean[(int(i), int(j))] = c
        self.terms = clean
        self.names = tuple(names)

    @classmethod
    def var(cls, k, names=("x", "y")):
        return cls({(1, 0) if k == 0 else (0, 1): Fraction(1)}, names)

    @classmethod
    def const(cls, c, names=("x", "y")):
        return cls({(0, 0): c}, names)

    def renamed(self, names):
        return BivariatePoly(self.terms, names)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, BivariatePoly):
            if self.terms.keys() != other.terms.keys():
                return False
            return all(self.terms[k] == other.terms[k] for k in self.terms)
        if _is_rational(other):
            return self == BivariatePoly.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset((k, _key(c)) for k, c in self.terms.items()))

    def __add__(self, other):
        other = _as_bi(other, self.names)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return BivariatePoly(t, self.names)

    __radd__ = __add__

    def __neg__(self):
        return BivariatePoly({k: -c for k, c in self.terms.items()}, self.names)

    def __sub__(self, other):
        return self + (-_as_bi(other, self.names))

    def __rsub__(self, other):
        return _as_bi(other, self.names) - self

    def __mul__(self, other):
        if not isinstance(other, BivariatePoly):
            return BivariatePoly({k: c * other for k, c in self.terms.items()},
                                 self.names)
        t = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                t[k] = t.get(k, 0) + c1 * c2
        return BivariatePoly(t, self.names)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = BivariatePoly.const(1, self.names)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def diff(self, k):
        """Partial derivative in the first (k=0) or second (k=1) variable."""
        t = {}
        for (i, j), c in self.terms.items():
            e = i if k == 0 else j
            if e:
                t[(i - 1, j) if k == 0 else (i, j - 1)] = c * e
        return BivariatePoly(t, self.names)

    def __call__(self, x, y):
        acc = 0
        for (i, j), c in self.terms.items():
            acc = acc + c * x ** i * y ** j
        return acc

    def total_degree(self):
        return max((i + j for i, j in self.terms), default=-1)

    def ord(self):
        """Order at the origin (lowest total degree)."""
        return min((i + j for i, j in self.terms), default=math.inf)

    def ord_u(self):
        return min((i for i, _ in self.terms), default=math.inf)

    def ord_v(self):
        return min((j for _, j in self.terms), default=math.inf)

    def initial_form(self):
        e = self.ord()
        return BivariatePoly({k: c for k, c in self.terms.items()
                              if sum(k) == e}, self.names)

    def in_u(self):
        a = self.ord_u()
        return BivariatePoly({k: c for k, c in self.terms.items()
                              if k[0] == a}, self.names)

    def divide_monomial(self, a, b):
        t = {}
        for (i, j), c in self.terms.items():
            if i < a or j < b:
                raise ArithmeticError("monomial does not divide polynomial")
            t[(i - a, j - b)] = c
        return BivariatePoly(t, self.names)

    def times_monomial(self, a, b):
        return BivariatePoly({(i + a, j + b): c
                              for (i, j), c in self.terms.items()}, self.names)

    def restrict_u0(self):
        """Univariate polynomial in the second variable at first variable 0."""
        d = max((j for i, j in self.terms if i == 0), default=-1)
        c = [0] * (d + 1)
        for (i, j), a in self.terms.items():
            if i == 0:
                c[j] = a
        return UniPoly(c)

    def coeff_u(self, k):
        """Coefficient of u**k as a polynomial in v."""
        d = max((j for i, j in self.terms if i == k), default=-1)
        c = [0] * (d + 1)
        for (i, j), a in self.terms.items():
            if i == k:
                c[j] = a
        return UniPoly(c)

    def dehomogenize(self, at="x"):
        """Given a form, return form(1, v) (at='x') or form(v, 1) (at='y')."""
        d = max((j if at == "x" else i for i, j in self.terms), default=-1)
        c = [0] * (d + 1)
        for (i, j), a in self.terms.items():
            c[j if at == "x" else i] = c[j if at == "x" else i] + a
        return UniPoly(c)

    def blowup_a(self):
        """S(u, u*v)."""
        return BivariatePoly({(i + j, j): c for (i, j), c in self.terms.items()},
                             self.names)

    def blowup_b(self):
        """S(u*v, u)."""
        return BivariatePoly({(i + j, i): c for (i, j), c in self.terms.items()},
                             self.names)

    def translate_v(self, c):
        """S(u, v + c)."""
        if c == 0:
            return self
        t = {}
        for (i, j), a in self.terms.items():
            b = 1
            for k in range(j, -1, -1):
                # binomial(j, k) c**(j-k) v**k
                coeff = a * math.comb(j, k) * (c ** (j - k))
                key = (i, k)
                t[key] = t.get(key, 0) + coeff
        return BivariatePoly(t, self.names)

    def substitute(self, x_expr, y_expr):
        """Compose with polynomial maps x = x_expr(u, v), y = y_expr(u, v)."""
        out = BivariatePoly({}, x_expr.names)
        xp, yp = {}, {}
        for (i, j), c in sorted(self.terms.items()):
            if i not in xp:
                xp[i] = x_expr ** i
            if j not in yp:
                yp[j] = y_expr ** j
            out = out + (xp[i] * yp[j]) * c
        return out

    def map_coeffs(self, fn):
        return BivariatePoly({k: fn(c) for k, c in self.terms.items()},
                             self.names)

    def coerce(self, tower):
        if tower is None or not tower.levels:
            return self
        return self.map_coeffs(tower.coerce)

    def tower(self):
        t = None
        for c in self.terms.values():
            ct = tower_of(c)
            if ct is not None:
                t = ct if t is None else t.common(ct)
        return t

    def is_rational(self):
        return all(rational_value(c) is not None for c in self.terms.values())

    def weight(self, a, b):
        """Weighted order min(a*i + b*j) over the support."""
        return min((a * i + b * j for i, j in self.terms), default=math.inf)

    def initial_w(self, a, b):
        w = self.weight(a, b)
        return BivariatePoly({k: c for k, c in self.terms.items()
                              if a * k[0] + b * k[1] == w}, self.names)

    def __repr__(self):
        return bi_to_str(self)


def _as_bi(x, names=("x", "y")):
    return x if isinstance(x, BivariatePoly) else BivariatePoly.const(x, names)


def bi_to_str(f):
    """Canonical text form, descending total degree then first exponent."""
    if f.is_zero():
        return "0"
    xn, yn = f.names
    parts = []
    for (i, j) in sorted(f.terms, key=lambda k: (-(k[0] + k[1]), -k[0])):
        c = f.terms[(i, j)]
        mons = []
        if i:
            mons.append(xn if i == 1 else f"{xn}^{i}")
        if j:
            mons.append(yn if j == 1 else f"{yn}^{j}")
        mon = "*".join(mons)
        if _is_rational(c):
            c = Fraction(c)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if not mon:
                body = str(mag)
            elif mag == 1:
                body = mon
            else:
                body = f"{mag}*{mon}"
        else:
            sign, body = "+", f"({c!r})" + (f"*{mon}" if mon else "")
        parts.append((sign, body))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s


def vanishing_order_u(f):
    """Minimum exponent of the first variable over the support of ``f``."""
    if f.is_zero():
        raise ValueError("vanishing order of the zero polynomial")
    return f.ord_u()


def sympy_expr(f, x, y):
    """Convert a rational BivariatePoly to a sympy expression."""
    return sum(sympy.Rational(Fraction(c).numerator, Fraction(c).denominator)
               * x ** i * y ** j for (i, j), c in f.terms.items())


def from_sympy(expr, x, y, names=("x", "y")):
    poly = sympy.Poly(sympy.expand(expr), x, y, domain="QQ")
    terms = {}
    for (i, j), c in poly.terms():
        terms[(int(i), int(j))] = Fraction(int(c.p), int(c.q))
    return BivariatePoly(terms, names)


def reduced(f):
    """Squarefree part of a rational bivariate polynomial (product of
    distinct irreducible factors), normalized to keep ``f``'s content sign."""
    x, y = sympy.symbols("x y")
    _, facs = sympy.factor_list(sympy_expr(f, x, y), x, y)
    prod = sympy.Integer(1)
    for fac, _ in facs:
        prod *= fac
    return from_sympy(prod, x, y, f.names)


def branch_factors(f):
    """Irreducible factors over Q with their multiplicities."""
    x, y = sympy.symbols("x y")
    _, facs = sympy.factor_list(sympy_expr(f, x, y), x, y)
    return [(from_sympy(fac, x, y, f.names), int(k)) for fac, k in facs]


def is_reduced(f):
    return all(k == 1 for _, k in branch_factors(f))


# ---------------------------------------------------------------------------
# newton polygon


class NewtonPolygon:
    """Lower convex hull of a bivariate support.

    Attributes
    ----------
    support : list of (int, int)
    vertices : list of (int, int)
        Hull vertices from the one nearest the second axis to the one
        nearest the first axis.
    faces : list of ((int, int), (int, int), (int, int))
        Compact faces ``(start, end, normal)``, normal primitive with both
        entries positive, listed in order of decreasing absolute slope.
    """

    def __init__(self, f):
        if f.is_zero():
            raise ValueError("Newton polygon of the zero polynomial")
        self.f = f
        self.support = sorted(f.terms)
        pts = sorted(set(self.support))
        # lower hull by monotone chain on points sorted by (i, j)
        hull = []
        for p in pts:
            while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
                hull.pop()
            hull.append(p)
        # keep the decreasing part: from min-i point down to min-j point
        start = min(pts, key=lambda p: (p[0], p[1]))
        end = min(pts, key=lambda p: (p[1], p[0]))
        verts = [p for p in hull if start[0] <= p[0] <= end[0]]
        chain = [verts[0]]
        for p in verts[1:]:
            if p[1] < chain[-1][1]:
                chain.append(p)
        self.vertices = chain
        self.faces = []
        for a, b in zip(chain, chain[1:]):
            di, dj = b[0] - a[0], a[1] - b[1]
            g = math.gcd(di, dj)
            # inward normal (n1, n2) with n1*i + n2*j constant on the face
            self.faces.append((a, b, (dj // g, di // g)))

    def normals(self):
        return [n for _, _, n in self.faces]

    def weight(self, normal):
        return self.f.weight(*normal)

    def initial(self, normal):
        return self.f.initial_w(*normal)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_polygon(f):
    """Newton polygon of ``f`` (must vanish at the origin)."""
    if f.terms.get((0, 0), 0) != 0:
        raise ValueError("newton_polygon needs f(0, 0) = 0")
    return NewtonPolygon(f)


# ---------------------------------------------------------------------------
# numerical embeddings


class Embedding:
    """Complex embedding of a tower fixed by a root index per level.

    Parameters
    ----------
    tower : FieldTower
    path : tuple of int
        Index into the (sorted) complex roots of each level's minimal
        polynomial, evaluated under the embedding of the levels below.
    dps : int or None
        If given, evaluate with mpmath at this precision.
    """

    def __init__(self, tower, path=(), dps=None):
        self.tower = tower
        self.path = tuple(path) + (0,) * (tower.depth - len(path))
        self.dps = dps
        self._gens = []
        for lvl in range(tower.depth):
            sub = tower.truncate(lvl + 1)
            roots = self._level_roots(sub)
            self._gens.append(roots[self.path[lvl]])

    def _level_roots(self, sub):
        mp = sub.minpoly
        coeffs = [self._eval(c, sub.depth - 1) for c in mp.coeffs]
        if self.dps:
            import mpmath
            with mpmath.workdps(self.dps):
                roots = mpmath.polyroots(list(reversed(coeffs)),
                                         maxsteps=200, extraprec=2 * self.dps)
            roots = [mpmath.mpc(r) for r in roots]
        else:
            import numpy as np
            roots = list(np.roots(list(reversed([complex(c) for c in coeffs]))))
            roots = [_polish_root(coeffs, r) for r in roots]
        return sorted(roots, key=lambda z: (round(float(z.real), 9),
                                            round(float(z.imag), 9)))

    def _eval(self, c, depth):
        if _is_rational(c):
            if self.dps:
                import mpmath
                return mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator
            return complex(Fraction(c))
        d = c.tower.depth
        g = self._gens[d - 1]
        acc = 0
        for a in reversed(c.coeffs):
            acc = acc * g + self._eval(a, d - 1)
        return acc

    def __call__(self, c):
        return self._eval(c, self.tower.depth)

    def uni(self, p):
        """Complex coefficient list (ascending) of a UniPoly."""
        return [self(c) for c in p.coeffs]

    def bi(self, f):
        return {k: self(c) for k, c in f.terms.items()}


def _polish_root(coeffs, r, iters=3):
    """A few Newton steps on a numpy root for double accuracy."""
    p = coeffs
    for _ in range(iters):
        val, der = 0j, 0j
        for c in reversed(p):
            der = der * r + val
            val = val * r + c
        if der == 0:
            break
        step = val / der
        r = r - step
        if abs(step) < 1e-17 * max(1.0, abs(r)):
            break
    return r


def embeddings(tower, dps=None):
    """All complex embeddings of ``tower``, in mixed-radix path order."""
    out = []
    _enum(tower, (), dps, out)
    return out


def _enum(tower, prefix, dps, out):
    lvl = len(prefix)
    if lvl == tower.depth:
        out.append(Embedding(tower, prefix, dps))
        return
    d = tower.levels[lvl][1].degree()
    for k in range(d):
        _enum(tower, prefix + (k,), dps, out)


def lcm(a, b):
    return a * b // math.gcd(a, b)


def gcd_list(values):
    return reduce(math.gcd, values, 0)
