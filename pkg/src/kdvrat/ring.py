"""Exact coefficient tower: rationals, sparse multivariate polynomials and
fully reduced rational functions.

Coefficients are arbitrary-precision rationals (``gmpy2.mpq`` when available,
``fractions.Fraction`` otherwise).  A polynomial is a sparse map from
monomials to nonzero coefficients; a monomial is a tuple of
``(variable id, exponent)`` pairs sorted by variable rank.  The term order is
graded lexicographic with respect to the fixed ranking

    x > lambda > E > mu > nu > t > tau_j > taup_j > taum_j > c_j > E0 > mu0 > nu0

(the derivation variable x is always the most significant).  A rational
function is kept canonical at all times: gcd(num, den) = 1 and den monic in
the term order, so equality of values is structural equality.

Convention for mu, mu0, nu, nu0: the quantities stored under ``mu``/``mu0``
are i times the curve ordinates, so that every spectral formula stays inside
Q.  On a curve with ordinate-square R(E) the reduction rule used downstream is
therefore ``mu^2 -> -R(E)``; see :mod:`kdvrat.spectral`.

All values are immutable after construction and all operations are pure
functions, so objects are safe to share between threads.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Iterator, Mapping

from .errors import DenominatorVanishes, DivisionByZero, InexactDivision, UnknownVariable

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is normally present
    from fractions import Fraction as Rat

RAT_ZERO = Rat(0)
RAT_ONE = Rat(1)


def rat(value, den=None) -> Rat:
    """Coerce to an exact rational."""
    if den is not None:
        return Rat(value) / Rat(den)
    if isinstance(value, str):
        return Rat(value)
    return Rat(value)


# ---------------------------------------------------------------------------
# The variable alphabet
# ---------------------------------------------------------------------------
#
# Smaller id = higher rank in the term order.  Indexed families get disjoint
# id blocks; jet variables (u0, u1, ...) and solver unknowns (a0, a1, ...)
# are internal-only and rank below everything public.

_BASE_RANKS = {"x": 0, "lambda": 1, "E": 2, "mu": 3, "nu": 4, "t": 5}
_FAMILY_BASES = {"tau": 100, "taup": 200, "taum": 300, "c": 400}
_TAIL_RANKS = {"E0": 500, "mu0": 501, "nu0": 502}
_JET_BASE = 600
_UNKNOWN_BASE = 800

_FAMILY_RE = re.compile(r"^(tau|taup|taum)_(\d+)$|^(c)_(\d+)$")
_JET_RE = re.compile(r"^u(\d+)$")
_UNKNOWN_RE = re.compile(r"^a(\d+)$")

_name_to_id: dict[str, int] = {}
_id_to_name: dict[int, str] = {}


def _register(name: str, vid: int) -> int:
    _name_to_id[name] = vid
    _id_to_name[vid] = name
    return vid


for _n, _i in {**_BASE_RANKS, **_TAIL_RANKS}.items():
    _register(_n, _i)


def var_id(name: str) -> int:
    """Return the interned id of a variable name, registering it if valid."""
    vid = _name_to_id.get(name)
    if vid is not None:
        return vid
    m = _FAMILY_RE.match(name)
    if m is not None:
        if m.group(1) is not None:
            family, idx = m.group(1), int(m.group(2))
            if idx < 2 or idx >= 100:
                raise UnknownVariable(f"index of {family}_j must satisfy 2 <= j < 100: {name!r}")
        else:
            family, idx = m.group(3), int(m.group(4))
            if idx < 1 or idx >= 100:
                raise UnknownVariable(f"index of c_j must satisfy 1 <= j < 100: {name!r}")
        return _register(name, _FAMILY_BASES[family] + idx)
    m = _JET_RE.match(name)
    if m is not None:
        return _register(name, _JET_BASE + int(m.group(1)))
    m = _UNKNOWN_RE.match(name)
    if m is not None:
        return _register(name, _UNKNOWN_BASE + int(m.group(1)))
    raise UnknownVariable(f"unknown variable {name!r}")


def var_name(vid: int) -> str:
    return _id_to_name[vid]


def is_public_var(name: str) -> bool:
    """Whether a name belongs to the CLI-facing alphabet (no jets, no solver unknowns)."""
    try:
        vid = var_id(name)
    except UnknownVariable:
        return False
    return vid < _JET_BASE


def jet_var(k: int) -> str:
    """Name of the k-th jet variable (u0 = the potential, u1 = its x-derivative, ...)."""
    return f"u{k}"


def unknown_var(k: int) -> str:
    """Name of the k-th solver unknown."""
    return f"a{k}"


# ---------------------------------------------------------------------------
# Monomials
# ---------------------------------------------------------------------------

Mono = tuple  # tuple[tuple[int, int], ...] sorted by variable id

_EMPTY: Mono = ()


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mono_div(m1: Mono, m2: Mono) -> Mono | None:
    """m1 / m2, or None when not divisible."""
    if not m2:
        return m1
    out = []
    d2 = dict(m2)
    for v, e in m1:
        e2 = d2.pop(v, 0)
        if e2 > e:
            return None
        if e > e2:
            out.append((v, e - e2))
    if d2:
        return None
    return tuple(out)


def _mono_key(m: Mono):
    """Sort key realising graded lex order (larger key = later in the order)."""
    return (sum(e for _, e in m), tuple((-v, e) for v, e in m))


def _mono_degree(m: Mono, vid: int) -> int:
    for v, e in m:
        if v == vid:
            return e
    return 0


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

class Poly:
    """Sparse multivariate polynomial over Q.  Immutable by convention."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        # Trusted constructor: terms must be canonical (no zero coefficients).
        self.terms = terms

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return _P_ZERO

    @staticmethod
    def one() -> "Poly":
        return _P_ONE

    @staticmethod
    def const(c) -> "Poly":
        c = Rat(c)
        if c == 0:
            return _P_ZERO
        return Poly({_EMPTY: c})

    @staticmethod
    def var(name: str, exp: int = 1) -> "Poly":
        if exp < 0:
            raise ValueError("polynomial exponents are non-negative")
        if exp == 0:
            return _P_ONE
        return Poly({((var_id(name), exp),): RAT_ONE})

    @staticmethod
    def from_terms(items: Iterable[tuple[Mono, Rat]]) -> "Poly":
        acc: dict = {}
        for m, c in items:
            nc = acc.get(m, RAT_ZERO) + c
            if nc:
                acc[m] = nc
            elif m in acc:
                del acc[m]
        return Poly(acc)

    # -- predicates / inspection ----------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _EMPTY in self.terms)

    def const_value(self) -> Rat:
        if not self.terms:
            return RAT_ZERO
        if self.is_const:
            return self.terms[_EMPTY]
        raise ValueError("not a constant polynomial")

    def variables(self) -> set[str]:
        out: set[str] = set()
        for m in self.terms:
            for v, _ in m:
                out.add(var_name(v))
        return out

    def degree(self, name: str | None = None) -> int:
        """Total degree, or degree in one variable; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        if name is None:
            return max(sum(e for _, e in m) for m in self.terms)
        vid = var_id(name)
        return max(_mono_degree(m, vid) for m in self.terms)

    def leading(self) -> tuple[Mono, Rat]:
        m = max(self.terms, key=_mono_key)
        return m, self.terms[m]

    def sorted_terms(self) -> list[tuple[Mono, Rat]]:
        return sorted(self.terms.items(), key=lambda kv: _mono_key(kv[0]), reverse=True)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, int):
            return self.terms == Poly.const(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = _as_poly(other)
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            nc = out.get(m, RAT_ZERO) + c
            if nc:
                out[m] = nc
            elif m in out:
                del out[m]
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Poly":
        return _as_poly(other) + (-self)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, type(RAT_ONE))):
            return self.scale(Rat(other))
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.terms or not other.terms:
            return _P_ZERO
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = _mono_mul(m1, m2)
                nc = out.get(m, RAT_ZERO) + c1 * c2
                if nc:
                    out[m] = nc
                elif m in out:
                    del out[m]
        return Poly(out)

    __rmul__ = __mul__

    def scale(self, c) -> "Poly":
        c = Rat(c)
        if not c:
            return _P_ZERO
        if c == 1:
            return self
        return Poly({m: co * c for m, co in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = _P_ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def diff(self, name: str) -> "Poly":
        vid = var_id(name)
        out: dict = {}
        for m, c in self.terms.items():
            e = _mono_degree(m, vid)
            if not e:
                continue
            nm = tuple((v, ee) for v, ee in ((v, ee - 1 if v == vid else ee) for v, ee in m) if ee)
            nc = out.get(nm, RAT_ZERO) + c * e
            if nc:
                out[nm] = nc
            elif nm in out:
                del out[nm]
        return Poly(out)

    def monic(self) -> "Poly":
        """Divide by the leading coefficient (canonical gcd normalisation)."""
        if not self.terms:
            return self
        _, lc = self.leading()
        if lc == 1:
            return self
        return self.scale(1 / lc)

    def coeffs_in(self, name: str) -> dict[int, "Poly"]:
        """View as a univariate polynomial in one variable: degree -> coefficient."""
        vid = var_id(name)
        out: dict[int, dict] = {}
        for m, c in self.terms.items():
            e = _mono_degree(m, vid)
            rest = tuple(p for p in m if p[0] != vid)
            out.setdefault(e, {})[rest] = c
        return {e: Poly(t) for e, t in out.items()}

    @staticmethod
    def from_coeffs_in(name: str, coeffs: Mapping[int, "Poly"]) -> "Poly":
        vid = var_id(name)
        acc: dict = {}
        for e, p in coeffs.items():
            for m, c in p.terms.items():
                nm = _mono_mul(m, ((vid, e),)) if e else m
                nc = acc.get(nm, RAT_ZERO) + c
                if nc:
                    acc[nm] = nc
                elif nm in acc:
                    del acc[nm]
        return Poly(acc)

    def __repr__(self) -> str:
        from .render import poly_plain
        return poly_plain(self)


_P_ZERO = Poly({})
_P_ONE = Poly({_EMPTY: RAT_ONE})


def _as_poly(value) -> Poly:
    if isinstance(value, Poly):
        return value
    return Poly.const(value)


# ---------------------------------------------------------------------------
# Exact division and gcd
# ---------------------------------------------------------------------------

def exact_divide(a: Poly, b: Poly) -> Poly:
    """Quotient q with q*b = a; raises :class:`InexactDivision` otherwise."""
    if b.is_zero:
        raise DivisionByZero("exact division by the zero polynomial")
    if a.is_zero:
        return _P_ZERO
    if b.is_const:
        return a.scale(1 / b.const_value())
    lm_b, lc_b = b.leading()
    quot: dict = {}
    rem = dict(a.terms)
    while rem:
        m = max(rem, key=_mono_key)
        qm = _mono_div(m, lm_b)
        if qm is None:
            raise InexactDivision("polynomial division left a remainder")
        qc = rem[m] / lc_b
        quot[qm] = qc
        for mb, cb in b.terms.items():
            mm = _mono_mul(qm, mb)
            nc = rem.get(mm, RAT_ZERO) - qc * cb
            if nc:
                rem[mm] = nc
            elif mm in rem:
                del rem[mm]
    return Poly(quot)


def divides(b: Poly, a: Poly) -> bool:
    try:
        exact_divide(a, b)
        return True
    except InexactDivision:
        return False


def _mono_content(p: Poly) -> Mono:
    """Largest monomial dividing every term."""
    it = iter(p.terms)
    acc = dict(next(it))
    for m in it:
        if not acc:
            break
        d = dict(m)
        for v in list(acc):
            e = d.get(v, 0)
            if e == 0:
                del acc[v]
            elif e < acc[v]:
                acc[v] = e
    return tuple(sorted(acc.items()))


def _strip_rat_content(p: Poly) -> Poly:
    """Scale so coefficients are coprime integers with positive leading one."""
    num_gcd = 0
    den_lcm = 1
    for c in p.terms.values():
        num_gcd = math.gcd(num_gcd, int(c.numerator))
        den_lcm = den_lcm // math.gcd(den_lcm, int(c.denominator)) * int(c.denominator)
    if num_gcd == 0:
        return p
    scale = Rat(den_lcm, num_gcd)
    _, lc = p.leading()
    if lc < 0:
        scale = -scale
    return p.scale(scale)


def _upoly(p: Poly, vid: int) -> dict[int, Poly]:
    out: dict[int, dict] = {}
    for m, c in p.terms.items():
        e = _mono_degree(m, vid)
        rest = tuple(q for q in m if q[0] != vid)
        out.setdefault(e, {})[rest] = c
    return {e: Poly(t) for e, t in out.items()}


def _upoly_to_poly(up: dict[int, Poly], vid: int) -> Poly:
    acc: dict = {}
    for e, p in up.items():
        tail = ((vid, e),) if e else _EMPTY
        for m, c in p.terms.items():
            nm = _mono_mul(m, tail)
            nc = acc.get(nm, RAT_ZERO) + c
            if nc:
                acc[nm] = nc
            elif nm in acc:
                del acc[nm]
    return Poly(acc)


def _upoly_content(up: dict[int, Poly]) -> Poly:
    coeffs = sorted(up.values(), key=lambda q: len(q.terms))
    g = coeffs[0]
    for q in coeffs[1:]:
        if g.is_const:
            break
        g = poly_gcd(g, q)
    return g.monic() if not g.is_const else _P_ONE


def _pseudo_rem(f: dict[int, Poly], g: dict[int, Poly]) -> dict[int, Poly]:
    """Sloppy pseudo-remainder of f by g in the main variable."""
    dg = max(g)
    lg = g[dg]
    r = dict(f)
    while r:
        dr = max(r)
        if dr < dg:
            break
        lr = r[dr]
        shift = dr - dg
        new: dict[int, Poly] = {}
        for d, c in r.items():
            if d != dr:
                new[d] = c * lg
        for d, c in g.items():
            if d == dg:
                continue
            nd = d + shift
            acc = new.get(nd, _P_ZERO) - lr * c
            if acc.is_zero:
                new.pop(nd, None)
            else:
                new[nd] = acc
        r = new
    return r


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic-normalised gcd via recursive primitive-part pseudo-remainder sequences."""
    if a.is_zero:
        return b.monic()
    if b.is_zero:
        return a.monic()
    if a.is_const or b.is_const:
        return _P_ONE
    ma, mb = _mono_content(a), _mono_content(b)
    mg = _mono_gcd(ma, mb)
    if ma:
        a = Poly({_mono_div(m, ma): c for m, c in a.terms.items()})
    if mb:
        b = Poly({_mono_div(m, mb): c for m, c in b.terms.items()})
    if a.is_const or b.is_const:
        core = _P_ONE
    else:
        vids = {v for m in a.terms for v, _ in m} | {v for m in b.terms for v, _ in m}
        vid = min(vids)
        core = _gcd_main_var(a, b, vid)
    if mg:
        core = Poly({_mono_mul(m, mg): c for m, c in core.terms.items()})
    return core.monic()


def _mono_gcd(m1: Mono, m2: Mono) -> Mono:
    if not m1 or not m2:
        return _EMPTY
    d2 = dict(m2)
    out = []
    for v, e in m1:
        e2 = d2.get(v, 0)
        if e2:
            out.append((v, min(e, e2)))
    return tuple(out)


def _gcd_main_var(a: Poly, b: Poly, vid: int) -> Poly:
    ua, ub = _upoly(a, vid), _upoly(b, vid)
    if max(ua) < max(ub):
        ua, ub = ub, ua
    ca, cb = _upoly_content(ua), _upoly_content(ub)
    cg = poly_gcd(ca, cb)
    f = {e: exact_divide(p, ca) for e, p in ua.items()} if not ca.is_const else ua
    g = {e: exact_divide(p, cb) for e, p in ub.items()} if not cb.is_const else ub
    while True:
        r = _pseudo_rem(f, g)
        if not r:
            break
        if max(r) == 0:
            g = {0: _P_ONE}
            break
        cr = _upoly_content(r)
        if not cr.is_const:
            r = {e: exact_divide(p, cr) for e, p in r.items()}
        r = _upoly(_strip_rat_content(_upoly_to_poly(r, vid)), vid)
        f, g = g, r
    if max(g) == 0:
        core = _P_ONE
    else:
        cgc = _upoly_content(g)
        if not cgc.is_const:
            g = {e: exact_divide(p, cgc) for e, p in g.items()}
        core = _upoly_to_poly(g, vid)
    return (cg * core) if not cg.is_const else core


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    """Dispatch form of polynomial arithmetic (CLI/service surface)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unsupported polynomial operation {op!r}")


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

class RatFun:
    """Reduced rational function: num/den with gcd 1, den monic, zero = 0/1."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        # Trusted constructor; use make() unless canonicality is guaranteed.
        self.num = num
        self.den = den

    @staticmethod
    def make(num: Poly, den: Poly) -> "RatFun":
        if den.is_zero:
            raise DivisionByZero("zero denominator")
        if num.is_zero:
            return RF_ZERO
        if den.is_const:
            c = den.const_value()
            return RatFun(num if c == 1 else num.scale(1 / c), _P_ONE)
        g = poly_gcd(num, den)
        if not g.is_const:
            num = exact_divide(num, g)
            den = exact_divide(den, g)
        _, lc = den.leading()
        if lc != 1:
            num = num.scale(1 / lc)
            den = den.scale(1 / lc)
        return RatFun(num, den)

    @staticmethod
    def from_poly(p: Poly) -> "RatFun":
        return RatFun(p, _P_ONE)

    @staticmethod
    def const(c) -> "RatFun":
        return RatFun(Poly.const(c), _P_ONE)

    @staticmethod
    def var(name: str) -> "RatFun":
        return RatFun(Poly.var(name), _P_ONE)

    # -- predicates -------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_poly(self) -> bool:
        return self.den.is_const

    @property
    def is_const(self) -> bool:
        return self.num.is_const and self.den.is_const

    def const_value(self) -> Rat:
        return self.num.const_value() / self.den.const_value()

    def variables(self) -> set[str]:
        return self.num.variables() | self.den.variables()

    def __eq__(self, other) -> bool:
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self) -> bool:
        return not self.num.is_zero

    # -- arithmetic ---------------------------------------------------------
    #
    # Addition and multiplication use the classical coprime shortcuts so the
    # expensive gcd runs on the smallest operands possible.

    def __add__(self, other) -> "RatFun":
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        d1, d2 = self.den, other.den
        if d1.is_const and d2.is_const:
            return RatFun(self.num + other.num, _P_ONE) if (self.num + other.num) else RF_ZERO
        if d1 == d2:
            return RatFun.make(self.num + other.num, d1)
        g = poly_gcd(d1, d2)
        if g.is_const:
            num = self.num * d2 + other.num * d1
            if num.is_zero:
                return RF_ZERO
            return RatFun(num, d1 * d2)
        q1 = exact_divide(d1, g)
        q2 = exact_divide(d2, g)
        t = self.num * q2 + other.num * q1
        if t.is_zero:
            return RF_ZERO
        h = poly_gcd(t, g)
        if h.is_const:
            return RatFun(t, q1 * d2)
        return RatFun(exact_divide(t, h), exact_divide(q1 * d2, h))

    __radd__ = __add__

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den)

    def __sub__(self, other) -> "RatFun":
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RatFun":
        return as_ratfun(other) + (-self)

    def __mul__(self, other) -> "RatFun":
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return RF_ZERO
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num if g1.is_const else exact_divide(self.num, g1)
        n2 = other.num if g2.is_const else exact_divide(other.num, g2)
        d1 = self.den if g2.is_const else exact_divide(self.den, g2)
        d2 = other.den if g1.is_const else exact_divide(other.den, g1)
        return RatFun(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.is_zero:
            raise DivisionByZero("inverse of zero")
        _, lc = self.num.leading()
        return RatFun(self.den.scale(1 / lc), self.num.scale(1 / lc))

    def __truediv__(self, other) -> "RatFun":
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "RatFun":
        return as_ratfun(other) * self.inverse()

    def __pow__(self, n: int) -> "RatFun":
        if n == 0:
            return RF_ONE
        if n < 0:
            return self.inverse() ** (-n)
        return RatFun(self.num ** n, self.den ** n)

    def diff(self, name: str) -> "RatFun":
        n, d = self.num, self.den
        dn = n.diff(name)
        if d.is_const:
            return RatFun(dn, d) if not dn.is_zero else RF_ZERO
        dd = d.diff(name)
        if dd.is_zero:
            return RatFun.make(dn, d)
        e = poly_gcd(d, dd)
        if e.is_const:
            return RatFun.make(dn * d - n * dd, d * d)
        u = exact_divide(d, e)
        v = exact_divide(dd, e)
        return RatFun.make(dn * u - n * v, d * u)

    # -- substitution ------------------------------------------------------

    def substitute(self, bindings: Mapping[str, "RatFun | Poly | int"]) -> "RatFun":
        """Exact composition; raises DenominatorVanishes if the denominator dies."""
        binds: dict[int, RatFun] = {}
        for name, val in bindings.items():
            binds[var_id(name)] = as_ratfun(val)
        if not binds:
            return self
        num = _poly_eval(self.num, binds)
        den = _poly_eval(self.den, binds)
        if den.is_zero:
            raise DenominatorVanishes("substitution makes the denominator identically zero")
        return num / den

    def degree_in(self, name: str) -> int:
        return max(self.num.degree(name), self.den.degree(name))

    def coeffs_in(self, name: str) -> dict[int, "RatFun"]:
        """Coefficients as a polynomial in one variable (den must not involve it)."""
        if self.den.degree(name) > 0:
            raise ValueError(f"denominator involves {name}; not polynomial in it")
        return {e: RatFun.make(p, self.den) for e, p in self.num.coeffs_in(name).items()}

    def __repr__(self) -> str:
        from .render import ratfun_plain
        return ratfun_plain(self)


RF_ZERO = RatFun(_P_ZERO, _P_ONE)
RF_ONE = RatFun(_P_ONE, _P_ONE)


def as_ratfun(value) -> RatFun:
    if isinstance(value, RatFun):
        return value
    if isinstance(value, Poly):
        return RatFun(value, _P_ONE)
    if isinstance(value, (int, type(RAT_ONE))):
        return RatFun.const(value)
    try:
        return RatFun.const(Rat(value))
    except Exception:
        return NotImplemented


def _poly_eval(p: Poly, binds: dict[int, RatFun]) -> RatFun:
    # Cache powers of bound values; unbound variables pass through.
    powers: dict[tuple[int, int], RatFun] = {}

    def power(vid: int, e: int) -> RatFun:
        key = (vid, e)
        got = powers.get(key)
        if got is None:
            got = binds[vid] ** e
            powers[key] = got
        return got

    total = RF_ZERO
    for m, c in p.terms.items():
        passive = []
        active = None
        for v, e in m:
            if v in binds:
                active = power(v, e) if active is None else active * power(v, e)
            else:
                passive.append((v, e))
        base = RatFun(Poly({tuple(passive): c}), _P_ONE)
        total = total + (base * active if active is not None else base)
    return total


def ratfun_arith(a: RatFun, b: RatFun, op: str) -> RatFun:
    """Dispatch form of rational-function arithmetic (CLI/service surface)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b.is_zero:
            raise DivisionByZero("division by zero rational function")
        return a / b
    raise ValueError(f"unsupported rational operation {op!r}")
