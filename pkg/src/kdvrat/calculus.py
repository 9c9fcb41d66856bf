"""Differential structure on the rational tower.

Provides the derivations d/dx, d/dt, d/dlambda, exact antiderivatives in x by
Hermite reduction (the residual logarithmic part must vanish - a nonzero
residual raises, by design), and arithmetic in the exponential extension
generated by e^(L) with L = lambda*x + (-1)^r lambda^(2r+1) t.

Symbols tau_j, taup_j, taum_j, c_j, E, E0, mu, mu0, nu, nu0 are constants for
every derivation here; in particular d/dt tau_j = 0, so time derivatives are
only meaningful once tau values have been substituted by explicit functions
of t.
"""

from __future__ import annotations

from .errors import (
    DivisionByZero,
    LevelMismatch,
    NonRationalAntiderivative,
)
from .ring import RF_ONE, RF_ZERO, Poly, Rat, RatFun, as_ratfun

_DERIVATION_VARS = ("x", "t", "lambda")


# ---------------------------------------------------------------------------
# Univariate polynomials over the rational-function field
# ---------------------------------------------------------------------------

class FPoly:
    """Dense univariate polynomial in a main variable, with RatFun coefficients.

    Coefficients must be free of the main variable.  Used for Hermite
    reduction in x and for exact divisions in E.
    """

    __slots__ = ("var", "coeffs")

    def __init__(self, var: str, coeffs: list[RatFun]):
        while coeffs and coeffs[-1].is_zero:
            coeffs.pop()
        self.var = var
        self.coeffs = coeffs

    @staticmethod
    def zero(var: str) -> "FPoly":
        return FPoly(var, [])

    @staticmethod
    def const(var: str, c: RatFun) -> "FPoly":
        return FPoly(var, [c])

    @property
    def deg(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> RatFun:
        return self.coeffs[-1]

    def __eq__(self, other) -> bool:
        return isinstance(other, FPoly) and self.var == other.var and self.coeffs == other.coeffs

    def __add__(self, other: "FPoly") -> "FPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return FPoly(self.var, out)

    def __neg__(self) -> "FPoly":
        return FPoly(self.var, [-c for c in self.coeffs])

    def __sub__(self, other: "FPoly") -> "FPoly":
        return self + (-other)

    def __mul__(self, other: "FPoly") -> "FPoly":
        if self.is_zero or other.is_zero:
            return FPoly(self.var, [])
        out = [RF_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero:
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_zero:
                    continue
                out[i + j] = out[i + j] + a * b
        return FPoly(self.var, out)

    def scale(self, c: RatFun) -> "FPoly":
        return FPoly(self.var, [a * c for a in self.coeffs])

    def monic(self) -> "FPoly":
        if self.is_zero or self.lc() == RF_ONE:
            return self
        return self.scale(self.lc().inverse())

    def divmod(self, other: "FPoly") -> tuple["FPoly", "FPoly"]:
        if other.is_zero:
            raise DivisionByZero("division by the zero polynomial")
        q = [RF_ZERO] * max(0, len(self.coeffs) - len(other.coeffs) + 1)
        r = list(self.coeffs)
        db = other.deg
        inv_lc = other.lc().inverse()
        while len(r) - 1 >= db and r:
            dr = len(r) - 1
            c = r[-1] * inv_lc
            q[dr - db] = c
            for j, b in enumerate(other.coeffs):
                r[dr - db + j] = r[dr - db + j] - c * b
            while r and r[-1].is_zero:
                r.pop()
        return FPoly(self.var, q), FPoly(self.var, r)

    def exact_div(self, other: "FPoly") -> "FPoly":
        q, r = self.divmod(other)
        if not r.is_zero:
            raise NonRationalAntiderivative("inexact division inside Hermite reduction")
        return q

    def mod(self, other: "FPoly") -> "FPoly":
        return self.divmod(other)[1]

    def derivative(self) -> "FPoly":
        return FPoly(self.var, [c * (i + 1) for i, c in enumerate(self.coeffs[1:])])

    def gcd(self, other: "FPoly") -> "FPoly":
        a, b = self, other
        while not b.is_zero:
            r = a.mod(b)
            if not r.is_zero:
                r = r.monic()
            a, b = b, r
        return a.monic()

    def xgcd(self, other: "FPoly") -> tuple["FPoly", "FPoly", "FPoly"]:
        """Extended euclid: returns (g, s, t) with s*self + t*other = g, g monic."""
        var = self.var
        r0, r1 = self, other
        s0, s1 = FPoly.const(var, RF_ONE), FPoly.zero(var)
        t0, t1 = FPoly.zero(var), FPoly.const(var, RF_ONE)
        while not r1.is_zero:
            q, r = r0.divmod(r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        if r0.is_zero:
            return r0, s0, t0
        c = r0.lc().inverse()
        return r0.scale(c), s0.scale(c), t0.scale(c)

    def to_ratfun(self) -> RatFun:
        xv = RatFun.var(self.var)
        total = RF_ZERO
        power = RF_ONE
        for c in self.coeffs:
            if not c.is_zero:
                total = total + c * power
            power = power * xv
        return total

    def __repr__(self) -> str:
        return f"FPoly({self.var}, {self.coeffs!r})"


def ratfun_as_fpoly_pair(f: RatFun, var: str) -> tuple[FPoly, FPoly]:
    """Write f = N/D with N, D polynomials in `var` over the remaining field."""
    def convert(p: Poly) -> FPoly:
        coeffs_map = p.coeffs_in(var)
        if not coeffs_map:
            return FPoly(var, [])
        out = [RF_ZERO] * (max(coeffs_map) + 1)
        for e, q in coeffs_map.items():
            out[e] = RatFun.from_poly(q)
        return FPoly(var, out)

    return convert(f.num), convert(f.den)


def fpoly_from_ratfun_coeffs(f: RatFun, var: str) -> FPoly:
    """f must be polynomial in `var`; returns it as an FPoly."""
    cmap = f.coeffs_in(var)
    if not cmap:
        return FPoly(var, [])
    out = [RF_ZERO] * (max(cmap) + 1)
    for e, q in cmap.items():
        out[e] = q
    return FPoly(var, out)


# ---------------------------------------------------------------------------
# Squarefree decomposition and Hermite reduction
# ---------------------------------------------------------------------------

def squarefree_decomposition(d: FPoly) -> list[tuple[FPoly, int]]:
    """Yun's algorithm: monic d = prod P_i^i with the P_i squarefree, coprime."""
    d = d.monic()
    dp = d.derivative()
    g = d.gcd(dp)
    if g.deg <= 0:
        return [(d, 1)] if d.deg > 0 else []
    out: list[tuple[FPoly, int]] = []
    c = d.exact_div(g)
    w = dp.exact_div(g)
    i = 1
    while c.deg > 0:
        w = w - c.derivative()
        y = c.gcd(w)
        if y.deg > 0:
            out.append((y, i))
            c = c.exact_div(y)
            w = w.exact_div(y)
        i += 1
    return out


def _inverse_mod(a: FPoly, m: FPoly) -> FPoly:
    g, s, _ = a.mod(m).xgcd(m)
    if g.deg != 0:
        raise NonRationalAntiderivative("unexpected common factor in Hermite reduction")
    return s.mod(m)


def hermite_reduce(a: FPoly, d: FPoly) -> tuple[RatFun, FPoly, FPoly]:
    """Reduce the proper fraction a/d.

    Returns (g, c, v) with a/d = (d/dx) g + c/v where v is squarefree.  The
    fraction a/d need not be in lowest terms.
    """
    var = d.var
    d = d.monic()
    parts = [[p, m] for p, m in squarefree_decomposition(d)]
    g_total = RF_ZERO
    a_cur = a
    for idx, (p, mult) in enumerate(parts):
        vp = p.derivative()
        for j in range(mult, 1, -1):
            # current denominator is prod q^e; split off p^j: u = the rest
            u = FPoly.const(var, RF_ONE)
            for k, (q, e) in enumerate(parts):
                if k != idx:
                    u = u * _fpow(q, e)
            # solve (j-1) * u * p' * B = -a_cur  (mod p)
            rhs = (-a_cur).scale(RatFun.const(Rat(1, j - 1)))
            binv = _inverse_mod((u * vp).mod(p), p)
            b = (rhs.mod(p) * binv).mod(p)
            # new numerator: (a_cur + (j-1) B p' u - B' u p)/p
            numer = a_cur + (u * vp * b).scale(RatFun.const(j - 1)) - b.derivative() * u * p
            a_cur = numer.exact_div(p)
            g_total = g_total + b.to_ratfun() / _fpow(p, j - 1).to_ratfun()
            parts[idx][1] = j - 1
    v = FPoly.const(var, RF_ONE)
    for q, _ in parts:
        v = v * q
    return g_total, a_cur, v


def _fpow(p: FPoly, n: int) -> FPoly:
    out = FPoly.const(p.var, RF_ONE)
    for _ in range(n):
        out = out * p
    return out


def integrate_x(f: RatFun) -> RatFun:
    """Antiderivative in x with no additive constant.

    Polynomial part is integrated termwise; the proper part goes through
    Hermite reduction.  If the post-Hermite residual is nonzero the
    antiderivative is not rational and NonRationalAntiderivative is raised.
    """
    if f.is_zero:
        return RF_ZERO
    num, den = ratfun_as_fpoly_pair(f, "x")
    if den.deg <= 0:
        quot, rem = num.scale(den.lc().inverse()), FPoly.zero("x")
    else:
        quot, rem = num.divmod(den)
    xv = RatFun.var("x")
    total = RF_ZERO
    power = xv
    for i, c in enumerate(quot.coeffs):
        if not c.is_zero:
            total = total + c * power / (i + 1)
        power = power * xv
    if rem.is_zero:
        return total
    g, resid, v = hermite_reduce(rem, den.monic())
    # account for the leading coefficient folded out of den
    lc = den.lc()
    if not resid.is_zero:
        raise NonRationalAntiderivative(
            "integrand has a nonzero logarithmic residual; no rational antiderivative"
        )
    return total + g / lc


def diff(obj, name: str):
    """Derivation dispatch for RatFun and ExpFun values."""
    if name not in _DERIVATION_VARS:
        raise ValueError(f"not a derivation variable: {name!r}")
    if isinstance(obj, ExpFun):
        return obj.diff(name)
    return as_ratfun(obj).diff(name)


# ---------------------------------------------------------------------------
# The exponential extension
# ---------------------------------------------------------------------------

class ExpFun:
    """Finite sum over integers k of e^(k L) q_k(x, t, lambda, ...).

    Here L = lambda*x + (-1)^r lambda^(2r+1) t for the hierarchy level r, and
    the q_k are rational.  When ``lam`` is set, lambda has been specialised to
    that concrete value inside L (and must then not occur in the q_k).  The
    k = 0 component is the pure rational part; products add exponents.
    """

    __slots__ = ("level", "terms", "lam")

    def __init__(self, level: int, terms: dict[int, RatFun], lam: RatFun | None = None):
        self.level = level
        self.terms = {k: q for k, q in terms.items() if not q.is_zero}
        self.lam = lam

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_ratfun(q, level: int, lam: RatFun | None = None) -> "ExpFun":
        return ExpFun(level, {0: as_ratfun(q)}, lam)

    @staticmethod
    def exponential(level: int, k: int = 1, lam: RatFun | None = None) -> "ExpFun":
        return ExpFun(level, {k: RF_ONE}, lam)

    # -- inspection ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_rational(self) -> bool:
        return all(k == 0 for k in self.terms)

    def rational_part(self) -> RatFun:
        return self.terms.get(0, RF_ZERO)

    def as_ratfun(self) -> RatFun:
        if not self.is_rational:
            raise ValueError("value has genuine exponential terms")
        return self.rational_part()

    def exponent_support(self) -> set[int]:
        return set(self.terms)

    def lam_value(self) -> RatFun:
        return self.lam if self.lam is not None else RatFun.var("lambda")

    def _t_coefficient(self) -> RatFun:
        lam = self.lam_value()
        sign = -1 if self.level % 2 else 1
        return lam ** (2 * self.level + 1) * sign

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpFun):
            other = ExpFun.from_ratfun(as_ratfun(other), self.level, self.lam)
        if self.is_rational and other.is_rational:
            return self.rational_part() == other.rational_part()
        return (
            self.level == other.level
            and self.lam == other.lam
            and self.terms == other.terms
        )

    def _compatible(self, other: "ExpFun") -> None:
        if self.is_rational or other.is_rational:
            return
        if self.level != other.level or self.lam != other.lam:
            raise LevelMismatch(
                f"exponential levels differ: ({self.level}, {self.lam}) vs ({other.level}, {other.lam})"
            )

    def _merge_meta(self, other: "ExpFun") -> tuple[int, RatFun | None]:
        if self.is_rational and not other.is_rational:
            return other.level, other.lam
        return self.level, self.lam

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "ExpFun":
        other = _as_expfun(other, self)
        self._compatible(other)
        level, lam = self._merge_meta(other)
        out = dict(self.terms)
        for k, q in other.terms.items():
            s = out.get(k, RF_ZERO) + q
            if s.is_zero:
                out.pop(k, None)
            else:
                out[k] = s
        return ExpFun(level, out, lam)

    __radd__ = __add__

    def __neg__(self) -> "ExpFun":
        return ExpFun(self.level, {k: -q for k, q in self.terms.items()}, self.lam)

    def __sub__(self, other) -> "ExpFun":
        return self + (-_as_expfun(other, self))

    def __rsub__(self, other) -> "ExpFun":
        return _as_expfun(other, self) + (-self)

    def __mul__(self, other) -> "ExpFun":
        other = _as_expfun(other, self)
        self._compatible(other)
        level, lam = self._merge_meta(other)
        out: dict[int, RatFun] = {}
        for k1, q1 in self.terms.items():
            for k2, q2 in other.terms.items():
                k = k1 + k2
                s = out.get(k, RF_ZERO) + q1 * q2
                if s.is_zero:
                    out.pop(k, None)
                else:
                    out[k] = s
        return ExpFun(level, out, lam)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExpFun":
        other = _as_expfun(other, self)
        if other.is_zero:
            raise DivisionByZero("division by zero")
        if len(other.terms) != 1:
            raise ValueError("can only divide by a single-exponential value")
        (k2, q2), = other.terms.items()
        return ExpFun(
            self._merge_meta(other)[0],
            {k - k2: q / q2 for k, q in self.terms.items()},
            self._merge_meta(other)[1],
        )

    def diff(self, name: str) -> "ExpFun":
        if name not in _DERIVATION_VARS:
            raise ValueError(f"not a derivation variable: {name!r}")
        lam = self.lam_value()
        out: dict[int, RatFun] = {}
        for k, q in self.terms.items():
            if name == "x":
                dq = q.diff("x") + lam * (k * q)
            elif name == "t":
                dq = q.diff("t") + self._t_coefficient() * (k * q)
            else:
                if self.lam is not None:
                    raise ValueError("lambda already specialised; d/dlambda unavailable")
                xpart = RatFun.var("x")
                sign = -1 if self.level % 2 else 1
                lfac = xpart + RatFun.var("t") * (sign * (2 * self.level + 1)) * lam ** (2 * self.level)
                dq = q.diff("lambda") + lfac * (k * q)
            if not dq.is_zero:
                out[k] = dq
        return ExpFun(self.level, out, self.lam)

    def substitute(self, bindings: dict) -> "ExpFun":
        """Substitute in the rational layer.

        Substituting lambda specialises the exponent as well; lambda -> 0
        collapses every exponential to 1.  Substituting t touches only the
        rational coefficients (the exponent keeps its formal t), which is the
        behaviour wanted by structural classification.
        """
        binds = dict(bindings)
        lam_val = binds.pop("lambda", None)
        new_terms: dict[int, RatFun] = {}
        for k, q in self.terms.items():
            if binds or lam_val is not None:
                sub = dict(binds)
                if lam_val is not None and self.lam is None:
                    sub["lambda"] = lam_val
                q = q.substitute(sub) if sub else q
            if q.is_zero:
                continue
            new_terms[k] = new_terms.get(k, RF_ZERO) + q
        lam = self.lam
        if lam_val is not None and self.lam is None:
            lam_val = as_ratfun(lam_val)
            if lam_val.is_zero:
                collapsed = RF_ZERO
                for q in new_terms.values():
                    collapsed = collapsed + q
                return ExpFun(self.level, {0: collapsed} if not collapsed.is_zero else {})
            lam = lam_val
        cleaned = {k: q for k, q in new_terms.items() if not q.is_zero}
        return ExpFun(self.level, cleaned, lam)

    def __repr__(self) -> str:
        from .render import expfun_plain
        return expfun_plain(self)


def _as_expfun(value, like: ExpFun) -> ExpFun:
    if isinstance(value, ExpFun):
        return value
    return ExpFun.from_ratfun(as_ratfun(value), like.level, like.lam)


def exp_arith(a: ExpFun, b: ExpFun, op: str) -> ExpFun:
    """Dispatch form of exponential arithmetic (CLI/service surface)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unsupported exponential operation {op!r}")


def wronskian(f, g):
    """W(f, g) = f g_x - f_x g for RatFun or ExpFun arguments."""
    if isinstance(f, ExpFun) or isinstance(g, ExpFun):
        if not isinstance(f, ExpFun):
            f = ExpFun.from_ratfun(f, g.level, g.lam)
        if not isinstance(g, ExpFun):
            g = ExpFun.from_ratfun(g, f.level, f.lam)
        return f * g.diff("x") - f.diff("x") * g
    f = as_ratfun(f)
    g = as_ratfun(g)
    return f * g.diff("x") - f.diff("x") * g
