"""Spectral curves of stationary potentials and the Darboux action on them.

A curve is mu^2 = R(E) with constant rational coefficients.  The ordinate is
handled through the symbols ``mu``/``mu0`` which store i times the curve
ordinate, so that sigma_+ = (mu + F_x/2)/F and the transformed Green's
function are rational over Q; the reduction rule on the curve is therefore
mu^2 -> -R(E) (and mu0^2 -> -R(E0)).  Green's functions are stored
structurally as (F, curve) with g = -F/(2 mu); all Appendix divisions are
exact polynomial divisions in E.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .calculus import FPoly, fpoly_from_ratfun_coeffs
from .errors import (
    DegreeViolation,
    HomogeneityFailure,
    InexactDivision,
    NotOnCurve,
    NotStationarySolution,
    NotStationary,
)
from .kdv import gd_sequence, lax_data, skdv_residual
from .ring import RF_ONE, RF_ZERO, Poly, Rat, RatFun, as_ratfun, var_name


# ---------------------------------------------------------------------------
# Curves and points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralCurve:
    """mu^2 = R(E) with R of degree 2n+1 and constant coefficients."""

    n: int
    coeffs: tuple  # Rat, C_0 .. C_{2n+1}

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def C(self, i: int) -> Rat:
        return self.coeffs[i] if i < len(self.coeffs) else Rat(0)

    def R_ratfun(self) -> RatFun:
        E = RatFun.var("E")
        total = RF_ZERO
        for i, c in enumerate(self.coeffs):
            if c:
                total = total + E ** i * RatFun.const(c)
        return total

    def R_at(self, e0) -> Rat:
        acc = Rat(0)
        power = Rat(1)
        for c in self.coeffs:
            acc += c * power
            power *= e0
        return acc

    def R_derivative_at(self, e0) -> Rat:
        acc = Rat(0)
        power = Rat(1)
        for i, c in enumerate(self.coeffs[1:], start=1):
            acc += i * c * power
            power *= e0
        return acc

    def __repr__(self) -> str:
        from .render import ratfun_plain
        mu = RatFun.var("mu")
        return f"mu^2 = {ratfun_plain(self.R_ratfun())}"


@dataclass(frozen=True)
class CurvePoint:
    """A classified point of the projective closure of the curve."""

    kind: str  # "affine" | "infinity"
    classification: str  # "regular" | "affine_singular" | "point_at_infinity"
    E0: Rat | None = None
    mu0: Rat | None = None  # explicit ordinate when rational; None = symbolic


def infinity_point(curve: SpectralCurve) -> CurvePoint:
    return CurvePoint(kind="infinity", classification="point_at_infinity")


def classify_point(curve: SpectralCurve, E0=None, mu0=None, at_infinity: bool = False) -> CurvePoint:
    """Classify a candidate point; raises NotOnCurve for inconsistent data.

    mu0 may be a rational ordinate (checked against mu0^2 = R(E0)) or None,
    meaning a symbolic ordinate subject to that relation.
    """
    if at_infinity:
        return infinity_point(curve)
    if E0 is None:
        raise NotOnCurve("affine point needs E0")
    E0 = Rat(E0)
    r0 = curve.R_at(E0)
    if mu0 is not None:
        mu0 = Rat(mu0)
        if mu0 * mu0 != r0:
            raise NotOnCurve(f"mu0^2 = {mu0 * mu0} but R(E0) = {r0}")
    if r0 != 0:
        return CurvePoint(kind="affine", classification="regular", E0=E0, mu0=mu0)
    if curve.R_derivative_at(E0) != 0:
        return CurvePoint(kind="affine", classification="regular", E0=E0, mu0=Rat(0))
    return CurvePoint(kind="affine", classification="affine_singular", E0=E0, mu0=Rat(0))


def spectral_curve(u0: RatFun, n: int) -> SpectralCurve:
    """Characteristic-polynomial curve of the stationary level-n system."""
    if "t" in u0.variables():
        raise NotStationary("potential must be stationary")
    if not skdv_residual(u0, n).is_zero:
        raise NotStationarySolution("potential does not solve the stationary level-n equation")
    expr = _curve_expression(u0, n)
    coeffs = [Rat(0)] * (2 * n + 2)
    for e, c in expr.coeffs_in("E").items():
        if not c.is_const:
            raise NotStationarySolution("curve coefficients failed to be constant")
        coeffs[e] = c.const_value()
    if coeffs[2 * n + 1] == 0:
        raise DegreeViolation("curve polynomial does not reach degree 2n+1")
    return SpectralCurve(n=n, coeffs=tuple(coeffs))


def _curve_expression(u0: RatFun, n: int) -> RatFun:
    lax = lax_data(gd_sequence(u0, n))
    F = lax.Fr
    Fx = F.diff("x")
    return F * Fx.diff("x") / 2 - (u0 - RatFun.var("E")) * F * F - Fx * Fx / 4


def c0_check(u0: RatFun, n: int) -> RatFun:
    """d_x of the constant coefficient against -2 f_n f_{n+1,x}; contract 0.

    Valid for any potential: when u0 is not a stationary solution the
    coefficient depends on x but the identity still holds.
    """
    seq = gd_sequence(u0, n)
    expr = _curve_expression(u0, n)
    c0 = expr.substitute({"E": RF_ZERO})
    return c0.diff("x") + 2 * seq.fs[n] * seq.fs[n + 1].diff("x")


def transformed_curve(curve: SpectralCurve, pt: CurvePoint) -> SpectralCurve:
    """Darboux action on the curve: blow-down at infinity, identity at regular
    points, blow-up at affine singular points."""
    if pt.classification == "point_at_infinity":
        return SpectralCurve(n=curve.n + 1, coeffs=(Rat(0), Rat(0)) + curve.coeffs)
    if pt.classification == "regular":
        return curve
    e0 = pt.E0
    coeffs = list(curve.coeffs)
    for _ in range(2):
        # synthetic division by (E - e0); the remainder must vanish
        quot = [Rat(0)] * (len(coeffs) - 1)
        acc = coeffs[-1]
        for i in range(len(coeffs) - 2, -1, -1):
            quot[i] = acc
            acc = coeffs[i] + acc * e0
        if acc != 0:
            raise InexactDivision("(E - E0)^2 does not divide the curve polynomial")
        coeffs = quot
    return SpectralCurve(n=curve.n - 1, coeffs=tuple(coeffs))


# ---------------------------------------------------------------------------
# mu-reduction
# ---------------------------------------------------------------------------

def _poly_reduce_even_powers(p: Poly, name: str, square_value: RatFun) -> RatFun:
    """Rewrite name^2 -> square_value throughout a polynomial."""
    out = RF_ZERO
    sym = RatFun.var(name)
    for e, coeff in p.coeffs_in(name).items():
        q, s = divmod(e, 2)
        term = RatFun.from_poly(coeff) * square_value ** q
        if s:
            term = term * sym
        out = out + term
    return out


def reduce_on_curve(f: RatFun, curve: SpectralCurve, name: str = "mu", e0=None) -> RatFun:
    """Reduce powers of mu (i times the ordinate) using mu^2 -> -R(E).

    With name="mu0" and e0 given, reduces mu0^2 -> -R(E0) instead.
    """
    if e0 is None:
        square = -curve.R_ratfun()
    else:
        square = RatFun.const(-curve.R_at(Rat(e0)))
    num = _poly_reduce_even_powers(f.num, name, square)
    den = _poly_reduce_even_powers(f.den, name, square)
    if den.is_zero:
        raise NotOnCurve("denominator vanishes identically on the curve")
    return num / den


# ---------------------------------------------------------------------------
# Green's functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Green:
    """g = -F/(2 mu) on the curve (mu stores i times the ordinate)."""

    u: RatFun
    F: RatFun  # polynomial in E with x-rational coefficients
    curve: SpectralCurve

    def as_ratfun(self) -> RatFun:
        return -self.F / (2 * RatFun.var("mu"))


def green(u0: RatFun, n: int) -> Green:
    curve = spectral_curve(u0, n)
    F = lax_data(gd_sequence(u0, n)).Fr
    return Green(u=u0, F=F, curve=curve)


def sigma_pm(u0: RatFun, n: int) -> tuple[RatFun, RatFun]:
    """The two Riccati solutions (mu + F_x/2)/F and (-mu + F_x/2)/F."""
    F = lax_data(gd_sequence(u0, n)).Fr
    mu = RatFun.var("mu")
    half_fx = F.diff("x") / 2
    return (mu + half_fx) / F, (-mu + half_fx) / F


def green_identity_residual(g: Green) -> RatFun:
    """(1/2) g g_xx - (u - E) g^2 - (1/4) g_x^2 + 1/4, reduced on the curve."""
    grf = g.as_ratfun()
    gx = grf.diff("x")
    expr = (
        grf * gx.diff("x") / 2
        - (g.u - RatFun.var("E")) * grf * grf
        - gx * gx / 4
        + RatFun.const(Rat(1, 4))
    )
    return reduce_on_curve(expr, g.curve)


# ---------------------------------------------------------------------------
# Transformed Green's functions (affine points)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformedGreen:
    """g-tilde = -F/(2 mu-tilde) with mu-tilde = mu/(E - E0)^shift."""

    u: RatFun  # the original potential
    point: CurvePoint
    F: RatFun  # may involve the symbol mu0 at a regular point with mu0 != 0
    curve: SpectralCurve  # curve of the transformed potential
    shift: int  # 0 for regular points, 1 for affine singular ones

    def as_ratfun(self) -> RatFun:
        e_shift = (RatFun.var("E") - RatFun.const(self.point.E0)) ** self.shift
        return -self.F * e_shift / (2 * RatFun.var("mu"))


def division_polynomial(F: RatFun, E0, n: int) -> RatFun:
    """P with F(E0) F_x - F_x(E0) F = (E - E0) P; exact, degree <= n-1 in E.

    E0 may be a rational value or the symbol E0 (as a RatFun).
    """
    e0 = as_ratfun(E0)
    F0 = F.substitute({"E": e0})
    lhs = F0 * F.diff("x") - F0.diff("x") * F
    num = fpoly_from_ratfun_coeffs(lhs, "E")
    den = FPoly("E", [-e0, RF_ONE])
    quot, rem = num.divmod(den)
    if not rem.is_zero:
        raise InexactDivision("(E - E0) does not divide the cross-derivative combination")
    P = quot.to_ratfun()
    if e_degree(P) > n - 1:
        raise DegreeViolation("division polynomial exceeds degree n-1")
    return P


def e_degree(f: RatFun) -> int:
    """Degree in E of an E-polynomial rational function."""
    if f.den.degree("E") > 0:
        raise DegreeViolation("value is not polynomial in E")
    return f.num.degree("E")


def transformed_green(u0: RatFun, n: int, pt: CurvePoint, imu0=None, cross_check: bool = True):
    """Green data of the Darboux-transformed potential at an affine point.

    At a regular point with nonzero ordinate, the seed's log-derivative is
    sigma0 = (mu0 + F(E0)_x/2)/F(E0) with mu0 = i*(ordinate): pass its exact
    rational value as `imu0` when it exists (imu0^2 = -R(E0)), else the
    symbol mu0 is carried.  The returned F is checked against the direct
    sigma-product formula for the transformed Green's function.
    """
    if pt.kind != "affine":
        raise NotOnCurve("transformed_green needs an affine point (use homogenized_green at infinity)")
    curve = spectral_curve(u0, n)
    lax = lax_data(gd_sequence(u0, n))
    F = lax.Fr
    e0 = RatFun.const(pt.E0)
    F0 = F.substitute({"E": e0})
    P = division_polynomial(F, pt.E0, n)
    r0 = curve.R_at(pt.E0)
    if pt.classification == "affine_singular" or (pt.mu0 is not None and pt.mu0 == 0):
        m0: RatFun = RF_ZERO
    elif imu0 is not None:
        m0 = as_ratfun(imu0)
        if m0 * m0 != RatFun.const(-r0):
            raise NotOnCurve("imu0^2 must equal -R(E0)")
    else:
        m0 = RatFun.var("mu0")
    sigma0 = (m0 + F0.diff("x") / 2) / F0
    N = F + P.diff("x") / (2 * F0) - P * sigma0 / F0
    if pt.classification == "affine_singular":
        numerator = fpoly_from_ratfun_coeffs(N, "E")
        quot, rem = numerator.divmod(FPoly("E", [-e0, RF_ONE]))
        if not rem.is_zero:
            raise InexactDivision("transformed numerator not divisible by (E - E0)")
        Ft = quot.to_ratfun()
        new_curve = transformed_curve(curve, pt)
        shift = 1
        want_deg = n - 1
    else:
        Ft = N
        new_curve = curve
        shift = 0
        want_deg = n
    if e_degree(Ft) != want_deg:
        raise DegreeViolation(f"transformed F has E-degree {e_degree(Ft)}, expected {want_deg}")
    out = TransformedGreen(u=u0, point=pt, F=Ft, curve=new_curve, shift=shift)
    if cross_check:
        _check_sigma_product_form(u0, curve, pt, F, F0, sigma0, out)
    return out


def _check_sigma_product_form(u0, curve, pt, F, F0, sigma0, out: TransformedGreen) -> None:
    """Verify N against ((F_x/2 - sigma0 F)^2 - mu^2)/((E - E0) F) on the curve."""
    mu = RatFun.var("mu")
    e0 = RatFun.const(pt.E0)
    E = RatFun.var("E")
    direct = ((F.diff("x") / 2 - sigma0 * F) ** 2 - mu * mu) / ((E - e0) * F)
    direct = reduce_on_curve(direct, curve)
    target = out.F * (E - e0) ** out.shift
    diff = direct - target
    if "mu0" in diff.variables():
        diff = reduce_on_curve(diff, curve, name="mu0", e0=pt.E0)
    if not diff.is_zero:
        raise InexactDivision("sigma-product form of the transformed Green's function disagrees")


# ---------------------------------------------------------------------------
# Homogenized Green's functions (the projective picture)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomogenizedGreen:
    """(g-tilde)_h = -N/(2 mu E nu^(n-1)) + correction/(2 mu E nu^(n-2) mu0).

    N is homogeneous of degree n+1 in (E, nu).  The correction term is only
    present in the C_0 != 0 case (Prop-5.4-type points); at the point at
    infinity it vanishes and N = nu^2 Fhat_xx/2 + (E - nu u) Fhat.
    """

    u: RatFun
    n: int
    N: RatFun  # homogeneous principal numerator
    correction: RatFun  # the mu0-linear piece already divided by (2 mu E nu^(n-2) mu0 f^2)-denominator data
    curve_after: SpectralCurve

    def as_ratfun(self) -> RatFun:
        mu = RatFun.var("mu")
        E = RatFun.var("E")
        nu = RatFun.var("nu")
        main = -self.N / (2 * mu * E * nu ** (self.n - 1))
        return main + self.correction


def homogenize_F(u0: RatFun, n: int) -> RatFun:
    """Fhat = sum f_{n-j} nu^(n-j) E^j, homogeneous of degree n in (E, nu)."""
    seq = gd_sequence(u0, n)
    E = RatFun.var("E")
    nu = RatFun.var("nu")
    total = RF_ZERO
    for j in range(n + 1):
        total = total + seq.fs[n - j] * nu ** (n - j) * E ** j
    return total


def _bihomogeneous_degree(f: RatFun, names=("E", "nu")) -> int:
    """Common total degree in `names` of every monomial; raises otherwise."""
    if any(f.den.degree(nm) > 0 for nm in names):
        raise HomogeneityFailure("denominator involves the homogenising variables")
    degs = set()
    for mono, _ in f.num.terms.items():
        d = 0
        for vid, e in mono:
            if var_name(vid) in names:
                d += e
        degs.add(d)
    if len(degs) != 1:
        raise HomogeneityFailure(f"inhomogeneous degrees {sorted(degs)}")
    return degs.pop()


def homogenized_green(u0: RatFun, n: int, pt: CurvePoint, imu0_over_nu0=None) -> HomogenizedGreen:
    """The homogenized Green's function of the transformed operator.

    Supported points: the point at infinity (requires C_0 = 0) and the
    E0 = 0 points off the affine singular locus (requires C_0 != 0), the two
    cases with proved closed forms.  `imu0_over_nu0` optionally gives the
    exact rational value of i*mu0/nu0 (its square must be -C_0).
    """
    curve = spectral_curve(u0, n)
    c0 = curve.C(0)
    seq = gd_sequence(u0, n)
    f_n = seq.fs[n]
    Fh = homogenize_F(u0, n)
    nu = RatFun.var("nu")
    E = RatFun.var("E")
    mu = RatFun.var("mu")
    # the homogenisation of F_{n,x} is d_x(Fh)/nu, of F_{n,xx} is d_xx(Fh)/nu^2
    base = nu * Fh.diff("x").diff("x") / 2 + (E - nu * u0) * Fh
    if pt.classification == "point_at_infinity":
        if c0 != 0:
            raise NotOnCurve("the point at infinity lies on the E = 0 fibre only when C_0 = 0")
        N = base
        if _bihomogeneous_degree(N) != n + 1:
            raise HomogeneityFailure("principal numerator is not homogeneous of degree n+1")
        new_coeffs = (Rat(0), Rat(0)) + curve.coeffs
        return HomogenizedGreen(
            u=u0, n=n, N=N, correction=RF_ZERO,
            curve_after=SpectralCurve(n=n + 1, coeffs=new_coeffs),
        )
    if pt.kind != "affine" or pt.E0 != 0:
        raise NotOnCurve("supported points: infinity, or E0 = 0 with nonzero ordinate")
    if c0 == 0:
        raise NotOnCurve("E0 = 0 with nonzero ordinate requires C_0 != 0")
    fx = f_n.diff("x")
    N = (
        base
        + nu * fx * fx * Fh / (4 * f_n * f_n)
        - nu * fx * Fh.diff("x") / (2 * f_n)
        - nu * RatFun.const(c0) * Fh / (f_n * f_n)
    )
    if _bihomogeneous_degree(N) != n + 1:
        raise HomogeneityFailure("principal numerator is not homogeneous of degree n+1")
    if imu0_over_nu0 is not None:
        ratio = as_ratfun(imu0_over_nu0)
        if ratio * ratio != RatFun.const(-c0):
            raise NotOnCurve("(i mu0/nu0)^2 must equal -C_0")
        inv_ratio = ratio.inverse()
    else:
        # carry mu0, nu0 symbolically; mu0^2 -> -C_0 nu0^2 downstream
        inv_ratio = RatFun.var("nu0") / RatFun.var("mu0")
    correction = (
        -RatFun.const(c0)
        * inv_ratio
        * (f_n * Fh.diff("x") - fx * Fh)
        / (2 * mu * E * nu ** (n - 2) * f_n * f_n)
    )
    return HomogenizedGreen(u=u0, n=n, N=N, correction=correction, curve_after=curve)
