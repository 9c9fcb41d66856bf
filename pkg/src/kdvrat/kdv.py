"""Gelfand-Dickii recursion and the KdV hierarchy objects.

The f_j are differential polynomials in the potential.  They are computed
once in jet coordinates (u0 = u, u1 = u_x, ...) by inverting the total
x-derivative with exact integration by parts, then evaluated at concrete
rational potentials by substituting x-derivatives.  Integration constants c_j
enter as symbols and default to zero on evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FormMismatch, NonRationalAntiderivative, NotStationary
from .ring import RF_ONE, RF_ZERO, Poly, Rat, RatFun, jet_var, var_id
from . import ring


# ---------------------------------------------------------------------------
# Jet-space machinery
# ---------------------------------------------------------------------------

def total_derivative(p: Poly) -> Poly:
    """Total x-derivative in jet coordinates: u_k -> u_{k+1}."""
    out = Poly.zero()
    for name in sorted(p.variables()):
        if not name.startswith("u"):
            continue
        k = int(name[1:])
        dp = p.diff(name)
        if not dp.is_zero:
            out = out + dp * Poly.var(jet_var(k + 1))
    return out


def _top_jet(p: Poly) -> int | None:
    top = None
    for name in p.variables():
        if name.startswith("u") and name[1:].isdigit():
            k = int(name[1:])
            top = k if top is None else max(top, k)
    return top


def invert_total_derivative(p: Poly) -> Poly:
    """Exact inverse of the total derivative, no integration constant.

    Works by integration by parts on the highest jet variable; raises
    NonRationalAntiderivative when p is not a total derivative.
    """
    result = Poly.zero()
    while not p.is_zero:
        k = _top_jet(p)
        if k is None or k == 0:
            raise NonRationalAntiderivative("jet polynomial is not a total x-derivative")
        top = jet_var(k)
        by_deg = p.coeffs_in(top)
        if max(by_deg) > 1:
            raise NonRationalAntiderivative("top jet variable occurs nonlinearly")
        a = by_deg.get(1, Poly.zero())
        below = jet_var(k - 1)
        b = Poly.zero()
        for e, coeff in a.coeffs_in(below).items():
            b = b + coeff * Poly.var(below, e + 1).scale(Rat(1, e + 1))
        result = result + b
        p = p - total_derivative(b)
    return result


_JET_CACHE: list[Poly] = []


def gd_jet_forms(j_max: int) -> list[Poly]:
    """The universal differential polynomials f_0 .. f_{j_max} (with symbolic c_j)."""
    while len(_JET_CACHE) <= j_max:
        j = len(_JET_CACHE)
        if j == 0:
            _JET_CACHE.append(Poly.one())
            continue
        prev = _JET_CACHE[j - 1]
        d1 = total_derivative(prev)
        d3 = total_derivative(total_derivative(d1))
        u0, u1 = Poly.var("u0"), Poly.var("u1")
        integrand = d3.scale(Rat(-1, 4)) + u0 * d1 + u1 * prev.scale(Rat(1, 2))
        fj = invert_total_derivative(integrand) + Poly.var(f"c_{j}")
        _JET_CACHE.append(fj)
    return list(_JET_CACHE[: j_max + 1])


def _eval_jet(p: Poly, derivs: list[RatFun], consts: dict[str, RatFun]) -> RatFun:
    powers: dict[tuple[str, int], RatFun] = {}

    def power(name: str, e: int) -> RatFun:
        key = (name, e)
        got = powers.get(key)
        if got is None:
            if name.startswith("u"):
                base = derivs[int(name[1:])]
            else:
                base = consts[name]
            got = base ** e
            powers[key] = got
        return got

    total = RF_ZERO
    for mono, coeff in p.terms.items():
        term = RatFun.const(coeff)
        for vid, e in mono:
            term = term * power(ring.var_name(vid), e)
        total = total + term
    return total


# ---------------------------------------------------------------------------
# Public objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GDSequence:
    """Potential together with its differential polynomials f_0 .. f_{r+1}."""

    potential: RatFun
    constants: tuple
    fs: tuple  # RatFun, length r + 2

    @property
    def level(self) -> int:
        return len(self.fs) - 2


@dataclass(frozen=True)
class LaxData:
    """F_r, G_r, H_r as exact rational functions polynomial in E."""

    Fr: RatFun
    Gr: RatFun
    Hr: RatFun
    level: int


def gd_sequence(u: RatFun, r: int, constants=None) -> GDSequence:
    """Evaluate the recursion at the potential u through f_{r+1}.

    `constants` is a list of values for c_1.. (padded with zeros), or the
    string "symbolic" to keep the c_j as symbols.
    """
    forms = gd_jet_forms(r + 1)
    symbolic = constants == "symbolic"
    values: list[RatFun] = []
    if not symbolic:
        values = [RatFun.const(c) for c in (constants or [])]
        values += [RF_ZERO] * (r + 1 - len(values))
    consts = {
        f"c_{j}": (RatFun.var(f"c_{j}") if symbolic else values[j - 1])
        for j in range(1, r + 2)
    }
    derivs = [u]
    for _ in range(2 * (r + 1)):
        derivs.append(derivs[-1].diff("x"))
    fs = tuple(_eval_jet(f, derivs, consts) for f in forms)
    stored = tuple("c" for _ in range(r + 1)) if symbolic else tuple(values)
    return GDSequence(potential=u, constants=stored, fs=fs)


def lax_data(seq: GDSequence) -> LaxData:
    """Build F_r = sum f_{r-j} E^j and its companions G_r, H_r."""
    r = seq.level
    E = RatFun.var("E")
    Fr = RF_ZERO
    for j in range(r + 1):
        Fr = Fr + seq.fs[r - j] * E ** j
    Gr = -Fr.diff("x") / 2
    Hr = (E - seq.potential) * Fr + Fr.diff("x").diff("x") / 2
    return LaxData(Fr=Fr, Gr=Gr, Hr=Hr, level=r)


def hierarchy_form_residual(u: RatFun, r: int, seq: GDSequence | None = None) -> RatFun:
    """The right side -1/2 F_xxx - 2(E-u)F_x + u_x F of the level-r flow.

    The result must be independent of E and equal 2 f_{r+1,x}; any
    discrepancy is an internal consistency failure.
    """
    seq = seq or gd_sequence(u, r)
    lax = lax_data(seq)
    E = RatFun.var("E")
    F = lax.Fr
    Fx = F.diff("x")
    form = -Fx.diff("x").diff("x") / 2 - 2 * (E - u) * Fx + u.diff("x") * F
    target = 2 * seq.fs[r + 1].diff("x")
    if form != target:
        raise FormMismatch("the two forms of the level-r flow disagree")
    return form


def kdv_residual(u: RatFun, r: int) -> RatFun:
    """u_t - 2 f_{r+1,x}(u); zero exactly when u solves the level-r equation."""
    seq = gd_sequence(u, r)
    rhs = hierarchy_form_residual(u, r, seq)
    return u.diff("t") - rhs


def skdv_residual(u0: RatFun, n: int) -> RatFun:
    """Stationary residual 2 f_{n+1,x}(u0); u0 must not involve t."""
    if "t" in u0.variables():
        raise NotStationary("stationary potential must not depend on t")
    seq = gd_sequence(u0, n)
    return 2 * seq.fs[n + 1].diff("x")
