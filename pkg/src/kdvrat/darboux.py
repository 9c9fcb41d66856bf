"""Darboux-Crum transformations and their action on the recursion polynomials.

sigma is always reduced to a rational function: for phi0 = e^(kL) q the
logarithmic derivative is k*lambda + q_x/q, so the exponential never leaks
into the transformation calculus.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import ExpFun
from .errors import (
    CrossCheckFailure,
    IdentityFailure,
    NotASolution,
    RiccatiViolation,
)
from .kdv import GDSequence, gd_sequence, lax_data
from .ring import RF_ZERO, RatFun, as_ratfun


def log_derivative(phi0: ExpFun | RatFun) -> RatFun:
    """(log phi0)_x as a rational function; phi0 must be a single e^(kL) q term."""
    if isinstance(phi0, RatFun):
        return phi0.diff("x") / phi0
    if len(phi0.terms) != 1:
        raise NotASolution("log-derivative is rational only for single-exponential seeds")
    (k, q), = phi0.terms.items()
    lam = phi0.lam_value()
    return lam * k + q.diff("x") / q


def energy_of(phi0: ExpFun | RatFun, u: RatFun) -> RatFun:
    """The constant E0 with (-d_xx + u - E0) phi0 = 0; raises if there is none."""
    sigma = log_derivative(phi0)
    e0 = u - sigma.diff("x") - sigma * sigma
    if not e0.diff("x").is_zero or not e0.diff("t").is_zero:
        raise NotASolution("seed does not solve a Schroedinger equation at constant energy")
    return e0


def schrodinger_residual(phi, u: RatFun, E) -> ExpFun:
    """phi_xx - (u - E) phi."""
    if not isinstance(phi, ExpFun):
        phi = ExpFun.from_ratfun(as_ratfun(phi), 1)
    u_term = ExpFun.from_ratfun(u - as_ratfun(E), phi.level, phi.lam)
    return phi.diff("x").diff("x") - u_term * phi


@dataclass(frozen=True)
class DarbouxContext:
    """Seed data for one Darboux step: potential, seed, its sigma and energy."""

    u: RatFun
    phi0: ExpFun
    sigma: RatFun
    E0: RatFun

    @staticmethod
    def make(u: RatFun, phi0: ExpFun | RatFun, check: bool = True) -> "DarbouxContext":
        if isinstance(phi0, RatFun):
            phi0 = ExpFun.from_ratfun(phi0, 1)
        sigma = log_derivative(phi0)
        e0 = u - sigma.diff("x") - sigma * sigma
        if check and (not e0.diff("x").is_zero or not e0.diff("t").is_zero):
            raise NotASolution("phi0 fails the Schroedinger check for every constant energy")
        return DarbouxContext(u=u, phi0=phi0, sigma=sigma, E0=e0)


def dt_potential(u: RatFun, phi0: ExpFun | RatFun, check: bool = True) -> RatFun:
    """Transformed potential u - 2 (log phi0)_xx."""
    ctx = DarbouxContext.make(u, phi0, check=check)
    return u - 2 * ctx.sigma.diff("x")


def dt_function(phi0: ExpFun | RatFun, phi: ExpFun | RatFun, u: RatFun | None = None) -> ExpFun:
    """phi_x - (phi0_x/phi0) phi; checks both inputs against u when supplied."""
    sigma = log_derivative(phi0)
    if not isinstance(phi, ExpFun):
        base = phi0 if isinstance(phi0, ExpFun) else None
        phi = ExpFun.from_ratfun(as_ratfun(phi), base.level if base else 1, base.lam if base else None)
    if u is not None:
        energy_of(phi0, u)
        e = energy_of(phi, u) if len(phi.terms) == 1 else None
        if e is None and not schrodinger_residual(phi, u, RF_ZERO).is_zero:
            raise NotASolution("phi does not solve the Schroedinger equation for u")
    sig = ExpFun.from_ratfun(sigma, phi.level, phi.lam)
    return phi.diff("x") - sig * phi


@dataclass(frozen=True)
class ASequence:
    """Shift polynomials A_j (f_j of the transformed minus original potential)."""

    as_: tuple  # RatFun, A_0 .. A_{r+1}
    ps: tuple  # RatFun polynomial in E, P_0 .. P_r

    def a(self, j: int) -> RatFun:
        return self.as_[j]

    def p(self, i: int) -> RatFun:
        return self.ps[i]


def riccati_energy(u: RatFun, sigma: RatFun) -> RatFun:
    """E0 from sigma_x = u - E0 - sigma^2; raises RiccatiViolation if non-constant."""
    e0 = u - sigma.diff("x") - sigma * sigma
    if not e0.diff("x").is_zero or not e0.diff("t").is_zero:
        raise RiccatiViolation("sigma does not solve a constant-energy Riccati equation")
    return e0


def a_sequence(u: RatFun, sigma: RatFun, r: int, constants=None,
               seq: GDSequence | None = None) -> ASequence:
    """Build A_0..A_{r+1} by the first recursion; the second is verified exactly."""
    riccati_energy(u, sigma)
    seq = seq or gd_sequence(u, r, constants)
    sx = sigma.diff("x")
    a_list = [RF_ZERO]
    for j in range(1, r + 2):
        prev = a_list[j - 1]
        aj = -prev.diff("x").diff("x") / 4 + u * prev - sx * prev * 3 / 2 - sx * seq.fs[j - 1]
        if aj.diff("x") + 2 * sigma * aj + 2 * seq.fs[j].diff("x") != RF_ZERO:
            raise CrossCheckFailure(f"second recursion fails at j={j}")
        a_list.append(aj)
    E = RatFun.var("E")
    ps = []
    for i in range(r + 1):
        p = RF_ZERO
        for j in range(i + 1):
            p = p + E ** j * a_list[i - j]
        ps.append(p)
    return ASequence(as_=tuple(a_list), ps=tuple(ps))


def fj_shift_residuals(u: RatFun, sigma: RatFun, r: int, constants=None) -> list[RatFun]:
    """f_j(u_tilde) - f_j(u) - A_j for j = 0..r+1 (all zero by the shift theorem)."""
    aseq = a_sequence(u, sigma, r, constants)
    ut = u - 2 * sigma.diff("x")
    su = gd_sequence(u, r, constants)
    st = gd_sequence(ut, r, constants)
    return [st.fs[j] - su.fs[j] - aseq.as_[j] for j in range(r + 2)]


def corollary_sum(u: RatFun, sigma: RatFun, i: int) -> RatFun:
    """Sum over j of (2 sigma A_{i-j} + 2 f_{i-j,x}(u) + A_{i-j,x}) E^j; contract 0."""
    aseq = a_sequence(u, sigma, i)
    seq = gd_sequence(u, i)
    E = RatFun.var("E")
    total = RF_ZERO
    for j in range(i + 1):
        term = 2 * sigma * aseq.as_[i - j] + 2 * seq.fs[i - j].diff("x") + aseq.as_[i - j].diff("x")
        total = total + E ** j * term
    return total


def p_relation_residual(u: RatFun, sigma: RatFun, i: int) -> RatFun:
    """P_{i,x} + 2 sigma P_i + 2 F_{i,x}(u); contract 0."""
    aseq = a_sequence(u, sigma, i)
    lax = lax_data(gd_sequence(u, i))
    p = aseq.ps[i]
    return p.diff("x") + 2 * sigma * p + 2 * lax.Fr.diff("x")


def sigma_t(u: RatFun, sigma: RatFun, r: int) -> RatFun:
    """The time derivative of sigma along the level-r flow, as -A_{r+1}.

    Both closed forms are computed and compared exactly; the common value is
    returned.  u must solve the level-r equation for the result to be the
    actual t-derivative.
    """
    aseq = a_sequence(u, sigma, r)
    lhs = -aseq.as_[r + 1]
    lax = lax_data(gd_sequence(u, r))
    E = RatFun.var("E")
    p = aseq.ps[r]
    sx = sigma.diff("x")
    rhs = p.diff("x").diff("x") / 4 + E * p + sx * lax.Fr + p * (-2 * u + 3 * sx) / 2
    if lhs != rhs:
        raise IdentityFailure("the two expressions for sigma_t disagree")
    return lhs


def gr_relations(u: RatFun, sigma: RatFun, r: int) -> tuple[RatFun, RatFun]:
    """Residuals of (2 sigma +- d_x) applied to -A_{r+1} against both flows."""
    aseq = a_sequence(u, sigma, r)
    g = -aseq.as_[r + 1]
    ut = u - 2 * sigma.diff("x")
    lhs1 = 2 * sigma * g + g.diff("x") - 2 * gd_sequence(u, r).fs[r + 1].diff("x")
    lhs2 = 2 * sigma * g - g.diff("x") - 2 * gd_sequence(ut, r).fs[r + 1].diff("x")
    if not (lhs1.is_zero and lhs2.is_zero):
        raise IdentityFailure("g_r relations violated")
    return lhs1, lhs2
