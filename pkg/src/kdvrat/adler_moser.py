"""Adler-Moser polynomials, rational soliton potentials and tau adjustment.

theta_{n+1} is built by solving the first-order linear ODE form of the
bilinear recursion: divide by theta_{n-1}^2, integrate in x, multiply back.
The integration constant is exactly tau_{n+1}, which makes its role explicit
and keeps every theta a polynomial.

Adjustment of the tau_j to a hierarchy level solves, sequentially in j, the
algebraic system obtained from the exact flow residual of the potential:
the residual numerator is collected by (x, t)-monomials into polynomial
equations for the unknown ansatz coefficients.  Elimination is linear-first
and refuses to guess: leftover nonlinear equations raise AmbiguousSolution.
Free coefficients (gauge freedom such as time translation) are reported and
pinned to zero, and every found assignment is re-verified against the full
residual before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .calculus import integrate_x
from .errors import (
    AmbiguousSolution,
    InexactDivision,
    NoSolutionWithinBound,
)
from .kdv import gd_jet_forms, kdv_residual
from .ring import RF_ZERO, Poly, Rat, RatFun, unknown_var, var_id, var_name


@dataclass(frozen=True)
class TauAssignment:
    """Values of tau_2..tau_n: symbols when unadjusted, polynomials in t otherwise."""

    level: int | None  # hierarchy level r the values are adjusted to; None = symbolic
    values: tuple  # RatFun values for tau_2 .. tau_n
    mode: str = "symbolic"  # symbolic | adjusted | user
    free_parameters: tuple = ()  # ansatz coefficients left free by the solver (pinned to 0)
    branch_choices: tuple = ()  # root-of-equation choices taken by the solver

    @property
    def n_max(self) -> int:
        return len(self.values) + 1

    def value(self, j: int) -> RatFun:
        return self.values[j - 2]


def symbolic_taus(n: int) -> TauAssignment:
    return TauAssignment(
        level=None,
        values=tuple(RatFun.var(f"tau_{j}") for j in range(2, n + 1)),
        mode="symbolic",
    )


def user_taus(values, level: int | None = None) -> TauAssignment:
    vals = tuple(v if isinstance(v, RatFun) else RatFun.const(v) for v in values)
    for j, v in enumerate(vals, start=2):
        if "x" in v.variables():
            raise ValueError(f"tau_{j} must not depend on x")
    return TauAssignment(level=level, values=vals, mode="user")


@dataclass(frozen=True)
class ThetaSequence:
    """theta_0 .. theta_n together with the tau assignment that produced them."""

    taus: TauAssignment
    thetas: tuple  # Poly

    @property
    def n_max(self) -> int:
        return len(self.thetas) - 1

    def theta(self, n: int) -> Poly:
        if n == -1:
            return Poly.one()
        return self.thetas[n]


def theta_sequence(n: int, taus: TauAssignment) -> ThetaSequence:
    """Construct theta_0..theta_n; each division is exact and checked."""
    if n >= 2 and taus.n_max < n:
        raise ValueError(f"assignment supplies tau only up to {taus.n_max}, need {n}")
    thetas = [Poly.one(), Poly.var("x")]
    for m in range(1, n):
        prev, cur = thetas[m - 1], thetas[m]
        integrand = RatFun.make((cur * cur).scale(2 * m + 1), prev * prev)
        h = integrate_x(integrand)
        nxt = (h + taus.value(m + 1)) * RatFun.from_poly(prev)
        if not nxt.is_poly:
            raise InexactDivision("bilinear step did not produce a polynomial")
        theta_next = nxt.num.scale(1 / nxt.den.const_value())
        if bilinear_residual(prev, cur, theta_next, m):
            raise InexactDivision("bilinear recursion violated after construction")
        thetas.append(theta_next)
    return ThetaSequence(taus=taus, thetas=tuple(thetas))


def bilinear_residual(theta_prev: Poly, theta_mid: Poly, theta_next: Poly, m: int) -> Poly:
    """theta_{m+1,x} theta_{m-1} - theta_{m+1} theta_{m-1,x} - (2m+1) theta_m^2."""
    return (
        theta_next.diff("x") * theta_prev
        - theta_next * theta_prev.diff("x")
        - (theta_mid * theta_mid).scale(2 * m + 1)
    )


def second_bilinear_residual(theta_mid: Poly, theta_next: Poly) -> Poly:
    """theta_{n+1,xx} theta_n + theta_{n+1} theta_{n,xx} - 2 theta_{n,x} theta_{n+1,x}."""
    return (
        theta_next.diff("x").diff("x") * theta_mid
        + theta_next * theta_mid.diff("x").diff("x")
        - (theta_mid.diff("x") * theta_next.diff("x")).scale(2)
    )


def log_second_derivative(theta: Poly) -> RatFun:
    """-2 (log theta)_xx as a reduced rational function."""
    tx = theta.diff("x")
    w = theta.diff("x").diff("x") * theta - tx * tx
    return RatFun.make(w.scale(-2), theta * theta)


def potential(seq: ThetaSequence, n: int) -> RatFun:
    """The rational soliton attached to theta_n."""
    return log_second_derivative(seq.theta(n))


def stationary_limit(seq: ThetaSequence, n: int) -> tuple[Poly, RatFun]:
    """Set every tau (equivalently t) to zero; returns the monomial theta and n(n+1)/x^2."""
    theta = seq.theta(n)
    binds = {name: RF_ZERO for name in theta.variables() if name.startswith("tau_") or name == "t"}
    theta0 = RatFun.from_poly(theta).substitute(binds) if binds else RatFun.from_poly(theta)
    expect_theta = Poly.var("x", n * (n + 1) // 2) if n else Poly.one()
    if not (theta0.is_poly and theta0.num == expect_theta):
        raise InexactDivision("stationary limit of theta_n is not x^(n(n+1)/2)")
    u0 = log_second_derivative(expect_theta)
    return expect_theta, u0


# ---------------------------------------------------------------------------
# Flow residual of a theta polynomial, gcd-free
# ---------------------------------------------------------------------------

class _ThetaFrac:
    """num / theta^k with purely polynomial arithmetic (no gcd reduction).

    Used only inside the adjustment solver, where the numerator carries
    symbolic ansatz coefficients and gcd computation would be wasteful.
    """

    __slots__ = ("num", "k")

    def __init__(self, num: Poly, k: int):
        self.num = num
        self.k = k

    def lift(self, theta: Poly, k: int) -> Poly:
        return self.num * theta ** (k - self.k) if k > self.k else self.num


def _tf_add(a: _ThetaFrac, b: _ThetaFrac, theta: Poly) -> _ThetaFrac:
    k = max(a.k, b.k)
    return _ThetaFrac(a.lift(theta, k) + b.lift(theta, k), k)


def _tf_mul(a: _ThetaFrac, b: _ThetaFrac) -> _ThetaFrac:
    return _ThetaFrac(a.num * b.num, a.k + b.k)


def _tf_diff(a: _ThetaFrac, name: str, theta: Poly, dtheta: Poly) -> _ThetaFrac:
    return _ThetaFrac(a.num.diff(name) * theta - dtheta * a.num.scale(a.k), a.k + 1)


def flow_residual_numerator(theta: Poly, r: int) -> Poly:
    """Numerator of u_t - 2 f_{r+1,x}(u) for u = -2 (log theta)_xx, c_j = 0.

    The residual itself is this polynomial divided by a power of theta, so it
    vanishes identically iff the returned polynomial is zero.
    """
    tx = theta.diff("x")
    tt = theta.diff("t")
    u = _ThetaFrac((theta.diff("x").diff("x") * theta - tx * tx).scale(-2), 2)
    derivs = [u]
    for _ in range(2 * r + 1):
        derivs.append(_tf_diff(derivs[-1], "x", theta, tx))
    form = gd_jet_forms(r + 1)[r + 1]
    total = _ThetaFrac(Poly.zero(), 0)
    powers: dict[tuple[int, int], _ThetaFrac] = {}

    def jet_power(idx: int, e: int) -> _ThetaFrac:
        key = (idx, e)
        got = powers.get(key)
        if got is None:
            got = derivs[idx]
            for _ in range(e - 1):
                got = _tf_mul(got, derivs[idx])
            powers[key] = got
        return got

    for mono, coeff in form.terms.items():
        if any(var_name(v).startswith("c_") for v, _ in mono):
            continue  # constants are zero here
        term = _ThetaFrac(Poly.const(coeff), 0)
        for v, e in mono:
            term = _tf_mul(term, jet_power(int(var_name(v)[1:]), e))
        total = _tf_add(total, term, theta)
    f_next = total
    f_next_x = _tf_diff(f_next, "x", theta, tx)
    u_t = _tf_diff(u, "t", theta, tt)
    residual = _tf_add(u_t, _ThetaFrac(f_next_x.num.scale(-2), f_next_x.k), theta)
    return residual.num


# ---------------------------------------------------------------------------
# The adjustment solver
# ---------------------------------------------------------------------------

def _poly_subst_unknowns(p: Poly, values: dict[str, Poly]) -> Poly:
    out = p
    for name, val in values.items():
        cmap = out.coeffs_in(name)
        if len(cmap) == 1 and 0 in cmap:
            continue
        acc = Poly.zero()
        for e, coeff in cmap.items():
            acc = acc + coeff * val ** e
        out = acc
    return out


def _solve_coefficient_system(eqs: list[Poly], unknowns: list[str]):
    """Solve polynomial equations over Q by linear-first elimination.

    Returns (values, free) where values maps every unknown to a Rat and free
    lists the unknowns that were unconstrained (pinned to zero).  Raises
    NoSolutionWithinBound when the system is inconsistent and
    AmbiguousSolution when elimination stalls on nonlinear equations.
    """
    pending = [e for e in eqs if not e.is_zero]
    resolved: dict[str, Poly] = {}
    choices: list[str] = []

    def substitute_all():
        nonlocal pending
        if not resolved:
            return
        out = []
        for e in pending:
            e2 = _poly_subst_unknowns(e, resolved)
            if not e2.is_zero:
                out.append(e2)
        pending = out

    progress = True
    while pending and progress:
        progress = False
        substitute_all()
        next_pending = []
        for e in pending:
            if e.is_zero:
                continue
            if e.is_const:
                raise NoSolutionWithinBound("inconsistent adjustment system (raise degree bound?)")
            names = sorted(e.variables())
            if any(name in resolved for name in names):
                next_pending.append(e)  # stale against this pass; substitute next round
                continue
            if e.degree() == 1:
                # linear: solve for the last-registered unknown present
                name = names[-1]
                cmap = e.coeffs_in(name)
                rest = cmap.get(0, Poly.zero())
                lead = cmap[1]
                if lead.is_const:
                    value = rest.scale(-1 / lead.const_value())
                    resolved[name] = value
                    progress = True
                    continue
            if len(names) == 1:
                name = names[0]
                cmap = e.coeffs_in(name)
                degs = sorted(cmap)
                if degs == [0] or not all(c.is_const for c in cmap.values()):
                    next_pending.append(e)
                    continue
                if degs[0] > 0:
                    # a^k (c_k + ... ) = 0 admits a = 0; take it and re-verify later
                    resolved[name] = Poly.zero()
                    progress = True
                    continue
                if len(degs) == 2:
                    k = degs[1]
                    target = -cmap[0].const_value() / cmap[k].const_value()
                    root = _rat_root(target, k)
                    if root is not None:
                        resolved[name] = Poly.const(root)
                        if k > 1:
                            choices.append(f"{name}: root of degree-{k} equation, took {root}")
                        progress = True
                        continue
                next_pending.append(e)
                continue
            next_pending.append(e)
        pending = next_pending
    substitute_all()
    if pending:
        raise AmbiguousSolution(
            "nonlinear elimination stalled; refusing to guess a tau adjustment"
        )
    # resolve chains: expressions may mention unknowns that are free or resolved later
    values: dict[str, Rat] = {}
    free: list[str] = []
    remaining = dict(resolved)
    for name in unknowns:
        if name not in remaining:
            free.append(name)
            values[name] = Rat(0)
    for _ in range(len(remaining) + 1):
        if not remaining:
            break
        for name in list(remaining):
            expr = _poly_subst_unknowns(
                remaining[name], {k: Poly.const(v) for k, v in values.items()}
            )
            if expr.is_const:
                values[name] = expr.const_value()
                del remaining[name]
    if remaining:
        raise AmbiguousSolution("cyclic dependency while resolving adjustment unknowns")
    return values, free, choices


def _rat_root(value: Rat, k: int) -> Rat | None:
    """Exact rational k-th root, if one exists."""
    if value == 0:
        return Rat(0)
    if value < 0 and k % 2 == 0:
        return None
    sign = -1 if value < 0 else 1
    n, d = abs(int(value.numerator)), int(value.denominator)
    rn = round(n ** (1.0 / k))
    rd = round(d ** (1.0 / k))
    for cn in (rn - 1, rn, rn + 1):
        for cd in (rd - 1, rd, rd + 1):
            if cn > 0 and cd > 0 and cn ** k == n and cd ** k == d:
                return Rat(sign * cn, cd)
    return None


_ADJUST_CACHE: dict[tuple[int, int, int], TauAssignment] = {}


def adjust_taus(r: int, n: int, degree_bound: int | None = None) -> TauAssignment:
    """Find tau_2..tau_n in Q[t] so every potential up to level n solves the flow.

    Solves sequentially in j: tau_j is posited as a polynomial in t of degree
    <= degree_bound with unknown rational coefficients, the exact flow
    residual of the resulting potential is collected by monomials in (x, t),
    and the system is eliminated.  The returned assignment always re-verifies
    to a residual of exactly zero.
    """
    if r < 1 or n < 0:
        raise ValueError("need r >= 1 and n >= 0")
    if degree_bound is None:
        degree_bound = n + 1
    key = (r, n, degree_bound)
    got = _ADJUST_CACHE.get(key)
    if got is not None:
        return got
    values: list[RatFun] = []
    free_all: list[str] = []
    choice_all: list[str] = []
    thetas = [Poly.one(), Poly.var("x")]
    for j in range(2, n + 1):
        prev, cur = thetas[j - 2], thetas[j - 1]
        integrand = RatFun.make((cur * cur).scale(2 * j - 1), prev * prev)
        base = (integrate_x(integrand) * RatFun.from_poly(prev)).num  # tau-free part
        unknowns = [unknown_var(d) for d in range(degree_bound + 1)]
        ansatz = Poly.zero()
        for d, name in enumerate(unknowns):
            ansatz = ansatz + Poly.var(name) * Poly.var("t", d)
        theta_j = base + ansatz * prev
        resid_num = flow_residual_numerator(theta_j, r)
        eqs = _collect_equations(resid_num)
        sol, free, choices = _solve_coefficient_system(eqs, unknowns)
        tau_poly = Poly.zero()
        for d, name in enumerate(unknowns):
            if sol[name]:
                tau_poly = tau_poly + Poly.var("t", d).scale(sol[name])
        theta_final = base + tau_poly * prev
        if not flow_residual_numerator(theta_final, r).is_zero:
            raise AmbiguousSolution(
                f"re-verification failed for tau_{j}; solution set needs manual inspection"
            )
        values.append(RatFun.from_poly(tau_poly))
        free_all.extend(f"tau_{j}:{name}" for name in free)
        choice_all.extend(f"tau_{j}:{c}" for c in choices)
        thetas.append(theta_final)
    out = TauAssignment(
        level=r,
        values=tuple(values),
        mode="adjusted",
        free_parameters=tuple(free_all),
        branch_choices=tuple(choice_all),
    )
    _ADJUST_CACHE[key] = out
    return out


def _collect_equations(resid_num: Poly) -> list[Poly]:
    """Group the residual numerator by (x, t)-monomials into equations in the unknowns."""
    unknown_floor = var_id(unknown_var(0))
    groups: dict[tuple, dict] = {}
    for mono, coeff in resid_num.terms.items():
        xt = tuple(p for p in mono if p[0] < unknown_floor)
        ap = tuple(p for p in mono if p[0] >= unknown_floor)
        g = groups.setdefault(xt, {})
        g[ap] = g.get(ap, Rat(0)) + coeff
    eqs = []
    for g in groups.values():
        p = Poly({m: c for m, c in g.items() if c})
        if not p.is_zero:
            eqs.append(p)
    return eqs


def adjusted_theta_sequence(r: int, n: int, degree_bound: int | None = None) -> ThetaSequence:
    """Convenience: adjust tau's for (r, n) and build the full sequence."""
    taus = adjust_taus(r, max(n, 1), degree_bound)
    return theta_sequence(n, taus)


def verify_adjusted(seq: ThetaSequence, r: int, n: int) -> None:
    """Assert kdv_residual(potential(j), r) = 0 for 2 <= j <= n (and j = 0, 1)."""
    for j in range(n + 1):
        res = kdv_residual(potential(seq, j), r)
        if not res.is_zero:
            raise AmbiguousSolution(f"potential at level {j} fails the flow at r={r}")
