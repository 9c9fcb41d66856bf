"""Fundamental matrices at zero and nonzero energy, and the Q polynomial pairs.

At E = 0 the matrix columns are theta ratios; at E = -lambda^2 they are
e^(+-L) Q^(+-)/theta with the Q families produced either by Darboux ascent
(exact division by theta, no free constants) or by the bilinear recursion
(free integration constants taup_j / taum_j).  The two constructions must
agree once the constants are matched, and the comparison is itself a check.
"""

from __future__ import annotations

from dataclasses import dataclass

from .adler_moser import ThetaSequence, adjusted_theta_sequence
from .calculus import ExpFun, integrate_x
from .errors import InexactDivision, PDEViolation
from .kdv import gd_sequence, lax_data
from .lax import Mat2
from .ring import Poly, Rat, RatFun, RF_ZERO, exact_divide


def phi_rational(seq: ThetaSequence, n: int, which: int, level: int) -> ExpFun:
    """phi_1 = theta_{n-1}/theta_n or phi_2 = theta_{n+1}/theta_n at E = 0."""
    num = seq.theta(n - 1) if which == 1 else seq.theta(n + 1)
    return ExpFun.from_ratfun(RatFun.make(num, seq.theta(n)), level)


def fundmat_E0(r: int, n: int, seq: ThetaSequence) -> Mat2:
    """Matrix with columns (phi_i, phi_{i,x}) built from theta ratios."""
    if seq.n_max < n + 1:
        raise ValueError("need thetas through n+1")
    p1 = phi_rational(seq, n, 1, r)
    p2 = phi_rational(seq, n, 2, r)
    return Mat2(p1, p2, p1.diff("x"), p2.diff("x"))


@dataclass(frozen=True)
class QFamily:
    """One sign of the Q polynomial family, with its integration constants."""

    sign: str  # "plus" | "minus"
    level: int
    qs: tuple  # Poly, Q_0 .. Q_n
    tau_pm: tuple  # RatFun values (or symbols) of the constants for j = 2..n
    construction: str  # "ascent" | "bilinear"

    def q(self, n: int) -> Poly:
        return self.qs[n]


def _ascent_step(sign: str, q: Poly, theta_next: Poly, theta_cur: Poly) -> Poly:
    lam = Poly.var("lambda")
    if sign == "plus":
        num = lam * q * theta_next + q.diff("x") * theta_next - q * theta_next.diff("x")
    else:
        num = lam * q * theta_next - q.diff("x") * theta_next + q * theta_next.diff("x")
    return exact_divide(num, theta_cur)


def q_family(sign: str, r: int, n: int, seq: ThetaSequence, verify: bool = True) -> QFamily:
    """Build Q_0..Q_n by Darboux ascent; optionally verify the defining PDEs."""
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'plus' or 'minus'")
    if seq.n_max < n:
        raise ValueError("need thetas through n")
    qs = [Poly.one()]
    for m in range(n):
        qs.append(_ascent_step(sign, qs[m], seq.theta(m + 1), seq.theta(m)))
    taus = _induced_constants(qs, n)
    fam = QFamily(sign=sign, level=r, qs=tuple(qs), tau_pm=taus, construction="ascent")
    if verify:
        verify_q_pdes(fam, seq, x_only=seq.taus.mode == "symbolic")
    return fam


def _induced_constants(qs: list[Poly], n: int) -> tuple:
    """The constant slots Q_j(x = 0) for j = 2..n.

    These are the values the integration constants take in the ascent
    construction, under the basepoint normalisation used by the bilinear
    builder (the constant of Q_j is its value at x = 0).
    """
    zero = {"x": RF_ZERO}
    return tuple(RatFun.from_poly(qs[j]).substitute(zero) for j in range(2, n + 1))


def q_family_bilinear(sign: str, r: int, n: int, tau_values=None) -> QFamily:
    """Build Q_0..Q_n from the bilinear recursion with explicit constants.

    `tau_values` supplies the constants for j = 2..n (RatFun; the default is
    the free symbols taup_j / taum_j).  Each step is normalised at the
    basepoint x = 0: the particular solution vanishes there and the constant
    enters through Q_{j-2}/Q_{j-2}(0), so Q_j(0) is exactly the constant.
    """
    lam = Poly.var("lambda")
    head = "taup" if sign == "plus" else "taum"
    if tau_values is None:
        tau_values = [RatFun.var(f"{head}_{j}") for j in range(2, n + 1)]
    q1 = lam * Poly.var("x") - Poly.one() if sign == "plus" else lam * Poly.var("x") + Poly.one()
    qs = [Poly.one(), q1]
    zero = {"x": RF_ZERO}
    for m in range(1, n):
        prev, cur = qs[m - 1], qs[m]
        integrand = RatFun.make((cur * cur).scale(2 * m + 1), prev * prev)
        raw = integrate_x(integrand) * RatFun.from_poly(prev)
        prev_rf = RatFun.from_poly(prev)
        prev0 = prev_rf.substitute(zero)
        if prev0.is_zero:
            raise InexactDivision("basepoint normalisation degenerate: Q_{m-1}(0) = 0")
        nxt = raw - raw.substitute(zero) / prev0 * prev_rf + tau_values[m - 1] / prev0 * prev_rf
        if not nxt.is_poly:
            raise InexactDivision("bilinear Q step did not produce a polynomial")
        qs.append(nxt.num.scale(1 / nxt.den.const_value()))
    return QFamily(sign=sign, level=r, qs=tuple(qs), tau_pm=tuple(tau_values), construction="bilinear")


def verify_q_pdes(fam: QFamily, seq: ThetaSequence, x_only: bool = False) -> None:
    """Check the defining x-system, and the t-system on adjusted sequences."""
    from .adler_moser import potential

    lam = Poly.var("lambda")
    plus = fam.sign == "plus"
    for m in range(len(fam.qs)):
        q = fam.qs[m]
        th = seq.theta(m)
        qx, th_x = q.diff("x"), th.diff("x")
        qxx, th_xx = qx.diff("x"), th_x.diff("x")
        if plus:
            resid = qxx * th - qx * ((-2) * lam * th + 2 * th_x) - q * (2 * lam * th_x - th_xx)
        else:
            resid = qxx * th - qx * (2 * lam * th + 2 * th_x) + q * (2 * lam * th_x + th_xx)
        if not resid.is_zero:
            raise PDEViolation(f"x-equation fails for Q_{m} ({fam.sign})")
    if x_only:
        return
    lamr = RatFun.var("lambda")
    eps = Rat(-1) if fam.level % 2 else Rat(1)
    speed = lamr ** (2 * fam.level + 1) * eps
    for m in range(len(fam.qs)):
        q = RatFun.from_poly(fam.qs[m])
        th = RatFun.from_poly(seq.theta(m))
        u_m = potential(seq, m)
        F = lax_data(gd_sequence(u_m, fam.level)).Fr.substitute({"E": -(lamr ** 2)})
        ratio_x = th.diff("x") / th
        ratio_t = th.diff("t") / th
        sgn = 1 if plus else -1
        rhs = q.diff("x") * F + q * (
            -sgn * speed + sgn * lamr * F + ratio_t - F.diff("x") / 2 - F * ratio_x
        )
        if q.diff("t") != rhs:
            raise PDEViolation(f"t-equation fails for Q_{m} ({fam.sign})")


def q_descend(fam: QFamily, seq: ThetaSequence, n: int) -> Poly:
    """Invert the ascent: recover Q_{n-1} from Q_n; the division must be exact."""
    if n < 1:
        raise ValueError("descent needs n >= 1")
    lam = Poly.var("lambda")
    q = fam.qs[n]
    th_prev = seq.theta(n - 1)
    if fam.sign == "plus":
        num = lam * q * th_prev + q.diff("x") * th_prev - th_prev.diff("x") * q
    else:
        num = lam * q * th_prev - q.diff("x") * th_prev + th_prev.diff("x") * q
    den = (lam * lam) * seq.theta(n)
    out = exact_divide(num, den)
    if out != fam.qs[n - 1]:
        raise InexactDivision("descent does not reproduce the stored Q")
    return out


def q_bilinear_check(fam: QFamily, n: int) -> Poly:
    """Q_{n+1,x} Q_{n-1} - Q_{n+1} Q_{n-1,x} - (2n+1) Q_n^2; contract 0."""
    qp, qc, qn = fam.qs[n - 1], fam.qs[n], fam.qs[n + 1]
    return qn.diff("x") * qp - qn * qp.diff("x") - (qc * qc).scale(2 * n + 1)


def _swap_lambda_sign(p: Poly) -> Poly:
    # lambda -> -lambda with the matched constants taup_j <-> (-1)^j taum_j
    # (the x = 0 slice of the symmetry relation itself).
    binds: dict[str, RatFun] = {}
    for name in p.variables():
        if name == "lambda":
            binds[name] = RatFun.from_poly(-Poly.var("lambda"))
        elif name.startswith("taup_") or name.startswith("taum_"):
            other = "taum_" if name.startswith("taup_") else "taup_"
            j = int(name.split("_")[1])
            image = RatFun.var(other + str(j))
            binds[name] = -image if j % 2 else image
    if not binds:
        return p
    out = RatFun.from_poly(p).substitute(binds)
    return out.num.scale(1 / out.den.const_value())


def q_symmetry_check(fam_plus: QFamily, fam_minus: QFamily, n: int) -> Poly:
    """Q+_n(-lambda) - (-1)^n Q-_n(lambda), with taup/taum matched; contract 0."""
    flipped = _swap_lambda_sign(fam_plus.qs[n])
    sign = Rat(-1) if n % 2 else Rat(1)
    return flipped - fam_minus.qs[n].scale(sign)


def phi_exponential(sign: str, r: int, n: int, seq: ThetaSequence, fam: QFamily | None = None) -> ExpFun:
    """phi^+ or phi^- at E = -lambda^2: e^(+-L) Q^(+-)_n / theta_n."""
    fam = fam or q_family(sign, r, n, seq, verify=False)
    k = 1 if sign == "plus" else -1
    return ExpFun(r, {k: RatFun.make(fam.qs[n], seq.theta(n))})


def fundmat_E(r: int, n: int, seq: ThetaSequence,
              fam_plus: QFamily | None = None, fam_minus: QFamily | None = None) -> Mat2:
    """Matrix with columns (phi^+, phi^+_x) and (phi^-, phi^-_x)."""
    pp = phi_exponential("plus", r, n, seq, fam_plus)
    pm = phi_exponential("minus", r, n, seq, fam_minus)
    return Mat2(pp, pm, pp.diff("x"), pm.diff("x"))


def specialization_gap(r: int, n: int) -> tuple[Rat, Rat]:
    """(det B_(n,lambda) at lambda -> 0, det B_(n,0)): the pair (0, 2n+1).

    Also confirms that at lambda = 0 the two exponential columns collapse
    onto each other: phi^+(0) = (-1)^n phi^-(0).
    """
    seq = adjusted_theta_sequence(r, n + 1)
    b_lam = fundmat_E(r, n, seq)
    det_lam = b_lam.det()
    lam = RatFun.var("lambda")
    expected = -2 * lam ** (2 * n + 1)
    if not (det_lam.is_rational and det_lam.rational_part() == expected):
        raise InexactDivision("nonzero-energy determinant is not -2 lambda^(2n+1)")
    at0 = det_lam.rational_part().substitute({"lambda": RF_ZERO})
    b0 = fundmat_E0(r, n, seq)
    det0 = b0.det()
    pp = phi_exponential("plus", r, n, seq).substitute({"lambda": RF_ZERO})
    pm = phi_exponential("minus", r, n, seq).substitute({"lambda": RF_ZERO})
    sign = Rat(-1) if n % 2 else Rat(1)
    if pp.rational_part() != pm.rational_part() * sign:
        raise InexactDivision("columns do not collapse at lambda = 0")
    if not at0.is_zero:
        raise InexactDivision("det does not vanish at lambda = 0")
    det0_val = det0.rational_part().const_value()
    if det0_val != 2 * n + 1:
        raise InexactDivision("zero-energy determinant is not 2n+1")
    return Rat(0), det0_val
