"""Differential Galois group classification over Q(x, t).

The two families of fundamental matrices have entries that are either purely
rational (Picard-Vessiot field is the base field, trivial group) or lie in
the span of e^(+-L) over the rationals (the extension is generated by one
exponential unit, every automorphism scales it, multiplicative group).  The
classifier inspects the exponent support; anything outside those two shapes
is refused rather than misclassified.
"""

from __future__ import annotations

from dataclasses import dataclass

from .adler_moser import adjusted_theta_sequence
from .calculus import ExpFun
from .errors import UnrecognizedExtension
from .fundmat import fundmat_E, fundmat_E0, phi_exponential
from .lax import Mat2
from .ring import Rat, RatFun, as_ratfun

TRIVIAL = "trivial"
TORUS = "multiplicative_torus"


@dataclass(frozen=True)
class GaloisClass:
    kind: str  # trivial | multiplicative_torus
    level: int | None = None
    lam: RatFun | None = None  # None means the symbolic spectral parameter

    def __str__(self) -> str:
        if self.kind == TRIVIAL:
            return "trivial"
        lam = "lambda" if self.lam is None else repr(self.lam)
        return f"multiplicative_torus(exponent level {self.level}, lambda = {lam})"


def classify_galois(B: Mat2, r: int) -> GaloisClass:
    """Classify the group of the system a fundamental matrix generates."""
    det = B.det()
    if not det.is_rational:
        raise UnrecognizedExtension("determinant is not rational; not a recognised family")
    d = det.rational_part()
    if d.is_zero or not d.diff("x").is_zero or not d.diff("t").is_zero:
        raise UnrecognizedExtension("determinant of a fundamental matrix must be a nonzero constant")
    support = set()
    lam = None
    level = None
    for e in B.entries():
        support |= e.exponent_support()
        if not e.is_rational:
            lam = e.lam
            level = e.level
    support.discard(0)
    if not support:
        return GaloisClass(kind=TRIVIAL)
    if support <= {-1, 1}:
        if lam is not None and lam.is_zero:
            raise UnrecognizedExtension("zero spectral parameter should have collapsed")
        return GaloisClass(kind=TORUS, level=level, lam=lam)
    raise UnrecognizedExtension(f"exponent support {sorted(support)} outside the classified families")


@dataclass(frozen=True)
class InvarianceRow:
    regime: str
    detail: str
    result: str


@dataclass(frozen=True)
class InvarianceReport:
    rows: tuple
    constant_within_regimes: bool

    def __str__(self) -> str:
        width = max(len(r.regime) for r in self.rows)
        lines = [f"{r.regime:<{width}}  {r.detail:<28} {r.result}" for r in self.rows]
        lines.append(f"constant within regimes: {self.constant_within_regimes}")
        return "\n".join(lines)


def invariance_report(r: int, n_range, lambda_samples=(None, Rat(1), Rat(2)),
                      t_samples=(Rat(0), Rat(1), Rat(7))) -> InvarianceReport:
    """Tabulate the class across n, time samples, spectral samples, one Darboux step.

    Substitutions happen before classification.  The report asserts the class
    is constant inside each regime: always trivial at E = 0, always the
    multiplicative group at E != 0.
    """
    n_range = list(n_range)
    n_top = max(n_range) + 1
    seq = adjusted_theta_sequence(r, n_top + 1)
    rows: list[InvarianceRow] = []
    ok = True

    zero_kinds = set()
    for n in n_range:
        cls = classify_galois(fundmat_E0(r, n, seq), r)
        zero_kinds.add(cls.kind)
        rows.append(InvarianceRow("E = 0", f"n = {n}", cls.kind))
    ok &= zero_kinds == {TRIVIAL}

    nonzero_kinds = set()
    for n in n_range:
        B = fundmat_E(r, n, seq)
        for lam in lambda_samples:
            Bs = B if lam is None else B.substitute({"lambda": as_ratfun(lam)})
            label = "symbolic" if lam is None else str(lam)
            cls = classify_galois(Bs, r)
            nonzero_kinds.add(cls.kind)
            rows.append(InvarianceRow("E = -lambda^2", f"n = {n}, lambda = {label}", cls.kind))
        for tv in t_samples:
            Bt = B.substitute({"t": as_ratfun(tv)})
            cls = classify_galois(Bt, r)
            nonzero_kinds.add(cls.kind)
            rows.append(InvarianceRow("time samples", f"n = {n}, t = {tv}", cls.kind))
    ok &= nonzero_kinds == {TORUS}

    # one Darboux ascent step performed on the solutions themselves
    from .darboux import dt_function

    n0 = n_range[0]
    seed = fundmat_E0(r, n0, seq).a12  # phi_2 = theta_{n0+1}/theta_{n0}
    before = classify_galois(fundmat_E(r, n0, seq), r)
    pp = dt_function(seed.rational_part(), phi_exponential("plus", r, n0, seq))
    pm = dt_function(seed.rational_part(), phi_exponential("minus", r, n0, seq))
    stepped = Mat2(pp, pm, pp.diff("x"), pm.diff("x"))
    after = classify_galois(stepped, r)
    rows.append(InvarianceRow("Darboux step", f"n = {n0} -> {n0 + 1}", after.kind))
    ok &= before.kind == after.kind == TORUS
    return InvarianceReport(rows=tuple(rows), constant_within_regimes=ok)
