"""2x2 linear systems: the matrices U and V_r, zero curvature, solution checks.

E enters as a value to substitute for the spectral parameter: the symbol E
itself, -lambda^2, a rational number, or zero, covering every regime in which
the systems are used.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import ExpFun
from .errors import LevelMismatch
from .kdv import gd_sequence, lax_data
from .ring import RF_ZERO, RatFun, as_ratfun


@dataclass(frozen=True)
class Mat2:
    """2x2 matrix over the exponential extension."""

    a11: ExpFun
    a12: ExpFun
    a21: ExpFun
    a22: ExpFun

    @staticmethod
    def from_ratfuns(a11, a12, a21, a22, level: int = 1, lam=None) -> "Mat2":
        wrap = lambda v: v if isinstance(v, ExpFun) else ExpFun.from_ratfun(as_ratfun(v), level, lam)
        return Mat2(wrap(a11), wrap(a12), wrap(a21), wrap(a22))

    def entries(self) -> tuple[ExpFun, ExpFun, ExpFun, ExpFun]:
        return (self.a11, self.a12, self.a21, self.a22)

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for e in self.entries())

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        )

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 + other.a11,
            self.a12 + other.a12,
            self.a21 + other.a21,
            self.a22 + other.a22,
        )

    def diff(self, name: str) -> "Mat2":
        return Mat2(*(e.diff(name) for e in self.entries()))

    def det(self) -> ExpFun:
        return self.a11 * self.a22 - self.a12 * self.a21

    def trace(self) -> ExpFun:
        return self.a11 + self.a22

    def substitute(self, bindings: dict) -> "Mat2":
        return Mat2(*(e.substitute(bindings) for e in self.entries()))


def build_U(u: RatFun, E, level: int = 1, lam=None) -> Mat2:
    """[[0, 1], [u - E, 0]]."""
    E = as_ratfun(E)
    return Mat2.from_ratfuns(RF_ZERO, 1, u - E, RF_ZERO, level, lam)


def build_V(u: RatFun, r: int, E, constants=None, lam=None) -> Mat2:
    """[[G_r, F_r], [-H_r, -G_r]] with the spectral parameter set to E."""
    E = as_ratfun(E)
    lax = lax_data(gd_sequence(u, r, constants))
    binding = {"E": E}
    F = lax.Fr.substitute(binding)
    G = lax.Gr.substitute(binding)
    H = lax.Hr.substitute(binding)
    return Mat2.from_ratfuns(G, F, -H, -G, r, lam)


def zero_curvature(u: RatFun, r: int, E, constants=None) -> Mat2:
    """Residual U_t - V_x + [U, V]; the zero matrix iff u solves the level-r flow."""
    U = build_U(u, E, level=r)
    V = build_V(u, r, E, constants)
    return U.diff("t") - V.diff("x") + (U @ V - V @ U)


def check_solution(Phi: Mat2, u: RatFun, r: int, E, constants=None) -> tuple[Mat2, Mat2]:
    """(Phi_x - U Phi, Phi_t - V_r Phi); both zero for a fundamental matrix."""
    lam = None
    level = r
    for e in Phi.entries():
        if not e.is_rational:
            lam = e.lam
            level = e.level
            break
    if level != r:
        raise LevelMismatch(f"matrix lives at level {level}, system at level {r}")
    U = build_U(u, E, level=r, lam=lam)
    V = build_V(u, r, E, constants, lam=lam)
    return Phi.diff("x") - U @ Phi, Phi.diff("t") - V @ Phi


def second_symmetric_power_residual(phi1, phi2, u: RatFun, E) -> ExpFun:
    """(-d_xxx - 4(u - E) d_x - 2 u_x) applied to the product phi1 phi2."""
    if not isinstance(phi1, ExpFun):
        phi1 = ExpFun.from_ratfun(as_ratfun(phi1), 1)
    if not isinstance(phi2, ExpFun):
        phi2 = ExpFun.from_ratfun(as_ratfun(phi2), phi1.level, phi1.lam)
    X = phi1 * phi2
    E = as_ratfun(E)
    coeff = ExpFun.from_ratfun(4 * (u - E), X.level, X.lam)
    ux = ExpFun.from_ratfun(2 * u.diff("x"), X.level, X.lam)
    return -X.diff("x").diff("x").diff("x") - coeff * X.diff("x") - ux * X
