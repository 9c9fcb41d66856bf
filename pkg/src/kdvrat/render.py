"""Emission of exact objects in three formats.

``plain`` is the canonical text form and round-trips through the expression
parser; ``latex`` is for papers and notebooks; ``json`` is the exact wire
format (rationals as decimal strings, exponent vectors as integer arrays) and
round-trips bit-exactly through :func:`json_to_ratfun`.
"""

from __future__ import annotations

from .ring import Poly, Rat, RatFun, var_id, var_name

_LATEX_NAMES = {
    "lambda": r"\lambda",
    "mu": r"\mu",
    "nu": r"\nu",
    "E0": r"E_{0}",
    "mu0": r"\mu_{0}",
    "nu0": r"\nu_{0}",
}


def _latex_var(name: str) -> str:
    if name in _LATEX_NAMES:
        return _LATEX_NAMES[name]
    if "_" in name:
        head, idx = name.split("_", 1)
        if head == "tau":
            return r"\tau_{%s}" % idx
        if head == "taup":
            return r"\tau^{+}_{%s}" % idx
        if head == "taum":
            return r"\tau^{-}_{%s}" % idx
        return f"{head}_{{{idx}}}"
    return name


def _rat_str(c: Rat) -> str:
    n, d = int(c.numerator), int(c.denominator)
    return str(n) if d == 1 else f"{n}/{d}"


def _rat_latex(c: Rat) -> str:
    n, d = int(c.numerator), int(c.denominator)
    if d == 1:
        return str(n)
    sign = "-" if n < 0 else ""
    return r"%s\tfrac{%d}{%d}" % (sign, abs(n), d)


def _mono_factors(mono, latex: bool) -> list[str]:
    out = []
    for vid, e in sorted(mono):
        name = _latex_var(var_name(vid)) if latex else var_name(vid)
        if e == 1:
            out.append(name)
        elif latex:
            out.append(f"{name}^{{{e}}}")
        else:
            out.append(f"{name}^{e}")
    return out


def poly_plain(p: Poly) -> str:
    if p.is_zero:
        return "0"
    chunks: list[str] = []
    for mono, coeff in p.sorted_terms():
        neg = coeff < 0
        mag = -coeff if neg else coeff
        factors = _mono_factors(mono, latex=False)
        if not factors:
            body = _rat_str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_rat_str(mag)] + factors)
        if not chunks:
            chunks.append(f"-{body}" if neg else body)
        else:
            chunks.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(chunks)


def poly_latex(p: Poly) -> str:
    if p.is_zero:
        return "0"
    chunks: list[str] = []
    for mono, coeff in p.sorted_terms():
        neg = coeff < 0
        mag = -coeff if neg else coeff
        factors = _mono_factors(mono, latex=True)
        if not factors:
            body = _rat_latex(mag)
        elif mag == 1:
            body = " ".join(factors)
        else:
            body = " ".join([_rat_latex(mag)] + factors)
        if not chunks:
            chunks.append(f"-{body}" if neg else body)
        else:
            chunks.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(chunks)


def ratfun_plain(f: RatFun) -> str:
    if f.den.is_const and f.den.const_value() == 1:
        return poly_plain(f.num)
    return f"({poly_plain(f.num)})/({poly_plain(f.den)})"


def ratfun_latex(f: RatFun) -> str:
    if f.den.is_const and f.den.const_value() == 1:
        return poly_latex(f.num)
    return r"\frac{%s}{%s}" % (poly_latex(f.num), poly_latex(f.den))


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def _poly_rows(p: Poly, names: list[str]) -> list[list]:
    vids = [var_id(n) for n in names]
    rows = []
    for mono, coeff in p.sorted_terms():
        d = dict(mono)
        rows.append([
            str(int(coeff.numerator)),
            str(int(coeff.denominator)),
            [d.get(v, 0) for v in vids],
        ])
    return rows


def ratfun_json(f: RatFun) -> dict:
    names = sorted(f.variables(), key=var_id)
    return {
        "vars": names,
        "num": _poly_rows(f.num, names),
        "den": _poly_rows(f.den, names),
    }


def _rows_to_poly(rows: list, names: list[str]) -> Poly:
    terms = []
    for num_s, den_s, exps in rows:
        coeff = Rat(int(num_s), int(den_s))
        mono = tuple(sorted((var_id(n), e) for n, e in zip(names, exps) if e))
        terms.append((mono, coeff))
    return Poly.from_terms(terms)


def json_to_ratfun(data: dict) -> RatFun:
    names = list(data["vars"])
    num = _rows_to_poly(data["num"], names)
    den = _rows_to_poly(data["den"], names)
    return RatFun.make(num, den)


def expfun_json(f) -> dict:
    out = {"level": f.level, "terms": {str(k): ratfun_json(q) for k, q in sorted(f.terms.items())}}
    if f.lam is not None:
        out["lambda_value"] = ratfun_json(f.lam)
    return out


def expfun_plain(f) -> str:
    if not f.terms:
        return "0"
    lam = "lambda" if f.lam is None else f"({ratfun_plain(f.lam)})"
    sign = "-" if f.level % 2 else "+"
    chunks = []
    for k, q in sorted(f.terms.items(), reverse=True):
        body = f"({ratfun_plain(q)})"
        if k == 0:
            chunks.append(body)
        else:
            chunks.append(f"exp({k}*({lam}*x {sign} {lam}^{2 * f.level + 1}*t))*{body}")
    return " + ".join(chunks)


def expfun_latex(f) -> str:
    if not f.terms:
        return "0"
    lam = r"\lambda" if f.lam is None else f"({ratfun_latex(f.lam)})"
    sign = "-" if f.level % 2 else "+"
    exponent = f"{lam} x {sign} {lam}^{{{2 * f.level + 1}}} t"
    chunks = []
    for k, q in sorted(f.terms.items(), reverse=True):
        if k == 0:
            chunks.append(ratfun_latex(q))
        else:
            kk = "" if k == 1 else str(k)
            chunks.append(r"\mathrm{e}^{%s(%s)} \left(%s\right)" % (kk, exponent, ratfun_latex(q)))
    return " + ".join(chunks)
