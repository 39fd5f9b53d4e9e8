"""Text syntax for divisors and curves.

Divisors are sums of terms ``c*SYM`` where ``c`` is an integer or ``p/q`` and
``SYM`` is one of ``B{i,j,...}``, ``B<k>``, ``psi``, ``psi_<i>`` or ``K``::

    psi - 3*K
    5*B2 + 3*B3
    12*B{1,4} + 9*B{2,5}

Curves are ``Fa,b,c,d`` (symmetric F-curve type), ``F{1}{2}{3}{4,5,6,7}``
(explicit partition), ``C<j>`` or ``A``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from m0n.core import BoundaryIndex, DivisorClass, FCurve, InvalidBoundaryError, canonical_boundary
from m0n.symmetric import CurveClass, SymmetricDivisor, canonical_and_psi, expand_symmetric


class ParseError(ValueError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<bset>B\s*\{[^}]*\})
  | (?P<psi_i>psi_\d+)
  | (?P<psi>psi)
  | (?P<bk>B\d+)
  | (?P<k>K)
  | (?P<num>\d+(?:\s*/\s*\d+)?)
  | (?P<op>[+\-*])
  | (?P<minus>−)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "minus":
            out.append(_Tok("op", "-", pos))
        elif kind != "ws":
            out.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    return out


def _symbol(tok: _Tok, n: int) -> DivisorClass:
    if tok.kind == "bset":
        body = tok.text[tok.text.index("{") + 1 : -1]
        try:
            elems = [int(x) for x in body.split(",")]
        except ValueError:
            raise ParseError("malformed boundary index", tok.pos) from None
        if len(set(elems)) != len(elems):
            raise ParseError("repeated element in boundary index", tok.pos)
        try:
            return DivisorClass(n, {canonical_boundary(n, elems): 1})
        except InvalidBoundaryError as exc:
            raise ParseError(str(exc), tok.pos) from None
    if tok.kind == "bk":
        k = int(tok.text[1:])
        if not 2 <= k <= n - 2:
            raise ParseError(f"B{k} undefined for n={n}", tok.pos)
        return expand_symmetric(SymmetricDivisor.basis(n, k))
    if tok.kind == "psi_i":
        i = int(tok.text[4:])
        if not 1 <= i <= n:
            raise ParseError(f"psi_{i} undefined for n={n}", tok.pos)
        return DivisorClass(n, psi={i: 1})
    if tok.kind == "psi":
        return expand_symmetric(canonical_and_psi(n)[1])
    if tok.kind == "k":
        return expand_symmetric(canonical_and_psi(n)[0])
    raise ParseError(f"expected a divisor symbol, got {tok.text!r}", tok.pos)


_SYMBOLS = {"bset", "bk", "psi_i", "psi", "k"}


def parse_divisor(text: str, n: int) -> DivisorClass:
    """Parse a divisor expression on M_{0,n}; K and psi are expanded into boundaries."""
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty expression", 0)
    total = DivisorClass.zero(n)
    i = 0
    first = True
    while i < len(toks):
        sign = 1
        if toks[i].kind == "op" and toks[i].text in "+-":
            sign = -1 if toks[i].text == "-" else 1
            i += 1
        elif not first:
            raise ParseError(f"expected '+' or '-', got {toks[i].text!r}", toks[i].pos)
        if i >= len(toks):
            raise ParseError("dangling operator", len(text))
        first = False
        tok = toks[i]
        coeff = Fraction(1)
        if tok.kind == "num":
            coeff = Fraction(tok.text.replace(" ", ""))
            i += 1
            if i < len(toks) and toks[i].kind == "op" and toks[i].text == "*":
                i += 1
                if i >= len(toks):
                    raise ParseError("missing symbol after '*'", len(text))
            else:
                if coeff != 0:
                    raise ParseError("a bare constant must be 0", tok.pos)
                continue
            tok = toks[i]
        if tok.kind not in _SYMBOLS:
            raise ParseError(f"expected a divisor symbol, got {tok.text!r}", tok.pos)
        total = total + _symbol(tok, n) * (sign * coeff)
        i += 1
    return total


def _fmt_coeff(c: Fraction, first: bool) -> str:
    sign = "-" if c < 0 else ("" if first else "+")
    mag = abs(c)
    body = "" if mag == 1 else f"{mag}*"
    lead = sign if first else f" {sign} "
    return lead + body


def format_divisor(d: DivisorClass) -> str:
    """Inverse of :func:`parse_divisor` on explicit coordinates."""
    terms: list[tuple[Fraction, str]] = [(c, str(b)) for b, c in d.boundary.items()]
    terms += [(c, f"psi_{i}") for i, c in d.psi.items()]
    if not terms:
        return "0"
    parts = [_fmt_coeff(c, k == 0) + sym for k, (c, sym) in enumerate(terms)]
    return "".join(parts)


def format_symmetric(s: SymmetricDivisor) -> str:
    terms = [(c, f"B{i}") for i, c in enumerate(s.coeffs, start=2) if c]
    if not terms:
        return "0"
    return "".join(_fmt_coeff(c, k == 0) + sym for k, (c, sym) in enumerate(terms))


def parse_boundary_list(text: str, n: int) -> list[BoundaryIndex]:
    """``B{1,2},B{3,4,5}`` -> canonical indices."""
    out = []
    for m in re.finditer(r"B\s*\{([^}]*)\}|[,\s]+|(.)", text):
        if m.group(2) is not None:
            raise ParseError(f"unexpected character {m.group(2)!r}", m.start())
        if m.group(1) is None:
            continue
        try:
            out.append(canonical_boundary(n, [int(x) for x in m.group(1).split(",")]))
        except (ValueError, InvalidBoundaryError) as exc:
            raise ParseError(str(exc), m.start()) from None
    return out


_FTYPE = re.compile(r"F\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)")
_FEXPL = re.compile(r"F((?:\s*\{[\d,\s]+\}){4})")


def parse_curve(text: str, n: int) -> CurveClass | FCurve:
    s = text.strip()
    m = _FTYPE.fullmatch(s)
    if m:
        sizes = [int(x) for x in m.groups()]
        try:
            curve = CurveClass.fcurve(*sizes)
        except ValueError as exc:
            raise ParseError(str(exc), 0) from None
        if curve.n != n:
            raise ParseError(f"F-curve type sums to {curve.n}, not n={n}", 0)
        return curve
    m = _FEXPL.fullmatch(s)
    if m:
        blocks = [[int(x) for x in b.split(",")] for b in re.findall(r"\{([^}]*)\}", m.group(1))]
        try:
            curve = FCurve.from_blocks(blocks)
        except ValueError as exc:
            raise ParseError(str(exc), 0) from None
        if curve.n != n:
            raise ParseError(f"partition covers {curve.n} points, not n={n}", 0)
        return curve
    m = re.fullmatch(r"C\s*(\d+)", s)
    if m:
        try:
            return CurveClass.sweeping(n, int(m.group(1)))
        except ValueError as exc:
            raise ParseError(str(exc), 0) from None
    if s == "A":
        if n != 7:
            raise ParseError("curve A exists only for n=7", 0)
        return CurveClass.curve_a()
    raise ParseError(f"unrecognised curve {text!r}", 0)


def format_curve(c: CurveClass | FCurve) -> str:
    return str(c)
