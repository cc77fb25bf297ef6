"""Text format for noncommutative *-polynomials.

Grammar (whitespace is ignored)::

    expr    := ['+' | '-'] product (('+' | '-') product)*
    product := factor (['*'] factor)*      '*' only right after a number
    factor  := atom ('*' | '^' INT)*        postfix '*' is the adjoint
    atom    := NUMBER | NAME | '(' expr ')'

``NUMBER`` accepts decimals, exponents and a trailing ``j`` for imaginary
literals. Juxtaposition is the (noncommutative) product. Names must be
declared; parsing never merges letters (see :meth:`NcPoly.simplify`).
"""

from __future__ import annotations

import re

from ..freeprod.poly import Letter, NcPoly

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()]))"
)


class ParseError(ValueError):
    """Syntax error or undeclared name; ``pos`` is the 0-based character offset."""

    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out, pos = [], 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip():
                raise ParseError(f"unexpected character {rest.strip()[0]!r}", pos + len(rest) - len(rest.lstrip()))
            break
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, generators: dict):
        self.toks = _tokenize(text)
        self.i = 0
        self.gens = generators

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def starts_atom(self, k: int = 0) -> bool:
        kind, v, _ = self.peek(k)
        return kind in ("num", "name") or v == "("

    def expr(self) -> NcPoly:
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        out = self.product() * sign
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            term = self.product()
            out = out + term if op == "+" else out - term
        return out

    def product(self) -> NcPoly:
        if not self.starts_atom():
            kind, v, pos = self.peek()
            raise ParseError(f"expected a term, found {v or 'end of input'!r}", pos)
        out = self.factor()
        while True:
            if self.starts_atom():
                out = out * self.factor()
            else:
                break
        return out

    def factor(self) -> NcPoly:
        kind, v, pos = self.peek()
        val = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "^"):
            op = self.take()[1]
            if op == "*":
                if kind == "num" and self.starts_atom():
                    # scalar multiplication: '2*u'
                    return val * self.factor()
                val = val.adjoint()
            else:
                k, e, epos = self.take()
                if k != "num" or not e.isdigit():
                    raise ParseError("exponent must be a nonnegative integer", epos)
                val = val ** int(e)
            kind = "op"
        return val

    def atom(self) -> NcPoly:
        kind, v, pos = self.take()
        if kind == "num":
            return NcPoly.constant(complex(v) if v.endswith("j") else float(v))
        if kind == "name":
            if v not in self.gens:
                raise ParseError(f"undeclared generator {v!r}", pos)
            return NcPoly.of(self.gens[v])
        if v == "(":
            out = self.expr()
            self.expect(")")
            return out
        raise ParseError(f"unexpected {v or 'end of input'!r}", pos)


def parse_ncpoly(text: str, generators: dict) -> NcPoly:
    """Parse ``text`` with ``generators`` mapping names to :class:`Letter` or :class:`NcPoly`."""
    p = _Parser(text, generators)
    out = p.expr()
    kind, v, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {v!r}", pos)
    return out


def _number(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r}{c.imag:+}j)".replace("+-", "-")


def format_ncpoly(P: NcPoly, generators: dict) -> str:
    """Inverse of :func:`parse_ncpoly` up to monomial order."""
    names = {}
    for name, g in generators.items():
        if isinstance(g, Letter):
            names[g] = name
            names.setdefault(g.star(), name + "*")

    def word(l: Letter) -> str:
        if l in names:
            return names[l]
        if l.is_power:
            base = names.get(Letter(l.factor, 1))
            if base is not None:
                return base if l.handle > 0 else base + "*"
        raise ValueError(f"no declared name for {l!r}")

    def letters(l: Letter) -> list[str]:
        if l.is_power and l not in names:
            return [word(l)] * abs(l.handle)
        return [word(l)]

    terms = []
    for mono, c in sorted(P, key=lambda t: (len(t[0]), repr(t[0]))):
        body = " ".join(s for l in mono for s in letters(l))
        if not body:
            terms.append(_number(c))
        elif c == 1:
            terms.append(body)
        elif c == -1:
            terms.append("-" + body)
        else:
            terms.append(f"{_number(c)} {body}")
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += " - " + t[1:] if t.startswith("-") else " + " + t
    return out
