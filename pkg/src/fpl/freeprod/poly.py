"""Noncommutative *-polynomials over letters drawn from free-product factors."""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterator

import numpy as np

from ..algebra import AlgElement

# factor index reserved for the generator of a crossed-product group
GROUP = -1


@dataclass(frozen=True)
class Letter:
    """One generator occurrence.

    ``handle`` is an :class:`AlgElement` for a finite-dimensional factor or an
    integer power ``m`` (meaning ``u^m``) for a Haar-unitary factor or the
    crossed-product group. Power letters fold the adjoint into the sign of
    ``m``; element letters keep an explicit ``adjoint`` flag.
    """

    factor: int
    handle: object
    adjoint: bool = False

    def __post_init__(self):
        if isinstance(self.handle, bool):
            raise TypeError("bool is not a valid handle")
        if isinstance(self.handle, np.integer):
            object.__setattr__(self, "handle", int(self.handle))
        if isinstance(self.handle, int):
            if self.adjoint:
                object.__setattr__(self, "handle", -self.handle)
                object.__setattr__(self, "adjoint", False)
        elif not isinstance(self.handle, AlgElement):
            raise TypeError(f"unsupported handle type {type(self.handle).__name__}")

    @classmethod
    def power(cls, factor: int, m: int = 1) -> "Letter":
        return cls(factor, int(m))

    @classmethod
    def element(cls, factor: int, x: AlgElement, adjoint: bool = False) -> "Letter":
        return cls(factor, x, adjoint)

    @property
    def is_power(self) -> bool:
        return isinstance(self.handle, int)

    def star(self) -> "Letter":
        if self.is_power:
            return Letter(self.factor, -self.handle)
        return Letter(self.factor, self.handle, not self.adjoint)

    def canonical(self) -> "Letter":
        """Same operator with the adjoint applied to the element handle."""
        if self.adjoint:
            return Letter(self.factor, self.handle.adjoint())
        return self

    def element_value(self) -> AlgElement:
        return self.handle.adjoint() if self.adjoint else self.handle

    def __repr__(self):
        star = "*" if self.adjoint else ""
        if self.is_power:
            return f"<{self.factor}:^{self.handle}>"
        return f"<{self.factor}:x{star}>"


Monomial = tuple  # tuple[Letter, ...]


class NcPoly:
    """Finite formal sum ``sum c_w w`` over words ``w`` of letters.

    The empty monomial is the unit. Arithmetic: ``+``, ``-``, ``*`` (product
    or scalar), ``**`` (nonnegative power) and :meth:`adjoint`.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        clean = {}
        for mono, c in (terms or {}).items():
            c = complex(c)
            if c != 0:
                clean[tuple(mono)] = clean.get(tuple(mono), 0) + c
        self.terms = {m: c for m, c in clean.items() if c != 0}

    @classmethod
    def constant(cls, c: complex) -> "NcPoly":
        return cls({(): c})

    @classmethod
    def of(cls, x) -> "NcPoly":
        if isinstance(x, NcPoly):
            return x
        if isinstance(x, Letter):
            return cls({(x,): 1})
        if isinstance(x, Number):
            return cls.constant(x)
        raise TypeError(f"cannot make a polynomial from {type(x).__name__}")

    def __iter__(self) -> Iterator[tuple[Monomial, complex]]:
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        other = NcPoly.of(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return NcPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return NcPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-NcPoly.of(other))

    def __rsub__(self, other):
        return NcPoly.of(other) - self

    def __mul__(self, other):
        if isinstance(other, Number):
            return NcPoly({m: c * other for m, c in self.terms.items()})
        other = NcPoly.of(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = m1 + m2
                out[key] = out.get(key, 0) + c1 * c2
        return NcPoly(out)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NcPoly.of(other) * self

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative polynomial powers are undefined")
        out = NcPoly.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, NcPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def adjoint(self) -> "NcPoly":
        return NcPoly(
            {tuple(l.star() for l in reversed(m)): c.conjugate() for m, c in self.terms.items()}
        )

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def letters(self) -> set:
        return {l for m in self.terms for l in m}

    def simplify(self) -> "NcPoly":
        """Merge adjacent power letters of the same factor (``u^a u^b = u^{a+b}``)."""
        out: dict = {}
        for m, c in self.terms.items():
            merged: list = []
            for l in m:
                if merged and l.is_power and merged[-1].is_power and merged[-1].factor == l.factor:
                    p = merged.pop().handle + l.handle
                    if p != 0:
                        merged.append(Letter(l.factor, p))
                else:
                    merged.append(l)
            key = tuple(merged)
            out[key] = out.get(key, 0) + c
        return NcPoly(out)

    def canonical(self) -> "NcPoly":
        out: dict = {}
        for m, c in self.simplify().terms.items():
            key = tuple(l.canonical() for l in m)
            out[key] = out.get(key, 0) + c
        return NcPoly(out)

    def is_self_adjoint(self, tol: float = 0.0) -> bool:
        a, b = self.canonical().terms, self.adjoint().canonical().terms
        keys = set(a) | set(b)
        return all(abs(a.get(k, 0) - b.get(k, 0)) <= tol for k in keys)

    def __repr__(self):
        return f"NcPoly({self.terms!r})"


def letter(factor: int, handle, adjoint: bool = False) -> NcPoly:
    """Polynomial consisting of a single letter."""
    return NcPoly.of(Letter(factor, handle, adjoint))
