"""Exact action of the free-product operators on finitely supported vectors.

A :class:`LazyVec` maps words (tuples of ``(factor, coordinate)``) to complex
coefficients. Letters act through ``V_i (pi_i(x) (x) I) V_i^*``: the leading
syllable (or the cyclic vector, when the word does not start in factor
``i``) is replaced by its image under ``pi_i(x)``. Nothing is truncated, so
moments computed here are exact up to rounding.
"""

from __future__ import annotations

from .factors import check_letter
from .poly import Letter, NcPoly


class LazyVec:
    __slots__ = ("data",)

    def __init__(self, data: dict | None = None):
        self.data = data if data is not None else {}

    @classmethod
    def xi(cls) -> "LazyVec":
        return cls({(): 1.0 + 0j})

    def __getitem__(self, word) -> complex:
        return self.data.get(tuple(word), 0j)

    def __len__(self):
        return len(self.data)

    def __add__(self, other: "LazyVec") -> "LazyVec":
        out = dict(self.data)
        for w, c in other.data.items():
            out[w] = out.get(w, 0j) + c
        return LazyVec(out)

    def __mul__(self, c: complex) -> "LazyVec":
        return LazyVec({w: c * v for w, v in self.data.items()})

    __rmul__ = __mul__

    def inner(self, other: "LazyVec") -> complex:
        """``<self, other>``, linear in ``self``."""
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        s = sum(v * big.data.get(w, 0j).conjugate() if small is self
                else self.data.get(w, 0j) * v.conjugate()
                for w, v in small.data.items())
        return complex(s)

    def truncate(self, depth: int) -> "LazyVec":
        return LazyVec({w: c for w, c in self.data.items() if len(w) <= depth})

    def apply(self, letter: Letter, factors) -> "LazyVec":
        """Image under the operator of one letter."""
        i = letter.factor
        spec = factors[i]
        out: dict = {}
        if spec.kind == "haar":
            m = letter.handle
            for w, c in self.data.items():
                if w and w[0][0] == i:
                    k, tail = w[0][1] + m, w[1:]
                else:
                    k, tail = m, w
                key = tail if k == 0 else ((i, k),) + tail
                out[key] = out.get(key, 0j) + c
            return LazyVec(out)
        cols = spec.columns(letter)
        for w, c in self.data.items():
            if w and w[0][0] == i:
                slot, tail = w[0][1], w[1:]
            else:
                slot, tail = 0, w
            for s, v in cols[slot]:
                key = tail if s == 0 else ((i, s),) + tail
                out[key] = out.get(key, 0j) + v * c
        return LazyVec(out)


def apply_poly(P: NcPoly, vec: LazyVec, factors, depth: int | None = None) -> LazyVec:
    """``P vec``; with ``depth`` set, words longer than ``depth`` are dropped after each letter."""
    total = LazyVec()
    for mono, c in P:
        v = vec
        for l in reversed(mono):
            v = v.apply(l, factors)
            if depth is not None:
                v = v.truncate(depth)
        total = total + v * c
    return total


def check_poly(factors, P: NcPoly):
    for l in P.letters():
        check_letter(factors, l)


def evaluate_moment(factors, P: NcPoly, depth: int | None = None) -> complex:
    """Free-product state ``<P xi, xi>``.

    ``depth`` optionally bounds the intermediate word length; any value
    ``>= P.degree`` gives the untruncated result.
    """
    P = NcPoly.of(P)
    check_poly(factors, P)
    return apply_poly(P, LazyVec.xi(), factors, depth)[()]
