"""Factor specifications for reduced free products."""

from __future__ import annotations

from ..algebra import AlgElement, FdAlgebra, TracialState, eval_trace
from ..gns import build_gns
from .poly import Letter


class FiniteDim:
    """A block algebra with a faithful trace, acting on its GNS space.

    Reduced coordinates ``1..d-1`` are the trace-orthonormal basis vectors
    ``p_2..p_d``; coordinate ``0`` is the cyclic vector.
    """

    kind = "fd"

    def __init__(self, algebra: FdAlgebra, trace: TracialState):
        if len(trace.weights) != algebra.num_blocks:
            raise ValueError("trace/algebra block count mismatch")
        self.algebra = algebra
        self.trace = trace
        self.gns = build_gns(algebra, trace)
        self._columns: dict = {}

    @property
    def gns_dim(self) -> int:
        return self.gns.dim

    @property
    def reduced_dim(self) -> int:
        return self.gns.dim - 1

    def check(self, letter: Letter):
        if letter.is_power or letter.handle.algebra != self.algebra:
            raise ValueError(f"letter {letter!r} does not belong to factor {self}")

    def slot_matrix(self, letter: Letter):
        self.check(letter)
        r = self.gns.rho(letter.handle)
        return r.conj().T if letter.adjoint else r

    def columns(self, letter: Letter) -> list:
        """Per source slot, the nonzero ``(target slot, value)`` pairs."""
        hit = self._columns.get(letter)
        if hit is None:
            r = self.slot_matrix(letter)
            hit = [[(s, complex(r[s, t])) for s in range(r.shape[0]) if r[s, t] != 0]
                   for t in range(r.shape[1])]
            self._columns[letter] = hit
        return hit

    def trace_of(self, x: AlgElement) -> complex:
        return eval_trace(self.trace, x)

    def __repr__(self):
        return f"FiniteDim({self.algebra}, {self.trace.weights})"


class HaarUnitary:
    """The group algebra of the integers with its canonical trace.

    The GNS basis is ``e_k``, ``k`` an integer, with ``e_0`` cyclic; ``cutoff``
    ``K`` keeps ``|k| <= K`` in truncated spaces (``None``: use the word
    length cutoff).
    """

    kind = "haar"

    def __init__(self, cutoff: int | None = None):
        if cutoff is not None and cutoff < 1:
            raise ValueError("Haar cutoff must be >= 1")
        self.cutoff = cutoff

    def check(self, letter: Letter):
        if not letter.is_power:
            raise ValueError(f"letter {letter!r} is not a power of a Haar generator")

    def __repr__(self):
        return f"HaarUnitary(cutoff={self.cutoff})"


FactorSpec = FiniteDim | HaarUnitary


def check_letter(factors, letter: Letter):
    if not 0 <= letter.factor < len(factors):
        raise ValueError(f"letter references undeclared factor {letter.factor}")
    factors[letter.factor].check(letter)
