"""Finite-dimensional C*-algebras as direct sums of full matrix blocks.

An :class:`FdAlgebra` is ``M_{n_1} + ... + M_{n_r}``; its elements are
:class:`AlgElement` values holding one dense complex block per summand.
Faithful tracial states are block-weighted normalized traces
(:class:`TracialState`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class FdAlgebra:
    """Direct sum of matrix algebras ``M_{n_1} + ... + M_{n_r}``."""

    block_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.block_sizes)
        if len(sizes) == 0:
            raise ValueError("an algebra needs at least one block")
        if any(n < 1 for n in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @property
    def dim(self) -> int:
        """Complex dimension ``sum n_i^2``."""
        return sum(n * n for n in self.block_sizes)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    def element(self, blocks: Iterable) -> "AlgElement":
        return AlgElement(self, tuple(blocks))

    def identity(self) -> "AlgElement":
        return AlgElement(self, tuple(np.eye(n) for n in self.block_sizes))

    def zero(self) -> "AlgElement":
        return AlgElement(self, tuple(np.zeros((n, n)) for n in self.block_sizes))

    def scalar(self, c: complex) -> "AlgElement":
        return self.identity() * c

    def diag(self, values: Sequence[complex]) -> "AlgElement":
        """Element of a commutative algebra (all blocks 1x1) from its values."""
        if any(n != 1 for n in self.block_sizes):
            raise ValueError("diag() needs an algebra of 1x1 blocks")
        if len(values) != self.num_blocks:
            raise ValueError("wrong number of diagonal values")
        return AlgElement(self, tuple(np.array([[v]]) for v in values))

    def matrix_unit(self, block: int, row: int, col: int) -> "AlgElement":
        blocks = []
        for b, n in enumerate(self.block_sizes):
            m = np.zeros((n, n))
            if b == block:
                m[row, col] = 1.0
            blocks.append(m)
        return AlgElement(self, tuple(blocks))

    def random_element(self, rng: np.random.Generator) -> "AlgElement":
        return AlgElement(
            self,
            tuple(
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                for n in self.block_sizes
            ),
        )

    def from_dense(self, mat: np.ndarray) -> "AlgElement":
        """Read the diagonal blocks of a block-diagonal matrix."""
        blocks, pos = [], 0
        for n in self.block_sizes:
            blocks.append(np.array(mat[pos:pos + n, pos:pos + n]))
            pos += n
        return AlgElement(self, tuple(blocks))

    def __str__(self):
        return " + ".join("C" if n == 1 else f"M_{n}" for n in self.block_sizes)


class AlgElement:
    """Immutable element of an :class:`FdAlgebra`.

    ``x * y`` is the algebra product, ``c * x`` scales, ``x.adjoint()`` is
    the involution. Equality and hashing are exact (bitwise on the blocks),
    which lets elements serve as letter handles in polynomials.
    """

    __slots__ = ("algebra", "blocks", "_key")

    def __init__(self, algebra: FdAlgebra, blocks: tuple):
        if len(blocks) != algebra.num_blocks:
            raise ValueError(
                f"expected {algebra.num_blocks} blocks, got {len(blocks)}"
            )
        arrs = []
        for n, b in zip(algebra.block_sizes, blocks):
            a = np.array(b, dtype=complex).reshape(np.shape(b))
            if a.shape != (n, n):
                raise ValueError(f"block of shape {a.shape} where ({n}, {n}) expected")
            a.setflags(write=False)
            arrs.append(a)
        self.algebra = algebra
        self.blocks = tuple(arrs)
        self._key = None

    def _check(self, other: "AlgElement"):
        if other.algebra != self.algebra:
            raise ValueError(f"algebra mismatch: {self.algebra} vs {other.algebra}")

    def __add__(self, other):
        if not isinstance(other, AlgElement):
            other = self.algebra.scalar(other)
        self._check(other)
        return AlgElement(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    __radd__ = __add__

    def __neg__(self):
        return AlgElement(self.algebra, tuple(-a for a in self.blocks))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgElement):
            self._check(other)
            return AlgElement(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))
        return AlgElement(self.algebra, tuple(a * other for a in self.blocks))

    def __rmul__(self, other):
        return AlgElement(self.algebra, tuple(other * a for a in self.blocks))

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined for general elements")
        out = self.algebra.identity()
        for _ in range(k):
            out = out * self
        return out

    def adjoint(self) -> "AlgElement":
        return AlgElement(self.algebra, tuple(a.conj().T for a in self.blocks))

    def norm(self) -> float:
        """C*-norm: the largest block operator norm."""
        return max(float(np.linalg.norm(a, 2)) for a in self.blocks)

    def to_dense(self) -> np.ndarray:
        n = sum(self.algebra.block_sizes)
        out = np.zeros((n, n), dtype=complex)
        pos = 0
        for a in self.blocks:
            k = a.shape[0]
            out[pos:pos + k, pos:pos + k] = a
            pos += k
        return out

    def coords(self) -> np.ndarray:
        """Flattened block entries, in (block, row, column) order."""
        return np.concatenate([a.ravel() for a in self.blocks])

    def is_identity(self) -> bool:
        return all(np.array_equal(a, np.eye(a.shape[0])) for a in self.blocks)

    def allclose(self, other: "AlgElement", atol: float = 1e-12) -> bool:
        return all(np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.blocks, other.blocks))

    def _hash_key(self):
        if self._key is None:
            # adding 0.0 maps -0.0 to +0.0 so equal values compare equal
            self._key = (self.algebra.block_sizes, b"".join((a + 0.0).tobytes() for a in self.blocks))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self._hash_key() == other._hash_key()

    def __hash__(self):
        return hash(self._hash_key())

    def __repr__(self):
        return f"AlgElement({self.algebra}, {[a.tolist() for a in self.blocks]})"


@dataclass(frozen=True)
class TracialState:
    """Faithful tracial state ``sum_i alpha_i tr_{n_i}`` on a block algebra.

    ``numerators``/``denominator`` carry the exact rational form
    ``alpha_i = p_i / q`` when known.
    """

    weights: tuple[float, ...]
    numerators: tuple[int, ...] | None = None
    denominator: int | None = None

    def __post_init__(self):
        w = tuple(float(a) for a in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) == 0:
            raise ValueError("empty weight list")
        if any(not a > 0 for a in w):
            raise ValueError(f"weights must be positive (faithfulness), got {w}")
        if abs(sum(w) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {sum(w)!r}, not 1")
        if (self.numerators is None) != (self.denominator is None):
            raise ValueError("numerators and denominator must be given together")
        if self.numerators is not None:
            p = tuple(int(x) for x in self.numerators)
            q = int(self.denominator)
            object.__setattr__(self, "numerators", p)
            object.__setattr__(self, "denominator", q)
            if len(p) != len(w) or sum(p) != q or any(x < 1 for x in p):
                raise ValueError(f"invalid rational form {p}/{q}")
            if any(a != x / q for a, x in zip(w, p)):
                raise ValueError("rational form does not match weights")

    @classmethod
    def uniform(cls, r: int) -> "TracialState":
        return cls.from_fractions([Fraction(1, r)] * r)

    @classmethod
    def from_fractions(cls, fracs: Sequence) -> "TracialState":
        fr = [Fraction(f) for f in fracs]
        q = reduce(math.lcm, (f.denominator for f in fr), 1)
        p = [int(f * q) for f in fr]
        return cls(tuple(x / q for x in p), tuple(p), q)

    @classmethod
    def matrix_trace(cls, algebra: FdAlgebra) -> "TracialState":
        """Restriction of the normalized trace of ``M_{sum n_i}`` (``alpha_i = n_i / sum n``)."""
        total = sum(algebra.block_sizes)
        return cls.from_fractions([Fraction(n, total) for n in algebra.block_sizes])

    @property
    def is_rational(self) -> bool:
        return self.numerators is not None

    def fractions(self) -> list[Fraction]:
        if not self.is_rational:
            raise ValueError("trace has no rational form")
        return [Fraction(p, self.denominator) for p in self.numerators]


def eval_trace(trace: TracialState, x: AlgElement) -> complex:
    """``tau(x) = sum_i alpha_i tr(x_i) / n_i``."""
    if len(trace.weights) != x.algebra.num_blocks:
        raise ValueError(
            f"trace has {len(trace.weights)} weights, algebra has {x.algebra.num_blocks} blocks"
        )
    return complex(sum(a * np.trace(b) / b.shape[0] for a, b in zip(trace.weights, x.blocks)))


def tensor_min(
    a1: FdAlgebra, t1: TracialState, a2: FdAlgebra, t2: TracialState
) -> tuple[FdAlgebra, TracialState]:
    """Minimal tensor product of two traced block algebras.

    Block ``(i, j)`` (``i`` major) has size ``n_i * m_j`` and weight
    ``alpha_i * beta_j``.
    """
    for a, t in ((a1, t1), (a2, t2)):
        if a.num_blocks != len(t.weights):
            raise ValueError("trace/algebra block count mismatch")
    sizes = tuple(n * m for n in a1.block_sizes for m in a2.block_sizes)
    if t1.is_rational and t2.is_rational:
        trace = TracialState.from_fractions([f * g for f in t1.fractions() for g in t2.fractions()])
    else:
        w = [a * b for a in t1.weights for b in t2.weights]
        s = sum(w)
        trace = TracialState(tuple(x / s for x in w))
    return FdAlgebra(sizes), trace


def tensor_elements(x: AlgElement, y: AlgElement) -> AlgElement:
    """The elementary tensor ``x (x) y`` inside ``tensor_min`` of the two algebras."""
    alg = FdAlgebra(tuple(n * m for n in x.algebra.block_sizes for m in y.algebra.block_sizes))
    return AlgElement(alg, tuple(np.kron(a, b) for a in x.blocks for b in y.blocks))


def approx_rational_trace(trace: TracialState, Q: int) -> TracialState:
    """Snap a trace to weights ``p_i / Q`` with every ``p_i >= 1``.

    Weights are rounded half-up, then the sum is repaired one unit at a
    time: deficits go to the entry rounded down the most, surpluses come
    off the entry rounded up the most (never below 1).
    """
    r = len(trace.weights)
    if Q < r:
        raise ValueError(f"denominator Q={Q} < {r} blocks: cannot keep every weight >= 1/Q")
    target = [a * Q for a in trace.weights]
    p = [max(1, math.floor(t + 0.5)) for t in target]
    while sum(p) != Q:
        if sum(p) < Q:
            i = max(range(r), key=lambda j: (target[j] - p[j], -j))
            p[i] += 1
        else:
            candidates = [j for j in range(r) if p[j] > 1]
            i = max(candidates, key=lambda j: (p[j] - target[j], -j))
            p[i] -= 1
    return TracialState(tuple(x / Q for x in p), tuple(p), Q)
