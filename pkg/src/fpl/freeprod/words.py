"""Enumeration of alternating words spanning a truncated free-product space.

A word ``((j_1, c_1), ..., (j_n, c_n))`` with ``j_1 != j_2 != ...`` stands for
the tensor ``e_{c_1} (x) ... (x) e_{c_n}`` of reduced basis vectors; the empty
word is the distinguished vector. Words are ordered by weight, then
lexicographically by letter ``(factor, coordinate)``.

Weights: under ``"syllable"`` grading every letter weighs 1 (word length);
under ``"weighted"`` grading a Haar letter ``e_k`` weighs ``|k|``, so the
truncation is by word length in the group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels

GRADINGS = ("syllable", "weighted")


@dataclass(frozen=True)
class FactorShape:
    """What the word enumeration needs to know about one factor."""

    kind: str  # "fd" or "haar"
    size: int  # fd: GNS dimension d; haar: coordinate cutoff K

    def coords(self) -> list[int]:
        if self.kind == "fd":
            return list(range(1, self.size))
        return [k for k in range(-self.size, self.size + 1) if k != 0]

    def weight(self, coord: int, grading: str) -> int:
        if self.kind == "haar" and grading == "weighted":
            return abs(coord)
        return 1


def _alphabet(shapes, grading):
    letters = [(f, c) for f, sh in enumerate(shapes) for c in sh.coords()]
    weights = [shapes[f].weight(c, grading) for f, c in letters]
    return letters, weights


def count_words(shapes, max_level: int, grading: str = "syllable") -> list[int]:
    """Number of words at each weight ``0..max_level`` (no enumeration)."""
    letters, weights = _alphabet(shapes, grading)
    F = len(shapes)
    # by_first[level][f]: words of that weight starting with factor f; index F = empty word
    by_first = [[0] * (F + 1) for _ in range(max_level + 1)]
    by_first[0][F] = 1
    totals = [1] + [0] * max_level
    for lvl in range(1, max_level + 1):
        for (f, _), w in zip(letters, weights):
            src = lvl - w
            if src < 0:
                continue
            n = totals[src] - by_first[src][f]
            by_first[lvl][f] += n
            totals[lvl] += n
    return totals


class WordBasis:
    """Enumerated word basis of weight ``<= max_level``."""

    def __init__(self, shapes, max_level: int, grading: str = "syllable", backend=None):
        if grading not in GRADINGS:
            raise ValueError(f"unknown grading {grading!r}")
        if max_level < 0:
            raise ValueError("max_level must be >= 0")
        self.shapes = tuple(shapes)
        self.max_level = int(max_level)
        self.grading = grading
        self.letters, weights = _alphabet(self.shapes, grading)
        self.letter_index = {l: i for i, l in enumerate(self.letters)}
        self.letter_factor = np.array([f for f, _ in self.letters], dtype=np.int64)
        self.letter_weight = np.array(weights, dtype=np.int64)
        kern = kernels.get_backend(backend)
        self.arrays = kern.enumerate_words(
            self.letter_factor, self.letter_weight, len(self.shapes), self.max_level
        )
        for a in self.arrays.values():
            a.setflags(write=False)

    @property
    def size(self) -> int:
        return int(self.arrays["level_offsets"][-1])

    def __len__(self):
        return self.size

    def level_sizes(self) -> list[int]:
        return np.diff(self.arrays["level_offsets"]).tolist()

    def word(self, idx: int) -> tuple:
        fl, tl = self.arrays["first_letter"], self.arrays["tail"]
        out = []
        while idx > 0:
            out.append(self.letters[fl[idx]])
            idx = int(tl[idx])
        return tuple(out)

    def words(self) -> list[tuple]:
        return [self.word(i) for i in range(self.size)]

    def child(self, tails, letter_ids) -> np.ndarray:
        """Index of ``letter . tail`` (vectorized); ``-1`` where absent."""
        tails = np.asarray(tails, dtype=np.int64)
        letter_ids = np.broadcast_to(np.asarray(letter_ids, dtype=np.int64), tails.shape)
        out = np.full(tails.shape, -1, dtype=np.int64)
        ok = (tails >= 0) & (letter_ids >= 0)
        t, b = tails[ok], letter_ids[ok]
        lvl = self.arrays["level"][t] + self.letter_weight[b]
        rank = self.arrays["rank_excl"][self.letter_factor[b], t]
        good = (lvl <= self.max_level) & (rank >= 0)
        res = np.full(t.shape, -1, dtype=np.int64)
        res[good] = self.arrays["block_start"][lvl[good], b[good]] + rank[good]
        out[ok] = res
        return out

    def index(self, word) -> int:
        """Position of ``word``, or ``-1`` if it is not in the basis."""
        idx = 0
        for f, c in reversed(tuple(word)):
            b = self.letter_index.get((f, c), -1)
            if b < 0:
                return -1
            idx = int(self.child([idx], [b])[0])
            if idx < 0:
                return -1
        return idx

    def embed(self, other: "WordBasis") -> np.ndarray:
        """Indices in ``other`` of every word of ``self`` (``-1`` if missing)."""
        arr = self.arrays
        out = np.zeros(self.size, dtype=np.int64)
        remap = np.array([other.letter_index.get(l, -1) for l in self.letters], dtype=np.int64)
        off = arr["level_offsets"]
        for lvl in range(1, self.max_level + 1):
            lo, hi = off[lvl], off[lvl + 1]
            tails = out[arr["tail"][lo:hi]]
            out[lo:hi] = other.child(tails, remap[arr["first_letter"][lo:hi]])
        return out
