"""Numpy implementations of the word-basis kernels (fallback for ``_kernels``).

Both backends share one contract; see :mod:`fpl.kernels`.
"""

import numpy as np


def enumerate_words(letter_factor, letter_weight, n_factors, max_level):
    letter_factor = np.asarray(letter_factor, dtype=np.int64)
    letter_weight = np.asarray(letter_weight, dtype=np.int64)
    A = len(letter_factor)
    block_start = np.full((max_level + 1, A), -1, dtype=np.int64)
    lvl_first_factor = [np.array([-1], dtype=np.int64)]
    first_letter = [np.array([-1], dtype=np.int64)]
    tail = [np.array([-1], dtype=np.int64)]
    offsets = [0, 1]
    for lvl in range(1, max_level + 1):
        ff_parts, fl_parts, tl_parts = [], [], []
        cur = offsets[-1]
        for a in range(A):
            src = lvl - letter_weight[a]
            if src < 0:
                continue
            f = letter_factor[a]
            tails = np.flatnonzero(lvl_first_factor[src] != f) + offsets[src]
            block_start[lvl, a] = cur
            cur += len(tails)
            tl_parts.append(tails)
            fl_parts.append(np.full(len(tails), a, dtype=np.int64))
            ff_parts.append(np.full(len(tails), f, dtype=np.int64))
        empty = np.zeros(0, dtype=np.int64)
        lvl_first_factor.append(np.concatenate(ff_parts) if ff_parts else empty)
        first_letter.append(np.concatenate(fl_parts) if fl_parts else empty)
        tail.append(np.concatenate(tl_parts) if tl_parts else empty)
        offsets.append(cur)
    first_factor = np.concatenate(lvl_first_factor)
    N = offsets[-1]
    level = np.repeat(np.arange(max_level + 1, dtype=np.int64), np.diff(offsets))
    rank_excl = np.empty((n_factors, N), dtype=np.int64)
    for f in range(n_factors):
        for lvl in range(max_level + 1):
            lo, hi = offsets[lvl], offsets[lvl + 1]
            mask = first_factor[lo:hi] != f
            r = np.cumsum(mask) - 1
            r[~mask] = -1
            rank_excl[f, lo:hi] = r
    return {
        "level_offsets": np.asarray(offsets, dtype=np.int64),
        "level": level,
        "first_letter": np.concatenate(first_letter),
        "tail": np.concatenate(tail),
        "first_factor": first_factor,
        "rank_excl": rank_excl,
        "block_start": block_start,
    }


def assemble_action(words, letter_weight, max_level, factor, slot_of_letter, slot_letter,
                    xi_slot, colptr, rowidx, vals):
    first_factor = words["first_factor"]
    first_letter = words["first_letter"]
    level = words["level"]
    rank = words["rank_excl"][factor]
    block_start = words["block_start"]
    N = len(first_factor)
    slot_of_letter = np.asarray(slot_of_letter, dtype=np.int64)
    slot_letter = np.asarray(slot_letter, dtype=np.int64)
    letter_weight = np.asarray(letter_weight, dtype=np.int64)

    is_i = first_factor == factor
    slot = np.full(N, xi_slot, dtype=np.int64)
    slot[is_i] = slot_of_letter[first_letter[is_i]]
    t = np.arange(N, dtype=np.int64)
    t[is_i] = words["tail"][is_i]

    order = np.argsort(slot, kind="stable")
    bounds = np.searchsorted(slot[order], np.arange(len(colptr)))
    rows, cols, data = [], [], []
    for s0 in range(len(colptr) - 1):
        src = order[bounds[s0]:bounds[s0 + 1]]
        if len(src) == 0:
            continue
        ts = t[src]
        for e in range(colptr[s0], colptr[s0 + 1]):
            s = rowidx[e]
            if s == xi_slot:
                tgt, keep = ts, slice(None)
            else:
                b = slot_letter[s]
                lvl = level[ts] + letter_weight[b]
                keep = lvl <= max_level
                tgt = block_start[lvl[keep], b] + rank[ts[keep]]
            rows.append(tgt)
            cols.append(src[keep])
            data.append(np.full(len(tgt), vals[e], dtype=complex))
    if not rows:
        return (np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, complex))
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(data)
