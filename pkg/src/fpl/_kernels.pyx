# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled word-basis kernels. Same contract as ``fpl._kernels_py``."""

import numpy as np
cimport numpy as cnp

ctypedef cnp.int64_t i64


def enumerate_words(letter_factor, letter_weight, Py_ssize_t n_factors, Py_ssize_t max_level):
    cdef i64[:] lf = np.ascontiguousarray(letter_factor, dtype=np.int64)
    cdef i64[:] lw = np.ascontiguousarray(letter_weight, dtype=np.int64)
    cdef Py_ssize_t A = lf.shape[0]
    cdef Py_ssize_t lvl, a, src, f, w, lo, hi, cur, r, k
    cdef i64 size

    # counts per level and first factor (column n_factors holds the empty word)
    cdef i64[:, :] cnt = np.zeros((max_level + 1, n_factors + 1), dtype=np.int64)
    cdef i64[:] lsize = np.zeros(max_level + 1, dtype=np.int64)
    cnt[0, n_factors] = 1
    lsize[0] = 1
    for lvl in range(1, max_level + 1):
        for a in range(A):
            src = lvl - lw[a]
            if src < 0:
                continue
            size = lsize[src] - cnt[src, lf[a]]
            cnt[lvl, lf[a]] += size
            lsize[lvl] += size

    offsets_np = np.zeros(max_level + 2, dtype=np.int64)
    cdef i64[:] off = offsets_np
    for lvl in range(max_level + 1):
        off[lvl + 1] = off[lvl] + lsize[lvl]
    cdef Py_ssize_t N = off[max_level + 1]

    level_np = np.empty(N, dtype=np.int64)
    fl_np = np.empty(N, dtype=np.int64)
    tail_np = np.empty(N, dtype=np.int64)
    ff_np = np.empty(N, dtype=np.int64)
    bs_np = np.full((max_level + 1, A), -1, dtype=np.int64)
    cdef i64[:] level = level_np
    cdef i64[:] fl = fl_np
    cdef i64[:] tl = tail_np
    cdef i64[:] ff = ff_np
    cdef i64[:, :] bs = bs_np

    level[0] = 0
    fl[0] = -1
    tl[0] = -1
    ff[0] = -1
    for lvl in range(1, max_level + 1):
        cur = off[lvl]
        for a in range(A):
            src = lvl - lw[a]
            if src < 0:
                continue
            f = lf[a]
            bs[lvl, a] = cur
            for w in range(off[src], off[src + 1]):
                if ff[w] != f:
                    level[cur] = lvl
                    fl[cur] = a
                    tl[cur] = w
                    ff[cur] = f
                    cur += 1

    rank_np = np.empty((n_factors, N), dtype=np.int64)
    cdef i64[:, :] rank = rank_np
    for f in range(n_factors):
        for lvl in range(max_level + 1):
            r = 0
            for w in range(off[lvl], off[lvl + 1]):
                if ff[w] == f:
                    rank[f, w] = -1
                else:
                    rank[f, w] = r
                    r += 1

    return {
        "level_offsets": offsets_np,
        "level": level_np,
        "first_letter": fl_np,
        "tail": tail_np,
        "first_factor": ff_np,
        "rank_excl": rank_np,
        "block_start": bs_np,
    }


def assemble_action(words, letter_weight, Py_ssize_t max_level, Py_ssize_t factor,
                    slot_of_letter, slot_letter, Py_ssize_t xi_slot, colptr, rowidx, vals):
    cdef const i64[:] ff = words["first_factor"]
    cdef const i64[:] fl = words["first_letter"]
    cdef const i64[:] tl = words["tail"]
    cdef const i64[:] level = words["level"]
    cdef const i64[:] rank = np.ascontiguousarray(words["rank_excl"][factor])
    cdef const i64[:, :] bs = words["block_start"]
    cdef const i64[:] lw = np.ascontiguousarray(letter_weight, dtype=np.int64)
    cdef const i64[:] sol = np.ascontiguousarray(slot_of_letter, dtype=np.int64)
    cdef const i64[:] sl = np.ascontiguousarray(slot_letter, dtype=np.int64)
    cdef const i64[:] cp = np.ascontiguousarray(colptr, dtype=np.int64)
    cdef const i64[:] ri = np.ascontiguousarray(rowidx, dtype=np.int64)
    cdef const double complex[:] vv = np.ascontiguousarray(vals, dtype=np.complex128)
    cdef Py_ssize_t N = ff.shape[0]
    cdef Py_ssize_t w, e, s, b, slot, t, lvl, n = 0, cap = 0

    for w in range(N):
        slot = sol[fl[w]] if ff[w] == factor else xi_slot
        cap += cp[slot + 1] - cp[slot]

    rows_np = np.empty(cap, dtype=np.int64)
    cols_np = np.empty(cap, dtype=np.int64)
    data_np = np.empty(cap, dtype=np.complex128)
    cdef i64[:] rows = rows_np
    cdef i64[:] cols = cols_np
    cdef double complex[:] data = data_np

    for w in range(N):
        if ff[w] == factor:
            slot = sol[fl[w]]
            t = tl[w]
        else:
            slot = xi_slot
            t = w
        for e in range(cp[slot], cp[slot + 1]):
            s = ri[e]
            if s == xi_slot:
                rows[n] = t
            else:
                b = sl[s]
                lvl = level[t] + lw[b]
                if lvl > max_level:
                    continue
                rows[n] = bs[lvl, b] + rank[t]
            cols[n] = w
            data[n] = vv[e]
            n += 1
    return rows_np[:n], cols_np[:n], data_np[:n]
