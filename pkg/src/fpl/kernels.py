"""Backend selection for the word-basis kernels.

The compiled ``fpl._kernels`` extension is used when it was built; otherwise
(or when ``FPL_PURE_PYTHON=1``) the numpy implementation in
``fpl._kernels_py`` is used. Both expose:

``enumerate_words(letter_factor, letter_weight, n_factors, max_level)``
    Enumerate alternating words of weight <= ``max_level``, weight-major and
    lexicographic in the letter order. Returns a dict of int64 arrays:
    ``level_offsets``, ``level``, ``first_letter``, ``tail``,
    ``first_factor`` (``-1`` marks the empty word), ``rank_excl`` (rank of a
    word among its level's words not starting with factor ``f``, else
    ``-1``) and ``block_start[level, letter]``.

``assemble_action(words, letter_weight, max_level, factor, slot_of_letter,
slot_letter, xi_slot, colptr, rowidx, vals)``
    COO triplets of ``V_i (T (x) I) V_i^*`` for a slot matrix ``T`` given in
    CSC form over the factor's slots; images beyond ``max_level`` are
    dropped.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    if os.environ.get("FPL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels forced")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"
_active = _compiled if _compiled is not None else _kernels_py


def get_backend(name: str | None = None):
    """Return the kernel module ``name`` ('cython' or 'numpy'), or the active one."""
    if name is None:
        return _active
    if name == "numpy":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def enumerate_words(*args, **kwargs):
    return _active.enumerate_words(*args, **kwargs)


def assemble_action(*args, **kwargs):
    return _active.assemble_action(*args, **kwargs)
