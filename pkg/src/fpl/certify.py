"""Matrix models for reduced free products and side-condition checkers.

Random models embed every finite-dimensional factor trace-preservingly into
a common matrix algebra, amplify, and conjugate each factor by its own Haar
unitary; Haar-unitary factors are modeled by a Haar unitary directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import AlgElement, FdAlgebra, TracialState, eval_trace
from .freeprod.factors import FiniteDim, HaarUnitary
from .freeprod.poly import Letter, NcPoly


# -- trace-preserving embeddings ------------------------------------------------
@dataclass(frozen=True)
class TraceEmbedding:
    """``x -> diag(x_1 (m_1 times), ..., x_r (m_r times))`` into ``M_N``.

    With ``alpha_i = p_i / q`` in lowest terms and ``l = lcm(n_i)``:
    ``N = q l`` and ``m_i = p_i l / n_i``, so ``m_i n_i / N = alpha_i``.
    """

    algebra: FdAlgebra
    trace: TracialState
    N: int
    multiplicities: tuple[int, ...]

    def embed(self, x: AlgElement) -> np.ndarray:
        if x.algebra != self.algebra:
            raise ValueError("element belongs to a different algebra")
        out = np.zeros((self.N, self.N), dtype=complex)
        pos = 0
        for b, m in zip(x.blocks, self.multiplicities):
            n = b.shape[0]
            for _ in range(m):
                out[pos:pos + n, pos:pos + n] = b
                pos += n
        return out

    def exact_trace_defect(self) -> Fraction:
        """Max ``|tau_N(pi(e)) - tau(e)|`` over diagonal matrix units, in rational arithmetic."""
        worst = Fraction(0)
        for a, n, m in zip(self.trace.fractions(), self.algebra.block_sizes, self.multiplicities):
            worst = max(worst, abs(Fraction(m, self.N) - a / n))
        return worst


def trace_embedding(algebra: FdAlgebra, trace: TracialState) -> TraceEmbedding:
    if not trace.is_rational:
        raise ValueError("trace_embedding needs a rational trace (snap it first)")
    if len(trace.weights) != algebra.num_blocks:
        raise ValueError("trace/algebra block count mismatch")
    fr = trace.fractions()
    q = math.lcm(*(f.denominator for f in fr))
    l = math.lcm(*algebra.block_sizes)
    N = q * l
    mult = tuple(int(f * q) * l // n for f, n in zip(fr, algebra.block_sizes))
    assert sum(n * m for n, m in zip(algebra.block_sizes, mult)) == N
    return TraceEmbedding(algebra, trace, N, mult)


# -- Haar unitaries and random models -----------------------------------------
def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_unitary_sample(dim: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with phase correction."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = _rng(seed)
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


@dataclass
class RandomModel:
    """Generator matrices of one random model, indexed by factor."""

    factors: tuple
    dim: int
    unitaries: tuple  # conjugating unitary (fd) or the model unitary (haar), per factor
    embeddings: tuple  # TraceEmbedding or None, per factor
    amplification: tuple  # per factor: identity size tensored on the right
    _cache: dict = field(default_factory=dict, repr=False)

    def letter_matrix(self, l: Letter) -> np.ndarray:
        hit = self._cache.get(l)
        if hit is not None:
            return hit
        W = self.unitaries[l.factor]
        if l.is_power:
            m = l.handle
            out = np.linalg.matrix_power(W if m >= 0 else W.conj().T, abs(m))
        else:
            x = self.embeddings[l.factor].embed(l.element_value())
            x = np.kron(x, np.eye(self.amplification[l.factor]))
            out = W @ x @ W.conj().T
        self._cache[l] = out
        return out

    def evaluate(self, P) -> np.ndarray:
        P = NcPoly.of(P)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for mono, c in P:
            M = np.eye(self.dim, dtype=complex)
            for l in mono:
                M = M @ self.letter_matrix(l)
            out += c * M
        return out

    def norm(self, P) -> float:
        P = NcPoly.of(P)
        M = self.evaluate(P)
        if P.is_self_adjoint(1e-12):
            ev = np.linalg.eigvalsh((M + M.conj().T) / 2)
            return float(np.max(np.abs(ev)))
        return float(np.linalg.norm(M, 2))

    def normalized_trace(self, P) -> complex:
        return complex(np.trace(self.evaluate(P)) / self.dim)


def common_dimension(factors) -> tuple[int, list]:
    embs = []
    N = 1
    for f in factors:
        if isinstance(f, FiniteDim):
            e = trace_embedding(f.algebra, f.trace)
            embs.append(e)
            N = math.lcm(N, e.N)
        elif isinstance(f, HaarUnitary):
            embs.append(None)
        else:
            raise TypeError(f"unsupported factor {f!r}")
    return N, embs


def random_model(factors, k: int, seed=None, max_dim: int = 4096) -> RandomModel:
    """Independent Haar-rotated embeddings of each factor into ``M_{k N}``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    N, embs = common_dimension(factors)
    D = k * N
    if D > max_dim:
        raise MemoryError(f"model dimension {D} exceeds the limit {max_dim}")
    rng = _rng(seed)
    unitaries = tuple(haar_unitary_sample(D, rng) for _ in factors)
    amp = tuple(D // e.N if e is not None else 1 for e in embs)
    return RandomModel(tuple(factors), D, unitaries, tuple(embs), amp)


# -- MF certificates ------------------------------------------------------------
@dataclass
class MfCertificate:
    """Best-of-trials matrix model matching target norms.

    ``certified`` holds iff ``eps_achieved <= eps``. ``target_level`` records
    the truncation at which the targets (compressed norms) were computed.
    """

    k: int
    dim: int
    model: RandomModel | None
    polys: list
    model_norms: list
    targets: list
    eps: float
    eps_achieved: float
    certified: bool
    seeds: list
    best_trial: int
    trial_deviations: list
    trial_errors: dict
    target_level: int | None = None

    def recompute_norms(self) -> list[float]:
        return [self.model.norm(P) for P in self.polys]


def mf_certificate(factors, polys, targets, k: int, trials: int, eps: float, seed: int = 0,
                   target_level: int | None = None) -> MfCertificate:
    """Search ``trials`` random models (seed ``seed + t``) for norm agreement within ``eps``."""
    if len(polys) != len(targets):
        raise ValueError("one target per polynomial is required")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    polys = [NcPoly.of(P) for P in polys]
    seeds = [seed + t for t in range(trials)]
    devs, errors = [], {}
    best = (math.inf, None, None, None)
    for t, s in enumerate(seeds):
        try:
            model = random_model(factors, k, s)
            norms = [model.norm(P) for P in polys]
        except np.linalg.LinAlgError as exc:
            errors[t] = str(exc)
            devs.append(math.nan)
            continue
        dev = max((abs(a - b) for a, b in zip(norms, targets)), default=0.0)
        devs.append(dev)
        if dev < best[0]:
            best = (dev, t, model, norms)
    dev, t_best, model, norms = best
    return MfCertificate(
        k=k, dim=model.dim if model is not None else 0, model=model, polys=polys,
        model_norms=norms or [], targets=list(targets), eps=eps, eps_achieved=dev,
        certified=bool(dev <= eps), seeds=seeds, best_trial=t_best if t_best is not None else -1,
        trial_deviations=devs, trial_errors=errors, target_level=target_level,
    )


# -- Avitzour condition ---------------------------------------------------------
@dataclass(frozen=True)
class AvitzourReport:
    ok: bool
    moments: dict
    factors: tuple
    a: NcPoly  # u v u v
    b: NcPoly  # u w u w


def _context(t) -> FiniteDim:
    if isinstance(t, FiniteDim):
        return t
    algebra, trace = t
    return FiniteDim(algebra, trace)


def avitzour_verify(t1, u: AlgElement, t2, v: AlgElement, w: AlgElement, tol: float = 1e-10) -> AvitzourReport:
    """Check ``tau_1(u) = tau_2(v) = tau_2(w) = tau_2(w* v) = 0`` for unitaries ``u``, ``v``, ``w``.

    ``t1``, ``t2`` are :class:`FiniteDim` factors or ``(algebra, trace)`` pairs.
    """
    f1, f2 = _context(t1), _context(t2)
    for name, x, f in (("u", u, f1), ("v", v, f2), ("w", w, f2)):
        if x.algebra != f.algebra:
            raise ValueError(f"{name} is not in its factor's algebra")
        if not (x.adjoint() * x).allclose(f.algebra.identity(), 1e-10):
            raise ValueError(f"{name} is not unitary")
    moments = {
        "tau1(u)": eval_trace(f1.trace, u),
        "tau2(v)": eval_trace(f2.trace, v),
        "tau2(w)": eval_trace(f2.trace, w),
        "tau2(w*v)": eval_trace(f2.trace, w.adjoint() * v),
    }
    ok = all(abs(m) <= tol for m in moments.values())
    lu, lv, lw = (NcPoly.of(Letter(0, u)), NcPoly.of(Letter(1, v)), NcPoly.of(Letter(1, w)))
    return AvitzourReport(ok, moments, (f1, f2), lu * lv * lu * lv, lu * lw * lu * lw)


# -- partial diffuseness -------------------------------------------------------
@dataclass(frozen=True)
class MeasureSketch:
    """Probability measure given by atoms and atomless pieces on closed intervals."""

    atoms: tuple = ()  # ((location, mass), ...)
    pieces: tuple = ()  # (((c, d), mass), ...)

    def __post_init__(self):
        atoms = tuple((float(x), float(m)) for x, m in self.atoms)
        pieces = tuple(((float(c), float(d)), float(m)) for (c, d), m in self.pieces)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", pieces)
        if any(m <= 0 for _, m in atoms) or any(m <= 0 for _, m in pieces):
            raise ValueError("masses must be positive")
        if any(not c < d for (c, d), _ in pieces):
            raise ValueError("intervals need c < d")
        total = sum(m for _, m in atoms) + sum(m for _, m in pieces)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"total mass {total!r} is not 1")


def support_components(m: MeasureSketch) -> list[dict]:
    """Maximal connected pieces of the support, left to right."""
    items = [(x, x, True) for x, _ in m.atoms] + [(c, d, False) for (c, d), _ in m.pieces]
    items.sort(key=lambda t: (t[0], t[1]))
    comps: list[dict] = []
    for lo, hi, is_atom in items:
        if comps and lo <= comps[-1]["hi"]:
            c = comps[-1]
            c["hi"] = max(c["hi"], hi)
            c["atom"] |= is_atom
            c["continuous"] |= not is_atom
        else:
            comps.append({"lo": lo, "hi": hi, "atom": is_atom, "continuous": not is_atom})
    return comps


def partial_diffuse_check(m: MeasureSketch) -> tuple[float, float] | None:
    """Leftmost support component that is atomless and carries continuous mass.

    Components are separated by positive gaps, so such a component ``[a, b]``
    is isolated from the rest of the support.
    """
    for c in support_components(m):
        if c["continuous"] and not c["atom"]:
            return (c["lo"], c["hi"])
    return None


__all__ = [
    "AvitzourReport", "MeasureSketch", "MfCertificate", "RandomModel", "TraceEmbedding",
    "avitzour_verify", "common_dimension", "haar_unitary_sample", "mf_certificate",
    "partial_diffuse_check", "random_model", "support_components", "trace_embedding",
]
