"""Dispatch of validated experiment configurations to the library."""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .. import __version__
from ..certify import MeasureSketch, mf_certificate, partial_diffuse_check
from ..freeprod.checks import freeness_check
from ..freeprod.lazy import evaluate_moment
from ..freeprod.poly import NcPoly
from ..freeprod.rep import DEFAULT_MEM_BUDGET, DENSE_LIMIT, build_free_rep, compressed_norm
from ..gns import build_gns, law_defects
from ..groups import CrossedRep, CyclicAction, matrix_pair_freeness, roots_of_unity, znfn_model
from .config import ExperimentConfig
from .parse import parse_ncpoly


def _cx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def threads() -> int:
    try:
        return max(1, int(os.environ.get("FPL_THREADS", "1")))
    except ValueError:
        return 1


class Run:
    """State of one experiment: results, timings and the output location."""

    def __init__(self, cfg: ExperimentConfig, seed: int, mem_budget: int):
        self.cfg = cfg
        self.seed = seed
        self.mem_budget = mem_budget
        self.factors, self.gens = cfg.build_factors() if cfg.factors else ([], {})
        self.results: dict = {}
        self.timings: dict = {}
        self.series: dict = {}

    def poly(self, text: str) -> NcPoly:
        return parse_ncpoly(text, self.gens)

    def parameters(self) -> dict:
        return {
            "seed": self.seed,
            "mem_budget": self.mem_budget,
            "grading": self.cfg.grading,
            "tolerances": self.cfg.tolerances,
            "solver": {"method": "eigsh", "tol": self.cfg.tolerances["solver_tol"],
                       "dense_limit": DENSE_LIMIT, "max_iter": "10*dim", "restarts": 1},
            "haar_cutoff_default": "L",
        }

    # -- experiment kinds -------------------------------------------------
    def gns(self):
        rng = np.random.default_rng(self.seed)
        out = []
        for f in self.factors:
            rep = build_gns(f.algebra, f.trace)
            out.append({"blocks": list(f.algebra.block_sizes), "dim": rep.dim,
                        "defects": law_defects(rep, rng, int(self.cfg.params.get("samples", 20)))})
        self.results["factors"] = out

    def _norm_point(self, P, L):
        t0 = time.perf_counter()
        rep = build_free_rep(self.factors, L, self.cfg.grading, self.mem_budget)
        val = compressed_norm(rep, P, seed=self.seed, tol=self.cfg.tolerances["solver_tol"])
        return {"L": L, "value": val, "basis_size": rep.dim,
                "haar_cutoffs": rep.cutoffs()}, time.perf_counter() - t0

    def freeprod_norm(self):
        Ls = self.cfg.sweep["L"]
        items = []
        for j, text in enumerate(self.cfg.polys):
            P = self.poly(text)
            with ThreadPoolExecutor(max_workers=threads()) as ex:
                points = list(ex.map(lambda L: self._norm_point(P, L), Ls))
            rows = [p for p, _ in points]
            secs = [s for _, s in points]
            vals = [r["value"] for r in rows]
            items.append({"poly": text, "series": rows,
                          "nondecreasing": all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))})
            self.timings[f"poly_{j}"] = secs
            self.series[j] = [(r["L"], r["value"], r["basis_size"], s) for r, s in zip(rows, secs)]
        self.results["norms"] = items

    def moments(self):
        self.results["moments"] = [
            {"poly": t, "value": _cx(evaluate_moment(self.factors, self.poly(t)))} for t in self.cfg.polys
        ]

    def freeness(self):
        fams = [[self.poly(t) for t in fam] for fam in self.cfg.params["families"]]
        D = int(self.cfg.params.get("D", 4))
        self.results["freeness"] = {"D": D, "max_moment": freeness_check(self.factors, fams, D)}

    def crossed(self):
        p = self.cfg.params
        n = int(p["n"])
        a = p.get("action", {})
        action = CyclicAction(
            n, tuple(a.get("factor_permutation", range(len(self.factors)))),
            {int(k): tuple(v) for k, v in a.get("block_permutations", {}).items()},
            {int(k): complex(*v) if isinstance(v, list) else complex(v)
             for k, v in a.get("haar_phases", {}).items()},
        )
        base = build_free_rep(self.factors, int(p.get("L", 2)), self.cfg.grading, self.mem_budget)
        rep = CrossedRep(base, action)
        self.results["crossed"] = {
            "dim": rep.dim,
            "covariance_defect": rep.covariance_defect(),
            "moments": [{"poly": t, "value": _cx(rep.moment(self.poly(t)))} for t in self.cfg.polys],
        }

    def znfn(self):
        p = self.cfg.params
        n, K, L = int(p["n"]), int(p["K"]), int(p["L"])
        D = int(p.get("D", min(K, L)))
        model = znfn_model(n, K, L, self.cfg.grading, self.mem_budget)
        rep = model.rep
        gamma = roots_of_unity(n)[1]

        def resid(P, Q=None):
            T = rep.poly_operator(P)
            T = T - (rep.poly_operator(Q) if Q is not None else _identity(rep.dim))
            return float(abs(T).max()) if T.nnz else 0.0

        u = NcPoly.of(model.u)
        v = NcPoly.of(model.v)
        els = [u ** i * v ** j for i in range(n) for j in range(n)]
        G = np.array([[rep.moment(b.adjoint() * a) for a in els] for b in els])
        self.results["znfn"] = {
            "dim": rep.dim,
            "u_order_residual": resid(u ** n),
            "v_order_residual": resid(v ** n),
            "commutation_residual": resid(v * u, (u * v) * gamma),
            "gram_rank": int(np.linalg.matrix_rank(G, tol=1e-9)),
            "claim_D": D,
            "claim_max_moment": matrix_pair_freeness(model, D),
        }

    def certify(self):
        p = self.cfg.params
        polys = [self.poly(t) for t in self.cfg.polys]
        target_L = int(p.get("target_L", 12))
        rep = build_free_rep(self.factors, target_L, self.cfg.grading, self.mem_budget)
        targets = [compressed_norm(rep, P, seed=self.seed, tol=self.cfg.tolerances["solver_tol"]) for P in polys]
        cert = mf_certificate(self.factors, polys, targets, int(p.get("k", 1)), int(p.get("trials", 5)),
                              float(self.cfg.tolerances["eps"]), self.seed, target_L)
        self.results["certificate"] = {
            "dim": cert.dim, "targets": targets, "target_level": target_L,
            "model_norms": cert.model_norms, "eps": cert.eps, "eps_achieved": cert.eps_achieved,
            "certified": cert.certified, "seeds": cert.seeds, "best_trial": cert.best_trial,
            "trial_deviations": cert.trial_deviations,
            "trial_errors": {str(k): v for k, v in cert.trial_errors.items()},
        }

    def diffuse(self):
        m = self.cfg.params["measure"]
        sketch = MeasureSketch(
            tuple((a[0], a[1]) for a in m.get("atoms", [])),
            tuple(((c[0][0], c[0][1]), c[1]) for c in m.get("pieces", [])),
        )
        w = partial_diffuse_check(sketch)
        self.results["witness"] = list(w) if w is not None else None


def _identity(n):
    return sp.identity(n, dtype=complex, format="csr")


def execute(run: Run):
    getattr(run, run.cfg.kind.replace("-", "_"))()


def report(run: Run, status: str, error: str | None = None) -> dict:
    out = {
        "schema": "fpl/1",
        "version": __version__,
        "status": status,
        "config": run.cfg.to_dict(),
        "parameters": run.parameters(),
        "results": run.results,
    }
    if error is not None:
        out["error"] = error
    return out


def write_outputs(run: Run, rep: dict, out_dir: Path):
    """``report.json`` (reproducible payload), ``timings.json`` and per-polynomial CSV series."""
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w") as fh:
        json.dump(rep, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out_dir / "timings.json", "w") as fh:
        json.dump(run.timings, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for j, rows in run.series.items():
        with open(out_dir / f"series_{j}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["L", "value", "basis_size", "seconds"])
            for r in rows:
                w.writerow([r[0], repr(r[1]), r[2], f"{r[3]:.6f}"])


def run(cfg: ExperimentConfig, seed: int | None = None, mem_budget: int = DEFAULT_MEM_BUDGET,
        state: Run | None = None) -> tuple[Run, dict]:
    """Run ``cfg`` and return the run state and its report (exceptions propagate).

    Pass ``state`` to keep partial results when an exception escapes.
    """
    r = state or Run(cfg, cfg.seed if seed is None else seed, mem_budget)
    t0 = time.perf_counter()
    execute(r)
    r.timings["total"] = time.perf_counter() - t0
    return r, report(r, "ok")
