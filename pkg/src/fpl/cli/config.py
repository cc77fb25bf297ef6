"""Experiment configuration (JSON schema ``fpl/1``).

Example::

    {
      "schema": "fpl/1",
      "kind": "freeprod-norm",
      "factors": [{"type": "haar", "name": "u1"}, {"type": "haar", "name": "u2"}],
      "polys": ["u1 + u1* + u2 + u2*"],
      "sweep": {"L": [4, 6, 8, 10, 12]},
      "grading": "weighted",
      "seed": 0
    }

A finite-dimensional factor is
``{"type": "fd", "blocks": [1, 1], "weights": ["1/2", "1/2"], "generators": {"x": {"diag": [1, -1]}}}``;
weights may be numbers or fraction strings, and a generator is given by
``{"diag": [...]}``, ``{"blocks": [[[re, im], ...], ...]}`` (complex entries as
pairs) or ``{"unit": [block, row, col]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..algebra import AlgElement, FdAlgebra, TracialState, approx_rational_trace
from ..freeprod.factors import FiniteDim, HaarUnitary
from ..freeprod.poly import GROUP, Letter
from ..freeprod.words import GRADINGS
from .parse import ParseError, parse_ncpoly

SCHEMA = "fpl/1"
KINDS = ("gns", "freeprod-norm", "moments", "freeness", "crossed", "znfn", "certify", "diffuse")

DEFAULT_TOLERANCES = {"solver_tol": 1e-9, "moment_tol": 1e-10, "eps": 0.2}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _weights(spec, nblocks: int, Q: int | None) -> TracialState:
    raw = spec.get("weights")
    if raw is None:
        return TracialState.uniform(nblocks)
    if len(raw) != nblocks:
        raise ConfigError("one weight per block is required")
    if all(isinstance(w, str) or isinstance(w, int) for w in raw):
        return TracialState.from_fractions([Fraction(w) for w in raw])
    tr = TracialState(tuple(float(w) for w in raw))
    fr = [Fraction(w).limit_denominator(10**6) for w in tr.weights]
    if all(float(f) == w for f, w in zip(fr, tr.weights)) and sum(fr) == 1:
        return TracialState.from_fractions(fr)
    return approx_rational_trace(tr, Q) if Q else tr


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _element(alg: FdAlgebra, spec) -> AlgElement:
    if "diag" in spec:
        return alg.diag([_complex(v) for v in spec["diag"]])
    if "unit" in spec:
        return alg.matrix_unit(*spec["unit"])
    if "blocks" in spec:
        blocks = [np.array([[_complex(v) for v in row] for row in b], dtype=complex) for b in spec["blocks"]]
        return alg.element(blocks)
    raise ConfigError(f"cannot read generator {spec!r}")


@dataclass
class ExperimentConfig:
    """A validated experiment; :meth:`to_dict` returns the normalized JSON form."""

    kind: str
    factors: list = field(default_factory=list)
    polys: list = field(default_factory=list)
    sweep: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    grading: str = "syllable"
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        if d.get("schema") != SCHEMA:
            raise ConfigError(f"schema must be {SCHEMA!r}")
        known = {"schema", "kind", "factors", "polys", "sweep", "params", "grading", "seed",
                 "tolerances", "output"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(d.get("tolerances", {}))
        cfg = cls(
            kind=d.get("kind"), factors=list(d.get("factors", [])), polys=list(d.get("polys", [])),
            sweep=dict(d.get("sweep", {})), params=dict(d.get("params", {})),
            grading=d.get("grading", "syllable"), seed=int(d.get("seed", 0)),
            tolerances=tol, output=dict(d.get("output", {})),
        )
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA, "kind": self.kind, "factors": self.factors, "polys": self.polys,
            "sweep": self.sweep, "params": self.params, "grading": self.grading, "seed": self.seed,
            "tolerances": self.tolerances, "output": self.output,
        }

    # -- validation -------------------------------------------------------
    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.grading not in GRADINGS:
            raise ConfigError(f"grading must be one of {GRADINGS}")
        for key, vals in self.sweep.items():
            if isinstance(vals, list):
                if not vals:
                    raise ConfigError(f"sweep list {key!r} is empty")
                if any(b <= a for a, b in zip(vals, vals[1:])):
                    raise ConfigError(f"sweep list {key!r} must be increasing")
        needs_factors = self.kind not in ("diffuse", "znfn")
        if needs_factors and not self.factors:
            raise ConfigError("at least one factor is required")
        if self.kind == "freeprod-norm" and not self.sweep.get("L"):
            raise ConfigError("freeprod-norm needs sweep.L")
        if self.kind in ("freeprod-norm", "moments", "certify") and not self.polys:
            raise ConfigError(f"{self.kind} needs at least one polynomial")
        if self.kind == "diffuse" and "measure" not in self.params:
            raise ConfigError("diffuse needs params.measure")
        if self.kind == "znfn":
            for k in ("n", "K", "L"):
                if k not in self.params:
                    raise ConfigError(f"znfn needs params.{k}")
        if self.kind == "gns" and any(f.get("type") != "fd" for f in self.factors):
            raise ConfigError("gns experiments take finite-dimensional factors only")
        if needs_factors:
            factors, gens = self.build_factors()
            try:
                for p in self.polys:
                    parse_ncpoly(p, gens)
                for fam in self.params.get("families", []):
                    for p in fam:
                        parse_ncpoly(p, gens)
            except ParseError as exc:
                raise ConfigError(str(exc)) from exc

    def build_factors(self) -> tuple[list, dict]:
        """Factor objects and the generator name table."""
        factors, gens = [], {}
        Q = self.sweep.get("Q") or self.params.get("Q")
        for i, spec in enumerate(self.factors):
            t = spec.get("type")
            if t == "haar":
                factors.append(HaarUnitary(spec.get("cutoff")))
                self._declare(gens, spec.get("name", f"u{i + 1}"), Letter(i, 1))
            elif t == "fd":
                alg = FdAlgebra(tuple(spec["blocks"]))
                try:
                    tr = _weights(spec, alg.num_blocks, Q)
                except ValueError as exc:
                    raise ConfigError(f"factor {i}: {exc}") from exc
                factors.append(FiniteDim(alg, tr))
                for name, g in spec.get("generators", {}).items():
                    self._declare(gens, name, Letter(i, _element(alg, g)))
            else:
                raise ConfigError(f"factor {i}: type must be 'haar' or 'fd'")
        if self.kind == "crossed":
            self._declare(gens, self.params.get("group_name", "v"), Letter(GROUP, 1))
        return factors, gens

    @staticmethod
    def _declare(gens: dict, name: str, l: Letter):
        if name in gens:
            raise ConfigError(f"duplicate generator name {name!r}")
        gens[name] = l
