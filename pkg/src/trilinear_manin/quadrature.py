"""Randomised quasi-Monte Carlo over cubes [-1, 1]^dim.

Independent scramblings of a Sobol sequence give unbiased replicate means; the
spread across replicates is the reported standard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadSpec:
    samples: int = 1 << 20
    seed: int = 0
    replicates: int = 16
    method: str = "sobol"  # or "mc"

    def per_replicate(self) -> int:
        m = max(1, self.samples // self.replicates)
        if self.method == "sobol":
            m = 1 << max(0, round(math.log2(m)))
        return m


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples: int

    def to_json(self) -> dict:
        return {"estimate": self.value, "stderr": self.stderr, "samples": self.samples}

    @classmethod
    def from_json(cls, d: dict) -> "Estimate":
        return cls(float(d["estimate"]), float(d["stderr"]), int(d["samples"]))


_CHUNK = 1 << 15


def box_integral(fn: Callable[[np.ndarray], np.ndarray], dim: int, spec: QuadSpec) -> Estimate:
    """Integral of fn over [-1, 1]^dim; fn maps an (m, dim) array to m values."""
    if spec.replicates < 2:
        raise ValueError("need at least two replicates for an error estimate")
    per = spec.per_replicate()
    seeds = np.random.SeedSequence(spec.seed).spawn(spec.replicates)
    means = np.empty(spec.replicates)
    for r, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        engine = qmc.Sobol(dim, scramble=True, seed=rng) if spec.method == "sobol" else None
        acc = []
        left = per
        while left > 0:
            m = min(_CHUNK, left)
            u = engine.random(m) if engine is not None else rng.random((m, dim))
            vals = fn(2.0 * u - 1.0)
            if not np.all(np.isfinite(vals)):
                raise QuadratureError("non-finite integrand value")
            acc.append(math.fsum(vals))
            left -= m
        means[r] = math.fsum(acc) / per
    vol = 2.0**dim
    value = vol * means.mean()
    stderr = vol * means.std(ddof=1) / math.sqrt(spec.replicates)
    return Estimate(float(value), float(stderr), per * spec.replicates)
