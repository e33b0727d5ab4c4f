"""Densities attached to a fixed x: the fibre series S_x, the fibre integral J_x
and the resulting prediction for N_x(P2, P3)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .arith import fraction_from_json, fraction_to_json, totient
from .enumeration import CountVariant, _Counter, ball_vectors_nonzero, box_vectors
from .expsums import box_vectors_mod, sinc_kernel
from .form import Contraction, TrilinearForm, contraction_matrix, is_in_A
from .local import leray_fiber_integral
from .quadrature import Estimate, QuadSpec, box_integral


class DegenerateFiberPointError(ValueError):
    """x lies outside A_{1, lambda}, so its fibre densities are not defined here."""


def _check_x(form: TrilinearForm, x, lam: Optional[int]) -> np.ndarray:
    xv = np.asarray([int(v) for v in x], dtype=np.int64)
    if xv.shape != (form.dim,):
        raise ValueError(f"x must have {form.dim} coordinates")
    lam = form.n if lam is None else lam
    if not xv.any() or not is_in_A(form, 1, xv, lam):
        raise DegenerateFiberPointError(f"x = {tuple(xv.tolist())} is not in A_1 with lambda = {lam}")
    return xv


def fiber_zero_count(form: TrilinearForm, x, q: int) -> int:
    """#{b mod q : B(x, b) = 0 mod q}."""
    M = contraction_matrix(form, Contraction.B, x, 0) % q
    R = box_vectors_mod(q, form.dim)
    return int((~((R @ M) % q).any(axis=1)).sum())


def fiber_series_term(form: TrilinearForm, x, q: int) -> Fraction:
    """q^{-2n-2} sum_a S_{a,q}(x) = phi(q) q^{-n-1} #{b mod q : B(x, b) = 0 mod q}."""
    return Fraction(totient(q) * fiber_zero_count(form, x, q), q**form.dim)


def fiber_series_term_direct(form: TrilinearForm, x, q: int) -> complex:
    """The same term by summing e(a F(x, b, b') / q) over a and both residue vectors."""
    M = contraction_matrix(form, Contraction.B, x, 0)
    R = box_vectors_mod(q, form.dim)
    Fvals = ((R @ M) @ R.T) % q  # F(x, b, b') mod q
    counts = np.bincount(Fvals.ravel(), minlength=q)
    total = 0j
    for a in range(q):
        if math.gcd(a, q) == 1:
            total += sum(int(c) * cmath.exp(2j * math.pi * a * r / q) for r, c in enumerate(counts))
    return total / q ** (2 * form.dim)


def fiber_series(form: TrilinearForm, x, Q: int, lam: Optional[int] = None,
                 cross_check_upto: int = 6) -> tuple[Fraction, list]:
    """Exact truncation sum_{q <= Q} of the fibre series, with its terms.

    Terms with q <= ``cross_check_upto`` are recomputed from the defining
    double sum and must agree to 1e-9.
    """
    xv = _check_x(form, x, lam)
    if Q < 1:
        raise ValueError("Q must be >= 1")
    terms = []
    for q in range(1, Q + 1):
        t = fiber_series_term(form, xv, q)
        if q <= cross_check_upto:
            direct = fiber_series_term_direct(form, xv, q)
            if abs(direct - float(t)) > 1e-9:
                raise ArithmeticError(f"fibre series term at q = {q}: collapsed {t} vs direct {direct}")
        terms.append((q, t))
    return sum((t for _, t in terms), Fraction(0)), terms


@dataclass
class FiberDensity:
    x: tuple
    series_trunc: Fraction
    terms: list
    J_x: Estimate
    J_sinc: Optional[Estimate] = None
    Q: int = 1
    phi: Optional[float] = None
    seed: int = 0

    @property
    def value(self) -> float:
        return float(self.series_trunc) * self.J_x.value

    def to_json(self) -> dict:
        return {
            "x": list(self.x),
            "Q": self.Q,
            "series_trunc": fraction_to_json(self.series_trunc),
            "terms": [{"q": q, "value": fraction_to_json(t)} for q, t in self.terms],
            "J_x": self.J_x.to_json(),
            "J_sinc": self.J_sinc.to_json() if self.J_sinc else None,
            "phi": self.phi,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "FiberDensity":
        terms = [(int(t["q"]), fraction_from_json(t["value"])) for t in d["terms"]]
        sinc = Estimate.from_json(d["J_sinc"]) if d.get("J_sinc") else None
        return cls(tuple(d["x"]), fraction_from_json(d["series_trunc"]), terms, Estimate.from_json(d["J_x"]),
                   sinc, int(d["Q"]), d.get("phi"), int(d.get("seed", 0)))


def fiber_J(form: TrilinearForm, x, method: str = "leray-fiber", phi: float = 16.0,
            samples: int = 1 << 18, seed: int = 0, lam: Optional[int] = None):
    """J_x by the Leray reduction over y, the sinc kernel over (y, z), or both.

    Returns an Estimate, or a pair (leray, sinc) for method "both".
    """
    if method not in ("leray-fiber", "sinc", "both"):
        raise ValueError(f"unknown method {method!r}")
    xv = _check_x(form, x, lam)
    quad = QuadSpec(samples=samples, seed=seed)
    leray = sinc = None
    if method in ("leray-fiber", "both"):
        leray = leray_fiber_integral(form, quad, fixed_x=xv)
    if method in ("sinc", "both"):
        if phi <= 0:
            raise ValueError("phi must be positive")
        d = form.dim
        M = contraction_matrix(form, Contraction.B, xv, 0).astype(np.float64)

        def fn(p):
            F = ((p[:, :d] @ M) * p[:, d:]).sum(axis=1)
            return sinc_kernel(F, phi)

        sinc = box_integral(fn, 2 * d, QuadSpec(samples=samples, seed=seed + 1))
    if method == "both":
        return leray, sinc
    return leray if leray is not None else sinc


def fiber_density(form: TrilinearForm, x, Q: int, phi: Optional[float] = None, samples: int = 1 << 18,
                  seed: int = 0, lam: Optional[int] = None) -> FiberDensity:
    series, terms = fiber_series(form, x, Q, lam)
    if phi:
        leray, sinc = fiber_J(form, x, "both", phi, samples, seed, lam)
    else:
        leray, sinc = fiber_J(form, x, "leray-fiber", 16.0, samples, seed, lam), None
    return FiberDensity(tuple(int(v) for v in x), series, terms, leray, sinc, Q, phi, seed)


def fiber_predict(form: TrilinearForm, x, P2: int, P3: int, Q: int = 12, samples: int = 1 << 18,
                  seed: int = 0, lam: Optional[int] = None) -> float:
    """S_x(Q) J_x P2^n P3^n."""
    fd = fiber_density(form, x, Q, None, samples, seed, lam)
    return fd.value * float(P2) ** form.n * float(P3) ** form.n


def count_N_x(form: TrilinearForm, x, P2: int, P3: int) -> int:
    """Exact #{(y, z) in the boxes : B(x, y) != 0, F(x, y, z) = 0}."""
    counter = _Counter(form, CountVariant.NONDEG3())
    counter.check_range(max(abs(int(v)) for v in x), P2, P3)
    xv = np.asarray([int(v) for v in x], dtype=np.int64)
    return int(counter.zero_counts(xv, box_vectors(P2, form.dim), box_vectors(P3, form.dim)).sum())


@dataclass
class FiberSumReport:
    P1: int
    Q: int
    total: float
    per_x: list = field(default_factory=list)  # (x, S_x(Q), J_x)
    skipped: int = 0
    sigma: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "P1": self.P1,
            "Q": self.Q,
            "total": self.total,
            "normalised": self.total / max(self.P1, 1) ** len(self.per_x[0][0]) if self.per_x else 0.0,
            "sigma": self.sigma,
            "skipped": self.skipped,
            "per_x": [{"x": list(x), "series": float(s), "J_x": j} for x, s, j in self.per_x],
        }


def fiber_sum(form: TrilinearForm, P1: int, Q: int, samples: int = 1 << 14, seed: int = 0,
              lam: Optional[int] = None, sigma: Optional[float] = None) -> FiberSumReport:
    """sum over nonzero x in A_1 with |x| <= P1 of S_x(Q) J_x; reported next to sigma P1^n."""
    lam = form.n if lam is None else lam
    rep = FiberSumReport(P1, Q, 0.0, sigma=sigma)
    acc = []
    for x in ball_vectors_nonzero(P1, form.dim):
        if not is_in_A(form, 1, x, lam):
            rep.skipped += 1
            continue
        fd = fiber_density(form, x, Q, None, samples, seed, lam)
        rep.per_x.append((tuple(int(v) for v in x), fd.series_trunc, fd.J_x.value))
        acc.append(fd.value)
    rep.total = math.fsum(acc)
    return rep
