"""Hyperplane lattices Z^{d} cap {b . z = 0} and cube slices [-1,1]^d cap {b . z = 0}.

The n-volume of the slice equals ||b||_2 * 2^d * f(0), where f is the density of
sum_k b_k U_k for independent U_k uniform on [-1, 1].  That density is a
piecewise polynomial; ``UniformSumDensity`` builds it exactly by repeated
convolution in the truncated-power basis.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .arith import vector_gcd


def _nonzero_vec(bvec) -> tuple[int, ...]:
    b = tuple(int(v) for v in bvec)
    if not any(b):
        raise ValueError("the zero vector does not define a hyperplane")
    return b


@dataclass(frozen=True)
class HyperplaneLattice:
    bvec: tuple[int, ...]
    det_sq: Fraction
    gcd: int

    @property
    def det(self) -> float:
        return math.sqrt(self.det_sq)

    @classmethod
    def of(cls, bvec) -> "HyperplaneLattice":
        b = _nonzero_vec(bvec)
        g = vector_gcd(b)
        return cls(b, Fraction(sum(v * v for v in b), g * g), g)


def lattice_det(bvec) -> tuple[Fraction, float]:
    """(det^2 exactly, det) of the lattice of integer points on b . z = 0."""
    lat = HyperplaneLattice.of(bvec)
    return lat.det_sq, lat.det


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def kernel_basis(bvec) -> list[tuple[int, ...]]:
    """A basis of the saturated lattice Z^d cap {b . z = 0}.

    Integer column operations reduce b to (g, 0, ..., 0) while tracking a
    unimodular matrix U with b U = (g, 0, ..., 0); columns 2..d of U then span
    the kernel, and unimodularity makes the span saturated.
    """
    b = list(_nonzero_vec(bvec))
    d = len(b)
    U = [[int(i == j) for j in range(d)] for i in range(d)]
    # Bring a nonzero entry to position 0.
    first = next(i for i, v in enumerate(b) if v)
    if first:
        b[0], b[first] = b[first], b[0]
        for row in U:
            row[0], row[first] = row[first], row[0]
    for j in range(1, d):
        if b[j] == 0:
            continue
        g, s, t = _ext_gcd(b[0], b[j])
        p, q = b[0] // g, b[j] // g
        # New col0 = s*c0 + t*cj, new colj = -q*c0 + p*cj: determinant s*p + t*q = 1.
        for row in U:
            c0, cj = row[0], row[j]
            row[0], row[j] = s * c0 + t * cj, -q * c0 + p * cj
        b[0], b[j] = g, 0
    return [tuple(U[i][j] for i in range(d)) for j in range(1, d)]


def gram_det(vectors: Sequence[Sequence[int]]) -> int:
    """Exact Gram determinant of integer vectors."""
    from .arith import integer_det

    G = [[sum(int(a) * int(b) for a, b in zip(u, v)) for v in vectors] for u in vectors]
    return integer_det(G)


class UniformSumDensity:
    """Density of sum_k a_k U_k, U_k uniform on [-1, 1], in truncated-power form.

    f(s) = sum_t c_t (s - t)_+^deg / deg!, breakpoints t and weights c_t exact rationals.
    """

    def __init__(self, terms: dict, degree: int):
        self.terms = dict(terms)
        self.degree = degree

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[int]) -> "UniformSumDensity":
        a = [abs(int(c)) for c in coeffs if c]
        if not a:
            raise ValueError("need at least one nonzero coefficient")
        h = a[0]
        dens = cls({Fraction(-h): Fraction(1, 2 * h), Fraction(h): Fraction(-1, 2 * h)}, 0)
        for h in a[1:]:
            dens = dens.convolve_uniform(h)
        return dens

    def convolve_uniform(self, h: int) -> "UniformSumDensity":
        # (f * u_h)(s) = (F(s + h) - F(s - h)) / (2h), F the antiderivative of f;
        # in this basis the antiderivative just raises the degree by one.
        new: dict = defaultdict(Fraction)
        w = Fraction(1, 2 * h)
        for t, c in self.terms.items():
            new[t - h] += c * w
            new[t + h] -= c * w
        return UniformSumDensity({t: c for t, c in new.items() if c}, self.degree + 1)

    def __call__(self, s) -> Fraction:
        s = Fraction(s)
        fact = math.factorial(self.degree)
        total = Fraction(0)
        for t, c in self.terms.items():
            if s > t:
                total += c * (s - t) ** self.degree
            elif s == t and self.degree == 0:
                # Right-continuous convention is irrelevant away from jumps; use the midpoint.
                total += c / 2
        return total / fact


def density_at_zero(bvec) -> Fraction:
    """Exact density at 0 of sum b_k U_k (zero coefficients dropped)."""
    return UniformSumDensity.from_coefficients(bvec)(0)


@dataclass(frozen=True)
class SliceVolume:
    value: float
    method: str
    stderr: float = 0.0
    exact_density: Optional[Fraction] = None


def slice_volume(bvec, method: str = "exact", samples: Optional[int] = None, seed: int = 0) -> SliceVolume:
    """n-volume of [-1, 1]^{n+1} cap {b . z = 0}."""
    b = _nonzero_vec(bvec)
    d = len(b)
    norm = math.sqrt(sum(v * v for v in b))
    if method in ("exact", "exact-convolution"):
        f0 = density_at_zero(b)
        return SliceVolume(norm * float(f0) * 2**d, "exact-convolution", 0.0, f0)
    if method in ("mc", "monte-carlo"):
        samples = samples or 10**6
        if samples < 1000:
            raise ValueError("Monte-Carlo slice volume needs at least 1000 samples")
        # Parametrise the slice over the other coordinates: the point is inside
        # the cube iff the solved coordinate lands in [-1, 1].
        k = int(np.argmax(np.abs(b)))
        rest = np.array([v for i, v in enumerate(b) if i != k], dtype=np.float64)
        rng = np.random.default_rng(seed)
        u = rng.uniform(-1.0, 1.0, size=(samples, d - 1))
        inside = np.abs(u @ rest) <= abs(b[k])
        p = inside.mean()
        scale = 2 ** (d - 1) * norm / abs(b[k])
        return SliceVolume(scale * p, "monte-carlo", scale * math.sqrt(p * (1 - p) / samples))
    raise ValueError(f"unknown method {method!r}")


def predict_fiber_exact(bvec, P3) -> Fraction:
    """Vol(C)/det(Lambda) * P3^n as an exact rational: gcd * 2^d * f(0) * P3^n."""
    b = _nonzero_vec(bvec)
    d = len(b)
    return vector_gcd(b) * 2**d * density_at_zero(b) * Fraction(P3) ** (d - 1)


def predict_fiber(bvec, P3) -> float:
    """Main term of the count of lattice points of the hyperplane in [-P3, P3]^{n+1}."""
    return float(predict_fiber_exact(bvec, P3))


def slice_density_at_zero_batch(b: np.ndarray, rel_drop: float = 1e-6) -> np.ndarray:
    """Float density at 0 of sum_k b_k U_k for each row of b (real coefficients).

    Uses the alternating box-spline sum
        f(0) = sum_eps prod(eps) (sum eps_k a_k)_+^{m-1} / ((m-1)! prod(2 a_k)),
    with coefficients below ``rel_drop * max|b|`` treated as zero, which changes
    f(0) by a relative amount of order rel_drop but keeps the sum well conditioned.
    """
    a = np.abs(np.asarray(b, dtype=np.float64))
    rows, d = a.shape
    amax = a.max(axis=1)
    out = np.zeros(rows)
    live = amax > 0
    a = np.where(a >= rel_drop * amax[:, None], a, 0.0)
    m = (a > 0).sum(axis=1)
    for mm in range(1, d + 1):
        sel = live & (m == mm)
        if not sel.any():
            continue
        # Sort nonzero entries to the front; only they take part.
        aa = -np.sort(-a[sel], axis=1)[:, :mm]
        if mm == 1:
            out[sel] = 1.0 / (2 * aa[:, 0])
            continue
        if mm == 2:
            out[sel] = 1.0 / (2 * aa[:, 0])
            continue
        scale = aa[:, :1]
        aa = aa / scale  # homogeneity: f_{c a}(0) = f_a(0) / c
        total = np.zeros(len(aa))
        for signs in np.ndindex(*([2] * mm)):
            eps = 1 - 2 * np.array(signs, dtype=np.float64)
            s = aa @ eps
            total += np.prod(eps) * np.where(s > 0, s, 0.0) ** (mm - 1)
        out[sel] = total / (math.factorial(mm - 1) * np.prod(2 * aa, axis=1)) / scale[:, 0]
    return out
