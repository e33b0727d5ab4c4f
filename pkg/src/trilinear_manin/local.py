"""p-adic densities, the archimedean density and Tamagawa factors."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .arith import BudgetError, is_prime
from .expsums import RESIDUE_BUDGET, J_of_phi, M_of_q, box_vectors_mod
from .form import Contraction, TrilinearForm, oriented_tensor
from .lattice import slice_density_at_zero_batch
from .quadrature import Estimate, QuadSpec, box_integral


def _check_prime(p: int):
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


@dataclass
class LocalDensity:
    p: int
    seq: list = field(default_factory=list)  # (r, M(p^r) / p^{r(3n+2)})

    @property
    def value(self) -> Fraction:
        return self.seq[-1][1]

    @property
    def stabilized(self) -> bool:
        return len(self.seq) >= 2 and self.seq[-1][1] == self.seq[-2][1]

    def to_json(self) -> dict:
        from .arith import fraction_to_json

        return {
            "p": self.p,
            "seq": [{"r": r, "value": fraction_to_json(v)} for r, v in self.seq],
            "value": fraction_to_json(self.value),
            "stabilized": self.stabilized,
        }

    @classmethod
    def from_json(cls, d: dict) -> "LocalDensity":
        from .arith import fraction_from_json

        return cls(int(d["p"]), [(int(e["r"]), fraction_from_json(e["value"])) for e in d["seq"]])


def max_feasible_r(form: TrilinearForm, p: int, budget: int = RESIDUE_BUDGET) -> int:
    """Largest r with p^{r(2n+2)} residue pairs within budget (at least 0)."""
    r = 0
    while p ** ((r + 1) * 2 * form.dim) <= budget:
        r += 1
    return r


def sigma_p(form: TrilinearForm, p: int, r_max: int) -> LocalDensity:
    """The sequence M(p^r) / p^{r(3n+2)}, r = 0..r_max, whose limit is sigma_p."""
    _check_prime(p)
    exp = 3 * form.n + 2
    out = LocalDensity(p, [(0, Fraction(1))])
    for r in range(1, r_max + 1):
        try:
            m = M_of_q(form, p**r)
        except BudgetError as exc:
            raise BudgetError(str(exc), partial=out) from exc
        out.seq.append((r, Fraction(m, p ** (r * exp))))
    return out


def N_star(form: TrilinearForm, p: int, r: int) -> int:
    """#{(x, y, z) mod p^r : none of x, y, z is 0 mod p, F = 0 mod p^r}.

    For fixed (x, y) the z mod p^r with B . z = 0 number p^{rn} gcd(p^r, B);
    those with z = 0 mod p are p z' with B . z' = 0 mod p^{r-1}.
    """
    _check_prime(p)
    if r < 1:
        raise ValueError("r must be >= 1")
    q = p**r
    n, d = form.n, form.dim
    if q ** (2 * d) > RESIDUE_BUDGET:
        raise BudgetError(f"pairs mod {q}: {q ** (2 * d)} residue tuples exceeds budget {RESIDUE_BUDGET}")
    R = box_vectors_mod(q, d)
    R = R[(R % p).any(axis=1)]
    t = np.mod(oriented_tensor(form, Contraction.B, 0), q)
    total = 0
    step = max(1, (1 << 21) // len(R))
    for s in range(0, len(R), step):
        v = (np.einsum("pa,qb,abc->pqc", R[s : s + step], R, t) % q).reshape(-1, d)
        g_r = np.gcd.reduce(np.concatenate([v, np.full((len(v), 1), q, dtype=np.int64)], axis=1), axis=1)
        g_r1 = np.gcd(g_r, p ** (r - 1))
        total += int((p ** (r * n) * g_r - p ** ((r - 1) * n) * g_r1).sum())
    return total


@dataclass
class PrimitiveDensityReport:
    p: int
    rows: list  # (r, N*(r)/p^{r(3n+2)}, (1-p^-n)^3 sigma_p(r), gap)
    target_factor: Fraction

    @property
    def gap_shrinks(self) -> bool:
        gaps = [g for *_, g in self.rows]
        return all(b <= a for a, b in zip(gaps, gaps[1:]))

    def to_json(self) -> dict:
        from .arith import fraction_to_json

        return {
            "p": self.p,
            "target_factor": fraction_to_json(self.target_factor),
            "rows": [
                {"r": r, "primitive": fraction_to_json(a), "target": fraction_to_json(b), "gap": fraction_to_json(g)}
                for r, a, b, g in self.rows
            ],
            "gap_shrinks": self.gap_shrinks,
        }


def check_primitive_density(form: TrilinearForm, p: int, r_max: int) -> PrimitiveDensityReport:
    """Compare N*(r)/p^{r(3n+2)} with (1 - p^{-n})^3 M(p^r)/p^{r(3n+2)} for r = 1..r_max."""
    factor = (1 - Fraction(1, p**form.n)) ** 3
    dens = sigma_p(form, p, r_max)
    exp = 3 * form.n + 2
    rows = []
    for r, s in dens.seq[1:]:
        a = Fraction(N_star(form, p, r), p ** (r * exp))
        b = factor * s
        rows.append((r, a, b, abs(a - b)))
    return PrimitiveDensityReport(p, rows, factor)


def a_of_p(p: int, n: int) -> Fraction:
    """(1 - 1/p)^3 (1 - 1/p^n)^{-3}."""
    return (1 - Fraction(1, p)) ** 3 / (1 - Fraction(1, p**n)) ** 3


def tamagawa_p(form: TrilinearForm, p: int, r_max: int) -> Fraction:
    """(1 - p^{-n})^3 times the last computed term of the sigma_p sequence."""
    return (1 - Fraction(1, p**form.n)) ** 3 * sigma_p(form, p, r_max).value


# -- archimedean density -----------------------------------------------------------


@dataclass
class ArchDensity:
    leray: Optional[Estimate] = None
    sinc: Optional[Estimate] = None
    phi: Optional[float] = None
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "leray": self.leray.to_json() if self.leray else None,
            "sinc": self.sinc.to_json() if self.sinc else None,
            "phi": self.phi,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ArchDensity":
        est = lambda v: Estimate.from_json(v) if v else None
        return cls(est(d.get("leray")), est(d.get("sinc")), d.get("phi"), int(d.get("seed", 0)))


def leray_fiber_integral(form: TrilinearForm, quad: QuadSpec, fixed_x=None) -> Estimate:
    """Integral of Vol_n(C_{x,y}) / ||B(x, y)||_2 over the (x, y) box.

    Vol/||B|| is 2^{n+1} times the density at 0 of sum_k B_k U_k, evaluated in
    closed form per sample.  With ``fixed_x`` only y is integrated.
    """
    d = form.dim
    c = form.coeffs.astype(np.float64)
    if fixed_x is None:
        def fn(p):
            b = np.einsum("pi,pj,ijk->pk", p[:, :d], p[:, d:], c)
            return 2.0**d * slice_density_at_zero_batch(b)
        return box_integral(fn, 2 * d, quad)
    M = np.tensordot(np.asarray(fixed_x, dtype=np.float64), c, axes=(0, 0))  # y @ M = B(x, y)

    def fn_y(p):
        return 2.0**d * slice_density_at_zero_batch(p @ M)

    return box_integral(fn_y, d, quad)


def sigma_infinity(form: TrilinearForm, method: str = "both", phi: float = 16.0,
                   samples: int = 1 << 20, seed: int = 0) -> ArchDensity:
    """sigma_infinity by the Leray fibre integral, the sinc kernel J(phi), or both."""
    if method not in ("leray-fiber", "sinc", "both"):
        raise ValueError(f"unknown method {method!r}")
    out = ArchDensity(phi=phi if method != "leray-fiber" else None, seed=seed)
    if method in ("leray-fiber", "both"):
        out.leray = leray_fiber_integral(form, QuadSpec(samples=samples, seed=seed))
    if method in ("sinc", "both"):
        out.sinc = J_of_phi(form, phi, QuadSpec(samples=samples, seed=seed + 1))
    return out


def tamagawa_inf(form: TrilinearForm, sigma_inf: float) -> float:
    """n^3/8 times sigma_infinity."""
    return form.n**3 / 8 * sigma_inf


@dataclass
class EulerProduct:
    densities: list  # LocalDensity per prime, increasing p
    value: Fraction
    tail_constant: float  # C in the heuristic |sigma_p - 1| <= C / p^2
    tail_estimate: float  # relative size of the omitted primes under that fit

    @property
    def pmax(self) -> int:
        return self.densities[-1].p if self.densities else 1


def euler_product(form: TrilinearForm, pmax: int, residue_budget: int = 10**6, r_cap: int = 6) -> EulerProduct:
    """Product of sigma_p over p <= pmax, each sequence pushed as far as the budget allows.

    The tail over p > pmax is not certified; it is sized by fitting C with
    |sigma_p - 1| <= C / p^2 on the computed primes and summing C / p^2 beyond pmax.
    """
    from .arith import primes_upto

    dens = []
    value = Fraction(1)
    for p in primes_upto(pmax):
        r = max(1, min(r_cap, max_feasible_r(form, p, residue_budget)))
        dp = sigma_p(form, p, r)
        dens.append(dp)
        value *= dp.value
    C = max((abs(float(d.value) - 1) * d.p**2 for d in dens), default=0.0)
    tail = C * sum(1.0 / (m * m) for m in range(pmax + 1, 100 * (pmax + 1)))
    return EulerProduct(dens, value, C, tail)
