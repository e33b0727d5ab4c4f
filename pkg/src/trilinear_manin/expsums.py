"""Exponential sums, complete sums modulo q, the singular series and the singular integral.

Complete sums collapse: summing e(a F / q) over the free block gives q^{n+1}
when every contraction coefficient is 0 mod q and 0 otherwise, so everything
modulo q reduces to counting pairs (b, b') with B(b, b') = 0 mod q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .arith import BudgetError, totient
from .enumeration import box_vectors
from .form import Contraction, TrilinearForm, oriented_tensor
from .quadrature import Estimate, QuadSpec, box_integral

RESIDUE_BUDGET = 5 * 10**7


def e(t):
    return np.exp(2j * np.pi * t)


# -- the exponential sum S(alpha) ----------------------------------------------------


def _dirichlet_kernel(t: np.ndarray, P: int) -> np.ndarray:
    """sum_{|z| <= P} e(t z), real since the range is symmetric."""
    t = np.asarray(t, dtype=np.float64)
    frac = t - np.round(t)
    out = np.full(t.shape, 2.0 * P + 1.0)
    nz = np.abs(frac) > 1e-15
    out[nz] = np.sin(np.pi * frac[nz] * (2 * P + 1)) / np.sin(np.pi * frac[nz])
    return out


def nondegenerate_pairs(form: TrilinearForm, P1: int, P2: int, kind=Contraction.B) -> np.ndarray:
    """Contraction values C(u, v) for all u, v in the boxes with C(u, v) != 0."""
    kind = Contraction.parse(kind)
    d = form.dim
    U = box_vectors(P1, d)
    V = box_vectors(P2, d)
    t = oriented_tensor(form, kind, 0)
    vals = np.einsum("pa,qb,abc->pqc", U, V, t).reshape(-1, d)
    return vals[vals.any(axis=1)]


def S_alpha(form: TrilinearForm, alpha: float, P1: int, P2: int, P3: int) -> complex:
    """S(alpha) over the boxes, pairs with B(x, y) = 0 excluded.

    The z-sum is the product over k of the geometric sums of e(alpha B_k z_k).
    """
    vals = nondegenerate_pairs(form, P1, P2)
    if len(vals) == 0:
        return 0j
    ker = _dirichlet_kernel(alpha * vals.astype(np.float64), int(P3))
    terms = ker.prod(axis=1)
    return complex(math.fsum(terms), 0.0)


# -- arcs and the counting functions M_i ----------------------------------------------------


@dataclass(frozen=True)
class ArcSpec:
    a: int
    q: int
    theta: float
    P: float

    def __post_init__(self):
        if self.q < 1 or not 0 <= self.a < self.q or math.gcd(self.a, self.q) != 1:
            raise ValueError("need q >= 1, 0 <= a < q and gcd(a, q) = 1")
        if not 0 < self.theta < 1 or self.P <= 1:
            raise ValueError("need 0 < theta < 1 and P > 1")


def in_major_arc(alpha: float, spec: ArcSpec) -> bool:
    """|q alpha - a| <= q P^{-1 + 2 theta} (the arc family is taken with constant 1)."""
    return abs(spec.q * alpha - spec.a) <= spec.q * spec.P ** (-1 + 2 * spec.theta)


def _dist_to_int(t: np.ndarray) -> np.ndarray:
    return np.abs(t - np.round(t))


def count_M(form: TrilinearForm, alpha: float, H1: int, H2: int, Hinv: float, kind=Contraction.B) -> int:
    """Pairs (u, v) in the boxes with ||alpha C_k(u, v)|| <= Hinv for every k.

    With kind B this is M_3; B' and B'' give M_2 and M_1.
    """
    kind = Contraction.parse(kind)
    d = form.dim
    U = box_vectors(H1, d)
    V = box_vectors(H2, d)
    vals = np.einsum("pa,qb,abc->pqc", U, V, oriented_tensor(form, kind, 0)).reshape(-1, d)
    ok = (_dist_to_int(alpha * vals.astype(np.float64)) <= Hinv + 1e-12).all(axis=1)
    return int(ok.sum())


def count_M3(form: TrilinearForm, alpha: float, H1: int, H2: int, Hinv: float) -> int:
    return count_M(form, alpha, H1, H2, Hinv, Contraction.B)


# -- complete sums modulo q ----------------------------------------------------


def _check_budget(size: int, what: str):
    if size > RESIDUE_BUDGET:
        raise BudgetError(f"{what}: {size} residue tuples exceeds budget {RESIDUE_BUDGET}")


def _pair_values_mod(form: TrilinearForm, q: int, kind=Contraction.B):
    """Iterator over blocks of contraction values mod q for all residue pairs."""
    d = form.dim
    _check_budget(q ** (2 * d), f"pairs mod {q}")
    R = box_vectors_mod(q, d)
    t = np.mod(oriented_tensor(form, kind, 0), q)
    step = max(1, (1 << 21) // len(R))
    for s in range(0, len(R), step):
        blk = np.einsum("pa,qb,abc->pqc", R[s : s + step], R, t) % q
        yield blk.reshape(-1, d)


@lru_cache(maxsize=64)
def box_vectors_mod(q: int, d: int) -> np.ndarray:
    r = np.arange(q, dtype=np.int64)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    out = np.stack([g.ravel() for g in grids], axis=1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def _zero_pairs_mod_cached(form: TrilinearForm, q: int, kind: Contraction) -> int:
    return sum(int((~blk.any(axis=1)).sum()) for blk in _pair_values_mod(form, q, kind))


def zero_pairs_mod(form: TrilinearForm, q: int, kind=Contraction.B) -> int:
    """#{(b, b') mod q : C_k(b, b') = 0 mod q for all k}."""
    if q < 1:
        raise ValueError("q must be positive")
    return _zero_pairs_mod_cached(form, int(q), Contraction.parse(kind))


def S_aq(form: TrilinearForm, a: int, q: int) -> int:
    """Complete sum sum_{b, b', b'' mod q} e(a F / q).

    The value is a rational integer, independent of a once gcd(a, q) = 1.
    """
    if math.gcd(a, q) != 1:
        raise ValueError("gcd(a, q) must be 1")
    return q**form.dim * zero_pairs_mod(form, q)


def A_of_q(form: TrilinearForm, q: int) -> Fraction:
    """A(q) = q^{-3n-3} sum_{a mod q, (a,q)=1} S_{a,q} = phi(q) q^{-2n-2} #{B = 0 mod q}."""
    return Fraction(totient(q) * zero_pairs_mod(form, q), q ** (2 * form.dim))


@lru_cache(maxsize=256)
def M_of_q(form: TrilinearForm, q: int) -> int:
    """#{(x, y, z) mod q : F = 0 mod q} = q^n sum_{(x, y)} gcd(q, B_0, ..., B_n)."""
    total = 0
    for blk in _pair_values_mod(form, q):
        g = np.gcd.reduce(np.concatenate([blk, np.full((len(blk), 1), q, dtype=np.int64)], axis=1), axis=1)
        total += int(g.sum())
    return q**form.n * total


# -- the singular series --------------------------------------------------------------


@dataclass
class SeriesTruncation:
    Q: int
    terms: list = field(default_factory=list)  # (q, A(q))
    partial: Fraction = Fraction(0)

    @property
    def tail_diagnostic(self) -> float:
        """|A(Q)| * Q: a heuristic size for the omitted tail, not a bound."""
        return abs(float(self.terms[-1][1])) * self.Q if self.terms else 0.0


def singular_series_trunc(form: TrilinearForm, Q: int) -> SeriesTruncation:
    """Exact partial sum of sum_q A(q) for q <= Q."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    terms = [(q, A_of_q(form, q)) for q in range(1, Q + 1)]
    return SeriesTruncation(Q, terms, sum((a for _, a in terms), Fraction(0)))


# -- the singular integral ----------------------------------------------------------


def F_values(form: TrilinearForm, pts: np.ndarray) -> np.ndarray:
    """F at the rows of pts = (x | y | z) for real points."""
    d = form.dim
    c = form.coeffs.astype(np.float64)
    x, y, z = pts[:, :d], pts[:, d : 2 * d], pts[:, 2 * d :]
    bxy = np.einsum("pi,pj,ijk->pk", x, y, c)
    return (bxy * z).sum(axis=1)


def sinc_kernel(F: np.ndarray, phi: float) -> np.ndarray:
    """sin(2 pi phi F) / (pi F), equal to 2 phi at F = 0."""
    out = np.full(F.shape, 2.0 * phi)
    nz = F != 0
    out[nz] = np.sin(2 * np.pi * phi * F[nz]) / (np.pi * F[nz])
    return out


def I_beta(form: TrilinearForm, beta: float, quad: Optional[QuadSpec] = None, return_imag: bool = False):
    """Real part of the integral of e(beta F) over [-1, 1]^{3n+3}.

    The imaginary part vanishes by the symmetry z -> -z; with ``return_imag``
    its quadrature estimate is returned too.
    """
    quad = quad or QuadSpec()
    dim = 3 * form.dim
    re = box_integral(lambda p: np.cos(2 * np.pi * beta * F_values(form, p)), dim, quad)
    if not return_imag:
        return re
    im = box_integral(lambda p: np.sin(2 * np.pi * beta * F_values(form, p)), dim, quad)
    return re, im


def J_of_phi(form: TrilinearForm, phi: float, quad: Optional[QuadSpec] = None) -> Estimate:
    """Integral of I(beta) over |beta| <= phi, via the sinc kernel sin(2 pi phi F)/(pi F)."""
    if phi <= 0:
        raise ValueError("phi must be positive")
    quad = quad or QuadSpec()
    return box_integral(lambda p: sinc_kernel(F_values(form, p), phi), 3 * form.dim, quad)
