"""Exact enumeration of integer points on F(x, y, z) = 0.

Counts come in boxes ([-P1,P1] x [-P2,P2] x [-P3,P3] in each block), in sup-norm
shells, and in the hyperbolic height region |x| |y| |z| <= B.  The work horse is
``_Counter.zero_counts``: for each fixed x the values F(x, y, z) = y^T M_x z are formed
as a matrix product over blocks of y and z, so a whole family of fibres is
counted at once.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .arith import integer_root, mobius_cube_table
from .form import (
    ASetCache,
    BilinearVector,
    Contraction,
    DimensionError,
    TrilinearForm,
    contract,
    contraction_matrix,
)


class DegenerateFiberError(ValueError):
    """All coefficients of the fibre hyperplane vanish."""


_TAGS = ("all", "nondeg3", "n1", "nprime", "u")


@dataclass(frozen=True)
class CountVariant:
    """Which points are counted.

    ``all``      only F = 0
    ``nondeg3``  adds B(x, y) != 0
    ``n1``       adds x in A_1                       (the count N_1)
    ``nprime``   adds x in A_1 and y in A_2          (the count N')
    ``u``        the open set U: all three contractions nonzero and x, y, z in
                 A_1, A_2, A_3
    """

    tag: str = "u"
    lam: Optional[int] = None

    def __post_init__(self):
        tag = self.tag.lower()
        if tag not in _TAGS:
            raise ValueError(f"unknown variant {self.tag!r}; expected one of {_TAGS}")
        object.__setattr__(self, "tag", tag)
        if tag in ("n1", "nprime", "u"):
            if self.lam is not None and self.lam < 1:
                raise ValueError("lambda must be >= 1")
        elif self.lam is not None:
            object.__setattr__(self, "lam", None)

    @classmethod
    def ALL(cls):
        return cls("all")

    @classmethod
    def NONDEG3(cls):
        return cls("nondeg3")

    @classmethod
    def U(cls, lam: Optional[int] = None):
        return cls("u", lam)

    def resolved_lam(self, form: TrilinearForm) -> Optional[int]:
        if self.tag not in ("n1", "nprime", "u"):
            return None
        lam = form.n if self.lam is None else self.lam
        if not 1 <= lam <= form.dim:
            raise ValueError(f"lambda must lie in [1, {form.dim}]")
        return lam

    @property
    def needs_nondeg_B(self) -> bool:
        return self.tag != "all"

    @property
    def needs_A1(self) -> bool:
        return self.tag in ("n1", "nprime", "u")

    @property
    def needs_A2(self) -> bool:
        return self.tag in ("nprime", "u")

    @property
    def is_U(self) -> bool:
        return self.tag == "u"

    def label(self, form: Optional[TrilinearForm] = None) -> str:
        if self.tag in ("n1", "nprime", "u"):
            lam = self.lam if form is None else self.resolved_lam(form)
            return f"{self.tag}(lambda={lam})"
        return self.tag


def _as_variant(variant) -> CountVariant:
    if variant is None:
        return CountVariant.U()
    if isinstance(variant, CountVariant):
        return variant
    return CountVariant(str(variant))


@dataclass
class CountReport:
    variant: str
    count: int
    elapsed: float
    form_id: str
    bounds: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "form_id": self.form_id,
            "variant": self.variant,
            "bounds": self.bounds,
            "count": self.count,
            "seconds": self.elapsed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CountReport":
        return cls(d["variant"], int(d["count"]), float(d["seconds"]), d["form_id"], dict(d["bounds"]))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("MANIN_THREADS", "1")))
    except ValueError:
        return 1


# -- integer vector sets ------------------------------------------------------


@lru_cache(maxsize=256)
def _box_cached(P: int, d: int) -> np.ndarray:
    r = np.arange(-P, P + 1, dtype=np.int64)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    out = np.stack([g.ravel() for g in grids], axis=1)
    out.setflags(write=False)
    return out


def box_vectors(P: int, d: int) -> np.ndarray:
    """All integer vectors of [-P, P]^d, in lexicographic order."""
    if P < 0:
        return np.zeros((0, d), dtype=np.int64)
    return _box_cached(int(P), d)


def shell_vectors(l: int, d: int) -> np.ndarray:
    """Integer vectors of sup-norm exactly l."""
    v = box_vectors(l, d)
    return v[np.abs(v).max(axis=1) == l] if l > 0 else v


def ball_vectors_nonzero(R: int, d: int) -> np.ndarray:
    v = box_vectors(R, d)
    return v[np.abs(v).max(axis=1) > 0]


def primitive_mask(v: np.ndarray) -> np.ndarray:
    return np.gcd.reduce(np.abs(v), axis=1) == 1


def sup_norms(v: np.ndarray) -> np.ndarray:
    return np.abs(v).max(axis=1) if len(v) else np.zeros(0, dtype=np.int64)


# -- core counting -------------------------------------------------------------

_CHUNK_ENTRIES = 1 << 22


class _Counter:
    """Shared state for counting triples of one form under one variant."""

    def __init__(self, form: TrilinearForm, variant: CountVariant, acache: Optional[ASetCache] = None):
        self.form = form
        self.variant = variant
        self.lam = variant.resolved_lam(form)
        if self.lam is not None:
            self.acache = acache if acache is not None and acache.lam == self.lam else ASetCache(form, self.lam)
        else:
            self.acache = None
        self.t_second = np.asarray(form.coeffs)  # axes (i, j, k); B''_i(y, z)

    def check_range(self, px: int, py: int, pz: int) -> None:
        bound = int(np.abs(self.form.coeffs).sum()) * px * py * pz
        if bound >= 2**62:
            raise OverflowError("box too large for 64-bit exact counting")

    def a_mask(self, which: int, vectors: np.ndarray) -> np.ndarray:
        return self.acache.mask(which, vectors)

    def zero_counts(self, x: np.ndarray, Y: np.ndarray, Z: np.ndarray,
                    ymask: Optional[np.ndarray] = None, zmask: Optional[np.ndarray] = None) -> np.ndarray:
        """Per-z counts of y in Y with F(x, y, z) = 0 and the variant's filters.

        ``ymask``/``zmask`` carry precomputed A_2/A_3 membership (or primitivity).
        """
        form = self.form
        out = np.zeros(len(Z), dtype=np.int64)
        if len(Y) == 0 or len(Z) == 0:
            return out
        Mx = contraction_matrix(form, Contraction.B, x, 0)  # y @ Mx = B(x, y)
        Bxy = Y @ Mx
        keep_y = np.ones(len(Y), dtype=bool) if ymask is None else ymask.copy()
        if self.variant.needs_nondeg_B:
            keep_y &= Bxy.any(axis=1)
        keep_z = np.ones(len(Z), dtype=bool) if zmask is None else zmask.copy()
        if self.variant.is_U:
            Mpx = contraction_matrix(form, Contraction.B_PRIME, x, 0)  # z @ Mpx = B'(x, z)
            keep_z &= (Z @ Mpx).any(axis=1)
        yi = np.nonzero(keep_y)[0]
        zi = np.nonzero(keep_z)[0]
        if len(yi) == 0 or len(zi) == 0:
            return out
        Bk = Bxy[yi]
        Zk = Z[zi]
        ZT = Zk.T
        step = max(1, _CHUNK_ENTRIES // len(zi))
        acc = np.zeros(len(zi), dtype=np.int64)
        for s in range(0, len(yi), step):
            vals = Bk[s : s + step] @ ZT
            zero = vals == 0
            if self.variant.is_U:
                rows, cols = np.nonzero(zero)
                if len(rows):
                    yv = Y[yi[s + rows]]
                    zv = Zk[cols]
                    bsec = np.einsum("ijk,pj,pk->pi", self.t_second, yv, zv)
                    good = bsec.any(axis=1)
                    acc += np.bincount(cols[good], minlength=len(zi))
            else:
                acc += zero.sum(axis=0)
        out[zi] = acc
        return out


def _map_chunks(fn, items: Sequence, workers: int):
    """Apply fn to contiguous chunks of ``items``; results in chunk order."""
    if workers <= 1 or len(items) < 2:
        return [fn(items)]
    size = -(-len(items) // workers)
    chunks = [items[i : i + size] for i in range(0, len(items), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


# -- fibres ----------------------------------------------------------------------


def count_hyperplane_points(bvec: Sequence[int], P3: int, zfilter=None) -> int:
    """Number of z in [-P3, P3]^{d} with b . z = 0.

    Solves for the coordinate where |b_k| is largest and enumerates the rest;
    ``zfilter`` (array of solutions -> bool mask) restricts the count further.
    """
    b = np.asarray([int(v) for v in bvec], dtype=np.int64)
    if not b.any():
        raise DegenerateFiberError("all contraction coefficients vanish")
    P3 = int(P3)
    d = len(b)
    kmax = int(np.argmax(np.abs(b)))
    bk = int(b[kmax])
    rest = np.delete(b, kmax)
    if d == 1:
        sols = np.zeros((1, 1), dtype=np.int64)
        return int(zfilter(sols).sum()) if zfilter is not None else 1
    r = np.arange(-P3, P3 + 1, dtype=np.int64)
    total = 0
    # Loop over the first free coordinate; the remaining d-2 are vectorised.
    inner = box_vectors(P3, d - 2) if d > 2 else np.zeros((1, 0), dtype=np.int64)
    inner_dot = inner @ rest[1:] if d > 2 else np.zeros(1, dtype=np.int64)
    for t in r:
        s = rest[0] * t + inner_dot
        ok = (s % bk) == 0
        zk = -s[ok] // bk
        ok2 = np.abs(zk) <= P3
        if zfilter is None:
            total += int(ok2.sum())
            continue
        if not ok2.any():
            continue
        free = np.column_stack([np.full(int(ok2.sum()), t, dtype=np.int64), inner[ok][ok2]])
        sols = np.insert(free, kmax, zk[ok2], axis=1)
        total += int(zfilter(sols).sum())
    return total


def count_fiber_z(form: TrilinearForm, x, y, P3: int, variant=None, acache: Optional[ASetCache] = None) -> int:
    """Number of z in [-P3, P3]^{n+1} with F(x, y, z) = 0 (plus variant filters on z)."""
    variant = _as_variant(variant)
    b = contract(form, Contraction.B, x, y)
    if b.is_zero():
        raise DegenerateFiberError("B(x, y) = 0: the whole z-box lies on the fibre")
    if not variant.is_U:
        return count_hyperplane_points(b.values, P3)
    counter = _Counter(form, variant, acache)
    xv = np.asarray(x, dtype=np.int64)
    yv = np.asarray(y, dtype=np.int64)
    Mpx = contraction_matrix(form, Contraction.B_PRIME, xv, 0)
    Msy = contraction_matrix(form, Contraction.B_SECOND, yv, 0)  # z @ Msy = B''(y, z)

    def zfilter(Z):
        keep = (Z @ Mpx).any(axis=1) & (Z @ Msy).any(axis=1)
        if keep.any():
            idx = np.nonzero(keep)[0]
            keep[idx] = counter.a_mask(3, Z[idx])
        return keep

    return count_hyperplane_points(b.values, P3, zfilter)


# -- boxes ---------------------------------------------------------------------------


def _count_product(counter: _Counter, X: np.ndarray, Y: np.ndarray, Z: np.ndarray, workers: int) -> int:
    v = counter.variant
    if v.needs_A1:
        X = X[counter.a_mask(1, X)]
    ymask = counter.a_mask(2, Y) if v.needs_A2 else None
    zmask = counter.a_mask(3, Z) if v.is_U else None

    def work(xs):
        return sum(int(counter.zero_counts(x, Y, Z, ymask, zmask).sum()) for x in xs)

    return sum(_map_chunks(work, X, workers))


def count_box(form: TrilinearForm, P1: int, P2: int, P3: int, variant=None, workers: Optional[int] = None) -> CountReport:
    """Exact count of (x, y, z) in the box [-P1,P1] x [-P2,P2] x [-P3,P3] on F = 0."""
    variant = _as_variant(variant)
    t0 = time.perf_counter()
    counter = _Counter(form, variant)
    counter.check_range(P1, P2, P3)
    d = form.dim
    count = _count_product(counter, box_vectors(P1, d), box_vectors(P2, d), box_vectors(P3, d),
                           workers or default_workers())
    return CountReport(variant.label(form), count, time.perf_counter() - t0, form.form_id(),
                       {"P1": int(P1), "P2": int(P2), "P3": int(P3)})


def h_function(form: TrilinearForm, l1: int, l2: int, l3: int, variant=None) -> int:
    """Number of counted points with sup-norms exactly (l1, l2, l3)."""
    variant = _as_variant(variant)
    counter = _Counter(form, variant)
    counter.check_range(l1, l2, l3)
    d = form.dim
    return _count_product(counter, shell_vectors(l1, d), shell_vectors(l2, d), shell_vectors(l3, d), 1)


# -- heights ---------------------------------------------------------------------------


def height_histogram(form: TrilinearForm, B: int, variant=None, primitive: bool = False,
                     workers: Optional[int] = None) -> np.ndarray:
    """hist[H] = number of counted (x, y, z), all nonzero, with |x| |y| |z| = H, for H <= B."""
    variant = _as_variant(variant)
    B = int(B)
    counter = _Counter(form, variant)
    counter.check_range(B, B, B)
    d = form.dim
    hist = np.zeros(B + 1, dtype=np.int64)
    if B < 1:
        return hist
    X = ball_vectors_nonzero(B, d)
    if primitive:
        X = X[primitive_mask(X)]
    if variant.needs_A1:
        X = X[counter.a_mask(1, X)]
    # Shell data for y and balls for z, prepared once for every radius that occurs.
    shells = {}
    for l2 in range(1, B + 1):
        Y = shell_vectors(l2, d)
        m = primitive_mask(Y) if primitive else np.ones(len(Y), dtype=bool)
        if variant.needs_A2:
            m &= counter.a_mask(2, Y)
        shells[l2] = (Y, m)
    Zall = ball_vectors_nonzero(B, d)
    zn_all = sup_norms(Zall)
    zm_all = primitive_mask(Zall) if primitive else np.ones(len(Zall), dtype=bool)
    if variant.is_U:
        zm_all &= counter.a_mask(3, Zall)
    order = np.argsort(zn_all, kind="stable")
    Zall, zn_all, zm_all = Zall[order], zn_all[order], zm_all[order]
    ends = np.searchsorted(zn_all, np.arange(B + 1), side="right")

    def work(xs):
        local = np.zeros(B + 1, dtype=np.int64)
        for x in xs:
            l1 = int(np.abs(x).max())
            for l2 in range(1, B // l1 + 1):
                R = B // (l1 * l2)
                Y, ym = shells[l2]
                Z = Zall[: ends[R]]
                c = counter.zero_counts(x, Y, Z, ym, zm_all[: ends[R]])
                if c.any():
                    np.add.at(local, l1 * l2 * zn_all[: ends[R]], c)
        return local

    for part in _map_chunks(work, X, workers or default_workers()):
        hist += part
    return hist


def count_height(form: TrilinearForm, B: int, primitive: bool = False, variant=None,
                 workers: Optional[int] = None) -> CountReport:
    """Exact count of nonzero (x, y, z) with |x| |y| |z| <= B on F = 0, optionally all primitive."""
    variant = _as_variant(variant)
    t0 = time.perf_counter()
    hist = height_histogram(form, B, variant, primitive, workers)
    return CountReport(variant.label(form), int(hist.sum()), time.perf_counter() - t0, form.form_id(),
                       {"B": int(B), "primitive": bool(primitive)})


def moebius_from_histogram(hist: np.ndarray, B: int) -> int:
    """sum_{k,l,m} mu(k) mu(l) mu(m) N(B // klm) from a histogram of non-primitive counts."""
    B = int(B)
    cum = np.cumsum(hist[: B + 1])
    mu3 = mobius_cube_table(B)
    return int(sum(mu3[d] * int(cum[B // d]) for d in range(1, B + 1) if mu3[d]))


def moebius_primitive(form: TrilinearForm, B: int, variant=None, workers: Optional[int] = None) -> int:
    """Primitive count recovered from non-primitive height counts by Moebius inversion in each block."""
    hist = height_histogram(form, B, variant, primitive=False, workers=workers)
    return moebius_from_histogram(hist, B)


def scaled_projective_count(form: TrilinearForm, B: float, variant=None, workers: Optional[int] = None) -> Fraction:
    """Projective count for the anticanonical height: one eighth of the primitive count at B^{1/n}."""
    if B < 1:
        raise ValueError("B must be >= 1")
    root = integer_root(B, form.n)
    return Fraction(moebius_primitive(form, root, variant, workers), 8)
