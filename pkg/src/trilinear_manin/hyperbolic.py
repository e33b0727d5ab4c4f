"""Triple sums over the hyperbolic region l m n <= P and leading-constant fits.

A counting function h(l, m, n) whose box sums behave like C (LMN)^beta gives
sum_{lmn <= P} h ~ (C beta^2 / 2) P^beta log^2 P.  ``fit_leading`` recovers C
from exact partial sums by fitting all three log coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .enumeration import CountVariant, _Counter, _as_variant, shell_vectors
from .form import TrilinearForm


class FitError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BBParams:
    beta: float
    C: float = 1.0
    D: float = 1.0
    alpha: float = 1.0
    delta: float = 0.5

    def __post_init__(self):
        vals = (self.beta, self.C, self.D, self.alpha, self.delta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("parameters must be finite")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.delta <= 0:
            raise ValueError("delta must be positive")


def sum_hyperbolic(h: Callable[[int, int, int], int], P: int) -> int:
    """Exact sum of h(l, m, n) over positive l m n <= P."""
    P = int(P)
    total = 0
    for l in range(1, P + 1):
        Pl = P // l
        for m in range(1, Pl + 1):
            for n in range(1, Pl // m + 1):
                total += h(l, m, n)
    return total


def _pairs_by_product(P: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (m, n) with m n <= P, sorted by the product."""
    ms, ns = [], []
    for m in range(1, P + 1):
        k = P // m
        ms.append(np.full(k, m, dtype=np.int64))
        ns.append(np.arange(1, k + 1, dtype=np.int64))
    m = np.concatenate(ms)
    n = np.concatenate(ns)
    prod = m * n
    order = np.argsort(prod, kind="stable")
    return m[order], n[order], prod[order]


def hyperbolic_partial_sums(h_vec: Callable, Pmax: int) -> np.ndarray:
    """S[P] = sum_{lmn <= P} h for every P <= Pmax, h vectorised over integer arrays.

    h_vec(l, m, n) receives equal-length int64 arrays and must return integers.
    """
    Pmax = int(Pmax)
    m_all, n_all, prod = _pairs_by_product(Pmax)
    by_k = np.zeros(Pmax + 1, dtype=np.int64)
    for l in range(1, Pmax + 1):
        cut = np.searchsorted(prod, Pmax // l, side="right")
        m, n = m_all[:cut], n_all[:cut]
        vals = np.asarray(h_vec(np.full(cut, l, dtype=np.int64), m, n))
        if vals.dtype.kind not in "iu":
            raise TypeError("h must return integers")
        np.add.at(by_k, l * prod[:cut], vals.astype(np.int64))
    return np.cumsum(by_k)


@dataclass
class LeadingFit:
    C_hat: float
    beta: float
    coeffs: tuple  # (a, b, c) in S / P^beta = a log^2 P + b log P + c
    P_list: list
    sums: list
    residuals: list

    def to_json(self) -> dict:
        return {
            "C_hat": self.C_hat,
            "beta": self.beta,
            "coeffs": list(self.coeffs),
            "P": self.P_list,
            "S": [int(s) for s in self.sums],
            "residuals": self.residuals,
        }

    @classmethod
    def from_json(cls, d: dict) -> "LeadingFit":
        return cls(float(d["C_hat"]), float(d["beta"]), tuple(d["coeffs"]), list(d["P"]), list(d["S"]),
                   list(d["residuals"]))


def fit_leading(h_or_sums, P_list: Sequence[int], beta: float) -> LeadingFit:
    """Least-squares fit of S(P) / P^beta against log^2 P, log P, 1; C_hat = 2a / beta^2.

    ``h_or_sums`` is either a vectorised h (see ``hyperbolic_partial_sums``) or a
    sequence of precomputed sums S(P) aligned with ``P_list``.
    """
    P_list = [int(p) for p in P_list]
    if len(P_list) < 3 or any(b <= a for a, b in zip(P_list, P_list[1:])):
        raise ValueError("need at least three increasing values of P")
    if callable(h_or_sums):
        table = hyperbolic_partial_sums(h_or_sums, P_list[-1])
        sums = [int(table[p]) for p in P_list]
    else:
        sums = [int(s) for s in h_or_sums]
        if len(sums) != len(P_list):
            raise ValueError("sums and P_list differ in length")
    L = np.log(np.asarray(P_list, dtype=np.float64))
    A = np.column_stack([L**2, L, np.ones_like(L)])
    y = np.asarray(sums, dtype=np.float64) / np.asarray(P_list, dtype=np.float64) ** beta
    if np.linalg.matrix_rank(A) < 3 or np.linalg.cond(A) > 1e12:
        raise FitError("normal equations are singular for these P values")
    coeffs, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = (y - A @ coeffs).tolist()
    return LeadingFit(2 * coeffs[0] / beta**2, beta, tuple(float(c) for c in coeffs), P_list, sums, res)


class ShellCounter:
    """Memoised h(l1, l2, l3): counted points with sup-norms exactly (l1, l2, l3)."""

    def __init__(self, form: TrilinearForm, variant=None):
        self.form = form
        self.variant = _as_variant(variant or CountVariant.U())
        self._counter = _Counter(form, self.variant)
        self._shells: dict = {}
        self._memo: dict = {}

    def _shell(self, l: int, which: int):
        key = (l, which)
        if key not in self._shells:
            V = shell_vectors(l, self.form.dim)
            v = self.variant
            need = {1: v.needs_A1, 2: v.needs_A2, 3: v.is_U}[which]
            mask = self._counter.a_mask(which, V) if need and len(V) else None
            if which == 1 and mask is not None:
                V, mask = V[mask], None
            self._shells[key] = (V, mask)
        return self._shells[key]

    def __call__(self, l1: int, l2: int, l3: int) -> int:
        key = (int(l1), int(l2), int(l3))
        if key not in self._memo:
            if min(key) < 0:
                raise ValueError("shell radii must be >= 0")
            self._counter.check_range(*key)
            X, _ = self._shell(key[0], 1)
            Y, ym = self._shell(key[1], 2)
            Z, zm = self._shell(key[2], 3)
            self._memo[key] = sum(int(self._counter.zero_counts(x, Y, Z, ym, zm).sum()) for x in X)
        return self._memo[key]


@dataclass
class ConditionReport:
    beta: float
    c1: dict = field(default_factory=dict)  # l -> [value per window]
    c1_deviation: dict = field(default_factory=dict)
    c3_tilde: dict = field(default_factory=dict)  # (l, m) -> [value per window]
    c3_deviation: dict = field(default_factory=dict)
    box_ratio: Optional[float] = None  # box sum / (LMN)^beta
    sigma: Optional[float] = None
    windows: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "windows": self.windows,
            "c1": {str(k): v for k, v in self.c1.items()},
            "c1_deviation": {str(k): v for k, v in self.c1_deviation.items()},
            "c3_tilde": {f"{l},{m}": v for (l, m), v in self.c3_tilde.items()},
            "c3_deviation": {f"{l},{m}": v for (l, m), v in self.c3_deviation.items()},
            "box_ratio": self.box_ratio,
            "sigma": self.sigma,
        }


def _rel_dev(vals: list) -> float:
    lo, hi = min(vals), max(vals)
    if hi == 0:
        return 0.0
    return (hi - lo) / abs(hi)


def spot_check_conditions(form: TrilinearForm, params: BBParams, budget: int = 4, ls: Sequence[int] = (1, 2),
                          sigma: Optional[float] = None, variant=None, h: Optional[ShellCounter] = None) -> ConditionReport:
    """Tabulate the slice constants c1(l) and c3~(l, m) on two windows; nothing is asserted.

    c1(l) is sum_{m <= M, n <= N} h(l, m, n) / (M N)^beta on windows M = N =
    budget // 2 and budget; c3~(l, m) is sum_{n <= N} h(l, m, n) / N^beta.
    The full box sum over [1, budget]^3 divided by budget^{3 beta} is reported
    next to ``sigma`` when given.
    """
    if budget < 2:
        raise ValueError("budget must be >= 2")
    h = h or ShellCounter(form, variant)
    beta = params.beta
    windows = [max(1, budget // 2), budget]
    rep = ConditionReport(beta=beta, windows=windows, sigma=sigma)
    for l in ls:
        vals = []
        for W in windows:
            s = sum(h(l, m, n) for m in range(1, W + 1) for n in range(1, W + 1))
            vals.append(s / float(W * W) ** beta)
        rep.c1[l] = vals
        rep.c1_deviation[l] = _rel_dev(vals)
        for m in ls:
            vals3 = [sum(h(l, m, n) for n in range(1, W + 1)) / float(W) ** beta for W in windows]
            rep.c3_tilde[(l, m)] = vals3
            rep.c3_deviation[(l, m)] = _rel_dev(vals3)
    total = sum(h(a, b, c) for a in range(1, budget + 1) for b in range(1, budget + 1) for c in range(1, budget + 1))
    rep.box_ratio = total / float(budget) ** (3 * beta)
    return rep
