"""Small exact-arithmetic helpers shared across the package."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence


class BudgetError(RuntimeError):
    """A requested computation exceeds its size budget.

    ``partial`` carries whatever was computed before the budget was hit.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, v in enumerate(sieve) if v]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13):
        if n % p == 0:
            return n == p
    d = 17
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def totient(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


@lru_cache(maxsize=None)
def mobius_table(n: int) -> tuple[int, ...]:
    """mu(0..n) by a linear sieve; index 0 is unused and set to 0."""
    mu = [1] * (n + 1)
    mu[0] = 0
    is_comp = bytearray(n + 1)
    primes: list[int] = []
    for i in range(2, n + 1):
        if not is_comp[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            if i * p > n:
                break
            is_comp[i * p] = 1
            if i % p == 0:
                mu[i * p] = 0
                break
            mu[i * p] = -mu[i]
    return tuple(mu)


def mobius_cube_table(n: int) -> list[int]:
    """Coefficients of the Dirichlet cube mu*mu*mu on 0..n."""
    mu = mobius_table(n)
    mu2 = [0] * (n + 1)
    for a in range(1, n + 1):
        if mu[a]:
            for b in range(1, n // a + 1):
                mu2[a * b] += mu[a] * mu[b]
    mu3 = [0] * (n + 1)
    for a in range(1, n + 1):
        if mu2[a]:
            for b in range(1, n // a + 1):
                mu3[a * b] += mu2[a] * mu[b]
    return mu3


def integer_root(B: float, n: int) -> int:
    """Largest integer r >= 0 with r**n <= B."""
    if B < 0:
        raise ValueError("negative radicand")
    r = int(B ** (1.0 / n))
    while r > 0 and r**n > B:
        r -= 1
    while (r + 1) ** n <= B:
        r += 1
    return r


def vector_gcd(v: Sequence[int]) -> int:
    g = 0
    for a in v:
        g = math.gcd(g, int(a))
    return g


def is_primitive(v: Sequence[int]) -> bool:
    return vector_gcd(v) == 1


def sup_norm(v: Sequence[int]) -> int:
    return max((abs(int(a)) for a in v), default=0)


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over Q of an integer matrix by fraction-free (Bareiss) elimination."""
    m = [[int(a) for a in row] for row in rows]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        piv = m[rank][col]
        for r in range(rank + 1, nrows):
            for c in range(col + 1, ncols):
                m[r][c] = (piv * m[r][c] - m[r][col] * m[rank][c]) // prev
            m[r][col] = 0
        prev = piv
        rank += 1
        if rank == nrows:
            break
    return rank


def integer_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (Bareiss)."""
    m = [[int(a) for a in row] for row in rows]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def fraction_to_json(q: Fraction) -> dict[str, str]:
    return {"num": str(q.numerator), "den": str(q.denominator)}


def fraction_from_json(obj) -> Fraction:
    return Fraction(int(obj["num"]), int(obj["den"]))
