"""Positive definite binary quadratic forms.

Representation counts R_f(n) over the integer lattice, residue counts
rho_{f,b}(q) over [q]^2, their stabilised p-adic densities, and the
Kronecker-symbol closed form valid away from the discriminant.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import factorize, kronecker_symbol


class RepTableBudgetError(RuntimeError):
    """A representation table would exceed the configured memory budget."""


@dataclass(frozen=True)
class PDBQF:
    """ax^2 + bxy + cy^2 with b^2 - 4ac < 0 and a > 0."""

    a: int
    b: int
    c: int

    def __post_init__(self) -> None:
        if self.a <= 0 or self.discriminant >= 0:
            raise ValueError(f"form ({self.a},{self.b},{self.c}) is not positive definite")

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x, y):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def __str__(self) -> str:
        return f"{self.a}x^2+{self.b}xy+{self.c}y^2"


TWO_SQUARES = PDBQF(1, 0, 1)


def enumeration_bound(f: PDBQF, n: int) -> int:
    """Safe over-cover: |x|,|y| <= ceil(2 sqrt(max(a,c) n / |D|)) + 1 whenever
    f(x,y) = n has a solution."""
    if n <= 0:
        return 1
    return math.isqrt(4 * max(f.a, f.c) * n // (-f.discriminant)) + 2


def representation_count(f: PDBQF, n: int) -> int:
    """R_f(n) = #{(x,y) in Z^2 : f(x,y) = n}; 0 for n < 0 by definiteness."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    count = 0
    # solve c y^2 + (b x) y + (a x^2 - n) = 0 exactly for each x
    fourc = 4 * f.c
    for x in range(-enumeration_bound(f, n), enumeration_bound(f, n) + 1):
        disc = (f.b * x) ** 2 - fourc * (f.a * x * x - n)
        if disc < 0:
            continue
        r = math.isqrt(disc)
        if r * r != disc:
            continue
        for sign in ((r, -r) if r else (0,)):
            num = -f.b * x + sign
            if num % (2 * f.c) == 0:
                count += 1
    return count


@dataclass(frozen=True)
class RepTable:
    """counts[n] = R_f(n) for 0 <= n <= limit."""

    form: PDBQF
    limit: int
    counts: np.ndarray

    def count(self, n: int) -> int:
        if n < 0:
            return 0
        if n > self.limit:
            raise IndexError(f"R table built to {self.limit}, asked for {n}")
        return int(self.counts[n])


def build_rep_table(
    f: PDBQF,
    limit: int,
    jobs: int = 1,
    max_bytes: int = 2 << 30,
) -> RepTable:
    """Single sweep over all lattice points with f(x,y) <= limit.

    Per-x rows are enumerated with a float interval for y, over-covered by one
    on each side, then filtered exactly in integer arithmetic, so rounding can
    never lose a point.
    """
    if limit < 0:
        raise ValueError("limit must be >= 0")
    if 8 * (limit + 1) > max_bytes:
        raise RepTableBudgetError(f"table to {limit} needs > {max_bytes} bytes")
    D = f.discriminant
    xmax = math.isqrt(4 * f.c * limit // (-D)) + 1

    def sweep(x_lo: int, x_hi: int) -> np.ndarray:
        counts = np.zeros(limit + 1, dtype=np.int64)
        buf: list[np.ndarray] = []
        buffered = 0
        for x in range(x_lo, x_hi):
            disc = 4 * f.c * limit + D * x * x
            if disc < 0:
                continue
            half = math.sqrt(disc) / (2 * f.c)
            yc = -f.b * x / (2 * f.c)
            ys = np.arange(math.floor(yc - half) - 1, math.ceil(yc + half) + 2, dtype=np.int64)
            vals = (f.a * x * x) + (f.b * x) * ys + f.c * ys * ys
            vals = vals[(vals >= 0) & (vals <= limit)]
            buf.append(vals)
            buffered += len(vals)
            if buffered >= 4_000_000:
                counts += np.bincount(np.concatenate(buf), minlength=limit + 1)
                buf, buffered = [], 0
        if buf:
            counts += np.bincount(np.concatenate(buf), minlength=limit + 1)
        return counts

    if jobs <= 1:
        counts = sweep(-xmax, xmax + 1)
    else:
        edges = np.linspace(-xmax, xmax + 1, jobs + 1).astype(int)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda ab: sweep(*ab), zip(edges[:-1], edges[1:])))
        counts = parts[0]
        for part in parts[1:]:
            counts += part
    return RepTable(f, limit, counts)


# residue-count tables rho_{f, .}(q), cached per (form, q)
_RHO_CACHE: dict[tuple[tuple[int, int, int], int], np.ndarray] = {}
_RHO_LOCK = threading.Lock()
_BRUTE_MODULUS_LIMIT = 10_000


def residue_count_table(f: PDBQF, q: int) -> np.ndarray:
    """Vector of rho_{f,beta}(q) for beta = 0..q-1, by brute force over [q]^2."""
    if q < 1:
        raise ValueError("modulus must be positive")
    key = ((f.a, f.b, f.c), q)
    got = _RHO_CACHE.get(key)
    if got is not None:
        return got
    ys = np.arange(q, dtype=np.int64)
    cy2 = (f.c * ys * ys) % q
    table = np.zeros(q, dtype=np.int64)
    for x in range(q):
        vals = (f.a * x * x + f.b * x * ys + cy2) % q
        table += np.bincount(vals, minlength=q)
    with _RHO_LOCK:
        if len(_RHO_CACHE) > 64:
            _RHO_CACHE.clear()
        _RHO_CACHE[key] = table
    return table


def residue_rep_count(f: PDBQF, beta: int, q: int, force_brute: bool = False) -> int:
    """rho_{f,beta}(q) = #{(x,y) in [q]^2 : f(x,y) = beta mod q}.

    Brute force for q <= 10^4; above that, CRT over the prime-power parts
    (rho is multiplicative in coprime moduli).
    """
    if q < 1:
        raise ValueError("modulus must be positive")
    if q <= _BRUTE_MODULUS_LIMIT or force_brute:
        return int(residue_count_table(f, q)[beta % q])
    result = 1
    for p, e in factorize(q).factors:
        result *= residue_rep_count(f, beta % p**e, p**e)
    return result


def residue_density_stabilized(f: PDBQF, b: int, p: int, alpha: int) -> Fraction:
    """rho_{f,b}(p^alpha)/p^alpha, exact.

    For alpha >= v_p(D) and b != 0 mod p^alpha this density is invariant under
    lifting: it equals rho_{f,c}(p^beta)/p^beta for every beta >= alpha and
    c = b mod p^alpha.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    vp = factorize(-f.discriminant).valuation(p)
    if alpha < vp:
        raise ValueError(f"alpha={alpha} below v_p(D)={vp}; density not yet stable")
    q = p**alpha
    if b % q == 0:
        raise ValueError("b = 0 mod p^alpha is outside the stabilised regime")
    return Fraction(residue_rep_count(f, b, q), q)


def residue_density_closed_form(f: PDBQF, beta: int, p: int, m: int) -> Fraction:
    """(1 - chi_D(p)/p) * sum_{k=0..m} 1_{p^k | beta} chi_D(p)^k, valid for
    p not dividing D and beta != 0 mod p^m; equals the brute-force ratio."""
    D = f.discriminant
    if D % p == 0:
        raise ValueError(f"closed form invalid: {p} divides discriminant {D}")
    if m < 1:
        raise ValueError("m must be >= 1")
    if beta % p**m == 0:
        raise ValueError("beta = 0 mod p^m is outside the closed form's domain")
    chi = kronecker_symbol(D, p)
    total = Fraction(0)
    pk = 1
    for k in range(m + 1):
        if beta % pk == 0:
            total += Fraction(chi) ** k
        pk *= p
    return (1 - Fraction(chi, p)) * total


def zero_residue_density(f: PDBQF, p: int, m: int) -> Fraction:
    """rho_{f,0}(p^m)/p^m for p not dividing D, without enumeration.

    Uses sum_{beta mod p^m} rho = p^{2m} together with the closed form on the
    nonzero residues.
    """
    D = f.discriminant
    if D % p == 0:
        raise ValueError("requires p coprime to the discriminant")
    chi = kronecker_symbol(D, p)
    total = Fraction(p) ** m
    # remove the mass of residues with valuation v < m
    geo = Fraction(0)
    for v in range(m):
        g = (1 - Fraction(chi, p)) * sum(Fraction(chi) ** k for k in range(v + 1))
        count = p ** (m - v) - p ** (m - v - 1)
        geo += count * g
    return total - geo
