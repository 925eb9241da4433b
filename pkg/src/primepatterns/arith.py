"""Integer-arithmetic substrate: sieves, factorisation, multiplicative functions.

Everything here is exact.  Rationals are `fractions.Fraction`, von Mangoldt
data is carried symbolically as (prime, exponent) pairs, and the conversion to
floating `log p` happens only when a sum is finally accumulated (see
`von_mangoldt_array`).

Sieve tables are built once (single writer, guarded by a lock) and then shared
read-only, so all public functions are safe for concurrent readers.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

Rational = Fraction

# Above this limit `sieve_primes` switches to segmented sieving so memory
# stays proportional to the segment, not the limit.
SEGMENT_THRESHOLD = 10_000_000
_SEGMENT_SIZE = 1 << 21

# smallest-prime-factor tables are grown on demand up to this cap
_SPF_CAP = 1 << 27


class SieveBudgetError(RuntimeError):
    """Raised when a request would exceed the fixed table budgets."""


def _prime_mask(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit, ascending.  Segmented above SEGMENT_THRESHOLD."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    if limit <= SEGMENT_THRESHOLD:
        return np.flatnonzero(_prime_mask(limit)).astype(np.int64)

    base = sieve_primes(math.isqrt(limit))
    lo = int(base[-1]) + 1
    out = [base]
    while lo <= limit:
        hi = min(lo + _SEGMENT_SIZE, limit + 1)
        mask = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            mask[start - lo :: p] = False
        out.append((np.flatnonzero(mask) + lo).astype(np.int64))
        lo = hi
    return np.concatenate(out)


def smallest_prime_factor_table(limit: int) -> np.ndarray:
    """spf[n] = least prime factor of n (spf[0]=0, spf[1]=1)."""
    if limit >= _SPF_CAP:
        raise SieveBudgetError(f"spf table of size {limit} exceeds cap {_SPF_CAP}")
    spf = np.zeros(limit + 1, dtype=np.int64)
    spf[1] = 1
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
            spf[p] = p
    rest = np.flatnonzero(spf[2:] == 0) + 2
    spf[rest] = rest
    return spf


class _Cache:
    """Grow-on-demand shared sieve tables (single writer)."""

    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.prime_limit = 0
        self.primes = np.empty(0, dtype=np.int64)
        self.spf_limit = 0
        self.spf = np.empty(0, dtype=np.int64)

    def primes_upto(self, limit: int) -> np.ndarray:
        if limit > self.prime_limit:
            with self.lock:
                if limit > self.prime_limit:
                    target = max(limit, 2 * self.prime_limit, 1 << 16)
                    self.primes = sieve_primes(target)
                    self.prime_limit = target
        return self.primes[: np.searchsorted(self.primes, limit, side="right")]

    def spf_upto(self, limit: int) -> np.ndarray:
        if limit > self.spf_limit:
            with self.lock:
                if limit > self.spf_limit:
                    target = min(max(limit, 2 * self.spf_limit, 1 << 16), _SPF_CAP - 1)
                    if limit > target:
                        raise SieveBudgetError(f"factorisation limit {limit} beyond cap")
                    self.spf = smallest_prime_factor_table(target)
                    self.spf_limit = target
        return self.spf


_CACHE = _Cache()


def primes(limit: int) -> np.ndarray:
    """Cached ascending primes <= limit."""
    return _CACHE.primes_upto(limit)


@dataclass(frozen=True)
class FactoredInteger:
    """n together with its factorisation, primes strictly increasing."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"bad factorisation of {self.n}: {self.factors}")
            last = p
            prod *= p**e
        if prod != self.n or self.n < 1:
            raise ValueError(f"factors {self.factors} do not multiply to {self.n}")

    def valuation(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)

    def squarefree_divisors(self) -> list[int]:
        divs = [1]
        for p, _ in self.factors:
            divs += [d * p for d in divs]
        return sorted(divs)

    @property
    def mobius(self) -> int:
        if any(e > 1 for _, e in self.factors):
            return 0
        return -1 if len(self.factors) % 2 else 1


def factorize(n: int) -> FactoredInteger:
    """Factor a positive integer via the shared spf table (small n) or trial
    division by cached primes.  Not intended for cryptographic sizes."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    if n == 1:
        return FactoredInteger(1, ())
    out: list[tuple[int, int]] = []
    m = n
    if n <= (1 << 24):
        spf = _CACHE.spf_upto(n)
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        return FactoredInteger(n, tuple(out))
    for p in primes(math.isqrt(n)):
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        out.append((m, 1))
        out.sort()
    return FactoredInteger(n, tuple(out))


def euler_phi(n: int) -> int:
    """Euler totient, |multiplicative units mod n|."""
    if n < 1:
        raise ValueError("phi is defined for positive integers")
    result = n
    for p, _ in factorize(n).factors:
        result -= result // p
    return result


def local_von_mangoldt(n: int, q: int) -> Fraction:
    """q/phi(q) when gcd(n, q) = 1, else 0; the mod-q idealisation of the
    von Mangoldt function.  Well defined on residues mod q."""
    if q < 1:
        raise ValueError("modulus must be positive")
    if math.gcd(n % q if q > 1 else 0, q) != 1 and q > 1:
        return Fraction(0)
    return Fraction(q, euler_phi(q))


def von_mangoldt_table(limit: int) -> dict[int, tuple[int, int]]:
    """Map n -> (p, a) for every prime power n = p^a <= limit."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    table: dict[int, tuple[int, int]] = {}
    for p in primes(limit):
        p = int(p)
        q, a = p, 1
        while q <= limit:
            table[q] = (p, a)
            q *= p
            a += 1
    return table


def von_mangoldt_array(limit: int) -> np.ndarray:
    """Vector L with L[n] = log p at prime powers p^a <= limit, else 0.

    This is the only place symbolic (p, a) values become floats; bulk sums
    downstream consume this array.
    """
    lam = np.zeros(limit + 1, dtype=np.float64)
    ps = primes(limit)
    lam[ps] = np.log(ps.astype(np.float64))
    for p in ps[ps <= math.isqrt(limit)]:
        p = int(p)
        q = p * p
        lp = math.log(p)
        while q <= limit:
            lam[q] = lp
            q *= p
    return lam


def divisor_count_array(limit: int) -> np.ndarray:
    """tau(n) for n = 0..limit (tau(0) set to 0)."""
    tau = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        tau[d::d] += 1
    return tau


def mobius(n: int) -> int:
    return factorize(n).mobius


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit-ish inputs."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a|n) for odd positive n."""
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_symbol(D: int, n: int) -> int:
    """Kronecker symbol (D|n), completely multiplicative in n."""
    if n == 0:
        return 1 if D in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if D % 2 == 0:
            return 0
        if v % 2 == 1 and D % 8 in (3, 5):
            result = -result
    return result * _jacobi(D % n, n)
