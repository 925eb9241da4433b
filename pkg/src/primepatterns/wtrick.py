"""The W-trick: removing small-prime bias from the von Mangoldt and
representation functions by restricting to residue classes modulo
Wbar = prod_{p <= w} p^iota(p).

Also houses the exceptional set of rough/smooth/square-heavy integers on
which divisor-type functions behave abnormally; the restricted functions
zero out on it.  gamma is kept dyadic (2^-k) so every threshold comparison
of the form  x > N^gamma  is an exact integer test  x^(2^k) > N.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import euler_phi, factorize, is_prime, primes, von_mangoldt_array
from .qform import PDBQF, RepTable, build_rep_table, representation_count, residue_rep_count


class ScaleBoundWarning(UserWarning):
    """The moduli exceed the scale bound Wbar < N^gamma - 1."""


class ConfigurationError(ValueError):
    pass


def _dyadic_exponent(gamma: Fraction) -> int:
    """gamma must be 2^-k with k >= 2; returns k."""
    if gamma.numerator != 1:
        raise ConfigurationError(f"gamma must be 2^-k, got {gamma}")
    den = gamma.denominator
    k = den.bit_length() - 1
    if 1 << k != den or k < 2:
        raise ConfigurationError(f"gamma must be 2^-k with k >= 2, got {gamma}")
    return k


@dataclass(frozen=True)
class TrickParams:
    """Scale and cutoff parameters.

    The sandwich thresholds default to log^(C1+1) N and log log N but can be
    pinned directly: at desk scale the defaults produce either trivial or
    astronomically large moduli, so explicit thresholds are the practical
    interface and every report records which were used.
    """

    N: int
    w: int
    C1: float = 20.0
    gamma: Fraction = Fraction(1, 8)
    iota_threshold: float | None = None
    eta_threshold: float | None = None

    def __post_init__(self) -> None:
        if self.N < 3:
            raise ConfigurationError("N must be >= 3")
        if self.w < 2:
            raise ConfigurationError("w must be >= 2")
        if self.C1 <= 0:
            raise ConfigurationError("C1 must be positive")
        _dyadic_exponent(self.gamma)
        if not (0 < self.gamma < Fraction(1, 2)):
            raise ConfigurationError("gamma must lie in (0, 1/2)")

    @property
    def gamma_exponent(self) -> int:
        return _dyadic_exponent(self.gamma)

    def iota_cutoff(self) -> float:
        if self.iota_threshold is not None:
            return self.iota_threshold
        return math.log(self.N) ** (self.C1 + 1)

    def eta_cutoff(self) -> float:
        if self.eta_threshold is not None:
            return self.eta_threshold
        return math.log(math.log(self.N))

    def exceeds_n_gamma(self, x: int) -> bool:
        """Exact test  x > N^gamma."""
        return x ** (1 << self.gamma_exponent) > self.N

    def exceeds_n_two_gamma(self, x: int) -> bool:
        """Exact test  x > N^(2 gamma)."""
        return x ** (1 << (self.gamma_exponent - 1)) > self.N


def _sandwich_exponent(p: int, cutoff: float) -> int:
    """Smallest e >= 1 with p^e >= cutoff (so p^(e-1) < cutoff <= p^e),
    clamped to at least 1."""
    e = 1
    q = p
    while q < cutoff:
        q *= p
        e += 1
    return e


def iota(p: int, params: TrickParams) -> int:
    """Exponent of p in Wbar."""
    if p > params.w:
        raise ConfigurationError(f"iota is defined for p <= w = {params.w}")
    return _sandwich_exponent(p, params.iota_cutoff())


def eta(p: int, params: TrickParams) -> int:
    """Exponent of p in Wtilde (the Siegel-Walfisz-sized modulus)."""
    if p > params.w:
        raise ConfigurationError(f"eta is defined for p <= w = {params.w}")
    return _sandwich_exponent(p, params.eta_cutoff())


@dataclass(frozen=True)
class TrickModuli:
    W: int
    Wbar: int
    Wtilde: int
    iota: tuple[tuple[int, int], ...]
    eta: tuple[tuple[int, int], ...]
    satisfies_scale_bound: bool

    @property
    def phi_w_over_w(self) -> Fraction:
        return Fraction(euler_phi(self.W), self.W)

    def iota_of(self, p: int) -> int:
        return dict(self.iota)[p]

    def eta_of(self, p: int) -> int:
        return dict(self.eta)[p]


def trick_moduli(params: TrickParams, strict: bool = False) -> TrickModuli:
    """W, Wbar, Wtilde and the exponent maps.

    The asymptotic regime has Wbar < N^gamma - 1; at desk scale that bound
    fails for any usable parameters, so by default it is recorded and warned
    about rather than enforced.  Pass strict=True to get the error.
    """
    ps = [int(p) for p in primes(params.w)]
    W = math.prod(ps)
    iotas = tuple((p, iota(p, params)) for p in ps)
    etas = tuple((p, eta(p, params)) for p in ps)
    for (p, i_e), (_, e_e) in zip(iotas, etas):
        if i_e < e_e:
            raise ConfigurationError(f"iota({p}) < eta({p}); thresholds are inconsistent")
    Wbar = math.prod(p**e for p, e in iotas)
    Wtilde = math.prod(p**e for p, e in etas)
    ok = (Wbar + 1) ** (1 << params.gamma_exponent) < params.N
    if not ok:
        msg = f"Wbar = {Wbar} violates Wbar < N^gamma - 1 at N = {params.N}"
        if strict:
            raise ConfigurationError(msg)
        warnings.warn(msg, ScaleBoundWarning, stacklevel=2)
    return TrickModuli(W, Wbar, Wtilde, iotas, etas, ok)


# ---------------------------------------------------------------------------
# the exceptional set: rough, excessively smooth, or square-heavy integers


def _smooth_prime_bound(params: TrickParams) -> float:
    lln = math.log(math.log(params.N))
    return params.N ** ((1.0 / lln) ** 3)


def _log_smooth_threshold(params: TrickParams) -> float:
    lln = math.log(math.log(params.N))
    return float(params.gamma) * math.log(params.N) / lln


_EPS = 1e-9


def in_exceptional_set(n: int, params: TrickParams) -> bool:
    """Membership in the exceptional set: n = 0, or n is divisible by a
    prime power p^a > log^C1 N with a >= 2, or its smooth part (primes up to
    N^((1/loglog N)^3)) reaches N^(gamma/loglog N), or it has a square
    divisor m^2 with m > N^gamma."""
    if n == 0:
        return True
    if n < 0 or n > params.N:
        raise ValueError(f"exceptional set is defined on [0, N]; got {n}")
    fac = factorize(n)
    rough_cut = math.log(params.N) ** params.C1
    y = _smooth_prime_bound(params)
    log_smooth = 0.0
    sqrt_part = 1
    for p, e in fac.factors:
        if e >= 2 and p**e > rough_cut:
            return True
        if p <= y:
            log_smooth += e * math.log(p)
        sqrt_part *= p ** (e // 2)
    if log_smooth >= _log_smooth_threshold(params) - _EPS:
        return True
    return params.exceeds_n_gamma(sqrt_part)


def exceptional_set_mask(params: TrickParams, limit: int | None = None) -> np.ndarray:
    """Boolean vector over 0..limit of exceptional-set membership; agrees
    with `in_exceptional_set` pointwise."""
    N = params.N if limit is None else limit
    if N > params.N:
        raise ValueError("mask limit beyond the scale N")
    mask = np.zeros(N + 1, dtype=bool)
    mask[0] = True
    rough_cut = math.log(params.N) ** params.C1
    for p in primes(math.isqrt(N)):
        p = int(p)
        q = p * p
        while q <= N:
            if q > rough_cut:
                mask[q::q] = True
            q *= p
    y = _smooth_prime_bound(params)
    small = [int(p) for p in primes(int(y)) if p <= y]
    if small:
        acc = np.zeros(N + 1, dtype=np.float64)
        for p in small:
            q, lp = p, math.log(p)
            while q <= N:
                acc[q::q] += lp
                q *= p
        mask |= acc >= _log_smooth_threshold(params) - _EPS
    m = 1
    k = 1 << params.gamma_exponent
    while m**k <= params.N:
        m += 1
    while m * m <= N:
        mask[m * m :: m * m] = True
        m += 1
    return mask


# ---------------------------------------------------------------------------
# tricked functions


def lambda_prime(n: int, params: TrickParams) -> float:
    """log n when n is a prime above N^(2 gamma), else 0."""
    if n < 0:
        raise ValueError("lambda_prime is defined on nonnegative integers")
    if n < 2 or not params.exceeds_n_two_gamma(n) or not is_prime(n):
        return 0.0
    return math.log(n)


def lambda_prime_array(params: TrickParams, limit: int | None = None) -> np.ndarray:
    """Vector of lambda_prime over 0..limit (prime powers and small primes
    removed from the von Mangoldt vector)."""
    N = params.N if limit is None else limit
    lam = von_mangoldt_array(N)
    ps = primes(N)
    keep = np.zeros(N + 1, dtype=bool)
    keep[ps] = True
    lam[~keep] = 0.0
    cut = 1
    while not params.exceeds_n_two_gamma(cut):
        cut += 1
    lam[: min(cut, N + 1)] = 0.0
    return lam


def tricked_von_mangoldt(n: int, b: int, moduli: TrickModuli, params: TrickParams) -> float:
    """(phi(W)/W) * lambda_prime(Wbar n + b)."""
    if not 0 <= b < moduli.Wbar:
        raise ValueError("residue b must lie in [0, Wbar)")
    return float(moduli.phi_w_over_w) * lambda_prime(moduli.Wbar * n + b, params)


def tricked_von_mangoldt_array(
    b: int, moduli: TrickModuli, params: TrickParams, count: int
) -> np.ndarray:
    """Values of the tricked von Mangoldt function at n = 1..count."""
    args_top = moduli.Wbar * count + b
    lam = lambda_prime_array(params, min(args_top, params.N))
    idx = moduli.Wbar * np.arange(1, count + 1, dtype=np.int64) + b
    out = np.zeros(count, dtype=np.float64)
    ok = idx < len(lam)
    out[ok] = lam[idx[ok]]
    return float(moduli.phi_w_over_w) * out


def rep_normalizer(f: PDBQF, b: int, moduli: TrickModuli) -> float:
    """sqrt(-D)/(2 pi) * Wbar / rho_{f,b}(Wbar); 0 when the class is not
    represented (the tricked function is identically 0 there)."""
    rho = residue_rep_count(f, b, moduli.Wbar)
    if rho == 0:
        return 0.0
    return math.sqrt(-f.discriminant) / (2 * math.pi) * moduli.Wbar / rho


def tricked_rep(
    m: int, f: PDBQF, b: int, moduli: TrickModuli, params: TrickParams
) -> float:
    """Normalised representation function of the class b mod Wbar, with the
    exceptional set zeroed out of R_f."""
    if not 0 <= b < moduli.Wbar:
        raise ValueError("residue b must lie in [0, Wbar)")
    scale = rep_normalizer(f, b, moduli)
    if scale == 0.0:
        return 0.0
    n = moduli.Wbar * m + b
    if in_exceptional_set(n, params):
        return 0.0
    return scale * representation_count(f, n)


def tricked_rep_array(
    f: PDBQF, b: int, moduli: TrickModuli, params: TrickParams, count: int,
    rep_table: RepTable | None = None,
) -> np.ndarray:
    """Values of the tricked representation function at m = 1..count."""
    scale = rep_normalizer(f, b, moduli)
    if scale == 0.0:
        return np.zeros(count, dtype=np.float64)
    top = moduli.Wbar * count + b
    if top > params.N:
        raise ValueError("arguments exceed the scale N; raise N or lower count")
    if rep_table is None or rep_table.limit < top:
        rep_table = build_rep_table(f, top)
    mask = exceptional_set_mask(params, top)
    idx = moduli.Wbar * np.arange(1, count + 1, dtype=np.int64) + b
    vals = rep_table.counts[idx].astype(np.float64)
    vals[mask[idx]] = 0.0
    return scale * vals


# ---------------------------------------------------------------------------
# admissible residue tuples

ROLE_LAMBDA = "lambda"
ROLE_TAU = "tau"


@dataclass(frozen=True)
class ResidueTuple:
    """Residues b_i in [Wbar] with their slot roles ("lambda" or a PDBQF)."""

    values: tuple[int, ...]
    roles: tuple

    def __post_init__(self) -> None:
        if len(self.values) != len(self.roles):
            raise ValueError("one role per residue")


def lambda_residue_admissible(b: int, moduli: TrickModuli) -> bool:
    return math.gcd(b, moduli.W) == 1


def qform_residue_admissible(f: PDBQF, b: int, moduli: TrickModuli) -> bool:
    for p, e in moduli.iota:
        if b % p**e == 0:
            return False
    return residue_rep_count(f, b, moduli.Wbar) > 0


def residue_set_contains(tup: ResidueTuple, moduli: TrickModuli, params: TrickParams) -> bool:
    """The admissible set: von Mangoldt slots coprime to W; form slots
    nonzero mod every p^iota(p) and representable mod Wbar."""
    for b, role in zip(tup.values, tup.roles):
        if not 0 <= b < moduli.Wbar:
            raise ValueError("residues must lie in [0, Wbar)")
        if role == ROLE_LAMBDA:
            if not lambda_residue_admissible(b, moduli):
                return False
        elif isinstance(role, PDBQF):
            if not qform_residue_admissible(role, b, moduli):
                return False
        else:
            raise ValueError(f"unknown role {role!r}")
    return True
