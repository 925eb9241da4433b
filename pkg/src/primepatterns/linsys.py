"""Affine-linear systems and their local solution densities.

The density alpha(d_1..d_t) of a system is the probability that psi_i(n) = 0
mod d_i simultaneously for uniform n mod lcm.  Two evaluation routes are kept
deliberately independent: a direct grid count (`alpha_bruteforce`) and a
prime-power lifting count (`alpha_hensel`); `alpha` CRT-splits arbitrary
moduli and dispatches to the latter.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from . import convex
from .arith import factorize, primes


class BudgetError(RuntimeError):
    """An exact computation would exceed its iteration/memory budget."""


class ComplexityError(ValueError):
    """The system violates a finite-complexity precondition."""


@dataclass(frozen=True)
class AffineForm:
    """linear . x + constant on Z^d."""

    linear: tuple[int, ...]
    constant: int = 0

    def __post_init__(self) -> None:
        if not self.linear:
            raise ValueError("form needs at least one variable")

    def __call__(self, point):
        return sum(a * x for a, x in zip(self.linear, point)) + self.constant

    @property
    def d(self) -> int:
        return len(self.linear)


@dataclass(frozen=True)
class AffineSystem:
    forms: tuple[AffineForm, ...]

    def __post_init__(self) -> None:
        if not self.forms:
            raise ValueError("system needs at least one form")
        if len({f.d for f in self.forms}) != 1:
            raise ValueError("forms must share a dimension")

    @property
    def d(self) -> int:
        return self.forms[0].d

    @property
    def t(self) -> int:
        return len(self.forms)

    def linear_matrix(self) -> np.ndarray:
        return np.array([f.linear for f in self.forms], dtype=np.int64)

    def constants(self) -> np.ndarray:
        return np.array([f.constant for f in self.forms], dtype=np.int64)


def system(rows: Sequence[Sequence[int]], constants: Sequence[int] | None = None) -> AffineSystem:
    """Convenience constructor from linear rows and optional constants."""
    if constants is None:
        constants = [0] * len(rows)
    return AffineSystem(tuple(AffineForm(tuple(int(c) for c in r), int(k)) for r, k in zip(rows, constants)))


def _pair_minor_gcd(u: Sequence[int], v: Sequence[int]) -> int:
    """gcd of all 2x2 minors of the pair; 0 iff proportional over Q."""
    g = 0
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            g = math.gcd(g, u[i] * v[j] - u[j] * v[i])
    # a pair with a zero vector has all minors zero already; for d = 1 the
    # single "minor" is the empty product, handled via cross ratio below
    if len(u) == 1:
        g = math.gcd(g, 0)  # no 2x2 minors in one variable: always proportional
    return g


def _proportional_over_q(u: Sequence[int], v: Sequence[int]) -> bool:
    if len(u) == 1:
        return True
    if all(x == 0 for x in u) or all(x == 0 for x in v):
        return True
    return all(u[i] * v[j] - u[j] * v[i] == 0 for i in range(len(u)) for j in range(len(u)))


def finite_complexity(sys: AffineSystem) -> bool:
    """True iff no two linear parts are proportional over Q (a zero linear
    part counts as proportional to everything)."""
    forms = sys.forms
    if any(all(c == 0 for c in f.linear) for f in forms) and len(forms) > 1:
        return False
    for f, g in itertools.combinations(forms, 2):
        if _proportional_over_q(f.linear, g.linear):
            return False
    return True


def exceptional_primes(sys: AffineSystem, bound: int) -> set[int]:
    """Primes p <= bound modulo which some pair of linear parts becomes
    proportional (including vanishing mod p)."""
    if not finite_complexity(sys):
        raise ComplexityError("exceptional primes are defined for finite-complexity systems")
    out: set[int] = set()
    for f, g in itertools.combinations(sys.forms, 2):
        minors = [
            f.linear[i] * g.linear[j] - f.linear[j] * g.linear[i]
            for i in range(sys.d)
            for j in range(i + 1, sys.d)
        ]
        gc = reduce(math.gcd, minors, 0)
        # gc == 0 cannot happen for a finite-complexity pair with d >= 2
        for p in primes(bound):
            p = int(p)
            if gc % p == 0:
                out.add(p)
    return out


@dataclass(frozen=True)
class DensityQuery:
    system: AffineSystem
    moduli: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.moduli) != self.system.t:
            raise ValueError("one modulus per form")
        if any(m < 1 for m in self.moduli):
            raise ValueError("moduli must be positive")

    @property
    def lcm(self) -> int:
        return reduce(math.lcm, self.moduli, 1)


def alpha_bruteforce(query: DensityQuery, budget: int = 10_000_000) -> Fraction:
    """Direct count over the full residue grid mod lcm."""
    m = query.lcm
    d = query.system.d
    if m**d > budget:
        raise BudgetError(f"grid {m}^{d} exceeds budget {budget}; use alpha_hensel")
    if m == 1:
        return Fraction(1)
    grids = np.indices((m,) * d).reshape(d, -1)
    mask = np.ones(grids.shape[1], dtype=bool)
    for form, mod in zip(query.system.forms, query.moduli):
        if mod == 1:
            continue
        vals = np.zeros(grids.shape[1], dtype=np.int64)
        for coef, g in zip(form.linear, grids):
            vals += coef * g
        vals += form.constant
        mask &= vals % mod == 0
    return Fraction(int(mask.sum()), m**d)


def _echelon_mod_p(L: np.ndarray, p: int):
    """Row reduce L over F_p; return (R, E, pivots) with E @ L = R (rref)."""
    r, d = L.shape
    A = (L % p).astype(np.int64)
    E = np.eye(r, dtype=np.int64)
    pivots: list[int] = []
    row = 0
    for col in range(d):
        sel = None
        for i in range(row, r):
            if A[i, col] % p:
                sel = i
                break
        if sel is None:
            continue
        A[[row, sel]] = A[[sel, row]]
        E[[row, sel]] = E[[sel, row]]
        inv = pow(int(A[row, col]), -1, p)
        A[row] = A[row] * inv % p
        E[row] = E[row] * inv % p
        for i in range(r):
            if i != row and A[i, col]:
                f = int(A[i, col])
                A[i] = (A[i] - f * A[row]) % p
                E[i] = (E[i] - f * E[row]) % p
        pivots.append(col)
        row += 1
        if row == r:
            break
    return A, E, pivots


def _solutions_mod_p(R: np.ndarray, E: np.ndarray, pivots: list[int], rhs: np.ndarray, p: int):
    """All z in F_p^d with L z = rhs, or None if inconsistent."""
    d = R.shape[1]
    rank = len(pivots)
    tb = (E @ rhs) % p
    if np.any(tb[rank:] % p):
        return None
    free = [c for c in range(d) if c not in pivots]
    sols = np.empty((p ** len(free), d), dtype=np.int64)
    for idx, assign in enumerate(itertools.product(range(p), repeat=len(free))):
        z = np.zeros(d, dtype=np.int64)
        z[free] = assign
        for i, col in enumerate(pivots):
            z[col] = (tb[i] - int(R[i] @ z)) % p
        sols[idx] = z
    return sols


def alpha_hensel(query: DensityQuery, budget_rows: int = 5_000_000) -> Fraction:
    """Prime-power density by lifting solution sets level by level.

    Whenever every remaining level's active constraint matrix has full row
    rank mod p, each solution lifts to exactly p^(d - rank) successors and the
    count closes in one multiplication; otherwise residue classes are split
    explicitly and inconsistent ones dropped.
    """
    ps = {p for mod in query.moduli if mod > 1 for p, _ in factorize(mod).factors}
    if len(ps) > 1:
        raise ValueError("alpha_hensel needs prime-power moduli of a single prime; CRT-split first")
    if not ps:
        return Fraction(1)
    p = ps.pop()
    exps = []
    for mod in query.moduli:
        e = 0
        while mod % p == 0:
            mod //= p
            e += 1
        exps.append(e)
    m = max(exps)
    d = query.system.d
    L = query.system.linear_matrix()
    consts = query.system.constants()
    Lp = L % p

    actives = [[i for i in range(len(exps)) if exps[i] > j] for j in range(m)]
    reductions = [_echelon_mod_p(Lp[idx], p) if idx else None for idx in actives]
    ranks = [len(red[2]) if red else 0 for red in reductions]
    full = [ranks[j] == len(actives[j]) for j in range(m)]
    # full row rank from level j onward -> counting closes by formula
    full_from = [all(full[j:]) for j in range(m)] + [True]

    sols = np.zeros((1, d), dtype=np.int64)
    pj = 1
    for j in range(m):
        if not actives[j]:
            return Fraction(len(sols), p ** (d * j))
        if full_from[j]:
            return Fraction(len(sols), p ** (d * j + sum(ranks[j:])))
        idx = actives[j]
        R, E, pivots = reductions[j]
        vals = sols @ L[idx].T + consts[idx]
        c = (vals // pj) % p
        classes, inverse = np.unique(c, axis=0, return_inverse=True)
        new_parts = []
        for ci, cls in enumerate(classes):
            zs = _solutions_mod_p(R, E, pivots, (-cls) % p, p)
            if zs is None:
                continue
            members = sols[inverse == ci]
            lifted = (members[:, None, :] + pj * zs[None, :, :]).reshape(-1, d)
            new_parts.append(lifted)
        if not new_parts:
            return Fraction(0, 1)
        sols = np.concatenate(new_parts)
        if len(sols) > budget_rows:
            raise BudgetError(f"lifted solution set has {len(sols)} rows > {budget_rows}")
        pj *= p
    return Fraction(len(sols), p ** (d * m))


def alpha(query: DensityQuery, budget_rows: int = 5_000_000) -> Fraction:
    """Local divisor density for arbitrary moduli: CRT-split by prime and
    multiply the per-prime densities."""
    ps: set[int] = set()
    for mod in query.moduli:
        if mod > 1:
            ps.update(p for p, _ in factorize(mod).factors)
    result = Fraction(1)
    for p in sorted(ps):
        sub = []
        for mod in query.moduli:
            e = 0
            while mod % p == 0:
                mod //= p
                e += 1
            sub.append(p**e)
        result *= alpha_hensel(DensityQuery(query.system, tuple(sub)), budget_rows)
    return result


def square_divisibility_count(sys: AffineSystem, body: convex.ConvexBody, p: int) -> int:
    """Exact number of lattice points n in the body with p^2 dividing the
    product of the form values."""
    if sys.t > 1 and p in exceptional_primes(sys, p):
        raise ComplexityError(f"{p} is an exceptional prime for this system")
    if body.dimension != sys.d:
        raise ValueError("body and system dimensions differ")
    p2 = p * p
    L = sys.linear_matrix()
    consts = sys.constants()
    total = 0
    for prefix, lo, hi in convex.iter_rows(body):
        ys = np.arange(lo, hi + 1, dtype=np.int64)
        vcount = np.zeros(len(ys), dtype=np.int64)
        for i in range(sys.t):
            base = int(L[i, :-1] @ np.array(prefix, dtype=np.int64)) + int(consts[i]) if prefix else int(consts[i])
            vals = (base + int(L[i, -1]) * ys) % p2
            vcount += (vals % p == 0).astype(np.int64) + (vals == 0).astype(np.int64)
        total += int(np.count_nonzero(vcount >= 2))
    return total
