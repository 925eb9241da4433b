"""Convex bodies in R^d as half-space intersections, with exact rational
membership, lattice-point enumeration, and volume.

Bodies are closed (all constraints are <=).  The bounding box is an
enumeration aid and must contain the body; membership itself is decided by
the half-spaces alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np


class UnboundedBodyError(ValueError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Halfspace:
    """normal . x <= offset, exact rational data."""

    normal: tuple[Fraction, ...]
    offset: Fraction


@dataclass(frozen=True)
class ConvexBody:
    halfspaces: tuple[Halfspace, ...]
    bbox: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.halfspaces:
            raise ValueError("a body needs at least one half-space")
        d = self.dimension
        if d > 4:
            raise ValueError("dimension capped at 4")
        if any(len(h.normal) != d for h in self.halfspaces):
            raise ValueError("mixed dimensions in half-space list")
        if len(self.bbox) != d:
            raise ValueError("bbox dimension mismatch")

    @property
    def dimension(self) -> int:
        return len(self.halfspaces[0].normal)


def make_body(rows: Sequence[tuple[Sequence, object]], bbox: Sequence[tuple[int, int]]) -> ConvexBody:
    """Build a body from (normal, offset) rows with int/Fraction entries."""
    hs = tuple(Halfspace(tuple(_frac(v) for v in n), _frac(b)) for n, b in rows)
    return ConvexBody(hs, tuple((int(lo), int(hi)) for lo, hi in bbox))


def box_body(ranges: Sequence[tuple[int, int]]) -> ConvexBody:
    """Axis-aligned box prod [lo_i, hi_i]."""
    d = len(ranges)
    rows = []
    for i, (lo, hi) in enumerate(ranges):
        e = [0] * d
        e[i] = 1
        rows.append((list(e), hi))
        e2 = [0] * d
        e2[i] = -1
        rows.append((e2, -lo))
    return make_body(rows, ranges)


def interval_body(lo: int, hi: int) -> ConvexBody:
    return box_body([(lo, hi)])


def ap_body(k: int, N: int) -> ConvexBody:
    """{(a, d) : 1 <= a <= a + (k-1) d <= N}, the progression body."""
    if k < 2 or N < 2:
        raise ValueError("need k >= 2 and N >= 2")
    rows = [
        ([-1, 0], -1),          # a >= 1
        ([0, -1], 0),           # d >= 0
        ([1, k - 1], N),        # a + (k-1) d <= N
    ]
    return make_body(rows, [(0, N), (0, N)])


def contains(body: ConvexBody, point: Sequence[int]) -> bool:
    """Exact membership test."""
    if len(point) != body.dimension:
        raise ValueError("point dimension mismatch")
    for h in body.halfspaces:
        if sum(a * x for a, x in zip(h.normal, point)) > h.offset:
            return False
    return True


def _fourier_motzkin(rows: list[tuple[tuple[Fraction, ...], Fraction]], var: int):
    """Eliminate variable `var`, returning constraints on the remaining ones."""
    pos, neg, rest = [], [], []
    for normal, b in rows:
        a = normal[var]
        if a > 0:
            pos.append((normal, b))
        elif a < 0:
            neg.append((normal, b))
        else:
            rest.append((normal, b))
    for (n1, b1) in pos:
        for (n2, b2) in neg:
            a1, a2 = n1[var], -n2[var]
            normal = tuple(a2 * x + a1 * y for x, y in zip(n1, n2))
            rest.append((normal, a2 * b1 + a1 * b2))
    return rest


class _Enumerator:
    """Per-level projected constraint systems for lexicographic enumeration."""

    def __init__(self, body: ConvexBody) -> None:
        d = body.dimension
        rows = [(h.normal, h.offset) for h in body.halfspaces]
        # add bbox constraints so every level is bounded
        for i, (lo, hi) in enumerate(body.bbox):
            e = [Fraction(0)] * d
            e[i] = Fraction(1)
            rows.append((tuple(e), Fraction(hi)))
            e2 = [Fraction(0)] * d
            e2[i] = Fraction(-1)
            rows.append((tuple(e2), Fraction(-lo)))
        self.levels: list[list[tuple[tuple[Fraction, ...], Fraction]]] = [rows]
        for var in range(d - 1, 0, -1):
            rows = _fourier_motzkin(rows, var)
            self.levels.insert(0, rows)
        self.d = d

    def bounds(self, prefix: tuple[int, ...]) -> tuple[int, int] | None:
        """Integer range of coordinate len(prefix) given the fixed prefix."""
        k = len(prefix)
        lo_f: Fraction | None = None
        hi_f: Fraction | None = None
        for normal, b in self.levels[k]:
            a = normal[k]
            partial = b - sum(normal[i] * prefix[i] for i in range(k))
            if a > 0:
                val = partial / a
                hi_f = val if hi_f is None else min(hi_f, val)
            elif a < 0:
                val = partial / a
                lo_f = val if lo_f is None else max(lo_f, val)
            elif partial < 0:
                return None
        if lo_f is None or hi_f is None:
            raise UnboundedBodyError("projected level is unbounded")
        lo, hi = math.ceil(lo_f), math.floor(hi_f)
        if lo > hi:
            return None
        return lo, hi


def iter_rows(body: ConvexBody) -> Iterator[tuple[tuple[int, ...], int, int]]:
    """Yield (prefix, lo, hi): for each assignment of the first d-1
    coordinates, the exact integer interval of the last one."""
    enum = _Enumerator(body)

    def rec(prefix: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], int, int]]:
        rng = enum.bounds(prefix)
        if rng is None:
            return
        if len(prefix) == enum.d - 1:
            yield prefix, rng[0], rng[1]
            return
        for v in range(rng[0], rng[1] + 1):
            yield from rec(prefix + (v,))

    yield from rec(())


def lattice_points(body: ConvexBody) -> Iterator[tuple[int, ...]]:
    """Every integer point of the body exactly once, lexicographic order."""
    for prefix, lo, hi in iter_rows(body):
        for y in range(lo, hi + 1):
            yield prefix + (y,)


def count_lattice_points(body: ConvexBody) -> int:
    return sum(hi - lo + 1 for _, lo, hi in iter_rows(body))


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    abs_error: float
    method: str
    exact: Fraction | None = None


def _vertices_2d(body: ConvexBody) -> list[tuple[Fraction, Fraction]]:
    rows = [(h.normal, h.offset) for h in body.halfspaces]
    for i, (lo, hi) in enumerate(body.bbox):
        e = [Fraction(0), Fraction(0)]
        e[i] = Fraction(1)
        rows.append((tuple(e), Fraction(hi)))
        e2 = [Fraction(0), Fraction(0)]
        e2[i] = Fraction(-1)
        rows.append((tuple(e2), Fraction(-lo)))
    verts = set()
    for (n1, b1), (n2, b2) in itertools.combinations(rows, 2):
        det = n1[0] * n2[1] - n1[1] * n2[0]
        if det == 0:
            continue
        x = (b1 * n2[1] - b2 * n1[1]) / det
        y = (n1[0] * b2 - n2[0] * b1) / det
        if all(n[0] * x + n[1] * y <= b for n, b in rows):
            verts.add((x, y))
    return list(verts)


def vertices_2d(body: ConvexBody) -> list[tuple[Fraction, Fraction]]:
    """Exact vertices of a 2-d body (clipped to its bbox)."""
    if body.dimension != 2:
        raise ValueError("vertex enumeration implemented for d = 2")
    return _vertices_2d(body)


def _is_axis_box(body: ConvexBody) -> list[tuple[Fraction, Fraction]] | None:
    d = body.dimension
    lo = [Fraction(b[0]) for b in body.bbox]
    hi = [Fraction(b[1]) for b in body.bbox]
    for h in body.halfspaces:
        nz = [i for i, a in enumerate(h.normal) if a != 0]
        if len(nz) != 1:
            return None
        i = nz[0]
        a = h.normal[i]
        bound = h.offset / a
        if a > 0:
            hi[i] = min(hi[i], bound)
        else:
            lo[i] = max(lo[i], bound)
    if any(l > h for l, h in zip(lo, hi)):
        return [(Fraction(0), Fraction(0))] * d
    return list(zip(lo, hi))


def volume(
    body: ConvexBody,
    seed: int = 20260809,
    samples: int = 200_000,
) -> VolumeEstimate:
    """Exact volume for axis boxes and all 2-d bodies; otherwise seeded
    Monte Carlo with a 99% confidence half-width."""
    box = _is_axis_box(body)
    if box is not None:
        vol = Fraction(1)
        for lo, hi in box:
            vol *= max(hi - lo, Fraction(0))
        return VolumeEstimate(float(vol), 0.0, "box", vol)
    if body.dimension == 2:
        verts = _vertices_2d(body)
        if len(verts) < 3:
            return VolumeEstimate(0.0, 0.0, "exact2d", Fraction(0))
        cx = sum(v[0] for v in verts) / len(verts)
        cy = sum(v[1] for v in verts) / len(verts)
        ordered = sorted(verts, key=lambda v: math.atan2(float(v[1] - cy), float(v[0] - cx)))
        area = Fraction(0)
        for (x1, y1), (x2, y2) in zip(ordered, ordered[1:] + ordered[:1]):
            area += x1 * y2 - x2 * y1
        area = abs(area) / 2
        return VolumeEstimate(float(area), 0.0, "exact2d", area)

    rng = np.random.default_rng(seed)
    d = body.dimension
    lo = np.array([b[0] for b in body.bbox], dtype=np.float64)
    hi = np.array([b[1] for b in body.bbox], dtype=np.float64)
    if np.any(hi <= lo):
        return VolumeEstimate(0.0, 0.0, "montecarlo")
    boxvol = float(np.prod(hi - lo))
    pts = rng.uniform(lo, hi, size=(samples, d))
    inside = np.ones(samples, dtype=bool)
    for h in body.halfspaces:
        normal = np.array([float(a) for a in h.normal])
        inside &= pts @ normal <= float(h.offset)
    phat = inside.mean()
    half = 2.5758 * math.sqrt(max(phat * (1 - phat), 1e-12) / samples) * boxvol
    return VolumeEstimate(phat * boxvol, half, "montecarlo")
