"""Construction and exploration of S_D inside bounded windows."""

from __future__ import annotations

import math
import os
from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import SchmidtError, ValidationError
from .geom import (
    CircleVec,
    Matrix2,
    circle_make,
    mobius_apply,
    standard_generators,
)
from .qfield import FieldCtx, KElem, OElem, hilbert_symbol, sign_qsqrt, units_canonical


class InvalidD(ValidationError):
    pass


class InvalidWindow(ValidationError):
    pass


class WindowTooLarge(SchmidtError):
    pass


class EmptyArrangement(SchmidtError):
    pass


class NonPositive(SchmidtError):
    pass


DEFAULT_SCAN_CAP = 4_000_000_000


def worker_count() -> int:
    env = os.environ.get("SCHMIDT_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class Window:
    """Closed rectangle [x0, x1] x [y0, y1] in the complex plane (exact)."""

    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction

    def __post_init__(self):
        for k in ("x0", "x1", "y0", "y1"):
            object.__setattr__(self, k, Fraction(getattr(self, k)))
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InvalidWindow(f"degenerate window {self.as_tuple()}")

    @classmethod
    def parse(cls, text: str) -> "Window":
        parts = text.split(",")
        if len(parts) != 4:
            raise InvalidWindow(f"window needs four comma-separated numbers: {text!r}")
        try:
            x0, y0, x1, y1 = (Fraction(p.strip()) for p in parts)
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidWindow(f"bad window {text!r}: {e}") from None
        return cls(x0, x1, y0, y1)

    def as_tuple(self):
        return (self.x0, self.x1, self.y0, self.y1)

    def corners(self):
        return [(x, y) for x in (self.x0, self.x1) for y in (self.y0, self.y1)]

    def inset(self, r) -> "Window":
        r = Fraction(r)
        return Window(self.x0 + r, self.x1 - r, self.y0 + r, self.y1 - r)

    def quadrants(self) -> list["Window"]:
        xm, ym = (self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2
        return [
            Window(self.x0, xm, self.y0, ym),
            Window(xm, self.x1, self.y0, ym),
            Window(self.x0, xm, ym, self.y1),
            Window(xm, self.x1, ym, self.y1),
        ]

    def to_json(self):
        return [str(v) for v in (self.x0, self.y0, self.x1, self.y1)]


def _cmp_y(q: Fraction, m: int, y: Fraction) -> int:
    """Sign of q*sqrt(m) - y."""
    return sign_qsqrt(-y, q, m)


def _center_parts(C: CircleVec):
    m = -C.delta
    return Fraction(C.av, 2 * C.c), Fraction(-C.au, 2 * C.c * m), m


def _dist2_minus(X: Fraction, Y: Fraction, X0: Fraction, q: Fraction, m: int, R2: Fraction) -> int:
    """Sign of |(X, Y) - (X0, q sqrt m)|^2 - R2."""
    P = (X - X0) ** 2 + Y * Y + q * q * m - R2
    return sign_qsqrt(P, -2 * Y * q, m)


def curve_meets_window(C: CircleVec, W: Window) -> bool:
    """Exact test that the curve of C meets the closed rectangle W."""
    m = -C.delta
    if C.c == 0:
        signs = set()
        for X, Y in W.corners():
            # -X v + b + (u Y / m) sqrt(m)
            signs.add(sign_qsqrt(-X * C.av + C.b, Fraction(C.au) * Y / m, m))
        return 0 in signs or (1 in signs and -1 in signs)
    X0, q, m = _center_parts(C)
    R2 = C.radius_sq()
    # some corner at distance >= R
    if all(_dist2_minus(X, Y, X0, q, m, R2) < 0 for X, Y in W.corners()):
        return False
    # nearest point at distance <= R
    cx = min(max(X0, W.x0), W.x1)
    if _cmp_y(q, m, W.y0) < 0:
        cy = W.y0
    elif _cmp_y(q, m, W.y1) > 0:
        cy = W.y1
    else:
        cy = None
    if cy is None:
        return (cx - X0) ** 2 <= R2
    return _dist2_minus(cx, cy, X0, q, m, R2) <= 0


# ---------------------------------------------------------------------------
# arrangements


@dataclass(frozen=True)
class ArrangementSpec:
    ctx: FieldCtx
    D: int
    window: Window
    cMax: int

    def __post_init__(self):
        if self.D < 1:
            raise InvalidD(f"D must be a positive integer, got {self.D}")
        if self.cMax < 1:
            raise ValidationError("cMax must be at least 1")

    def to_json(self) -> dict:
        return {
            "delta": self.ctx.delta,
            "D": self.D,
            "window": self.window.to_json(),
            "cMax": self.cMax,
        }


@dataclass
class Arrangement:
    spec: ArrangementSpec | None
    circles: list[CircleVec] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.circles = sorted(set(self.circles), key=lambda C: C.key)

    def __len__(self):
        return len(self.circles)

    def __iter__(self):
        return iter(self.circles)

    def __contains__(self, C):
        return C in self._set

    @property
    def _set(self):
        s = self.__dict__.get("_cache_set")
        if s is None or len(s) != len(self.circles):
            s = frozenset(self.circles)
            self.__dict__["_cache_set"] = s
        return s

    def keys(self) -> set:
        return {C.key for C in self.circles}

    def subset(self, pred) -> "Arrangement":
        return Arrangement(self.spec, [C for C in self.circles if pred(C)], dict(self.meta))


def _scan_size(spec: ArrangementSpec) -> int:
    W, m, D = spec.window, spec.ctx.abs_delta, spec.D
    total = 0
    sm = math.sqrt(m)
    for c in range(1, spec.cMax + 1):
        R = math.sqrt(D / m) / c
        nv = 2 * c * (float(W.x1 - W.x0) + 2 * R) + 1
        nu = 2 * c * sm * (float(W.y1 - W.y0) + 2 * R) + 1
        total += int(nu * nv)
    return total


def _circles_for_c(spec: ArrangementSpec, c: int) -> list[CircleVec]:
    W, d, D = spec.window, spec.ctx.delta, spec.D
    m = -d
    sm = math.sqrt(m)
    R = math.sqrt(D / m) / c
    pad = R + 1e-9
    # center X0 = v/(2c), Y0 = -u/(2c sqrt m)
    vmin = math.floor(2 * c * (float(W.x0) - pad)) - 1
    vmax = math.ceil(2 * c * (float(W.x1) + pad)) + 1
    umin = math.floor(-2 * c * sm * (float(W.y1) + pad)) - 1
    umax = math.ceil(-2 * c * sm * (float(W.y0) - pad)) + 1
    mod = 4 * m * c
    U = np.arange(umin, umax + 1, dtype=np.int64)
    V = np.arange(vmin, vmax + 1, dtype=np.int64)
    ru = (U * U) % mod
    rv = (m * V * V - 4 * D) % mod
    out: list[CircleVec] = []
    step = max(1, 4_000_000 // max(1, len(U)))
    for j0 in range(0, len(V), step):
        Vb = V[j0 : j0 + step]
        hit = (ru[:, None] + rv[None, j0 : j0 + step]) % mod == 0
        # parity u = v*delta (mod 2)
        hit &= ((U[:, None] - Vb[None, :] * d) % 2) == 0
        iu, iv = np.nonzero(hit)
        for u, v in zip(U[iu].tolist(), Vb[iv].tolist()):
            n4 = u * u + m * v * v
            b = (n4 // 4 - D) // (m * c)
            C = CircleVec(u, v, b, c, D, d)
            # float prefilter, then the exact test
            X0, Y0 = v / (2 * c), -u / (2 * c * sm)
            if X0 < float(W.x0) - 2 * pad or X0 > float(W.x1) + 2 * pad:
                continue
            if Y0 < float(W.y0) - 2 * pad or Y0 > float(W.y1) + 2 * pad:
                continue
            if curve_meets_window(C, W):
                out.append(C)
    return out


def _lines(spec: ArrangementSpec) -> list[CircleVec]:
    W, d, D = spec.window, spec.ctx.delta, spec.D
    m = -d
    sm = math.sqrt(m)
    out = []
    vmax = math.isqrt(4 * D // m) + 1
    for v in range(-vmax, vmax + 1):
        rest = 4 * D - m * v * v
        if rest < 0:
            continue
        u = math.isqrt(rest)
        if u * u != rest:
            continue
        for uu in {u, -u}:
            if (uu - v * d) % 2:
                continue
            vals = [float(X) * v - uu * float(Y) / sm for X, Y in W.corners()]
            for b in range(math.floor(min(vals)) - 1, math.ceil(max(vals)) + 2):
                C = CircleVec(uu, v, b, 0, D, d)
                if curve_meets_window(C, W):
                    out.append(C)
    return out


def enumerate_window(
    spec: ArrangementSpec, *, scan_cap: int = DEFAULT_SCAN_CAP, threads: int | None = None
) -> Arrangement:
    """All members of S_D with |c| <= cMax whose curve meets the window."""
    size = _scan_size(spec)
    if size > scan_cap:
        raise WindowTooLarge(f"lattice scan of {size} points exceeds cap {scan_cap}")
    threads = threads or worker_count()
    cs = list(range(1, spec.cMax + 1))
    if threads > 1 and len(cs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda c: _circles_for_c(spec, c), cs))
    else:
        parts = [_circles_for_c(spec, c) for c in cs]
    circles = _lines(spec)
    for part in parts:
        circles.extend(part)
        circles.extend(C.negate() for C in part)
    return Arrangement(spec, circles)


# ---------------------------------------------------------------------------
# seeds and dichotomy


def _elements_by_norm(ctx: FieldCtx, bound: int) -> list[OElem]:
    m = ctx.abs_delta
    out = []
    vmax = math.isqrt(4 * bound // m) + 1
    for v in range(-vmax, vmax + 1):
        umax = math.isqrt(max(0, 4 * bound - m * v * v)) + 1
        for u in range(-umax, umax + 1):
            if (u - v * ctx.delta) % 2 == 0 and u * u + m * v * v <= 4 * bound:
                out.append(OElem(u, v, ctx.delta))
    return out


def seed_alpha(ctx: FieldCtx, D: int) -> OElem | None:
    """Smallest-norm alpha in O with N(alpha) = D mod |delta|, or None."""
    if D < 1:
        raise InvalidD(f"D must be a positive integer, got {D}")
    m = ctx.abs_delta
    residues = {ctx.elem(x, y).norm() % m for x in range(m) for y in range(m)}
    if D % m not in residues:
        return None
    bound = m
    while True:
        cands = [a for a in _elements_by_norm(ctx, bound) if (a.norm() - D) % m == 0]
        if cands:
            nmin = min(a.norm() for a in cands)
            best = {units_canonical(ctx, a.to_k()) for a in cands if a.norm() == nmin}
            return max(best, key=lambda z: (z.x, z.t)).to_o()
        bound *= 2


def seed_exists(ctx: FieldCtx, D: int) -> CircleVec | None:
    alpha = seed_alpha(ctx, D)
    if alpha is None:
        return None
    return circle_make(ctx, -alpha, (alpha.norm() - D) // ctx.abs_delta, 1, D)


def dichotomy(ctx: FieldCtx, D: int) -> tuple[str, int]:
    if seed_exists(ctx, D) is None:
        raise EmptyArrangement(f"S_{D} is empty for delta={ctx.delta}")
    h = hilbert_symbol(D, ctx.delta)
    return ("rational-side" if h == 1 else "irrational-side"), h


def ghost_d(ctx: FieldCtx) -> int:
    d = ctx.delta
    num = d * d + 14 * d + 1 if d % 4 else d * d + 12 * d
    if num <= 0:
        raise NonPositive(f"formula gives {num}/16 for delta={d}")
    assert num % 16 == 0, num
    return num // 16


# ---------------------------------------------------------------------------
# circles through a point


def circles_through(ctx: FieldCtx, D: int, alpha: KElem, cmax: int, lines: bool = True) -> list[CircleVec]:
    """All S_D members with |c| <= cmax passing through the point alpha of K."""
    d, m = ctx.delta, ctx.abs_delta
    out = []
    sq = KElem(Fraction(0), Fraction(1), d)
    # |a - c sqrt(delta) alpha|^2 = D: a lies on a circle of radius sqrt(D)
    # around c sqrt(delta) alpha.
    for c in range(-cmax, cmax + 1):
        if c == 0 and not lines:
            continue
        z = sq * alpha * c
        zu, zv = 2 * z.x, 2 * z.t
        rad = math.sqrt(D)
        s = math.sqrt(m)
        vlo = math.floor(float(zv) - 2 * rad / s) - 1
        vhi = math.ceil(float(zv) + 2 * rad / s) + 1
        for v in range(vlo, vhi + 1):
            rest = 4 * D - m * (v - zv) ** 2
            if rest < 0:
                continue
            r = float(rest) ** 0.5
            for u in range(math.floor(float(zu) - r) - 1, math.ceil(float(zu) + r) + 2):
                if (u - v * d) % 2:
                    continue
                if (u - zu) ** 2 + m * (v - zv) ** 2 != 4 * D:
                    continue
                a = OElem(u, v, d)
                if c != 0:
                    bq = Fraction(a.norm() - D, m * c)
                    if bq.denominator != 1:
                        continue
                    C = CircleVec(u, v, int(bq), c, D, d)
                else:
                    if a.norm() != D:
                        continue
                    bq = alpha.x * v - alpha.t * u
                    if bq.denominator != 1:
                        continue
                    C = CircleVec(u, v, int(bq), 0, D, d)
                assert C.side(alpha) == 0
                out.append(C)
    return sorted(set(out), key=lambda C: C.key)


# ---------------------------------------------------------------------------
# orbit exploration


def orbit_bfs(
    seeds: Sequence[CircleVec],
    generators: Sequence[Matrix2] | None = None,
    *,
    cMax: int,
    window: Window | None = None,
    maxDepth: int = 8,
    spec: ArrangementSpec | None = None,
) -> Arrangement:
    """Closure of the seeds under the generators and their inverses, pruned."""
    if not seeds:
        return Arrangement(spec, [])
    d = seeds[0].delta
    ctx = FieldCtx(d)
    gens = list(generators) if generators is not None else standard_generators(ctx)
    gens = gens + [g.inverse() for g in gens]

    def ok(C: CircleVec) -> bool:
        return abs(C.c) <= cMax and (window is None or curve_meets_window(C, window))

    seen = {C for C in seeds if ok(C)}
    frontier = deque((C, 0) for C in sorted(seen, key=lambda C: C.key))
    while frontier:
        C, depth = frontier.popleft()
        if depth >= maxDepth:
            continue
        for g in gens:
            E = mobius_apply(g, C)
            if E not in seen and ok(E):
                seen.add(E)
                frontier.append((E, depth + 1))
    return Arrangement(spec, list(seen))


# ---------------------------------------------------------------------------
# intersection census


def _arrays(circles: Sequence[CircleVec]):
    A = np.array([(C.au, C.av, C.b, C.c) for C in circles], dtype=np.int64).reshape(-1, 4)
    return A


def intersecting_pairs(A: Arrangement | Sequence[CircleVec]):
    """Yield (i, j, n) for i < j with |n| <= 2D, excluding same-curve pairs."""
    circles = list(A.circles if isinstance(A, Arrangement) else A)
    if len(circles) < 2:
        return
    d, D = circles[0].delta, circles[0].D
    arr = _arrays(circles)
    U, V, B, Cc = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]

    def ns(i, js):
        return (U[i] * U[js] - d * V[i] * V[js]) // 2 + d * (B[i] * Cc[js] + Cc[i] * B[js])

    def same_curve(i, js):
        a = (U[js] == U[i]) & (V[js] == V[i]) & (B[js] == B[i]) & (Cc[js] == Cc[i])
        b = (U[js] == -U[i]) & (V[js] == -V[i]) & (B[js] == -B[i]) & (Cc[js] == -Cc[i])
        return a | b

    circ_idx = [i for i, C in enumerate(circles) if C.c != 0]
    line_idx = [i for i, C in enumerate(circles) if C.c == 0]
    is_line = Cc == 0
    all_idx = np.arange(len(circles))
    for i in line_idx:
        # every circle, and each later line once
        js = all_idx[~is_line | (all_idx > i)]
        js = js[js != i]
        if len(js) == 0:
            continue
        n = ns(i, js)
        keep = (np.abs(n) <= 2 * D) & ~same_curve(i, js)
        for j, nn in zip(js[keep].tolist(), n[keep].tolist()):
            yield (i, j, nn) if i < j else (j, i, nn)
    if not circ_idx:
        return
    ci = np.array(circ_idx)
    centers = np.array([[circles[i].center_float().real, circles[i].center_float().imag] for i in circ_idx])
    radii = np.array([circles[i].radius() for i in circ_idx])
    absc = np.abs(Cc[ci])
    tree = cKDTree(centers)
    for k, i in enumerate(circ_idx):
        cand = tree.query_ball_point(centers[k], 2 * radii[k] * (1 + 1e-9) + 1e-12)
        cand = np.array(cand, dtype=np.int64)
        # partners no larger than this circle, each unordered pair once
        sel = (absc[cand] > absc[k]) | ((absc[cand] == absc[k]) & (cand > k))
        js = ci[cand[sel]]
        if len(js) == 0:
            continue
        n = ns(i, js)
        keep = (np.abs(n) <= 2 * D) & ~same_curve(i, js)
        for j, nn in zip(js[keep].tolist(), n[keep].tolist()):
            yield (i, j, nn) if i < j else (j, i, nn)


def angle_census(A: Arrangement | Sequence[CircleVec]) -> Counter:
    return Counter(n for _, _, n in intersecting_pairs(A))
