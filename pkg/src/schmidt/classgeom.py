"""Class-group geometry of S_D: families, covering, repulsion and connectivity."""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .arrangement import Arrangement, Window, circles_through, intersecting_pairs
from .classgrp import ClassElem, ClassGroup, class_of_ideal, subgroup_generated
from .errors import SchmidtError
from .geom import CircleVec, pairing
from .qfield import (
    FieldCtx,
    IdealHNF,
    KElem,
    factor_prime,
    factorize,
    ideal_from_generators,
    ideals_of_norm,
    principal_generator,
    rational_sqrt,
    sign_qsqrt,
)


class UncoveredPoint(SchmidtError):
    pass


class InsufficientData(SchmidtError):
    pass


class DepthExceeded(SchmidtError):
    pass


CHAIN_PADDING = 2


def alpha_ideal(ctx: FieldCtx, alpha: KElem) -> IdealHNF:
    return ideal_from_generators([alpha, ctx.kelem(1)])


def alpha_class(G: ClassGroup, ctx: FieldCtx, alpha: KElem) -> ClassElem:
    return class_of_ideal(G, alpha_ideal(ctx, alpha))


def _unit_angle_ns(ctx: FieldCtx, D: int) -> set[int]:
    """Pairings n at which two circles belong to one extended family."""
    ns = {2 * D, -2 * D}
    if ctx.unit_count == 4:
        ns.add(0)
    if ctx.unit_count == 6:
        ns |= {D, -D}
    return ns


def family_ideals(G: ClassGroup, D: int, x: ClassElem) -> list[IdealHNF]:
    """Integral ideals of norm D whose class times x^2 is trivial."""
    ctx = FieldCtx(G.delta)
    target = G.inv(G.mul(x, x))
    return [I for I in ideals_of_norm(ctx, D) if class_of_ideal(G, I) == target]


def _clusters(circles: Sequence[CircleVec], ns: set[int]) -> list[list[CircleVec]]:
    parent = list(range(len(circles)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            if pairing(circles[i], circles[j]) in ns:
                parent[find(i)] = find(j)
    groups = defaultdict(list)
    for i, C in enumerate(circles):
        groups[find(i)].append(C)
    return sorted((sorted(g, key=lambda C: C.key) for g in groups.values()), key=lambda g: g[0].key)


@dataclass
class FamilyReport:
    alpha: KElem
    D: int
    ideals: list[IdealHNF]
    predicted_cos: list[list[Fraction]]
    observed_clusters: list[list[CircleVec]]
    families: list[list[CircleVec]]
    observed_cross_cos: set[Fraction]
    modulus: int

    @property
    def family_count(self) -> int:
        return len(self.ideals)

    def consistent(self) -> bool:
        if len(self.observed_clusters) != len(self.ideals):
            return False
        k = len(self.ideals)
        return all(
            self.predicted_cos[i][j] in self.observed_cross_cos
            for i in range(k)
            for j in range(k)
            if i != j
        )

    def to_json(self) -> dict:
        return {
            "alpha": [str(self.alpha.x), str(self.alpha.t)],
            "D": self.D,
            "families": len(self.ideals),
            "ideals": [I.to_json() for I in self.ideals],
            "predicted_cos": [[str(v) for v in row] for row in self.predicted_cos],
            "observed_clusters": len(self.observed_clusters),
            "observed_cross_cos": sorted(str(v) for v in self.observed_cross_cos),
            "congruence_modulus": self.modulus,
        }


def families_at(G: ClassGroup, alpha: KElem, D: int, cmax: int | None = None) -> FamilyReport:
    ctx = FieldCtx(G.delta)
    Ia = alpha_ideal(ctx, alpha)
    x = class_of_ideal(G, Ia)
    ideals = family_ideals(G, D, x)
    if not ideals:
        raise UncoveredPoint(f"no integral ideal of norm {D} matches the class of ({alpha}, 1)")
    pred = []
    for I in ideals:
        row = []
        for J in ideals:
            mu = principal_generator((I * J.conj()).scale(Fraction(1, D)))
            assert mu is not None and mu.norm() == 1
            row.append(mu.x)
        pred.append(row)
    modulus = int(1 / Ia.norm)
    if cmax is None:
        cmax = 6 * modulus + 6
    through = circles_through(ctx, D, alpha, cmax)
    ext = _clusters(through, _unit_angle_ns(ctx, D))
    fams = _clusters(through, {2 * D})
    label = {}
    for k, cl in enumerate(ext):
        for C in cl:
            label[C] = k
    cross = set()
    for i, C in enumerate(through):
        for E in through[i + 1 :]:
            if label[C] != label[E]:
                cross.add(Fraction(pairing(C, E), 2 * D))
    return FamilyReport(alpha, D, ideals, pred, ext, fams, cross, modulus)


@dataclass
class CongruenceResult:
    ok: bool
    modulus: int
    witnesses: list = field(default_factory=list)


def family_curvature_congruence(report: FamilyReport) -> CongruenceResult:
    """Curvature indices inside each family agree modulo 1/||(alpha, 1)||."""
    big = [f for f in report.families if len(f) >= 2]
    if not big:
        raise InsufficientData("no family with two or more observed circles")
    m = report.modulus
    bad = []
    for f in big:
        res = {C.c % m for C in f}
        if len(res) > 1:
            bad.append((f[0], sorted(res)))
    return CongruenceResult(not bad, m, bad)


def covered_classes(G: ClassGroup, D: int) -> dict[int, list[IdealHNF]]:
    """Classes x with [I] x^2 trivial for some integral I of norm D."""
    ctx = FieldCtx(G.delta)
    by_class = defaultdict(list)
    for I in ideals_of_norm(ctx, D):
        by_class[class_of_ideal(G, I).index].append(I)
    out = {}
    for i in range(G.h):
        x = ClassElem(i)
        t = G.inv(G.mul(x, x)).index
        if t in by_class:
            out[i] = by_class[t]
    return out


# ---------------------------------------------------------------------------
# repulsion


@dataclass
class RepulsionReport:
    d_sq: Fraction
    checked: int
    excluded: int
    violations: list


def _ge_bound_circle(P: Fraction, S: Fraction, M: Fraction) -> bool:
    """|sqrt(P) - sqrt(S)| >= (sqrt2 - 1) sqrt(M), exactly."""
    X, Y = P + S - 3 * M, 2 * M
    if sign_qsqrt(X, Y, 2) < 0:
        return False
    # (X + Y sqrt2)^2 >= 4 P S
    return sign_qsqrt(X * X + 2 * Y * Y - 4 * P * S, 2 * X * Y, 2) >= 0


def repulsion_check(G: ClassGroup, alpha: KElem, A: Arrangement | Sequence[CircleVec]) -> RepulsionReport:
    circles = list(A.circles if isinstance(A, Arrangement) else A)
    ctx = FieldCtx(G.delta)
    nrm = alpha_ideal(ctx, alpha).norm
    m = ctx.abs_delta
    viol = []
    checked = excluded = 0
    D = circles[0].D if circles else 1
    d_sq = Fraction(m) * nrm * nrm / D
    for C in circles:
        if C.side(alpha) == 0:
            excluded += 1
            continue
        checked += 1
        if C.c == 0:
            g = C.side(alpha)
            dist2 = g * g * m / (4 * D)
            ok = sign_qsqrt(dist2 - 3 * d_sq, 2 * d_sq, 2) >= 0
        else:
            M = min(d_sq, nrm / abs(C.c))
            z = C.center()
            P = (alpha.x - z.x) ** 2 + m * (alpha.t - z.t) ** 2
            ok = _ge_bound_circle(P, C.radius_sq(), M)
        if not ok:
            viol.append(C)
    return RepulsionReport(d_sq, checked, excluded, viol)


# ---------------------------------------------------------------------------
# disc covers


@dataclass
class CoverReport:
    ideal: IdealHNF
    certified_cells: int
    residual_cells: list
    hole_candidates: list
    depth: int
    fully_covered: bool
    residual_history: list = field(default_factory=list)

    def to_json(self) -> dict:
        def q(v):
            return [v.numerator, v.denominator]

        return {
            "ideal": self.ideal.to_json(),
            "certified_cells": self.certified_cells,
            "residual_cells": [
                {
                    "x0n": c[0].numerator, "x0d": c[0].denominator,
                    "x1n": c[1].numerator, "x1d": c[1].denominator,
                    "t0n": c[2].numerator, "t0d": c[2].denominator,
                    "t1n": c[3].numerator, "t1d": c[3].denominator,
                }
                for c in self.residual_cells
            ],
            "hole_candidates": [[q(h.x), q(h.t)] for h in self.hole_candidates],
            "depth": self.depth,
            "fully_covered": self.fully_covered,
            "residual_history": self.residual_history,
        }


class _Discs:
    """Discs centred at lambda in O with radius^2 = ||(lambda) + I||."""

    def __init__(self, ctx: FieldCtx, I: IdealHNF):
        self.ctx, self.I = ctx, I
        self.m = ctx.abs_delta
        self.gens = I.generators()
        self.rmax2 = I.norm
        # integer reach R >= sqrt(norm) in the plane; Rt bounds the t-offset
        self.R = math.isqrt(int(I.norm)) + 1
        self.Rt = math.isqrt(self.R * self.R // self.m) + 1
        self._cache: dict = {}
        self._near: dict = {}

    def radius_sq(self, u: int, v: int) -> Fraction:
        key = self.reduce_key(u, v)
        r = self._cache.get(key)
        if r is None:
            lam = KElem(Fraction(u, 2), Fraction(v, 2), self.ctx.delta)
            r = self.I.norm if self.I.contains(lam) else ideal_from_generators([lam, *self.gens]).norm
            self._cache[key] = r
        return r

    def reduce_key(self, u: int, v: int):
        # (u + v sqrt(delta))/2 = x + y omega
        y = v
        x = (u - v * self.ctx.omega_kind) // 2
        I = self.I
        k = y // I.c
        return ((x - k * I.b) % I.a, y - k * I.c)

    def near(self, x0, x1, t0, t1):
        """(lx, lt, r2) for every disc that can meet the (x, t) box."""
        box = (
            math.floor(2 * (t0 - self.Rt)),
            math.ceil(2 * (t1 + self.Rt)),
            math.floor(2 * (x0 - self.R)),
            math.ceil(2 * (x1 + self.R)),
        )
        out = self._near.get(box)
        if out is None:
            d = self.ctx.delta
            out = [
                (Fraction(u, 2), Fraction(v, 2), self.radius_sq(u, v))
                for v in range(box[0], box[1] + 1)
                for u in range(box[2], box[3] + 1)
                if (u - v * d) % 2 == 0
            ]
            self._near[box] = out
        return out


def _excess(x, t, disc, m):
    lx, lt, r2 = disc
    return (x - lx) ** 2 + m * (t - lt) ** 2 - r2


def _certify(cell, discs: _Discs, m: int) -> bool:
    x0, x1, t0, t1 = cell
    cx, ct = (x0 + x1) / 2, (t0 + t1) / 2
    corners = ((x0, t0), (x0, t1), (x1, t0), (x1, t1))
    scored = sorted((_excess(cx, ct, dk, m), i, dk) for i, dk in enumerate(discs.near(*cell)))
    for e, _, dk in scored:
        if e >= 0:
            # a disc holding the corners holds the centre
            return False
        if all(_excess(x, t, dk, m) < 0 for x, t in corners):
            return True
    return False


def disc_cover_check(
    ctx: FieldCtx,
    I: IdealHNF,
    *,
    max_depth: int = 12,
    init: int = 4,
    max_cells: int = 4096,
    strict: bool = False,
) -> CoverReport:
    """Exact covering test of a fundamental domain of I by the discs.

    The domain is the rectangle [0, a/den) x [0, c/(2 den)) in coordinates
    z = x + t sqrt(delta).  A cell is certified when its four corners lie
    strictly inside a single disc (discs are convex).  Other cells are split
    in four until max_depth, or until more than max_cells remain (an uncovered
    region of positive area); hole candidates are then searched among exact
    boundary intersections inside the residual cells.
    """
    if not I.is_integral():
        raise ValueError("ideal must be integral")
    m = ctx.abs_delta
    discs = _Discs(ctx, I)
    X1, T1 = Fraction(I.a), Fraction(I.c, 2)
    nx = init * I.a
    nt = max(1, math.ceil(T1 * nx * math.isqrt(m) / X1))
    cells = [
        (X1 * i / nx, X1 * (i + 1) / nx, T1 * j / nt, T1 * (j + 1) / nt)
        for i in range(nx)
        for j in range(nt)
    ]
    certified = 0
    history = []
    depth = 0
    while True:
        residual = []
        for cell in cells:
            if _certify(cell, discs, m):
                certified += 1
            else:
                residual.append(cell)
        history.append(len(residual))
        if not residual or depth >= max_depth or len(residual) > max_cells:
            break
        depth += 1
        cells = []
        for x0, x1, t0, t1 in residual:
            xm, tm = (x0 + x1) / 2, (t0 + t1) / 2
            cells += [(x0, xm, t0, tm), (xm, x1, t0, tm), (x0, xm, tm, t1), (xm, x1, tm, t1)]
    holes = _hole_candidates(ctx, I, discs, residual) if 0 < len(residual) <= max_cells else []
    rep = CoverReport(I, certified, residual, holes, depth, not residual, history)
    if residual and strict and not holes:
        raise DepthExceeded(f"{len(residual)} cells left uncertified at depth {depth}")
    return rep


def _circle_pair_points(d1, d2, m):
    """Intersections of two disc boundaries whose coordinates are rational."""
    x1, t1, r1 = d1
    x2, t2, r2 = d2
    # radical axis: A x + B t = Cc
    A = 2 * (x2 - x1)
    B = 2 * m * (t2 - t1)
    Cc = r1 - r2 + x2 * x2 - x1 * x1 + m * (t2 * t2 - t1 * t1)
    if A == 0 and B == 0:
        return []
    pts = []
    if B != 0:
        k0, k1 = Cc / B, -A / B
        qa = 1 + m * k1 * k1
        qb = -2 * x1 + 2 * m * k1 * (k0 - t1)
        qc = x1 * x1 + m * (k0 - t1) ** 2 - r1
        disc = qb * qb - 4 * qa * qc
        s = rational_sqrt(disc) if disc >= 0 else None
        if s is None:
            return []
        for x in {(-qb + s) / (2 * qa), (-qb - s) / (2 * qa)}:
            pts.append((x, k0 + k1 * x))
    else:
        x = Cc / A
        rest = (r1 - (x - x1) ** 2) / m
        s = rational_sqrt(rest) if rest >= 0 else None
        if s is None:
            return []
        for t in {t1 + s, t1 - s}:
            pts.append((x, t))
    return pts


def reduce_mod_ideal(z: KElem, I: IdealHNF) -> KElem:
    """Representative of z + I in the fundamental rectangle."""
    g1, g2 = I.generators()
    z = z - g2 * math.floor(z.t / g2.t)
    return z - g1 * math.floor(z.x / g1.x)


def _boundary_meets(cell, dk, m) -> bool:
    x0, x1, t0, t1 = cell
    lx, lt, r2 = dk
    nx = min(max(lx, x0), x1)
    nt = min(max(lt, t0), t1)
    lo = (nx - lx) ** 2 + m * (nt - lt) ** 2
    hi = max((x - lx) ** 2 + m * (t - lt) ** 2 for x in (x0, x1) for t in (t0, t1))
    return lo <= r2 <= hi


def _hole_candidates(ctx, I, discs, residual) -> list[KElem]:
    m = ctx.abs_delta
    pts = set()
    for cell in residual:
        near = [dk for dk in discs.near(*cell) if _boundary_meets(cell, dk, m)]
        for i in range(len(near)):
            for j in range(i + 1, len(near)):
                for x, t in _circle_pair_points(near[i], near[j], m):
                    if cell[0] <= x <= cell[1] and cell[2] <= t <= cell[3]:
                        pts.add((x, t))
    out = set()
    for x, t in pts:
        z = KElem(x, t, ctx.delta)
        if is_hole(ctx, I, z, discs):
            out.add(reduce_mod_ideal(z, I))
    return sorted(out, key=lambda z: (z.x, z.t))


def is_hole(ctx: FieldCtx, I: IdealHNF, z: KElem, discs: _Discs | None = None) -> bool:
    """z lies on some disc boundary and strictly inside none."""
    discs = discs or _Discs(ctx, I)
    m = ctx.abs_delta
    on = False
    for dk in discs.near(z.x, z.x, z.t, z.t):
        e = _excess(z.x, z.t, dk, m)
        if e < 0:
            return False
        on = on or e == 0
    return on


# ---------------------------------------------------------------------------
# chains


@dataclass
class ChainReport:
    max_chain: int | None
    eligible: int
    failures: list
    worst: list
    rational_only: bool

    def to_json(self) -> dict:
        return {
            "max_chain": self.max_chain,
            "eligible": self.eligible,
            "rational_only": self.rational_only,
            "failures": [list(C.key) for C in self.failures],
            "worst": [[list(C.key) for C in path] for path in self.worst],
        }


def _eligible(C: CircleVec, W: Window | None) -> bool:
    """Positively oriented circle whose padded disc lies inside W."""
    if C.c <= 0:
        return False
    if W is None:
        return True
    z, m = C.center(), -C.delta
    S = CHAIN_PADDING**2 * C.radius_sq()
    for gap in (z.x - W.x0, W.x1 - z.x):
        if gap < 0 or gap * gap < S:
            return False
    # gaps along the imaginary axis are q sqrt(m) + p
    for p, q in ((-W.y0, z.t), (W.y1, -z.t)):
        if sign_qsqrt(p, q, m) < 0 or sign_qsqrt(p * p + q * q * m - S, 2 * p * q, m) < 0:
            return False
    return True


def chain_search(A: Arrangement, nMax: int, *, rational_only: bool = False, worst_k: int = 5) -> ChainReport:
    circles = A.circles
    if not circles:
        return ChainReport(0, 0, [], [], rational_only)
    D, m = circles[0].D, -circles[0].delta
    adj = defaultdict(list)
    for i, j, n in intersecting_pairs(circles):
        if rational_only:
            q = 4 * D * D - n * n
            if q % m or math.isqrt(q // m) ** 2 != q // m:
                continue
        adj[i].append(j)
        adj[j].append(i)
    W = A.spec.window if A.spec is not None else None
    best = 0
    failures, paths = [], []
    elig = [i for i, C in enumerate(circles) if _eligible(C, W)]
    for s in elig:
        target = abs(circles[s].c)
        prev = {s: None}
        q = deque([(s, 0)])
        hit = None
        while q:
            i, k = q.popleft()
            if i != s and 2 * abs(circles[i].c) <= target:
                hit = (i, k)
                break
            if k >= nMax:
                continue
            for j in adj.get(i, ()):
                if j not in prev:
                    prev[j] = i
                    q.append((j, k + 1))
        if hit is None:
            failures.append(circles[s])
            continue
        i, k = hit
        path = []
        while i is not None:
            path.append(circles[i])
            i = prev[i]
        paths.append((k, path[::-1]))
        best = max(best, k)
    paths.sort(key=lambda p: (-p[0], p[1][0].key))
    return ChainReport(
        None if failures else best, len(elig), failures, [p for _, p in paths[:worst_k]], rational_only
    )


# ---------------------------------------------------------------------------
# generation


@dataclass
class GenerationReport:
    h: int
    sub_D: list[int]
    sub_DDelta: list[int]
    evidence: dict = field(default_factory=dict)

    @property
    def D_generates(self) -> bool:
        return len(self.sub_D) == self.h

    @property
    def DDelta_generates(self) -> bool:
        return len(self.sub_DDelta) == self.h

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "subgroup_D": self.sub_D,
            "subgroup_DDelta": self.sub_DDelta,
            "D_generates": self.D_generates,
            "DDelta_generates": self.DDelta_generates,
            "evidence": self.evidence,
        }


def _prime_classes(G: ClassGroup, n: int) -> list[ClassElem]:
    ctx = FieldCtx(G.delta)
    out = []
    for p in sorted(factorize(n)):
        for P in factor_prime(ctx, p).primes:
            out.append(class_of_ideal(G, P))
    return out


def generation_consistency(G: ClassGroup, D: int, evidence: dict | None = None) -> GenerationReport:
    sD = subgroup_generated(G, _prime_classes(G, D))
    sDD = subgroup_generated(G, _prime_classes(G, D * G.delta))
    return GenerationReport(G.h, [x.index for x in sD], [x.index for x in sDD], evidence or {})
