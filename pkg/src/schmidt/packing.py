"""Coset subarrangements, immediate tangency packings and curvature statistics."""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arrangement import Arrangement, Window, curve_meets_window, intersecting_pairs
from .errors import SchmidtError, ValidationError
from .geom import (
    INF,
    CircleVec,
    circle_make,
    classify,
    intersection_points,
    pairing,
)
from .qfield import IdealHNF, OElem, is_squarefree, sign_qsqrt


class SeedNotInArrangement(SchmidtError):
    pass


class DegenerateSeed(SchmidtError):
    pass


class UnsupportedOrder(ValidationError):
    pass


# ---------------------------------------------------------------------------
# cosets


@dataclass(frozen=True)
class CosetSpec:
    """a in a0 + ideal, b = b0 (mod b_mod), c = c0 (mod c_mod)."""

    ideal: IdealHNF | None = None
    a0: tuple[int, int] = (0, 0)
    b_mod: int = 1
    b0: int = 0
    c_mod: int = 1
    c0: int = 0

    def __post_init__(self):
        if self.ideal is not None and not self.ideal.is_integral():
            raise ValidationError("coset ideal must be integral")
        if self.b_mod < 1 or self.c_mod < 1:
            raise ValidationError("moduli must be positive")
        object.__setattr__(self, "b0", self.b0 % self.b_mod)
        object.__setattr__(self, "c0", self.c0 % self.c_mod)

    def index(self) -> int:
        i = self.ideal.norm if self.ideal is not None else 1
        return int(i) * self.b_mod * self.c_mod

    def contains(self, C: CircleVec) -> bool:
        if (C.b - self.b0) % self.b_mod or (C.c - self.c0) % self.c_mod:
            return False
        if self.ideal is None:
            return True
        da = OElem(C.au - self.a0[0], C.av - self.a0[1], C.delta)
        return self.ideal.contains(da)


def coset_filter(A: Arrangement, spec: CosetSpec) -> Arrangement:
    out = A.subset(spec.contains)
    out.meta["coset"] = {
        "ideal": spec.ideal.to_json() if spec.ideal is not None else None,
        "a0": list(spec.a0),
        "b_mod": spec.b_mod,
        "b0": spec.b0,
        "c_mod": spec.c_mod,
        "c0": spec.c0,
    }
    return out


# ---------------------------------------------------------------------------
# vectorised predicates


class _Vecs:
    """Integer arrays for fast exact pairing against many circles."""

    def __init__(self, circles: Sequence[CircleVec]):
        self.circles = list(circles)
        arr = np.array([(C.au, C.av, C.b, C.c) for C in self.circles], dtype=np.int64).reshape(-1, 4)
        self.U, self.V, self.B, self.C = arr.T
        self.T = self.B + self.C
        if self.circles:
            self.d, self.D = self.circles[0].delta, self.circles[0].D

    def n(self, X: CircleVec) -> np.ndarray:
        d = X.delta
        return (X.au * self.U - d * X.av * self.V) // 2 + d * (X.b * self.C + X.c * self.B)

    def same_curve(self, X: CircleVec) -> np.ndarray:
        eq = (self.U == X.au) & (self.V == X.av) & (self.B == X.b) & (self.C == X.c)
        op = (self.U == -X.au) & (self.V == -X.av) & (self.B == -X.b) & (self.C == -X.c)
        return eq | op

    def disjoint_interiors(self, X: CircleVec) -> np.ndarray:
        """Mask of members whose interior is disjoint from that of X."""
        n = self.n(X)
        return (n <= -2 * X.D) & (self.T + (X.b + X.c) > 0)

    def contains_curve(self, X: CircleVec) -> np.ndarray:
        """Mask of members Y with the curve of X in the closure of int Y."""
        n = self.n(X)
        tx = X.b + X.c
        inside = ((n >= 2 * X.D) & (tx - self.T > 0)) | ((n <= -2 * X.D) & (tx + self.T < 0))
        return inside | self.same_curve(X)


# ---------------------------------------------------------------------------
# packings


@dataclass
class Packing:
    members: list[CircleVec]
    seed: CircleVec
    log: list[str] = field(default_factory=list)
    provisional: set = field(default_factory=set)
    core: Window | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def keys(self) -> set:
        return {C.key for C in self.members}


def in_core(C: CircleVec, core: Window | None) -> bool:
    """True when C is a finite positively curved circle whose disc lies in core."""
    if core is None:
        return True
    if C.c <= 0:
        return False
    z = C.center()
    m = -C.delta
    r2 = C.radius_sq()
    # x-extent: |X0 - x| >= R  <=>  (X0 - x)^2 >= R^2
    X0 = z.x
    if not (core.x0 <= X0 <= core.x1):
        return False
    if (X0 - core.x0) ** 2 < r2 or (core.x1 - X0) ** 2 < r2:
        return False
    # Y0 = t sqrt(m); need y0 + R <= Y0 <= y1 - R, compare squares with signs
    if sign_qsqrt(-core.y0, z.t, m) < 0 or sign_qsqrt(core.y1, -z.t, m) < 0:
        return False
    # (Y0 - y0)^2 >= R^2 and (y1 - Y0)^2 >= R^2
    for y in (core.y0, core.y1):
        P = z.t * z.t * m + y * y - r2
        if sign_qsqrt(P, -2 * y * z.t, m) < 0:
            return False
    return True


def _point_in_open_window(p, W: Window) -> bool:
    if p is INF:
        return False
    m = -p.delta
    if not (W.x0 < p.x < W.x1):
        return False
    return sign_qsqrt(-W.y0, p.t, m) > 0 and sign_qsqrt(W.y1, -p.t, m) > 0


def default_core(A: Arrangement) -> Window | None:
    if A.spec is None:
        return None
    W = A.spec.window
    margin = min(W.x1 - W.x0, W.y1 - W.y0) / 4
    return W.inset(margin)


def tangent_neighbors(A: Arrangement) -> dict[int, list[int]]:
    """Adjacency of exterior tangencies (n = -2D, disjoint interiors)."""
    adj: dict[int, list[int]] = defaultdict(list)
    circles = A.circles
    for i, j, n in intersecting_pairs(circles):
        if n == -2 * circles[i].D and classify(circles[i], circles[j])[0] == "tangent-exterior":
            adj[i].append(j)
            adj[j].append(i)
    return adj


def immediate_packing(
    A: Arrangement, C0: CircleVec, *, core: Window | None = None, max_members: int = 200_000
) -> Packing:
    """Greedy immediate tangency packing of A grown from the seed C0.

    At each tangency point of a member strictly inside the window, the
    exteriorly tangent member of A with the largest interior (minimal signed
    curvature index) joins the packing; if that circle overlaps a current
    member the coset choice admits no such packing and DegenerateSeed is
    raised.
    """
    circles = A.circles
    index = {C: i for i, C in enumerate(circles)}
    if C0 not in index:
        raise SeedNotInArrangement(f"{C0} is not in the arrangement")
    i0 = index[C0]
    vec = _Vecs(circles)
    n0 = vec.n(C0)
    cross = (np.abs(n0) < 2 * C0.D) & ~vec.same_curve(C0)
    if cross.any():
        j = int(np.nonzero(cross)[0][0])
        raise DegenerateSeed(f"seed crosses {circles[j]} (n={int(n0[j])})")
    W = A.spec.window if A.spec is not None else None
    adj = tangent_neighbors(A)
    chosen = [i0]
    in_p = {i0}
    heap = [(C0.key, i0)]
    log = [f"seed {C0.key}"]
    while heap:
        _, i = heapq.heappop(heap)
        C = circles[i]
        groups: dict = defaultdict(list)
        for j in adj.get(i, ()):
            p = intersection_points(C, circles[j]).points[0]
            if W is not None and not _point_in_open_window(p, W):
                continue
            groups[p].append(j)
        for p in sorted(groups, key=lambda q: (q.x, q.t)):
            j = min(groups[p], key=lambda k: (circles[k].c, circles[k].key))
            if j in in_p:
                continue
            E = circles[j]
            pv = _Vecs([circles[k] for k in chosen])
            ok = pv.disjoint_interiors(E)
            if not ok.all():
                bad = chosen[int(np.nonzero(~ok)[0][0])]
                raise DegenerateSeed(
                    f"largest exterior neighbour {E.key} of {C.key} overlaps member {circles[bad].key}"
                )
            chosen.append(j)
            in_p.add(j)
            heapq.heappush(heap, (E.key, j))
            log.append(f"{C.key} -> {E.key}")
            if len(chosen) > max_members:
                raise SchmidtError("packing exceeded member cap")
    members = sorted((circles[k] for k in chosen), key=lambda C: C.key)
    core = core if core is not None else default_core(A)
    prov = {C.key for C in members if not in_core(C, core)}
    return Packing(members, C0, log, prov, core)


@dataclass
class PackingReport:
    disjoint_ok: bool
    cover_ok: bool
    tangency_ok: bool
    overlap_witnesses: list = field(default_factory=list)
    cover_witnesses: list = field(default_factory=list)
    lonely_witnesses: list = field(default_factory=list)
    checked_members: int = 0
    checked_ambient: int = 0

    @property
    def ok(self) -> bool:
        return self.disjoint_ok and self.cover_ok and self.tangency_ok

    def to_json(self) -> dict:
        key = lambda w: [list(x.key) if isinstance(x, CircleVec) else x for x in w]
        return {
            "ok": self.ok,
            "disjoint_ok": self.disjoint_ok,
            "cover_ok": self.cover_ok,
            "tangency_ok": self.tangency_ok,
            "overlap_witnesses": [key(w) for w in self.overlap_witnesses],
            "cover_witnesses": [key(w) for w in self.cover_witnesses],
            "lonely_witnesses": [list(C.key) for C in self.lonely_witnesses],
            "checked_members": self.checked_members,
            "checked_ambient": self.checked_ambient,
        }


def verify_packing(
    P: Packing | Sequence[CircleVec], A: Arrangement, *, core: Window | None = None, max_witnesses: int = 10
) -> PackingReport:
    members = list(P.members if isinstance(P, Packing) else P)
    if core is None:
        core = P.core if isinstance(P, Packing) and P.core is not None else default_core(A)
    vec = _Vecs(members)
    overl, covw, lonely = [], [], []
    for k, X in enumerate(members):
        dis = vec.disjoint_interiors(X)
        dis[k] = True
        for j in np.nonzero(~dis)[0][:max_witnesses].tolist():
            if j > k and len(overl) < max_witnesses:
                overl.append((X, members[j], classify(X, members[j])[0]))
        n = vec.n(X)
        tang = (n == -2 * X.D) & (vec.T + X.b + X.c > 0)
        if not tang.any() and len(lonely) < max_witnesses:
            lonely.append(X)
    checked = 0
    for X in A.circles:
        if not in_core(X, core) and not in_core(X.negate(), core):
            continue
        checked += 1
        cnt = int(vec.contains_curve(X).sum())
        if cnt != 1 and len(covw) < max_witnesses:
            covw.append((X, cnt))
    return PackingReport(
        not overl, not covw, not lonely, overl, covw, lonely, len(members), checked
    )


# ---------------------------------------------------------------------------
# superintegrality


@dataclass
class SuperReport:
    superintegral: bool
    witness: tuple | None = None


def superintegral_test(A: Arrangement | Sequence[CircleVec]) -> SuperReport:
    circles = list(A.circles if isinstance(A, Arrangement) else A)
    if len(circles) < 2:
        return SuperReport(True)
    vec = _Vecs(circles)
    D = circles[0].D
    for i, X in enumerate(circles):
        n = vec.n(X)
        bad = np.nonzero(n % D != 0)[0]
        if len(bad):
            j = int(bad[0])
            return SuperReport(False, (X, circles[j], int(n[j])))
    return SuperReport(True)


# ---------------------------------------------------------------------------
# Baragar-Lautzenheiser seeds


def bl_seed(D: int) -> list[CircleVec]:
    """Four mutually non-overlapping circles of S_D in Q(sqrt(-4D))."""
    if D < 1 or D % 4 not in (1, 2) or not is_squarefree(D):
        raise UnsupportedOrder(f"D={D} needs squarefree D = 1, 2 (mod 4)")
    d = -4 * D
    return [
        circle_make(d, (0, -1), 0, 0, D),
        circle_make(d, (0, 1), 1, 0, D),
        circle_make(d, (0, 1), 0, 1, D),
        circle_make(d, (-4 * D, 1), D, 1, D),
    ]


# ---------------------------------------------------------------------------
# curvature statistics


@dataclass
class CensusRow:
    modulus: int
    residue: int
    count: int
    density: float


def curvature_census(
    P: Packing | Sequence[CircleVec], moduli: Iterable[int], bound: int | None = None
) -> list[CensusRow]:
    """Residues of the curvature index c among members with 0 < c <= bound."""
    members = list(P.members if isinstance(P, Packing) else P)
    if not members:
        raise ValidationError("empty packing")
    cs = [C.c for C in members if C.c > 0 and (bound is None or C.c <= bound)]
    top = bound if bound is not None else max(cs, default=0)
    present = set(cs)
    rows = []
    for m in moduli:
        if m < 1:
            raise ValidationError("moduli must be positive")
        for r in range(m):
            cnt = sum(1 for c in cs if c % m == r)
            if cnt == 0:
                continue
            slots = [k for k in range(1, top + 1) if k % m == r]
            hit = sum(1 for k in slots if k in present)
            rows.append(CensusRow(m, r, cnt, hit / len(slots) if slots else 0.0))
    return rows


def represented_residues(rows: Sequence[CensusRow]) -> dict[int, set[int]]:
    out: dict[int, set[int]] = defaultdict(set)
    for r in rows:
        out[r.modulus].add(r.residue)
    return dict(out)
