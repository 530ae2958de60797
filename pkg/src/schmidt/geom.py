"""Exact oriented-circle model for the arrangements S_D.

A circle is stored as integers ``(a, b, c)`` with ``a = (u + v sqrt(delta))/2``
in O, together with ``D``, subject to ``N(a) + delta*b*c = D``.  Geometrically
the curvature is ``c sqrt(|delta|/D)``, the center is ``a/(c sqrt(delta))`` and
the radius squared is ``D/(c^2 |delta|)``.  The side function on a point
``z = x + t sqrt(delta)`` of K is

    g(z) = c (x^2 + |delta| t^2) - x v + t u + b,

negative on the interior, zero on the circle.  Lines have ``c = 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import SchmidtError, ValidationError
from .qfield import (
    FieldCtx,
    KElem,
    OElem,
    ideal_from_generators,
    rational_sqrt,
)


class NotUnitNorm(ValidationError):
    pass


class MixedArrangement(SchmidtError, ValueError):
    pass


class NotLatticePreserving(SchmidtError, ValueError):
    pass


class NotSdMatrix(SchmidtError, ValueError):
    pass


class NotIntersecting(SchmidtError, ValueError):
    pass


class CoincidentCircles(SchmidtError, ValueError):
    pass


# ---------------------------------------------------------------------------
# points of the extended field


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
PointK = Union[KElem, _Infinity]


# ---------------------------------------------------------------------------
# circles


@dataclass(frozen=True, slots=True)
class CircleVec:
    au: int
    av: int
    b: int
    c: int
    D: int
    delta: int

    @property
    def a(self) -> OElem:
        return OElem(self.au, self.av, self.delta)

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.c, self.b, self.au, self.av)

    def __lt__(self, other: "CircleVec") -> bool:
        return self.key < other.key

    def negate(self) -> "CircleVec":
        return CircleVec(-self.au, -self.av, -self.b, -self.c, self.D, self.delta)

    def is_line(self) -> bool:
        return self.c == 0

    # exact geometry -------------------------------------------------------
    def center(self) -> KElem:
        if self.c == 0:
            raise ValueError("a line has no center")
        return KElem(Fraction(self.av, 2 * self.c), Fraction(-self.au, 2 * self.c * -self.delta), self.delta)

    def radius_sq(self) -> Fraction:
        if self.c == 0:
            raise ValueError("a line has no radius")
        return Fraction(self.D, self.c * self.c * -self.delta)

    def curvature_sq(self) -> Fraction:
        """Signed curvature squared with sign: returns c^2 |delta| / D (use sign of c)."""
        return Fraction(self.c * self.c * -self.delta, self.D)

    def side(self, z: KElem) -> Fraction:
        """Side function g(z); negative inside, zero on the circle."""
        x, t = z.x, z.t
        return self.c * (x * x - self.delta * t * t) - x * self.av + t * self.au + self.b

    def side_sign(self, z: PointK) -> int:
        if z is INF:
            return (self.c > 0) - (self.c < 0)
        g = self.side(z)
        return (g > 0) - (g < 0)

    def contains_point(self, z: PointK) -> bool:
        """True when z lies on the circle."""
        return self.side_sign(z) == 0

    # float geometry -------------------------------------------------------
    def curvature(self) -> float:
        return self.c * math.sqrt(-self.delta / self.D)

    def center_float(self) -> complex:
        s = math.sqrt(-self.delta)
        return complex(self.av / (2 * self.c), -self.au / (2 * self.c * s))

    def radius(self) -> float:
        return math.sqrt(self.D / -self.delta) / abs(self.c)

    def line_float(self) -> tuple[float, float, float]:
        """Coefficients (p, q, r) of the line p*X + q*Y + r = 0 in the plane.

        With X = x and Y = t sqrt|delta| the side function of a line reads
        -v X + (u/sqrt|delta|) Y + b, positive multiples of which are returned.
        """
        s = math.sqrt(-self.delta)
        return (-self.av, self.au / s, float(self.b))

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "D": self.D,
            "au": self.au,
            "av": self.av,
            "b": self.b,
            "c": self.c,
        }

    def __repr__(self):
        return f"Circle(a=({self.au},{self.av}), b={self.b}, c={self.c}; D={self.D}, delta={self.delta})"


def circle_make(ctx: FieldCtx | int, a, b: int, c: int, D: int | None = None) -> CircleVec:
    """Validated constructor; ``a`` is an OElem or a pair (u, v)."""
    delta = ctx if isinstance(ctx, int) else ctx.delta
    if isinstance(a, OElem):
        u, v = a.u, a.v
    else:
        u, v = a
    if (u - v * delta) % 2:
        raise NotUnitNorm(f"a=({u},{v}) is not in O")
    num = u * u - delta * v * v
    val = num // 4 + delta * b * c
    if val <= 0:
        raise NotUnitNorm(f"N(a) + delta*b*c = {val} is not positive")
    if D is not None and val != D:
        raise NotUnitNorm(f"N(a) + delta*b*c = {val} != D = {D}")
    return CircleVec(u, v, b, c, val, delta)


def _check_same(C: CircleVec, E: CircleVec) -> None:
    if C.D != E.D or C.delta != E.delta:
        raise MixedArrangement(f"(delta, D) mismatch: {(C.delta, C.D)} vs {(E.delta, E.D)}")


def pairing(C: CircleVec, E: CircleVec) -> int:
    """n = 2 Re(a conj a') - |delta| (b c' + c b'); equals 2D times the cosine."""
    _check_same(C, E)
    return (C.au * E.au - C.delta * C.av * E.av) // 2 + C.delta * (C.b * E.c + C.c * E.b)


def _time(C: CircleVec) -> int:
    return C.b + C.c


def classify(C: CircleVec, E: CircleVec) -> tuple[str, int]:
    """Exact relative position of two oriented circles.

    Labels: ``equal``, ``opposite`` (same curve, reversed orientation),
    ``crossing``, ``tangent-exterior`` (interiors disjoint), ``tangent-covering``
    (exteriors disjoint), ``tangent-interior`` (one interior inside the other),
    ``disjoint-exterior``, ``covering`` and ``nested``.
    """
    n = pairing(C, E)
    D2 = 2 * C.D
    if n == D2 and C == E:
        return "equal", n
    if n == -D2 and C == E.negate():
        return "opposite", n
    if -D2 < n < D2:
        return "crossing", n
    if n == D2:
        return "tangent-interior", n
    if n > D2:
        return "nested", n
    # n <= -2D: the sum vector is timelike or null; its time sign decides
    t = _time(C) + _time(E)
    if n == -D2:
        return ("tangent-exterior" if t > 0 else "tangent-covering"), n
    return ("disjoint-exterior" if t > 0 else "covering"), n


def intersect_classify(C: CircleVec, E: CircleVec) -> str:
    return classify(C, E)[0]


def interiors_disjoint(C: CircleVec, E: CircleVec) -> bool:
    return classify(C, E)[0] in ("disjoint-exterior", "tangent-exterior", "opposite")


def curve_in_closed_interior(C: CircleVec, E: CircleVec) -> bool:
    """True when the curve of C lies in the closure of the interior of E."""
    n = pairing(C, E)
    D2 = 2 * C.D
    if C == E or C == E.negate():
        return True
    if n >= D2:
        return _time(C) - _time(E) > 0
    if n <= -D2:
        return _time(C) + _time(E) < 0
    return False


# ---------------------------------------------------------------------------
# Moebius action


@dataclass(frozen=True)
class Matrix2:
    """z -> (alpha z + gamma)/(beta z + delta_)."""

    alpha: KElem
    gamma: KElem
    beta: KElem
    delta_: KElem

    @classmethod
    def of(cls, ctx: FieldCtx, alpha, gamma, beta, delta_) -> "Matrix2":
        conv = lambda z: KElem.coerce(z, ctx.delta) if not isinstance(z, (int, Fraction)) else ctx.kelem(z)
        return cls(conv(alpha), conv(gamma), conv(beta), conv(delta_))

    @property
    def field_delta(self) -> int:
        return self.alpha.delta

    def det(self) -> KElem:
        return self.alpha * self.delta_ - self.beta * self.gamma

    def __matmul__(self, o: "Matrix2") -> "Matrix2":
        # rows (alpha, gamma), (beta, delta_)
        return Matrix2(
            self.alpha * o.alpha + self.gamma * o.beta,
            self.alpha * o.gamma + self.gamma * o.delta_,
            self.beta * o.alpha + self.delta_ * o.beta,
            self.beta * o.gamma + self.delta_ * o.delta_,
        )

    def inverse(self) -> "Matrix2":
        d = self.det()
        if d.is_zero():
            raise ValueError("singular matrix")
        inv = d.inverse()
        return Matrix2(self.delta_ * inv, -self.gamma * inv, -self.beta * inv, self.alpha * inv)

    def is_integral(self) -> bool:
        return all(e.is_integral() for e in (self.alpha, self.gamma, self.beta, self.delta_))

    def apply_point(self, z: PointK) -> PointK:
        if z is INF:
            return INF if self.beta.is_zero() else self.alpha / self.beta
        den = self.beta * z + self.delta_
        if den.is_zero():
            return INF
        return (self.alpha * z + self.gamma) / den

    def apply_complex(self, z: complex) -> complex:
        a, g, b, d = (complex(e) for e in (self.alpha, self.gamma, self.beta, self.delta_))
        return (a * z + g) / (b * z + d)


def standard_generators(ctx: FieldCtx) -> list[Matrix2]:
    """T_1, T_omega and S."""
    one, zero = ctx.kelem(1), ctx.kelem(0)
    w = ctx.omega.to_k()
    return [
        Matrix2(one, one, zero, one),
        Matrix2(one, w, zero, one),
        Matrix2(zero, -one, one, zero),
    ]


def mobius_apply(M: Matrix2, C: CircleVec) -> CircleVec:
    """Image of C under the Moebius map M, via the spin action on vectors."""
    d = C.delta
    if M.field_delta != d:
        raise MixedArrangement("matrix and circle over different fields")
    al, ga, be, de = M.alpha, M.gamma, M.beta, M.delta_
    a = C.a.to_k()
    ab = a.conj()
    sq = KElem(Fraction(0), Fraction(1), d)
    bs, cs = sq * C.b, sq * C.c
    a2 = a * al * de.conj() - ab * be.conj() * ga + bs * al * be.conj() + cs * ga * de.conj()
    b2s = a * al * ga.conj() - ab * al.conj() * ga + bs * al.norm() + cs * ga.norm()
    c2s = a * be * de.conj() - ab * be.conj() * de + bs * be.norm() + cs * de.norm()
    absdet = rational_sqrt(M.det().norm())
    if absdet is None or absdet == 0:
        raise NotLatticePreserving("|det M| is not rational")
    a2, b2s, c2s = a2 / absdet, b2s / absdet, c2s / absdet
    b2, c2 = b2s / sq, c2s / sq
    if not (a2.is_integral() and b2.t == 0 and c2.t == 0 and b2.x.denominator == 1 and c2.x.denominator == 1):
        raise NotLatticePreserving(f"image of {C} leaves the lattice")
    ao = a2.to_o()
    out = CircleVec(ao.u, ao.v, int(b2.x), int(c2.x), C.D, d)
    assert ao.norm() + d * out.b * out.c == C.D
    return out


def ideal_norm_of_matrix(M: Matrix2):
    return ideal_from_generators([M.alpha, M.gamma, M.beta, M.delta_]).norm


def circle_from_matrix(M: Matrix2) -> CircleVec:
    """The circle M(R-hat) inside S_D, where D = |det M|^2 / ||(M)||^2."""
    d = M.field_delta
    det = M.det()
    if det.is_zero():
        raise NotSdMatrix("singular matrix")
    nm = ideal_norm_of_matrix(M)
    Dq = det.norm() / (nm * nm)
    if Dq.denominator != 1 or Dq <= 0:
        raise NotSdMatrix(f"|det M|^2/||(M)||^2 = {Dq} is not a positive integer")
    al, ga, be, de = M.alpha, M.gamma, M.beta, M.delta_
    sq = KElem(Fraction(0), Fraction(1), d)
    a = (be.conj() * ga - al * de.conj()) / nm
    b = (al.conj() * ga - al * ga.conj()) / (sq * nm)
    c = (be.conj() * de - be * de.conj()) / (sq * nm)
    if not (a.is_integral() and b.t == 0 and c.t == 0 and b.x.denominator == 1 and c.x.denominator == 1):
        raise NotSdMatrix("matrix image is not an S_D circle")
    ao = a.to_o()
    return circle_make(d, ao, int(b.x), int(c.x), int(Dq))


# ---------------------------------------------------------------------------
# reflection


@dataclass(frozen=True)
class RawVec:
    """Rational vector (au, av, b, c) with its D and field."""

    au: Fraction
    av: Fraction
    b: Fraction
    c: Fraction
    D: int
    delta: int

    @classmethod
    def of(cls, C: CircleVec) -> "RawVec":
        return cls(*(Fraction(x) for x in (C.au, C.av, C.b, C.c)), C.D, C.delta)

    def comps(self):
        return (self.au, self.av, self.b, self.c)

    def qnorm(self) -> Fraction:
        return (self.au ** 2 - self.delta * self.av ** 2) / 4 + self.delta * self.b * self.c

    def pair(self, o: "RawVec") -> Fraction:
        return (self.au * o.au - self.delta * self.av * o.av) / 2 + self.delta * (self.b * o.c + self.c * o.b)

    def is_integral(self) -> bool:
        if any(x.denominator != 1 for x in self.comps()):
            return False
        return (int(self.au) - int(self.av) * self.delta) % 2 == 0

    def to_circle(self) -> CircleVec:
        if not self.is_integral():
            raise NotLatticePreserving("raw vector is not integral")
        return CircleVec(int(self.au), int(self.av), int(self.b), int(self.c), self.D, self.delta)


def reflect_raw(mirror: RawVec, w: RawVec) -> RawVec:
    n = mirror.pair(w)
    k = n / mirror.D
    return RawVec(*(x - k * y for x, y in zip(w.comps(), mirror.comps())), w.D, w.delta)


def reflect(mirror: CircleVec, C: CircleVec) -> tuple[RawVec, bool]:
    """Inversion of C in the mirror circle; flag tells if it stays in S_D."""
    _check_same(mirror, C)
    out = reflect_raw(RawVec.of(mirror), RawVec.of(C))
    return out, out.is_integral()


# ---------------------------------------------------------------------------
# intersection points


@dataclass(frozen=True)
class Intersection:
    points: tuple
    exact: bool


def _line_line(C: CircleVec, E: CircleVec) -> KElem:
    # Cramer on  -v x + u t = -b  for both lines
    det = -C.av * E.au + C.au * E.av
    x = Fraction(-C.b * E.au + C.au * E.b, det)
    t = Fraction(C.av * E.b - C.b * E.av, det)
    return KElem(x, t, C.delta)


def _numeric_points(C: CircleVec, E: CircleVec) -> tuple:
    """Float intersection of two curves in the plane."""
    if C.c == 0 and E.c == 0:
        p1, q1, r1 = C.line_float()
        p2, q2, r2 = E.line_float()
        det = p1 * q2 - p2 * q1
        X = (-r1 * q2 + r2 * q1) / det
        Y = (-p1 * r2 + p2 * r1) / det
        return (complex(X, Y), INF)
    if C.c == 0 or E.c == 0:
        L, K = (C, E) if C.c == 0 else (E, C)
        p, q, r = L.line_float()
        z0, R = K.center_float(), K.radius()
        nrm = math.hypot(p, q)
        dist = (p * z0.real + q * z0.imag + r) / nrm
        foot = z0 - dist * complex(p, q) / nrm
        h = math.sqrt(max(R * R - dist * dist, 0.0))
        tang = complex(-q, p) / nrm
        return (foot + h * tang, foot - h * tang)
    z1, r1 = C.center_float(), C.radius()
    z2, r2 = E.center_float(), E.radius()
    d = abs(z2 - z1)
    aa = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
    h = math.sqrt(max(r1 * r1 - aa * aa, 0.0))
    u = (z2 - z1) / d
    base = z1 + aa * u
    return (base + h * u * 1j, base - h * u * 1j)


def intersection_points(C: CircleVec, E: CircleVec) -> Intersection:
    """Points of C meeting E; exact in K-hat when the cosine allows it."""
    kind, n = classify(C, E)
    if kind in ("equal", "opposite"):
        raise CoincidentCircles("circles coincide")
    D = C.D
    if abs(n) > 2 * D:
        raise NotIntersecting(f"n={n} exceeds 2D={2 * D}")
    d = C.delta
    if C.c == 0 and E.c == 0:
        pts = (INF,) if abs(n) == 2 * D else (_line_line(C, E), INF)
        return Intersection(pts, True)
    m = rational_sqrt(Fraction(4 * D * D - n * n, -d))
    if m is None:
        return Intersection(_numeric_points(C, E), False)
    a, a2 = C.a.to_k(), E.a.to_k()
    sq = KElem(Fraction(0), Fraction(1), d)
    pts = []
    for sgn in (1, -1):
        e = KElem(Fraction(n, 2 * D), sgn * m / (2 * D), d)
        den = (e * (-E.c) + C.c) * sq
        if den.is_zero():
            pts.append(INF)
        else:
            pts.append((a - a2 * e) / den)
    if m == 0:
        pts = pts[:1]
    for p in pts:
        assert C.side_sign(p) == 0 and E.side_sign(p) == 0, (C, E, p)
    return Intersection(tuple(pts), True)


def tangency_point(C: CircleVec, E: CircleVec) -> PointK:
    pts = intersection_points(C, E).points
    assert len(pts) == 1
    return pts[0]
