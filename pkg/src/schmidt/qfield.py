"""Exact arithmetic in an imaginary quadratic field K = Q(sqrt(delta)).

Elements of the ring of integers O are stored as integer pairs ``(u, v)``
meaning ``(u + v*sqrt(delta))/2``; general field elements carry rational
coordinates ``x + t*sqrt(delta)``.  Fractional ideals are kept in Hermite
normal form over the basis ``(1, omega)`` where ``omega = (s + sqrt(delta))/2``
and ``s = delta mod 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd, isqrt
from typing import Iterable, Sequence

from .errors import SchmidtError, ValidationError


class NotFundamental(ValidationError):
    pass


class ZeroIdeal(SchmidtError, ValueError):
    pass


class NotPrime(ValidationError):
    pass


class ZeroArgument(ValidationError):
    pass


# ---------------------------------------------------------------------------
# small integer helpers


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorisation of ``|n|``; fine at desk scale."""
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == {n: 1}


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None."""
    q = Fraction(q)
    if q < 0:
        return None
    a, b = q.numerator, q.denominator
    ra, rb = isqrt(a), isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


def kronecker(d: int, p: int) -> int:
    """Kronecker symbol (d|p) for a prime p."""
    if p == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    r = d % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def sign_qsqrt(p: Fraction | int, q: Fraction | int, m: int) -> int:
    """Exact sign of ``p + q*sqrt(m)`` for rationals p, q and integer m >= 0."""
    if q == 0 or m == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if p > 0 and q > 0:
        return 1
    if p < 0 and q < 0:
        return -1
    d = p * p - q * q * m
    if p > 0:
        return (d > 0) - (d < 0)
    return (d < 0) - (d > 0)


# ---------------------------------------------------------------------------
# the field


@dataclass(frozen=True)
class FieldCtx:
    delta: int

    def __post_init__(self):
        d = self.delta
        if d >= 0 or d % 4 not in (0, 1):
            raise NotFundamental(f"{d} is not a negative discriminant")
        if d % 4 == 1:
            ok = is_squarefree(d)
        else:
            m = d // 4
            ok = m % 4 in (2, 3) and is_squarefree(m)
        if not ok:
            raise NotFundamental(f"{d} is not fundamental")

    @property
    def abs_delta(self) -> int:
        return -self.delta

    @property
    def omega_kind(self) -> int:
        """``s`` with omega = (s + sqrt(delta))/2: 1 if delta = 1 mod 4 else 0."""
        return self.delta % 2

    @property
    def unit_count(self) -> int:
        return {-4: 4, -3: 6}.get(self.delta, 2)

    @property
    def omega_norm(self) -> int:
        s = self.omega_kind
        return (s * s - self.delta) // 4

    @property
    def omega(self) -> "OElem":
        return OElem(self.omega_kind, 1, self.delta)

    @property
    def sqrt_delta(self) -> "OElem":
        return OElem(0, 2, self.delta)

    def elem(self, x: int, y: int = 0) -> "OElem":
        """The element ``x + y*omega``."""
        return OElem(2 * x + y * self.omega_kind, y, self.delta)

    def kelem(self, x, t=0) -> "KElem":
        """The element ``x + t*sqrt(delta)`` for rationals x, t."""
        return KElem(Fraction(x), Fraction(t), self.delta)

    def from_basis(self, x, y, q=1) -> "KElem":
        """``(x + y*omega)/q`` -- the command-line alpha grammar."""
        s = self.omega_kind
        q = Fraction(q)
        return KElem((Fraction(x) + Fraction(y * s, 2)) / q, Fraction(y, 2) / q, self.delta)

    @cached_property
    def units(self) -> tuple["OElem", ...]:
        d = self.delta
        if d == -4:
            return tuple(OElem(u, v, d) for u, v in ((2, 0), (0, 1), (-2, 0), (0, -1)))
        if d == -3:
            return tuple(
                OElem(u, v, d)
                for u, v in ((2, 0), (1, 1), (-1, 1), (-2, 0), (-1, -1), (1, -1))
            )
        return (OElem(2, 0, d), OElem(-2, 0, d))

    def one_ideal(self) -> "IdealHNF":
        return IdealHNF(1, 0, 1, 1, self.delta)


def make_field(delta: int) -> FieldCtx:
    return FieldCtx(delta)


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True, slots=True)
class OElem:
    """``(u + v*sqrt(delta))/2`` with ``u = v*delta (mod 2)``."""

    u: int
    v: int
    delta: int

    def __post_init__(self):
        if (self.u - self.v * self.delta) % 2:
            raise ValueError(f"({self.u}, {self.v}) is not integral for delta={self.delta}")

    def __add__(self, o):
        if isinstance(o, int):
            o = OElem(2 * o, 0, self.delta)
        if isinstance(o, KElem):
            return self.to_k() + o
        return OElem(self.u + o.u, self.v + o.v, self.delta)

    __radd__ = __add__

    def __neg__(self):
        return OElem(-self.u, -self.v, self.delta)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, int):
            return OElem(self.u * o, self.v * o, self.delta)
        if isinstance(o, KElem):
            return self.to_k() * o
        d = self.delta
        return OElem(
            (self.u * o.u + d * self.v * o.v) // 2,
            (self.u * o.v + self.v * o.u) // 2,
            d,
        )

    __rmul__ = __mul__

    def conj(self) -> "OElem":
        return OElem(self.u, -self.v, self.delta)

    def norm(self) -> int:
        return (self.u * self.u - self.delta * self.v * self.v) // 4

    def trace(self) -> int:
        return self.u

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def to_k(self) -> "KElem":
        return KElem(Fraction(self.u, 2), Fraction(self.v, 2), self.delta)

    def basis_coords(self) -> tuple[int, int]:
        """Integer coordinates ``(x, y)`` with self = x + y*omega."""
        s = self.delta % 2
        return (self.u - self.v * s) // 2, self.v

    def __complex__(self):
        return complex(self.u / 2, self.v * (-self.delta) ** 0.5 / 2)

    def __repr__(self):
        return f"OElem(({self.u}{self.v:+d}*sqrt({self.delta}))/2)"


@dataclass(frozen=True, slots=True)
class KElem:
    """``x + t*sqrt(delta)`` with rational x, t."""

    x: Fraction
    t: Fraction
    delta: int

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "t", Fraction(self.t))

    @classmethod
    def coerce(cls, z, delta: int | None = None) -> "KElem":
        if isinstance(z, KElem):
            return z
        if isinstance(z, OElem):
            return z.to_k()
        if delta is None:
            raise TypeError("delta needed to coerce a rational")
        return cls(Fraction(z), Fraction(0), delta)

    def _other(self, o) -> "KElem":
        if isinstance(o, (int, Fraction)):
            return KElem(Fraction(o), Fraction(0), self.delta)
        return KElem.coerce(o)

    def __add__(self, o):
        o = self._other(o)
        return KElem(self.x + o.x, self.t + o.t, self.delta)

    __radd__ = __add__

    def __neg__(self):
        return KElem(-self.x, -self.t, self.delta)

    def __sub__(self, o):
        return self + (-self._other(o))

    def __rsub__(self, o):
        return self._other(o) - self

    def __mul__(self, o):
        o = self._other(o)
        return KElem(
            self.x * o.x + self.delta * self.t * o.t,
            self.x * o.t + self.t * o.x,
            self.delta,
        )

    __rmul__ = __mul__

    def inverse(self) -> "KElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return KElem(self.x / n, -self.t / n, self.delta)

    def __truediv__(self, o):
        return self * self._other(o).inverse()

    def __rtruediv__(self, o):
        return self._other(o) * self.inverse()

    def __eq__(self, o):
        if isinstance(o, OElem):
            o = o.to_k()
        if isinstance(o, (int, Fraction)):
            return self.t == 0 and self.x == o
        if not isinstance(o, KElem):
            return NotImplemented
        return self.x == o.x and self.t == o.t and self.delta == o.delta

    def __hash__(self):
        return hash((self.x, self.t, self.delta))

    def conj(self) -> "KElem":
        return KElem(self.x, -self.t, self.delta)

    def norm(self) -> Fraction:
        return self.x * self.x - self.delta * self.t * self.t

    def trace(self) -> Fraction:
        return 2 * self.x

    def is_zero(self) -> bool:
        return self.x == 0 and self.t == 0

    def is_integral(self) -> bool:
        u, v = 2 * self.x, 2 * self.t
        return (
            u.denominator == 1
            and v.denominator == 1
            and (u.numerator - v.numerator * self.delta) % 2 == 0
        )

    def to_o(self) -> OElem:
        if not self.is_integral():
            raise ValueError(f"{self} is not in O")
        return OElem(int(2 * self.x), int(2 * self.t), self.delta)

    @property
    def den(self) -> int:
        """Least positive integer ``d`` with ``d*self`` in O."""
        u, v = 2 * self.x, 2 * self.t
        g = u.denominator * v.denominator // gcd(u.denominator, v.denominator)
        uu, vv = u * g, v * g
        if (int(uu) - int(vv) * self.delta) % 2:
            g *= 2
        return g

    @property
    def num(self) -> OElem:
        return (self * self.den).to_o()

    def basis_coords(self) -> tuple[Fraction, Fraction]:
        """Rational ``(x, y)`` with self = x + y*omega."""
        s = self.delta % 2
        y = 2 * self.t
        return self.x - y * s / 2, y

    def real(self) -> Fraction:
        return self.x

    def imag_over_root(self) -> Fraction:
        """Imaginary part divided by sqrt(|delta|)."""
        return self.t

    def __complex__(self):
        return complex(float(self.x), float(self.t) * (-self.delta) ** 0.5)

    def __repr__(self):
        return f"KElem({self.x} + {self.t}*sqrt({self.delta}))"


def units_canonical(ctx: FieldCtx, z: KElem) -> KElem:
    """Unit multiple of z with argument in [0, 2*pi/w), w = number of units."""
    if z.is_zero():
        return z
    w = ctx.unit_count
    for e in ctx.units:
        y = z * e
        u, v = y.x, y.t  # Re = u, Im = v*sqrt|delta|
        if w == 2 and (v > 0 or (v == 0 and u > 0)):
            return y
        if w == 4 and u > 0 and v >= 0:
            return y
        # w == 6: tan(arg) = v*sqrt3/u < sqrt3
        if w == 6 and u > 0 and 0 <= v < u:
            return y
    raise AssertionError("no canonical unit multiple found")


# ---------------------------------------------------------------------------
# ideals


def _hnf2(vectors: Iterable[tuple[int, int]]) -> tuple[int, int, int]:
    """HNF of the Z-span of integer vectors (x, y): ``a*e1 + Z*(b, c)``.

    Returns (a, b, c) with c > 0, 0 <= b < a; raises if the span has rank < 2.
    """
    a = 0
    bx, c = 0, 0
    for x, y in vectors:
        if y == 0:
            a = gcd(a, x)
            continue
        g, s, t = xgcd(c, y)
        zero_x = (y // g) * bx - (c // g) * x
        bx, c = s * bx + t * x, g
        a = gcd(a, zero_x)
    if a == 0 or c == 0:
        raise ZeroIdeal("lattice is not of full rank")
    return a, bx % a, c


@dataclass(frozen=True)
class IdealHNF:
    """The fractional ideal ``(1/den) * (a*Z + (b + c*omega)*Z)``."""

    a: int
    b: int
    c: int
    den: int
    delta: int

    @property
    def norm(self) -> Fraction:
        return Fraction(self.a * self.c, self.den * self.den)

    def is_integral(self) -> bool:
        return self.den == 1

    def generators(self) -> tuple[KElem, KElem]:
        ctx = FieldCtx(self.delta)
        return (
            ctx.kelem(Fraction(self.a, self.den)),
            ctx.elem(self.b, self.c).to_k() * Fraction(1, self.den),
        )

    def conj(self) -> "IdealHNF":
        return ideal_from_generators([g.conj() for g in self.generators()])

    def __mul__(self, o: "IdealHNF") -> "IdealHNF":
        gs = [x * y for x in self.generators() for y in o.generators()]
        return ideal_from_generators(gs)

    def scale(self, z) -> "IdealHNF":
        """The ideal z*self for a nonzero field element or rational z."""
        z = KElem.coerce(z, self.delta) if not isinstance(z, (int, Fraction)) else KElem(
            Fraction(z), Fraction(0), self.delta
        )
        return ideal_from_generators([g * z for g in self.generators()])

    def inverse(self) -> "IdealHNF":
        return self.conj().scale(1 / self.norm)

    def __truediv__(self, o: "IdealHNF") -> "IdealHNF":
        return self * o.inverse()

    def __add__(self, o: "IdealHNF") -> "IdealHNF":
        return ideal_from_generators(list(self.generators()) + list(o.generators()))

    def contains(self, z) -> bool:
        z = KElem.coerce(z, self.delta)
        x, y = z.basis_coords()
        x, y = x * self.den, y * self.den
        if x.denominator != 1 or y.denominator != 1:
            return False
        x, y = int(x), int(y)
        if y % self.c:
            return False
        return (x - (y // self.c) * self.b) % self.a == 0

    def __contains__(self, z) -> bool:
        return self.contains(z)

    def is_principal(self) -> bool:
        return principal_generator(self) is not None

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "den": self.den}

    def sort_key(self):
        return (self.den, self.a, self.c, self.b)

    def __repr__(self):
        d = f"/{self.den}" if self.den != 1 else ""
        return f"Ideal[{self.a}, {self.b}+{self.c}w]{d}"


def ideal_from_generators(gens: Sequence) -> IdealHNF:
    gens = [KElem.coerce(g) for g in gens]
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise ZeroIdeal("all generators are zero")
    delta = gens[0].delta
    ctx = FieldCtx(delta)
    w = ctx.omega.to_k()
    L = reduce(lambda acc, g: acc * g.den // gcd(acc, g.den), gens, 1)
    vecs = []
    for g in gens:
        for h in (g * L, g * L * w):
            x, y = h.basis_coords()
            vecs.append((int(x), int(y)))
    a, b, c = _hnf2(vecs)
    k = gcd(gcd(gcd(a, b), c), L)
    return IdealHNF(a // k, (b // k) % (a // k), c // k, L // k, delta)


def _omega_roots_mod(ctx: FieldCtx, p: int) -> list[int]:
    s, n = ctx.omega_kind, ctx.omega_norm
    return [t for t in range(p) if (t * t - s * t + n) % p == 0]


@dataclass(frozen=True)
class Splitting:
    p: int
    kind: str  # "split" | "inert" | "ramified"
    primes: tuple[IdealHNF, ...]


def factor_prime(ctx: FieldCtx, p: int) -> Splitting:
    if not is_prime(p):
        raise NotPrime(p)
    k = kronecker(ctx.delta, p)
    if k == -1:
        return Splitting(p, "inert", (IdealHNF(p, 0, p, 1, ctx.delta),))
    roots = _omega_roots_mod(ctx, p)
    primes = tuple(IdealHNF(p, (-t) % p, 1, 1, ctx.delta) for t in roots)
    if k == 0:
        assert len(primes) == 1
        return Splitting(p, "ramified", primes)
    assert len(primes) == 2
    return Splitting(p, "split", primes)


def ideal_power(I: IdealHNF, e: int) -> IdealHNF:
    out = FieldCtx(I.delta).one_ideal()
    if e < 0:
        I, e = I.inverse(), -e
    for _ in range(e):
        out = out * I
    return out


def ideals_of_norm(ctx: FieldCtx, n: int) -> list[IdealHNF]:
    if n < 1:
        raise ValueError("norm must be positive")
    choices: list[list[IdealHNF]] = [[ctx.one_ideal()]]
    for p, e in factorize(n).items():
        sp = factor_prime(ctx, p)
        if sp.kind == "inert":
            if e % 2:
                return []
            opts = [ideal_power(sp.primes[0], e // 2)]
        elif sp.kind == "ramified":
            opts = [ideal_power(sp.primes[0], e)]
        else:
            P, Q = sp.primes
            opts = [ideal_power(P, i) * ideal_power(Q, e - i) for i in range(e + 1)]
        choices.append(opts)
    out = [ctx.one_ideal()]
    for opts in choices[1:]:
        out = [I * J for I in out for J in opts]
    return sorted(out, key=IdealHNF.sort_key)


def _gauss_reduce(e1: KElem, e2: KElem) -> tuple[KElem, KElem]:
    """Lagrange-Gauss reduction of a rank-two lattice under the norm form."""

    def dot(p, q):
        return (p * q.conj()).x  # Re(p * conj q)

    n1, n2 = e1.norm(), e2.norm()
    if n2 < n1:
        e1, e2, n1, n2 = e2, e1, n2, n1
    while True:
        mu = round(dot(e1, e2) / n1)
        e2 = e2 - e1 * mu
        n2 = e2.norm()
        if n2 >= n1:
            return e1, e2
        e1, e2, n1, n2 = e2, e1, n2, n1


def principal_generator(I: IdealHNF) -> KElem | None:
    """Canonical generator of I when principal, else None."""
    ctx = FieldCtx(I.delta)
    g1, g2 = I.generators()
    short, _ = _gauss_reduce(g1, g2)
    if short.norm() != I.norm:
        return None
    return units_canonical(ctx, short)


# ---------------------------------------------------------------------------
# Hilbert symbol over Q


def _valuation(n: int, p: int) -> tuple[int, int]:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k, n


def _legendre(u: int, p: int) -> int:
    return 1 if pow(u % p, (p - 1) // 2, p) == 1 else -1


def local_hilbert(a: int, b: int, p: int | None) -> int:
    """Local symbol (a, b)_p for nonzero integers; ``p=None`` is the real place."""
    if p is None:
        return -1 if a < 0 and b < 0 else 1
    al, u = _valuation(a, p)
    be, v = _valuation(b, p)
    if p == 2:
        eps = lambda z: ((z - 1) // 2) % 2
        om = lambda z: ((z * z - 1) // 8) % 2
        e = eps(u) * eps(v) + al * om(v) + be * om(u)
        return -1 if e % 2 else 1
    s = (-1) ** (al * be * ((p - 1) // 2))
    if be % 2:
        s *= _legendre(u, p)
    if al % 2:
        s *= _legendre(v, p)
    return s


def hilbert_places(a: int, b: int) -> list[int | None]:
    ps = set(factorize(a)) | set(factorize(b)) | {2}
    return [None] + sorted(ps)


def hilbert_symbol(a, b) -> int:
    """+1 iff a*x^2 + b*y^2 = z^2 has a nonzero rational solution."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ZeroArgument("Hilbert symbol of zero")
    # clear denominators by squares
    ai = a.numerator * a.denominator
    bi = b.numerator * b.denominator
    for p in hilbert_places(ai, bi):
        if local_hilbert(ai, bi, p) == -1:
            return -1
    return 1
