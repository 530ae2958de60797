import cmath
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from schmidt.geom import (
    INF,
    CircleVec,
    CoincidentCircles,
    Matrix2,
    MixedArrangement,
    NotIntersecting,
    NotLatticePreserving,
    NotSdMatrix,
    NotUnitNorm,
    RawVec,
    circle_from_matrix,
    circle_make,
    classify,
    curve_in_closed_interior,
    intersect_classify,
    intersection_points,
    mobius_apply,
    pairing,
    reflect,
    reflect_raw,
    standard_generators,
)
from schmidt.qfield import FieldCtx

from conftest import FIELD_D, float_inside, float_label, point_xy, random_circle

cases = st.sampled_from(FIELD_D)
seeds = st.integers(0, 10**9)


def float_side(C, z: complex) -> float:
    m = -C.delta
    x, t = z.real, z.imag / math.sqrt(m)
    return C.c * (x * x + m * t * t) - x * C.av + t * C.au + C.b


def sample_points(C, k=3):
    if C.c == 0:
        p, q, r = C.line_float()
        nrm = math.hypot(p, q)
        foot = complex(-p * r, -q * r) / nrm**2
        tang = complex(-q, p) / nrm
        return [foot + s * tang for s in (-1.3, 0.4, 2.1)[:k]]
    z0, R = C.center_float(), C.radius()
    return [z0 + R * cmath.exp(1j * (0.3 + 2.1 * i)) for i in range(k)]


@given(cases, seeds)
def test_classification_matches_float_oracle(fd, s):
    d, D = fd
    ctx = FieldCtx(d)
    rng = random.Random(s)
    C = random_circle(ctx, D, rng)
    E = random_circle(ctx, D, rng) if rng.random() < 0.6 else mobius_apply(rng.choice(standard_generators(ctx)), C)
    if C.c == 0 or E.c == 0 or abs(C.c) > 500 or abs(E.c) > 500:
        return
    assert intersect_classify(C, E) == float_label(C, E)
    assert curve_in_closed_interior(C, E) == float_inside(C, E)


@given(cases, seeds)
def test_pairing_quantization(fd, s):
    d, D = fd
    ctx = FieldCtx(d)
    rng = random.Random(s)
    C, E = random_circle(ctx, D, rng), random_circle(ctx, D, rng)
    n = pairing(C, E)
    assert isinstance(n, int)
    assert n == pairing(E, C)
    assert pairing(C, C) == 2 * D
    if d % 2 == 0:
        assert n % 2 == 0
    if intersect_classify(C, E) == "crossing":
        assert abs(n) < 2 * D


@given(cases, seeds)
def test_mobius_maps_points_and_orientation(fd, s):
    d, D = fd
    ctx = FieldCtx(d)
    rng = random.Random(s)
    gens = standard_generators(ctx)
    C = random_circle(ctx, D, rng, steps=6)
    M = rng.choice(gens)
    for _ in range(rng.randint(0, 3)):
        M = M @ rng.choice(gens)
    E = mobius_apply(M, C)
    assert E.D == D and E.delta == d
    scale = 1 + abs(E.c) + abs(E.b) + abs(E.au) + abs(E.av)
    for z in sample_points(C):
        try:
            w = M.apply_complex(z)
        except ZeroDivisionError:
            continue
        if abs(w) > 1e6:
            continue
        assert abs(float_side(E, w)) < 1e-6 * scale * (1 + abs(w) ** 2)
    # an interior point maps to an interior point
    if C.c != 0:
        z0 = C.center_float() if C.c > 0 else C.center_float() + 3 * C.radius()
        try:
            w = M.apply_complex(z0)
        except ZeroDivisionError:
            return
        if abs(w) < 1e6 and abs(float_side(E, w)) > 1e-6 * scale:
            assert float_side(E, w) < 0


@given(cases, seeds)
def test_mobius_composition_and_invariance(fd, s):
    d, D = fd
    ctx = FieldCtx(d)
    rng = random.Random(s)
    gens = standard_generators(ctx)
    M, N = rng.choice(gens), rng.choice(gens)
    C, E = random_circle(ctx, D, rng, 5), random_circle(ctx, D, rng, 5)
    assert mobius_apply(M @ N, C) == mobius_apply(M, mobius_apply(N, C))
    assert mobius_apply(M.inverse(), mobius_apply(M, C)) == C
    assert pairing(mobius_apply(M, C), mobius_apply(M, E)) == pairing(C, E)


def test_circle_from_identity_matrix():
    ctx = FieldCtx(-39)
    one, zero = ctx.kelem(1), ctx.kelem(0)
    R = circle_from_matrix(Matrix2(one, zero, zero, one))
    assert (R.au, R.av, R.b, R.c, R.D) == (-2, 0, 0, 0, 1)
    with pytest.raises(NotSdMatrix):
        circle_from_matrix(Matrix2(one, one, one, one))


def test_circle_from_matrix_is_image_of_real_line():
    ctx = FieldCtx(-7)
    w = ctx.omega.to_k()
    M = Matrix2.of(ctx, 2, w, 1, 3)
    C = circle_from_matrix(M)
    for x in (-2.0, 0.3, 1.7):
        z = M.apply_complex(complex(x, 0))
        assert abs(float_side(C, z)) < 1e-9 * (1 + abs(z) ** 2) * (1 + abs(C.b) + abs(C.c))


@given(cases, seeds)
def test_intersection_points_lie_on_both(fd, s):
    d, D = fd
    ctx = FieldCtx(d)
    rng = random.Random(s)
    C, E = random_circle(ctx, D, rng, 6), random_circle(ctx, D, rng, 6)
    kind, n = classify(C, E)
    if kind in ("equal", "opposite"):
        with pytest.raises(CoincidentCircles):
            intersection_points(C, E)
        return
    if abs(n) > 2 * D:
        with pytest.raises(NotIntersecting):
            intersection_points(C, E)
        return
    res = intersection_points(C, E)
    for p in res.points:
        if p is INF:
            assert C.c == 0 and E.c == 0
            continue
        if res.exact:
            assert C.side(p) == 0 and E.side(p) == 0
            z = complex(*point_xy(p))
        else:
            z = p
        sc = 1 + abs(z) ** 2
        assert abs(float_side(C, z)) < 1e-6 * sc * (1 + abs(C.c) + abs(C.b))
        assert abs(float_side(E, z)) < 1e-6 * sc * (1 + abs(E.c) + abs(E.b))
    q = Fraction(4 * D * D - n * n, -d)
    rational = math.isqrt(q.numerator) ** 2 == q.numerator and math.isqrt(q.denominator) ** 2 == q.denominator
    assert res.exact == (rational or (C.c == 0 and E.c == 0))


def test_tangent_pair_single_point():
    ctx = FieldCtx(-4)
    C = circle_make(ctx, (0, 1), 0, 1)  # unit-ish circle through 0
    E = C.negate()
    for M in standard_generators(ctx):
        F = mobius_apply(M, C)
        if abs(pairing(C, F)) == 2:
            pts = intersection_points(C, F).points
            assert len(pts) == 1
    with pytest.raises(CoincidentCircles):
        intersection_points(C, E)


def test_circle_make_validates():
    with pytest.raises(NotUnitNorm):
        circle_make(-39, (1, 0), 0, 1)  # parity
    with pytest.raises(NotUnitNorm):
        circle_make(-39, (0, 0), 1, 1)  # N(a) + delta b c <= 0
    with pytest.raises(NotUnitNorm):
        circle_make(-39, (-4, 0), 0, 1, 5)
    C = circle_make(-39, (-4, 0), 0, 1, 4)
    assert C.to_json() == {"delta": -39, "D": 4, "au": -4, "av": 0, "b": 0, "c": 1}
    with pytest.raises(MixedArrangement):
        pairing(C, circle_make(-39, (-6, 0), 0, 1))


def test_center_radius_exact_against_float():
    C = circle_make(-39, (-6, 0), 0, 1)  # D = 9
    z = C.center()
    assert complex(*point_xy(z)) == pytest.approx(C.center_float())
    assert float(C.radius_sq()) == pytest.approx(C.radius() ** 2)
    assert C.side(z) < 0


@pytest.mark.parametrize("d,D", [(-8, 2), (-20, 4), (-24, 24), (-20, 5), (-39, 39)])
def test_reflection_is_involution_and_integral_when_D_divides(d, D):
    ctx = FieldCtx(d)
    rng = random.Random(D)
    for _ in range(40):
        X, Y = random_circle(ctx, D, rng, 6), random_circle(ctx, D, rng, 6)
        R, ok = reflect(X, Y)
        assert R.qnorm() == D
        assert reflect_raw(RawVec.of(X), R) == RawVec.of(Y)
        assert ok == (pairing(X, Y) % D == 0)
        if ok:
            assert R.to_circle().D == D


def test_reflection_leaves_lattice_for_odd_pairing():
    ctx = FieldCtx(-39)
    rng = random.Random(3)
    found = False
    for _ in range(300):
        X, Y = random_circle(ctx, 4, rng, 6), random_circle(ctx, 4, rng, 6)
        if pairing(X, Y) % 4:
            R, ok = reflect(X, Y)
            assert not ok
            with pytest.raises(NotLatticePreserving):
                R.to_circle()
            found = True
    assert found
