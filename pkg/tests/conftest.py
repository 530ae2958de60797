"""Shared helpers: independent float oracles and random lattice circles."""

import math
import random

import pytest
from hypothesis import HealthCheck, settings

from schmidt.geom import circle_make, mobius_apply, standard_generators
from schmidt.qfield import FieldCtx

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# (delta, D) pairs with S_D nonempty, mixing units, parities and class numbers
FIELD_D = [(-4, 1), (-3, 1), (-39, 4), (-31, 8), (-19, 1), (-20, 10), (-39, 9), (-8, 2), (-24, 6), (-7, 2)]


def seed_circle(ctx: FieldCtx, D: int):
    """First c = 1 member found by direct search over a in O."""
    m = ctx.abs_delta
    for y in range(m + 1):
        for x in range(m + 1):
            a = ctx.elem(x, y)
            if (a.norm() - D) % m == 0:
                return circle_make(ctx, -a, (a.norm() - D) // m, 1)
    return None


def random_circle(ctx, D, rng: random.Random, steps=12):
    gens = standard_generators(ctx)
    gens += [g.inverse() for g in gens]
    C = seed_circle(ctx, D)
    for _ in range(rng.randint(0, steps)):
        C = mobius_apply(rng.choice(gens), C)
    return C.negate() if rng.random() < 0.5 else C


def float_label(C, E, eps=1e-9):
    """Classification from centres and radii alone (both circles finite)."""
    z1, r1 = C.center_float(), C.radius()
    z2, r2 = E.center_float(), E.radius()
    f1, f2 = C.c < 0, E.c < 0
    d = abs(z1 - z2)
    if d < eps and abs(r1 - r2) < eps:
        return "equal" if f1 == f2 else "opposite"
    if d > r1 + r2 + eps:
        rel = "sep"
    elif abs(d - (r1 + r2)) <= eps:
        rel = "ext"
    elif d > abs(r1 - r2) + eps:
        return "crossing"
    elif abs(d - abs(r1 - r2)) <= eps:
        rel = "int12" if r1 < r2 else "int21"
    else:
        rel = "in12" if r1 < r2 else "in21"
    if not f1 and not f2:
        return {
            "sep": "disjoint-exterior", "ext": "tangent-exterior", "int12": "tangent-interior",
            "int21": "tangent-interior", "in12": "nested", "in21": "nested",
        }[rel]
    if f1 and f2:
        return {
            "sep": "covering", "ext": "tangent-covering", "int12": "tangent-interior",
            "int21": "tangent-interior", "in12": "nested", "in21": "nested",
        }[rel]
    if f2:
        rel = {"sep": "sep", "ext": "ext", "int12": "int21", "int21": "int12", "in12": "in21", "in21": "in12"}[rel]
    return {
        "sep": "nested", "ext": "tangent-interior", "int21": "tangent-exterior",
        "int12": "tangent-covering", "in21": "disjoint-exterior", "in12": "covering",
    }[rel]


def float_inside(C, E, eps=1e-9):
    """Curve of C inside the closed interior of E, from centres and radii."""
    z1, r1 = C.center_float(), C.radius()
    z2, r2 = E.center_float(), E.radius()
    d = abs(z1 - z2)
    if E.c > 0:
        return d + r1 <= r2 + eps
    return d >= r1 + r2 - eps or d + r2 <= r1 + eps


def point_xy(z):
    """Plane coordinates of a field element."""
    return float(z.x), float(z.t) * math.sqrt(-z.delta)


@pytest.fixture
def rng():
    return random.Random(20261015)
