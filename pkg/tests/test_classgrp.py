from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from schmidt.classgrp import (
    ClassElem,
    QForm,
    class_group,
    class_of_ideal,
    compose,
    form_of_ideal,
    ideal_of_form,
    is_square,
    reduced_forms,
    subgroup_generated,
    two_torsion,
)
from schmidt.qfield import FieldCtx, factor_prime, ideal_from_generators

DELTAS = [-3, -4, -7, -8, -15, -19, -20, -23, -24, -31, -35, -39, -40, -47, -52, -55, -56, -71, -84, -87, -95, -104, -120, -420]


def _jacobi(a, n):
    a %= n
    r = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                r = -r
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            r = -r
        a %= n
    return r if n == 1 else 0


def _kron(d, n):
    """Kronecker symbol (d/n) for n >= 1."""
    r = 1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            r = -r
    return r * _jacobi(d, n) if n > 1 else r


def class_number_oracle(d):
    """Dirichlet's formula h = -(w / 2|d|) * sum chi(n) n."""
    w = {-3: 6, -4: 4}.get(d, 2)
    s = sum(_kron(d, n) * n for n in range(1, -d))
    h = Fraction(-w * s, 2 * -d)
    assert h.denominator == 1
    return int(h)


@pytest.mark.parametrize("d", DELTAS)
def test_class_number_matches_dirichlet_formula(d):
    G = class_group(FieldCtx(d))
    assert G.h == class_number_oracle(d)


@pytest.mark.parametrize("d", DELTAS)
def test_group_axioms(d):
    G = class_group(FieldCtx(d))
    els = [ClassElem(i) for i in range(G.h)]
    for x in els:
        assert G.mul(x, G.identity) == x
        assert G.mul(x, G.inv(x)) == G.identity
        for y in els:
            assert G.mul(x, y) == G.mul(y, x)
            for z in els[:4]:
                assert G.mul(G.mul(x, y), z) == G.mul(x, G.mul(y, z))
    prod = 1
    for k in G.structure:
        prod *= k
    assert prod == G.h
    assert len(subgroup_generated(G, G.generators)) == G.h


@pytest.mark.parametrize("d", DELTAS)
def test_ideal_to_form_is_a_homomorphism(d):
    ctx = FieldCtx(d)
    G = class_group(ctx)
    primes = []
    for p in (2, 3, 5, 7, 11, 13):
        primes += factor_prime(ctx, p).primes
    for I in primes:
        for J in primes:
            assert class_of_ideal(G, I * J) == G.mul(class_of_ideal(G, I), class_of_ideal(G, J))
        assert class_of_ideal(G, I.conj()) == G.inv(class_of_ideal(G, I))
    for f in G.elements:
        assert form_of_ideal(ideal_of_form(ctx, f)).reduce() == f


@pytest.mark.parametrize("d", DELTAS)
def test_reduced_forms_are_reduced(d):
    fs = reduced_forms(d)
    assert len(set(fs)) == len(fs)
    for f in fs:
        assert f.disc == d and f.is_reduced()
    assert fs[0].A == 1


@given(st.sampled_from(DELTAS), st.integers(-50, 50), st.integers(-50, 50))
def test_reduction_preserves_class(d, k, j):
    G = class_group(FieldCtx(d))
    f = G.elements[abs(k) % G.h]
    # act by x -> x + k y, then y -> y + j x
    A, B, C = f.A, f.B, f.C
    B, C = B + 2 * k * A, A * k * k + B * k + C
    A, B = A + B * j + C * j * j, B + 2 * C * j
    g = QForm(A, B, C)
    assert g.disc == d
    assert g.reduce() == f


def test_structures():
    for d, h, struct in [(-39, 4, [4]), (-31, 3, [3]), (-19, 1, []), (-84, 4, [2, 2]), (-420, 8, [2, 2, 2])]:
        G = class_group(FieldCtx(d))
        assert G.h == h
        assert sorted(G.structure) == sorted(struct)


def test_delta_minus39_generated_by_prime_over_two():
    ctx = FieldCtx(-39)
    G = class_group(ctx)
    p2 = ideal_from_generators([ctx.elem(2), ctx.omega])
    x = class_of_ideal(G, p2)
    assert G.order(x) == 4
    assert G.to_json() == {"h": 4, "factors": [4], "generator_forms": [[2, 1, 5]]}


@pytest.mark.parametrize("d", DELTAS)
def test_ramified_primes_give_two_torsion(d):
    ctx = FieldCtx(d)
    G = class_group(ctx)
    ram = []
    for p in range(2, -d + 1):
        if -d % p == 0 and all(p % q for q in range(2, p)):
            ram += factor_prime(ctx, p).primes
    # genus theory: ramified primes span exactly the 2-torsion
    assert subgroup_generated(G, [class_of_ideal(G, P) for P in ram]) == two_torsion(G)
    squares = Counter(is_square(G, ClassElem(i)) for i in range(G.h))
    assert squares[True] * len(two_torsion(G)) == G.h


def test_compose_identity():
    for d in DELTAS:
        G = class_group(FieldCtx(d))
        for f in G.elements:
            assert compose(f, G.elements[0]) == f
