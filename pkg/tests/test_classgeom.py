import math
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from schmidt.arrangement import ArrangementSpec, Window, enumerate_window
from schmidt.classgeom import (
    InsufficientData,
    UncoveredPoint,
    _ge_bound_circle,
    alpha_class,
    chain_search,
    covered_classes,
    disc_cover_check,
    families_at,
    family_curvature_congruence,
    generation_consistency,
    is_hole,
    reduce_mod_ideal,
    repulsion_check,
)
from schmidt.classgrp import ClassElem, class_group, class_of_ideal, two_torsion
from schmidt.geom import intersect_classify, pairing
from schmidt.qfield import FieldCtx, KElem, ideal_from_generators, ideals_of_norm

from conftest import point_xy


@pytest.fixture(scope="module")
def g39():
    ctx = FieldCtx(-39)
    return ctx, class_group(ctx)


def test_families_at_origin(g39):
    ctx, G = g39
    rep = families_at(G, ctx.kelem(0), 4)
    assert rep.family_count == 1 and len(rep.observed_clusters) == 1
    assert rep.modulus == 1
    assert family_curvature_congruence(rep).ok


def test_families_two_with_cosine(g39):
    ctx, G = g39
    alpha = ctx.from_basis(0, 1, 2)
    assert alpha == KElem(Fraction(1, 4), Fraction(1, 4), -39)
    rep = families_at(G, alpha, 4)
    assert rep.family_count == 2 and len(rep.observed_clusters) == 2
    assert rep.consistent()
    assert Fraction(5, 8) in rep.observed_cross_cos
    assert {abs(v) for row in rep.predicted_cos for v in row} == {1, Fraction(5, 8)}
    cong = family_curvature_congruence(rep)
    assert cong.ok and cong.modulus == 2


def test_family_members_pass_through_alpha_and_are_mutually_tangent(g39):
    ctx, G = g39
    alpha = ctx.from_basis(0, 1, 2)
    rep = families_at(G, alpha, 4)
    for fam in rep.families:
        for C in fam:
            assert C.side(alpha) == 0
        for X in fam:
            for Y in fam:
                assert pairing(X, Y) == 8


def test_uncovered_point(g39):
    ctx, G = g39
    with pytest.raises(UncoveredPoint):
        families_at(G, ctx.from_basis(0, 1, 2), 39)


def test_congruence_insufficient_data(g39):
    ctx, G = g39
    rep = families_at(G, ctx.from_basis(0, 1, 2), 4)
    lone = replace(rep, families=[f[:1] for f in rep.families])
    with pytest.raises(InsufficientData):
        family_curvature_congruence(lone)


@pytest.mark.parametrize("d", [-15, -20, -39, -55, -56, -84, -120, -31])
def test_covered_classes_union_of_two_torsion_cosets(d):
    ctx = FieldCtx(d)
    G = class_group(ctx)
    tt = [x.index for x in two_torsion(G)]
    for D in range(1, 40):
        cov = set(covered_classes(G, D))
        for x in cov:
            for t in tt:
                assert G.table[x][t] in cov
        # oracle: the definition applied to every ideal directly
        want = set()
        for I in ideals_of_norm(ctx, D):
            k = class_of_ideal(G, I).index
            want |= {x for x in range(G.h) if G.table[x][x] == G.inv(ClassElem(k)).index}
        assert cov == want


def test_covered_classes_examples(g39):
    ctx, G = g39
    assert set(covered_classes(G, 39)) == {x.index for x in two_torsion(G)}
    assert set(covered_classes(G, 4)) == set(range(4))
    assert set(covered_classes(G, 1)) == {x.index for x in two_torsion(G)}


def test_covered_classes_match_circles_through(g39):
    """A point is on a circle iff its class is covered (checked up to a curvature bound)."""
    ctx, G = g39
    from schmidt.arrangement import circles_through

    cov = set(covered_classes(G, 39))
    for q in (2, 3, 4):
        for x in range(q):
            for y in range(q):
                a = ctx.from_basis(x, y, q)
                hit = bool(circles_through(ctx, 39, a, 40))
                if alpha_class(G, ctx, a).index not in cov:
                    assert not hit


def _float_repulsion_ok(alpha, C, d_sq):
    m = -C.delta
    x, y = point_xy(alpha)
    if C.c == 0:
        p, q, r = C.line_float()
        dist = abs(p * x + q * y + r) / math.hypot(p, q)
        bound = (math.sqrt(2) - 1) * math.sqrt(float(d_sq))
    else:
        z, R = C.center_float(), C.radius()
        dist = abs(abs(complex(x, y) - z) - R)
        r = abs(C.c) * math.sqrt(m / C.D)
        d = math.sqrt(float(d_sq))
        bound = (math.sqrt(2) - 1) * min(d, math.sqrt(d / r))
    return dist - bound


def test_repulsion_exact_matches_float(g39):
    ctx, G = g39
    alpha = ctx.from_basis(0, 1, 2)
    A = enumerate_window(ArrangementSpec(ctx, 39, Window.parse("-1/4,-1/4,3/4,3/4"), 40))
    rep = repulsion_check(G, alpha, A)
    assert rep.d_sq == Fraction(1, 4)  # d = 1/2
    assert rep.checked >= 500 and not rep.violations
    margins = [_float_repulsion_ok(alpha, C, rep.d_sq) for C in A.circles]
    assert min(margins) > -1e-9


@given(
    st.fractions(0, 50, max_denominator=60),
    st.fractions(0, 50, max_denominator=60),
    st.fractions(0, 10, max_denominator=60),
)
def test_exact_distance_comparison_matches_float(P, S, M):
    want = abs(math.sqrt(P) - math.sqrt(S)) - (math.sqrt(2) - 1) * math.sqrt(M)
    if abs(want) > 1e-9:
        assert _ge_bound_circle(P, S, M) == (want > 0)


def test_repulsion_excludes_members_through_alpha(g39):
    ctx, G = g39
    alpha = ctx.from_basis(0, 1, 2)
    A = enumerate_window(ArrangementSpec(ctx, 4, Window.parse("0,1,1/2,2"), 10))
    rep = repulsion_check(G, alpha, A)
    assert rep.excluded == sum(1 for C in A.circles if C.side(alpha) == 0) > 0


def test_disc_cover_gaussian_certified():
    ctx = FieldCtx(-4)
    rep = disc_cover_check(ctx, ctx.one_ideal())
    assert rep.fully_covered and rep.depth <= 4 and not rep.hole_candidates


@pytest.mark.parametrize("d", [-3, -7, -8, -11])
def test_disc_cover_euclidean_fields(d):
    ctx = FieldCtx(d)
    assert disc_cover_check(ctx, ctx.one_ideal()).fully_covered


def test_disc_cover_holes_delta_minus39(g39):
    ctx, _ = g39
    I = ideal_from_generators([ctx.kelem(0, 1)])
    rep = disc_cover_check(ctx, I, max_depth=8)
    h1 = reduce_mod_ideal(KElem(Fraction(39, 4), Fraction(1, 4), -39), I)
    h2 = reduce_mod_ideal(KElem(Fraction(39, 4), Fraction(-1, 4), -39), I)
    assert set(rep.hole_candidates) == {h1, h2}
    for h in rep.hole_candidates:
        assert is_hole(ctx, I, h)
    # residual cells shrink onto the holes
    size = max(c[1] - c[0] for c in rep.residual_cells)
    assert size <= Fraction(I.a, 4 * I.a) / 2**7
    for c in rep.residual_cells:
        near = False
        for h in rep.hole_candidates:
            for shift in (0, I.a):
                hx = h.x + shift
                if c[0] - size <= hx <= c[1] + size and c[2] - size <= h.t <= c[3] + size:
                    near = True
        assert near, c
    assert rep.residual_history[-1] == rep.residual_history[-2]


def test_is_hole_oracle_on_grid(g39):
    """Brute force: points of a fine grid that are holes are exactly the two cosets."""
    ctx, _ = g39
    I = ideal_from_generators([ctx.kelem(0, 1)])
    found = set()
    for xn in range(0, 39 * 4):
        for tn in range(0, 2):
            z = KElem(Fraction(xn, 4), Fraction(tn, 4), -39)
            if is_hole(ctx, I, z):
                found.add(reduce_mod_ideal(z, I))
    assert found == {KElem(Fraction(39, 4), Fraction(1, 4), -39), KElem(Fraction(117, 4), Fraction(1, 4), -39)}


def test_disc_cover_norm4_reports(g39):
    """The three norm-4 covers are emitted; under this disc rule each leaves a gap of positive area."""
    ctx, _ = g39
    from schmidt.classgeom import _Discs, _excess

    ideals = ideals_of_norm(ctx, 4)
    assert len(ideals) == 3
    for I in ideals:
        rep = disc_cover_check(ctx, I, max_depth=6)
        js = rep.to_json()
        assert js["ideal"] == I.to_json()
        assert not rep.fully_covered
        assert rep.residual_history[-1] > 2 * rep.residual_history[-2]
    # exact witness: a point of K strictly outside every disc for the ideal (2)
    I2 = ideal_from_generators([ctx.kelem(2)])
    z = KElem(Fraction(0), Fraction(287, 400), -39)
    ds = _Discs(ctx, I2)
    assert all(_excess(z.x, z.t, dk, 39) > 0 for dk in ds.near(z.x, z.x, z.t, z.t))


def test_chain_search_small_bound(g39):
    ctx, _ = g39
    A = enumerate_window(ArrangementSpec(ctx, 4, Window.parse("-1,0,2,3/2"), 30))
    rep = chain_search(A, 8)
    assert rep.eligible > 0 and not rep.failures
    assert rep.max_chain is not None and rep.max_chain <= 3
    for path in rep.worst:
        for X, Y in zip(path, path[1:]):
            assert intersect_classify(X, Y) in ("crossing", "tangent-exterior", "tangent-interior", "tangent-covering")
        assert 2 * abs(path[-1].c) <= abs(path[0].c)


def test_chain_search_line_adjacent():
    ctx = FieldCtx(-4)
    A = enumerate_window(ArrangementSpec(ctx, 1, Window.parse("-3,-3,3,3"), 3))
    rep = chain_search(A, 4)
    assert not rep.failures and rep.max_chain == 1


def test_generation_consistency(g39):
    ctx, G = g39
    r4 = generation_consistency(G, 4)
    assert r4.D_generates and r4.DDelta_generates
    r39 = generation_consistency(G, 39)
    assert set(r39.sub_D) == {x.index for x in two_torsion(G)}
    assert not r39.DDelta_generates
    r1 = generation_consistency(class_group(FieldCtx(-19)), 1)
    assert r1.D_generates


@pytest.mark.parametrize("d,D", [(-15, 2), (-20, 2), (-39, 4), (-24, 3), (-35, 5)])
def test_cover_implies_generation(d, D):
    """Full disc coverage for every norm-D ideal should come with generation by primes over D."""
    ctx = FieldCtx(d)
    G = class_group(ctx)
    ideals = ideals_of_norm(ctx, D)
    if not ideals:
        pytest.skip("no ideal of this norm")
    covered = all(disc_cover_check(ctx, I, max_depth=7).fully_covered for I in ideals)
    if covered:
        assert generation_consistency(G, D).D_generates
