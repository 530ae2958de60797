import io
import json
import math
import random
import re
from fractions import Fraction

import pytest

from schmidt import FieldCtx
from schmidt.arrangement import Arrangement, ArrangementSpec, Window, curve_meets_window, enumerate_window
from schmidt.packing import CensusRow, CosetSpec, coset_filter, immediate_packing
from schmidt.render import PALETTES, EmptyRender, RenderStyle, render_svg
from schmidt.serialize import InvariantViolation, ParseError, read_jsonl, write_census_csv, write_jsonl


@pytest.fixture(scope="module")
def big():
    A = enumerate_window(ArrangementSpec(FieldCtx(-31), 8, Window.parse("-1,-1,1,1"), 20))
    assert len(A.circles) >= 1000
    return A


@pytest.fixture(scope="module")
def s9_packing():
    ctx = FieldCtx(-39)
    A = enumerate_window(ArrangementSpec(ctx, 9, Window.parse("-1,-1/2,1,3/2"), 40))
    seed = next(C for C in A.circles if C.key == (1, 0, -6, 0))
    return A, immediate_packing(A, seed)


def _roundtrip(obj):
    buf = io.StringIO()
    write_jsonl(obj, buf)
    text = buf.getvalue()
    return text, read_jsonl(io.StringIO(text))


def test_arrangement_roundtrip(big):
    text, B = _roundtrip(big)
    assert [C.key for C in B.circles] == [C.key for C in big.circles]
    assert B.spec.window == big.spec.window and B.spec.cMax == big.spec.cMax
    assert _roundtrip(B)[0] == text


def test_roundtrip_ignores_input_order(big):
    shuffled = list(big.circles)
    random.Random(3).shuffle(shuffled)
    A2 = Arrangement(big.spec, shuffled, {})
    assert _roundtrip(A2)[0] == _roundtrip(big)[0]


def test_packing_roundtrip(s9_packing):
    _, P = s9_packing
    text, Q = _roundtrip(P)
    assert {C.key for C in Q.members} == {C.key for C in P.members}
    assert Q.seed == P.seed
    assert Q.provisional == P.provisional
    assert _roundtrip(Q)[0] == text


def _lines(obj):
    buf = io.StringIO()
    write_jsonl(obj, buf)
    return buf.getvalue().splitlines()


def test_invariant_violation_line(big):
    lines = _lines(big)
    rec = json.loads(lines[5])
    rec["b"] += 1
    lines[5] = json.dumps(rec)
    with pytest.raises(InvariantViolation) as e:
        read_jsonl(io.StringIO("\n".join(lines)))
    assert e.value.line == 6


def test_header_delta_mismatch(big):
    lines = _lines(big)
    h = json.loads(lines[0])
    h["delta"] = -35
    lines[0] = json.dumps(h)
    with pytest.raises(ParseError) as e:
        read_jsonl(io.StringIO("\n".join(lines)))
    assert e.value.line == 2


@pytest.mark.parametrize(
    "mutate, line",
    [
        (lambda L: L.__setitem__(3, "{not json"), 4),
        (lambda L: L.__setitem__(3, L[3].replace('"c"', '"cc"')), 4),
        (lambda L: L.__setitem__(0, L[0].replace('"format":1', '"format":9')), 1),
        (lambda L: L.pop(), None),
    ],
)
def test_parse_errors(big, mutate, line):
    lines = _lines(big)
    mutate(lines)
    with pytest.raises(ParseError) as e:
        read_jsonl(io.StringIO("\n".join(lines)))
    if line is not None:
        assert e.value.line == line


def test_unknown_fields_preserved(big):
    lines = _lines(big)
    h = json.loads(lines[0])
    h["note"] = "hello"
    lines[0] = json.dumps(h)
    rec = json.loads(lines[2])
    rec["tag"] = [1, 2]
    lines[2] = json.dumps(rec)
    A = read_jsonl(io.StringIO("\n".join(lines)))
    out = _lines(A)
    assert json.loads(out[0])["note"] == "hello"
    assert json.loads(out[2])["tag"] == [1, 2]
    assert _lines(read_jsonl(io.StringIO("\n".join(out)))) == out


def test_census_csv():
    rows = [CensusRow(4, 1, 3, 1 / 3), CensusRow(4, 3, 0, 0.0)]
    buf = io.StringIO()
    write_census_csv(rows, buf)
    assert buf.getvalue() == "modulus,residue,count,density\n4,1,3,0.333333333333\n4,3,0,0.000000000000\n"


# rendering

_CIRCLE = re.compile(r'<circle cx="([-0-9.]+)" cy="([-0-9.]+)" r="([-0-9.]+)"')


def test_svg_deterministic(s9_packing):
    A, P = s9_packing
    style = RenderStyle(A.spec.window, highlight=frozenset(C.key for C in P.members))
    s1 = render_svg(A, style)
    shuffled = list(A.circles)
    random.Random(1).shuffle(shuffled)
    assert render_svg(shuffled, style) == s1
    assert s1.count("<circle") + s1.count("<path") > len(P.members)


def test_svg_highlight_drawn_last(s9_packing):
    A, P = s9_packing
    style = RenderStyle(A.spec.window, highlight=frozenset(C.key for C in P.members), palette="ink")
    hl = PALETTES["ink"]["highlight"]
    body = [ln for ln in render_svg(A, style).splitlines() if ln.startswith(("<circle", "<path"))]
    flags = [f'stroke="{hl}"' in ln for ln in body]
    first = flags.index(True)
    assert all(flags[first:]) and sum(flags) > 0


def test_svg_centers_within_tolerance(s9_packing):
    A, _ = s9_packing
    W = A.spec.window
    svg = render_svg(A, RenderStyle(W, scale=100))
    got = [tuple(map(float, m)) for m in _CIRCLE.findall(svg)]
    # elements follow canonical key order of the positive-c orientation
    reps = sorted({C.key: C for C in A.circles if C.c > 0 and curve_meets_window(C, W)}.items())
    assert len(got) == len(reps) > 100
    s3 = math.sqrt(39)
    for (cx, cy, r), (_, C) in zip(got, reps):
        z = C.center()
        ex = float(z.x - W.x0) * 100
        ey = (float(W.y1) - float(z.t) * s3) * 100
        er = math.sqrt(float(C.radius_sq())) * 100
        assert math.isclose(cx, ex, rel_tol=1e-10, abs_tol=1e-9)
        assert math.isclose(cy, ey, rel_tol=1e-10, abs_tol=1e-9)
        assert math.isclose(r, er, rel_tol=1e-10)


def test_min_radius_cutoff(s9_packing):
    A, _ = s9_packing
    full = render_svg(A, RenderStyle(A.spec.window))
    cut = render_svg(A, RenderStyle(A.spec.window, min_radius=Fraction(1, 10)))
    assert cut.count("<circle") < full.count("<circle")
    for r in _CIRCLE.findall(cut):
        assert float(r[2]) >= 200 / 10 - 1e-9


def test_empty_render():
    W = Window.parse("0,0,1,1")
    with pytest.raises(EmptyRender):
        render_svg([], RenderStyle(W))
    A = enumerate_window(ArrangementSpec(FieldCtx(-4), 1, W, 1))
    circles = [C for C in A.circles if C.c != 0]
    render_svg(circles, RenderStyle(W))
    with pytest.raises(EmptyRender):
        render_svg(circles, RenderStyle(W, min_radius=10))


def test_lines_are_clipped_paths():
    W = Window.parse("0,0,1,1")
    A = enumerate_window(ArrangementSpec(FieldCtx(-4), 1, W, 2))
    svg = render_svg(A, RenderStyle(W, scale=100))
    paths = re.findall(r'<path d="M ([-0-9.]+) ([-0-9.]+) L ([-0-9.]+) ([-0-9.]+)"', svg)
    assert paths
    for p in paths:
        assert all(-1e-9 <= float(v) <= 100 + 1e-9 for v in p)


def test_coset_render_stable():
    A = enumerate_window(ArrangementSpec(FieldCtx(-39), 9, Window.parse("-1,-1/2,1,3/2"), 20))
    sub = coset_filter(A, CosetSpec(b_mod=2))
    style = RenderStyle(A.spec.window, stroke_rule="proportional")
    assert render_svg(sub, style) == render_svg(sub, style)
