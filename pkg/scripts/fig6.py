"""Disc cover for the ideal (sqrt(-39)) of Q(sqrt(-39)).

Discs are centred on lambda in O with radius squared the norm of
(lambda) + (sqrt(-39)).  The view [0, 39/2] x [-sqrt(39)/2, sqrt(39)/2] is a
fundamental region for the ideal.  Exact holes found by the certificate are
marked in red; the certificate itself is written as JSON.

    python scripts/fig6.py [outdir]
"""

from __future__ import annotations

import argparse
import json
import math
import time
from fractions import Fraction
from pathlib import Path

from svgkit import disc, document

from schmidt.classgeom import disc_cover_check
from schmidt.qfield import FieldCtx, KElem, ideal_from_generators


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default="figures")
    ap.add_argument("--max-depth", type=int, default=8)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    ctx = FieldCtx(-39)
    m = ctx.abs_delta
    root = ctx.kelem(0, 1)
    I = ideal_from_generators([root])
    s = math.sqrt(m)
    x0, x1, y0, y1 = 0.0, 19.5, -s / 2, s / 2
    scale = 60.0

    def px(x, y):
        return (x - x0) * scale, (y1 - y) * scale

    body = []
    for v in range(-6, 7):
        for u in range(-8, 48):
            if (u - v * ctx.delta) % 2:
                continue
            lam = KElem(Fraction(u, 2), Fraction(v, 2), ctx.delta)
            r = math.sqrt(float(ideal_from_generators([lam, root]).norm))
            x, y = u / 2, v / 2 * s
            if x + r < x0 or x - r > x1 or y + r < y0 or y - r > y1:
                continue
            cx, cy = px(x, y)
            body.append(disc(cx, cy, r * scale, fill="#7fa7d9", stroke="#1f3a5f", opacity=0.35))

    rep = disc_cover_check(ctx, I, max_depth=args.max_depth)
    marks = []
    for h in rep.hole_candidates:
        for dx in (-39, -19.5, 0, 19.5, 39):
            for dy in (-s, -s / 2, 0, s / 2, s):
                hx, hy = float(h.x) + dx, float(h.t) * s + dy
                if x0 - 1e-9 <= hx <= x1 + 1e-9 and y0 - 1e-9 <= hy <= y1 + 1e-9:
                    cx, cy = px(hx, hy)
                    marks.append(disc(cx, cy, 4, fill="#c0392b"))
    svg = document((x1 - x0) * scale, (y1 - y0) * scale, body + sorted(set(marks)))
    (out / "fig6.svg").write_text(svg)
    js = rep.to_json()
    js["seconds"] = round(time.perf_counter() - t0, 1)
    (out / "fig6_cover.json").write_text(json.dumps(js, indent=2, sort_keys=True) + "\n")
    print("holes:", [f"{h.x} + {h.t}*sqrt(-39)" for h in rep.hole_candidates])


if __name__ == "__main__":
    main()
