"""S_39 over Q(sqrt(-39)) near (1 + sqrt(-39))/4 with forbidden zones.

Each uncovered point z of K in view gets a red dot of radius
(sqrt 2 - 1) min(d, sqrt(d / r)) with r = 1200, the largest curvature drawn.
A repulsion report for the focal point is written next to the SVG.

    python scripts/fig5.py [outdir] [--cmax N]
"""

from __future__ import annotations

import argparse
import json
import math
import time
from fractions import Fraction
from pathlib import Path

from svgkit import disc, overlay

from schmidt.arrangement import ArrangementSpec, Window, enumerate_window
from schmidt.classgeom import alpha_class, alpha_ideal, covered_classes, repulsion_check
from schmidt.classgrp import class_group
from schmidt.qfield import FieldCtx
from schmidt.render import RenderStyle, render_svg

DELTA, D = -39, 39
WINDOW = "0,1.4,1/2,1.72"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default="figures")
    ap.add_argument("--cmax", type=int, default=1200, help="curvature index bound (equals curvature since D = |delta|)")
    ap.add_argument("--qmax", type=int, default=24, help="largest denominator of dotted points")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    ctx = FieldCtx(DELTA)
    G = class_group(ctx)
    W = Window.parse(WINDOW)
    A = enumerate_window(ArrangementSpec(ctx, D, W, args.cmax))
    scale = 2000
    style = RenderStyle(W, scale=scale, stroke_rule="proportional", stroke_width=0.01, stroke_cap=0.5)
    svg = render_svg(A, style)

    cov = covered_classes(G, D)
    m = ctx.abs_delta
    r = args.cmax * math.sqrt(m / D)
    dots, seen = [], set()
    for q in range(1, args.qmax + 1):
        for v in range(-2 * q, 2 * q + 1):
            for u in range(-2 * q, 2 * q + 1):
                z = ctx.from_basis(u, v, q)
                x, y = float(z.x), float(z.t) * math.sqrt(m)
                if z in seen or not (W.x0 <= z.x <= W.x1 and float(W.y0) <= y <= float(W.y1)):
                    continue
                seen.add(z)
                if alpha_class(G, ctx, z).index in cov:
                    continue
                nrm = alpha_ideal(ctx, z).norm
                d = math.sqrt(m * float(nrm) ** 2 / D)
                rad = (math.sqrt(2) - 1) * min(d, math.sqrt(d / r))
                px, py = (x - float(W.x0)) * scale, (float(W.y1) - y) * scale
                dots.append(disc(px, py, rad * scale, fill="#c0392b", opacity=0.8))
    (out / "fig5.svg").write_text(overlay(svg, dots))

    focal = ctx.from_basis(0, 1, 2)
    rep = repulsion_check(G, focal, A)
    report = {
        "circles": len(A.circles),
        "dots": len(dots),
        "focal": [str(focal.x), str(focal.t)],
        "d_sq": str(rep.d_sq),
        "checked": rep.checked,
        "excluded": rep.excluded,
        "violations": [list(C.key) for C in rep.violations],
        "seconds": round(time.perf_counter() - t0, 1),
    }
    (out / "fig5_repulsion.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(json.dumps(report, sort_keys=True))


if __name__ == "__main__":
    main()
