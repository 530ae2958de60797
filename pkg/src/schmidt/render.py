"""Deterministic SVG output for arrangements and packings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .arrangement import Arrangement, Window, curve_meets_window
from .errors import SchmidtError, ValidationError
from .geom import CircleVec
from .packing import Packing

PRECISION = 12

PALETTES = {
    "mono": {"stroke": "#000000", "highlight": "#c0392b", "background": "#ffffff"},
    "ink": {"stroke": "#1f3a5f", "highlight": "#d35400", "background": "#ffffff"},
    "night": {"stroke": "#d0d8e8", "highlight": "#f1c40f", "background": "#101820"},
}


class EmptyRender(SchmidtError):
    pass


@dataclass(frozen=True)
class RenderStyle:
    """Rendering parameters.

    ``stroke_rule`` is ``"constant"`` (width ``stroke_width`` in pixels) or
    ``"proportional"`` (``stroke_width`` times the radius in pixels, capped at
    ``stroke_cap``).
    """

    view_box: Window
    scale: float = 200.0
    min_radius: Fraction = Fraction(0)
    stroke_rule: str = "constant"
    stroke_width: float = 0.5
    stroke_cap: float = 2.0
    highlight: frozenset = field(default_factory=frozenset)
    palette: str = "mono"

    def __post_init__(self):
        object.__setattr__(self, "min_radius", Fraction(self.min_radius))
        object.__setattr__(self, "highlight", frozenset(tuple(k) for k in self.highlight))
        if self.min_radius < 0:
            raise ValidationError("min_radius must be non-negative")
        if not self.scale > 0:
            raise ValidationError("scale must be positive")
        if self.stroke_rule not in ("constant", "proportional"):
            raise ValidationError(f"unknown stroke rule {self.stroke_rule!r}")
        if self.palette not in PALETTES:
            raise ValidationError(f"unknown palette {self.palette!r}")


def _fmt(v: float) -> str:
    s = f"{v:.{PRECISION}f}"
    return "0." + "0" * PRECISION if s == "-0." + "0" * PRECISION else s


def _curve_rep(C: CircleVec) -> CircleVec:
    """One orientation per curve: positive c, or the larger key for lines."""
    N = C.negate()
    if C.c != 0:
        return C if C.c > 0 else N
    return max(C, N, key=lambda X: X.key)


def _clip_line(C: CircleVec, W: Window):
    p, q, r = C.line_float()
    x0, x1, y0, y1 = (float(v) for v in W.as_tuple())
    pts = []
    if q != 0:
        for x in (x0, x1):
            y = -(p * x + r) / q
            if y0 <= y <= y1:
                pts.append((x, y))
    if p != 0:
        for y in (y0, y1):
            x = -(q * y + r) / p
            if x0 <= x <= x1:
                pts.append((x, y))
    if len(pts) < 2:
        return None
    pts.sort()
    return pts[0], pts[-1]


def render_svg(obj: Arrangement | Packing | Iterable[CircleVec], style: RenderStyle) -> str:
    if isinstance(obj, Packing):
        circles = obj.members
    elif isinstance(obj, Arrangement):
        circles = obj.circles
    else:
        circles = list(obj)
    W = style.view_box
    pal = PALETTES[style.palette]
    reps = {}
    for C in circles:
        R = _curve_rep(C)
        reps[R.key] = R
    hl = style.highlight
    min_r2 = style.min_radius**2
    s = style.scale
    X0, Y1 = float(W.x0), float(W.y1)
    normal, marked = [], []
    for key in sorted(reps):
        C = reps[key]
        if C.c != 0 and C.radius_sq() < min_r2:
            continue
        if not curve_meets_window(C, W):
            continue
        lit = key in hl or C.negate().key in hl
        color = pal["highlight"] if lit else pal["stroke"]
        if C.c == 0:
            seg = _clip_line(C, W)
            if seg is None:
                continue
            (ax, ay), (bx, by) = seg
            w = style.stroke_width if style.stroke_rule == "constant" else style.stroke_cap
            el = (
                f'<path d="M {_fmt((ax - X0) * s)} {_fmt((Y1 - ay) * s)} '
                f'L {_fmt((bx - X0) * s)} {_fmt((Y1 - by) * s)}" '
                f'stroke="{color}" stroke-width="{_fmt(w)}" fill="none"/>'
            )
        else:
            z = C.center()
            cx = float(z.x)
            cy = float(z.t) * math.sqrt(-C.delta)
            r = math.sqrt(float(C.radius_sq()))
            w = style.stroke_width
            if style.stroke_rule == "proportional":
                w = min(style.stroke_cap, style.stroke_width * r * s)
            el = (
                f'<circle cx="{_fmt((cx - X0) * s)}" cy="{_fmt((Y1 - cy) * s)}" r="{_fmt(r * s)}" '
                f'stroke="{color}" stroke-width="{_fmt(w)}" fill="none"/>'
            )
        (marked if lit else normal).append(el)
    if not normal and not marked:
        raise EmptyRender("nothing to draw inside the view box")
    width = float(W.x1 - W.x0) * s
    height = float(W.y1 - W.y0) * s
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">\n'
        f'<rect x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" fill="{pal["background"]}"/>\n'
    )
    body = "".join(e + "\n" for e in normal + marked)
    return head + body + "</svg>\n"
