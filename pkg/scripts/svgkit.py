"""Small SVG helpers shared by the Python figure recipes."""

from __future__ import annotations


def num(v: float) -> str:
    return f"{v:.12f}"


def disc(cx: float, cy: float, r: float, *, fill: str, stroke: str = "none", opacity: float = 1.0) -> str:
    return (
        f'<circle cx="{num(cx)}" cy="{num(cy)}" r="{num(r)}" fill="{fill}" '
        f'fill-opacity="{num(opacity)}" stroke="{stroke}" stroke-width="0.5"/>'
    )


def document(width: float, height: float, body: list[str], background: str = "#ffffff") -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{num(width)}" '
        f'height="{num(height)}" viewBox="0 0 {num(width)} {num(height)}">\n'
        f'<rect x="0" y="0" width="{num(width)}" height="{num(height)}" fill="{background}"/>\n'
    )
    return head + "".join(e + "\n" for e in body) + "</svg>\n"


def overlay(svg: str, items: list[str]) -> str:
    """Append elements on top of an existing document."""
    tail = "</svg>\n"
    assert svg.endswith(tail)
    return svg[: -len(tail)] + "".join(e + "\n" for e in items) + tail
