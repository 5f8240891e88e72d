"""Static SVG figures of hull constructions.

Hand-rolled so that output is byte-deterministic: fixed viewBox computed
from the convex-hull bounding box with a 10% margin, no timestamps or
generator metadata.  Coordinates are emitted at 17 significant digits.
"""

from __future__ import annotations

import numpy as np

from .ioutil import format_float as ff
from .planar import PlanarSet, Region

__all__ = ["hull_svg", "profile_svg"]


def _region_polygon(region: Region) -> str:
    mask = region.defined
    xs = region.grid[mask]
    ys = region.psi[mask]
    pts = [(xs[0], 0.0), *zip(xs, ys), (xs[-1], 0.0)]
    return " ".join(f"{ff(x)},{ff(-y)}" for x, y in pts)


def _envelope_polyline(region: Region) -> str:
    mask = region.defined
    xs = region.grid[mask]
    ys = region.psi[mask]
    return " ".join(f"{ff(x)},{ff(-y)}" for x, y in zip(xs, ys))


def hull_svg(
    h: PlanarSet | None,
    hhat: Region,
    conv: Region,
    region: Region,
    title: str = "hull",
) -> str:
    """Layered figure: downward closure, convex-hull outline, hull fill.

    The q axis points up; internally the figure uses flipped ordinates
    so the SVG is upright without transform attributes.
    """
    top = float(np.nanmax(conv.psi))
    lo, hi = conv.pmin, conv.pmax
    width = max(hi - lo, 1e-9)
    height = max(top, 1e-9)
    mx, my = 0.1 * width, 0.1 * height
    vb = (lo - mx, -(height + my), width + 2 * mx, height + 2 * my)
    stroke = 0.004 * max(width, height)
    dot = 0.012 * max(width, height)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{ff(vb[0])} {ff(vb[1])} '
        f'{ff(vb[2])} {ff(vb[3])}">',
        f"<title>{title}</title>",
        # axes
        f'<g id="axes" stroke="#404040" stroke-width="{ff(stroke)}">',
        f'<line x1="{ff(lo - mx)}" y1="0" x2="{ff(hi + mx)}" y2="0" />',
        f'<line x1="{ff(lo)}" y1="{ff(my)}" x2="{ff(lo)}" y2="{ff(-(height + my))}" />',
        "</g>",
        f'<g id="axis-labels" font-size="{ff(0.06 * max(width, height))}" fill="#404040">',
        f'<text x="{ff(hi + 0.4 * mx)}" y="{ff(-0.2 * my)}">p</text>',
        f'<text x="{ff(lo + 0.2 * mx)}" y="{ff(-(height + 0.4 * my))}">q</text>',
        "</g>",
    ]

    parts.append(f'<g id="hsdqc" fill="#9ecae1" fill-opacity="0.8" stroke="none">')
    parts.append(f'<polygon points="{_region_polygon(region)}" />')
    parts.append("</g>")

    parts.append(
        f'<g id="hconv" fill="none" stroke="#2b5d8a" stroke-width="{ff(stroke)}" '
        'stroke-dasharray="0.02,0.012">'
    )
    parts.append(f'<polyline points="{_envelope_polyline(conv)}" />')
    parts.append("</g>")

    parts.append(f'<g id="hhat" stroke="#c0392b" stroke-width="{ff(1.5 * stroke)}" fill="#c0392b">')
    mask = hhat.defined
    stride = max(1, int(mask.sum()) // 96)
    idx = np.flatnonzero(mask)[::stride]
    for i in idx:
        x, y = hhat.grid[i], hhat.psi[i]
        parts.append(f'<line x1="{ff(x)}" y1="0" x2="{ff(x)}" y2="{ff(-y)}" />')
    if h is not None:
        for pt in h.points:
            parts.append(f'<circle cx="{ff(pt.p)}" cy="{ff(-pt.q)}" r="{ff(dot)}" />')
        for a, b in h.segments:
            parts.append(
                f'<line x1="{ff(a.p)}" y1="{ff(-a.q)}" x2="{ff(b.p)}" y2="{ff(-b.q)}" />'
            )
        for arc in h.arcs:
            x0, x1 = arc.center_p - arc.radius, arc.center_p + arc.radius
            parts.append(
                f'<path d="M {ff(x0)} 0 A {ff(arc.radius)} {ff(arc.radius)} 0 0 1 '
                f'{ff(x1)} 0" fill="none" />'
            )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def profile_svg(xs: np.ndarray, ys: np.ndarray, title: str, labels=("t", "f")) -> str:
    """Simple deterministic polyline plot of a scalar profile."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    lo, hi = float(xs.min()), float(xs.max())
    bot, top = min(0.0, float(ys.min())), max(float(ys.max()), 1e-9)
    width = max(hi - lo, 1e-9)
    height = max(top - bot, 1e-9)
    mx, my = 0.1 * width, 0.1 * height
    stroke = 0.004 * max(width, height)
    pts = " ".join(f"{ff(x)},{ff(-y)}" for x, y in zip(xs, ys))
    return "\n".join(
        [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{ff(lo - mx)} '
            f'{ff(-(top + my))} {ff(width + 2 * mx)} {ff(height + 2 * my)}">',
            f"<title>{title}</title>",
            f'<g stroke="#404040" stroke-width="{ff(stroke)}">',
            f'<line x1="{ff(lo - mx)}" y1="0" x2="{ff(hi + mx)}" y2="0" />',
            "</g>",
            f'<g font-size="{ff(0.06 * max(width, height))}" fill="#404040">',
            f'<text x="{ff(hi + 0.3 * mx)}" y="{ff(-0.15 * my)}">{labels[0]}</text>',
            f'<text x="{ff(lo)}" y="{ff(-(top + 0.3 * my))}">{labels[1]}</text>',
            "</g>",
            f'<polyline points="{pts}" fill="none" stroke="#2b5d8a" '
            f'stroke-width="{ff(1.5 * stroke)}" />',
            "</svg>",
        ]
    ) + "\n"
