"""Draw the depth-n cells of a planar attractor shaded by mass.

Opacity is ``m(w) / max_u m(u)`` over the level, so heavier cells are darker
and uniform masses give one shade.
"""

import math
from xml.sax.saxutils import quoteattr

from PIL import Image, ImageDraw

from .chain import MassDistribution, ratstr
from .ifs import IFS, cell_box, cell_vertices
from .words import enumerate_level, format_word


class RenderError(ValueError):
    pass


def _convex_order(points):
    cx = sum(p[0] for p in points) / len(points)
    cy = sum(p[1] for p in points) / len(points)
    uniq = sorted(set(points), key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    return uniq


def cell_polygon(w, ifs: IFS) -> list:
    """Cartesian polygon (float pairs) of the cell of ``w``."""
    if ifs.intersection == "boxes":
        (x0, y0), (x1, y1) = cell_box(w, ifs)
        pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        return [(float(x), float(y)) for x, y in pts]
    return _convex_order([ifs.to_cartesian(p) for p in cell_vertices(w, ifs)])


def cells(ifs: IFS, masses: MassDistribution, depth: int) -> list:
    """``[(word, mass, opacity, polygon)]`` for all words of length ``depth``."""
    if ifs.geometric_dim != 2:
        raise RenderError(f"rendering needs a planar attractor, got dimension {ifs.geometric_dim}")
    words = enumerate_level(depth, ifs.n_letters)
    ms = [masses.of(w) for w in words]
    top = max(ms)
    return [(w, m, float(m / top), cell_polygon(w, ifs)) for w, m in zip(words, ms)]


def _frame(polys, size, margin):
    xs = [x for p in polys for x, _ in p]
    ys = [y for p in polys for _, y in p]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    scale = (size - 2 * margin) / max(x1 - x0, y1 - y0)
    height = int(round((y1 - y0) * scale)) + 2 * margin

    def tr(p):
        return (margin + (p[0] - x0) * scale, height - margin - (p[1] - y0) * scale)

    return tr, height


def to_svg(ifs: IFS, masses: MassDistribution, depth: int, size: int = 512, color: str = "#1a1a6e") -> str:
    items = cells(ifs, masses, depth)
    tr, height = _frame([p for *_, p in items], size, 8)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{height}" '
        f'viewBox="0 0 {size} {height}">',
        f'<g fill="{color}" stroke="none">',
    ]
    n = ifs.n_letters
    for w, m, op, poly in items:
        pts = " ".join(f"{x:.4f},{y:.4f}" for x, y in map(tr, poly))
        out.append(
            f"<polygon points={quoteattr(pts)} data-word={quoteattr(format_word(w, n))} "
            f'data-mass="{ratstr(m)}" fill-opacity="{op:.6f}"/>'
        )
    out += ["</g>", "</svg>", ""]
    return "\n".join(out)


def to_image(ifs: IFS, masses: MassDistribution, depth: int, size: int = 512) -> Image.Image:
    items = cells(ifs, masses, depth)
    tr, height = _frame([p for *_, p in items], size, 8)
    img = Image.new("RGB", (size, height), (255, 255, 255))
    draw = ImageDraw.Draw(img)
    for _, _, op, poly in items:
        shade = int(round(255 * (1 - op)))
        draw.polygon([tr(p) for p in poly], fill=(shade, shade, shade))
    return img


def render(ifs: IFS, masses: MassDistribution, depth: int, path, size: int = 512) -> str:
    """Write SVG, or a binary PPM when the path ends in ``.ppm``; returns the format."""
    path = str(path)
    if path.lower().endswith(".ppm"):
        to_image(ifs, masses, depth, size).save(path, format="PPM")
        return "ppm"
    with open(path, "w") as fh:
        fh.write(to_svg(ifs, masses, depth, size))
    return "svg"
