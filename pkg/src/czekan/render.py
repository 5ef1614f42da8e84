"""SVG and text renderings of Czekanowski diagrams."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .czek_matrix import CzekMatrix

ASCII_RAMP = ("●", "◉", "○", "·", " ")
ASCII_MAX_N = 200

DEFAULT_SHADES = ("#cfe3f7", "#f7d9c4", "#d5ecd4", "#eadcf2", "#f6efc0", "#d9d9d9")


class RenderError(ValueError):
    pass


@dataclass
class DiagramStyle:
    cell: float = 12.0
    n_classes: int = 5
    radii: Optional[list[float]] = None
    shades: Sequence[str] = DEFAULT_SHADES
    font_size: float = 8.0
    show_labels: bool = True
    blank_last_class: bool = True
    dot_color: str = "#1a1a1a"
    margin: float = field(default=0.0)

    def __post_init__(self):
        if self.radii is None:
            r_max = 0.45 * self.cell
            self.radii = [r_max * (self.n_classes - c + 1) / self.n_classes for c in range(1, self.n_classes + 1)]
        if len(self.radii) != self.n_classes:
            raise RenderError(f"need {self.n_classes} radii, got {len(self.radii)}")
        if any(b >= a for a, b in zip(self.radii, self.radii[1:])):
            raise RenderError("radii must strictly decrease with class index")
        if not self.margin:
            self.margin = 6 * self.font_size if self.show_labels else 4.0

    def radius(self, cls: int) -> float:
        if self.blank_last_class and cls == self.n_classes:
            return 0.0
        return self.radii[cls - 1]


def svg_string(czek: CzekMatrix, clusters=None, style: Optional[DiagramStyle] = None,
               row_labels: Optional[Sequence[str]] = None) -> str:
    """SVG document for ``czek``; cluster intervals become shaded diagonal
    blocks drawn underneath the dots."""
    style = style or DiagramStyle(n_classes=czek.n_classes)
    if style.n_classes != czek.n_classes:
        raise RenderError(f"style is for {style.n_classes} classes, matrix has {czek.n_classes}")
    n = czek.n
    c, m = style.cell, style.margin
    size = m + n * c + 4
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:g}" height="{size:g}" '
        f'viewBox="0 0 {size:g} {size:g}">',
        f'<rect x="0" y="0" width="{size:g}" height="{size:g}" fill="white"/>',
    ]
    if clusters is not None:
        out.append('<g id="clusters">')
        for i, (a, b) in enumerate(clusters.intervals):
            x0 = m + (a - 1) * c
            span = (b - a + 1) * c
            shade = style.shades[i % len(style.shades)]
            out.append(f'<rect class="cluster" data-start="{a}" data-end="{b}" x="{x0:g}" y="{x0:g}" '
                       f'width="{span:g}" height="{span:g}" fill="{shade}"/>')
        out.append("</g>")
    out.append(f'<g id="dots" fill="{style.dot_color}">')
    for i in range(n):
        cy = m + (i + 0.5) * c
        for j in range(n):
            cls = int(czek.classes[i, j])
            r = style.radius(cls)
            if r <= 0:
                continue
            cx = m + (j + 0.5) * c
            out.append(f'<circle cx="{cx:g}" cy="{cy:g}" r="{r:.3g}" data-class="{cls}"/>')
    out.append("</g>")
    if style.show_labels:
        labels = list(row_labels) if row_labels is not None else [str(int(p) + 1) for p in czek.permutation]
        if len(labels) != n:
            raise RenderError("row_labels length does not match the matrix")
        fs = style.font_size
        out.append(f'<g id="labels" font-family="sans-serif" font-size="{fs:g}">')
        for i, lab in enumerate(labels):
            p = m + (i + 0.5) * c
            out.append(f'<text x="{m - 2:g}" y="{p + fs / 3:g}" text-anchor="end">{escape(lab)}</text>')
            out.append(f'<text transform="translate({p + fs / 3:g},{m - 2:g}) rotate(-90)">{escape(lab)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(czek: CzekMatrix, clusters=None, style: Optional[DiagramStyle] = None, out=None,
               row_labels: Optional[Sequence[str]] = None) -> str:
    """Write the SVG diagram to ``out`` (if given) and return it."""
    text = svg_string(czek, clusters, style, row_labels)
    if out is not None:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise RenderError(f"cannot write {out}: {exc}") from exc
    return text


def render_ascii(czek: CzekMatrix, clusters=None) -> str:
    """One glyph per cell (``●◉○· `` for classes 1..5), with ``│``/``─``
    separators at cluster boundaries."""
    n = czek.n
    if n > ASCII_MAX_N:
        raise RenderError(f"ASCII rendering is limited to {ASCII_MAX_N} observations (got {n})")
    if czek.n_classes > len(ASCII_RAMP):
        raise RenderError(f"ASCII ramp has {len(ASCII_RAMP)} glyphs; cannot show {czek.n_classes} classes")
    cuts = set()
    if clusters is not None:
        cuts = {b for _, b in clusters.intervals[:-1]}
    lines = []
    for i in range(n):
        row = []
        for j in range(n):
            row.append(ASCII_RAMP[int(czek.classes[i, j]) - 1])
            if j + 1 in cuts:
                row.append("│")
        lines.append("".join(row))
        if i + 1 in cuts:
            lines.append("".join("┼" if ch == "│" else "─" for ch in lines[-1]))
    return "\n".join(lines) + "\n"
