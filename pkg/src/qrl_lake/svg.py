"""Minimal self-contained SVG plotting: line charts with shaded bands and
labeled scatter charts. No plotting dependencies; output is plain text."""

from typing import List, Optional, Sequence, Tuple

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f")

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 36, 48


def color(i: int) -> str:
    return _COLORS[i % len(_COLORS)]


class Canvas:
    """Maps data coordinates onto the SVG viewport and accumulates elements."""

    def __init__(self, title, xlabel, ylabel, xlim, ylim):
        self.parts: List[str] = []
        self.xlim = xlim
        self.ylim = ylim
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
        self.parts.append(
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
        self.parts.append(
            f'<text x="{WIDTH/2}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>')
        self.parts.append(
            f'<text x="{WIDTH/2}" y="{HEIGHT-10}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{xlabel}</text>')
        self.parts.append(
            f'<text x="16" y="{HEIGHT/2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {HEIGHT/2})">{ylabel}</text>')
        self._axes()

    def x(self, v: float) -> float:
        lo, hi = self.xlim
        span = (hi - lo) or 1.0
        return MARGIN_L + (v - lo) / span * (WIDTH - MARGIN_L - MARGIN_R)

    def y(self, v: float) -> float:
        lo, hi = self.ylim
        span = (hi - lo) or 1.0
        return HEIGHT - MARGIN_B - (v - lo) / span * (HEIGHT - MARGIN_T - MARGIN_B)

    def _axes(self):
        x0, y0 = MARGIN_L, HEIGHT - MARGIN_B
        x1, y1 = WIDTH - MARGIN_R, MARGIN_T
        self.parts.append(
            f'<path d="M {x0} {y1} L {x0} {y0} L {x1} {y0}" stroke="black" '
            f'fill="none" stroke-width="1"/>')
        for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
            xv = self.xlim[0] + frac * (self.xlim[1] - self.xlim[0])
            yv = self.ylim[0] + frac * (self.ylim[1] - self.ylim[0])
            xp, yp = self.x(xv), self.y(yv)
            self.parts.append(
                f'<line x1="{xp:.1f}" y1="{y0}" x2="{xp:.1f}" y2="{y0+4}" '
                f'stroke="black"/>')
            self.parts.append(
                f'<text x="{xp:.1f}" y="{y0+18}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10">{_fmt(xv)}</text>')
            self.parts.append(
                f'<line x1="{x0-4}" y1="{yp:.1f}" x2="{x0}" y2="{yp:.1f}" '
                f'stroke="black"/>')
            self.parts.append(
                f'<text x="{x0-8}" y="{yp+3:.1f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="10">{_fmt(yv)}</text>')

    def band(self, xs, lo, hi, stroke: str, opacity=0.18):
        pts = [f"{self.x(x):.1f},{self.y(v):.1f}" for x, v in zip(xs, hi)]
        pts += [f"{self.x(x):.1f},{self.y(v):.1f}"
                for x, v in zip(reversed(list(xs)), reversed(list(lo)))]
        self.parts.append(
            f'<polygon points="{" ".join(pts)}" fill="{stroke}" '
            f'opacity="{opacity}" stroke="none"/>')

    def line(self, xs, ys, stroke: str, label: Optional[str] = None,
             dash: Optional[str] = None):
        pts = " ".join(f"{self.x(x):.1f},{self.y(v):.1f}" for x, v in zip(xs, ys))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
            f'stroke-width="1.5"{dash_attr}/>')

    def hline(self, yv: float, stroke="#444", dash="6,4", label=""):
        yp = self.y(yv)
        self.parts.append(
            f'<line x1="{MARGIN_L}" y1="{yp:.1f}" x2="{WIDTH-MARGIN_R}" '
            f'y2="{yp:.1f}" stroke="{stroke}" stroke-dasharray="{dash}"/>')
        if label:
            self.parts.append(
                f'<text x="{WIDTH-MARGIN_R-4}" y="{yp-4:.1f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="10" fill="{stroke}">'
                f'{label}</text>')

    def point(self, xv, yv, stroke: str, label: Optional[str] = None):
        xp, yp = self.x(xv), self.y(yv)
        self.parts.append(f'<circle cx="{xp:.1f}" cy="{yp:.1f}" r="4" '
                          f'fill="{stroke}" opacity="0.85"/>')
        if label:
            self.parts.append(
                f'<text x="{xp+6:.1f}" y="{yp-5:.1f}" font-family="sans-serif" '
                f'font-size="9">{label}</text>')

    def legend(self, entries: Sequence[Tuple[str, str]]):
        x, y = MARGIN_L + 10, MARGIN_T + 8
        for label, stroke in entries:
            self.parts.append(
                f'<line x1="{x}" y1="{y}" x2="{x+18}" y2="{y}" '
                f'stroke="{stroke}" stroke-width="2"/>')
            self.parts.append(
                f'<text x="{x+24}" y="{y+3}" font-family="sans-serif" '
                f'font-size="10">{label}</text>')
            y += 14

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _fmt(v: float) -> str:
    if abs(v) >= 1000:
        return f"{v/1000:g}k"
    return f"{v:g}"
