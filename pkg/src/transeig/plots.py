"""Minimal deterministic SVG log-log plots (no plotting dependencies)."""

import math
import warnings

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 160, 30, 50
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"]


def plot_loglog(series, path, xlabel="r", ylabel="delta", title=""):
    """Write a log-log SVG with one polyline per series.

    ``series`` is a list of (label, x array, y array) or
    (label, x, y, slope); when a slope is given it is annotated in the
    legend. Non-positive data points are dropped with a warning.
    """
    clean = []
    for entry in series:
        label, xs, ys = entry[0], list(entry[1]), list(entry[2])
        slope = entry[3] if len(entry) > 3 else None
        pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if len(pts) < len(xs):
            warnings.warn(f"series {label!r}: dropped {len(xs) - len(pts)} "
                          "non-positive points", stacklevel=2)
        if pts:
            clean.append((label, pts, slope))
    if not clean:
        raise ValueError("nothing to plot: no positive data")

    lx = [math.log10(x) for _, pts, _ in clean for x, _ in pts]
    ly = [math.log10(y) for _, pts, _ in clean for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    x0, x1 = (x0 - 0.5, x1 + 0.5) if x0 == x1 else (x0 - 0.05 * (x1 - x0), x1 + 0.05 * (x1 - x0))
    y0, y1 = (y0 - 0.5, y1 + 0.5) if y0 == y1 else (y0 - 0.05 * (y1 - y0), y1 + 0.05 * (y1 - y0))

    def sx(v):
        return _ML + (v - x0) / (x1 - x0) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - y0) / (y1 - y0) * (_H - _MT - _MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}">',
           f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
           f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="20" font-size="14" '
                   f'text-anchor="middle">{title}</text>')
    # decade ticks
    for d in range(math.ceil(x0), math.floor(x1) + 1):
        out.append(f'<line x1="{sx(d):.2f}" y1="{_H - _MB}" x2="{sx(d):.2f}" '
                   f'y2="{_H - _MB + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(d):.2f}" y="{_H - _MB + 18}" font-size="11" '
                   f'text-anchor="middle">1e{d}</text>')
    for d in range(math.ceil(y0), math.floor(y1) + 1):
        out.append(f'<line x1="{_ML - 5}" y1="{sy(d):.2f}" x2="{_ML}" '
                   f'y2="{sy(d):.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{sy(d) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">1e{d}</text>')
    out.append(f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 8}" font-size="12" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{(_MT + _H - _MB) / 2:.1f}" font-size="12" '
               f'text-anchor="middle" transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">'
               f'{ylabel}</text>')

    for si, (label, pts, slope) in enumerate(clean):
        color = _COLORS[si % len(_COLORS)]
        coords = " ".join(f"{sx(math.log10(x)):.2f},{sy(math.log10(y)):.2f}"
                          for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{sx(math.log10(x)):.2f}" '
                       f'cy="{sy(math.log10(y)):.2f}" r="2.5" fill="{color}"/>')
        ly_leg = _MT + 16 + 16 * si
        out.append(f'<line x1="{_W - _MR + 8}" y1="{ly_leg - 4}" x2="{_W - _MR + 28}" '
                   f'y2="{ly_leg - 4}" stroke="{color}" stroke-width="1.5"/>')
        text = label if slope is None else f"{label} (slope {slope:.2f})"
        out.append(f'<text x="{_W - _MR + 32}" y="{ly_leg}" font-size="11">{text}</text>')
    out.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
    return path
