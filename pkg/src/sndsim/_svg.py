"""Minimal self-contained SVG emitters (no plotting dependency)."""

import math

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 28, 44
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 5 * mag, 10 * mag) if s >= raw)
    t0 = math.ceil(lo / step) * step
    out = []
    t = t0
    while t <= hi + 1e-12 * step:
        out.append(t)
        t += step
    return out


def line_plot(path, series, title="", xlabel="", ylabel="", logx=False, logy=False,
              width=640, height=440):
    """Write a polyline plot; ``series`` is a list of (x, y, label) triples."""

    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    pts = []
    for xs, ys, _ in series:
        for x, y in zip(xs, ys):
            if (logx and x <= 0) or (logy and y <= 0):
                continue
            pts.append((tx(x), ty(y)))
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x_lo = min(p[0] for p in pts)
    x_hi = max(p[0] for p in pts)
    y_lo = min(p[1] for p in pts)
    y_hi = max(p[1] for p in pts)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad
    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def px(v):
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return _MARGIN_T + (1 - (v - y_lo) / (y_hi - y_lo)) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="white" stroke="black"/>',
        f'<text x="{width / 2}" y="16" text-anchor="middle">{title}</text>',
        f'<text x="{_MARGIN_L + plot_w / 2}" y="{height - 8}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{_MARGIN_T + plot_h / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {_MARGIN_T + plot_h / 2})">{ylabel}</text>',
    ]
    for t in _ticks(x_lo, x_hi):
        lab = f"1e{t:g}" if logx else f"{t:g}"
        parts.append(
            f'<line x1="{px(t):.1f}" y1="{_MARGIN_T + plot_h}" x2="{px(t):.1f}" '
            f'y2="{_MARGIN_T + plot_h + 4}" stroke="black"/>'
            f'<text x="{px(t):.1f}" y="{_MARGIN_T + plot_h + 18}" text-anchor="middle">{lab}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        lab = f"1e{t:g}" if logy else f"{t:g}"
        parts.append(
            f'<line x1="{_MARGIN_L - 4}" y1="{py(t):.1f}" x2="{_MARGIN_L}" y2="{py(t):.1f}" '
            f'stroke="black"/>'
            f'<text x="{_MARGIN_L - 6}" y="{py(t) + 4:.1f}" text-anchor="end">{lab}</text>'
        )
    for i, (xs, ys, label) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        coords = [
            f"{px(tx(x)):.1f},{py(ty(y)):.1f}"
            for x, y in zip(xs, ys)
            if not ((logx and x <= 0) or (logy and y <= 0))
        ]
        if not coords:
            continue
        parts.append(
            f'<polyline points="{" ".join(coords)}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        if label:
            y_leg = _MARGIN_T + 14 + 14 * i
            parts.append(
                f'<line x1="{width - 150}" y1="{y_leg - 4}" x2="{width - 130}" y2="{y_leg - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
                f'<text x="{width - 126}" y="{y_leg}">{label}</text>'
            )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def heatmap(path, matrix, title="", xlabel="", ylabel="", width=640, height=440):
    """Write a grayscale heatmap of a 2-D array (rows drawn bottom-up)."""
    rows = len(matrix)
    cols = len(matrix[0])
    v_hi = max(max(row) for row in matrix) or 1.0
    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B
    cw, ch = plot_w / cols, plot_h / rows
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<text x="{width / 2}" y="16" text-anchor="middle">{title}</text>',
        f'<text x="{_MARGIN_L + plot_w / 2}" y="{height - 8}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{_MARGIN_T + plot_h / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {_MARGIN_T + plot_h / 2})">{ylabel}</text>',
    ]
    for i in range(rows):
        for j in range(cols):
            frac = math.log1p(matrix[i][j]) / math.log1p(v_hi) if v_hi > 0 else 0.0
            shade = int(255 * (1 - frac))
            x = _MARGIN_L + j * cw
            y = _MARGIN_T + (rows - 1 - i) * ch
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{cw + 0.5:.1f}" height="{ch + 0.5:.1f}" '
                f'fill="rgb({shade},{shade},{shade})"/>'
            )
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
