"""Deterministic file emission: CSV, JSON and a static SVG heat map.

All numbers are serialized round-trip safe (floats at 17 significant
digits), CSV uses a header row and LF line endings, JSON uses UTF-8 with
sorted keys.  Identical inputs therefore produce byte-identical files.
"""

import json
import math


def fmt_number(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int,)):
        return str(x)
    return f"{float(x):.17g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_number(x) for x in row) + "\n")


def _round17(obj):
    if isinstance(obj, float):
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {k: _round17(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round17(v) for v in obj]
    return obj


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_round17(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def coordinate_header(d: int, extra=()) -> list:
    return [f"x{i + 1}" for i in range(d)] + list(extra)


def write_sites_csv(path, d, items, value_name=None) -> None:
    """Sites (and optionally one value column) to CSV, one row per site."""
    if value_name is None:
        write_csv(path, coordinate_header(d), items)
    else:
        write_csv(path, coordinate_header(d, [value_name]),
                  (tuple(site) + (value,) for site, value in items))


def growth_sidecar(record) -> dict:
    return {
        "n": record.n,
        "d": record.d,
        "seed": record.seed,
        "sigma_sum": record.sigma_sum,
        "delta_inner": record.delta_inner,
        "delta_outer": record.delta_outer,
    }


def write_svg_heatmap(path, items, d, cell=4) -> None:
    """Static heat map of a site-indexed field (d = 2: full plane; d >= 3:
    the x3 = ... = xd = 0 slice).  Intensity is log-scaled."""
    pts = []
    for site, value in items:
        if d > 2 and any(c != 0 for c in site[2:]):
            continue
        if value > 0:
            pts.append((int(site[0]), int(site[1]), float(value)))
    if not pts:
        pts = [(0, 0, 1.0)]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    vmax = max(p[2] for p in pts)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    w = (x1 - x0 + 1) * cell
    h = (y1 - y0 + 1) * cell
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="#000000"/>',
    ]
    for x, y, v in pts:
        t = math.log1p(v) / math.log1p(vmax)
        r = int(255 * min(1.0, 2 * t))
        g = int(255 * max(0.0, 2 * t - 1))
        lines.append(
            f'<rect x="{(x - x0) * cell}" y="{(y1 - y) * cell}" '
            f'width="{cell}" height="{cell}" fill="#{r:02x}{g:02x}30"/>'
        )
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
