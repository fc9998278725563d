"""Deterministic JSON text and static SVG plots of loop projections."""

from __future__ import annotations

import json
import math
import os

import numpy as np

from . import geometry as geo

__all__ = ["dumps", "write_json", "write_atomic", "body_shadow", "disc_shadow", "loops_svg"]


def _scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        return "null"
    s = format(v, ".17g")
    # keep floats recognisable as floats
    if all(ch not in s for ch in ".eEn"):
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, int, float, np.generic)):
        return _scalar(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, 0)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, 0) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with every float written to 17 significant digits.

    Key order is kept as given; non-finite floats become ``null``.
    """
    return _encode(obj, indent, 0) + "\n"


def write_atomic(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path, obj):
    write_atomic(path, dumps(obj))


# ---------------------------------------------------------------------------
# SVG


def body_shadow(body, plane, k=360):
    """Outline of the projection of the body onto the plane ``(x_j, y_j)``.

    Support points in ``k`` in-plane directions, in original coordinates.
    """
    n = body.n
    th = 2 * np.pi * np.arange(k) / k
    U = np.zeros((k, 2 * n))
    U[:, plane] = np.cos(th)
    U[:, n + plane] = np.sin(th)
    _, P = geo.support_point(body, U)
    pts = P[:, [plane, n + plane]] + body.offset[[plane, n + plane]]
    keep = np.ones(k, bool)
    keep[1:] = np.linalg.norm(np.diff(pts, axis=0), axis=1) > 1e-12
    return pts[keep]


def disc_shadow(radius, k=360):
    th = 2 * np.pi * np.arange(k) / k
    return radius * np.column_stack([np.cos(th), np.sin(th)])


_COLORS = ("#1f4e9c", "#c0392b", "#1e8449", "#8e44ad", "#d35400", "#117a65")


def _path(pts, to_px, closed=True):
    xy = [to_px(p) for p in pts]
    d = "M" + " L".join(f"{x:.3f},{y:.3f}" for x, y in xy)
    return d + (" Z" if closed else "")


def loops_svg(path, loops, shadows, labels=None, title="", size=320, margin=24):
    """One panel per symplectic plane: shaded shadow outline plus loop traces.

    ``loops`` hold ``(M, 2n)`` sample arrays in block order, ``shadows`` one
    outline per plane (or None).
    """
    loops = [np.asarray(s) for s in loops]
    n = loops[0].shape[1] // 2
    labels = labels or [f"loop {i}" for i in range(len(loops))]
    panels = []
    for j in range(n):
        pts = [s[:, [j, n + j]] for s in loops]
        if shadows[j] is not None:
            pts.append(shadows[j])
        allp = np.vstack(pts)
        lo, hi = allp.min(axis=0), allp.max(axis=0)
        span = max(float((hi - lo).max()), 1e-12)
        mid = 0.5 * (lo + hi)
        s = (size - 2 * margin) / span
        ox = j * size

        def to_px(p, s=s, mid=mid, ox=ox):
            return (ox + size / 2 + s * (p[0] - mid[0]), size / 2 + 12 - s * (p[1] - mid[1]))

        parts = [f'<g><text x="{ox + 8}" y="16" font-size="12">plane {j + 1}: (x{j + 1}, y{j + 1})</text>']
        if shadows[j] is not None:
            parts.append(f'<path d="{_path(shadows[j], to_px)}" fill="#dddddd" stroke="#888888" '
                         'stroke-width="1"/>')
        for i, lp in enumerate(loops):
            c = _COLORS[i % len(_COLORS)]
            parts.append(f'<path d="{_path(lp[:, [j, n + j]], to_px)}" fill="none" stroke="{c}" '
                         'stroke-width="1.5"/>')
        parts.append("</g>")
        panels.append("\n".join(parts))
    h = size + 24 + 16 * len(loops)
    legend = [f'<text x="8" y="{size + 28 + 16 * i}" font-size="12" fill="{_COLORS[i % len(_COLORS)]}">'
              f"{labels[i]}</text>" for i in range(len(loops))]
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{n * size}" height="{h}" '
            f'viewBox="0 0 {n * size} {h}">')
    t = f"<title>{title}</title>" if title else ""
    write_atomic(path, "\n".join([head, t, *panels, *legend, "</svg>"]) + "\n")
