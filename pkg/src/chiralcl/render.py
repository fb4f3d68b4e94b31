"""Deterministic heatmap rendering of 2D maps as portable pixmaps.

Two colormaps:

* ``signed`` — blue (negative) through midpoint gray to red (positive),
  with 0 always mapping to the midpoint; the default for chirality maps.
* ``magnitude`` — black to white.

Output is raw binary PPM (P6); byte-identical for identical inputs.
"""

from __future__ import annotations

import numpy as np


class RenderError(ValueError):
    pass


_MID = np.array([128, 128, 128], dtype=float)
_POS = np.array([200, 30, 30], dtype=float)
_NEG = np.array([30, 60, 200], dtype=float)


def _signed_rgb(norm):
    """norm in [-1, 1] -> RGB via two linear ramps around midpoint gray."""
    rgb = np.empty(norm.shape + (3,), dtype=float)
    pos = norm >= 0
    rgb[pos] = _MID + np.clip(norm[pos], 0, 1)[:, None] * (_POS - _MID)
    rgb[~pos] = _MID + np.clip(-norm[~pos], 0, 1)[:, None] * (_NEG - _MID)
    return rgb


def render_heatmap(array, colormap: str = "signed",
                   vrange: tuple | None = None) -> bytes:
    """Render a 2D real array to PPM bytes.  NaN cells render black."""
    a = np.asarray(array, dtype=float)
    if a.ndim != 2:
        raise RenderError(
            f"heatmap needs a 2D array (got {a.ndim}D; slice it first)")
    nan = ~np.isfinite(a)
    a = np.where(nan, 0.0, a)

    if colormap == "signed":
        if vrange is None:
            scale = np.abs(a).max() or 1.0
            lo, hi = -scale, scale
        else:
            lo, hi = vrange
            if not (lo < 0 < hi):
                raise RenderError("signed colormap range must straddle zero")
        norm = np.clip(a / max(hi, -lo), -1.0, 1.0)
        rgb = _signed_rgb(norm)
    elif colormap == "magnitude":
        lo, hi = vrange if vrange is not None else (a.min(), a.max())
        span = (hi - lo) or 1.0
        norm = np.clip((a - lo) / span, 0.0, 1.0)
        rgb = np.repeat(norm[..., None] * 255.0, 3, axis=-1)
    else:
        raise RenderError(f"unknown colormap {colormap!r}")

    rgb[nan] = 0.0
    pix = np.round(rgb).astype(np.uint8)
    header = f"P6\n{a.shape[1]} {a.shape[0]}\n255\n".encode()
    return header + pix.tobytes()


def write_heatmap(path, array, colormap: str = "signed",
                  vrange: tuple | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(render_heatmap(array, colormap, vrange))
