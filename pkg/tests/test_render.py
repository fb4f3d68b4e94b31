import numpy as np
import pytest

from chiralcl.render import RenderError, render_heatmap, write_heatmap


def _pixels(ppm: bytes):
    """Decode a binary P6 pixmap into (w, h, rgb array)."""
    parts = ppm.split(b"\n", 3)
    assert parts[0] == b"P6"
    w, h = (int(v) for v in parts[1].split())
    assert parts[2] == b"255"
    rgb = np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
    return w, h, rgb


def test_zero_array_is_uniform_midpoint():
    _, _, rgb = _pixels(render_heatmap(np.zeros((4, 6)), colormap="signed"))
    assert np.all(rgb == rgb[0, 0])
    assert np.all(np.abs(rgb[0, 0].astype(int) - 128) <= 1)


def test_antisymmetric_array_color_inverts():
    # linspace(-1, 1) negated equals itself read back to front, so the
    # rendered pixels of -arr must be the pixels of arr in reverse order
    arr = np.linspace(-1, 1, 30).reshape(5, 6)
    _, _, a = _pixels(render_heatmap(arr, colormap="signed", vrange=(-1, 1)))
    _, _, b = _pixels(render_heatmap(-arr, colormap="signed", vrange=(-1, 1)))
    flat_a = a.reshape(-1, 3)
    flat_b = b.reshape(-1, 3)
    assert np.array_equal(flat_b, flat_a[::-1])
    # positive and negative extremes get distinct colors
    assert not np.array_equal(flat_a[0], flat_a[-1])


def test_saturation_at_range_limits():
    arr = np.array([[-2.0, -1.0], [1.0, 2.0]])
    _, _, rgb = _pixels(render_heatmap(arr, colormap="signed", vrange=(-1, 1)))
    # values beyond the range clamp to the +-1 colors
    assert np.array_equal(rgb[0, 0], rgb[0, 1])
    assert np.array_equal(rgb[1, 0], rgb[1, 1])


def test_magnitude_colormap_monotone():
    arr = np.array([[0.0, 0.5, 1.0]])
    _, _, rgb = _pixels(render_heatmap(arr, colormap="magnitude"))
    lum = rgb.astype(int).sum(axis=2)[0]
    assert lum[0] < lum[1] < lum[2] or lum[0] > lum[1] > lum[2]


def test_nan_pixels_are_black():
    arr = np.zeros((2, 2))
    arr[0, 0] = np.nan
    _, _, rgb = _pixels(render_heatmap(arr, colormap="signed", vrange=(-1, 1)))
    assert np.array_equal(rgb[0, 0], [0, 0, 0])


def test_deterministic_bytes():
    arr = np.linspace(-1, 1, 12).reshape(3, 4)
    assert render_heatmap(arr) == render_heatmap(arr.copy())


def test_rejects_non_2d():
    with pytest.raises(RenderError):
        render_heatmap(np.zeros((2, 2, 2)))


def test_write_heatmap(tmp_path):
    path = tmp_path / "m.ppm"
    write_heatmap(path, np.zeros((2, 3)))
    w, h, _ = _pixels(path.read_bytes())
    assert (w, h) == (3, 2)
