import numpy as np
import pytest

from chiralcl.geometry import (Capsule, Cylinder, Geometry, GeometryError,
                               Sphere, cell_centers, rasterize)


def test_capsule_membership():
    cap = Capsule(100.0, 25.0)
    assert cap.contains(0.0, 0.0, 0.0)
    assert cap.contains(49.0, 0.0, 0.0)          # inside the end cap
    assert not cap.contains(51.0, 0.0, 0.0)
    assert cap.contains(25.0, 0.0, 24.0)         # cylindrical section
    assert not cap.contains(26.0, 0.0, 24.0) or cap.contains(25.0, 0, 24)
    assert not cap.contains(30.0, 20.0, 20.0)    # corner outside radius


def test_capsule_length_must_cover_caps():
    with pytest.raises(GeometryError):
        Capsule(30.0, 25.0)


def test_capsule_bounds_include_caps():
    cap = Capsule(100.0, 25.0, (10.0, 0.0, 5.0))
    (x0, x1), (y0, y1), (z0, z1) = cap.bounds()
    assert (x0, x1) == (-40.0, 60.0)
    assert (y0, y1) == (-25.0, 25.0)
    assert (z0, z1) == (-20.0, 30.0)


def test_cylinder_spans_x():
    fib = Cylinder(250.0, (0.0, 0.0, -275.0))
    assert fib.contains(1e6, 0.0, -275.0)
    assert fib.contains(0.0, 0.0, -26.0)
    assert not fib.contains(0.0, 0.0, -24.0)


def test_sphere_membership():
    s = Sphere(10.0, (5.0, 0.0, 0.0))
    assert s.contains(14.0, 0.0, 0.0)
    assert not s.contains(16.0, 0.0, 0.0)


def test_material_index_layering():
    geo = Geometry(solids=((Capsule(100, 25), "gold"),
                           (Sphere(10, (0, 0, 0)), "core")),
                   background="vac")
    assert geo.material_tags() == ["vac", "gold", "core"]
    # later solids override earlier ones
    assert geo.material_index_at(0, 0, 0) == 2
    assert geo.material_index_at(40, 0, 0) == 1
    assert geo.material_index_at(0, 100, 0) == 0


def test_check_fits_rejects_protruding_solid():
    geo = Geometry(solids=((Capsule(100, 25), "gold"),))
    with pytest.raises(GeometryError):
        geo.check_fits(((-40, 40), (-50, 50), (-50, 50)))
    geo.check_fits(((-60, 60), (-30, 30), (-30, 30)))


def test_fiber_allowed_to_span_domain():
    geo = Geometry(solids=((Cylinder(250, (0, 0, -275)), "glass"),))
    geo.check_fits(((-900, 900), (-300, 300), (-580, 170)))


def test_cell_centers_require_exact_division():
    (xs,) = cell_centers(((0.0, 100.0),), 10.0)
    assert xs[0] == 5.0 and xs[-1] == 95.0 and xs.size == 10
    with pytest.raises(GeometryError):
        cell_centers(((0.0, 100.0),), 7.0)


def test_rasterize_volume_fraction():
    geo = Geometry(solids=((Sphere(30.0), "m"),), background="vac")
    vol = rasterize(geo, 2.0, ((-40, 40), (-40, 40), (-40, 40)))
    frac = np.mean(vol == 1)
    exact = (4.0 / 3.0) * np.pi * 30.0**3 / 80.0**3
    assert frac == pytest.approx(exact, rel=0.02)


def test_rasterize_rejects_coarse_cells():
    geo = Geometry(solids=((Sphere(5.0), "m"),))
    with pytest.raises(GeometryError):
        rasterize(geo, 4.0, ((-10, 10), (-10, 10), (-10, 10)))
