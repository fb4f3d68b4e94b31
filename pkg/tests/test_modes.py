import numpy as np
import pytest

from chiralcl.materials import eval_permittivity, gold
from chiralcl.modes import (ModeError, eval_mode_field, fiber_v_number,
                            flip_mode, solve_fiber_he11, solve_wire_tm01,
                            surface_field_ratio)


@pytest.fixture(scope="module")
def wire_mode():
    eps = eval_permittivity(gold(), 600.0)
    return solve_wire_tm01(25.0, 600.0, eps)


def test_wire_effective_index(wire_mode):
    assert wire_mode.n_eff.real == pytest.approx(2.08, abs=0.05)
    assert wire_mode.n_eff.imag > 0.0


def test_wire_confinement_ratio(wire_mode):
    assert abs(wire_mode.beta) / abs(wire_mode.gamma_t) == pytest.approx(
        0.58, abs=0.02)


def test_wire_surface_field_ratio(wire_mode):
    assert surface_field_ratio(wire_mode) == pytest.approx(0.29, abs=0.02)


def test_wire_dispersion_residual_small(wire_mode):
    assert wire_mode.residual < 1e-6


def test_wire_field_continuity(wire_mode):
    a = wire_mode.radius_nm
    Ein, _ = eval_mode_field(wire_mode, 0.0, 0.0, a * (1 - 1e-9))
    Eout, _ = eval_mode_field(wire_mode, 0.0, 0.0, a * (1 + 1e-9))
    # tangential E (x component here) continuous across the surface
    assert abs(Ein[0] - Eout[0]) < 1e-6 * abs(Ein[0])


def test_wire_mode_decays_outward(wire_mode):
    r = np.array([30.0, 60.0, 120.0])
    E, _ = eval_mode_field(wire_mode, 0.0 * r, 0.0 * r, r)
    mag = np.linalg.norm(E, axis=0)
    assert np.all(np.diff(mag) < 0)


def test_flip_mode_reverses_propagation(wire_mode):
    back = flip_mode(wire_mode)
    assert back.beta == pytest.approx(-wire_mode.beta)
    E, _ = eval_mode_field(wire_mode, 100.0, 0.0, 40.0)
    Eb, _ = eval_mode_field(back, -100.0, 0.0, 40.0)
    # mirror image: transverse amplitude matches at mirrored points
    assert abs(abs(E[2]) - abs(Eb[2])) < 1e-9 * abs(E[2]) + 1e-12


def test_fiber_he11_bounds():
    mode, warnings = solve_fiber_he11(250.0, 600.0, 1.45)
    assert 1.0 < mode.n_eff.real < 1.45
    E, _ = eval_mode_field(mode, 0.0, 0.0, 0.0)
    assert abs(E[2]) > 0  # z-polarized on axis by default


def test_fiber_multimode_warning():
    _, warnings = solve_fiber_he11(250.0, 600.0, 1.45)
    V = fiber_v_number(250.0, 600.0, 1.45, 1.0)
    assert (len(warnings) > 0) == (V > 2.405)


def test_fiber_evanescent_spin_locking():
    """Evanescent transverse spin flips with propagation direction."""
    mode, _ = solve_fiber_he11(250.0, 600.0, 1.45)
    back = flip_mode(mode)
    z = 300.0  # above the fiber surface
    E, _ = eval_mode_field(mode, 0.0, 0.0, z)
    Eb, _ = eval_mode_field(back, 0.0, 0.0, z)

    def pcp(e):
        l2 = abs(e[0] + 1j * e[2]) ** 2 / 2
        r2 = abs(e[0] - 1j * e[2]) ** 2 / 2
        return (l2 - r2) / (l2 + r2)

    assert pcp(E) * pcp(Eb) < 0
    assert abs(pcp(E)) > 0.3


def test_fiber_requires_core_contrast():
    with pytest.raises(ModeError):
        solve_fiber_he11(250.0, 600.0, 1.0, 1.0)
