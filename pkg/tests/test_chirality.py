import numpy as np
import pytest

from chiralcl.chirality import (chirality_density, chirality_flow,
                                chirality_maps, degree_of_circular_polarization,
                                induced_dipole, pcp_of_vector, volume_average)

C0 = 299792458.0
EPS0 = 8.8541878128e-12
MU0 = 4e-7 * np.pi


def _plane_wave(handedness, shape=(4, 4, 4)):
    """CP plane wave traveling +y with x-z transverse plane (phasors)."""
    s = 1.0 if handedness == "left" else -1.0
    E = np.zeros((3,) + shape, dtype=complex)
    H = np.zeros((3,) + shape, dtype=complex)
    E[0] = 1.0
    E[2] = s * 1j
    eta = np.sqrt(MU0 / EPS0)
    # H = (k_hat x E)/eta with k_hat = +y
    H[2] = E[0] / eta
    H[0] = -E[2] / eta
    return E, H


def test_cp_wave_pcp_saturates():
    E, _ = _plane_wave("left")
    assert np.allclose(degree_of_circular_polarization(E), 1.0)
    E, _ = _plane_wave("right")
    assert np.allclose(degree_of_circular_polarization(E), -1.0)


def test_linear_wave_is_achiral():
    E = np.zeros((3, 3, 3, 3), dtype=complex)
    H = np.zeros_like(E)
    E[2] = 1.0
    H[0] = -1.0 / np.sqrt(MU0 / EPS0)
    assert np.allclose(chirality_density(E, H), 0.0)
    assert np.allclose(degree_of_circular_polarization(E), 0.0)


def test_cp_wave_chirality_density_sign_and_magnitude():
    # The u_L = (e_x + i e_z)/sqrt(2) projection convention makes P_CP
    # and the helicity-signed densities opposite for the same wave.
    El, Hl = _plane_wave("left")
    Er, Hr = _plane_wave("right")
    _, chi_l = chirality_density(El, Hl)
    _, chi_r = chirality_density(Er, Hr)
    assert np.allclose(chi_l, -0.5)
    assert np.allclose(chi_r, 0.5)


def test_cp_wave_flow_along_propagation():
    E, H = _plane_wave("left")
    eps = np.ones(E.shape[1:])
    _, phi = chirality_flow(E, H, eps)
    # flow magnitude saturates along the propagation axis; sign is
    # opposite to P_CP in this projection convention
    assert np.allclose(phi[1], -1.0, atol=1e-12)
    assert np.allclose(phi[0], 0.0) and np.allclose(phi[2], 0.0)


def test_flow_flips_with_handedness():
    El, Hl = _plane_wave("left")
    Er, Hr = _plane_wave("right")
    eps = np.ones(El.shape[1:])
    assert np.allclose(chirality_flow(El, Hl, eps)[1][1],
                       -chirality_flow(Er, Hr, eps)[1][1])


def test_pcp_of_vector_limits():
    assert pcp_of_vector(np.array([1.0, 0, 1j])) == pytest.approx(1.0)
    assert pcp_of_vector(np.array([1.0, 0, -1j])) == pytest.approx(-1.0)
    assert pcp_of_vector(np.array([0.0, 0, 1.0])) == pytest.approx(0.0)
    assert pcp_of_vector(np.array([1.0, 0, 0.0])) == pytest.approx(0.0)


def test_maps_bundle_consistency():
    E, H = _plane_wave("left", shape=(5, 4, 3))
    maps = chirality_maps(E, H, np.ones(E.shape[1:]), 600.0)
    assert maps.chi.shape == (5, 4, 3)
    assert maps.phi.shape == (3, 5, 4, 3)
    assert maps.pcp.shape == (5, 4, 3)
    assert maps.wavelength_nm == 600.0
    assert np.allclose(maps.pcp, 1.0)


def test_mask_floor_suppresses_dark_cells():
    E = np.zeros((3, 4, 4, 4), dtype=complex)
    H = np.zeros_like(E)
    E[0, 0, 0, 0] = 1.0
    E[2, 0, 0, 0] = 1j
    pcp = degree_of_circular_polarization(E)
    assert pcp[0, 0, 0] == pytest.approx(1.0)
    assert np.all(np.isnan(pcp[1:]))  # dark cells masked out


def test_induced_dipole_mean_field():
    E = np.zeros((3, 4, 4, 4), dtype=complex)
    E[0] = 2.0
    E[2] = 2j
    mask = np.zeros((4, 4, 4), bool)
    mask[:2] = True
    ind = induced_dipole(E, mask)
    assert ind.p[0] == pytest.approx(2.0)
    assert ind.p[2] == pytest.approx(2j)
    assert ind.pcp_avg == pytest.approx(1.0)


def test_induced_dipole_requires_cells():
    with pytest.raises(ValueError):
        induced_dipole(np.zeros((3, 2, 2, 2), complex),
                       np.zeros((2, 2, 2), bool))


def test_volume_average():
    v = np.arange(8.0).reshape(2, 2, 2)
    mask = v >= 4
    assert volume_average(v, mask) == pytest.approx(5.5)
