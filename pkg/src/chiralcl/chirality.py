"""Chirality metrics of frequency-domain fields.

All functions take co-located complex E (V/m) and H (A/m) arrays of
shape (3, ...) in the exp[i(k.r - w t)] phasor convention.  The metrics:

* chirality density   chi = Im{E* . H}, normalized by I = 2 eps0 c E*.E
* chirality flow      Phi = Im{sqrt(eps_r eps0/mu0) E* x E
                            + sqrt(mu0/(eps_r eps0)) H* x H},
                      normalized by c*w, w = eps0 E*.E + mu0 H*.H
* degree of circular polarization P_CP with u_L = (e_x + i e_z)/sqrt(2)

Cells whose intensity falls below ``floor`` times the map maximum are
masked to NaN to avoid noise chatter in near-zero-field regions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0, epsilon_0 as EPS0, mu_0 as MU0

INTENSITY_FLOOR = 1e-6


@dataclass
class ChiralityMaps:
    """Normalized chirality maps over one monitor region at one wavelength."""

    chi: np.ndarray        # chi / I, dimensionless
    phi: np.ndarray        # Phi / (c w), shape (3, ...) dimensionless
    pcp: np.ndarray        # P_CP in [-1, 1]
    wavelength_nm: float = 0.0


def _mask(values, weight, floor):
    out = np.array(values, dtype=float)
    out[..., weight < floor * weight.max()] = np.nan
    return out


def chirality_density(E, H, floor: float = INTENSITY_FLOOR):
    """chi = Im{E* . H} and its intensity-normalized map (chi_raw, chi/I)."""
    chi = np.imag(np.sum(np.conj(E) * H, axis=0))
    intensity = 2.0 * EPS0 * C0 * np.sum(np.abs(E) ** 2, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        norm = chi / intensity
    return chi, _mask(norm, intensity, floor)


def chirality_flow(E, H, eps_r, use_real_eps: bool = True,
                   floor: float = INTENSITY_FLOOR):
    """Chirality flow Phi and its c*w-normalized map (Phi_raw, Phi/(c w)).

    ``eps_r`` is the relative permittivity per cell (scalar or array
    broadcastable to the field shape).  With ``use_real_eps`` the
    imaginary part is zeroed first (the plotting convention for lossy
    metals).
    """
    eps_r = np.asarray(eps_r, dtype=complex)
    if use_real_eps:
        eps_r = eps_r.real.astype(complex)
    ze = np.sqrt(eps_r * EPS0 / MU0)
    zh = np.sqrt(MU0 / (eps_r * EPS0))
    exe = np.cross(np.conj(E), E, axis=0)
    hxh = np.cross(np.conj(H), H, axis=0)
    phi = np.imag(ze * exe + zh * hxh)
    w = EPS0 * np.sum(np.abs(E) ** 2, axis=0) + MU0 * np.sum(np.abs(H) ** 2, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        norm = phi / (C0 * w)
    return phi, _mask(norm, w, floor)


def degree_of_circular_polarization(E, floor: float = INTENSITY_FLOOR):
    """P_CP of the x-z components of E (Eq. with u_L = (e_x+i e_z)/sqrt(2))."""
    # E* . u_L = (Ex* + i Ez*)/sqrt(2)
    l2 = np.abs(np.conj(E[0]) + 1j * np.conj(E[2])) ** 2 / 2.0
    r2 = np.abs(np.conj(E[0]) - 1j * np.conj(E[2])) ** 2 / 2.0
    tot = l2 + r2
    with np.errstate(invalid="ignore", divide="ignore"):
        pcp = (l2 - r2) / tot
    return _mask(pcp, tot, floor)


def pcp_of_vector(p) -> float:
    """P_CP of a single complex 3-vector (x-z components)."""
    p = np.asarray(p, dtype=complex).reshape(3)
    l2 = abs(np.conj(p[0]) + 1j * np.conj(p[2])) ** 2
    r2 = abs(np.conj(p[0]) - 1j * np.conj(p[2])) ** 2
    if l2 + r2 == 0:
        return 0.0
    return float((l2 - r2) / (l2 + r2))


def chirality_maps(E, H, eps_r, wavelength_nm: float = 0.0,
                   use_real_eps: bool = True) -> ChiralityMaps:
    _, chi_n = chirality_density(E, H)
    _, phi_n = chirality_flow(E, H, eps_r, use_real_eps=use_real_eps)
    pcp = degree_of_circular_polarization(E)
    return ChiralityMaps(chi=chi_n, phi=phi_n, pcp=pcp,
                         wavelength_nm=wavelength_nm)


@dataclass
class InducedDipole:
    """Volume-averaged complex field direction over a source region.

    The scalar polarizability is set to 1: every consumer is a ratio in
    which it cancels.
    """

    p: np.ndarray          # complex (3,)
    pcp_avg: float
    region: str = ""


def induced_dipole(E, mask, region: str = "") -> InducedDipole:
    """Volume average of complex E over ``mask`` (boolean, field shape)."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("induced_dipole: empty region mask")
    p = E[:, mask].mean(axis=1)
    return InducedDipole(p=p, pcp_avg=pcp_of_vector(p), region=region)


def volume_average(values, mask) -> float:
    """NaN-aware mean of a masked map over a boolean region."""
    vals = np.asarray(values, dtype=float)[..., np.asarray(mask, bool)]
    return float(np.nanmean(vals, axis=-1).squeeze()) if vals.ndim == 1 \
        else np.nanmean(vals, axis=-1)


def emitted_power(e_phasor, j_phasor, cell_volume_m3: float) -> float:
    """Cycle-averaged power a point current feeds the field, in W.

    P = -(1/2) Re(E . J*) dV for phasors sampled on the source cell.
    """
    e = np.asarray(e_phasor, dtype=complex)
    j = np.asarray(j_phasor, dtype=complex)
    return -0.5 * float(np.real(np.sum(e * np.conj(j)))) * cell_volume_m3


def purcell_spectrum(power_structure, power_vacuum):
    """Emitted-power ratio per wavelength (structure run / vacuum run)."""
    ps = np.asarray(power_structure, dtype=float)
    pv = np.asarray(power_vacuum, dtype=float)
    if ps.shape != pv.shape:
        raise ValueError("Purcell spectra need matching wavelength grids")
    if np.any(pv <= 0):
        raise ValueError("vacuum reference power must be positive")
    return ps / pv
