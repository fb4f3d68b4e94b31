"""Directional coupling into the two counter-propagating guided channels.

Both routes produce the same scalar

    D = (I_plus - I_minus) / (I_plus + I_minus)

with I_plus / I_minus the power launched towards +x / -x:

* :func:`directionality_from_flux` integrates measured Poynting flux on
  the two end planes of a waveguide (the first-principles route).
* :func:`directionality_from_overlap` scores the emitter's complex dipole
  against the local guided-mode field at the emitter position (a cheap
  proxy that needs only two mode evaluations).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chirality import pcp_of_vector
from .modes import ModeSolution, eval_mode_field, flip_mode


@dataclass
class Directionality:
    d: float
    i_plus: float
    i_minus: float
    method: str
    detail: dict = field(default_factory=dict)


def _ratio(i_plus: float, i_minus: float, method: str, **detail) -> Directionality:
    tot = i_plus + i_minus
    if tot <= 0:
        raise ValueError("directionality: non-positive total channel power")
    return Directionality(d=float((i_plus - i_minus) / tot),
                          i_plus=float(i_plus), i_minus=float(i_minus),
                          method=method, detail=detail)


def poynting_flux(E, H, normal_axis: int, cell_area_m2: float) -> float:
    """Time-averaged power through a plane monitor, in W.

    ``E``/``H`` have shape (3, nu, nv); the normal picks the Poynting
    component summed over the plane.  Positive means flow along +axis.
    """
    s = 0.5 * np.real(np.cross(E, np.conj(H), axis=0))
    return float(np.sum(s[normal_axis]) * cell_area_m2)


def directionality_from_flux(flux_plus: float, flux_minus: float) -> Directionality:
    """D from measured end-plane powers (both passed as positive outflow)."""
    if flux_plus < 0 or flux_minus < 0:
        raise ValueError("end-plane outflow powers must be non-negative")
    return _ratio(flux_plus, flux_minus, "flux")


def directionality_from_overlap(p, mode_plus: ModeSolution,
                                x_nm: float, y_nm: float, z_nm: float,
                                pairing: str = "reciprocal") -> Directionality:
    """D from the overlap |p . e|^2 with the guided mode at the emitter.

    ``pairing='reciprocal'`` pairs the dipole with the conjugated mode
    field (the mode-expansion coefficient for a lossless guide), which is
    the convention that reproduces the sign of the flux route.
    ``pairing='literal'`` uses the unconjugated field.
    """
    p = np.asarray(p, dtype=complex).reshape(3)
    e_plus, _ = eval_mode_field(mode_plus, x_nm, y_nm, z_nm)
    e_minus, _ = eval_mode_field(flip_mode(mode_plus), x_nm, y_nm, z_nm)
    if pairing == "reciprocal":
        e_plus, e_minus = np.conj(e_plus), np.conj(e_minus)
    elif pairing != "literal":
        raise ValueError(f"unknown pairing {pairing!r}")
    i_plus = abs(np.dot(p, e_plus)) ** 2
    i_minus = abs(np.dot(p, e_minus)) ** 2
    return _ratio(i_plus, i_minus, "overlap",
                  pcp=pcp_of_vector(p), pairing=pairing)


def directionality_overlap_map(E, x_nm, y_nm, z_nm, mode_plus: ModeSolution,
                               mask=None, pairing: str = "reciprocal"):
    """Pointwise D(r) over a field map, plus its average over ``mask``.

    ``E`` has shape (3, ...) over a grid of positions (broadcastable nm
    coordinate arrays); the guided-mode fields are evaluated at each
    position.  Returns (d_map, d_avg).
    """
    E = np.asarray(E, dtype=complex)
    e_p, _ = eval_mode_field(mode_plus, x_nm, y_nm, z_nm)
    e_m, _ = eval_mode_field(flip_mode(mode_plus), x_nm, y_nm, z_nm)
    if pairing == "reciprocal":
        e_p, e_m = np.conj(e_p), np.conj(e_m)
    elif pairing != "literal":
        raise ValueError(f"unknown pairing {pairing!r}")
    i_p = np.abs(np.sum(E * e_p, axis=0)) ** 2
    i_m = np.abs(np.sum(E * e_m, axis=0)) ** 2
    tot = i_p + i_m
    with np.errstate(invalid="ignore", divide="ignore"):
        d_map = np.where(tot > 0, (i_p - i_m) / tot, np.nan)
    sel = d_map if mask is None else d_map[np.asarray(mask, bool)]
    return d_map, float(np.nanmean(sel))


def pcp_vs_d_curve(dipoles, mode_plus: ModeSolution,
                   x_nm: float, y_nm: float, z_nm: float,
                   pairing: str = "reciprocal"):
    """(P_CP, D) pairs for a family of emitter dipoles at one position."""
    out = []
    for p in dipoles:
        d = directionality_from_overlap(p, mode_plus, x_nm, y_nm, z_nm,
                                        pairing=pairing)
        out.append((d.detail["pcp"], d.d))
    return np.array(out)


def elliptical_dipole(pcp: float, phase: float = 0.0) -> np.ndarray:
    """Unit x-z dipole with a prescribed degree of circular polarization.

    P_CP = sin(2 t) for p = (cos t, 0, i sin t); solve t and return p.
    """
    if not -1.0 <= pcp <= 1.0:
        raise ValueError("P_CP must lie in [-1, 1]")
    t = 0.5 * np.arcsin(pcp)
    return np.exp(1j * phase) * np.array([np.cos(t), 0.0, 1j * np.sin(t)])
