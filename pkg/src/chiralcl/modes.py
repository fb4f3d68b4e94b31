"""Analytic waveguide modes: metal-wire TM01 plasmon and nanofiber HE11.

The propagation axis is x; transverse coordinates are (y, z).  Phasors
follow exp[i(beta*x - w*t)], so bound modes decay outward through
modified Bessel functions K_n and a lossy metal has Im(eps) > 0.

Transverse fields come from the axial ones through

    kap^2 E_t = i*beta*grad_t(E_ax) - i*w*mu0 (e_x X grad_t(H_ax))
    kap^2 H_t = i*beta*grad_t(H_ax) + i*w*eps0*eps (e_x X grad_t(E_ax))

with kap^2 = eps*k0^2 - beta^2 in each region (negative where the radial
behavior is evanescent, turning J_n into I_n / K_n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.constants import c as C0, epsilon_0 as EPS0, mu_0 as MU0
from scipy.optimize import brentq
from scipy.special import iv, jv, jvp, kv


class ModeError(RuntimeError):
    """No usable mode root was found."""

    def __init__(self, msg, residual_map=None):
        super().__init__(msg)
        self.residual_map = residual_map


@dataclass(frozen=True)
class ModeSolution:
    """A solved guided mode with a field-profile evaluator.

    ``beta`` and ``gamma_t`` are in rad/m; ``gamma_t`` is the transverse
    wavenumber of the innermost region (metal for the wire, core for the
    fiber).  ``evaluator(x_m, y_m, z_m) -> (E, H)`` takes coordinates in
    meters and returns complex field arrays of shape (3,) + points-shape
    including the exp(i*beta*x) propagation phase.
    """

    family: str  # wire-TM01 | fiber-HE11
    wavelength_nm: float
    beta: complex
    gamma_t: complex
    n_eff: complex
    radius_nm: float
    amplitude: float
    evaluator: Callable = None
    residual: float = 0.0
    extra: dict = None


def eval_mode_field(mode: ModeSolution, x_nm, y_nm, z_nm):
    """Complex (E, H) of a mode at points given in nm (global coords)."""
    return mode.evaluator(np.asarray(x_nm, float) * 1e-9,
                          np.asarray(y_nm, float) * 1e-9,
                          np.asarray(z_nm, float) * 1e-9)


def flip_mode(mode: ModeSolution) -> ModeSolution:
    """The counter-propagating (-x) variant of a solved mode."""
    if mode.family == "wire-TM01":
        return _wire_mode_solution(
            mode.radius_nm, mode.wavelength_nm, mode.extra["eps_metal"],
            mode.extra["eps_cladding"], mode.n_eff, -mode.beta)
    return _fiber_mode_solution(
        mode.radius_nm, mode.wavelength_nm, abs(mode.n_eff), -mode.beta,
        mode.extra["n_core"] ** 2, mode.extra["n_clad"] ** 2,
        mode.extra["polarization"])


# ----------------------------------------------------------------------
# wire TM01
# ----------------------------------------------------------------------

def _wire_dispersion(n_eff, k0, a, eps_m, eps_d):
    beta = n_eff * k0
    g1 = np.sqrt(beta**2 - eps_m * k0**2 + 0j)
    g2 = np.sqrt(beta**2 - eps_d * k0**2 + 0j)
    return (eps_m / g1) * iv(1, g1 * a) / iv(0, g1 * a) \
        + (eps_d / g2) * kv(1, g2 * a) / kv(0, g2 * a)


def solve_wire_tm01(radius_nm: float, wavelength_nm: float, eps_metal: complex,
                    eps_cladding: complex = 1.0 + 0j,
                    lossless: bool = False) -> ModeSolution:
    """Lowest azimuthally-symmetric TM plasmon mode of a metal cylinder.

    With ``lossless=True`` the imaginary part of the metal permittivity
    is zeroed before solving (the plotting convention used for the
    reported beta/gamma and surface-field scalars).
    """
    if np.real(eps_metal) >= 0:
        raise ValueError("wire TM01 requires Re(eps_metal) < 0")
    if not 5.0 <= radius_nm <= 200.0:
        raise ValueError(f"radius {radius_nm} nm outside [5, 200] nm")
    if lossless:
        eps_metal = complex(np.real(eps_metal), 0.0)

    a = radius_nm * 1e-9
    k0 = 2.0 * np.pi / (wavelength_nm * 1e-9)
    grid = np.linspace(1.005, 6.0, 800)
    vals = np.array([_wire_dispersion(n, k0, a, eps_metal, eps_cladding)
                     for n in grid])
    order = np.argsort(np.abs(vals))

    root = None
    for i0 in order[:12]:
        z = grid[i0] + 0j
        for _ in range(100):
            h = 1e-7
            f = _wire_dispersion(z, k0, a, eps_metal, eps_cladding)
            fp = (_wire_dispersion(z + h, k0, a, eps_metal, eps_cladding)
                  - _wire_dispersion(z - h, k0, a, eps_metal, eps_cladding)) / (2 * h)
            step = f / fp
            z = z - step
            if abs(step) < 1e-13 * abs(z):
                break
        if (abs(_wire_dispersion(z, k0, a, eps_metal, eps_cladding)) < 1e-10
                and z.real > np.sqrt(abs(eps_cladding))):
            root = z
            break
    if root is None:
        raise ModeError(
            f"no TM01 root for a={radius_nm} nm, lambda={wavelength_nm} nm",
            residual_map=(grid, np.abs(vals)),
        )
    return _wire_mode_solution(radius_nm, wavelength_nm, eps_metal,
                               eps_cladding, root, root * k0)


def _wire_mode_solution(radius_nm, wavelength_nm, eps_metal, eps_cladding,
                        n_eff, beta) -> ModeSolution:
    a = radius_nm * 1e-9
    k0 = 2.0 * np.pi / (wavelength_nm * 1e-9)
    w = k0 * C0
    g1 = np.sqrt(beta**2 - eps_metal * k0**2 + 0j)
    g2 = np.sqrt(beta**2 - eps_cladding * k0**2 + 0j)
    cont = iv(0, g1 * a) / kv(0, g2 * a)  # outside amplitude from E_ax continuity

    def evaluator(x, y, z):
        r = np.sqrt(y**2 + z**2)
        phi = np.arctan2(z, y)
        inside = r <= a
        ri = np.where(inside, r, 0.0)
        ro = np.where(inside, a, r)
        phase = np.exp(1j * beta * x)
        e_ax = np.where(inside, iv(0, g1 * ri), cont * kv(0, g2 * ro))
        e_r = np.where(inside, -1j * (beta / g1) * iv(1, g1 * ri),
                       1j * (beta / g2) * cont * kv(1, g2 * ro))
        h_phi = np.where(
            inside, -1j * (w * EPS0 * eps_metal / g1) * iv(1, g1 * ri),
            1j * (w * EPS0 * eps_cladding / g2) * cont * kv(1, g2 * ro))
        cp, sp = np.cos(phi), np.sin(phi)
        E = np.stack([e_ax + 0j, e_r * cp, e_r * sp]) * phase
        H = np.stack([np.zeros_like(e_ax, dtype=complex),
                      -h_phi * sp, h_phi * cp]) * phase
        return E, H

    resid = abs(_wire_dispersion(n_eff, k0, a, eps_metal, eps_cladding))
    return ModeSolution(
        family="wire-TM01", wavelength_nm=wavelength_nm, beta=beta,
        gamma_t=g1, n_eff=n_eff, radius_nm=radius_nm, amplitude=1.0,
        evaluator=evaluator, residual=resid,
        extra={"eps_metal": eps_metal, "eps_cladding": eps_cladding})


def surface_field_ratio(mode: ModeSolution) -> float:
    """Transverse field at the wire surface over the on-axis axial field.

    This is the quoted "transverse-to-longitudinal" scalar; the axial
    reference is the E0 = 1 on-axis normalization.
    """
    E, _ = eval_mode_field(mode, 0.0, 0.0, mode.radius_nm * (1 - 1e-12))
    return float(np.abs(E[2]))


# ----------------------------------------------------------------------
# step-index fiber HE11
# ----------------------------------------------------------------------

def _kvp(n, x):
    return -0.5 * (kv(n - 1, x) + kv(n + 1, x))


def _he_matrix(beta, k0, a, eps1, eps2, l=1):
    """Continuity matrix for (E_ax, H_ax, E_phi, H_phi) at r = a.

    Unknowns (A, B, C, D): A, C scale E_ax and B, D scale H_ax, inside
    (J_l) and outside (K_l) respectively.
    """
    w = k0 * C0
    h = np.sqrt(eps1 * k0**2 - beta**2 + 0j)
    q = np.sqrt(beta**2 - eps2 * k0**2 + 0j)
    h2, mq2 = h**2, -(q**2)
    Ji, Jd = jv(l, h * a), h * jvp(l, h * a)
    Ko, Kd = kv(l, q * a), q * _kvp(l, q * a)
    il_a = 1j * l / a
    M = np.zeros((4, 4), dtype=complex)
    M[0] = [Ji, 0, -Ko, 0]
    M[1] = [0, Ji, 0, -Ko]
    M[2] = [(1j / h2) * beta * il_a * Ji, -(1j / h2) * w * MU0 * Jd,
            -(1j / mq2) * beta * il_a * Ko, (1j / mq2) * w * MU0 * Kd]
    M[3] = [(1j / h2) * w * EPS0 * eps1 * Jd, (1j / h2) * beta * il_a * Ji,
            -(1j / mq2) * w * EPS0 * eps2 * Kd, -(1j / mq2) * beta * il_a * Ko]
    # E_phi = (i/kap^2)(beta*(il/r)E_ax - w*mu0*dH_ax/dr)
    # H_phi = (i/kap^2)(beta*(il/r)H_ax + w*eps0*eps*dE_ax/dr)
    return M


def _he_det(beta, k0, a, eps1, eps2, l=1):
    return np.linalg.det(_he_matrix(beta, k0, a, eps1, eps2, l))


def fiber_v_number(radius_nm, wavelength_nm, n_core, n_clad):
    k0 = 2.0 * np.pi / (wavelength_nm * 1e-9)
    return k0 * radius_nm * 1e-9 * np.sqrt(n_core**2 - n_clad**2)


def solve_fiber_he11(radius_nm: float, wavelength_nm: float, n_core: float,
                     n_clad: float = 1.0, polarization: str = "z",
                     direction: int = +1):
    """Fundamental HE11 mode of a step-index fiber along x.

    ``polarization`` ("y" or "z") selects the quasi-linear orientation of
    the on-axis transverse field.  Returns (mode, warnings); warnings is
    non-empty in the multimode regime.  Normalized to unit power flux.
    """
    if n_core <= n_clad:
        raise ModeError("core index must exceed cladding index")
    warnings = []
    V = fiber_v_number(radius_nm, wavelength_nm, n_core, n_clad)
    if V > 2.405:
        warnings.append(
            f"V = {V:.3f} > 2.405: multimode regime, returning HE11 anyway")

    a = radius_nm * 1e-9
    k0 = 2.0 * np.pi / (wavelength_nm * 1e-9)
    eps1, eps2 = n_core**2, n_clad**2
    lo, hi = n_clad * (1 + 1e-6), n_core * (1 - 1e-6)
    ns = np.linspace(lo, hi, 1500)
    det = np.array([_he_det(n * k0, k0, a, eps1, eps2).real for n in ns])
    roots = []
    for i in range(len(ns) - 1):
        if det[i] * det[i + 1] < 0:
            roots.append(brentq(
                lambda n: _he_det(n * k0, k0, a, eps1, eps2).real,
                ns[i], ns[i + 1], xtol=1e-15))
    if not roots:
        raise ModeError(f"no bound HE11 mode (V = {V:.3f})",
                        residual_map=(ns, np.abs(det)))
    n_eff = max(roots)  # the fundamental has the largest effective index
    beta = direction * n_eff * k0
    return _fiber_mode_solution(radius_nm, wavelength_nm, n_eff, beta,
                                eps1, eps2, polarization), warnings


def _fiber_circular_fields(beta, k0, a, eps1, eps2, l, coeffs, y, z):
    """One circular (exp(i*l*phi)) component at points (y, z) in meters."""
    w = k0 * C0
    A, B, C, D = coeffs
    r = np.sqrt(y**2 + z**2)
    phi = np.arctan2(z, y)
    h = np.sqrt(eps1 * k0**2 - beta**2 + 0j)
    q = np.sqrt(beta**2 - eps2 * k0**2 + 0j)
    inside = r <= a
    ri = np.where(inside, r, 0.0)
    ro = np.where(inside, a, r)
    rs_i = np.maximum(ri, 1e-15)
    # inside, kap^2 = h^2
    eax, ead = A * jv(l, h * ri), A * h * jvp(l, h * ri)
    hax, had = B * jv(l, h * ri), B * h * jvp(l, h * ri)
    il_r = 1j * l / rs_i
    e_r_i = (1j / h**2) * (beta * ead + w * MU0 * il_r * hax)
    e_p_i = (1j / h**2) * (beta * il_r * eax - w * MU0 * had)
    h_r_i = (1j / h**2) * (beta * had - w * EPS0 * eps1 * il_r * eax)
    h_p_i = (1j / h**2) * (beta * il_r * hax + w * EPS0 * eps1 * ead)
    eax_i, hax_i = eax, hax
    # outside, kap^2 = -q^2
    eax, ead = C * kv(l, q * ro), C * q * _kvp(l, q * ro)
    hax, had = D * kv(l, q * ro), D * q * _kvp(l, q * ro)
    il_r = 1j * l / ro
    e_r_o = (-1j / q**2) * (beta * ead + w * MU0 * il_r * hax)
    e_p_o = (-1j / q**2) * (beta * il_r * eax - w * MU0 * had)
    h_r_o = (-1j / q**2) * (beta * had - w * EPS0 * eps2 * il_r * eax)
    h_p_o = (-1j / q**2) * (beta * il_r * hax + w * EPS0 * eps2 * ead)

    e_ax = np.where(inside, eax_i, eax)
    h_ax = np.where(inside, hax_i, hax)
    e_r = np.where(inside, e_r_i, e_r_o)
    e_p = np.where(inside, e_p_i, e_p_o)
    h_r = np.where(inside, h_r_i, h_r_o)
    h_p = np.where(inside, h_p_i, h_p_o)
    ph = np.exp(1j * l * phi)
    cp, sp = np.cos(phi), np.sin(phi)
    E = np.stack([e_ax, e_r * cp - e_p * sp, e_r * sp + e_p * cp]) * ph
    H = np.stack([h_ax, h_r * cp - h_p * sp, h_r * sp + h_p * cp]) * ph
    return E, H


def _fiber_mode_solution(radius_nm, wavelength_nm, n_eff, beta, eps1, eps2,
                         polarization) -> ModeSolution:
    a = radius_nm * 1e-9
    k0 = 2.0 * np.pi / (wavelength_nm * 1e-9)

    def nullspace(l):
        M = _he_matrix(beta, k0, a, eps1, eps2, l=l)
        _, s, vh = np.linalg.svd(M)
        return vh[-1].conj(), s[-1] / s[0]

    cpos, r1 = nullspace(+1)
    cneg, r2 = nullspace(-1)

    # coefficients making the on-axis transverse E linear along y or z
    eps_r = 1e-12
    Ep, _ = _fiber_circular_fields(beta, k0, a, eps1, eps2, +1, cpos,
                                   np.array([eps_r]), np.array([0.0]))
    En, _ = _fiber_circular_fields(beta, k0, a, eps1, eps2, -1, cneg,
                                   np.array([eps_r]), np.array([0.0]))
    A2 = np.array([[Ep[1, 0], En[1, 0]], [Ep[2, 0], En[2, 0]]])
    target = {"y": np.array([1.0, 0.0]), "z": np.array([0.0, 1.0])}[polarization]
    ab = np.linalg.solve(A2, target)

    def raw_eval(x, y, z):
        E1, H1 = _fiber_circular_fields(beta, k0, a, eps1, eps2, +1, cpos, y, z)
        E2, H2 = _fiber_circular_fields(beta, k0, a, eps1, eps2, -1, cneg, y, z)
        phase = np.exp(1j * beta * x)
        return ((ab[0] * E1 + ab[1] * E2) * phase,
                (ab[0] * H1 + ab[1] * H2) * phase)

    # unit-power normalization: P = 1/2 Re int (E x H*) . e_x dA
    q = np.sqrt(beta**2 - eps2 * k0**2 + 0j).real
    rr = np.concatenate([np.linspace(1e-10, a, 300),
                         np.linspace(a * (1 + 1e-9), a + 4.0 / q, 900)])
    th = np.linspace(0, 2 * np.pi, 97)[:-1]
    R, T = np.meshgrid(rr, th, indexing="ij")
    Y, Z = R * np.cos(T), R * np.sin(T)
    E, H = raw_eval(np.zeros_like(Y), Y, Z)
    sx = 0.5 * np.real(E[1] * np.conj(H[2]) - E[2] * np.conj(H[1]))
    P = np.trapezoid(np.sum(sx, axis=1) * (th[1] - th[0]) * rr, rr)
    scale = 1.0 / np.sqrt(abs(P))

    def evaluator(x, y, z):
        E, H = raw_eval(x, y, z)
        return E * scale, H * scale

    return ModeSolution(
        family="fiber-HE11", wavelength_nm=wavelength_nm, beta=beta,
        gamma_t=np.sqrt(eps1 * k0**2 - beta**2 + 0j),
        n_eff=n_eff * (1 if beta.real >= 0 else -1),
        radius_nm=radius_nm, amplitude=scale, evaluator=evaluator,
        residual=max(r1, r2),
        extra={"n_core": float(np.sqrt(eps1)), "n_clad": float(np.sqrt(eps2)),
               "polarization": polarization})
