"""Dispersive and constant material models.

Three kinds of material are supported:

* ``dispersive-metal`` -- a Drude + Lorentz pole expansion.  The bundled
  gold model is fitted to the CRC-derived n,k table shipped in
  ``data/gold_nk.txt``; the pole coefficients live in ``data/gold_poles.json``.
* ``constant-dielectric`` -- a lossless constant refractive index.
* ``synthetic-metal`` -- a wavelength-independent complex permittivity
  built from a complex index n + i*kappa (used for the loss sweeps).

Sign convention: fields go as exp(-i w t), so a lossy medium has
Im(eps) > 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

TWO_PI_C = 2.0 * np.pi * 299792458.0


class MaterialRangeError(ValueError):
    """Wavelength outside a dispersive model's fitted range."""


@dataclass(frozen=True)
class Pole:
    """One pole of the expansion.

    ``w0 == 0`` marks a Drude pole with plasma frequency sqrt(amplitude);
    otherwise a Lorentz pole with oscillator strength ``amplitude``.
    Frequencies and dampings are angular (rad/s).
    """

    amplitude: float
    w0: float
    gamma: float


@dataclass(frozen=True)
class MaterialModel:
    kind: str  # dispersive-metal | constant-dielectric | synthetic-metal
    name: str = "material"
    refractive_index: complex = 1.0 + 0j
    eps_inf: float = 1.0
    poles: tuple[Pole, ...] = ()
    fitted_range_nm: tuple[float, float] = (0.0, np.inf)

    @property
    def is_dispersive(self) -> bool:
        return self.kind == "dispersive-metal"


def eval_permittivity(material: MaterialModel, wavelength_nm) -> complex:
    """Relative permittivity at the given vacuum wavelength (nm)."""
    wavelength_nm = np.asarray(wavelength_nm, dtype=float)
    if material.kind == "dispersive-metal":
        lo, hi = material.fitted_range_nm
        if np.any(wavelength_nm < lo) or np.any(wavelength_nm > hi):
            raise MaterialRangeError(
                f"wavelength {wavelength_nm} nm outside fitted range "
                f"[{lo}, {hi}] nm of {material.name}"
            )
        w = TWO_PI_C / (wavelength_nm * 1e-9)
        eps = np.full_like(w, material.eps_inf, dtype=complex)
        for p in material.poles:
            if p.w0 == 0.0:
                eps = eps - p.amplitude / (w**2 + 1j * p.gamma * w)
            else:
                eps = eps + p.amplitude * p.w0**2 / (
                    p.w0**2 - w**2 - 1j * p.gamma * w
                )
        return complex(eps) if eps.ndim == 0 else eps
    # constant kinds: eps = n^2 exactly, independent of wavelength
    eps = complex(material.refractive_index) ** 2
    if wavelength_nm.ndim == 0:
        return eps
    return np.full(wavelength_nm.shape, eps)


def constant_dielectric(n: float, name: str = "dielectric") -> MaterialModel:
    """Lossless constant-index dielectric (n real, >= 1)."""
    if n < 1.0:
        raise ValueError(f"constant dielectric requires n >= 1, got {n}")
    return MaterialModel(kind="constant-dielectric", name=name,
                         refractive_index=complex(n))


def vacuum() -> MaterialModel:
    return constant_dielectric(1.0, name="vacuum")


def silica(n: float = 1.45) -> MaterialModel:
    return constant_dielectric(n, name="silica")


def make_synthetic_metal(n: float, kappa: float,
                         name: str = "synthetic-metal") -> MaterialModel:
    """Wavelength-independent metal with eps = (n + i*kappa)^2 exactly."""
    if kappa <= 0:
        raise ValueError(f"synthetic metal requires kappa > 0, got {kappa}")
    return MaterialModel(kind="synthetic-metal", name=name,
                         refractive_index=n + 1j * kappa)


def _load_json(fname: str) -> dict:
    with resources.files("chiralcl.data").joinpath(fname).open() as fh:
        return json.load(fh)


def gold() -> MaterialModel:
    """Dispersive gold from the bundled fitted pole expansion."""
    d = _load_json("gold_poles.json")
    poles = [Pole(d["drude"]["wp"] ** 2, 0.0, d["drude"]["gamma"])]
    poles += [Pole(p["deps"], p["w0"], p["gamma"]) for p in d["lorentz"]]
    return MaterialModel(
        kind="dispersive-metal",
        name="gold",
        eps_inf=d["eps_inf"],
        poles=tuple(poles),
        fitted_range_nm=tuple(d["fitted_range_nm"]),
    )


def gold_nk_table() -> np.ndarray:
    """The bundled (wavelength_nm, n, k) reference table, shape (N, 3)."""
    text = resources.files("chiralcl.data").joinpath("gold_nk.txt").read_text()
    rows = [
        [float(v) for v in line.split()]
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    return np.array(rows)
