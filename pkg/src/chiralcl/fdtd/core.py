"""Yee-grid time-domain Maxwell solver with dispersive media and CPML.

Coordinates are nm throughout the public interface; internally SI.  The
domain is a box ``extents_nm = ((x0,x1),(y0,y1),(z0,z1))`` on a uniform
cubic mesh.  Field components live at the standard staggered positions;
all six arrays share the node shape (nx+1, ny+1, nz+1) with the unused
outermost layer held at zero (PEC backstop behind the absorber).

Material is sampled at each E-node's own position (no subcell
averaging); dispersive media advance one auxiliary current pair per
pole.  The absorbing boundary is a 10-cell convolutional PML with
polynomial grading of order 3 towards a 1e-6 reflection target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0, epsilon_0 as EPS0, mu_0 as MU0

from ..geometry import Geometry
from ..materials import MaterialModel, Pole, eval_permittivity
from . import kernels
from .monitors import EnergyTrace, FrequencyMonitor, TimeProbe, TimeSnapshots

_PML_ORDER = 3
_PML_R0 = 1e-6
_ALPHA_MAX = 0.05
ETA0 = np.sqrt(MU0 / EPS0)
TWO_PI_C_M = 2.0 * np.pi * C0


class DivergenceError(RuntimeError):
    pass


def drude_equivalent(model: MaterialModel,
                     wavelength_nm: float) -> MaterialModel:
    """Single-relaxation-pole stand-in matching eps at one wavelength.

    A constant complex permittivity cannot be time-stepped directly, but
    eps = 1 - wp^2/(w^2 + i gamma w) can reproduce any eps with
    Re(eps) < 1 and Im(eps) > 0 exactly at the design frequency.
    """
    eps = eval_permittivity(model, wavelength_nm)
    d1, ei = 1.0 - eps.real, eps.imag
    if d1 <= 0 or ei < 0:
        raise ValueError(
            f"no stable relaxation-pole equivalent for eps={eps:.3f} "
            f"(needs Re<1 and Im>=0)")
    w0 = TWO_PI_C_M / (wavelength_nm * 1e-9)
    mag2 = d1 * d1 + ei * ei
    wp2 = w0 ** 2 * mag2 / d1
    gamma = w0 * ei / d1
    return MaterialModel(kind="dispersive-metal", name=model.name + "-fdtd",
                         eps_inf=1.0, poles=(Pole(wp2, 0.0, gamma),),
                         fitted_range_nm=(0.0, np.inf))


class PlacementError(ValueError):
    pass


@dataclass
class Grid:
    origin_nm: tuple
    dx_nm: float
    shape: tuple          # node counts per axis (n_cells + 1)

    # Offsets of each E component's node lattice, in cells.
    _E_OFF = ((0.5, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 0.5))

    def e_node_index(self, component, position_nm):
        off = self._E_OFF[component]
        idx = []
        for ax in range(3):
            i = int(round((position_nm[ax] - self.origin_nm[ax])
                          / self.dx_nm - off[ax]))
            idx.append(min(max(i, 0), self.shape[ax] - 1))
        return tuple(idx)

    def e_node_position_nm(self, component, index):
        off = self._E_OFF[component]
        return tuple(self.origin_nm[ax] + (index[ax] + off[ax]) * self.dx_nm
                     for ax in range(3))


def _pml_profiles(n_cells, npml, dx_m, dt, half):
    """CPML recursion coefficients (b, c) for one axis.

    ``half=True`` grades at the half-integer derivative positions used
    by the H update.  c is pre-scaled by 1/dx.
    """
    n1 = n_cells + 1
    b = np.ones(n1)
    c = np.zeros(n1)
    if npml == 0:
        return b, c
    smax = -(_PML_ORDER + 1) * np.log(_PML_R0) / (2.0 * ETA0 * npml * dx_m)
    for i in range(n1):
        pos = i + (0.5 if half else 0.0)
        if pos < npml:
            depth = (npml - pos) / npml
        elif pos > n_cells - npml:
            depth = (pos - (n_cells - npml)) / npml
        else:
            continue
        sigma = smax * depth ** _PML_ORDER
        alpha = _ALPHA_MAX * (1.0 - depth)
        bb = np.exp(-(sigma + alpha) * dt / EPS0)
        b[i] = bb
        c[i] = sigma * (bb - 1.0) / (sigma + alpha) / dx_m
    return b, c


@dataclass
class RunResult:
    steps: int
    monitors: dict
    energy: EnergyTrace
    probes: list
    snapshots: list
    source_record: dict       # name -> (t_s array, waveform array)
    peak_energy: float
    final_energy: float
    dt_s: float


class Simulation:
    """One FDTD scene: geometry + materials + sources + monitors."""

    def __init__(self, extents_nm, cell_nm, geometry: Geometry | None = None,
                 materials: dict | None = None, courant: float = 0.5,
                 npml: int = 10, termination: float = 1e-5,
                 max_steps: int = 200_000,
                 design_wavelength_nm: float = 600.0):
        self.design_wavelength_nm = float(design_wavelength_nm)
        if courant > 0.5:
            raise ValueError("Courant factor must be <= 0.5")
        if 0 < npml < 8:
            raise ValueError("absorbing boundary needs >= 8 cells")
        self.extents_nm = tuple((float(a), float(b)) for a, b in extents_nm)
        self.dx_nm = float(cell_nm)
        self.dx_m = self.dx_nm * 1e-9
        self.dt = courant * self.dx_m / C0
        self.npml = int(npml)
        self.termination = float(termination)
        self.max_steps = int(max_steps)

        self.n_cells = []
        for (a, b) in self.extents_nm:
            n = (b - a) / self.dx_nm
            if abs(n - round(n)) > 1e-6:
                raise ValueError(
                    f"extent {b - a} nm is not a whole number of "
                    f"{self.dx_nm} nm cells")
            self.n_cells.append(int(round(n)))
        if any(n <= 2 * npml + 4 for n in self.n_cells):
            raise ValueError("domain too small for the absorbing boundary")
        shape = tuple(n + 1 for n in self.n_cells)
        self.grid = Grid(origin_nm=tuple(a for a, _ in self.extents_nm),
                         dx_nm=self.dx_nm, shape=shape)

        self.e = [np.zeros(shape) for _ in range(3)]
        self.h = [np.zeros(shape) for _ in range(3)]
        self._setup_pml()
        self._setup_materials(geometry, materials or {})

    # ------------------------------------------------------------------
    def _setup_pml(self):
        nx, ny, nz = self.n_cells
        sl = 2 * self.npml + 2
        shape = self.grid.shape
        self.bex, self.cex_p = _pml_profiles(nx, self.npml, self.dx_m,
                                             self.dt, half=False)
        self.bey, self.cey_p = _pml_profiles(ny, self.npml, self.dx_m,
                                             self.dt, half=False)
        self.bez, self.cez_p = _pml_profiles(nz, self.npml, self.dx_m,
                                             self.dt, half=False)
        self.bhx, self.chx = _pml_profiles(nx, self.npml, self.dx_m,
                                           self.dt, half=True)
        self.bhy, self.chy = _pml_profiles(ny, self.npml, self.dx_m,
                                           self.dt, half=True)
        self.bhz, self.chz = _pml_profiles(nz, self.npml, self.dx_m,
                                           self.dt, half=True)

        def xs():
            return np.zeros((sl, shape[1], shape[2]))

        def ys():
            return np.zeros((shape[0], sl, shape[2]))

        def zs():
            return np.zeros((shape[0], shape[1], sl))

        self.psi_h = {"hx_y": ys(), "hx_z": zs(), "hy_z": zs(),
                      "hy_x": xs(), "hz_x": xs(), "hz_y": ys()}
        self.psi_e = {"ex_y": ys(), "ex_z": zs(), "ey_z": zs(),
                      "ey_x": xs(), "ez_x": xs(), "ez_y": ys()}

    # ------------------------------------------------------------------
    def _setup_materials(self, geometry, materials):
        shape = self.grid.shape
        self.geometry = geometry
        self.ce = [np.full(shape, self.dt / EPS0) for _ in range(3)]
        self.eps_inf = [np.ones(shape) for _ in range(3)]
        self.metal = []     # per component: dict of update state, or None

        if geometry is None:
            self.metal = [None, None, None]
            return
        tags = geometry.material_tags()
        models = []
        for tag in tags:
            if tag not in materials:
                raise ValueError(f"no material model for tag {tag!r}")
            models.append(materials[tag])

        for c in range(3):
            coords = [np.arange(shape[ax], dtype=float) for ax in range(3)]
            off = Grid._E_OFF[c]
            pts = np.meshgrid(*[(coords[ax] + off[ax]) * self.dx_nm
                                + self.grid.origin_nm[ax]
                                for ax in range(3)], indexing="ij")
            midx = geometry.material_index_at(*pts)
            state = None
            for t, model in enumerate(models):
                mask = midx == t
                if not mask.any():
                    continue
                if model.kind == "constant-dielectric":
                    self.eps_inf[c][mask] = abs(model.refractive_index) ** 2
                else:
                    if model.kind == "synthetic-metal":
                        model = drude_equivalent(model,
                                                 self.design_wavelength_nm)
                    self.eps_inf[c][mask] = model.eps_inf
                    state = self._metal_state(model, mask, state)
            self.ce[c] = self.dt / (EPS0 * self.eps_inf[c])
            self.metal.append(state)

    def _metal_state(self, model, mask, prev):
        if prev is not None:
            raise ValueError("only one dispersive material per scene "
                             "is supported")
        idx = np.flatnonzero(mask.ravel())
        dt = self.dt
        ad, bd, c1, c2, c3 = [], [], [], [], []
        for pole in model.poles:
            g = pole.gamma
            if pole.w0 == 0.0:       # relaxation (Drude) pole
                den = 1.0 + g * dt / 2.0
                bd.append((1.0 - g * dt / 2.0) / den)
                ad.append(EPS0 * pole.amplitude * dt / den)
            else:                    # resonant (Lorentz) pole
                den = 1.0 + g * dt / 2.0
                c1.append((2.0 - (pole.w0 * dt) ** 2) / den)
                c2.append((g * dt / 2.0 - 1.0) / den)
                c3.append(EPS0 * pole.amplitude * pole.w0 ** 2 * dt ** 2
                          / den)
        n = idx.size
        return {
            "idx": idx,
            "jd": np.zeros((len(ad), n)),
            "ad": np.asarray(ad), "bd": np.asarray(bd),
            "pl": np.zeros((len(c1), n)), "plm": np.zeros((len(c1), n)),
            "c1": np.asarray(c1), "c2": np.asarray(c2),
            "c3": np.asarray(c3),
            "jsum": np.zeros(n),
            "cj": dt / (EPS0 * model.eps_inf),
        }

    # ------------------------------------------------------------------
    def _bind_source(self, src):
        nodes = []
        for c in range(3):
            if abs(src.orientation[c]) < 1e-12:
                continue
            idx = self.grid.e_node_index(c, src.position_nm)
            for ax in range(3):
                if not (self.npml + 1 <= idx[ax]
                        <= self.grid.shape[ax] - 2 - self.npml):
                    raise PlacementError(
                        f"source at {src.position_nm} nm lands in the "
                        f"absorbing boundary along axis {ax}")
            nodes.append((c, idx, src.orientation[c]))
        return nodes

    def total_energy(self) -> float:
        """(1/2) integral of (eps |E|^2 + mu |H|^2) over the interior.

        Trapezoidal weights along the node-aligned axes make a uniform
        field integrate exactly; the absorbing layers are excluded.
        """
        p = self.npml
        dv = self.dx_m ** 3
        total = 0.0

        def w(n_nodes, lo, hi):
            full = np.ones(hi - lo)
            full[0] = full[-1] = 0.5
            return full

        for c in range(3):
            sl, wts = [], []
            for ax in range(3):
                n1 = self.grid.shape[ax]
                lo, hi = p, n1 - p
                if Grid._E_OFF[c][ax] == 0.5:
                    sl.append(slice(lo, hi - 1))
                    wts.append(np.ones(hi - 1 - lo))
                else:
                    sl.append(slice(lo, hi))
                    wts.append(w(n1, lo, hi))
            wgt = wts[0][:, None, None] * wts[1][None, :, None] \
                * wts[2][None, None, :]
            total += 0.5 * EPS0 * np.sum(
                self.eps_inf[c][tuple(sl)] * self.e[c][tuple(sl)] ** 2 * wgt)

        for c in range(3):
            sl, wts = [], []
            for ax in range(3):
                n1 = self.grid.shape[ax]
                lo, hi = p, n1 - p
                half = (c != ax)     # H_c is at half positions except axis c
                if half:
                    sl.append(slice(lo, hi - 1))
                    wts.append(np.ones(hi - 1 - lo))
                else:
                    sl.append(slice(lo, hi))
                    wts.append(w(n1, lo, hi))
            wgt = wts[0][:, None, None] * wts[1][None, :, None] \
                * wts[2][None, None, :]
            total += 0.5 * MU0 * np.sum(self.h[c][tuple(sl)] ** 2 * wgt)
        return float(total * dv)

    # ------------------------------------------------------------------
    def run(self, sources, monitors=(), energy_stride: int = 10,
            settle_fs: float = 0.0) -> RunResult:
        """Advance until the energy termination criterion or max_steps.

        ``settle_fs`` forces at least this much post-source time before
        termination checks begin (useful for slow ring-down scenes).
        """
        if not isinstance(sources, (list, tuple)):
            sources = [sources]
        freq_monitors, probes, snaps = [], [], []
        for m in monitors:
            m.bind(self.grid)
            if isinstance(m, FrequencyMonitor):
                freq_monitors.append(m)
                for src in sources:
                    src.check_band(m.wavelengths_nm)
            elif isinstance(m, TimeProbe):
                probes.append(m)
            elif isinstance(m, TimeSnapshots):
                snaps.append(m)
            else:
                raise TypeError(f"unknown monitor type {type(m)!r}")

        bound = [(src, self._bind_source(src)) for src in sources]
        t_off = max(src.end_time_s for src in sources) + settle_fs * 1e-15
        trace = EnergyTrace(stride=energy_stride)
        record = {f"src{i}": ([], []) for i in range(len(sources))}

        peak = 0.0
        energy = 0.0
        dt = self.dt
        ps_h = self.psi_h
        ps_e = self.psi_e
        step = 0
        for step in range(1, self.max_steps + 1):
            t_h = (step - 0.5) * dt
            t_e = step * dt

            kernels.update_h(*self.e, *self.h, dt / MU0, 1.0 / self.dx_m,
                             self.npml, self.bhx, self.chx, self.bhy,
                             self.chy, self.bhz, self.chz,
                             ps_h["hx_y"], ps_h["hx_z"], ps_h["hy_z"],
                             ps_h["hy_x"], ps_h["hz_x"], ps_h["hz_y"])

            for c in range(3):
                st = self.metal[c]
                if st is not None and st["idx"].size:
                    kernels.metal_currents(
                        self.e[c].ravel(), st["idx"], st["jd"], st["ad"],
                        st["bd"], st["pl"], st["plm"], st["c1"], st["c2"],
                        st["c3"], st["jsum"], 1.0 / dt)

            kernels.update_e(*self.e, *self.h, *self.ce, 1.0 / self.dx_m,
                             self.npml, self.bex, self.cex_p, self.bey,
                             self.cey_p, self.bez, self.cez_p,
                             ps_e["ex_y"], ps_e["ex_z"], ps_e["ey_z"],
                             ps_e["ey_x"], ps_e["ez_x"], ps_e["ez_y"])

            for c in range(3):
                st = self.metal[c]
                if st is not None and st["idx"].size:
                    kernels.apply_currents(self.e[c].ravel(), st["idx"],
                                           st["jsum"], st["cj"])

            for i, (src, nodes) in enumerate(bound):
                f = src.waveform(t_h)
                record[f"src{i}"][0].append(t_h)
                record[f"src{i}"][1].append(f)
                if f != 0.0:
                    for c, idx, weight in nodes:
                        self.e[c][idx] -= self.ce[c][idx] * weight * f

            for m in freq_monitors:
                m.accumulate(self.e, self.h, t_e, t_h)
            for pr in probes:
                pr.record(self.e, t_e)
            for sn in snaps:
                if step % sn.stride == 0:
                    sn.record(self.e, t_e)

            if step % energy_stride == 0:
                energy = self.total_energy()
                trace.record(step, t_e, energy)
                if not np.isfinite(energy):
                    raise DivergenceError(
                        f"non-finite energy at step {step} "
                        f"(dt={dt:.3e}s, dx={self.dx_nm}nm)")
                peak = max(peak, energy)
                if t_e > t_off:
                    if energy > 10.0 * peak:
                        raise DivergenceError(
                            f"energy grew past 10x peak after source "
                            f"turn-off at step {step}; check the Courant "
                            f"factor ({dt * C0 / self.dx_m:.2f}) and "
                            f"material poles")
                    if peak > 0 and energy <= self.termination * peak:
                        break

        return RunResult(
            steps=step,
            monitors={m.name: m for m in freq_monitors},
            energy=trace,
            probes=probes,
            snapshots=snaps,
            source_record={k: (np.asarray(t), np.asarray(v))
                           for k, (t, v) in record.items()},
            peak_energy=peak, final_energy=energy, dt_s=dt)
