"""Run-time monitors: frequency-domain field maps, flux planes, energy
traces, time probes, and snapshot sequences.

Frequency monitors accumulate a running discrete Fourier transform with
the exp[i(k.r - w t)] phasor convention: field samples are multiplied by
exp(+i w t).  E components are taken at integer steps and H at the
interleaved half steps, so no extra phase correction is applied at
readout.  Normalization is 2/N over the N accumulated steps, which maps
a unit-amplitude monochromatic oscillation to unit phasor magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0


class MonitorError(ValueError):
    pass


def _node_range(lo_nm, hi_nm, origin_nm, dx_nm, n_nodes):
    """Inclusive node index range covering [lo, hi] nm along one axis."""
    i0 = int(np.floor((lo_nm - origin_nm) / dx_nm + 1e-9))
    i1 = int(np.ceil((hi_nm - origin_nm) / dx_nm - 1e-9))
    i0 = max(i0, 0)
    i1 = min(max(i1, i0 + 1), n_nodes - 1)
    return i0, i1


@dataclass
class FrequencyMonitor:
    """DFT of E and H over a box region at a list of wavelengths."""

    name: str
    region_nm: tuple              # ((x0,x1),(y0,y1),(z0,z1))
    wavelengths_nm: tuple

    def __post_init__(self):
        if len(self.wavelengths_nm) == 0:
            raise MonitorError(f"monitor {self.name}: empty wavelength list")
        self.omegas = 2.0 * np.pi * C0 / (np.asarray(self.wavelengths_nm,
                                                     dtype=float) * 1e-9)

    def bind(self, grid):
        """Attach to a simulation grid (origin nm, dx nm, node counts)."""
        self.grid = grid
        self.ranges = tuple(
            _node_range(lo, hi, grid.origin_nm[ax], grid.dx_nm,
                        grid.shape[ax])
            for ax, (lo, hi) in enumerate(self.region_nm))
        shp = tuple(r[1] - r[0] + 1 for r in self.ranges)
        nw = len(self.omegas)
        self.e_acc = np.zeros((nw, 3) + shp, dtype=complex)
        self.h_acc = np.zeros((nw, 3) + shp, dtype=complex)
        self.n_steps = 0

    def _view(self, comp_arrays):
        (i0, i1), (j0, j1), (k0, k1) = self.ranges
        return [a[i0:i1 + 1, j0:j1 + 1, k0:k1 + 1] for a in comp_arrays]

    def accumulate(self, e_fields, h_fields, t_e_s, t_h_s):
        ev = self._view(e_fields)
        hv = self._view(h_fields)
        for w in range(len(self.omegas)):
            pe = np.exp(1j * self.omegas[w] * t_e_s)
            ph = np.exp(1j * self.omegas[w] * t_h_s)
            for c in range(3):
                self.e_acc[w, c] += pe * ev[c]
                self.h_acc[w, c] += ph * hv[c]
        self.n_steps += 1

    def _wi(self, wavelength_nm):
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        i = int(np.argmin(np.abs(wl - wavelength_nm)))
        if abs(wl[i] - wavelength_nm) > 1e-6:
            raise MonitorError(
                f"monitor {self.name} has no wavelength {wavelength_nm} nm "
                f"(has {list(wl)})")
        return i

    def raw(self, wavelength_nm):
        """Staggered-node complex (E, H) phasors, normalized 2/N."""
        s = 2.0 / max(self.n_steps, 1)
        i = self._wi(wavelength_nm)
        return s * self.e_acc[i], s * self.h_acc[i]

    def colocated(self, wavelength_nm):
        """(E, H) phasors averaged to the cell centers of the region.

        Returned arrays have shape (3, ni-1, nj-1, nk-1) for a region of
        (ni, nj, nk) nodes.
        """
        e, h = self.raw(wavelength_nm)
        ec = np.empty((3,) + tuple(s - 1 for s in e.shape[1:]), dtype=complex)
        hc = np.empty_like(ec)
        # Ex lives at (i+1/2, j, k): average the 4 nodes around the center
        ec[0] = 0.25 * (e[0, :-1, :-1, :-1] + e[0, :-1, 1:, :-1]
                        + e[0, :-1, :-1, 1:] + e[0, :-1, 1:, 1:])
        ec[1] = 0.25 * (e[1, :-1, :-1, :-1] + e[1, 1:, :-1, :-1]
                        + e[1, :-1, :-1, 1:] + e[1, 1:, :-1, 1:])
        ec[2] = 0.25 * (e[2, :-1, :-1, :-1] + e[2, 1:, :-1, :-1]
                        + e[2, :-1, 1:, :-1] + e[2, 1:, 1:, :-1])
        # Hx lives at (i, j+1/2, k+1/2): average along x only
        hc[0] = 0.5 * (h[0, :-1, :-1, :-1] + h[0, 1:, :-1, :-1])
        hc[1] = 0.5 * (h[1, :-1, :-1, :-1] + h[1, :-1, 1:, :-1])
        hc[2] = 0.5 * (h[2, :-1, :-1, :-1] + h[2, :-1, :-1, 1:])
        return ec, hc

    def cell_centers_nm(self):
        out = []
        for ax, (i0, i1) in enumerate(self.ranges):
            x0 = self.grid.origin_nm[ax]
            out.append(x0 + (np.arange(i0, i1) + 0.5) * self.grid.dx_nm)
        return tuple(out)


class FluxMonitor(FrequencyMonitor):
    """Power through an axis-normal plane, per wavelength.

    ``axis`` is the normal (0=x, 1=y, 2=z); ``orientation`` +1/-1 selects
    which way counts as positive outflow.
    """

    def __init__(self, name, axis, position_nm, span_nm, wavelengths_nm,
                 orientation=+1):
        self.axis = int(axis)
        self.orientation = int(orientation)
        self.position_nm = float(position_nm)
        if self.axis not in (0, 1, 2):
            raise MonitorError("flux plane normal must be x, y or z")
        if self.orientation not in (-1, 1):
            raise MonitorError("flux orientation must be +1 or -1")
        span = list(span_nm)  # extents of the two in-plane axes, in order
        region = []
        for ax in range(3):
            region.append((position_nm, position_nm) if ax == self.axis
                          else tuple(span.pop(0)))
        super().__init__(name=name, region_nm=tuple(region),
                         wavelengths_nm=tuple(wavelengths_nm))

    def bind(self, grid):
        super().bind(grid)
        # force a one-cell-thick slab along the normal
        (i0, i1) = self.ranges[self.axis]
        if i1 - i0 != 1:
            i = int(round((self.position_nm - grid.origin_nm[self.axis])
                          / grid.dx_nm))
            i = min(max(i, 0), grid.shape[self.axis] - 2)
            ranges = list(self.ranges)
            ranges[self.axis] = (i, i + 1)
            self.ranges = tuple(ranges)
            shp = tuple(r[1] - r[0] + 1 for r in self.ranges)
            self.e_acc = np.zeros((len(self.omegas), 3) + shp, dtype=complex)
            self.h_acc = np.zeros_like(self.e_acc)

    def power(self, wavelength_nm) -> float:
        """Time-averaged outflow power in W (positive along orientation)."""
        e, h = self.colocated(wavelength_nm)
        s = 0.5 * np.real(np.cross(e, np.conj(h), axis=0))
        area = (self.grid.dx_nm * 1e-9) ** 2
        return float(self.orientation * np.sum(s[self.axis]) * area)


@dataclass
class EnergyTrace:
    """Total-energy samples (step, t_fs, energy_J) every ``stride`` steps."""

    stride: int = 10
    rows: list = field(default_factory=list)

    def record(self, step, t_s, energy_j):
        self.rows.append((step, t_s * 1e15, energy_j))

    def as_array(self):
        return np.asarray(self.rows, dtype=float)

    def csv(self) -> str:
        lines = ["step,time_fs,energy_J"]
        lines += [f"{int(s)},{t:.6f},{e:.9e}" for s, t, e in self.rows]
        return "\n".join(lines) + "\n"


@dataclass
class TimeProbe:
    """Single E-field component sampled every step at one node."""

    position_nm: tuple
    component: int = 2
    t_fs: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def bind(self, grid):
        self.index = grid.e_node_index(self.component, self.position_nm)

    def record(self, e_fields, t_s):
        self.t_fs.append(t_s * 1e15)
        self.values.append(e_fields[self.component][self.index])

    def series(self):
        return np.asarray(self.t_fs), np.asarray(self.values)


@dataclass
class TimeSnapshots:
    """Cell-centered E-field frames of a region at a fixed step stride."""

    region_nm: tuple
    stride: int = 10
    frames: list = field(default_factory=list)
    times_fs: list = field(default_factory=list)

    def bind(self, grid):
        self.grid = grid
        self.ranges = tuple(
            _node_range(lo, hi, grid.origin_nm[ax], grid.dx_nm,
                        grid.shape[ax])
            for ax, (lo, hi) in enumerate(self.region_nm))

    def record(self, e_fields, t_s):
        (i0, i1), (j0, j1), (k0, k1) = self.ranges
        sub = [a[i0:i1 + 1, j0:j1 + 1, k0:k1 + 1] for a in e_fields]
        ec = np.empty((3,) + tuple(s - 1 for s in sub[0].shape))
        ec[0] = 0.25 * (sub[0][:-1, :-1, :-1] + sub[0][:-1, 1:, :-1]
                        + sub[0][:-1, :-1, 1:] + sub[0][:-1, 1:, 1:])
        ec[1] = 0.25 * (sub[1][:-1, :-1, :-1] + sub[1][1:, :-1, :-1]
                        + sub[1][:-1, :-1, 1:] + sub[1][1:, :-1, 1:])
        ec[2] = 0.25 * (sub[2][:-1, :-1, :-1] + sub[2][1:, :-1, :-1]
                        + sub[2][:-1, 1:, :-1] + sub[2][1:, 1:, :-1])
        self.frames.append(ec)
        self.times_fs.append(t_s * 1e15)

    def export(self):
        """Ordered (time_fs, frame) pairs."""
        return list(zip(self.times_fs, self.frames))
