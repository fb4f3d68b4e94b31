"""Execute a parsed Scenario: build the solver, run, analyze, archive.

Every artifact (binary arrays, CSV tables, heatmaps) lands in the output
directory and is inventoried with a content hash in the run manifest.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from . import arrayio, chirality, directionality, fits, modes, render
from .fdtd import (DipoleSource, EnergyTrace, FluxMonitor, FrequencyMonitor,
                   Simulation, TimeProbe, circular_pair)
from .geometry import Capsule, Cylinder, Geometry, Sphere
from .manifest import RunManifest, sha256_text
from .materials import (constant_dielectric, gold, make_synthetic_metal,
                        vacuum)
from .scenario import Scenario, serialize_scenario


def build_materials(spec: dict):
    out = {}
    for tag, m in spec.items():
        if m["kind"] == "gold":
            out[tag] = gold()
        elif m["kind"] == "vacuum":
            out[tag] = vacuum()
        elif m["kind"] == "dielectric":
            out[tag] = constant_dielectric(m["n"], name=tag)
        else:
            out[tag] = make_synthetic_metal(m["n"], m["k"], name=tag)
    return out


def build_geometry(spec: dict) -> Geometry:
    solids = []
    for s in spec["solids"]:
        if s["kind"] == "capsule":
            shape = Capsule(s["length_nm"], s["radius_nm"], s["center_nm"])
        elif s["kind"] == "cylinder":
            if s.get("axis", "x") != "x":
                raise ValueError("cylinders are fibers along x")
            shape = Cylinder(s["radius_nm"], s["center_nm"])
        else:
            shape = Sphere(s["radius_nm"], s["center_nm"])
        solids.append((shape, s["material"]))
    return Geometry(solids=tuple(solids), background=spec["background"])


def build_sources(specs):
    sources = []
    for s in specs:
        extra = {k: s[k] for k in ("duration_fs", "envelope", "amplitude")
                 if k in s}
        if "handedness" in s:
            sources.extend(circular_pair(
                s["position_nm"], s["wavelength_nm"],
                handedness=s["handedness"], **extra))
            continue
        kwargs = dict(position_nm=s["position_nm"],
                      orientation=s["orientation"],
                      wavelength_nm=s["wavelength_nm"])
        for key in ("duration_fs", "envelope", "phase_deg", "amplitude"):
            if key in s:
                kwargs[key] = s[key]
        sources.append(DipoleSource(**kwargs))
    return sources


def build_monitors(specs):
    """(monitor objects, energy-trace stride) from monitor specs.

    The energy trace is produced by the solver itself; an ``energy``
    monitor entry only sets its sampling stride.
    """
    monitors, probes, energy_stride = [], {}, 10
    for name, m in specs.items():
        if m["type"] == "frequency":
            monitors.append(FrequencyMonitor(name, m["region_nm"],
                                             m["wavelengths_nm"]))
        elif m["type"] == "flux":
            axis = "xyz".index(m["axis"])
            monitors.append(FluxMonitor(
                name, axis=axis, position_nm=m["position_nm"],
                span_nm=m["span_nm"], wavelengths_nm=m["wavelengths_nm"],
                orientation=m["orientation"]))
        elif m["type"] == "energy":
            energy_stride = m["stride"]
        elif m["type"] == "probe":
            probe = TimeProbe(position_nm=m["position_nm"],
                              component=("ex", "ey", "ez").index(
                                  m["component"]))
            probes[name] = probe
            monitors.append(probe)
    return monitors, probes, energy_stride


def build_simulation(sc: Scenario) -> Simulation:
    kwargs = {}
    for key in ("npml", "courant", "termination", "max_steps",
                "design_wavelength_nm"):
        if key in sc.domain:
            kwargs[key] = sc.domain[key]
    if "design_wavelength_nm" not in kwargs:
        # constant-eps metals convert to a dispersive pole at one design
        # wavelength; default it to the declared conversion wavelength
        for m in sc.materials.values():
            if m["kind"] == "synthetic":
                kwargs["design_wavelength_nm"] = m["wavelength_nm"]
    return Simulation(sc.domain["extents_nm"], sc.domain["cell_nm"],
                      build_geometry(sc.geometry),
                      build_materials(sc.materials), **kwargs)


def _eps_real_at(sim: Simulation, monitor: FrequencyMonitor):
    """Relative permittivity (real, non-dispersive part) at cell centers."""
    xc, yc, zc = monitor.cell_centers_nm()
    X, Y, Z = np.meshgrid(xc, yc, zc, indexing="ij")
    idx = sim.geometry.material_index_at(X, Y, Z)
    eps = np.ones_like(X)
    tags = sim.geometry.material_tags()
    for i, tag in enumerate(tags):
        model = sim.materials[tag]
        if model.poles:
            continue  # metal cells keep eps=1 in the flow normalization
        n = model.refractive_index if model.refractive_index else 1.0
        eps[idx == i] = abs(n) ** 2
    return eps


def _solid_mask(sc: Scenario, monitor: FrequencyMonitor, which: str):
    xc, yc, zc = monitor.cell_centers_nm()
    X, Y, Z = np.meshgrid(xc, yc, zc, indexing="ij")
    geo = build_geometry(sc.geometry)
    for (shape, tag), spec in zip(geo.solids, sc.geometry["solids"]):
        if which in ("", tag, spec["material"]):
            return shape.contains(X, Y, Z)
    raise ValueError(f"no solid matches '{which}'")


class _Artifacts:
    def __init__(self, outdir, manifest):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest

    def array(self, name, data):
        arrayio.write_array(self.outdir / name, np.asarray(data))
        self.manifest.add_file(self.outdir, name)

    def text(self, name, content):
        (self.outdir / name).write_text(content)
        self.manifest.add_file(self.outdir, name)

    def heatmap(self, name, data, colormap, vrange=None):
        render.write_heatmap(self.outdir / name, np.asarray(data),
                             colormap=colormap, vrange=vrange)
        self.manifest.add_file(self.outdir, name)


def _run_analysis(name, ana, sc, sim, result, art, scalars):
    mons = result.monitors
    wl = ana.get("wavelength_nm")

    if ana["type"] == "chirality-maps":
        mon = mons[ana["monitor"]]
        wl = wl or mon.wavelengths_nm[0]
        E, H = mon.colocated(wl)
        maps = chirality.chirality_maps(E, H, _eps_real_at(sim, mon), wl)
        for label, data in (("chi", maps.chi), ("pcp", maps.pcp)):
            art.array(f"{name}_{label}.arr", data)
        for ax, comp in enumerate("xyz"):
            art.array(f"{name}_phi{comp}.arr", maps.phi[ax])
        k = maps.pcp.shape[1] // 2  # y mid-plane slice for the images
        art.heatmap(f"{name}_pcp.ppm", maps.pcp[:, k, :].T,
                    colormap="signed", vrange=(-1.0, 1.0))
        art.heatmap(f"{name}_chi.ppm", maps.chi[:, k, :].T,
                    colormap="signed")
        scalars[f"{name}.chi_avg"] = float(np.nanmean(maps.chi))
        scalars[f"{name}.pcp_avg"] = float(np.nanmean(maps.pcp))
        for ax, comp in enumerate("xyz"):
            scalars[f"{name}.phi{comp}_avg"] = float(np.nanmean(maps.phi[ax]))

    elif ana["type"] == "induced-dipole":
        mon = mons[ana["monitor"]]
        wl = wl or mon.wavelengths_nm[0]
        E, _ = mon.colocated(wl)
        mask = _solid_mask(sc, mon, ana.get("solid", ""))
        ind = chirality.induced_dipole(E, mask)
        scalars[f"{name}.pcp_avg"] = ind.pcp_avg
        for ax, comp in enumerate("xyz"):
            scalars[f"{name}.p_{comp}_re"] = float(ind.p[ax].real)
            scalars[f"{name}.p_{comp}_im"] = float(ind.p[ax].imag)

    elif ana["type"] == "directionality":
        plus, minus = mons[ana["plus"]], mons[ana["minus"]]
        wl = wl or plus.wavelengths_nm[0]
        d = directionality.directionality_from_flux(plus.power(wl),
                                                    minus.power(wl))
        scalars[f"{name}.d"] = d.d
        scalars[f"{name}.i_plus_w"] = d.i_plus
        scalars[f"{name}.i_minus_w"] = d.i_minus

    elif ana["type"] == "decay-fit":
        rows = result.energy.as_array()
        fit = fits.fit_decay(rows[:, 1], rows[:, 2],
                             kind=ana.get("kind", "energy"))
        scalars[f"{name}.tau_fs"] = fit.params["tau_fs"]
        scalars[f"{name}.rate_thz"] = fit.params["rate_thz"]

    elif ana["type"] == "far-field-fit":
        mon = mons[ana["monitor"]]
        wl = wl or mon.wavelengths_nm[0]
        E, _ = mon.colocated(wl)
        axis = "xyz".index(ana.get("axis", "y"))
        centers = mon.cell_centers_nm()
        r = np.abs(centers[axis])
        sel = [c.size // 2 for c in centers]
        sel[axis] = slice(None)
        line = E[(slice(None),) + tuple(sel)]
        inten = np.sum(np.abs(line) ** 2, axis=0)
        order = np.argsort(r)
        fit = fits.fit_inverse_square(r[order], inten[order],
                                      wavelength_nm=wl, free_exponent=True)
        scalars[f"{name}.exponent"] = fit.params["m"]

    elif ana["type"] == "volume-average":
        mon = mons[ana["monitor"]]
        wl = wl or mon.wavelengths_nm[0]
        E, H = mon.colocated(wl)
        maps = chirality.chirality_maps(E, H, _eps_real_at(sim, mon), wl)
        fields = {"chi": maps.chi, "pcp": maps.pcp, "phix": maps.phi[0],
                  "phiy": maps.phi[1], "phiz": maps.phi[2]}
        qty = ana.get("quantity", "pcp")
        if qty not in fields:
            raise ValueError(f"unknown volume-average quantity {qty!r} "
                             f"(have {sorted(fields)})")
        scalars[f"{name}.{qty}_avg"] = float(np.nanmean(fields[qty]))

    elif ana["type"] == "mode-overlap":
        mon = mons[ana["monitor"]]
        wl = wl or mon.wavelengths_nm[0]
        E, _ = mon.colocated(wl)
        mode, _warn = modes.solve_fiber_he11(ana.get("radius_nm", 250.0),
                                             wl, n_core=1.45)
        cx, cy, cz = ana.get("center_nm", (0.0, 0.0, 0.0))
        xc, yc, zc = mon.cell_centers_nm()
        X, Y, Z = np.meshgrid(xc - cx, yc - cy, zc - cz, indexing="ij")
        d_map, d_avg = directionality.directionality_overlap_map(
            E, X, Y, Z, mode, pairing=ana.get("pairing", "reciprocal"))
        art.array(f"{name}_d.arr", d_map)
        scalars[f"{name}.d_avg"] = d_avg

    elif ana["type"] == "purcell":
        mon = mons[ana["monitor"]]
        sources = build_sources(sc.sources)
        p_struct = _source_powers(sim, result, mon, sources)
        p_vac = _vacuum_reference_powers(sc, sources, mon.wavelengths_nm)
        rows = ["wavelength_nm,power_w,power_vacuum_w,factor"]
        for wl_i in mon.wavelengths_nm:
            fac = chirality.purcell_spectrum([p_struct[wl_i]],
                                             [p_vac[wl_i]])[0]
            scalars[f"{name}.factor_{wl_i:g}nm"] = float(fac)
            rows.append(f"{wl_i:g},{p_struct[wl_i]:.9e},"
                        f"{p_vac[wl_i]:.9e},{fac:.6f}")
        art.text(f"{name}.csv", "\n".join(rows) + "\n")

    else:
        raise ValueError(f"analysis type {ana['type']} has no runner")


def _source_powers(sim, result, mon, sources):
    """Power each wavelength's source current feeds the field, in W.

    Pairs the monitor's running-DFT field at the injection nodes with
    the DFT of the recorded current waveform, using the same half-step
    times and 2/N normalization the monitor applies.
    """
    dv = sim.dx_m ** 3
    bound = [(i, src, sim._bind_source(src))
             for i, src in enumerate(sources)]
    powers = {}
    for wl in mon.wavelengths_nm:
        e_raw, _ = mon.raw(wl)
        w = 2.0 * np.pi * 299792458.0 / (wl * 1e-9)
        p = 0.0
        for i, src, nodes in bound:
            t, f = result.source_record[f"src{i}"]
            j_hat = 2.0 / len(f) * np.sum(f * np.exp(1j * w * t))
            for c, idx, weight in nodes:
                local = tuple(idx[ax] - mon.ranges[ax][0] for ax in range(3))
                if any(l < 0 or l >= e_raw[c].shape[ax]
                       for ax, l in enumerate(local)):
                    raise ValueError(
                        f"emitted-power monitor {mon.name} does not cover "
                        f"the source at {src.position_nm} nm")
                p += chirality.emitted_power(
                    [e_raw[c][local]], [weight * j_hat], dv)
        powers[wl] = p
    return powers


def _vacuum_reference_powers(sc, sources, wavelengths_nm):
    """Same sources in empty space: the free-space emitted power."""
    cell = sc.domain["cell_nm"]
    npml = sc.domain.get("npml", 10)
    margin = max(200.0, cell * (npml + 8))
    margin = np.ceil(margin / cell) * cell
    center = np.mean([s.position_nm for s in sources], axis=0)
    origin = [o for o, _ in sc.domain["extents_nm"]]
    extents = []
    for ax in range(3):
        # keep the node-lattice parity of the parent domain
        lo = origin[ax] + round((center[ax] - margin - origin[ax])
                                / cell) * cell
        extents.append((lo, lo + 2 * margin))
    sim = Simulation(extents, cell, npml=npml,
                     design_wavelength_nm=sc.domain.get(
                         "design_wavelength_nm", 600.0))
    region = tuple((center[ax] - 2 * cell, center[ax] + 2 * cell)
                   for ax in range(3))
    mon = FrequencyMonitor("vacuum-reference", region, wavelengths_nm)
    result = sim.run(list(sources), [mon],
                     settle_fs=sc.run.get("settle_fs", 0.0))
    return _source_powers(sim, result, mon, sources)


def execute(sc: Scenario, outdir, deterministic: bool = False) -> RunManifest:
    """Run one scenario end to end; returns the written manifest."""
    if deterministic:
        import numba
        numba.set_num_threads(1)
    t0 = time.time()
    manifest = RunManifest(scenario_hash=sha256_text(serialize_scenario(sc)))
    art = _Artifacts(outdir, manifest)
    sim = build_simulation(sc)
    monitors, probes, energy_stride = build_monitors(sc.monitors)
    result = sim.run(build_sources(sc.sources), monitors,
                     energy_stride=energy_stride,
                     settle_fs=sc.run.get("settle_fs", 0.0))
    scalars = {"steps": float(result.steps),
               "final_over_peak_energy":
                   result.final_energy / max(result.peak_energy, 1e-300)}
    if result.energy is not None:
        art.text("energy.csv", result.energy.csv())
    for name, probe in probes.items():
        t, v = probe.series()
        rows = "\n".join(f"{ti:.6f},{vi:.9e}" for ti, vi in zip(t, v))
        art.text(f"{name}.csv", "time_fs,field\n" + rows + "\n")
    for name, mon in result.monitors.items():
        if isinstance(mon, FluxMonitor):
            for wl in mon.wavelengths_nm:
                scalars[f"{name}.power_{wl:g}nm_w"] = mon.power(wl)
    for name, ana in sc.analyses.items():
        _run_analysis(name, ana, sc, sim, result, art, scalars)
    manifest.results = scalars
    manifest.elapsed_s = time.time() - t0
    manifest.write(art.outdir)
    return manifest
