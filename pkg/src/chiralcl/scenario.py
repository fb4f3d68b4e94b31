"""Structured-text scenario files.

Grammar (line oriented, '#' comments)::

    [domain]
    extents = -300nm..300nm, -200nm..200nm, -200nm..200nm
    cell = 5nm

    [materials]
    gold = gold
    vac = vacuum
    glass = dielectric n=1.45
    lossy = synthetic n=0.16 k=2.9 wavelength=600nm

    [geometry]
    background = vac
    solid = capsule length=100nm radius=25nm center=(0nm,0nm,0nm) material=gold

    [source s1]           # also: cylinder axis=... ; sphere radius=...
    position = (25nm, 0nm, -14nm)
    orientation = (0, 0, 1)
    wavelength = 600nm
    envelope = optimized-short

    [monitor vol]
    type = frequency      # or flux / energy / probe
    region = -60nm..60nm, -35nm..35nm, -35nm..35nm
    wavelengths = 600nm

    [analysis a1]
    type = chirality-maps # or directionality / induced-dipole / purcell / study
    monitor = vol

    [run]
    seed = 0
    settle = 25fs

Every length needs an explicit ``nm`` or ``um`` suffix.  Parsing
collects *all* validation errors before raising, and unknown keys name
the nearest valid key.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field

_NUM = r"[-+]?\d*\.?\d+(?:[eE][-+]?\d+)?"
_LEN_RE = re.compile(rf"^({_NUM})\s*(nm|um|μm)$")
_TIME_RE = re.compile(rf"^({_NUM})\s*fs$")
_DEG_RE = re.compile(rf"^({_NUM})\s*deg$")


class ScenarioError(ValueError):
    """All validation problems found in one scenario, aggregated."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("scenario validation failed:\n  - "
                         + "\n  - ".join(self.errors))


@dataclass
class Scenario:
    domain: dict
    materials: dict
    geometry: dict
    sources: list
    monitors: dict
    analyses: dict
    run: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# value parsing


def _length_nm(text, where, errors):
    m = _LEN_RE.match(text.strip())
    if not m:
        errors.append(f"{where}: '{text.strip()}' needs an explicit "
                      "nm or um length suffix")
        return 0.0
    v = float(m.group(1))
    return v * 1000.0 if m.group(2) in ("um", "μm") else v


def _time_fs(text, where, errors):
    m = _TIME_RE.match(text.strip())
    if not m:
        errors.append(f"{where}: '{text.strip()}' needs an fs suffix")
        return 0.0
    return float(m.group(1))


def _range_nm(text, where, errors):
    parts = text.split("..")
    if len(parts) != 2:
        errors.append(f"{where}: expected 'lo..hi' range, got '{text.strip()}'")
        return (0.0, 0.0)
    return tuple(_length_nm(p, where, errors) for p in parts)


def _tuple_items(text, where, errors):
    t = text.strip()
    if not (t.startswith("(") and t.endswith(")")):
        errors.append(f"{where}: expected parenthesized tuple, got '{t}'")
        return []
    return [p.strip() for p in t[1:-1].split(",")]


def _point_nm(text, where, errors):
    items = _tuple_items(text, where, errors)
    if items and len(items) != 3:
        errors.append(f"{where}: expected 3 components, got {len(items)}")
    return tuple(_length_nm(p, where, errors) for p in items[:3]) or (0, 0, 0)


def _vector(text, where, errors):
    items = _tuple_items(text, where, errors)
    try:
        return tuple(float(p) for p in items)
    except ValueError:
        errors.append(f"{where}: non-numeric vector component in '{text}'")
        return (0.0, 0.0, 0.0)


def _check_keys(given, allowed, where, errors):
    for key in given:
        if key not in allowed:
            near = difflib.get_close_matches(key, allowed, n=1)
            hint = f" (did you mean '{near[0]}'?)" if near else ""
            errors.append(f"{where}: unknown key '{key}'{hint}")


# ---------------------------------------------------------------------------
# section splitting


def _split_sections(text, errors):
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                errors.append(f"line {lineno}: unterminated section header")
                continue
            words = line[1:-1].split()
            name = words[1] if len(words) > 1 else None
            current = (words[0], name, [])
            sections.append(current)
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        if current is None:
            errors.append(f"line {lineno}: key outside any section")
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        current[2].append((key, value, lineno))
    return sections


def _kv(entries, where, errors, multi=()):
    out = {}
    for key, value, lineno in entries:
        if key in multi:
            out.setdefault(key, []).append(value)
        elif key in out:
            errors.append(f"{where}: duplicate key '{key}' (line {lineno})")
        else:
            out[key] = value
    return out


def _word_opts(text, where, errors):
    """Parse 'capsule length=100nm radius=25nm' style one-liners."""
    words = text.split()
    if not words:
        errors.append(f"{where}: empty specification")
        return "", {}
    opts = {}
    for word in words[1:]:
        if "=" not in word:
            errors.append(f"{where}: expected key=value, got '{word}'")
            continue
        k, v = word.split("=", 1)
        opts[k] = v
    return words[0], opts


# ---------------------------------------------------------------------------
# section parsers

_SOLID_KEYS = {
    "capsule": {"length", "radius", "center", "material"},
    "cylinder": {"radius", "center", "axis", "material"},
    "sphere": {"radius", "center", "material"},
}


def _parse_materials(entries, errors):
    materials = {}
    for tag, value, lineno in entries:
        where = f"materials.{tag}"
        kind, opts = _word_opts(value, where, errors)
        if kind == "gold":
            _check_keys(opts, set(), where, errors)
            materials[tag] = {"kind": "gold"}
        elif kind == "vacuum":
            _check_keys(opts, set(), where, errors)
            materials[tag] = {"kind": "vacuum"}
        elif kind == "dielectric":
            _check_keys(opts, {"n"}, where, errors)
            if "n" not in opts:
                errors.append(f"{where}: dielectric needs n=<index>")
                continue
            materials[tag] = {"kind": "dielectric", "n": float(opts["n"])}
        elif kind == "synthetic":
            _check_keys(opts, {"n", "k", "wavelength"}, where, errors)
            missing = {"n", "k", "wavelength"} - set(opts)
            if missing:
                errors.append(f"{where}: synthetic metal needs "
                              f"{', '.join(sorted(missing))}")
                continue
            materials[tag] = {
                "kind": "synthetic", "n": float(opts["n"]),
                "k": float(opts["k"]),
                "wavelength_nm": _length_nm(opts["wavelength"], where, errors)}
        else:
            near = difflib.get_close_matches(
                kind, ("gold", "vacuum", "dielectric", "synthetic"), n=1)
            hint = f" (did you mean '{near[0]}'?)" if near else ""
            errors.append(f"{where}: unknown material kind '{kind}'{hint}")
    return materials


def _parse_solid(value, where, errors):
    kind, opts = _word_opts(value, where, errors)
    if kind not in _SOLID_KEYS:
        near = difflib.get_close_matches(kind, _SOLID_KEYS, n=1)
        hint = f" (did you mean '{near[0]}'?)" if near else ""
        errors.append(f"{where}: unknown solid kind '{kind}'{hint}")
        return None
    _check_keys(opts, _SOLID_KEYS[kind], where, errors)
    solid = {"kind": kind}
    for k in ("length", "radius"):
        if k in _SOLID_KEYS[kind]:
            if k not in opts:
                errors.append(f"{where}: {kind} needs {k}=<length>")
                return None
            solid[k + "_nm"] = _length_nm(opts[k], where, errors)
    solid["center_nm"] = (_point_nm(opts["center"], where, errors)
                          if "center" in opts else (0.0, 0.0, 0.0))
    if kind == "cylinder":
        axis = opts.get("axis", "z")
        if axis not in ("x", "y", "z"):
            errors.append(f"{where}: axis must be x, y or z")
            axis = "z"
        solid["axis"] = axis
    if "material" not in opts:
        errors.append(f"{where}: solid needs material=<tag>")
        return None
    solid["material"] = opts["material"]
    return solid


def _parse_source(name, entries, errors):
    where = f"source {name}"
    kv = _kv(entries, where, errors)
    allowed = {"position", "orientation", "wavelength", "envelope",
               "duration", "phase", "amplitude", "handedness"}
    _check_keys(kv, allowed, where, errors)
    src = {"name": name}
    for key in ("position", "wavelength"):
        if key not in kv:
            errors.append(f"{where}: missing required key '{key}'")
    if "position" in kv:
        src["position_nm"] = _point_nm(kv["position"], where, errors)
    if "wavelength" in kv:
        src["wavelength_nm"] = _length_nm(kv["wavelength"], where, errors)
    if "handedness" in kv:
        if kv["handedness"] not in ("left", "right"):
            errors.append(f"{where}: handedness must be left or right")
        src["handedness"] = kv["handedness"]
    elif "orientation" in kv:
        src["orientation"] = _vector(kv["orientation"], where, errors)
    else:
        errors.append(f"{where}: needs orientation or handedness")
    if "envelope" in kv:
        if kv["envelope"] not in ("gaussian", "optimized-short"):
            errors.append(f"{where}: envelope must be gaussian or "
                          "optimized-short")
        src["envelope"] = kv["envelope"]
    if "duration" in kv:
        src["duration_fs"] = _time_fs(kv["duration"], where, errors)
    if "phase" in kv:
        m = _DEG_RE.match(kv["phase"].strip())
        if not m:
            errors.append(f"{where}: phase needs a deg suffix")
        else:
            src["phase_deg"] = float(m.group(1))
    if "amplitude" in kv:
        src["amplitude"] = float(kv["amplitude"])
    return src


_MONITOR_KEYS = {
    "frequency": {"type", "region", "wavelengths"},
    "flux": {"type", "axis", "position", "span", "wavelengths",
             "orientation"},
    "energy": {"type", "stride"},
    "probe": {"type", "position", "component"},
}


def _parse_monitor(name, entries, errors):
    where = f"monitor {name}"
    kv = _kv(entries, where, errors)
    mtype = kv.get("type")
    if mtype not in _MONITOR_KEYS:
        near = difflib.get_close_matches(mtype or "", _MONITOR_KEYS, n=1)
        hint = f" (did you mean '{near[0]}'?)" if near else ""
        errors.append(f"{where}: unknown monitor type '{mtype}'{hint}")
        return None
    _check_keys(kv, _MONITOR_KEYS[mtype], where, errors)
    mon = {"type": mtype}
    if mtype in ("frequency",):
        if "region" not in kv:
            errors.append(f"{where}: frequency monitor needs region")
            return None
        mon["region_nm"] = tuple(_range_nm(p, where, errors)
                                 for p in kv["region"].split(","))
        if len(mon["region_nm"]) != 3:
            errors.append(f"{where}: region needs 3 ranges")
    if mtype == "flux":
        for key in ("axis", "position", "span"):
            if key not in kv:
                errors.append(f"{where}: flux monitor needs {key}")
                return None
        if kv["axis"] not in ("x", "y", "z"):
            errors.append(f"{where}: axis must be x, y or z")
        mon["axis"] = kv["axis"]
        mon["position_nm"] = _length_nm(kv["position"], where, errors)
        mon["span_nm"] = tuple(_range_nm(p, where, errors)
                               for p in kv["span"].split(","))
        if len(mon["span_nm"]) != 2:
            errors.append(f"{where}: span needs 2 in-plane ranges")
        mon["orientation"] = int(kv.get("orientation", "1"))
    if mtype in ("frequency", "flux"):
        if "wavelengths" not in kv:
            errors.append(f"{where}: needs wavelengths")
            return None
        mon["wavelengths_nm"] = tuple(
            _length_nm(p, where, errors)
            for p in kv["wavelengths"].split(","))
    if mtype == "energy":
        mon["stride"] = int(kv.get("stride", "10"))
    if mtype == "probe":
        for key in ("position", "component"):
            if key not in kv:
                errors.append(f"{where}: probe needs {key}")
                return None
        mon["position_nm"] = _point_nm(kv["position"], where, errors)
        if kv["component"] not in ("ex", "ey", "ez"):
            errors.append(f"{where}: component must be ex, ey or ez")
        mon["component"] = kv["component"]
    return mon


_ANALYSIS_TYPES = {
    "chirality-maps": {"type", "monitor", "wavelength", "plane"},
    "induced-dipole": {"type", "monitor", "wavelength", "solid"},
    "volume-average": {"type", "monitor", "wavelength", "quantity"},
    "directionality": {"type", "plus", "minus", "wavelength"},
    "mode-overlap": {"type", "monitor", "wavelength", "radius", "pairing",
                     "center"},
    "purcell": {"type", "monitor"},
    "decay-fit": {"type", "monitor", "kind"},
    "far-field-fit": {"type", "monitor", "wavelength", "axis"},
}
_MONITOR_REQUIRED = {
    "chirality-maps": "frequency", "induced-dipole": "frequency",
    "volume-average": "frequency", "mode-overlap": "frequency",
    "purcell": "frequency", "decay-fit": "energy",
    "far-field-fit": "frequency",
}


def _parse_analysis(name, entries, errors):
    where = f"analysis {name}"
    kv = _kv(entries, where, errors)
    atype = kv.get("type")
    if atype not in _ANALYSIS_TYPES:
        near = difflib.get_close_matches(atype or "", _ANALYSIS_TYPES, n=1)
        hint = f" (did you mean '{near[0]}'?)" if near else ""
        errors.append(f"{where}: unknown analysis type '{atype}'{hint}")
        return None
    _check_keys(kv, _ANALYSIS_TYPES[atype], where, errors)
    ana = {"type": atype}
    for key in ("monitor", "plus", "minus", "plane", "solid", "quantity",
                "kind", "axis", "pairing"):
        if key in kv:
            ana[key] = kv[key]
    for key in ("wavelength", "radius"):
        if key in kv:
            ana[key + "_nm"] = _length_nm(kv[key], where, errors)
    if "center" in kv:
        ana["center_nm"] = _point_nm(kv["center"], where, errors)
    if atype == "directionality":
        for key in ("plus", "minus"):
            if key not in kv:
                errors.append(f"{where}: directionality needs {key}=<flux "
                              "monitor id>")
    elif atype in _MONITOR_REQUIRED and "monitor" not in kv:
        errors.append(f"{where}: needs monitor=<id>")
    return ana


def parse_scenario(text) -> Scenario:
    errors = []
    sections = _split_sections(text, errors)
    domain, materials, geometry = {}, {}, {}
    sources, monitors, analyses, run = [], {}, {}, {}
    seen = set()
    for kind, name, entries in sections:
        where = f"[{kind}{' ' + name if name else ''}]"
        if kind in ("domain", "materials", "geometry", "run"):
            if kind in seen:
                errors.append(f"{where}: duplicate section")
                continue
            seen.add(kind)
        if kind == "domain":
            kv = _kv(entries, where, errors)
            _check_keys(kv, {"extents", "cell", "npml", "courant",
                             "termination", "max_steps", "design_wavelength"},
                        where, errors)
            if "extents" not in kv or "cell" not in kv:
                errors.append(f"{where}: needs extents and cell")
            else:
                domain["extents_nm"] = tuple(
                    _range_nm(p, where, errors)
                    for p in kv["extents"].split(","))
                if len(domain["extents_nm"]) != 3:
                    errors.append(f"{where}: extents needs 3 ranges")
                domain["cell_nm"] = _length_nm(kv["cell"], where, errors)
            if "npml" in kv:
                domain["npml"] = int(kv["npml"])
            if "courant" in kv:
                domain["courant"] = float(kv["courant"])
            if "termination" in kv:
                domain["termination"] = float(kv["termination"])
            if "max_steps" in kv:
                domain["max_steps"] = int(kv["max_steps"])
            if "design_wavelength" in kv:
                domain["design_wavelength_nm"] = _length_nm(
                    kv["design_wavelength"], where, errors)
        elif kind == "materials":
            materials = _parse_materials(entries, errors)
        elif kind == "geometry":
            kv = _kv(entries, where, errors, multi=("solid",))
            _check_keys(kv, {"background", "solid"}, where, errors)
            if "background" not in kv:
                errors.append(f"{where}: needs background=<material tag>")
            geometry["background"] = kv.get("background", "")
            geometry["solids"] = [
                s for v in kv.get("solid", [])
                if (s := _parse_solid(v, where, errors)) is not None]
        elif kind == "source":
            if not name:
                errors.append(f"{where}: source needs a name")
                continue
            sources.append(_parse_source(name, entries, errors))
        elif kind == "monitor":
            if not name:
                errors.append(f"{where}: monitor needs a name")
                continue
            if name in monitors:
                errors.append(f"{where}: duplicate monitor id '{name}'")
                continue
            mon = _parse_monitor(name, entries, errors)
            if mon is not None:
                monitors[name] = mon
        elif kind == "analysis":
            if not name:
                errors.append(f"{where}: analysis needs a name")
                continue
            if name in analyses:
                errors.append(f"{where}: duplicate analysis id '{name}'")
                continue
            ana = _parse_analysis(name, entries, errors)
            if ana is not None:
                analyses[name] = ana
        elif kind == "run":
            kv = _kv(entries, where, errors)
            _check_keys(kv, {"seed", "settle", "output"}, where, errors)
            if "seed" in kv:
                run["seed"] = int(kv["seed"])
            if "settle" in kv:
                run["settle_fs"] = _time_fs(kv["settle"], where, errors)
            if "output" in kv:
                run["output"] = kv["output"]
        else:
            near = difflib.get_close_matches(
                kind, ("domain", "materials", "geometry", "source",
                       "monitor", "analysis", "run"), n=1)
            hint = f" (did you mean '{near[0]}'?)" if near else ""
            errors.append(f"{where}: unknown section '{kind}'{hint}")
    # cross references
    if not domain and "domain" not in seen:
        errors.append("missing [domain] section")
    if geometry:
        tags = set(materials)
        if geometry.get("background") and geometry["background"] not in tags:
            errors.append(f"geometry: background material "
                          f"'{geometry['background']}' is not defined")
        for solid in geometry.get("solids", ()):
            if solid["material"] not in tags:
                near = difflib.get_close_matches(solid["material"], tags, n=1)
                hint = f" (did you mean '{near[0]}'?)" if near else ""
                errors.append(f"geometry: solid material "
                              f"'{solid['material']}' is not defined{hint}")
    else:
        errors.append("missing [geometry] section")
    if not sources:
        errors.append("scenario declares no sources")
    for name, ana in analyses.items():
        refs = [ana[k] for k in ("monitor", "plus", "minus") if k in ana]
        for ref in refs:
            if ref not in monitors:
                near = difflib.get_close_matches(ref, monitors, n=1)
                hint = f" (did you mean '{near[0]}'?)" if near else ""
                errors.append(f"analysis {name}: monitor id '{ref}' does "
                              f"not resolve{hint}")
        want = _MONITOR_REQUIRED.get(ana["type"])
        if want and ana.get("monitor") in monitors \
                and monitors[ana["monitor"]]["type"] != want:
            errors.append(f"analysis {name}: '{ana['monitor']}' is a "
                          f"{monitors[ana['monitor']]['type']} monitor, "
                          f"needs {want}")
        if ana["type"] == "directionality":
            for key in ("plus", "minus"):
                ref = ana.get(key)
                if ref in monitors and monitors[ref]["type"] != "flux":
                    errors.append(f"analysis {name}: '{ref}' must be a "
                                  "flux monitor")
    if errors:
        raise ScenarioError(errors)
    return Scenario(domain=domain, materials=materials, geometry=geometry,
                    sources=sources, monitors=monitors, analyses=analyses,
                    run=run)


# ---------------------------------------------------------------------------
# serialization


def _fmt_num(v):
    return f"{v:g}"


def _fmt_len(v):
    return f"{_fmt_num(v)}nm"


def _fmt_range(r):
    return f"{_fmt_len(r[0])}..{_fmt_len(r[1])}"


def _fmt_point(p):
    return "(" + ", ".join(_fmt_len(c) for c in p) + ")"


def serialize_scenario(sc: Scenario) -> str:
    out = ["[domain]"]
    out.append("extents = " + ", ".join(_fmt_range(r)
                                        for r in sc.domain["extents_nm"]))
    out.append(f"cell = {_fmt_len(sc.domain['cell_nm'])}")
    for key, fmt in (("npml", str), ("courant", _fmt_num),
                     ("termination", _fmt_num), ("max_steps", str)):
        if key in sc.domain:
            out.append(f"{key} = {fmt(sc.domain[key])}")
    if "design_wavelength_nm" in sc.domain:
        out.append("design_wavelength = "
                   + _fmt_len(sc.domain["design_wavelength_nm"]))

    out += ["", "[materials]"]
    for tag, m in sc.materials.items():
        if m["kind"] in ("gold", "vacuum"):
            out.append(f"{tag} = {m['kind']}")
        elif m["kind"] == "dielectric":
            out.append(f"{tag} = dielectric n={_fmt_num(m['n'])}")
        else:
            out.append(f"{tag} = synthetic n={_fmt_num(m['n'])} "
                       f"k={_fmt_num(m['k'])} "
                       f"wavelength={_fmt_len(m['wavelength_nm'])}")

    out += ["", "[geometry]", f"background = {sc.geometry['background']}"]
    for s in sc.geometry["solids"]:
        parts = [s["kind"]]
        if "length_nm" in s:
            parts.append(f"length={_fmt_len(s['length_nm'])}")
        parts.append(f"radius={_fmt_len(s['radius_nm'])}")
        center = "(" + ",".join(_fmt_len(c) for c in s["center_nm"]) + ")"
        parts.append(f"center={center}")
        if "axis" in s:
            parts.append(f"axis={s['axis']}")
        parts.append(f"material={s['material']}")
        out.append("solid = " + " ".join(parts))

    for src in sc.sources:
        out += ["", f"[source {src['name']}]"]
        out.append(f"position = {_fmt_point(src['position_nm'])}")
        if "handedness" in src:
            out.append(f"handedness = {src['handedness']}")
        else:
            out.append("orientation = ("
                       + ", ".join(_fmt_num(c) for c in src["orientation"])
                       + ")")
        out.append(f"wavelength = {_fmt_len(src['wavelength_nm'])}")
        if "envelope" in src:
            out.append(f"envelope = {src['envelope']}")
        if "duration_fs" in src:
            out.append(f"duration = {_fmt_num(src['duration_fs'])}fs")
        if "phase_deg" in src:
            out.append(f"phase = {_fmt_num(src['phase_deg'])}deg")
        if "amplitude" in src:
            out.append(f"amplitude = {_fmt_num(src['amplitude'])}")

    for name, mon in sc.monitors.items():
        out += ["", f"[monitor {name}]", f"type = {mon['type']}"]
        if "region_nm" in mon:
            out.append("region = " + ", ".join(_fmt_range(r)
                                               for r in mon["region_nm"]))
        if mon["type"] == "flux":
            out.append(f"axis = {mon['axis']}")
            out.append(f"position = {_fmt_len(mon['position_nm'])}")
            out.append("span = " + ", ".join(_fmt_range(r)
                                             for r in mon["span_nm"]))
            out.append(f"orientation = {mon['orientation']}")
        if "wavelengths_nm" in mon:
            out.append("wavelengths = "
                       + ", ".join(_fmt_len(w)
                                   for w in mon["wavelengths_nm"]))
        if mon["type"] == "energy":
            out.append(f"stride = {mon['stride']}")
        if mon["type"] == "probe":
            out.append(f"position = {_fmt_point(mon['position_nm'])}")
            out.append(f"component = {mon['component']}")

    for name, ana in sc.analyses.items():
        out += ["", f"[analysis {name}]", f"type = {ana['type']}"]
        for key in ("monitor", "plus", "minus", "plane", "solid",
                    "quantity", "kind", "axis", "pairing"):
            if key in ana:
                out.append(f"{key} = {ana[key]}")
        for key in ("wavelength_nm", "radius_nm"):
            if key in ana:
                out.append(f"{key[:-3]} = {_fmt_len(ana[key])}")
        if "center_nm" in ana:
            out.append(f"center = {_fmt_point(ana['center_nm'])}")

    if sc.run:
        out += ["", "[run]"]
        if "seed" in sc.run:
            out.append(f"seed = {sc.run['seed']}")
        if "settle_fs" in sc.run:
            out.append(f"settle = {_fmt_num(sc.run['settle_fs'])}fs")
        if "output" in sc.run:
            out.append(f"output = {sc.run['output']}")
    return "\n".join(out) + "\n"
