"""Curve fitting and sweep-study orchestration.

Fitting covers the two analysis chores of the pipeline: far-field
intensity versus distance (inverse-square law) and ring-down lifetime
extraction from a time trace.  ``run_study`` sweeps one scene parameter,
collects observables row by row, and attaches trend verdicts (mesh
saturation, duration insensitivity, loss-sweep sign consistency,
aspect-ratio peak location).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.constants import c as C0
from scipy.signal import argrelmax

from .modes import ModeSolution


class FitError(ValueError):
    pass


@dataclass
class FitResult:
    model: str
    params: dict                 # name -> value
    sigmas: dict                 # name -> 1-sigma estimate
    residual_norm: float
    sample_range: tuple

    def __post_init__(self):
        if set(self.params) != set(self.sigmas):
            raise ValueError("parameter/uncertainty name mismatch")
        if not np.isfinite(self.residual_norm):
            raise ValueError("non-finite residual norm")


def _lstsq_with_sigma(A, y):
    """Linear least squares with standard parameter uncertainties."""
    coef, res, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    dof = max(len(y) - rank, 1)
    rss = float(np.sum((A @ coef - y) ** 2))
    cov = np.linalg.pinv(A.T @ A) * rss / dof
    return coef, np.sqrt(np.abs(np.diag(cov))), np.sqrt(rss)


def fit_inverse_square(r_nm, intensity, wavelength_nm: float | None = None,
                       free_exponent: bool = False) -> FitResult:
    """Fit intensity(r) = a r^-2 + b, or a r^-m (free m) on request.

    The fixed-exponent fit is linear least squares in the (r^-2, 1)
    basis.  The free-exponent variant subtracts the fitted background
    first and then regresses log I on log r.
    """
    r = np.asarray(r_nm, dtype=float)
    y = np.asarray(intensity, dtype=float)
    if r.size < 6:
        raise FitError("need at least 6 radial samples")
    if np.any(np.diff(r) <= 0):
        raise FitError("radii must be strictly increasing")
    if wavelength_nm is not None and r[0] < 1.5 * wavelength_nm:
        raise FitError("samples must start in the far field (r >= 1.5 wavelengths)")

    A = np.column_stack([r ** -2.0, np.ones_like(r)])
    coef, sig, rn = _lstsq_with_sigma(A, y)
    if not free_exponent:
        return FitResult("a/r^2 + b", {"a": coef[0], "b": coef[1]},
                         {"a": sig[0], "b": sig[1]}, rn, (r[0], r[-1]))

    cleaned = y - coef[1]
    good = cleaned > 0
    if good.sum() < 6:
        raise FitError("too few samples above background for log-log fit")
    L = np.column_stack([np.log(r[good]), np.ones(good.sum())])
    lcoef, lsig, lrn = _lstsq_with_sigma(L, np.log(cleaned[good]))
    return FitResult("a/r^m", {"m": -lcoef[0], "log_a": lcoef[1]},
                     {"m": lsig[0], "log_a": lsig[1]}, lrn, (r[0], r[-1]))


def _envelope(t, s):
    """Oscillation envelope: local maxima of |s| with parabolic refinement."""
    mag = np.abs(np.asarray(s, dtype=float))
    idx = argrelmax(mag, order=2)[0]
    idx = idx[(idx > 0) & (idx < len(mag) - 1)]
    if len(idx) < 3:
        raise FitError("too few oscillation peaks to extract an envelope")
    tp, yp = [], []
    for i in idx:
        y0, y1, y2 = mag[i - 1], mag[i], mag[i + 1]
        denom = y0 - 2 * y1 + y2
        frac = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        dt = t[1] - t[0]
        tp.append(t[i] + frac * dt)
        yp.append(y1 - 0.25 * (y0 - y2) * frac)
    return np.array(tp), np.array(yp)


def fit_decay(t_fs, signal, kind: str = "field") -> FitResult:
    """Fit an A exp(-t/tau) envelope to a ring-down trace.

    ``kind='field'`` expects an oscillating trace whose |peaks| decay;
    ``kind='energy'`` expects a monotone-ish positive trace and fits it
    directly (its time constant is half the field lifetime).  Returns
    tau (fs) plus the ordinary decay rate 1/tau in THz.
    """
    t = np.asarray(t_fs, dtype=float)
    if kind == "field":
        tp, yp = _envelope(t, signal)
    elif kind == "energy":
        tp, yp = t, np.asarray(signal, dtype=float)
        keep = yp > 0
        tp, yp = tp[keep], yp[keep]
    else:
        raise FitError(f"unknown trace kind {kind!r}")
    if len(tp) < 3:
        raise FitError("decay fit needs at least 3 envelope samples")
    A = np.column_stack([tp, np.ones_like(tp)])
    coef, sig, rn = _lstsq_with_sigma(A, np.log(yp))
    if coef[0] >= 0:
        raise FitError("series does not decay")
    tau = -1.0 / coef[0]
    tau_sig = sig[0] / coef[0] ** 2
    return FitResult("A*exp(-t/tau)",
                     {"tau_fs": tau, "rate_thz": 1e3 / tau,
                      "log_A": coef[1]},
                     {"tau_fs": tau_sig, "rate_thz": 1e3 * tau_sig / tau ** 2,
                      "log_A": sig[1]},
                     rn, (tp[0], tp[-1]))


def round_trip_time(mode: ModeSolution | float, length_nm: float) -> float:
    """Plasmon round-trip time 2 n_eff L / c, in fs."""
    n_eff = mode.n_eff.real if isinstance(mode, ModeSolution) else float(mode)
    if n_eff <= 0:
        raise ValueError("round_trip_time needs Re(n_eff) > 0")
    return 2.0 * n_eff * (length_nm * 1e-9) / C0 * 1e15


# ---------------------------------------------------------------------------
# sweep studies


@dataclass
class StudySpec:
    """One swept parameter, a list of values, and observables to record."""

    parameter: str               # e.g. "cell_size_nm", "duration_fs", ...
    values: Sequence
    observables: Sequence[str]   # e.g. ("d", "pcp_avg")

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("study needs at least one swept value")
        vals = list(self.values)
        pairs = list(zip(vals, vals[1:]))
        increasing = all(b > a for a, b in pairs)
        decreasing = all(b < a for a, b in pairs)
        if pairs and not (increasing or decreasing):
            raise ValueError("swept values must be strictly monotonic "
                             "(a refinement sweep runs coarse to fine)")
        if not self.observables:
            raise ValueError("study needs at least one observable")


@dataclass
class StudyRow:
    value: object
    observables: dict
    failed: bool = False
    error: str = ""


@dataclass
class StudyResult:
    spec: StudySpec
    rows: list
    verdicts: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([row.observables.get(name, np.nan)
                         for row in self.rows if not row.failed], dtype=float)


def saturation_verdict(values, tail_tolerance: float = 0.15) -> bool:
    """True when the last two successive changes are each small.

    "Small" means below ``tail_tolerance`` times the magnitude of the
    final value — the convergence notion used by the mesh study.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return True
    diffs = np.abs(np.diff(v))[-2:]
    return bool(np.all(diffs < tail_tolerance * abs(v[-1])))


def insensitivity_verdict(values, rel_tolerance: float = 0.10) -> bool:
    """True when the full spread is a small fraction of the mean magnitude."""
    v = np.asarray(values, dtype=float)
    scale = np.mean(np.abs(v))
    return bool(scale > 0 and (v.max() - v.min()) < rel_tolerance * scale)


def sign_consistency_verdict(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(v > 0) or np.all(v < 0))


def peak_location(swept_values, observed):
    """Swept value at which |observable| peaks."""
    v = np.asarray(observed, dtype=float)
    return swept_values[int(np.argmax(np.abs(v)))]


_VERDICT_KEYS = {
    "cell_size_nm": "saturation",
    "duration_fs": "insensitivity",
    "loss_n": "sign_consistency",
    "aspect_ratio": "peak_location",
}


def attach_verdicts(result: StudyResult) -> StudyResult:
    """Compute the trend verdicts appropriate to the swept parameter.

    Pure function of the collected table; re-running it never triggers
    new simulations.
    """
    ok = [r for r in result.rows if not r.failed]
    if not ok:
        result.verdicts = {"all_failed": True}
        return result
    values = [r.value for r in ok]
    kind = _VERDICT_KEYS.get(result.spec.parameter, "saturation")
    for obs in result.spec.observables:
        col = np.array([r.observables.get(obs, np.nan) for r in ok], dtype=float)
        if np.isnan(col).all():
            continue
        if kind == "saturation":
            result.verdicts[f"{obs}_saturated"] = saturation_verdict(col)
        elif kind == "insensitivity":
            result.verdicts[f"{obs}_insensitive"] = insensitivity_verdict(col)
        elif kind == "sign_consistency":
            result.verdicts[f"{obs}_sign_consistent"] = sign_consistency_verdict(col)
        elif kind == "peak_location":
            result.verdicts[f"{obs}_peak_at"] = peak_location(values, col)
    return result


def run_study(spec: StudySpec,
              runner: Callable[[object], dict]) -> StudyResult:
    """Evaluate ``runner(value) -> {observable: scalar}`` over the sweep.

    A failing run marks its row failed and the study continues.
    """
    rows = []
    for value in spec.values:
        try:
            obs = runner(value)
            rows.append(StudyRow(value=value,
                                 observables={k: obs.get(k, np.nan)
                                              for k in spec.observables}))
        except Exception as exc:  # noqa: BLE001 - study isolation is the point
            rows.append(StudyRow(value=value, observables={},
                                 failed=True, error=str(exc)))
    return attach_verdicts(StudyResult(spec=spec, rows=rows))


def study_table_csv(result: StudyResult) -> str:
    """Render a study as CSV text (one row per swept value)."""
    cols = [result.spec.parameter, *result.spec.observables, "failed", "error"]
    lines = [",".join(cols)]
    for row in result.rows:
        cells = [repr(row.value)]
        cells += ["" if row.failed else repr(row.observables.get(o, ""))
                  for o in result.spec.observables]
        cells += [str(row.failed).lower(), row.error.replace(",", ";")]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
