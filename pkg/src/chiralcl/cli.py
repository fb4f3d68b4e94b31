"""Command-line front end.

Exit codes: 0 success, 2 missing file or bad usage, 3 scenario
validation failure, 4 simulation divergence.  ``CHIRALCL_THREADS``
caps the solver worker threads; ``--deterministic`` forces one thread
with ordered reductions.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, arrayio, render
from .fdtd import DivergenceError
from .manifest import ManifestError, verify_manifest
from .materials import eval_permittivity, gold
from .modes import solve_wire_tm01, surface_field_ratio
from .scenario import ScenarioError, parse_scenario, serialize_scenario

EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_DIVERGENCE = 4


def _fail(code, record):
    print(json.dumps(record), file=sys.stderr)
    return code


def _apply_thread_policy(deterministic):
    import numba
    if deterministic:
        numba.set_num_threads(1)
        return
    env = os.environ.get("CHIRALCL_THREADS")
    if env:
        numba.set_num_threads(max(1, int(env)))


def _load_scenario(path):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(path)
    return parse_scenario(p.read_text())


def _bundled(name):
    p = Path(__file__).parent / "scenarios" / f"{name}.scn"
    return p if p.exists() else None


def _resolve_scenario(arg):
    p = Path(arg)
    if p.exists():
        return p
    bundled = _bundled(arg)
    if bundled is not None:
        return bundled
    raise FileNotFoundError(arg)


def cmd_run(args):
    from .runner import execute
    path = _resolve_scenario(args.scenario)
    sc = parse_scenario(path.read_text())
    outdir = args.output or sc.run.get("output") or f"out/{path.stem}"
    man = execute(sc, outdir, deterministic=args.deterministic)
    print(f"wrote {outdir}/manifest.txt ({len(man.files)} artifacts, "
          f"{man.elapsed_s:.1f}s)")
    for name in sorted(man.results):
        print(f"  {name} = {man.results[name]:.6g}")
    return 0


def cmd_modes(args):
    eps = eval_permittivity(gold(), args.wavelength)
    mode = solve_wire_tm01(args.radius, args.wavelength, eps)
    ratio = surface_field_ratio(mode)
    print("radius_nm,wavelength_nm,n_eff_re,n_eff_im,beta_over_gamma,"
          "surface_ratio")
    print(f"{args.radius:g},{args.wavelength:g},{mode.n_eff.real:.6f},"
          f"{mode.n_eff.imag:.6f},{abs(mode.beta) / abs(mode.gamma_t):.6f},"
          f"{ratio:.6f}")
    return 0


def cmd_validate(args):
    sc = _load_scenario(_resolve_scenario(args.scenario))
    print(serialize_scenario(sc), end="")
    return 0


def cmd_verify(args):
    man = verify_manifest(args.outdir)
    print(f"manifest ok: {len(man.files)} artifacts verified")
    return 0


def cmd_render(args):
    arr = arrayio.read_array(args.array)
    if arr.ndim == 3:
        if args.slice is None:
            raise ScenarioError(
                ["3D array needs --slice <axis,index> to pick a plane"])
        axis, index = (int(v) for v in args.slice.split(","))
        arr = np.take(arr, index, axis=axis)
    vrange = None
    if args.range:
        lo, hi = (float(v) for v in args.range.split(","))
        vrange = (lo, hi)
    render.write_heatmap(args.image, arr.real.astype(float),
                         colormap=args.colormap, vrange=vrange)
    print(f"wrote {args.image}")
    return 0


def _parse_length(text):
    from .scenario import _length_nm
    errors = []
    v = _length_nm(text, "argument", errors)
    if errors:
        raise argparse.ArgumentTypeError(errors[0])
    return v


def build_parser():
    ap = argparse.ArgumentParser(
        prog="chiralcl",
        description="chiral-emission simulation toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("run", help="execute a scenario file end to end")
    p.add_argument("scenario")
    p.add_argument("--output")
    p.add_argument("--deterministic", action="store_true",
                   help="single thread, ordered reductions")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("modes", help="guided-mode scalars")
    p.add_argument("--wire", action="store_true")
    p.add_argument("--radius", type=_parse_length, default=25.0)
    p.add_argument("--wavelength", type=_parse_length, default=600.0)
    p.set_defaults(fn=cmd_modes)

    p = sub.add_parser("validate", help="parse a scenario and echo the "
                                        "canonical form")
    p.add_argument("scenario")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("verify", help="re-check a run manifest's hashes")
    p.add_argument("outdir")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("render", help="heatmap image from a binary array")
    p.add_argument("array")
    p.add_argument("image")
    p.add_argument("--colormap", choices=("signed", "magnitude"),
                   default="signed")
    p.add_argument("--range", help="lo,hi value range")
    p.add_argument("--slice", help="axis,index plane of a 3D array")
    p.set_defaults(fn=cmd_render)
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage already; normalize
        return EXIT_USAGE if exc.code not in (0, None) else 0
    if not getattr(args, "fn", None):
        ap.print_usage()
        return EXIT_USAGE
    if getattr(args, "deterministic", False) or args.fn is cmd_run:
        try:
            _apply_thread_policy(getattr(args, "deterministic", False))
        except ImportError:
            pass
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        return _fail(EXIT_USAGE, {"error": "missing-file",
                                  "path": str(exc)})
    except ScenarioError as exc:
        return _fail(EXIT_VALIDATION, {"error": "validation",
                                       "problems": exc.errors})
    except ManifestError as exc:
        return _fail(EXIT_VALIDATION, {"error": "manifest",
                                       "detail": str(exc)})
    except DivergenceError as exc:
        return _fail(EXIT_DIVERGENCE, {"error": "divergence",
                                       "detail": str(exc)})


if __name__ == "__main__":
    sys.exit(main())
