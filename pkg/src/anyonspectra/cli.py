"""Command-line interface with deterministic CSV/JSON output.

Subcommands: verify, bands, fiberspec, boundstates, sweep, holonomy.
Floats are rendered with 17 significant digits, JSON objects with sorted
keys and no NaN/Inf, CSV with comma separators, '\\n' line endings and a
mandatory header row, so identical configurations give byte-identical
files.  When --out is given, the data file is accompanied by a
<out>.config.json sidecar echoing the fully-resolved configuration;
without --out the data goes to stdout and no sidecars are written.

Exit codes: 0 on success, 1 when a verification fails or a computation
cannot be completed, 2 on usage errors.  A JSON file passed via --config
overrides flags of the same name.  ANYONSPECTRA_THREADS caps the process
pool used by parameter sweeps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .groups import parse_group
from .lattice import TorusLattice, dual_string_from_steps, string_from_steps
from .many_body import HamiltonianSpec, ModelContext, holonomy, run_identity_suite
from .sector_spectra import (
    RelativeWindow,
    dispersion_massive,
    essential_band,
    full_spectrum,
    max_ipr,
)
from .bound_states import bound_state_energies, gap, ky_line_energies

DEFAULT_PHASE_SPEC = "Z3:1:1"


class UsageError(Exception):
    """Invalid configuration: one diagnostic, exit code 2."""


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------


def fmt_float(x) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError("refusing to serialize NaN/Inf")
    return f"{x:.17g}"


def to_json(obj, indent=0) -> str:
    """Minimal JSON emitter: sorted keys, 17-significant-digit floats."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {to_json(v, indent + 2).lstrip()}'
            for k, v in sorted(obj.items())
        )
        return f"{pad}{{\n{items}\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return f"{pad}[]"
        items = ",\n".join(to_json(v, indent + 2) for v in obj)
        return f"{pad}[\n{items}\n{pad}]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + fmt_float(obj)
    if obj is None:
        return pad + "null"
    return pad + json.dumps(str(obj))


def csv_lines(header, rows):
    yield ",".join(header)
    for row in rows:
        yield ",".join(fmt_float(c) if isinstance(c, (float, np.floating))
                       else str(c) for c in row)


def render_table(args, header, rows) -> str:
    """Rows as CSV or as a JSON list of row objects, per --format."""
    fmt = getattr(args, "format", "csv")
    if fmt == "csv":
        return "\n".join(csv_lines(header, rows))
    return to_json([dict(zip(header, row)) for row in rows])


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")


def emit(args, text, meta=None):
    """Write the data (and sidecars) or print to stdout."""
    if args.out:
        write_text(args.out, text)
        write_text(args.out + ".config.json", to_json(resolved_config(args)))
        if meta is not None:
            write_text(args.out + ".meta.json", to_json(meta))
    else:
        print(text)


def resolved_config(args) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def parse_torus(text) -> TorusLattice:
    try:
        lx, ly = text.lower().split("x")
        return TorusLattice(int(lx), int(ly))
    except (ValueError, AttributeError) as exc:
        raise UsageError(f"bad torus spec {text!r}; expected e.g. '2x2'") from exc


def group_from_spec(text):
    try:
        return parse_group(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_tuple(text):
    try:
        return tuple(int(t) for t in str(text).split(","))
    except ValueError as exc:
        raise UsageError(f"bad integer tuple {text!r}") from exc


def parse_phase_spec(text):
    """'GROUP:CHI:G' -> (group, chi, g, chi(g)); tuples comma-separated."""
    try:
        gspec, chi, g = text.split(":")
        group = parse_group(gspec)
        chi, g = parse_tuple(chi), parse_tuple(g)
        return group, chi, g, group.char_value(chi, g)
    except (ValueError, UsageError) as exc:
        raise UsageError(
            f"bad phase spec {text!r}; expected GROUP:CHI:G like 'Z3:1:1'"
        ) from exc


def parse_lambdas(text):
    vals = str(text).split(",")
    if len(vals) != 3:
        raise UsageError("--lambdas needs three values: eps,mu,epsmu")
    try:
        return tuple(float(v) for v in vals)
    except ValueError as exc:
        raise UsageError(f"bad coupling list {text!r}") from exc


def thread_count() -> int:
    env = os.environ.get("ANYONSPECTRA_THREADS", "")
    if env.strip():
        try:
            n = int(env)
        except ValueError as exc:
            raise UsageError(f"ANYONSPECTRA_THREADS={env!r} is not an integer") from exc
        return max(1, n)
    return max(1, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    group = group_from_spec(args.group)
    lat = parse_torus(args.torus)
    le, lm, lem = parse_lambdas(args.lambdas)
    spec = HamiltonianSpec(group, lat, lam_e=le, lam_mu=lm, lam_em=lem,
                           mass=args.mass)
    results = run_identity_suite(spec)
    report = [r.as_dict() for r in results]
    emit(args, to_json(report))
    return 0 if all(r.passed for r in results) else 1


def cmd_bands(args) -> int:
    group = group_from_spec(args.group)
    phase = group.char_value(parse_tuple(args.chi), parse_tuple(args.g))
    ks = np.linspace(0.0, np.pi / 2, args.grid, endpoint=False)
    rows = []
    for kx in ks:
        for ky in ks:
            bands = dispersion_massive(phase, (kx, ky), args.mass)
            rows.append((float(kx), float(ky), *map(float, bands)))
    emit(args, render_table(args, ["kx", "ky", "E1", "E2", "E3", "E4"], rows))
    return 0


def cmd_fiberspec(args) -> int:
    _, _, _, phase = parse_phase_spec(args.phase)
    window = RelativeWindow(args.window)
    k = (args.kx, args.ky)
    vals, vecs = full_spectrum(phase, k, args.lam, args.rho, window,
                               eigenvectors=True)
    lo, hi = essential_band(args.lam, k)
    outliers = vals[(vals < lo - args.outlier_tol) | (vals > hi + args.outlier_tol)]
    meta = {
        "R": float(hi),
        "outliers": [float(v) for v in outliers],
        "ipr_max": max_ipr(vecs),
    }
    text = render_table(args, ["index", "eigenvalue"],
                        [(i, float(v)) for i, v in enumerate(vals)])
    emit(args, text, meta=meta)
    return 0


def cmd_boundstates(args) -> int:
    _, _, _, phase = parse_phase_spec(args.phase)
    window = RelativeWindow(args.window)
    if args.line == "kx":
        result = bound_state_energies(args.lam, args.rho, args.kx, phase)
        k = (args.kx, np.pi / 4)
        gap_val = (gap(args.lam, args.rho, args.kx) if result.exists else 0.0)
    else:
        result = ky_line_energies(args.lam, args.rho, args.ky)
        k = (np.pi / 4, args.ky)
        gap_val = (gap(args.lam, args.rho, args.ky) if result.exists else 0.0)
    from .sector_spectra import outlier_energies

    numeric, _ = outlier_energies(phase, k, args.lam, args.rho, window)
    analytic = np.array(result.energies)
    if args.line == "ky" and result.exists:
        # each reduced-chain level appears twice in the full fiber (d_x = +-1)
        analytic = np.sort(np.concatenate([analytic, analytic]))
    converged = bool(
        len(analytic) == len(numeric)
        and (len(analytic) == 0
             or np.max(np.abs(analytic - numeric)) < args.tol)
    )
    payload = {
        "analytic_energies": [float(v) for v in result.energies],
        "numeric_energies": [float(v) for v in numeric],
        "gap": float(gap_val),
        "B": float(result.B),
        "converged": converged,
    }
    emit(args, to_json(payload))
    return 0 if converged else 1


def _sweep_point(task):
    lam, rho, k, window_size, phase, tol = task
    vals = full_spectrum(phase, k, lam, rho, RelativeWindow(window_size))
    _, r = essential_band(lam, k)
    return [(float(lam), i, float(v), int(abs(v) > r + tol))
            for i, v in enumerate(vals)]


def _worker_init():
    os.environ["OMP_NUM_THREADS"] = "1"
    os.environ["OPENBLAS_NUM_THREADS"] = "1"


def cmd_sweep(args) -> int:
    _, _, _, phase = parse_phase_spec(args.phase)
    k = tuple(float(t) for t in str(args.k).split(","))
    if len(k) != 2:
        raise UsageError(f"bad momentum {args.k!r}; expected 'kx,ky'")
    lams = np.linspace(args.lambda_min, args.lambda_max, args.steps)
    tasks = [(float(lam), args.rho, k, args.window, phase, args.outlier_tol)
             for lam in lams]
    workers = min(thread_count(), len(tasks))
    rows = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers,
                                 initializer=_worker_init) as pool:
            for chunk in pool.map(_sweep_point, tasks):
                rows.extend(chunk)
    else:
        for task in tasks:
            rows.extend(_sweep_point(task))
    emit(args, render_table(args, ["lambda", "eig_index", "energy",
                                   "is_outlier"], rows))
    return 0


def cmd_holonomy(args) -> int:
    group = group_from_spec(args.group)
    lat = parse_torus(args.torus)
    ctx = ModelContext(group, lat)
    loop = string_from_steps(lat, parse_tuple(args.base), args.loop)
    dual = dual_string_from_steps(lat, parse_tuple(args.flux_base),
                                  args.flux_path)
    chi, g = parse_tuple(args.chi), parse_tuple(args.g)
    measured, predicted, winding = holonomy(ctx, chi, g, dual, loop)
    err = abs(measured - predicted)
    payload = {
        "measured_re": measured.real,
        "measured_im": measured.imag,
        "predicted_re": predicted.real,
        "predicted_im": predicted.imag,
        "winding": int(winding),
        "error": float(err),
        "pass": bool(err < args.tol),
    }
    emit(args, to_json(payload))
    return 0 if err < args.tol else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anyonspectra",
        description="Quantum double torus algebra and pair-sector spectra.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tabular=False):
        p.add_argument("--out", default=None, help="output file path")
        p.add_argument("--config", default=None,
                       help="JSON file whose entries override flags")
        if tabular:
            p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("verify", help="run the operator identity suite")
    p.add_argument("--group", default="Z2")
    p.add_argument("--torus", default="2x2")
    p.add_argument("--lambdas", default="0.3,0.7,0.5",
                   help="couplings eps,mu,epsmu")
    p.add_argument("--mass", type=float, default=0.0)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bands", help="pair-sector band structure CSV")
    p.add_argument("--group", default="Z3")
    p.add_argument("--chi", default="1")
    p.add_argument("--g", default="1")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--mass", type=float, default=0.0)
    common(p, tabular=True)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("fiberspec", help="truncated fiber spectrum")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--kx", type=float, default=0.0)
    p.add_argument("--ky", type=float, default=0.0)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--phase", default=DEFAULT_PHASE_SPEC)
    p.add_argument("--outlier-tol", type=float, default=1e-6)
    common(p, tabular=True)
    p.set_defaults(func=cmd_fiberspec)

    p = sub.add_parser("boundstates", help="analytic vs numeric bound states")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--kx", type=float, default=0.0)
    p.add_argument("--ky", type=float, default=0.0)
    p.add_argument("--line", choices=["kx", "ky"], default="kx")
    p.add_argument("--phase", default=DEFAULT_PHASE_SPEC)
    p.add_argument("--window", type=int, default=40)
    p.add_argument("--tol", type=float, default=1e-8)
    common(p)
    p.set_defaults(func=cmd_boundstates)

    p = sub.add_parser("sweep", help="spectrum vs lambda CSV")
    p.add_argument("--lambda-min", type=float, default=0.05)
    p.add_argument("--lambda-max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=80)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--k", default="0,0")
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--phase", default=DEFAULT_PHASE_SPEC)
    p.add_argument("--outlier-tol", type=float, default=1e-6)
    common(p, tabular=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("holonomy", help="braiding phase on the torus")
    p.add_argument("--group", default="Z3")
    p.add_argument("--chi", default="1")
    p.add_argument("--g", default="1")
    p.add_argument("--torus", default="2x2")
    p.add_argument("--base", default="0,0", help="loop base vertex x,y")
    p.add_argument("--loop", default="U,R,D,L",
                   help="loop steps R,U,L,D from the base vertex")
    p.add_argument("--flux-base", default="0,0", help="flux string start face")
    p.add_argument("--flux-path", default="R,U",
                   help="dual-string steps from the start face")
    p.add_argument("--tol", type=float, default=1e-12)
    common(p)
    p.set_defaults(func=cmd_holonomy)

    return parser


def apply_config_file(args):
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(overrides, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in overrides.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise UsageError(f"config key {key!r} is not a known flag")
            setattr(args, attr, value)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        apply_config_file(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
