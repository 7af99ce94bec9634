"""Command-line interface.

Energies, couplings and broadenings are given in units of omega; ``--omega``
rescales the emitted energies (and densities, times) to physical units.
Every output starts with ``#`` metadata lines of the form ``key=value``;
stripping the ``# `` prefix yields a config file that reproduces the run.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .contfrac import evaluate_adaptive, ProbeEnergy, pringsheim_report
from .dynamics import long_time_limit, survival_from_curve, survival_from_peaks
from .model import ModelParams, ParitySector, SectorState
from .oracle import rho0_exact
from .spectral import (
    NoIsolatedState,
    TruncationPolicy,
    band_nodes,
    comb_envelope,
    extract_peaks,
    gap_scan,
    ground_and_onset,
    node_positions,
    remove_peak,
    scan,
)

log = logging.getLogger("twophoton")

COMMANDS = ("spectral", "survival", "gap-scan", "converge", "compare")
# exit codes
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3


def fmt(x) -> str:
    return format(float(x), ".17g")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file mirroring the flags (flags win)")
    p.add_argument("--omega", type=float, default=1.0, help="output energy unit")
    p.add_argument("--omega0", type=float, default=0.8, help="atomic frequency / omega")
    p.add_argument("--g", type=float, default=0.2, help="coupling / omega")
    p.add_argument("--output", "-o", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _state_flags(p):
    p.add_argument("--sector", default="+1", help="+1, -1, +i or -i")
    p.add_argument("--index", type=int, default=0, help="chain index n of |2n,-> etc.")


def _scan_flags(p, emin=-1.0, emax=12.0, points=None):
    p.add_argument("--emin", type=float, default=emin)
    p.add_argument("--emax", type=float, default=emax)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--epsilon", type=float, default=0.0005)
    p.add_argument("--truncation", type=int, help="fixed chain truncation N")
    p.add_argument("--tol", type=float, default=1e-8, help="adaptive tolerance")
    p.add_argument("--n-max", type=int, default=24000)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twophoton", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectral", help="spectral density of a chain state")
    _common(p), _state_flags(p), _scan_flags(p)
    p.add_argument("--peaks", help="peak JSON path (default: <output>.peaks.json)")

    p = sub.add_parser("survival", help="survival probability")
    _common(p), _state_flags(p), _scan_flags(p, emin=-1.5, emax=14.0)
    p.add_argument("--path", choices=("peaks", "curve"),
                   help="peak sum or curve quadrature (required)")
    p.add_argument("--tmax", type=float, default=50.0, help="final time in units of 1/omega")
    p.add_argument("--tpoints", type=int, default=1001)

    p = sub.add_parser("gap-scan", help="ground/continuum gap at the collapse")
    _common(p), _scan_flags(p)
    p.add_argument("--omega0-values", default="0.2,0.4,0.8,1.2")
    p.set_defaults(g=0.5, truncation=8000)

    p = sub.add_parser("converge", help="Pringsheim convergence report")
    _common(p), _state_flags(p)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--check", action="store_true", help="also run adaptive CF on a test grid")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--n-max", type=int, default=24000)

    p = sub.add_parser("compare", help="CF curves versus the exact omega0=0 density")
    _common(p), _scan_flags(p, emin=-0.5, emax=16.0)
    p.add_argument("--indices", default="0", help="comma-separated chain indices")
    p.set_defaults(g=0.5, truncation=24000)
    return parser


def read_config(path) -> dict:
    conf = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if line.startswith("#"):
            line = line[1:].strip()
        if not line or "=" not in line:
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        conf[key.replace("-", "_")] = value
    return conf


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        overrides = {}
        for key, value in read_config(args.config).items():
            if key in ("command", "version", "engine", "config") or key not in known:
                continue
            action = known[key]
            if value in ("", "None"):
                overrides[key] = None
            elif isinstance(action, argparse._StoreTrueAction):
                overrides[key] = value.lower() in ("1", "true", "yes")
            else:
                overrides[key] = action.type(value) if action.type else value
        sub.set_defaults(**overrides)
        args = parser.parse_args(argv)
    if args.command == "survival" and args.path is None:
        parser.error("survival needs --path peaks|curve (flag or config)")
    return args


def _params(args) -> ModelParams:
    return ModelParams(1.0, args.omega0, args.g)


def _state(args) -> SectorState:
    return SectorState(ParitySector.parse(args.sector), args.index)


def _policy(args) -> TruncationPolicy:
    if args.truncation is not None:
        return TruncationPolicy.fixed_at(args.truncation)
    return TruncationPolicy(tol=args.tol, n_max=args.n_max)


def metadata(args, **extra) -> list:
    items = {"command": args.command, "engine": f"twophoton {__version__}"}
    for key, value in sorted(vars(args).items()):
        # destinations are not inputs: a re-run to another file stays byte-identical
        if key in ("command", "config", "verbose", "output", "peaks"):
            continue
        items[key] = value
    items.update(extra)
    lines = []
    for key, value in items.items():
        if isinstance(value, float):
            value = fmt(value)
        elif value is None:
            value = ""
        lines.append(f"{key}={value}")
    return lines


def render(args, header: list, columns: list, rows) -> str:
    if args.format == "json":
        meta = dict(line.split("=", 1) for line in header)
        data = [dict(zip(columns, row)) for row in rows]
        return json.dumps({"metadata": meta, "columns": columns, "data": data},
                          indent=1, default=_json_default) + "\n"
    out = [f"# {line}" for line in header]
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(_cell(v) for v in row))
    return "\n".join(out) + "\n"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(type(v))


def emit(args, text: str, path=None):
    path = path or args.output
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _scan_points(args, min_step=None) -> int:
    if args.points:
        return args.points
    step = args.epsilon / 2.5
    if min_step is not None:
        step = min(step, min_step)
    return int(math.ceil((args.emax - args.emin) / step)) + 1


def cmd_spectral(args) -> int:
    params, state = _params(args), _state(args)
    curve = scan(params, state, (args.emin, args.emax), _scan_points(args), args.epsilon,
                 _policy(args), workers=args.workers)
    w = args.omega
    unconverged = int(np.count_nonzero(~curve.converged))
    header = metadata(args, truncation_used=curve.truncation, unconverged_samples=unconverged)
    rows = zip(curve.energies * w, curve.rho / w, curve.converged)
    emit(args, render(args, header, ["E", "rho"] + ["converged"], rows))

    peak_path = args.peaks or (f"{args.output}.peaks.json" if args.output else None)
    if peak_path:
        peaks = extract_peaks(curve, check_resolution=False)
        records = [{"energy": p.energy * w, "weight": p.weight, "width": p.width * w}
                   for p in peaks]
        Path(peak_path).write_text(json.dumps(records, indent=1) + "\n")
    if unconverged > curve.energies.size // 2:
        print(f"error: {unconverged} of {curve.energies.size} samples not converged; "
              "raise --n-max or fix --truncation", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return 0


def _isolated_ground(curve):
    try:
        ground, _, _ = ground_and_onset(curve)
    except NoIsolatedState:
        return None
    return ground


def cmd_survival(args) -> int:
    params, state = _params(args), _state(args)
    times = np.linspace(0.0, args.tmax, args.tpoints)
    curve = scan(params, state, (args.emin, args.emax),
                 _scan_points(args, 0.5 / args.tmax if args.tmax > 0 else None),
                 args.epsilon, _policy(args), workers=args.workers)
    extra = {"truncation_used": curve.truncation}
    if args.path == "peaks":
        peaks = extract_peaks(curve, check_resolution=False)
        result = survival_from_peaks(peaks, times, state, params)
        extra["weight_sum"] = peaks.weight_sum
    else:
        ground = _isolated_ground(curve) if math.isclose(params.g, 0.5) else None
        cont = remove_peak(curve, ground) if ground else curve
        result = survival_from_curve(cont, ground, times)
        extra["long_time_limit"] = long_time_limit(ground)
    extra["renormalization"] = result.renormalization
    extra["plateau"] = result.plateau
    header = metadata(args, **extra)
    emit(args, render(args, header, ["t", "P"], zip(result.times / args.omega, result.P)))
    return 0


def cmd_gap_scan(args) -> int:
    values = [float(v) for v in args.omega0_values.split(",") if v.strip()]
    rows = []
    for w0 in values:
        try:
            [(w0_, gap, info)] = gap_scan(ModelParams(1.0, 0.0, args.g), [w0], args.epsilon,
                                          args.truncation or 8000, workers=args.workers)
            rows.append((w0_, gap * args.omega, True))
        except NoIsolatedState as exc:
            log.warning("omega0=%s: %s", w0, exc)
            rows.append((w0, float("nan"), False))
    header = metadata(args, onset_rule="rho > 0.05 * median(band)")
    emit(args, render(args, header, ["omega0", "gap", "isolated"], rows))
    return 0


def cmd_converge(args) -> int:
    params, state = _params(args), _state(args)
    rep = pringsheim_report(params, args.delta)
    report = {k: getattr(rep, k) for k in
              ("g_ratio", "delta", "c", "beta_odd_limit", "beta_even_limit", "guaranteed")}
    if args.check:
        energies = np.linspace(-2.0, 10.0, 13)
        results = [evaluate_adaptive(params, state, ProbeEnergy(e, 0.0005), args.tol, args.n_max)
                   for e in energies]
        report["check_converged"] = sum(r.converged for r in results)
        report["check_points"] = len(results)
        report["check_max_truncation"] = max(r.truncation for r in results)
    header = metadata(args)
    if args.format == "json":
        emit(args, json.dumps({"metadata": dict(line.split("=", 1) for line in header),
                               "report": report}, indent=1) + "\n")
    else:
        emit(args, _kv_csv(header, report))
    return 0


def _kv_csv(header, report) -> str:
    lines = [f"# {h}" for h in header] + ["key,value"]
    for k, v in report.items():
        lines.append(f"{k},{_cell(v)}")
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    if not math.isclose(args.g, 0.5):
        print("error: compare needs the collapse point --g 0.5", file=sys.stderr)
        return EXIT_USAGE
    params = _params(args)
    indices = [int(v) for v in args.indices.split(",") if v.strip()]
    emin = max(args.emin, -0.5 + 1e-9)
    rows, summary = [], {}
    for n in indices:
        state = SectorState(ParitySector.PLUS_ONE, n)
        curve = scan(params, state, (emin, args.emax), _scan_points(args), args.epsilon,
                     _policy(args), workers=args.workers)
        exact = rho0_exact(n, curve.energies)
        ratio = np.divide(curve.rho, exact, out=np.full_like(exact, np.nan), where=exact > 0)
        peaks = extract_peaks(curve, check_resolution=False)
        x, env = comb_envelope(peaks.__class__([p for p in peaks if p.energy > -0.5], 0.0))
        env_ratio = env / rho0_exact(n, x)
        hi = x > emin + (2.0 / 3.0) * (args.emax - emin)
        cf_nodes = band_nodes(curve)
        grid = np.linspace(emin, args.emax, 200001)
        exact_nodes = node_positions(grid, rho0_exact(n, grid))
        summary[n] = {"cf_nodes": len(cf_nodes), "exact_nodes": len(exact_nodes),
                      "cf_node_energies": [float(v) for v in cf_nodes],
                      "exact_node_energies": [float(v) for v in exact_nodes],
                      "high_energy_ratio": float(np.median(env_ratio[hi])) if hi.any() else None}
        rows.extend((n, e * args.omega, r / args.omega, ex / args.omega, q)
                    for e, r, ex, q in zip(curve.energies, curve.rho, exact, ratio))
    header = metadata(args, summary=json.dumps(summary, sort_keys=True))
    emit(args, render(args, header, ["index", "E", "rho_cf", "rho_exact", "ratio"], rows))
    return 0


HANDLERS = {"spectral": cmd_spectral, "survival": cmd_survival, "gap-scan": cmd_gap_scan,
            "converge": cmd_converge, "compare": cmd_compare}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return HANDLERS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
