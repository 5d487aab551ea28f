"""Command-line surface: spectrum, measure, evolve, decay-fit, audit, validate.

Output conventions shared by every subcommand:

* JSON for structured results (indent 2, one trailing newline),
* CSV for bulk numeric tables: comma separator, '.' decimal, header row,
  LF line endings, and a leading block of '# key: value' comment lines
  carrying the operator's config hash so results stay traceable,
* floats serialized with repr (shortest round-trip form), so identical
  inputs produce byte-identical outputs,
* exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
  error (the package's named error conditions).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .decay import (
    NORM_KINDS,
    fit_exponent,
    geometric_times,
    judge,
    norm_series,
)
from .errors import InsufficientPoints, SpecbandError
from .measure import point_mass, spectral_data
from .operators import JacobiOperator, config_hash, load_operator, norm_bound
from .propagator import DEFAULT_NODE_BUDGET, DEFAULT_TRUNCATION_CAP, EvolutionResult, evolve_grid
from .spectrum import stationary_audit
from .validation import format_table, validation_suite


def _fmt(x) -> str:
    return repr(float(x))


def _jsonable(obj):
    """Coerce numpy scalars/arrays/tuples into JSON-encodable values."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as f:
            f.write(text)


def _write_json(path: str | None, obj) -> None:
    _write_text(path, json.dumps(_jsonable(obj), indent=2) + "\n")


def _predictions(J: JacobiOperator) -> dict[str, float | None]:
    data = spectral_data(J)
    audit = stationary_audit(data.monodromy, data.bands)
    return {"sup": audit.predicted_global, "wsup": audit.predicted_local, "l2": 0.0}


# ---------------------------------------------------------------- subcommands


def _cmd_spectrum(args) -> int:
    J = load_operator(args.config)
    data = spectral_data(J)
    B = data.bands
    eigen = [
        {
            "value": info.value,
            "gap_index": info.gap_index,
            "weight": info.weight if info.weight is not None else point_mass(J, info.value),
        }
        for info in data.eigenvalues
    ]
    out = {
        "config_hash": config_hash(J),
        "a": list(J.a),
        "b": list(J.b),
        "q": J.q,
        "norm_bound": norm_bound(J),
        "edges": B.edges,
        "bands": B.bands,
        "gaps": B.gaps,
        "critical_points": B.critical_points,
        "endpoint_gapped": B.endpoint_gapped,
        "orientation": B.orientation,
        "eigenvalues": eigen,
    }
    _write_json(args.out, out)
    return 0


def _cmd_measure(args) -> int:
    J = load_operator(args.config)
    data = spectral_data(J)
    S = data.measure
    masses = {
        "config_hash": config_hash(J),
        "point_masses": [
            {"value": info.value, "gap_index": info.gap_index, "weight": info.weight}
            for info in S.point_masses
        ],
        "continuous_mass": S.continuous_mass,
        "total_mass": S.continuous_mass + sum(i.weight for i in S.point_masses),
    }
    lines = [
        "# specband measure",
        f"# config_hash: {config_hash(J)}",
        f"# grid_per_band: {args.grid}",
        f"# masses: {json.dumps(_jsonable(masses))}",
        "band,x,density",
    ]
    for j, (lo, hi) in enumerate(data.bands.bands, start=1):
        step = (hi - lo) / args.grid
        x = lo + (np.arange(args.grid) + 0.5) * step
        w = S.density(x)
        lines.extend(
            f"{j},{_fmt(xi)},{_fmt(wi)}" for xi, wi in zip(x, w)
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.out is not None:
        _write_json(_sibling(args.out, ".masses.json"), masses)
    return 0


def _sibling(path: str, suffix: str) -> str:
    stem = path[: -len(".csv")] if path.endswith(".csv") else path
    return stem + suffix


def _parse_times(spec: str) -> np.ndarray:
    try:
        kind, rest = spec.split(":", 1)
        if kind != "geometric":
            raise ValueError(f"unknown time grid kind {kind!r}")
        start, stop, count = rest.split(",")
        return geometric_times(float(start), float(stop), int(count))
    except ValueError as err:
        raise UsageError(f"bad --times {spec!r}: {err}") from None


class UsageError(Exception):
    pass


def _evolution_csv(result: EvolutionResult, extra: list[str]) -> str:
    lines = [
        "# specband evolve",
        f"# config_hash: {result.config_hash}",
        f"# method: {result.method}",
        f"# norm_bound: {_fmt(result.norm_bound)}",
        f"# n_max: {result.n_max}",
        *extra,
        "t,site,re,im",
    ]
    for i, t in enumerate(result.times):
        row = result.amplitudes[i]
        ts = _fmt(t)
        lines.extend(
            f"{ts},{n},{_fmt(v.real)},{_fmt(v.imag)}"
            for n, v in enumerate(row, start=1)
        )
    return "\n".join(lines) + "\n"


def _cmd_evolve(args) -> int:
    J = load_operator(args.config)
    times = _parse_times(args.times)
    data = spectral_data(J)
    method = args.method
    run_method = "spectral" if method == "both" else method
    result = evolve_grid(
        J,
        _initial_state(args),
        times,
        n_max=args.n_max,
        method=run_method,
        data=data,
        node_budget=args.node_budget,
        truncation_cap=args.truncation_cap,
    )
    extra = []
    fallback_rows = sum(1 for m in result.row_methods if m != result.method)
    if fallback_rows:
        extra.append(f"# fallback_rows: {fallback_rows}")
    if method == "both":
        other = evolve_grid(
            J, _initial_state(args), times, n_max=result.n_max,
            method="oracle", truncation_cap=args.truncation_cap,
        )
        gap = float(np.max(np.abs(result.amplitudes - other.amplitudes)))
        extra.append(f"# oracle_max_disagreement: {_fmt(gap)}")
    _write_text(args.out, _evolution_csv(result, extra))
    if args.emit_plot:
        if args.out is None:
            raise UsageError("--emit-plot needs --out to derive the SVG path")
        _emit_plot(J, result, args, _sibling(args.out, ".svg"))
    return 0


def _initial_state(args):
    from .operators import FiniteState

    return FiniteState.delta(args.initial_site)


def _emit_plot(J, result, args, path) -> None:
    from .plotting import decay_plot

    kinds = args.norm or list(NORM_KINDS)
    norms = {kind: norm_series(result, kind) for kind in kinds}
    predictions = _predictions(J)
    fits = {}
    for kind in kinds:
        try:
            fits[kind] = fit_exponent(result.times, norms[kind], t_min=args.t_min)
        except InsufficientPoints:
            pass
    decay_plot(
        path,
        result.times,
        norms,
        fits=fits,
        predictions={k: predictions.get(k) for k in fits},
        title=f"decay of evolved state, operator {result.config_hash}",
    )


def _read_evolution_csv(path: str) -> EvolutionResult:
    meta: dict[str, str] = {}
    times: list[float] = []
    rows: dict[float, list[complex]] = {}
    with open(path) as f:
        header_seen = False
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, val = body.split(":", 1)
                    meta[key.strip()] = val.strip()
                continue
            if not header_seen:
                if line != "t,site,re,im":
                    raise UsageError(f"{path}: expected header 't,site,re,im', got {line!r}")
                header_seen = True
                continue
            t_s, site_s, re_s, im_s = line.split(",")
            t = float(t_s)
            if t not in rows:
                rows[t] = []
                times.append(t)
            rows[t].append(complex(float(re_s), float(im_s)))
    if not times:
        raise UsageError(f"{path}: no amplitude rows found")
    n_max = len(rows[times[0]])
    if any(len(rows[t]) != n_max for t in times):
        raise UsageError(f"{path}: ragged site ranges between time rows")
    amplitudes = np.array([rows[t] for t in times])
    return EvolutionResult(
        times=np.asarray(times),
        amplitudes=amplitudes,
        method=meta.get("method", "unknown"),
        norm_bound=float(meta.get("norm_bound", "nan")),
        config_hash=meta.get("config_hash", ""),
    )


def _cmd_decay_fit(args) -> int:
    J = load_operator(args.config)
    result = _read_evolution_csv(args.csv)
    if result.config_hash and result.config_hash != config_hash(J):
        raise UsageError(
            f"CSV was generated from config {result.config_hash}, "
            f"but --config hashes to {config_hash(J)}"
        )
    if not np.isfinite(result.norm_bound):
        result.norm_bound = norm_bound(J)
    kinds = args.norm or list(NORM_KINDS)
    predictions = _predictions(J)
    fits = []
    for kind in kinds:
        fit = fit_exponent(result.times, norm_series(result, kind), t_min=args.t_min)
        predicted = predictions[kind]
        fits.append(
            {
                "kind": kind,
                "slope": fit.slope,
                "ci": fit.half_width,
                "stderr": fit.stderr,
                "n_points": fit.n_points,
                "predicted": "unclassified" if predicted is None else predicted,
                "pass": judge(kind, fit, predicted),
            }
        )
    _write_json(
        args.out,
        {
            "config_hash": config_hash(J),
            "method": result.method,
            "t_min": args.t_min,
            "fits": fits,
        },
    )
    return 0


def _cmd_audit(args) -> int:
    J = load_operator(args.config)
    data = spectral_data(J)
    report = stationary_audit(data.monodromy, data.bands)
    out = {"config_hash": config_hash(J), "q": J.q}
    out.update(report.to_dict())
    _write_json(args.out, out)
    return 0


def _cmd_validate(args) -> int:
    J = load_operator(args.config)
    checks = validation_suite(J)
    table = format_table(checks)
    failed = [c for c in checks if not c.passed]
    summary = (
        "all checks passed" if not failed else f"{len(failed)} of {len(checks)} checks FAILED"
    )
    _write_text(None, table + "\n" + summary + "\n")
    if args.out is not None:
        _write_json(
            args.out,
            {
                "config_hash": config_hash(J),
                "checks": [
                    {"name": c.name, "passed": c.passed, "detail": c.detail}
                    for c in checks
                ],
                "passed": not failed,
            },
        )
    return 0 if not failed else 1


# -------------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specband",
        description="Band structure, spectral measure, and dispersive decay "
        "of periodic Jacobi operators on the half-line.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="operator JSON: {\"a\": [...], \"b\": [...]}")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("spectrum", help="bands, gaps, and gap eigenvalues as JSON")
    common(p)
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("measure", help="spectral density CSV plus point-mass JSON")
    common(p)
    p.add_argument("--grid", type=int, default=512, help="density samples per band")
    p.set_defaults(fn=_cmd_measure)

    p = sub.add_parser("evolve", help="evolved amplitudes over a time grid as CSV")
    common(p)
    p.add_argument("--times", required=True, help="geometric:START,STOP,COUNT")
    p.add_argument("--method", choices=("spectral", "oracle", "both"), default="spectral")
    p.add_argument("--n-max", type=int, default=None, help="site range (default: light cone)")
    p.add_argument("--initial-site", type=int, default=1, help="u = delta at this site")
    p.add_argument("--emit-plot", action="store_true", help="write a log-log SVG next to --out")
    p.add_argument("--norm", action="append", choices=NORM_KINDS, help="norms for the plot")
    p.add_argument("--t-min", type=float, default=20.0, help="fit window start for the plot")
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--truncation-cap", type=int, default=DEFAULT_TRUNCATION_CAP)
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("decay-fit", help="fit power-law decay exponents to an evolution CSV")
    p.add_argument("csv", help="CSV produced by the evolve subcommand")
    common(p)
    p.add_argument("--norm", action="append", choices=NORM_KINDS, help="norm kinds to fit")
    p.add_argument("--t-min", type=float, default=20.0, help="fit only samples with t >= this")
    p.set_defaults(fn=_cmd_decay_fit)

    p = sub.add_parser("audit", help="stationary-point audit and predicted decay exponents")
    common(p)
    p.set_defaults(fn=_cmd_audit)

    p = sub.add_parser("validate", help="run the cross-checking invariant suite")
    common(p)
    p.set_defaults(fn=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except SpecbandError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
