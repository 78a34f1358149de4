"""Command-line interface.

Subcommands::

    ceqfi bound    --channel SPEC --direction x,y,z [--n N]
    ceqfi sweep    --channel SPEC [--grid RES] [--format csv|json|pgm] [--out DIR]
    ceqfi analytic --channel SPEC [--family NAME] [--direction x,y,z]
    ceqfi verify   --channel SPEC --n N [--state ghz|plus] [--grid RES]
    ceqfi span     --channel SPEC

``SPEC`` is a path to a JSON file or the JSON text itself. Exit codes: 0 on
success, 1 when verification finds a violated bound, 2 on malformed or
invalid input, 3 when no direction admits a linear bound.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cebound, oracle, sweep
from .channels import KrausChannel, channel_from_kraus, make_amplitude_damping, make_pauli_channel
from .errors import AllInfeasible, CeqfiError, ParseError, ValidationError

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3


def _load_text(spec: str) -> str:
    stripped = spec.lstrip()
    if stripped.startswith("{"):
        return spec
    path = Path(spec)
    try:
        return path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read channel spec {spec!r}: {exc.strerror}") from None


def _field(obj: dict, name: str):
    if name not in obj:
        raise ParseError(f"missing field {name!r}")
    return obj[name]


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"field {where!r}: expected a number, got {x!r}")
    return float(x)


def _kraus_ops(raw) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise ParseError("field 'ops': expected a non-empty list of operators")
    ops = []
    for i, op in enumerate(raw):
        if not isinstance(op, list) or len(op) != 4:
            raise ParseError(f"field 'ops[{i}]': expected 4 entries [re, im] in row-major order")
        entries = []
        for j, z in enumerate(op):
            if not isinstance(z, list) or len(z) != 2:
                raise ParseError(f"field 'ops[{i}][{j}]': expected [re, im]")
            entries.append(complex(_number(z[0], f"ops[{i}][{j}]"), _number(z[1], f"ops[{i}][{j}]")))
        ops.append(np.array(entries).reshape(2, 2))
    return np.array(ops)


def parse_channel_spec(text: str) -> KrausChannel:
    """Build a canonical channel from its JSON description.

    Raises:
        ParseError: malformed JSON or schema (message names the line or field).
        ValidationError: Kraus operators that are not trace preserving, or
            invalid channel parameters.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ParseError("channel spec must be a JSON object")
    kind = _field(obj, "type")
    try:
        if kind == "pauli":
            p = _field(obj, "p")
            if not isinstance(p, list):
                raise ParseError("field 'p': expected a list of probabilities")
            return make_pauli_channel([_number(x, "p") for x in p])
        if kind == "amplitude_damping":
            return make_amplitude_damping(_number(_field(obj, "p"), "p"))
        if kind == "kraus":
            return channel_from_kraus(_kraus_ops(_field(obj, "ops")))
    except (ParseError, ValidationError):
        raise
    except CeqfiError as exc:
        raise ValidationError(str(exc)) from None
    raise ParseError(f"field 'type': unknown channel type {kind!r}")


def _direction(text: str) -> np.ndarray:
    try:
        v = [float(x) for x in text.split(",")]
    except ValueError:
        raise ParseError(f"direction {text!r} is not three comma-separated numbers") from None
    if len(v) != 3:
        raise ParseError(f"direction needs three components, got {len(v)}")
    try:
        return cebound.Direction.of(v).vector
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: Path | None, name: str):
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def cmd_bound(args) -> int:
    c = parse_channel_spec(_load_text(args.channel))
    if args.direction is None:
        raise ParseError("bound needs --direction")
    r = cebound.minimize_alpha_norm(c, _direction(args.direction), tol=args.gap_tol, max_iter=args.max_iter)
    text = _dump(r.to_dict(args.n))
    sys.stdout.write(text)
    _emit(text, args.out, "bound.json")
    return EXIT_OK


def _sweep_summary(grid: sweep.SweepGrid) -> dict:
    out = {
        "resolution": grid.resolution,
        "points": len(grid.points),
        "feasible_points": grid.feasible_count,
        "all_converged": grid.all_converged,
    }
    if grid.best is None:
        out.update(n_eff_max=None, error="AllInfeasible")
        return out
    out.update(
        n_eff_max=grid.refined.alpha_min,
        best_direction=list(grid.refined.n),
        best_P=list(grid.refined.P),
        grid_max=grid.best.alpha_min,
        grid_best_direction=list(grid.best.n),
    )
    return out


def cmd_sweep(args) -> int:
    c = parse_channel_spec(_load_text(args.channel))
    grid = sweep.sweep_directions(c, args.grid, refine=not args.no_refine)
    summary = _dump(_sweep_summary(grid))
    csv, pgm = grid.to_csv(), grid.to_pgm()
    _emit(csv, args.out, "sweep.csv")
    _emit(pgm, args.out, "sweep.pgm")
    _emit(summary, args.out, "summary.json")
    fmt = args.format or "json"
    sys.stdout.write({"csv": csv, "pgm": pgm, "json": summary}[fmt])
    return EXIT_INFEASIBLE if grid.best is None else EXIT_OK


def _analytic_family(c: KrausChannel, override: str | None) -> tuple[str, list[float]]:
    if c.family == "amplitude_damping":
        family, params = "amplitude_damping", [c.params[0]]
    elif c.family == "pauli":
        p = list(c.params[1:])
        if p[0] == p[1] == p[2]:
            family, params = "depolarizing", [sum(p)]
        elif min(p) == 0:
            family, params = "pauli_rank2_smallp", p
        else:
            family, params = "pauli_full_smallp", p
    else:
        raise ValidationError("analytic bounds need a pauli or amplitude_damping channel")
    if override is not None:
        if override == "depolarizing" and c.family == "pauli":
            params = [sum(c.params[1:])]
        family = override
    return family, params


def cmd_analytic(args) -> int:
    c = parse_channel_spec(_load_text(args.channel))
    family, params = _analytic_family(c, args.family)
    n = _direction(args.direction) if args.direction else None
    try:
        value = cebound.analytic_bound(family, params, n)
    except CeqfiError as exc:
        raise ValidationError(str(exc)) from None
    out = {"family": family, "params": params, "n_eff_bound": value}
    if n is not None:
        out["direction"] = list(n)
    text = _dump(out)
    sys.stdout.write(text)
    _emit(text, args.out, "analytic.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    c = parse_channel_spec(_load_text(args.channel))
    N = args.n or 3
    if not 1 <= N <= oracle.MAX_QUBITS:
        raise ValidationError(f"--n must lie in 1..{oracle.MAX_QUBITS}")
    state = {"ghz": oracle.ghz, "plus": oracle.plus}[args.state](N)
    report = oracle.verify_ce_bound(state, c, args.grid)
    out = report.to_dict()
    out.update(state=args.state, resolution=args.grid)
    text = _dump(out)
    sys.stdout.write(text)
    _emit(text, args.out, "verify.json")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_span(args) -> int:
    c = parse_channel_spec(_load_text(args.channel))
    model = cebound.GaugeModel(c)
    out = {"span_dim": model.rank, "feasible_anywhere": model.feasible_subspace.shape[1] > 0}
    text = _dump(out)
    sys.stdout.write(text)
    _emit(text, args.out, "span.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ceqfi", description="Channel-extension bounds on the QFI of noisy qubit ensembles.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_default=None):
        p.add_argument("--channel", required=True, help="path to a channel JSON file, or inline JSON")
        p.add_argument("--direction", help="observable direction x,y,z (normalised on load)")
        p.add_argument("--n", type=int, help="number of probes N")
        p.add_argument("--out", type=Path, help="directory for output artifacts")
        p.add_argument("--seed", type=int, default=0, help="RNG seed; accepted for reproducible run configs (current subcommands are deterministic)")
        p.add_argument("--gap-tol", type=float, default=cebound.GAP_TOL, help="relative duality-gap tolerance")
        p.add_argument("--max-iter", type=int, default=cebound.MAX_ITER, help="solver iteration cap")
        if grid_default is not None:
            p.add_argument("--grid", type=int, default=grid_default, help="grid resolution per axis")

    common(sub.add_parser("bound", help="minimise ||alpha|| for one direction"))
    p = sub.add_parser("sweep", help="sweep directions over the stereographic disk")
    common(p, sweep.DEFAULT_RESOLUTION)
    p.add_argument("--format", choices=("csv", "json", "pgm"), help="what to print on stdout (default json summary)")
    p.add_argument("--no-refine", action="store_true", help="skip the local refinement of the best point")
    p = sub.add_parser("analytic", help="closed-form effective-size bounds")
    common(p)
    p.add_argument("--family", choices=cebound.ANALYTIC_FAMILIES, help="override the detected family")
    p = sub.add_parser("verify", help="check bounds against the brute-force QFI oracle")
    common(p, 21)
    p.add_argument("--state", choices=("ghz", "plus"), default="ghz")
    common(sub.add_parser("span", help="beta = 0 feasibility diagnostics"))
    return parser


COMMANDS = {"bound": cmd_bound, "sweep": cmd_sweep, "analytic": cmd_analytic, "verify": cmd_verify, "span": cmd_span}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AllInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (CeqfiError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
