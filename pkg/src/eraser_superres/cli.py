"""Command-line front end: ``eraser-sr sweep|correlate|verify|montecarlo|figure``.

Every command writes CSV (17 significant digits) and a JSON run manifest next
to its output so a run can be regenerated bit-for-bit.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, fringes
from .bench import BenchConfig, SourceSpec, four_block_config, phase_grid, port_intensity, port_phase_table
from .correlation import (
    EQUIVALENCE_TOL,
    CorrelationRequest,
    canonical_ports,
    canonical_request,
    correlation_report,
    default_grid,
    estimate_trace,
    normalized_product,
    printed_eighth_order,
    product_correlation,
    sample_port_counts,
    verify_equivalence,
)
from .dsl import ERROR, WARNING, Diagnostic, parse, validate
from .exceptions import ConfigError, DomainError, RequestError
from .fringes import Trace

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

CORRELATE_THRESHOLD = 0.01
FIGURE_GRID = 8192


class CommandError(Exception):
    """Aborts a command with a message on stderr and the usage exit status."""


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def manifest(command: str, config_path, params: dict, outputs: Sequence[Path]) -> dict:
    return {
        "tool": "eraser-sr",
        "version": __version__,
        "command": command,
        "config": None if config_path is None else str(config_path),
        "parameters": params,
        "outputs": [str(p) for p in outputs],
    }


def manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def _emit(diags: Sequence[Diagnostic], path) -> None:
    for d in diags:
        print(f"{path}:{d}", file=sys.stderr)


def load_config(path, order: int, grid: int | None = None, check_xi: bool = True) -> BenchConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"cannot read config {path}: {exc}") from None
    doc = parse(text)
    _emit(doc.diagnostics, path)
    if not doc.ok:
        raise CommandError(f"{path}: configuration has errors")
    config = doc.config
    if grid is not None:
        try:
            config = BenchConfig(config.source, config.m, config.blocks, config.theta, grid)
        except ConfigError as exc:
            raise CommandError(str(exc)) from None
    diags = validate(config, order, doc.positions)
    if not check_xi:
        diags = [d for d in diags if not (d.severity == WARNING and "xi" in d.message)]
    _emit(diags, path)
    if any(d.severity == ERROR for d in diags):
        raise CommandError(f"{path}: validation failed for order {order}")
    return config


def select_ports(config: BenchConfig, order: int, mode: str, names: str | None = None):
    if mode == "canonical":
        return canonical_ports(order, config.theta)
    table = port_phase_table(config) if config.blocks else []
    if names:
        by_name = {p.name: p for p in table}
        wanted = [n.strip() for n in names.split(",") if n.strip()]
        unknown = [n for n in wanted if n not in by_name]
        if unknown:
            raise CommandError(f"unknown port(s): {', '.join(unknown)}")
        if len(wanted) != order:
            raise CommandError(f"--ports lists {len(wanted)} ports but --order is {order}")
        return [by_name[n] for n in wanted]
    if len(table) < order:
        raise CommandError(f"literal mode: config provides {len(table)} ports, order {order} requested")
    return table[:order]


def cmd_sweep(args) -> int:
    config = load_config(args.config, 1, args.grid)
    out = Path(args.out)
    phis = config.phis
    ports = port_phase_table(config)
    cols = [port_intensity(p, config.source, config.m, phis) for p in ports]
    write_csv(out, ["phi"] + [p.name for p in ports], [phis] + cols)
    params = {"grid": config.grid_points}
    write_json(manifest_path(out), manifest("sweep", args.config, params, [out]))
    return EXIT_OK


def cmd_correlate(args) -> int:
    config = load_config(args.config, args.order, args.grid, check_xi=args.mode == "literal")
    ports = select_ports(config, args.order, args.mode, args.ports)
    request = CorrelationRequest(tuple(ports), config.grid_points)
    report = correlation_report(request, config.source, config.m, args.threshold)
    out = Path(args.out)
    write_csv(out, ["phi", "value", "normalized"],
              [report.trace.phis, report.trace.values, report.normalized_trace.values])
    payload = report.to_dict()
    payload.update(
        mode=args.mode,
        threshold=args.threshold,
        ports=[{"name": p.name, "chi": p.chi, "theta": p.theta} for p in ports],
    )
    report_path = out.with_name(out.stem + ".report.json")
    write_json(report_path, payload)
    params = {"order": args.order, "mode": args.mode, "grid": config.grid_points,
              "threshold": args.threshold, "ports": args.ports}
    write_json(manifest_path(out), manifest("correlate", args.config, params, [out, report_path]))
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def claim_checks(order: int, grid: int) -> list[dict]:
    """Published statements about order ``order`` that the closed form contradicts."""
    claims = []
    if order == 8:
        trace = normalized_product(canonical_request(8, grid))
        observed = fringes.first_peak(trace)
        claims.append({
            "id": "order8-first-peak-pi-over-16",
            "statement": "first fringe of the order-8 product sits at pi/16",
            "stated": math.pi / 16,
            "observed": observed,
            "closed_form": math.pi / 8,
            "consistent": abs(observed - math.pi / 16) <= 2 * math.pi / grid,
            "note": "inconsistent with sin^2(N phi/2) and the first-peak rule phi_j = pi/j",
        })
        phis = phase_grid(grid)
        literal = Trace(phis, printed_eighth_order(math.pi / 4, math.pi / 4, SourceSpec(1.0), 1, phis)).normalized()
        count = fringes.count_fringes(literal, CORRELATE_THRESHOLD)
        claims.append({
            "id": "order8-equal-xi-eight-fringes",
            "statement": "order-8 product with xi1 = xi2 = pi/4 shows 8 fringes",
            "stated": 8,
            "observed": count,
            "consistent": count == 8,
            "note": "xi1 = pi/4, xi2 = 3pi/4 is required for 8 equal fringes",
        })
    return claims


def cmd_verify(args) -> int:
    orders = args.order or []
    results, claims = [], []
    for n in orders:
        if n < 1:
            raise CommandError(f"order must be >= 1, got {n}")
        grid = args.grid or default_grid(n)
        if grid < 512:
            raise CommandError("verify needs --grid >= 512")
        residual = verify_equivalence(n, grid)
        rep = fringes.analyze(normalized_product(canonical_request(n, grid)))
        ok = residual < EQUIVALENCE_TOL and rep.fringe_count == n
        results.append({
            "order": n,
            "grid_points": grid,
            "residual": residual,
            "tolerance": EQUIVALENCE_TOL,
            "fringe_count": rep.fringe_count,
            "first_peak": rep.first_peak,
            "expected_first_peak": math.pi / n,
            "pass": bool(ok),
        })
        claims.extend(claim_checks(n, grid))
    report = {"results": results, "claims": claims, "all_pass": all(r["pass"] for r in results)}
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        write_json(out, report)
        write_json(manifest_path(out), manifest("verify", None, {"orders": orders, "grid": args.grid}, [out]))
    return EXIT_OK if report["all_pass"] else EXIT_FAILED


def cmd_montecarlo(args) -> int:
    config = load_config(args.config, args.order, args.grid, check_xi=args.mode == "literal")
    ports = select_ports(config, args.order, args.mode, args.ports)
    request = CorrelationRequest(tuple(ports), config.grid_points)
    try:
        counts = sample_port_counts(request, config.source, config.m, args.exposure, args.seed)
    except DomainError as exc:
        raise CommandError(str(exc)) from None
    est = estimate_trace(request, config.source, config.m, args.exposure, args.seed, counts=counts)
    analytic = normalized_product(request)
    out = Path(args.out)
    header = ["phi"] + [f"counts_{p.name}" for p in ports] + ["estimated", "analytic"]
    write_csv(out, header, [request.phis, *counts, est.values, analytic.values])
    params = {"order": args.order, "mode": args.mode, "grid": config.grid_points,
              "exposure": args.exposure, "seed": args.seed, "ports": args.ports}
    write_json(manifest_path(out), manifest("montecarlo", args.config, params, [out]))
    summary = {
        "sup_norm_deviation": float(np.max(np.abs(est.values - analytic.values))),
        "fringe_count": fringes.count_fringes(est) if est.peak > 0 else 0,
        "total_counts": int(counts.sum()),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def figure_series(which: int, grid: int = FIGURE_GRID) -> dict[str, tuple[list[str], list[np.ndarray]]]:
    """Panel name -> (column names, columns); the first column is always phi."""
    phis = phase_grid(grid)
    panels = {}

    def canonical(n):
        return normalized_product(canonical_request(n, grid)).values

    if which == 2:
        config = four_block_config(math.pi / 4, 3 * math.pi / 4, grid_points=grid)
        ports = port_phase_table(config)
        by_name = {p.name: p for p in ports}
        left = [port_intensity(p, config.source, config.m, phis) for p in ports]
        panels["ports"] = (["phi"] + [p.name for p in ports], [phis] + left)

        def product(names):
            req = CorrelationRequest(tuple(by_name[n] for n in names), grid)
            return product_correlation(req, config.source, config.m).values

        panels["block_products"] = (["phi", "AB", "CD"],
                                 [phis, product(["A1", "A2", "B1", "B2"]), product(["C1", "C2", "D1", "D2"])])
        panels["full_product"] = (["phi", "ABCD"], [phis, product([p.name for p in ports])])
    elif which == 3:
        panels["odd_orders"] = (["phi", "N1", "N3", "N5", "N7"], [phis] + [canonical(n) for n in (1, 3, 5, 7)])
        panels["even_orders"] = (["phi", "N2", "N4", "N6", "N8"], [phis] + [canonical(n) for n in (2, 4, 6, 8)])
        panels["order80"] = (["phi", "N80"], [phis, canonical(80)])
    elif which == 4:
        panels["low_orders"] = (["phi", "N1", "N2", "N4", "N8"], [phis] + [canonical(n) for n in (1, 2, 4, 8)])
    else:
        raise CommandError(f"unknown figure {which}; choose 2, 3 or 4")
    return panels


def cmd_figure(args) -> int:
    grid = args.grid or FIGURE_GRID
    panels = figure_series(args.which, grid)
    out_dir = Path(args.out)
    written, summary = [], {}
    for name, (header, cols) in panels.items():
        path = out_dir / f"{name}.csv"
        write_csv(path, header, cols)
        written.append(path)
        for col_name, values in zip(header[1:], cols[1:]):
            rep = fringes.analyze(Trace(cols[0], values))
            summary[f"{name}/{col_name}"] = {"fringe_count": rep.fringe_count, "first_peak": rep.first_peak}
    summary_path = out_dir / "summary.json"
    write_json(summary_path, summary)
    written.append(summary_path)
    write_json(out_dir / "manifest.json", manifest("figure", None, {"which": args.which, "grid": grid}, written))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eraser-sr", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="per-port intensities over the phase grid")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    for name, func, helptext in (
        ("correlate", cmd_correlate, "Nth-order intensity product and fringe report"),
        ("montecarlo", cmd_montecarlo, "Poisson-sampled estimate of the product trace"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--order", type=int, required=True)
        p.add_argument("--grid", type=int)
        p.add_argument("--mode", choices=("canonical", "literal"), default="canonical")
        p.add_argument("--ports", help="comma-separated port names for literal mode, e.g. C1,C2,D1,D2")
        p.add_argument("--out", required=True)
        if name == "correlate":
            p.add_argument("--threshold", type=float, default=CORRELATE_THRESHOLD)
        else:
            p.add_argument("--exposure", type=float, required=True)
            p.add_argument("--seed", type=int, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="closed-form equivalence of canonical products")
    p.add_argument("--order", type=int, nargs="+", action="extend")
    p.add_argument("--grid", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figure", help="data series behind the fringe figures")
    p.add_argument("which", type=int, choices=(2, 3, 4))
    p.add_argument("--grid", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_figure)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CommandError, ConfigError, RequestError, DomainError) as exc:
        print(f"eraser-sr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
