"""``umbilic-lab`` command line: verify, index, budget, foliation.

Exit codes: 0 pass, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig
from .constructions import InvalidParameters, build_flat_metric, build_sphere_metric
from .shape import SurfaceChart
from .umbilic import (
    UmbilicReport,
    WindingError,
    sphere_scan,
    trace_foliation,
    umbilic_scan,
)
from .verify import REPORT_HEADER, budget_flat, budget_sphere, run_residual_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_OUT = {
    "verify": "residuals.csv",
    "index": "umbilics.csv",
    "budget": "budget.csv",
    "foliation": "foliation.svg",
}
ORIGIN_TOL = 1e-3


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_path(cfg: RunConfig, command: str) -> Path:
    return Path(cfg.out or DEFAULT_OUT[command])


# --------------------------------------------------------------------------
# verify


def cmd_verify(cfg: RunConfig) -> int:
    params = cfg.params()
    report = run_residual_suite(cfg.family, params, cfg.samples, cfg.seed, tolerance=cfg.tolerance)
    print(report.summary())
    atomic_write(_out_path(cfg, "verify"), report.to_csv())
    return EXIT_OK if report.all_passed else EXIT_FAIL


# --------------------------------------------------------------------------
# index


def _umbilic_label(family: str, chart: str, loc: complex) -> str:
    at_zero = abs(loc) < ORIGIN_TOL
    if family == "flat":
        return "origin" if at_zero else f"z={loc.real:+.6f}{loc.imag:+.6f}i"
    if chart == "antipodal":
        return "south pole (ξ′=0)" if at_zero else f"ξ′={loc.real:+.6f}{loc.imag:+.6f}i"
    return "north pole (ξ=0)" if at_zero else f"ξ={loc.real:+.6f}{loc.imag:+.6f}i"


def flat_scan_region(cfg: RunConfig):
    """Square inscribed in ``|z| <= r0``, where the deformation is a pure monomial."""
    h = cfg.r0 / math.sqrt(2)
    return (-h, h, -h, h)


def _scan(cfg: RunConfig) -> UmbilicReport:
    params = cfg.params()
    if cfg.family == "flat":
        chart = SurfaceChart(build_flat_metric(params), 0.0)
        return umbilic_scan(chart, flat_scan_region(cfg), cfg.grid)
    return sphere_scan(build_sphere_metric(params), cfg.grid)


def _umbilic_csv(report: UmbilicReport) -> str:
    buf = io.StringIO()
    buf.write(REPORT_HEADER + "\n")
    if report.totally_umbilic:
        buf.write("# note: totally umbilic region\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["chart", "re", "im", "index", "loop_radius", "loop_samples"])
    for u in report.umbilics:
        w.writerow([u.chart, f"{u.location.real:.12g}", f"{u.location.imag:.12g}", u.index, f"{u.radius:.6g}", u.samples])
    return buf.getvalue()


def cmd_index(cfg: RunConfig) -> int:
    try:
        report = _scan(cfg)
    except WindingError as exc:
        print(f"index computation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    status = EXIT_OK
    if report.totally_umbilic:
        print("totally umbilic region (index undefined)")
    elif not report.umbilics:
        print("no umbilics found")
    else:
        parts = [f"{_umbilic_label(cfg.family, u.chart, u.location)}: index {u.index}"
                 for u in report.umbilics]
        if cfg.family == "sphere":
            total = report.index_sum
            euler = "=χ(S²)" if total == 2 else "≠χ(S²)=2"
            parts.append(f"total={total}{euler}")
            if total != 2:
                status = EXIT_FAIL
        print("; ".join(parts))
    atomic_write(_out_path(cfg, "index"), _umbilic_csv(report))
    return status


# --------------------------------------------------------------------------
# budget


def cmd_budget(cfg: RunConfig) -> int:
    if cfg.family == "flat":
        report = budget_flat(cfg.epsilon, cfg.lam, cfg.n, cfg.m, cfg.r0, cfg.r1)
    else:
        report = budget_sphere(cfg.epsilon, cfg.R0, cfg.lam)
    print(report.summary())
    atomic_write(_out_path(cfg, "budget"), report.to_csv())
    return EXIT_OK if report.satisfied else EXIT_FAIL


# --------------------------------------------------------------------------
# foliation


SVG_SIZE = 512
SVG_MARGIN = 16


def _svg(lines_major, lines_minor, umbilics, region, title: str) -> str:
    x0, x1, y0, y1 = region
    span = SVG_SIZE - 2 * SVG_MARGIN
    sx, sy = span / (x1 - x0), span / (y1 - y0)

    def pt(u):
        return f"{SVG_MARGIN + (u.real - x0) * sx:.2f},{SVG_MARGIN + (y1 - u.imag) * sy:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}" '
        f'width="{SVG_SIZE}" height="{SVG_SIZE}">',
        f"<title>{title}</title>",
        f'<rect x="{SVG_MARGIN}" y="{SVG_MARGIN}" width="{span}" height="{span}" fill="white" stroke="#999"/>',
    ]
    for group, colour in ((lines_major, "#1f5fa8"), (lines_minor, "#c0392b")):
        for line in group:
            if len(line) > 1:
                out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="0.8" '
                           f'points="{" ".join(pt(u) for u in line)}"/>')
    for loc, label in umbilics:
        x, y = pt(loc).split(",")
        out.append(f'<circle cx="{x}" cy="{y}" r="4" fill="black"/>')
        out.append(f'<text x="{float(x) + 6:.2f}" y="{float(y) - 6:.2f}" font-size="12" '
                   f'font-family="sans-serif">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _seeds(umbilics, region, rings=(0.2, 0.45), per_ring=8):
    x0, x1, y0, y1 = region
    half = 0.5 * min(x1 - x0, y1 - y0)
    if not umbilics:
        xs = np.linspace(x0, x1, 6)[1:-1]
        return [complex(x, y) for x in xs for y in xs]
    seeds = []
    for c in umbilics:
        for f in rings:
            for k in range(per_ring):
                seeds.append(c + f * half * np.exp(1j * (k + 0.5) * 2 * np.pi / per_ring))
    return seeds


def cmd_foliation(cfg: RunConfig) -> int:
    params = cfg.params()
    if cfg.family == "flat":
        chart = SurfaceChart(build_flat_metric(params), 0.0, label="flat")
        region = flat_scan_region(cfg)
        label_chart = "primary"
    else:
        atlas = build_sphere_metric(params)
        chart = SurfaceChart(atlas.antipodal, params.R0, label="antipodal")
        region = (-1.0, 1.0, -1.0, 1.0)
        label_chart = "antipodal"
    try:
        report = umbilic_scan(chart, region, min(cfg.grid, 101), label_chart)
        locs = [u.location for u in report.umbilics]
        seeds = _seeds(locs, region)
        step = 0.01 * (region[1] - region[0])
        major = trace_foliation(chart, seeds, step, 60, region=region, umbilics=locs, which="major")
        minor = trace_foliation(chart, seeds, step, 60, region=region, umbilics=locs, which="minor")
    except (WindingError, FloatingPointError) as exc:
        print(f"foliation tracing failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    marks = [(u.location, f"index {u.index}") for u in report.umbilics]
    title = f"principal foliations, {cfg.family} family ({label_chart} chart)"
    path = _out_path(cfg, "foliation")
    atomic_write(path, _svg(major, minor, marks, region, title))
    note = "totally umbilic region; " if report.totally_umbilic else ""
    print(f"{note}{len(major) + len(minor)} curves, {len(marks)} umbilic(s) -> {path}")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "index": cmd_index, "budget": cmd_budget, "foliation": cmd_foliation}


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    # every default is None so that only flags actually given override --config
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--family", choices=("flat", "sphere"))
    p.add_argument("--n", type=int, help="exponent of z in the flat deformation")
    p.add_argument("--m", type=int, help="exponent of z-bar in the flat deformation (>= 1)")
    p.add_argument("--lambda", dest="lam", type=float, help="deformation amplitude")
    p.add_argument("--r0-inner", dest="r0", type=float, help="flat family: inner radius of the cut-off")
    p.add_argument("--r1", type=float, help="flat family: outer radius of the cut-off")
    p.add_argument("--R0", "--r0", dest="R0", type=float, help="sphere family: radius of the surface")
    p.add_argument("--epsilon", type=float, help="L2 budget / collar width")
    p.add_argument("--grid", type=int, help="scan resolution per chart")
    p.add_argument("--samples", type=int, help="residual sample points")
    p.add_argument("--seed", type=int)
    p.add_argument("--tolerance", type=float, help="override the residual tolerance")
    p.add_argument("--out", help="output path (CSV or SVG)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="umbilic-lab", allow_abbrev=False,
                                     description="Umbilic points of deformed metrics: checks and plots.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "run the residual identity suite and write a CSV report",
        "index": "locate umbilics and compute their indices",
        "budget": "choose lambda from the L2 budget and integrate ||g - g0||^2",
        "foliation": "trace principal foliations and write an SVG",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text, allow_abbrev=False))
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        cfg = RunConfig.from_text(text)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg = cfg.merged(overrides)
    # budget picks lambda itself when none is given
    return cfg.validate(lam=0.0 if args.command == "budget" and cfg.lam is None else None)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, InvalidParameters) as exc:
        print(f"umbilic-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
