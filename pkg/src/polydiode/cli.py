"""Command-line entry point.

Exit codes: 0 success, 1 domain error, 2 usage error. Every failure prints
a single ``error:`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .builder import BuildError, build_diode, build_gate, catalog_groups, catalog_listing, normalize_role
from .designfile import Config, DesignFile, DesignFileError, defaults_text, load_config, load_design
from .device import AmbiguousLogicLevel, DeviceError, format_iv, iv_curve
from .huckel import HuckelError
from .jacobi import ConvergenceFailure
from .molgraph import MolGraphError, ParseError, parse_molecule, pi_systems, render_molecule
from . import report as rp

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
DOMAIN_ERRORS = (DesignFileError, BuildError, DeviceError, HuckelError, MolGraphError, ParseError,
                 ConvergenceFailure)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, design: bool = True):
    if design:
        p.add_argument("design", nargs="?", help="design file")
        p.add_argument("--molecule", metavar="TEXT", help="analyse a molecule given in line notation instead")
    p.add_argument("--config", metavar="PATH", help="config file overriding built-in defaults")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--units", choices=("beta", "ev"), default="beta", help="energy units in reports")
    p.add_argument("--output", "-o", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--plot-dir", metavar="DIR", help="also render figures into this directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polydiode", description="Molecular diode and diode-logic design compiler.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {rp.__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("validate", "check chemistry of a design"), ("build", "dump the compiled graph"),
                       ("analyze", "orbitals, energy profile and diode model")):
        _common(sub.add_parser(name, help=text))
    p = sub.add_parser("simulate", help="gate truth table or diode I-V sweep")
    _common(p)
    p.add_argument("--bias-min", type=float, default=-6.0)
    p.add_argument("--bias-max", type=float, default=6.0)
    p.add_argument("--bias-steps", type=int, default=121)
    p = sub.add_parser("sweep", help="analyse every design in the catalog cross product")
    _common(p)
    p.add_argument("--fix", action="append", default=[], metavar="ROLE=NAME",
                   help="hold one role fixed (donor, acceptor or bridge); repeatable")
    p = sub.add_parser("catalog", help="list functional groups")
    _common(p, design=False)
    p.add_argument("--role", help="donor, acceptor or bridge")
    p.add_argument("--defaults", action="store_true", help="print every built-in default in config grammar")
    return parser


def _load_source(args) -> DesignFile | None:
    if args.molecule is not None:
        if args.design:
            raise UsageError("give either a design file or --molecule, not both")
        return None
    if not args.design:
        raise UsageError(f"{args.command} needs a design file or --molecule")
    return load_design(args.design)


def _emit(args, out, text: str):
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def _render(args, report: dict) -> str:
    return rp.render_json(report) if args.format == "json" else rp.render_text(report)


def _plot_dir(args) -> Path | None:
    return Path(args.plot_dir) if args.plot_dir else None


def _run_molecule(args, config: Config, out):
    from .builder import annotate_groups, resolver

    g = annotate_groups(parse_molecule(args.molecule, resolver(strict=False)))
    systems = pi_systems(g)
    if args.command == "analyze" and not systems:
        from .molgraph import NoPiSystem

        raise NoPiSystem("no sp2 atoms; the structure is saturated")
    if args.command == "simulate":
        raise UsageError("simulate needs a design file")
    _emit(args, out, _render(args, rp.molecule_report(args.command, g, systems, config, args.units)))
    return EXIT_OK


def _run_design(args, config: Config, source: DesignFile, out):
    plots = _plot_dir(args)
    if args.command in ("validate", "build"):
        analysis_design = build_gate(source.gate, config.model.fermi_ev) if source.gate else \
            build_diode(source.diode, fermi_levels=config.model.fermi_ev)
        rep = rp.header(args.command, config, args.units)
        rep["design"] = source.echo()
        rep["design"]["notation"] = render_molecule(analysis_design.graph)
        rep["validation"] = rp.validation_block(analysis_design.graph)
        if args.command == "build":
            rep["inventory"] = rp.inventory_block(analysis_design.graph)
            rep["graph"] = rp.graph_block(analysis_design.graph, analysis_design.sections)
        _emit(args, out, _render(args, rep))
        return EXIT_OK if rep["validation"]["valid"] else EXIT_DOMAIN
    analysis = rp.analyze(source, config)
    if plots:
        from .plotting import energy_diagram

        for part in analysis.diodes:
            energy_diagram(part.profile, plots / f"energy_{part.label}.png")
    if args.command == "analyze":
        _emit(args, out, _render(args, rp.design_report("analyze", analysis, config, args.units)))
        return EXIT_OK
    # simulate
    if source.gate is not None:
        failure = None
        try:
            table = rp.simulate_gate(analysis, config)
        except AmbiguousLogicLevel as exc:
            table, failure = exc.table, exc
        if plots:
            from .plotting import truth_table_plot

            truth_table_plot(table, plots / "truth_table.png")
        _emit(args, out, _render(args, rp.design_report("simulate", analysis, config, args.units, table=table)))
        if failure is not None:
            raise failure
        return EXIT_OK
    if args.bias_steps < 1:
        raise UsageError("--bias-steps must be at least 1")
    model = analysis.diodes[0].model
    points = iv_curve(model, rp.bias_grid(args.bias_min, args.bias_max, args.bias_steps))
    if plots:
        from .plotting import iv_plot

        iv_plot(model, points, plots / "iv_curve.png")
    if args.format == "json":
        _emit(args, out, rp.render_json(rp.design_report("simulate", analysis, config, args.units, iv=points)))
    else:
        _emit(args, out, format_iv(points))
    return EXIT_OK


def _parse_fix(items) -> dict:
    fixed = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--fix expects ROLE=NAME, got {item!r}")
        role, name = (s.strip() for s in item.split("=", 1))
        try:
            role = normalize_role(role)
        except BuildError:
            raise UsageError(f"--fix role must be donor, acceptor or bridge, got {role!r}") from None
        if role in fixed:
            raise UsageError(f"--fix given twice for {role}")
        fixed[role] = name
    return fixed


def _run_sweep(args, config: Config, out):
    fixed = _parse_fix(args.fix)
    if args.molecule is not None:
        raise UsageError("sweep takes a design file, not --molecule")
    base = load_design(args.design).diodes[0] if args.design else None
    rd, ra, contact = (base.rings_donor, base.rings_acceptor, base.contact_metal) if base else (1, 1, "Au")
    rows = rp.sweep(fixed, rd, ra, contact, config)
    if args.plot_dir:
        from .plotting import sweep_plot

        sweep_plot(rows, Path(args.plot_dir) / "sweep.png")
    _emit(args, out, _render(args, rp.sweep_report(rows, fixed, config, args.units)))
    return EXIT_OK


def _run_catalog(args, out):
    if args.defaults:
        _emit(args, out, defaults_text())
        return EXIT_OK
    listing = catalog_listing()
    if args.role:
        try:
            keep = {g.name for g in catalog_groups(args.role)}
        except BuildError as exc:
            raise UsageError(str(exc)) from None
        listing = [g for g in listing if g["name"] in keep]
    if args.format == "json":
        _emit(args, out, json.dumps(listing, indent=2, sort_keys=True) + "\n")
    else:
        lines = [f"{'name':<8} {'role':<10} {'notation':<10} {'pi':>3}  aliases"]
        for g in listing:
            pi = "-" if g["pi_electrons"] is None else str(g["pi_electrons"])
            lines.append(f"{g['name']:<8} {g['role']:<10} {g['notation']:<10} {pi:>3}  {' '.join(g['aliases'])}")
        _emit(args, out, "\n".join(lines) + "\n")
    return EXIT_OK


def run(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command == "catalog":
            return _run_catalog(args, out)
        config = load_config(args.config) if args.config else Config()
        if args.command == "sweep":
            return _run_sweep(args, config, out)
        source = _load_source(args)
        if source is None:
            return _run_molecule(args, config, out)
        return _run_design(args, config, source, out)
    except UsageError as exc:
        err.write(f"error: {_one_line(exc)}\n")
        return EXIT_USAGE
    except DOMAIN_ERRORS as exc:
        err.write(f"error: {_one_line(exc)}\n")
        return EXIT_DOMAIN
    except OSError as exc:
        err.write(f"error: {_one_line(exc)}\n")
        return EXIT_DOMAIN


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
