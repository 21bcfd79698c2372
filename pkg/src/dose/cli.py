"""``dose`` command line: run, analyze-divergence, analyze-cytoplasm, inspect, validate-isa.

Exit codes: 0 success, 1 bad input or configuration, 2 runtime abort or
conformance failure. Progress goes to stderr, data to stdout.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence, TextIO

from .analysis import ResultFormatError, cytoplasm_series, divergence_series, mean_cytoplasm
from .behaviors import UnknownPreset, load_preset
from .config import ConfigError, load_config_file
from .conformance import run_conformance
from .engine import DriverAbort, fixed_clock, instruction_set, run_simulation, utc_now
from .genetics import FossilFormatError, HookError, load_fossil
from .isa import ToggleParseError, build_instruction_set
from .world import ECO_FORMAT_VERSION, EcoFormatError, World

EXIT_OK, EXIT_INPUT, EXIT_ABORT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fail(message: str, code: int = EXIT_INPUT) -> int:
    print(f"dose: {message}", file=sys.stderr)
    return code


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as f:
            yield f


# ---------------------------------------------------------------------------
# run


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_config_file(args.config)
        if args.seed is not None:
            config = config.replace(rng_seed=args.seed)
        instruction_set(config)
        behaviors = load_preset(args.preset, config)
        clock = fixed_clock(args.fixed_clock) if args.fixed_clock else utc_now
    except ConfigError as exc:
        return _fail(f"config error: {exc}")
    except (UnknownPreset, ToggleParseError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(f"cannot read instruction toggles: {exc}")
    except ValueError as exc:
        return _fail(f"invalid value: {exc}")

    def progress(gen, name, report):
        print(f"{gen} {report}", file=sys.stderr, flush=True)

    trace = (lambda line: print(line, file=sys.stdout)) if args.trace else None
    try:
        art = run_simulation(config, behaviors, clock=clock, directory=args.outdir,
                             workers=args.workers, trace=trace, progress=progress)
    except (DriverAbort, HookError, OSError) as exc:
        return _fail(f"simulation aborted: {exc}", EXIT_ABORT)
    print(f"wrote {len(art.result_files)} result, {len(art.fossil_files)} fossil and "
          f"{len(art.eco_files)} ecosystem files to {args.outdir}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyses


def cmd_analyze_divergence(args: argparse.Namespace) -> int:
    try:
        series = divergence_series(args.result, args.baseline, args.interval, args.run)
    except (OSError, ResultFormatError, ValueError, IndexError) as exc:
        return _fail(str(exc))
    with _output(args.out) as out:
        out.write(f"# pairing: {series.pairing}\n")
        out.write(f"# baseline_generation: {series.baseline_generation}\n")
        out.write(f"# genome_length: {series.genome_length}\n")
        out.write("generation\tmean_distance\tnormalized_distance\n")
        for (gen, d), norm in zip(series.points, series.normalized()):
            out.write(f"{gen}\t{d!r}\t{norm!r}\n")
    return EXIT_OK


def cmd_analyze_cytoplasm(args: argparse.Namespace) -> int:
    try:
        rows = []
        for path in args.paths:
            if path.endswith(".gap"):
                doc = load_fossil(path)
                rows.append((path, doc["generation"], mean_cytoplasm(doc["organisms"])))
            else:
                rows.extend((path, gen, m) for gen, m in cytoplasm_series(path, args.run))
    except (OSError, FossilFormatError, ResultFormatError, ValueError, IndexError) as exc:
        return _fail(str(exc))
    with _output(args.out) as out:
        out.write("source\tgeneration\tmean_cytoplasm\n")
        for path, gen, m in rows:
            out.write(f"{path}\t{gen}\t{m!r}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# inspect


def _inspect_fossil(path: str, out: TextIO) -> None:
    doc = load_fossil(path)
    organisms = doc["organisms"]
    out.write(f"format: fossil\nformat_version: {doc['format_version']}\n")
    out.write(f"population: {doc['population_name']}\n")
    out.write(f"generation: {doc['generation']}\n")
    out.write(f"sample_size: {doc['sample_size']}\n")
    lengths = Counter(sum(len(c) for c in org.genome) for org in organisms)
    out.write("genome_length\tcount\n")
    for length in sorted(lengths):
        out.write(f"{length}\t{lengths[length]}\n")


def _inspect_eco(path: str, out: TextIO) -> None:
    world = World.eco_excavate(path)
    occupied = [(c, world.cell(c).organisms) for c in world.coords() if world.cell(c).organisms]
    out.write(f"format: ecosystem\nformat_version: {ECO_FORMAT_VERSION}\n")
    out.write("dims: {}x{}x{}\n".format(*world.dims))
    out.write(f"cells: {len(world)}\n")
    out.write(f"occupied_cells: {len(occupied)}\n")
    out.write(f"organisms: {sum(n for _, n in occupied)}\n")
    out.write("x\ty\tz\torganisms\n")
    for (x, y, z), n in occupied:
        out.write(f"{x}\t{y}\t{z}\t{n}\n")


def cmd_inspect(args: argparse.Namespace) -> int:
    path = args.path
    if path.endswith(".gap"):
        fn = _inspect_fossil
    elif path.endswith(".eco"):
        fn = _inspect_eco
    else:
        return _fail(f"{path}: unknown file type (expected .gap or .eco)")
    try:
        fn(path, sys.stdout)
    except (OSError, FossilFormatError, EcoFormatError) as exc:
        return _fail(str(exc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate-isa


def cmd_validate_isa(args: argparse.Namespace) -> int:
    try:
        toggles = Path(args.toggles).read_text(encoding="utf-8") if args.toggles else None
        table = build_instruction_set(args.version, toggles)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    failed = 0
    results = list(run_conformance(table))
    for r in results:
        if r.passed:
            print(f"PASS {r.codon} ({r.checks} checks)")
        else:
            failed += 1
            print(f"FAIL {r.codon}: {'; '.join(r.failures)}")
    print(f"{len(results)} opcodes checked, {failed} failed")
    return EXIT_ABORT if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dose", description="Digital organism simulator and analysis tools.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and details to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run", help="run a simulation from a config file")
    p.add_argument("config", help="key = value configuration file")
    p.add_argument("--preset", default="noop",
                   help="behaviour preset: noop, divergence, cytoplasm, a plugin name or module:attr")
    p.add_argument("--seed", type=int, help="override rng_seed from the config")
    p.add_argument("--trace", action="store_true", help="print every executed instruction to stdout")
    p.add_argument("--fixed-clock", metavar="ISO8601", help="use this timestamp for every clock reading")
    p.add_argument("--workers", type=int, default=1, help="processes for genome execution (default 1)")
    p.add_argument("--outdir", default=".", help="directory for result, fossil and ecosystem files")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze-divergence", help="Hamming distance to a baseline generation")
    p.add_argument("result", help="result file written by the divergence preset")
    p.add_argument("--baseline", type=int, default=10, help="baseline generation (default 10)")
    p.add_argument("--interval", type=int, default=10, help="generation interval (default 10)")
    p.add_argument("--run", type=int, default=-1, help="which appended run to analyse (default last)")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.set_defaults(func=cmd_analyze_divergence)

    p = sub.add_parser("analyze-cytoplasm", help="mean cytoplasm value per generation or snapshot")
    p.add_argument("paths", nargs="+", help="result files of the cytoplasm preset or .gap fossils")
    p.add_argument("--run", type=int, default=-1, help="which appended run to analyse (default last)")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.set_defaults(func=cmd_analyze_cytoplasm)

    p = sub.add_parser("inspect", help="summarise a .gap fossil or .eco ecosystem file")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("validate-isa", help="run the per-opcode conformance checks")
    p.add_argument("--version", default="1", help="instruction set version: 0, 0.1 or 1 (default 1)")
    p.add_argument("--toggles", help="NNN=Y/N toggle file (required for version 0)")
    p.set_defaults(func=cmd_validate_isa)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        return _fail("--workers must be at least 1")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
