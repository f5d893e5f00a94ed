"""
Command-line interface.

Exit status is 0 when a run accepts, 1 when it rejects and 2 on any error. Reports go
to stdout (or ``--output``) as CSV; human-readable notes go to stderr.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .automata import Nfa, check_symbols, homogenize, merge_equivalent, trim
from .cimap_utils import about
from .config import load_profile, load_sweep
from .crossbar import Backend, DeviceParams, column_cost
from .engine import (DEFAULT_MAX_STATES, ApProgram, compile, program_from_text,
                     program_to_text, read_image, run, write_image)
from .perfmodel import ArchParams, ap_run_cost, sweep
from .regex import parse_regex
from .run_report import RunReport
from .scouting import truth_table

from typing import Dict, Optional, Sequence

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_ERROR = 2

BACKENDS = ('rram', 'sram', 'functional')
BENCH_MODES = ('gates', 'costs', 'sweep')


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _alphabet_map(alphabet: Optional[str]) -> Optional[Dict[str, int]]:
    if alphabet is None:
        return None
    if len(set(alphabet)) != len(alphabet):
        raise ValueError(f"--alphabet has repeated characters: {alphabet!r}")
    return {ch: i for i, ch in enumerate(alphabet)}


def _alphabet_bits(alphabet: Optional[str], symbol_bits: Optional[int], default: int) -> int:
    if symbol_bits is not None:
        return symbol_bits
    if alphabet is not None:
        return max(1, (len(alphabet) - 1).bit_length())
    return default


def _emit(frame: pd.DataFrame, output: Optional[str]) -> None:
    if output is None:
        frame.to_csv(sys.stdout, index=False)
    else:
        frame.to_csv(output, index=False)


def build_program(source: str, force_regex: bool = False, symbol_bits: Optional[int] = None,
                  alphabet: Optional[str] = None, no_trim: bool = False,
                  all_input_start: bool = False,
                  max_states: int = DEFAULT_MAX_STATES) -> ApProgram:
    """
    Turn a regex, an automaton file or a text image into a program.

    Automata go through homogenize, trim and merge of equivalent states before mapping;
    `no_trim` skips the last two steps. Text images (from ``cimap dump``) are loaded as is.
    """
    path = Path(source)
    if not force_regex and path.is_file():
        text = path.read_text()
        first = next((ln.split()[0] for ln in text.splitlines()
                      if ln.strip() and not ln.lstrip().startswith('#')), '')
        if first == 'ap':
            return program_from_text(text)
        nfa = Nfa.from_text(text)
    else:
        w = _alphabet_bits(alphabet, symbol_bits, 8)
        nfa = parse_regex(source, w, _alphabet_map(alphabet))
    h = homogenize(nfa)
    if not no_trim:
        h = merge_equivalent(trim(h))
    return compile(h, symbol_bits, max_states, all_input_start)


def read_input(path: str, symbol_bits: int, symbols: bool = False,
               alphabet: Optional[str] = None) -> np.ndarray:
    """
    Read an input stream.

    With `alphabet`, each character of the (stripped) file maps to its index in the
    alphabet. With `symbols`, or when `W > 8`, the file is a whitespace-separated list
    of decimal symbols. Otherwise each byte is one symbol.
    """
    if alphabet is not None:
        mapping = _alphabet_map(alphabet)
        text = Path(path).read_text().strip()
        try:
            return np.array([mapping[ch] for ch in text], dtype=np.int64)  # type: ignore[index]
        except KeyError as err:
            raise ValueError(f"input character {err} is not in the alphabet") from None
    if symbols or symbol_bits > 8:
        tokens = Path(path).read_text().split()
        try:
            values = [int(t) for t in tokens]
        except ValueError as err:
            raise ValueError(f"symbol list must be decimal integers: {err}") from None
        return check_symbols(values, symbol_bits)
    return np.frombuffer(Path(path).read_bytes(), dtype=np.uint8).astype(np.int64)


def cmd_compile(args: argparse.Namespace) -> int:
    program = build_program(args.source, args.regex, args.symbol_bits, args.alphabet,
                            args.no_trim, args.all_input_start, args.max_states)
    write_image(program, args.output)
    print(f"N={program.num_states} W={program.symbol_bits} "
          f"density={program.routing_density():.6g}")
    _note(f"wrote {args.output}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    program = read_image(args.image)
    profile = load_profile(args.config)
    stream = read_input(args.input, program.symbol_bits, args.symbols, args.alphabet)
    result = run(program, stream, trace=args.trace, kernel=args.kernel)

    report = RunReport(accepted=result.accepted, accepted_ever=result.accepted_ever,
                       steps=len(stream), num_states=program.num_states,
                       backend=args.backend, latency=None, energy=None,
                       trace=result.active_trace, cimap_version=__version__)
    if args.backend != 'functional':
        cost = ap_run_cost(result, column_cost(args.backend, profile), program.num_states)
        report.latency = cost.latency
        report.energy = cost.energy

    _note(report.summary())
    _emit(report.to_frame(), args.output)
    if args.trace:
        trace = report.trace_frame()
        if args.output is None:
            # stdout carries only the report
            trace.to_csv(sys.stderr)
        else:
            out = Path(args.output)
            trace.to_csv(out.with_name(out.stem + '_trace' + out.suffix))
    return EXIT_ACCEPT if report.accepted else EXIT_REJECT


def cost_table(profile=None) -> pd.DataFrame:
    """Per-evaluation cost of each backend with the reductions RRAM achieves over SRAM."""
    rram, sram = column_cost(Backend.RRAM, profile), column_cost(Backend.SRAM, profile)
    rows = []
    for c in (rram, sram):
        rows.append({'backend': c.backend.value,
                     'discharge_time': c.discharge_time,
                     'energy_per_eval': c.energy_per_eval,
                     'delay_reduction': 1 - c.discharge_time/sram.discharge_time,
                     'energy_reduction': 1 - c.energy_per_eval/sram.energy_per_eval})
    return pd.DataFrame(rows)


def cmd_bench(args: argparse.Namespace) -> int:
    profile = load_profile(args.config)
    if args.mode == 'gates':
        frame = truth_table(DeviceParams.from_profile(profile), profile['read_voltage'])
    elif args.mode == 'costs':
        frame = cost_table(profile)
    else:
        frame = sweep(ArchParams.from_profile(profile), load_sweep(args.sweep))
    _emit(frame, args.output)
    return 0


def cmd_dump(args: argparse.Namespace) -> int:
    text = program_to_text(read_image(args.image))
    if args.output is None:
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return 0


def cmd_about(args: argparse.Namespace) -> int:
    about()
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='cimap',
        description="Computation-in-memory automata processing: compile patterns, "
                    "run input streams with hardware cost accounting, and benchmark "
                    "scouting gates, backend costs and accelerator efficiency.")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('compile', help="compile a regex or automaton file to a program image")
    p.add_argument('source', help="regex, automaton file (.nfa text) or text image from dump")
    p.add_argument('-o', '--output', required=True, help="program image to write")
    p.add_argument('-w', '--symbol-bits', type=int, default=None,
                   help="symbol width W (regex default 8)")
    p.add_argument('--regex', action='store_true',
                   help="treat SOURCE as a regex even if a file of that name exists")
    p.add_argument('--alphabet', default=None,
                   help="characters mapped to symbols 0, 1, ... instead of code points")
    p.add_argument('--no-trim', action='store_true',
                   help="skip trimming and merging of equivalent states")
    p.add_argument('--all-input-start', action='store_true',
                   help="re-activate the start states before every symbol")
    p.add_argument('--max-states', type=int, default=DEFAULT_MAX_STATES)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser('run', help="run an input stream through a program image")
    p.add_argument('image')
    p.add_argument('input', help="raw bytes (W <= 8) or a decimal symbol list")
    p.add_argument('--backend', choices=BACKENDS, default='rram')
    p.add_argument('--trace', action='store_true',
                   help="also emit active states per step, to stderr without -o")
    p.add_argument('--config', default=None, help="profile file")
    p.add_argument('-o', '--output', default=None, help="CSV report file")
    p.add_argument('--symbols', action='store_true', help="input is a decimal symbol list")
    p.add_argument('--alphabet', default=None, help="input characters map to their index")
    p.add_argument('--kernel', choices=('numpy', 'numba', 'auto'), default='numpy')
    p.set_defaults(func=cmd_run)

    p = sub.add_parser('bench', help="scouting gates, backend costs or efficiency sweep")
    p.add_argument('mode', choices=BENCH_MODES)
    p.add_argument('--config', default=None, help="profile file")
    p.add_argument('--sweep', default=None, help="sweep specification file")
    p.add_argument('-o', '--output', default=None, help="CSV file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('dump', help="print V, R, c and the initial vector of an image")
    p.add_argument('image')
    p.add_argument('-o', '--output', default=None)
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser('about', help="print version and environment information")
    p.set_defaults(func=cmd_about)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(None if argv is None else list(argv))
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, ImportError, MemoryError) as err:
        _note(f"error: {err}")
        return EXIT_ERROR

