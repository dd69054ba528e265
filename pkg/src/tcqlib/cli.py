"""Command-line front end: ``python -m tcqlib <command>``.

Commands ``table1``, ``table2`` and ``fig2`` run the experiment presets and
write ``<command>.csv``, ``<command>.json`` and ``<command>.manifest.json``
into ``--out``.  ``encode`` and ``decode`` quantize a single sequence.

Exit codes: 0 success, 1 usage error, 2 experiment failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .codebook import LatticeCodebook, load_alphabet, save_alphabet
from .convcode import CODE_TABLE, CodeTableError, build_trellis, normalize_family, parse_code
from .labeling import get_labeling
from .sim import (
    ExperimentConfig,
    run_gain_vs_length,
    run_granular_gain_table,
    run_sqnr_experiment,
)
from .tcq import decode, encode

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2
QUICK_NV = 500

COLUMNS = {
    "table1": ["states", "family", "code", "metric", "ci", "partition", "labeling", "length", "n_v", "p_tilde", "delta_p"],
    "fig2": ["states", "family", "code", "length", "metric", "ci", "partition", "labeling", "n_v", "p_tilde", "delta_p"],
    "table2": ["states", "family", "code", "metric", "ci", "source", "rate", "labeling", "length", "n_v", "mse", "train_mse", "iterations", "alphabet_file"],
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _families(text: str) -> list[str]:
    try:
        return [normalize_family(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment.  Keys use flag names."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _common(p: argparse.ArgumentParser, experiment: bool = True) -> None:
    p.add_argument("--config", help="key = value file supplying defaults for any flag")
    if not experiment:
        return
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nv", type=int, default=None, help="number of sequences (default 5000)")
    p.add_argument("--length", type=int, default=1000, help="samples per sequence (L*N)")
    p.add_argument("--quick", action="store_true", help=f"use {QUICK_NV} sequences unless --nv is given")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--initial-state", choices=("any", "zero"), default="any")
    p.add_argument("--out", default="results", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tcqlib", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("table1", help="granular gain of the tabulated codes")
    _common(p)
    p.add_argument("--partition", choices=("z4", "z2z2"), default="z4")
    p.add_argument("--family", type=_families, default=None, help="ungerboeck, distance-optimal or both (comma-separated)")
    p.add_argument("--states", type=_int_list, default=None)
    p.add_argument("--R", type=int, default=8, help="hypercube scale exponent")

    p = sub.add_parser("table2", help="SQNR with optimized finite alphabets")
    _common(p)
    p.add_argument("--rate", type=_int_list, default=[1, 2, 3])
    p.add_argument("--states", type=_int_list, default=[16, 64, 256])
    p.add_argument("--source", choices=("uniform", "gaussian"), action="append", default=None)
    p.add_argument("--family", type=_families, default=None)
    p.add_argument("--allow-extra", action="store_true", help="permit rates outside 1..3")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("fig2", help="granular gain against sequence length")
    _common(p)
    p.add_argument("--partition", choices=("z4", "z2z2"), default="z2z2")
    p.add_argument("--lengths", type=_int_list, default=[100, 200, 400, 600, 800, 1000])
    p.add_argument("--states", type=_int_list, default=[16, 32, 64, 256])
    p.add_argument("--family", type=_families, default=None)
    p.add_argument("--R", type=int, default=8)

    for name in ("encode", "decode"):
        p = sub.add_parser(name, help=f"{name} a single sequence")
        _common(p, experiment=False)
        p.add_argument("input", help="input file, or - for stdin")
        p.add_argument("--code", required=True, help='octal generator pair, e.g. "5 7"')
        p.add_argument("--labeling", default="gray-z4")
        p.add_argument("--alphabet", help="finite alphabet file (default: unbounded lattice)")
        if name == "encode":
            p.add_argument("--initial-state", choices=("any", "zero"), default="zero")
    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, raw in values.items():
            if key not in known or key in ("config", "help"):
                raise UsageError(f"{args.config}: unknown key {key!r}")
            action = known[key]
            if isinstance(action, (argparse._StoreTrueAction,)):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                try:
                    val = action.type(raw)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"{args.config}: bad value for {key}: {exc}") from None
                defaults[key] = [val] if isinstance(action, argparse._AppendAction) else val
            else:
                defaults[key] = [raw] if isinstance(action, argparse._AppendAction) else raw
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    args.argv = list(sys.argv[1:] if argv is None else argv)
    return args


def _base_config(args) -> ExperimentConfig:
    n_v = args.nv if args.nv is not None else (QUICK_NV if args.quick else 5000)
    kw = dict(n_v=n_v, length=args.length, seed=args.seed, initial_state=args.initial_state)
    if hasattr(args, "R"):
        kw["R"] = args.R
    if hasattr(args, "partition"):
        kw["partition"] = args.partition
    try:
        return ExperimentConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def write_csv(rows, columns, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in columns])
    Path(path).write_text(buf.getvalue())


def _config_echo(args, base) -> dict:
    config = base.as_dict()
    for k in ("family", "n_states", "labeling"):
        config.pop(k, None)
    for k in ("family", "states", "rate", "lengths", "source", "tol", "max_iter"):
        if hasattr(args, k):
            config[k] = getattr(args, k)
    return config


def _emit(command, args, base, rows, extra_files=()) -> list[str]:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{command}.csv"
    json_path = out / f"{command}.json"
    write_csv(rows, COLUMNS[command], csv_path)
    config = _config_echo(args, base)
    json_rows = [{k: r[k] for k in COLUMNS[command] if k in r} for r in rows]
    payload = {"command": command, "seed": base.seed, "config": config, "rows": json_rows}
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return [str(csv_path), str(json_path), *map(str, extra_files)]


def _manifest(command, args, base, paths, started) -> Path:
    path = Path(args.out) / f"{command}.manifest.json"
    manifest = {
        "command": command,
        "argv": args.argv,
        "config": _config_echo(args, base),
        "version": version_string(),
        "wall_time_s": time.time() - started,
        "outputs": paths,
        "seed": base.seed,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _families_or_default(args):
    return args.family or ["ungerboeck", "distance_optimal"]


def _print_gain_table(rows, partition) -> None:
    by = {(r["states"], r["family"]): r for r in rows}
    states = sorted({r["states"] for r in rows})
    print(f"granular gain (dB), partition {partition}")
    print(f"{'states':>6} | {'ungerboeck':>12} {'gain':>16} | {'distance-optimal':>16} {'gain':>16}")
    for n in states:
        cells = []
        for fam, width in (("ungerboeck", 12), ("distance_optimal", 16)):
            r = by.get((n, fam))
            if r is None:
                cells.append(f"{'--':>{width}} {'--':>16}")
            else:
                cells.append(f"{'[' + r['code'] + ']':>{width}} {r['metric']:>8.3f} ± {r['ci']:.4f}")
        print(f"{n:>6} | {cells[0]} | {cells[1]}")


def cmd_table1(args) -> int:
    started = time.time()
    base = _base_config(args)
    explicit = args.family is not None
    families = _families_or_default(args)
    states = args.states or sorted({n for f in families for n in CODE_TABLE[f]})
    rows = run_granular_gain_table(
        families, states, args.partition, base, skip_missing=not explicit, workers=args.workers
    )
    if not rows:
        raise CodeTableError(f"no tabulated code for states {states}")
    _print_gain_table(rows, args.partition)
    paths = _emit("table1", args, base, rows)
    _manifest("table1", args, base, paths, started)
    return EXIT_OK


def cmd_table2(args) -> int:
    started = time.time()
    base = _base_config(args)
    bad = [r for r in args.rate if r < 1 or (r > 3 and not args.allow_extra)]
    if bad:
        raise UsageError(f"rate {bad[0]} outside the preset rates 1..3 (use --allow-extra)")
    families = _families_or_default(args)
    sources = args.source or ["uniform", "gaussian"]
    for f in families:
        for n in args.states:
            if n not in CODE_TABLE[f]:
                raise CodeTableError(f"no {f} code with {n} states: absent in the published table")
    out = Path(args.out)
    (out / "alphabets").mkdir(parents=True, exist_ok=True)
    rows, files = [], []
    for src in sources:
        for rate in args.rate:
            for n in args.states:
                for f in families:
                    r = run_sqnr_experiment(
                        rate, n, f, src, base, tol=args.tol, max_iter=args.max_iter, workers=args.workers
                    )
                    path = out / "alphabets" / f"{src}_R{rate}_{n}_{f}.txt"
                    save_alphabet(r.pop("alphabet"), path)
                    r["alphabet_file"] = str(path.relative_to(out))
                    files.append(path)
                    rows.append(r)
                    print(f"{src:>8} R={rate} {n:>4} states {f:>16} [{r['code']}]: "
                          f"SQNR {r['metric']:.3f} ± {r['ci']:.4f} dB")
    paths = _emit("table2", args, base, rows, files)
    _manifest("table2", args, base, paths, started)
    return EXIT_OK


def cmd_fig2(args) -> int:
    started = time.time()
    base = _base_config(args)
    rows = run_gain_vs_length(
        _families_or_default(args), args.states, args.partition, args.lengths, base, workers=args.workers
    )
    for r in rows:
        print(f"{r['states']:>4} {r['family']:>16} LN={r['length']:>5}: {r['metric']:.4f} ± {r['ci']:.4f} dB")
    paths = _emit("fig2", args, base, rows)
    _manifest("fig2", args, base, paths, started)
    return EXIT_OK


def _read_text(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def parse_reals(text: str, source: str = "<input>") -> np.ndarray:
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        col = 0
        for tok in line.split():
            col = line.index(tok, col)
            try:
                values.append(float(tok))
            except ValueError:
                raise UsageError(f"{source}:{lineno}:{col + 1}: not a real number: {tok!r}") from None
            col += len(tok)
    return np.array(values)


def _single_quantizer(args):
    try:
        code = parse_code(args.code)
        lab = get_labeling(args.labeling)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.alphabet:
        cb = load_alphabet(args.alphabet)
        if lab.partition.dim != 1:
            raise UsageError("finite alphabets need a one-dimensional labeling")
    else:
        cb = LatticeCodebook(lab.partition)
    return build_trellis(code), lab, cb


def _fmt_selectors(sel: np.ndarray) -> str:
    return " ".join(",".join(str(int(v)) for v in row) for row in sel)


def cmd_encode(args) -> int:
    tr, lab, cb = _single_quantizer(args)
    x = parse_reals(_read_text(args.input), args.input)
    if x.size == 0 or x.size % cb.dim:
        raise UsageError(f"input has {x.size} values; need a positive multiple of {cb.dim}")
    res = encode(x, tr, lab, cb, start_state=-1 if args.initial_state == "any" else 0)
    print(f"initial_state: {res.initial_state}")
    print("bits: " + " ".join(str(int(b)) for b in res.path_bits))
    print("selectors: " + _fmt_selectors(res.point_selectors))
    print("reconstruction: " + " ".join(repr(float(v)) for v in res.reconstruction))
    print(f"total_sq_error: {res.total_sq_error!r}")
    return EXIT_OK


def cmd_decode(args) -> int:
    tr, lab, cb = _single_quantizer(args)
    fields = {}
    for lineno, line in enumerate(_read_text(args.input).splitlines(), 1):
        if ":" in line:
            key, _, value = line.partition(":")
            fields[key.strip()] = (lineno, value.split())
    if "bits" not in fields or "selectors" not in fields:
        raise UsageError(f"{args.input}: need 'bits:' and 'selectors:' lines")
    try:
        bits = [int(b) for b in fields["bits"][1]]
        sel = [[int(v) for v in tok.split(",")] for tok in fields["selectors"][1]]
        start = int(fields["initial_state"][1][0]) if "initial_state" in fields else 0
    except ValueError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    if len(sel) != len(bits) or any(b not in (0, 1) for b in bits):
        raise UsageError(f"{args.input}: bits and selectors disagree in length or content")
    try:
        out = decode(bits, sel, tr, lab, cb, initial_state=start)
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from None
    print("reconstruction: " + " ".join(repr(float(v)) for v in out))
    return EXIT_OK


COMMANDS = {
    "table1": cmd_table1,
    "table2": cmd_table2,
    "fig2": cmd_fig2,
    "encode": cmd_encode,
    "decode": cmd_decode,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, CodeTableError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"tcqlib: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tcqlib: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"tcqlib: experiment failed: {exc!r}", file=sys.stderr)
        return EXIT_FAILURE
