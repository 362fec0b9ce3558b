"""Command-line front end: ``polarbp <subcommand> ...``.

Exit status is 0 on success, 1 on a usage error and 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Iterable, TextIO

import numpy as np

from .code import DEFAULT_ERASURE, PolarCode, construct_frozen_set, embed, encode, mask_to_str, parse_mask
from .constituent import CENSUS_KINDS, classify
from .decoder import PRESETS, DecodeOptions, Schedule, Variant, count_units_per_iteration, get_decoder
from .graph import DEFAULT_ALPHA
from .sim import run_campaign

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_code_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("code")
    g.add_argument("--n", type=int, help="code length (power of two)")
    g.add_argument("--k", type=int, help="information bits")
    g.add_argument("--erasure", type=float, default=DEFAULT_ERASURE, help="BEC design erasure (default 0.3)")
    g.add_argument("--mask", help="frozen mask line ('1' = frozen); overrides --n/--k")
    g.add_argument("--mask-file", help="file holding a frozen mask line")


def _add_decoder_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("decoder")
    g.add_argument("--max-iters", type=int, default=60)
    g.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="SMS scale factor")
    g.add_argument("--no-early-termination", action="store_true")
    g.add_argument("--count-scaling", action="store_true", help="charge SMS scaling multiplies as units")


def _add_io_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", help="input file (default stdin)")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polarbp", description="Polar-code BP decoding toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="print the frozen mask of a BEC-designed code")
    _add_code_args(p)
    p.add_argument("--out")

    p = sub.add_parser("encode", help="encode message lines read from stdin")
    _add_code_args(p)
    _add_io_args(p)

    p = sub.add_parser("classify", help="constituent-code census as CSV")
    _add_code_args(p)
    p.add_argument("--min-size", type=int, default=1, help="smallest constituent size reported")
    p.add_argument("--out")

    p = sub.add_parser("count-ops", help="operation units per iteration for each variant")
    _add_code_args(p)
    p.add_argument("--kernel", choices=("ms", "sms"), default="ms")
    p.add_argument("--count-scaling", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("decode", help="decode LLR frames, one per line")
    _add_code_args(p)
    _add_decoder_args(p)
    _add_io_args(p)
    p.add_argument("--variant", choices=sorted(PRESETS), help="decoder preset")
    p.add_argument("--schedule", choices=[s.value for s in Schedule])
    p.add_argument("--pruning", action="store_true", help="express-journey pruning (needs roundtrip)")
    p.add_argument("--kernel", choices=("ms", "sms"))

    p = sub.add_parser("simulate", help="Monte Carlo FER/BER campaign")
    _add_code_args(p)
    _add_decoder_args(p)
    p.add_argument("--variants", default="conventional,roundtrip,xjbp", help="comma-separated presets")
    p.add_argument("--ebno", nargs="+", help="Eb/N0 points in dB (space or comma separated)")
    p.add_argument("--frames", type=int, default=10_000, help="maximum frames per point")
    p.add_argument("--min-errors", type=int, default=100, help="stop after this many frame errors (0 = off)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", help="rerun from the config block of a JSON report")
    p.add_argument("--out")
    return parser


def _code_from_args(args, stdin: TextIO | None = None) -> PolarCode:
    if args.mask_file:
        try:
            with open(args.mask_file) as fh:
                text = fh.read()
        except OSError as exc:
            raise DataError(f"cannot read mask file: {exc}") from exc
        return _parse_mask(text, args.erasure)
    if args.mask:
        return _parse_mask(args.mask, args.erasure)
    if args.n is None and args.k is None and stdin is not None:
        return _parse_mask(stdin.readline(), args.erasure)
    if args.n is None or args.k is None:
        raise UsageError("give --n and --k, or a mask")
    try:
        return construct_frozen_set(args.n, args.k, args.erasure)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_mask(text: str, erasure: float) -> PolarCode:
    try:
        return parse_mask(text, erasure)
    except ValueError as exc:
        raise DataError(f"line 1: bad mask: {exc}") from exc


def _open_in(path: str | None, stdin: TextIO) -> TextIO:
    if path is None:
        return stdin
    try:
        return open(path)
    except OSError as exc:
        raise DataError(f"cannot open input: {exc}") from exc


def _emit(text: str, path: str | None, stdout: TextIO) -> None:
    if path is None:
        stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _data_lines(fh: TextIO) -> Iterable[tuple[int, str]]:
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _parse_bits(line: str, lineno: int) -> np.ndarray:
    chars = line.replace(",", " ").split()
    if len(chars) == 1:
        chars = list(chars[0])
    if any(c not in ("0", "1") for c in chars):
        raise DataError(f"line {lineno}: expected 0/1 bits")
    return np.array([int(c) for c in chars], dtype=np.uint8)


def _cmd_construct(args, stdin, stdout) -> None:
    code = _code_from_args(args)
    _emit(mask_to_str(code) + "\n", args.out, stdout)


def _cmd_encode(args, stdin, stdout) -> None:
    code = _code_from_args(args)
    out = []
    for lineno, line in _data_lines(_open_in(args.input, stdin)):
        bits = _parse_bits(line, lineno)
        if bits.size == code.k:
            u = embed(code, bits)
        elif bits.size == code.n:
            u = bits
        else:
            raise DataError(f"line {lineno}: expected {code.k} or {code.n} bits, got {bits.size}")
        try:
            x = encode(code, u)
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
        out.append("".join(map(str, x)))
    _emit("".join(s + "\n" for s in out), args.out, stdout)


def census_csv(code: PolarCode, min_size: int = 1) -> str:
    census = classify(code).census(min_size)
    lines = ["kind,size,count"]
    for kind in CENSUS_KINDS:
        for size in sorted(s for (k, s) in census if k is kind):
            lines.append(f"{kind.value},{size},{census[(kind, size)]}")
    return "\n".join(lines) + "\n"


def _cmd_classify(args, stdin, stdout) -> None:
    code = _code_from_args(args, stdin)
    _emit(census_csv(code, args.min_size), args.out, stdout)


def _cmd_count_ops(args, stdin, stdout) -> None:
    code = _code_from_args(args, stdin)
    base = count_units_per_iteration(code, Variant.CONVENTIONAL, args.kernel, args.count_scaling)
    lines = ["variant,units_per_iteration,ratio_pct"]
    for v in Variant:
        units = count_units_per_iteration(code, v, args.kernel, args.count_scaling)
        lines.append(f"{v.value},{units},{100.0 * units / base:.1f}")
    _emit("\n".join(lines) + "\n", args.out, stdout)


def _decode_options(args) -> DecodeOptions:
    base = PRESETS[args.variant] if args.variant else DecodeOptions()
    fields = dict(
        max_iters=args.max_iters,
        alpha=args.alpha,
        early_termination=not args.no_early_termination,
        count_scaling=args.count_scaling,
        kernel=args.kernel or base.kernel,
        schedule=Schedule(args.schedule) if args.schedule else base.schedule,
        pruning=args.pruning or base.pruning,
    )
    try:
        return DecodeOptions(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_decode(args, stdin, stdout) -> None:
    code = _code_from_args(args)
    decoder = get_decoder(code, _decode_options(args))
    lines = ["frame_index,converged,iterations,op_units,codeword_hex"]
    frame = 0
    for lineno, line in _data_lines(_open_in(args.input, stdin)):
        try:
            llr = np.array([float(t) for t in line.replace(",", " ").split()])
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
        if llr.size != code.n:
            raise DataError(f"line {lineno}: expected {code.n} LLRs, got {llr.size}")
        if not np.isfinite(llr).all():
            raise DataError(f"line {lineno}: non-finite LLR")
        res = decoder.decode(llr)
        lines.append(
            f"{frame},{int(res.converged)},{res.iterations},{res.op_units},{pack_hex(res.codeword)}"
        )
        frame += 1
    _emit("\n".join(lines) + "\n", args.out, stdout)


def pack_hex(bits: np.ndarray) -> str:
    """Hex string of the bits packed MSB first, zero-padded to whole bytes."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes().hex()


def _parse_floats(values: list[str]) -> list[float]:
    out = []
    for v in values:
        for tok in v.replace(",", " ").split():
            try:
                out.append(float(tok))
            except ValueError as exc:
                raise UsageError(f"bad Eb/N0 value {tok!r}") from exc
    return out


def _cmd_simulate(args, stdin, stdout) -> None:
    if args.config:
        code, variants, ebnos, max_frames, min_errors, seed = _load_config(args.config)
    else:
        if not args.ebno:
            raise UsageError("--ebno is required")
        code = _code_from_args(args)
        ebnos = _parse_floats(args.ebno)
        names = [v.strip() for v in args.variants.split(",") if v.strip()]
        unknown = [v for v in names if v not in PRESETS]
        if unknown or not names:
            raise UsageError(f"unknown variants {unknown}; choose from {sorted(PRESETS)}")
        variants = []
        for name in names:
            base = PRESETS[name]
            try:
                opts = DecodeOptions(
                    max_iters=args.max_iters,
                    kernel=base.kernel,
                    alpha=args.alpha,
                    schedule=base.schedule,
                    pruning=base.pruning,
                    early_termination=not args.no_early_termination,
                    count_scaling=args.count_scaling,
                )
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            variants.append((name, opts))
        max_frames, seed = args.frames, args.seed
        min_errors = args.min_errors or None
    if max_frames < 1:
        raise UsageError("--frames must be >= 1")
    report = run_campaign(code, variants, ebnos, max_frames, min_errors, seed, max(1, args.threads))
    report.config["threads"] = args.threads
    text = report.to_json() if args.format == "json" else report.to_csv()
    _emit(text, args.out, stdout)


def _load_config(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
        cfg = doc.get("config", doc)
        code = parse_mask(cfg["mask"], cfg.get("design_erasure", DEFAULT_ERASURE))
        variants = []
        for name, d in cfg["variants"].items():
            variants.append((name, DecodeOptions(**d)))
        return code, variants, cfg["ebno_db"], cfg["max_frames"], cfg["min_frame_errors"], cfg["seed"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DataError(f"bad config {path}: {exc}") from exc


_COMMANDS = {
    "construct": _cmd_construct,
    "encode": _cmd_encode,
    "classify": _cmd_classify,
    "count-ops": _cmd_count_ops,
    "decode": _cmd_decode,
    "simulate": _cmd_simulate,
}


def main(argv: list[str] | None = None, stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        _COMMANDS[args.command](args, stdin, stdout)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"polarbp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"polarbp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
