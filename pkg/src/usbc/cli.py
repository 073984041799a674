"""Command-line interface: ``usbc {simulate,sweep-k,theory,codebook,waveform}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical-accuracy error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace

import numpy as np

from . import harness
from .channel import ChannelRealization, FadingModel
from .codebook import build_codebook, generate_reader_code
from .errors import CodebookSizeError, ConfigError, QuadratureError
from .tagphy import FrameGrid, make_monocycle, switch_response, switch_state, synthesize_received
from .theory import ber_conditional, ber_faded, db_to_linear

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _sim_overrides(args, keys) -> dict:
    out = {}
    for key in keys:
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    return out


def _sim_config(args) -> harness.SimConfig:
    values = harness.load_config(args.config) if args.config else {}
    values.update(_sim_overrides(args, ("k", "n_f", "scatters", "trials", "tfwrx", "seed", "out", "workers")))
    if args.snr_db is not None:
        values["snr_db"] = harness.parse_grid(args.snr_db)
    return harness.config_from_mapping(values)


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scatters", type=int, help="number of interfering scatters S")
    p.add_argument("--trials", type=int, help="symbols per operating point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output CSV path ('-' for stdout)")
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--workers", type=int, help="worker processes (output does not depend on this)")
    p.add_argument("--tfwrx", type=float, help="frame time-bandwidth product T_f*W_rx")
    p.add_argument("--n-f", dest="n_f", type=int, help="frames per symbol (default: smallest valid)")


def cmd_simulate(args) -> int:
    cfg = _sim_config(args)
    curve = harness.run_ber_vs_snr(cfg)
    if cfg.out in (None, "-"):
        sys.stdout.write(curve.to_csv())
    return EXIT_OK


def cmd_sweep_k(args) -> int:
    cfg = _sim_config(args)
    k_grid = [int(x) for x in args.k_grid.split(",") if x.strip()]
    snrs = harness.parse_grid(args.snr_db) if args.snr_db else (6.0, 9.0)
    curve = harness.run_ber_vs_k(replace(cfg, snr_db=snrs), k_grid, snrs)
    if cfg.out in (None, "-"):
        sys.stdout.write(curve.to_csv())
    return EXIT_OK


def cmd_theory(args) -> int:
    values = harness.load_config(args.config) if args.config else {}
    values.update(_sim_overrides(args, ("k", "tfwrx")))
    values["snr_db"] = harness.parse_grid(args.snr_db)
    cfg = harness.config_from_mapping(values)
    fading: FadingModel = cfg.fading
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("snr_db", "ber_conditional", "ber_faded"))
        for snr in cfg.snr_db:
            g = float(db_to_linear(snr))
            cond = ber_conditional(g, cfg.k, cfg.tfwrx)
            faded = ber_faded(g, cfg.k, fading, cfg.tfwrx, method=args.method)
            w.writerow((format(snr, ".10g"), format(cond, ".10g"), format(faded, ".10g")))
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_codebook(args) -> int:
    book = build_codebook(args.nf, args.k)
    for row in book.to_csv_rows():
        print(row)
    return EXIT_OK


def cmd_waveform(args) -> int:
    grid = FrameGrid.from_product(args.n_f or 4, args.tfwrx)
    pulse = make_monocycle(grid, args.ep)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        if args.symbol:
            book = build_codebook(args.n_f, args.k)
            grid = FrameGrid.from_product(book.n_f, args.tfwrx)
            pulse = make_monocycle(grid, args.ep)
            code = generate_reader_code(book.n_f, args.seed)
            rng = np.random.default_rng(args.seed)
            ch = ChannelRealization(1.0, tuple([1.0] * args.scatters))
            n0 = 0.0 if args.snr_db is None else book.n_f * args.ep / (args.k * float(db_to_linear(args.snr_db)))
            frames = synthesize_received(book.codewords[args.index], code, pulse, ch, n0, rng)
            w.writerow(("frame", "sample", "value"))
            for j, frame in enumerate(frames):
                for i, v in enumerate(frame):
                    w.writerow((j, i, format(v, ".10g")))
        else:
            state = switch_state(args.state, args.load, args.delay)
            reflected = switch_response(state, pulse)
            w.writerow(("sample", "incident", "reflected"))
            for i, (a, b) in enumerate(zip(pulse.samples, reflected)):
                w.writerow((i, format(a, ".10g"), format(b, ".10g")))
    finally:
        if close:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="usbc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Monte Carlo BER versus SNR")
    p.add_argument("--k", type=int, help="bits per symbol")
    p.add_argument("--snr-db", help="START:STOP:STEP (inclusive) or comma list")
    _add_sim_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-k", help="Monte Carlo BER versus bits per symbol")
    p.add_argument("--k-grid", default="1,2,3,4", help="comma list of K values")
    p.add_argument("--snr-db", help="fixed SNR values (default 6,9)")
    _add_sim_args(p)
    p.set_defaults(func=cmd_sweep_k, k=None)

    p = sub.add_parser("theory", help="theoretical BER curve")
    p.add_argument("--k", type=int)
    p.add_argument("--tfwrx", type=float)
    p.add_argument("--snr-db", default="0:12:2")
    p.add_argument("--method", choices=("quadrature", "montecarlo"), default="quadrature")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("codebook", help="print codewords as CSV rows of +/-1")
    p.add_argument("--nf", type=int, default=None)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("waveform", help="dump a reflected pulse or a received symbol as CSV")
    p.add_argument("--state", choices=("off", "a", "b", "c"), default="b")
    p.add_argument("--load", type=float, default=1.0, help="absorbed fraction for state a")
    p.add_argument("--delay", type=int, default=0, help="delay in samples for state c")
    p.add_argument("--tfwrx", type=float, default=25.0)
    p.add_argument("--ep", type=float, default=1.0, help="pulse energy")
    p.add_argument("--symbol", action="store_true", help="dump a synthesized received symbol instead")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n-f", dest="n_f", type=int)
    p.add_argument("--index", type=int, default=0, help="transmitted codeword index")
    p.add_argument("--scatters", type=int, default=0)
    p.add_argument("--snr-db", type=float, help="noise level (omit for noiseless)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_waveform)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except QuadratureError as exc:
        print(f"usbc: numerical accuracy error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, CodebookSizeError, ValueError, IndexError, OSError) as exc:
        print(f"usbc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
