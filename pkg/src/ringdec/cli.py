"""Command-line entry point: ``ringdec decode|simulate|enumerate|battery --config FILE``."""

from __future__ import annotations

import argparse
import csv
import io
import sys

from .channels import compute_llr, read_received
from .errors import ConfigError, RingDecError
from .harness import (_resolve, build_experiment, exact_error_probability, is_dyadic,
                      load_config, run_monte_carlo, independence_battery)
from .lp import LpDecoder
from .sp import decode_sp

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _emit(text, output, base_dir):
    if output:
        _resolve(base_dir, output).write_text(text)
    else:
        sys.stdout.write(text)


def _decode(cfg):
    exp = build_experiment(cfg)
    code, channel = exp.code, exp.channel
    if cfg.received:
        y = read_received(_resolve(cfg.base_dir, cfg.received))
    else:
        y = channel.sample(exp.codewords[0], cfg.seed)
    if len(y) != code.n:
        raise ConfigError(f"received word has length {len(y)}, code has n={code.n}")
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["decoder", "status", "word", "detail"])
    for spec in cfg.decoders:
        if spec.kind == "lp":
            exact = is_dyadic(channel) if cfg.exact is None else cfg.exact
            llr = compute_llr(channel, y, base2=exact, on_undefined="floor")
            res = LpDecoder(code, exact=exact).decode(llr)
            detail = f"objective={res.objective}"
        else:
            res = decode_sp(code, channel, y, spec.iters, early_exit=spec.early_exit)
            detail = f"iterations={res.iterations_used}"
        word = "" if res.word is None else " ".join(str(s) for s in res.word)
        wr.writerow([str(spec), res.status, word, detail])
    return buf.getvalue()


def main(argv=None):
    parser = argparse.ArgumentParser(prog="ringdec", description="LP and sum-product decoding over finite rings")
    parser.add_argument("command", choices=["decode", "simulate", "enumerate", "battery"])
    parser.add_argument("--config", required=True, help="key = value experiment file")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "decode":
            _emit(_decode(cfg), cfg.output, cfg.base_dir)
        elif args.command == "simulate":
            if cfg.exhaustive:
                rep = exact_error_probability(cfg)
            else:
                rep = run_monte_carlo(cfg)
            _emit(rep.to_csv(), cfg.output, cfg.base_dir)
        elif args.command == "enumerate":
            _emit(exact_error_probability(cfg).to_csv(), cfg.output, cfg.base_dir)
        else:
            rep = independence_battery(cfg)
            _emit(rep.to_text(), cfg.output, cfg.base_dir)
            return EXIT_OK if rep.passed else EXIT_FAIL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RingDecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
