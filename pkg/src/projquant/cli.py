"""projquant command line: critical sets, quantization tables, Casimir spectra, verification suites.

Exit codes: 0 success, 1 a verification suite failed, 2 bad configuration or
missing file, 3 critical pair.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ._rational import format_rational
from .cartancurved import HEquivarianceError, quantize_curved
from .casimir import criticality
from .estimators import validate_pair
from .quantflat import CriticalPairError, flat_table, quantize_flat
from .repspace import FiberSpace, casimir_blocks, shift_delta
from .serialization import connection_from_json, dumps, operator_to_json, read_json, symbol_from_json, write_json
from .suites import SUITES, run_suite

log = logging.getLogger("projquant")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_CRITICAL = 0, 1, 2, 3

_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class ConfigError(Exception):
    pass


def _setup_logging():
    name = os.environ.get("PROJQUANT_LOG", "quiet").strip().lower()
    if name not in _LOG_LEVELS:
        raise ConfigError(f"PROJQUANT_LOG must be one of {sorted(_LOG_LEVELS)}, got {name!r}")
    logging.basicConfig(level=_LOG_LEVELS[name], format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _emit(data, out):
    if out:
        write_json(out, data)
    else:
        sys.stdout.write(dumps(data))


def _load(path, what):
    if not os.path.exists(path):
        raise FileNotFoundError(f"{what} file not found: {path}")
    try:
        return read_json(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path} is not valid JSON: {exc}") from None


def _pair(args, delta=None):
    return validate_pair(args.m, args.rep1, args.rep2, delta, args.kmax)


def cmd_critical(args) -> int:
    symbolic = args.delta == "symbolic"
    v1, v2 = _pair(args, None if symbolic or args.delta is None else args.delta)
    report = criticality(v1, v2, args.m, args.kmax, symbolic=symbolic)
    data = report.to_json()
    _emit(data, args.out)
    hit = bool(report.critical_deltas) if symbolic else report.critical
    return EXIT_CRITICAL if hit else EXIT_OK


def cmd_quantize(args) -> int:
    if args.connection and not args.symbol:
        raise ConfigError("curved mode needs --symbol together with --connection")
    if args.symbol:
        T = symbol_from_json(_load(args.symbol, "symbol"))
        m, v1, v2 = T.m, T.v1, T.v2
        connection = connection_from_json(_load(args.connection, "connection")) if args.connection else None
        if connection is not None and connection.m != m:
            raise ConfigError("connection and symbol have different dimensions")
        k_max = max(T.xi_degrees(), default=0)
    else:
        v1, v2 = _pair(args, args.delta)
        m, k_max, connection = args.m, args.kmax, None
    report = criticality(v1, v2, m, k_max)
    if report.critical:
        _emit({"error": "critical pair", "report": report.to_json()}, args.out)
        return EXIT_CRITICAL
    if args.symbol:
        D = quantize_curved(connection, T) if connection is not None else quantize_flat(T)
        data = {"mode": "curved" if connection is not None else "flat", "operator": operator_to_json(D)}
    else:
        data = {
            "mode": "flat",
            "m": m,
            "pair": [v1.to_json(), v2.to_json()],
            "delta": format_rational(shift_delta(v1, v2, m)),
            "tables": {str(k): flat_table(m, k, v1, v2).to_json() for k in range(k_max + 1)},
        }
    _emit(data, args.out)
    return EXIT_OK


def cmd_casimir_spectrum(args) -> int:
    v1, v2 = _pair(args, None if args.delta in (None, "symbolic") else args.delta)
    degrees = []
    for k in range(args.kmax + 1):
        blocks = casimir_blocks(FiberSpace(args.m, k, v1, v2)).blocks
        degrees.append({
            "k": k,
            "blocks": [
                {"index": b.index, "dim": b.dim, "cprime": format_rational(b.cprime), "alpha": format_rational(b.alpha)}
                for b in blocks
            ],
        })
    _emit({"m": args.m, "pair": [v1.to_json(), v2.to_json()],
           "delta": format_rational(shift_delta(v1, v2, args.m)), "degrees": degrees}, args.out)
    return EXIT_OK


def _suite_kwargs(args) -> dict:
    kw = {"seed": args.seed}
    name = args.suite
    if name == "curved-invariance":
        if args.m is not None:
            kw["m"] = args.m
    elif args.m is not None:
        kw["ms"] = (args.m,)
    if name != "crochet" and args.kmax is not None:
        kw["k_max"] = args.kmax
    if name in ("gamma", "casimir", "tech", "flat-equivariance", "curved-invariance") and (args.rep1 or args.rep2):
        v1, v2 = validate_pair(args.m or 2, args.rep1, args.rep2)
        kw["pairs"] = ((v1, v2),)
    if name in ("casimir", "flat-equivariance") and args.delta not in (None, "symbolic"):
        from ._rational import as_rational

        kw["deltas"] = (as_rational(args.delta),)
    return kw


def cmd_verify(args) -> int:
    rep = run_suite(args.suite, **_suite_kwargs(args))
    _emit(rep.to_json(), args.out)
    for c in rep.failures[:5]:
        log.warning("failed: %s %s", c.name, c.config)
    return EXIT_OK if rep.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, default=None, help="dimension of the base (default 2)")
    common.add_argument("--kmax", type=int, default=None, help="largest symbol degree (default 2)")
    common.add_argument("--rep1", default=None, help='source fiber, e.g. "density:1/3", "sym:1:0", "ext:2:1/2"')
    common.add_argument("--rep2", default=None, help="target fiber, same syntax")
    common.add_argument("--delta", default=None, help='shift as "p/q" (moves the weight of rep2) or "symbolic"')
    common.add_argument("--out", default=None, help="output file (default stdout); written atomically")

    p = argparse.ArgumentParser(prog="projquant", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("critical", parents=[common], help="critical shifts / criticality report")
    q = sub.add_parser("quantize", parents=[common], help="flat tables, or the operator of a symbol file")
    q.add_argument("--connection", default=None, help="ProjConnection JSON (curved mode)")
    q.add_argument("--symbol", default=None, help="PolySymbol JSON")
    sub.add_parser("casimir-spectrum", parents=[common], help="Casimir blocks and eigenvalues per degree")
    v = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--seed", type=int, default=0)
    return p


_COMMANDS = {
    "critical": cmd_critical,
    "quantize": cmd_quantize,
    "casimir-spectrum": cmd_casimir_spectrum,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command != "verify":
        args.m = 2 if args.m is None else args.m
        args.kmax = 2 if args.kmax is None else args.kmax
    try:
        _setup_logging()
        return _COMMANDS[args.command](args)
    except CriticalPairError as exc:
        if exc.report is not None:
            _emit({"error": str(exc), "report": exc.report.to_json()}, args.out)
        print(f"projquant: critical pair: {exc}", file=sys.stderr)
        return EXIT_CRITICAL
    except (ConfigError, FileNotFoundError, ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        print(f"projquant: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HEquivarianceError as exc:
        print(f"projquant: internal error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
