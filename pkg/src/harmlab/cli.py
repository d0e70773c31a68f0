"""Command-line front end.

Exit codes: 0 success, 1 verification or validation failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from pathlib import Path
from typing import Optional

from . import maximal, singular
from .errors import HarmlabError, UnknownSpecError
from .families import (constant_symbol_family, default_family, delta_family,
                       resolution_family, unit_weight_family)
from .grid import read_csv, write_csv
from .orlicz import PHI
from .verify import DEFAULT_SUITE, REGISTRY, fit_growth_exponent, run_verification

OK, FAILED, USAGE = 0, 1, 2


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


# -- op -----------------------------------------------------------------------

def _need(value, flag, kind):
    if value is None:
        raise ConfigError(f"--kind {kind} needs {flag}")
    return value


def _apply(kind: str, f, b, r, delta):
    if kind == "M":
        return maximal.hl_maximal(f)
    if kind == "Md":
        return maximal.dyadic_maximal(f)
    if kind == "Msharp":
        return maximal.sharp_maximal(f) if delta is None else maximal.sharp_maximal_delta(f, delta, "hl")
    if kind == "Mr":
        return maximal.m_r(abs(f), _need(r, "--r", kind))
    if kind == "MLlogL":
        return maximal.orlicz_maximal(f, PHI)
    if kind == "M2":
        return maximal.m_squared(f)
    if kind == "T":
        return singular.apply_kernel_operator(singular.hilbert_kernel(), f)
    # the (b_i - b_j) form is exactly zero for constant b
    return singular.commutator_kernel_form(_need(b, "--b", kind), singular.hilbert_kernel(), f)


def cmd_op(args) -> int:
    try:
        f = read_csv(args.input)
        b = read_csv(args.b) if args.b else None
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (HarmlabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED
    try:
        out = _apply(args.kind, f, b, args.r, args.delta)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except HarmlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED
    write_csv(out, args.output)
    return OK


# -- config files -------------------------------------------------------------

_KEYS = {
    "run": {"specs", "output", "kernel", "ceiling"},
    "grid": {"cells"},
    "family": {"name", "size", "seed", "delta", "cells", "deltas", "ps"},
    "sweep": {"p", "r", "eps"},
    "scan": {"specs", "parameter", "p"},
    "bands": None,  # keys are spec ids
}


def _read_config(path: str, allowed_sections: set) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.optionxform = str
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    for section in cfg.sections():
        if section not in allowed_sections:
            raise ConfigError(f"{path}: unknown section [{section}]")
        keys = _KEYS[section]
        for key in cfg[section]:
            if keys is None:
                if key not in REGISTRY:
                    raise ConfigError(f"{path}: unknown spec id {key!r} in [bands]")
            elif key not in keys:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
    return cfg


def _floats(text: str, what: str) -> tuple:
    try:
        vals = tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{what}: expected numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{what}: list is empty")
    return vals


def _int(cfg, section, key, default):
    try:
        return cfg.getint(section, key, fallback=default)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer") from None


def _spec_ids(text: str) -> list:
    ids = [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]
    if not ids:
        raise ConfigError("spec list is empty")
    for sid in ids:
        if sid not in REGISTRY:
            raise UnknownSpecError(f"unknown spec id {sid!r}")
    return ids


def _kernel(text: Optional[str]):
    if not text or text == "hilbert":
        return singular.hilbert_kernel()
    if text.startswith("synthetic:"):
        return singular.synthetic_cz_kernel(float(text.split(":", 1)[1]))
    raise ConfigError(f"unknown kernel {text!r}")


def _output(cfg, section, override, default) -> Path:
    return Path(override or cfg.get(section, "output", fallback=default))


def cmd_verify(args) -> int:
    try:
        cfg = _read_config(args.config, {"run", "grid", "family", "sweep"})
        ids = _spec_ids(cfg.get("run", "specs", fallback=",".join(DEFAULT_SUITE)))
        cells = _int(cfg, "grid", "cells", 1024)
        size = _int(cfg, "family", "size", 200)
        seed = _int(cfg, "family", "seed", 42)
        name = cfg.get("family", "name", fallback="default")
        sweep = {k: _floats(cfg.get("sweep", k), k) for k in ("p", "r", "eps") if cfg.has_option("sweep", k)}
        kernel = _kernel(cfg.get("run", "kernel", fallback=None))
        ceiling = cfg.getfloat("run", "ceiling", fallback=None)
        if name == "default":
            family = default_family(cells, size, seed, kernel)
        elif name == "constant-symbol":
            family = constant_symbol_family(cells, size, seed)
        else:
            raise ConfigError(f"unknown family {name!r} for verify")
        out_path = _output(cfg, "run", args.output, "report.csv")
    except (ConfigError, HarmlabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE

    reports, crashed = [], False
    for sid in sorted(ids):
        try:
            reports.append(run_verification(sid, family, sweep, ceiling))
        except HarmlabError as exc:
            print(f"error: {sid}: {exc}", file=sys.stderr)
            crashed = True
    with open(out_path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["spec_id", "param_point", "lhs", "rhs", "ratio"])
        for rep in reports:
            rep.write_rows(out)
    for rep in reports:
        print(rep.summary())
        print()
    ok = not crashed and all(r.passed for r in reports)
    print(f"overall: {'pass' if ok else 'fail'} ({sum(r.passed for r in reports)}/{len(reports)})")
    return OK if ok else FAILED


def _scan_family(cfg):
    name = cfg.get("family", "name", fallback="resolution")
    if name == "resolution":
        delta = cfg.getfloat("family", "delta", fallback=2.0 ** -6)
        cells = tuple(int(c) for c in _floats(cfg.get("family", "cells", fallback="16 32 64 128 256 512 1024 2048 4096"), "cells"))
        return resolution_family(delta, cells)
    if name == "constant-weight":
        cells = tuple(int(c) for c in _floats(cfg.get("family", "cells", fallback="64 128 256 512"), "cells"))
        return resolution_family(1.0, cells)
    if name == "delta":
        deltas = _floats(cfg.get("family", "deltas", fallback="0.25 0.125 0.0625 0.03125 0.015625"), "deltas")
        return delta_family(_int(cfg, "family", "cells", 4096), deltas)
    if name == "unit-weight":
        ps = _floats(cfg.get("family", "ps", fallback="1.05 1.1 1.2 1.5"), "ps")
        return unit_weight_family(_int(cfg, "family", "cells", 1024), ps)
    raise ConfigError(f"unknown family {name!r} for scan")


def cmd_scan(args) -> int:
    try:
        cfg = _read_config(args.config, {"scan", "family", "run", "bands"})
        ids = _spec_ids(cfg.get("scan", "specs", fallback="T-linear, Comm-strong-A1"))
        parameter = cfg.get("scan", "parameter", fallback="a1")
        p = cfg.getfloat("scan", "p", fallback=2.0)
        family = _scan_family(cfg)
        bands = {k: _floats(v, f"band {k}") for k, v in cfg["bands"].items()} if cfg.has_section("bands") else {}
        for k, v in bands.items():
            if len(v) != 2:
                raise ConfigError(f"band {k}: expected 'low, high'")
        out_path = _output(cfg, "run", args.output, "scan.csv")
    except (ConfigError, HarmlabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE

    ok = True
    with open(out_path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["delta", "a1", "p", "lhs_norm_ratio", "fitted_exponent", "cells", "spec_id"])
        for sid in ids:
            try:
                fit = fit_growth_exponent(sid, family, parameter, p)
            except HarmlabError as exc:
                print(f"error: {sid}: {exc}", file=sys.stderr)
                return FAILED
            for row in fit.scan_rows():
                out.writerow(row + [sid])
            verdict = ""
            if sid in bands:
                lo, hi = bands[sid]
                inside = lo <= fit.exponent <= hi
                ok &= inside
                verdict = f" band [{lo:g}, {hi:g}] {'pass' if inside else 'fail'}"
            flag = " (degenerate: parameter constant)" if fit.degenerate else ""
            print(f"{sid}: exponent[{parameter}] = {fit.exponent:.4f}, r2 = {fit.r2:.4f}{flag}{verdict}")
    return OK if ok else FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="harmlab", description="Discrete harmonic-analysis laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    op = sub.add_parser("op", help="apply one operator to a CSV grid function")
    op.add_argument("--kind", required=True, choices=["M", "Md", "Msharp", "Mr", "MLlogL", "M2", "T", "commutator"])
    op.add_argument("--input", required=True)
    op.add_argument("--b")
    op.add_argument("--r", type=float)
    op.add_argument("--delta", type=float)
    op.add_argument("--output", required=True)
    op.set_defaults(run=cmd_op)

    for name, fn, what in (("verify", cmd_verify, "report.csv"), ("scan", cmd_scan, "scan.csv")):
        p = sub.add_parser(name, help=f"run a config file and write {what}")
        p.add_argument("config")
        p.add_argument("--output", help=f"override the output path (default from config, else {what})")
        p.set_defaults(run=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
