"""Command-line front end.

    etk solve    --potential power --beta -1
    etk improve  --potential trunc-coulomb --d 3
    etk phi      --potential power --beta -0.5
    etk classify --potential cubic-linear --C 0.3
    etk oracle   --potential log
    etk sweep    --figure npp --output npp.csv --summary npp.json

A JSON file given with --config supplies the same keys as the flags; flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional, Sequence

from etk import experiments
from etk.et_core import solve_compact
from etk.experiments import SweepRow, SweepTable
from etk.improvement import compute_phi, solve_improved
from etk.model import (
    ETKError,
    InvalidSystemError,
    ParameterError,
    SystemSpec,
    VariationalCharacter,
    as_state,
)
from etk.oracle import GaussianBasisConfig, oracle_ground_energy
from etk.potentials import FAMILIES, classify_character, make_potential

CSV_HEADER = [
    "param",
    "E_oracle",
    "oracle_converged",
    "E_et",
    "E_improved",
    "phi",
    "rho0_et",
    "character",
    "rel_err_et",
    "rel_err_improved",
]

POTENTIAL_FLAGS = ("G", "beta", "c", "d", "alpha", "C", "a", "sign")
SYSTEM_DEFAULTS = {"N": 3, "m": 1.0, "D": 3, "state": "bgs", "format": "text"}
COMMANDS = ("solve", "improve", "phi", "classify", "oracle", "sweep")


class UsageError(Exception):
    pass


# --- CSV -------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "%.12g" % x


def table_to_csv(table: SweepTable) -> str:
    if not table.rows:
        raise ParameterError("refusing to write an empty sweep table")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.rows:
        w.writerow(
            [
                _fmt(r.param),
                _fmt(r.E_oracle),
                "true" if r.oracle_converged else "false",
                _fmt(r.E_et),
                _fmt(r.E_improved),
                _fmt(r.phi),
                _fmt(r.rho0_et),
                str(r.character),
                _fmt(r.rel_err_et),
                _fmt(r.rel_err_improved),
            ]
        )
    return buf.getvalue()


def write_csv(table: SweepTable, path: str) -> None:
    """Write the table as UTF-8 CSV; an empty table raises before the file is touched."""
    text = table_to_csv(table)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_csv(path: str) -> List[Dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        out = []
        for row in reader:
            rec = {k: float(v) for k, v in row.items() if k not in ("oracle_converged", "character")}
            rec["oracle_converged"] = row["oracle_converged"] == "true"
            rec["character"] = VariationalCharacter(row["character"])
            out.append(rec)
        return out


# --- argument handling -----------------------------------------------------------


def parse_grid(text: str) -> List[float]:
    """``lo:hi:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, step = (float(v) for v in text.split(":"))
            if not step > 0 or hi < lo:
                raise ValueError
            n = int(math.floor((hi - lo) / step + 1e-9))
            return [round(lo + i * step, 10) for i in range(n + 1)]
        vals = [float(v) for v in text.split(",") if v.strip()]
        if not vals:
            raise ValueError
        return vals
    except ValueError:
        raise UsageError(f"malformed grid {text!r}; use lo:hi:step or a comma list") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etk", description="Envelope theory solver and variational reference.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for any flag")
    common.add_argument("--format", choices=("text", "json", "csv"), default=None)
    common.add_argument("--output", help="output file (default stdout)")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--potential", help=f"one of: {', '.join(FAMILIES)}")
    for flag in POTENTIAL_FLAGS:
        system.add_argument(f"--{flag}", type=float, default=None)
    system.add_argument("--N", type=int, default=None)
    system.add_argument("--m", type=float, default=None)
    system.add_argument("--D", type=int, default=None)
    system.add_argument("--state", default=None, help="'bgs' or 'n,l;n,l;...'")

    for name, help_ in [
        ("solve", "classical envelope solution (phi = 2)"),
        ("improve", "phi-improved envelope solution"),
        ("phi", "DOSM phi and its ingredients"),
        ("classify", "variational character of the classical solution"),
        ("oracle", "variational reference energy (N=3, D=3 ground state)"),
    ]:
        p = sub.add_parser(name, parents=[common, system], help=help_)
        if name == "improve":
            p.add_argument("--phi", type=float, default=None, help="override the DOSM phi")
        if name == "oracle":
            p.add_argument("--tol-rel", dest="tol_rel", type=float, default=None)

    sw = sub.add_parser("sweep", parents=[common], help="figure sweep against the oracle")
    sw.add_argument("--figure", choices=sorted(experiments.FIGURES), default=None)
    sw.add_argument("--grid", default=None, help="lo:hi:step or comma list (default per figure); write --grid=-1.5:-0.3:0.1 when it starts with a minus")
    sw.add_argument("--summary", default=None, help="write a JSON summary to this path")
    return parser


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if key in ("command", "config") or not hasattr(args, key):
                raise UsageError(f"config key {key!r} is not valid for '{args.command}'")
            if getattr(args, key) is None:
                setattr(args, key, value)
    for key, value in SYSTEM_DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    return args


def _system(args) -> SystemSpec:
    if not args.potential:
        raise UsageError("--potential is required")
    params = {k: getattr(args, k) for k in POTENTIAL_FLAGS if getattr(args, k) is not None}
    pot = make_potential(args.potential, **params)
    return SystemSpec(N=int(args.N), m=float(args.m), D=int(args.D), potential=pot, state=as_state(int(args.N), args.state))


# --- commands --------------------------------------------------------------------


def _show(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return _fmt(v) if isinstance(v, float) else v


def _emit(args, record: Dict, out) -> None:
    if args.format == "json":
        out.write(json.dumps(record, indent=2) + "\n")
    elif args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(record.keys())
        w.writerow(_show(v) for v in record.values())
    else:
        for k, v in record.items():
            out.write(f"{k}={_show(v)}\n")


def _solution_record(sol) -> Dict:
    return {
        "E": sol.energy,
        "rho0": sol.rho0,
        "p0": sol.p0,
        "Q": sol.Q_used,
        "phi": sol.phi_used,
        "character": str(sol.character),
        "roots": sol.root_count,
    }


def _run_single(args, out) -> int:
    spec = _system(args)
    if args.command == "solve":
        _emit(args, _solution_record(solve_compact(spec)), out)
    elif args.command == "improve":
        _emit(args, _solution_record(solve_improved(spec, args.phi)), out)
    elif args.command == "phi":
        rep = compute_phi(spec)
        _emit(
            args,
            {"phi": rep.phi, "p_tilde": rep.p_tilde, "rho_tilde": rep.rho_tilde, "mu": rep.mu, "k": rep.k, "lambda": rep.lam},
            out,
        )
    elif args.command == "classify":
        _emit(args, {"character": str(classify_character(spec.kinematics, spec.potential))}, out)
    elif args.command == "oracle":
        cfg = GaussianBasisConfig(tol_rel=args.tol_rel) if args.tol_rel is not None else None
        res = oracle_ground_energy(spec, cfg)
        _emit(
            args,
            {"E": res.energy, "converged": res.converged, "basis_size": res.basis_size, "delta_last": res.delta_last},
            out,
        )
        if not res.converged:
            sys.stderr.write(f"etk: oracle did not converge (last change {res.delta_last:.3g})\n")
            return 1
    return 0


def _run_sweep(args, out) -> int:
    if not args.figure:
        raise UsageError("--figure is required")
    grid = parse_grid(str(args.grid)) if args.grid is not None else None
    table = experiments.run_figure(args.figure, grid)
    if args.format == "json":
        text = json.dumps(
            {
                "summary": table.summary(),
                "rows": [{k: (str(v) if k == "character" else v) for k, v in _row_dict(r).items()} for r in table.rows],
            },
            indent=2,
        ) + "\n"
    else:
        text = table_to_csv(table)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8", newline="") as fh:
            fh.write(table.summary_json() + "\n")
    return 0


def _row_dict(r: SweepRow) -> Dict:
    return {k: getattr(r, k) for k in CSV_HEADER}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _merge_config(args, parser)
        if args.command == "sweep":
            return _run_sweep(args, sys.stdout)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                return _run_single(args, fh)
        return _run_single(args, sys.stdout)
    except (UsageError, ParameterError, InvalidSystemError) as exc:
        sys.stderr.write(f"etk: error: {exc}\n")
        return 2
    except (ETKError, ArithmeticError, OSError) as exc:
        sys.stderr.write(f"etk: {exc}\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
