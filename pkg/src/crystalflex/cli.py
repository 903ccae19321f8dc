"""Command-line interface.

Exit codes: 0 success (or rigid), 10 flexible, 20 unknown, 1 invalid
framework, 2 usage error, 3 file or document error, 70 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from .framework import GALLERY_NAMES, InvalidFrameworkError, gallery, validate
from .io import (
    FrameworkParseError,
    dimension_summary,
    format_complex,
    format_window_field,
    parse_framework,
    parse_omega,
    pgflex_to_dict,
    serialize_framework,
    spectrum_summary,
    verdict_summary,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_FILE = 3
EXIT_FLEXIBLE = 10
EXIT_UNKNOWN = 20
EXIT_INTERNAL = 70

log = logging.getLogger("crystalflex")


class _FileError(Exception):
    pass


def _load(path: str, check: bool = True):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _FileError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError as exc:
        raise _FileError(f"{path} is not UTF-8: {exc}") from None
    try:
        return parse_framework(text, check=check)
    except FrameworkParseError as exc:
        raise _FileError(f"{path}: {exc}") from None


def _emit(out, args, payload: dict, text: str) -> None:
    if args.json:
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(text if text.endswith("\n") else text + "\n")


def _omega_text(omega) -> str:
    return "(" + ", ".join(format_complex(w) for w in omega) + ")"


def cmd_validate(args, out) -> int:
    fw = _load(args.file, check=False)
    rep = validate(fw)
    lines = [f"d={fw.d} n={fw.n} m={fw.m}: {'valid' if rep.ok else 'INVALID'}"]
    lines += [f"  error {v}" for v in rep.violations]
    lines += [f"  warning {v}" for v in rep.warnings]
    payload = {
        "valid": rep.ok,
        "violations": [{"code": v.code, "message": v.message} for v in rep.violations],
        "warnings": [{"code": v.code, "message": v.message} for v in rep.warnings],
    }
    _emit(out, args, payload, "\n".join(lines))
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_transfer(args, out) -> int:
    from .transfer import transfer_function

    tf = transfer_function(_load(args.file))
    rows = [[str(p) for p in row] for row in tf.psi.entries]
    lines = [f"Psi(z): {tf.shape[0]} x {tf.shape[1]}, columns {list(tf.psi.col_labels)}"]
    for label, row in zip(tf.psi.row_labels, rows):
        lines.append(f"{label}: [" + ", ".join(row) + "]")
    payload = {"shape": list(tf.shape), "rows": rows, "row_labels": list(tf.psi.row_labels),
               "col_labels": [list(c) for c in tf.psi.col_labels]}
    _emit(out, args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_rum(args, out) -> int:
    from .spectrum import rum_rational_scan, rum_samples_to_csv, rum_scan

    if args.grid is None and args.rational_order is None:
        raise _UsageError("rum needs --grid and/or --rational-order")
    fw = _load(args.file)
    samples = []
    if args.grid is not None:
        samples += rum_scan(fw, args.grid, args.tol)
    if args.rational_order is not None:
        seen = {tuple(round(x, 9) for w in s.omega for x in (w.real, w.imag)) for s in samples}
        for s in rum_rational_scan(fw, args.rational_order, args.tol):
            key = tuple(round(x, 9) for w in s.omega for x in (w.real, w.imag))
            if key not in seen:
                seen.add(key)
                samples.append(s)
    if args.csv:
        try:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(rum_samples_to_csv(samples, fw.d))
        except OSError as exc:
            raise _FileError(f"cannot write {args.csv}: {exc.strerror or exc}") from None
    lines = [f"{len(samples)} rank-drop samples (tol {args.tol:g})"]
    lines += [f"  omega={_omega_text(s.omega)} rank={s.rank} kernel_dim={s.kernel_dim}" for s in samples]
    payload = {"tol": args.tol, "samples": [
        {"omega": [format_complex(w) for w in s.omega], "rank": s.rank, "kernel_dim": s.kernel_dim}
        for s in samples]}
    _emit(out, args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_spectrum(args, out) -> int:
    from .spectrum import geometric_spectrum, is_spectrum_finite

    gs = geometric_spectrum(_load(args.file), tol=args.tol, seed=args.seed)
    summary = spectrum_summary(gs)
    summary["finite"] = is_spectrum_finite(gs)
    lines = [f"kind={gs.kind} certification={gs.certification} finite={summary['finite']}"]
    for p in gs.points:
        lines.append(f"  omega={_omega_text(p.omega)} kernel_dim={p.kernel_dim}")
    for g in summary["components_omega"]:
        lines.append(f"  component (in omega): {g}")
    _emit(out, args, summary, "\n".join(lines))
    return EXIT_OK


def cmd_rigidity(args, out) -> int:
    from .flexes import rigidity_verdict

    v = rigidity_verdict(_load(args.file), tol=args.tol, seed=args.seed)
    summary = verdict_summary(v)
    summary["spectrum"] = spectrum_summary(v.spectrum)
    gamma = ", ".join(_omega_text(p.omega) for p in v.spectrum.points)
    lines = [
        f"verdict: {v.first_order_rigid} ({v.certification})",
        f"  Gamma: {{{gamma}}}" + (" plus curve components" if v.spectrum.components else ""),
        f"  gamma_trivial={v.gamma_trivial}",
        f"  periodic_kernel_is_translations={v.periodic_kernel_is_translations}"
        f" (rank R_per {v.ranks['R_per']}, extremal {v.thresholds.at_one})",
        f"  fper_rank_extremal={v.fper_rank_extremal}"
        f" (rank R_fper {v.ranks['R_fper']}, extremal {v.thresholds.fper})",
        f"  psi_rank_extremal={v.psi_rank_extremal}",
    ]
    if v.witness is not None:
        lines.append(f"  witness: {v.witness_kind} flex")
    _emit(out, args, summary, "\n".join(lines))
    return {"rigid": EXIT_OK, "flexible": EXIT_FLEXIBLE}.get(v.first_order_rigid, EXIT_UNKNOWN)


def cmd_flexes(args, out) -> int:
    from .flexes import pg_flex_space

    fw = _load(args.file)
    try:
        omega = parse_omega(args.omega, fw.d)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    basis = pg_flex_space(fw, omega, args.deg, args.tol)
    lo = -(args.window // 2)
    kmin, kmax = (lo,) * fw.d, (lo + args.window - 1,) * fw.d
    lines = [f"{len(basis)} pg-flexes at omega={_omega_text(omega)} with degree <= {args.deg}"]
    for i, f in enumerate(basis):
        lines.append(f"## flex {i}")
        lines.append(format_window_field(fw, f.window(kmin, kmax)).rstrip("\n"))
    payload = {"omega": [format_complex(w) for w in omega], "max_deg": args.deg,
               "dimension": len(basis), "flexes": [pgflex_to_dict(f) for f in basis]}
    _emit(out, args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_dimension(args, out) -> int:
    from .flexes import flex_space_dimension

    fd = flex_space_dimension(_load(args.file), args.cap, tol=args.tol, seed=args.seed)
    summary = dimension_summary(fd)
    text = str(fd.dim) if fd.kind == "finite" else fd.kind
    detail = f"  ({fd.certification})" if fd.certification != "exact" else ""
    _emit(out, args, summary, text + detail)
    return EXIT_OK if fd.kind != "unknown" else EXIT_UNKNOWN


def cmd_gallery(args, out) -> int:
    text = serialize_framework(gallery(args.name))
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise _FileError(f"cannot write {args.out}: {exc.strerror or exc}") from None
    else:
        out.write(text)
    return EXIT_OK


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    from .algebra import DEFAULT_RANK_TOL

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL, help="relative SVD rank tolerance")

    p = _Parser(prog="crystalflex", description="First-order flex analysis of crystal frameworks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("validate", parents=[common], help="check framework invariants")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("transfer", parents=[common], help="print the transfer function")
    s.add_argument("file")
    s.set_defaults(func=cmd_transfer)

    s = sub.add_parser("rum", parents=[common], help="scan the torus for rank drops")
    s.add_argument("file")
    s.add_argument("--grid", type=int, metavar="N")
    s.add_argument("--rational-order", type=int, metavar="Q")
    s.add_argument("--csv", metavar="OUT")
    s.set_defaults(func=cmd_rum)

    for name, func, helptext in (
        ("spectrum", cmd_spectrum, "geometric flex spectrum"),
        ("rigidity", cmd_rigidity, "first-order rigidity verdict"),
    ):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("file")
        s.add_argument("--seed", type=int, default=0)
        s.set_defaults(func=func)

    s = sub.add_parser("flexes", parents=[common], help="pg-flex basis at a multi-factor")
    s.add_argument("file")
    s.add_argument("--omega", required=True, help='comma-separated complex numbers, e.g. "-1,1" or "0+1i,1"')
    s.add_argument("--deg", type=int, default=0)
    s.add_argument("--window", type=int, default=3, help="cells per axis in the exported window")
    s.set_defaults(func=cmd_flexes)

    s = sub.add_parser("dimension", parents=[common], help="dimension of the flex space")
    s.add_argument("file")
    s.add_argument("--cap", type=int, default=6)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_dimension)

    s = sub.add_parser("gallery", parents=[common], help="write a named example framework")
    s.add_argument("name", choices=GALLERY_NAMES)
    s.add_argument("--out", metavar="FILE")
    s.set_defaults(func=cmd_gallery)
    return p


def _check_ranges(args) -> None:
    for attr in ("grid", "rational_order", "deg", "window", "cap"):
        val = getattr(args, attr, None)
        if val is not None and val < (1 if attr in ("grid", "window", "rational_order") else 0):
            raise _UsageError(f"--{attr.replace('_', '-')} out of range: {val}")
    if args.tol <= 0:
        raise _UsageError("--tol must be positive")


def _join_omega(argv: list[str]) -> list[str]:
    # "--omega -1,1" would otherwise read the value as a flag
    out = []
    it = iter(argv)
    for a in it:
        if a == "--omega":
            out.append("--omega=" + next(it, ""))
        else:
            out.append(a)
    return out


def run_command(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    argv = _join_omega(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
        _check_ranges(args)
    except _UsageError as exc:
        err.write(f"crystalflex: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
    try:
        return args.func(args, out)
    except _UsageError as exc:
        err.write(f"crystalflex: error: {exc}\n")
        return EXIT_USAGE
    except _FileError as exc:
        err.write(f"crystalflex: {exc}\n")
        return EXIT_FILE
    except InvalidFrameworkError as exc:
        err.write(f"crystalflex: {exc}\n")
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        err.write(f"crystalflex: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run_command())
