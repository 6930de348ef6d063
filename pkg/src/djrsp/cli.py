"""Command-line front end: ``djrsp sweep|verify|optimize|region``.

Exit codes: 0 success, 1 usage or domain error, 2 I/O error, 3 verification
failure. Reals are written with 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import analysis
from .analysis import ClosedFormId, closed_form, optimize_r, resource_average
from .channels import NO_PROTECTION, NoiseKind, ProtectionConfig
from .protocol import ProtocolMode, noisy_resource

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3
MISSING = -1.0

SWEEP_COLUMNS = (
    "lambda", "s", "r", "fidelity_plain", "fidelity_protected",
    "success_probability", "analytic_fidelity", "abs_error",
)
REGION_COLUMNS = ("lambda", "s", "s_bound", "improvable", "delta_f")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_range(text: str) -> np.ndarray:
    """``start:stop:steps`` (``steps`` points, inclusive) or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            start = stop = float(parts[0])
            steps = 1
        elif len(parts) == 3:
            start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected start:stop:steps") from None
    if steps < 1:
        raise UsageError(f"range {text!r} needs steps >= 1")
    if not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
        raise UsageError(f"range {text!r} leaves [0, 1]")
    if steps == 1:
        return np.array([start])
    return np.linspace(start, stop, steps)


def parse_r_policy(text: str) -> tuple[str, float | None]:
    if text in ("opt", "eq-s"):
        return text, None
    if text.startswith("fixed:"):
        try:
            value = float(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad reversal policy {text!r}") from None
        if not 0.0 <= value < 1.0:
            raise UsageError(f"fixed reversal strength must lie in [0, 1), got {value}")
        return "fixed", value
    raise UsageError(f"unknown reversal policy {text!r}; use fixed:<v>, opt or eq-s")


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def _rounded(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    return float(fmt(x))


def render(records: list[dict], columns: tuple[str, ...], fmt_name: str) -> str:
    if fmt_name == "json":
        rows = [{c: _rounded(rec[c]) for c in columns} for rec in records]
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([str(rec[c]).lower() if isinstance(rec[c], bool) else fmt(rec[c]) for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None) -> int:
    if out is None or out == "-":
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"djrsp: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    s: float
    r: float
    fidelity_plain: float
    fidelity_protected: float
    success_probability: float
    analytic_fidelity: float
    abs_error: float

    def row(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def sweep_records(kind, mode, lambdas, s_values, policy: str, fixed_r: float | None) -> list[SweepRecord]:
    """One record per (lambda, s), lambda outer and s inner."""
    kind = NoiseKind.parse(kind)
    mode = ProtocolMode.parse(mode)
    records = []
    for lam in lambdas:
        plain = resource_average(noisy_resource(kind, lam, NO_PROTECTION, mode), mode)
        for s in s_values:
            if policy == "opt":
                r = optimize_r(kind, lam, s, mode).r_star
            elif policy == "eq-s":
                r = s
            else:
                r = fixed_r
            res = noisy_resource(kind, lam, ProtectionConfig(s, r), mode)
            protected = resource_average(res, mode)
            if mode is ProtocolMode.DJRSP:
                analytic = closed_form(analysis.PROTECTED_FORM[kind], lam, s, r)
                err = abs(protected - analytic)
            else:
                analytic = err = MISSING
            records.append(SweepRecord(float(lam), float(s), float(r), plain, protected,
                                       res.success_probability, analytic, err))
    return records


def cmd_sweep(args) -> int:
    lambdas = parse_range(args.lam)
    s_values = parse_range(args.s)
    policy, fixed_r = parse_r_policy(args.r)
    if np.any(s_values >= 1.0):
        raise UsageError("weak strength s must be below 1")
    if policy == "opt" and np.any(lambdas >= 1.0):
        raise UsageError("optimal reversal needs lambda below 1")
    records = sweep_records(args.noise, args.mode, lambdas, s_values, policy, fixed_r)
    return emit(render([r.row() for r in records], SWEEP_COLUMNS, args.format), args.out)


def cmd_verify(args) -> int:
    if args.density < 2:
        raise UsageError("grid density must be >= 2")
    kinds = [args.noise] if args.noise else None
    checks = analysis.verify_closed_forms(args.density, kinds, tol=args.tol)
    failed = False
    for chk in checks:
        status = "ok" if chk.passed else "FAIL"
        print(f"{chk.form.value:<10} max_abs_error={chk.max_error:.3e} {status}")
        for lam, s, r, err in chk.offending:
            failed = True
            print(f"  offending {chk.form.value} lambda={fmt(lam)} s={fmt(s)} r={fmt(r)} error={err:.3e}")
    print("verify: " + ("FAILED" if failed else f"all forms within {args.tol:g}"))
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_optimize(args) -> int:
    kind = NoiseKind.parse(args.noise)
    lam, s = float(args.lam), float(args.s)
    if not 0.0 <= lam < 1.0 or not 0.0 <= s < 1.0:
        raise UsageError("optimize needs lambda and s in [0, 1)")
    res = optimize_r(kind, lam, s, args.mode)
    record = {
        "noise": kind.value,
        "mode": ProtocolMode.parse(args.mode).value,
        "lambda": lam,
        "s": s,
        "r_star": res.r_star,
        "f_star": res.f_star,
        "iterations": res.iterations,
    }
    if kind is NoiseKind.AMPLITUDE_DAMPING and ProtocolMode.parse(args.mode) is ProtocolMode.DJRSP:
        r_opt = closed_form(ClosedFormId.R_OPT, lam, s)
        f_opt = closed_form(ClosedFormId.FP_AD_OPT, lam, s)
        record |= {
            "r_opt_analytic": r_opt,
            "f_opt_analytic": f_opt,
            "r_diff": res.r_star - r_opt,
            "f_diff": res.f_star - f_opt,
        }
    out = {k: (v if isinstance(v, (int, str)) else _rounded(v)) for k, v in record.items()}
    return emit(json.dumps(out) + "\n", args.out)


def cmd_region(args) -> int:
    lambdas = parse_range(args.lam)
    s_values = parse_range(args.s)
    if np.any(lambdas >= 1.0) or np.any(s_values >= 1.0):
        raise UsageError("region needs lambda and s below 1")
    records = []
    for lam in lambdas:
        for s in s_values:
            reg = analysis.de_improvement_region(lam, s)
            records.append({"lambda": lam, "s": s, "s_bound": reg.s_bound,
                            "improvable": bool(reg.improvable), "delta_f": reg.delta_f})
    return emit(render(records, REGION_COLUMNS, args.format), args.out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="djrsp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *, ranges=True, protocol=True):
        if protocol:
            sp.add_argument("--noise", choices=[k.value for k in NoiseKind], default="ad")
            sp.add_argument("--mode", choices=[m.value for m in ProtocolMode], default="djrsp")
        if ranges:
            sp.add_argument("--lambda", dest="lam", default="0:0.9:10", metavar="START:STOP:STEPS")
            sp.add_argument("--s", default="0:0.9:10", metavar="START:STOP:STEPS")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", default=None, help="output file (default: stdout)")

    sp = sub.add_parser("sweep", help="fidelity and success probability over a (lambda, s) grid")
    common(sp)
    sp.add_argument("--r", default="opt", help="reversal policy: fixed:<v>, opt or eq-s")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="compare the simulator with every closed form")
    sp.add_argument("--density", type=int, default=5)
    sp.add_argument("--noise", choices=[k.value for k in NoiseKind], default=None)
    sp.add_argument("--tol", type=float, default=analysis.VERIFY_TOL)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("optimize", help="best reversal strength at one (lambda, s)")
    common(sp, ranges=False)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("region", help="depolarizing-noise improvement region")
    common(sp, protocol=False)
    sp.set_defaults(func=cmd_region)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"djrsp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
