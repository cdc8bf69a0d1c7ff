"""Command-line front end.

Exit codes: 0 success, 1 validation error (the message names the field),
2 computation error. Options resolve as flag > config file > default and
the resolved options are echoed into every experiment report.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .errors import ComputationError, ValidationError
from .exponents import ExponentProfile, check_smoothness_conditions, critical_order
from .extremal import WaingerParams, coefficient_sum, enumerate_D, make_wainger
from .grid import GridFunction, GridSpec
from .io import load_gridfn, read_json, save_gridfn, write_report
from .operator import apply_direct, apply_via_expansion
from .partitions import make_lp_family, make_uniform_window, verify_partition
from .spaces import (MaximalConfig, besov_blocks, bmo_norm, local_hardy_norm, lp_norm, lq_norm,
                     wiener_amalgam_norm)
from .symbols import symbol_from_config


class CliError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}", "argv")


def _floats(text: str, field: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"--{field} expects comma-separated numbers, got {text!r}", field) from None


def _strs(text: str | None):
    return None if text is None else [v.strip() for v in text.split(",") if v.strip()]


def _grid(text: str | None, default=(1, 2**14, 1.0)) -> GridSpec:
    if text is None:
        return GridSpec(*default)
    parts = text.split(",")
    if len(parts) != 3:
        raise CliError("--grid expects n,points_per_dim,scale", "grid")
    try:
        return GridSpec(int(parts[0]), int(parts[1]), float(parts[2]))
    except ValueError:
        raise CliError(f"--grid could not parse {text!r}", "grid") from None


def _emit(obj) -> None:
    print(json.dumps(ex._jsonable(obj), sort_keys=True))


# --- exponents -------------------------------------------------------------

def _profile(args, cfg: dict) -> ExponentProfile:
    d = dict(cfg.get("profile", cfg))
    for flag, key in (("N", "N"), ("n", "n"), ("p", "p"), ("q", "q"), ("s", "s")):
        v = getattr(args, flag, None)
        if v is not None:
            d[key] = v
    for flag in ("p_j", "q_j", "s_j"):
        v = getattr(args, flag, None)
        if v is not None:
            d[flag] = _strs(v)
    return ExponentProfile.from_dict(d)


def cmd_exponents(args) -> int:
    cfg = read_json(args.config) if args.config else {}
    prof = _profile(args, cfg)
    if args.dry_run:
        _emit({"command": f"exponents {args.action}", "profile": prof.to_dict()})
        return 0
    if args.action == "critical":
        m = critical_order(prof)
        print(float(m) if m.denominator != 1 else int(m))
    else:
        _emit(check_smoothness_conditions(prof).to_dict())
    return 0


# --- norms -----------------------------------------------------------------

def cmd_norm(args) -> int:
    space = args.space
    if space == "lq":
        if args.seq is None:
            raise CliError("--space lq needs --seq", "seq")
        if args.q is None:
            raise CliError("--space lq needs --q", "q")
        if args.dry_run:
            _emit({"space": "lq", "q": args.q, "seq": _floats(args.seq, "seq")})
            return 0
        v = lq_norm(_floats(args.seq, "seq"), args.q)
        print(_num(v))
        return 0
    if args.input is None:
        raise CliError(f"--space {space} needs --input", "input")
    f = load_gridfn(args.input)
    plan = {"space": space, "p": args.p, "q": args.q, "s": args.s, "block": args.block,
            "family": args.family, "K": args.K, "input": args.input}
    if args.dry_run:
        _emit(plan)
        return 0
    need_p = space in ("lp", "besov", "local_hardy", "wiener_amalgam")
    if need_p and args.p is None:
        raise CliError(f"--space {space} needs --p", "p")
    if space in ("besov", "wiener_amalgam") and args.q is None:
        raise CliError(f"--space {space} needs --q", "q")
    if space == "lp":
        print(_num(lp_norm(f, args.p)))
    elif space == "local_hardy":
        print(_num(local_hardy_norm(f, args.p, MaximalConfig())))
    elif space == "bmo":
        print(_num(bmo_norm(f)))
    elif space == "wiener_amalgam":
        print(_num(wiener_amalgam_norm(f, args.p, args.q, args.s or 0, make_uniform_window("kappa_wiener"))))
    else:
        K = args.K
        if K is None:
            K = max(0, int(np.ceil(np.log2(max(f.spec.nyquist, 1.0)))))
        fam = make_lp_family(args.family, K)
        blocks = besov_blocks(f, args.p, args.s or 0, fam, args.block, MaximalConfig())
        v = lq_norm(blocks, args.q)
        print(_num(v))
        _emit({"per_block": blocks, "value": v})
    return 0


def _num(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


# --- windows ---------------------------------------------------------------

FAMILY_KINDS = ("generic_lp", "sharp_lp", "sharp_lp_tilde")
WINDOW_KINDS = ("phi", "phi_tilde", "kappa_wiener")


def _window_object(args):
    if args.kind in FAMILY_KINDS:
        if args.K is None:
            raise CliError(f"--kind {args.kind} needs --K", "K")
        return make_lp_family(args.kind, args.K)
    if args.kind in WINDOW_KINDS:
        return make_uniform_window(args.kind, args.variant)
    raise CliError(f"unknown window kind {args.kind!r}", "kind")


def cmd_windows(args) -> int:
    obj = _window_object(args)
    if args.dry_run:
        _emit({"command": f"windows {args.action}", "kind": args.kind, "variant": args.variant,
               "K": args.K, "n": args.n})
        return 0
    if args.action == "verify":
        tilde = None
        if args.kind == "sharp_lp":
            tilde = make_lp_family("sharp_lp_tilde", args.K)
        rep = verify_partition(obj, n=args.n, tilde=tilde)
        _emit(rep.to_dict())
        return 0
    if args.out is None:
        raise CliError("windows make needs --out (a directory)", "out")
    spec = _grid(args.grid, (args.n, 2**10 if args.n == 1 else 2**6, 1.0))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    windows = obj.windows if args.kind in FAMILY_KINDS else [obj]
    written = []
    for k, w in enumerate(windows):
        g = GridFunction(spec, np.asarray(w(spec.frequencies()), dtype=complex), "frequency")
        path = out / f"{args.kind}_{k}.gridfn"
        save_gridfn(g, path)
        written.append(str(path))
    _emit({"written": written})
    return 0


# --- operator --------------------------------------------------------------

def cmd_op(args) -> int:
    sym_cfg = read_json(args.symbol, "symbol")
    sym = symbol_from_config(sym_cfg)
    if args.dry_run:
        _emit({"command": "op apply", "symbol": sym_cfg, "inputs": args.inputs, "method": args.method,
               "radius": args.radius, "order": args.order})
        return 0
    fs = [load_gridfn(p) for p in args.inputs]
    if args.method == "direct":
        g = apply_direct(sym, fs)
    else:
        g = apply_via_expansion(sym, fs, radius=args.radius, order=args.order)
    if args.out:
        save_gridfn(g, args.out)
    _emit({"method": args.method, "max_abs": float(np.abs(g.values()).max()),
           "out": args.out})
    return 0


# --- extremal --------------------------------------------------------------

def cmd_extremal(args) -> int:
    if args.action == "wainger":
        spec = _grid(args.grid)
        for key in ("a", "b"):
            if getattr(args, key) is None:
                raise CliError(f"extremal wainger needs --{key}", key)
        vmax = args.vmax if args.vmax is not None else float(np.floor(spec.nyquist / 2))
        wp = WaingerParams(args.a, args.b, args.eps, vmax, args.p or "2", spec.n)
        if args.dry_run:
            _emit({"params": wp.__dict__, "threshold": wp.threshold, "grid": spec.to_dict()})
            return 0
        f = make_wainger(wp, spec, None, args.cutoff)
        if args.out:
            save_gridfn(f, args.out)
        _emit({"threshold": wp.threshold, "above_threshold": wp.above_threshold,
               "lp_norm": lp_norm(f, wp.p), "out": args.out})
        return 0
    for key in ("variant", "ell"):
        if getattr(args, key) is None:
            raise CliError(f"extremal {args.action} needs --{key}", key)
    if args.dry_run:
        _emit({"command": f"extremal {args.action}", "variant": args.variant, "ell": args.ell,
               "delta": args.delta, "L": args.L, "N": args.N, "n": args.n})
        return 0
    D = enumerate_D(args.variant, args.ell, args.delta, args.L, args.N, args.n)
    if args.action == "enumerate":
        text = D.to_csv()
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            _emit({"members": len(D), "L": D.L, "out": args.out})
        else:
            sys.stdout.write(text)
        return 0
    if args.m is None or args.b is None:
        raise CliError("extremal sum needs --m and --b", "m" if args.m is None else "b")
    b = _floats(args.b, "b")
    if args.mode == "total":
        print(repr(float(coefficient_sum(D, args.m, b, args.eps, "total"))))
    else:
        nus, d = coefficient_sum(D, args.m, b, args.eps, "per_nu")
        _emit({"nu": nus.tolist(), "re": d.real.tolist(), "im": d.imag.tolist(),
               "l2": float(np.sqrt(np.sum(np.abs(d) ** 2)))})
    return 0


# --- experiments -----------------------------------------------------------

RUNNERS = {
    "sharpness-s": ex.run_sharpness_s,
    "sharpness-sj": ex.run_sharpness_sj,
    "keyprop": ex.run_keyprop_ratio,
    "band-decay": ex.run_band_decay,
    "embeddings": ex.run_embedding_suite,
    "wainger-threshold": ex.run_wainger_threshold,
}

# config keys that take an object rather than a plain value
_SPECIAL = {"profile", "sym"}


def resolve_experiment(name: str, cfg: dict, flags: dict) -> dict:
    """Merge defaults, config file and flags (flag > config > default); unknown keys are rejected."""
    fn = RUNNERS[name]
    sig = inspect.signature(fn)
    allowed = set(sig.parameters) - {"sym"}
    unknown = set(cfg) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ValidationError(f"unknown config key {key!r} for experiment {name}", key)
    resolved = {k: p.default for k, p in sig.parameters.items() if k in allowed}
    resolved.update(cfg)
    for k, v in flags.items():
        if v is None:
            continue
        if k not in allowed:
            raise ValidationError(f"--{k.replace('_', '-')} does not apply to experiment {name}", k)
        resolved[k] = v
    return resolved


def _call_kwargs(resolved: dict) -> dict:
    kw = dict(resolved)
    if kw.get("profile") is not None and isinstance(kw["profile"], dict):
        kw["profile"] = ExponentProfile.from_dict(kw["profile"])
    for k, v in list(kw.items()):
        if isinstance(v, list) and k not in ("a", "b", "khintchine_p", "p_values", "ps"):
            kw[k] = tuple(v)
    return kw


def cmd_experiment(args) -> int:
    cfg = read_json(args.config) if args.config else {}
    flags = {"seed": args.seed, "jobs": args.jobs}
    if args.mode is not None:
        flags["mode"] = args.mode
    if args.ell_range is not None:
        lo, hi = (int(v) for v in _floats(args.ell_range, "ell-range"))
        flags["ell_range"] = (lo, hi)
    resolved = resolve_experiment(args.name, cfg, flags)
    if args.dry_run:
        _emit({"experiment": args.name, "resolved": resolved, "out": args.out})
        return 0
    report = RUNNERS[args.name](**_call_kwargs(resolved))
    report.parameters["resolved_config"] = ex._jsonable(resolved)
    if args.out:
        write_report(report, args.out)
    else:
        sys.stdout.write(report.to_csv())
    print(f"{report.name}: {report.verdict} (fitted slope {report.fitted_slope}, "
          f"theory {report.theory_slope})", file=sys.stderr)
    return 0


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--dry-run", action="store_true", help="validate and print the plan only")
    common.add_argument("--jobs", type=int, default=None, help="worker threads")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="output path")

    p = _Parser(prog="multipdo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    e = sub.add_parser("exponents", parents=[common], help="critical order and smoothness conditions")
    e.add_argument("action", choices=["critical", "check"])
    e.add_argument("--N", type=int)
    e.add_argument("--n", type=int)
    e.add_argument("--p")
    e.add_argument("--p-j", dest="p_j", help="comma-separated")
    e.add_argument("--q")
    e.add_argument("--q-j", dest="q_j")
    e.add_argument("--s")
    e.add_argument("--s-j", dest="s_j")
    e.set_defaults(func=cmd_exponents)

    nrm = sub.add_parser("norm", parents=[common], help="evaluate a sequence or function norm")
    nrm.add_argument("--space", required=True,
                     choices=["lq", "lp", "besov", "local_hardy", "bmo", "wiener_amalgam"])
    nrm.add_argument("--p")
    nrm.add_argument("--q")
    nrm.add_argument("--s")
    nrm.add_argument("--seq", help="comma-separated sequence for --space lq")
    nrm.add_argument("--input", help="gridfn file")
    nrm.add_argument("--block", choices=["lp", "hp"], default="lp")
    nrm.add_argument("--family", choices=["generic_lp", "sharp_lp"], default="generic_lp")
    nrm.add_argument("--K", type=int)
    nrm.set_defaults(func=cmd_norm)

    w = sub.add_parser("windows", parents=[common], help="build or verify window families")
    w.add_argument("action", choices=["make", "verify"])
    w.add_argument("--kind", required=True, choices=list(FAMILY_KINDS + WINDOW_KINDS))
    w.add_argument("--variant", choices=["s3", "s4"], default="s3")
    w.add_argument("--K", type=int)
    w.add_argument("--n", type=int, default=1)
    w.add_argument("--grid", help="n,points_per_dim,scale")
    w.set_defaults(func=cmd_windows)

    o = sub.add_parser("op", parents=[common], help="apply a multilinear operator")
    o.add_argument("action", choices=["apply"])
    o.add_argument("--symbol", required=True, help="symbol JSON")
    o.add_argument("--inputs", required=True, nargs="+")
    o.add_argument("--method", choices=["direct", "expansion"], default="direct")
    o.add_argument("--radius", type=int, default=64)
    o.add_argument("--order", type=int, default=0)
    o.set_defaults(func=cmd_op)

    x = sub.add_parser("extremal", parents=[common], help="extremal constructions")
    x.add_argument("action", choices=["wainger", "enumerate", "sum"])
    x.add_argument("--a", type=float)
    x.add_argument("--b", help="float for wainger, comma list for sum")
    x.add_argument("--eps", type=float, default=0.0)
    x.add_argument("--vmax", type=float)
    x.add_argument("--p")
    x.add_argument("--grid")
    x.add_argument("--cutoff", choices=["space", "frequency"], default="space")
    x.add_argument("--variant", choices=["nec1", "nec2"])
    x.add_argument("--ell", type=int)
    x.add_argument("--delta", type=float, default=0.5)
    x.add_argument("--L", type=int)
    x.add_argument("--N", type=int, default=2)
    x.add_argument("--n", type=int, default=1)
    x.add_argument("--m", type=float)
    x.add_argument("--mode", choices=["total", "per_nu"], default="total")
    x.set_defaults(func=cmd_extremal)

    r = sub.add_parser("experiment", parents=[common], help="run a numerical experiment")
    r.add_argument("name", choices=sorted(RUNNERS))
    r.add_argument("--mode")
    r.add_argument("--ell-range", dest="ell_range", help="lo,hi")
    r.set_defaults(func=cmd_experiment)
    return p


def _fix_wainger_b(args):
    if getattr(args, "command", None) == "extremal" and args.action == "wainger" and args.b is not None:
        try:
            args.b = float(args.b)
        except ValueError:
            raise CliError("--b must be a number for extremal wainger", "b") from None


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _fix_wainger_b(args)
        return args.func(args)
    except ValidationError as exc:
        field = getattr(exc, "field", None)
        tag = f" [field: {field}]" if field and field != "argv" else ""
        print(f"error: {exc}{tag}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
