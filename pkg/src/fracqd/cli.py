"""Command-line interface.

Exit codes: 0 success, 1 acceptance checks failed (``verify`` only),
2 configuration error, 3 numerical failure, 4 I/O error. On failure the
first line on stderr is a JSON object (``error``, ``exit``, ``message`` and,
for configuration errors, ``key``/``line``) followed by a readable line.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from fracqd import io, mlf, verify
from fracqd.config import ScenarioConfig, _validate, parse_config
from fracqd.errors import ConfigError, FracqdError, NumericalError, ValidationError
from fracqd.runner import run_scenario

__all__ = ["main"]

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3, 4


def _common(parser: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="scenario file (key = value)")
    parser.add_argument("--out", default=d, help="output directory (overrides output_dir)")
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="print nothing on success")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracqd", description="Fractional-time quantum dynamics scenarios.")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mlf", help="Mittag-Leffler evaluation")
    _common(m, True)
    m.add_argument("action", nargs="?", choices=["eval"], help="evaluate one point and print JSON")
    m.add_argument("--alpha", type=float)
    m.add_argument("--re", type=float, default=0.0)
    m.add_argument("--im", type=float, default=0.0)
    m.add_argument("--tol", type=float, default=1e-12)

    e = sub.add_parser("evolve", help="wave-function evolution")
    _common(e, True)
    e.add_argument("method", choices=["spectral", "caputo", "comb", "operator-form"])
    e.add_argument("--hamiltonian", help="scenario file supplying the Hamiltonian and grid")
    e.add_argument("--alpha", type=float)
    e.add_argument("--dt", type=float)
    e.add_argument("--t-end", type=float)
    e.add_argument("--t", type=float, help="single output time")

    po = sub.add_parser("poles", help="pole comparison of the comb and fse kernels")
    _common(po, True)
    po.add_argument("--hamiltonian", help="scenario file supplying the Hamiltonian and grid")

    h = sub.add_parser("hyperbolic", help="dilation-Hamiltonian moments")
    _common(h, True)
    h.add_argument("--mode", choices=["standard", "semiclassical"])
    h.add_argument("--profile", choices=["gaussian", "gaussian_normalized", "hermite_gaussian"])
    h.add_argument("--hbar", type=float)
    h.add_argument("--omega", type=float, help="dilation frequency (default: tied to hbar, 1/(2 hbar))")
    h.add_argument("--t-grid", help="'start:stop:count' or a comma-separated list")

    v = sub.add_parser("verify", help="run the built-in acceptance checks")
    _common(v, True)
    return p


def _t_grid(text: str):
    if ":" in text:
        a, b, n = text.split(":")
        return tuple(float(x) for x in np.linspace(float(a), float(b), int(n)))
    return tuple(float(x) for x in text.split(","))


def _load(path) -> tuple[ScenarioConfig | None, str | None]:
    if path is None:
        return None, None
    text = Path(path).read_text()
    return parse_config(text), text


def _with(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    new = dataclasses.replace(cfg, **changes)
    _validate(new, {})
    return new


def _base(args, module: str) -> ScenarioConfig:
    path = getattr(args, "hamiltonian", None) or args.config
    if path is not None:
        cfg, _ = _load(path)
        # the file may describe a different scenario kind; only the module
        # is forced here, everything else is taken from it
        return dataclasses.replace(cfg, module=module)
    return ScenarioConfig(module=module)


def _run(cfg: ScenarioConfig, args) -> int:
    report = run_scenario(cfg, args.out)
    if not args.quiet:
        for f in report.files:
            print(f)
        for w in report.warnings:
            print(f"warning: {w}")
    return EXIT_OK


def _cmd_mlf(args) -> int:
    if args.action == "eval":
        if args.alpha is None:
            raise ValidationError("alpha", "--alpha is required for 'mlf eval'")
        try:
            rep = mlf.mittag_leffler(args.alpha, complex(args.re, args.im), tol=args.tol)
        except ValueError as exc:
            raise ValidationError("alpha", str(exc)) from None
        print(json.dumps({
            "alpha": args.alpha, "z_re": args.re, "z_im": args.im,
            "value_re": rep.value.real, "value_im": rep.value.imag,
            "method": rep.method_used, "est_abs_error": rep.est_abs_error,
        }))
        return EXIT_OK
    if args.config is None:
        raise ValidationError("config", "'mlf' without 'eval' needs --config")
    cfg = _with(_base(args, "mlf"), alpha=args.alpha)
    return _run(cfg, args)


_METHODS = {"spectral": "fse_spectral", "caputo": "fse_caputo", "comb": "comb", "operator-form": "fse_operator"}


def _cmd_evolve(args) -> int:
    cfg = _base(args, _METHODS[args.method])
    times = None
    if args.t is not None:
        times = (args.t,)
    elif args.t_end is not None:
        times = cfg.times if cfg.times and cfg.times[-1] == args.t_end else (args.t_end,)
    return _run(_with(cfg, alpha=args.alpha, dt=args.dt, times=times), args)


def _cmd_poles(args) -> int:
    return _run(_with(_base(args, "poles")), args)


def _cmd_hyperbolic(args) -> int:
    cfg = _base(args, "hyperbolic")
    if cfg.profile == "eigenmode" and args.profile is None:
        cfg = dataclasses.replace(cfg, profile="gaussian", x_min=-6.0, x_max=6.0)
    try:
        times = _t_grid(args.t_grid) if args.t_grid else None
    except ValueError:
        raise ValidationError("t_grid", f"cannot read {args.t_grid!r}") from None
    cfg = _with(cfg, mode=args.mode, profile=args.profile, hbar=args.hbar, omega=args.omega, times=times)
    return _run(cfg, args)


def _cmd_verify(args) -> int:
    out = Path(args.out or "verify_out")
    out.mkdir(parents=True, exist_ok=True)
    checks = verify.run_all()
    path = io.write_csv(out / "verify.csv", ["criterion", "check", "value", "relation", "threshold", "passed"],
                        [(c.criterion, c.name, c.value, c.relation, c.threshold, c.passed) for c in checks])
    io.write_manifest(out / "manifest.json", {
        "outputs": [path.name],
        "passed": sum(c.passed for c in checks),
        "failed": [f"{c.criterion}:{c.name}" for c in checks if not c.passed],
    })
    if not args.quiet:
        for c in checks:
            tag = "PASS" if c.passed else "FAIL"
            print(f"{tag} criterion {c.criterion} {c.name}: {c.value:.6g} ({c.relation} {c.threshold:g})")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECKS


def _fail(code: int, exc: BaseException, **extra) -> int:
    payload = {"error": type(exc).__name__, "exit": code, "message": str(exc), **extra}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    print(f"fracqd: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"mlf": _cmd_mlf, "evolve": _cmd_evolve, "poles": _cmd_poles,
                "hyperbolic": _cmd_hyperbolic, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc, key=getattr(exc, "key", None), line=getattr(exc, "line", None))
    except (NumericalError, FracqdError) as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)


if __name__ == "__main__":
    sys.exit(main())
