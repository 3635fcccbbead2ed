"""Command-line front end.

``swanson-forge verify --model morse --param a=3 --param b=1 --alpha 0.05 --beta 0.1``
writes ``report.json`` and ``spectra.csv`` under ``--out``; exit status is 0
when every check passes, 1 when one fails and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import eigenfunctions as ef
from . import verify
from .catalog import ModelId, bound_state_count, closed_spectrum, model_def, partner_native
from .config import FORMATS, ConfigError, RunConfig, config_from_dict, load_config
from .errors import SwansonError

CSV_COLUMNS = ("n", "eps_minus_closed", "eps_minus_numeric", "eps_plus_numeric", "abs_err", "mixed_err")
SVG_SALT = "swanson-forge"
PLOT_POINTS = 801


class UsageError(SwansonError):
    """Malformed command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- config assembly ---------------------------------------------------------------
def _split_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise UsageError(f"--param expects NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise UsageError(f"--param {name.strip()}: {value!r} is not a number") from None


def _parse_window(text: str) -> tuple[float, float]:
    parts = _split_list(text)
    if len(parts) != 2:
        raise UsageError(f"--window expects LO,HI, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"--window expects two numbers, got {text!r}") from None


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge an optional config file with command-line flags (flags win)."""
    data = load_config(args.config) if args.config else {}
    if args.model is not None:
        data["model"] = args.model
    params = dict(data.get("params") or {})
    for item in args.param or []:
        name, value = _parse_param(item)
        params[name] = value
    data["params"] = params
    for key in ("alpha", "beta", "grid_n", "nmax"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.window is not None:
        data["window"] = _parse_window(args.window)
    if args.checks is not None:
        data["checks"] = "all" if args.checks.strip() == "all" else _split_list(args.checks)
    if args.out is not None:
        data["out_dir"] = args.out
    if args.format is not None:
        data["formats"] = _split_list(args.format)
    if "model" not in data:
        raise ConfigError("no model given; use --model or a config file")
    return config_from_dict(data)


# -- serialization -------------------------------------------------------------------
def _plain(value):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, complex):
        return {"re": _plain(value.real), "im": _plain(value.imag)}
    return value


def report_json(report: verify.Report) -> str:
    return json.dumps(_plain(report.to_dict()), indent=2, sort_keys=True, allow_nan=False) + "\n"


def spectra_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(["" if row[c] is None else repr(row[c]) if isinstance(row[c], float) else row[c]
                         for c in CSV_COLUMNS])
    return buf.getvalue()


# -- plots -----------------------------------------------------------------------------
def _plot_context(config: RunConfig):
    ctx = verify.build_context(config)
    top = verify.top_level(ctx.spec, ctx.partner, config.nmax)
    window = ctx.window or verify.focus_window(ctx.spec, ctx.partner, range(top + 1),
                                               verify.WAVEFUNCTION_WIDTH, ctx.eigen_window())
    lo, hi = window
    pad = 1e-3 * (hi - lo)
    xs = np.linspace(lo + pad, hi - pad, PLOT_POINTS)
    return ctx, top, xs


def write_plots(config: RunConfig, out_dir: Path) -> list[Path]:
    """``potentials.svg`` and ``wavefunctions.svg``; byte-identical for a fixed config."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ctx, top, xs = _plot_context(config)
    spec, partner, pair = ctx.spec, ctx.partner, ctx.pair
    levels = [closed_spectrum(spec, partner, n) for n in range(top + 1)]
    title = f"{spec.id.value}  alpha={spec.couple.alpha:g}  beta={spec.couple.beta:g}"
    written = []
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        vm, vp = pair.v_minus(xs), pair.v_plus(xs)
        ax.plot(xs, vm, label="V-", gid="v-minus")
        ax.plot(xs, vp, label="V+", gid="v-plus")
        for n, e in enumerate(levels):
            ax.axhline(e, color="0.4", lw=0.8, ls="--", gid=f"level-{n}")
        span = max(levels) - min(min(levels), float(np.min(vm)))
        ax.set_ylim(min(float(np.min(vm)), float(np.min(vp)), min(levels)) - 0.1 * span - 0.5,
                    max(levels) + 0.6 * span + 1.0)
        ax.set_xlabel("x")
        ax.set_title(title)
        ax.legend(loc="upper right")
        path = out_dir / "potentials.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)

        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for n in range(top + 1):
            psi = ef.remove_global_phase(ef.waveform(spec, partner, n, xs))
            ax.plot(xs, psi.real, label=f"psi_{n}", gid=f"psi-{n}")
        ax.set_xlabel("x")
        ax.set_title(title)
        ax.legend(loc="upper right")
        path = out_dir / "wavefunctions.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


# -- commands --------------------------------------------------------------------------
def cmd_list(args=None, out=None) -> int:
    out = out or sys.stdout
    for model in ModelId:
        d = model_def(model)
        out.write(f"{model.value:20s} params: {', '.join(d.param_names):14s} constraints: {d.constraints}\n")
    return 0


def _maybe_dump(args, config: RunConfig, out) -> bool:
    if args.dump_config is None:
        return False
    if args.dump_config == "-":
        out.write(config.to_json())
    else:
        Path(args.dump_config).write_text(config.to_json())
    return True


def cmd_verify(args, out=None) -> int:
    out = out or sys.stdout
    config = resolve_config(args)
    if _maybe_dump(args, config, out):
        return 0
    report = verify.run_all(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if "json" in config.formats:
        (out_dir / "report.json").write_text(report_json(report))
    if "csv" in config.formats:
        (out_dir / "spectra.csv").write_text(spectra_csv(report.spectra))
    if "svg" in config.formats and report.input_error is None:
        write_plots(config, out_dir)
    if report.input_error is not None:
        raise ConfigError(f'{report.input_error["error"]}: {report.input_error["message"]}')
    for c in report.checks:
        out.write(f"{'PASS' if c.passed else 'FAIL'}  {c.name:28s} {c.metric:.3e}  (tol {c.tolerance:.0e})\n")
    flagged = [f["name"] for f in report.findings if f["flagged"]]
    if flagged:
        out.write(f"findings: {', '.join(sorted(set(flagged)))}\n")
    out.write(f"overall: {'PASS' if report.passed else 'FAIL'}\n")
    return 0 if report.passed else 1


def cmd_plot(args, out=None) -> int:
    out = out or sys.stdout
    config = resolve_config(args)
    if _maybe_dump(args, config, out):
        return 0
    if "svg" not in config.formats:
        config = config_from_dict({**config.to_dict(), "formats": list(config.formats) + ["svg"]})
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in write_plots(config, out_dir):
        out.write(f"{path}\n")
    return 0


def cmd_solve(args, out=None) -> int:
    out = out or sys.stdout
    config = resolve_config(args)
    if _maybe_dump(args, config, out):
        return 0
    ctx = verify.build_context(config)
    derived = verify.derived_block(ctx)
    derived["model"] = ctx.spec.id.value
    out.write(json.dumps(_plain(derived), indent=2, sort_keys=True, allow_nan=False) + "\n")
    return 0


def cmd_spectrum(args, out=None) -> int:
    """Closed-form levels of both sectors, ``E = s * eps`` alongside."""
    out = out or sys.stdout
    config = resolve_config(args)
    if _maybe_dump(args, config, out):
        return 0
    ctx = verify.build_context(config)
    spec, partner = ctx.spec, ctx.partner
    count = bound_state_count(spec, partner)
    top = verify.top_level(spec, partner, config.nmax)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("n", "eps_minus", "eps_plus", "E_minus"))
    for n in range(top + 1):
        eps_plus = repr(closed_spectrum(spec, partner, n, "plus")) if n + 1 < count else ""
        eps = closed_spectrum(spec, partner, n)
        writer.writerow((n, repr(eps), eps_plus, repr(spec.couple.s * eps)))
    a1, b1 = partner_native(spec, partner)
    out.write(f"# partner {dict(zip(spec.definition.param_names, (a1, b1)))}\n")
    return 0


COMMANDS = {"list": cmd_list, "verify": cmd_verify, "plot": cmd_plot, "solve": cmd_solve, "spectrum": cmd_spectrum}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", help="model id (see 'list')")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--param", action="append", metavar="NAME=VALUE", help="native parameter, repeatable")
    common.add_argument("--grid-n", dest="grid_n", type=int, help="grid points (default 2000 symmetric, 1000 general)")
    common.add_argument("--window", metavar="LO,HI")
    common.add_argument("--checks", metavar="LIST", help="comma list of check names or 'all'")
    common.add_argument("--nmax", type=int)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--format", metavar="LIST", help=f"comma subset of {','.join(FORMATS)}")
    common.add_argument("--config", metavar="FILE", help="flat JSON config; flags override it")
    common.add_argument("--dump-config", dest="dump_config", nargs="?", const="-", metavar="FILE",
                        help="write the resolved config (stdout by default) and exit")

    parser = _Parser(prog="swanson-forge", description="Pseudo-supersymmetric partners of the generalized Swanson model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list", help="list models, parameters and constraints")
    for name, text in (("verify", "run the verification checks and write reports"),
                       ("plot", "write potentials.svg and wavefunctions.svg"),
                       ("solve", "print partner parameters and offsets"),
                       ("spectrum", "print closed-form levels")):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except SwansonError as exc:
        message = " ".join(str(exc).split())
        sys.stderr.write(f"swanson-forge: error: {type(exc).__name__}: {message}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
