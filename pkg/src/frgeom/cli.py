"""Command-line interface: geometry, enumeration, volumes, densities, cancellation, verification."""
from __future__ import annotations

import argparse
import io
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import acceptance, densities, kernels, pants_geom, sl2_words, wp_volumes
from .fr_core import FitError, IntegrationError

EXIT_OK = 0
EXIT_CHECK = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4
EXIT_TABLE = 5
EXIT_OUTPUT = 6

# keys a config file may set, with their types and fallback values
CONFIG_KEYS: dict[str, tuple[type, Any]] = {
    "table": (str, None),
    "output": (str, None),
    "workers": (int, 1),
    "seed": (int, 0),
    "samples": (int, 200),
    "max_length": (float, 6.0),
    "word_cap": (int, 12),
    "lo": (float, 6.0),
    "hi": (float, 40.0),
    "step": (float, 0.5),
    "degree_cap": (int, 1),
    "tol": (float, 1e-10),
}


class InputError(Exception):
    pass


class OutputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    subcommand: str
    params: dict[str, Any] = field(default_factory=dict)
    table: str | None = None
    output: str | None = None
    workers: int = 1
    seed: int = 0
    tol: float = 1e-10

    def __post_init__(self):
        if self.workers < 1:
            raise InputError("workers must be >= 1")
        if not self.tol > 0:
            raise InputError("tolerances must be positive")


def read_config(path: str | os.PathLike) -> dict[str, Any]:
    """Parse `key = value` lines; `#` starts a comment."""
    out: dict[str, Any] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise InputError(f"{path}:{lineno}: unknown key {key!r}")
        typ = CONFIG_KEYS[key][0]
        try:
            out[key] = typ(val)
        except ValueError:
            raise InputError(f"{path}:{lineno}: bad value for {key}: {val!r}") from None
    return out


# ---------------------------------------------------------------- output helpers

def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]], meta: Sequence[str] = (),
             trailing: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for m in meta:
        buf.write(f"# {m}\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    for m in trailing:
        buf.write(f"# {m}\n")
    return buf.getvalue()


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        try:
            Path(cfg.output).write_text(text)
        except OSError as exc:
            raise OutputError(f"cannot write {cfg.output}: {exc}") from None
    else:
        sys.stdout.write(text)


def _table(cfg: RunConfig) -> wp_volumes.VolumeTable:
    return wp_volumes.load_table(cfg.table) if cfg.table else wp_volumes.default_table()


# ---------------------------------------------------------------- subcommands

def _cmd_geom(cfg: RunConfig) -> int:
    p = cfg.params
    op = p["op"]
    j = p.get("j", 1)
    if op == "fig8":
        print(f"{pants_geom.fig8_length(pants_geom.BoundaryLengths(*p['values'])):.5f}")
    elif op == "iterated":
        print(f"{pants_geom.iterated_length(pants_geom.BoundaryLengths(*p['values']), j):.10f}")
    elif op == "to-boundary":
        b = pants_geom.coords_to_boundary(pants_geom.ConvCoords(*p["values"]), j)
        print(",".join(repr(x) for x in b.as_tuple()))
    elif op == "to-coords":
        c = pants_geom.boundary_to_coords(pants_geom.BoundaryLengths(*p["values"]), j)
        print(",".join(repr(x) for x in (c.L1, c.L2, c.u)))
    elif op == "jacobian":
        print(repr(pants_geom.jacobian(pants_geom.ConvCoords(*p["values"]), j)))
    elif op == "domain":
        d = pants_geom.domain_params(*p["values"])
        print(f"u_minus={d.u_minus!r}\nu_plus={d.u_plus!r}\nL_minus_inf={d.L_minus_inf!r}\n"
              f"L_minus={d.L_minus!r}\ninside={d.inside}")
    elif op == "sweep":
        rng = np.random.default_rng(cfg.seed)
        rows = []
        for _ in range(p["samples"]):
            b = pants_geom.BoundaryLengths(*map(float, rng.uniform(0.5, 6.0, 3)))
            val = pants_geom.fig8_length(b)
            oracle = sl2_words.build_pants_rep(b).word_length((sl2_words.A, sl2_words.B_INV))
            rows.append((b.l1, b.l2, b.l3, val, abs(val - oracle)))
        _emit(csv_text(["l1", "l2", "l3", "fig8_length", "check_residual"], rows,
                       [f"seed={cfg.seed}", f"samples={p['samples']}"]), cfg)
    return EXIT_OK


def _cmd_enumerate(cfg: RunConfig) -> int:
    p = cfg.params
    b = pants_geom.BoundaryLengths(*p["lengths"])
    rep = sl2_words.build_pants_rep(b)
    cap = p["word_cap"]
    classes = sl2_words.enumerate_geodesics(rep, cap, p["max_length"], primitive_only=p["primitive"],
                                            cap=max(cap, sl2_words.DEFAULT_WORD_CAP))
    rows = [(g.word_str, g.length, g.tag, str(g.primitive).lower()) for g in classes]
    n_prim = sum(1 for g in classes if g.primitive)
    meta = [f"boundary={b.l1!r},{b.l2!r},{b.l3!r}", f"max_length={p['max_length']!r}", f"word_cap={cap}",
            f"primitive_count={n_prim}", f"counting_bound={sl2_words.counting_bound(p['max_length'])!r}"]
    _emit(csv_text(["word", "length", "type", "primitive"], rows, meta), cfg)
    return EXIT_OK


def _cmd_volumes(cfg: RunConfig) -> int:
    p = cfg.params
    action = p["action"]
    if action == "schedule":
        s = wp_volumes.table_values_schedule(p["K"])
        print(f"L_multiplier = {s['L_multiplier']} log g")
        print(f"alpha = {s['alpha']}")
        print(f"gap = {s['gap']}")
        return EXIT_OK
    table = _table(cfg)
    if action == "list":
        rows = [(g, n, table[(g, n)].degree, table.provenance[(g, n)]) for g, n in table.signatures()]
        _emit(csv_text(["g", "n", "degree", "source"], rows), cfg)
        return EXIT_OK
    if action == "eval":
        g, n = p["g"], p["n"]
        x = p["x"] or [0.0] * n
        print(repr(wp_volumes.volume(g, n, x, table)))
        return EXIT_OK
    # check
    rows, ok = [], True
    for g, n in table.signatures():
        r = wp_volumes.bound_checks(g, n, table, samples=p["samples"], seed=cfg.seed)
        ok &= r.ok
        rows.append((g, n, r.samples, r.worst_poly_ratio, r.worst_exp_ratio, "pass" if r.ok else "fail"))
    _emit(csv_text(["g", "n", "samples", "worst_poly_ratio", "worst_exp_ratio", "status"], rows,
                   [f"seed={cfg.seed}"]), cfg)
    return EXIT_OK if ok else EXIT_CHECK


def _cmd_density(cfg: RunConfig) -> int:
    p = cfg.params
    if p["kind"] == "phi-simple":
        table = _table(cfg)
        rows = [(x, densities.phi_simple(x, p["g"], table), densities.simple_leading(x)) for x in p["x"]]
        _emit(csv_text(["x", "phi_simple", "leading"], rows, [f"g={p['g']}"]), cfg)
        return EXIT_OK
    lo, hi, step = p["lo"], p["hi"], p["step"]
    grid = np.round(np.arange(lo, hi + 0.5 * step, step), 12)
    curve, rep = densities.fig8_density_order1(grid, p["degree_cap"], workers=cfg.workers)
    rows = []
    for x, v in zip(curve.ell, curve.values):
        resid = v - rep.fitted_principal(x) * math.exp(x)
        rows.append((x, v, curve.method, resid))
    meta = [f"density=fig8 order=1 lo={lo!r} hi={hi!r} step={step!r}"]
    _emit(csv_text(["ell", "value", "method", "residual"], rows, meta, rep.to_text().splitlines()), cfg)
    return EXIT_OK if rep.max_violation == 0.0 else EXIT_CHECK


def _cmd_cancel(cfg: RunConfig) -> int:
    p = cfg.params
    f = lambda x: 4.0 * math.sinh(x / 2) ** 2  # noqa: E731
    rows = []
    for m in p["m"]:
        for L in p["L"]:
            v = kernels.cancellation_integral(f, m, kernels.make_kernel(L), cfg.tol)
            rows.append((L, m, v, v / math.exp(L / 2)))
    _emit(csv_text(["L", "m", "value", "value_over_exp_half_L"], rows, ["f=4sinh^2(l/2)"]), cfg)
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    try:
        results = acceptance.run_suite(cfg.params["suite"])
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", cfg)
    return EXIT_OK if n_pass == len(results) else EXIT_CHECK


COMMANDS = {
    "geom": _cmd_geom,
    "enumerate": _cmd_enumerate,
    "volumes": _cmd_volumes,
    "density": _cmd_density,
    "cancel": _cmd_cancel,
    "verify": _cmd_verify,
}


def run(cfg: RunConfig) -> int:
    if cfg.subcommand not in COMMANDS:
        raise InputError(f"unknown subcommand {cfg.subcommand!r}")
    return COMMANDS[cfg.subcommand](cfg)


# ---------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="frgeom", description=__doc__)
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--table", default=None, help=f"volume table file (default ${wp_volumes.TABLE_ENV} or bundled)")
    ap.add_argument("--output", "-o", default=None, help="write CSV/report here instead of stdout")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--tol", type=float, default=None)
    sub = ap.add_subparsers(dest="subcommand", parser_class=_Parser)

    g = sub.add_parser("geom", help="pants geometry")
    g.add_argument("op", choices=["fig8", "iterated", "to-boundary", "to-coords", "jacobian", "domain", "sweep"])
    g.add_argument("values", nargs="*", type=float)
    g.add_argument("--j", type=int, default=1)
    g.add_argument("--samples", type=int, default=None)

    e = sub.add_parser("enumerate", help="closed geodesics on a pair of pants")
    e.add_argument("lengths", nargs=3, type=float)
    e.add_argument("--max-length", type=float, default=None)
    e.add_argument("--word-cap", type=int, default=None)
    e.add_argument("--primitive", action="store_true")

    v = sub.add_parser("volumes", help="Weil-Petersson volumes")
    v.add_argument("action", choices=["eval", "check", "list", "schedule"])
    v.add_argument("--g", type=int, default=1)
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--x", type=float, nargs="*", default=None)
    v.add_argument("--K", type=int, default=0)
    v.add_argument("--samples", type=int, default=None)

    d = sub.add_parser("density", help="densities and level-set integrals")
    d.add_argument("kind", choices=["fig8", "phi-simple"])
    d.add_argument("--lo", type=float, default=None)
    d.add_argument("--hi", type=float, default=None)
    d.add_argument("--step", type=float, default=None)
    d.add_argument("--degree-cap", type=int, default=None)
    d.add_argument("--g", type=int, default=3)
    d.add_argument("--x", type=float, nargs="*", default=[1.0])

    c = sub.add_parser("cancel", help="cancellation integrals against D^m h_L")
    c.add_argument("--m", type=int, nargs="+", default=[0, 1])
    c.add_argument("--L", type=float, nargs="+", default=[10.0, 20.0, 30.0, 40.0])

    s = sub.add_parser("verify", help="bundled verification suites")
    s.add_argument("--suite", default="acceptance", help=", ".join(acceptance.SUITES))
    return ap


def _resolve(args: argparse.Namespace) -> RunConfig:
    file_cfg = read_config(args.config) if args.config else {}

    def pick(key: str):
        val = getattr(args, key, None)
        if val is not None:
            return val
        if key in file_cfg:
            return file_cfg[key]
        return CONFIG_KEYS[key][1]

    params = {k: v for k, v in vars(args).items()
              if k not in ("config", "table", "output", "workers", "seed", "tol", "subcommand")}
    for k in list(params):
        if k in CONFIG_KEYS and params[k] is None:
            params[k] = pick(k)
    cmd = args.subcommand
    if cmd == "geom":
        need = {"fig8": 3, "iterated": 3, "to-boundary": 3, "to-coords": 3, "jacobian": 3, "domain": 2, "sweep": 0}
        if len(params["values"]) != need[params["op"]]:
            raise InputError(f"geom {params['op']} takes {need[params['op']]} numbers")
    return RunConfig(cmd, params, pick("table"), pick("output"), pick("workers"), pick("seed"), pick("tol"))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        return run(_resolve(args))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except wp_volumes.TableError as exc:
        print(f"table error: {exc}", file=sys.stderr)
        return EXIT_TABLE
    except wp_volumes.MissingVolumeError as exc:
        print(f"table error: {exc.args[0]}", file=sys.stderr)
        return EXIT_TABLE
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (IntegrationError, densities.LevelSetIntegrationError, FitError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, pants_geom.DomainError, kernels.KernelDomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
