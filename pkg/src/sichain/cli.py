"""Command-line front end: ``sichain {analyze,spectrum,simulate,fit,cesaro,verify}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, acceptance, models
from .errors import SichainError
from .semigroup import (
    cesaro_norms,
    decay_curves,
    fit_bracketed,
    log_grid,
    p_label,
    parse_p,
    sup_over_N,
)
from .spectra import circulant_spectrum, eigvals, hypothesis_check, omega_contour

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

TOL_DEFAULTS = {"ode": 1e-10, "contour": 1e-3}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: dict | None = None
    kind: str | None = None
    p: str | None = None
    N_list: list | None = None
    t_grid: dict | None = None
    out: str | None = None
    seed: int = 0
    tol: dict = field(default_factory=lambda: dict(TOL_DEFAULTS))
    threads: str = "auto"
    quantity: str = "AT"
    with_log: bool = False
    extra: dict = field(default_factory=dict)
    version: str = __version__

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


# argument parsing helpers ------------------------------------------------------


def parse_N(text: str) -> list[int]:
    """'4..512' doubles from lo to hi; '2,3,5' is a literal list."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            if lo < 2 or hi < lo:
                raise ValueError
            out = []
            n = lo
            while n <= hi:
                out.append(n)
                n *= 2
            return out
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --N value {text!r}") from None
    if not vals or min(vals) < 2:
        raise ConfigError("--N entries must be at least 2")
    return sorted(set(vals))


def parse_t(text: str) -> dict:
    try:
        lo, hi, ppd = text.split(":")
        g = {"lo": float(lo), "hi": float(hi), "per_decade": int(ppd)}
    except ValueError:
        raise ConfigError(f"bad --t value {text!r}, expected lo:hi:per_decade") from None
    if not (0 < g["lo"] < g["hi"]) or g["per_decade"] < 1:
        raise ConfigError("--t needs 0 < lo < hi and per_decade >= 1")
    return g


def parse_tol(items) -> dict:
    tol = dict(TOL_DEFAULTS)
    for item in items or []:
        name, _, val = item.partition("=")
        if name not in tol:
            raise ConfigError(f"unknown tolerance {name!r}; known: {', '.join(sorted(tol))}")
        try:
            tol[name] = float(val)
        except ValueError:
            raise ConfigError(f"bad tolerance value {item!r}") from None
    return tol


def parse_params(text: str | None) -> tuple:
    if not text:
        return ()
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"bad --params value {text!r}") from None


def _model_dict(args) -> dict:
    if args.file:
        return {"name": "custom", "params": [], "path": args.file, "literal_sign": False}
    if not args.model:
        raise ConfigError("give --model NAME or --file PATH")
    return {
        "name": args.model,
        "params": list(parse_params(args.params)),
        "path": None,
        "literal_sign": bool(args.literal_sign),
    }


def build_system(model: dict):
    spec = models.ModelSpecifier(model["name"], tuple(model["params"]), model["path"], model["literal_sign"])
    return models.build(spec)


# output helpers ---------------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_preamble(cfg: RunConfig) -> str:
    return f"# sichain {__version__}\n# config {json.dumps(cfg.to_json(), sort_keys=True)}\n"


def _json_doc(cfg: RunConfig, result) -> str:
    return json.dumps({"config": cfg.to_json(), "result": result}, indent=1, sort_keys=True) + "\n"


def read_curve_csv(path: str) -> dict[str, dict]:
    """Curve CSV -> {N label: {'t','lower','upper','p','kind'}}; '#' lines are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    rd = csv.DictReader(lines)
    if rd.fieldnames != ["t", "lower", "upper", "N", "p", "kind"]:
        raise ConfigError(f"{path}: expected header t,lower,upper,N,p,kind")
    groups: dict[str, dict] = {}
    for row in rd:
        g = groups.setdefault(row["N"], {"t": [], "lower": [], "upper": [], "p": row["p"], "kind": row["kind"]})
        for k in ("t", "lower", "upper"):
            g[k].append(float(row[k]))
    if not groups:
        raise ConfigError(f"{path}: no data rows")
    return {k: {**g, **{c: np.array(g[c]) for c in ("t", "lower", "upper")}} for k, g in groups.items()}


# subcommands ------------------------------------------------------------------


def cmd_analyze(args) -> int:
    cfg = RunConfig("analyze", model=_model_dict(args), seed=args.seed, tol=parse_tol(args.tol), threads=args.threads)
    system = build_system(cfg.model)
    rep = hypothesis_check(system)
    _emit(_json_doc(cfg, {"label": system.label, **rep.to_json()}), args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = RunConfig(
        "spectrum", model=_model_dict(args), N_list=parse_N(args.N), seed=args.seed,
        tol=parse_tol(args.tol), threads=args.threads, extra={"resolution": args.resolution},
    )
    system = build_system(cfg.model)
    rows = [(z, "A0") for z in sorted(eigvals(system.A0), key=lambda z: (z.real, z.imag))]
    cs = omega_contour(system.phi, resolution=(args.resolution, args.resolution), tol=cfg.tol["contour"])
    rows += [(z, "omega") for z in cs.vertices]
    for N in cfg.N_list:
        vals, _ = circulant_spectrum(system, N)
        rows += [(z, f"circulant:N={N}") for z in sorted(vals, key=lambda z: (z.real, z.imag))]
    buf = io.StringIO()
    buf.write(_csv_preamble(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "tag"])
    for z, tag in rows:
        w.writerow([repr(float(z.real)), repr(float(z.imag)), tag])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = RunConfig(
        "simulate", model=_model_dict(args), kind=args.kind, p=p_label(_p(args.p)),
        N_list=parse_N(args.N), t_grid=parse_t(args.t), seed=args.seed, tol=parse_tol(args.tol),
        threads=args.threads, quantity=args.quantity,
    )
    system = build_system(cfg.model)
    g = cfg.t_grid
    t = log_grid(g["lo"], g["hi"], g["per_decade"])
    curves = decay_curves(
        system, cfg.kind, cfg.N_list if cfg.kind != "laurent" else [2], _p(cfg.p), t,
        seed=cfg.seed, tol=cfg.tol["ode"], generator=cfg.quantity == "AT",
    )
    if cfg.kind == "laurent":
        curves = curves[:1]
    buf = io.StringIO()
    buf.write(_csv_preamble(cfg))
    for i, c in enumerate(curves):
        c.to_csv(buf, header=i == 0)
    if len(curves) > 1:
        sup_over_N(curves).to_csv(buf, header=False)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _p(text):
    try:
        return parse_p(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _window(text):
    if text is None:
        return None
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"bad --window {text!r}, expected lo:hi") from None
    return (lo, hi)


def cmd_fit(args) -> int:
    cfg = RunConfig(
        "fit", with_log=args.with_log, out=None, threads=args.threads,
        extra={"curve": args.curve, "select": args.select, "window": _window(args.window)},
    )
    groups = read_curve_csv(args.curve)
    key = args.select or ("sup" if "sup" in groups else None)
    if key is None:
        if len(groups) != 1:
            raise ConfigError(f"several curves in file ({', '.join(groups)}); pick one with --select")
        key = next(iter(groups))
    if key not in groups:
        raise ConfigError(f"no curve with N={key} in file")
    g = groups[key]
    fit = fit_bracketed(g["t"], g["lower"], g["upper"], cfg.extra["window"], cfg.with_log)
    cfg.extra["select"] = key
    _emit(_json_doc(cfg, fit.to_json()), args.out)
    return EXIT_OK


def _x0(text: str, m: int, seed: int) -> np.ndarray:
    if text.startswith("random:"):
        try:
            K = int(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad --x0 {text!r}") from None
        x = np.random.default_rng(seed).normal(size=(K, m))
        x[:, 0] -= x[:, 0].mean()
        return x
    try:
        rows = [[float(v) for v in blk.split(",")] for blk in text.split(";")]
        x = np.array(rows, float)
    except ValueError:
        raise ConfigError(f"bad --x0 {text!r}") from None
    if x.ndim != 2 or x.shape[1] != m:
        raise ConfigError(f"--x0 blocks must have {m} entries each")
    return x


def cmd_cesaro(args) -> int:
    cfg = RunConfig(
        "cesaro", model=_model_dict(args), p=p_label(_p(args.p)), seed=args.seed, threads=args.threads,
        extra={"x0": args.x0, "n_max": args.n_max},
    )
    system = build_system(cfg.model)
    res = cesaro_norms(system, _x0(args.x0, system.m, cfg.seed), _p(cfg.p), args.n_max)
    buf = io.StringIO()
    buf.write(_csv_preamble(cfg))
    buf.write(f"# classification {res.classification} exponent {res.exponent!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "norm"])
    for n, v in zip(res.n, res.norms):
        w.writerow([int(n), repr(float(v))])
    _emit(buf.getvalue(), args.out)
    print(f"{res.classification} (exponent {res.exponent:.3f})", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    nums = None
    if args.only:
        try:
            nums = [int(x) for x in args.only.split(",")]
        except ValueError:
            raise ConfigError(f"bad --only {args.only!r}") from None
        bad = [k for k in nums if k not in acceptance.CRITERIA]
        if bad:
            raise ConfigError(f"unknown criteria {bad}")
    results = acceptance.run(nums, echo=print)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return EXIT_OK if n_pass == len(results) else EXIT_FAIL


# parser -------------------------------------------------------------------------


def _common(sp, model=True):
    if model:
        sp.add_argument("--model", help="robot | platoon | platoon_from_zeros | platoon_pair | cascade")
        sp.add_argument("--params", help="comma-separated model parameters")
        sp.add_argument("--file", help="system JSON file (custom model)")
        sp.add_argument("--literal-sign", action="store_true", help="platoon_from_zeros: negate alpha0")
    sp.add_argument("--out", help="output path (default stdout)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", action="append", metavar="NAME=VAL", help=f"override one of {sorted(TOL_DEFAULTS)}")
    sp.add_argument("--threads", default="auto", help="accepted for reproducibility records; output does not depend on it")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sichain", description=__doc__)
    ap.add_argument("--version", action="version", version=f"sichain {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="hypothesis report (JSON)")
    _common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("spectrum", help="sigma(A0), |phi|=1 contour and circulant spectra (CSV re,im,tag)")
    _common(sp)
    sp.add_argument("--N", default="8")
    sp.add_argument("--resolution", type=int, default=400)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("simulate", help="decay curves per N plus their sup (CSV)")
    _common(sp)
    sp.add_argument("--kind", choices=["onesided", "circulant", "laurent"], default="circulant")
    sp.add_argument("--p", default="2")
    sp.add_argument("--N", default="4..512")
    sp.add_argument("--t", default="1:1e4:40")
    sp.add_argument("--quantity", choices=["AT", "T"], default="AT")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="power-law fit of a curve CSV (JSON)")
    sp.add_argument("curve")
    sp.add_argument("--select", help="N label of the curve to fit (default: sup, or the only curve)")
    sp.add_argument("--window", help="t-window lo:hi")
    sp.add_argument("--with-log", action="store_true")
    _common(sp, model=False)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("cesaro", help="Cesaro-mean norms (CSV n,norm)")
    _common(sp)
    sp.add_argument("--p", default="2")
    sp.add_argument("--x0", default="1", help="blocks 'a,b;c,d' or random:K (zero mean in first coordinate)")
    sp.add_argument("--n-max", type=int, default=2000)
    sp.set_defaults(func=cmd_cesaro)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, SichainError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
