"""Command-line front end.

    shockspec analyze --model M.json [--delta D] [--radius R] --out report.json
    shockspec scan --scenario NAME|FILE --var s|eps --grid a:b:n[:log] --out scan.csv
    shockspec oracle-check --model M.json --crossing K --mu 1e-2,1e-3 --out fit.json
    shockspec scenario --name NAME [--s S | --eps E] --out M.json

Exit codes: 0 stable (or success), 2 unstable, 3 marginal or a failed
convergence check, 64 bad input or invalid model, 65 overlapping smoothing
layers.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import (ContourHitsRoot, FitFailed, LayerOverlap, MalformedInput, ShockSpecError,
                     TraceLost, Transversality)
from .io import config_hash, dumps, fixture_path, fmt, load_model, model_to_dict
from .jump import BACKWARD, FORWARD
from .model import compressivity_index
from .oracle import ConvergenceFit, jump_convergence_fit
from .rootfind import auto_radius, locate_eigenvalues, trace_branch
from .scenarios import (SCENARIOS, BifurcationParams, OvercompressiveParams, make_bifurcation,
                        make_overcompressive, params_from_dict)
from .spectral import HalfPlaneRegion, evans_det, theta_det, zero_multiplicity

EXIT_STABLE, EXIT_UNSTABLE, EXIT_MARGINAL = 0, 2, 3
EXIT_USAGE, EXIT_LAYER = 64, 65
DEFAULT_RADIUS_MULTI = 10.0


class UsageError(ShockSpecError):
    pass


def _threads():
    cap = os.cpu_count() or 1
    env = os.environ.get("SHOCKSPEC_THREADS")
    if env:
        try:
            cap = max(1, min(cap, int(env)))
        except ValueError:
            raise UsageError(f"SHOCKSPEC_THREADS must be an integer, got {env!r}") from None
    return cap


def _pmap(fn, items):
    items = list(items)
    workers = min(_threads(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def parse_grid(text):
    """``start:stop:steps[:log]`` -> strictly monotone array."""
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise UsageError(f"grid must be start:stop:steps[:log], got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must be start:stop:steps[:log], got {text!r}") from None
    if n < 1:
        raise UsageError("grid is empty")
    if n > 1 and a == b:
        raise UsageError("grid must be strictly monotone")
    if len(parts) == 4:
        if a <= 0 or b <= 0:
            raise UsageError("log grid needs positive end points")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def parse_mu(text):
    try:
        mu = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise UsageError(f"mu list must be comma separated numbers, got {text!r}") from None
    if mu.size < 2 or np.any(mu <= 0) or np.any(np.diff(mu) >= 0):
        raise UsageError("mu list needs at least two positive, strictly decreasing values")
    return mu


def _resolve_model(path):
    if not os.path.exists(path):
        try:
            return fixture_path(path)
        except ShockSpecError:
            pass
    return path


def _complex_json(z):
    return [float(z.real), float(z.imag)]


# analyze -------------------------------------------------------------------

def _determinant(model, het):
    if model.n_regions == 2:
        return lambda lam: evans_det(model, het, lam)
    return lambda lam: theta_det(model, het, lam, normalized=True)


def analyze_model(model, het, delta=1e-4, radius=None):
    """Stability report for a model; returns ``(report dict, exit code)``."""
    notes = []
    if radius is None:
        if model.n_regions == 2:
            radius, r_source = auto_radius(model, het), "auto"
        else:
            radius, r_source = DEFAULT_RADIUS_MULTI, "default"
            notes.append("radius not validated by the large-|lambda| test for multi-crossing models")
    else:
        r_source = "user"
    fn = _determinant(model, het)
    report = None
    for nudge in (1.0, 1.37, 0.71):
        try:
            report = locate_eigenvalues(fn, HalfPlaneRegion(delta * nudge, radius))
            break
        except ContourHitsRoot as exc:
            notes.append(f"contour nudged: {exc}")
    out = {
        "zero_multiplicity": zero_multiplicity(model, het) if model.n_regions >= 2 else None,
        "compressivity_index": compressivity_index(model, het),
        "region": {"delta": delta, "R": float(radius), "R_source": r_source},
        "notes": notes,
    }
    if report is None:
        out.update(roots=[], total_winding=None, strip_caveat=True, verdict="marginal")
        return out, EXIT_MARGINAL
    out["region"]["delta"] = report.region.delta
    out.update(
        roots=[{"lambda": _complex_json(r.lam), "residual": r.residual, "winding": r.winding,
                "converged": r.converged} for r in report.roots],
        total_winding=report.total_winding,
        strip_caveat=report.strip_caveat,
    )
    if not report.consistent or any(not r.converged for r in report.roots):
        verdict, code = "marginal", EXIT_MARGINAL
    elif report.total_winding > 0:
        verdict, code = "unstable", EXIT_UNSTABLE
    else:
        verdict, code = "stable", EXIT_STABLE
    out["verdict"] = verdict
    return out, code


def cmd_analyze(args):
    cfg = {"command": "analyze", "model": os.path.basename(args.model), "delta": args.delta,
           "radius": args.radius}
    if args.delta <= 0:
        raise UsageError("delta must be positive")
    model, het = load_model(_resolve_model(args.model))
    body, code = analyze_model(model, het, args.delta, args.radius)
    body.update(tool="shockspec", version=__version__, config_sha256=config_hash(cfg))
    _write(args.out, dumps(body))
    return code


# scan ----------------------------------------------------------------------

def _load_scenario(text):
    if text in SCENARIOS:
        return SCENARIOS[text]
    try:
        with open(text, encoding="utf-8") as fh:
            return params_from_dict(json.load(fh), text)
    except OSError:
        raise UsageError(f"unknown scenario {text!r}; known: {', '.join(sorted(SCENARIOS))}") from None
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc.msg}", f"{text}:{exc.lineno}:{exc.colno}") from None


def _instance(params, var, x):
    """(list of (model, het, fn) sub-problems, search delta, radius hint)."""
    if isinstance(params, OvercompressiveParams):
        model, het, _ = make_overcompressive(params.with_s(x))
        return [(model, het, lambda lam: evans_det(model, het, lam))]
    b = make_bifurcation(params.with_eps(x))
    if x == 0:
        return [(m, h, (lambda lam, m=m, h=h: evans_det(m, h, lam))) for m, h in zip(b.model, b.het)]
    return [(b.model, b.het, lambda lam: theta_det(b.model, b.het, lam, normalized=True))]


def _family(params, var):
    if isinstance(params, OvercompressiveParams):
        def fam(s):
            model, het, _ = make_overcompressive(params.with_s(s))
            return lambda lam: evans_det(model, het, lam, continuation=True)
    else:
        def fam(e):
            b = make_bifurcation(params.with_eps(e))
            return lambda lam: theta_det(b.model, b.het, lam, normalized=True, continuation=True)
    return fam


def _scan_point(params, var, x, delta, radius):
    row = {"param": float(x), "lead": None, "n": 0, "d0": 0.0, "flags": []}
    try:
        subs = _instance(params, var, x)
    except Transversality:
        row["flags"].append("no_transversal_crossing")
        return row
    except ShockSpecError as exc:
        row["flags"].append(type(exc).__name__)
        return row
    dl = delta if var == "s" else min(delta, 1e-2 * x) if x > 0 else delta
    roots = []
    d0 = []
    for model, het, fn in subs:
        R = radius
        if R is None:
            R = auto_radius(model, het) if model.n_regions == 2 else 1.0
        if model.n_regions == 2:
            d0.append(float(np.real(evans_det(model, het, 0.0))))
        else:
            d0.append(float(np.real(fn(1e-3 * dl))))
        try:
            rep = locate_eigenvalues(fn, HalfPlaneRegion(dl, R))
        except ContourHitsRoot:
            row["flags"].append("contour_hit")
            continue
        roots.extend(rep.roots)
        if not rep.consistent:
            row["flags"].append("inconsistent_winding")
    if len(subs) > 1:
        row["flags"].append("split")
    row["d0"] = float(np.prod(np.sign(d0))) if d0 else 0.0
    row["n"] = sum(r.winding for r in roots)
    if roots:
        lead = max(roots, key=lambda r: (r.lam.real, r.lam.imag))
        row["lead"] = complex(lead.lam.real, abs(lead.lam.imag))
    return row


def _crossings(params, var, rows):
    fam = _family(params, var)
    out = []
    for a, b in zip(rows, rows[1:]):
        if a["flags"] or b["flags"] or a["n"] == b["n"]:
            continue
        seed, other = (a, b) if a["lead"] is not None else (b, a)
        if seed["lead"] is None:
            continue
        path = np.linspace(seed["param"], other["param"], 9)[1:]
        try:
            tr = trace_branch(fam, seed["lead"], seed["param"], path)
            for s1, lam in tr.crossings:
                out.append({"param": float(s1), "lead": complex(lam), "n": None, "d0": None, "flags": []})
        except TraceLost as exc:
            out.append({"param": float(exc.last_s), "lead": complex(exc.last_lambda), "n": None,
                        "d0": None, "flags": ["trace_lost"]})
    return out


CSV_HEADER = ["kind", "param", "lead_re", "lead_im", "n_unstable", "d0_sign", "lead_re_over_param", "flags"]


def _csv_row(kind, r):
    lead = r["lead"]
    re = fmt(lead.real) if lead is not None else "nan"
    im = fmt(lead.imag) if lead is not None else "nan"
    ratio = fmt(lead.real / r["param"]) if lead is not None and r["param"] != 0 else "nan"
    n = "" if r["n"] is None else str(r["n"])
    d0 = "" if r["d0"] is None else str(int(r["d0"]))
    return [kind, fmt(r["param"]), re, im, n, d0, ratio, ";".join(r["flags"])]


def cmd_scan(args):
    params = _load_scenario(args.scenario)
    expected = "s" if isinstance(params, OvercompressiveParams) else "eps"
    if args.var != expected:
        raise UsageError(f"scenario varies {expected!r}, not {args.var!r}")
    grid = parse_grid(args.grid)
    if args.var == "eps" and np.any(grid < 0):
        raise UsageError("eps grid must be non-negative")
    if args.delta <= 0:
        raise UsageError("delta must be positive")
    cfg = {"command": "scan", "scenario": args.scenario, "var": args.var, "grid": args.grid,
           "delta": args.delta, "radius": args.radius, "seed": args.seed}
    rows = _pmap(lambda x: _scan_point(params, args.var, x, args.delta, args.radius), grid)
    cross = _crossings(params, args.var, rows)
    lines = [[f"# shockspec {__version__}"], [f"# config_sha256 {config_hash(cfg)}"], CSV_HEADER]
    lines += [_csv_row("grid", r) for r in rows]
    lines += [_csv_row("crossing", r) for r in cross]
    _write_csv(args.out, lines)
    return 0


# oracle-check --------------------------------------------------------------

def cmd_oracle(args):
    mu = parse_mu(args.mu)
    try:
        lam = complex(args.lam.replace(" ", ""))
    except ValueError:
        raise UsageError(f"bad --lambda value {args.lam!r}") from None
    cfg = {"command": "oracle-check", "model": os.path.basename(args.model), "crossing": args.crossing,
           "mu": args.mu, "lambda": args.lam, "direction": args.direction}
    model, het = load_model(_resolve_model(args.model))
    if not 0 <= args.crossing < het.n_crossings:
        raise UsageError(f"crossing must be between 0 and {het.n_crossings - 1}")
    n = model.interfaces[args.crossing].normal
    v = n + 0.5 * np.ones(model.dim)
    z = 0.5 * np.ones(model.dim)
    try:
        fit = jump_convergence_fit(model, het, lam, v, z, mu, args.crossing, args.direction)
    except FitFailed as exc:
        fit = ConvergenceFit(mu, np.asarray(exc.errors if exc.errors is not None else []), None)
    body = {
        "tool": "shockspec", "version": __version__, "config_sha256": config_hash(cfg),
        "crossing": args.crossing, "direction": args.direction, "lambda": _complex_json(lam),
        "mu": [float(x) for x in fit.mu], "errors": [float(x) for x in fit.errors],
        "slope": fit.slope, "status": fit.skipped or ("pass" if fit.passed else "fail"),
        "v2_errors": None if fit.v2_errors is None else [float(x) for x in fit.v2_errors],
    }
    _write(args.out, dumps(body))
    return 0 if fit.passed else EXIT_MARGINAL


# scenario export -----------------------------------------------------------

def cmd_scenario(args):
    if args.name not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.name!r}; known: {', '.join(sorted(SCENARIOS))}")
    p = SCENARIOS[args.name]
    if isinstance(p, OvercompressiveParams):
        if args.eps is not None:
            raise UsageError("--eps applies to bifurcation scenarios")
        model, het, _ = make_overcompressive(p.with_s(args.s) if args.s is not None else p)
    else:
        if args.s is not None:
            raise UsageError("--s applies to overcompressive scenarios")
        b = make_bifurcation(p.with_eps(args.eps) if args.eps is not None else p)
        if isinstance(b.model, tuple):
            raise UsageError("eps = 0 splits into two sub-shocks; export them separately")
        model, het = b.model, b.het
    _write(args.out, dumps(model_to_dict(model, het, f"scenario {args.name}")))
    return 0


# plumbing ------------------------------------------------------------------

def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_csv(path, rows):
    fh = sys.stdout if path == "-" else open(path, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        for r in rows:
            if len(r) == 1 and r[0].startswith("#"):
                fh.write(r[0] + "\n")
            else:
                w.writerow(r)
    finally:
        if fh is not sys.stdout:
            fh.close()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="shockspec", description="Spectral stability of piecewise-linear viscous shocks.")
    p.add_argument("--version", action="version", version=f"shockspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="locate unstable eigenvalues of a model file")
    a.add_argument("--model", required=True)
    a.add_argument("--delta", type=float, default=1e-4)
    a.add_argument("--radius", type=float, default=None)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("scan", help="leading eigenvalue along a scenario parameter")
    s.add_argument("--scenario", required=True)
    s.add_argument("--var", required=True, choices=["s", "eps"])
    s.add_argument("--grid", required=True)
    s.add_argument("--delta", type=float, default=1e-4)
    s.add_argument("--radius", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scan)

    o = sub.add_parser("oracle-check", help="convergence of the smoothed jump at one crossing")
    o.add_argument("--model", required=True)
    o.add_argument("--crossing", type=int, default=0)
    o.add_argument("--mu", default="1e-2,1e-3,1e-4")
    o.add_argument("--lambda", dest="lam", default="0.5")
    o.add_argument("--direction", choices=[FORWARD, BACKWARD], default=FORWARD)
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("scenario", help="write a bundled scenario as a model file")
    e.add_argument("--name", required=True)
    e.add_argument("--s", type=float, default=None)
    e.add_argument("--eps", type=float, default=None)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_scenario)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LayerOverlap as exc:
        sys.stderr.write(f"shockspec: LayerOverlap: {exc}\n")
        return EXIT_LAYER
    except ShockSpecError as exc:
        sys.stderr.write(f"shockspec: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
