"""Command-line front end: ``hyperwave <subcommand> [options]``.

Every subcommand builds a :class:`RunConfig`, validates it, runs one module
pipeline and returns a :class:`~hyperwave.report.Report`. With ``--out DIR``
the report is written there (``report.json`` plus one CSV per table, each
atomically); otherwise the primary table goes to stdout as CSV, or the whole
report as JSON with ``--format json``.

Exit codes: 0 success, 1 validation, 2 numerical failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .report import Report, SchemaError, atomic_write, golden_check, load_report

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

CHARTS = ("standard", "hyperboloidal", "similarity", "penrose")
SPECFUN_TABLES = ("phi0", "phi1", "phi0_tilde", "phi1_tilde", "phi1_elementary", "wronskian")


class ValidationError(ValueError):
    """Invalid run configuration; ``fields`` names every offending option."""

    def __init__(self, problems):
        self.problems = list(problems)
        self.fields = [f for f, _ in self.problems]
        super().__init__("; ".join(f"{f}: {msg}" for f, msg in self.problems))


@dataclass
class RunConfig:
    """Validated options of one run.

    ``params`` holds the subcommand-specific options under their flag names
    (dashes replaced by underscores).
    """

    subcommand: str
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    params: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.params.get(key, default)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("fmt")
        return d


# parsing --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError([("arguments", message)])


def _floats(text, n=None, name="value"):
    try:
        vals = [float(t) for t in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name}: expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"{name}: expected {n} numbers, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyperwave", description="Hyperboloidal similarity-coordinate wave laboratory.")
    p.add_argument("--version", action="version", version=f"hyperwave {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for pseudo-random data")
    common.add_argument("--out", metavar="DIR", default=None, help="write report.json and CSV tables here")
    common.add_argument("--config", metavar="FILE", default=None, help="key=value file mirroring the flags")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv",
                        help="stdout format when --out is not given")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("transform", parents=[common], help="convert points between charts")
    s.add_argument("--chart", choices=CHARTS, default="standard", help="chart of rows without a chart column")
    s.add_argument("--input", default="-", help="CSV file of rows [chart,]c0,c1,c2,c3 ('-' for stdin)")
    s.add_argument("--point", action="append", default=None, metavar="C0,C1,C2,C3",
                   help="a point given inline (repeatable; replaces --input)")

    s = sub.add_parser("specfun", parents=[common], help="sample hypergeometric mode solutions")
    s.add_argument("--table", choices=SPECFUN_TABLES, default="phi0")
    s.add_argument("--ell", type=int, default=0)
    s.add_argument("--lambda", dest="lam", default="1,0", metavar="RE[,IM]")
    s.add_argument("--family", choices=("potential", "free"), default="potential")
    s.add_argument("--zmin", type=float, default=0.0)
    s.add_argument("--zmax", type=float, default=0.9)
    s.add_argument("--n", type=int, default=10)

    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues of the discretized generator")
    s.add_argument("--ell", type=int, default=0)
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--free", action="store_true", help="drop the potential (free generator)")
    s.add_argument("--filtered", action="store_true", help="report only eigenvalues confirmed at 2N")
    s.add_argument("--filter-tol", type=float, default=1e-4)
    s.add_argument("--projection", action="store_true", help="also build the unstable spectral projection")
    s.add_argument("--method", choices=("contour", "eigenvectors"), default="contour")

    s = sub.add_parser("evolve", parents=[common], help="linear or radial nonlinear evolution")
    s.add_argument("--ell", type=int, default=0)
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--dtau", type=float, default=None)
    s.add_argument("--tau-end", type=float, default=1.0)
    s.add_argument("--data", default="zero", help="file.csv | mode1 | mode0 | va:A | zero | random")
    s.add_argument("--nonlinear", action="store_true", help="full radial nonlinearity (ell = 0)")
    s.add_argument("--save-every", type=int, default=1)
    s.add_argument("--snapshots", type=int, default=0, help="number of evenly spaced snapshot tables")
    s.add_argument("--guard", type=float, default=10.0)

    s = sub.add_parser("flux", parents=[common], help="energy flux demo for the free 1+1 wave")
    s.add_argument("--profile", default="gaussian:-0.6,0.08", metavar="gaussian:CENTER,WIDTH")
    s.add_argument("--n", type=int, default=128)
    s.add_argument("--t-start", type=float, default=-1.0)
    s.add_argument("--t-end", type=float, default=-0.1)
    s.add_argument("--ds", type=float, default=None)

    s = sub.add_parser("strichartz", parents=[common], help="localized L4 norms of a stored trajectory")
    s.add_argument("--trajectory", required=True, help="trajectory.npz written by evolve")
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--t-min", type=float, default=2.0)
    s.add_argument("--t-max", type=float, default=20.0)
    s.add_argument("--n-t", type=int, default=7)

    s = sub.add_parser("shoot", parents=[common], help="bisect for the threshold in a one-parameter family")
    s.add_argument("--data", default="va", help="va | bump[:CENTER,WIDTH,SCALE] | file.csv")
    s.add_argument("--alpha-min", type=float, default=-0.1)
    s.add_argument("--alpha-max", type=float, default=0.07)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--n", type=int, default=24)
    s.add_argument("--tau-end", type=float, default=20.0)
    s.add_argument("--decay", action="store_true", help="fit the decay and Strichartz exponent at alpha*")

    s = sub.add_parser("manifold", parents=[common], help="Duhamel fixed point and the correction F(u)")
    s.add_argument("--data", default="bump", help="bump[:CENTER,WIDTH,VELOCITY] | file.csv")
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--horizon", type=float, default=12.0)
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--h", type=float, default=0.005)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--verify", action="store_true", help="also compute the residual and equivalence checks")

    s = sub.add_parser("check", parents=[common], help="compare a report against a golden report")
    s.add_argument("--report", required=True)
    s.add_argument("--golden", required=True)
    s.add_argument("--rtol", type=float, default=1e-9)
    s.add_argument("--atol", type=float, default=0.0)
    s.add_argument("--tol", dest="tolerances", action="append", default=None, metavar="NAME=RTOL[,ATOL]",
                   help="per-scalar tolerance override (repeatable)")
    s.add_argument("--no-tables", action="store_true", help="compare scalars only")
    return p


def read_config_file(path) -> dict:
    """``key=value`` lines; ``#`` starts a comment; keys are flag names without dashes."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError([("config", f"line {lineno}: expected key=value")])
            k, v = (t.strip() for t in line.split("=", 1))
            out[k.lstrip("-").replace("-", "_")] = v
    return out


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _apply_config(parser, argv, cfg: dict):
    # command-line flags override the file: the file only sets defaults
    subname = next((a for a in argv if a in parser._subparsers._group_actions[0].choices), None)
    sp = parser._subparsers._group_actions[0].choices[subname]
    known = {a.dest: a for a in sp._actions}
    problems, defaults = [], {}
    for k, v in cfg.items():
        key = {"lambda": "lam", "format": "fmt"}.get(k, k)
        if key not in known or key in ("help", "config"):
            problems.append((k, "unknown option in config file"))
            continue
        act = known[key]
        if isinstance(act, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            if v.lower() not in _BOOL:
                problems.append((k, f"expected a boolean, got {v!r}"))
                continue
            defaults[key] = _BOOL[v.lower()]
        elif isinstance(act, argparse._AppendAction):
            defaults[key] = [t.strip() for t in v.split(";") if t.strip()]
        else:
            try:
                defaults[key] = act.type(v) if act.type else v
            except (TypeError, ValueError):
                problems.append((k, f"invalid value {v!r}"))
                continue
            if act.choices is not None and defaults[key] not in act.choices:
                problems.append((k, f"must be one of {sorted(act.choices)}"))
    if problems:
        raise ValidationError(problems)
    sp.set_defaults(**defaults)


def parse_args(argv=None) -> RunConfig:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        try:
            cfg = read_config_file(ns.config)
        except OSError as exc:
            raise IOError(f"cannot read config file {ns.config}: {exc}") from exc
        _apply_config(parser, argv, cfg)
        ns = parser.parse_args(argv)
    d = vars(ns).copy()
    sc = d.pop("subcommand")
    seed, out, fmt = d.pop("seed"), d.pop("out"), d.pop("fmt")
    d.pop("config")
    return validate(RunConfig(sc, seed, out, fmt, d))


# validation -----------------------------------------------------------------


def _parse_data_spec(spec: str):
    """Split ``name[:a,b,...]`` into the name and its float arguments."""
    name, _, args = spec.partition(":")
    return name, (_floats(args) if args else [])


def validate(cfg: RunConfig) -> RunConfig:
    """Check every field against the module preconditions; collect all problems."""
    p = cfg.params
    probs = []

    def need(cond, key, msg):
        if not cond:
            probs.append((key, msg))

    need(0 <= cfg.seed < 2**64, "seed", "must be a 64-bit unsigned integer")
    sc = cfg.subcommand
    if "ell" in p:
        need(p["ell"] >= 0, "ell", f"must be a nonnegative integer (got {p['ell']})")
    if "n" in p:
        lo = {"specfun": 1}.get(sc, 8)
        need(lo <= p["n"] <= 1024, "n", f"must lie in [{lo}, 1024] (got {p['n']})")
    for key in ("dtau", "tau_end", "delta", "horizon", "h", "tol", "ds", "filter_tol"):
        if p.get(key) is not None:
            v = p[key]
            need(math.isfinite(v) and v > 0, key.replace("_", "-"), f"must be positive (got {v})")
    if sc == "specfun":
        try:
            lam = _floats(p["lam"], None, "lambda")
            if len(lam) not in (1, 2):
                raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {p['lam']!r}")
            p["lam"] = complex(lam[0], lam[1] if len(lam) == 2 else 0.0)
        except argparse.ArgumentTypeError as exc:
            probs.append(("lambda", str(exc)))
        need(p["zmin"] <= p["zmax"], "zmin", "must not exceed zmax")
        if p["table"] == "wronskian":
            need(0 < p["zmin"] and p["zmax"] < 1, "zmin/zmax", "wronskian samples rho in (0, 1)")
        else:
            need(p["zmax"] < 1 or p["table"] in ("phi1", "phi1_elementary"), "zmax",
                 "must be below 1 for solutions singular at z = 1")
    elif sc == "evolve":
        need(p["save_every"] >= 1, "save-every", "must be positive")
        need(p["snapshots"] >= 0, "snapshots", "must be nonnegative")
        need(p["guard"] > 0, "guard", "must be positive")
        if p["nonlinear"]:
            need(p["ell"] == 0, "ell", "the nonlinear evolution is radial (ell = 0)")
        name, args = _parse_data_spec(p["data"])
        if name == "mode1":
            need(p["ell"] == 0, "data", "mode1 (eigenvalue 1) lives in ell = 0")
        elif name == "mode0":
            need(p["ell"] == 1, "data", "mode0 (eigenvalue 0) lives in ell = 1")
        elif name == "va":
            need(len(args) == 1, "data", "expected va:A")
            need(p["ell"] == 0, "data", "the v_a family is radial (ell = 0)")
        elif name not in ("zero", "random") and not name.endswith(".csv"):
            probs.append(("data", f"unknown data source {p['data']!r}"))
    elif sc == "flux":
        name, args = _parse_data_spec(p["profile"])
        need(name == "gaussian" and len(args) == 2 and (len(args) < 2 or args[1] > 0), "profile",
             "expected gaussian:CENTER,WIDTH with WIDTH > 0")
        need(p["t_start"] < p["t_end"] < 0, "t-start/t-end", "need t-start < t-end < 0")
    elif sc == "strichartz":
        need(0 < p["delta"] < 1, "delta", "must lie in (0, 1)")
        need(1 <= p["t_min"] < p["t_max"], "t-min/t-max", "need 1 <= t-min < t-max")
        need(p["n_t"] >= 2, "n-t", "need at least two sample times")
    elif sc == "shoot":
        need(p["alpha_min"] < p["alpha_max"], "alpha-min/alpha-max", "need alpha-min < alpha-max")
        name, args = _parse_data_spec(p["data"])
        need(name in ("va", "bump") or name.endswith(".csv"), "data", f"unknown data source {p['data']!r}")
        if name == "bump":
            need(len(args) in (0, 3), "data", "expected bump or bump:CENTER,WIDTH,SCALE")
    elif sc == "manifold":
        need(0 < p["eps"] < 0.5, "eps", "must lie in (0, 1/2)")
        name, args = _parse_data_spec(p["data"])
        need(name == "bump" or name.endswith(".csv"), "data", f"unknown data source {p['data']!r}")
        if name == "bump":
            need(len(args) in (0, 3), "data", "expected bump or bump:CENTER,WIDTH,VELOCITY")
    elif sc == "check":
        tols = {}
        for t in p.get("tolerances") or []:
            k, _, v = t.partition("=")
            try:
                vals = _floats(v)
                need(len(vals) in (1, 2), "tol", f"expected NAME=RTOL[,ATOL], got {t!r}")
                tols[k.strip()] = (vals[0], vals[1] if len(vals) > 1 else 0.0)
            except argparse.ArgumentTypeError:
                probs.append(("tol", f"expected NAME=RTOL[,ATOL], got {t!r}"))
        p["tolerances"] = tols
    if probs:
        raise ValidationError(probs)
    return cfg


# data loading ------------------------------------------------------------------


def load_field_csv(path, ell: int, N: int):
    """Mode field from a CSV with columns ``u1,u2`` (optionally ``rho``) at the grid nodes."""
    from .spectral import ModeField, grid

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"u1", "u2"} <= set(rows[0]):
        raise ValidationError([("data", f"{path}: need a header with columns u1,u2")])
    if len(rows) != N:
        raise ValidationError([("data", f"{path}: {len(rows)} rows for a grid with n = {N}")])
    u1 = np.array([float(r["u1"]) for r in rows])
    u2 = np.array([float(r["u2"]) for r in rows])
    if "rho" in rows[0]:
        rho = np.array([float(r["rho"]) for r in rows])
        if not np.allclose(rho, grid(N).rho, rtol=0, atol=1e-12):
            raise ValidationError([("data", f"{path}: rho column does not match the grid nodes")])
    return ModeField(ell, u1, u2)


def _evolve_data(cfg: RunConfig):
    from .evolution import exact_family_va
    from .spectral import ModeField, grid, polynomial_field

    ell, N = cfg.get("ell"), cfg.get("n")
    g = grid(N)
    name, args = _parse_data_spec(cfg.get("data"))
    if name == "zero":
        return ModeField.zeros(ell, N)
    if name in ("mode1", "mode0"):
        return ModeField(ell, g.rho**ell, 2.0 * g.rho**ell)
    if name == "va":
        return exact_family_va(args[0], 0.0, N)
    if name == "random":
        return polynomial_field(ell, g, np.random.default_rng(cfg.seed))
    return load_field_csv(cfg.get("data"), ell, N)


# subcommands ------------------------------------------------------------------


def _read_points(cfg: RunConfig):
    rows = []
    if cfg.get("point"):
        for k, s in enumerate(cfg.get("point")):
            rows.append((k, [t.strip() for t in s.split(",")]))
    else:
        src = cfg.get("input")
        text = sys.stdin.read() if src == "-" else Path(src).read_text()
        for k, r in enumerate(csv.reader(io.StringIO(text))):
            if r and not (k == 0 and r[0].strip().lower() in ("chart", "c0")):
                rows.append((k, [t.strip() for t in r]))
    return rows


def run_transform(cfg: RunConfig) -> Report:
    from .geometry import all_charts, to_standard

    rep = Report("transform")
    cols = None
    out = []
    problems = []
    for k, r in _read_points(cfg):
        if len(r) == 5:
            chart, vals = r[0], r[1:]
        elif len(r) == 4:
            chart, vals = cfg.get("chart"), r
        else:
            problems.append((f"row {k}", f"expected 4 or 5 fields, got {len(r)}"))
            continue
        if chart not in CHARTS:
            problems.append((f"row {k}", f"unknown chart {chart!r}"))
            continue
        try:
            c = [float(v) for v in vals]
            d = all_charts(to_standard(chart, *c))
        except ValueError as exc:
            problems.append((f"row {k}", str(exc)))
            continue
        cols = cols or ["chart_in"] + list(d)
        out.append([chart] + list(d.values()))
    if problems:
        raise ValidationError(problems)
    rep.add_table("points", cols or ["chart_in"], out)
    rep.scalars["n_points"] = len(out)
    return rep


def run_specfun(cfg: RunConfig) -> Report:
    from . import specfun as sf

    ell, lam, fam, n = cfg.get("ell"), cfg.get("lam"), cfg.get("family"), cfg.get("n")
    table = cfg.get("table")
    zs = np.linspace(cfg.get("zmin"), cfg.get("zmax"), n)
    lam = lam.real if lam.imag == 0 else lam
    rep = Report("specfun")
    if table == "wronskian":
        W = np.array([complex(sf.wronskian(ell, lam, r, fam)) for r in zs])
        nrm = zs**2 * (1 - zs**2) ** (lam + 1.0) * W
        rep.add_table("samples", ["rho", "re", "im", "normalized_re", "normalized_im"],
                      zip(zs, W.real, W.imag, np.real(nrm), np.imag(nrm)))
        rep.scalars["normalized_mean_re"] = float(np.mean(np.real(nrm)))
        rep.scalars["normalized_spread"] = float(np.ptp(np.abs(nrm)))
        if fam == "free" and lam == 0.5:
            rep.scalars["wronskian_constant"] = sf.wronskian_constant(ell)
        return rep
    if table == "phi1_elementary":
        vals = np.array([complex(sf.phi1_elementary(ell, z)) for z in zs])
    else:
        f = getattr(sf, table)
        vals = np.array([complex(f(ell, lam, z, fam)) for z in zs])
    rep.add_table("samples", ["z", "re", "im"], zip(zs, vals.real, vals.imag))
    return rep


def run_spectrum(cfg: RunConfig) -> Report:
    from .spectral import build_generator, grid, spectral_projection, spectrum

    ell, N = cfg.get("ell"), cfg.get("n")
    g = grid(N)
    M = build_generator(ell, g, not cfg.get("free"))
    sp = spectrum(M, filtered=True, tol=cfg.get("filter_tol"))
    ev, acc = sp.eigenvalues, sp.accepted
    rows = [(z.real, z.imag, int(a)) for z, a in zip(ev, acc) if a or not cfg.get("filtered")]
    rep = Report("spectrum")
    rep.add_table("eigenvalues", ["re", "im", "accepted"], rows)
    good = ev[acc]
    rep.scalars["n_eigenvalues"] = int(ev.size)
    rep.scalars["n_accepted"] = int(good.size)
    rep.scalars["max_re_accepted"] = float(np.max(good.real)) if good.size else None
    if cfg.get("projection"):
        P = spectral_projection(ell, g, cfg.get("method"), "unstable", not cfg.get("free"))
        A = P.matrix
        rep.scalars["projection_rank"] = P.rank
        rep.scalars["idempotency_defect"] = float(np.max(np.abs(A @ A - A)))
        rep.scalars["commutator_defect"] = float(np.max(np.abs(A @ M.matrix - M.matrix @ A)))
        if P.trace_history:
            rep.add_table("contour_refinement", ["nodes", "change"], P.trace_history)
    return rep


def save_trajectory(traj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = dict(ell=traj.ell, N=traj.N, dtau=traj.dtau, taus=traj.taus, states=traj.states,
                  derivs=traj.derivs, norms=traj.norms)
    atomic_write(path, lambda fh: np.savez(fh, **arrays), binary=True)


def load_trajectory(path):
    from .evolution import Trajectory

    with np.load(path) as z:
        return Trajectory(int(z["ell"]), int(z["N"]), float(z["dtau"]), z["taus"], z["states"], z["derivs"],
                          z["norms"])


def run_evolve(cfg: RunConfig) -> Report:
    from .evolution import evolve_linear, evolve_nonlinear_radial, measure_decay_rate
    from .spectral import build_generator, grid

    ell, N = cfg.get("ell"), cfg.get("n")
    u0 = _evolve_data(cfg)
    if cfg.get("nonlinear"):
        tr = evolve_nonlinear_radial(u0, cfg.get("dtau"), cfg.get("tau_end"), guard=cfg.get("guard"),
                                     save_every=cfg.get("save_every"))
    else:
        M = build_generator(ell, grid(N), True)
        tr = evolve_linear(u0, M, cfg.get("dtau"), cfg.get("tau_end"), cfg.get("save_every"))
    rep = Report("evolve")
    rep.add_table("norm_history", ["tau", "norm"], tr.norm_history)
    rep.scalars.update(initial_norm=float(tr.norms[0]), final_norm=float(tr.norms[-1]),
                       final_tau=float(tr.taus[-1]), dtau=float(tr.dtau), blown=bool(tr.blown),
                       tau_blowup=tr.tau_blowup)
    if tr.taus[-1] >= 3.0 and np.all(tr.norms[tr.taus >= 1.0] > 0):
        rep.scalars["decay_slope"] = measure_decay_rate(tr, (1.0, None)).slope
    k = cfg.get("snapshots")
    if k:
        idx = np.unique(np.linspace(0, tr.taus.size - 1, k).round().astype(int))
        r = grid(N).rho
        for j, i in enumerate(idx):
            s = tr.states[i]
            rep.add_table(f"snapshot_{j:03d}", ["tau", "rho", "u1", "u2"],
                          zip(np.full(N, tr.taus[i]), r, s[:N], s[N:]))
    if cfg.out:
        save_trajectory(tr, Path(cfg.out) / "trajectory.npz")
    return rep


def run_flux(cfg: RunConfig) -> Report:
    from .freewave import FreeWave1p1State, dalembert_pulse, free_wave_1p1_evolve

    _, (center, width) = _parse_data_spec(cfg.get("profile"))
    w, wT, dF = dalembert_pulse(center, width)
    st = FreeWave1p1State.from_functions(cfg.get("t_start"), cfg.get("n"), w, wT)
    run = free_wave_1p1_evolve(st, cfg.get("t_end"), cfg.get("ds"))
    exact = -2.0 * dF(2.0 * run.T) ** 2
    rep = Report("flux")
    rep.add_table("energy", ["T", "energy", "flux", "exact_flux"], zip(run.T, run.energy, run.flux, exact))
    inc = run.energy_increments()
    rep.scalars.update(
        steps=int(inc.size),
        energy_initial=float(run.energy[0]),
        energy_final=float(run.energy[-1]),
        max_energy_increment=float(np.max(inc)),
        max_flux_mismatch=float(np.max(np.abs(run.flux_mismatch()))),
        max_flux_error=float(np.max(np.abs(run.flux - exact))),
    )
    return rep


def run_strichartz(cfg: RunConfig) -> Report:
    from .evolution import fit_log_slope, strichartz_norm

    tr = load_trajectory(cfg.get("trajectory"))
    ts = np.geomspace(cfg.get("t_min"), cfg.get("t_max"), cfg.get("n_t"))
    vals = np.array([strichartz_norm(tr, float(t), cfg.get("delta")) for t in ts])
    rep = Report("strichartz")
    rep.add_table("strichartz", ["t", "norm"], zip(ts, vals))
    if np.all(vals > 0):
        fit = fit_log_slope(np.log(ts), vals)
        rep.scalars.update(exponent=fit.slope, fit_residual=fit.residual)
    else:
        rep.scalars.update(exponent=None, fit_residual=None)
    return rep


def _shoot_family(cfg: RunConfig):
    from .manifold import bump_family, gaussian_bump, va_family

    N = cfg.get("n")
    name, args = _parse_data_spec(cfg.get("data"))
    if name == "va":
        return va_family(N)
    if name == "bump":
        c, w, s = args or (0.3, 0.2, 0.02)
        b = gaussian_bump(N, c, w)
        return bump_family(type(b)(0, s * b.u1, s * b.u2))
    return bump_family(load_field_csv(cfg.get("data"), 0, N))


def run_shoot(cfg: RunConfig) -> Report:
    from .evolution import strichartz_exponent
    from .manifold import ShootConfig, shoot_radial, threshold_decay_fit

    sc = ShootConfig(N=cfg.get("n"), tau_end=cfg.get("tau_end"), tol=cfg.get("tol"))
    fam = _shoot_family(cfg)
    res = shoot_radial(fam, (cfg.get("alpha_min"), cfg.get("alpha_max")), sc)
    rep = Report("shoot")
    rep.add_table("outcomes", ["alpha", "outcome"], res.outcomes)
    rep.scalars.update(alpha_star=res.alpha_star, interval_lo=res.interval[0], interval_hi=res.interval[1],
                       bisections=res.bisections)
    if cfg.get("decay"):
        fit, tr = threshold_decay_fit(res, fam, sc)
        rep.scalars["decay_slope"] = fit.slope
        rep.scalars["strichartz_exponent"] = strichartz_exponent(tr).slope
        rep.add_table("norm_history", ["tau", "norm"], tr.norm_history)
    return rep


def run_manifold(cfg: RunConfig) -> Report:
    from .manifold import (IterationConfig, duhamel_iterate, equivalence_check, fixed_point_residual,
                           gaussian_bump, scaled_data, stable_part)

    N, delta = cfg.get("n"), cfg.get("delta")
    ic = IterationConfig(delta=delta, eps=cfg.get("eps"), tau_horizon=cfg.get("horizon"), N=N,
                         h=cfg.get("h"), tol=cfg.get("tol"))
    name, args = _parse_data_spec(cfg.get("data"))
    if name == "bump":
        c, w, v = args or (0.4, 0.2, 0.0)
        u = scaled_data(stable_part(gaussian_bump(N, c, w, v)), delta**2)
    else:
        u = load_field_csv(cfg.get("data"), 0, N)
    res = duhamel_iterate(u, ic)
    rep = Report("manifold")
    for k, c in enumerate(res.correction.coefficients):
        rep.scalars[f"F_c{k}"] = c
    rep.scalars.update(iterations=res.iterations, max_contraction=res.max_contraction,
                       converged=res.converged, tail_bound=ic.tail_bound)
    ratios = [None] + list(res.contraction)
    rep.add_table("contraction", ["iteration", "difference", "ratio"],
                  [(k + 1, d, ratios[k] if k < len(ratios) else None) for k, d in enumerate(res.differences)])
    rep.add_table("norm_history", ["tau", "norm"], res.trajectory.norm_history[:: max(1, int(0.05 / ic.h))])
    if cfg.get("verify"):
        rep.scalars["fixed_point_residual"] = fixed_point_residual(res)
        rep.scalars["equivalence"] = equivalence_check(res)
    return rep


def run_check(cfg: RunConfig) -> Report:
    rep_ = load_report(cfg.get("report"))
    gold = load_report(cfg.get("golden"))
    res = golden_check(rep_, gold, cfg.get("rtol"), cfg.get("atol"), cfg.get("tolerances"),
                       tables=not cfg.get("no_tables"))
    rep = Report("check")
    rep.scalars.update(passed=res.passed, n_failures=len(res.failures))
    rep.add_table("failures", ["failure"], [[f] for f in res.failures])
    return rep


DISPATCH = {
    "transform": run_transform,
    "specfun": run_specfun,
    "spectrum": run_spectrum,
    "evolve": run_evolve,
    "flux": run_flux,
    "strichartz": run_strichartz,
    "shoot": run_shoot,
    "manifold": run_manifold,
    "check": run_check,
}


def dispatch(cfg: RunConfig) -> Report:
    """Run the pipeline of ``cfg.subcommand`` and write the report if ``cfg.out`` is set."""
    t0 = time.perf_counter()
    rep = DISPATCH[cfg.subcommand](cfg)
    rep.metadata = {"version": __version__, "config": cfg.echo(), "wall_time": time.perf_counter() - t0}
    if cfg.out:
        rep.write(cfg.out)
    return rep


class RunError(Exception):
    """A module error wrapped with the run configuration."""

    def __init__(self, exc, cfg: RunConfig):
        self.exc = exc
        super().__init__(f"{type(exc).__name__}: {exc}\nconfig: {json.dumps(cfg.echo(), default=str)}")


def _emit(rep: Report, cfg: RunConfig):
    if cfg.subcommand == "check" and cfg.fmt == "csv":
        fails = [r[0] for r in rep.tables["failures"].rows]
        sys.stdout.write("PASS\n" if rep.scalars["passed"] else "FAIL\n" + "".join(f"  {f}\n" for f in fails))
        return
    if cfg.fmt == "json":
        sys.stdout.write(json.dumps(rep.to_dict(), indent=1, sort_keys=True) + "\n")
        return
    if rep.tables:
        sys.stdout.write(next(iter(rep.tables.values())).to_csv())
    if rep.scalars:
        sys.stderr.write(json.dumps(rep.to_dict()["scalars"], sort_keys=True) + "\n")


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except ValidationError as exc:
        print(f"hyperwave: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"hyperwave: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        rep = dispatch(cfg)
    except ValidationError as exc:
        print(f"hyperwave: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"hyperwave: I/O error: {RunError(exc, cfg)}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"hyperwave: numerical failure: {RunError(exc, cfg)}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, SchemaError) as exc:
        print(f"hyperwave: validation error: {RunError(exc, cfg)}", file=sys.stderr)
        return EXIT_VALIDATION
    if not cfg.out:
        _emit(rep, cfg)
    if cfg.subcommand == "check" and not rep.scalars["passed"]:
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
