"""Command-line front end.

Every subcommand evaluates a grid of parameter points, optionally in a
process pool, and writes one CSV or JSON file. Grid values come from a
``key = value`` config file and/or flags (flags win). A value is a single
number, a comma list, ``linspace(a, b, n)`` or ``logspace(a, b, n)``; the
latter spaces n points geometrically from a to b (endpoints, not exponents).
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis_fits import fit_power_law
from .closed_forms import (MEAN_FIELD_Z_NU, kz_exponent_b, s_irr_universal, squeezing_universal,
                           w_irr_universal)
from .coherence import entropy_split
from .errors import ConfigError, DomainError, NumericalError
from .gaussian_dynamics import ThermalSpec, cycle_outcome
from .ising_tfim import TFIMSpec, tfim_w_irr
from .protocol import RampSpec
from .work_statistics import (crooks_deviation, cumulants_from_distribution,
                              negative_work_probability, work_distribution)

COMMANDS = ("cycle", "workdist", "coherence", "ising", "scaling", "oracle")
LIST_KEYS = {"r", "tau", "two_omega_tau", "beta_omega", "n_beta", "g_f", "n_spins"}
SCALAR_KEYS = {"tol": float, "eps_tail": float, "workers": int, "seed": int, "format": str,
               "out": str, "bins": str, "dim": int, "extend_window": str}

DEFAULTS = {
    "cycle": {"r": "1,2,4", "two_omega_tau": "40", "n_beta": "0", "g_f": "1"},
    "workdist": {"r": "1", "n_beta": "0,1"},
    "coherence": {"r": "0.5,1,2,4", "n_beta": "0.5,1,2,4"},
    "ising": {"n_spins": "200", "r": "1", "tau": "logspace(10,1000,12)", "g_f": "1"},
    "scaling": {"r": "0.5,1,2,4", "tau": "logspace(100,1000,12)"},
    "oracle": {"r": "1", "two_omega_tau": "40", "n_beta": "0", "g_f": "1"},
}

_FUNC = re.compile(r"^(linspace|logspace)\(([^,]+),([^,]+),([^,]+)\)$")


def parse_values(text: str, key: str, line: int | None = None) -> list:
    """Expand a grid expression into a list of floats."""
    s = text.replace(" ", "")
    if not s:
        raise ConfigError("empty value", field=key, line=line)
    try:
        m = _FUNC.match(s)
        if m:
            kind, a, b, n = m.groups()
            a, b, n = float(a), float(b), int(n)
            if n < 1:
                raise ValueError("point count must be positive")
            if kind == "logspace":
                if a <= 0 or b <= 0:
                    raise ValueError("logspace endpoints must be positive")
                return [float(v) for v in np.geomspace(a, b, n)]
            return [float(v) for v in np.linspace(a, b, n)]
        return [float(v) for v in s.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse '{text}': {exc}", field=key, line=line) from None


def read_config_file(path) -> dict:
    """Raw ``key = value`` pairs, keeping line numbers for error reporting."""
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    with fh:
        for i, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError("expected 'key = value'", line=i)
            key, value = (p.strip() for p in text.split("=", 1))
            key = key.replace("-", "_")
            if key not in LIST_KEYS and key not in SCALAR_KEYS:
                raise ConfigError("unknown key", field=key, line=i)
            out[key] = (value, i)
    return out


@dataclass
class RunConfig:
    command: str
    grid: dict = field(default_factory=dict)
    tol: float = 1e-10
    eps_tail: float = 1e-10
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1
    seed: int = 0
    bins: bool = False
    dim: int = 120
    extend_window: bool = False

    def digest(self) -> str:
        """Hash of everything that affects the numbers; worker count and paths are excluded."""
        payload = {"command": self.command, "grid": self.grid, "tol": self.tol,
                   "eps_tail": self.eps_tail, "format": self.fmt, "seed": self.seed,
                   "bins": self.bins, "dim": self.dim, "extend_window": self.extend_window}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _truthy(value: str, key, line=None) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got '{value}'", field=key, line=line)


def build_config(command: str, file_values: dict, flag_values: dict) -> RunConfig:
    raw = {k: (v, None) for k, v in DEFAULTS[command].items()}
    if "beta_omega" in file_values or "beta_omega" in flag_values:
        raw.pop("n_beta", None)
    if "two_omega_tau" in raw and ("tau" in file_values or "tau" in flag_values):
        raw.pop("two_omega_tau")
    raw.update(file_values)
    raw.update({k: (v, None) for k, v in flag_values.items()})

    cfg = RunConfig(command=command)
    for key, (value, line) in raw.items():
        if key in LIST_KEYS:
            cfg.grid[key] = parse_values(value, key, line)
        elif key in ("format",):
            if value not in ("csv", "json"):
                raise ConfigError("format must be csv or json", field=key, line=line)
            cfg.fmt = value
        elif key == "out":
            cfg.out = value
        elif key in ("bins", "extend_window"):
            setattr(cfg, key, _truthy(value, key, line))
        else:
            try:
                setattr(cfg, key, SCALAR_KEYS[key](value))
            except ValueError:
                raise ConfigError(f"invalid value '{value}'", field=key, line=line) from None

    if "beta_omega" in cfg.grid and "n_beta" in cfg.grid:
        raise ConfigError("give either beta_omega or n_beta, not both", field="beta_omega")
    if "tau" in cfg.grid and "two_omega_tau" in cfg.grid:
        raise ConfigError("give either tau or two_omega_tau, not both", field="tau")
    if "two_omega_tau" in cfg.grid:
        cfg.grid["tau"] = [v / 2.0 for v in cfg.grid.pop("two_omega_tau")]
    for key, values in cfg.grid.items():
        if not values:
            raise ConfigError("range is empty", field=key)
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1", field="workers")
    if not 0 < cfg.tol < 1:
        raise ConfigError("tol must lie in (0, 1)", field="tol")
    if command == "scaling" and cfg.extend_window and "tau" not in flag_values \
            and "tau" not in file_values:
        cfg.grid["tau"] = parse_values("logspace(100,10000,16)", "tau")
    return cfg


def _thermal_list(cfg: RunConfig):
    if "beta_omega" in cfg.grid:
        return [ThermalSpec.from_beta(b) for b in cfg.grid["beta_omega"]]
    return [ThermalSpec.from_occupation(n) for n in cfg.grid.get("n_beta", [0.0])]


def _num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


# ---- point evaluators (module level so they pickle) ----

def _cycle_point(args):
    g_f, r, tau, th, tol = args
    out = cycle_outcome(RampSpec(g_f=g_f, r=r, tau=tau), th, tol)
    critical = g_f == 1.0
    return {
        "two_omega_tau": 2.0 * tau, "r": r, "g_f": g_f, "beta_omega": th.beta_omega,
        "n_beta": th.n_beta, "s": out.squeeze_amp, "w_irr": out.w_irr, "s_irr": out.s_irr,
        "s_theory": squeezing_universal(MEAN_FIELD_Z_NU, r) if critical else math.nan,
        "w_irr_theory": w_irr_universal(th.beta_omega, MEAN_FIELD_Z_NU, r) if critical else math.nan,
        "s_irr_theory": s_irr_universal(th.beta_omega, MEAN_FIELD_Z_NU, r) if critical else math.nan,
    }


def _workdist_point(args):
    th, r, tau, eps_tail, tol = args
    if tau is None:
        s = squeezing_universal(MEAN_FIELD_Z_NU, r)
    else:
        s = cycle_outcome(RampSpec(r=r, tau=tau), th, tol).squeeze_amp
    wd = work_distribution(th, s, eps_tail)
    k1, k2, k3 = cumulants_from_distribution(wd, 3)
    return {
        "n_beta": th.n_beta, "beta_omega": th.beta_omega, "r": r, "s": s,
        "p_v": negative_work_probability(wd), "kappa1": k1, "kappa2": k2, "kappa3": k3,
        "skewness": k3 / k2**1.5 if k2 > 0 else math.inf,
        "crooks_deviation": crooks_deviation(wd), "tail_mass": wd.tail_mass,
        "k": [int(k) for k in wd.ks], "probability": [float(p) for p in wd.values],
    }


def _coherence_point(args):
    th, r, eps_tail = args
    s = squeezing_universal(MEAN_FIELD_Z_NU, r)
    e = entropy_split(th, s, min(eps_tail, 1e-12))
    return {"n_beta": th.n_beta, "beta_omega": th.beta_omega, "r": r, "s": s,
            "C": e.coherence, "D": e.population, "S_irr": e.s_irr, "ratio": e.ratio}


def _ising_point(args):
    n, r, tau, g_f, tol = args
    w = tfim_w_irr(TFIMSpec(n_spins=n, ramp=RampSpec(g_f=g_f, r=r, tau=tau)), tol)
    mf = cycle_outcome(RampSpec(g_f=g_f, r=r, tau=tau), ThermalSpec.vacuum(), tol).w_irr
    return {"tau": tau, "N": n, "r": r, "g_f": g_f, "w_irr": w, "w_irr_mean_field": mf,
            "w_irr_mean_field_theory": w_irr_universal(math.inf, MEAN_FIELD_Z_NU, r)
            if g_f == 1.0 else math.nan}


def _scaling_point(args):
    r, tau, tol = args
    w = cycle_outcome(RampSpec(r=r, tau=tau), ThermalSpec.vacuum(), tol).w_irr
    return {"r": r, "tau": tau, "w_irr": w}


def _oracle_point(args):
    from .fock_oracle import propagate

    g_f, r, tau, th, tol, dim = args
    spec = RampSpec(g_f=g_f, r=r, tau=tau)
    st = propagate(spec, th, dim=dim, tol=tol)
    cov = cycle_outcome(spec, th, tol)
    return {"two_omega_tau": 2 * tau, "r": r, "n_beta": th.n_beta, "dim": st.dim,
            "leakage": st.leakage, "n_fock": st.mean_excitations(),
            "n_gaussian": cov.mean_excitations}


def _run(func, tasks, workers):
    if workers == 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps grid order whatever the completion order
        return list(pool.map(func, tasks))


def _grid_rows(cfg: RunConfig):
    g = cfg.grid
    c = cfg.command
    if c in ("cycle", "oracle"):
        tasks = [(gf, r, tau, th, cfg.tol) + ((cfg.dim,) if c == "oracle" else ())
                 for gf in g.get("g_f", [1.0]) for r in g["r"] for tau in g["tau"]
                 for th in _thermal_list(cfg)]
        return _run(_cycle_point if c == "cycle" else _oracle_point, tasks, cfg.workers), {}
    if c == "workdist":
        taus = g.get("tau", [None])
        tasks = [(th, r, tau, cfg.eps_tail, cfg.tol)
                 for th in _thermal_list(cfg) for r in g["r"] for tau in taus]
        return _run(_workdist_point, tasks, cfg.workers), {}
    if c == "coherence":
        tasks = [(th, r, cfg.eps_tail) for th in _thermal_list(cfg) for r in g["r"]]
        return _run(_coherence_point, tasks, cfg.workers), {}
    if c == "ising":
        tasks = [(int(n), r, tau, gf, cfg.tol) for n in g["n_spins"] for r in g["r"]
                 for gf in g["g_f"] for tau in g["tau"]]
        rows = _run(_ising_point, tasks, cfg.workers)
        fits = {}
        for n in g["n_spins"]:
            for r in g["r"]:
                for gf in g["g_f"]:
                    pts = [(x["tau"], x["w_irr"]) for x in rows
                           if x["N"] == int(n) and x["r"] == r and x["g_f"] == gf]
                    if len(pts) >= 4 and all(p[1] > 0 for p in pts):
                        f = fit_power_law(pts)
                        fits[f"N={int(n)},r={r:g},g_f={gf:g}"] = {
                            "slope": f.slope, "exponent": f.exponent, "prefactor": f.prefactor,
                            "r_squared": f.r_squared}
        return rows, {"fits": fits}
    if c == "scaling":
        tasks = [(r, tau, cfg.tol) for r in g["r"] for tau in g["tau"]]
        pts = _run(_scaling_point, tasks, cfg.workers)
        rows = []
        for r in g["r"]:
            limit = w_irr_universal(math.inf, MEAN_FIELD_Z_NU, r)
            mine = [(p["tau"], limit - p["w_irr"]) for p in pts if p["r"] == r]
            f = fit_power_law(mine)
            rows.append({"r": r, "b_fit": f.exponent, "b_theory": kz_exponent_b(MEAN_FIELD_Z_NU, r),
                         "r_squared": f.r_squared, "tau_min": f.window[0], "tau_max": f.window[1]})
        return rows, {}
    raise ConfigError(f"unknown command {c}")


CSV_COLUMNS = {
    "cycle": ["two_omega_tau", "r", "g_f", "beta_omega", "n_beta", "s", "w_irr", "s_irr",
              "s_theory", "w_irr_theory", "s_irr_theory"],
    "workdist": ["n_beta", "beta_omega", "r", "s", "p_v", "kappa1", "kappa2", "kappa3",
                 "skewness", "crooks_deviation", "tail_mass"],
    "coherence": ["n_beta", "beta_omega", "r", "s", "C", "D", "S_irr", "ratio"],
    "ising": ["tau", "N", "r", "g_f", "w_irr", "w_irr_mean_field", "w_irr_mean_field_theory"],
    "scaling": ["r", "b_fit", "b_theory", "r_squared", "tau_min", "tau_max"],
    "oracle": ["two_omega_tau", "r", "n_beta", "dim", "leakage", "n_fock", "n_gaussian"],
}


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.12g}"


def render(cfg: RunConfig, rows, extra) -> str:
    meta = {"tool": "squeezecycle", "version": __version__, "command": cfg.command,
            "config_hash": cfg.digest(), "tol": cfg.tol, "eps_tail": cfg.eps_tail,
            "seed": cfg.seed}
    if cfg.fmt == "json":
        def clean(obj):
            if isinstance(obj, dict):
                return {k: clean(v) for k, v in obj.items()}
            if isinstance(obj, list):
                return [clean(v) for v in obj]
            if isinstance(obj, (float, np.floating)):
                return _num(float(obj))
            if isinstance(obj, np.integer):
                return int(obj)
            return obj
        return json.dumps(clean({"metadata": {**meta, **extra}, "rows": rows}), indent=1) + "\n"

    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {value}\n")
    for key, value in extra.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    if cfg.command == "workdist" and cfg.bins:
        buf.write("n_beta,r,s,k,W_over_omega,probability\n")
        for row in rows:
            for k, p in zip(row["k"], row["probability"]):
                buf.write(f"{_fmt(row['n_beta'])},{_fmt(row['r'])},{_fmt(row['s'])},"
                          f"{k},{2 * k},{_fmt(p)}\n")
        return buf.getvalue()
    cols = CSV_COLUMNS[cfg.command]
    buf.write(",".join(cols) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squeezecycle", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="{cycle,workdist,coherence,ising,scaling}")
    helps = {
        "cycle": "covariance dynamics over a (g_f, r, tau, temperature) grid",
        "workdist": "work distributions, cumulants and negative-work probability",
        "coherence": "coherence and population entropy split",
        "ising": "transverse-field Ising chain work versus cycle time, with fit",
        "scaling": "finite-time exponent of the mean-field work",
    }
    for name in COMMANDS:
        kw = {"help": helps[name]} if name in helps else {}
        p = sub.add_parser(name, **kw)
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--workers", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--seed", type=int, help="recorded in the metadata only")
        for key in sorted(LIST_KEYS):
            p.add_argument("--" + key.replace("_", "-"), dest=key, metavar="GRID")
        p.add_argument("--eps-tail", dest="eps_tail", type=float)
        if name == "workdist":
            p.add_argument("--bins", action="store_const", const="true",
                           help="write per-k probabilities instead of summary rows")
        if name == "scaling":
            p.add_argument("--extend-window", dest="extend_window", action="store_const",
                           const="true", help="use tau up to 1e4 (slow)")
        if name == "oracle":
            p.add_argument("--dim", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = read_config_file(args.config) if args.config else {}
        flags = {}
        for key, value in vars(args).items():
            if key in ("command", "config") or value is None:
                continue
            flags[key] = str(value)
        cfg = build_config(args.command, file_values, flags)
        rows, extra = _grid_rows(cfg)
        text = render(cfg, rows, extra)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
