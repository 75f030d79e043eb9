"""``mlrh`` command-line front end.

Subcommands emit CSV (or JSON) tables:

* ``hcurve``   H, t, method, re_h, im_h, re_dalpha_h, im_dalpha_h, error
* ``converge`` H, n, benchmark, max_abs_err_re, max_abs_err_im, max_abs_err_h,
  slope_re, slope_im, slope_h
* ``smile`` / ``price``  maturity, strike, price, implied_vol, method, error
* ``selftest`` pass/fail report, nonzero exit on failure
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import pricer
from .errors import DomainError
from .experiments import convergence_table, h_curve, log_grid
from .model_core import ModelParams, riccati_rhs

HCURVE_COLUMNS = ["H", "t", "method", "re_h", "im_h", "re_dalpha_h", "im_dalpha_h", "error"]
CONVERGE_COLUMNS = [
    "H",
    "n",
    "benchmark",
    "max_abs_err_re",
    "max_abs_err_im",
    "max_abs_err_h",
    "slope_re",
    "slope_im",
    "slope_h",
]
PRICE_COLUMNS = ["maturity", "strike", "price", "implied_vol", "method", "error"]


@dataclass
class RunConfig:
    H: list = field(default_factory=lambda: [0.05])
    nu: float = 0.4
    rho: float = -0.65
    lam: float = 1.0
    a_re: float = 3.0
    a_im: float = -0.5
    t_min: float = 0.01
    t_max: float = 10.0
    t_points: int = 200
    methods: list = field(default_factory=lambda: ["pade2", "pade3", "pade4", "pade5", "adams:1000"])
    orders: list = field(default_factory=lambda: [2, 3, 4, 5])
    adams_steps: int = 1000
    spot: float = 1.0
    strikes: list = field(default_factory=lambda: [0.8, 0.9, 1.0, 1.1, 1.2])
    maturities: list = field(default_factory=lambda: [0.25, 1.0])
    xi_times: list = field(default_factory=lambda: [0.0])
    xi_values: list = field(default_factory=lambda: [0.04])
    out: str | None = None
    format: str = "csv"

    def validate(self) -> None:
        for name in ("H", "methods", "orders", "strikes", "maturities", "xi_times", "xi_values"):
            if not getattr(self, name):
                raise DomainError(f"{name} must be nonempty")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        if not (0 < self.t_min < self.t_max) or self.t_points < 2:
            raise DomainError("need 0 < t_min < t_max and t_points >= 2")
        for h in self.H:
            self.params(h)
        self.curve()

    def params(self, H: float) -> ModelParams:
        return ModelParams(H=float(H), nu=self.nu, rho=self.rho, lam=self.lam)

    def curve(self) -> pricer.ForwardVarianceCurve:
        return pricer.ForwardVarianceCurve(tuple(map(float, self.xi_times)), tuple(map(float, self.xi_values)))

    @property
    def a(self) -> complex:
        return complex(self.a_re, self.a_im)


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (np.floating,)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: _json_value(r.get(c, "")) for c in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


_GNUPLOT = {
    "hcurve": """# gnuplot script for {data}
set datafile separator ','
set key autotitle columnhead
set logscale x
set multiplot layout 1,2
set title 'Re D^alpha h'
plot for [m in "{methods}"] '{data}' using (stringcolumn(3) eq m ? $2 : NaN):6 with lines title m
set title 'Im D^alpha h'
plot for [m in "{methods}"] '{data}' using (stringcolumn(3) eq m ? $2 : NaN):7 with lines title m
unset multiplot
""",
    "converge": """# gnuplot script for {data}
set datafile separator ','
set logscale y
set xlabel 'n'
plot '{data}' using 2:4 with linespoints title 'max |Re err|', '' using 2:5 with linespoints title 'max |Im err|'
""",
}


def emit(rows, columns, cfg: RunConfig, kind: str | None = None) -> None:
    text = render(rows, columns, cfg.format)
    if cfg.out:
        path = Path(cfg.out)
        path.write_text(text, newline="")
        if kind in _GNUPLOT and cfg.format == "csv":
            methods = " ".join(dict.fromkeys(r["method"] for r in rows)) if kind == "hcurve" else ""
            path.with_suffix(".gp").write_text(_GNUPLOT[kind].format(data=path.name, methods=methods))
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_hcurve(cfg: RunConfig) -> list[dict]:
    t = log_grid(cfg.t_min, cfg.t_max, cfg.t_points)
    rows = []
    for H in cfg.H:
        m = cfg.params(H)
        for meth in cfg.methods:
            err = ""
            try:
                h = np.asarray(h_curve(m, cfg.a, meth, t), dtype=complex)
                d = riccati_rhs(m, cfg.a, h)
            except Exception as exc:
                err = f"{type(exc).__name__}: {exc}"
                h = d = np.full(t.shape, complex(math.nan, math.nan))
            for ti, hi, di in zip(t, h, d):
                rows.append(
                    {
                        "H": float(H),
                        "t": float(ti),
                        "method": meth,
                        "re_h": float(hi.real),
                        "im_h": float(hi.imag),
                        "re_dalpha_h": float(di.real),
                        "im_dalpha_h": float(di.imag),
                        "error": err,
                    }
                )
    return rows


def cmd_converge(cfg: RunConfig) -> list[dict]:
    t = log_grid(cfg.t_min, cfg.t_max, cfg.t_points)
    rows = []
    for H in cfg.H:
        rows.extend(convergence_table(cfg.params(H), cfg.a, cfg.orders, t, adams_steps=cfg.adams_steps))
    return rows


def cmd_smile(cfg: RunConfig) -> list[dict]:
    rows = []
    for meth in cfg.methods:
        method = pricer.parse_method(meth)
        for H in cfg.H:
            rows.extend(pricer.smile(cfg.params(H), cfg.curve(), cfg.spot, cfg.strikes, cfg.maturities, method))
    return rows


def cmd_price(cfg: RunConfig) -> list[dict]:
    """One call price per method at the first strike and maturity."""
    rows = []
    for meth in cfg.methods:
        method = pricer.parse_method(meth)
        rows.extend(pricer.smile(cfg.params(cfg.H[0]), cfg.curve(), cfg.spot, cfg.strikes[:1], cfg.maturities[:1], method))
    return rows


# --------------------------------------------------------------------------
# argument handling


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _strs(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--H", type=_floats, help="Hurst exponent(s), comma separated")
    common.add_argument("--nu", type=float)
    common.add_argument("--rho", type=float)
    common.add_argument("--lam", type=float)
    common.add_argument("--a-re", dest="a_re", type=float)
    common.add_argument("--a-im", dest="a_im", type=float)
    common.add_argument("--t-min", dest="t_min", type=float)
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--t-points", dest="t_points", type=int)
    common.add_argument("--methods", type=_strs, help="e.g. pade3,pade5,adams:1000,hinf,series_small:20")
    common.add_argument("--orders", type=_ints)
    common.add_argument("--adams-steps", dest="adams_steps", type=int)
    common.add_argument("--spot", type=float)
    common.add_argument("--strikes", type=_floats)
    common.add_argument("--maturities", type=_floats)
    common.add_argument("--xi-times", dest="xi_times", type=_floats)
    common.add_argument("--xi-values", dest="xi_values", type=_floats)
    common.add_argument("--out")
    common.add_argument("--format", choices=["csv", "json"])

    p = argparse.ArgumentParser(prog="mlrh", description="Rough Heston Riccati solutions and option prices.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("hcurve", parents=[common], help="h and D^alpha h along a t-grid")
    sub.add_parser("converge", parents=[common], help="max errors of h^(n,n) against a benchmark")
    sub.add_parser("smile", parents=[common], help="implied-vol table")
    sub.add_parser("price", parents=[common], help="single call price")
    sub.add_parser("selftest", help="run the invariant suite")
    return p


# defaults that differ per subcommand; "spot" stands for the configured spot
COMMAND_DEFAULTS = {
    "smile": {"methods": ["pade5"]},
    "price": {"methods": ["pade5", "adams:1000"], "strikes": "spot", "maturities": [1.0]},
}


def load_config(ns: argparse.Namespace) -> RunConfig:
    """Built-in defaults, overridden by the config file, overridden by flags."""
    values: dict = {}
    known = {f.name for f in fields(RunConfig)}
    cfg_path = getattr(ns, "config", None)
    if cfg_path:
        data = json.loads(Path(cfg_path).read_text())
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown config fields: {sorted(unknown)}")
        values.update(data)
    values.update({k: v for k, v in vars(ns).items() if k in known})
    if "H" in values and not isinstance(values["H"], list):
        values["H"] = [values["H"]]
    for k, v in COMMAND_DEFAULTS.get(getattr(ns, "command", None), {}).items():
        if k not in values:
            values[k] = [float(values.get("spot", RunConfig.spot))] if v == "spot" else list(v)
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


COMMANDS = {
    "hcurve": (cmd_hcurve, HCURVE_COLUMNS),
    "converge": (cmd_converge, CONVERGE_COLUMNS),
    "smile": (cmd_smile, PRICE_COLUMNS),
    "price": (cmd_price, PRICE_COLUMNS),
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "selftest":
        from .selftest import run_selftest

        return run_selftest()
    try:
        cfg = load_config(ns)
    except (DomainError, ValueError, TypeError, OSError) as exc:
        print(f"mlrh: invalid configuration: {exc}", file=sys.stderr)
        return 2
    func, columns = COMMANDS[ns.command]
    emit(func(cfg), columns, cfg, ns.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
