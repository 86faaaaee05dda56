"""Experiment configuration, boundedness sweeps, proof-trace runs and report output."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .exponent import VariableExponent, sobolev_exponent
from .extrapolation import (dual_q_tilde, estimate_C0, extremal_h, rubio_de_francia,
                            trace_extrapolation)
from .families import nonzero, probe_family, standard_family
from .fourier import continuous_multiplier, fourier_coeffs, littlewood_paley_square, majorant
from .norms import modular, norm
from .operators import (KernelSpec, cauchy_singular, cz_apply, fractional_maximal,
                        hl_maximal, metric_potential, riesz_potential, sharp_maximal)
from .space import (UniformGrid1D, build_carleson_curve, build_circle_grid,
                    build_interval_grid)
from .weights import WeightSpec, eval_weight

BOUNDED_GROWTH = 0.25
GROWING_GROWTH = 1.0


class ConfigError(ValueError):
    """Invalid or incompatible experiment configuration."""


# -- configuration ------------------------------------------------------------

def build_space(spec, n):
    kind = spec.get("kind", "interval")
    if kind == "interval":
        dens = spec.get("density")
        density = None
        if dens is not None:
            if dens.get("kind") != "power":
                raise ConfigError(f"unknown density kind {dens.get('kind')!r}")
            beta, at = float(dens["beta"]), float(dens.get("at", 0.0))

            def density(x):
                return np.abs(x - at) ** beta
        return build_interval_grid(float(spec.get("a", 0.0)), float(spec.get("b", 1.0)), n,
                                   density=density,
                                   unbounded_model=bool(spec.get("unbounded_model", False)))
    if kind == "circle":
        return build_circle_grid(n)
    if kind == "curve":
        params = {k: v for k, v in spec.items() if k not in ("kind", "curve")}
        return build_carleson_curve(spec["curve"], n, **params)
    raise ConfigError(f"unknown space kind {kind!r}")


def _coordinate(space):
    return space.nodes if isinstance(space, UniformGrid1D) else space.param


def build_exponent(spec, space) -> VariableExponent:
    """``constant`` (value), ``affine`` (c0 + c1 x) or ``smoothed_step``
    (left, right, at, width), each with an optional ``tail`` {value, radius}."""
    kind = spec.get("kind", "constant")
    x = _coordinate(space)
    if kind == "constant":
        v = np.full(space.n, float(spec["value"]))
    elif kind == "affine":
        v = float(spec["c0"]) + float(spec["c1"]) * x
    elif kind == "smoothed_step":
        left, right = float(spec["left"]), float(spec["right"])
        s = 0.5 * (1 + np.tanh((x - float(spec["at"])) / float(spec["width"])))
        v = left + (right - left) * s
    else:
        raise ConfigError(f"unknown exponent kind {kind!r}")
    tail = spec.get("tail")
    if tail is None:
        return VariableExponent(v)
    value, radius = float(tail["value"]), float(tail["radius"])
    v = np.where(space.distances_from(space.origin) > radius, value, v)
    return VariableExponent(v, value, radius)


def build_weight(spec, space):
    if spec is None:
        return np.ones(space.n), WeightSpec()
    ws = WeightSpec.from_dict(spec)
    return eval_weight(ws, space), ws


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str = "boundedness"
    space: dict = field(default_factory=lambda: {"kind": "interval", "a": 0.0, "b": 1.0})
    exponent: dict = field(default_factory=lambda: {"kind": "constant", "value": 2.0})
    weight: dict | None = None
    operator: dict = field(default_factory=lambda: {"id": "maximal"})
    family: str = "standard"
    statistic: str = "norm"
    resolutions: tuple = (256, 1024)
    seed: int = 0
    trace: dict = field(default_factory=dict)
    expect: object = None

    def __post_init__(self):
        r = tuple(int(v) for v in self.resolutions)
        if not r or any(b <= a for a, b in zip(r, r[1:])):
            raise ConfigError("resolutions must be non-empty and strictly increasing")
        object.__setattr__(self, "resolutions", r)
        if self.kind not in ("boundedness", "trace"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.family not in ("standard", "standard+probes"):
            raise ConfigError(f"unknown family {self.family!r}")
        if self.statistic not in ("norm", "modular"):
            raise ConfigError(f"unknown statistic {self.statistic!r}")
        if self.kind == "boundedness" and self.operator.get("id") not in OPERATORS:
            raise ConfigError(f"unknown operator {self.operator.get('id')!r}")

    @classmethod
    def from_dict(cls, d, *, seed=None, resolutions=None):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        d = dict(d)
        if "name" not in d:
            raise ConfigError("experiment needs a name")
        if seed is not None:
            d["seed"] = seed
        if resolutions is not None:
            d["resolutions"] = resolutions
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path):
    """Read a JSON file holding one experiment or ``{"experiments": [...]}``."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return data


def experiments_from(data, *, seed=None, resolutions=None):
    items = data.get("experiments", [data]) if isinstance(data, dict) else data
    return [ExperimentConfig.from_dict(e, seed=seed, resolutions=resolutions) for e in items]


# -- operators ----------------------------------------------------------------

def _gamma_q(p, params, key):
    g = float(params[key])
    if not p.p_plus * g < 1:
        raise ConfigError(f"need p+ < 1/{key}: p+={p.p_plus}, {key}={g}")
    return sobolev_exponent(p, g)


def _op_identity(F, space, p, params):
    return F, p


def _op_maximal(F, space, p, params):
    return hl_maximal(F, space), p


def _op_sharp(F, space, p, params):
    return np.stack([sharp_maximal(f, space) for f in F]), p


def _op_fractional_maximal(F, space, p, params):
    q = _gamma_q(p, params, "gamma")
    return fractional_maximal(F, float(params["gamma"]), space), q


def _op_potential(F, space, p, params):
    q = _gamma_q(p, params, "gamma")
    return metric_potential(F, float(params["gamma"]), space), q


def _op_riesz(F, space, p, params):
    q = _gamma_q(p, params, "alpha")
    return riesz_potential(F, float(params["alpha"]), space), q


def _op_singular(F, space, p, params):
    spec = {k: v for k, v in params.items() if k != "id"}
    spec.setdefault("kind", "hilbert")
    spec.setdefault("eps", 0.0)
    return cz_apply(F, KernelSpec.from_dict(spec), space).output, p


def _op_cauchy(F, space, p, params):
    return cauchy_singular(F, space), p


def _op_conjugate(F, space, p, params):
    return continuous_multiplier("conjugate", F, space).real, p


def _op_majorant(F, space, p, params):
    return majorant(fourier_coeffs(F, space), space), p


def _op_lp_square(F, space, p, params):
    return littlewood_paley_square(fourier_coeffs(F, space), space), p


OPERATORS = {
    "identity": _op_identity,
    "maximal": _op_maximal,
    "sharp_maximal": _op_sharp,
    "fractional_maximal": _op_fractional_maximal,
    "potential": _op_potential,
    "riesz": _op_riesz,
    "singular": _op_singular,
    "cauchy": _op_cauchy,
    "conjugate": _op_conjugate,
    "majorant": _op_majorant,
    "lp_square": _op_lp_square,
}


def build_family(cfg, space, rho, p, ws):
    names, funcs = standard_family(space, cfg.seed)
    if cfg.family == "standard+probes":
        anchors = [a.point if a.point is not None else a.at for a in ws.anchors]
        pn, pf = probe_family(space, rho, p.values, anchors)
        names, funcs = names + pn, np.vstack([funcs, pf])
    return nonzero(names, funcs)


# -- experiments --------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentReport:
    name: str
    operator: str
    resolutions: tuple
    ratios: dict
    max_ratio: tuple
    growth: float
    slope: float
    verdict: str
    expect: object = None

    @property
    def ok(self) -> bool:
        return self.expect is None or self.expect == self.verdict

    def to_dict(self):
        return {"name": self.name, "kind": "boundedness", "operator": self.operator,
                "resolutions": list(self.resolutions),
                "ratios": {str(n): {k: float(v) for k, v in r.items()}
                           for n, r in self.ratios.items()},
                "max_ratio": [float(v) for v in self.max_ratio], "growth": float(self.growth),
                "slope": float(self.slope), "verdict": self.verdict, "expect": self.expect,
                "ok": self.ok}


def verdict_for(max_ratios):
    """``bounded`` below 25% growth over the sweep, ``growing`` from 100%."""
    if len(max_ratios) < 2:
        return 0.0, "inconclusive"
    growth = max_ratios[-1] / max_ratios[0] - 1
    if growth < BOUNDED_GROWTH:
        return growth, "bounded"
    if growth >= GROWING_GROWTH:
        return growth, "growing"
    return growth, "inconclusive"


def loglog_slope(ns, values):
    if len(ns) < 2:
        return 0.0
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def resolution_ratios(cfg: ExperimentConfig, n):
    """Per-function ratios ``||rho T f||_q / ||rho f||_p`` at size ``n``.

    The modular statistic replaces norms by integrals when requested.
    """
    space = build_space(cfg.space, n)
    try:
        p = build_exponent(cfg.exponent, space)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rho, ws = build_weight(cfg.weight, space)
    names, F = build_family(cfg, space, rho, p, ws)
    params = {k: v for k, v in cfg.operator.items() if k != "id"}
    try:
        T, q = OPERATORS[cfg.operator["id"]](F, space, p, params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"operator {cfg.operator['id']!r}: {exc}") from exc
    out = {}
    for name, f, tf in zip(names, F, T):
        nf = norm(f, p, rho, space)
        if cfg.statistic == "norm":
            out[name] = norm(tf, q, rho, space) / nf
        else:
            out[name] = modular(tf / nf, q, rho, space, 1.0)
    return out


def run_boundedness(cfg: ExperimentConfig) -> ExperimentReport:
    ratios = {n: resolution_ratios(cfg, n) for n in cfg.resolutions}
    mx = tuple(max(r.values()) for r in ratios.values())
    growth, verdict = verdict_for(mx)
    return ExperimentReport(cfg.name, cfg.operator["id"], cfg.resolutions, ratios, mx, growth,
                            loglog_slope(cfg.resolutions, mx), verdict, cfg.expect)


def run_proof_trace(cfg: ExperimentConfig) -> dict:
    """Trace every pair of the family at each resolution.

    ``trace`` keys: ``p0``, ``q0``, ``pairs`` (``identity`` or ``maximal``),
    ``c0`` (number or ``"sweep"``), ``c0_scale`` (default 1) and ``safety``
    for the swept constant (default 1.05).
    """
    t = cfg.trace
    p0, q0 = float(t.get("p0", 1.5)), float(t.get("q0", 1.5))
    pairs_kind = t.get("pairs", "identity")
    if pairs_kind not in ("identity", "maximal"):
        raise ConfigError(f"unknown pair family {pairs_kind!r}")
    runs, counts = [], {}
    for n in cfg.resolutions:
        space = build_space(cfg.space, n)
        try:
            p = build_exponent(cfg.exponent, space)
            qtd = dual_q_tilde(p, p0, q0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        rho, _ = build_weight(cfg.weight, space)
        names, F = nonzero(*standard_family(space, cfg.seed))
        G = np.abs(F)
        Fs = G if pairs_kind == "identity" else hl_maximal(G, space)
        C0 = estimate_C0(p, rho, p0, q0, space)
        H = np.stack([extremal_h(f, p, rho, p0, q0, space) for f in Fs])
        H = H / np.array([norm(h, qtd, rho ** (-q0), space) for h in H])[:, None]
        SH = rubio_de_francia(H, C0, space=space)["Sphi"]
        c0 = t.get("c0", "sweep")
        if c0 == "sweep":
            vals = []
            for f, g, sh in zip(Fs, G, SH):
                num = space.integrate(f**q0 * sh) ** (1 / q0)
                den = space.integrate(g**p0 * sh ** (p0 / q0)) ** (1 / p0)
                vals.append(num / den)
            c0 = float(t.get("safety", 1.05)) * max(vals)
        c0 = float(c0) * float(t.get("c0_scale", 1.0))
        for name, f, g, h, sh in zip(names, Fs, G, H, SH):
            tr = trace_extrapolation(f, g, p, rho, p0, q0, h, c0, space, C0=C0, Sh=sh)
            d = tr.to_dict()
            d.update({"resolution": n, "function": name})
            runs.append(d)
            for s in tr.steps:
                c = counts.setdefault(s.step, {"pass": 0, "fail": 0})
                c["pass" if s.passed else "fail"] += 1
    failed = sorted(k for k, v in counts.items() if v["fail"])
    expect = cfg.expect
    ok = (not failed) if expect is None else failed == sorted(expect)
    return {"name": cfg.name, "kind": "trace", "runs": runs, "counts": counts,
            "failed_steps": failed, "expect": expect, "ok": ok}


def run_experiment(cfg: ExperimentConfig) -> dict:
    if cfg.kind == "trace":
        return run_proof_trace(cfg)
    return run_boundedness(cfg).to_dict()


def build_report(experiments) -> dict:
    return {"version": __version__, "numpy": np.__version__,
            "experiments": [run_experiment(c) for c in experiments]}


# -- output -------------------------------------------------------------------

def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def report_rows(report):
    """Flat ``(experiment, resolution, item, field, value)`` rows."""
    rows = []
    for e in report.get("experiments", []):
        if e["kind"] == "boundedness":
            for n, r in e["ratios"].items():
                for fn, v in r.items():
                    rows.append((e["name"], int(n), fn, "ratio", v))
        else:
            for run in e["runs"]:
                for s in run["steps"]:
                    rows.append((e["name"], run["resolution"], run["function"],
                                 f"slack:{s['step']}", s["slack"]))
                rows.append((e["name"], run["resolution"], run["function"], "final_ratio",
                             run["final_ratio"]))
    return rows


def render(report, fmt="json") -> str:
    report = jsonable(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("experiment", "resolution", "item", "field", "value"))
        for row in report_rows(report):
            w.writerow(row[:4] + (repr(float(row[4])),))
        return buf.getvalue()
    raise ConfigError(f"unknown format {fmt!r}")


def report_emit(report, path, fmt="json") -> Path:
    """Write the report; output is byte-stable for a fixed config and seed."""
    path = Path(path)
    text = render(report, fmt)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path
