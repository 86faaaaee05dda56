"""Command-line entry point.

Exit codes: 0 when every check passes (or matches its ``expect`` field),
1 on a property violation, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path

from . import dims as dims_mod
from .fourier import cesaro_mean, fourier_coeffs, partial_sum, zygmund_mean
from .harness import (ConfigError, ExperimentConfig, build_exponent, build_family, build_report,
                      build_space, build_weight, experiments_from, jsonable, load_config, render,
                      run_boundedness, run_proof_trace)
from .norms import norm
from .weights import (WeightSpec, check_muckenhoupt, check_V_class, check_V_osc_class,
                      eval_weight, mo_indices)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


def demo_config():
    return json.loads(resources.files("varexp").joinpath("data/demo.json").read_text())


def _config(args, default=None):
    if args.config is None:
        if default is None:
            raise ConfigError("--config is required for this command")
        return default
    return load_config(args.config)


def _resolutions(args, data):
    if args.resolutions is not None:
        return [int(v) for v in args.resolutions.split(",")]
    return data.get("resolutions", [256, 1024])


def _single(args, data, **overrides):
    d = dict(data)
    d.setdefault("name", "cli")
    d.update(overrides)
    return ExperimentConfig.from_dict(
        d, seed=args.seed,
        resolutions=None if args.resolutions is None else _resolutions(args, d))


def flatten(obj, prefix=""):
    if isinstance(obj, dict):
        rows = []
        for k in sorted(obj, key=str):
            rows += flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return rows
    if isinstance(obj, (list, tuple)):
        rows = []
        for i, v in enumerate(obj):
            rows += flatten(v, f"{prefix}[{i}]")
        return rows
    return [(prefix, obj)]


def _emit(args, result, stem):
    if "experiments" in result:
        text = render(result, args.format)
    elif args.format == "json":
        text = json.dumps(jsonable(result), sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("key", "value"))
        for k, v in flatten(jsonable(result)):
            w.writerow((k, repr(v) if isinstance(v, float) else v))
        text = buf.getvalue()
    if args.out is None:
        sys.stdout.write(text)
        return
    path = Path(args.out) / f"{stem}.{args.format}"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    print(path)


# -- commands -----------------------------------------------------------------

def cmd_norm(args):
    data = _config(args, {"name": "norm"})
    cfg = _single(args, data)
    out = {}
    for n in cfg.resolutions:
        space = build_space(cfg.space, n)
        p = build_exponent(cfg.exponent, space)
        rho, ws = build_weight(cfg.weight, space)
        names, F = build_family(cfg, space, rho, p, ws)
        out[str(n)] = {name: norm(f, p, rho, space) for name, f in zip(names, F)}
    _emit(args, {"norms": out}, "norm")
    return EXIT_OK


def _boundedness(args, data, stem, **overrides):
    rep = run_boundedness(_single(args, data, **overrides))
    _emit(args, rep.to_dict(), stem)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_maximal(args):
    return _boundedness(args, _config(args, {"name": "maximal"}), "maximal",
                        operator={"id": "maximal"})


def cmd_operator_run(args):
    return _boundedness(args, _config(args), "operator")


def cmd_trace(args):
    data = dict(_config(args, {"name": "trace", "trace": {"pairs": "identity"}}))
    data["kind"] = "trace"
    res = run_proof_trace(_single(args, data))
    _emit(args, res, "trace")
    return EXIT_OK if res["ok"] else EXIT_VIOLATION


def _dims_arg(data, space):
    d = data.get("dims", "auto")
    return dims_mod.dim_bounds(space) if d == "auto" else float(d)


def cmd_weights_check(args):
    data = _config(args)
    if "weight" not in data:
        raise ConfigError("config needs a 'weight' entry")
    n = _resolutions(args, data)[-1]
    space = build_space(data.get("space", {"kind": "interval"}), n)
    p = build_exponent(data.get("exponent", {"kind": "constant", "value": 2.0}), space)
    ws = WeightSpec.from_dict(data["weight"])
    dims = _dims_arg(data, space)
    osc = check_V_osc_class(ws, p, dims, space)
    result = {"V_osc": {"member": osc.member, "margin": osc.margin, "details": osc.details},
              "indices": [{"m": i.m, "M": i.M, "converged": i.converged}
                          for i in (mo_indices(a.factor) for a in ws.anchors)]}
    member = osc.member
    try:
        v = check_V_class(ws, p, dims, space)
        result["V"] = {"member": v.member, "margin": v.margin, "details": v.details}
        member = member and v.member
    except ValueError:
        pass
    _emit(args, result, "weights")
    return _expect(data, "member" if member else "nonmember")


def cmd_dims(args):
    data = _config(args, {"space": {"kind": "circle"}, "resolutions": [1 << 20]})
    out = {}
    for n in _resolutions(args, data):
        space = build_space(data.get("space", {"kind": "interval"}), n)
        b = dims_mod.dim_bounds(space, max_points=int(data.get("max_points", 16)))
        out[str(n)] = {"bounds": b.to_dict(), "doubling": dims_mod.doubling_constant(
            space, max_centers=int(data.get("max_centers", 256)))}
    _emit(args, out, "dims")
    return EXIT_OK


def cmd_apcheck(args):
    data = _config(args)
    if "weight" not in data or "s" not in data:
        raise ConfigError("config needs 'weight' and 's'")
    ws = WeightSpec.from_dict(data["weight"])
    power = float(data.get("power", 1.0))
    spaces = [build_space(data.get("space", {"kind": "interval"}), n)
              for n in _resolutions(args, data)]
    rep = check_muckenhoupt(lambda sp: eval_weight(ws, sp) ** power, float(data["s"]), spaces)
    _emit(args, {"s": rep.s, "constant": rep.constant, "holds_estimate": rep.holds_estimate,
                 "trend": list(rep.trend)}, "apcheck")
    return _expect(data, "holds" if rep.holds_estimate else "fails")


MEANS = {"partial": partial_sum, "zygmund": zygmund_mean, "cesaro": cesaro_mean}


def cmd_fourier_sum(args):
    data = _config(args, {"name": "fourier", "space": {"kind": "circle"}})
    mean = data.get("mean", "partial")
    if mean not in MEANS:
        raise ConfigError(f"unknown mean {mean!r}")
    orders = [int(k) for k in data.get("orders", [4, 16, 64])]
    cfg = _single(args, {k: v for k, v in data.items() if k not in ("mean", "orders")})
    out = {}
    for n in cfg.resolutions:
        space = build_space(cfg.space, n)
        p = build_exponent(cfg.exponent, space)
        rho, ws = build_weight(cfg.weight, space)
        names, F = build_family(cfg, space, rho, p, ws)
        series = fourier_coeffs(F, space)
        out[str(n)] = {}
        for k in orders:
            S = MEANS[mean](series, k, space)
            out[str(n)][str(k)] = {name: norm(f - s, p, rho, space) / norm(f, p, rho, space)
                                   for name, f, s in zip(names, F, S)}
    _emit(args, {"mean": mean, "relative_error": out}, "fourier")
    return EXIT_OK


def cmd_report(args):
    data = _config(args, demo_config())
    res = None if args.resolutions is None else _resolutions(args, data)
    exps = experiments_from(data, seed=args.seed, resolutions=res)
    report = build_report(exps)
    _emit(args, report, "report")
    return EXIT_OK if all(e["ok"] for e in report["experiments"]) else EXIT_VIOLATION


def _expect(data, outcome):
    exp = data.get("expect")
    return EXIT_OK if exp is None or exp == outcome else EXIT_VIOLATION


# -- parser -------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment JSON file")
    common.add_argument("--seed", type=int, default=None, help="seed for random families")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--resolutions", help="comma-separated grid sizes, e.g. 256,1024,4096")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="varexp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(p, name, fn, help_):
        s = p.add_parser(name, parents=[common], help=help_)
        s.set_defaults(func=fn)
        return s

    leaf(sub, "norm", cmd_norm, "weighted Luxemburg norms of the test family")
    leaf(sub, "maximal", cmd_maximal, "maximal-operator boundedness sweep")
    w = sub.add_parser("weights", help="weight admissibility")
    w = w.add_subparsers(dest="sub", required=True)
    leaf(w, "check", cmd_weights_check, "V and V^osc membership and indices")
    leaf(sub, "dims", cmd_dims, "local dimensions and doubling constant")
    leaf(sub, "apcheck", cmd_apcheck, "Muckenhoupt constant over a refinement sweep")
    o = sub.add_parser("operator", help="operator experiments")
    o = o.add_subparsers(dest="sub", required=True)
    leaf(o, "run", cmd_operator_run, "boundedness sweep for a configured operator")
    e = sub.add_parser("extrapolate", help="extrapolation traces")
    e = e.add_subparsers(dest="sub", required=True)
    leaf(e, "trace", cmd_trace, "step-by-step trace over a pair family")
    f = sub.add_parser("fourier", help="Fourier summation")
    f = f.add_subparsers(dest="sub", required=True)
    leaf(f, "sum", cmd_fourier_sum, "relative errors of partial sums or means")
    leaf(sub, "report", cmd_report, "run all experiments of a config (default: bundled demo)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc!r}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
