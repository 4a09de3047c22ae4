"""Command-line front end: ``proxkit {catalog,check,search,calculus,pa}``.

Exit status: 0 pass / success, 1 fail (a witness is written), 2 usage or
oracle error, 3 inconclusive (too few localized samples).  The environment
variable PROXKIT_SEED overrides --seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import calculus as calc
from . import catalog
from .certify import (
    NotFound,
    ParaProxCertificate,
    SamplerConfig,
    ViolationWitness,
    check_monotone_localization,
    check_para_prox_regular,
    check_proximal_subgradient,
    replay_witness,
    search_certificate,
)
from .envelopes import Grid, nc_pa_table, pa_convex_env_table, pa_convex_table
from .errors import ProxkitError
from .model import Box, FunctionOracle, as_parametrized, eval_subdifferential_x
from .piecewise import load_function_spec

EXIT_PASS, EXIT_FAIL, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2, 3
REPLAY_TOL = 1e-12


class UsageError(ProxkitError):
    pass


@dataclass
class RunConfig:
    command: str
    function_ref: Optional[str] = None
    seed: int = 0
    output: Optional[str] = None
    options: dict = field(default_factory=dict)


def _vector(text: Optional[str]) -> np.ndarray:
    if text is None or text.strip() == "":
        return np.zeros(0)
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}; use comma-separated numbers") from None


def _floats(text: str) -> list:
    return [float(t) for t in _vector(text)]


def resolve_function(ref: str):
    """Catalog id, or path to a piecewise-polynomial JSON spec."""
    if ref in catalog.CATALOG:
        return catalog.oracle(ref)
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise UsageError(f"spec file {ref!r} not found")
        return load_function_spec(path)
    raise UsageError(f"unknown function {ref!r}; known catalog ids: {', '.join(sorted(catalog.CATALOG))}")


def _emit(payload: dict, output: Optional[str]):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _exit_for(verdict: str) -> int:
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL}.get(verdict, EXIT_INCONCLUSIVE)


def _sampler(args, seed: int) -> SamplerConfig:
    return SamplerConfig(points=args.points, seed=seed)


# ---------------------------------------------------------------------------
# subcommands

def cmd_catalog(cfg: RunConfig, args) -> int:
    entries = []
    for e in sorted(catalog.CATALOG.values(), key=lambda e: e.id):
        F = e.oracle
        entries.append({
            "id": e.id,
            "parametrized": e.parametrized,
            "lambda_dim": F.lambda_dim if e.parametrized else 0,
            "properties": sorted(e.properties),
            "threshold": e.threshold,
            "global_r": e.global_r,
            "lambda_region": None if e.lambda_region is None else e.lambda_region.to_list(),
        })
    _emit({"catalog": entries, "seed": cfg.seed}, cfg.output)
    return EXIT_PASS


def _replay(f, path: str, cfg: RunConfig) -> int:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    w = data.get("witness", data)
    if w is None:
        raise UsageError("report carries no witness")
    witness = ViolationWitness.from_dict(w)
    replayed = replay_witness(f, witness)
    ok = abs(replayed - witness.margin) <= REPLAY_TOL and replayed < 0
    _emit({"replayed_margin": replayed, "reported_margin": witness.margin,
           "reproduced": bool(ok), "seed": cfg.seed}, cfg.output)
    return EXIT_FAIL if ok else EXIT_PASS


def cmd_check(cfg: RunConfig, args) -> int:
    f = resolve_function(args.function)
    if args.replay_witness:
        return _replay(f, args.replay_witness, cfg)
    F = as_parametrized(f)
    xbar = _vector(args.xbar) if args.xbar is not None else np.zeros(F.x_dim)
    lambdabar = _vector(args.lambdabar)
    if args.vbar is not None:
        vbar = _vector(args.vbar)
    else:
        vbar = eval_subdifferential_x(F, xbar, lambdabar).generators[0]
    sampler = _sampler(args, cfg.seed)
    cert = ParaProxCertificate(xbar, lambdabar, vbar, args.eps, args.r)
    if args.kind == "direct":
        report = check_para_prox_regular(F, cert, sampler)
    elif args.kind == "monotone":
        report = check_monotone_localization(F, cert, sampler)
    else:
        report = check_proximal_subgradient(F, xbar, lambdabar, vbar, args.eps, args.r, sampler)
    payload = report.to_dict()
    payload["function"] = args.function
    _emit(payload, cfg.output)
    return _exit_for(report.verdict)


def cmd_search(cfg: RunConfig, args) -> int:
    f = resolve_function(args.function)
    F = as_parametrized(f)
    xbar = _vector(args.xbar) if args.xbar is not None else np.zeros(F.x_dim)
    lambdabar = _vector(args.lambdabar)
    vbar = _vector(args.vbar) if args.vbar is not None else eval_subdifferential_x(F, xbar, lambdabar).generators[0]
    res = search_certificate(F, xbar, lambdabar, vbar, _sampler(args, cfg.seed),
                             eps_grid=_floats(args.eps_grid), r_grid=_floats(args.r_grid))
    found = not isinstance(res, NotFound)
    _emit({"function": args.function, "found": found,
           "certificate": res.to_dict() if found else None,
           "eps_grid": sorted(_floats(args.eps_grid), reverse=True), "r_grid": sorted(_floats(args.r_grid)),
           "seed": cfg.seed}, cfg.output)
    return EXIT_PASS if found else EXIT_FAIL


RULES = ("scalar", "scalar-para", "sum", "wsum", "para-sum", "para-max", "amenable")


def _calculus_params(rule: str, spec: dict):
    ps = [calc.PRParams(*p) for p in spec.get("params", [])]
    lam = spec.get("lambda")
    if rule == "scalar":
        return calc.scalar_mult_params(ps[0], lam if np.isscalar(lam) else lam[0])
    if rule == "scalar-para":
        return calc.scalar_mult_para_params(ps[0], lam if np.isscalar(lam) else lam[0])
    if rule == "sum":
        return calc.sum_params(ps)
    if rule == "wsum":
        return calc.weighted_sum_params(ps, lam)
    if rule == "para-sum":
        return calc.para_sum_params(ps, lam)
    if rule == "para-max":
        fs = [catalog.oracle(i) for i in spec["functions"]] if "functions" in spec else None
        return calc.para_max_params(ps, lam, fs)
    # amenable: composition with the diagonal map unless "map" says otherwise
    maps = {"diagonal": lambda m: calc.diagonal_map(m), "square_pair": lambda m: calc.square_pair_map(),
            "identity": lambda m: calc.identity_map(1)}
    kind = spec.get("map", "diagonal")
    if kind not in maps:
        raise UsageError(f"unknown map {kind!r}; choose from {sorted(maps)}")
    Fmap = maps[kind](len(ps))
    x_box = Box(*[np.asarray(b, float) for b in spec.get("x_box", [[-1.0] * Fmap.n, [1.0] * Fmap.n])])
    y_box = Box(*[np.asarray(b, float) for b in spec.get("y_box", [[-1.0] * Fmap.m, [1.0] * Fmap.m])])
    consts = calc.estimate_amenable_constants(Fmap, y_box, x_box, ps, seed=spec.get("seed", 0))
    eps = spec.get("eps", min(p.eps for p in ps))
    return calc.amenable_params(consts, eps), consts, Fmap


def _validation_oracle(rule: str, spec: dict, Fmap=None):
    from .model import build_weighted_max, build_weighted_sum
    fs = [catalog.oracle(i) for i in spec["functions"]]
    if rule in ("wsum", "para-sum"):
        return build_weighted_sum(fs), np.asarray(spec["lambda"], float)
    if rule == "para-max":
        return build_weighted_max(fs), np.asarray(spec["lambda"], float)
    if rule == "amenable":
        return as_parametrized(calc.compose_separable(fs, Fmap)), np.zeros(0)
    raise UsageError(f"--validate is not available for rule {rule!r}")


def cmd_calculus(cfg: RunConfig, args) -> int:
    raw = args.input
    text = Path(raw).read_text(encoding="utf-8") if Path(raw).exists() else raw
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"calculus input, line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    out = _calculus_params(args.rule, spec)
    payload = {"rule": args.rule, "seed": cfg.seed}
    Fmap = None
    if isinstance(out, tuple):
        params, consts, Fmap = out
        payload["constants"] = consts.to_dict()
    else:
        params = out
    payload["params"] = params.to_dict()
    status = EXIT_PASS
    if args.validate:
        F, lambdabar = _validation_oracle(args.rule, spec, Fmap)
        xbar = np.asarray(spec.get("xbar", [0.0]), float)
        vbar = eval_subdifferential_x(F, xbar, lambdabar).generators[0]
        cert = ParaProxCertificate(xbar, lambdabar, vbar, params.eps, params.r)
        report = check_para_prox_regular(F, cert, SamplerConfig(seed=cfg.seed))
        payload["validation"] = report.to_dict()
        status = _exit_for(report.verdict)
    _emit(payload, cfg.output)
    return status


def cmd_pa(cfg: RunConfig, args) -> int:
    f0, f1 = resolve_function(args.f0), resolve_function(args.f1)
    if not (isinstance(f0, FunctionOracle) and isinstance(f1, FunctionOracle)):
        raise UsageError("pa needs unparametrized functions")
    grid = Grid(Box.cube(args.box[0], args.box[1], 1), args.points)
    convex = f0.convex and f1.convex
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "lambda", "pa_convex", "pa_convex_env", "nc_pa"])
    for lam in _floats(args.lambdas):
        a = pa_convex_table(f0, f1, lam, grid) if convex else None
        b = pa_convex_env_table(f0, f1, lam, grid) if convex else None
        c = nc_pa_table(f0, f1, args.r, lam, grid) if 0.0 < lam < 1.0 else None
        for i, x in enumerate(grid.nodes[:, 0]):
            w.writerow([repr(float(x)), repr(lam)] + ["" if t is None else repr(float(t[i]) + 0.0) for t in (a, b, c)])
    text = buf.getvalue()
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PASS


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxkit", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    D = argparse.ArgumentDefaultsHelpFormatter

    def common(sp):
        sp.add_argument("--seed", type=int, default=0, help="sampler seed (PROXKIT_SEED overrides)")
        sp.add_argument("--output", "-o", default=None, help="also write the report to this file")

    common(sub.add_parser("catalog", help="list catalog functions", formatter_class=D))

    def cert_flags(sp):
        sp.add_argument("--function", required=True, help="catalog id or piecewise-polynomial spec .json")
        sp.add_argument("--xbar", default=None, help="base point, comma-separated (default: origin)")
        sp.add_argument("--lambdabar", default="", help="base parameter, comma-separated")
        sp.add_argument("--vbar", default=None, help="base subgradient (default: first generator)")
        sp.add_argument("--points", type=int, default=11, help="lattice points per axis")
        common(sp)

    c = sub.add_parser("check", help="check a certificate", formatter_class=D)
    cert_flags(c)
    c.add_argument("--eps", type=float, default=0.5)
    c.add_argument("--r", type=float, default=0.0)
    c.add_argument("--kind", choices=("direct", "monotone", "subgradient"), default="direct")
    c.add_argument("--replay-witness", default=None, help="re-verify the witness in a JSON report")

    s = sub.add_parser("search", help="search for an (eps, r) certificate", formatter_class=D)
    cert_flags(s)
    s.add_argument("--eps-grid", default="1,0.5,0.25,0.125,0.0625")
    s.add_argument("--r-grid", default="0,0.1,0.5,1,2,5,10,100,1000,10000")

    k = sub.add_parser("calculus", help="apply a parameter rule", formatter_class=D)
    k.add_argument("--rule", choices=RULES, required=True)
    k.add_argument("--input", required=True,
                   help='JSON file or string, e.g. {"params": [[0.4, 1], [0.4, 1]], "lambda": [1, 2]}')
    k.add_argument("--validate", action="store_true",
                   help='certify the result on the composed oracle (needs "functions": [catalog ids])')
    common(k)

    a = sub.add_parser("pa", help="tabulate proximal averages as CSV", formatter_class=D)
    a.add_argument("--f0", required=True)
    a.add_argument("--f1", required=True)
    a.add_argument("--box", type=float, nargs=2, default=(-2.0, 2.0), metavar=("LO", "HI"))
    a.add_argument("--points", type=int, default=401)
    a.add_argument("--r", type=float, default=4.0, help="prox parameter for the nonconvex average")
    a.add_argument("--lambdas", default="0.25,0.5,0.75", help="comma-separated lambda values")
    common(a)
    return p


COMMANDS = {"catalog": cmd_catalog, "check": cmd_check, "search": cmd_search,
            "calculus": cmd_calculus, "pa": cmd_pa}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    seed = args.seed
    env = os.environ.get("PROXKIT_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            parser.error(f"PROXKIT_SEED must be an integer, got {env!r}")
    cfg = RunConfig(args.command, getattr(args, "function", None), seed, args.output, vars(args))
    try:
        return COMMANDS[args.command](cfg, args)
    except (ProxkitError, ValueError, KeyError) as exc:
        sys.stderr.write(f"proxkit: error: {exc}\n")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
