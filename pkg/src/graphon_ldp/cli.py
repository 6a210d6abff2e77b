"""Command-line front end for reproducible experiments.

Every command writes its primary output plus a manifest JSON (input hashes,
seed, versions) beside it; identical configs and seeds produce byte-identical
primary outputs. Module errors exit nonzero with machine-readable JSON on
stderr and a distinct exit code per error class.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import enumeration, io, rates, sampling, variational
from .degree import (
    DegreeSequence,
    check_assumption,
    erdos_gallai,
    limit_graphon,
    solve_beta,
)
from .errors import GraphonLDPError, InvalidInput, exit_code_for
from .graphon import cut_norm_distance, cut_metric_upper, lp_distance
from .rates import rate_J, rate_J_D, relative_entropy_I


def _write_output(path, obj, manifest):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    io.write_json(path, obj)
    io.write_json(path.with_suffix(path.suffix + ".manifest.json"), manifest)


def _manifest(args, command, inputs, extra=None):
    params = {
        k: v
        for k, v in vars(args).items()
        if k not in {"func", "command"} and not callable(v) and v is not None
    }
    params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()}
    if extra:
        params.update(extra)
    return io.build_manifest(command, params, inputs, seed=getattr(args, "seed", None))


def _load_opts(args):
    data = {}
    if getattr(args, "config", None):
        data.update(io.read_json(args.config))
    if getattr(args, "threads", None):
        data["threads"] = args.threads
    return variational.SolverOptions.from_dict(data) if data else None


def _functional_params(args):
    if getattr(args, "functional_params", None):
        return json.loads(args.functional_params)
    return None


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check_degrees(args):
    d = io.load_degree_sequence(args.input)
    report = {
        "n": d.n,
        "degrees": [int(x) for x in d.d],
        "sum": int(d.d.sum()),
        "sum_even": bool(d.d.sum() % 2 == 0),
        "graphical": erdos_gallai(d.d),
    }
    inputs = [args.input]
    if args.degree_function:
        d_fun = io.load_degree_function(args.degree_function)
        rep = check_assumption(d_fun, grid=args.grid)
        report["assumption"] = {
            "min_value": rep.min_value,
            "max_value": rep.max_value,
            "bounds_ok": rep.bounds_ok,
            "margin": rep.margin,
            "margin_at": rep.margin_at,
            "positivity_ok": rep.positivity_ok,
            "passed": rep.passed,
        }
        inputs.append(args.degree_function)
    _write_output(args.output, report, _manifest(args, "check-degrees", inputs))
    return 0


def _beta_cache_path(d, tol):
    cache_dir = os.environ.get("GRAPHON_LDP_CACHE")
    if not cache_dir:
        return None
    key = hashlib.sha256(
        json.dumps({"d": [int(x) for x in d], "tol": tol}).encode()
    ).hexdigest()
    return Path(cache_dir) / f"beta_{key}.json"


def cmd_fit_beta(args):
    d = io.load_degree_sequence(args.input)
    cache = _beta_cache_path(d.d, args.tol)
    if cache is not None and cache.exists():
        bv = io.beta_from_dict(io.read_json(cache))
    else:
        bv = solve_beta(d.d, tol=args.tol, max_iter=args.max_iter)
        if cache is not None:
            cache.parent.mkdir(parents=True, exist_ok=True)
            io.write_json(cache, io.beta_to_dict(bv))
    _write_output(
        args.output, io.beta_to_dict(bv), _manifest(args, "fit-beta", [args.input])
    )
    return 0


def cmd_limit_graphon(args):
    d_fun = io.load_degree_function(args.input)
    w, bv = limit_graphon(d_fun, args.blocks, tol=args.tol)
    _write_output(
        args.output,
        io.graphon_to_dict(w),
        _manifest(args, "limit-graphon", [args.input]),
    )
    if args.beta_output:
        io.write_json(args.beta_output, io.beta_to_dict(bv))
    return 0


def cmd_rate(args):
    w = io.load_graphon(args.graphon)
    inputs = [args.graphon]
    if args.kind == "I":
        w0 = io.load_graphon(args.base)
        inputs.append(args.base)
        out = {"kind": "I", "value": relative_entropy_I(w, w0)}
    elif args.kind == "J":
        w0 = io.load_graphon(args.base)
        inputs.append(args.base)
        rv = rate_J(w, w0, mode=args.mode, seed=args.seed or 0)
        out = {"kind": "J", **io.rate_value_to_dict(rv), "exact": rv.exact}
    else:
        d_fun = io.load_degree_function(args.degree_function)
        inputs.append(args.degree_function)
        rv = rate_J_D(
            w, d_fun, lp_tol=args.lp_tol, mode=args.mode, seed=args.seed or 0
        )
        out = {"kind": "JD", **io.rate_value_to_dict(rv), "exact": rv.exact}
    _write_output(args.output, out, _manifest(args, "rate", inputs))
    return 0


def cmd_cut_distance(args):
    w1 = io.load_graphon(args.graphon)
    w2 = io.load_graphon(args.graphon2)
    if args.metric == "cutnorm":
        value = cut_norm_distance(w1, w2)
    elif args.metric == "cutmetric":
        value = cut_metric_upper(w1, w2, mode=args.mode, seed=args.seed or 0)
    elif args.metric == "l1":
        value = lp_distance(w1, w2, 1)
    else:
        value = lp_distance(w1, w2, 2)
    out = {"metric": args.metric, "value": value}
    _write_output(
        args.output, out, _manifest(args, "cut-distance", [args.graphon, args.graphon2])
    )
    return 0


def cmd_sample(args):
    inputs = []
    if args.kind == "irg":
        if not args.graphon:
            raise InvalidInput("sample irg requires --graphon")
        w0 = io.load_graphon(args.graphon)
        inputs.append(args.graphon)
        rng = sampling.make_rng(args.seed)
        graphs = (
            sampling.sample_irg(w0, args.n, rng=rng) for _ in range(args.count)
        )
    else:
        if not args.degrees:
            raise InvalidInput(f"sample {args.kind} requires --degrees")
        d = io.load_degree_sequence(args.degrees)
        inputs.append(args.degrees)
        if args.kind == "rejection":
            graphs = sampling.rejection_sample_stream(
                d.d, args.seed, args.count, max_tries=args.max_tries
            )
        else:
            graphs = sampling.switch_sample_stream(
                d.d, args.seed, args.count, burn_in=args.burn_in, thin=args.thin
            )
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for idx, g in enumerate(graphs):
        name = f"graph_{idx:05d}.txt"
        io.save_graph(out_dir / name, g)
        names.append(name)
    manifest = _manifest(args, "sample", inputs, extra={"outputs": names})
    io.write_json(out_dir / "manifest.json", manifest)
    return 0


def cmd_enumerate(args):
    d = io.load_degree_sequence(args.input)
    out = {"n": d.n, "degrees": [int(x) for x in d.d]}
    out["count"] = enumeration.count_graphs(d.d)
    if args.functional:
        out["functional"] = args.functional
        out["threshold"] = args.threshold
        out["count_at_threshold"] = enumeration.count_with_functional(
            d.d, args.functional, args.threshold, _functional_params(args)
        )
    if args.dump_dir:
        dump = Path(args.dump_dir)
        dump.mkdir(parents=True, exist_ok=True)
        for idx, g in enumerate(enumeration.enumerate_graphs(d.d)):
            io.save_graph(dump / f"graph_{idx:05d}.txt", g)
    _write_output(args.output, out, _manifest(args, "enumerate", [args.input]))
    return 0


def cmd_verify_identity(args):
    d = io.load_degree_sequence(args.input)
    rep = enumeration.verify_deg_partition_identity(d.d)
    out = {
        "n": rep.n,
        "count": rep.count,
        "log_lhs": rep.log_lhs,
        "log_rhs": rep.log_rhs,
        "relative_residual": rep.relative_residual,
        "beta_converged": rep.beta_converged,
    }
    _write_output(args.output, out, _manifest(args, "verify-identity", [args.input]))
    return 0


def cmd_ldp_estimate(args):
    d = io.load_degree_sequence(args.input)
    est = enumeration.ldp_rate_estimate(
        d.d,
        args.functional,
        args.threshold,
        params=_functional_params(args),
        n_samples=args.samples,
        seed=args.seed,
        method=args.method,
        sampler=args.sampler,
    )
    out = {
        "rate": est.rate,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "hits": est.hits,
        "samples": est.samples,
        "exact": est.exact,
    }
    _write_output(args.output, out, _manifest(args, "ldp-estimate", [args.input]))
    return 0


def cmd_variational(args):
    d_fun = io.load_degree_function(args.input)
    opts = _load_opts(args) or variational.SolverOptions(k=args.blocks)
    params = _functional_params(args)
    if args.problem in ("phi", "psi"):
        solver = variational.solve_phi if args.problem == "phi" else variational.solve_psi
        res = solver(d_fun, args.functional, args.threshold, k=args.blocks,
                     opts=opts, params=params)
        out = {
            "problem": args.problem,
            "value": res.value,
            "certificate": io.rate_value_to_dict(res.certificate),
            "constraint_residuals": {
                "d_lp": res.constraint_residuals[0],
                "tau": res.constraint_residuals[1],
            },
            "restarts_used": res.restarts_used,
            "minimizer": io.graphon_to_dict(res.minimizer),
        }
    elif args.problem == "partition":
        value = variational.limit_partition_Z(
            d_fun, args.functional, k=args.blocks, opts=opts, params=params
        )
        out = {"problem": "partition", "value": value}
    else:
        res = variational.count_asymptotic(
            d_fun, args.functional, args.threshold, k=args.blocks, opts=opts,
            params=params,
        )
        out = {
            "problem": "count",
            "value": res.value,
            "phi_value": res.phi.value,
            "entropy": res.entropy,
            "minimizer": io.graphon_to_dict(res.phi.minimizer),
        }
    _write_output(args.output, out, _manifest(args, "variational", [args.input]))
    return 0


def cmd_entropy(args):
    if args.graphon:
        w = io.load_graphon(args.graphon)
        out = {"kind": "entropy", "value": rates.entropy_he(w)}
        inputs = [args.graphon]
    else:
        d_fun = io.load_degree_function(args.degree_function)
        ce = rates.counting_entropy(d_fun, args.blocks)
        out = {
            "kind": "counting_entropy",
            "value": ce.value,
            "beta_form": ce.beta_form,
        }
        inputs = [args.degree_function]
    _write_output(args.output, out, _manifest(args, "entropy", inputs))
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphon-ldp",
        description="Degree-constrained random graphs in the graphon cut metric: "
        "fitting, sampling, enumeration, rates, and variational problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed_required=False):
        p.add_argument("--output", required=True, help="primary output path")
        p.add_argument("--seed", type=int, required=seed_required,
                       help="64-bit seed (mandatory for stochastic commands)")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--config", help="JSON file with option overrides")

    p = sub.add_parser("check-degrees", help="Erdos-Gallai and interior-assumption report")
    p.add_argument("--input", required=True)
    p.add_argument("--degree-function")
    p.add_argument("--grid", type=int, default=256)
    add_common(p)
    p.set_defaults(func=cmd_check_degrees)

    p = sub.add_parser("fit-beta", help="solve the degree fixed-point system")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10000)
    add_common(p)
    p.set_defaults(func=cmd_fit_beta)

    p = sub.add_parser("limit-graphon", help="limiting graphon of a degree function")
    p.add_argument("--input", required=True)
    p.add_argument("--blocks", type=int, default=16)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--beta-output")
    add_common(p)
    p.set_defaults(func=cmd_limit_graphon)

    p = sub.add_parser("rate", help="relative-entropy rates between graphon files")
    p.add_argument("--kind", choices=["I", "J", "JD"], default="I")
    p.add_argument("--graphon", required=True)
    p.add_argument("--base")
    p.add_argument("--degree-function")
    p.add_argument("--lp-tol", type=float, default=None)
    p.add_argument("--mode", choices=["auto", "exact", "anneal"], default="auto")
    add_common(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("cut-distance", help="distances between graphon files")
    p.add_argument("--graphon", required=True)
    p.add_argument("--graphon2", required=True)
    p.add_argument("--metric", choices=["cutnorm", "cutmetric", "l1", "l2"],
                   default="cutnorm")
    p.add_argument("--mode", choices=["auto", "exact", "anneal"], default="auto")
    add_common(p)
    p.set_defaults(func=cmd_cut_distance)

    p = sub.add_parser("sample", help="sample graphs (irg | rejection | switch)")
    p.add_argument("--kind", choices=["irg", "rejection", "switch"], required=True)
    p.add_argument("--graphon")
    p.add_argument("--degrees")
    p.add_argument("--n", type=int, default=None, help="vertex count for irg")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--max-tries", type=int, default=10**6)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--thin", type=int, default=None)
    add_common(p, seed_required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("enumerate", help="exact counts over the degree fiber")
    p.add_argument("--input", required=True)
    p.add_argument("--functional")
    p.add_argument("--functional-params")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--dump-dir")
    add_common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify-identity", help="exact degree-fiber likelihood identity")
    p.add_argument("--input", required=True)
    add_common(p)
    p.set_defaults(func=cmd_verify_identity)

    p = sub.add_parser("ldp-estimate", help="rate estimate for a functional event")
    p.add_argument("--input", required=True)
    p.add_argument("--functional", required=True)
    p.add_argument("--functional-params")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--method", choices=["auto", "exact", "mc"], default="auto")
    p.add_argument("--sampler", choices=["rejection", "switch"], default="rejection")
    add_common(p)
    p.set_defaults(func=cmd_ldp_estimate)

    p = sub.add_parser("variational", help="phi | psi | partition | count")
    p.add_argument("--problem", choices=["phi", "psi", "partition", "count"],
                   required=True)
    p.add_argument("--input", required=True, help="degree function JSON")
    p.add_argument("--functional", required=True)
    p.add_argument("--functional-params")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--blocks", type=int, default=16)
    add_common(p)
    p.set_defaults(func=cmd_variational)

    p = sub.add_parser("entropy", help="graphon entropy or counting entropy")
    p.add_argument("--graphon")
    p.add_argument("--degree-function")
    p.add_argument("--blocks", type=int, default=32)
    add_common(p)
    p.set_defaults(func=cmd_entropy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphonLDPError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "upper_bound", None) is not None:
            payload["upper_bound"] = exc.upper_bound
        if getattr(exc, "residual", None) is not None:
            payload["residual"] = exc.residual
        print(io.dumps_json(payload), file=sys.stderr)
        return exit_code_for(exc)


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
