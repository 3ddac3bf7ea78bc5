"""Command-line front end.

Exit status: 0 on success, 1 on domain or infeasibility errors, 2 on flag errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import Family, ProblemParams, build_critical_point, enumerate_critical_points, mode_floor
from .curves import PlanarCurve, sample_curve, wavelike_curve
from .energy import (compare_all, crossover_lambda, energy_closed_form, energy_table, energy_table_csv,
                     loop_threshold, sarc_minus_loop)
from .errors import DomainError, ElasticaError
from .flow import DEFAULT_DT, DEFAULT_DT_MAX, DEFAULT_M, DEFAULT_T_END, init_flow, run
from .jsonio import dumps
from .moduli import constants, eval_f, two_e_minus_k
from .stability import count_local_minimizers, stability_table

OUTPUT_DIR_ENV = "PINNED_ELASTICA_OUTPUT_DIR"
_FAMILIES = {f.value: f for f in Family}


def _emit(text, output):
    if output is None or output == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text if text.endswith("\n") else text + "\n")


def _params(args):
    return ProblemParams(args.lam, args.ell)


def _cp_record(cp):
    rec = cp.as_dict()
    rec["energy"] = cp.energy
    return rec


def cmd_constants(args):
    c = constants()
    return dumps({
        "q_hat": c.q_hat,
        "q_star": c.q_star,
        "lambda_hat": c.lambda_hat,
        "q_hat_squared": c.q_hat**2,
        "residuals": {"f(q_hat)": eval_f(c.q_hat), "2E-K(q_star)": two_e_minus_k(c.q_star)},
    })


def cmd_classify(args):
    p = _params(args)
    cps = enumerate_critical_points(p, args.n_max)
    return dumps({
        "lambda": p.lam,
        "ell": p.ell,
        "lambda_ell_squared": p.mu,
        "n_floor": mode_floor(p),
        "n_max": args.n_max,
        "critical_points": [_cp_record(cp) for cp in cps],
    })


def _curve_for(args, p):
    if args.family == "wavelike":
        if args.q is None:
            raise DomainError("--family wavelike requires --q")
        return wavelike_curve(args.q, p.ell, args.samples, reflect=args.reflect)
    cp = build_critical_point(p, _FAMILIES[args.family], args.n)
    curve = sample_curve(cp, args.samples, reflect=args.reflect)
    eb = energy_closed_form(cp)
    curve.meta["energies"] = {"bending": eb.bending, "length": eb.length, "total": eb.total}
    return curve


def cmd_curve(args):
    curve = _curve_for(args, _params(args))
    if args.format == "csv":
        return curve.to_csv()
    return dumps(curve.as_json())


def cmd_energy_table(args):
    p = _params(args)
    if args.format == "csv":
        return energy_table_csv(energy_table(p, args.n_max))
    report = compare_all(p, args.n_max)
    doc = report.as_dict()
    doc["table"] = energy_table(p, args.n_max)
    doc["loop_threshold"] = loop_threshold(p)
    return dumps(doc)


def cmd_stability(args):
    p = _params(args)
    rows = []
    for cp, v in stability_table(p, args.n_max):
        rec = {"id": cp.id, "family": cp.family.value, "n": cp.n, "q": cp.q}
        rec.update(v.as_dict())
        rows.append(rec)
    return dumps({"lambda": p.lam, "ell": p.ell, "lambda_ell_squared": p.mu,
                  "local_minimizers": count_local_minimizers(p), "verdicts": rows})


def cmd_crossover(args):
    lam = crossover_lambda(args.ell)
    return dumps({"ell": args.ell, "lambda_dagger": lam, "residual": sarc_minus_loop(lam, args.ell)})


def parse_initial(spec, p, samples=4096):
    """Build the initial curve from 'segment', 'family:<name>,n=<k>', 'wavelike:q=<v>' or 'file:<csv>'."""
    kind, _, rest = spec.partition(":")
    if kind == "segment" and not rest:
        return sample_curve(build_critical_point(p, Family.SEGMENT), samples)
    if kind == "family":
        fields = rest.split(",")
        name = fields[0]
        opts = dict(f.split("=", 1) for f in fields[1:] if "=" in f)
        if name not in _FAMILIES:
            raise DomainError(f"unknown family {name!r}; expected one of {sorted(_FAMILIES)}")
        n = int(opts.get("n", 1))
        return sample_curve(build_critical_point(p, _FAMILIES[name], n), samples)
    if kind == "wavelike":
        key, _, val = rest.partition("=")
        if key != "q" or not val:
            raise DomainError(f"wavelike initial data needs q=<value>, got {spec!r}")
        return wavelike_curve(float(val), p.ell, samples)
    if kind == "file" and rest:
        return PlanarCurve.from_csv(rest)
    raise DomainError(
        f"cannot parse --initial {spec!r}; use segment, family:<name>,n=<k>, wavelike:q=<v> or file:<path.csv>")


def cmd_flow(args):
    p = _params(args)
    curve = parse_initial(args.initial, p)
    state = init_flow(curve, p, args.M, DEFAULT_DT * p.ell**4 if args.dt is None else args.dt)
    out_dir = Path(args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    catalogue = enumerate_critical_points(p, args.n_max)
    with open(out_dir / "trajectory.jsonl", "w") as fh:
        outcome = run(state, DEFAULT_T_END * p.ell**4 if args.t_end is None else args.t_end, catalogue,
                      dt_max=args.dt_max, trajectory=fh, record_every=args.record_every)
    summary = {"lambda": p.lam, "ell": p.ell, "initial": args.initial, "M": args.M,
               "loop_threshold": loop_threshold(p)}
    summary.update(outcome.summary())
    text = dumps(summary)
    (out_dir / "summary.json").write_text(text + "\n")
    return text


def _finite_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="pinned-elastica",
                                 description="Critical points, energies, stability and flow of "
                                             "length-penalized pinned planar elasticae.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def with_params(sp):
        sp.add_argument("--lambda", dest="lam", type=_finite_float, required=True)
        sp.add_argument("--ell", type=_finite_float, default=1.0)
        sp.add_argument("--output", "-o", default=None, help="output file (default: stdout)")

    sp = sub.add_parser("constants", help="q_hat, q_star, lambda_hat and their residuals")
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("classify", help="enumerate critical points up to mode n-max")
    with_params(sp)
    sp.add_argument("--n-max", type=_positive_int, default=5)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("curve", help="sample a critical point or wavelike curve")
    with_params(sp)
    sp.add_argument("--family", choices=sorted(_FAMILIES) + ["wavelike"], required=True)
    sp.add_argument("--n", type=_positive_int, default=1)
    sp.add_argument("--q", type=_finite_float, default=None, help="modulus for --family wavelike")
    sp.add_argument("--samples", type=_positive_int, default=400)
    sp.add_argument("--reflect", action="store_true", help="mirror across the x-axis")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("energy-table", help="energies and comparison checks")
    with_params(sp)
    sp.add_argument("--n-max", type=_positive_int, default=5)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_energy_table)

    sp = sub.add_parser("stability", help="stability verdict for every enumerated point")
    with_params(sp)
    sp.add_argument("--n-max", type=_positive_int, default=5)
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("crossover", help="lambda where E[sarc1] = E[loop1]")
    sp.add_argument("--ell", type=_finite_float, default=1.0)
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(func=cmd_crossover)

    sp = sub.add_parser("flow", help="run the lambda-elastic flow")
    with_params(sp)
    sp.add_argument("--initial", required=True,
                    help="segment | family:<name>,n=<k> | wavelike:q=<v> | file:<path.csv>")
    sp.add_argument("--M", type=_positive_int, default=DEFAULT_M)
    sp.add_argument("--dt", type=_finite_float, default=None,
                    help=f"initial step (default {DEFAULT_DT:g} ell^4)")
    sp.add_argument("--dt-max", type=_finite_float, default=DEFAULT_DT_MAX)
    sp.add_argument("--t-end", type=_finite_float, default=None,
                    help=f"horizon (default {DEFAULT_T_END:g} ell^4)")
    sp.add_argument("--n-max", type=_positive_int, default=2, help="catalogue size for convergence tests")
    sp.add_argument("--record-every", type=_positive_int, default=100)
    sp.add_argument("--output-dir", default=None,
                    help=f"directory for trajectory.jsonl and summary.json (default ${OUTPUT_DIR_ENV} or .)")
    sp.set_defaults(func=cmd_flow)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except (ElasticaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command == "flow":
        _emit(text, None)
    else:
        _emit(text, args.output)
    return 0
