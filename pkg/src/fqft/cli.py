"""Command-line front end: runs the pipelines and emits JSON reports."""

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction

import numpy as np

from .deformation import beta as beta_fn
from .deformation import fb_theory, theory_from_json
from .fock import build_space
from .geometry import verify_cutting
from .jets import Jet
from .observables import current_observable, marginal_observable, ope_extract
from .qm import QmTheory, qm_double_deform, qm_glue, taylor_series_oracle

SCHEMA_VERSION = 1

DEFAULT_TOLERANCES = {
    "cutting": 1e-12,
    "ope": 1e-10,
    "oracle": 1e-10,
    "qm_cutting": 1e-12,
}

log = logging.getLogger("fqft")


def _jsonable(x):
    """Deterministic JSON form: Fractions as 'p/q' strings, jets as
    monomial -> value maps, everything else recursively plain."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Jet):
        return {("*".join(m) if m else "1"): _jsonable(c) for m, c in sorted(x.coeffs.items())}
    if isinstance(x, dict):
        return {
            (",".join(map(str, k)) if isinstance(k, tuple) else str(k)): _jsonable(v)
            for k, v in x.items()
        }
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


def _parse_tolerances(pairs):
    tol = dict(DEFAULT_TOLERANCES)
    for item in pairs or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected KEY=VAL, got {item!r}")
        val = float(val)
        if val <= 0:
            raise argparse.ArgumentTypeError(f"tolerance {key} must be positive")
        tol[key] = val
    return tol


# ----------------------------------------------------------------- commands


def cmd_verify_cutting(args, tol):
    exact = args.arithmetic == "exact"
    space = build_space(args.lmax, exact=exact)
    radii = [Fraction(k) for k in (4, 3, 2, 1)] if exact else [4.0, 3.0, 2.0, 1.0]
    report = verify_cutting(space, radii, threads=args.threads)
    if exact:
        passed = report["exact_zero"]
    else:
        passed = (
            max(report["max_residual"], report["disk_residual"]) < tol["cutting"]
        )
    return report, passed


def cmd_ope(args, tol):
    space = build_space(args.lmax, exact=args.arithmetic == "exact")
    j = current_observable(space)
    table = ope_extract(space, j, j)
    o = marginal_observable(space)
    consts = ope_extract(space, o, o).marginal_constants()
    singular = [
        r
        for r in table.rows
        if r["coefficient"] != 0 and (r["exponents"][0] < 0 or r["exponents"][1] < 0)
    ]
    eps = 0 if space.exact else tol["ope"]
    passed = (
        len(singular) == 1
        and singular[0]["c"] == "1"
        and singular[0]["exponents"] == (-2, 0)
        and abs(singular[0]["coefficient"] - 1) <= eps
        and abs(consts["K"][("jjbar", "jjbar")] - 1) <= eps
        and all(abs(v) <= eps for v in consts["C"].values())
    )
    results = {
        "rows": [_jsonable(r) for r in table.rows],
        "marginal_constants": _jsonable(consts),
    }
    return results, passed


def cmd_beta(args, tol):
    if args.backend == "formal":
        if not args.theory:
            raise SystemExit("--theory is required with the formal backend")
        with open(args.theory) as fh:
            theory = theory_from_json(fh.read())
    else:
        theory = fb_theory(build_space(args.lmax))
    res = beta_fn(theory)
    results = {
        "marginals": sorted(theory.marginals),
        "beta": _jsonable(res.coefficients),
        "running": _jsonable(res.running()),
        "zero": res.is_zero(),
    }
    return results, True


def cmd_qm(args, tol):
    rng = np.random.default_rng(args.seed)
    dim = args.dim
    T = 1.0
    H = rng.standard_normal((dim, dim))
    O = rng.standard_normal((dim, dim))
    theory = QmTheory(H)
    # deforming by -O matches exp(-T (H + g O)) order by order
    seg = qm_double_deform(theory, {"o": -O}, 0.0, T)
    oracle = taylor_series_oracle(H, O, T, order=args.orders)
    monos = [(), ("gc[o]",), ("gc[o]", "gc[o]")][: args.orders + 1]
    scale = max(max(float(np.max(np.abs(o))) for o in oracle), 1.0)
    diffs = [
        float(np.max(np.abs(seg.value.coefficient(m) - o))) / scale
        for m, o in zip(monos, oracle)
    ]
    split = 0.4 * T
    glued = qm_double_deform(theory, {"o": -O}, split, T).glue(
        qm_double_deform(theory, {"o": -O}, 0.0, split)
    )
    cut_res = max(
        float(np.max(np.abs(glued.value.coefficient(m) - seg.value.coefficient(m))))
        / scale
        for m in monos
    )
    results = {
        "dim": dim,
        "orders": args.orders,
        "oracle_diffs": diffs,
        "cutting_residual": cut_res,
    }
    passed = all(d < tol["oracle"] for d in diffs) and cut_res < tol["qm_cutting"]
    return results, passed


def cmd_all(args, tol):
    results, passed = {}, True
    for name, fn in [
        ("verify-cutting", cmd_verify_cutting),
        ("ope", cmd_ope),
        ("beta", cmd_beta),
        ("qm", cmd_qm),
    ]:
        sub, ok = fn(args, tol)
        results[name] = {"results": sub, "passed": ok}
        passed = passed and ok
    return results, passed


COMMANDS = {
    "verify-cutting": cmd_verify_cutting,
    "ope": cmd_ope,
    "beta": cmd_beta,
    "qm": cmd_qm,
    "all": cmd_all,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fqft",
        description="Functorial QFT at finite truncation: cutting checks, "
        "OPE extraction, beta functions, and the quantum-mechanics oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--lmax", type=int, default=4)
        p.add_argument(
            "--arithmetic", choices=["exact", "float64"], default="exact"
        )
        p.add_argument(
            "--backend",
            choices=["free-boson", "formal", "qm"],
            default="free-boson",
        )
        p.add_argument("--theory", help="formal theory JSON file")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument(
            "--tolerance",
            action="append",
            metavar="KEY=VAL",
            help="override a named tolerance",
        )
        p.add_argument("--timing", action="store_true", help="include wall time")
        p.add_argument("--dim", type=int, default=4, help="qm Hilbert dimension")
        p.add_argument("--orders", type=int, default=2, choices=[0, 1, 2])
    return parser


def main(argv=None):
    level = os.environ.get("FQFT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.lmax < 0:
        parser.error("--lmax must be >= 0")
    try:
        tol = _parse_tolerances(args.tolerance)
    except (argparse.ArgumentTypeError, ValueError) as err:
        parser.error(str(err))
    log.info("running %s", args.command)
    start = time.perf_counter()
    results, passed = COMMANDS[args.command](args, tol)
    elapsed = time.perf_counter() - start
    log.info("%s finished in %.3fs (passed=%s)", args.command, elapsed, passed)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "config": {
            "l_max": args.lmax,
            "arithmetic": args.arithmetic,
            "backend": args.backend,
            "seed": args.seed,
            "threads": args.threads,
            "tolerances": tol,
        },
        "results": _jsonable(results),
        "passed": passed,
        "wall_time_s": elapsed if args.timing else None,
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
