"""Command-line entry point: ``cayley-contour <command> ...``.

Exit codes: 0 all checks hold, 1 a checked inequality or assumption fails,
2 usage or file error, 3 enumeration cap refusal.
"""

from __future__ import annotations

import argparse
import math
import random
import sys

from . import CAP_ENV, CapExceeded, enumeration_cap
from .contours import (
    classify_interior,
    contour_size_histogram,
    count_connected_ball_subgraphs,
    decompose,
    edge_boundary,
    contour_bound_constants,
    load_contour,
)
from .ground_states import check_assumptions, peierls_fuzz, spectrum
from .gibbs import beta_grid, coexistence_scan, contour_probabilities, gibbs_summary
from .potentials import ModelFileError, config_from_index, load_model, load_window
from .reports import (
    EXIT_CAP,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VIOLATION,
    dumps_csv,
    dumps_json,
    emit,
    envelope,
    rational,
)
from .tree import CayleyTree, format_vertex, ball_count_closed_form, ball_count_recurrence, parse_vertex

class UsageError(Exception):
    pass


def _config(args) -> dict:
    cfg = {key: val for key, val in vars(args).items() if key not in ("func", "output")}
    cfg["cap"] = enumeration_cap(args.cap)
    return cfg


def _model_info(model) -> dict:
    return {"name": model.name, "k": model.k, "q": model.q, "r": model.r, "rprime": model.rprime,
            "params": {key: val for key, val in model.params.items() if key != "table"}}


def _require_ok_model(model):
    verdict = check_assumptions(model)
    if not verdict.ok:
        raise UsageError(f"model fails the ground-state assumptions: {verdict}")
    return verdict


def _check_window(model, w, path):
    if w.k != model.k:
        raise UsageError(f"k mismatch: model has k={model.k}, window {path} has k={w.k}")
    if not 1 <= w.boundary <= model.q:
        raise UsageError(f"window boundary {w.boundary} outside 1..{model.q}")
    bad = [s for s in w.values if not 1 <= s <= model.q]
    if bad:
        raise UsageError(f"window {path} uses spin {bad[0]} outside 1..{model.q}")


# ---------------------------------------------------------------------------
# commands


def cmd_check_model(args) -> int:
    model = load_model(args.model)
    report = spectrum(model)
    verdict = check_assumptions(model, report)
    code = EXIT_OK if verdict.ok else EXIT_VIOLATION
    result = {
        "model": _model_info(model),
        "spectrum": [rational(u) for u in report.distinct_values],
        "u_min": rational(report.u_min),
        "lambda0": rational(report.lambda0),
        "ground_states": list(report.ground_states),
        "spin_order": list(report.spin_order),
        "s": report.s,
        "minimizers": [list(config_from_index(i, model.q, model.ball_size)) for i in report.minimizer_configs[:50]],
        "n_minimizers": len(report.minimizer_configs),
        "verdict": {"A1_sufficient": verdict.a1_sufficient, "A2": verdict.a2, "A3": verdict.a3},
    }
    msgs = [] if verdict.ok else ["ground-state assumptions not satisfied"]
    emit(dumps_json(envelope("check-model", _config(args), result, code, msgs)), args.output)
    return code


def cmd_peierls(args) -> int:
    model = load_model(args.model)
    report = spectrum(model)
    _require_ok_model(model)
    rows = []
    min_slack = None
    violations = 0
    for seed, res in peierls_fuzz(model, args.samples, args.seed, args.n_max, args.density):
        rows.append([seed, res.boundary_size, str(res.lhs), str(res.rhs), str(res.holds).lower()])
        min_slack = res.slack if min_slack is None else min(min_slack, res.slack)
        violations += not res.holds
    emit(dumps_csv("peierls", _config(args), ["seed", "boundary_size", "lhs", "rhs", "holds"], rows), args.output)
    if not rows:
        print("warning: no samples requested; empty report", file=sys.stderr)
        return EXIT_OK
    print(f"samples={len(rows)} violations={violations} lambda0={report.lambda0} min_slack={min_slack}", file=sys.stderr)
    if violations:
        print(f"VIOLATION: Peierls inequality fails in {violations} windows", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_contours(args) -> int:
    model = load_model(args.model)
    w = load_window(args.window)
    _check_window(model, w, args.window)
    spec = spectrum(model)
    if w.boundary not in spec.ground_states:
        raise UsageError(f"window boundary {w.boundary} is not a ground state {spec.ground_states}")
    dec = decompose(w, model)
    contours = []
    for c, imp in zip(dec.contours, dec.imp):
        cls = classify_interior(c, model.rprime)
        contours.append({
            "subcontours": [
                {"mark": t.mark, "interior": [format_vertex(x) for x in t.interior], "support_size": len(t.support)}
                for t in c.subcontours
            ],
            "imp_size": len(imp),
            "imp_centers": [format_vertex(dec.boundary.window.layout(model.rprime).ball_centers[b]) for b in imp],
            "m_minus": len(cls.m_minus),
            "m_zero": len(cls.m_zero),
            "m_plus": len(cls.m_plus),
            "y_gamma": len(cls.y_gamma),
        })
    result = {
        "model": _model_info(model),
        "window": {"k": w.k, "n": w.n, "boundary": w.boundary},
        "edge_boundary_size": len(edge_boundary(w)),
        "boundary_size": len(dec.boundary),
        "contours": contours,
    }
    emit(dumps_json(envelope("contours", _config(args), result, EXIT_OK)), args.output)
    return EXIT_OK


def cmd_count_contours(args) -> int:
    model = load_model(args.model)
    _require_ok_model(model)
    x = parse_vertex(args.vertex, model.k)
    l_values = sorted(set(args.l))
    hist = contour_size_histogram(model, x, max(l_values), args.boundary, args.cap)
    c0, log_theta = contour_bound_constants(model.k, model.rprime)
    rows = []
    code = EXIT_OK
    for l in l_values:
        n = hist.get(l, 0)
        log_bound = math.log(c0) + l * log_theta
        holds = n == 0 or math.log(n) <= log_bound
        code = code if holds else EXIT_VIOLATION
        rows.append({"l": l, "count": n, "log_bound": log_bound, "bound": math.exp(log_bound),
                     "log_slack": (log_bound - math.log(n)) if n else None, "holds": holds})
    result = {"model": _model_info(model), "vertex": format_vertex(x), "C0": rational(c0),
              "log_theta": log_theta, "counts": rows}
    emit(dumps_json(envelope("count-contours", _config(args), result, code)), args.output)
    return code


def cmd_ball_counts(args) -> int:
    tree = CayleyTree(args.k)
    rng = random.Random(args.seed)
    matches = 0
    table = {}
    for _ in range(args.trials):
        n = rng.randint(1, args.max_n)
        A = tree.random_connected(n, rng)
        d = len(tree.outer_boundary(A))
        matches += d == (args.k - 1) * n + 2
        oracle = len(tree.intersecting_balls(A, args.rprime))
        row = table.setdefault(n, {"n": n, "oracle": oracle, "formula": ball_count_closed_form(n, args.k, args.rprime),
                                   "recurrence": ball_count_recurrence(n, args.k, args.rprime), "trials": 0})
        if row["oracle"] != oracle:
            row["oracle_varies"] = True
        row["trials"] += 1
    rows = [table[n] for n in sorted(table)]
    for row in rows:
        row["difference"] = row["oracle"] - row["formula"]
    code = EXIT_OK if matches == args.trials else EXIT_VIOLATION
    result = {
        "boundary_formula": {"matches": matches, "trials": args.trials},
        "ball_count_discrepancies": rows,
        "mismatched_sizes": sum(1 for row in rows if row["difference"]),
    }
    emit(dumps_json(envelope("ball-counts", _config(args), result, code)), args.output)
    return code


def cmd_subgraphs(args) -> int:
    rows = []
    code = EXIT_OK
    for n in range(1, args.max_n + 1):
        count = count_connected_ball_subgraphs(args.k, n, args.cap)
        bound = (math.e * args.k) ** n
        rows.append({"n": n, "count": count, "bound": bound, "holds": count <= bound})
        code = code if count <= bound else EXIT_VIOLATION
    emit(dumps_json(envelope("subgraphs", _config(args), {"counts": rows}, code)), args.output)
    return code


def cmd_gibbs(args) -> int:
    model = load_model(args.model)
    if not 1 <= args.boundary <= model.q:
        raise UsageError(f"boundary {args.boundary} outside 1..{model.q}")
    s = gibbs_summary(model, args.n, args.boundary, args.beta, args.engine, args.cap)
    result = {"model": _model_info(model), "beta": s.beta, "boundary_mark": s.boundary_mark, "n": s.n,
              "engine": s.engine, "log_z": s.log_z, "root_marginals": list(s.root_marginals)}
    emit(dumps_json(envelope("gibbs", _config(args), result, EXIT_OK)), args.output)
    return EXIT_OK


def cmd_contour_prob(args) -> int:
    model = load_model(args.model)
    head, contour = load_contour(args.contour)
    for key in ("k", "r", "q"):
        if head[key] != getattr(model, key):
            raise UsageError(f"{key} mismatch: model has {key}={getattr(model, key)}, contour file has {key}={head[key]}")
    _require_ok_model(model)
    probs = contour_probabilities(model, args.n, head["boundary"], args.beta, [contour], args.cap)
    rows = []
    code = EXIT_OK
    for beta in args.beta:
        cp = probs[(contour.key, beta)]
        ok = cp.p <= cp.bound + 1e-12
        code = code if ok else EXIT_VIOLATION
        rows.append([repr(beta), repr(cp.p), repr(cp.bound), repr(cp.slack)])
    emit(dumps_csv("contour-prob", _config(args), ["beta", "p", "bound", "slack"], rows), args.output)
    return code


def cmd_coexist(args) -> int:
    model = load_model(args.model)
    _require_ok_model(model)
    betas = beta_grid(args.beta_from, args.beta_to, args.beta_step)
    scan = coexistence_scan(model, args.n, betas, args.engine, args.cap)
    header = ["beta", "boundary_mark"] + [f"marginal_{j}" for j in range(1, model.q + 1)] + ["delta"]
    rows = [[repr(r.beta), r.boundary_mark, *map(repr, r.marginals), repr(r.delta)] for r in scan]
    emit(dumps_csv("coexist-scan", _config(args), header, rows), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cayley-contour", description=__doc__.splitlines()[0])
    parser.add_argument("--cap", type=int, default=None,
                        help=f"enumeration cap (default: ${CAP_ENV} or built-in)")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--output", "-o", default=None, help="report path (default stdout)")
        p.set_defaults(func=func)
        return p

    p = command("check-model", cmd_check_model, "spectrum, lambda0 and assumption verdicts")
    p.add_argument("--model", required=True)

    p = command("peierls", cmd_peierls, "fuzz the Peierls inequality on random windows")
    p.add_argument("--model", required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--density", type=float, default=0.3)

    p = command("contours", cmd_contours, "decompose a window into contours")
    p.add_argument("--model", required=True)
    p.add_argument("--window", required=True)

    p = command("count-contours", cmd_count_contours, "exact N_l(x) against C0 theta^l")
    p.add_argument("--model", required=True)
    p.add_argument("--l", type=int, action="append", required=True)
    p.add_argument("--vertex", default="-")
    p.add_argument("--boundary", type=int, default=None)

    p = command("ball-counts", cmd_ball_counts, "boundary and ball counts of random connected sets")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-n", type=int, default=30)
    p.add_argument("--rprime", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = command("subgraphs", cmd_subgraphs, "connected subgraphs of the ball graph against (ek)^n")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--max-n", type=int, default=8)

    p = command("gibbs", cmd_gibbs, "finite-volume log partition function and root marginals")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--boundary", type=int, default=1)
    p.add_argument("--engine", choices=("dp", "enum"), default="dp")

    p = command("contour-prob", cmd_contour_prob, "exact contour probability against exp(-beta lambda0 |gamma|)")
    p.add_argument("--model", required=True)
    p.add_argument("--contour", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--beta", type=float, action="append", required=True)

    p = command("coexist-scan", cmd_coexist, "root marginals per boundary mark along a beta grid")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--beta-from", type=float, default=0.0)
    p.add_argument("--beta-to", type=float, default=3.0)
    p.add_argument("--beta-step", type=float, default=0.25)
    p.add_argument("--engine", choices=("dp", "enum"), default="dp")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ModelFileError, UsageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
