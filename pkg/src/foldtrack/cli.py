"""Command-line frontend.

Commands: spectrum, invert, ratio, experiment, audit, metric.
Exit codes: 0 success, 2 input/certification error, 3 internal invariant
violation (a lemma inequality failing is a bug, not a data condition).
Set FOLDTRACK_LOG=DEBUG for diagnostics.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .automorphisms import (
    check_train_track, expansion_report, fold_inverse, format_automorphism,
    normalize_outer, parse_automorphism, random_automorphism,
    rose_representative,
)
from .errors import CapacityError, CertificationError, FoldtrackError, StructuralError
from .folding import factorize, controlled_inverse
from .graph import graph_to_json, load_graph
from .graph_map import map_from_json, map_to_json, tighten_map
from .metric import estimate_d
from .spectra import gamma_hat, spectrum_report

log = logging.getLogger("foldtrack")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3


def _setup_logging():
    level = os.environ.get("FOLDTRACK_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _fmt(x):
    if x is None:
        return "NA"
    if isinstance(x, float):
        return "%.12g" % x
    return str(x)


def _emit_json(data, out=None):
    text = json.dumps(data, indent=1, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_spectrum(args):
    aut = parse_automorphism(args.automorphism)
    f = tighten_map(rose_representative(normalize_outer(aut)))
    report = spectrum_report(f, certified=check_train_track(f))
    _emit_json(report, args.out)
    return EXIT_OK


def _factorization_dump(fact):
    stages = []
    for i, record in enumerate(fact.records, start=1):
        stages.append({
            "stage": i,
            "case": record.case,
            "folded_edges": [record.spec.d1, record.spec.d2],
            "vertex": record.spec.vertex,
            "new_graph": graph_to_json(record.graph_star),
            "quotient_edge_map": {str(e): list(p) for e, p in
                                  enumerate(record.quotient.edge_map, start=1)},
            "inverse_edge_map": {str(e): list(p) for e, p in
                                 enumerate(record.inverse.edge_map, start=1)},
            "flags": list(record.flags),
        })
    return stages


def cmd_invert(args):
    if os.path.exists(args.input):
        with open(args.input) as fh:
            f = map_from_json(json.load(fh))
        fact = factorize(tighten_map(f))
        g, stats = controlled_inverse(fact, with_stats=True)
        payload = {"inverse_map": map_to_json(g)}
    else:
        aut = parse_automorphism(args.input)
        inv, fact, stats = fold_inverse(aut)
        payload = {"inverse": format_automorphism(inv)}
        sys.stdout.write(format_automorphism(inv) + "\n")
    payload.update({
        "fold_count": fact.fold_count,
        "inverse_lc": stats.lc,
        "stage_lcs": list(stats.stage_lcs),
        "lc_product_bound_ok": stats.within_bound,
        "factorization": _factorization_dump(fact),
    })
    if args.out:
        _emit_json(payload, args.out)
    if not stats.within_bound:
        log.error("controlled inverse exceeded the LC product bound")
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_ratio(args):
    aut = parse_automorphism(args.automorphism)
    report = expansion_report(aut, k_max=args.kmax)
    _emit_json(report, args.out)
    return EXIT_OK


def _experiment_trial(params):
    seed, trial, rank, length, kmax = params
    rng = np.random.default_rng(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))
    aut = random_automorphism(rank, length, rng)
    text = format_automorphism(aut)
    try:
        phi = normalize_outer(aut)
        f = tighten_map(rose_representative(phi))
        lam_spec = gamma_hat(f)
        lam = lam_spec.top()
        cert_f = check_train_track(f)
        inv, fact, _ = fold_inverse(phi)
        fi = tighten_map(rose_representative(inv))
        mu_spec = gamma_hat(fi)
        mu = mu_spec.top()
        cert_i = check_train_track(fi)
        ratio = None
        if lam is not None and mu is not None:
            ratio = float(np.log(lam) / np.log(mu))
        return (trial, text, lam, mu, ratio, fact.fold_count,
                bool(cert_f and cert_i), None)
    except FoldtrackError as exc:
        return (trial, text, None, None, None, None, None, str(exc))


def cmd_experiment(args):
    params = [(args.seed, t, args.rank, args.length, args.kmax)
              for t in range(args.trials)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_experiment_trial, params))
    else:
        results = [_experiment_trial(p) for p in params]
    lines = ["trial\taut\tlambda\tmu\tratio\tfolds\tcertified"]
    max_ratio = None
    for trial, text, lam, mu, ratio, folds, certified, err in results:
        if err is not None:
            log.warning("trial %d failed: %s", trial, err)
            lines.append("%d\t%s\tERROR\tERROR\tERROR\tERROR\tERROR" % (trial, text))
            continue
        lines.append("\t".join([
            str(trial), text, _fmt(lam), _fmt(mu), _fmt(ratio),
            _fmt(folds), str(bool(certified)).lower(),
        ]))
        if ratio is not None and (max_ratio is None or ratio > max_ratio):
            max_ratio = ratio
    lines.append("# max_ratio\t%s" % _fmt(max_ratio))
    text_out = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text_out)
    else:
        sys.stdout.write(text_out)
    return EXIT_OK


def cmd_audit(args):
    from .audits import (
        gates_suite, largest_bounds_suite, matrix_pair_suite, pg_suite,
        reducibility_agreement_suite, twist_metric_rows,
    )
    failures = 0
    suites = [
        matrix_pair_suite(trials=args.trials, seed=args.seed),
        largest_bounds_suite(trials=max(args.trials // 5, 20), seed=args.seed),
        gates_suite(trials=max(args.trials // 5, 20), seed=args.seed),
        pg_suite(trials=max(args.trials // 20, 10), seed=args.seed),
    ]
    try:
        suites.append(reducibility_agreement_suite(budget=args.budget))
    except CapacityError as exc:
        log.warning("reducibility suite skipped: %s", exc)
    report = {"suites": []}
    for suite in suites:
        report["suites"].append({
            "name": suite.name,
            "checked": suite.checked,
            "failures": [list(map(str, f)) for f in suite.failures],
        })
        failures += len(suite.failures)
    report["twist_metric"] = twist_metric_rows()
    for row in report["twist_metric"]:
        if abs(row["d_forward"] - row["log_total"]) > 1e-9:
            failures += 1
        if row["asymmetry"] > 2.0:
            failures += 1
    for path in args.graphs:
        try:
            g = load_graph(path)
            report.setdefault("graphs", []).append(
                {"path": path, "rank": g.rank, "edges": g.num_edges})
        except (OSError, StructuralError, ValueError) as exc:
            log.warning("graph %s skipped: %s", path, exc)
    _emit_json(report, args.out)
    return EXIT_INVARIANT if failures else EXIT_OK


def cmd_metric(args):
    graphs = [load_graph(p) for p in args.graphs]
    lines = ["src\tdst\td_upper\twitness_total_length\tmethod"]
    for i, gi in enumerate(graphs):
        for j, gj in enumerate(graphs):
            if i == j:
                continue
            est = estimate_d(gi, gj)
            lines.append("\t".join([
                args.graphs[i], args.graphs[j], _fmt(est.value),
                str(est.total_edge_length), est.method,
            ]))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="foldtrack",
        description="Outer automorphisms as marked-graph maps: folds, "
                    "controlled inverses, expansion spectra.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="expansion spectrum of an automorphism")
    p.add_argument("automorphism", help='e.g. "a->ab, b->a"')
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("invert", help="controlled inverse via fold factorization")
    p.add_argument("input", help="automorphism text or a map JSON file")
    p.add_argument("--out", help="write the factorization dump JSON here")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("ratio", help="expansion factors of an automorphism and its inverse")
    p.add_argument("automorphism")
    p.add_argument("--kmax", type=int, default=40)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("experiment", help="seeded random-automorphism ensemble (TSV)")
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--length", type=int, default=10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=40)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("audit", help="lemma property suites and metric audits")
    p.add_argument("graphs", nargs="*", help="optional graph JSON files")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("metric", help="pairwise quasi-metric upper bounds (TSV)")
    p.add_argument("graphs", nargs="+", help="graph JSON files")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metric)

    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CertificationError, StructuralError, ValueError, OSError) as exc:
        log.error("%s", exc)
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_INPUT
    except FoldtrackError as exc:
        sys.stderr.write("invariant violation: %s\n" % exc)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
