"""Command-line interface: ``attrgof <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .bounds import DELTA_FORMS, representation_probability, sample_rng
from .errors import AttrGofError, DomainError
from .graph import beta_summary, classify_edge_labels
from .models import (
    cluster_blocks,
    er_model,
    fit_er,
    fit_sbm,
    gf_model,
    sbm_model,
)
from .simulate import (
    landscape,
    max_correlation_from_rows,
    sample_attributes,
    sample_graph,
    simulate_label_counts,
    phi_from_count_rows,
    verify_bound,
)

log = logging.getLogger("attrgof")

ATTRIBUTE_SEED_STREAM = 3
REFERENCE_SEED_STREAM = 4


# --- spec parsing ---------------------------------------------------------

def parse_kv(text):
    """``"a=1,b=x"`` -> ``{"a": 1.0, "b": "x"}`` (numbers become floats)."""
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if "=" not in part:
            raise DomainError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            out[k.strip()] = v.strip()
    return out


def parse_grid(text):
    """``"start:stop:num"`` -> integer grid, or None for the default grid."""
    if text is None:
        return None
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"grid must be start:stop:num, got {text!r}")
    start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
    return np.unique(np.round(np.linspace(start, stop, num)).astype(np.int64))


def parse_range(text):
    """``"start:stop:step"`` inclusive of ``stop`` (within rounding)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise DomainError("step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def split_spec(spec):
    name, _, rest = spec.partition(":")
    return name.strip().lower(), rest


def build_model(spec, seed=0, attributes=None):
    """Generative model from ``kind:key=value,...``.

    ``er:n=,p=``; ``sbm2:n=,p1=,p2=[,p4=][,blocks=half|attr]``;
    ``gf:n=,alpha=,beta=,gamma=,iterations=[,truncation=]``; ``file:path``.
    """
    kind, rest = split_spec(spec)
    if kind == "file":
        return io.load_model(rest)
    kv = parse_kv(rest)
    try:
        n = int(kv["n"])
        if kind == "er":
            return er_model(n, kv["p"])
        if kind == "sbm2":
            p1, p2 = kv["p1"], kv["p2"]
            p4 = kv.get("p4", p1)
            blocks = kv.get("blocks", "half")
            if blocks == "attr":
                if attributes is None:
                    raise DomainError("blocks=attr needs node attributes")
                z = np.asarray(attributes, dtype=np.int64)
            elif blocks == "half":
                z = (np.arange(n) >= n // 2).astype(np.int64)
            else:
                raise DomainError(f"unknown block layout {blocks!r}")
            return sbm_model(z, [[p1, p2], [p2, p4]])
        if kind == "gf":
            return gf_model(kv["alpha"], kv["beta"], kv["gamma"], int(kv["iterations"]), n,
                            seed, int(kv.get("truncation", 5000)))
    except KeyError as exc:
        raise DomainError(f"model spec {spec!r} is missing {exc.args[0]!r}") from None
    raise DomainError(f"unknown model kind {kind!r}")


def fit_model(spec, graph, seed=0):
    """Model fitted to ``graph``: ``er``, ``sbm:k=K`` or ``file:path``."""
    kind, rest = split_spec(spec)
    if kind == "er":
        return fit_er(graph)
    if kind == "sbm":
        k = int(parse_kv(rest).get("k", 2))
        return fit_sbm(graph, cluster_blocks(graph, k, seed), k)
    if kind == "file":
        return io.load_model(rest)
    raise DomainError(f"unknown fit spec {spec!r}")


# --- graph input ----------------------------------------------------------

def add_graph_args(p, required=True):
    g = p.add_argument_group("graph input")
    src = g.add_mutually_exclusive_group(required=required)
    src.add_argument("--gml", help="GML file (undirected subset)")
    src.add_argument("--edges", help="edge-list file, one 'u v' pair per line")
    g.add_argument("--nodes", type=int, help="node count for an edge list")
    g.add_argument("--attributes", help="attribute file, 'node_id value' lines")
    g.add_argument("--random-attributes", type=float, metavar="P",
                   help="draw i.i.d. Bernoulli(P) attributes from --seed")
    g.add_argument("--positive-values",
                   help="comma-separated GML values mapped to 1 (default: value > 0)")
    g.add_argument("--name", help="dataset name for the manifest")


def load_graph(args):
    if args.gml:
        binarize = io.default_binarize
        if args.positive_values:
            pos = {v.strip() for v in args.positive_values.split(",")}
            binarize = lambda v: 1 if str(v) in pos else 0  # noqa: E731
        graph = io.load_gml_subset(args.gml, binarize).graph
        source = args.gml
    else:
        graph = io.load_edge_list(args.edges, args.nodes)
        source = args.edges
    sources = [source]
    if args.attributes:
        graph = graph.with_attributes(io.load_attributes(args.attributes, graph.node_count))
        sources.append(args.attributes)
    elif args.random_attributes is not None:
        rng = sample_rng(args.seed, 0, ATTRIBUTE_SEED_STREAM)
        graph = graph.with_attributes(
            sample_attributes(graph.node_count, args.random_attributes, rng))
    name = args.name or Path(source).stem
    return graph, io.DatasetManifest.from_graph(name, graph, sources)


# --- commands -------------------------------------------------------------

REPORT_HEADER = ["name", "nodes", "edges", "positive", "rho_in", "epsilon", "delta",
                 "probability_lower_bound", "tau1", "tau3", "mu", "ceiling",
                 "below_triggered", "vacuous"]


def _report_row(manifest, rep):
    below = any(v.triggered and v.regime == "BELOW" for v in rep.verdicts)
    return [manifest.name, manifest.node_count, manifest.edge_count,
            manifest.positive_attribute_count, rep.rho_in, rep.epsilon, rep.delta,
            rep.probability_lower_bound, rep.tau[0], rep.tau[1], rep.mu, rep.ceiling,
            below, rep.vacuous]


def cmd_fit(args):
    graph, _ = load_graph(args)
    model = fit_model(args.model, graph, args.seed)
    if args.out in (None, "-"):
        json.dump(io.model_to_dict(model), sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")
    else:
        io.save_model(model, args.out)
    return 0


def cmd_gof(args):
    graph, manifest = load_graph(args)
    model = fit_model(args.model, graph, args.seed)
    try:
        rep = representation_probability(graph, model, args.eps1, args.eps3, args.delta_form)
    except DomainError as exc:
        print(f"bound undefined: {exc}", file=sys.stderr)
        return 0
    io.write_csv([_report_row(manifest, rep)], REPORT_HEADER, args.out)
    match = manifest.benchmark_match()
    if match is False:
        print(f"note: {manifest.name} has {manifest.node_count} nodes, benchmark lists "
              f"{io.BENCHMARK_NODE_COUNTS[manifest.name.lower()]}", file=sys.stderr)
    if rep.vacuous:
        print("bound vacuous", file=sys.stderr)
    else:
        print(f"rho_in={rep.rho_in:.4f} epsilon={rep.epsilon:.4f} "
              f"P(|rho_in-rho_out|<epsilon) > {rep.probability_lower_bound:.6f}",
              file=sys.stderr)
    return 0


def select_k(graph, k_values, eps1, eps3, seed=0, form="plus"):
    """``[(K, probability_lower_bound)]`` and the optimum (ties -> smallest K)."""
    rows = []
    for k in k_values:
        if not 1 <= k <= graph.node_count:
            raise DomainError(f"K={k} must lie in [1, {graph.node_count}]")
    for k in k_values:
        model = fit_sbm(graph, cluster_blocks(graph, k, seed), k)
        try:
            prob = representation_probability(graph, model, eps1, eps3, form).probability_lower_bound
        except DomainError:
            prob = float("nan")
        rows.append((k, prob))
    scored = [(p, -k) for k, p in rows if not math.isnan(p)]
    best = -max(scored)[1] if scored else None
    return rows, best


def cmd_select_k(args):
    graph, _ = load_graph(args)
    rows, best = select_k(graph, range(args.k_min, args.k_max + 1), args.eps1, args.eps3,
                          args.seed, args.delta_form)
    io.write_csv(rows, ["K", "probability_lower_bound"], args.out)
    print(f"optimum K={best}", file=sys.stderr)
    return 0


LANDSCAPE_HEADER = ["m11", "m01", "phi", "sampling_probability", "feasible"]


def _landscape_model(spec, p_x, seed):
    """Model and attributes; attributes are drawn first so SBM blocks may follow them."""
    rng = sample_rng(seed, 0, ATTRIBUTE_SEED_STREAM)
    kind, rest = split_spec(spec)
    if kind == "file":
        model = build_model(spec, seed)
        return model, sample_attributes(model.node_count, p_x, rng)
    x = sample_attributes(int(parse_kv(rest)["n"]), p_x, rng)
    return build_model(spec, seed, x), x


def _with_param(spec, key, value):
    kind, rest = split_spec(spec)
    kv = parse_kv(rest)
    kv[key] = value
    body = ",".join(f"{k}={int(v) if k in ('n', 'iterations', 'truncation') else v}"
                    for k, v in kv.items())
    return f"{kind}:{body}"


def cmd_landscape(args):
    kw = dict(m11_values=parse_grid(args.m11_grid), m01_values=parse_grid(args.m01_grid),
              eps1=args.eps1, eps3=args.eps3, form=args.delta_form, num=args.grid_num)
    if args.sweep:
        key, _, rng_text = args.sweep.partition("=")
        key = key.strip()
        out = []
        for value in parse_range(rng_text):
            p_x = value if key == "px" else args.px
            spec = args.model if key == "px" else _with_param(args.model, key, value)
            model, x = _landscape_model(spec, p_x, args.seed)
            rows = landscape(model, x, **kw)
            out.append([key, value, max_correlation_from_rows(rows, args.threshold)])
        io.write_csv(out, ["parameter", "value", "max_correlation"], args.out)
        return 0
    model, x = _landscape_model(args.model, args.px, args.seed)
    rows = landscape(model, x, **kw)
    io.write_csv([[r.m11, r.m01, r.phi, r.sampling_probability, r.feasible] for r in rows],
                 LANDSCAPE_HEADER, args.out)
    print(f"max correlation (sampling probability >= {args.threshold}): "
          f"{max_correlation_from_rows(rows, args.threshold)}", file=sys.stderr)
    return 0


def cmd_simulate(args):
    if args.gml or args.edges:
        graph, _ = load_graph(args)
        model = fit_model(args.model, graph, args.seed) if args.fit else None
        if model is None:
            model = build_model(args.model, args.seed, graph.attributes)
        counts = simulate_label_counts(model, args.trials, args.seed,
                                       attributes=graph.attributes, threads=args.threads)
    else:
        if args.px is None:
            raise DomainError("simulate needs --px or a graph with attributes")
        model = build_model(args.model, args.seed)
        counts = simulate_label_counts(model, args.trials, args.seed, p_x=args.px,
                                       threads=args.threads)
    phi = phi_from_count_rows(counts)
    io.write_csv([[t, *c, p] for t, (c, p) in enumerate(zip(counts.tolist(), phi))],
                 ["trial", "m00", "m01", "m11", "phi"], args.out)
    defined = phi[~np.isnan(phi)]
    if defined.size:
        print(f"trials={args.trials} undefined={int(np.isnan(phi).sum())} "
              f"mean={defined.mean():.6f} max={defined.max():.6f}", file=sys.stderr)
    else:
        print(f"trials={args.trials} undefined={args.trials}", file=sys.stderr)
    return 0


def standard_suite():
    """Twelve ER/SBM instances over n in {50, 200} and p_x in {0.3, 0.5}."""
    suite = []
    truths = [
        ("er", "er:n={n},p=0.2", "er"),
        ("sbm-assort", "sbm2:n={n},p1=0.25,p2=0.1", "sbm-true"),
        ("sbm-disassort", "sbm2:n={n},p1=0.1,p2=0.25", "sbm-true"),
    ]
    for label, spec, fit in truths:
        for n in (50, 200):
            for px in (0.3, 0.5):
                suite.append({"name": f"{label}-n{n}-px{px}", "model": spec.format(n=n),
                              "px": px, "fit": fit, "eps1": "auto", "eps3": "auto"})
    return suite


def _suite_eps(value, fraction):
    """``auto`` -> ``min(0.05, fraction / 2)`` so the lower interval end stays positive."""
    if value == "auto":
        return min(0.05, fraction / 2)
    return float(value)


def run_suite_instance(inst, index, seed, trials, form="plus", threads=1):
    truth = build_model(inst["model"], seed)
    rng = sample_rng(seed, index, REFERENCE_SEED_STREAM)
    x = sample_attributes(truth.node_count, inst["px"], rng)
    graph = sample_graph(truth, rng, x)
    fit = inst.get("fit", "none")
    if fit == "er":
        model = fit_er(graph)
    elif fit == "sbm-true":
        z = np.asarray(truth.params["z"])
        model = fit_sbm(graph, z, int(z.max()) + 1)
    elif fit == "none":
        model = truth
    else:
        model = fit_model(fit, graph, seed)
    beta = beta_summary(classify_edge_labels(graph))
    eps1 = _suite_eps(inst.get("eps1", 0.05), beta.beta1)
    eps3 = _suite_eps(inst.get("eps3", 0.05), beta.beta3)
    return verify_bound(graph, model, eps1, eps3,
                        int(inst.get("trials", trials)), seed=seed + index,
                        mode=inst.get("mode", "constant"), form=form, threads=threads)


def cmd_verify_bounds(args):
    if args.suite == "standard":
        suite = standard_suite()
    else:
        with open(args.suite) as fh:
            data = json.load(fh)
        suite = data["instances"] if isinstance(data, dict) else data
    rows = []
    failed = False
    for idx, inst in enumerate(suite):
        rep = run_suite_instance(inst, idx, args.seed, args.trials, args.delta_form,
                                 args.threads)
        failed |= rep.status == "fail"
        rows.append([inst["name"], rep.status, rep.delta, rep.lower_bound, rep.empirical_freq,
                     rep.sigma, rep.epsilon, rep.rho_in, rep.defined_trials,
                     rep.undefined_trials])
    io.write_csv(rows, ["name", "status", "delta", "lower_bound", "empirical_freq", "sigma",
                        "epsilon", "rho_in", "defined_trials", "undefined_trials"], args.out)
    return 1 if failed else 0


def cmd_convert(args):
    graph, _ = load_graph(args)
    if args.to == "gml":
        io.save_gml(graph, args.out)
    else:
        io.save_edge_list(graph, args.out)
        if args.out_attributes:
            io.save_attributes(graph, args.out_attributes)
    return 0


# --- parser ---------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--delta-form", choices=DELTA_FORMS, default="plus",
                        help="combine label terms as t1+t3+t1*t3 (plus) or t1+t3-t1*t3")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")

    def eps_args(p, default=0.05):
        p.add_argument("--eps1", type=float, default=default, help="tolerance on the 00 fraction")
        p.add_argument("--eps3", type=float, default=default, help="tolerance on the 11 fraction")

    parser = argparse.ArgumentParser(prog="attrgof", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="fit an ER or SBM model to a graph")
    add_graph_args(p)
    p.add_argument("--model", default="er", help="er | sbm:k=K")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gof", parents=[common], help="representation report for a graph")
    add_graph_args(p)
    p.add_argument("--model", default="er", help="er | sbm:k=K | file:model.json")
    eps_args(p)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("select-k", parents=[common], help="SBM block-count selection")
    add_graph_args(p)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=10)
    eps_args(p)
    p.set_defaults(func=cmd_select_k)

    p = sub.add_parser("landscape", parents=[common], help="phi / sampling-probability grid")
    p.add_argument("--model", required=True, help="er:n=,p= | sbm2:... | gf:... | file:path")
    p.add_argument("--px", type=float, default=0.5, help="attribute marginal")
    p.add_argument("--m11-grid", help="start:stop:num for ++ edge counts")
    p.add_argument("--m01-grid", help="start:stop:num for +- edge counts")
    p.add_argument("--grid-num", type=int, default=41, help="points per default grid axis")
    p.add_argument("--threshold", type=float, default=0.95,
                   help="sampling probability needed to count a configuration")
    p.add_argument("--sweep", help="key=start:stop:step, key is px or a model parameter")
    eps_args(p)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("simulate", parents=[common], help="sample graphs and their phi")
    add_graph_args(p, required=False)
    p.add_argument("--model", required=True, help="generative spec, or a fit spec with --fit")
    p.add_argument("--fit", action="store_true", help="fit --model to the input graph")
    p.add_argument("--px", type=float, help="attribute marginal when no graph is given")
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-bounds", parents=[common], help="Monte-Carlo coverage check")
    p.add_argument("--suite", default="standard", help="'standard' or a suite JSON file")
    p.add_argument("--trials", type=int, default=2000)
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("convert", parents=[common], help="convert between GML and edge lists")
    add_graph_args(p)
    p.add_argument("--to", choices=("gml", "edges"), required=True)
    p.add_argument("--out-attributes", help="attribute output path for --to edges")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "seed", 0) < 0:
        parser.error("--seed must be non-negative")
    try:
        return args.func(args)
    except (AttrGofError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
