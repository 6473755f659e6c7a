"""Command-line entry point: ``graphlimits <subcommand> ...``.

Graph arguments accept either a path to an edge-list file (``n m`` header,
then one edge per line) or a family spec such as ``torus_grid:n=8`` or
``random_regular:n=200,d=3,seed=4``.

Exit codes: 0 success, 1 precondition or config error, 2 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import yaml

from . import bslimit, embedding, experiments, families, pointsupport, potential, spectral
from .errors import NonConvergenceError, PreconditionError
from .graph import Graph

log = logging.getLogger("graphlimits")


def parse_family(spec: str) -> Graph:
    kind, _, rest = spec.partition(":")
    params = {}
    seed = None
    for item in filter(None, rest.split(",")):
        key, _, value = item.partition("=")
        if not value:
            raise PreconditionError(f"bad family parameter {item!r}; expected key=value")
        if key == "seed":
            seed = int(value)
        else:
            params[key] = int(value)
    return families.FamilySpec(kind, params, seed).build()


def load_graph(arg: str) -> Graph:
    path = Path(arg)
    if path.is_file():
        return Graph.from_edge_list(path.read_text())
    if ":" in arg or arg in families.KINDS:
        return parse_family(arg)
    raise PreconditionError(f"{arg!r} is neither a file nor a family spec")


def load_rotation(args) -> embedding.RotationSystem:
    if args.rotation:
        return embedding.RotationSystem.from_text(Path(args.rotation).read_text())
    kind = args.graph.partition(":")[0]
    if kind in ("planar_grid", "torus_grid") and not Path(args.graph).is_file():
        n = int(args.graph.partition("n=")[2].split(",")[0])
        return getattr(families, kind)(n)[1]
    return embedding.RotationSystem.from_graph(load_graph(args.graph))


def int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise PreconditionError(f"cannot read config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise PreconditionError("config must be a mapping")
    return data


def emit(text: str, out: str | None, name: str) -> None:
    if out:
        target = Path(out)
        target.mkdir(parents=True, exist_ok=True)
        (target / name).write_text(text)
    else:
        sys.stdout.write(text)


# -- module subcommands --------------------------------------------------------

def cmd_genus(args) -> int:
    if args.exhaustive:
        g = load_graph(args.graph)
        print(embedding.min_genus_exhaustive(g, args.budget))
    else:
        print(embedding.euler_genus(load_rotation(args)))
    return 0


def cmd_fill(args) -> int:
    rs = load_rotation(args)
    out = embedding.triangulate_fill(rs, args.valence)
    emit(out.to_text(), args.out, "filled.rot")
    return 0


def cmd_cheeger(args) -> int:
    g = load_graph(args.graph)
    lam, vec = spectral.fiedler(g)
    row = {"n": g.vertex_count, "lambda2": lam, "h_lower": lam / 2,
           "h_upper": float(spectral.sweep_cut(g, vec).value)}
    if g.vertex_count <= spectral.EXACT_LIMIT:
        cut = spectral.cheeger_exact(g)
        row["h_exact"] = str(cut.value)
        row["witness"] = list(cut.witness)
    print(json.dumps(row, sort_keys=True))
    return 0


def _problem(args) -> potential.CapacityProblem:
    if args.problem:
        return potential.CapacityProblem.from_dict(json.loads(Path(args.problem).read_text()))
    if not (args.graph and args.source and args.ground):
        raise PreconditionError("give --problem or all of --graph, --source, --ground")
    return potential.CapacityProblem(load_graph(args.graph), int_list(args.source),
                                     int_list(args.ground), args.p)


def cmd_cap(args) -> int:
    sol = potential.p_capacity(_problem(args), tol=args.tol, maxiter=args.maxiter)
    emit(potential.dumps(sol) + "\n", args.out, "solution.json")
    return 0


def cmd_resistance(args) -> int:
    g = load_graph(args.graph)
    print(repr(potential.effective_resistance(g, int_list(args.source), int_list(args.ground))))
    return 0


def cmd_escape(args) -> int:
    g = load_graph(args.graph)
    boundary = int_list(args.boundary)
    est, se = potential.escape_probability_mc(g, args.root, boundary, args.trials, args.seed)
    reff = potential.effective_resistance(g, [args.root], boundary)
    print(json.dumps({"estimate": est, "stderr": se,
                      "predicted": 1 / (g.degree(args.root) * reff)}, sort_keys=True))
    return 0


def cmd_bsdist(args) -> int:
    g = load_graph(args.graph)
    dist = bslimit.neighborhood_distribution(g, args.radius, args.mode, args.k, args.seed)
    emit(dist.to_text(), args.out, f"bsdist_r{args.radius}.txt")
    return 0


def cmd_supported(args) -> int:
    C = pointsupport.FiniteMetric.from_text(Path(args.points).read_text())
    vals = pointsupport.support_values(C, args.delta, args.mode)
    print(json.dumps({"n": len(C), "delta": args.delta, "s": args.s, "mode": args.mode,
                      "count": int((vals >= args.s).sum())}, sort_keys=True))
    return 0


# -- experiments ---------------------------------------------------------------

def format_table(columns: list[str], rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: r.get(c, "") for c in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({c: (repr(v) if isinstance(v, float) else v) for c, v in r.items()})
    return buf.getvalue()


def write_plot(series: dict, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed metadata so repeated runs write identical files
    matplotlib.rcParams["svg.hashsalt"] = "graphlimits"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (radii, caps) in series.items():
        ax.plot(radii, caps, marker="o", label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("r")
    ax.set_ylabel("cap_2(B(root,1), {d >= r})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_experiment(args) -> int:
    raw = load_config(args.config)
    cfg = experiments.ExperimentConfig.resolve(
        args.command, raw, seed=args.seed, output=args.out, format=args.format,
        plot=args.plot or None, jobs=args.jobs)
    result = experiments.run(cfg)
    ext = "json" if cfg.format == "json" else "csv"
    table = format_table(result.columns, result.rows, cfg.format)
    report = {"experiment": result.experiment, "seed": cfg.seed, "params": cfg.params,
              "checks": result.checks, "summary": result.summary, "passed": result.passed}
    if cfg.output:
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{result.experiment}.{ext}").write_text(table)
        (out / f"{result.experiment}_report.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
        for name, text in result.artifacts.items():
            target = out / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text)
        if cfg.plot and result.plot:
            write_plot(result.plot, out / f"{result.experiment}_profiles.svg")
    else:
        sys.stdout.write(table)
        if cfg.plot and result.plot:
            log.warning("--plot needs --out; no plot written")
    for name, ok in result.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphlimits", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def graph_cmd(name, fn, help, graph_required=True):
        p = sub.add_parser(name, help=help)
        p.add_argument("--graph", required=graph_required, help="edge-list file or family spec")
        p.add_argument("--out", help="output directory (default: stdout)")
        p.set_defaults(func=fn)
        return p

    p = graph_cmd("genus", cmd_genus, "genus of an embedding, or minimum genus by search", False)
    p.add_argument("--rotation", help="rotation-system file")
    p.add_argument("--exhaustive", action="store_true", help="minimise over all rotation systems")
    p.add_argument("--budget", type=int, default=2_000_000)

    p = graph_cmd("fill", cmd_fill, "triangulate every face of an embedding", False)
    p.add_argument("--rotation", help="rotation-system file")
    p.add_argument("--valence", type=int, default=None, help="declared valence bound")

    graph_cmd("cheeger", cmd_cheeger, "Cheeger bounds (exact value for small graphs)")

    p = graph_cmd("cap", cmd_cap, "p-capacity between two vertex sets", False)
    p.add_argument("--problem", help="JSON capacity problem")
    p.add_argument("--source")
    p.add_argument("--ground")
    p.add_argument("-p", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--maxiter", type=int, default=500)

    p = graph_cmd("resistance", cmd_resistance, "effective resistance between two vertex sets")
    p.add_argument("--source", required=True)
    p.add_argument("--ground", required=True)

    p = graph_cmd("escape", cmd_escape, "Monte Carlo escape probability vs 1/(deg R_eff)")
    p.add_argument("--root", type=int, required=True)
    p.add_argument("--boundary", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = graph_cmd("bsdist", cmd_bsdist, "rooted-ball distribution at a given depth")
    p.add_argument("--radius", "-r", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("-k", type=int, default=None, help="sample size in sampled mode")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("supported", help="count (delta, s)-supported points")
    p.add_argument("--points", required=True, help="coordinate or distance-matrix file")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("-s", type=float, required=True)
    p.add_argument("--mode", choices=pointsupport.MODES, default="necessary")
    p.set_defaults(func=cmd_supported)

    for name, fn in experiments.RUNNERS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).strip().split("\n")[0])
        p.add_argument("--config", help="YAML or JSON config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--plot", action="store_true")
        p.add_argument("--jobs", type=int, default=None)
        p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
