"""Experiment suites E1-E5.

Each runner takes a resolved :class:`ExperimentConfig` and returns an
:class:`ExperimentResult` holding table rows, a summary of pass/fail checks,
and optional text artifacts (graphs, distributions) to be written next to
the table.  Results depend only on the configuration and the master seed.
"""

from __future__ import annotations

import copy
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import bslimit, embedding, families, pointsupport, potential, spectral
from .errors import PreconditionError
from .graph import Graph, sphere

# Thresholds measured once on the default seeds and then fixed.
LAMBDA_FLOOR = 0.05  # lambda2/2 for random 3-regular graphs, n in 100..1000 (observed min 0.071)
TREE_FLOOR = 2.0  # cap_2 profile of the depth-12 binary tree (observed limit 2.0039 at r = 10)
TREE_BALL_FRACTION = 0.9  # r = 2 tree-like balls in random_regular(1000, 3) (observed 0.954..0.983)

DEFAULTS: dict[str, dict[str, Any]] = {
    "e1": {
        "planar_sizes": list(range(8, 65)),
        "torus_sizes": [8, 16, 32],
        "regular_sizes": [100, 200, 500, 1000],
        "regular_degree": 3,
        "seeds_per_size": 10,
        "lambda_floor": LAMBDA_FLOOR,
        "certified_fraction": 0.9,
    },
    "e2": {
        "torus_n": 64,
        "torus_radii": list(range(2, 17)),
        "tree_depth": 12,
        "tree_radii": list(range(2, 11)),
        "path_n": 64,
        "path_radii": [2, 4, 8, 16, 32],
        "tree_floor": TREE_FLOOR,
        "escape_trials": 100_000,
        "escape_instances": ["K2", "C10", "grid3", "torus17", "tree8"],
        "r2_threshold": 0.98,
    },
    "e3": {
        "sizes": [100, 1000, 10_000],
        "delta": 1 / 3,
        "s_min": 2,
        "s_max": 128,
        "center_mode": "necessary",
        "slope_tolerance": 0.1,
    },
    "e4": {
        "trials": 200,
        "max_vertices": 40,
        "max_valence": 6,
        "stretch_sample": 64,
    },
    "e5": {
        "torus_sizes": [6, 12],
        "torus_radii": [1, 2],
        "path_exponents": [4, 5, 6, 7, 8],
        "path_radius": 2,
        "regular_n": 1000,
        "regular_degree": 3,
        "regular_radius": 2,
        "regular_seeds": 3,
        "tree_fraction": TREE_BALL_FRACTION,
    },
}
COMMON_KEYS = {"experiment", "seed", "output", "format", "plot", "jobs"}


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int = 0
    output: str | None = None
    format: str = "csv"
    plot: bool = False
    jobs: int = 1

    @classmethod
    def resolve(cls, experiment: str, raw: dict | None = None, **overrides) -> "ExperimentConfig":
        """Merge a raw config mapping over the experiment defaults; unknown keys are errors."""
        experiment = experiment.lower()
        if experiment not in DEFAULTS:
            raise PreconditionError(f"unknown experiment {experiment!r}")
        raw = dict(raw or {})
        declared = raw.pop("experiment", experiment)
        if str(declared).lower() != experiment:
            raise PreconditionError(f"config is for {declared!r}, not {experiment!r}")
        params = copy.deepcopy(DEFAULTS[experiment])
        unknown = set(raw) - set(params) - COMMON_KEYS
        if unknown:
            raise PreconditionError(f"unknown config keys for {experiment}: {sorted(unknown)}")
        common = {k: raw.pop(k) for k in list(raw) if k in COMMON_KEYS}
        for k, v in raw.items():
            default = params[k]
            if isinstance(default, list) and not isinstance(v, list):
                raise PreconditionError(f"config key {k!r} must be a list")
            if isinstance(default, (int, float)) and not isinstance(default, bool) and not isinstance(v, (int, float)):
                raise PreconditionError(f"config key {k!r} must be numeric")
            params[k] = v
        common.update({k: v for k, v in overrides.items() if v is not None})
        fmt = common.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise PreconditionError(f"format must be csv or json, got {fmt!r}")
        return cls(experiment, params, int(common.get("seed", 0)), common.get("output"),
                   fmt, bool(common.get("plot", False)), int(common.get("jobs", 1)))


@dataclass
class ExperimentResult:
    experiment: str
    columns: list[str]
    rows: list[dict]
    checks: dict[str, bool] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    plot: dict | None = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def cell_seeds(master: int, count: int) -> list[int]:
    """Independent per-cell seeds derived from the master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(master).spawn(count)]


def run_cells(fn: Callable, cells: list, jobs: int = 1) -> list:
    """Map ``fn`` over ``cells`` keeping input order, optionally in a process pool."""
    if jobs <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, cells))


# -- E1: Cheeger contrast -------------------------------------------------------

def half_grid_cut(n: int, torus: bool) -> spectral.CutResult:
    """First ``floor(n/2)`` columns of the grid, an explicit upper bound on ``h``."""
    g = (families.torus_grid if torus else families.planar_grid)(n)[0]
    witness = tuple(sorted(i * n + j for i in range(n) for j in range(n // 2)))
    bnd = spectral.boundary_size(g, witness)
    return spectral.CutResult(Fraction(bnd, len(witness)), witness, bnd)


def _e1_cell(cell):
    kind, n, d, seed = cell
    if kind == "random_regular":
        g = families.random_regular(n, d, seed)
        lam, vec = spectral.fiedler(g)
        sweep = spectral.sweep_cut(g, vec)
        return {"family": kind, "n": n, "seed": seed, "h_upper": float(sweep.value),
                "h_lower": lam / 2, "witness": "fiedler_sweep"}, g.to_edge_list()
    g = (families.torus_grid if kind == "torus_grid" else families.planar_grid)(n)[0]
    lam, vec = spectral.fiedler(g)
    sweep = spectral.sweep_cut(g, vec)
    half = half_grid_cut(n, kind == "torus_grid")
    best, how = (sweep, "fiedler_sweep") if sweep.value <= half.value else (half, "half_grid")
    return {"family": kind, "n": n, "seed": "", "h_upper": float(best.value),
            "h_lower": lam / 2, "witness": how}, None


def run_e1_cheeger_contrast(cfg: ExperimentConfig) -> ExperimentResult:
    """Cheeger upper bounds for grids against spectral lower bounds for random regular graphs."""
    p = cfg.params
    cells = [("planar_grid", n, 4, None) for n in p["planar_sizes"]]
    cells += [("torus_grid", n, 4, None) for n in p["torus_sizes"]]
    seeds = cell_seeds(cfg.seed, len(p["regular_sizes"]) * p["seeds_per_size"])
    it = iter(seeds)
    cells += [("random_regular", n, p["regular_degree"], next(it))
              for n in p["regular_sizes"] for _ in range(p["seeds_per_size"])]
    out = run_cells(_e1_cell, cells, cfg.jobs)
    rows = [r for r, _ in out]
    artifacts = {f"graphs/rr_{r['n']}_{r['seed']}.txt": txt for r, txt in out if txt}
    planar = [r for r in rows if r["family"] == "planar_grid"]
    regular = [r for r in rows if r["family"] == "random_regular"]
    certified = sum(r["h_lower"] >= p["lambda_floor"] for r in regular)
    checks = {
        "planar h_upper <= 4/n": all(r["h_upper"] <= 4 / r["n"] for r in planar),
        "torus h_upper <= 4/n": all(r["h_upper"] <= 4 / r["n"] for r in rows if r["family"] == "torus_grid"),
        f"random regular lambda2/2 >= {p['lambda_floor']} on >= {p['certified_fraction']:.0%}":
            not regular or certified >= p["certified_fraction"] * len(regular),
    }
    summary = {"certified": certified, "regular_instances": len(regular),
               "min_regular_h_lower": min((r["h_lower"] for r in regular), default=None)}
    return ExperimentResult("e1", ["family", "n", "seed", "h_upper", "h_lower", "witness"], rows,
                            checks, summary, artifacts)


# -- E2: recurrence ----------------------------------------------------------------

def r_squared(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return float(1 - resid.var() / y.var())


def tree_profile_closed_form(r: int) -> float:
    """Series-parallel value of ``cap_2`` for the binary tree: two subtrees of height ``r - 1``."""
    return 2.0 / (1.0 - 2.0 ** -(r - 1))


def escape_instance(name: str) -> tuple[Graph, int, list[int]]:
    if name == "K2":
        return families.complete(2), 0, [1]
    if name == "C10":
        return families.cycle(10), 0, [5]
    if name == "grid3":
        return families.planar_grid(3)[0], 0, [8]
    if name == "torus17":
        g = families.torus_grid(17)[0]
        root = 8 * 17 + 8
        return g, root, sphere(g, root, 8)
    if name == "tree8":
        g = families.binary_tree(8)
        return g, 0, list(range(2 ** 8 - 1, 2 ** 9 - 1))
    raise PreconditionError(f"unknown escape instance {name!r}")


def _e2_escape(cell):
    name, trials, seed = cell
    g, root, boundary = escape_instance(name)
    est, se = potential.escape_probability_mc(g, root, boundary, trials, seed)
    reff = potential.effective_resistance(g, [root], boundary)
    predicted = 1.0 / (g.degree(root) * reff)
    z = 0.0 if se == 0 else (est - predicted) / se
    ok = abs(est - predicted) <= 3 * se + 1e-12
    return {"table": "escape", "family": name, "r": "", "value": est, "reference": predicted,
            "stderr": se, "ok": ok, "z": z}


def run_e2_recurrence(cfg: ExperimentConfig) -> ExperimentResult:
    """Capacity profiles and escape probabilities across families."""
    p = cfg.params
    rows = []
    tg = families.torus_grid(p["torus_n"])[0]
    troot = (p["torus_n"] // 2) * p["torus_n"] + p["torus_n"] // 2
    torus = potential.parabolicity_profile(tg, troot, p["torus_radii"])
    for r, c in zip(torus.radii, torus.capacities):
        rows.append({"table": "profile", "family": "torus", "r": r, "value": c, "reference": "",
                     "stderr": "", "ok": "", "z": ""})
    tree = potential.parabolicity_profile(families.binary_tree(p["tree_depth"]), 0, p["tree_radii"])
    tree_ok = []
    for r, c in zip(tree.radii, tree.capacities):
        ref = tree_profile_closed_form(r)
        tree_ok.append(abs(c - ref) <= 0.05 * ref)
        rows.append({"table": "profile", "family": "binary_tree", "r": r, "value": c, "reference": ref,
                     "stderr": "", "ok": tree_ok[-1], "z": ""})
    path = potential.parabolicity_profile(families.path(p["path_n"]), 0, p["path_radii"])
    path_ok = []
    for r, c in zip(path.radii, path.capacities):
        ref = 1.0 / (r - 1)
        path_ok.append(abs(c - ref) <= 1e-9)
        rows.append({"table": "profile", "family": "path", "r": r, "value": c, "reference": ref,
                     "stderr": "", "ok": path_ok[-1], "z": ""})
    seeds = cell_seeds(cfg.seed, len(p["escape_instances"]))
    rows += run_cells(_e2_escape, [(name, p["escape_trials"], s)
                                   for name, s in zip(p["escape_instances"], seeds)], cfg.jobs)
    caps = np.array(torus.capacities)
    logs = np.log(torus.radii)
    r2_cap = r_squared(logs, caps)
    r2_res = r_squared(logs, 1 / caps)
    checks = {
        "torus profile strictly decreasing": bool(np.all(np.diff(caps) < 0)),
        f"torus cap_2 vs log r R^2 >= {p['r2_threshold']}": r2_cap >= p["r2_threshold"],
        f"torus 1/cap_2 vs log r R^2 >= {p['r2_threshold']}": r2_res >= p["r2_threshold"],
        "tree profile within 5% of series-parallel": all(tree_ok),
        f"tree profile above floor {p['tree_floor']}": min(tree.capacities) >= p["tree_floor"],
        "path profile = 1/(r-1)": all(path_ok),
        "escape within 3 sigma of 1/(deg R_eff)": all(r["ok"] for r in rows if r["table"] == "escape"),
    }
    summary = {"torus_r2_cap_vs_logr": r2_cap, "torus_r2_resistance_vs_logr": r2_res,
               "torus_slope": torus.slope, "torus_verdict": torus.verdict,
               "tree_verdict": tree.verdict, "tree_min": min(tree.capacities)}
    plot = {
        "torus 64x64": (list(torus.radii), list(torus.capacities)),
        "binary tree": (list(tree.radii), list(tree.capacities)),
        "path": (list(path.radii), list(path.capacities)),
    }
    return ExperimentResult("e2", ["table", "family", "r", "value", "reference", "stderr", "ok", "z"],
                            rows, checks, summary, {}, plot)


# -- E3: supported points -----------------------------------------------------------

def collinear(n: int) -> pointsupport.FiniteMetric:
    return pointsupport.FiniteMetric(points=np.arange(float(n))[:, None])


def _e3_cell(cell):
    n, seed, delta, s_values, mode = cell
    C = pointsupport.uniform_square(n, seed)
    vals = pointsupport.support_values(C, delta, mode)
    return [(n, s, int((vals >= s).sum())) for s in s_values]


def run_e3_supported_points(cfg: ExperimentConfig) -> ExperimentResult:
    """Supported-point counts s*count/|C| over uniform squares."""
    p = cfg.params
    s_values = list(range(p["s_min"], p["s_max"] + 1))
    seeds = cell_seeds(cfg.seed, len(p["sizes"]))
    cells = [(n, sd, p["delta"], s_values, p["center_mode"]) for n, sd in zip(p["sizes"], seeds)]
    rows = []
    maxima = {}
    for result in run_cells(_e3_cell, cells, cfg.jobs):
        for n, s, count in result:
            val = s * count / n
            rows.append({"set": "uniform_square", "n": n, "s": s, "count": count, "s_count_over_n": val})
            maxima[n] = max(maxima.get(n, 0.0), val)
    tc = pointsupport.two_cluster_example(p["delta"], 4, 2)
    tc_count = pointsupport.count_supported(tc.metric, p["delta"], 4, "sufficient")
    rows.append({"set": "two_cluster", "n": len(tc.metric), "s": 4, "count": tc_count,
                 "s_count_over_n": 4 * tc_count / len(tc.metric)})
    line = collinear(60)
    line_count = pointsupport.count_supported(line, p["delta"], 30, p["center_mode"])
    rows.append({"set": "collinear", "n": 60, "s": 30, "count": line_count, "s_count_over_n": 30 * line_count / 60})
    sizes = sorted(maxima)
    slope = float(np.polyfit(np.log(sizes), np.log([maxima[n] for n in sizes]), 1)[0]) if len(sizes) > 1 else 0.0
    checks = {
        f"log-fit slope of max s*count/|C| within +-{p['slope_tolerance']}": abs(slope) <= p["slope_tolerance"],
        "two-cluster point supported": tc_count >= 1,
        "collinear set has no supported point": line_count == 0,
    }
    summary = {"maxima": {str(k): v for k, v in maxima.items()}, "slope": slope}
    return ExperimentResult("e3", ["set", "n", "s", "count", "s_count_over_n"], rows, checks, summary)


# -- E4: triangulation extension ------------------------------------------------------

def fill_properties(rs: embedding.RotationSystem, out: embedding.RotationSystem) -> dict[str, bool]:
    """The five checks on a fill: triangles, vertices, edges, valence, genus."""
    from collections import Counter

    before = Counter(tuple(sorted(e)) for e in rs.graph().edges)
    after = Counter(tuple(sorted(e)) for e in out.graph().edges)
    return {
        "all_triangles": set(embedding.trace_faces(out).lengths) == {3},
        "vertices_preserved": out.vertex_count == rs.vertex_count
        and set(out.vertex_of) == set(rs.vertex_of),
        "edges_preserved": all(after[k] >= m for k, m in before.items())
        and out.alpha[: rs.dart_count] == rs.alpha,
        "valence_bound": all(b <= 3 * a for a, b in zip(rs.valences(), out.valences())),
        "genus_preserved": embedding.euler_genus(out) == embedding.euler_genus(rs),
    }


def run_e4_triangulation(cfg: ExperimentConfig) -> ExperimentResult:
    """Property suite and stretch constants for triangulate_fill."""
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    rows = []
    passed = 0
    worst = {"shrink": 1.0, "expand": 1.0, "density": 0.0}
    for i in range(p["trials"]):
        rs = embedding.random_rotation_system(rng, p["max_vertices"], p["max_valence"])
        out = embedding.triangulate_fill(rs, p["max_valence"])
        props = fill_properties(rs, out)
        stretch = embedding.metric_stretch(rs.graph(), out.graph(), range(rs.vertex_count),
                                           p["stretch_sample"], seed=i)
        ok = all(props.values())
        passed += ok
        worst = {"shrink": max(worst["shrink"], stretch.shrink), "expand": max(worst["expand"], stretch.expand),
                 "density": max(worst["density"], stretch.density)}
        rows.append({"case": i, "V": rs.vertex_count, "E_in": rs.edge_count, "E_out": out.edge_count,
                     "genus": embedding.euler_genus(rs), "max_valence_in": max(rs.valences()),
                     "max_valence_out": max(out.valences()), "shrink": stretch.shrink,
                     "expand": stretch.expand, "density": stretch.density, "pass": ok})
    tet = embedding.RotationSystem.from_graph(families.complete(4), _tetrahedron_rotations())
    identity_ok = embedding.triangulate_fill(tet) == tet
    c4 = embedding.RotationSystem.from_graph(families.cycle(4))
    c4_stretch = embedding.metric_stretch(families.cycle(4), embedding.triangulate_fill(c4).graph(), range(4))
    checks = {
        f"{p['trials']}/{p['trials']} fills satisfy all properties": passed == p["trials"],
        "fill is the identity on triangulations": identity_ok,
        "C4 stretch = 2": c4_stretch.shrink == 2.0,
    }
    summary = {"passed": passed, "trials": p["trials"], "worst_stretch": worst,
               "c4_stretch": c4_stretch.shrink}
    cols = ["case", "V", "E_in", "E_out", "genus", "max_valence_in", "max_valence_out",
            "shrink", "expand", "density", "pass"]
    return ExperimentResult("e4", cols, rows, checks, summary)


def _tetrahedron_rotations() -> list[list[int]]:
    """Planar rotation of K4 with edges (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)."""
    return [[0, 2, 4], [1, 8, 6], [3, 7, 10], [5, 11, 9]]


# -- E5: Benjamini-Schramm convergence -------------------------------------------------

def run_e5_bs_convergence(cfg: ExperimentConfig) -> ExperimentResult:
    """TV distances between rooted-ball distributions."""
    p = cfg.params
    rows = []
    artifacts = {}
    torus_ok = True
    for r in p["torus_radii"]:
        gs = [families.torus_grid(n)[0] for n in p["torus_sizes"]]
        rep = bslimit.convergence_diagnostic(gs, r)
        for i, n1 in enumerate(p["torus_sizes"]):
            for j, n2 in enumerate(p["torus_sizes"]):
                if i < j:
                    expected = 0 if min(n1, n2) >= 2 * r + 2 else ""
                    rows.append({"family": "torus", "a": n1, "b": n2, "r": r,
                                 "tv": float(rep.exact[i][j]), "expected": expected})
                    if expected == 0:
                        torus_ok &= rep.exact[i][j] == 0
    k_values = p["path_exponents"]
    r = p["path_radius"]
    gs = [families.path(2 ** k) for k in k_values]
    rep = bslimit.convergence_diagnostic(gs, r)
    path_ok = True
    for i in range(len(k_values) - 1):
        n = 2 ** k_values[i]
        tv = rep.exact[i][i + 1]
        law = Fraction(r, n)
        path_ok &= tv == law
        rows.append({"family": "path", "a": n, "b": 2 * n, "r": r, "tv": float(tv), "expected": float(law)})
    tails_ok = all(a > b for a, b in zip(rep.tail_maxima, rep.tail_maxima[1:]))
    fractions = []
    for sd in cell_seeds(cfg.seed, p["regular_seeds"]):
        g = families.random_regular(p["regular_n"], p["regular_degree"], sd)
        frac = bslimit.tree_ball_fraction(g, p["regular_radius"])
        fractions.append(frac)
        rows.append({"family": "random_regular", "a": p["regular_n"], "b": "", "r": p["regular_radius"],
                     "tv": "", "expected": frac})
        dist = bslimit.neighborhood_distribution(g, p["regular_radius"])
        artifacts[f"distributions/rr_{p['regular_n']}_{sd}_r{p['regular_radius']}.txt"] = dist.to_text()
    checks = {
        "torus TV = 0 when n >= 2r+2": bool(torus_ok),
        "path TV = r/n": bool(path_ok),
        "path tail maxima strictly decreasing": tails_ok,
        f"random regular tree-like fraction >= {p['tree_fraction']}": min(fractions) >= p["tree_fraction"],
    }
    summary = {"path_indicator": rep.indicator, "path_tail_maxima": list(rep.tail_maxima),
               "tree_fractions": fractions}
    return ExperimentResult("e5", ["family", "a", "b", "r", "tv", "expected"], rows, checks, summary, artifacts)


RUNNERS = {
    "e1": run_e1_cheeger_contrast,
    "e2": run_e2_recurrence,
    "e3": run_e3_supported_points,
    "e4": run_e4_triangulation,
    "e5": run_e5_bs_convergence,
}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)
