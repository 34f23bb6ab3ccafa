"""Execute one configured experiment: library call in, report and table out."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import stats
from .analysis import analyze, beta_threshold
from .errors import ParameterError
from .families import build_model
from .mobility import TRACE_COLUMNS, MobilityModel, trace_rows
from .reports import Table
from .representation import verify_equivalence
from .rng import RngStreamKey, derive_seed
from .sweeps import make_generator


@dataclass
class Outcome:
    result: dict
    table: Table
    verdict: str | None = None
    extra_tables: dict = field(default_factory=dict)


VERDICT_OF_BOUND = {"holds": "pass", "violated": "fail", "inconclusive": "inconclusive"}
VERDICT_OF_EQUIVALENCE = {"equivalent": "pass", "not equivalent": "fail", "inconclusive": "inconclusive"}


def combine(verdicts):
    """Overall verdict: any fail wins, then inconclusive, else pass."""
    vs = [v for v in verdicts if v is not None]
    if not vs:
        return None
    for v in ("fail", "inconclusive"):
        if v in vs:
            return v
    return "pass"


def _as_list(n):
    return n if isinstance(n, list) else [n]


def models_of(exp):
    """Models named by the experiment, built eagerly so bad families fail before any run."""
    p = exp.params
    out = {}
    for key in ("model", "model_a", "model_b"):
        if key in p:
            out[key] = build_model(p[key])
    if exp.kind == "mobility":
        out["model"] = MobilityModel(p["config"])
    return out


def run_sample(p, models, seed, jobs):
    model = models["model"]
    rows, graphs = [], []
    for t in range(p["trials"]):
        g = model.sample_graph(p["n"], RngStreamKey(seed, t))
        s = analyze(g)
        rows.append((t, g.edge_count, s.isolated_count, s.component_count, s.largest_size))
        graphs.append({"trial": t, "edges": [list(e) for e in g.edges()]})
    table = Table(("trial", "edge_count", "isolated", "components", "largest"), rows)
    return Outcome({"model": model.describe(), "n": p["n"], "graphs": graphs}, table)


def run_analyze(p, models, seed, jobs):
    model = models["model"]
    rows, result = [], {"model": model.describe(), "n": p["n"], "beta": p["beta"], "estimates": {}}
    for stat in p["statistics"]:
        est = stats.estimate(model, p["n"], p["trials"], stat, seed, beta=p["beta"], jobs=jobs)
        result["estimates"][stat] = est
        rows.append((stat, est.mean, est.std_error, est.trials))
    return Outcome(result, Table(("statistic", "mean", "std_error", "trials"), rows))


def run_verify_bound(p, models, seed, jobs):
    model = models["model"]
    reports, rows = [], []
    for n in _as_list(p["n"]):
        r = stats.verify_isolation_bound(model, n, p["trials"], derive_seed(seed, n), jobs=jobs)
        reports.append(r)
        iso, deg = r.empirical_mean_isolated, r.empirical_avg_degree
        rows.append((n, deg.mean, deg.std_error, iso.mean, iso.std_error, r.bound_value, r.verdict))
    verdict = combine(VERDICT_OF_BOUND[r.verdict] for r in reports)
    table = Table(("n", "dbar_mean", "dbar_se", "iso_mean", "iso_se", "bound_value", "verdict"), rows)
    return Outcome({"model": model.describe(), "reports": reports}, table, verdict)


def run_sweep(p, models, seed, jobs):
    gen = make_generator(
        p["generator"], p["C"], seed, mobility=p["mobility"], pilot_trials=p["pilot_trials"], target_dbar=p["target_dbar"]
    )
    rep = stats.tradeoff_sweep(gen, p["C"], p["n_grid"], p["beta_rule"], p["trials"], seed, jobs=jobs)
    rows = [tuple(getattr(r, c) for c in stats.SWEEP_COLUMNS) for r in rep.rows]
    result = {"generator": p["generator"], "report": rep}
    if hasattr(gen, "radii"):
        result["calibrated_r_link"] = {str(n): r for n, r in sorted(gen.radii.items())}
    return Outcome(result, Table(stats.SWEEP_COLUMNS, rows), "pass" if rep.passed else "fail")


def run_equivalence(p, models, seed, jobs):
    a, b = models["model_a"], models["model_b"]
    reports, rows = [], []
    for n in _as_list(p["n"]):
        r = verify_equivalence(a, b, n, p["trials"], p["alpha"], derive_seed(seed, n), mode=p["mode"])
        reports.append(r)
        rows.append((n, r.binning, r.statistic, r.dof, r.p_value, r.verdict))
    verdict = combine(VERDICT_OF_EQUIVALENCE[r.verdict] for r in reports)
    result = {"model_a": a.describe(), "model_b": b.describe(), "reports": reports}
    return Outcome(result, Table(("n", "binning", "statistic", "dof", "p_value", "verdict"), rows), verdict)


def run_ide_pos(p, models, seed, jobs):
    model = models["model"]
    checks = {"ide": stats.ide_check, "pos": stats.pos_check}
    reports, rows = {}, []
    for name in p["checks"]:
        if name not in checks:
            raise ParameterError(f"unknown check {name!r}; choose from ide, pos")
        r = checks[name](model, p["n"], p["k"], p["trials"], p["alpha"], seed, p["battery"])
        reports[name] = r
        for s in r.results:
            edges = " ".join(f"{i}-{j}" for i, j in s.edges)
            rows.append((name, edges, s.joint, s.joint_se, s.product, s.product_se, s.z))
    verdict = combine(r.verdict for r in reports.values())
    table = Table(("check", "edges", "joint", "joint_se", "product", "product_se", "z"), rows)
    return Outcome({"model": model.describe(), "reports": reports}, table, verdict)


def run_exchangeability(p, models, seed, jobs):
    model = models["model"]
    r = stats.exchangeability_test(model, p["n"], p["trials"], p["alpha"], seed)
    rows = [(b["bin"], b["count_a"], b["count_b"]) for b in r.bins]
    return Outcome({"model": model.describe(), "report": r}, Table(("bin", "count_fixed", "count_random"), rows), r.verdict)


def run_definetti(p, models, seed, jobs):
    model = models["model"]
    finals = stats.definetti_final_averages(model, p["anchor"], p["N"], p["trials"], seed)
    result = {"model": model.describe(), "anchor": p["anchor"], "N": p["N"], "finals": finals}
    verdict = None
    if p["uniform_test"]:
        r = stats.definetti_uniform_test(model, p["anchor"], p["N"], p["trials"], p["alpha"], seed)
        result["uniform_test"] = {"ks_statistic": r.ks_statistic, "ks_p_value": r.ks_p_value, "verdict": r.verdict}
        verdict = r.verdict
    rows = [(t, float(v)) for t, v in enumerate(finals)]
    return Outcome(result, Table(("trial", "final_average"), rows), verdict)


def run_mobility(p, models, seed, jobs):
    model = models["model"]
    n = p["n"]
    s = stats.collect_summaries(model, n, p["trials"], seed, jobs)
    result = {
        "model": model.describe(),
        "n": n,
        "isolated_count": stats.mean_estimate(s["isolated"]),
        "avg_degree": stats.mean_estimate(s["degree_sum"] / n),
        "connectivity": stats.proportion_estimate(s["largest"] >= beta_threshold(n, p["beta"])),
    }
    result["isolated_lower_bound"] = stats.isolated_lower_bound(n, min(result["avg_degree"].mean, n - 1))
    rows = [
        (t, int(s["degree_sum"][t]) // 2, int(s["isolated"][t]), int(s["components"][t]), int(s["largest"][t]))
        for t in range(p["trials"])
    ]
    extra = {}
    if p["trace_trials"]:
        trace = []
        for t in range(min(p["trace_trials"], p["trials"])):
            nodes = model.sample_nodes(n, RngStreamKey(seed, t))
            trace += trace_rows(model.cfg, nodes, t)
        extra["trace"] = Table(TRACE_COLUMNS, trace)
    table = Table(("trial", "edge_count", "isolated", "components", "largest"), rows)
    return Outcome(result, table, None, extra)


RUNNERS = {
    "sample": run_sample,
    "analyze": run_analyze,
    "verify-bound": run_verify_bound,
    "sweep": run_sweep,
    "equivalence": run_equivalence,
    "ide-pos": run_ide_pos,
    "exchangeability": run_exchangeability,
    "definetti": run_definetti,
    "mobility": run_mobility,
}


def run_experiment(exp, models, master_seed, jobs=1):
    seed = derive_seed(master_seed, exp.index)
    return RUNNERS[exp.kind](exp.params, models, seed, jobs)
