"""Monte Carlo engine: estimators, isolation-bound checks, trade-off sweeps, edge correlation probes.

Trial ``t`` of an experiment under master seed ``s`` is sampled with
``RngStreamKey(s, t)``. Per-trial results are collected in trial order and
reduced afterwards, so splitting trials across worker processes never
changes a result.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as sps

from .analysis import analyze, beta_threshold
from .errors import ClassHypothesisError, ParameterError
from .rng import RngStreamKey, StreamTag, derive_seed, pair_index, stream_uniforms
from .stattools import Estimate, mean_estimate, proportion_estimate, two_sample_chi2

SIGMAS = 3.0
# one-sided normal tail beyond 3 sigma
_TAIL3 = float(sps.norm.sf(SIGMAS))


# trial collection ----------------------------------------------------------


def _summary_chunk(model, n, master_seed, lo, hi):
    out = np.empty((hi - lo, 5), dtype=np.int64)
    for row, t in enumerate(range(lo, hi)):
        g = model.sample_graph(n, RngStreamKey(master_seed, t))
        s = analyze(g)
        out[row] = (s.isolated_count, s.degree_sum, s.largest_size, s.component_count, g.degrees()[0] == 0)
    return out


def _chunks(trials, jobs):
    size = max(1, math.ceil(trials / (jobs * 4)))
    return [(lo, min(trials, lo + size)) for lo in range(0, trials, size)]


def collect_summaries(model, n, trials, master_seed, jobs=1):
    """Per-trial graph summaries as a dict of integer arrays.

    Keys: ``isolated``, ``degree_sum``, ``largest``, ``components``,
    ``node1_isolated``.
    """
    if jobs <= 1 or trials < 2:
        arr = _summary_chunk(model, n, master_seed, 0, trials)
    else:
        chunks = _chunks(trials, jobs)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_summary_chunk, model, n, master_seed, lo, hi) for lo, hi in chunks]
            arr = np.concatenate([f.result() for f in futures])
    names = ("isolated", "degree_sum", "largest", "components", "node1_isolated")
    return {k: arr[:, i] for i, k in enumerate(names)}


# basic estimators ----------------------------------------------------------


STATISTICS = ("isolated_count", "avg_degree", "connectivity_indicator")


def estimate(model, n, trials, statistic, master_seed, beta=1.0, jobs=1):
    """Mean and standard error of one per-trial statistic.

    ``connectivity_indicator`` is the proportion of trials whose largest
    component covers at least ``beta * n`` vertices.
    """
    if statistic not in STATISTICS:
        raise ParameterError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")
    if trials < 30:
        raise ParameterError(f"estimate needs trials >= 30, got {trials}")
    s = collect_summaries(model, n, trials, master_seed, jobs)
    if statistic == "isolated_count":
        return mean_estimate(s["isolated"])
    if statistic == "avg_degree":
        return mean_estimate(s["degree_sum"] / n)
    return proportion_estimate(s["largest"] >= beta_threshold(n, beta))


def isolated_lower_bound(n, dbar):
    """``n (1 - dbar/(n-1))**(n-1)``: the floor on expected isolated nodes."""
    if n < 2:
        raise ParameterError(f"isolated_lower_bound needs n >= 2, got {n}")
    if dbar < 0:
        raise ParameterError(f"dbar must be non-negative, got {dbar}")
    if dbar > (n - 1) * (1 + 1e-12):
        raise ParameterError(f"dbar={dbar} exceeds n-1={n - 1}")
    x = min(dbar / (n - 1), 1.0)
    if x == 1.0:
        return 0.0
    return n * math.exp((n - 1) * math.log1p(-x))


def isolated_fraction_floor(n, C):
    return isolated_lower_bound(n, C) / n


# isolation bound -----------------------------------------------------------


@dataclass
class BoundReport:
    n: int
    trials: int
    empirical_mean_isolated: Estimate
    empirical_avg_degree: Estimate
    bound_value: float
    bound_at_high_degree: float
    isolated_upper: float
    verdict: str
    node1_isolated: Estimate

    def to_dict(self):
        return asdict(self)


def _check_loc_inv(model, what):
    f = model.flags
    if not (f.local and f.name_invariant):
        raise ClassHypothesisError(
            f"{what} requires a local, name-invariant model; family {model.family!r} has "
            f"local={f.local}, name_invariant={f.name_invariant}"
        )


def bound_verdict(n, iso, deg):
    """Three-way verdict comparing an isolated-count estimate with the plug-in floor.

    Returns ``(verdict, bound_value, bound_at_high_degree, isolated_upper)``.
    ``isolated_upper`` is ``mean + 3 se``; when every trial gave the same count
    the normal interval collapses, so ``n * P(count differs)`` is added at its
    exact one-sided 3-sigma Clopper-Pearson limit instead.
    """
    d_hat = min(deg.mean, n - 1)
    d_hi = min(deg.mean + SIGMAS * deg.std_error, n - 1)
    bound = isolated_lower_bound(n, d_hat)
    bound_hi = isolated_lower_bound(n, d_hi)
    if iso.std_error > 0:
        upper = iso.mean + SIGMAS * iso.std_error
    else:
        upper = iso.mean + n * (1 - _TAIL3 ** (1 / iso.trials))
    if upper >= bound:
        verdict = "holds"
    elif upper < bound_hi:
        verdict = "violated"
    else:
        verdict = "inconclusive"
    return verdict, bound, bound_hi, upper


def verify_isolation_bound(model, n, trials, master_seed, jobs=1, check_class=True):
    """Check the expected isolated-node count against its lower bound at the empirical degree."""
    if check_class:
        _check_loc_inv(model, "the isolation bound")
    if n < 2:
        raise ParameterError(f"verify_isolation_bound needs n >= 2, got {n}")
    if trials < 100:
        raise ParameterError(f"verify_isolation_bound needs trials >= 100, got {trials}")
    s = collect_summaries(model, n, trials, master_seed, jobs)
    iso = mean_estimate(s["isolated"])
    deg = mean_estimate(s["degree_sum"] / n)
    verdict, bound, bound_hi, upper = bound_verdict(n, iso, deg)
    return BoundReport(
        n=n,
        trials=trials,
        empirical_mean_isolated=iso,
        empirical_avg_degree=deg,
        bound_value=bound,
        bound_at_high_degree=bound_hi,
        isolated_upper=upper,
        verdict=verdict,
        node1_isolated=proportion_estimate(s["node1_isolated"].astype(bool)),
    )


# trade-off sweep -----------------------------------------------------------


def beta_for(rule, n):
    if rule == "one":
        return 1.0
    if rule == "one_minus_inv_sqrt":
        return 1.0 - 1.0 / math.sqrt(n)
    raise ParameterError(f"unknown beta rule {rule!r}")


@dataclass
class SweepRow:
    n: int
    beta_n: float
    dbar_mean: float
    dbar_se: float
    iso_frac_mean: float
    iso_frac_se: float
    floor: float
    markov_ceiling: float
    conn_prob: float
    conn_se: float
    dbar_exceeds_C: bool
    floor_respected: bool
    ceiling_respected: bool


SWEEP_COLUMNS = (
    "n", "beta_n", "dbar_mean", "dbar_se", "iso_frac_mean", "iso_frac_se",
    "floor", "markov_ceiling", "conn_prob", "conn_se",
)


@dataclass
class SweepReport:
    C: float
    beta_rule: str
    trials: int
    a: float
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.floor_respected and r.ceiling_respected and not r.dbar_exceeds_C for r in self.rows)

    def to_dict(self):
        return asdict(self)


def tradeoff_sweep(generator, C, n_grid, beta_rule, trials, master_seed, jobs=1):
    """Connectivity versus isolation across sizes for a bounded-degree family.

    ``generator(n)`` returns the model to use at size ``n``. Each row carries
    the analytic isolated-fraction floor ``(1 - C/(n-1))**(n-1)`` and the
    Markov ceiling ``(1 - a)/beta_n`` on the probability of
    ``beta_n``-connectivity, with ``a`` the smallest floor over the grid.
    """
    if C < 0:
        raise ParameterError(f"C must be non-negative, got {C}")
    n_grid = [int(n) for n in n_grid]
    if any(n < 2 or C > n - 1 for n in n_grid):
        raise ParameterError("every n in the grid needs n >= 2 and C <= n - 1")
    floors = {n: isolated_fraction_floor(n, C) for n in n_grid}
    a = min(floors.values())
    report = SweepReport(C=C, beta_rule=beta_rule, trials=trials, a=a)
    for n in n_grid:
        beta = beta_for(beta_rule, n)
        model = generator(n)
        s = collect_summaries(model, n, trials, derive_seed(master_seed, n), jobs)
        deg = mean_estimate(s["degree_sum"] / n)
        iso = mean_estimate(s["isolated"] / n)
        conn = proportion_estimate(s["largest"] >= beta_threshold(n, beta))
        ceiling = (1 - a) / beta if beta > 0 else math.inf
        report.rows.append(
            SweepRow(
                n=n,
                beta_n=beta,
                dbar_mean=deg.mean,
                dbar_se=deg.std_error,
                iso_frac_mean=iso.mean,
                iso_frac_se=iso.std_error,
                floor=floors[n],
                markov_ceiling=ceiling,
                conn_prob=conn.mean,
                conn_se=conn.std_error,
                dbar_exceeds_C=deg.mean - SIGMAS * deg.std_error > C,
                floor_respected=iso.mean + SIGMAS * iso.std_error >= floors[n],
                ceiling_respected=conn.mean <= ceiling + SIGMAS * conn.std_error,
            )
        )
    return report


# edge correlations ---------------------------------------------------------


def _check_pairs(n, edges):
    norm = []
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j or not (1 <= i <= n and 1 <= j <= n):
            raise ParameterError(f"invalid vertex pair {tuple(e)} for n={n}")
        norm.append((min(i, j), max(i, j)))
    if len(set(norm)) != len(norm):
        raise ParameterError(f"duplicate pairs in {edges}")
    return norm


def _edge_columns(model, n, pair_list, trials, master_seed):
    """``(trials, len(pair_list))`` boolean presence matrix."""
    idx = np.array([pair_index(i - 1, j - 1) for i, j in pair_list], dtype=np.int64)
    out = np.empty((trials, len(idx)), dtype=bool)
    for t in range(trials):
        out[t] = model.sample_graph(n, RngStreamKey(master_seed, t)).mask()[idx]
    return out


def edge_joint_probability(model, n, edges, trials, master_seed):
    """Joint presence probability of ``edges`` and their marginals."""
    pairs = _check_pairs(n, edges)
    if trials < 1000:
        raise ParameterError(f"edge_joint_probability needs trials >= 1000, got {trials}")
    if not pairs:
        return Estimate(1.0, 0.0, trials), []
    cols = _edge_columns(model, n, pairs, trials, master_seed)
    joint = proportion_estimate(cols.all(axis=1))
    return joint, [proportion_estimate(cols[:, k]) for k in range(len(pairs))]


def _product_with_se(marginals):
    means = np.array([m.mean for m in marginals])
    ses = np.array([m.std_error for m in marginals])
    prod = float(np.prod(means))
    var = 0.0
    for k in range(len(means)):
        others = np.prod(np.delete(means, k))
        var += (others * ses[k]) ** 2
    return prod, math.sqrt(var)


@dataclass
class EdgeSetResult:
    edges: list
    joint: float
    joint_se: float
    product: float
    product_se: float
    z: float


@dataclass
class CorrelationReport:
    check: str
    n: int
    k: int
    trials: int
    alpha: float
    threshold: float
    results: list
    worst: EdgeSetResult
    verdict: str

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return asdict(self)


def _edge_sets(check, n, k, battery, master_seed):
    rng = RngStreamKey(derive_seed(master_seed, 0x5E7), 0, StreamTag.PROBE).generator()
    sets = []
    I, J = np.tril_indices(n, -1)[1], np.tril_indices(n, -1)[0]
    for _ in range(battery):
        if check == "ide":
            v = rng.permutation(n)[: 2 * k] + 1
            sets.append([(int(min(a, b)), int(max(a, b))) for a, b in zip(v[0::2], v[1::2])])
        else:
            sel = rng.choice(len(I), size=k, replace=False)
            sets.append([(int(I[s]) + 1, int(J[s]) + 1) for s in sel])
    return sets


def _correlation_check(check, model, n, k, trials, alpha, master_seed, battery):
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if check == "ide" and 2 * k > n:
        raise ParameterError(f"ide_check needs k <= n/2 disjoint edges, got k={k} for n={n}")
    if check == "pos" and k > n * (n - 1) // 2:
        raise ParameterError(f"pos_check needs k <= C(n,2), got k={k} for n={n}")
    if trials < 1000:
        raise ParameterError(f"{check}_check needs trials >= 1000, got {trials}")
    sets = _edge_sets(check, n, k, battery, master_seed)
    all_pairs = sorted({p for s in sets for p in s})
    col = {p: c for c, p in enumerate(all_pairs)}
    cols = _edge_columns(model, n, all_pairs, trials, master_seed)
    if check == "ide":
        threshold = max(SIGMAS, float(sps.norm.isf(alpha / (2 * battery))))
    else:
        threshold = max(SIGMAS, float(sps.norm.isf(alpha / battery)))
    results = []
    for s in sets:
        sub = cols[:, [col[p] for p in s]]
        joint = proportion_estimate(sub.all(axis=1))
        prod, prod_se = _product_with_se([proportion_estimate(sub[:, c]) for c in range(len(s))])
        sigma = math.hypot(joint.std_error, prod_se)
        z = (joint.mean - prod) / sigma if sigma > 0 else 0.0
        results.append(EdgeSetResult([list(p) for p in s], joint.mean, joint.std_error, prod, prod_se, z))
    if check == "ide":
        worst = max(results, key=lambda r: abs(r.z))
        ok = abs(worst.z) <= threshold
    else:
        worst = min(results, key=lambda r: r.z)
        ok = worst.z >= -threshold
    return CorrelationReport(check, n, k, trials, alpha, threshold, results, worst, "pass" if ok else "fail")


def ide_check(model, n, k, trials, alpha=0.01, master_seed=0, battery=10):
    """Two-sided test that random sets of ``k`` pairwise-disjoint edges are independent.

    Each edge set is judged by ``z = (joint - product) / sigma``, with
    ``sigma`` combining the standard errors of the joint proportion and of
    the product of marginals. The battery passes when every ``|z|`` stays
    below ``max(3, z_{alpha / 2B})``.
    """
    return _correlation_check("ide", model, n, k, trials, alpha, master_seed, battery)


def pos_check(model, n, k, trials, alpha=0.01, master_seed=0, battery=10):
    """One-sided test that random sets of ``k`` distinct edges are not negatively correlated."""
    return _correlation_check("pos", model, n, k, trials, alpha, master_seed, battery)


# exchangeability -----------------------------------------------------------


@dataclass
class ExchangeabilityReport:
    n: int
    trials: int
    alpha: float
    statistic_vector: str
    statistic: float
    dof: int
    p_value: float
    bins: list
    verdict: str
    note: str = "passing is necessary, not sufficient, for name invariance"

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return asdict(self)


def _stat_vector(g, u, v):
    d = g.degrees()
    return (int(d[u]), int(d[v]), g.has_edge(u + 1, v + 1))


def exchangeability_test(model, n, trials, alpha=0.01, master_seed=0):
    """Compare ``(deg 1, deg 2, edge(1,2))`` with the same vector at a random ordered pair.

    The fixed-index and random-index samples come from independent trial
    streams, so the chi-square homogeneity test applies.
    """
    if n < 2:
        raise ParameterError(f"exchangeability_test needs n >= 2, got {n}")
    if trials < 1000:
        raise ParameterError(f"exchangeability_test needs trials >= 1000, got {trials}")
    seed_a = derive_seed(master_seed, 0xE1)
    seed_b = derive_seed(master_seed, 0xE2)
    fixed, rand = [], []
    for t in range(trials):
        fixed.append(_stat_vector(model.sample_graph(n, RngStreamKey(seed_a, t)), 0, 1))
        key_b = RngStreamKey(seed_b, t)
        u, v = key_b.with_tag(StreamTag.PROBE).generator().choice(n, size=2, replace=False)
        rand.append(_stat_vector(model.sample_graph(n, key_b), int(u), int(v)))
    res = two_sample_chi2(fixed, rand)
    if not res.adequate:
        verdict = "inconclusive"
    else:
        verdict = "pass" if res.p_value > alpha else "fail"
    return ExchangeabilityReport(
        n=n,
        trials=trials,
        alpha=alpha,
        statistic_vector="(degree of node 1, degree of node 2, edge(1,2)) vs random ordered pair",
        statistic=res.statistic,
        dof=res.dof,
        p_value=res.p_value,
        bins=res.bins,
        verdict=verdict,
    )


# de Finetti limit ----------------------------------------------------------


def _check_extendable(model):
    _check_loc_inv(model, "the de Finetti estimate")
    if not model.supports_counterparts:
        raise ClassHypothesisError(f"family {model.family!r} cannot extend edges beyond n")


def definetti_eta_estimate(model, anchor, N, master_seed, trial=0, n=None):
    """Running averages of ``f(X_anchor, X'_j, xi_j)`` over ``N`` counterpart nodes.

    ``X'_j`` continue the node sequence and ``xi_j`` are fresh uniforms, both
    from reserved streams. ``n`` selects which size's edge function is used.
    """
    _check_extendable(model)
    if anchor < 1:
        raise ParameterError(f"anchor must be a 1-based vertex index, got {anchor}")
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    n = max(anchor, 2) if n is None else n
    if anchor > n:
        raise ParameterError(f"anchor {anchor} exceeds n={n}")
    key = RngStreamKey(master_seed, trial)
    nodes = model.sample_nodes(n, key)
    others = model.counterparts(nodes, N, key.with_tag(StreamTag.COUNTERPART_NODES))
    u = stream_uniforms(key.with_tag(StreamTag.COUNTERPART_EDGES), N)
    anchors = nodes.points[np.full(N, anchor - 1)]
    e = np.asarray(model.link(anchors, others, u, n), dtype=float)
    return np.cumsum(e) / np.arange(1, N + 1)


def definetti_final_averages(model, anchor, N, trials, master_seed, n=None):
    return np.array([definetti_eta_estimate(model, anchor, N, master_seed, t, n)[-1] for t in range(trials)])


@dataclass
class DeFinettiReport:
    N: int
    trials: int
    finals: list
    ks_statistic: float
    ks_p_value: float
    verdict: str

    def to_dict(self):
        return asdict(self)


def definetti_uniform_test(model, anchor, N, trials, alpha, master_seed):
    """KS test of final running averages against Uniform[0, 1]."""
    finals = definetti_final_averages(model, anchor, N, trials, master_seed)
    ks = sps.kstest(finals, "uniform")
    verdict = "pass" if ks.pvalue > alpha else "fail"
    return DeFinettiReport(N, trials, finals.tolist(), float(ks.statistic), float(ks.pvalue), verdict)
