import math

import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from models import small_mobility
from rgmlab.core import PhasePoint, sample_graph
from rgmlab.errors import ParameterError
from rgmlab.mobility import (
    TRACE_COLUMNS,
    MobilityConfig,
    MobilityModel,
    base_distance,
    build_mobility_model,
    calibrate_r_link,
    critical_radius,
    link_indicator,
    position_at,
    radio_distance,
    sample_initial_positions,
    trace_rows,
    trajectories,
)
from rgmlab.rng import RngStreamKey
from rgmlab.stats import collect_summaries, exchangeability_test, verify_isolation_bound

# placement ----------------------------------------------------------------


def test_covering_radius_accepts_everything():
    cfg = MobilityConfig(d0=1.5, domain_mode="clipped-square")
    rng = np.random.default_rng(0)
    pos, piv = sample_initial_positions(cfg, 500, rng)
    ref = np.random.default_rng(0)
    ref.random((cfg.k, 2))
    np.testing.assert_array_equal(pos, ref.random((500, 2))[:500])


@pytest.mark.parametrize("mode", ["torus", "clipped-square"])
def test_single_pivot_keeps_points_close(mode):
    cfg = MobilityConfig(k=1, d0=0.1, domain_mode=mode)
    for t in range(20):
        pos, piv = sample_initial_positions(cfg, 60, RngStreamKey(3, t))
        assert (base_distance(pos, piv[0], cfg) <= 0.1).all()
        pair = base_distance(pos[:, None], pos[None, :], cfg)
        assert pair.max() <= 0.2 + 1e-12


def test_placement_is_deterministic():
    cfg = MobilityConfig()
    a = sample_initial_positions(cfg, 50, RngStreamKey(4, 1))
    b = sample_initial_positions(cfg, 50, RngStreamKey(4, 1))
    np.testing.assert_array_equal(a[0], b[0])


def test_tiny_radius_aborts():
    cfg = MobilityConfig(k=1, d0=1e-5)
    with pytest.raises(ParameterError, match="acceptance"):
        sample_initial_positions(cfg, 5, RngStreamKey(0, 0))


def test_gaussian_base_measure_in_square():
    bm = {"kind": "gaussian_mixture", "components": [{"weight": 1, "mean": [0.9, 0.9], "sd": 0.2}]}
    cfg = MobilityConfig(base_measure=bm, d0=0.3)
    pos, piv = sample_initial_positions(cfg, 400, RngStreamKey(1, 0))
    assert ((pos >= 0) & (pos <= 1)).all() and ((piv >= 0) & (piv <= 1)).all()
    assert pos.mean() > 0.55


# trajectories -------------------------------------------------------------


def test_start_point():
    cfg = MobilityConfig(trajectory_family="arc")
    p = PhasePoint(0.3, 0.4, 1.7)
    assert position_at(p, cfg, 0.0) == pytest.approx((0.3, 0.4))


def test_straight_heading_advances():
    cfg = MobilityConfig(v0=0.1)
    assert position_at(PhasePoint(0.95, 0.5, 0.0), cfg, 1.0) == pytest.approx((0.05, 0.5))


def test_reflection_in_clipped_square():
    cfg = MobilityConfig(v0=0.1, domain_mode="clipped-square")
    assert position_at(PhasePoint(0.95, 0.5, 0.0), cfg, 1.0) == pytest.approx((0.95, 0.5))
    assert position_at(PhasePoint(0.02, 0.5, math.pi), cfg, 1.0) == pytest.approx((0.08, 0.5))


def test_arc_closes_after_one_period():
    kappa, v0 = 2 * math.pi, 0.1
    period = 2 * math.pi / (v0 * kappa)
    cfg = MobilityConfig(v0=v0, T=period, trajectory_family="arc", heading_law={"kappa": 1.0, "mean": 0.7})
    p = PhasePoint(0.4, 0.6, kappa)
    assert position_at(p, cfg, period) == pytest.approx((0.4, 0.6), abs=1e-12)
    half = position_at(p, cfg, period / 2)
    assert math.dist(half, (0.4, 0.6)) == pytest.approx(2 / kappa)


def test_position_outside_horizon():
    with pytest.raises(ParameterError):
        position_at(PhasePoint(0.1, 0.1, 0.0), MobilityConfig(), 1.5)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(-8, 8), st.sampled_from(["straight-heading", "arc"]))
@example(0.0, 0.0, 5.1e-10, "arc")
@example(0.5, 0.5, 0.0, "arc")
def test_speed_is_v0(x, y, param, family):
    cfg = MobilityConfig(v0=0.07, trajectory_family=family, curvature_max=8.0)
    t = np.linspace(0, 1, 2001)
    traj = trajectories([[x, y, param]], cfg, t)[0]
    step = base_distance(traj[1:], traj[:-1], cfg)
    assert np.allclose(step / np.diff(t), 0.07, rtol=1e-6)


# radio distance -----------------------------------------------------------


def test_distance_zero_on_same_point():
    cfg = MobilityConfig(fading={"sigma": 0.8})
    assert radio_distance([0.2, 0.3], [0.2, 0.3], 2.5, cfg) == 0


@given(st.tuples(st.floats(0, 1), st.floats(0, 1)), st.tuples(st.floats(0, 1), st.floats(0, 1)))
def test_distance_symmetric_torus(a, b):
    cfg = MobilityConfig()
    d = radio_distance(a, b, None, cfg)
    assert d == radio_distance(b, a, None, cfg)
    dx, dy = (min(abs(p - q), 1 - abs(p - q)) for p, q in zip(a, b))
    assert d == pytest.approx(math.hypot(dx, dy))


def test_fading_median_is_base_distance():
    cfg = MobilityConfig(fading={"sigma": 0.5})
    z = np.random.default_rng(5).standard_normal(20001)
    d = radio_distance(np.array([0.1, 0.1]), np.array([0.4, 0.5]), z, cfg)
    assert np.median(d) == pytest.approx(0.5, rel=0.02)


# links -----------------------------------------------------------------------


def test_identical_trajectories_link():
    p = PhasePoint(0.3, 0.3, 1.0)
    assert link_indicator(p, p, MobilityConfig(r_link=0.01))
    assert link_indicator(p, p, MobilityConfig(r_link=0.01, fading={"sigma": 1.0}), xi=0.999)


def test_zero_range_never_links_distinct_starts():
    cfg = MobilityConfig(r_link=0.0)
    assert not link_indicator(PhasePoint(0.3, 0.3, 0.0), PhasePoint(0.3, 0.31, 0.0), cfg)


def test_stationary_nodes_within_range_link():
    cfg = MobilityConfig(v0=0.0, r_link=0.1, T=2.0, t_link=0.5)
    assert link_indicator(PhasePoint(0.2, 0.2, 0.0), PhasePoint(0.25, 0.2, 1.0), cfg)
    assert not link_indicator(PhasePoint(0.2, 0.2, 0.0), PhasePoint(0.35, 0.2, 1.0), cfg)


def test_contact_must_last():
    # head-on pass: within 0.05 only for a short time
    cfg = MobilityConfig(v0=0.2, r_link=0.05, t_link=0.5, dt=0.01)
    a, b = PhasePoint(0.3, 0.5, 0.0), PhasePoint(0.7, 0.5, math.pi)
    assert not link_indicator(a, b, cfg)
    assert link_indicator(a, b, cfg.replace(t_link=0.05))


def test_fading_can_break_links():
    cfg = MobilityConfig(v0=0.0, r_link=0.1, fading={"sigma": 1.0})
    a, b = PhasePoint(0.2, 0.2, 0.0), PhasePoint(0.28, 0.2, 0.0)
    assert link_indicator(a, b, cfg, xi=0.5)
    assert not link_indicator(a, b, cfg, xi=0.9)


def test_dt_refinement_keeps_slack_links():
    rng = np.random.default_rng(2024)
    for dt in (0.05, 0.02):
        coarse = MobilityConfig(v0=0.3, dt=dt, t_link=0.2)
        fine = coarse.replace(dt=dt / 2)
        a = np.column_stack([rng.random((3000, 2)), rng.uniform(-math.pi, math.pi, 3000)])
        b = a.copy()
        b[:, :2] = np.mod(a[:, :2] + rng.normal(0, 0.1, (3000, 2)), 1)
        b[:, 2] = rng.uniform(-math.pi, math.pi, 3000)
        rc, rf = critical_radius(a, b, coarse), critical_radius(a, b, fine)
        slack = coarse.v0 * coarse.dt
        assert (rf <= rc + slack + 1e-12).all()
        r = np.quantile(rc, 0.3)
        kept = rc <= r - slack
        assert kept.any() and (rf[kept] <= r).all()


def test_pruning_matches_full_computation():
    cfg = small_mobility().cfg
    rng = np.random.default_rng(9)
    a = np.column_stack([rng.random((500, 2)), rng.uniform(-3, 3, 500)])
    b = np.column_stack([rng.random((500, 2)), rng.uniform(-3, 3, 500)])
    full = critical_radius(a, b, cfg)
    capped = critical_radius(a, b, cfg, cap=cfg.r_link)
    assert ((full <= cfg.r_link) == (capped <= cfg.r_link)).all()


# model -----------------------------------------------------------------------


def test_model_flags_and_samples():
    m = small_mobility()
    assert m.flags.local and m.flags.name_invariant and not m.flags.free
    g = sample_graph(m, 30, RngStreamKey(1, 0))
    h = sample_graph(m, 30, RngStreamKey(1, 0))
    assert g == h and g.n == 30


def test_mobility_exchangeable():
    assert exchangeability_test(small_mobility(), 6, 2000, 0.01, 3).verdict == "pass"


def test_mobility_bound_holds():
    rep = verify_isolation_bound(build_mobility_model(), 100, 200, 4)
    assert rep.verdict == "holds"


def test_dense_regime_is_complete():
    cfg = MobilityConfig(k=1, d0=1.5, r_link=1.0, T=4.0, t_link=0.25)
    s = collect_summaries(MobilityModel(cfg), 25, 20, 5)
    assert (s["degree_sum"] / 25 == 24).all()


def test_config_validation():
    with pytest.raises(ParameterError):
        MobilityConfig(t_link=2.0)
    with pytest.raises(ParameterError):
        MobilityConfig(dt=0.5)
    with pytest.raises(ParameterError):
        MobilityConfig(k=0)
    with pytest.raises(ParameterError):
        MobilityConfig(d0=0)
    with pytest.raises(ParameterError):
        MobilityConfig(domain_mode="sphere")
    with pytest.raises(ParameterError):
        MobilityConfig(fading={"sigma": -1})
    with pytest.raises(ParameterError):
        MobilityConfig.from_dict({"speed": 1})
    assert MobilityConfig.from_dict({"k": 2}).k == 2


def test_window_length():
    cfg = MobilityConfig(T=1.0, t_link=0.25, dt=0.05)
    assert cfg.samples == 21 and cfg.window == 6


def test_trace_rows():
    cfg = small_mobility().cfg
    nodes = build_mobility_model(cfg).sample_nodes(3, RngStreamKey(0, 0))
    rows = trace_rows(cfg, nodes, 7)
    assert len(rows) == 3 * cfg.samples and len(rows[0]) == len(TRACE_COLUMNS)
    assert rows[0][:3] == (7, 1, 0.0)
    assert rows[0][3:] == pytest.approx(tuple(nodes.points[0, :2]))


def test_calibration_hits_target():
    cfg = MobilityConfig()
    r = calibrate_r_link(cfg, 200, 2.0, 10, 6)
    s = collect_summaries(MobilityModel(cfg.replace(r_link=r)), 200, 10, 6)
    # the pilot trials themselves land on the target by construction
    assert (s["degree_sum"] / 200).mean() == pytest.approx(2.0, abs=0.01)
    s = collect_summaries(MobilityModel(cfg.replace(r_link=r)), 200, 40, 99)
    assert abs((s["degree_sum"] / 200).mean() - 2.0) < 0.5
