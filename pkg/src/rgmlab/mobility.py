"""Mobile ad hoc network model: clustered placement, random trajectories, contact-duration links.

Each node is a phase point ``(x0, y0, traj_param)``. Two nodes are linked when
their radio distance stays within ``r_link`` over a contiguous stretch of at
least ``t_link`` inside ``[0, T]``, checked on the grid ``t = 0, dt, 2dt, ...``.

The link rule only reads the two phase points and the pair's own uniform,
so the model is local. Nodes are i.i.d. given the random pivots, so it is
name invariant without being free.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import ndtri

from .core import Flags, LocalModel, NodeSample
from .errors import ParameterError
from .rng import RngStreamKey, StreamTag, colex_pairs, pair_uniforms

DOMAIN_MODES = ("torus", "clipped-square")
TRAJECTORIES = ("straight-heading", "arc")
MIN_ACCEPTANCE = 1e-6
_PAIR_CHUNK = 20000


@dataclass(frozen=True)
class MobilityConfig:
    """Parameters of the mobility model.

    ``heading_law`` is ``{"kappa": float, "mean": "radial" | angle}``: headings
    follow a von Mises law whose mean is either the direction away from the
    square's centre or a fixed angle. For arcs the initial heading is that
    mean direction and ``traj_param`` is the signed curvature, uniform on
    ``[-curvature_max, curvature_max]``.

    ``base_measure`` is ``{"kind": "uniform"}`` or ``{"kind": "gaussian_mixture",
    "components": [{"weight", "mean": [x, y], "sd"}, ...]}`` truncated to the
    unit square.
    """

    k: int = 4
    d0: float = 0.15
    v0: float = 0.05
    T: float = 1.0
    t_link: float = 0.25
    r_link: float = 0.05
    dt: float = 0.05
    domain_mode: str = "torus"
    trajectory_family: str = "straight-heading"
    heading_law: dict = field(default_factory=lambda: {"kappa": 1.0, "mean": "radial"})
    curvature_max: float = 2 * math.pi
    base_measure: dict = field(default_factory=lambda: {"kind": "uniform"})
    fading: dict | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        for name in ("d0", "T", "t_link", "dt"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0):
                raise ParameterError(f"{name} must be positive, got {v}")
        # zero speed and zero range are allowed as degenerate limits
        for name in ("v0", "r_link", "curvature_max"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v >= 0):
                raise ParameterError(f"{name} must be non-negative, got {v}")
        if self.t_link > self.T:
            raise ParameterError(f"t_link={self.t_link} exceeds the horizon T={self.T}")
        if self.dt > self.t_link:
            raise ParameterError(f"dt={self.dt} exceeds t_link={self.t_link}")
        if self.window > self.samples:
            raise ParameterError(
                f"a contact window of {self.window} samples does not fit in {self.samples} samples over [0, T]"
            )
        if self.domain_mode not in DOMAIN_MODES:
            raise ParameterError(f"domain_mode must be one of {DOMAIN_MODES}, got {self.domain_mode!r}")
        if self.trajectory_family not in TRAJECTORIES:
            raise ParameterError(f"trajectory_family must be one of {TRAJECTORIES}, got {self.trajectory_family!r}")
        law = dict(self.heading_law)
        if set(law) - {"kappa", "mean"}:
            raise ParameterError(f"unknown heading_law keys {sorted(set(law) - {'kappa', 'mean'})}")
        kappa = law.get("kappa", 1.0)
        if not kappa >= 0:
            raise ParameterError(f"heading_law.kappa must be non-negative, got {kappa}")
        mean = law.get("mean", "radial")
        if mean != "radial" and not isinstance(mean, (int, float)):
            raise ParameterError(f"heading_law.mean must be 'radial' or an angle, got {mean!r}")
        _check_base_measure(self.base_measure)
        if self.fading is not None:
            sigma = self.fading.get("sigma", 0.0)
            if set(self.fading) - {"sigma"} or not sigma >= 0:
                raise ParameterError(f"fading must be {{sigma: >= 0}}, got {self.fading}")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown mobility parameters {sorted(extra)}")
        return cls(**d)

    def replace(self, **changes):
        return type(self)(**{**asdict(self), **changes})

    def to_dict(self):
        return asdict(self)

    @property
    def sigma(self):
        return float(self.fading.get("sigma", 0.0)) if self.fading else 0.0

    @property
    def samples(self):
        return int(math.floor(self.T / self.dt + 1e-9)) + 1

    @property
    def window(self):
        """Consecutive samples a contact must span."""
        return int(math.ceil(self.t_link / self.dt - 1e-9)) + 1

    def times(self):
        return np.arange(self.samples) * self.dt


def _check_base_measure(bm):
    kind = bm.get("kind", "uniform")
    if kind == "uniform":
        return
    if kind != "gaussian_mixture":
        raise ParameterError(f"base_measure.kind must be 'uniform' or 'gaussian_mixture', got {kind!r}")
    comps = bm.get("components") or []
    if not comps:
        raise ParameterError("gaussian_mixture needs at least one component")
    for c in comps:
        if not (c.get("weight", 0) > 0 and c.get("sd", 0) > 0 and len(c.get("mean", ())) == 2):
            raise ParameterError(f"bad gaussian_mixture component {c}")


def _draw_base(rng, cfg, count):
    """``count`` points from the base measure on the unit square."""
    bm = cfg.base_measure
    if bm.get("kind", "uniform") == "uniform":
        return rng.random((count, 2))
    comps = bm["components"]
    w = np.array([c["weight"] for c in comps], dtype=float)
    w /= w.sum()
    means = np.array([c["mean"] for c in comps], dtype=float)
    sds = np.array([c["sd"] for c in comps], dtype=float)
    out = np.empty((0, 2))
    while len(out) < count:
        m = max(64, 2 * (count - len(out)))
        which = rng.choice(len(w), size=m, p=w)
        pts = means[which] + sds[which, None] * rng.standard_normal((m, 2))
        inside = np.all((pts >= 0) & (pts <= 1), axis=1)
        out = np.concatenate([out, pts[inside]])
    return out[:count]


def _torus_delta(a, b):
    d = np.abs(a - b)
    return np.minimum(d, 1.0 - d)


def base_distance(a, b, cfg):
    """Torus or Euclidean distance between position arrays (last axis = 2)."""
    d = _torus_delta(a, b) if cfg.domain_mode == "torus" else a - b
    return np.hypot(d[..., 0], d[..., 1])


def _accept(candidates, pivots, cfg):
    d = base_distance(candidates[:, None, :], pivots[None, :, :], cfg)
    return (d <= cfg.d0).any(axis=1)


def _rejection(rng, cfg, pivots, n):
    """Candidates from the base measure kept when within ``d0`` of some pivot."""
    kept = []
    have = drawn = accepted = 0
    while have < n:
        rate = max(accepted / drawn, MIN_ACCEPTANCE) if drawn else 1.0
        batch = int(min(max(256, 1.2 * (n - have) / rate), 200_000))
        cand = _draw_base(rng, cfg, batch)
        ok = cand[_accept(cand, pivots, cfg)]
        drawn += batch
        accepted += len(ok)
        kept.append(ok)
        have += len(ok)
        if drawn >= 1_000_000 and accepted / drawn < MIN_ACCEPTANCE:
            raise ParameterError(
                f"placement acceptance rate {accepted / drawn:.2e} below {MIN_ACCEPTANCE:g}; d0={cfg.d0} is too small"
            )
    return np.concatenate(kept)[:n]


def mean_heading(pos, cfg):
    mean = cfg.heading_law.get("mean", "radial")
    if mean == "radial":
        return np.arctan2(pos[..., 1] - 0.5, pos[..., 0] - 0.5)
    return np.full(pos.shape[:-1], float(mean))


def _traj_params(rng, pos, cfg):
    if cfg.trajectory_family == "arc":
        return rng.uniform(-cfg.curvature_max, cfg.curvature_max, size=len(pos))
    kappa = float(cfg.heading_law.get("kappa", 1.0))
    return rng.vonmises(mean_heading(pos, cfg), kappa) if kappa > 0 else rng.uniform(-math.pi, math.pi, len(pos))


def sample_initial_positions(cfg, n, key):
    """``(positions, pivots)``: ``n`` clustered positions and the ``k`` pivots behind them."""
    rng = key.generator() if isinstance(key, RngStreamKey) else key
    pivots = _draw_base(rng, cfg, cfg.k)
    return _rejection(rng, cfg, pivots, n), pivots


def _fold(raw, cfg):
    if cfg.domain_mode == "torus":
        return np.mod(raw, 1.0)
    # reflecting walls: unfold onto a period-2 line
    r = np.mod(raw, 2.0)
    return np.where(r > 1.0, 2.0 - r, r)


def trajectories(points, cfg, times=None):
    """Positions of every node at every time, shape ``(m, len(times), 2)``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    t = cfg.times() if times is None else np.asarray(times, dtype=float)
    start = pts[:, None, :2]
    s = cfg.v0 * t[None, :]
    if cfg.trajectory_family == "straight-heading":
        th = pts[:, 2:3]
        raw = start + np.stack([s * np.cos(th), s * np.sin(th)], axis=-1)
    else:
        th = mean_heading(pts[:, :2], cfg)[:, None]
        # half-angle form of the chord, stable as curvature -> 0
        h = pts[:, 2:3] * s / 2
        chord = s * np.sinc(h / np.pi)
        raw = start + np.stack([chord * np.cos(th + h), chord * np.sin(th + h)], axis=-1)
    return _fold(raw, cfg)


def position_at(p, cfg, t):
    if not 0.0 <= t <= cfg.T:
        raise ParameterError(f"t={t} outside [0, {cfg.T}]")
    return tuple(trajectories([[p.x0, p.y0, p.traj_param]], cfg, [t])[0, 0])


def radio_distance(a, b, fading_draw, cfg):
    """Base distance scaled by ``exp(sigma * fading_draw)``; zero whenever ``a == b``."""
    d = base_distance(np.asarray(a, dtype=float), np.asarray(b, dtype=float), cfg)
    if cfg.sigma > 0 and fading_draw is not None:
        d = d * np.exp(cfg.sigma * np.asarray(fading_draw))
    return d


def _fading_normals(u, cfg):
    if cfg.sigma == 0:
        return None
    return ndtri(np.clip(u, 1e-300, 1 - 1e-16))


def critical_radius(a, b, cfg, z=None, cap=math.inf):
    """Smallest radio range at which each pair would link.

    That is the minimum over contact windows of the largest radio distance
    inside the window. Pairs that provably exceed ``cap`` get ``inf``.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 3)
    b = np.asarray(b, dtype=float).reshape(-1, 3)
    scale = np.ones(len(a)) if z is None else np.exp(cfg.sigma * np.asarray(z))
    # each node drifts at most v0*T from its start in the domain metric
    lower = np.maximum(base_distance(a[:, :2], b[:, :2], cfg) - 2 * cfg.v0 * cfg.T, 0.0) * scale
    out = np.full(len(a), np.inf)
    cand = np.flatnonzero(lower <= cap)
    L = cfg.window
    for lo in range(0, len(cand), _PAIR_CHUNK):
        idx = cand[lo : lo + _PAIR_CHUNK]
        d = base_distance(trajectories(a[idx], cfg), trajectories(b[idx], cfg), cfg) * scale[idx, None]
        crit = sliding_window_view(d, L, axis=1).max(axis=-1).min(axis=-1)
        out[idx] = crit
    return out


def link_indicator(pi, pj, cfg, xi=0.5):
    """Contact-duration link between two phase points.

    ``xi`` is the pair's independent uniform; it sets the fading draw
    ``Phi^{-1}(xi)`` and is ignored when fading is off.
    """
    a = [[pi.x0, pi.y0, pi.traj_param]]
    b = [[pj.x0, pj.y0, pj.traj_param]]
    z = _fading_normals(np.array([xi]), cfg)
    return bool(critical_radius(a, b, cfg, z, cap=cfg.r_link)[0] <= cfg.r_link)


class MobilityModel(LocalModel):
    family = "mobility"
    flags = Flags(local=True, name_invariant=True, free=False)
    node_kind = "phase"
    xi_tag = StreamTag.DISTANCE_NOISE
    supports_counterparts = True

    def __init__(self, cfg):
        self.cfg = cfg if isinstance(cfg, MobilityConfig) else MobilityConfig.from_dict(dict(cfg or {}))

    def params(self):
        return self.cfg.to_dict()

    def draw_nodes(self, n, key):
        rng = key.generator()
        pos, pivots = sample_initial_positions(self.cfg, n, rng)
        theta = _traj_params(rng, pos, self.cfg)
        return np.column_stack([pos, theta]), {"pivots": pivots.tolist()}

    def link(self, a, b, u, n):
        z = _fading_normals(u, self.cfg)
        return critical_radius(a, b, self.cfg, z, cap=self.cfg.r_link) <= self.cfg.r_link

    def counterparts(self, nodes, count, key):
        rng = key.generator()
        pos = _rejection(rng, self.cfg, np.asarray(nodes.trace["pivots"]), count)
        return np.column_stack([pos, _traj_params(rng, pos, self.cfg)])


def build_mobility_model(cfg=None):
    return MobilityModel(cfg)


def calibrate_r_link(cfg, n, target_dbar, trials, master_seed):
    """Radio range giving mean degree ``target_dbar`` at size ``n`` over pilot trials.

    Uses exact per-pair critical radii on the pilot samples, so no search is
    needed: the answer is an order statistic of the pooled radii.
    """
    if target_dbar <= 0:
        raise ParameterError(f"target_dbar must be positive, got {target_dbar}")
    if trials < 1:
        raise ParameterError("calibration needs at least one pilot trial")
    model = MobilityModel(cfg)
    need = int(round(target_dbar * n * trials / 2))
    samples = []
    for t in range(trials):
        key = RngStreamKey(master_seed, t)
        nodes = model.sample_nodes(n, key)
        I, J = colex_pairs(n)
        u = pair_uniforms(key.with_tag(model.xi_tag), n)
        samples.append((nodes.points[I], nodes.points[J], _fading_normals(u, cfg)))
    cap = 0.02
    while True:
        radii = np.concatenate([critical_radius(a, b, cfg, z, cap) for a, b, z in samples])
        radii = np.sort(radii[radii <= cap])
        if len(radii) >= need or cap > 2.0:
            break
        cap *= 2
    if need == 0:
        return 0.0
    return float(radii[min(need, len(radii)) - 1])


def trace_rows(cfg, nodes, trial=0):
    """``(trial, node, t, x, y)`` rows for every node and time sample; nodes are 1-based."""
    traj = trajectories(nodes.points, cfg)
    times = cfg.times()
    rows = []
    for i in range(nodes.n):
        for s, t in enumerate(times):
            rows.append((trial, i + 1, float(t), float(traj[i, s, 0]), float(traj[i, s, 1])))
    return rows


TRACE_COLUMNS = ("trial", "node", "t", "x", "y")


def node_sample(points):
    """Wrap raw phase rows as a node sample (used for traces and tests)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return NodeSample(len(pts), pts, "phase", {})
