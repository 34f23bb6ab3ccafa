"""Model abstraction: node variables, edge functions, keyed sampling.

Three layers of generality mirror the model classes:

* :class:`ModelSpec` is any random graph model; subclasses only promise
  ``sample_graph``.
* :class:`GeneralModel` samples node variables and evaluates an edge
  function that sees every node plus the pair indices.
* :class:`LocalModel` evaluates an edge function that is handed only the two
  endpoints, the pair's independent uniform and ``n``. Locality therefore
  holds by construction rather than by convention.

Sampling is a pure function of ``(spec, n, key)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .errors import ClassHypothesisError, ParameterError
from .graph import LabeledGraph
from .rng import RngStreamKey, StreamTag, colex_pairs, pair_uniforms


@dataclass(frozen=True)
class Flags:
    local: bool = False
    name_invariant: bool = False
    free: bool = False

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class PhasePoint:
    x0: float
    y0: float
    traj_param: float


@dataclass
class NodeSample:
    """Realized node variables ``X_1..X_n``.

    ``points`` is an array whose first axis indexes nodes. ``kind`` names the
    domain: ``none`` (placeholders), ``real`` (coordinate vectors), ``phase``
    (rows ``x0, y0, traj_param``) or ``matrix`` (object array of matrix
    sequences). ``trace`` records latent draws such as pivots.
    """

    n: int
    points: Any
    kind: str = "real"
    trace: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.points) != self.n:
            raise ParameterError(f"node sample holds {len(self.points)} points, expected {self.n}")

    def point(self, i):
        p = self.points[i - 1]
        if self.kind == "phase":
            return PhasePoint(*map(float, p))
        return p


class ModelSpec:
    """A random graph model, materialized one size ``n`` at a time."""

    family = "abstract"
    flags = Flags()
    geometric = False
    supports_counterparts = False

    def params(self):
        return {}

    def describe(self):
        return {"family": self.family, "params": self.params(), "flags": self.flags.to_dict()}

    @property
    def perm_depth(self):
        return 0

    def validate_n(self, n):
        if int(n) != n or n < 1:
            raise ParameterError(f"n must be a positive integer, got {n}")

    def sample_nodes(self, n, key):
        raise ClassHypothesisError(f"family {self.family!r} has no node variables")

    def sample_graph(self, n, key):
        raise NotImplementedError

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class GeometricModel(ModelSpec):
    geometric = True
    xi_tag = StreamTag.EDGES
    node_kind = "real"

    def draw_nodes(self, n, key):
        """Return ``(points, trace)`` for ``n`` nodes."""
        raise NotImplementedError

    def sample_nodes(self, n, key):
        self.validate_n(n)
        points, trace = self.draw_nodes(n, key.with_tag(StreamTag.NODES))
        return NodeSample(n, points, self.node_kind, trace)

    def edge_mask(self, nodes, key):
        raise NotImplementedError

    def sample_graph(self, n, key):
        nodes = self.sample_nodes(n, key)
        return LabeledGraph.from_mask(n, self.edge_mask(nodes, key))

    def counterparts(self, nodes, count, key):
        """Further node variables continuing the sequence behind ``nodes``."""
        raise ClassHypothesisError(f"family {self.family!r} cannot extend its node sequence")


class LocalModel(GeometricModel):
    """Edge ``(i, j)`` is ``link(X_i, X_j, xi_ij, n)``, vectorized over pairs."""

    def link(self, a, b, u, n):
        raise NotImplementedError

    def edge_mask(self, nodes, key):
        n = nodes.n
        I, J = colex_pairs(n)
        u = pair_uniforms(key.with_tag(self.xi_tag), n)
        pts = nodes.points
        return np.asarray(self.link(pts[I], pts[J], u, n), dtype=bool)


class GeneralModel(GeometricModel):
    """Edge ``(i, j)`` is ``edges(X_1..X_n, i, j, xi_ij, n)``, vectorized over pairs."""

    def edges(self, points, I, J, u, n):
        raise NotImplementedError

    def edge_mask(self, nodes, key):
        n = nodes.n
        I, J = colex_pairs(n)
        u = pair_uniforms(key.with_tag(self.xi_tag), n)
        return np.asarray(self.edges(nodes.points, I, J, u, n), dtype=bool)


def _check_key(key):
    if not isinstance(key, RngStreamKey):
        raise ParameterError(f"expected an RngStreamKey, got {type(key).__name__}")


def sample_nodes(spec, n, key):
    _check_key(key)
    spec.validate_n(n)
    return spec.sample_nodes(n, key)


def sample_graph(spec, n, key):
    _check_key(key)
    spec.validate_n(n)
    return spec.sample_graph(n, key)


def edge_mask(spec, nodes, key):
    """Evaluate a geometric model's edge function on a given node sample."""
    if not spec.geometric:
        raise ClassHypothesisError(f"family {spec.family!r} has no edge function")
    return spec.edge_mask(nodes, key)


def _permutation(key, n, depth):
    return key.with_tag(StreamTag.PERMUTATION, salt=depth).generator().permutation(n)


class _Exchangeable:
    """Mixin: reindex the base model's node variables by a uniform permutation."""

    def _init(self, base):
        self.base = base
        self.family = "exchangeable"
        self.flags = Flags(local=base.flags.local, name_invariant=True, free=False)
        self.xi_tag = getattr(base, "xi_tag", StreamTag.EDGES)
        self.node_kind = getattr(base, "node_kind", "real")
        self.supports_counterparts = base.supports_counterparts and base.flags.name_invariant

    def params(self):
        return {"base": self.base.describe()}

    @property
    def perm_depth(self):
        return self.base.perm_depth + 1

    def validate_n(self, n):
        self.base.validate_n(n)

    def sample_nodes(self, n, key):
        nodes = self.base.sample_nodes(n, key)
        perm = _permutation(key, n, self.perm_depth)
        trace = dict(nodes.trace, permutation=(perm + 1).tolist())
        return NodeSample(n, nodes.points[perm], nodes.kind, trace)

    def counterparts(self, nodes, count, key):
        return self.base.counterparts(nodes, count, key)


class ExchangeableLocal(_Exchangeable, LocalModel):
    def __init__(self, base):
        self._init(base)

    def link(self, a, b, u, n):
        return self.base.link(a, b, u, n)


class ExchangeableGeneral(_Exchangeable, GeneralModel):
    def __init__(self, base):
        self._init(base)

    def edges(self, points, I, J, u, n):
        return self.base.edges(points, I, J, u, n)


class ExchangeableRelabel(ModelSpec):
    """For models without node variables: relabel the sampled graph uniformly."""

    family = "exchangeable"
    flags = Flags(local=False, name_invariant=True, free=False)

    def __init__(self, base):
        self.base = base

    def params(self):
        return {"base": self.base.describe()}

    @property
    def perm_depth(self):
        return self.base.perm_depth + 1

    def validate_n(self, n):
        self.base.validate_n(n)

    def sample_graph(self, n, key):
        g = self.base.sample_graph(n, key)
        return g.relabel(_permutation(key, n, self.perm_depth))


def wrap_exchangeable(spec):
    """Symmetrize a model by a uniformly random reindexing of its nodes."""
    if isinstance(spec, LocalModel):
        return ExchangeableLocal(spec)
    if isinstance(spec, GeneralModel):
        return ExchangeableGeneral(spec)
    return ExchangeableRelabel(spec)
