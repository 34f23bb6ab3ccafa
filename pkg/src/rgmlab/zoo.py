"""Concrete model families covering the locality / invariance / freeness taxonomy."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial.distance import cdist

from .core import Flags, GeneralModel, LocalModel, ModelSpec
from .errors import ParameterError
from .graph import LabeledGraph
from .rng import StreamTag, colex_pairs


def _check_probability(name, p):
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ParameterError(f"{name} must lie in [0, 1], got {p}")


class GnpModel(LocalModel):
    family = "gnp"
    flags = Flags(local=True, name_invariant=True, free=True)
    node_kind = "none"
    supports_counterparts = True

    def __init__(self, p):
        p = float(p)
        _check_probability("p", p)
        self.p = p

    def params(self):
        return {"p": self.p}

    def draw_nodes(self, n, key):
        return np.zeros((n, 0)), {}

    def link(self, a, b, u, n):
        # strict comparison keeps p=0 and p=1 exact on a [0, 1) grid
        return u < self.p

    def counterparts(self, nodes, count, key):
        return np.zeros((count, 0))


def make_gnp(p):
    return GnpModel(p)


@dataclass(frozen=True)
class MixtureLaw:
    """Distribution of the mixing variable: ``uniform01``, ``beta`` or ``two-point``."""

    kind: str = "uniform01"
    a: float = 1.0
    b: float = 1.0
    p1: float = 0.0
    p2: float = 1.0
    w: float = 0.5

    def __post_init__(self):
        if self.kind == "beta":
            if not (self.a > 0 and self.b > 0):
                raise ParameterError(f"beta law needs a, b > 0, got a={self.a}, b={self.b}")
        elif self.kind == "two-point":
            _check_probability("p1", self.p1)
            _check_probability("p2", self.p2)
            _check_probability("w", self.w)
        elif self.kind != "uniform01":
            raise ParameterError(f"unknown mixture law {self.kind!r}")

    def sample(self, rng):
        if self.kind == "uniform01":
            return float(rng.random())
        if self.kind == "beta":
            return float(rng.beta(self.a, self.b))
        return self.p1 if rng.random() < self.w else self.p2

    def moment(self, k):
        """``E(eta**k)``."""
        if self.kind == "uniform01":
            return 1.0 / (k + 1)
        if self.kind == "beta":
            m = 1.0
            for r in range(k):
                m *= (self.a + r) / (self.a + self.b + r)
            return m
        return self.w * self.p1**k + (1 - self.w) * self.p2**k

    def expect(self, fn):
        """``E(fn(eta))`` by quadrature or exact summation."""
        if self.kind == "two-point":
            return self.w * fn(self.p1) + (1 - self.w) * fn(self.p2)
        from scipy import integrate, stats

        dist = stats.uniform() if self.kind == "uniform01" else stats.beta(self.a, self.b)
        val, _ = integrate.quad(lambda x: fn(x) * dist.pdf(x), 0.0, 1.0, limit=200)
        return val

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "beta":
            d.update(a=self.a, b=self.b)
        elif self.kind == "two-point":
            d.update(p1=self.p1, p2=self.p2, w=self.w)
        return d


class MixtureModel(LocalModel):
    """Draw ``eta`` once per graph; every edge is present independently w.p. ``eta``."""

    family = "mixture"
    flags = Flags(local=True, name_invariant=True, free=False)
    supports_counterparts = True

    def __init__(self, law):
        if isinstance(law, str):
            law = MixtureLaw(law)
        elif isinstance(law, dict):
            law = MixtureLaw(**law)
        self.law = law

    def params(self):
        return {"law": self.law.to_dict()}

    def draw_nodes(self, n, key):
        eta = self.law.sample(key.generator())
        return np.full((n, 1), eta), {"eta": eta}

    def link(self, a, b, u, n):
        return u < a[:, 0]

    def counterparts(self, nodes, count, key):
        return np.full((count, 1), nodes.trace["eta"])


def make_mixture(law):
    return MixtureModel(law)


def _cap_points(rng, pivot, R, r, count):
    """Uniform points on the geodesic cap of radius ``r`` around ``pivot``."""
    alpha = r / R
    cos_t = rng.uniform(math.cos(alpha), 1.0, size=count)
    phi = rng.uniform(0.0, 2 * math.pi, size=count)
    sin_t = np.sqrt(np.clip(1.0 - cos_t**2, 0.0, None))
    c = pivot / R
    helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(c, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    local = cos_t[:, None] * c + sin_t[:, None] * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    return R * local


def geodesic_distance(a, b, R):
    """Great-circle distance on the sphere of radius ``R`` (chord form, stable for close points)."""
    chord = np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)
    return 2 * R * np.arcsin(np.clip(chord / (2 * R), 0.0, 1.0))


class SphereClusterModel(LocalModel):
    """Nodes uniform on a cap of radius ``r`` around a uniform pivot on the sphere of radius ``R``."""

    family = "sphere_cluster"
    flags = Flags(local=True, name_invariant=True, free=False)
    supports_counterparts = True

    def __init__(self, R=1.0, r=0.1, threshold=0.1):
        R, r, threshold = float(R), float(r), float(threshold)
        if not R > 0:
            raise ParameterError(f"R must be positive, got {R}")
        if not 0 < r <= R:
            raise ParameterError(f"r must lie in (0, R], got {r}")
        if not threshold >= 0:
            raise ParameterError(f"threshold must be non-negative, got {threshold}")
        self.R, self.r, self.threshold = R, r, threshold

    def params(self):
        return {"R": self.R, "r": self.r, "threshold": self.threshold}

    def draw_nodes(self, n, key):
        rng = key.generator()
        v = rng.standard_normal(3)
        pivot = self.R * v / np.linalg.norm(v)
        return _cap_points(rng, pivot, self.R, self.r, n), {"pivot": pivot.tolist()}

    def link(self, a, b, u, n):
        if self.threshold == 0:
            return np.all(a == b, axis=-1)
        return geodesic_distance(a, b, self.R) <= self.threshold

    def counterparts(self, nodes, count, key):
        rng = key.generator()
        return _cap_points(rng, np.asarray(nodes.trace["pivot"]), self.R, self.r, count)


def make_sphere_cluster(R=1.0, r=0.1, threshold=0.1):
    return SphereClusterModel(R, r, threshold)


def knn_adjacency(points, k):
    """Undirected k-NN adjacency: ``i ~ j`` iff either is among the other's ``k`` nearest.

    Ties go to the lower index (stable sort over index order).
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    A = np.zeros((n, n), dtype=bool)
    if n < 2:
        return A
    kk = min(k, n - 1)
    D = cdist(pts, pts)
    np.fill_diagonal(D, np.inf)
    nearest = np.argsort(D, axis=1, kind="stable")[:, :kk]
    rows = np.repeat(np.arange(n), kk)
    A[rows, nearest.ravel()] = True
    return A | A.T


class KnnModel(GeneralModel):
    family = "knn"
    flags = Flags(local=False, name_invariant=True, free=True)

    def __init__(self, k=1):
        if int(k) != k or k < 1:
            raise ParameterError(f"k must be a positive integer, got {k}")
        self.k = int(k)

    def params(self):
        return {"k": self.k}

    def draw_nodes(self, n, key):
        return key.generator().random((n, 2)), {}

    def edges(self, points, I, J, u, n):
        return knn_adjacency(points, self.k)[I, J]


def make_knn(k):
    return KnnModel(k)


@dataclass(frozen=True)
class ExplicitDistribution:
    n: int
    atoms: tuple

    def __post_init__(self):
        atoms = tuple((g, float(p)) for g, p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ParameterError("explicit distribution needs at least one atom")
        if any(g.n != self.n for g, _ in atoms):
            raise ParameterError(f"all atoms must be graphs on n={self.n} vertices")
        if any(p < 0 for _, p in atoms):
            raise ParameterError("atom probabilities must be non-negative")
        total = sum(p for _, p in atoms)
        if abs(total - 1.0) > 1e-12:
            raise ParameterError(f"atom probabilities sum to {total!r}, not 1")
        if len({g.code() for g, _ in atoms}) != len(atoms):
            raise ParameterError("duplicate graphs among atoms")


class ExplicitModel(ModelSpec):
    """A single graph size with an explicitly listed distribution."""

    family = "explicit"
    flags = Flags()

    def __init__(self, dist):
        self.dist = dist
        self._cdf = np.cumsum([p for _, p in dist.atoms])

    def params(self):
        return {
            "n": self.dist.n,
            "atoms": [{"edges": [list(e) for e in g.edges()], "p": p} for g, p in self.dist.atoms],
        }

    def validate_n(self, n):
        super().validate_n(n)
        if n != self.dist.n:
            raise ParameterError(f"explicit model is defined only for n={self.dist.n}, got {n}")

    def sample_graph(self, n, key):
        self.validate_n(n)
        u = key.with_tag(StreamTag.NODES).generator().random()
        idx = min(int(np.searchsorted(self._cdf, u, side="right")), len(self._cdf) - 1)
        return self.dist.atoms[idx][0]


def make_explicit(dist):
    return ExplicitModel(dist)


class Footnote2Model(ModelSpec):
    """Empty with probability ``1/sqrt(n)``, otherwise the path ``1-2-...-n``."""

    family = "footnote2"
    flags = Flags()

    def __init__(self, n=None):
        if n is not None and (int(n) != n or n < 2):
            raise ParameterError(f"footnote2 needs n >= 2, got {n}")
        self.n = None if n is None else int(n)

    def params(self):
        return {} if self.n is None else {"n": self.n}

    def validate_n(self, n):
        super().validate_n(n)
        if n < 2:
            raise ParameterError(f"footnote2 needs n >= 2, got {n}")
        if self.n is not None and n != self.n:
            raise ParameterError(f"footnote2 model is pinned to n={self.n}, got {n}")

    def sample_graph(self, n, key):
        self.validate_n(n)
        u = key.with_tag(StreamTag.NODES).generator().random()
        if u < 1 / math.sqrt(n):
            return LabeledGraph.empty(n)
        return LabeledGraph.path(n)


def make_footnote2(n=None):
    return Footnote2Model(n)


MAXDEG3_LIMIT = 8


def _neighbor_masks(masks, n):
    """Per-vertex neighbor bitmasks for an array of colex edge bitmasks."""
    nb = [np.zeros(len(masks), dtype=np.int64) for _ in range(n)]
    bit = 0
    for j in range(1, n):
        for i in range(j):
            present = (masks >> bit) & 1
            nb[i] |= present << j
            nb[j] |= present << i
            bit += 1
    return nb


def connected_masks(masks, n):
    """Boolean array: which colex edge bitmasks describe connected graphs."""
    masks = np.asarray(masks, dtype=np.int64)
    if n == 1:
        return np.ones(len(masks), dtype=bool)
    nb = _neighbor_masks(masks, n)
    reach = np.ones(len(masks), dtype=np.int64)
    for _ in range(n - 1):
        grown = reach.copy()
        for v in range(n):
            grown |= nb[v] & -((reach >> v) & 1)
        reach = grown
    return reach == (1 << n) - 1


def _subcubic_masks(n):
    """All labeled graphs on ``n`` vertices with max degree <= 3, as colex bitmasks.

    Vertices are added one at a time, each choosing at most three earlier
    neighbours that still have spare degree.
    """
    masks = np.zeros(1, dtype=np.int64)
    degs = np.zeros((1, n), dtype=np.int8)
    for v in range(1, n):
        base = v * (v - 1) // 2
        new_masks, new_degs = [], []
        for r in range(4):
            for nbrs in itertools.combinations(range(v), r):
                ok = np.ones(len(masks), dtype=bool)
                for u in nbrs:
                    ok &= degs[:, u] < 3
                d = degs[ok].copy()
                for u in nbrs:
                    d[:, u] += 1
                d[:, v] = r
                bits = sum(1 << (base + u) for u in nbrs)
                new_masks.append(masks[ok] | bits)
                new_degs.append(d)
        masks = np.concatenate(new_masks)
        degs = np.concatenate(new_degs)
    return masks


@lru_cache(maxsize=None)
def enumerate_connected_maxdeg3(n):
    """Sorted colex bitmasks of all connected labeled graphs on ``n`` vertices with max degree <= 3."""
    if not 2 <= n <= MAXDEG3_LIMIT:
        raise ParameterError(f"enumeration supports 2 <= n <= {MAXDEG3_LIMIT}, got {n}")
    masks = _subcubic_masks(n)
    out = np.sort(masks[connected_masks(masks, n)])
    out.flags.writeable = False
    return out


def graph_from_bitmask(n, mask):
    m = n * (n - 1) // 2
    bits = (int(mask) >> np.arange(m)) & 1
    return LabeledGraph.from_mask(n, bits.astype(bool))


def graph_bitmask(g):
    m = g.mask()
    return int(np.sum(m.astype(np.int64) << np.arange(len(m), dtype=np.int64)))


class ConnectedMaxDeg3Model(ModelSpec):
    """Uniform over connected labeled graphs with maximum degree at most 3."""

    family = "connected_maxdeg3"
    flags = Flags()

    def __init__(self, n):
        if int(n) != n or not 2 <= n <= MAXDEG3_LIMIT:
            raise ParameterError(f"connected_maxdeg3 needs 2 <= n <= {MAXDEG3_LIMIT}, got {n}")
        self.n = int(n)

    def params(self):
        return {"n": self.n}

    def validate_n(self, n):
        super().validate_n(n)
        if n != self.n:
            raise ParameterError(f"connected_maxdeg3 model is defined only for n={self.n}, got {n}")

    def sample_graph(self, n, key):
        self.validate_n(n)
        space = enumerate_connected_maxdeg3(n)
        idx = key.with_tag(StreamTag.NODES).generator().integers(len(space))
        return graph_from_bitmask(n, space[idx])


def make_connected_maxdeg3(n):
    return ConnectedMaxDeg3Model(n)


class RiggedModel(LocalModel):
    """Deterministic node labels ``X_i = i``; pair ``special`` gets its own edge probability.

    Local and free but not name invariant.
    """

    family = "rigged"
    flags = Flags(local=True, name_invariant=False, free=True)

    def __init__(self, p_special=0.9, p_other=0.1, special=(1, 2)):
        _check_probability("p_special", float(p_special))
        _check_probability("p_other", float(p_other))
        a, b = special
        if not 1 <= a < b:
            raise ParameterError(f"special pair must satisfy 1 <= i < j, got {special}")
        self.p_special = float(p_special)
        self.p_other = float(p_other)
        self.special = (int(a), int(b))

    def params(self):
        return {"p_special": self.p_special, "p_other": self.p_other, "special": list(self.special)}

    def draw_nodes(self, n, key):
        return np.arange(1, n + 1, dtype=float)[:, None], {}

    def link(self, a, b, u, n):
        s, t = self.special
        x, y = a[:, 0], b[:, 0]
        hit = ((x == s) & (y == t)) | ((x == t) & (y == s))
        return u < np.where(hit, self.p_special, self.p_other)


def make_rigged(p_special=0.9, p_other=0.1, special=(1, 2)):
    return RiggedModel(p_special, p_other, special)


def all_pairs(n):
    I, J = colex_pairs(n)
    return list(zip((I + 1).tolist(), (J + 1).tolist()))
