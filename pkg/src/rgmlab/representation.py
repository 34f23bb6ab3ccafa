"""Compilers from arbitrary models into local or name-invariant form, plus an equivalence tester.

Both encoders are *realization coupled*: for a trial key, the encoded model
reproduces the base model's graph drawn under the same key, edge for edge.
That is stronger than equality in distribution and can be checked per
sample.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .core import Flags, GeneralModel, LocalModel
from .errors import ParameterError
from .rng import RngStreamKey, derive_seed
from .stattools import two_sample_chi2

N_MAX_LIMIT = 256
ISOMORPHISM_LIMIT = 8


def encode_index(i, width):
    """Little-endian bits of ``i``, zero padded (or truncated) to ``width``."""
    return np.array([(i >> b) & 1 for b in range(width)], dtype=np.uint8)


def decode_index(bits):
    return int(sum(int(v) << b for b, v in enumerate(bits)))


class _Realizations:
    """Base-model adjacency matrices for each size, drawn lazily under one key."""

    __slots__ = ("base", "key", "n_max", "_adj")

    def __init__(self, base, key, n_max):
        self.base, self.key, self.n_max = base, key, n_max
        self._adj = {}

    def adjacency(self, m):
        if not 1 <= m <= self.n_max:
            raise ParameterError(f"size {m} outside the materialized range 1..{self.n_max}")
        if m not in self._adj:
            if m == 1:
                A = np.zeros((1, 1), dtype=np.uint8)
            else:
                try:
                    A = self.base.sample_graph(m, self.key).adjacency().astype(np.uint8)
                except ParameterError:
                    # base undefined at this size; the slot is never read
                    A = np.zeros((m, m), dtype=np.uint8)
            A.flags.writeable = False
            self._adj[m] = A
        return self._adj[m]


class MatrixSequence:
    """Node variable ``(Z^(1), ..., Z^(n_max))``.

    With ``index`` set, ``Z^(m)`` is ``(m+1) x m``: the base adjacency with the
    index's binary code appended as a last row. Without it, ``Z^(m)`` is the
    bare ``m x m`` adjacency.
    """

    __slots__ = ("_src", "index", "_cache")

    def __init__(self, src, index=None):
        self._src = src
        self.index = index
        self._cache = {}

    @property
    def n_max(self):
        return self._src.n_max

    def matrix(self, m):
        Z = self._cache.get(m)
        if Z is None:
            A = self._src.adjacency(m)
            Z = A if self.index is None else np.vstack([A, encode_index(self.index, m)])
            self._cache[m] = Z
        return Z

    def matrices(self):
        return [self.matrix(m) for m in range(1, self.n_max + 1)]

    def __eq__(self, other):
        if not isinstance(other, MatrixSequence):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.matrices(), other.matrices()))

    __hash__ = None


def _check_n_max(n_max):
    if int(n_max) != n_max or n_max < 2:
        raise ParameterError(f"n_max must be an integer >= 2, got {n_max}")
    if n_max > N_MAX_LIMIT:
        raise ParameterError(f"n_max={n_max} exceeds the memory guard of {N_MAX_LIMIT}")


class _Encoded:
    node_kind = "matrix"

    def _init(self, base, n_max):
        _check_n_max(n_max)
        self.base = base
        self.n_max = int(n_max)

    def params(self):
        return {"base": self.base.describe(), "n_max": self.n_max}

    @property
    def perm_depth(self):
        return self.base.perm_depth

    def validate_n(self, n):
        super().validate_n(n)
        if n > self.n_max:
            raise ParameterError(f"encoded model materializes sizes up to {self.n_max}, got n={n}")
        self.base.validate_n(n)


class Theorem1Model(_Encoded, LocalModel):
    """Local form: each node carries the base adjacency plus its own index in binary."""

    family = "theorem1"
    flags = Flags(local=True, name_invariant=False, free=False)

    def __init__(self, base, n_max):
        self._init(base, n_max)

    def draw_nodes(self, n, key):
        src = _Realizations(self.base, key, self.n_max)
        pts = np.empty(n, dtype=object)
        for i in range(n):
            pts[i] = MatrixSequence(src, index=i + 1)
        return pts, {}

    def link(self, a, b, u, n):
        out = np.empty(len(a), dtype=bool)
        for k, (xa, xb) in enumerate(zip(a, b)):
            Zi = xa.matrix(n)
            i = decode_index(Zi[n])
            j = decode_index(xb.matrix(n)[n])
            out[k] = Zi[i - 1, j - 1]
        return out


class Theorem2Model(_Encoded, GeneralModel):
    """Name-invariant form: every node carries the same sequence of base adjacency matrices."""

    family = "theorem2"
    flags = Flags(local=False, name_invariant=True, free=False)

    def __init__(self, base, n_max):
        self._init(base, n_max)

    def draw_nodes(self, n, key):
        shared = MatrixSequence(_Realizations(self.base, key, self.n_max))
        pts = np.empty(n, dtype=object)
        pts[:] = [shared] * n
        return pts, {}

    def edges(self, points, I, J, u, n):
        Z = points[0].matrix(n)
        return Z[I, J].astype(bool)


def encode_theorem1(base, n_max):
    return Theorem1Model(base, n_max)


def encode_theorem2(base, n_max):
    return Theorem2Model(base, n_max)


# canonical forms -----------------------------------------------------------


@lru_cache(maxsize=None)
def _permuted_pair_table(n):
    """``table[s, p]``: colex index of pair ``p`` after applying permutation ``s``."""
    I, J = np.tril_indices(n, -1)[1], np.tril_indices(n, -1)[0]
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    a, b = perms[:, I], perms[:, J]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    return hi * (hi - 1) // 2 + lo


def isomorphism_code(g):
    """Minimum colex bitmask over all vertex relabelings (brute force, ``n <= 8``)."""
    if g.n > ISOMORPHISM_LIMIT:
        raise ParameterError(f"isomorphism mode supports n <= {ISOMORPHISM_LIMIT}, got {g.n}")
    if g.n == 1 or g.edge_count == 0:
        return (g.n, 0)
    table = _permuted_pair_table(g.n)
    present = np.flatnonzero(g.mask())
    codes = np.bitwise_or.reduce(np.left_shift(np.int64(1), table[:, present]), axis=1)
    return (g.n, int(codes.min()))


BINNINGS = {
    "labeled": lambda g: g.code(),
    "isomorphism": isomorphism_code,
    "degree_sequence": lambda g: tuple(sorted(g.degrees().tolist())),
    "edge_count": lambda g: g.edge_count,
}


@dataclass
class EquivalenceReport:
    n: int
    trials: int
    alpha: float
    mode: str
    binning: str
    bins: list
    statistic: float
    dof: int
    p_value: float
    verdict: str
    levels_tried: list

    @property
    def equivalent(self):
        return self.verdict == "equivalent"

    def to_dict(self):
        return asdict(self)


def verify_equivalence(a, b, n, trials, alpha=0.01, master_seed=0, mode="labeled", fallback=True):
    """Two-sample chi-square comparison of the graph laws of ``a`` and ``b`` at size ``n``.

    The two models are sampled under independent seeds. Outcomes are binned by
    ``mode``; when that table is too sparse and ``fallback`` is set, coarser
    invariants (sorted degree sequence, then edge count) are tried in turn.
    The report names the binning actually used.
    """
    if mode not in ("labeled", "isomorphism"):
        raise ParameterError(f"mode must be 'labeled' or 'isomorphism', got {mode!r}")
    if mode == "isomorphism" and n > ISOMORPHISM_LIMIT:
        raise ParameterError(f"isomorphism mode supports n <= {ISOMORPHISM_LIMIT}, got {n}")
    if trials < 1000:
        raise ParameterError(f"verify_equivalence needs trials >= 1000, got {trials}")
    seed_a = derive_seed(master_seed, 0xA)
    seed_b = derive_seed(master_seed, 0xB)
    ga = [a.sample_graph(n, RngStreamKey(seed_a, t)) for t in range(trials)]
    gb = [b.sample_graph(n, RngStreamKey(seed_b, t)) for t in range(trials)]

    levels = [mode] + (["degree_sequence", "edge_count"] if fallback else [])
    tried = []
    res = None
    for level in levels:
        fn = BINNINGS[level]
        res = two_sample_chi2([fn(g) for g in ga], [fn(g) for g in gb])
        tried.append(level)
        if res.adequate:
            break
    if not res.adequate:
        verdict = "inconclusive"
    else:
        verdict = "equivalent" if res.p_value > alpha else "not equivalent"
    return EquivalenceReport(
        n=n,
        trials=trials,
        alpha=alpha,
        mode=mode,
        binning=tried[-1],
        bins=res.bins,
        statistic=res.statistic,
        dof=res.dof,
        p_value=res.p_value,
        verdict=verdict,
        levels_tried=tried,
    )


def coupled_pair(encoded, n, key):
    """``(base graph, encoded graph)`` under the same key."""
    return encoded.base.sample_graph(n, key), encoded.sample_graph(n, key)
