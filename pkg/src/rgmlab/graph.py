"""Labeled simple undirected graphs on vertices ``1..n``."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .rng import colex_pairs, pair_index


class LabeledGraph:
    """Simple undirected graph on ``1..n``.

    Edges are held as a colex-sorted ``(m, 2)`` array of 0-based endpoints
    with ``i < j``; the public accessors speak 1-based labels.
    """

    __slots__ = ("n", "_pairs", "_code", "_deg")

    def __init__(self, n, pairs=None):
        if n < 1:
            raise ParameterError(f"graph needs n >= 1, got {n}")
        self.n = int(n)
        if pairs is None:
            pairs = np.empty((0, 2), dtype=np.int32)
        pairs = np.asarray(pairs, dtype=np.int32).reshape(-1, 2)
        self._pairs = pairs
        self._code = None
        self._deg = None

    @classmethod
    def from_edges(cls, n, edges):
        """Build from 1-based ``(i, j)`` pairs; order and orientation are normalized."""
        seen = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ParameterError(f"loop at vertex {i}")
            if not (1 <= i <= n and 1 <= j <= n):
                raise ParameterError(f"edge ({i}, {j}) outside 1..{n}")
            seen.add((min(i, j) - 1, max(i, j) - 1))
        pairs = sorted(seen, key=lambda p: pair_index(*p))
        return cls(n, np.array(pairs, dtype=np.int32).reshape(-1, 2))

    @classmethod
    def from_mask(cls, n, mask):
        """Build from a boolean vector over all colex pairs."""
        I, J = colex_pairs(n)
        idx = np.flatnonzero(np.asarray(mask, dtype=bool))
        pairs = np.empty((len(idx), 2), dtype=np.int32)
        pairs[:, 0] = I[idx]
        pairs[:, 1] = J[idx]
        return cls(n, pairs)

    @classmethod
    def from_adjacency(cls, adjacency):
        A = np.asarray(adjacency, dtype=bool)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ParameterError("adjacency must be square")
        if A.diagonal().any():
            raise ParameterError("adjacency has loops")
        if (A != A.T).any():
            raise ParameterError("adjacency is not symmetric")
        I, J = colex_pairs(n)
        return cls.from_mask(n, A[I, J])

    @classmethod
    def empty(cls, n):
        return cls(n)

    @classmethod
    def complete(cls, n):
        return cls.from_mask(n, np.ones(n * (n - 1) // 2, dtype=bool))

    @classmethod
    def path(cls, n):
        return cls.from_edges(n, [(i, i + 1) for i in range(1, n)])

    @property
    def pairs(self):
        return self._pairs

    @property
    def edge_count(self):
        return len(self._pairs)

    def edges(self):
        return [(int(i) + 1, int(j) + 1) for i, j in self._pairs]

    def degrees(self):
        if self._deg is None:
            self._deg = np.bincount(self._pairs.ravel(), minlength=self.n)
            self._deg.flags.writeable = False
        return self._deg

    def adjacency(self):
        A = np.zeros((self.n, self.n), dtype=bool)
        A[self._pairs[:, 0], self._pairs[:, 1]] = True
        A[self._pairs[:, 1], self._pairs[:, 0]] = True
        return A

    def mask(self):
        """Boolean vector over colex pairs."""
        m = np.zeros(self.n * (self.n - 1) // 2, dtype=bool)
        m[pair_index(self._pairs[:, 0].astype(np.int64), self._pairs[:, 1].astype(np.int64))] = True
        return m

    def has_edge(self, i, j):
        if i == j:
            return False
        a, b = min(i, j) - 1, max(i, j) - 1
        return bool(self.mask()[pair_index(a, b)])

    def code(self):
        """Hashable labeled canonical form: packed colex adjacency bits."""
        if self._code is None:
            self._code = (self.n, np.packbits(self.mask()).tobytes())
        return self._code

    def relabel(self, perm):
        """Graph with vertex ``v`` renamed ``perm[v]`` (0-based permutation array)."""
        perm = np.asarray(perm)
        a = perm[self._pairs[:, 0]]
        b = perm[self._pairs[:, 1]]
        new = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
        order = np.argsort(pair_index(new[:, 0].astype(np.int64), new[:, 1].astype(np.int64)))
        return LabeledGraph(self.n, new[order])

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self.code() == other.code()

    def __hash__(self):
        return hash(self.code())

    def __repr__(self):
        return f"LabeledGraph(n={self.n}, edges={self.edges()})"
