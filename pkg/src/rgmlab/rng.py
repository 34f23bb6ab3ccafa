"""Counter-based keyed random streams.

Every random quantity in the package is a pure function of an
:class:`RngStreamKey`. A key names a (master seed, trial, purpose) triple and
is turned into a Philox key; the Philox counter then addresses individual
draws, so the uniform attached to an unordered vertex pair can be read in
isolation or as part of a bulk prefix and the two always agree.

Pairs are laid out in colexicographic order, ``(0,1), (0,2), (1,2), (0,3), ...``
(0-based), so the layout of the first ``C(n, 2)`` pairs does not depend on
``n``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ParameterError

_MASK64 = (1 << 64) - 1


class StreamTag(enum.IntEnum):
    NODES = 1
    EDGES = 2
    DISTANCE_NOISE = 3
    # reserved streams for composite models and probes
    PERMUTATION = 4
    COUNTERPART_NODES = 5
    COUNTERPART_EDGES = 6
    PROBE = 7


@dataclass(frozen=True)
class RngStreamKey:
    """Address of one random stream.

    ``salt`` separates streams that share a tag, e.g. nested wrappers that
    each need their own permutation.
    """

    master_seed: int
    trial_index: int = 0
    stream_tag: StreamTag = StreamTag.NODES
    salt: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.trial_index < 0:
            raise ParameterError(f"trial_index must be >= 0, got {self.trial_index}")
        if self.salt < 0:
            raise ParameterError(f"salt must be >= 0, got {self.salt}")
        object.__setattr__(self, "stream_tag", StreamTag(self.stream_tag))

    def with_tag(self, tag, salt=None):
        return replace(self, stream_tag=StreamTag(tag), salt=self.salt if salt is None else salt)

    def philox_key(self):
        return _philox_key(self.master_seed, self.trial_index, int(self.stream_tag), self.salt)

    def generator(self):
        """Sequential generator over this stream, starting at counter 0."""
        return np.random.Generator(np.random.Philox(key=self.philox_key()))


@lru_cache(maxsize=4096)
def _philox_key(master_seed, trial_index, tag, salt):
    seq = np.random.SeedSequence([master_seed, trial_index, tag, salt])
    return seq.generate_state(2, np.uint64)


def trial_key(master_seed, trial_index):
    return RngStreamKey(master_seed, trial_index)


def pair_index(i, j):
    """Colex position of the 0-based pair ``i < j``."""
    return j * (j - 1) // 2 + i


@lru_cache(maxsize=32)
def colex_pairs(n):
    """0-based endpoint arrays ``(I, J)`` with ``I < J`` for all pairs on ``n`` vertices."""
    J, I = np.tril_indices(n, -1)
    I = I.astype(np.int32)
    J = J.astype(np.int32)
    I.flags.writeable = False
    J.flags.writeable = False
    return I, J


def stream_uniforms(key, count, start=0):
    """Draws ``start .. start+count-1`` of the stream named by ``key``."""
    if count == 0:
        return np.empty(0)
    block, offset = divmod(start, 4)
    bg = np.random.Philox(key=key.philox_key(), counter=[block, 0, 0, 0])
    return np.random.Generator(bg).random(count + offset)[offset:]


def pair_uniforms(key, n):
    """Uniforms for every pair on ``n`` vertices, in colex order."""
    return stream_uniforms(key, n * (n - 1) // 2)


def uniform01(key, pair):
    """The uniform attached to the 1-based vertex pair ``(i, j)``, ``i < j``."""
    i, j = pair
    if not (1 <= i < j):
        raise ParameterError(f"pair must satisfy 1 <= i < j, got {pair}")
    return float(stream_uniforms(key, 1, pair_index(i - 1, j - 1))[0])


def derive_seed(master_seed, *words):
    """A new 64-bit master seed, a pure function of ``master_seed`` and ``words``."""
    seq = np.random.SeedSequence([master_seed, *words])
    return int(seq.generate_state(1, np.uint64)[0])
