"""Name-based registry: build any shipped model from a plain mapping.

A model mapping names its ``family`` and passes the remaining keys as
parameters. Wrapper families take the wrapped model under ``base``::

    {"family": "theorem1", "n_max": 8, "base": {"family": "gnp", "p": 0.5}}
"""

from __future__ import annotations

from . import zoo
from .core import wrap_exchangeable
from .errors import ParameterError, UnknownFamilyError
from .graph import LabeledGraph
from .mobility import build_mobility_model
from .representation import encode_theorem1, encode_theorem2


def _explicit(n, atoms):
    parsed = []
    for atom in atoms:
        if not isinstance(atom, dict) or set(atom) != {"edges", "p"}:
            raise ParameterError(f"explicit atom must have exactly 'edges' and 'p', got {atom!r}")
        parsed.append((LabeledGraph.from_edges(n, [tuple(e) for e in atom["edges"]]), atom["p"]))
    return zoo.make_explicit(zoo.ExplicitDistribution(n, tuple(parsed)))


def _mixture(law="uniform01", **kw):
    if isinstance(law, str):
        law = dict(kind=law, **kw)
    elif kw:
        raise ParameterError(f"unexpected mixture parameters {sorted(kw)}")
    return zoo.make_mixture(law)


def _rigged(p_special=0.9, p_other=0.1, special=(1, 2)):
    return zoo.make_rigged(p_special, p_other, tuple(special))


def _mobility(**cfg):
    return build_mobility_model(cfg)


_LEAVES = {
    "gnp": (zoo.make_gnp, "independent edges with probability p (local, invariant, free)"),
    "mixture": (_mixture, "edges i.i.d. given a random eta; law uniform01 | beta | two-point"),
    "sphere_cluster": (zoo.make_sphere_cluster, "points on a spherical cap around a random pivot"),
    "knn": (zoo.make_knn, "k-nearest-neighbour graph on uniform points (not local)"),
    "explicit": (_explicit, "finite distribution over listed graphs at one n"),
    "footnote2": (zoo.make_footnote2, "empty w.p. 1/sqrt(n), else the path"),
    "connected_maxdeg3": (zoo.make_connected_maxdeg3, "uniform over connected graphs with max degree 3"),
    "rigged": (_rigged, "pair (1,2) gets its own edge probability (not invariant)"),
    "mobility": (_mobility, "clustered mobile nodes with contact-duration links"),
}

_WRAPPERS = {
    "exchangeable": "uniformly random reindexing of a base model",
    "theorem1": "local encoding of a base model (needs n_max)",
    "theorem2": "name-invariant encoding of a base model (needs n_max)",
}


def family_names():
    return sorted(_LEAVES) + sorted(_WRAPPERS)


def describe_families():
    rows = [(name, desc) for name, (_, desc) in _LEAVES.items()]
    rows += list(_WRAPPERS.items())
    return sorted(rows)


def build_model(spec):
    """Construct a model from a mapping such as ``{"family": "gnp", "p": 0.1}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ParameterError(f"model must be a mapping with a 'family' key, got {spec!r}")
    params = {k: v for k, v in spec.items() if k != "family"}
    family = spec["family"]
    if family in _WRAPPERS:
        if "base" not in params:
            raise ParameterError(f"family {family!r} needs a 'base' model")
        base = build_model(params.pop("base"))
        if family == "exchangeable":
            if params:
                raise ParameterError(f"unexpected parameters for exchangeable: {sorted(params)}")
            return wrap_exchangeable(base)
        n_max = params.pop("n_max", None)
        if n_max is None or params:
            raise ParameterError(f"family {family!r} takes exactly 'base' and 'n_max'")
        encode = encode_theorem1 if family == "theorem1" else encode_theorem2
        return encode(base, n_max)
    if family not in _LEAVES:
        raise UnknownFamilyError(f"unknown family {family!r}; known: {', '.join(family_names())}")
    make = _LEAVES[family][0]
    try:
        return make(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {family!r}: {exc}") from None
