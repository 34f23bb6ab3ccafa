"""Random graph models: sampling, class flags, encodings and Monte Carlo checks."""

from .analysis import analyze, average_degree, is_beta_connected, is_connected
from .core import Flags, ModelSpec, NodeSample, PhasePoint, sample_graph, sample_nodes, wrap_exchangeable
from .errors import ClassHypothesisError, ConfigError, ModelError, ParameterError, UnknownFamilyError
from .families import build_model, family_names
from .graph import LabeledGraph
from .mobility import MobilityConfig, build_mobility_model
from .representation import encode_theorem1, encode_theorem2, verify_equivalence
from .rng import RngStreamKey, StreamTag
from .stats import (
    definetti_eta_estimate,
    edge_joint_probability,
    estimate,
    exchangeability_test,
    ide_check,
    isolated_lower_bound,
    pos_check,
    tradeoff_sweep,
    verify_isolation_bound,
)
from .stattools import Estimate
from .zoo import (
    make_connected_maxdeg3,
    make_explicit,
    make_footnote2,
    make_gnp,
    make_knn,
    make_mixture,
    make_rigged,
    make_sphere_cluster,
)

__version__ = "0.1.0"
