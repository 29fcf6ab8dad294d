"""Spectral points, probabilistic refinements and typical-subset minima of confusability graphs."""

from .exceptions import (
    AEPError,
    InputError,
    SizeCapExceeded,
    SolverError,
)
from .frate import (
    FRateBracket,
    SubsetCertificate,
    aep_scan,
    block_inequality_check,
    frate_lower_sequence,
    frate_upper_sequence,
    markov_aep_bracket,
    min_subset,
)
from .graphs import (
    Graph,
    VertexWord,
    complement,
    complete_graph,
    costrong_product,
    cycle_graph,
    disjoint_union,
    edgeless_graph,
    induced_subgraph,
    is_cohomomorphism,
    load_graph,
    save_graph,
    strong_power,
    strong_product,
)
from .markov import MarkovSource, build_chain, entropy_rate, iid_source, load_chain, string_probability
from .pullback import Observation, hmm_frate_crosscheck, load_observation, pullback
from .refinement import graph_entropy_refinement, refinement_on_product, typegraph_estimate
from .spectral import SpectralPointId, alpha, evaluate, frac_clique_cover, lovasz_theta
from .transport import continuity_check, hamming_distance, ornstein_distance

__version__ = "0.1.0"
