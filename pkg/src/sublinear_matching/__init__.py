"""Sublinear-time maximum matching size estimation behind query-counted graph oracles."""

from .edcs import EdcsParams, EdcsState, build_edcs, edcs_epoch, enumerate_underfull, is_underfull
from .estimators import (BeyondConfig, EstimateReport, TwoThirdsConfig, estimate_beyond_two_thirds,
                         estimate_mu1, estimate_two_thirds)
from .exact import (MatchingView, greedy_maximal_matching, hopcroft_karp, konig_cover, rgmm_global,
                    verify_vertex_cover)
from .graph import Graph, GraphFormatError, OracleSession, load_edge_list, load_graph
from .instances import (GenerationError, LowerBoundInstance, gen_gnm, gen_lower_bound, gen_random_bipartite,
                        sample_near_regular_bipartite, shuffle_adjacency)
from .local import (LcaConfig, LcaOracle, VirtualGraphOracle, estimate_degree_gprime, is_vertex_in_A,
                    lca_matched, rgmm_local_matched)

__version__ = "0.1.0"
