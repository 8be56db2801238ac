"""Active causal structure learning with directed clique trees.

The modules build on each other: :mod:`graphs` holds the graph types and
the text format, :mod:`chordal` the clique machinery, :mod:`meek`
orientation propagation, :mod:`dct` directed clique trees, :mod:`mvis`
verifying sets, :mod:`policy` the adaptive policies and :mod:`genbench`
the generators and benchmark harness.
"""
from .chordal import clique_graph, clique_tree, is_chordal, maximal_cliques
from .dct import construct_cdct, directed_clique_graph, directed_clique_tree, residual_essential_graph, residuals
from .graphs import Dag, GraphError, MixedGraph, UndirectedGraph, parse_graph, read_graph, serialize_graph, write_graph
from .meek import OrientationState, apply_intervention, essential_graph, interventional_essential_graph, meek_closure
from .mvis import lower_bound, mvis_dct, mvis_enumeration, verify_vis
from .policy import Oracle, dct_policy, nd_random_policy, random_policy

__all__ = [
    "Dag",
    "GraphError",
    "MixedGraph",
    "Oracle",
    "OrientationState",
    "UndirectedGraph",
    "apply_intervention",
    "clique_graph",
    "clique_tree",
    "construct_cdct",
    "dct_policy",
    "directed_clique_graph",
    "directed_clique_tree",
    "essential_graph",
    "interventional_essential_graph",
    "is_chordal",
    "lower_bound",
    "maximal_cliques",
    "meek_closure",
    "mvis_dct",
    "mvis_enumeration",
    "nd_random_policy",
    "parse_graph",
    "random_policy",
    "read_graph",
    "residual_essential_graph",
    "residuals",
    "serialize_graph",
    "verify_vis",
    "write_graph",
]

__version__ = "0.1.0"
