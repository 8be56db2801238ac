"""A guided tour of dctlearn on one generated graph.

Run with ``python3 demos/walkthrough.py [seed]``. Every step prints what it
computed so the output reads top to bottom like a notebook.
"""
import sys

from dctlearn import (
    Oracle,
    construct_cdct,
    dct_policy,
    essential_graph,
    lower_bound,
    mvis_dct,
    nd_random_policy,
    residuals,
    serialize_graph,
)
from dctlearn.genbench import gen_er_moral

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 3

# %% a small connected moral DAG; its essential graph has no directed edges
d = gen_er_moral(10, rho=0.3, seed=seed)
print(serialize_graph(d, [f"er-moral n=10 seed={seed}"]))
e = essential_graph(d)
print("undirected edges in the essential graph:", len(e.undirected_edges), "of", len(d.arcs))

# %% the directed clique tree and its contraction
dct, cdct = construct_cdct(d)
for i, j in dct.edges:
    print(f"  {sorted(dct.cliques[i])} {dct.kind(i, j)} {sorted(dct.cliques[j])}")
print("contracted nodes:", [sorted(vs) for vs in cdct.vertex_sets])

# %% residuals can be oriented independently; the MVIS is a union of per-residual MVISes
for r in residuals(cdct, d):
    print(f"  residual {sorted(r.vertices)} (parent node {r.parent})")
vis = mvis_dct(d)
print("minimum verifying set:", sorted(vis.targets), "size", vis.size)
print("clique lower bound:", lower_bound(e))

# %% learn the graph adaptively and compare with the random baseline
for name, policy in (("dct", dct_policy), ("nd-random", nd_random_policy)):
    o = Oracle(d)
    lg = policy(o, seed)
    print(f"{name:>9}: {lg.total} interventions {lg.targets}, recovered truth: {o.matches_truth()}")
    for c in lg.components:
        print(f"{'':>11}{c['clique_interventions']} clique- and {c['edge_interventions']} edge-interventions, "
              f"{c['phase1_nodes']} + {c['phase2_nodes']} node interventions")
