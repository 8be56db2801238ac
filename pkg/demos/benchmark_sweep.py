"""Small benchmark sweep: how many interventions each policy needs relative to the optimum.

Run with ``python3 demos/benchmark_sweep.py``; it takes under half a minute.
The CLI equivalent is ``dctlearn bench --n 10 --n 25 --n 50 --trials 20``.
"""
from dctlearn.genbench import run_benchmark

recs, aggs = run_benchmark(["er-moral", "tree-like"], [10, 25, 50], ["dct", "nd-random", "random"], trials=20, seed=0)

print(f"{'family':<10} {'n':>4} {'policy':<10} {'mean ic':>8} {'max ic':>7} {'ms/run':>7}")
for a in aggs:
    print(f"{a['family']:<10} {a['n']:>4} {a['policy']:<10} {a['mean_ic_ratio']:>8.2f} {a['max_ic_ratio']:>7.2f} {a['mean_time_ms']:>7.1f}")

# the policy never beats the optimum, and the clique bound never beats the optimum either
assert all(r.ic_ratio >= 1 and r.mvis_size >= r.lower_bound for r in recs)
