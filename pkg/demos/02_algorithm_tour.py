"""Run every catalogue algorithm on one random 12-link network.

Lengths are normalized by the column-generation optimum.
"""
import sys

from linkdrain import harness
from linkdrain.cli import check_report
from linkdrain.instance import GeneratorParams, generate

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
inst = generate(GeneratorParams(n=12, seed=seed, demand=("random", 100, 1500)))
opt = harness.run_algorithm(inst, "cg-exact")[0].total
print(f"seed {seed}: 12 links, optimum {opt:.3f} s\n")
print(f"{'algorithm':<14}{'normalized':>12}{'iterations':>12}")
for name in harness.ALGORITHMS:
    sched, it = harness.run_algorithm(inst, name, 0.5)
    print(f"{name:<14}{sched.total / opt:>12.4f}{it:>12d}")

rep = check_report(inst)
print(f"\none-by-one optimal here? {rep['h1_optimal']}")
if rep["condition1"].get("witness_links"):
    print(f"a pair that beats TDMA: links {rep['condition1']['witness_links']}")
