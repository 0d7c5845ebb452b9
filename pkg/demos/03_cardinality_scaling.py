"""Cardinality rates scale far past brute force.

The dedicated solver handles hundreds of links; plain column generation with
closed-form pricing gets there too, only slower.
"""
import time

import numpy as np

from linkdrain import cardinality_cg, solve_cardinality
from linkdrain.instance import cardinality_instance

rng = np.random.default_rng(0)
print(f"{'N':>5}{'length':>14}{'solver ms':>12}{'cg ms':>10}{'groups':>8}")
for n in (10, 25, 50, 100, 200):
    r = np.minimum.accumulate(10 / np.arange(1, n + 1) ** 0.7 * rng.uniform(0.9, 1.0, n))
    inst = cardinality_instance(rng.uniform(100, 1500, n), r)
    t0 = time.perf_counter()
    s = solve_cardinality(inst)
    t1 = time.perf_counter()
    cg_ms = "-"
    if n <= 100:
        rep = cardinality_cg(inst)
        assert abs(rep.length - s.total) <= 1e-9 * s.total
        cg_ms = f"{(time.perf_counter() - t1) * 1e3:.0f}"
    print(f"{n:>5}{s.total:>14.3f}{(t1 - t0) * 1e3:>12.1f}{cg_ms:>10}{len(s):>8}")
