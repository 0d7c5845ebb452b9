"""Three links, cardinality rates (6, 5, 4), demands 1000/2000/3000.

Serving one link at a time costs 1000 s and draining everything at once
costs more; the optimum pairs the biggest queue with each of the others.
"""
from linkdrain import (check_condition1, check_condition4, schedule_h1, schedule_hn, solve_cg,
                       solve_full_lp)
from linkdrain.instance import cardinality_instance


def show(label, sched, inst):
    print(f"{label:<12} length {sched.total:8.2f}")
    for e in sched.to_json_dict(inst)["entries"]:
        print(f"    links {e['links']}  for {e['duration']:.2f} s")


inst = cardinality_instance([1000, 2000, 3000], [6, 5, 4])
show("one-by-one", schedule_h1(inst), inst)
show("all-at-once", schedule_hn(inst), inst)
show("optimum", solve_full_lp(inst), inst)

c1, c4 = check_condition1(inst), check_condition4(inst)
print(f"\nsingletons certified optimal? {c1.holds} (witness mask {c1.witness:#b})")
print(f"grand group certified optimal? {c4.holds} (fails at size {c4.witness})")

rep = solve_cg(inst)
print(f"\ncolumn generation: {rep.iterations} master solves, {rep.columns_generated} new groups")
for k, obj in enumerate(rep.objectives):
    print(f"    round {k}: master {obj:.2f}")
print(f"certified optimal: {rep.optimal}, final duals {rep.duals.round(5)}")
