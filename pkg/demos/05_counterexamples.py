"""Why both drift conditions are needed.

Pushing from the top makes mu_2/mu_1 and mu_3/mu_2 equal in law, which no
PD law allows. The two-block array keeps the edge gaps at eta = 1/4 yet
mu_1 still decays with n.
"""

from rankdiff import verification as V

print(V.check_drift_conditions(V.DriftModel.top_push(), [100, 1000]).details["edge_condition_holds"],
      "<- top push: edge condition holds?")
print(V.check_drift_conditions(V.DriftModel.two_block(0.25), [256, 4096]).details["max_condition_holds"],
      "<- two-block: max condition holds?")

r = V.counterexample_scenarios(seed=5, replicates=4000, pd_draws=4000, grid_replicates=1000)
for v in r.verdicts:
    print(v)
