"""The three regimes of the largest market weight.

Gravity with eta = 1/4 gives a Poisson-Dirichlet PD(1/2) limit, gravity
with eta = 1 spreads the market so thin that mu_1 -> 0, and the Atlas model
with a constant push makes one company take almost everything.
"""

from rankdiff import verification as V

cases = [
    (V.DriftModel.gravity(V.constant(0.25)), [250, 1000], "pd-limit"),
    (V.DriftModel.gravity(V.constant(1.0)), [250, 1000], "collapse"),
    (V.DriftModel.atlas(V.constant(1.0)), [250, 1000], "dominance"),
]
for model, grid, expected in cases:
    r = V.phase_sweep(model, grid, 1000, seed=3, expected=expected, pd_draws=2000)
    meds = ", ".join(f"{row['median_mu1']:.3f}" for row in r.details["trajectory"])
    print(f"{model.label:<24} median mu1 along n: {meds}  -> {r.outcome}")
