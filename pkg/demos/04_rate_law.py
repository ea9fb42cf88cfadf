"""How fast mu_1 vanishes when eta >= 1/2.

For eta > 1/2, log mu_1 / log n tends to 1/(2 eta) - 1. At eta = 1/2 the
right scale is log log n and the ratio tends to -1, but slowly.
"""

from rankdiff import verification as V

for eta in (1.0, 2.0):
    r = V.rate_regression(V.DriftModel.gravity(V.constant(eta)), [500, 2000, 5000], 400, seed=4)
    print(f"eta={eta}: target {1 / (2 * eta) - 1:+.3f}, at n=5000 {r.statistics['median_ratio']['estimate']:+.3f}, "
          f"extrapolated {r.statistics['extrapolated_limit']['estimate']:+.3f}")

r = V.rate_regression(V.DriftModel.gravity(V.critical()), [1000, 5000], 400, seed=4)
print(f"critical: log mu1 / log log n at n=5000 = {r.statistics['median_ratio']['estimate']:+.3f} "
      f"(target -1, {r.labels[-1]})")
