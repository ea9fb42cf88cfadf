"""Three ways to sample PD(alpha) and what they agree on.

The Poisson point process and GEM stick-breaking constructions are exact up
to truncation. Normalized exponentials of ordered Exp(1) samples only reach
PD(1/beta) as the sample size grows.
"""

from rankdiff import rng
from rankdiff.asymptotics import limit_dp, max_weight_moment
from rankdiff.pd import PDConfig, empirical_weight_statistics, sample_ordered_exponentials, sample_pd, top_matrix
from rankdiff.stats import ks_two_sample

alpha = 0.5
cfg = PDConfig(alpha)
ppp = sample_pd(cfg, 2000, rng.child(2, "ppp"), "ppp")
gem = sample_pd(cfg, 2000, rng.child(2, "gem"), "stickbreaking")
oe = sample_ordered_exponentials(1 / alpha, 5000, 2000, rng.child(2, "oe"))

eta = alpha / 2
print(f"limit E V1 = {max_weight_moment(eta, 1):.5f}, limit E D2 = {limit_dp(eta, 2):.5f}")
for name, s in (("ppp", ppp), ("stick-breaking", gem), ("ordered exp", oe)):
    st = empirical_weight_statistics(s, [2.0])
    print(f"{name:>15}: E V1 {top_matrix(s, 1).mean():.5f}  E D2 {st.dp_mean[0]:.5f} +- {st.dp_se[0]:.5f}")

print("KS(ppp V1, stick V1) =", round(ks_two_sample(top_matrix(ppp, 1)[:, 0], top_matrix(gem, 1)[:, 0])[0], 4))
