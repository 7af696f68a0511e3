"""Sample mean against median of means on the heavy-atom law.

Prints the 99% quantile of the squared error of both estimators.
"""

import math

from minimaxq.estimators import EstimatorSpec
from minimaxq.montecarlo import run_experiment
from minimaxq.problems import catoni_adversary

n, delta, reps = 100, 0.01, 100_000
prob = catoni_adversary(n, 1.0, delta)
k = math.ceil(8 * math.log(1 / delta))
for spec in (EstimatorSpec("sample_mean"), EstimatorSpec("median_of_means", {"k": k})):
    (res,) = run_experiment(prob, spec, reps=reps, deltas=(delta,), master_seed=19)
    q = res.quantiles[delta]
    print(f"{spec.label():28s} q99 = {q.value:.4g}  band [{q.dkw_lo:.4g}, {q.dkw_hi:.4g}]")
print(f"sample-mean floor 1/(e n delta) = {1 / (math.e * n * delta):.4g}")
print(f"median-of-means ceiling 100 log(1/delta)/n = {100 * math.log(1 / delta) / n:.4g}")
