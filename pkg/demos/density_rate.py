"""Log-log slope of the Lepski estimate's 95% error quantile over n = 2^8 .. 2^14."""

from minimaxq.montecarlo import rate_fit, run_experiment
from minimaxq.problems import density_point

points = []
for k in range(8, 15):
    n = 2**k
    (res,) = run_experiment(density_point(n, 1.0, 1.0, 0.05), reps=400, deltas=(0.05,), master_seed=16, hypotheses=[2])
    q = res.quantiles[0.05].value
    points.append((n, q))
    print(f"n={n:6d}  q95={q:.4g}")
print(f"slope = {rate_fit(points):.3f} (target -2/3)")
