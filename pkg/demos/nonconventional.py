"""Simultaneous returns at times k and 2k for a biased coin.

With two return times the relevant cluster exponent is a = kappa * (1 + 2) / r.
For the one-symbol block and P(0) = 0.6 that gives rho = 0.6^3 = 0.216,
so the count of k <= N with both x_k and x_{2k} starting the n-cylinder
0...0 should look like PA(1 - 0.216, 0.216) once n is moderately large.

Run:  python3 demos/nonconventional.py
"""

from returnstat import dist
from returnstat.models import BernoulliModel
from returnstat.returns import cluster_stats, exact_count_distribution, simulate_counts
from returnstat.symbolic import ReturnSetup

coin = BernoulliModel([0.6, 0.4])
setup = ReturnSetup(1.0, (1, 2))

stats = cluster_stats(coin, (0,), 8, setup)
print(f"period={stats.period_r}  kappa={stats.kappa}  a={stats.exponent_a}  rho={stats.rho:.6f}  N={stats.trials_N}")

target = dist.polya_aeppli(*stats.predicted_pa)
counts = simulate_counts(coin, stats.word, setup, 50_000, seed=3)
emp = dist.empirical_distribution(counts)
print(f"TV to PA{tuple(round(x, 3) for x in stats.predicted_pa)} at n=8: {dist.total_variation(emp, target):.4f}")

print("\nFor a short word the law is still far from the limit and can be computed exactly:")
short = exact_count_distribution(coin, (0, 0), ReturnSetup(1.0, (1, 2)))
print("  exact pmf at n=2:", [round(float(m), 4) for m in short.masses])
print(f"  TV to the limit law: {dist.total_variation(short, target):.4f}")
