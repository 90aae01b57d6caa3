"""Returns without clustering: the successor chain.

Hidden values X_i are i.i.d. Geometric(1/2) and the visible bit says whether
X_{i+1} = X_i + 1.  Staying on the all-ones orbit for one more step costs at
most 2^-(n+1) after n steps, so the extension probability tends to 0 and the
return count converges to a plain Poisson law instead of a Polya-Aeppli one.

Run:  python3 demos/poisson_limit.py   (roughly ten seconds)
"""

from returnstat import dist
from returnstat.experiments import poisson_limit_report
from returnstat.models import SuccessorModel

report = poisson_limit_report(SuccessorModel(), [2, 3, 4], t=1.0, M=10_000, seed=11, beta_n_max=12)

print("Exact extension probabilities against the bound 2^-(n+1)")
for row in report.extras["beta_table"]:
    print(f"  n={row['n']:>2}  beta={row['beta']:.3e}  bound={row['bound']:.3e}  ok={row['within_bound']}")

print("\nCount law against Pois(1)")
pois = dist.poisson(1.0)
for rec in report.records:
    print(f"  n={rec.n}  N={rec.N:>6}  TV={rec.tv:.4f}  mean={rec.mean:.3f}")
print("\nPois(1) pmf head:", [round(float(x), 4) for x in pois.masses[:5]])
