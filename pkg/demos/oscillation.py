"""A source where the cluster parameter has no limit.

The symbols are sums of N = 2 consecutive i.i.d. draws from a finite group.
Around the orbit of the sum s = h + r of the two most likely elements, the
conditional probability of extending the cylinder by one more symbol
alternates between two values depending on n mod N.  On Z/2 with
p = (0.7, 0.3) the alternation is exact from the start; on Z/3 it settles
geometrically.

Run:  python3 demos/oscillation.py
"""

from returnstat.experiments import oscillation_report
from returnstat.models import GroupConvolutionModel

for moduli, probs, n_max in [([2], [0.7, 0.3], 10), ([3], [0.5, 0.3, 0.2], 40)]:
    model = GroupConvolutionModel(moduli, probs, 2)
    report = oscillation_report(model, n_max)
    lo, hi = report.extras["limits"]
    print(f"Z/{moduli[0]} p={probs}: partial limits {lo:.6f} and {hi:.6f}")
    for row in report.extras["conditionals"]:
        if row["n"] <= 6 or row["n"] > n_max - 2:
            print(f"  n={row['n']:>2}  conditional={row['conditional']:.12f}  ({row['class']}, off by {row['deviation']:.1e})")
    print()

flat = oscillation_report(GroupConvolutionModel([2], [0.5, 0.5], 2), 4)
print("Uniform weights make the two limits coincide; degenerate =", flat.extras["degenerate"])
