"""
When is the sparsity pattern recoverable?
=========================================

Consistent recovery needs roughly log d / n small; it becomes impossible once
d* log(d / d*) / n is large.  The regime report gathers the constants of both
sides and flags which conditions hold for a given (d, d*, n).
"""

import json
import math
import warnings

from npvarsel import ModelParams, lower_bound_conditions, regime_constants

params = ModelParams(d=10 ** 6, d_star=3, L=3.0, kappa=1.0, sigma=0.5, L2=1.0, L_inf=2.0)

for n in (2, 50, 10 ** 5, 10 ** 8):
    report = regime_constants(params, n, alpha=0.2)
    print(f"n = {n:>9}: {report.flags}")

report = regime_constants(params, 100)
print()
print(json.dumps({k: v for k, v in report.to_dict().items() if k.startswith("c")}, indent=2))

# a tiny instance of the lower-bound construction: d* = 2, d = 10
lb = lower_bound_conditions(ModelParams(d=10, d_star=2, L=2.0), n=1, alpha=0.2)
print()
print(f"gamma* = {lb.gamma_star}, hyp1 left side = {lb.hyp1_lhs:.4f} (4 log 45 = {4 * math.log(45):.4f})")
print(f"prior amplitude A = {lb.A_value:.4f}, priors in class: {lb.priors_in_class}")

# with L too small there is no admissible gamma*, and the report says so
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    r = regime_constants(ModelParams(d=10, d_star=2), 100)
print()
print(f"L = 1: gamma* = {r.gamma_star} ({caught[0].message})")
