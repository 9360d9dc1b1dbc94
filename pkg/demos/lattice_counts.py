"""
Counting lattice points in a high-dimensional ball
==================================================

Exact counts of integer points in the d*-dimensional ball of squared radius
gamma * d*, compared with their saddle-point approximation.
"""

import math

from npvarsel import asymptotic_counts, count_exact

# small cases can be checked by hand: in the plane, |k|^2 <= 2 holds for the
# origin, the four unit vectors and the four diagonals
c = count_exact(2, 2)
print(f"d* = 2, R = 2: N1 = {c.n1}, N2 = {c.n2}, N = {c.n_diff}")

# counts grow exponentially; Python integers keep them exact
c = count_exact(100, 100)
print(f"d* = 100, R = 100: N1 has {len(str(c.n1))} digits")

# the saddle-point formula tracks log N1; past the smallest cases the gap
# shrinks like 1/d*
print()
print(f"{'d*':>5} {'log N1 exact':>14} {'log N1 asym':>14} {'gap':>9}")
for d_star in (10, 25, 50, 100, 200, 400):
    exact = count_exact(d_star, d_star)
    asym = asymptotic_counts(d_star, 1.0)
    print(f"{d_star:>5} {exact.log_n1:14.6f} {asym.log_n1_asym:14.6f} "
          f"{abs(exact.log_n1 - asym.log_n1_asym):9.2e}")

# the ratio N1 / N2 approaches h(z_1), the theta function at the saddle point
exact = count_exact(400, 400)
print()
print(f"N1/N2 at d* = 400: {exact.n1 / exact.n2:.6f}, h(z_1) = {asym.saddle.h_val:.6f}")
print(f"growth rate l_1(z_1) = {asym.saddle.l_val:.6f} vs log 3 = {math.log(3):.6f}")
