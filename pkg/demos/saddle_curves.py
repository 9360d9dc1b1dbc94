"""
The saddle point of the lattice-count generating function
=========================================================

For each gamma the saddle point z_gamma solves z h'(z) / h(z) = gamma, with
h the Jacobi theta series.  The table below is the data behind the usual
plots of gamma -> z_gamma and gamma -> l_gamma(z_gamma); pipe the output of
``npvarsel curve`` into any plotting tool for the picture.
"""

import numpy as np

from npvarsel import figure_curves, solve_saddle, theta_h

# theta series at a few points; h(z) > 1 + 2z always
for z in (0.1, 0.5, 0.9):
    print(f"h({z}) = {theta_h(z):.12f}")

# both curves are increasing in gamma
grid = np.geomspace(0.05, 20, 12)
print()
print(f"{'gamma':>9} {'z_gamma':>10} {'l_gamma(z)':>11} {'l_pp':>10}")
for gamma, z, l_val in figure_curves(grid):
    sp = solve_saddle(gamma)
    print(f"{gamma:9.4f} {z:10.6f} {l_val:11.6f} {sp.l_pp:10.4f}")
