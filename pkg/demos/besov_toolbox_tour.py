"""Tour of the frequency-analysis toolbox on the periodic grid.

Walks a Lipschitz-but-not-smooth test function through the dyadic
decomposition, reads off its regularity from the Besov block decay, compares
Hoelder and Besov readings, mollifies it, and applies the fractional
Laplacian -- the instruments every other module measures with.
"""

import numpy as np

from levyavg import (
    PeriodicGrid,
    besov_norm,
    frac_laplacian,
    gaussian_mollifier,
    holder_norm,
    littlewood_paley,
    mollify,
)
from levyavg.experiments import sawtooth

grid = PeriodicGrid(1024)
f = sawtooth(grid)  # triangle wave: C^1 nowhere, Lipschitz everywhere

print("dyadic blocks of the triangle wave (sup per block):")
decomp = littlewood_paley(f, grid)
for j in decomp.js():
    sup = np.max(np.abs(decomp.block(j)))
    bar = "#" * max(1, int(40 * sup / np.max(np.abs(f))))
    print(f"  j = {j:>2}: {sup:10.3e}  {bar}")
print(f"reconstruction error: {np.max(np.abs(decomp.reconstruct() - f)):.2e}\n")

print("Besov norms 2^(js) sup_j: block decay ~ 2^-j puts the function in B^1")
for s in (0.5, 0.9, 1.0, 1.1):
    print(f"  ||f||_B^{s:<4} = {besov_norm(decomp, s).value:8.4f}")
print()

print("Hoelder readings (sup + difference quotient over the torus metric):")
for beta in (0.3, 0.7, 1.0):
    print(f"  ||f||_C^{beta:<4} = {holder_norm(f, grid, beta):8.4f}")
print()

print("mollification f_n = f * rho_n sharpens toward f as n grows:")
for n in (2, 8, 32, 128):
    fn = mollify(f, gaussian_mollifier(grid, n))
    print(f"  n = {n:>3}: ||f_n - f||_inf = {np.max(np.abs(fn - f)):.4e}")
print()

print("fractional Laplacian acts as the symbol |k|^alpha per mode:")
g = np.cos(2 * grid.axis())
for alpha in (0.5, 1.0, 1.5):
    out = frac_laplacian(g, grid, alpha)
    print(f"  alpha = {alpha}: amplitude of (-Lap)^(a/2) cos(2x) = {np.max(out):.4f} "
          f"(= 2^{alpha} = {2**alpha:.4f})")
