"""Correlation functions of the boundary process.

rho(y_1..y_n) is the probability that every listed site holds a boundary.
It can be recovered from gap probabilities by inclusion-exclusion, or read
off in one step as the Pfaffian of a 2n x 2n matrix built from discrete
differences of the crossing kernel.
"""

from fractions import Fraction

from checkerboard.kernels import KernelSpec, tz_kernel
from checkerboard.lattice import WeightField
from checkerboard.montecarlo import estimate_correlation
from checkerboard.pointprocess import SiteSet, correlation_matrix, correlation_mobius, correlation_pfaffian

p = Fraction(1, 2)
T = 8
kernel = KernelSpec.biased(p, T)
field = WeightField.constant(p)

for sites in ((0,), (0, 1), (0, 2), (0, 1, 3)):
    S = SiteSet(T, sites)
    rm = correlation_mobius(kernel, S)
    rp = correlation_pfaffian(kernel, S)
    mc = estimate_correlation(field, S, 200_000, seed=2)
    print(f"sites {sites!s:12s} mobius={float(rm):.8f} pfaffian={float(rp):.8f} equal={rm == rp}  mc={mc.mean:.5f}+-{mc.stderr:.5f}")

print("\n4x4 correlation matrix for sites (0, 2):")
print(correlation_matrix(kernel, SiteSet(T, (0, 2))).to_csv())

print("continuum 2x2 kernel at separation 1:")
print(tz_kernel(0.0, 1.0))
