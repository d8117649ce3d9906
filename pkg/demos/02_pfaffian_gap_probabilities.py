"""Empty-interval probabilities three ways.

The Pfaffian of the matrix of pairwise crossing probabilities gives the
probability that several intervals are simultaneously empty.  We compare it
with the exact law of the coalescing backward lineages and with a seeded
Monte Carlo run of the forward boundaries.
"""

from fractions import Fraction

from checkerboard.exact import lineage_event_probability
from checkerboard.forests import IntervalSpec
from checkerboard.kernels import KernelSpec
from checkerboard.lattice import WeightField
from checkerboard.montecarlo import estimate_event
from checkerboard.pfaffian import assemble_empty_interval_matrix, empty_interval_probability

H = Fraction(1, 2)
p = Fraction(1, 2)
T = 6
field = WeightField.constant(p)
kernel = KernelSpec.biased(p, T)

spec = IntervalSpec(T, (H, 5 * H, 5 * H, 9 * H, 13 * H, 15 * H))
print("intervals:", spec.intervals)
print("matrix of crossing probabilities:")
print(assemble_empty_interval_matrix(kernel, spec).to_csv())

pf = empty_interval_probability(kernel, spec)
exact = lineage_event_probability(field, spec)
mc = estimate_event(field, spec, "empty_interval", 200_000, seed=1)
print(f"pfaffian      {pf} = {float(pf):.8f}")
print(f"lineage DP    {exact}")
print(f"monte carlo   {mc.mean:.5f} +- {mc.stderr:.5f}  (z = {(mc.mean - float(pf)) / mc.stderr:+.2f})")
