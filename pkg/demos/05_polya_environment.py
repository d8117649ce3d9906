"""A random environment: edge probability u / (u + v).

The weights change from vertex to vertex, so there is no closed-form walk
kernel.  The crossing probabilities are computed by an exact dynamic
program over two backward particles in the given environment, and the
Pfaffian built from them still matches brute-force enumeration.
"""

from fractions import Fraction

from checkerboard.exact import enumerate_event_probabilities
from checkerboard.forests import IntervalSpec
from checkerboard.kernels import KernelSpec
from checkerboard.lattice import WeightField
from checkerboard.pfaffian import empty_interval_probability

H = Fraction(1, 2)
field = WeightField.polya()
entrance = 10  # the weights are defined only for u, v > 0

for h in (1, 2, 3):
    T = entrance + h
    kernel = KernelSpec.inhomogeneous(field, T, h)
    for endpoints in ((9 * H, 11 * H), (9 * H, 13 * H), (9 * H, 11 * H, 11 * H, 13 * H)):
        spec = IntervalSpec(T, endpoints, entrance)
        pf = empty_interval_probability(kernel, spec)
        ref = enumerate_event_probabilities(field, [spec], ["empty_interval"])[(0, "empty_interval")]
        print(f"h={h} endpoints={' '.join(map(str, endpoints)):16s} pfaffian={str(pf):>22s} enumeration equal: {pf == ref}")
