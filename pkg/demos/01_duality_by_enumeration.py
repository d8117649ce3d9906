"""Three events, one probability.

On a small window of the checkerboard we enumerate every West/South
assignment and weigh it exactly.  For each interval spec we count

* configurations with no forward boundary inside the intervals,
* configurations where each pair of backward lineages (a_i, b_i) meets,
* configurations where every cluster of coalesced lineages is even.

The three rationals come out identical, spec by spec.
"""

from fractions import Fraction

from checkerboard.exact import choice_bits, enumerate_event_probabilities
from checkerboard.forests import EVENTS, IntervalSpec
from checkerboard.lattice import WeightField

H = Fraction(1, 2)

field = WeightField.constant(Fraction(1, 3))
T = 3
specs = [
    IntervalSpec(T, (H, 3 * H)),
    IntervalSpec(T, (H, 7 * H)),
    IntervalSpec(T, (H, 3 * H, 3 * H, 5 * H)),
    IntervalSpec(T, (H, 3 * H, 7 * H, 9 * H)),
]

print(f"constant field p = 1/3, observation diagonal T = {T}")
vals = enumerate_event_probabilities(field, specs)
for i, spec in enumerate(specs):
    endpoints = " ".join(str(x) for x in spec.endpoints)
    row = [vals[(i, ev)] for ev in EVENTS]
    print(f"  ({endpoints}) over {2 ** choice_bits(spec)} configurations:")
    for ev, v in zip(EVENTS, row):
        print(f"    {ev:22s} {str(v):>14s}  = {float(v):.6f}")
    assert len(set(row)) == 1
