"""How the crossing probability behaves in various scaling limits.

* Long times at p = 1/2: the lattice value approaches erfc(delta / 2 sqrt(T)).
* Continuous time: the Bessel closed form, the Skellam tail and the
  bidirectional kernel agree, and the bidirectional value depends only on
  the total jump rate.
* Rare jumps: the totally asymmetric walk with p = lambda * eps run for
  t / eps steps approaches Poisson jump counts.
"""

import math

from scipy import stats

from checkerboard import kernels as K

print("lattice vs erfc, delta = T / 50 (Arratia units)")
for T in (100, 400, 1600, 6400):
    d = T // 50
    a = float(K.a_crossing_terminal(T, 0, d, 0.5))
    ref = math.erfc(d / (2 * math.sqrt(T)))
    print(f"  T={T:5d} delta={d:4d}  A={a:.6f}  erfc={ref:.6f}  rel={abs(a - ref) / ref:.2e}")

print("\ncontinuous time, lambda t = 5")
for d in (1, 2, 5, 10):
    print(
        f"  delta={d:2d}  bessel={K.a_crossing_poisson(5.0, 1.0, d):.12f}"
        f"  skellam={K.skellam_crossing(5.0, 1.0, d):.12f}"
        f"  bidirectional(1,3)={K.a_crossing_bidirectional(1.25, 1.0, 3.0, d):.12f}"
    )

print("\nasymmetric walk -> Poisson(1)")
for eps in (1e-2, 1e-3, 1e-4):
    T = round(1 / eps)
    errs = [abs(K.w_asymmetric(T, 0, -k, eps) - stats.poisson.pmf(k, 1.0)) / stats.poisson.pmf(k, 1.0) for k in range(6)]
    print(f"  eps={eps:.0e}  worst relative error over k<=5: {max(errs):.2e}")
