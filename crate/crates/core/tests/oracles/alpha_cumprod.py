"""High-precision reference for the scaled-linear cumulative alpha products.

Prints alpha_bar at a few timesteps for a 1000-step schedule with betas
linspace(sqrt(0.00085), sqrt(0.012), 1000) ** 2, at 60 significant digits.
"""
from mpmath import mp, mpf, sqrt

mp.dps = 60
N = 1000
lo, hi = sqrt(mpf("0.00085")), sqrt(mpf("0.012"))
acc = mpf(1)
checkpoints = {0, 1, 249, 499, 749, 999}
for i in range(N):
    s = lo + (hi - lo) * i / (N - 1)
    acc *= 1 - s * s
    if i in checkpoints:
        print(i, mp.nstr(acc, 25))
