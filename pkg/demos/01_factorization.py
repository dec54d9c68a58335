"""
Lozanovskii factors on the (l_inf, l_1) scale
=============================================

Every x in the midpoint space splits as |x| = a0^(1/2) a1^(1/2). The best split
realizes the interpolation norm, and log(a1/a0) is the induced centralizer.
"""
import math

import numpy as np

from twistlab import (Couple, KaltonPeck, Lp, Phi1, Scaled, SparseVector, apply, factorize,
                      induced_centralizer, norm)

c = Couple(Lp(math.inf), Lp(1), 0.5)
x = SparseVector.from_dense([0.3, -0.9, 0.5, 0.1])

f = factorize(c, x)
print("a0 =", np.round(f.a0.val, 6))
print("a1 =", np.round(f.a1.val, 6))
print("a0^(1/2) a1^(1/2) =", np.round(np.sqrt(f.a0.val * f.a1.val), 6))

# the objective is the l_2 norm, and the dual weights certify it
print("objective %.15f  l_2 %.15f  ratio %.3g" % (f.objective, norm(Lp(2), x), f.optimality_ratio))

# x log(a1/a0) is twice the Kalton-Peck map with the opposite sign
om = induced_centralizer(c, x)
kp = Scaled(-2, KaltonPeck(Lp(2), Phi1()))
print("Omega =", np.round(om.val, 6))
print("-2 KP =", np.round(apply(kp, x).val, 6))

# moving theta changes the space to l_(1/theta)
for t in (0.25, 0.75):
    print("theta %.2f: %.12f vs l_%g %.12f" % (t, factorize(c.at(t), x).objective, 1 / t, norm(Lp(1 / t), x)))
