"""
The Kalton-Peck map and its twisted quasi-norm
==============================================
"""
import math

import numpy as np

from twistlab import (KaltonPeck, Lp, Phi1, SparseVector, TwistedPair, apply, boundedness_gap,
                      norm, quasilinearity_defect, rho_lower, twisted_quasinorm)

kp = KaltonPeck(Lp(2), Phi1())

# on the flat vector of length n the map is (1/2) log n times the identity
for n in (2, 8, 64):
    x = SparseVector.indicator(1, n)
    print(n, apply(kp, x).val[0], 0.5 * math.log(n))

# two unit vectors already show the defect (log 2) / (2 sqrt 2)
e1, e2 = SparseVector.basis(1), SparseVector.basis(2)
print("defect(e1, e2) =", quasilinearity_defect(kp, e1, e2))
print("rho lower bound over 500 random pairs =", rho_lower(kp, n_samples=500, seed=0))

# no linear map stays within a bounded distance: the gap on e_1..e_n grows like (log n)/2
for n in (4, 16, 64, 256):
    fam = [SparseVector.basis(i) for i in range(1, n + 1)]
    print("gap(%d) = %.6f" % (n, boundedness_gap(kp, fam)))

# the twisted quasi-norm ||w - Omega z|| + ||z||
w = SparseVector.from_dense([1.0, 0.0, 2.0])
z = SparseVector.from_dense([0.5, 0.5, 0.0])
print("||(w, 0)|| =", twisted_quasinorm(kp, TwistedPair(w, SparseVector.zero())), "=", norm(Lp(2), w))
print("||(w, z)|| =", twisted_quasinorm(kp, TwistedPair(w, z)), ">=", norm(Lp(2), z))
