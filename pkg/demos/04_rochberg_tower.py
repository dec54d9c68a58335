"""
Rochberg tuples from an analytic witness
========================================

A witness g(z) = ||x|| sgn(x) (|x| / ||x||)^E(z) P(z - theta) exp(gamma (z - theta)^2),
with E affine and E(theta) = 1, lives in the Calderon space of the couple. Its scaled Taylor coefficients at theta form the
Rochberg tuples; projection drops the top coefficients, embedding shifts the
tuple up by multiplying with (z - theta)^k.
"""
import math

import numpy as np

from twistlab import (Couple, Lp, finite_difference_tuple, kernel_derivative_check, rochberg_embed,
                      rochberg_project, taylor_tuple, witness_boundary_norm)
from twistlab.derived import random_witness

c = Couple(Lp(math.inf), Lp(1), 0.5)
g = random_witness(np.random.default_rng(7), c)
print("boundary norm of g:", witness_boundary_norm(g).value)

t = taylor_tuple(g, n=4)
fd = finite_difference_tuple(g, 4)
for k, (u, v) in enumerate(zip(t.coeffs, fd.coeffs)):
    print("coefficient", k, "max |taylor - cauchy| =", float(np.max(np.abs((u - v).val), initial=0)))

p = rochberg_project(t, 2)
print("projection to order 2 equals the order-2 tuple:", p.allclose(taylor_tuple(g, n=2), 0, 0))
e = rochberg_embed(p, 4)
print("embedded tuple lies in the kernel of the projection:", rochberg_project(e, 2).is_zero())

# a witness vanishing at theta: its derivative is controlled by the boundary norm
h = random_witness(np.random.default_rng(7), c, vanish=True)
r = kernel_derivative_check(h)
print("kernel check: lhs %.4f bound %.4f ok %s" % (r.lhs, r.bound, r.ok))
