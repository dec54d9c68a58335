"""
An Orlicz couple between l_2 and its twisted Hilbert space
==========================================================

phi_0^-1(t) phi_1^-1(t) = t, so the midpoint of (l_phi0, l_phi1) is l_2 up to
equivalence. The induced centralizer is close to 2x log(phi_1^-1(x^2)/x), but
not equal: the Luxemburg norms do not multiply isometrically.
"""
import numpy as np

from twistlab import (Couple, Interpolated, Lp, Orlicz, OrliczHilbert, SparseVector, apply,
                      exp_alpha, interpolation_norm, lambda_indicator, nonequivalence_ratio_test,
                      norm, twist_r)

f0, f1 = twist_r(0.5, 0), twist_r(0.5, 1)
t = np.geomspace(1e-9, 1, 5)
print("phi0^-1 phi1^-1 / t =", f0.inverse(t) * f1.inverse(t) / t)

c = Couple(Orlicz(f0), Orlicz(f1), 0.5)
x = SparseVector.from_dense([0.6, 0.48, 0.64])
print("interpolation norm %.6f vs l_2 %.6f" % (interpolation_norm(c, x), norm(Lp(2), x)))
print("induced  =", np.round(apply(Interpolated(c), x).val, 5))
print("formula  =", np.round(apply(OrliczHilbert(f1), x).val, 5))

# the split a0 = phi0^-1(x^2), a1 = phi1^-1(x^2) is feasible; Young's inequality
# ab <= (phi0(a) + phi1(b)) / 2 would make it optimal, and it fails by a few percent
a = np.geomspace(1e-4, 1, 400)[:, None]
b = np.geomspace(1e-4, 1, 400)[None, :]
print("max ab / ((phi0(a) + phi1(b)) / 2) =", float(np.max(a * b / (0.5 * (f0(a) + f1(b))))))

# the Orlicz spaces M_alpha have fundamental function (log n)^(1/alpha)
for alpha in (0.5, 1.0, 2.0):
    sp = Orlicz(exp_alpha(alpha))
    print(alpha, [round(float(lambda_indicator(sp, n) / np.log(n) ** (1 / alpha)), 6) for n in (10, 10 ** 3, 10 ** 6)])
r = nonequivalence_ratio_test(Orlicz(exp_alpha(1.0)), Orlicz(exp_alpha(0.5)))
print("oscillation by window:", [round(row["S"], 3) for row in r["rows"]], "diverges:", r["diverges"])
