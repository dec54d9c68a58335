"""
Indicator functions and disjoint singularity at desk scale
==========================================================
"""
import math

from twistlab import (Couple, Lp, PConcavified, Tsirelson, a_indicator, logconvexity_check,
                      m_indicator, singularity_report)

# M_X(n): best norm of a sum of n normalized disjoint vectors
for sp in (Lp(1), Lp(2), Lp(4)):
    print(sp.dumps(), [round(m_indicator(sp, n).lower, 6) for n in (2, 8, 32)])

# Tsirelson: successive blocks after index n behave like l_1 at half weight
for n in (4, 8, 16):
    r = a_indicator(Tsirelson(), n)
    print("A_T(%d) >= %.3f (%s)" % (n, r.lower, r.method))

# on the l_2 midpoint the singularity ratio grows like log n
rep = singularity_report(Couple(Lp(math.inf), Lp(1), 0.5), [8, 32, 128], budget=4)
print(rep.to_csv())
print(rep.meta["verdict"])

# M is log-convex along the scale
c = Couple(Lp(math.inf), PConcavified(Tsirelson(), 2), 0.5)
rep = logconvexity_check(c, [2, 4, 8], [0.5], budget=3)
print(rep.to_csv())
