"""Slow reference implementations used to audit the library."""

from functools import lru_cache
from itertools import combinations

import numpy as np

from twistlab import SparseVector, norm, norm_batch


def tsirelson_brute(x: SparseVector) -> float:
    """Figiel-Johnson norm by exhaustive recursion over admissible families.

    Families are k <= min E_1 successive sets; since the norm is a lattice norm
    we may take the sets to be consecutive runs of the support that cover
    everything from the first chosen position onward.
    """
    items = tuple(sorted(zip(x.idx.tolist(), np.abs(x.val).tolist())))

    @lru_cache(maxsize=None)
    def T(part):
        if not part:
            return 0.0
        best = max(v for _, v in part)
        m = len(part)
        for a in range(m):
            tail = part[a:]
            kmax = min(part[a][0], len(tail))
            for k in range(2, kmax + 1):
                for cuts in combinations(range(1, len(tail)), k - 1):
                    bounds = (0,) + cuts + (len(tail),)
                    s = sum(T(tail[bounds[j]:bounds[j + 1]]) for j in range(k))
                    best = max(best, 0.5 * s)
        return best

    return T(items)


def grid_factorization(c, x: SparseVector, width=12.0, n_grid=41, rounds=6):
    """Minimize ||a0||^(1-t) ||a1||^t over the log-domain exponent by grid refinement.

    The objective is invariant under adding a constant to s, so s_1 = 0 is
    fixed and only the remaining coordinates are searched.
    """
    t = c.theta
    idx = x.idx
    lm = np.log(np.abs(x.val))
    n = lm.size

    def values(S):
        A0 = np.exp(lm + t * S)
        A1 = np.exp(lm - (1 - t) * S)
        return norm_batch(c.x0, idx, A0) ** (1 - t) * norm_batch(c.x1, idx, A1) ** t

    if n == 1:
        return float(values(np.zeros((1, 1)))[0])
    centre = np.zeros(n - 1)
    half = width
    best = float(values(np.zeros((1, n)))[0])
    for _ in range(rounds):
        axes = [np.linspace(cc - half, cc + half, n_grid) for cc in centre]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        S = np.hstack([np.zeros((len(pts), 1)), pts])
        v = values(S)
        k = int(np.argmin(v))
        if v[k] < best:
            best, centre = float(v[k]), pts[k]
        half *= 8.0 / (n_grid - 1)
    return best
