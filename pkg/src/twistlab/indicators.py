"""Indicator functions and the inequality reports built on them.

M_X(n): sup of ||x_1 + ... + x_n|| over disjoint x_j in the unit ball.
A_X(n): the same over successive families n < x_1 < ... < x_n.
lambda_X(n): ||e_1 + ... + e_n||.

Suprema are only ever reported as lower bounds found by a deterministic
family search, plus closed forms where they are known.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InputError, SizeError
from .factorization import CalderonSpace, Couple, induced_centralizer, interpolation_norm, factorize
from .spaces import (Lp, Orlicz, PConcavified, PConvexified, SpaceSpec, Tsirelson,
                     WeightedLp, norm)
from .sparse import SparseVector, disjoint, total


# closed forms --------------------------------------------------------------

def closed_form_m(space: SpaceSpec, n: int) -> float | None:
    """Known values of M_X(n) (equal to A_X(n) for these spaces)."""
    if isinstance(space, (Lp, WeightedLp)):
        return 1.0 if math.isinf(space.p) else n ** (1.0 / space.p)
    if isinstance(space, Orlicz) and space.f.name == "power":
        return n ** (1.0 / space.f.params["p"])
    if isinstance(space, PConvexified):
        b = closed_form_m(space.base, n)
        return None if b is None else b ** (1.0 / space.p)
    if isinstance(space, PConcavified):
        b = closed_form_m(space.base, n)
        return None if b is None else b ** space.p
    return None


_DENSE_MAX = 10 ** 6


def lambda_indicator(space: SpaceSpec, n: int) -> float:
    """||e_1 + ... + e_n||; past 10^6 coordinates only flat closed forms are used."""
    if n < 1:
        raise InputError("n must be >= 1")
    if n <= _DENSE_MAX:
        return norm(space, SparseVector.indicator(1, n))
    if isinstance(space, Lp):
        return 1.0 if math.isinf(space.p) else float(n) ** (1.0 / space.p)
    if isinstance(space, Orlicz):
        # n phi(1/r) = 1
        return float(1.0 / space.f.inverse(np.array([1.0 / n]))[0])
    raise SizeError(f"no flat closed form for {space.kind} beyond {_DENSE_MAX} coordinates")


# family search -------------------------------------------------------------

def _capacity(space: SpaceSpec) -> float:
    """Largest admissible index (finite for weighted atoms)."""
    if isinstance(space, WeightedLp):
        return len(space.weights)
    if isinstance(space, (PConvexified, PConcavified)):
        return _capacity(space.base)
    if isinstance(space, CalderonSpace):
        return min(_capacity(space.couple.x0), _capacity(space.couple.x1))
    return math.inf


def _support_cap(space: SpaceSpec) -> float:
    if isinstance(space, Tsirelson):
        return space.cap
    if isinstance(space, (PConvexified, PConcavified)):
        return _support_cap(space.base)
    if isinstance(space, CalderonSpace):
        return min(_support_cap(space.couple.x0), _support_cap(space.couple.x1))
    return math.inf


def candidate_families(n: int, start: int = 1, budget: int = 16, seed: int = 0,
                       max_len: int = 4) -> Iterator[list]:
    """Deterministic stream of disjoint successive families of n vectors.

    Order: singletons, equal contiguous blocks of length 2..max_len, spread
    singletons, then seeded random block lengths and positive profiles.
    """
    count = 0

    def blocks(lengths, gap=0, profiles=None):
        out, pos = [], start
        for k, L in enumerate(lengths):
            vals = np.ones(L) if profiles is None else profiles[k]
            out.append(SparseVector(np.arange(pos, pos + L), vals))
            pos += L + gap
        return out

    plans = [("blocks", [1] * n, 0)]
    plans += [("blocks", [L] * n, 0) for L in range(2, max_len + 1)]
    plans += [("blocks", [1] * n, n - 1)]
    for _, lengths, gap in plans:
        if count >= budget:
            return
        count += 1
        yield blocks(lengths, gap)
    rng = np.random.default_rng(seed)
    while count < budget:
        count += 1
        lengths = rng.integers(1, max_len + 1, size=n)
        profiles = [rng.uniform(0.05, 1.0, size=L) for L in lengths]
        yield blocks(lengths, 0, profiles)


def _family_value(space, fam) -> float:
    normed = [v / norm(space, v) for v in fam]
    return norm(space, total(normed))


@dataclass
class IndicatorValue:
    n: int
    lower: float
    closed_form: float | None
    method: str
    families: int = 0


def _search(space, n, start, budget, seed, max_len=4) -> tuple[float, int]:
    best, tried = 0.0, 0
    cap_i, cap_s = _capacity(space), _support_cap(space)
    for fam in candidate_families(n, start, budget, seed, max_len):
        top = int(fam[-1].idx.max())
        size = sum(v.nnz for v in fam)
        if top > cap_i or size > cap_s:
            continue
        try:
            val = _family_value(space, fam)
        except SizeError:
            continue
        tried += 1
        if val > best:
            best = val
    return best, tried


def m_indicator(space: SpaceSpec, n: int, budget: int = 16, seed: int = 0) -> IndicatorValue:
    """Lower bound of M_X(n) over disjoint normalized families."""
    if n < 1:
        raise InputError("n must be >= 1")
    cf = closed_form_m(space, n)
    lower, tried = _search(space, n, 1, budget, seed)
    if tried == 0:
        raise SizeError(f"no admissible family of {n} vectors fits this space")
    return IndicatorValue(n, lower, cf, "closed_form" if cf is not None else "optimized", tried)


def a_indicator(space: SpaceSpec, n: int, budget: int = 16, seed: int = 0) -> IndicatorValue:
    """Lower bound of A_X(n) over successive families after index n."""
    if n < 1:
        raise InputError("n must be >= 1")
    cf = closed_form_m(space, n)
    lower, tried = _search(space, n, n + 1, budget, seed)
    if tried == 0:
        raise SizeError(f"no admissible successive family of {n} vectors fits this space")
    return IndicatorValue(n, lower, cf, "closed_form" if cf is not None else "optimized", tried)


def brute_force_m(space: SpaceSpec, n: int, dim: int, grid: Sequence[float] = (0.25, 0.5, 1.0)):
    """Exhaustive M_X(n) lower bound: every way to split 1..dim into n
    nonempty disjoint supports, coefficient grid on each support."""
    import itertools
    best = 0.0
    labels = range(n + 1)  # label 0 = unused coordinate
    for assign in itertools.product(labels, repeat=dim):
        if any(k not in assign for k in range(1, n + 1)):
            continue
        groups = [[i + 1 for i in range(dim) if assign[i] == k] for k in range(1, n + 1)]
        for coeffs in itertools.product(grid, repeat=dim):
            fam = [SparseVector(g, [coeffs[i - 1] for i in g]) for g in groups]
            best = max(best, _family_value(space, fam))
    return best


# reports -------------------------------------------------------------------

@dataclass
class Report:
    title: str
    rows: list
    meta: dict = field(default_factory=dict)
    columns: tuple = ("n", "value", "bound", "margin", "method")

    @property
    def ok(self) -> bool:
        return all(r.get("ok", True) for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"title": self.title, "meta": self.meta, "rows": self.rows, "ok": self.ok}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, default=_fmt)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating, np.integer)):
        return repr(v.item())
    return "" if v is None else v


def _endpoint_m(space, n, budget, seed):
    """(estimate, certified) of M_X(n): the closed form when known."""
    cf = closed_form_m(space, n)
    if cf is not None:
        return cf, True
    return m_indicator(space, n, budget, seed).lower, False


def logconvexity_check(c: Couple, n_range: Iterable[int], theta_grid: Iterable[float],
                       budget: int = 6, seed: int = 0, tol: float = 1e-6) -> Report:
    """M_{X_theta}(n) <= M_0(n)^(1-theta) M_1(n)^theta on the explored families.

    The left side is the best family value in X_theta. On the right each
    M_j(n) is the largest of its closed form, its family lower bound, and
    ||sum_i a_j(x_i)||_j over the normalized factors of the tested families
    (the quantity the proof bounds by M_j). Endpoints without a closed form
    make the row advisory.
    """
    rows = []
    slack = 10 * tol
    for theta in theta_grid:
        ct = c.at(theta)
        X = CalderonSpace(ct)
        for n in n_range:
            m0, cert0 = _endpoint_m(c.x0, n, budget, seed)
            m1, cert1 = _endpoint_m(c.x1, n, budget, seed)
            lhs = 0.0
            f0 = f1 = 0.0
            for fam in candidate_families(n, 1, budget, seed):
                if sum(v.nnz for v in fam) > _support_cap(X):
                    continue
                normed = [v / interpolation_norm(ct, v, tol) for v in fam]
                s = total(normed)
                lhs = max(lhs, interpolation_norm(ct, s, tol))
                # normalized factors of each member
                a0s, a1s = [], []
                for v in normed:
                    fz = factorize(ct, v, tol)
                    a0s.append(fz.a0 / norm(ct.x0, fz.a0))
                    a1s.append(fz.a1 / norm(ct.x1, fz.a1))
                f0 = max(f0, norm(ct.x0, total(a0s)))
                f1 = max(f1, norm(ct.x1, total(a1s)))
            M0, M1 = max(m0, f0), max(m1, f1)
            bound = M0 ** (1 - theta) * M1 ** theta
            margin = bound - lhs
            rows.append({"theta": theta, "n": n, "value": lhs, "bound": bound,
                         "margin": margin, "method": "closed_form" if cert0 and cert1 else "advisory",
                         "ok": bool(margin >= -slack * max(1.0, bound))})
    return Report("logconvexity", rows, {"couple": c.to_json(), "budget": budget, "seed": seed,
                                         "tol": tol, "slack": slack},
                  columns=("theta", "n", "value", "bound", "margin", "method"))


@dataclass
class CoreResult:
    lhs: float
    bound: float
    margin: float
    ok: bool
    advisory: bool


def core_estimate_residual(c: Couple, family: Sequence[SparseVector], tol: float = 1e-6,
                           budget: int = 6) -> CoreResult:
    """lhs = ||Omega(sum x_i) - sum Omega(x_i) - log(M_0(n)/M_1(n)) sum x_i||_theta
    against bound = 3 M_0(n)^(1-theta) M_1(n)^theta / dist(theta, boundary)."""
    fam = list(family)
    if not fam or any(v.is_zero for v in fam) or not disjoint(fam):
        raise InputError("the tuple must consist of nonzero disjoint vectors")
    n = len(fam)
    for v in fam:
        if interpolation_norm(c, v, tol) > 1 + 10 * tol:
            raise InputError("tuple members must lie in the unit ball of X_theta")
    m0, cert0 = _endpoint_m(c.x0, n, budget, 0)
    m1, cert1 = _endpoint_m(c.x1, n, budget, 0)
    s = total(fam)
    r = induced_centralizer(c, s, tol) - total(induced_centralizer(c, v, tol) for v in fam)
    r = r - s * math.log(m0 / m1)
    lhs = interpolation_norm(c, r, tol) if not r.is_zero else 0.0
    t = c.theta
    bound = 3 * m0 ** (1 - t) * m1 ** t / c.strip_distance
    slack = 10 * tol * max(1.0, bound)
    margin = bound - lhs
    return CoreResult(lhs, bound, margin, bool(margin >= -slack), not (cert0 and cert1))


def canonical_tuple(n: int) -> list:
    return [SparseVector.basis(i) for i in range(1, n + 1)]


def random_disjoint_tuple(rng, c: Couple, n: int, max_len: int = 3, tol: float = 1e-6,
                          complex_: bool = False) -> list:
    """n successive random blocks normalized in X_theta."""
    out, pos = [], 1
    for _ in range(n):
        L = int(rng.integers(1, max_len + 1))
        v = rng.normal(size=L)
        if complex_:
            v = v + 1j * rng.normal(size=L)
        if not np.any(v):
            v[0] = 1.0
        x = SparseVector(np.arange(pos, pos + L), v)
        out.append(x / interpolation_norm(c, x, tol))
        pos += L
    return out


def singularity_report(c: Couple, n_range: Iterable[int], budget: int = 6,
                       seed: int = 0, tol: float = 1e-6) -> Report:
    """ratio(n) = |log(M_0/M_1)| M_W(n) / (M_0^(1-theta) M_1^theta) on explored families.

    M_W(n) is the best family value in X_theta. A ratio that increases along
    n on every family is reported as consistent with disjoint singularity,
    never as a proof.
    """
    rows = []
    t = c.theta
    X = CalderonSpace(c)
    for n in n_range:
        m0, _ = _endpoint_m(c.x0, n, budget, seed)
        m1, _ = _endpoint_m(c.x1, n, budget, seed)
        mw = 0.0
        for fam in candidate_families(n, 1, budget, seed):
            if sum(v.nnz for v in fam) > _support_cap(X):
                continue
            normed = [v / interpolation_norm(c, v, tol) for v in fam]
            mw = max(mw, interpolation_norm(c, total(normed), tol))
        lr = abs(math.log(m0 / m1))
        ratio = lr * mw / (m0 ** (1 - t) * m1 ** t)
        rows.append({"n": n, "value": ratio, "bound": math.log(n) if n > 1 else 0.0,
                     "margin": None, "method": "optimized", "log_ratio": lr, "m_w": mw})
    vals = [r["value"] for r in rows]
    if all(r["log_ratio"] < 1e-9 for r in rows):
        verdict = "criterion inconclusive (M0 ~ M1)"
    elif len(vals) > 1 and all(b > a for a, b in zip(vals, vals[1:])):
        verdict = "consistent with disjoint singularity"
    else:
        verdict = "no divergence observed"
    return Report("singularity", rows, {"couple": c.to_json(), "verdict": verdict,
                                        "budget": budget, "seed": seed})


def nonequivalence_ratio_test(X: SpaceSpec, Y: SpaceSpec, N_values=(10 ** 6, 10 ** 12, 10 ** 24, 10 ** 48),
                              n_grid: int = 120) -> dict:
    """Is f_X(n) = n lambda_X(n)^-2 equivalent to a power of f_Y(n)?

    S(N) = min over mu of the oscillation of log f_X - mu log f_Y on [8, N].
    A power equivalence keeps S bounded; S increasing with N is reported as
    divergence. The growth is logarithmic in log N, so the windows are spaced
    geometrically in log N (equal ratios in N hit transient plateaus).
    """
    out = []
    for N in N_values:
        ns = [int(v) for v in np.unique(np.geomspace(8.0, float(N), n_grid).round())]
        fx = np.array([math.log(n) - 2 * math.log(lambda_indicator(X, int(n))) for n in ns])
        fy = np.array([math.log(n) - 2 * math.log(lambda_indicator(Y, int(n))) for n in ns])

        def osc(mu):
            h = fx - mu * fy
            return float(h.max() - h.min())

        res = minimize_scalar(osc, bounds=(-20.0, 20.0), method="bounded",
                              options={"xatol": 1e-10})
        out.append({"N": int(N), "S": float(res.fun), "mu": float(res.x)})
    S = [r["S"] for r in out]
    # growth must beat both a relative and an absolute floor (quadrature noise)
    diverges = all(b > a * 1.05 and b - a > 1e-3 for a, b in zip(S, S[1:]))
    return {"rows": out, "diverges": bool(diverges)}
