"""Lozanovskii factorizations |x| = a0^(1-theta) a1^theta for a couple (X0, X1).

The exponents are parametrized in the log domain,

    a0 = |x| exp(theta s),   a1 = |x| exp(-(1-theta) s),

and the balanced objective G(s) = (1-theta) log||a0||_0 + theta log||a1||_1 is
minimized. G is convex and invariant under s -> s + c, so the exact scalar
shift c = log||a1|| - log||a0|| balances the pair without changing G.

Optimality is certified by duality: if w0, w1 are log-gradient weights of
a0, a1 (see :mod:`twistlab.spaces`) then

    ||x||_theta >= ||a0||^(1-theta) ||a1||^theta * s0^(1-theta) s1^theta * sum w0^(1-theta) w1^theta,

by Hoelder. The reported ``optimality_ratio`` is upper bound / lower bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError, InputError
from .spaces import Lp, SpaceSpec, WeightedLp, space_from_json
from .sparse import SparseVector


@dataclass(frozen=True)
class Couple:
    x0: SpaceSpec
    x1: SpaceSpec
    theta: float

    def __post_init__(self):
        t = float(self.theta)
        if not 0 < t < 1:
            raise ConfigurationError(f"theta must lie in (0,1), got {t}")
        if not isinstance(self.x0, SpaceSpec) or not isinstance(self.x1, SpaceSpec):
            raise ConfigurationError("couple endpoints must be SpaceSpecs")
        object.__setattr__(self, "theta", t)

    @property
    def strip_distance(self) -> float:
        return min(self.theta, 1 - self.theta)

    def at(self, theta: float) -> "Couple":
        return Couple(self.x0, self.x1, theta)

    def to_json(self) -> dict:
        return {"x0": self.x0.to_json(), "x1": self.x1.to_json(), "theta": self.theta}


def couple_from_json(obj) -> Couple:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad couple JSON: {exc}") from None
    try:
        return Couple(space_from_json(obj["x0"]), space_from_json(obj["x1"]), obj["theta"])
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"couple JSON needs x0, x1, theta ({exc})") from None


@dataclass(frozen=True)
class Factorization:
    a0: SparseVector
    a1: SparseVector
    theta: float
    objective: float
    optimality_ratio: float
    certified: bool
    lower_bound: float
    iterations: int = 0

    def to_json(self) -> dict:
        return {
            "a0": self.a0.to_json(dense=False),
            "a1": self.a1.to_json(dense=False),
            "theta": self.theta,
            "objective": self.objective,
            "optimality_ratio": self.optimality_ratio,
            "lower_bound": self.lower_bound,
            "certified": self.certified,
        }


def _is_sup(space) -> bool:
    return isinstance(space, (Lp, WeightedLp)) and math.isinf(space.p)


def _pair_weights(c: Couple, idx, a0, a1):
    """Endpoint weights of a pair; a sup-norm side spreads its mass like the other side."""
    if _is_sup(c.x0) and not _is_sup(c.x1):
        r1 = c.x1._weights(idx, a1)
        return c.x0._weights(idx, a0, target=r1[1]), r1
    r0 = c.x0._weights(idx, a0)
    return r0, c.x1._weights(idx, a1, target=r0[1])


class _Problem:
    """Objective, gradient and certificate on a fixed support."""

    def __init__(self, c: Couple, idx, mod):
        self.c, self.idx, self.mod = c, idx, mod
        self.lm = np.log(mod)

    def pair(self, s):
        t = self.c.theta
        return np.exp(self.lm + t * s), np.exp(self.lm - (1 - t) * s)

    def value_grad(self, s):
        t = self.c.theta
        a0, a1 = self.pair(s)
        N0, w0, _ = self.c.x0._weights(self.idx, a0)
        N1, w1, _ = self.c.x1._weights(self.idx, a1)
        G = (1 - t) * math.log(N0) + t * math.log(N1)
        return G, t * (1 - t) * (w0 - w1)

    def certificate(self, s):
        """(upper, lower) bounds of ||x||_theta from the pair at s."""
        t = self.c.theta
        a0, a1 = self.pair(s)
        (N0, w0, k0), (N1, w1, k1) = _pair_weights(self.c, self.idx, a0, a1)
        ub = N0 ** (1 - t) * N1 ** t
        overlap = float(np.sum(w0 ** (1 - t) * w1 ** t))
        slack = k0 ** (1 - t) * k1 ** t
        lb = ub * overlap * slack if math.isfinite(slack) else 0.0
        return ub, min(lb, ub)

    def epigraph(self, s):
        """Minimize G with each sup-norm term log max(a_j) replaced by a variable u_j >= log a_j."""
        t, lm, n = self.c.theta, self.lm, self.lm.size
        sup0, sup1 = _is_sup(self.c.x0), _is_sup(self.c.x1)
        # x = (s, u0, u1); unused u's are pinned to 0 by a zero objective weight
        def split(v):
            return v[:n], v[n], v[n + 1]

        def fun(v):
            s_, u0, u1 = split(v)
            a0, a1 = self.pair(s_)
            g = np.zeros(n + 2)
            if sup0:
                val = (1 - t) * u0
                g[n] = 1 - t
            else:
                N0, w0, _ = self.c.x0._weights(self.idx, a0)
                val = (1 - t) * math.log(N0)
                g[:n] += t * (1 - t) * w0
            if sup1:
                val += t * u1
                g[n + 1] = t
            else:
                N1, w1, _ = self.c.x1._weights(self.idx, a1)
                val += t * math.log(N1)
                g[:n] -= t * (1 - t) * w1
            return val, g

        A, lo = [], []
        if sup0:  # u0 - t s_i >= lm_i
            A.append(np.hstack([-t * np.eye(n), np.ones((n, 1)), np.zeros((n, 1))]))
            lo.append(lm)
        if sup1:  # u1 + (1-t) s_i >= lm_i
            A.append(np.hstack([(1 - t) * np.eye(n), np.zeros((n, 1)), np.ones((n, 1))]))
            lo.append(lm)
        A, lo = np.vstack(A), np.concatenate(lo)
        v0 = np.concatenate([s, [np.max(lm + t * s), np.max(lm - (1 - t) * s)]])
        cons = {"type": "ineq", "fun": lambda v: A @ v - lo, "jac": lambda v: A}
        res = minimize(fun, v0, jac=True, method="SLSQP", constraints=[cons],
                       options={"maxiter": 500, "ftol": 1e-15})
        return split(res.x)[0], int(res.nit)

    def saturated(self):
        """Exact exponents for a sup-norm endpoint: a0 = 1 (resp. a1 = 1)."""
        t = self.c.theta
        if _is_sup(self.c.x0):
            # a0 = 1, a1 = |x|^(1/theta):  s = -lm / theta
            return -self.lm / t
        if _is_sup(self.c.x1):
            # a1 = 1, a0 = |x|^(1/(1-theta)):  s = lm / (1-theta)
            return self.lm / (1 - t)
        return None


def _solve(c: Couple, idx, mod, tol, max_iter, saturate):
    pb = _Problem(c, idx, mod)
    n = mod.size
    candidates = []

    def consider(s, iters):
        ub, lb = pb.certificate(s)
        candidates.append((ub, lb, s.copy(), iters))
        return ub, lb

    if saturate:
        s_sat = pb.saturated()
        if s_sat is not None:
            ub, lb = consider(s_sat, 0)
            if ub <= (1 + tol) * lb:
                return candidates[-1]

    s = np.zeros(n)
    ub, lb = consider(s, 0)
    if ub > (1 + tol) * lb and n > 1:
        if _is_sup(c.x0) or _is_sup(c.x1):
            s, iters = pb.epigraph(s)
        else:
            res = minimize(pb.value_grad, s, jac=True, method="L-BFGS-B",
                           bounds=[(-700.0, 700.0)] * n,
                           options={"maxiter": max_iter, "gtol": 1e-14, "ftol": 1e-16})
            s, iters = res.x, int(res.nit)
        ub, lb = consider(s, iters)
        best_lb = max(cd[1] for cd in candidates)
        # target-level Polyak steps (Goffin-Kiwiel): aim at f_best - delta and
        # halve delta whenever a bounded path brings no sufficient descent
        f_best, s_best = math.log(ub), s.copy()
        gap = f_best - math.log(best_lb) if best_lb > 0 else 1.0
        delta, path = max(gap, 1e-3), 0.0
        budget = None  # allowed path length, about 20 steps at the current level
        while ub > (1 + tol) * best_lb and iters < max_iter and delta > 1e-15:
            G, g = pb.value_grad(s)
            gg = float(g @ g)
            if gg == 0:
                break
            if G < f_best:
                if G <= f_best - 0.5 * delta:
                    path = 0.0
                f_best, s_best = G, s.copy()
            if budget is None:
                budget = 20 * delta / math.sqrt(gg)
            if path > budget:
                delta *= 0.5
                budget *= 0.5
                path = 0.0
                s = s_best.copy()
                G, g = pb.value_grad(s)
                gg = float(g @ g)
            step = (G - f_best + delta) / gg
            s = s - step * g
            s -= s.mean()
            path += step * math.sqrt(gg)
            iters += 1
            if iters % 25 == 0:
                _, l_ = consider(s_best, iters)
                best_lb = max(best_lb, l_)
                ub = min(cd[0] for cd in candidates)
        consider(s_best, iters)
    best_lb = max(cd[1] for cd in candidates)
    # rounding-level ties go to the earliest candidate (the saturated one first)
    top = min(cd[0] for cd in candidates)
    ub, lb, s, iters = next(cd for cd in candidates if cd[0] <= top * (1 + 1e-12))
    return ub, max(best_lb, 0.0), s, iters


@lru_cache(maxsize=4096)
def _cached(c, idx_b, mod_b, tol, max_iter, saturate):
    idx = np.frombuffer(idx_b, dtype=np.int64)
    mod = np.frombuffer(mod_b, dtype=np.float64)
    return _solve(c, idx, mod, tol, max_iter, saturate)


def factorize(c: Couple, x: SparseVector, tol: float = 1e-6, max_iter: int = 2000,
              saturate: bool = True) -> Factorization:
    """K-optimal balanced factorization of |x|.

    ``saturate`` allows the closed-form exponent for sup-norm endpoints to be
    tried first; switch it off to exercise the optimizer alone.
    """
    if not isinstance(c, Couple):
        raise ConfigurationError("expected a Couple")
    if x.is_zero:
        raise InputError("cannot factorize the zero vector")
    if tol <= 0 or max_iter < 1:
        raise ConfigurationError("tol must be positive and max_iter >= 1")
    idx = np.ascontiguousarray(x.idx, dtype=np.int64)
    mod = np.ascontiguousarray(np.abs(x.val), dtype=np.float64)
    ub, lb, s, iters = _cached(c, idx.tobytes(), mod.tobytes(), float(tol),
                               int(max_iter), bool(saturate))
    pb = _Problem(c, idx, mod)
    a0, a1 = pb.pair(s)
    N0, N1 = c.x0._norm(idx, a0), c.x1._norm(idx, a1)
    shift = math.log(N1) - math.log(N0)
    a0, a1 = pb.pair(s + shift)
    ratio = ub / lb if lb > 0 else math.inf
    return Factorization(
        a0=SparseVector(idx, a0), a1=SparseVector(idx, a1), theta=c.theta,
        objective=float(ub), optimality_ratio=float(ratio),
        certified=bool(ratio <= 1 + tol), lower_bound=float(lb), iterations=iters)


def interpolation_norm(c: Couple, x: SparseVector, tol: float = 1e-6,
                       max_iter: int = 2000) -> float:
    """Upper bound ||a0||^(1-theta) ||a1||^theta of ||x||_theta."""
    if x.is_zero:
        return 0.0
    return factorize(c, x, tol, max_iter).objective


def induced_centralizer(c: Couple, x: SparseVector, tol: float = 1e-6,
                        max_iter: int = 2000) -> SparseVector:
    """Omega_theta(x) = x log(a1/a0) from the balanced factorization of |x|."""
    if x.is_zero:
        return SparseVector.zero()
    f = factorize(c, x, tol, max_iter)
    return x.times(np.log(f.a1.val / f.a0.val))


@dataclass(frozen=True)
class CalderonSpace(SpaceSpec):
    """The interpolation space of a couple, as a space in its own right."""

    couple: Couple
    kind = "calderon"

    def _norm(self, idx, mod):
        return factorize(self.couple, SparseVector(idx, mod)).objective

    def _weights(self, idx, mod, target=None):
        c, t = self.couple, self.couple.theta
        f = factorize(c, SparseVector(idx, mod))
        (_, w0, _), (_, w1, _) = _pair_weights(c, idx, f.a0.val, f.a1.val)
        w = w0 ** (1 - t) * w1 ** t
        return f.objective, w / w.sum(), f.lower_bound / f.objective

    def to_json(self):
        return {"kind": "calderon", "couple": self.couple.to_json()}
