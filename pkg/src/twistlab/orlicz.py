"""Orlicz functions and their Luxemburg gauges.

An :class:`OrliczFunction` bundles a vectorized gauge ``phi``, its inverse and
derivative. Functions that are only prescribed near 0 carry a validity
endpoint ``t_max``; beyond it they are continued either by the tangent line
(``"tangent"``) or by the tangent power law in log-log coordinates
(``"power"``, which keeps products of inverses exact, see :func:`twist_r`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BracketError, ConfigurationError

_GRID = np.geomspace(1e-8, 1e2, 400)


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    name: str
    params: dict
    phi: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    inverse: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    derivative: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    t_max: float = math.inf
    extension: str = "none"

    def __call__(self, t):
        return self.phi(np.asarray(t, dtype=float))

    def __eq__(self, other):
        return (isinstance(other, OrliczFunction) and self.name == other.name
                and self.params == other.params)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items()))))

    @property
    def delta2_witness(self) -> float:
        """max of phi(2t)/phi(t) over the sample grid."""
        return float(np.max(self.phi(2 * _GRID) / self.phi(_GRID)))

    @property
    def convex(self) -> bool:
        """Numerical convexity check: derivative nondecreasing on a grid."""
        d = self.derivative(_GRID)
        d = d[np.isfinite(d)]
        return bool(np.all(np.diff(d) >= -1e-9 * np.abs(d[1:])))

    def check(self, rtol: float = 1e-9) -> bool:
        """phi(0)=0, strictly increasing, and phi(phi^{-1}(t)) = t on a grid."""
        if float(self.phi(np.array([0.0]))[0]) != 0.0:
            return False
        vals = self.phi(_GRID)
        vals = vals[vals > 1e-280]  # below this the grid underflows
        if vals.size < 2 or not np.all(np.diff(vals) > 0):
            return False
        back = self.phi(self.inverse(vals))
        return bool(np.allclose(back, vals, rtol=rtol, atol=0))

    def to_json(self) -> dict:
        return {"kind": "orlicz", "name": self.name, **self.params}


def power(p: float) -> OrliczFunction:
    """phi(t) = t^p."""
    p = float(p)
    if not p >= 1:
        raise ConfigurationError(f"power Orlicz function needs p >= 1, got {p}")
    return OrliczFunction(
        "power", {"p": p},
        phi=lambda t: np.power(t, p),
        inverse=lambda t: np.power(t, 1.0 / p),
        derivative=lambda t: p * np.power(t, p - 1.0),
    )


def exp_alpha(alpha: float, t_max: float | None = None) -> OrliczFunction:
    """M_alpha(t) = exp(-t^(-alpha)), used verbatim on [0, t_max].

    The default ``t_max`` is max(t_c, 1/4) where t_c = (alpha/(alpha+1))^(1/alpha)
    is the inflection point; beyond ``t_max`` the tangent line continues it.
    For alpha >= 1 the result is convex. For small alpha the verbatim range
    [t_c, 1/4] is kept so that indicator vectors of length >= 8 are gauged by
    M_alpha itself; the gauge is then only a quasi-norm there.
    """
    a = float(alpha)
    if not a > 0:
        raise ConfigurationError("alpha must be positive")
    t_c = (a / (a + 1.0)) ** (1.0 / a)
    T = float(t_max) if t_max is not None else max(t_c, 0.25)
    MT = math.exp(-T ** -a)
    dMT = a * T ** (-a - 1.0) * MT

    def phi(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        lo = t <= T
        with np.errstate(divide="ignore", over="ignore"):
            out[lo] = np.exp(-np.power(t[lo], -a))
        out[~lo] = MT + dMT * (t[~lo] - T)
        return out

    def inverse(y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        lo = y <= MT
        with np.errstate(divide="ignore"):
            out[lo] = np.power(-np.log(y[lo]), -1.0 / a)
        out[~lo] = T + (y[~lo] - MT) / dMT
        out[y == 0] = 0.0
        return out

    def derivative(t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, dMT)
        lo = (t <= T) & (t > 0)
        tl = t[lo]
        out[lo] = a * np.power(tl, -a - 1.0) * np.exp(-np.power(tl, -a))
        out[t == 0] = 0.0
        return out

    params = {"alpha": a}
    if t_max is not None:
        params["t_max"] = T
    return OrliczFunction("exp_alpha", params, phi, inverse, derivative,
                          t_max=T, extension="tangent")


def twist_r(r: float, side: int = 0, extension: str = "power") -> OrliczFunction:
    """The pair with phi_0^{-1}(t) phi_1^{-1}(t) = t whose midpoint centralizer
    is equivalent to the Kalton-Peck map with phi_r.

    Near 0 (t <= 1/e, i.e. L = -log t >= 1):
        phi_side^{-1}(t) = t^(1/2 +- (1/4) L^(r-1)),  + for side 0, - for side 1.
    ``extension="power"`` continues each inverse by the power law with matching
    log-log slope, so the product identity survives on all of [0, inf).
    ``extension="tangent"`` continues phi affinely instead.
    """
    r = float(r)
    if not 0 < r <= 1:
        raise ConfigurationError("twist_r needs 0 < r <= 1")
    if side not in (0, 1):
        raise ConfigurationError("side must be 0 or 1")
    if extension not in ("power", "tangent"):
        raise ConfigurationError(f"unknown extension {extension!r}")
    sgn = 1.0 if side == 0 else -1.0
    t_v = math.exp(-1.0)
    s_v = math.exp(-(0.5 + 0.25 * sgn))
    kappa_v = 0.5 + 0.25 * sgn * r  # log-log slope of the inverse at t_v

    def inv_near(t):
        L = -np.log(t)
        return np.exp(-0.5 * L - 0.25 * sgn * np.power(L, r))

    def slope_near(t):
        L = -np.log(t)
        return 0.5 + 0.25 * sgn * r * np.power(L, r - 1.0)

    def phi_near(s):
        # solve S = L/2 + sgn L^r / 4 for L >= 1 by monotone Newton
        S = -np.log(s)
        # starting points on the side of the root where Newton is monotone
        if sgn > 0:
            L = np.maximum(2.0 * S - 0.5 * np.power(2.0 * S, r), 1.0)
        else:
            L = 2.0 * S + 0.5 * np.power(4.0 * S + 1.0, r)
        for _ in range(100):
            h = 0.5 * L + 0.25 * sgn * np.power(L, r) - S
            dh = 0.5 + 0.25 * sgn * r * np.power(L, r - 1.0)
            step = h / dh
            L = np.maximum(L - step, 1.0)
            if np.all(np.abs(step) <= 1e-15 * L):
                break
        return np.exp(-L)

    dphi_v = (t_v / s_v) / kappa_v

    def phi(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        near = (s > 0) & (s <= s_v)
        out[near] = phi_near(s[near])
        far = s > s_v
        if extension == "power":
            out[far] = t_v * np.power(s[far] / s_v, 1.0 / kappa_v)
        else:
            out[far] = t_v + dphi_v * (s[far] - s_v)
        return out

    def inverse(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        near = (t > 0) & (t <= t_v)
        out[near] = inv_near(t[near])
        far = t > t_v
        if extension == "power":
            out[far] = s_v * np.power(t[far] / t_v, kappa_v)
        else:
            out[far] = s_v + (t[far] - t_v) / dphi_v
        return out

    def derivative(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        near = (s > 0) & (s <= s_v)
        t = phi_near(s[near])
        out[near] = (t / s[near]) / slope_near(t)
        far = s > s_v
        if extension == "power":
            out[far] = (phi(s[far]) / s[far]) / kappa_v
        else:
            out[far] = dphi_v
        return out

    params = {"r": r, "side": side}
    if extension != "power":
        params["extension"] = extension
    return OrliczFunction("twist_r", params, phi, inverse, derivative,
                          t_max=s_v, extension=extension)


def orlicz_from_json(obj: dict) -> OrliczFunction:
    name = obj.get("name")
    try:
        if name == "power":
            return power(obj["p"])
        if name == "exp_alpha":
            return exp_alpha(obj["alpha"], obj.get("t_max"))
        if name == "twist_r":
            return twist_r(obj["r"], int(obj.get("side", 0)),
                           obj.get("extension", "power"))
    except KeyError as exc:
        raise ConfigurationError(f"orlicz function {name!r} missing {exc}") from None
    raise ConfigurationError(f"unknown Orlicz function {name!r}")


# Luxemburg gauge -------------------------------------------------------------

def luxemburg_batch(f: OrliczFunction, M: np.ndarray, counts=None,
                    tol: float = 1e-13, max_expand: int = 400) -> np.ndarray:
    """Row-wise inf{r > 0 : sum_i c_i phi(M_i / r) <= 1} for a 2-D array of moduli.

    Safeguarded Newton in log r after expanding a bracket by factors of e.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    c = np.ones(M.shape[1]) if counts is None else np.asarray(counts, dtype=float)
    amax = M.max(axis=1)
    out = np.zeros(M.shape[0])
    live = amax > 0
    if not np.any(live):
        return out
    A = M[live] / amax[live, None]  # scale out the size of each row

    def F(logr):
        return (f.phi(A / np.exp(logr)[:, None]) * c).sum(axis=1)

    hi = np.zeros(A.shape[0])
    lo = np.zeros(A.shape[0])
    for _ in range(max_expand):
        bad = F(hi) > 1
        if not np.any(bad):
            break
        hi[bad] += 1.0
    else:
        raise BracketError("Luxemburg gauge: upper bracket did not close")
    lo = hi - 1.0
    for _ in range(max_expand):
        bad = F(lo) < 1
        if not np.any(bad):
            break
        lo[bad] -= 1.0
    else:
        raise BracketError("gauge never reaches 1: phi is too small on this vector")
    # safeguarded Newton on g(u) = log F(e^u), which is nearly affine in u
    u = hi.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(200):
            T = A / np.exp(u)[:, None]
            Fu = (f.phi(T) * c).sum(axis=1)
            dF = -(f.derivative(T) * T * c).sum(axis=1)
            g = np.log(Fu)
            above = g > 0
            lo = np.where(above, u, lo)
            hi = np.where(above, hi, u)
            step = np.where(np.isfinite(g) & (dF < 0), g * Fu / dF, np.nan)
            nu = u - step
            bad = ~np.isfinite(nu) | (nu <= lo) | (nu >= hi)
            nu = np.where(bad, 0.5 * (lo + hi), nu)
            conv = (np.abs(g) <= 1e-15) | (hi - lo <= tol)
            if np.all(conv):
                break
            u = np.where(conv, u, nu)
    hi = np.where(np.abs(g) <= 1e-15, u, hi)
    out[live] = np.exp(hi) * amax[live]
    return out


def orlicz_gauge(f: OrliczFunction, x, tol: float = 1e-12) -> float:
    """Luxemburg norm of a vector (SparseVector or array of entries)."""
    mod = np.abs(x.val) if hasattr(x, "val") else np.abs(np.asarray(x))
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    mod = mod[mod > 0]
    if mod.size == 0:
        return 0.0
    u, cnt = np.unique(mod, return_counts=True)
    return float(luxemburg_batch(f, u[None, :], cnt, tol=min(tol, 1e-13))[0])


def luxemburg_sum(f: OrliczFunction, x, r: float) -> float:
    """sum_i phi(|x_i| / r); equals 1 at the gauge for continuous phi."""
    mod = np.abs(x.val) if hasattr(x, "val") else np.abs(np.asarray(x))
    return float(np.sum(f.phi(mod / r)))
