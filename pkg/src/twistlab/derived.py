"""Twisted sums, analytic witnesses on l_p scales, and Rochberg tuples.

A witness lives on the scale of a couple (l_p0, l_p1) at theta:

    g(z) = m(z) ||x|| sgn(x) (|x| / ||x||)^E(z),   E(z) = p_theta ((1-z)/p0 + z/p1),

with ||x|| the l_{p_theta} norm, so g(theta) = m(theta) x and
||g(j+it)||_{p_j} = |m(j+it)| ||x||. The multiplier is
m(z) = P(z - theta) exp(gamma (z - theta)^2) with P a complex polynomial; the
Gaussian factor keeps nonconstant multipliers bounded on the strip. Taylor
coefficients at any point are exact series arithmetic.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .centralizers import CentralizerSpec, apply
from .errors import ConfigurationError, InputError, SizeError
from .factorization import Couple, induced_centralizer, interpolation_norm
from .spaces import Lp, norm
from .sparse import SparseVector

MAX_ORDER = 6


# twisted sums ---------------------------------------------------------------

@dataclass(frozen=True)
class TwistedPair:
    w: SparseVector
    z: SparseVector


def twisted_quasinorm(spec: CentralizerSpec, p: TwistedPair, space=None) -> float:
    """||w - Omega z|| + ||z||."""
    space = space or spec.home()
    return norm(space, p.w - apply(spec, p.z)) + norm(space, p.z)


# witnesses -----------------------------------------------------------------

def _recip(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass(frozen=True)
class AnalyticWitness:
    couple: Couple
    base: SparseVector
    poly: tuple = (1.0,)  # coefficients of P in powers of (z - theta), ascending
    gamma: float = 0.0
    mode: str = "scale"  # "scale" or "constant" (g = m(z) x)

    def __post_init__(self):
        c = self.couple
        if not (isinstance(c.x0, Lp) and isinstance(c.x1, Lp)):
            raise ConfigurationError("witnesses live on couples of Lp endpoints")
        if self.mode not in ("scale", "constant"):
            raise ConfigurationError(f"unknown witness mode {self.mode!r}")
        if self.gamma < 0:
            raise ConfigurationError("gamma must be >= 0")
        object.__setattr__(self, "poly", tuple(complex(a) for a in self.poly) or (0j,))

    @property
    def theta(self) -> float:
        return self.couple.theta

    @property
    def p_theta(self) -> float:
        c = self.couple
        s = (1 - c.theta) * _recip(c.x0.p) + c.theta * _recip(c.x1.p)
        return math.inf if s == 0 else 1.0 / s

    @property
    def slope(self) -> float:
        """E'(z), the rate of the exponent."""
        if self.mode == "constant" or math.isinf(self.p_theta):
            return 0.0
        c = self.couple
        return self.p_theta * (_recip(c.x1.p) - _recip(c.x0.p))

    def _scale_data(self):
        x = self.base
        if x.is_zero:
            return 0.0, np.zeros(0), np.zeros(0)
        nx = norm(Lp(self.p_theta), x)
        return nx, np.log(np.abs(x.val) / nx), x.sign()

    def multiplier(self, z):
        z = np.asarray(z, dtype=complex)
        u = z - self.theta
        return np.polynomial.polynomial.polyval(u, np.array(self.poly)) * np.exp(self.gamma * u * u)

    def __call__(self, z: complex) -> SparseVector:
        x = self.base
        if x.is_zero:
            return SparseVector.zero()
        mz = complex(self.multiplier(z))
        if self.mode == "constant":
            return x * mz
        nx, L, sg = self._scale_data()
        E = 1.0 + self.slope * (complex(z) - self.theta)
        return SparseVector(x.idx, mz * nx * sg * np.exp(E * L))

    def scaled(self, lam) -> "AnalyticWitness":
        return AnalyticWitness(self.couple, self.base,
                               tuple(lam * a for a in self.poly), self.gamma, self.mode)

    def times_poly(self, poly: Sequence) -> "AnalyticWitness":
        """Multiply the multiplier by another polynomial in (z - theta)."""
        prod = np.polynomial.polynomial.polymul(np.array(self.poly), np.array(poly, dtype=complex))
        return AnalyticWitness(self.couple, self.base, tuple(prod), self.gamma, self.mode)

    def endpoint_constants(self):
        """K_j with ||g(j+it)||_{p_j} = |m(j+it)| K_j."""
        x = self.base
        if x.is_zero:
            return (0.0, 0.0)
        if self.mode == "constant":
            return (norm(self.couple.x0, x), norm(self.couple.x1, x))
        nx = norm(Lp(self.p_theta), x)
        return (nx, nx)


def _exp_series(q: np.ndarray, n: int) -> np.ndarray:
    """Taylor coefficients of exp(q(u)) up to u^(n-1); q has shape (deg+1, m)."""
    m = q.shape[1]
    f = np.zeros((n, m), dtype=complex)
    f[0] = np.exp(q[0])
    dq = [(j + 1) * q[j + 1] for j in range(q.shape[0] - 1)]
    for k in range(n - 1):
        acc = np.zeros(m, dtype=complex)
        for j, d in enumerate(dq):
            if k - j >= 0:
                acc += d * f[k - j]
        f[k + 1] = acc / (k + 1)
    return f


def _shift_poly(poly, h: float) -> np.ndarray:
    """Coefficients of P(u + h) in powers of u."""
    P = np.array(poly, dtype=complex)
    out = np.zeros_like(P)
    for k, a in enumerate(P):
        for j in range(k + 1):
            out[j] += a * math.comb(k, j) * h ** (k - j)
    return out


def taylor_coefficients(g: AnalyticWitness, at: float, n: int) -> np.ndarray:
    """Array (n, m): coefficient k of g around ``at``, for the stored support."""
    x = g.base
    m = x.nnz
    if m == 0:
        return np.zeros((n, 0), dtype=complex)
    h = at - g.theta
    # exponent polynomial in u = z - at: gamma (u + h)^2 + slope L (u + h) + L
    if g.mode == "constant":
        amp = x.val.astype(complex)
        L = np.zeros(m)
    else:
        nx, L, sg = g._scale_data()
        amp = nx * sg
    q = np.zeros((3, m), dtype=complex)
    q[0] = g.gamma * h * h + L * (1.0 + g.slope * h)
    q[1] = 2 * g.gamma * h + g.slope * L
    q[2] = g.gamma
    ex = _exp_series(q, n)
    P = _shift_poly(g.poly, h)
    coef = np.zeros((n, m), dtype=complex)
    for k in range(n):
        for j in range(min(k, P.size - 1) + 1):
            coef[k] += P[j] * ex[k - j]
    return coef * amp


# Rochberg tuples -----------------------------------------------------------

@dataclass(frozen=True)
class RochbergTuple:
    """(g[n], ..., g[1]) with g[k] = g^(k-1)(theta) / (k-1)!."""

    coeffs: tuple
    theta: float
    certificate: dict | None = field(default=None, compare=False)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def hat(self, k: int) -> SparseVector:
        """g[k], 1-based as displayed."""
        return self.coeffs[self.order - k]

    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coeffs)

    def allclose(self, other: "RochbergTuple", rtol=1e-9, atol=1e-12) -> bool:
        return self.order == other.order and all(
            a.allclose(b, rtol, atol) for a, b in zip(self.coeffs, other.coeffs))

    def to_json(self) -> dict:
        length = max((int(c.idx.max()) for c in self.coeffs if c.nnz), default=0)
        cx = any(c.is_complex for c in self.coeffs)

        def enc(c):
            d = c.to_dense(length)
            return [[float(v.real), float(v.imag)] for v in d] if cx else [float(v) for v in np.real(d)]

        return {"theta": self.theta, "coeffs": [enc(c) for c in self.coeffs]}


def tuple_from_json(obj) -> RochbergTuple:
    from .sparse import parse_vector
    if isinstance(obj, str):
        obj = json.loads(obj)
    return RochbergTuple(tuple(parse_vector(c) for c in obj["coeffs"]), float(obj["theta"]))


def taylor_tuple(g: AnalyticWitness, theta: float | None = None, n: int = 2) -> RochbergTuple:
    if not 1 <= n <= MAX_ORDER:
        raise SizeError(f"order must lie in 1..{MAX_ORDER}")
    at = g.theta if theta is None else float(theta)
    coef = taylor_coefficients(g, at, n)
    vecs = tuple(SparseVector(g.base.idx, coef[k]) for k in range(n - 1, -1, -1))
    return RochbergTuple(vecs, at)


def rochberg_project(t: RochbergTuple, n: int) -> RochbergTuple:
    if not 1 <= n <= t.order:
        raise InputError(f"cannot project an order-{t.order} tuple to order {n}")
    return RochbergTuple(t.coeffs[t.order - n:], t.theta)


@dataclass(frozen=True)
class BoundaryNorm:
    value: float
    per_side: tuple
    T: float
    n_grid: int
    correction: float
    tail: float


def _poly_abs_bound(P: np.ndarray, R: float) -> float:
    return float(np.sum(np.abs(P) * R ** np.arange(P.size)))


def witness_boundary_norm(g: AnalyticWitness, t_grid: int = 401,
                          T: float | None = None) -> BoundaryNorm:
    """sup over j = 0, 1 and real t of ||g(j+it)||_{p_j}.

    Grid maximum on [-T, T] plus a Lipschitz correction per grid cell, and a
    tail bound for |t| > T from the monotone envelope
    sum|P_k| (a^2 + t^2)^(k/2) exp(gamma (a^2 - t^2)), a = j - theta.
    """
    if t_grid < 3:
        raise ConfigurationError("t_grid must be >= 3")
    K = g.endpoint_constants()
    P = np.array(g.poly)
    deg = int(np.max(np.nonzero(P)[0])) if np.any(P) else 0
    if not np.any(P) or max(K) == 0:
        return BoundaryNorm(0.0, (0.0, 0.0), 0.0, t_grid, 0.0, 0.0)
    if deg > 0 and g.gamma == 0:
        return BoundaryNorm(math.inf, (math.inf, math.inf), math.inf, t_grid, 0.0, math.inf)
    gam = g.gamma
    if T is None:
        T = math.sqrt(deg / (2 * gam)) + 4.0 if deg > 0 else (4.0 if gam > 0 else 1.0)
    dP = np.polynomial.polynomial.polyder(P) if P.size > 1 else np.zeros(1, dtype=complex)
    t = np.linspace(-T, T, t_grid)
    h = t[1] - t[0]
    sides = []
    corr_max = tail_max = 0.0
    for j in (0, 1):
        a = j - g.theta
        vals = np.abs(g.multiplier(j + 1j * t))
        # cell-wise bound on |d/dt m|: |P'| + 2 gamma |u| |P|, times the Gaussian envelope
        lo_t = np.minimum(np.abs(t[:-1]), np.abs(t[1:]))
        lo_t[np.sign(t[:-1]) != np.sign(t[1:])] = 0.0
        hi_t = np.maximum(np.abs(t[:-1]), np.abs(t[1:]))
        R = np.sqrt(a * a + hi_t * hi_t)
        pb = np.sum(np.abs(P)[:, None] * R[None, :] ** np.arange(P.size)[:, None], axis=0)
        dpb = np.sum(np.abs(dP)[:, None] * R[None, :] ** np.arange(dP.size)[:, None], axis=0)
        env = np.exp(gam * (a * a - lo_t * lo_t))
        lip = (dpb + 2 * gam * R * pb) * env
        corr = 0.5 * h * lip
        cell = np.maximum(vals[:-1], vals[1:]) + corr
        tail = 0.0
        if gam > 0 or deg > 0:
            tail = _poly_abs_bound(P, math.hypot(a, T)) * math.exp(gam * (a * a - T * T))
        elif deg == 0:
            tail = float(abs(P[0]))
        sides.append(K[j] * max(float(cell.max()), tail))
        corr_max = max(corr_max, float(corr.max()))
        tail_max = max(tail_max, tail)
    return BoundaryNorm(max(sides), tuple(sides), T, t_grid, corr_max, tail_max)


def finite_difference_tuple(g: AnalyticWitness, n: int, h: float = 0.25,
                            theta: float | None = None) -> RochbergTuple:
    """Coefficients g^(k)(theta)/k! from a Cauchy-type stencil on a circle.

    Uses the trapezoid rule on |z - theta| = h with 32 nodes. Witnesses are
    entire, so a wide circle is allowed; rounding grows like eps / h^k, which
    rules out small radii at high order.
    """
    at = g.theta if theta is None else theta
    K = 32
    nodes = at + h * np.exp(2j * np.pi * np.arange(K) / K)
    vals = np.array([g(z).val if g.base.nnz else np.zeros(0) for z in nodes])
    # g(z) stores values on the fixed support of the base
    out = []
    for k in range(n):
        ck = (vals * np.exp(-2j * np.pi * k * np.arange(K) / K)[:, None]).mean(axis=0) / h ** k
        out.append(SparseVector(g.base.idx, ck))
    return RochbergTuple(tuple(reversed(out)), at)


def central_difference_derivatives(g: AnalyticWitness, h: float = 1e-2):
    """g(theta), g'(theta), g''(theta)/2, g'''(theta)/6 from 7-point real stencils."""
    th = g.theta
    f = {k: g(th + k * h).val for k in range(-3, 4)}
    d1 = (-f[-3] + 9 * f[-2] - 45 * f[-1] + 45 * f[1] - 9 * f[2] + f[3]) / (60 * h)
    d2 = (2 * f[-3] - 27 * f[-2] + 270 * f[-1] - 490 * f[0] + 270 * f[1] - 27 * f[2] + 2 * f[3]) / (180 * h * h)
    d3 = (f[-3] - 8 * f[-2] + 13 * f[-1] - 13 * f[1] + 8 * f[2] - f[3]) / (8 * h ** 3)
    return f[0], d1, d2 / 2, d3 / 6


# kernel derivative and derived-space checks --------------------------------

@dataclass(frozen=True)
class KernelReport:
    lhs: float
    bound: float
    margin: float
    ok: bool


def kernel_derivative_check(g: AnalyticWitness, c: Couple | None = None,
                            tol: float = 1e-6, t_grid: int = 401) -> KernelReport:
    """||g'(theta)||_theta <= ||g||_H / dist(theta, boundary) for g(theta) = 0."""
    c = c or g.couple
    g0 = g(c.theta)
    scale = max(norm(Lp(2), g.base), 1e-300)
    if norm(Lp(2), g0) > 1e-12 * scale:
        raise InputError("kernel check needs a witness with g(theta) = 0")
    d1 = taylor_tuple(g, c.theta, 2).hat(2)
    lhs = interpolation_norm(c, d1, tol) if not d1.is_zero else 0.0
    bound = witness_boundary_norm(g, t_grid).value / c.strip_distance
    margin = bound + tol * max(1.0, bound) - lhs
    return KernelReport(lhs, bound, margin, margin >= 0)


@dataclass(frozen=True)
class CoherenceReport:
    lhs: float
    bound: float
    constant: float
    ok: bool


def derived_coherence(g: AnalyticWitness, tol: float = 1e-6, t_grid: int = 401) -> CoherenceReport:
    """||g'(th) - Omega(g(th))||_th + ||g(th)||_th <= C ||g||_H,
    C = 2 (dist^-1 (1 + ||B||) + 1) with ||B|| <= 1 + tol."""
    c = g.couple
    tup = taylor_tuple(g, c.theta, 2)
    d1, g0 = tup.hat(2), tup.hat(1)
    om = induced_centralizer(c, g0, tol) if not g0.is_zero else SparseVector.zero()
    diff = d1 - om
    lhs = (interpolation_norm(c, diff, tol) if not diff.is_zero else 0.0) + (
        interpolation_norm(c, g0, tol) if not g0.is_zero else 0.0)
    C = 2 * ((2 + tol) / c.strip_distance + 1)
    bound = C * witness_boundary_norm(g, t_grid).value
    return CoherenceReport(lhs, bound, C, lhs <= bound)


# conformal map and the embedding i_{n,m} -----------------------------------

def strip_to_disc(z, theta: float):
    """(e^{i pi z} - e^{i pi theta}) / (e^{i pi z} - e^{-i pi theta}); theta -> 0."""
    zeta = np.exp(1j * np.pi * np.asarray(z, dtype=complex))
    return (zeta - cmath.exp(1j * math.pi * theta)) / (zeta - cmath.exp(-1j * math.pi * theta))


def disc_to_strip(w, theta: float):
    w = np.asarray(w, dtype=complex)
    z0 = cmath.exp(1j * math.pi * theta)
    zeta = (z0 - w * z0.conjugate()) / (1 - w)
    return np.log(zeta) / (1j * math.pi)


def embedding_multiplier(theta: float, shift: int, m: int, n_fft: int = 64, radius: float = 0.5):
    """Coefficients a_l (l < m) of (psi(w) - theta)^shift at w = 0, psi the
    inverse conformal map, via the trapezoid rule on |w| = radius.

    Phi(z) = sum_{l<m} a_l phi(z)^l is bounded by sum |a_l| on the strip and
    has Taylor coefficients delta_{k,shift} at theta for k < m.
    Returns (a, sup bound, aliasing remainder estimate).
    """
    K = n_fft
    w = radius * np.exp(2j * np.pi * np.arange(K) / K)
    vals = (disc_to_strip(w, theta) - theta) ** shift
    c = np.fft.fft(vals) / K / radius ** np.arange(K)
    a = c[:m]
    # aliased coefficients of index l + K contaminate a_l by |c| r^K; estimate
    # that size from the decay of the last computed coefficients
    tail = float(np.max(np.abs(c[K // 2:K // 2 + 4]))) * radius ** (K // 2)
    return a, float(np.sum(np.abs(a))), tail


def _phi_taylor(theta: float, m: int, h: float = 0.05, K: int = 64) -> np.ndarray:
    """Taylor coefficients of the conformal map at theta (Cauchy integral)."""
    z = theta + h * np.exp(2j * np.pi * np.arange(K) / K)
    vals = strip_to_disc(z, theta)
    return (np.fft.fft(vals) / K / h ** np.arange(K))[:m]


def _series_mul(a, b, n):
    out = np.zeros(n, dtype=complex)
    for i in range(min(n, len(a))):
        for j in range(min(n - i, len(b))):
            out[i + j] += a[i] * b[j]
    return out


def multiplier_taylor(a: np.ndarray, theta: float, m: int) -> np.ndarray:
    """Taylor coefficients at theta of sum_l a_l phi(z)^l, to order m-1."""
    ph = _phi_taylor(theta, m)
    ph[0] = 0.0
    out = np.zeros(m, dtype=complex)
    powk = np.zeros(m, dtype=complex)
    powk[0] = 1.0
    for l, al in enumerate(a):
        out += al * powk
        powk = _series_mul(powk, ph, m)
    return out


def rochberg_embed(t: RochbergTuple, m: int, c: Couple | None = None,
                   tol: float = 1e-8) -> RochbergTuple:
    """i_{n,m}: pad (x_n..x_1) to (x_n..x_1, 0..0) of order m.

    The certificate carries the multiplier Phi with Phi[k] = delta_{k, m-n}
    (built from the strip-to-disc map), its sup bound and whether the
    truncation remainder stays below ``tol``.
    """
    n = t.order
    if m <= n:
        raise InputError("embedding needs m > order")
    if m > MAX_ORDER:
        raise SizeError(f"order must lie in 1..{MAX_ORDER}")
    a, sup, tail = embedding_multiplier(t.theta, m - n, m)
    coef = multiplier_taylor(a, t.theta, m)
    expected = np.zeros(m)
    expected[m - n] = 1.0
    err = float(np.max(np.abs(coef - expected)))
    cert = {"sup_bound": sup, "remainder": tail, "taylor_error": err,
            "certified": bool(tail <= tol and err <= 1e-6),
            "coefficients": [[float(v.real), float(v.imag)] for v in a]}
    pad = tuple(t.coeffs) + tuple(SparseVector.zero() for _ in range(m - n))
    return RochbergTuple(pad, t.theta, cert)


def leibniz_tuple(g: AnalyticWitness, a: np.ndarray, m: int) -> RochbergTuple:
    """Order-m tuple of the product witness g * Phi by the Leibniz rule."""
    gc = taylor_coefficients(g, g.theta, m)
    ph = multiplier_taylor(a, g.theta, m)
    out = []
    for k in range(m):
        v = sum(ph[k - j] * gc[j] for j in range(k + 1))
        out.append(SparseVector(g.base.idx, v))
    return RochbergTuple(tuple(reversed(out)), g.theta)


def random_witness(rng, couple: Couple, dim: int = 4, degree: int = 2,
                   gamma: float = 0.5, vanish: bool = False, complex_: bool = True) -> AnalyticWitness:
    """Seeded witness; ``vanish`` multiplies by (z - theta) so g(theta) = 0."""
    x = rng.normal(size=dim)
    if not np.any(x):
        x[0] = 1.0
    P = rng.normal(size=degree + 1) + (1j * rng.normal(size=degree + 1) if complex_ else 0)
    if vanish:
        P = np.concatenate([[0.0], P])
    return AnalyticWitness(couple, SparseVector.from_dense(x), tuple(P), gamma)
