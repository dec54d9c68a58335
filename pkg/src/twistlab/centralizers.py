"""Centralizers and the quantities measured on them.

All closed-form centralizers here have the shape Omega(x) = x * m(x) with a
scalar multiplier m depending only on |x| / ||x||, so they are homogeneous,
exact (commute with unimodular multipliers) and support preserving.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, InputError
from .factorization import CalderonSpace, Couple, couple_from_json, induced_centralizer
from .orlicz import OrliczFunction, orlicz_from_json
from .spaces import Lp, SpaceSpec, norm, space_from_json
from .sparse import SparseVector, disjoint, total


# phi functions -------------------------------------------------------------

@dataclass(frozen=True)
class PhiSpec:
    """phi1: t;  phi_r: t on [0,1] and t^r beyond;  complex_power: t^(1+i alpha)."""

    kind: str
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("phi1", "phi_r", "complex_power"):
            raise ConfigurationError(f"unknown phi kind {self.kind!r}")
        p = float(self.param)
        if self.kind == "phi_r" and not 0 < p <= 1:
            raise ConfigurationError("phi_r needs 0 < r <= 1")
        if not math.isfinite(p):
            raise ConfigurationError("phi parameter must be finite")
        object.__setattr__(self, "param", p)

    @property
    def is_complex(self) -> bool:
        return self.kind == "complex_power" and self.param != 0

    @property
    def lipschitz_constant(self) -> float:
        if self.kind == "complex_power":
            return math.hypot(1.0, self.param)
        return 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "phi1":
            return t.copy()
        if self.kind == "phi_r":
            big = t > 1
            out = t.copy()
            out[big] = np.power(t[big], self.param)
            return out
        # odd extension to negative arguments; t^(1+ia) = t exp(i a log t)
        a = np.abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            ph = np.where(a > 0, np.exp(1j * self.param * np.log(np.where(a > 0, a, 1.0))), 1.0)
        return t * ph

    def to_json(self):
        if self.kind == "phi1":
            return {"kind": "phi1"}
        if self.kind == "phi_r":
            return {"kind": "phi_r", "r": self.param}
        return {"kind": "complex_power", "alpha": self.param}


def Phi1() -> PhiSpec:
    return PhiSpec("phi1")


def PhiR(r: float) -> PhiSpec:
    return PhiSpec("phi_r", r)


def ComplexPower(alpha: float) -> PhiSpec:
    return PhiSpec("complex_power", alpha)


def phi_from_json(obj) -> PhiSpec:
    kind = obj.get("kind")
    if kind == "phi1":
        return Phi1()
    if kind == "phi_r":
        return PhiR(obj.get("r", 1.0))
    if kind == "complex_power":
        return ComplexPower(obj.get("alpha", 0.0))
    raise ConfigurationError(f"unknown phi kind {kind!r}")


# centralizer kinds ---------------------------------------------------------

class CentralizerSpec:
    kind = "abstract"
    is_complex = False

    def home(self) -> SpaceSpec:
        """The space the centralizer is quasi-linear on."""
        raise NotImplementedError

    def _apply(self, x: SparseVector) -> SparseVector:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class KaltonPeck(CentralizerSpec):
    space: SpaceSpec
    phi: PhiSpec
    kind = "kalton_peck"

    @property
    def is_complex(self):
        return self.phi.is_complex

    def home(self):
        return self.space

    def _apply(self, x):
        r = np.abs(x.val) / norm(self.space, x)
        return x.times(self.phi(-np.log(r)))

    def to_json(self):
        return {"kind": "kalton_peck", "space": self.space.to_json(), "phi": self.phi.to_json()}


@dataclass(frozen=True)
class PConvexForm(CentralizerSpec):
    """factor * x log(|x| / ||x||)."""

    space: SpaceSpec
    factor: float
    kind = "pconvex_form"

    def home(self):
        return self.space

    def _apply(self, x):
        r = np.abs(x.val) / norm(self.space, x)
        return x.times(self.factor * np.log(r))

    def to_json(self):
        return {"kind": "pconvex_form", "space": self.space.to_json(), "factor": self.factor}


@dataclass(frozen=True)
class OrliczHilbert(CentralizerSpec):
    """2 f log(phi1^{-1}(f^2) / f) for f = |x| / ||x||_2, times the phase of x."""

    phi1: OrliczFunction
    kind = "orlicz_hilbert"

    def home(self):
        return Lp(2)

    def _apply(self, x):
        f = np.abs(x.val) / norm(Lp(2), x)
        return x.times(2.0 * np.log(self.phi1.inverse(f * f) / f))

    def to_json(self):
        return {"kind": "orlicz_hilbert", "phi1": self.phi1.to_json()}


@dataclass(frozen=True)
class Scaled(CentralizerSpec):
    mu: complex
    inner: CentralizerSpec
    kind = "scaled"

    def __post_init__(self):
        mu = complex(self.mu)
        object.__setattr__(self, "mu", mu.real if mu.imag == 0 else mu)

    @property
    def is_complex(self):
        return isinstance(self.mu, complex) or self.inner.is_complex

    def home(self):
        return self.inner.home()

    def _apply(self, x):
        if self.mu == 0:
            return SparseVector.zero()
        return self.inner._apply(x) * self.mu

    def to_json(self):
        mu = complex(self.mu)
        return {"kind": "scaled", "mu": [mu.real, mu.imag], "inner": self.inner.to_json()}


@dataclass(frozen=True)
class Interpolated(CentralizerSpec):
    """Centralizer induced by the couple: x log(a1/a0)."""

    couple: Couple
    tol: float = 1e-9
    kind = "interpolated"

    def home(self):
        return CalderonSpace(self.couple)

    def _apply(self, x):
        return induced_centralizer(self.couple, x, self.tol)

    def to_json(self):
        out = {"kind": "interpolated", "couple": self.couple.to_json()}
        if self.tol != 1e-9:
            out["tol"] = self.tol
        return out


def centralizer_from_json(obj) -> CentralizerSpec:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad centralizer JSON: {exc}") from None
    kind = obj.get("kind") if isinstance(obj, dict) else None
    try:
        if kind == "kalton_peck":
            return KaltonPeck(space_from_json(obj["space"]), phi_from_json(obj.get("phi", {"kind": "phi1"})))
        if kind == "pconvex_form":
            return PConvexForm(space_from_json(obj["space"]), float(obj["factor"]))
        if kind == "orlicz_hilbert":
            f = dict(obj["phi1"])
            f.setdefault("name", f.get("kind"))
            return OrliczHilbert(orlicz_from_json(f))
        if kind == "scaled":
            mu = obj["mu"]
            mu = complex(*mu) if isinstance(mu, (list, tuple)) else complex(mu)
            return Scaled(mu, centralizer_from_json(obj["inner"]))
        if kind == "interpolated":
            return Interpolated(couple_from_json(obj["couple"]), float(obj.get("tol", 1e-9)))
    except KeyError as exc:
        raise ConfigurationError(f"centralizer {kind!r} missing field {exc}") from None
    raise ConfigurationError(f"unknown centralizer kind {kind!r}")


# operations ----------------------------------------------------------------

def apply(spec: CentralizerSpec, x: SparseVector) -> SparseVector:
    if x.is_zero:
        return SparseVector.zero()
    return spec._apply(x)


def quasilinearity_defect(spec, x, y, space=None) -> float:
    """||Omega(x+y) - Omega(x) - Omega(y)|| / (||x|| + ||y||)."""
    space = space or spec.home()
    s = x + y
    if x.is_zero or y.is_zero or s.is_zero:
        raise InputError("x, y and x+y must be nonzero")
    d = apply(spec, s) - apply(spec, x) - apply(spec, y)
    return norm(space, d) / (norm(space, x) + norm(space, y))


def random_vector(rng, dim: int, complex_: bool = False, start: int = 1,
                  sparsity: float = 0.0) -> SparseVector:
    """Gaussian entries on indices start..start+dim-1, a random share zeroed."""
    v = rng.normal(size=dim)
    if complex_:
        v = v + 1j * rng.normal(size=dim)
    if sparsity > 0:
        v = v * (rng.uniform(size=dim) >= sparsity)
    if not np.any(v):
        v[rng.integers(dim)] = 1.0
    return SparseVector(np.arange(start, start + dim), v)


def pair_sampler(dim: int = 6, complex_: bool = False, disjoint_: float = 0.3):
    """Sampler of pairs (x, y): generic, disjointly supported or overlapping."""

    def sample(rng):
        d = int(rng.integers(1, dim + 1))
        x = random_vector(rng, d, complex_)
        if rng.uniform() < disjoint_:
            y = random_vector(rng, int(rng.integers(1, dim + 1)), complex_, start=d + 1)
        else:
            y = random_vector(rng, int(rng.integers(1, dim + 1)), complex_, sparsity=0.3)
        if (x + y).is_zero:
            y = y * 2.0
        return x, y

    return sample


def rho_lower(spec, space=None, sampler=None, n_samples: int = 100, seed: int = 0) -> float:
    """Max quasi-linearity defect over sampled pairs: a lower bound of rho(Omega).

    ``sampler`` is either a callable rng -> (x, y) or a sequence of pairs
    (used first, the callable filling up to ``n_samples``).
    """
    if n_samples < 1:
        raise ConfigurationError("n_samples must be >= 1")
    space = space or spec.home()
    fixed: Sequence = []
    draw: Callable | None = None
    if sampler is None:
        draw = pair_sampler(complex_=spec.is_complex)
    elif callable(sampler):
        draw = sampler
    else:
        fixed = list(sampler)
    rng = np.random.default_rng(seed)
    best = 0.0
    for k in range(max(n_samples, len(fixed))):
        if k < len(fixed):
            x, y = fixed[k]
        elif draw is not None:
            x, y = draw(rng)
        else:
            break
        best = max(best, quasilinearity_defect(spec, x, y, space))
    return best


def exactness_check(spec, x: SparseVector, u, space=None):
    """(ok, residual) with residual = ||Omega(ux) - u Omega(x)||."""
    u = np.asarray(u)
    if u.shape != x.val.shape:
        raise InputError("u must be aligned with the stored entries of x")
    if not np.allclose(np.abs(u), 1.0, rtol=0, atol=1e-12):
        raise InputError("u must be unimodular")
    space = space or spec.home()
    ux = x.times(u)
    lhs = apply(spec, ux)
    om = apply(spec, x)
    # u Omega(x): Omega(x) is supported inside supp x
    pos = np.searchsorted(x.idx, om.idx)
    rhs = SparseVector(om.idx, om.val * u[pos])
    res = norm(space, lhs - rhs)
    return bool(res <= 1e-9 * norm(space, x)), float(res)


def equivalence_gap(spec1, spec2, space=None, samples: Iterable[SparseVector] = ()) -> float:
    """max ||Omega1 x - Omega2 x|| / ||x|| over the samples."""
    space = space or spec1.home()
    best = 0.0
    for x in samples:
        if x.is_zero:
            continue
        d = apply(spec1, x) - apply(spec2, x)
        best = max(best, norm(space, d) / norm(space, x))
    return best


NOT_FOUND = "not found"


def _threshold_on(phi: PhiSpec, M: float, cap: float, n_grid: int):
    g = np.unique(np.concatenate([
        np.geomspace(min(1e-3, cap / 10), cap, n_grid),
        np.linspace(0.0, cap, n_grid),
        [0.0, min(M, cap), cap],
    ]))
    vals = phi(g)
    i, j = np.triu_indices(g.size, k=1)
    dist = g[j] - g[i]
    dphi = np.abs(vals[j] - vals[i])
    order = np.argsort(dist, kind="stable")
    dist, dphi = dist[order], dphi[order]
    # suffix minimum: every pair at distance >= dist[k] moves phi by >= M
    suffix = np.minimum.accumulate(dphi[::-1])[::-1]
    ok = np.nonzero(suffix >= M * (1 - 1e-12))[0]
    return float(dist[ok[0]]) if ok.size else None


def expansiveness_threshold(phi: PhiSpec, M: float, search_cap: float = 1e4,
                            n_grid: int = 400):
    """Smallest grid distance N with |s-t| >= N => |phi(s)-phi(t)| >= M on [0, cap].

    Returns ``"not found"`` when no such N exists on the grid or when the
    threshold is unstable in the cap (N(cap) > 2 N(cap/10)), the signature of
    a threshold that keeps growing with the search range.
    """
    if not M > 0:
        raise ConfigurationError("M must be positive")
    if search_cap < M:
        return NOT_FOUND
    n_cap = _threshold_on(phi, M, search_cap, n_grid)
    if n_cap is None:
        return NOT_FOUND
    if search_cap / 10 >= M:
        n_small = _threshold_on(phi, M, search_cap / 10, n_grid)
        if n_small is None or n_cap > 2 * n_small:
            return NOT_FOUND
    return n_cap


def boundedness_gap(spec, block_family: Sequence[SparseVector], space=None,
                    coeff_sampler=None, n_samples: int = 50, seed: int = 0) -> float:
    """Triviality gap of Omega on the span of disjoint vectors y_1..y_k.

    The linear map Lambda(sum l_i y_i) = sum l_i Omega(y_i) (a diagonal
    multiplier on the family) is subtracted; the gap is the largest
    ||Omega(sum l_i y_i) - sum l_i Omega(y_i)|| / ||sum l_i y_i|| over sampled
    coefficients. The all-ones vector is always sampled first.
    """
    fam = list(block_family)
    if not fam:
        raise InputError("empty family")
    if any(v.is_zero for v in fam) or not disjoint(fam):
        raise InputError("family members must be nonzero and disjointly supported")
    space = space or spec.home()
    k = len(fam)
    om = [apply(spec, v) for v in fam]
    rng = np.random.default_rng(seed)
    coeffs = [np.ones(k)]
    if coeff_sampler is None:
        for _ in range(n_samples - 1):
            c = rng.normal(size=k)
            if spec.is_complex:
                c = c + 1j * rng.normal(size=k)
            coeffs.append(c)
    elif callable(coeff_sampler):
        coeffs += [np.asarray(coeff_sampler(rng, k)) for _ in range(n_samples - 1)]
    else:
        coeffs += [np.asarray(c) for c in coeff_sampler]
    best = 0.0
    for lam in coeffs:
        if not np.any(lam):
            continue
        s = total(v * l for v, l in zip(fam, lam) if l != 0)
        lin = total(o * l for o, l in zip(om, lam) if l != 0)
        best = max(best, norm(space, apply(spec, s) - lin) / norm(space, s))
    return best
