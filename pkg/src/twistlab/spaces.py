"""Norm engines for the sequence spaces used throughout the package.

Every space is an immutable :class:`SpaceSpec`. Besides the norm itself each
space can produce *log-gradient weights* for a nonnegative vector ``a``:
a probability vector ``w`` with ``w_i = a_i y_i / ||a||`` where ``y`` is a
norming functional of ``a``. They drive the factorization optimizer and its
duality certificate. The third return value, ``slack``, is the certified
fraction ``<a, y> / (||a|| ||y||_*)``; it is 1 for exact norming functionals
and ``nan`` when no certificate is available.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError, SizeError
from .orlicz import OrliczFunction, luxemburg_batch, orlicz_from_json
from .sparse import SparseVector

ARGMAX_RTOL = 1e-12


class SpaceSpec:
    """Base class. Subclasses implement ``_norm`` on (indices, moduli)."""

    kind = "abstract"

    def _norm(self, idx: np.ndarray, mod: np.ndarray) -> float:
        raise NotImplementedError

    def _norm_batch(self, idx: np.ndarray, M: np.ndarray) -> np.ndarray:
        return np.array([self._norm(idx, row) for row in M])

    def _weights(self, idx, mod):
        raise NotImplementedError

    @property
    def is_norm(self) -> bool:
        """False when the gauge is only known to be a quasi-norm."""
        return True

    def norm(self, x: SparseVector) -> float:
        return norm(self, x)

    def to_json(self) -> dict:
        raise NotImplementedError

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _check_p(p, lo=1.0, strict=False) -> float:
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise ConfigurationError(f"bad exponent {p!r}") from None
    if math.isnan(p) or (p <= lo if strict else p < lo):
        raise ConfigurationError(f"exponent {p} out of range")
    return p


def _p_json(p: float):
    return "inf" if math.isinf(p) else p


def _lp_norm(M: np.ndarray, p: float, omega=None) -> np.ndarray:
    """Row-wise weighted p-norm of nonnegative rows, scaled for stability."""
    M = np.atleast_2d(M)
    amax = M.max(axis=1)
    if math.isinf(p):
        return amax
    safe = np.where(amax > 0, amax, 1.0)
    R = M / safe[:, None]
    if omega is not None:
        R = R ** p * omega
        s = R.sum(axis=1)
    else:
        s = (R ** p).sum(axis=1)
    return safe * s ** (1.0 / p) * (amax > 0)


def _sup_weights(mod, target=None):
    N = float(mod.max())
    top = mod >= N * (1 - ARGMAX_RTOL)
    w = np.zeros(mod.size)
    if target is not None and target[top].sum() > 0:
        w[top] = target[top]
    else:
        w[top] = 1.0
    w /= w.sum()
    # y_i = w_i N / a_i on the top set; its l1 norm is slightly above 1 when
    # the top set holds near-ties
    slack = 1.0 / float(np.sum(w[top] * N / mod[top]))
    return N, w, min(slack, 1.0)


@dataclass(frozen=True)
class Lp(SpaceSpec):
    p: float
    kind = "lp"

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p))

    def _norm(self, idx, mod):
        return float(_lp_norm(mod[None, :], self.p)[0])

    def _norm_batch(self, idx, M):
        return _lp_norm(M, self.p)

    def _weights(self, idx, mod, target=None):
        if math.isinf(self.p):
            return _sup_weights(mod, target)
        N = self._norm(idx, mod)
        w = (mod / mod.max()) ** self.p
        return N, w / w.sum(), 1.0

    def to_json(self):
        return {"kind": "lp", "p": _p_json(self.p)}


@dataclass(frozen=True)
class WeightedLp(SpaceSpec):
    """Atomic L_p: ||x|| = (sum_i w_i |x_i|^p)^(1/p); weights[k] belongs to index k+1."""

    p: float
    weights: tuple
    kind = "weighted_lp"

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p))
        w = tuple(float(v) for v in self.weights)
        if not w or not all(v > 0 and math.isfinite(v) for v in w):
            raise ConfigurationError("weights must be strictly positive and finite")
        object.__setattr__(self, "weights", w)

    def _omega(self, idx):
        if idx.size and idx.max() > len(self.weights):
            raise InputError(
                f"index {int(idx.max())} outside the {len(self.weights)} weighted atoms")
        return np.asarray(self.weights)[idx - 1]

    def _norm(self, idx, mod):
        return float(self._norm_batch(idx, mod[None, :])[0])

    def _norm_batch(self, idx, M):
        om = self._omega(idx)
        return _lp_norm(M, self.p, None if math.isinf(self.p) else om)

    def _weights(self, idx, mod, target=None):
        if math.isinf(self.p):
            return _sup_weights(mod, target)
        N = self._norm(idx, mod)
        w = self._omega(idx) * (mod / mod.max()) ** self.p
        return N, w / w.sum(), 1.0

    def to_json(self):
        return {"kind": "weighted_lp", "p": _p_json(self.p), "weights": list(self.weights)}


@dataclass(frozen=True)
class Orlicz(SpaceSpec):
    f: OrliczFunction
    kind = "orlicz"

    def __post_init__(self):
        if not isinstance(self.f, OrliczFunction):
            raise ConfigurationError("Orlicz space needs an OrliczFunction")

    @property
    def is_norm(self):
        return self.f.convex

    def _norm(self, idx, mod):
        u, cnt = np.unique(mod, return_counts=True)
        return float(luxemburg_batch(self.f, u[None, :], cnt)[0])

    def _norm_batch(self, idx, M):
        return luxemburg_batch(self.f, M)

    def _weights(self, idx, mod, target=None):
        N = self._norm(idx, mod)
        t = mod / N
        w = self.f.derivative(t) * t
        return N, w / w.sum(), (1.0 if self.f.convex else math.nan)

    def to_json(self):
        return self.f.to_json()


@dataclass(frozen=True)
class Tsirelson(SpaceSpec):
    """Figiel-Johnson Tsirelson norm with constant 1/2."""

    cap: int = 24
    kind = "tsirelson"

    def _norm(self, idx, mod):
        return _tsirelson_table(idx, mod, self.cap)[0][0][-1]

    def _weights(self, idx, mod, target=None):
        N, ch = _tsirelson_table(idx, mod, self.cap)
        w = np.zeros(mod.size)
        _tsirelson_backtrack(N, ch, 0, mod.size - 1, 1.0, w)
        return N[0][-1], w / w.sum(), 1.0

    def to_json(self):
        return {"kind": "tsirelson"} if self.cap == 24 else {"kind": "tsirelson", "cap": self.cap}


@dataclass(frozen=True)
class PConvexified(SpaceSpec):
    """||x|| = ||x|^p|_base^(1/p)."""

    base: SpaceSpec
    p: float
    kind = "pconvex"

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p, strict=True))
        if math.isinf(self.p):
            raise ConfigurationError("convexification exponent must be finite")

    @property
    def is_norm(self):
        return self.base.is_norm

    def _norm(self, idx, mod):
        return self.base._norm(idx, mod ** self.p) ** (1.0 / self.p)

    def _norm_batch(self, idx, M):
        return self.base._norm_batch(idx, M ** self.p) ** (1.0 / self.p)

    def _weights(self, idx, mod, target=None):
        Nb, w, s = self.base._weights(idx, mod ** self.p,
                                      None if target is None else target)
        return Nb ** (1.0 / self.p), w, s ** (1.0 / self.p)

    def to_json(self):
        return {"kind": "pconvex", "p": self.p, "base": self.base.to_json()}


@dataclass(frozen=True)
class PConcavified(SpaceSpec):
    """||x|| = ||x|^(1/p)|_base^p; a norm only when the base is p-convex."""

    base: SpaceSpec
    p: float
    kind = "pconcave"

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p, strict=True))
        if math.isinf(self.p):
            raise ConfigurationError("concavification exponent must be finite")

    def _reduced(self):
        # cases where the concavification is again a known normed space
        b = self.base
        if isinstance(b, PConvexified) and b.p == self.p:
            return b.base
        if isinstance(b, Lp) and b.p >= self.p:
            return Lp(b.p / self.p)
        if isinstance(b, WeightedLp) and b.p >= self.p:
            return WeightedLp(b.p / self.p, b.weights)
        return None

    @property
    def is_norm(self):
        r = self._reduced()
        return r is not None and r.is_norm

    def _norm(self, idx, mod):
        return self.base._norm(idx, mod ** (1.0 / self.p)) ** self.p

    def _norm_batch(self, idx, M):
        return self.base._norm_batch(idx, M ** (1.0 / self.p)) ** self.p

    def _weights(self, idx, mod, target=None):
        r = self._reduced()
        if r is not None:
            return r._weights(idx, mod, target)
        Nb, w, _ = self.base._weights(idx, mod ** (1.0 / self.p), target)
        return Nb ** self.p, w, math.nan

    def to_json(self):
        return {"kind": "pconcave", "p": self.p, "base": self.base.to_json()}


# Tsirelson interval dynamic program -----------------------------------------

def _tsirelson_table(idx, mod, cap):
    """Exact Tsirelson norms of x restricted to every interval of its support.

    Returns (N, choice) with N[a][b] the norm of x on support positions a..b
    and choice[a][b] either ("sup", j) or ("fam", [(a_k, b_k), ...]).

    By 1-unconditionality only families of contiguous blocks of support
    positions matter, and a family whose first block starts at position j may
    have at most idx[j] blocks. The recursion is on strictly smaller
    intervals, so a single sweep gives the fixed point.
    """
    m = mod.size
    if m > cap:
        raise SizeError(f"Tsirelson support {m} exceeds cap {cap}")
    idx = [min(int(i), m) for i in idx]
    mod = [float(v) for v in mod]
    NEG = -math.inf
    N = [[0.0] * m for _ in range(m)]
    choice = [[None] * m for _ in range(m)]
    for b in range(m):
        # P[j][k]: best total of <= k contiguous blocks exactly covering j..b;
        # Pe[j][k] is the end of the first block, or -1 when inherited from k-1
        P = [[NEG] * (m + 1) for _ in range(m + 1)]
        Pe = [[-1] * (m + 1) for _ in range(m + 1)]
        P[b + 1] = [0.0] * (m + 1)
        for a in range(b, -1, -1):
            best, fam = NEG, None
            k = idx[a]
            if k >= 2:
                # first block a..e is a proper sub-interval
                for e in range(a, b):
                    v = N[a][e] + P[e + 1][k - 1]
                    if v > best:
                        best, fam = v, (a, e, k - 1)
            for j in range(a + 1, b + 1):
                v = P[j][idx[j]]
                if v > best:
                    best, fam = v, (j, None, idx[j])
            sup_j = max(range(a, b + 1), key=mod.__getitem__)
            if fam is not None and 0.5 * best > mod[sup_j]:
                N[a][b] = 0.5 * best
                j, e, kk = fam
                if e is None:
                    choice[a][b] = ("fam", _blocks(Pe, j, kk, b))
                else:
                    choice[a][b] = ("fam", [(a, e)] + _blocks(Pe, e + 1, kk, b))
            else:
                N[a][b] = mod[sup_j]
                choice[a][b] = ("sup", sup_j)
            for k in range(1, m + 1):
                bv, be = P[a][k - 1], -1
                for e in range(a, b + 1):
                    v = N[a][e] + P[e + 1][k - 1]
                    if v > bv:
                        bv, be = v, e
                P[a][k], Pe[a][k] = bv, be
    return N, choice


def _blocks(Pe, j, k, b):
    """Blocks realizing P[j][k] for the current right end b."""
    out = []
    while j <= b:
        while Pe[j][k] == -1:
            k -= 1
        e = Pe[j][k]
        out.append((j, e))
        j, k = e + 1, k - 1
    return out


def _tsirelson_backtrack(N, choice, a, b, scale, w):
    kind, data = choice[a][b]
    if kind == "sup":
        w[data] += scale
        return
    total = N[a][b]
    for (s, e) in data:
        _tsirelson_backtrack(N, choice, s, e, scale * 0.5 * N[s][e] / total, w)


# public API -----------------------------------------------------------------

def _split(x: SparseVector):
    if not isinstance(x, SparseVector):
        raise InputError("expected a SparseVector")
    return x.idx, np.abs(x.val)


def norm(space: SpaceSpec, x: SparseVector) -> float:
    """Norm of ``x`` in ``space``; depends only on the moduli of x."""
    if not isinstance(space, SpaceSpec):
        raise ConfigurationError("not a SpaceSpec")
    idx, mod = _split(x)
    if mod.size == 0:
        return 0.0
    return float(space._norm(idx, mod))


def norm_batch(space: SpaceSpec, idx, M) -> np.ndarray:
    """Norms of the rows of ``M`` (moduli on the common indices ``idx``)."""
    M = np.atleast_2d(np.abs(np.asarray(M, dtype=float)))
    return np.asarray(space._norm_batch(np.asarray(idx, dtype=np.int64), M), dtype=float)


def norm_weights(space: SpaceSpec, idx, a, target=None):
    """(||a||, w, slack) for a positive vector ``a`` on indices ``idx``.

    ``target`` breaks ties for sup-type norms: weights on the argmax set are
    taken proportional to it.
    """
    a = np.asarray(a, dtype=float)
    if a.size == 0 or not np.all(a > 0):
        raise InputError("weights need a strictly positive vector")
    return space._weights(np.asarray(idx, dtype=np.int64), a,
                          None if target is None else np.asarray(target, float))


def tsirelson_norm(x: SparseVector, tol: float = 1e-12, cap: int = 24) -> float:
    """Tsirelson norm; the interval recursion is exact so ``tol`` only has to be positive."""
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    return norm(Tsirelson(cap), x)


def dual_norm_lower(space: SpaceSpec, x: SparseVector, budget: int = 100,
                    seed: int = 0, refine_rounds: int = 2) -> float:
    """Certified lower bound of sup{|<x,y>| : ||y|| <= 1, supp y within supp x}.

    Search directions come in a fixed order (closed-form power candidates,
    coordinate vectors, then seeded random points); each is refined by a
    multiplicative coordinate search that does not depend on ``budget``, so
    the result is nondecreasing in ``budget``.
    """
    if budget < 1:
        raise ConfigurationError("budget must be >= 1")
    idx, mod = _split(x)
    m = mod.size
    if m == 0:
        return 0.0

    def value(b):
        nb = space._norm(idx, b)
        return float(mod @ b) / nb if nb > 0 else 0.0

    best = 0.0
    for d in _directions(mod, budget, seed):
        b = d.copy()
        v = value(b)
        for step in (1.0, 0.25, 0.05)[:refine_rounds + 1]:
            improved = True
            while improved:
                improved = False
                for i in range(m):
                    for fac in (1 + step, 1 / (1 + step)):
                        trial = b.copy()
                        trial[i] *= fac
                        tv = value(trial)
                        if tv > v * (1 + 1e-15):
                            b, v, improved = trial, tv, True
        best = max(best, v)
    return best


def _directions(mod, budget, seed):
    m = mod.size
    fixed = [mod.copy(), np.ones(m)]
    for q in (0.5, 2.0, 3.0):
        fixed.append(mod ** q)
    for i in range(m):
        e = np.full(m, 1e-300)
        e[i] = 1.0
        fixed.append(e)
    rng = np.random.default_rng(seed)
    count = 0
    for d in fixed:
        if count == budget:
            return
        count += 1
        yield d
    while count < budget:
        count += 1
        yield rng.exponential(size=m) * mod ** rng.uniform(0, 2)


# JSON ----------------------------------------------------------------------

def space_to_json(space: SpaceSpec) -> dict:
    return space.to_json()


def space_from_json(obj) -> SpaceSpec:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad space JSON: {exc}") from None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigurationError("space JSON needs a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "lp":
            return Lp(obj["p"])
        if kind == "weighted_lp":
            return WeightedLp(obj["p"], tuple(obj["weights"]))
        if kind == "orlicz":
            return Orlicz(orlicz_from_json(obj))
        if kind == "tsirelson":
            return Tsirelson(int(obj.get("cap", 24)))
        if kind == "pconvex":
            return PConvexified(space_from_json(obj["base"]), obj["p"])
        if kind == "pconcave":
            return PConcavified(space_from_json(obj["base"]), obj["p"])
        if kind == "calderon":
            from .factorization import CalderonSpace, couple_from_json
            return CalderonSpace(couple_from_json(obj["couple"]))
    except KeyError as exc:
        raise ConfigurationError(f"space {kind!r} missing field {exc}") from None
    raise ConfigurationError(f"unknown space kind {kind!r}")
