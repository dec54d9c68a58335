"""Finitely supported coordinate vectors.

Indices are positive integers (the natural basis e_1, e_2, ...). Entries are
stored as a sorted index array plus a value array; explicit zeros are dropped
on construction, so ``support`` is always the set of nonzero coordinates.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError


class SparseVector:
    __slots__ = ("idx", "val")

    def __init__(self, idx, val):
        idx = np.asarray(idx, dtype=np.int64).ravel()
        val = np.asarray(val).ravel()
        if idx.shape != val.shape:
            raise InputError("index and value arrays differ in length")
        if idx.size and idx.min() < 1:
            raise InputError("indices must be positive integers")
        if np.iscomplexobj(val):
            val = val.astype(np.complex128)
            if not np.any(val.imag):
                val = val.real.copy()
        else:
            val = val.astype(np.float64)
        if not np.all(np.isfinite(val)):
            raise InputError("entries must be finite")
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        if idx.size > 1 and np.any(np.diff(idx) == 0):
            # merge repeated indices by summation
            uniq, inv = np.unique(idx, return_inverse=True)
            acc = np.zeros(uniq.size, dtype=val.dtype)
            np.add.at(acc, inv, val)
            idx, val = uniq, acc
        keep = val != 0
        self.idx = idx[keep]
        self.val = val[keep]
        self.idx.flags.writeable = False
        self.val.flags.writeable = False

    # construction helpers -------------------------------------------------

    @classmethod
    def zero(cls) -> "SparseVector":
        return cls([], [])

    @classmethod
    def from_dense(cls, values: Iterable, start: int = 1) -> "SparseVector":
        values = np.asarray(list(values))
        return cls(np.arange(start, start + values.size), values)

    @classmethod
    def from_dict(cls, entries: Mapping) -> "SparseVector":
        keys = [int(k) for k in entries]
        return cls(keys, [entries[k] for k in entries])

    @classmethod
    def basis(cls, i: int, value=1.0) -> "SparseVector":
        return cls([i], [value])

    @classmethod
    def indicator(cls, start: int, stop: int, value=1.0) -> "SparseVector":
        """Constant ``value`` on indices ``start..stop`` inclusive."""
        idx = np.arange(start, stop + 1)
        return cls(idx, np.full(idx.size, value))

    # basic queries --------------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.idx.size)

    @property
    def support(self) -> frozenset:
        return frozenset(int(i) for i in self.idx)

    @property
    def is_zero(self) -> bool:
        return self.idx.size == 0

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.val)

    def modulus(self) -> np.ndarray:
        return np.abs(self.val)

    def abs(self) -> "SparseVector":
        return SparseVector(self.idx, np.abs(self.val))

    def sign(self) -> np.ndarray:
        """Unimodular phase of each stored entry."""
        return self.val / np.abs(self.val)

    def to_dense(self, length: int | None = None) -> np.ndarray:
        length = int(self.idx.max()) if length is None and self.nnz else (length or 0)
        out = np.zeros(length, dtype=self.val.dtype)
        out[self.idx - 1] = self.val
        return out

    def __getitem__(self, i: int):
        pos = np.searchsorted(self.idx, i)
        if pos < self.idx.size and self.idx[pos] == i:
            return self.val[pos]
        return 0.0

    def __len__(self) -> int:
        return self.nnz

    def __repr__(self) -> str:
        items = ", ".join(f"{i}: {v:g}" for i, v in zip(self.idx, self.val))
        return f"SparseVector({{{items}}})"

    # algebra --------------------------------------------------------------

    def _aligned(self, other: "SparseVector"):
        idx = np.union1d(self.idx, other.idx)
        dtype = np.result_type(self.val, other.val)
        a = np.zeros(idx.size, dtype=dtype)
        b = np.zeros(idx.size, dtype=dtype)
        a[np.searchsorted(idx, self.idx)] = self.val
        b[np.searchsorted(idx, other.idx)] = other.val
        return idx, a, b

    def __add__(self, other: "SparseVector") -> "SparseVector":
        idx, a, b = self._aligned(other)
        return SparseVector(idx, a + b)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        idx, a, b = self._aligned(other)
        return SparseVector(idx, a - b)

    def __neg__(self) -> "SparseVector":
        return SparseVector(self.idx, -self.val)

    def __mul__(self, scalar) -> "SparseVector":
        if isinstance(scalar, SparseVector):
            return NotImplemented
        return SparseVector(self.idx, self.val * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "SparseVector":
        return SparseVector(self.idx, self.val / scalar)

    def times(self, multiplier: np.ndarray) -> "SparseVector":
        """Multiply stored entries by an array aligned with ``idx``."""
        return SparseVector(self.idx, self.val * np.asarray(multiplier))

    def restrict(self, indices: Iterable[int]) -> "SparseVector":
        keep = np.isin(self.idx, np.fromiter(indices, dtype=np.int64))
        return SparseVector(self.idx[keep], self.val[keep])

    def shifted(self, offset: int) -> "SparseVector":
        return SparseVector(self.idx + offset, self.val)

    def allclose(self, other: "SparseVector", rtol=1e-9, atol=1e-12) -> bool:
        _, a, b = self._aligned(other)
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (np.array_equal(self.idx, other.idx)
                and np.array_equal(self.val, other.val))

    __hash__ = None

    # serialization --------------------------------------------------------

    def to_json(self, dense: bool = True):
        def enc(v):
            v = complex(v)
            return [v.real, v.imag] if self.is_complex else v.real

        if dense:
            return [enc(v) for v in self.to_dense()]
        return {str(int(i)): enc(v) for i, v in zip(self.idx, self.val)}


def disjoint(vectors: Iterable[SparseVector]) -> bool:
    seen: set = set()
    for v in vectors:
        s = v.support
        if seen & s:
            return False
        seen |= s
    return True


def total(vectors: Iterable[SparseVector]) -> SparseVector:
    out = SparseVector.zero()
    for v in vectors:
        out = out + v
    return out


def _decode_scalar(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InputError(f"complex entries must be [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    raise InputError(f"cannot interpret vector entry {v!r}")


def parse_vector(obj) -> SparseVector:
    """Decode a dense JSON array or a sparse ``{"i": value}`` map.

    Strings are parsed as JSON first. Complex entries are ``[re, im]`` pairs.
    """
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad vector JSON: {exc}") from None
    if isinstance(obj, Mapping):
        try:
            entries = {int(k): _decode_scalar(v) for k, v in obj.items()}
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad sparse vector: {exc}") from None
        return SparseVector.from_dict(entries)
    if isinstance(obj, (list, tuple)):
        return SparseVector.from_dense([_decode_scalar(v) for v in obj])
    raise InputError("vectors must be JSON arrays or index maps")
