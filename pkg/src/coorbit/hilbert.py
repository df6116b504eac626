"""Complex vectors, weights and weighted sequence norms.

Inner products are linear in the first argument and conjugate linear in
the second: ``inner(f, g) = sum_i f_i * conj(g_i)``.  The index set of
every sequence is ``{0, ..., M-1}``.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, WeightError

DEFAULT_RTOL = 1e-10


def as_vector(x, name="vector") -> np.ndarray:
    """Return `x` as a read-only 1-D complex128 array with finite entries."""
    arr = np.array(x, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must have length >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


class Weight:
    """Strictly positive weight on ``{0, ..., M-1}``.

    Parameters
    ----------
    values : array_like of float
        Weight values; every entry must be finite and > 0.
    label : str, optional
        Human-readable description carried into reports.
    """

    __slots__ = ("values", "label")

    def __init__(self, values, label=None):
        vals = np.array(values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise WeightError(f"weight must be a non-empty 1-D array, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise WeightError("weight values must be finite")
        if np.any(vals <= 0):
            bad = int(np.flatnonzero(vals <= 0)[0])
            raise WeightError(f"weight must be strictly positive; w({bad}) = {vals[bad]!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "label", label or "custom")

    def __setattr__(self, name, value):
        raise AttributeError("Weight is immutable")

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"Weight({self.label}, M={len(self)})"

    @classmethod
    def constant(cls, M, value=1.0):
        return cls(np.full(M, float(value)), label="constant" if value == 1.0 else f"constant({value})")

    @classmethod
    def polynomial(cls, M, s):
        """``w(k) = (1 + k)**s``."""
        return cls((1.0 + np.arange(M)) ** s, label=f"polynomial(s={s})")

    @classmethod
    def exponential(cls, M, r):
        """``w(k) = exp(r * k)``."""
        return cls(np.exp(r * np.arange(M)), label=f"exponential(r={r})")

    @property
    def inverse(self) -> np.ndarray:
        return 1.0 / self.values

    @property
    def spread(self) -> float:
        """Ratio ``max(w) / min(w)``; large values make weighted sups float-dominated."""
        return float(self.values.max() / self.values.min())


def _check_same_length(a, b, what):
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"{what}: length mismatch {a.shape[0]} != {b.shape[0]}")


def inner(f, g) -> complex:
    """Inner product ``<f, g> = sum_i f_i conj(g_i)``."""
    f = np.asarray(f, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    _check_same_length(f, g, "inner")
    return complex(np.vdot(g, f))


def norm2(f) -> float:
    return float(np.linalg.norm(np.asarray(f, dtype=np.complex128)))


def linf_norm(alpha) -> float:
    alpha = np.asarray(alpha)
    return float(np.max(np.abs(alpha))) if alpha.size else 0.0


def linf_w_norm(alpha, w: Weight) -> float:
    """Weighted sup norm ``sup_k |alpha_k| w(k)``."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    _check_same_length(alpha, w.values, "linf_w_norm")
    return float(np.max(np.abs(alpha) * w.values))


def l1_inv_w_norm(alpha, w: Weight) -> float:
    """``sum_l |alpha_l| / w(l)``, the pairing dual to the weighted sup norm."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    _check_same_length(alpha, w.values, "l1_inv_w_norm")
    return float(np.sum(np.abs(alpha) / w.values))


def close(a, b, rtol=DEFAULT_RTOL, atol=0.0) -> bool:
    """Scalar comparison with explicit absolute and relative tolerance."""
    return abs(a - b) <= atol + rtol * max(abs(a), abs(b))
