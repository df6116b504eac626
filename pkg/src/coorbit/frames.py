"""Finite frames in C^d, their operators and dual frames.

A frame is stored as a ``d x M`` complex array whose columns are the frame
vectors.  In matrix form the analysis operator is ``C = Psi^H``, the
synthesis operator is ``D = Psi`` and the frame operator is
``S = Psi Psi^H``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import ConditioningError, ConsistencyError, DimensionError, FrameError
from .hilbert import as_vector

COND_LIMIT = 1e12


class Frame:
    """Finite frame for C^d given by the columns of a ``d x M`` array.

    Construction checks ``M >= d`` and that the columns span C^d, i.e. the
    smallest singular value is positive (relative to the largest).
    """

    __slots__ = ("vectors", "label")

    def __init__(self, vectors, label=None, rank_tol=1e-12):
        arr = np.array(vectors, dtype=np.complex128)
        if arr.ndim != 2:
            raise DimensionError(f"frame array must be 2-D, got shape {arr.shape}")
        d, M = arr.shape
        if d < 1 or M < d:
            raise FrameError(f"need M >= d >= 1, got d={d}, M={M}")
        if not np.all(np.isfinite(arr)):
            raise FrameError("frame has non-finite entries")
        sv = la.svdvals(arr)
        if sv[0] == 0 or sv[-1] <= rank_tol * sv[0]:
            raise FrameError(
                f"columns do not span C^{d}: smallest singular value {sv[-1]:.3e}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)
        object.__setattr__(self, "label", label or "frame")

    def __setattr__(self, name, value):
        raise AttributeError("Frame is immutable")

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    @property
    def M(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.M

    def __getitem__(self, k):
        return self.vectors[:, k]

    def __repr__(self):
        return f"Frame({self.label}, d={self.d}, M={self.M})"

    def __eq__(self, other):
        return isinstance(other, Frame) and np.array_equal(self.vectors, other.vectors)

    __hash__ = None


@dataclass(frozen=True)
class DualPair:
    """A frame together with a candidate dual.

    Only shapes are validated here; use :func:`verify_dual` or
    :meth:`validate` to check the reconstruction identity.  Keeping the
    pair constructible when reconstruction fails lets fault-injection runs
    report residuals instead of aborting.
    """

    primal: Frame
    dual: Frame

    def __post_init__(self):
        if self.primal.vectors.shape != self.dual.vectors.shape:
            raise DimensionError(
                f"primal {self.primal.vectors.shape} and dual "
                f"{self.dual.vectors.shape} shapes differ"
            )

    @classmethod
    def canonical(cls, frame: Frame) -> "DualPair":
        return cls(frame, canonical_dual(frame))

    @property
    def d(self) -> int:
        return self.primal.d

    @property
    def M(self) -> int:
        return self.primal.M

    def validate(self, tol=1e-10) -> "DualPair":
        report = verify_dual(self, tol)
        if not report.passed:
            raise ConsistencyError(
                f"not a dual pair: residuals {report.residual_primal:.3e}, "
                f"{report.residual_dual:.3e} exceed {tol:.1e}"
            )
        return self


def _check_signal(frame: Frame, f) -> np.ndarray:
    f = as_vector(f, "f")
    if f.shape[0] != frame.d:
        raise DimensionError(f"signal length {f.shape[0]} != frame dimension {frame.d}")
    return f


def analysis(frame: Frame, f) -> np.ndarray:
    """Coefficients ``(<f, psi_k>)_k``."""
    f = _check_signal(frame, f)
    return frame.vectors.conj().T @ f


def synthesis(frame: Frame, c) -> np.ndarray:
    """``sum_k c_k psi_k``."""
    c = as_vector(c, "c")
    if c.shape[0] != frame.M:
        raise DimensionError(f"coefficient length {c.shape[0]} != frame size {frame.M}")
    return frame.vectors @ c


def analysis_matrix(frame: Frame) -> np.ndarray:
    """``M x d`` matrix of the analysis operator."""
    return frame.vectors.conj().T


def frame_operator(frame: Frame) -> np.ndarray:
    """``S = sum_k psi_k psi_k^*``, Hermitian positive definite."""
    P = frame.vectors
    S = P @ P.conj().T
    return 0.5 * (S + S.conj().T)


def frame_bounds(frame: Frame) -> tuple[float, float]:
    """Optimal frame bounds ``(A, B)``: extreme eigenvalues of ``S``."""
    try:
        ev = la.eigvalsh(frame_operator(frame))
    except la.LinAlgError as exc:
        raise ArithmeticError(f"eigensolver failed: {exc}") from exc
    return float(ev[0]), float(ev[-1])


def canonical_dual(frame: Frame, cond_limit=COND_LIMIT) -> Frame:
    """Columns ``S^{-1} psi_k`` computed with a Cholesky solve.

    Raises
    ------
    ConditioningError
        If ``cond(S) > cond_limit``.
    """
    S = frame_operator(frame)
    A, B = frame_bounds(frame)
    if A <= 0 or B / A > cond_limit:
        cond = np.inf if A <= 0 else B / A
        raise ConditioningError(f"frame operator condition number {cond:.3e} exceeds {cond_limit:.0e}")
    factor = la.cho_factor(S, lower=True)
    return Frame(la.cho_solve(factor, frame.vectors), label=f"canonical_dual({frame.label})")


def opnorm2(A) -> float:
    """Spectral norm (largest singular value)."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(la.svdvals(A)[0])


@dataclass(frozen=True)
class DualReport:
    residual_primal: float  # ||D_primal C_dual - I||
    residual_dual: float  # ||D_dual C_primal - I||
    tol: float

    @property
    def residual(self) -> float:
        return max(self.residual_primal, self.residual_dual)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def verify_dual(pair: DualPair, tol=1e-10) -> DualReport:
    """Operator-norm residuals of both reconstruction formulas."""
    P, Q = pair.primal.vectors, pair.dual.vectors
    eye = np.eye(pair.d)
    return DualReport(
        residual_primal=opnorm2(P @ Q.conj().T - eye),
        residual_dual=opnorm2(Q @ P.conj().T - eye),
        tol=tol,
    )


def reconstruct(pair: DualPair, f) -> np.ndarray:
    """``D_primal C_dual f``."""
    return synthesis(pair.primal, analysis(pair.dual, f))
