"""Seminorm convergence experiments for the weak* topology.

Convergence against the dual-frame span is measured with finitely many
seminorms ``|<f, v>|``, each ``v`` a finite combination of dual-frame
vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PreconditionError
from .frames import DualPair, Frame, analysis, synthesis
from .gram import cross_gram, gram_opnorm_linf_w, partial_sum_lift, prefix_nesting
from .hilbert import Weight, as_vector, inner, linf_w_norm


def seminorm(f, v) -> float:
    return abs(inner(f, v))


class TestSet:
    """Non-empty list of test vectors in C^d."""

    __test__ = False  # not a pytest class

    def __init__(self, vectors):
        vecs = [as_vector(v, "test vector") for v in vectors]
        if not vecs:
            raise PreconditionError("test set must be non-empty")
        d = vecs[0].shape[0]
        if any(v.shape[0] != d for v in vecs):
            raise DimensionError("test vectors have different lengths")
        self.vectors = np.array(vecs)

    @classmethod
    def dual_frame(cls, dual: Frame) -> "TestSet":
        """The dual-frame vectors themselves."""
        return cls(dual.vectors.T)

    @classmethod
    def from_combinations(cls, dual: Frame, coefficients) -> "TestSet":
        """Vectors ``D_dual c`` for each coefficient row ``c``."""
        return cls([synthesis(dual, c) for c in np.atleast_2d(coefficients)])

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]


@dataclass(frozen=True)
class ConvergenceTrace:
    """Seminorm and co-orbit-norm distances of ``f_n`` to a limit.

    ``seminorms[n, j] = |<f_n - f, v_j>|`` over the test set,
    ``coefficients[n, k] = |<f_n - f, psi~_k>|`` over the dual frame and
    ``coorbit[n] = ||f_n - f||`` in the co-orbit norm.
    """

    seminorms: np.ndarray
    coefficients: np.ndarray
    coorbit: np.ndarray
    weight: np.ndarray

    @property
    def dominated(self) -> bool:
        """``|<f_n - f, psi~_k>| <= ||f_n - f|| / w(k)`` for all n, k."""
        bound = self.coorbit[:, None] / self.weight[None, :]
        return bool(np.all(self.coefficients <= bound * (1 + 1e-12)))

    def rows(self):
        """Tabular records ``(n, k, seminorm, coorbit_norm)``; ``k`` indexes the test set."""
        for n in range(self.seminorms.shape[0]):
            for k in range(self.seminorms.shape[1]):
                yield n, k, float(self.seminorms[n, k]), float(self.coorbit[n])


def trace_convergence(seq, limit, tests: TestSet, pair: DualPair, w: Weight) -> ConvergenceTrace:
    limit = as_vector(limit, "limit")
    if limit.shape[0] != pair.d or tests.d != pair.d:
        raise DimensionError("sequence, limit, test set and frame dimensions disagree")
    diffs = []
    for f in seq:
        f = as_vector(f, "f_n")
        if f.shape[0] != pair.d:
            raise DimensionError(f"sequence element length {f.shape[0]} != {pair.d}")
        diffs.append(f - limit)
    diffs = np.array(diffs).reshape(-1, pair.d)
    semi = np.abs(diffs @ tests.vectors.conj().T)
    coeffs = np.abs(diffs @ pair.dual.vectors.conj())
    coorbit = np.max(coeffs * w.values, axis=1) if diffs.size else np.zeros(0)
    trace = ConvergenceTrace(seminorms=semi, coefficients=coeffs, coorbit=coorbit, weight=w.values)
    if not trace.dominated:
        raise AssertionError("seminorm exceeds co-orbit norm bound; weighted norm is inconsistent")
    return trace


@dataclass(frozen=True)
class CounterexampleReport:
    """Orthonormal basis sequence ``f_n = e_n``: weak* null, not norm null.

    ``seminorms[n, k] = |<e_n, e_k>|`` for ``k < K``; ``norms[n] = ||e_n||``
    in the co-orbit norm.
    """

    seminorms: np.ndarray
    norms: np.ndarray
    weight: np.ndarray

    @property
    def pointwise_null(self) -> bool:
        """For each fixed k, ``|<e_n, e_k>| = 0`` for every ``n != k``."""
        off = self.seminorms.copy()
        K = off.shape[1]
        off[np.arange(K), np.arange(K)] = 0.0
        return bool(np.all(off == 0.0))

    @property
    def norm_not_null(self) -> bool:
        return bool(np.all(self.norms == self.weight))

    def rows(self):
        for n in range(self.seminorms.shape[0]):
            for k in range(self.seminorms.shape[1]):
                yield n, k, float(self.seminorms[n, k]), float(self.norms[n])


def onb_counterexample(N: int, K: int | None = None, w: Weight | None = None) -> CounterexampleReport:
    """Run the orthonormal-basis sequence in C^N with ``psi = psi~ = ONB``."""
    if N < 2:
        raise PreconditionError("N must be >= 2")
    K = N if K is None else K
    if not 1 <= K <= N:
        raise PreconditionError(f"truncation K={K} must satisfy 1 <= K <= N={N}")
    w = Weight.constant(N) if w is None else w
    if len(w) != N:
        raise DimensionError(f"weight length {len(w)} != N={N}")
    onb = Frame(np.eye(N), label="onb")
    pair = DualPair(onb, onb)
    semi = np.empty((N, K))
    norms = np.empty(N)
    for n in range(N):
        e_n = onb[n]
        c = analysis(pair.dual, e_n)
        semi[n] = np.abs(c[:K])
        norms[n] = linf_w_norm(c, w)
    return CounterexampleReport(seminorms=semi, norms=norms, weight=w.values.copy())


@dataclass(frozen=True)
class ApproximationCertificate:
    """Norm-bounded partial sums converging to ``f`` against the dual frame."""

    norms: np.ndarray
    bound: float
    seminorm_errors: np.ndarray  # max_k |<f_n - f, psi~_k>| w(k) per level
    tol: float

    @property
    def uniform_bound(self) -> float:
        return float(np.max(self.norms))

    @property
    def passed(self) -> bool:
        scale = max(1.0, self.bound)
        return (self.uniform_bound <= self.bound * (1 + 1e-12) + 1e-300
                and self.seminorm_errors[-1] <= self.tol * scale)


def bounded_approximation_certificate(pair: DualPair, w: Weight, f, nesting=None,
                                      tol=1e-9) -> ApproximationCertificate:
    f = as_vector(f, "f")
    alpha = analysis(pair.dual, f)
    lift = partial_sum_lift(pair, w, alpha, nesting if nesting is not None else prefix_nesting(pair.M), tol)
    errs = np.max(np.abs((lift.vectors - f) @ pair.dual.vectors.conj()) * w.values, axis=1)
    return ApproximationCertificate(
        norms=lift.norms,
        bound=linf_w_norm(alpha, w) * gram_opnorm_linf_w(cross_gram(pair, w)),
        seminorm_errors=errs,
        tol=tol,
    )
