"""Cross Gram matrices, weighted sup-norm operator norms and fixed points.

For a dual pair ``(psi, psi~)`` the cross Gram matrix is
``G[k, l] = <psi_l, psi~_k>``, i.e. ``G = C_dual @ D_primal``.  In finite
dimensions ``G`` is an oblique projection of rank ``d`` onto the range of
``C_dual``, and the weighted co-orbit norm of ``f`` is
``||C_dual f||_{l^inf_w}``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import ConsistencyError, DimensionError, PreconditionError
from .frames import DualPair, analysis, analysis_matrix, opnorm2
from .hilbert import Weight, as_vector, linf_w_norm

RANK_RTOL = 1e-8
SPREAD_WARNING = 1e8


class CrossGram:
    """Cross Gram matrix of a dual pair with cached weighted row sums.

    Attributes
    ----------
    entries : ndarray, shape (M, M)
        ``entries[k, l] = <psi_l, psi~_k>``.
    weight : Weight
    row_sums : ndarray, shape (M,)
        ``w(k) * sum_l |G[k, l]| / w(l)``.
    """

    __slots__ = ("entries", "weight", "row_sums")

    def __init__(self, entries, weight: Weight):
        G = np.array(entries, dtype=np.complex128)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionError(f"cross Gram matrix must be square, got {G.shape}")
        if G.shape[0] != len(weight):
            raise DimensionError(f"weight length {len(weight)} != Gram size {G.shape[0]}")
        rows = weight.values * (np.abs(G) @ weight.inverse)
        G.setflags(write=False)
        rows.setflags(write=False)
        object.__setattr__(self, "entries", G)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "row_sums", rows)

    def __setattr__(self, name, value):
        raise AttributeError("CrossGram is immutable")

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def opnorm(self) -> float:
        return gram_opnorm_linf_w(self)

    def apply(self, alpha) -> np.ndarray:
        alpha = as_vector(alpha, "alpha")
        if alpha.shape[0] != self.M:
            raise DimensionError(f"sequence length {alpha.shape[0]} != {self.M}")
        return self.entries @ alpha

    def reweighted(self, weight: Weight) -> "CrossGram":
        return CrossGram(self.entries, weight)

    def __repr__(self):
        return f"CrossGram(M={self.M}, weight={self.weight.label})"


def cross_gram(pair: DualPair, w: Weight) -> CrossGram:
    if len(w) != pair.M:
        raise DimensionError(f"weight length {len(w)} != frame size {pair.M}")
    G = pair.dual.vectors.conj().T @ pair.primal.vectors
    return CrossGram(G, w)


def gram_opnorm_linf_w(G: CrossGram) -> float:
    """Exact operator norm of ``G`` on the weighted sup-norm space.

    Equals ``sup_k w(k) sum_l |G[k, l]| / w(l)``, the largest weighted
    absolute row sum.
    """
    return float(np.max(G.row_sums))


def extremal_probe(G: CrossGram, k: int) -> np.ndarray:
    """Unit-norm sequence at which row ``k`` of ``G`` attains its row sum.

    ``alpha_l = sgn(conj(G[k, l])) / w(l)`` has ``||alpha||_{l^inf_w} = 1``
    and ``|(G alpha)_k| w(k) = row_sums[k]``.
    """
    row = G.entries[k]
    mag = np.abs(row)
    phase = np.ones_like(row)
    nz = mag > 0
    phase[nz] = row[nz].conj() / mag[nz]
    return phase * G.weight.inverse


def coorbit_norm(pair: DualPair, w: Weight, f) -> float:
    """``||C_dual f||_{l^inf_w}``."""
    return linf_w_norm(analysis(pair.dual, f), w)


def fixed_point_residual(G: CrossGram, alpha) -> float:
    """``||G alpha - alpha||_{l^inf_w}``."""
    alpha = as_vector(alpha, "alpha")
    return linf_w_norm(G.apply(alpha) - alpha, G.weight)


@dataclass(frozen=True)
class FixedPointSpace:
    """Orthonormal basis (``M x d``) of the range of ``C_dual``."""

    basis: np.ndarray

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    def project(self, alpha) -> np.ndarray:
        Q = self.basis
        return Q @ (Q.conj().T @ np.asarray(alpha, dtype=np.complex128))

    def distance(self, alpha) -> float:
        """Euclidean distance from `alpha` to the subspace."""
        alpha = np.asarray(alpha, dtype=np.complex128)
        return float(np.linalg.norm(alpha - self.project(alpha)))


def _column_space(A, rtol=RANK_RTOL):
    U, s, _ = la.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    r = int(np.sum(s > rtol * s[0]))
    return U[:, :r]


def numerical_rank(A, rtol=RANK_RTOL) -> int:
    s = la.svdvals(np.asarray(A))
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def range_basis(pair: DualPair, rtol=RANK_RTOL) -> FixedPointSpace:
    """Orthonormal basis of the column space of the ``M x d`` matrix of ``C_dual``."""
    Q = _column_space(analysis_matrix(pair.dual), rtol)
    if Q.shape[1] != pair.d:
        raise ConsistencyError(
            f"analysis operator has rank {Q.shape[1]}, expected {pair.d}"
        )
    return FixedPointSpace(Q)


def fixed_point_eigenspace(G: CrossGram, rtol=RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of ``ker(G - I)``, the eigenvalue-1 eigenspace.

    ``G`` is not Hermitian, so the kernel is read off the right singular
    vectors of ``G - I`` whose singular values fall below
    ``rtol * max(1, sigma_max)``.
    """
    A = G.entries - np.eye(G.M)
    _, s, Vh = la.svd(A)
    cutoff = rtol * max(1.0, s[0] if s.size else 0.0)
    null = s <= cutoff
    return Vh[null].conj().T


def principal_angles(A, B) -> np.ndarray:
    """Principal angles (radians) between the column spans of `A` and `B`."""
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.array([np.pi / 2])
    return la.subspace_angles(A, B)


@dataclass(frozen=True)
class ProjectionReport:
    range_residual: float  # ||G C - C|| / (1 + ||C||)
    idempotency_residual: float  # ||G^2 - G||_F / (1 + ||G||_F)
    rank: int
    eigenspace_dim: int
    max_angle: float
    d: int
    tol: float
    angle_tol: float
    warnings: tuple = field(default_factory=tuple)

    @property
    def checks(self) -> dict:
        return {
            "range_identity": self.range_residual <= self.tol,
            "idempotent": self.idempotency_residual <= self.tol,
            "rank": self.rank == self.d,
            "eigenspace": self.eigenspace_dim == self.d and self.max_angle <= self.angle_tol,
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def weight_warnings(w: Weight) -> tuple:
    if w.spread > SPREAD_WARNING:
        msg = f"weight spread {w.spread:.2e} exceeds {SPREAD_WARNING:.0e}; weighted sups are float-dominated"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        return (msg,)
    return ()


def verify_projection_identity(pair: DualPair, w: Weight, tol=1e-9, angle_tol=RANK_RTOL,
                               rank_rtol=RANK_RTOL) -> ProjectionReport:
    """Check that ``G`` acts as the identity on, and only on, ``R(C_dual)``.

    Four checks: ``G C = C``, ``G^2 = G``, ``rank G = d`` and that the
    eigenvalue-1 eigenspace of ``G`` coincides with ``R(C_dual)``.
    """
    G = cross_gram(pair, w)
    C = analysis_matrix(pair.dual)
    Gm = G.entries
    range_res = opnorm2(Gm @ C - C) / (1.0 + opnorm2(C))
    idem = np.linalg.norm(Gm @ Gm - Gm) / (1.0 + np.linalg.norm(Gm))
    rank = numerical_rank(Gm, rank_rtol)
    eig = fixed_point_eigenspace(G, rank_rtol)
    Q = _column_space(C, rank_rtol)
    angle = float(np.max(principal_angles(eig, Q))) if eig.shape[1] == Q.shape[1] else float(np.pi / 2)
    return ProjectionReport(
        range_residual=float(range_res),
        idempotency_residual=float(idem),
        rank=rank,
        eigenspace_dim=eig.shape[1],
        max_angle=angle,
        d=pair.d,
        tol=tol,
        angle_tol=angle_tol,
        warnings=weight_warnings(w),
    )


@dataclass(frozen=True)
class CoefficientBoundReport:
    """Per-index comparison ``sup_k |G[k,l]| w(k)  <=  w(l) ||G||``."""

    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def margin(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return bool(np.all(self.lhs <= self.rhs * (1 + 1e-12)))


def psi_coefficient_bound(pair: DualPair, w: Weight) -> CoefficientBoundReport:
    """Bound the weighted sup norm of ``C_dual psi_l`` for each frame vector."""
    G = cross_gram(pair, w)
    # column l of G is C_dual psi_l
    lhs = np.max(np.abs(G.entries) * w.values[:, None], axis=0)
    rhs = w.values * gram_opnorm_linf_w(G)
    return CoefficientBoundReport(lhs=lhs, rhs=rhs)


@dataclass(frozen=True)
class MajorantReport:
    sequence: np.ndarray  # m_l = bound * |G[k, l]| / w(l)
    total: float
    bound: float  # norm_bound * ||G|| / w(k)

    @property
    def passed(self) -> bool:
        return self.total <= self.bound * (1 + 1e-12)

    def __iter__(self):
        return iter((self.sequence, self.total))


def l1_majorant(pair: DualPair, w: Weight, k: int, norm_bound: float = 1.0) -> MajorantReport:
    """Summable majorant of ``(<f_n, psi~_l> <psi_l, psi~_k>)_l`` for a fixed row `k`.

    Valid for every ``f_n`` with co-orbit norm at most `norm_bound`.
    """
    if not 0 <= k < pair.M:
        raise IndexError(f"row index {k} out of range for M={pair.M}")
    G = cross_gram(pair, w)
    m = norm_bound * np.abs(G.entries[k]) * w.inverse
    total = float(np.sum(m))
    bound = float(norm_bound * gram_opnorm_linf_w(G) / w.values[k])
    return MajorantReport(sequence=m, total=total, bound=bound)


def prefix_nesting(M: int) -> list:
    """Default nesting ``{0}, {0, 1}, ..., {0, ..., M-1}``."""
    return [np.arange(n + 1) for n in range(M)]


def _validate_nesting(nesting, M):
    sets = [np.unique(np.asarray(F, dtype=int)) for F in nesting]
    if not sets:
        raise PreconditionError("nesting must be non-empty")
    for a, b in zip(sets, sets[1:]):
        if not np.all(np.isin(a, b)):
            raise PreconditionError("nesting is not increasing")
    for F in sets:
        if F.size and (F[0] < 0 or F[-1] >= M):
            raise PreconditionError(f"nesting index out of range for M={M}")
    if sets[-1].size != M:
        raise PreconditionError("union of nesting must be the full index set")
    return sets


@dataclass(frozen=True)
class LiftTrace:
    """Partial-sum lift of a fixed point ``alpha`` back to C^d.

    ``vectors[n]`` is ``f_n = sum_{l in F_n} alpha_l psi_l``.
    """

    vectors: np.ndarray  # (levels, d)
    norms: np.ndarray  # co-orbit norm of f_n
    bound: float  # ||alpha||_{l^inf_w} * ||G||
    cauchy: np.ndarray  # ||C_dual (f_final - f_n)||_{l^inf_w}
    tail_bound: np.ndarray  # ||alpha|| * sup_k w(k) sum_{l not in F_n} |G[k,l]| / w(l)
    final_residual: float  # ||C_dual f_final - alpha||_{l^inf_w}
    tol: float

    @property
    def bounded(self) -> bool:
        return bool(np.all(self.norms <= self.bound * (1 + 1e-12) + 1e-300))

    @property
    def cauchy_dominated(self) -> bool:
        scale = max(1.0, self.bound)
        return bool(np.all(self.cauchy <= self.tail_bound + self.tol * scale))

    @property
    def tail_monotone(self) -> bool:
        return bool(np.all(np.diff(self.tail_bound) <= 1e-12 * max(1.0, self.bound)))

    @property
    def passed(self) -> bool:
        scale = max(1.0, self.bound)
        return (self.bounded and self.cauchy_dominated and self.tail_monotone
                and self.cauchy[-1] <= self.tol * scale
                and self.final_residual <= self.tol * scale)


def partial_sum_lift(pair: DualPair, w: Weight, alpha, nesting=None, tol=1e-9) -> LiftTrace:
    """Lift a fixed point of ``G`` to a vector via nested partial sums.

    Raises
    ------
    PreconditionError
        If `alpha` is not a fixed point of ``G`` or the nesting is invalid.
    """
    G = cross_gram(pair, w)
    alpha = as_vector(alpha, "alpha")
    if alpha.shape[0] != pair.M:
        raise DimensionError(f"sequence length {alpha.shape[0]} != {pair.M}")
    alpha_norm = linf_w_norm(alpha, w)
    resid = fixed_point_residual(G, alpha)
    if resid > tol * max(1.0, alpha_norm):
        raise PreconditionError(f"alpha is not a fixed point of G (residual {resid:.3e})")
    sets = _validate_nesting(prefix_nesting(pair.M) if nesting is None else nesting, pair.M)

    P = pair.primal.vectors
    C = analysis_matrix(pair.dual)
    weighted_abs = np.abs(G.entries) * w.inverse[None, :] * w.values[:, None]
    vecs = np.empty((len(sets), pair.d), dtype=np.complex128)
    tails = np.empty(len(sets))
    for n, F in enumerate(sets):
        vecs[n] = P[:, F] @ alpha[F]
        outside = np.ones(pair.M, dtype=bool)
        outside[F] = False
        tails[n] = alpha_norm * (np.max(weighted_abs[:, outside].sum(axis=1)) if outside.any() else 0.0)
    coeffs = vecs @ C.T  # row n is C_dual f_n
    norms = np.max(np.abs(coeffs) * w.values, axis=1)
    cauchy = np.max(np.abs(coeffs[-1] - coeffs) * w.values, axis=1)
    final = linf_w_norm(coeffs[-1] - alpha, w)
    return LiftTrace(
        vectors=vecs,
        norms=norms,
        bound=alpha_norm * gram_opnorm_linf_w(G),
        cauchy=cauchy,
        tail_bound=tails,
        final_residual=final,
        tol=tol,
    )


@dataclass(frozen=True)
class ClosednessReport:
    """Limits of convergent sequences of fixed points are fixed points."""

    member_residuals: np.ndarray
    distances: np.ndarray  # ||alpha^n - alpha||_{l^inf_w}
    limit_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.member_residuals <= self.tol) and self.limit_residual <= self.tol)


def closedness_check(pair: DualPair, w: Weight, rng=None, steps=20, tol=1e-9) -> ClosednessReport:
    """Apply ``G`` along ``alpha^n = C_dual(f + g / n) -> C_dual f``.

    Residuals are relative to the weighted norm of each sequence.
    """
    rng = np.random.default_rng(rng)
    G = cross_gram(pair, w)
    f = rng.standard_normal(pair.d) + 1j * rng.standard_normal(pair.d)
    g = rng.standard_normal(pair.d) + 1j * rng.standard_normal(pair.d)
    limit = analysis(pair.dual, f)
    members, dists = [], []
    for n in range(1, steps + 1):
        a = analysis(pair.dual, f + g / n)
        members.append(fixed_point_residual(G, a) / linf_w_norm(a, w))
        dists.append(linf_w_norm(a - limit, w))
    return ClosednessReport(
        member_residuals=np.array(members),
        distances=np.array(dists),
        limit_residual=fixed_point_residual(G, limit) / linf_w_norm(limit, w),
        tol=tol,
    )
