"""Verification suites and experiment reports.

Each suite turns one identity or inequality into a :class:`CheckRecord`
with a residual, a tolerance and ``passed = residual <= tolerance``.
"""
from __future__ import annotations

import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import PreconditionError
from .frames import DualPair, Frame, analysis, reconstruct, verify_dual
from .gallery import RNG_ALGORITHM
from .gram import (
    closedness_check,
    cross_gram,
    extremal_probe,
    fixed_point_residual,
    gram_opnorm_linf_w,
    l1_majorant,
    partial_sum_lift,
    psi_coefficient_bound,
    verify_projection_identity,
)
from .hilbert import linf_w_norm
from .serialize import SCHEMA_VERSION, digest
from .topology import TestSet, trace_convergence

DEFAULT_TOLERANCES = {
    "residual": 1e-10,  # relative residual of exact identities
    "projection": 1e-9,  # idempotency and G C = C
    "rank": 1e-8,  # rank thresholds and principal angles
    "exact": 1e-12,  # closed-form equalities such as the row-sum norm
}

# check id -> statement it exercises
TAGS = {
    "reconstruction": "frame reconstruction: f = sum <f, dual_k> psi_k",
    "range_identity": "cross Gram matrix restricted to the range of C_dual is the identity",
    "fixed_points": "fixed points of G lie in the range of C_dual; C_dual is an isometric isomorphism onto them",
    "opnorm_exact": "plumbing",
    "psi_in_coorbit": "each psi_l lies in the weighted co-orbit space with norm <= w(l) ||G||",
    "l1_domination": "row l1 sums are dominated by w(k)^-1 ||G||",
    "partial_sum_lift": "nested partial sums of a fixed point are norm bounded and Cauchy",
    "closed_subspace": "the fixed-point set is a closed subspace",
    "norm_implies_weak_star": "norm convergence implies weak* convergence",
}
SUITES = tuple(TAGS)


@dataclass
class CheckRecord:
    check: str
    tag: str
    frame: str
    weight: str
    inputs_digest: str
    residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)


def _record(check, pair_label, w, inputs_digest, residual, tol, **details):
    residual = float(residual)
    return CheckRecord(
        check=check,
        tag=TAGS[check],
        frame=pair_label,
        weight=w.label,
        inputs_digest=inputs_digest,
        residual=residual,
        tolerance=float(tol),
        passed=bool(residual <= tol),
        details=details,
    )


def random_signals(rng, d, count) -> np.ndarray:
    return rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))


def perturb_dual(pair: DualPair, eps: float) -> DualPair:
    """Corrupt the first dual vector by ``eps * psi_0 / ||psi_0||``.

    The reconstruction residual ``||D_primal C_dual - I||`` becomes exactly
    ``eps * ||psi_0||``.
    """
    Q = np.array(pair.dual.vectors)
    p0 = pair.primal.vectors[:, 0]
    Q[:, 0] += eps * p0 / np.linalg.norm(p0)
    return DualPair(pair.primal, Frame(Q, label=f"perturbed({pair.dual.label}, {eps})"))


def check_reconstruction(pair, w, rng, samples, tol, key):
    F = random_signals(rng, pair.d, samples)
    rel = max(np.linalg.norm(reconstruct(pair, f) - f) / np.linalg.norm(f) for f in F)
    op = verify_dual(pair, tol)
    return _record("reconstruction", pair.primal.label, w, key, rel, tol,
                   operator_residual=op.residual, samples=samples)


def check_range_identity(pair, w, rng, samples, tol, key):
    G = cross_gram(pair, w)
    F = random_signals(rng, pair.d, samples)
    worst = 0.0
    for f in F:
        a = analysis(pair.dual, f)
        worst = max(worst, linf_w_norm(G.apply(a) - a, w) / linf_w_norm(a, w))
    return _record("range_identity", pair.primal.label, w, key, worst, tol, samples=samples)


def check_fixed_points(pair, w, tols, key):
    rep = verify_projection_identity(pair, w, tol=tols["projection"], angle_tol=tols["rank"],
                                     rank_rtol=tols["rank"])
    # residual is the worst ratio measured/tolerance over the three
    # continuous checks; a wrong rank or eigenspace dimension is infinite
    structural = rep.rank == rep.d and rep.eigenspace_dim == rep.d
    ratio = max(rep.idempotency_residual / tols["projection"],
                rep.range_residual / tols["projection"],
                rep.max_angle / tols["rank"]) if structural else np.inf
    return _record("fixed_points", pair.primal.label, w, key, ratio, 1.0,
                   rank=rep.rank, eigenspace_dim=rep.eigenspace_dim, d=rep.d,
                   max_angle=rep.max_angle, idempotency=rep.idempotency_residual,
                   range_residual=rep.range_residual, checks=rep.checks,
                   warnings=list(rep.warnings))


def check_opnorm(pair, w, rng, probes, tol, key):
    G = cross_gram(pair, w)
    norm = gram_opnorm_linf_w(G)
    attained = max(linf_w_norm(G.apply(extremal_probe(G, k)), w) for k in range(G.M))
    gap = abs(attained - norm) / norm
    A = random_signals(rng, G.M, probes)
    A /= np.max(np.abs(A) * w.values, axis=1)[:, None]
    probe_max = float(np.max(np.max(np.abs(A @ G.entries.T) * w.values, axis=1)))
    excess = max(0.0, probe_max / norm - 1.0)
    return _record("opnorm_exact", pair.primal.label, w, key, max(gap, excess), tol,
                   opnorm=norm, attained=attained, probe_max=probe_max, probes=probes)


def check_psi_bound(pair, w, tol, key):
    rep = psi_coefficient_bound(pair, w)
    excess = float(np.max(rep.lhs / rep.rhs - 1.0))
    return _record("psi_in_coorbit", pair.primal.label, w, key, max(0.0, excess), tol,
                   min_margin=float(np.min(rep.margin)))


def check_l1_domination(pair, w, tol, key):
    G = cross_gram(pair, w)
    norm = gram_opnorm_linf_w(G)
    totals = np.array([l1_majorant(pair, w, k).total for k in range(pair.M)])
    bounds = norm / w.values
    excess = float(np.max(totals / bounds - 1.0))
    k_star = int(np.argmax(G.row_sums))
    equality_gap = abs(totals[k_star] / bounds[k_star] - 1.0)
    return _record("l1_domination", pair.primal.label, w, key, max(excess, 0.0, equality_gap), tol,
                   equality_row=k_star, equality_gap=equality_gap)


def check_lift(pair, w, rng, tol, key):
    f = random_signals(rng, pair.d, 1)[0]
    alpha = analysis(pair.dual, f)
    try:
        trace = partial_sum_lift(pair, w, alpha, tol=tol)
    except PreconditionError as exc:
        G = cross_gram(pair, w)
        resid = fixed_point_residual(G, alpha) / linf_w_norm(alpha, w)
        return _record("partial_sum_lift", pair.primal.label, w, key, resid, tol, error=str(exc))
    scale = max(1.0, trace.bound)
    residual = max(trace.cauchy[-1], trace.final_residual) / scale
    if not (trace.bounded and trace.cauchy_dominated and trace.tail_monotone):
        residual = np.inf
    return _record("partial_sum_lift", pair.primal.label, w, key, residual, tol,
                   bound=trace.bound, max_norm=float(np.max(trace.norms)),
                   reconstruction_error=float(np.linalg.norm(trace.vectors[-1] - f) / np.linalg.norm(f)))


def check_closedness(pair, w, rng, tol, key):
    rep = closedness_check(pair, w, rng, tol=tol)
    residual = max(float(np.max(rep.member_residuals)), rep.limit_residual)
    return _record("closed_subspace", pair.primal.label, w, key, residual, tol,
                   limit_residual=rep.limit_residual)


def check_weak_star(pair, w, rng, tol, key):
    f, g = random_signals(rng, pair.d, 2)
    seq = [f + g / n for n in range(1, 21)]
    tests = TestSet.dual_frame(pair.dual)
    trace = trace_convergence(seq, f, tests, pair, w)
    bound = trace.coorbit[:, None] / w.values[None, :]
    excess = float(np.max(trace.coefficients - bound)) / max(1e-300, float(np.max(bound)))
    return _record("norm_implies_weak_star", pair.primal.label, w, key, max(0.0, excess), tol,
                   final_coorbit=float(trace.coorbit[-1]))


def run_pair_suites(pair: DualPair, weights, seed, index, suites=SUITES, tolerances=None,
                    samples=100, probes=1000):
    """All requested checks for one pair, each weight in turn.

    Randomness is drawn from ``default_rng([seed, index, weight_index])`` so
    results do not depend on scheduling.
    """
    tols = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    records = []
    key = digest({"primal": digest(pair.primal.vectors), "dual": digest(pair.dual.vectors)})
    for j, wspec in enumerate(weights):
        w = wspec.materialize(pair.M) if hasattr(wspec, "materialize") else wspec
        rng = np.random.default_rng([seed, index, j])
        wkey = digest({"pair": key, "weight": w.label})
        for name in suites:
            if name == "reconstruction":
                records.append(check_reconstruction(pair, w, rng, samples, tols["residual"], wkey))
            elif name == "range_identity":
                records.append(check_range_identity(pair, w, rng, samples, tols["residual"], wkey))
            elif name == "fixed_points":
                records.append(check_fixed_points(pair, w, tols, wkey))
            elif name == "opnorm_exact":
                records.append(check_opnorm(pair, w, rng, probes, tols["exact"], wkey))
            elif name == "psi_in_coorbit":
                records.append(check_psi_bound(pair, w, tols["exact"], wkey))
            elif name == "l1_domination":
                records.append(check_l1_domination(pair, w, tols["exact"], wkey))
            elif name == "partial_sum_lift":
                records.append(check_lift(pair, w, rng, tols["projection"], wkey))
            elif name == "closed_subspace":
                records.append(check_closedness(pair, w, rng, tols["projection"], wkey))
            elif name == "norm_implies_weak_star":
                records.append(check_weak_star(pair, w, rng, tols["exact"], wkey))
            else:
                raise ValueError(f"unknown suite {name!r}")
    return records


def environment() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
        "rng": RNG_ALGORITHM,
    }


@dataclass
class ExperimentReport:
    seed: int
    records: list
    config: dict = field(default_factory=dict)
    environment: dict = field(default_factory=environment)
    timestamp: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "report",
            "seed": self.seed,
            "passed": self.passed,
            "config": self.config,
            "environment": self.environment,
            "timestamp": self.timestamp,
            "records": [_jsonable(asdict(r)) for r in self.records],
        }

    @classmethod
    def from_doc(cls, doc) -> "ExperimentReport":
        recs = [CheckRecord(**{**r, "residual": float(r["residual"])}) for r in doc["records"]]
        return cls(seed=doc["seed"], records=recs, config=doc.get("config", {}),
                   environment=doc.get("environment", {}), timestamp=doc.get("timestamp", {}))

    def summary_lines(self):
        for r in self.records:
            status = "PASS" if r.passed else "FAIL"
            yield f"{status} {r.check:<24} {r.frame[:48]:<48} {r.weight:<24} residual={r.residual:.3e} tol={r.tolerance:.1e}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no infinity; failed structural checks are stored as a string
        return x if np.isfinite(x) else repr(x)
    return obj


def run_verification(pairs, weights, seed=0, suites=SUITES, tolerances=None, samples=100,
                     probes=1000, jobs=1, config=None) -> ExperimentReport:
    """Run suites over `pairs` (possibly in parallel) and merge in input order."""
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()

    def work(item):
        i, pair = item
        return run_pair_suites(pair, weights, seed, i, suites, tolerances, samples, probes)

    items = list(enumerate(pairs))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(work, items))
    else:
        chunks = [work(item) for item in items]
    records = [r for chunk in chunks for r in chunk]
    return ExperimentReport(
        seed=seed,
        records=records,
        config=config or {},
        timestamp={"started": started.isoformat(), "elapsed_s": time.perf_counter() - t0},
    )
