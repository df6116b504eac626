"""Frame and weight generators and localization diagnostics.

All random generation goes through ``numpy.random.default_rng(seed)``
(PCG64), so a spec plus seed reproduces a frame bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import FrameError, GenerationError, SpecError
from .frames import DualPair, Frame
from .gram import cross_gram
from .hilbert import Weight

RNG_ALGORITHM = "numpy.random.default_rng/PCG64"

FRAME_KINDS = ("onb", "random_tight", "riesz", "gabor_zn", "banded_decay", "repeated_onb", "mercedes")
WEIGHT_KINDS = ("constant", "polynomial", "exponential")

_DEFAULTS = {
    "onb": {"d": 4},
    "repeated_onb": {"d": 2, "copies": 2},
    "random_tight": {"d": 4, "M": 8, "seed": 0},
    "riesz": {"d": 8, "cond": 10.0, "seed": 0},
    "gabor_zn": {"n": 8, "a": 2, "b": 2, "seed": 0, "window": "gaussian"},
    "banded_decay": {"n": 32, "redundancy": 2, "rho": 0.5, "bandwidth": 8, "seed": 0},
    "mercedes": {},
}


@dataclass(frozen=True)
class FrameSpec:
    """Recipe for a generated frame: a kind plus kind-specific parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FRAME_KINDS:
            raise SpecError(f"unknown frame kind {self.kind!r}; expected one of {FRAME_KINDS}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise SpecError(f"{self.kind}: unknown parameters {sorted(unknown)}")
        merged = {**_DEFAULTS[self.kind], **self.params}
        object.__setattr__(self, "params", merged)
        _validate(self.kind, merged)

    @classmethod
    def from_dict(cls, doc: dict) -> "FrameSpec":
        doc = dict(doc)
        try:
            kind = doc.pop("kind")
        except KeyError:
            raise SpecError("frame spec needs a 'kind' field") from None
        return cls(kind, doc)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    def with_size(self, n: int) -> "FrameSpec":
        if self.kind == "banded_decay":
            return FrameSpec(self.kind, {**self.params, "n": n})
        if self.kind == "gabor_zn":
            return FrameSpec(self.kind, {**self.params, "n": n})
        if self.kind in ("onb", "repeated_onb"):
            return FrameSpec(self.kind, {**self.params, "d": n})
        raise SpecError(f"{self.kind} does not support size scaling")

    @property
    def label(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}({inner})"


def _require_int(kind, params, name, lo):
    v = params[name]
    if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < lo:
        raise SpecError(f"{kind}: {name} must be an integer >= {lo}, got {v!r}")


def _validate(kind, p):
    if kind in ("onb", "repeated_onb"):
        _require_int(kind, p, "d", 1)
        if kind == "repeated_onb":
            _require_int(kind, p, "copies", 1)
    elif kind == "random_tight":
        _require_int(kind, p, "d", 1)
        _require_int(kind, p, "M", 1)
        if p["M"] < p["d"]:
            raise SpecError(f"random_tight: need M >= d, got M={p['M']}, d={p['d']}")
    elif kind == "riesz":
        _require_int(kind, p, "d", 1)
        if not 1.0 <= float(p["cond"]) <= 1e6:
            raise SpecError(f"riesz: cond must lie in [1, 1e6], got {p['cond']!r}")
    elif kind == "gabor_zn":
        for name in ("n", "a", "b"):
            _require_int(kind, p, name, 1)
        n, a, b = p["n"], p["a"], p["b"]
        if n % a:
            raise SpecError(f"gabor_zn: time step a={a} must divide n={n}")
        if n % b:
            raise SpecError(f"gabor_zn: frequency step b={b} must divide n={n}")
        if n % (a * b):
            raise SpecError(f"gabor_zn: a*b={a * b} must divide n={n} (redundancy n/(a*b) >= 1)")
        if p["window"] not in ("gaussian", "random"):
            raise SpecError(f"gabor_zn: window must be 'gaussian' or 'random', got {p['window']!r}")
    elif kind == "banded_decay":
        _require_int(kind, p, "n", 2)
        _require_int(kind, p, "redundancy", 1)
        _require_int(kind, p, "bandwidth", 0)
        if not 0.0 < float(p["rho"]) < 1.0:
            raise SpecError(f"banded_decay: rho must lie in (0, 1), got {p['rho']!r}")


def _complex_normal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _onb(p):
    return np.eye(p["d"], dtype=np.complex128)


def _repeated_onb(p):
    return np.tile(np.eye(p["d"], dtype=np.complex128), (1, p["copies"]))


def _mercedes(p):
    s = np.sqrt(3.0) / 2.0
    return np.array([[0.0, -s, s], [1.0, -0.5, -0.5]], dtype=np.complex128)


def _random_tight(p):
    d, M = p["d"], p["M"]
    rng = np.random.default_rng(p["seed"])
    Q, _ = la.qr(_complex_normal(rng, (M, d)), mode="economic")
    # rows of Q^H are orthonormal, so S = (M/d) I
    return np.sqrt(M / d) * Q.conj().T


def _riesz(p):
    d, cond = p["d"], float(p["cond"])
    rng = np.random.default_rng(p["seed"])
    U, _ = la.qr(_complex_normal(rng, (d, d)))
    V, _ = la.qr(_complex_normal(rng, (d, d)))
    sv = np.geomspace(1.0, 1.0 / cond, d) if d > 1 else np.ones(1)
    return (U * sv) @ V.conj().T


def gaussian_window(n: int) -> np.ndarray:
    """Periodized discrete Gaussian of width ``sqrt(n)``, unit l^2 norm."""
    t = np.arange(n)
    dist = np.minimum(t, n - t)
    g = np.exp(-np.pi * dist.astype(float) ** 2 / n).astype(np.complex128)
    return g / np.linalg.norm(g)


def _gabor_zn(p):
    n, a, b = p["n"], p["a"], p["b"]
    if p["window"] == "gaussian":
        g = gaussian_window(n)
    else:
        g = _complex_normal(np.random.default_rng(p["seed"]), n)
        g /= np.linalg.norm(g)
    t = np.arange(n)
    cols = []
    for j in range(n // a):
        shifted = np.roll(g, j * a)
        for m in range(n // b):
            cols.append(np.exp(2j * np.pi * m * b * t / n) * shifted)
    return np.array(cols).T


def _banded_decay(p):
    """Shift-structured family ``psi_l[i] = h_{l mod r}(i - l // r)``.

    Each of the ``r`` profiles ``h_j(t) = c_j(t) rho^{|t|}`` (``|t| <= bandwidth``)
    carries seeded coefficients with ``|c_j(t)| <= 1`` and ``c_j(0) = 1``;
    profiles are truncated at the boundary of ``{0, ..., n-1}``.
    """
    n, r, rho, bw = p["n"], p["redundancy"], float(p["rho"]), p["bandwidth"]
    rng = np.random.default_rng(p["seed"])
    offsets = np.arange(-bw, bw + 1)
    coeffs = rng.uniform(-1.0, 1.0, (r, offsets.size)) + 1j * rng.uniform(-1.0, 1.0, (r, offsets.size))
    coeffs /= np.maximum(1.0, np.abs(coeffs))
    coeffs[:, bw] = 1.0
    profiles = coeffs * rho ** np.abs(offsets)
    P = np.zeros((n, n * r), dtype=np.complex128)
    for site in range(n):
        for j in range(r):
            rows = site + offsets
            keep = (rows >= 0) & (rows < n)
            P[rows[keep], site * r + j] = profiles[j, keep]
    return P


_BUILDERS = {
    "onb": _onb,
    "repeated_onb": _repeated_onb,
    "mercedes": _mercedes,
    "random_tight": _random_tight,
    "riesz": _riesz,
    "gabor_zn": _gabor_zn,
    "banded_decay": _banded_decay,
}


def materialize(spec: FrameSpec | dict) -> Frame:
    """Build the frame described by `spec`.

    Raises
    ------
    SpecError
        Invalid parameters.
    GenerationError
        The generated family does not span C^d (caller may retry with a new seed).
    """
    if isinstance(spec, dict):
        spec = FrameSpec.from_dict(spec)
    arr = _BUILDERS[spec.kind](spec.params)
    try:
        return Frame(arr, label=spec.label)
    except FrameError as exc:
        raise GenerationError(f"{spec.label}: {exc}") from exc


def mercedes() -> Frame:
    """Three unit vectors at 120 degrees in C^2; tight with bound 3/2."""
    return materialize(FrameSpec("mercedes"))


@dataclass(frozen=True)
class WeightSpec:
    kind: str = "constant"
    s: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise SpecError(f"unknown weight kind {self.kind!r}; expected one of {WEIGHT_KINDS}")
        for name in ("s", "r"):
            if not np.isfinite(getattr(self, name)):
                raise SpecError(f"weight parameter {name} must be finite")

    @classmethod
    def from_dict(cls, doc: dict) -> "WeightSpec":
        doc = dict(doc)
        kind = doc.pop("kind", "constant")
        allowed = {"constant": set(), "polynomial": {"s"}, "exponential": {"r"}}.get(kind, set())
        if set(doc) - allowed:
            raise SpecError(f"{kind} weight: unknown parameters {sorted(set(doc) - allowed)}")
        return cls(kind, **{k: float(v) for k, v in doc.items()})

    def to_dict(self) -> dict:
        if self.kind == "polynomial":
            return {"kind": "polynomial", "s": self.s}
        if self.kind == "exponential":
            return {"kind": "exponential", "r": self.r}
        return {"kind": "constant"}

    def materialize(self, M: int) -> Weight:
        if self.kind == "polynomial":
            return Weight.polynomial(M, self.s)
        if self.kind == "exponential":
            return Weight.exponential(M, self.r)
        return Weight.constant(M)


@dataclass(frozen=True)
class LocalizationProfile:
    """Band maxima ``max_{|k-l| = b} |G[k, l]|`` and a fitted decay model."""

    band_max: np.ndarray
    exp_rate: float  # fitted lambda in C exp(-lambda b)
    exp_constant: float
    poly_rate: float  # fitted s in C (1 + b)^-s
    localized: bool

    def envelope_constant(self, rho: float) -> float:
        """Smallest C with ``band_max[b] <= C rho^b`` for all b."""
        b = np.arange(self.band_max.size)
        return float(np.max(self.band_max / rho ** b))


def _fit_log_linear(x, y):
    mask = y > 0
    if mask.sum() < 2:
        return np.inf, float(y[0]) if y.size else 0.0
    slope, intercept = np.polyfit(x[mask], np.log(y[mask]), 1)
    return float(-slope), float(np.exp(intercept))


def localization_profile(pair: DualPair, floor=1e-13) -> LocalizationProfile:
    """Off-diagonal decay of ``|G|`` measured band by band.

    Bands whose maximum falls below ``floor * band_max[0]`` are excluded
    from the fit, since they only carry rounding noise.  The pair counts
    as localized when the fitted exponential rate is clearly positive.
    """
    G = np.abs(cross_gram(pair, Weight.constant(pair.M)).entries)
    M = G.shape[0]
    bands = np.array([max(np.max(np.diagonal(G, b)), np.max(np.diagonal(G, -b))) for b in range(M)])
    x = np.arange(M, dtype=float)
    keep = bands > floor * max(bands[0], 1e-300)
    keep[0] = False
    lam, C = _fit_log_linear(x[keep], bands[keep])
    s, _ = _fit_log_linear(np.log1p(x[keep]), bands[keep])
    if not keep.any():
        lam, s, C = np.inf, np.inf, 0.0
    tail = bands[M // 2:] if M > 2 else bands[1:]
    localized = bool(lam > 0.05 or (tail.size and np.max(tail) <= floor * bands[0]))
    return LocalizationProfile(band_max=bands, exp_rate=lam, exp_constant=C, poly_rate=s,
                               localized=localized)


def truncation_family(spec: FrameSpec | dict, sizes) -> list:
    """Canonical dual pairs of `spec` rescaled to each size in `sizes`."""
    if isinstance(spec, dict):
        spec = FrameSpec.from_dict(spec)
    sizes = list(sizes)
    if sorted(sizes) != sizes or len(set(sizes)) != len(sizes):
        raise SpecError(f"sizes must be strictly increasing, got {sizes}")
    return [DualPair.canonical(materialize(spec.with_size(n))) for n in sizes]
