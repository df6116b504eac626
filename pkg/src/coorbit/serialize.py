"""JSON documents for frames, coefficient sequences and weights.

Complex numbers are stored as ``[re, im]`` pairs.  Python's float repr is
the shortest decimal that round-trips, so documents reproduce arrays bit
for bit.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import CoorbitError
from .frames import Frame
from .hilbert import Weight

SCHEMA_VERSION = 1


class SchemaError(CoorbitError, ValueError):
    """A document does not match the expected schema."""


def complex_to_pairs(values) -> list:
    arr = np.asarray(values, dtype=np.complex128).ravel()
    return [[float(z.real), float(z.imag)] for z in arr]


def pairs_to_complex(pairs) -> np.ndarray:
    try:
        arr = np.array(pairs, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"complex entries must be [re, im] pairs: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise SchemaError(f"complex entries must be [re, im] pairs, got shape {arr.shape}")
    z = np.empty(arr.shape[0], dtype=np.complex128)
    # assign parts separately; re + 1j*im would lose signed zeros
    z.real = arr[:, 0]
    z.imag = arr[:, 1]
    return z


def _check_doc(doc, kind):
    if not isinstance(doc, dict):
        raise SchemaError(f"{kind} document must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc.get('schema_version')!r}")
    if doc.get("type") != kind:
        raise SchemaError(f"expected a {kind!r} document, got type {doc.get('type')!r}")


def frame_to_doc(frame: Frame, spec=None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "type": "frame",
        "label": frame.label,
        "d": frame.d,
        "M": frame.M,
        "entries": complex_to_pairs(frame.vectors),  # row-major d x M
    }
    if spec is not None:
        doc["spec"] = spec
    return doc


def frame_from_doc(doc) -> Frame:
    _check_doc(doc, "frame")
    try:
        d, M = int(doc["d"]), int(doc["M"])
        z = pairs_to_complex(doc["entries"])
    except KeyError as exc:
        raise SchemaError(f"frame document missing field {exc}") from None
    if z.size != d * M:
        raise SchemaError(f"frame has {z.size} entries, expected d*M = {d * M}")
    return Frame(z.reshape(d, M), label=doc.get("label"))


def coeffs_to_doc(alpha) -> dict:
    return {"schema_version": SCHEMA_VERSION, "type": "coefficients",
            "entries": complex_to_pairs(alpha)}


def coeffs_from_doc(doc) -> np.ndarray:
    _check_doc(doc, "coefficients")
    return pairs_to_complex(doc["entries"])


def weight_to_doc(w: Weight) -> dict:
    return {"schema_version": SCHEMA_VERSION, "type": "weight", "label": w.label,
            "values": [float(v) for v in w.values]}


def weight_from_doc(doc) -> Weight:
    _check_doc(doc, "weight")
    return Weight(doc["values"], label=doc.get("label"))


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc))
    return path


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def digest(obj) -> str:
    """SHA-256 of the canonical JSON encoding, or of a complex array's pairs."""
    if isinstance(obj, np.ndarray):
        obj = complex_to_pairs(obj)
    payload = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(payload).hexdigest()
