"""Model gallery (robot rendezvous, platoons, cascades) and system JSON I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .charfun import SystemPair
from .errors import BadParams, FileError, SchemaError, ZeroA1

SCHEMA_VERSION = 1

ARITY = {"robot": 0, "platoon": 3, "platoon_from_zeros": 3, "platoon_pair": 3}


@dataclass(frozen=True)
class ModelSpecifier:
    name: str
    params: tuple = ()
    path: str | None = None
    # platoon_from_zeros only: alpha0 = -z1 z2 z3, which puts a positive eigenvalue in A0
    literal_sign: bool = False
    extras: dict = field(default_factory=dict)


def robot() -> SystemPair:
    return SystemPair.from_matrices([[-1.0]], [[1.0]], label="robot")


def platoon(a0, a1, a2, label: str | None = None) -> SystemPair:
    """Platoon agent with state (spacing error, velocity error, acceleration)."""
    A0 = np.array([[0, 1, 0], [0, 0, 1], [-a0, -a1, -a2]], dtype=complex)
    A1 = np.zeros((3, 3), dtype=complex)
    A1[0, 1] = -1.0
    if all(np.imag(x) == 0 for x in (a0, a1, a2)):
        A0 = A0.real
        A1 = A1.real
    return SystemPair.from_matrices(A0, A1, label=label or f"platoon({a0},{a1},{a2})")


def platoon_from_zeros(z1, z2, z3, literal_sign: bool = False) -> SystemPair:
    a0 = z1 * z2 * z3
    if literal_sign:
        a0 = -a0
    a1 = z1 * z2 + z2 * z3 + z3 * z1
    a2 = z1 + z2 + z3
    tag = ",literal" if literal_sign else ""
    return platoon(a0, a1, a2, label=f"platoon_from_zeros({z1},{z2},{z3}{tag})")


def platoon_pair(a, b, c) -> SystemPair:
    """Platoon with sigma(A0) = {-c, -a +- ib}."""
    a0 = (a * a + b * b) * c
    a1 = a * a + b * b + 2 * a * c
    a2 = 2 * a + c
    return platoon(a0, a1, a2, label=f"platoon_pair({a},{b},{c})")


def cascade(*zetas) -> SystemPair:
    """Realization with phi = prod(z) / prod(l + z_i) via a rank-one corner coupling."""
    if len(zetas) < 1:
        raise BadParams("cascade needs at least one zeta")
    m = len(zetas)
    A0 = np.diag([-float(z) for z in zetas]) + np.diag(np.ones(m - 1), -1)
    A1 = np.zeros((m, m))
    A1[0, m - 1] = float(np.prod(zetas))
    return SystemPair.from_matrices(A0, A1, label="cascade(" + ",".join(str(z) for z in zetas) + ")")


def build(spec: ModelSpecifier) -> SystemPair:
    name, params = spec.name, tuple(spec.params)
    if name == "custom":
        if spec.path is None:
            raise BadParams("custom model needs a path")
        return load(spec.path)
    if name == "cascade":
        if not params or any(float(z) <= 0 for z in params):
            raise BadParams("cascade needs positive zetas")
        return cascade(*params)
    if name not in ARITY:
        raise BadParams(f"unknown model {name!r}")
    if len(params) != ARITY[name]:
        raise BadParams(f"{name} takes {ARITY[name]} parameters, got {len(params)}")
    if name == "robot":
        return robot()
    if name == "platoon":
        return platoon(*params)
    if name == "platoon_from_zeros":
        return platoon_from_zeros(*params, literal_sign=spec.literal_sign)
    return platoon_pair(*params)


GALLERY_SPECS = {
    "robot": ModelSpecifier("robot"),
    "platoon_from_zeros(1,2,3)": ModelSpecifier("platoon_from_zeros", (1.0, 2.0, 3.0)),
    "platoon_pair(1,1,1)": ModelSpecifier("platoon_pair", (1.0, 1.0, 1.0)),
    "platoon_pair(2,1,1)": ModelSpecifier("platoon_pair", (2.0, 1.0, 1.0)),
    "platoon_pair(0.5,1,1)": ModelSpecifier("platoon_pair", (0.5, 1.0, 1.0)),
    "cascade(1,2)": ModelSpecifier("cascade", (1.0, 2.0)),
}


def gallery() -> dict[str, SystemPair]:
    return {k: build(v) for k, v in GALLERY_SPECS.items()}


def _encode(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _decode(rows, m, key) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{key}: not a numeric array") from exc
    if arr.shape != (m, m, 2):
        raise SchemaError(f"{key}: expected shape ({m}, {m}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def to_json(system: SystemPair) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "label": system.label,
        "m": system.m,
        "A0": _encode(system.A0),
        "A1": _encode(system.A1),
    }


def save(system: SystemPair, path) -> None:
    try:
        Path(path).write_text(json.dumps(to_json(system), indent=1) + "\n", encoding="utf-8")
    except OSError as exc:
        raise FileError(str(exc)) from exc


def from_json(doc: dict) -> SystemPair:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema {doc.get('schema')!r}")
    for key in ("m", "A0", "A1"):
        if key not in doc:
            raise SchemaError(f"missing key {key!r}")
    m = doc["m"]
    if not isinstance(m, int) or m < 1:
        raise SchemaError("m must be a positive integer")
    A0 = _decode(doc["A0"], m, "A0")
    A1 = _decode(doc["A1"], m, "A1")
    if not np.any(A1):
        raise ZeroA1("A1 must be non-zero")
    if not np.any(A0.imag) and not np.any(A1.imag):
        A0, A1 = A0.real, A1.real
    return SystemPair.from_matrices(A0, A1, label=str(doc.get("label", "")))


def load(path) -> SystemPair:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(str(exc)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return from_json(doc)
