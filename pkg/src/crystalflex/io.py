"""Framework documents, flex export and analysis reports.

Framework documents are JSON::

    {"dimension": 2,
     "periods": [[1, 0], [0, 1]],
     "joints": [{"id": "v", "coords": [0, 0]}],
     "edges": [{"v": "v", "k": [0, 0], "w": "v", "l": [1, 0]}]}

Rationals may be integers, decimal literals (converted exactly as written)
or strings such as ``"1/3"``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .framework import CrystalFramework, EdgeDecl, InvalidFrameworkError, Joint, validate

__all__ = [
    "FrameworkParseError",
    "SchemaError",
    "parse_framework",
    "framework_to_document",
    "serialize_framework",
    "parse_complex",
    "parse_omega",
    "format_complex",
    "format_window_field",
    "pgflex_to_dict",
    "pgflex_from_dict",
    "AnalysisReport",
    "analysis_report",
]


class FrameworkParseError(ValueError):
    pass


class SchemaError(FrameworkParseError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _rational(value: Any, path: str) -> Fraction:
    if isinstance(value, bool):
        raise SchemaError(path, "expected a rational, got a boolean")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise SchemaError(path, f"cannot parse {value!r} as a rational") from None
    raise SchemaError(path, f"expected a rational, got {type(value).__name__}")


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise SchemaError(path, f"expected an integer, got {value!r}")
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise SchemaError(path, f"expected an integer, got {value}")
        return int(value)
    return value


def _array(value: Any, path: str, length: int | None = None) -> list:
    if not isinstance(value, list):
        raise SchemaError(path, "expected an array")
    if length is not None and len(value) != length:
        raise SchemaError(path, f"expected {length} entries, got {len(value)}")
    return value


def _field(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{path}.{key}" if path else key, "missing field")
    return obj[key]


def framework_from_document(doc: Any) -> CrystalFramework:
    if not isinstance(doc, dict):
        raise SchemaError("$", "top level must be an object")
    d = _integer(_field(doc, "dimension", ""), "dimension")
    if d < 1:
        raise SchemaError("dimension", "must be >= 1")
    periods = [
        tuple(_rational(x, f"periods[{i}][{c}]") for c, x in enumerate(_array(a, f"periods[{i}]", d)))
        for i, a in enumerate(_array(_field(doc, "periods", ""), "periods", d))
    ]
    joints = []
    for i, j in enumerate(_array(_field(doc, "joints", ""), "joints")):
        path = f"joints[{i}]"
        if not isinstance(j, dict):
            raise SchemaError(path, "expected an object")
        label = _field(j, "id", path)
        if not isinstance(label, str):
            raise SchemaError(f"{path}.id", "expected a string")
        coords = _array(_field(j, "coords", path), f"{path}.coords", d)
        joints.append(Joint(label, tuple(_rational(x, f"{path}.coords[{c}]") for c, x in enumerate(coords))))
    edges = []
    for i, e in enumerate(_array(_field(doc, "edges", ""), "edges")):
        path = f"edges[{i}]"
        if not isinstance(e, dict):
            raise SchemaError(path, "expected an object")
        ends = []
        for lab, off in (("v", "k"), ("w", "l")):
            label = _field(e, lab, path)
            if not isinstance(label, str):
                raise SchemaError(f"{path}.{lab}", "expected a string")
            vec = _array(_field(e, off, path), f"{path}.{off}", d)
            ends.append((label, tuple(_integer(x, f"{path}.{off}[{c}]") for c, x in enumerate(vec))))
        edges.append(EdgeDecl(ends[0][0], ends[0][1], ends[1][0], ends[1][1]))
    name = doc.get("name", "")
    return CrystalFramework(d, tuple(periods), tuple(joints), tuple(edges), name=str(name))


def parse_framework(text: str | bytes, check: bool = True) -> CrystalFramework:
    """Parse and (by default) validate a framework document.

    Raises FrameworkParseError for malformed JSON, SchemaError (with the
    offending field path) for shape problems and InvalidFrameworkError,
    carrying the full report, when the framework fails validation.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise FrameworkParseError(f"malformed JSON: {exc}") from None
    fw = framework_from_document(doc)
    if check:
        report = validate(fw)
        if not report.ok:
            raise InvalidFrameworkError(report)
    return fw


def _rat_out(x: Fraction) -> int | str:
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def framework_to_document(fw: CrystalFramework) -> dict:
    doc: dict = {"dimension": fw.d}
    if fw.name:
        doc["name"] = fw.name
    doc["periods"] = [[_rat_out(x) for x in a] for a in fw.periods]
    doc["joints"] = [{"id": j.id, "coords": [_rat_out(x) for x in j.coords]} for j in fw.joints]
    doc["edges"] = [{"v": e.v, "k": list(e.k), "w": e.w, "l": list(e.l)} for e in fw.edges]
    return doc


def serialize_framework(fw: CrystalFramework) -> str:
    return json.dumps(framework_to_document(fw), indent=2) + "\n"


# -- complex numbers ----------------------------------------------------

def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` style literals (``i`` or ``j`` accepted)."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise ValueError(f"cannot parse {text!r} as a complex number") from None


def parse_omega(text: str, d: int | None = None) -> tuple[complex, ...]:
    parts = tuple(parse_complex(p) for p in text.split(","))
    if d is not None and len(parts) != d:
        raise ValueError(f"omega needs {d} components, got {len(parts)}")
    if any(w == 0 for w in parts):
        raise ValueError("omega components must be nonzero")
    return parts


def format_complex(w: complex, digits: int = 12) -> str:
    re = 0.0 if abs(w.real) < 10.0 ** -digits else w.real
    im = 0.0 if abs(w.imag) < 10.0 ** -digits else w.imag
    if im == 0:
        return format(re, f".{digits}g")
    if re == 0:
        return format(im, f".{digits}g") + "i"
    sign = "+" if im > 0 else "-"
    return f"{format(re, f'.{digits}g')}{sign}{format(abs(im), f'.{digits}g')}i"


# -- flex export --------------------------------------------------------

def format_window_field(fw: CrystalFramework, fld, digits: int = 12) -> str:
    """One line per (joint, cell): ``joint_id, k1 k2 .., u1 u2 ..``."""
    d = fw.d
    lines = ["# joint_id, cell k, velocity"]
    for k in fld.cells():
        u = fld.at(k)
        for i, j in enumerate(fw.joints):
            cell = " ".join(str(x) for x in k)
            vel = " ".join(format_complex(c, digits) for c in u[i * d:(i + 1) * d])
            lines.append(f"{j.id}, {cell}, {vel}")
    return "\n".join(lines) + "\n"


def pgflex_to_dict(f) -> dict:
    return {
        "omega": [[w.real, w.imag] for w in f.omega],
        "exponents": [list(e) for e in f.exponents],
        "coeffs": [[[c.real, c.imag] for c in row] for row in np.asarray(f.coeffs, dtype=complex)],
    }


def pgflex_from_dict(doc: dict):
    from .flexes import PGFlex

    omega = tuple(complex(a, b) for a, b in doc["omega"])
    exps = tuple(tuple(int(x) for x in e) for e in doc["exponents"])
    coeffs = np.array([[complex(a, b) for a, b in row] for row in doc["coeffs"]], dtype=complex)
    return PGFlex(omega, exps, coeffs.reshape(-1, len(exps)))


# -- reports ------------------------------------------------------------

@dataclass
class AnalysisReport:
    framework: dict
    spectrum: dict
    verdict: dict
    dimension: dict
    tool_version: str
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "framework": self.framework,
            "spectrum": self.spectrum,
            "verdict": self.verdict,
            "dimension": self.dimension,
            "tool_version": self.tool_version,
            "tolerances": self.tolerances,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def _omega_str(omega: Sequence[complex]) -> str:
    return "(" + ", ".join(format_complex(w) for w in omega) + ")"


def spectrum_summary(gs) -> dict:
    return {
        "kind": gs.kind,
        "certification": gs.certification,
        "points": [
            {"omega": [format_complex(w) for w in p.omega], "kernel_dim": p.kernel_dim,
             "exact": [str(x) for x in p.exact] if p.exact is not None else None}
            for p in gs.points
        ],
        "components_omega": [str(g) for g in gs.omega_components()],
        "tol": gs.tol,
    }


def verdict_summary(v) -> dict:
    return {
        "gamma_trivial": v.gamma_trivial,
        "periodic_kernel_is_translations": v.periodic_kernel_is_translations,
        "fper_rank_extremal": v.fper_rank_extremal,
        "psi_rank_extremal": v.psi_rank_extremal,
        "first_order_rigid": v.first_order_rigid,
        "certification": v.certification,
        "failed": list(v.failed),
        "witness_kind": v.witness_kind,
        "thresholds": v.thresholds._asdict(),
        "ranks": dict(v.ranks),
    }


def dimension_summary(fd) -> dict:
    return {
        "kind": fd.kind,
        "dim": fd.dim,
        "certification": fd.certification,
        "per_point": [{"omega": [format_complex(w) for w in om], "dims": list(dims)} for om, dims in fd.per_point],
    }


def analysis_report(fw: CrystalFramework, tol: float, seed: int = 0, cap: int = 6) -> AnalysisReport:
    from . import __version__
    from .flexes import DEFAULT_FLEX_TOL, flex_space_dimension, rigidity_verdict
    from .spectrum import CLUSTER_RADIUS, geometric_spectrum

    gs = geometric_spectrum(fw, tol=tol, seed=seed)
    v = rigidity_verdict(fw, tol=tol, spectrum=gs)
    fd = flex_space_dimension(fw, cap, tol=tol, spectrum=gs)
    return AnalysisReport(
        framework={"name": fw.name, "d": fw.d, "n": fw.n, "m": fw.m},
        spectrum=spectrum_summary(gs),
        verdict=verdict_summary(v),
        dimension=dimension_summary(fd),
        tool_version=__version__,
        tolerances={"rank": tol, "flex_window": DEFAULT_FLEX_TOL, "cluster_radius": CLUSTER_RADIUS,
                    "seed": seed, "max_deg_cap": cap},
    )
