"""JSON file formats. Rationals are always written as strings so nothing is rounded."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .certify import ChildLink, PrerankCertificate
from .core import ConvexSeq, ExactMatrix, GcxError, MoveStep, as_rational, format_rational
from .curve import Arc, CurveSpec, UnipotentMatrix


class FormatError(GcxError):
    """Malformed input file."""


def _q(x: Fraction) -> str:
    return format_rational(x)


def _parse_q(x: Any) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise FormatError(f"expected a rational string or integer, got {x!r}")
    try:
        return as_rational(x)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise FormatError(f"bad rational {x!r}: {exc}") from exc


def _rows(rows) -> list[list[str]]:
    return [[_q(x) for x in r] for r in rows]


def _parse_rows(data: Any) -> list[list[Fraction]]:
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise FormatError("expected a list of rows")
    return [[_parse_q(x) for x in r] for r in data]


def _require(data: dict, *keys: str) -> None:
    if not isinstance(data, dict):
        raise FormatError("expected a JSON object")
    missing = [key for key in keys if key not in data]
    if missing:
        raise FormatError(f"missing field(s): {', '.join(missing)}")


# -- sequences ----------------------------------------------------------------


def seq_to_dict(seq: ConvexSeq) -> dict:
    return {
        "k": seq.k,
        "n": seq.n,
        "initial": _rows(seq.initial.rows()),
        "moves": [{"j": mv.j, "t": _q(mv.t)} for mv in seq.moves],
    }


def seq_from_dict(data: dict) -> ConvexSeq:
    _require(data, "k", "n", "initial", "moves")
    try:
        M = ExactMatrix.from_rows(_parse_rows(data["initial"]))
        if (M.k, M.n) != (data["k"], data["n"]):
            raise FormatError(f"initial matrix is {M.k}x{M.n}, header says {data['k']}x{data['n']}")
        moves = []
        for mv in data["moves"]:
            _require(mv, "j", "t")
            if not isinstance(mv["j"], int) or isinstance(mv["j"], bool):
                raise FormatError(f"move index must be an integer, got {mv['j']!r}")
            moves.append(MoveStep(mv["j"], _parse_q(mv["t"])))
        return ConvexSeq(M, tuple(moves))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# -- certificates ---------------------------------------------------------------


def cert_to_dict(cert: PrerankCertificate) -> dict:
    out: dict[str, Any] = {
        "k": cert.k,
        "n": cert.n,
        "refined": seq_to_dict(cert.refined),
        "sample_index": list(cert.sample_index),
        "pr": list(cert.pr),
    }
    if cert.is_base:
        out["base"] = cert.base
        return out
    out.update(
        omega=[_q(x) for x in cert.omega],
        r_minus=cert.r_minus,
        pr_I=list(cert.pr_I),
        pr_II=list(cert.pr_II),
        move_types=list(cert.move_types),
        children={
            str(i): {
                "start": c.start,
                "stop": c.stop,
                "sample_map": list(c.sample_map),
                "certificate": cert_to_dict(c.certificate),
            }
            for i, c in enumerate(cert.children)
        },
    )
    return out


def _int_list(data: Any, name: str) -> tuple[int, ...]:
    if not isinstance(data, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in data):
        raise FormatError(f"{name} must be a list of integers")
    return tuple(data)


def cert_from_dict(data: dict) -> PrerankCertificate:
    _require(data, "k", "n", "refined", "sample_index", "pr")
    common = dict(
        k=data["k"],
        n=data["n"],
        refined=seq_from_dict(data["refined"]),
        sample_index=_int_list(data["sample_index"], "sample_index"),
        pr=_int_list(data["pr"], "pr"),
    )
    if "base" in data:
        return PrerankCertificate(base=str(data["base"]), **common)
    _require(data, "omega", "r_minus", "pr_I", "pr_II", "move_types", "children")
    children_data = data["children"]
    if not isinstance(children_data, dict):
        raise FormatError("children must be an object keyed by run index")
    children = []
    for i in range(len(children_data)):
        c = children_data.get(str(i))
        if c is None:
            raise FormatError(f"children are not keyed 0..{len(children_data) - 1}")
        _require(c, "start", "stop", "sample_map", "certificate")
        children.append(
            ChildLink(c["start"], c["stop"], _int_list(c["sample_map"], "sample_map"), cert_from_dict(c["certificate"]))
        )
    if not isinstance(data["move_types"], list):
        raise FormatError("move_types must be a list")
    return PrerankCertificate(
        omega=tuple(_parse_q(x) for x in data["omega"]),
        r_minus=data["r_minus"],
        pr_I=_int_list(data["pr_I"], "pr_I"),
        pr_II=_int_list(data["pr_II"], "pr_II"),
        move_types=tuple(str(t) for t in data["move_types"]),
        children=tuple(children),
        **common,
    )


# -- curves and matrices ----------------------------------------------------------


def curve_to_dict(spec: CurveSpec) -> dict:
    identity = spec.initial == UnipotentMatrix.identity(spec.n)
    return {
        "n": spec.n,
        "k": spec.k,
        "initial": "identity" if identity else _rows(spec.initial.rows),
        "arcs": [{"c": [_q(x) for x in a.c], "t_max": _q(a.t_max)} for a in spec.arcs],
    }


def curve_from_dict(data: dict) -> CurveSpec:
    _require(data, "n", "k", "initial", "arcs")
    try:
        n = data["n"]
        if data["initial"] == "identity":
            initial = UnipotentMatrix.identity(n)
        else:
            initial = UnipotentMatrix(tuple(tuple(r) for r in _parse_rows(data["initial"])))
        arcs = []
        for a in data["arcs"]:
            _require(a, "c", "t_max")
            arcs.append(Arc(tuple(_parse_q(x) for x in a["c"]), _parse_q(a["t_max"])))
        return CurveSpec(n, data["k"], initial, tuple(arcs))
    except (ValueError, TypeError) as exc:
        raise FormatError(str(exc)) from exc


def unipotent_from_json(data: Any) -> UnipotentMatrix:
    """A bare list of rows, or an object with a "rows" field."""
    if isinstance(data, dict):
        _require(data, "rows")
        data = data["rows"]
    try:
        return UnipotentMatrix(tuple(tuple(r) for r in _parse_rows(data)))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# -- files ------------------------------------------------------------------------


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def content_hash(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()


def read_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


def write_json(path: str | Path, data: Any) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def load_seq(path: str | Path) -> ConvexSeq:
    return seq_from_dict(read_json(path))


def save_seq(path: str | Path, seq: ConvexSeq) -> None:
    write_json(path, seq_to_dict(seq))
