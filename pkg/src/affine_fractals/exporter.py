"""SVG / OBJ / JSON serialisation of lattices, meshes, slice series and invariant tables.

Rounding to decimals happens here and nowhere else: SVG and OBJ coordinates
are printed with 6 significant digits. JSON keeps every rational exact as
``{"num": "...", "den": "..."}``.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DimensionMismatchError, DomainError, ParseError
from .generator import CellGeometry, FractalMesh, PointLattice
from .index_sets import FractalKind, Kind
from .lattice_core import Frame, FrameMode, InvariantTable
from .slicer import Role, Shape, Slice, SlicePiece, SliceSeries

SCHEMA_VERSION = 1
_HEX = re.compile(r"^#[0-9a-fA-F]{6}$")


@dataclass(frozen=True)
class ExportStyle:
    fill: str = "#3b6ea5"
    stroke: str = "#16213e"
    stroke_width: float = 0.02
    padding: float = 0.05
    labels: bool = False

    def __post_init__(self):
        for name in ("fill", "stroke"):
            if not _HEX.match(getattr(self, name)):
                raise DomainError(f"{name} must be a #rrggbb colour, got {getattr(self, name)!r}")
        if self.padding < 0:
            raise DomainError(f"padding must be >= 0, got {self.padding}")
        if self.stroke_width < 0:
            raise DomainError(f"stroke_width must be >= 0, got {self.stroke_width}")

    @classmethod
    def from_overrides(cls, pairs: Iterable[str]) -> "ExportStyle":
        """Build a style from ``KEY=VALUE`` strings (``fill``, ``stroke``, ``stroke_width``, ``padding``, ``labels``)."""
        kwargs = {}
        for pair in pairs:
            key, sep, value = pair.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise DomainError(f"style override {pair!r} is not KEY=VALUE")
            if key in ("fill", "stroke"):
                kwargs[key] = value
            elif key in ("stroke_width", "padding"):
                kwargs[key] = float(value)
            elif key == "labels":
                kwargs[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                raise DomainError(f"unknown style key {key!r}")
        return cls(**kwargs)


def fmt(x) -> str:
    """Decimal text with 6 significant digits; never ``-0``."""
    s = format(float(x), ".6g")
    return "0" if s in ("-0", "0") else s


def write_atomic(destination, data: bytes) -> None:
    """Write to a temporary sibling and rename over ``destination``."""
    path = Path(destination)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _finish(data: bytes, destination) -> bytes:
    if destination is not None:
        write_atomic(destination, data)
    return data


# -- SVG --------------------------------------------------------------------


def _cyclic(vertices: tuple) -> tuple:
    # binary-counter quad (00, 01, 10, 11) -> boundary cycle
    if len(vertices) == 4:
        return (vertices[0], vertices[1], vertices[3], vertices[2])
    return vertices


def _flat_items(geometry):
    """``(label, shape, vertices)`` in emission order for a 2D mesh or slice."""
    if isinstance(geometry, FractalMesh):
        sponge = geometry.kind.kind is Kind.SPONGE
        return [(c.id, "polygon", _cyclic(c.vertices) if sponge else c.vertices) for c in geometry.cells]
    if isinstance(geometry, Slice):
        items = []
        for p in geometry.pieces:
            if p.shape is Shape.POINT:
                items.append((p.label, "point", p.vertices))
            elif p.shape is Shape.FACET:
                items.append((p.label, "polygon", _cyclic(p.vertices)))
            else:
                items.append((p.label, "polygon", p.vertices))
        return items
    raise TypeError(f"cannot render {type(geometry).__name__} as SVG")


def render_svg(geometry, style: ExportStyle | None = None) -> bytes:
    style = style or ExportStyle()
    items = _flat_items(geometry)
    for label, _, verts in items:
        for v in verts:
            if len(v) != 2:
                raise DimensionMismatchError(f"SVG needs 2D geometry; piece {label} has a {len(v)}D vertex")

    # y is flipped so the picture keeps mathematical orientation
    pts = [(Fraction(x), -Fraction(y)) for _, _, verts in items for x, y in verts]
    if pts:
        xmin, xmax = min(p[0] for p in pts), max(p[0] for p in pts)
        ymin, ymax = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        xmin = ymin = Fraction(0)
        xmax = ymax = Fraction(1)
    span = max(xmax - xmin, ymax - ymin) or Fraction(1)
    pad = Fraction(style.padding).limit_denominator(10 ** 6) * span
    vx, vy = xmin - pad, ymin - pad
    vw, vh = (xmax - xmin) + 2 * pad or span, (ymax - ymin) + 2 * pad or span
    radius = span / 200
    font = span / 40

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{fmt(vx)} {fmt(vy)} {fmt(vw)} {fmt(vh)}">',
        f'<g fill="{style.fill}" stroke="{style.stroke}" stroke-width="{fmt(style.stroke_width)}" stroke-linejoin="round">',
    ]
    for label, shape, verts in items:
        if shape == "point":
            x, y = verts[0]
            out.append(f'<circle data-label="{label}" cx="{fmt(x)}" cy="{fmt(-Fraction(y))}" r="{fmt(radius)}"/>')
        else:
            coords = " ".join(f"{fmt(x)},{fmt(-Fraction(y))}" for x, y in verts)
            out.append(f'<polygon data-label="{label}" points="{coords}"/>')
    if style.labels:
        for label, _, verts in items:
            cx = sum((Fraction(v[0]) for v in verts), Fraction(0)) / len(verts)
            cy = -sum((Fraction(v[1]) for v in verts), Fraction(0)) / len(verts)
            out.append(
                f'<text x="{fmt(cx)}" y="{fmt(cy)}" font-size="{fmt(font)}" text-anchor="middle" '
                f'dominant-baseline="middle" stroke="none" fill="#000000">{label}</text>'
            )
    out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def export_svg(geometry, destination=None, style: ExportStyle | None = None) -> bytes:
    return _finish(render_svg(geometry, style), destination)


# -- OBJ --------------------------------------------------------------------


def _box_faces(dim: int = 3) -> list:
    """Corner-index cycles of the 6 faces of a binary-counter parallelepiped."""
    faces = []
    for k in range(dim):
        p, q = [a for a in range(dim) if a != k]
        for side in (0, 1):
            cycle = []
            for op, oq in ((0, 0), (0, 1), (1, 1), (1, 0)):
                bits = [0] * dim
                bits[k], bits[p], bits[q] = side, op, oq
                cycle.append(bits[0] * 4 + bits[1] * 2 + bits[2])
            faces.append(cycle)
    return faces


_BOX_FACES = _box_faces()
_TET_FACES = [list(c) for c in combinations(range(4), 3)]


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _outward(face: list, verts: tuple, centroid) -> list:
    a, b, c = (verts[i] for i in face[:3])
    normal = _cross(_sub(b, a), _sub(c, a))
    inward = sum(x * y for x, y in zip(normal, _sub(centroid, a)))
    return face if inward < 0 else face[::-1]


def _solids(geometry):
    """``(vertices, faces)`` per solid and a list of isolated points."""
    solids, points = [], []
    if isinstance(geometry, FractalMesh):
        sponge = geometry.kind.kind is Kind.SPONGE
        for c in geometry.cells:
            solids.append((c.vertices, _BOX_FACES if sponge else _TET_FACES))
    elif isinstance(geometry, Slice):
        for p in geometry.pieces:
            if p.shape is Shape.POINT:
                points.append(p.vertices[0])
            elif len(p.vertices) == 8:
                solids.append((p.vertices, _BOX_FACES))
            elif len(p.vertices) == 4:
                solids.append((p.vertices, _TET_FACES))
            else:
                raise DimensionMismatchError(f"piece {p.label} with {len(p.vertices)} vertices is not a 3D solid")
    else:
        raise TypeError(f"cannot render {type(geometry).__name__} as OBJ")
    return solids, points


def render_obj(geometry) -> bytes:
    solids, points = _solids(geometry)
    for verts, _ in solids:
        if any(len(v) != 3 for v in verts):
            raise DimensionMismatchError("OBJ export needs 3D geometry")
    if any(len(p) != 3 for p in points):
        raise DimensionMismatchError("OBJ export needs 3D geometry")

    index: dict = {}

    def vid(p):
        key = tuple(Fraction(x) for x in p)
        if key not in index:
            index[key] = len(index) + 1
        return index[key]

    face_lines, point_lines = [], []
    for verts, faces in solids:
        centroid = tuple(sum(c, Fraction(0)) / len(verts) for c in zip(*verts))
        for face in faces:
            face = _outward(face, verts, centroid)
            face_lines.append("f " + " ".join(str(vid(verts[i])) for i in face))
    for p in points:
        point_lines.append(f"p {vid(p)}")

    lines = [f"# {len(index)} vertices, {len(face_lines)} faces, {len(point_lines)} points"]
    lines += [f"v {fmt(x)} {fmt(y)} {fmt(z)}" for (x, y, z) in index]
    lines += face_lines + point_lines
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_obj(geometry, destination=None) -> bytes:
    return _finish(render_obj(geometry), destination)


# -- JSON -------------------------------------------------------------------


def _rat(x) -> dict:
    x = Fraction(x)
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _pt(p) -> list:
    return [_rat(x) for x in p]


def _frame_doc(frame: Frame | None):
    if frame is None:
        return None
    return {"mode": frame.mode.value, "base": _pt(frame.base), "neighbors": [_pt(p) for p in frame.neighbors]}


def _envelope(type_, kind: FractalKind | None, n, frame, **payload) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "type": type_,
        "kind": kind.kind.value if kind else None,
        "n": n,
        "m": kind.m if kind else None,
        "frame": _frame_doc(frame),
    }
    doc.update(payload)
    return doc


def to_document(value) -> dict:
    if isinstance(value, PointLattice):
        pts = [{"index": list(k), "coords": _pt(value.points[k])} for k in sorted(value.points)]
        return _envelope("lattice", None, value.n, value.frame(), extent=list(value.extent), points=pts)
    if isinstance(value, FractalMesh):
        cells = [{"id": c.id, "base": list(c.base), "vertices": [_pt(v) for v in c.vertices]} for c in value.cells]
        return _envelope("mesh", value.kind, value.kind.n, value.frame, cells=cells)
    if isinstance(value, SliceSeries):
        slices = [
            {
                "time": s.time,
                "pieces": [
                    {"label": p.label, "role": p.role.value, "shape": p.shape.value, "vertices": [_pt(v) for v in p.vertices]}
                    for p in s.pieces
                ],
            }
            for s in value.slices
        ]
        return _envelope("slices", value.kind, value.kind.n, None, axis=value.axis, slices=slices)
    if isinstance(value, InvariantTable):
        inv = {"mode": value.mode.value, "matrices": [[[_rat(x) for x in row] for row in m] for m in value.matrices]}
        return _envelope("invariants", None, value.n, None, invariants=inv)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps(value) -> bytes:
    doc = value if isinstance(value, dict) else to_document(value)
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def export_json(value, destination=None) -> bytes:
    return _finish(dumps(value), destination)


# -- import -----------------------------------------------------------------


def parse_rational(value, where: str) -> Fraction:
    """Accept an int, an ``{"num", "den"}`` object, or a ``"p/q"`` string."""
    if isinstance(value, bool):
        raise ParseError("expected a rational, got a boolean", where)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            raise ParseError(f"cannot read {value!r} as a rational", where) from None
    if isinstance(value, Mapping):
        if set(value) != {"num", "den"}:
            raise ParseError(f"rational object needs exactly 'num' and 'den', got {sorted(value)}", where)
        try:
            num, den = int(value["num"]), int(value["den"])
        except (TypeError, ValueError):
            raise ParseError("'num' and 'den' must be integers", where) from None
        if den == 0:
            raise ParseError("zero denominator", where)
        return Fraction(num, den)
    if isinstance(value, float):
        raise ParseError("floats are not accepted; use an integer or {'num','den'}", where)
    raise ParseError(f"expected a rational, got {type(value).__name__}", where)


def _parse_point(value, where: str) -> tuple:
    if not isinstance(value, list):
        raise ParseError("expected a list of coordinates", where)
    return tuple(parse_rational(x, f"{where}[{i}]") for i, x in enumerate(value))


def _read_document(source):
    if isinstance(source, Mapping):
        return source
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, (bytes, bytearray)):
        text = bytes(source)
    else:
        text = Path(source).read_bytes()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object", "$")
    return doc


def frame_from_document(doc: Mapping, where: str = "") -> Frame:
    prefix = f"{where}." if where else ""
    for key in ("mode", "base", "neighbors"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}", f"{prefix}{key}")
    try:
        mode = FrameMode(doc["mode"])
    except ValueError:
        raise ParseError(f"mode must be 'affine' or 'centroaffine', got {doc['mode']!r}", f"{prefix}mode") from None
    base = _parse_point(doc["base"], f"{prefix}base")
    if not isinstance(doc["neighbors"], list):
        raise ParseError("expected a list of points", f"{prefix}neighbors")
    neighbors = tuple(_parse_point(p, f"{prefix}neighbors[{i}]") for i, p in enumerate(doc["neighbors"]))
    return Frame(base, neighbors, mode)


def import_frame(source) -> Frame:
    """Read and validate a frame document (path, file object, bytes or dict).

    A full export document is accepted as well; its ``frame`` member is used.
    """
    doc = _read_document(source)
    if "schema_version" in doc and isinstance(doc.get("frame"), Mapping):
        return frame_from_document(doc["frame"], "frame")
    return frame_from_document(doc)


def _kind_of(doc) -> FractalKind:
    return FractalKind(Kind(doc["kind"]), doc["n"], doc["m"])


def from_document(doc: Mapping):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {doc.get('schema_version')!r}", "schema_version")
    type_ = doc.get("type")
    if type_ == "lattice":
        pts = {
            tuple(rec["index"]): _parse_point(rec["coords"], f"points[{i}].coords")
            for i, rec in enumerate(doc["points"])
        }
        return PointLattice(doc["n"], tuple(doc["extent"]), pts)
    if type_ == "mesh":
        cells = tuple(
            CellGeometry(
                rec["id"],
                tuple(rec["base"]),
                tuple(_parse_point(v, f"cells[{i}].vertices[{j}]") for j, v in enumerate(rec["vertices"])),
            )
            for i, rec in enumerate(doc["cells"])
        )
        return FractalMesh(_kind_of(doc), frame_from_document(doc["frame"], "frame"), cells)
    if type_ == "slices":
        slices = tuple(
            Slice(
                s["time"],
                tuple(
                    SlicePiece(
                        p["label"],
                        Role(p["role"]),
                        tuple(_parse_point(v, f"slices[{i}].pieces[{j}].vertices[{k}]") for k, v in enumerate(p["vertices"])),
                        Shape(p["shape"]),
                    )
                    for j, p in enumerate(s["pieces"])
                ),
            )
            for i, s in enumerate(doc["slices"])
        )
        return SliceSeries(_kind_of(doc), slices, doc["axis"])
    if type_ == "invariants":
        inv = doc["invariants"]
        mats = tuple(
            tuple(tuple(parse_rational(x, f"invariants.matrices[{a}][{r}][{c}]") for c, x in enumerate(row)) for r, row in enumerate(m))
            for a, m in enumerate(inv["matrices"])
        )
        return InvariantTable(mats, FrameMode(inv["mode"]))
    raise ParseError(f"unknown document type {type_!r}", "type")


def load_json(source):
    """Inverse of :func:`export_json`."""
    return from_document(_read_document(source))
