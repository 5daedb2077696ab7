"""Command-line front end.

Every invocation prints exactly one JSON object on stdout. Exit codes:

    0  success
    1  a verification check failed
    2  invalid arguments (including desk-scale guard refusals)
    3  validation error (degenerate frame, malformed matrices)
    4  I/O error
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import exporter
from .errors import DegenerateFrameError, DomainError, LatticeError, ParseError
from .generator import (
    FractalMesh,
    PointLattice,
    assemble_mesh,
    assemble_mesh_cells_only,
    cell_offsets,
    default_frame,
    generate_points_matrix,
    generate_points_recurrence,
    required_extent,
    verify_structure,
)
from .index_sets import FractalKind, count_closed_form, enumerate_cells
from .lattice_core import (
    InvariantTable,
    TransitionMatrix,
    canonical_matrices,
    check_compatibility,
    check_hyperplane_criterion,
    check_symmetry,
    invariant_tables,
)
from .slicer import SliceSeries, pair_labels, slice_series

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3, 4
MAX_BOX_POINTS = 10 ** 7
MAX_ENUMERATION = 10 ** 6
MAX_N = MAX_M = 6


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _table_doc(table: InvariantTable) -> list:
    return [[[str(x) for x in row] for row in m] for m in table.matrices]


# -- config -----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the same keys as the flags")
    common.add_argument("--kind", choices=["sponge", "simplex"])
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--frame", help="frame JSON path, or 'default'")
    common.add_argument("--format", choices=["svg", "obj", "json"])
    common.add_argument("-o", "--output", help="output path (slice: path stem)")
    common.add_argument("--slice", action="store_true", help="write the slice series instead of the mesh")
    common.add_argument("--cells-only", action="store_true", help="per-cell matrix transport; no point box")
    common.add_argument("--style", nargs="*", default=None, metavar="KEY=VALUE")

    parser = argparse.ArgumentParser(prog="affine-fractals", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="generate a mesh and write it")
    sub.add_parser("slice", parents=[common], help="write one file per integer time slice plus a label manifest")
    inv = sub.add_parser("invariants", parents=[common], help="invariant tables and self-similarity verdict")
    inv.add_argument("inputs", nargs="*", help="lattice or mesh JSON files (two inputs: equivalence check)")
    ver = sub.add_parser("verify", parents=[common], help="run commutation, hyperplane, structure and count checks")
    ver.add_argument("--matrices", help="JSON file holding a transition-matrix family to check instead of the canonical one")
    sub.add_parser("count", parents=[common], help="closed-form and enumerated cell counts")
    return parser


_DEFAULTS = {"kind": "sponge", "n": 2, "m": 1, "frame": "default", "format": None, "output": None, "style": None}


def _resolve(args) -> argparse.Namespace:
    cfg = dict(_DEFAULTS)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not JSON: {exc}") from None
        for key, value in data.items():
            key = key.replace("-", "_")
            if key == "o":
                key = "output"
            cfg[key] = value
    for key, value in vars(args).items():
        if key == "config":
            continue
        if value is None or value is False:
            cfg.setdefault(key, value)
            continue
        cfg[key] = value
    ns = argparse.Namespace(**cfg)
    if not 2 <= int(ns.n) <= MAX_N:
        raise UsageError(f"--n must be in 2..{MAX_N}")
    if not 1 <= int(ns.m) <= MAX_M:
        raise UsageError(f"--m must be in 1..{MAX_M}")
    ns.n, ns.m = int(ns.n), int(ns.m)
    return ns


def _frame(cfg):
    if cfg.frame in (None, "default"):
        return default_frame(cfg.kind, cfg.n)
    frame = exporter.import_frame(cfg.frame)
    if frame.n != cfg.n:
        raise UsageError(f"frame has n={frame.n} but --n is {cfg.n}")
    return frame


def _style(cfg):
    style = cfg.style
    if isinstance(style, dict):
        style = [f"{k}={v}" for k, v in style.items()]
    return exporter.ExportStyle.from_overrides(style or [])


def _mesh(cfg) -> FractalMesh:
    kind = FractalKind(cfg.kind, cfg.n, cfg.m)
    frame = _frame(cfg)
    if getattr(cfg, "cells_only", False):
        return assemble_mesh_cells_only(kind, frame)
    box = (kind.side + 1) ** kind.n
    if box > MAX_BOX_POINTS:
        raise UsageError(f"point box of {box} points exceeds {MAX_BOX_POINTS}; use --cells-only")
    lattice = generate_points_recurrence(frame, required_extent(kind))
    mesh = assemble_mesh(kind, lattice)
    return FractalMesh(kind, frame, mesh.cells)


def _geometry_dim(mesh: FractalMesh) -> int:
    return len(mesh.frame.base)


def _write(fmt: str, value, path, style) -> None:
    if fmt == "svg":
        exporter.export_svg(value, path, style)
    elif fmt == "obj":
        exporter.export_obj(value, path)
    else:
        exporter.export_json(value, path)


# -- commands ---------------------------------------------------------------


def cmd_generate(cfg) -> int:
    if cfg.slice:
        return cmd_slice(cfg)
    start = time.perf_counter()
    mesh = _mesh(cfg)
    dim = _geometry_dim(mesh)
    fmt = cfg.format or {2: "svg", 3: "obj"}.get(dim, "json")
    if fmt == "svg" and dim != 2:
        raise UsageError(f"svg output needs 2D geometry, this mesh is {dim}D")
    if fmt == "obj" and dim != 3:
        raise UsageError(f"obj output needs 3D geometry, this mesh is {dim}D")
    out = cfg.output or f"{cfg.kind}_n{cfg.n}_m{cfg.m}.{fmt}"
    _write(fmt, mesh, out, _style(cfg))
    _emit({"command": "generate", "cells": len(mesh.cells), "output": str(out), "format": fmt, "seconds": round(time.perf_counter() - start, 6)})
    return EXIT_OK


def cmd_slice(cfg) -> int:
    start = time.perf_counter()
    mesh = _mesh(cfg)
    series = slice_series(mesh)
    dim = _geometry_dim(mesh) - 1
    fmt = cfg.format or {2: "svg", 3: "obj"}.get(dim, "json")
    if fmt == "svg" and dim != 2:
        raise UsageError(f"svg slices need n=3 input (slice geometry here is {dim}D)")
    if fmt == "obj" and dim != 3:
        raise UsageError(f"obj slices need n=4 input (slice geometry here is {dim}D)")
    stem = Path(cfg.output) if cfg.output else Path(f"{cfg.kind}_n{cfg.n}_m{cfg.m}")
    if stem.suffix in (".svg", ".obj", ".json"):
        stem = stem.with_suffix("")
    style = _style(cfg)
    files = []
    for s in series.slices:
        path = stem.parent / f"{stem.name}_t{s.time}.{fmt}"
        _write(fmt, SliceSeries(series.kind, (s,), series.axis) if fmt == "json" else s, path, style)
        files.append(str(path))
    pairs = pair_labels(series)
    manifest_path = stem.parent / f"{stem.name}_pairs.json"
    manifest = {
        "kind": cfg.kind,
        "n": cfg.n,
        "m": cfg.m,
        "files": [Path(f).name for f in files],
        "pairs": [{"label": label, "bottom": b, "top": t} for label, b, t in pairs],
    }
    exporter.write_atomic(manifest_path, (json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n").encode())
    _emit({
        "command": "slice",
        "cells": len(mesh.cells),
        "slices": len(series.slices),
        "files": files,
        "manifest": str(manifest_path),
        "format": fmt,
        "seconds": round(time.perf_counter() - start, 6),
    })
    return EXIT_OK


def _points_of(value):
    if isinstance(value, PointLattice):
        return value.points, value.n
    if isinstance(value, FractalMesh):
        pts = {}
        offsets = cell_offsets(value.kind)
        for c in value.cells:
            for off, v in zip(offsets, c.vertices):
                pts[tuple(a + o for a, o in zip(c.base, off))] = v
        return pts, value.kind.n
    raise UsageError(f"invariants input must be a lattice or mesh document, got {type(value).__name__}")


def _analyse(points, n):
    tables = invariant_tables(points, n)
    if not tables:
        raise DomainError("no site has a complete neighbourhood (need r, r_i, r_ii, r_ij)")
    first_site = next(iter(tables))
    first = tables[first_site]
    return first, all(t == first for t in tables.values()), len(tables)


def cmd_invariants(cfg) -> int:
    inputs = list(getattr(cfg, "inputs", None) or [])
    if len(inputs) > 2:
        raise UsageError("invariants takes at most two inputs")
    if not inputs:
        frame = _frame(cfg)
        lattice = generate_points_recurrence(frame, (4,) * cfg.n)
        values = [lattice]
    else:
        values = [exporter.load_json(p) for p in inputs]
    results = []
    for v in values:
        pts, n = _points_of(v)
        results.append(_analyse(pts, n))
    report = {
        "command": "invariants",
        "invariants": _table_doc(results[0][0]),
        "mode": results[0][0].mode.value,
        "self_similar": results[0][1],
        "sites": results[0][2],
    }
    if len(results) == 2:
        report["other"] = {"invariants": _table_doc(results[1][0]), "self_similar": results[1][1], "sites": results[1][2]}
        report["equivalent"] = results[0][1] and results[1][1] and results[0][0].matrices == results[1][0].matrices
    _emit(report)
    return EXIT_OK


def _load_matrices(path) -> list:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict) and doc.get("type") == "invariants":
        mats = exporter.from_document(doc).matrices
    else:
        raw = doc["matrices"] if isinstance(doc, dict) else doc
        mats = [
            [[exporter.parse_rational(x, f"matrices[{a}][{r}][{c}]") for c, x in enumerate(row)] for r, row in enumerate(m)]
            for a, m in enumerate(raw)
        ]
    return [TransitionMatrix(m, axis=i + 1) for i, m in enumerate(mats)]


def cmd_verify(cfg) -> int:
    start = time.perf_counter()
    checks = []

    def record(name, passed, **extra):
        checks.append({"name": name, "passed": bool(passed), **extra})

    matrices = _load_matrices(cfg.matrices) if getattr(cfg, "matrices", None) else canonical_matrices(cfg.n)
    n = len(matrices)
    record("commutation", check_compatibility(matrices))
    record("symmetry", check_symmetry(matrices))
    record("hyperplane", check_hyperplane_criterion(matrices))

    kind = FractalKind(cfg.kind, n, cfg.m)
    frame = _frame(cfg) if n == cfg.n else default_frame(cfg.kind, n)
    extent = required_extent(kind)
    if (kind.side + 1) ** n <= 2 * 10 ** 5:
        rec = generate_points_recurrence(frame, extent)
        record("structure_residual", not verify_structure(rec))
        if check_compatibility(matrices):
            mat = generate_points_matrix(frame, matrices, extent)
            violations = verify_structure(mat)
            record("method_equivalence", mat.points == rec.points, violations=len(violations))
        else:
            record("method_equivalence", False, reason="matrices do not commute")
    closed = count_closed_form(kind)
    if closed <= MAX_ENUMERATION:
        enumerated = len(enumerate_cells(kind))
        record("count", enumerated == closed, closed_form=closed, enumerated=enumerated)
    passed = all(c["passed"] for c in checks)
    _emit({"command": "verify", "kind": cfg.kind, "n": n, "m": cfg.m, "passed": passed, "checks": checks,
           "seconds": round(time.perf_counter() - start, 6)})
    return EXIT_OK if passed else EXIT_FAILED


def cmd_count(cfg) -> int:
    kind = FractalKind(cfg.kind, cfg.n, cfg.m)
    closed = count_closed_form(kind)
    report = {"command": "count", "kind": cfg.kind, "n": cfg.n, "m": cfg.m, "closed_form": closed}
    if closed <= MAX_ENUMERATION:
        enumerated = len(enumerate_cells(kind))
        report["enumerated"] = enumerated
        report["agree"] = enumerated == closed
    _emit(report)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "slice": cmd_slice,
    "invariants": cmd_invariants,
    "verify": cmd_verify,
    "count": cmd_count,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = int(exc.code) if exc.code is not None else EXIT_OK
        if code != EXIT_OK:
            _emit({"error": "usage", "message": "invalid arguments (see stderr)"})
        return code
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        _emit({"error": "usage", "message": str(exc)})
        return EXIT_USAGE
    except (DegenerateFrameError, ParseError) as exc:
        _emit({"error": "validation", "message": str(exc)})
        return EXIT_INVALID
    except OSError as exc:
        _emit({"error": "io", "message": str(exc)})
        return EXIT_IO
    except LatticeError as exc:
        _emit({"error": "validation", "message": str(exc)})
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
