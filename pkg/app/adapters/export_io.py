"""
Writers for meshes (Wavefront OBJ), point clouds (CSV) and verification reports (JSON).
Numeric output never depends on the locale.
"""
from __future__ import annotations

import csv
import io
import logging
import sys
from pathlib import Path
from typing import Iterable

import numpy as np

from app.config import EXPORT_SETTINGS, ExportSettings
from app.domain import skgeom
from app.domain.exceptions import ExportIOError
from app.domain.mesh import MeshData
from app.domain.skgeom import PointData
from app.domain.verify import VerificationReport

logger = logging.getLogger(__name__)


def format_number(value: float, digits: int) -> str:
    text = f"{float(value):.{digits}g}"
    return "0" if text in ("-0", "0") else text


def obj_text(m: MeshData, *, settings: ExportSettings = EXPORT_SETTINGS) -> str:
    digits = settings.OBJ_SIGNIFICANT_DIGITS
    lines = ["v " + " ".join(format_number(c, digits) for c in vertex) for vertex in m.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in m.faces]
    return "".join(line + "\n" for line in lines)


def _write(path: str | Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as file:
            file.write(text)
    except OSError as e:
        logger.error("could not write %s: %s", path, e)
        raise ExportIOError(f"could not write {path}: {e.strerror or e}") from e


def write_obj(m: MeshData, path: str | Path, *, settings: ExportSettings = EXPORT_SETTINGS) -> None:
    _write(path, obj_text(m, settings=settings))
    logger.info("wrote %d vertices and %d faces to %s", len(m.vertices), len(m.faces), path)


def csv_header(n: int) -> list[str]:
    return [f"x{k}" for k in range(1, n + 1)] + [f"y{k}" for k in range(1, n + 1)] + ["f", "det_gxy", "min_sv"]


def csv_text(points: Iterable[PointData], n: int | None = None) -> tuple[str, int]:
    """CSV of the nondegenerate points and the number of skipped degenerate ones."""
    collected = list(points)
    if n is None:
        if not collected:
            raise ValueError("arity is needed to write an empty point cloud")
        n = collected[0].n
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(csv_header(n))
    skipped = 0
    for p in collected:
        gate = skgeom.nondegeneracy(p.tau)
        if not gate.ok:
            skipped += 1
            continue
        row = np.concatenate([p.imm, [skgeom.volume_check(p).det_gxy, gate.min_sv]])
        writer.writerow([repr(float(c)) for c in row])
    return buffer.getvalue(), skipped


def write_csv(points: Iterable[PointData], path: str | Path, *, n: int | None = None) -> int:
    text, skipped = csv_text(points, n)
    _write(path, text)
    if skipped:
        logger.info("omitted %d degenerate samples from %s", skipped, path)
    return skipped


def report_json(report: VerificationReport) -> str:
    return report.model_dump_json(by_alias=True, indent=2) + "\n"


def write_report(report: VerificationReport, path: str | Path | None = None) -> None:
    text = report_json(report)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    _write(path, text)
