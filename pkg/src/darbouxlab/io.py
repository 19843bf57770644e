"""File formats: JSON potentials, records and matrices; flat key = value configs; fixed-format CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import FileFormatError, InvalidMatrix
from .matgroup import PermutationSchedule, matrix_from_json
from .scattering import Potential, ScatteringRecord, p_values


def fmt(x) -> str:
    """17 significant digits, so that a float round-trips exactly."""
    return format(float(x), ".17g")


def write_csv(path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[min(exc.lineno, len(lines)) - 1] if lines else ""
        raise FileFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}: {context.strip()[:80]!r}") from exc


def load_potential(path) -> Potential:
    obj = read_json(path)
    try:
        return Potential.from_json(obj)
    except (KeyError, TypeError, ValueError, InvalidMatrix) as exc:
        raise FileFormatError(f"{path}: not a potential file ({exc})") from exc


def load_matrix(path) -> np.ndarray:
    """A matrix object ``{"n", "re", "im"}`` or a nested list of rows (entries may be ``[re, im]`` pairs)."""
    obj = read_json(path)
    try:
        if isinstance(obj, dict):
            return matrix_from_json(obj)
        rows = [[complex(*v) if isinstance(v, list) else complex(v) for v in row] for row in obj]
        return np.array(rows, dtype=complex)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: not a matrix file ({exc})") from exc


def record_summary(rec: ScatteringRecord, schedule: PermutationSchedule) -> tuple[list[str], list[list]]:
    """Per-node CSV rows: xi, det and unitarity residuals, and the chart momenta ``p_nu``."""
    header = ["xi", "flagged", "det_residual", "unitarity_residual"]
    header += [f"p{nu}_{part}" for nu in range(len(schedule)) for part in ("re", "im")]
    eye = np.eye(rec.n)
    rows = []
    for i, x in enumerate(rec.xi):
        s = rec.s[i]
        row = [x, str(int(rec.flagged[i])), abs(np.linalg.det(s) - 1), np.abs(s @ s.conj().T - eye).max()]
        if rec.flagged[i]:
            row += ["nan"] * (2 * len(schedule))
        else:
            for p in p_values(s, schedule):
                row += [p.real, p.imag]
        rows.append(row)
    return header, rows


def save_record(rec: ScatteringRecord, json_path, csv_path, schedule: PermutationSchedule) -> None:
    write_json(json_path, rec.to_json())
    write_csv(csv_path, *record_summary(rec, schedule))


def load_record(path) -> ScatteringRecord:
    obj = read_json(path)
    try:
        return ScatteringRecord.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: not a scattering record ({exc})") from exc


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from exc
    out = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FileFormatError(f"{path}:{num}: expected 'key = value': {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise FileFormatError(f"{path}:{num}: empty key")
        out[key.replace("-", "_")] = value
    return out
