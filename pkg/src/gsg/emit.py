"""Byte-stable CSV and JSON emission plus the run manifest.

Floats are written with ``repr`` (shortest round-trip decimal), lines end in
``\\n`` and JSON keys are sorted, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import OutputError


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return repr(value)  # "inf" / "nan": JSON has no literal for them
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class Emitter:
    """Writes files under ``out_dir`` and remembers their checksums."""

    out_dir: Path
    snapshot: dict | None = None  # config embedded in every summary
    outputs: dict = field(default_factory=dict)  # relative name -> sha256

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {self.out_dir}: {exc}") from None

    def _write(self, name: str, text: str):
        data = text.encode("utf-8")
        path = self.out_dir / name
        try:
            path.write_bytes(data)
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from None
        self.outputs[name] = hashlib.sha256(data).hexdigest()
        return path

    def csv(self, name, header, rows):
        return self._write(name, csv_text(header, rows))

    def json(self, name, obj):
        return self._write(name, json_text(obj))

    def summary(self, name, obj: dict):
        """JSON summary with the run configuration embedded under ``config``."""
        return self.json(name, {**obj, "config": self.snapshot})

    def manifest(self, **fields):
        """Write ``manifest.json`` listing every earlier output with its sha256."""
        body = dict(fields)
        body["outputs"] = [{"path": k, "sha256": v} for k, v in sorted(self.outputs.items())]
        text = json_text(body)
        path = self.out_dir / "manifest.json"
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from None
        return body


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
