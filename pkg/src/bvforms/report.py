"""Deterministic CSV/JSON artifacts with embedded config and content hashes."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path


def blob_hash(data: bytes) -> str:
    """Git blob id: sha1 over 'blob <size>\\0' followed by the bytes."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item") and callable(v.item):
        return _fmt(v.item())
    return v


class ArtifactWriter:
    """Collects files for one run; the JSON summary lists every file's hash."""

    def __init__(self, outdir, command: str, config: dict):
        self.outdir = Path(outdir)
        self.command = command
        self.config = config
        self.files: dict[str, str] = {}

    def _write(self, name: str, data: bytes) -> Path:
        self.outdir.mkdir(parents=True, exist_ok=True)
        path = self.outdir / name
        path.write_bytes(data)
        self.files[name] = blob_hash(data)
        return path

    def csv(self, name: str, header, rows) -> Path:
        return self._write(name, csv_text(header, rows).encode())

    def binary(self, name: str, data: bytes) -> Path:
        return self._write(name, data)

    def summary(self, name: str, result: dict) -> tuple[Path, dict]:
        doc = {
            "command": self.command,
            "config": self.config,
            "result": result,
            "artifacts": dict(sorted(self.files.items())),
        }
        doc["content_hash"] = blob_hash(dumps(doc).encode())
        path = self._write(name, dumps(doc).encode())
        return path, doc
