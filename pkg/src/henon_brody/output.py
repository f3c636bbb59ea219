"""Deterministic file emission: CSV with 17 significant digits, binary PGM
images, atomic writes and sha256 declarations."""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import tempfile
from pathlib import Path

import mpmath
import numpy as np

DIGITS = 17


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, mpmath.mpf):
        if mpmath.isnan(value):
            return "nan"
        return mpmath.nstr(value, DIGITS)
    if isinstance(value, str):
        return value
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{DIGITS - 1}e}"


def csv_bytes(header: list[str], rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue().encode("ascii")


def pgm_bytes(image: np.ndarray) -> bytes:
    """P5 image from a 2-D uint8 array (row 0 at the top)."""
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def atomic_write(path: str | os.PathLike, data: bytes) -> str:
    """Write via a temporary file and rename; returns the sha256 hex digest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return hashlib.sha256(data).hexdigest()


class Emitter:
    """Writes files and records ``(path, sha256)`` declarations."""

    def __init__(self, outdir: str | os.PathLike, stream=None):
        self.outdir = Path(outdir)
        self.stream = stream
        self.declared: list[tuple[str, str]] = []

    def _emit(self, name: str, data: bytes) -> Path:
        path = self.outdir / name
        digest = atomic_write(path, data)
        self.declared.append((str(path), digest))
        if self.stream is not None:
            print(f"wrote {path} sha256={digest}", file=self.stream)
        return path

    def csv(self, name: str, header: list[str], rows) -> Path:
        return self._emit(name, csv_bytes(header, rows))

    def pgm(self, name: str, image: np.ndarray) -> Path:
        return self._emit(name, pgm_bytes(image))

    def text(self, name: str, text: str) -> Path:
        return self._emit(name, text.encode("utf-8"))
