"""File formats and the output writer.

Field snapshots use a 32-byte little-endian header followed by the raw
complex128 samples in row-major order::

    offset  0  4s   magic b"QCF1"
    offset  4  u32  dimension d
    offset  8  u32  points per axis n
    offset 12  4x   zero padding (aligns the f64)
    offset 16  f64  half side L
    offset 24  u64  payload length in bytes (16 * n**d)

Trajectories are a directory of such snapshots plus an index JSON
``{"times": [...], "frame_files": [...]}``.  JSON output is written with
sorted keys and NaN/inf mapped to null, CSV floats with 17 significant
digits, so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import struct
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import OutputError
from .propagators import TimeGrid, Trajectory
from .spectral import Field, fft, make_grid

MAGIC = b"QCF1"
HEADER = struct.Struct("<4sII4xdQ")


def encode_field(f: Field) -> bytes:
    payload = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    return HEADER.pack(MAGIC, f.grid.d, f.grid.n, f.grid.half_side, len(payload)) + payload


def decode_field(blob: bytes) -> Field:
    if len(blob) < HEADER.size:
        raise OutputError("field file shorter than its header")
    magic, d, n, half_side, length = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise OutputError(f"bad magic {magic!r}")
    grid = make_grid(d, n, half_side)
    if length != 16 * grid.size or len(blob) - HEADER.size != length:
        raise OutputError(f"payload length {len(blob) - HEADER.size} does not match header ({length})")
    values = np.frombuffer(blob, dtype="<c16", offset=HEADER.size).reshape(grid.shape)
    return Field(grid, values)


def read_field(path) -> Field:
    try:
        return decode_field(Path(path).read_bytes())
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from None


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return "nan" if not math.isfinite(value) else format(float(value), ".17g")
    return str(value)


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def spectrum_rows(f: Field):
    """``(|k|², re, im)`` of the normalized Fourier coefficients, FFT order."""
    hat = fft(f.values, f.grid) / f.grid.size
    return zip(f.grid.k_squared.reshape(-1), hat.real.reshape(-1), hat.imag.reshape(-1))


def slice_rows(f: Field):
    """Plane ``x_3 = 0`` of a 3-D field as ``(x1, x2, re, im)`` rows."""
    if f.grid.d != 3:
        raise ValueError("slices are defined for 3-D fields only")
    mid = f.grid.n // 2  # coordinates run from -L, so index n/2 is x = 0
    x = f.grid.coordinates
    plane = f.values[:, :, mid]
    for i in range(f.grid.n):
        for j in range(f.grid.n):
            yield x[i], x[j], plane[i, j].real, plane[i, j].imag


# -- SVG ------------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def svg_line_plot(
    x: Sequence[float],
    series: dict,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    log_y: bool = False,
) -> str:
    """Self-contained SVG polyline plot; non-finite points are dropped."""
    width, height, pad = 480, 320, 56
    xs = np.asarray(x, dtype=float)
    cleaned = {}
    for name, ys in series.items():
        ys = np.asarray(ys, dtype=float)
        ok = np.isfinite(xs) & np.isfinite(ys) & ((ys > 0) if log_y else True)
        cleaned[name] = (xs[ok], np.log10(ys[ok]) if log_y else ys[ok])
    all_x = np.concatenate([v[0] for v in cleaned.values()] or [np.zeros(0)])
    all_y = np.concatenate([v[1] for v in cleaned.values()] or [np.zeros(0)])
    if all_x.size == 0:
        all_x, all_y = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(all_x.min()), float(all_x.max())
    y0, y1 = float(all_y.min()), float(all_y.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    ylab = f"log10 {ylabel}" if log_y else ylabel
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{pad / 2}" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">{_esc(xlabel)}</text>',
        f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height / 2})">{_esc(ylab)}</text>',
        f'<text x="{pad}" y="{height - pad + 16}" text-anchor="middle" font-size="10">{x0:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="middle" font-size="10">{x1:.4g}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="10">{y1:.4g}</text>',
    ]
    for idx, (name, (sx, sy)) in enumerate(cleaned.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(sx, sy))
        if pts:
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
            for a, b in zip(sx, sy):
                parts.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="2.5" fill="{color}"/>')
        parts.append(f'<text x="{width - pad}" y="{pad + 14 * (idx + 1)}" text-anchor="end" '
                     f'font-size="11" fill="{color}">{_esc(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# -- output directory ----------------------------------------------------------


class OutputWriter:
    """Writes artifacts under one directory and records their checksums.

    ``finish`` writes ``manifest.json`` last; it is the only file carrying
    timestamps.
    """

    def __init__(self, root, config: Optional[dict] = None, version: str = ""):
        self.root = Path(root)
        self.config = config or {}
        self.version = version
        self.started = _now()
        self.files: dict[str, str] = {}
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {self.root}: {exc}") from None

    def _write(self, name: str, data: bytes) -> Path:
        path = self.root / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from None
        self.files[name] = hashlib.sha256(data).hexdigest()
        return path

    def text(self, name: str, content: str) -> Path:
        return self._write(name, content.encode("utf-8"))

    def json(self, name: str, obj) -> Path:
        return self.text(name, dumps_json(obj))

    def csv(self, name: str, header, rows) -> Path:
        return self.text(name, csv_text(header, rows))

    def field(self, name: str, f: Field) -> Path:
        return self._write(name, encode_field(f))

    def spectrum(self, name: str, f: Field) -> Path:
        return self.csv(name, ["k2", "re", "im"], spectrum_rows(f))

    def snapshot(self, stem: str, f: Field) -> None:
        """Field binary, plus the ``x_3 = 0`` slice CSV for 3-D fields."""
        self.field(f"{stem}.qcf", f)
        if f.grid.d == 3:
            self.csv(f"{stem}_slice.csv", ["x1", "x2", "re", "im"], slice_rows(f))

    def trajectory(self, stem: str, traj: Trajectory, every: int = 1) -> Path:
        every = max(1, every)
        picks = list(range(0, traj.times.nt + 1, every))
        if picks[-1] != traj.times.nt:
            picks.append(traj.times.nt)
        names = []
        for m in picks:
            name = f"{stem}/frame_{m:05d}.qcf"
            self.field(name, traj.frame(m))
            names.append(Path(name).name)
        index = {"times": [float(traj.times.nodes[m]) for m in picks], "frame_files": names}
        return self.json(f"{stem}/index.json", index)

    def plot(self, stem: str, header: Sequence[str], rows, title: str = "", log_y: bool = False) -> None:
        """Line data: CSV with ``header`` plus an SVG of columns 2.. against column 1."""
        rows = [tuple(r) for r in rows]
        self.csv(f"{stem}.csv", header, rows)
        x = [r[0] for r in rows]
        series = {h: [r[j] for r in rows] for j, h in enumerate(header) if j > 0}
        self.text(f"{stem}.svg", svg_line_plot(x, series, title, header[0], ", ".join(header[1:]), log_y))

    def heatmap(self, stem: str, header: Sequence[str], rows) -> Path:
        return self.csv(f"{stem}.csv", header, rows)

    def finish(self, verdicts: dict, extra: Optional[dict] = None) -> dict:
        manifest = {
            "artifact_version": self.version,
            "config": self.config,
            "started": self.started,
            "finished": _now(),
            "files": dict(sorted(self.files.items())),
            "verdicts": verdicts,
        }
        if extra:
            manifest.update(extra)
        try:
            (self.root / "manifest.json").write_text(dumps_json(manifest), encoding="utf-8")
        except OSError as exc:
            raise OutputError(f"cannot write manifest: {exc}") from None
        return manifest


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def read_trajectory(index_path) -> Trajectory:
    index_path = Path(index_path)
    try:
        index = json.loads(index_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise OutputError(f"cannot read trajectory index {index_path}: {exc}") from None
    frames = [read_field(index_path.parent / name) for name in index["frame_files"]]
    times = index["times"]
    if len(times) < 2:
        raise OutputError("trajectory index needs at least two frames")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise OutputError("stored frames are not equally spaced; read them with read_field instead")
    grid = frames[0].grid
    tg = TimeGrid(times[0], times[-1], len(times) - 1)
    return Trajectory(grid, tg, np.stack([f.values for f in frames]))


def output_files(root) -> list[str]:
    """All files under ``root`` except the manifest, as sorted relative paths."""
    root = Path(root)
    out = []
    for dirpath, _, names in os.walk(root):
        for name in names:
            rel = Path(dirpath, name).relative_to(root).as_posix()
            if rel != "manifest.json":
                out.append(rel)
    return sorted(out)

