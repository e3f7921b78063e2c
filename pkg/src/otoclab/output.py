"""Deterministic file output: CSV series, JSON summaries, self-describing
Husimi grid files, gnuplot scripts, and a JSON-lines manifest.

All floats are written with 17 significant digits, LF endings, UTF-8, and
JSON keys sorted, so identical configs reproduce bit-identical data files.
Wall-clock times live only in the manifest.
"""
from __future__ import annotations

import json
import os
import time

import numpy as np
import scipy

from . import __version__
from .husimi import HusimiGrid


def fmt(x: float) -> str:
    return format(float(x), ".17g")


class Manifest:
    """Single-writer JSONL manifest for one output directory."""

    def __init__(self, out_dir: str, config_hash: str):
        self.path = os.path.join(out_dir, "manifest.jsonl")
        self.config_hash = config_hash

    def record(self, file_path: str, wall_time: float):
        entry = {
            "config_hash": self.config_hash,
            "file": os.path.basename(file_path),
            "versions": {
                "numpy": np.__version__,
                "otoclab": __version__,
                "scipy": scipy.__version__,
            },
            "wall_time_s": round(wall_time, 6),
        }
        with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")


def write_csv(path: str, header: list[str], columns: list[np.ndarray],
              manifest: Manifest | None = None):
    t0 = time.monotonic()
    rows = len(columns[0])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(fmt(col[i]) for col in columns) + "\n")
    if manifest is not None:
        manifest.record(path, time.monotonic() - t0)


def write_json(path: str, obj, manifest: Manifest | None = None):
    t0 = time.monotonic()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")
    if manifest is not None:
        manifest.record(path, time.monotonic() - t0)


def write_grid(path: str, hg: HusimiGrid, manifest: Manifest | None = None):
    """Self-describing text grid: header 'q_min q_max n_q p_min p_max n_p',
    then row-major Q values, one grid row per line."""
    t0 = time.monotonic()
    g = hg.grid
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{fmt(g.q_min)} {fmt(g.q_max)} {g.n_q} "
            f"{fmt(g.p_min)} {fmt(g.p_max)} {g.n_p}\n"
        )
        for row in hg.values:
            fh.write(" ".join(fmt(v) for v in row) + "\n")
    if manifest is not None:
        manifest.record(path, time.monotonic() - t0)


def read_grid(path: str) -> tuple[tuple[float, float, int, float, float, int], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        parts = fh.readline().split()
        hdr = (float(parts[0]), float(parts[1]), int(parts[2]),
               float(parts[3]), float(parts[4]), int(parts[5]))
        vals = np.loadtxt(fh)
    return hdr, vals.reshape(hdr[2], hdr[5])


def write_gnuplot(path: str, lines: list[str], manifest: Manifest | None = None):
    t0 = time.monotonic()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    if manifest is not None:
        manifest.record(path, time.monotonic() - t0)
