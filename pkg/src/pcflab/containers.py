"""Self-describing snapshot containers and CSV diagnostics.

A snapshot file is a JSON header followed by raw little-endian payload:

    magic 'PCFS'   (4 bytes)
    header length  (8-byte little-endian unsigned)
    header JSON    (utf-8): grid block, channel table, free-form meta
    payload        concatenated arrays, C order, '<f8' or '<c16'

Complex channels are stored as '<c16', i.e. interleaved real/imaginary
64-bit floats.  CSV diagnostics are written with repr-exact floats so that
reruns with the same seed produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import struct

import numpy as np

from .errors import ValidationError
from .grid import ChartGrid

MAGIC = b"PCFS"
FORMAT_VERSION = 1


def write_snapshot(path, grid: ChartGrid, channels: dict, meta=None):
    """Write named arrays over a grid to a container file."""
    chan_table = []
    blobs = []
    for name, arr in channels.items():
        arr = np.asarray(arr)
        if np.iscomplexobj(arr):
            arr = arr.astype("<c16")
            dtype = "<c16"
        else:
            arr = arr.astype("<f8")
            dtype = "<f8"
        chan_table.append({"name": name, "shape": list(arr.shape),
                           "dtype": dtype})
        blobs.append(np.ascontiguousarray(arr).tobytes())
    header = {
        "format": "pcflab-snapshot",
        "version": FORMAT_VERSION,
        "grid": {"points_per_axis": grid.points_per_axis,
                 "periods": list(grid.periods),
                 "complex_dim": grid.complex_dim},
        "channels": chan_table,
        "meta": meta or {},
    }
    hb = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(hb)))
        fh.write(hb)
        for b in blobs:
            fh.write(b)


def read_snapshot(path):
    """Read a container; returns (grid, channels dict, meta dict)."""
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValidationError(f"{path}: not a snapshot container",
                                  field="file")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("version") != FORMAT_VERSION:
            raise ValidationError(f"{path}: unsupported container version",
                                  field="version")
        g = header["grid"]
        grid = ChartGrid(points_per_axis=g["points_per_axis"],
                         periods=tuple(g["periods"]),
                         complex_dim=g["complex_dim"])
        channels = {}
        for ch in header["channels"]:
            n = int(np.prod(ch["shape"]))
            dt = np.dtype(ch["dtype"])
            buf = fh.read(n * dt.itemsize)
            channels[ch["name"]] = np.frombuffer(buf, dtype=dt).reshape(
                ch["shape"]).copy()
    return grid, channels, header.get("meta", {})


def fmt_float(x):
    """repr-exact, platform-stable float formatting for CSV cells."""
    return format(float(x), ".17g")


def write_csv(path, columns, rows):
    """Write diagnostics rows; floats via fmt_float for byte determinism."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt_float(v) if isinstance(v, (float, np.floating))
                        else v for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        cols = next(rd)
        rows = [r for r in rd]
    return cols, rows
