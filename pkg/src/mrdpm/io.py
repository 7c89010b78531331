"""Track files and result tables.

Input tracks are delimiter-separated text with the header
``position,count1,count2`` and optional ``exposure1,exposure2`` columns.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .errors import DuplicatePositionError, TrackFormatError
from .model import CountTrack

BASE_COLUMNS = ["position", "count1", "count2"]
EXPOSURE_COLUMNS = ["exposure1", "exposure2"]


def fmt(x: float) -> str:
    """Six significant digits, the canonical float form in all outputs."""
    return f"{float(x):.6g}"


def _parse_int(text, row, name):
    try:
        value = float(text)
    except ValueError:
        raise TrackFormatError(f"{name} {text!r} is not a number", row) from None
    if not np.isfinite(value) or value != int(value):
        raise TrackFormatError(f"{name} {text!r} is not an integer", row)
    return int(value)


def read_track(path) -> CountTrack:
    """Parse a track file; rows are sorted by position on load."""
    with open(path, newline="") as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines:
        raise TrackFormatError("file is empty", 1)
    delimiter = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(lines, delimiter=delimiter)
    header = [h.strip().lower() for h in next(reader)]
    if header not in (BASE_COLUMNS, BASE_COLUMNS + EXPOSURE_COLUMNS):
        raise TrackFormatError(
            "header must be position,count1,count2[,exposure1,exposure2], got " + ",".join(header), 1
        )
    width = len(header)
    rows = []
    seen = {}
    for rownum, fields in enumerate(reader, start=2):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != width:
            raise TrackFormatError(f"expected {width} fields, found {len(fields)}", rownum)
        pos = _parse_int(fields[0], rownum, "position")
        c1 = _parse_int(fields[1], rownum, "count1")
        c2 = _parse_int(fields[2], rownum, "count2")
        if c1 < 0 or c2 < 0:
            raise TrackFormatError("counts must be non-negative", rownum)
        e1 = e2 = 1.0
        if width == 5:
            try:
                e1, e2 = float(fields[3]), float(fields[4])
            except ValueError:
                raise TrackFormatError("exposures must be numbers", rownum) from None
            if not (np.isfinite(e1) and np.isfinite(e2) and e1 > 0 and e2 > 0):
                raise TrackFormatError("exposures must be positive", rownum)
        if pos in seen:
            raise DuplicatePositionError(
                f"duplicate position {pos} (first seen on row {seen[pos]})", rownum
            )
        seen[pos] = rownum
        rows.append((pos, c1, c2, e1, e2))
    if not rows:
        raise TrackFormatError("no data rows", 2)
    rows.sort()
    cols = list(zip(*rows))
    return CountTrack(
        np.array(cols[0], dtype=np.int64),
        np.array(cols[1], dtype=np.int64),
        np.array(cols[2], dtype=np.int64),
        np.array(cols[3], dtype=float),
        np.array(cols[4], dtype=float),
    )


def write_track(track: CountTrack, path, exposures: bool | None = None) -> None:
    """Write a track; exposure columns are omitted when all are 1 unless forced."""
    if exposures is None:
        exposures = not (np.all(track.exposures1 == 1.0) and np.all(track.exposures2 == 1.0))
    header = BASE_COLUMNS + (EXPOSURE_COLUMNS if exposures else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(track)):
            row = [int(track.positions[i]), int(track.counts1[i]), int(track.counts2[i])]
            if exposures:
                row += [fmt(track.exposures1[i]), fmt(track.exposures2[i])]
            w.writerow(row)


def write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_results(result, track: CountTrack, out_dir) -> dict:
    """Write omegas.csv, flagged.csv, decisions.log and plotdata.csv.

    ``result`` is a :class:`~mrdpm.multires.MultiresResult`. Returns the
    written paths by name.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        name: os.path.join(out_dir, name)
        for name in ("omegas.csv", "flagged.csv", "decisions.log", "plotdata.csv")
    }
    index = {int(p): i for i, p in enumerate(track.positions)}
    write_table(paths["omegas.csv"], ["position", "omega"], [(p, fmt(w)) for p, w in result.leaf_omegas])
    write_table(paths["flagged.csv"], ["position", "omega"], [(p, fmt(w)) for p, w in result.flagged])
    with open(paths["decisions.log"], "w") as fh:
        for line in result.decision_log_lines():
            fh.write(line + "\n")
    plot_rows = []
    for p, w in result.leaf_omegas:
        i = index[p]
        plot_rows.append((p, fmt(w), int(track.counts1[i]), int(track.counts2[i])))
    write_table(paths["plotdata.csv"], ["position", "omega", "count1", "count2"], plot_rows)
    return paths
