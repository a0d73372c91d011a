"""CSV ingestion and export for fingerprints, RP maps, latents and deltas.

All formats are line-oriented UTF-8 with `.` as the decimal separator.
Floats are written with Python's shortest round-trip representation, so
write -> read is lossless.
"""

from __future__ import annotations

import csv

import numpy as np

from .data import Dataset, Fingerprint, RpMap
from .errors import ParseError

_FP_FIXED_COLS = ("rp_id", "device_id", "ci")


def _ap_header(ap_count: int) -> list[str]:
    width = max(3, len(str(max(ap_count - 1, 0))))
    return [f"ap_{i:0{width}d}" for i in range(ap_count)]


def write_fingerprints_csv(ds: Dataset, path: str) -> None:
    """Write a dataset in the `rp_id,device_id,ci,ap_000,...` schema."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(_FP_FIXED_COLS) + _ap_header(ds.ap_count))
        for fp in ds:
            writer.writerow([fp.rp_id, fp.device_id, fp.ci] + [repr(float(v)) for v in fp.rss])


def read_fingerprints_csv(path: str) -> Dataset:
    """Parse a fingerprint CSV, reporting the offending line on any violation."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path=path, line=1) from None
        if tuple(header[:3]) != _FP_FIXED_COLS or len(header) < 4:
            raise ParseError(
                f"header must start with {','.join(_FP_FIXED_COLS)} followed by AP columns",
                path=path,
                line=1,
            )
        ap_count = len(header) - 3
        if header[3:] != _ap_header(ap_count):
            raise ParseError("malformed AP column names", path=path, line=1)

        fps = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3 + ap_count:
                raise ParseError(
                    f"expected {3 + ap_count} fields, got {len(row)}", path=path, line=lineno
                )
            try:
                rp_id = int(row[0])
                ci = int(row[2])
                rss = np.asarray([float(v) for v in row[3:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"non-numeric field: {exc}", path=path, line=lineno) from None
            try:
                fps.append(Fingerprint(rp_id, row[1], ci, rss))
            except Exception as exc:
                raise ParseError(str(exc), path=path, line=lineno) from None
        if not fps:
            raise ParseError("no fingerprint rows", path=path, line=2)
    return Dataset(tuple(fps), ap_count)


def write_rp_map_csv(rp_map: RpMap, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rp_id", "x_m", "y_m"])
        for rp_id in sorted(rp_map.entries):
            x, y = rp_map.entries[rp_id]
            writer.writerow([rp_id, repr(x), repr(y)])


def read_rp_map_csv(path: str) -> RpMap:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path=path, line=1) from None
        if header != ["rp_id", "x_m", "y_m"]:
            raise ParseError("header must be rp_id,x_m,y_m", path=path, line=1)
        entries = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", path=path, line=lineno)
            try:
                rp_id, x, y = int(row[0]), float(row[1]), float(row[2])
            except ValueError as exc:
                raise ParseError(f"non-numeric field: {exc}", path=path, line=lineno) from None
            if rp_id in entries:
                raise ParseError(f"duplicate rp_id {rp_id}", path=path, line=lineno)
            entries[rp_id] = (x, y)
        if not entries:
            raise ParseError("no coordinate rows", path=path, line=2)
    return RpMap(entries)


def write_latents_csv(rp_ids, bit_matrix: np.ndarray, path: str) -> None:
    """Write latent codes in the `rp_id,bit_000,...` schema, one row per code."""
    bits = np.asarray(bit_matrix, dtype=np.uint8)
    rp_ids = list(rp_ids)
    if bits.ndim != 2 or len(rp_ids) != bits.shape[0]:
        raise ParseError(f"{len(rp_ids)} rp_ids for {bits.shape[0]} latent rows", path=path)
    width = max(3, len(str(max(bits.shape[1] - 1, 0))))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rp_id"] + [f"bit_{i:0{width}d}" for i in range(bits.shape[1])])
        for rp_id, row in zip(rp_ids, bits):
            writer.writerow([rp_id] + [int(b) for b in row])


def read_latents_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read latent codes back as (rp_ids, (rows, bits) uint8 matrix)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path=path, line=1) from None
        if not header or header[0] != "rp_id" or len(header) < 2:
            raise ParseError("header must be rp_id,bit_000,...", path=path, line=1)
        n_bits = len(header) - 1
        rp_ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 1 + n_bits:
                raise ParseError(
                    f"expected {1 + n_bits} fields, got {len(row)}", path=path, line=lineno
                )
            try:
                rp_ids.append(int(row[0]))
                bits = [int(v) for v in row[1:]]
            except ValueError as exc:
                raise ParseError(f"non-numeric field: {exc}", path=path, line=lineno) from None
            if any(b not in (0, 1) for b in bits):
                raise ParseError("latent bits must be 0 or 1", path=path, line=lineno)
            rows.append(bits)
        if not rows:
            raise ParseError("no latent rows", path=path, line=2)
    return np.asarray(rp_ids, dtype=np.int64), np.asarray(rows, dtype=np.uint8)


def read_delta_csv(path: str) -> np.ndarray:
    """Read a per-AP delta vector from `ap_index,delta_db` rows.

    Indices must cover 0..N-1 exactly once; the vector length is inferred.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path=path, line=1) from None
        if header != ["ap_index", "delta_db"]:
            raise ParseError("header must be ap_index,delta_db", path=path, line=1)
        deltas: dict[int, float] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", path=path, line=lineno)
            try:
                idx, value = int(row[0]), float(row[1])
            except ValueError as exc:
                raise ParseError(f"non-numeric field: {exc}", path=path, line=lineno) from None
            if idx in deltas:
                raise ParseError(f"duplicate ap_index {idx}", path=path, line=lineno)
            deltas[idx] = value
    if not deltas:
        raise ParseError("no delta rows", path=path, line=2)
    expected = set(range(len(deltas)))
    if set(deltas) != expected:
        missing = sorted(expected - set(deltas))
        raise ParseError(f"ap_index values must cover 0..{len(deltas) - 1}; missing {missing}", path=path)
    return np.asarray([deltas[i] for i in range(len(deltas))], dtype=np.float64)
