"""Fingerprint domain types and the normalize/binarize/split front-end."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import ConfigError, SplitError, UnknownRpError, ValidationError

# A non-detected AP is recorded as exactly this dBm value. It normalizes to 0
# and binarizes to 0, so a missing AP behaves like an inactive one.
RSS_SENTINEL = -100.0

# Fixed global dBm range used for min-max scaling. A global range (rather than
# per-dataset min/max) keeps later collection instances on the same scale as
# the training data.
DEFAULT_RSS_LO = -100.0
DEFAULT_RSS_HI = 0.0

DEFAULT_THRESHOLD = 0.5


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Fingerprint:
    """One RSS vector (dBm per AP) tagged with RP label, device and collection instance."""

    rp_id: int
    device_id: str
    ci: int
    rss: np.ndarray  # dBm per AP

    def __post_init__(self):
        rss = np.asarray(self.rss, dtype=np.float64)
        if rss.ndim != 1 or rss.size == 0:
            raise ValidationError("rss must be a non-empty 1-D vector")
        if not np.all(np.isfinite(rss)):
            raise ValidationError("rss values must be finite")
        if self.rp_id < 0:
            raise ValidationError(f"rp_id must be non-negative, got {self.rp_id}")
        if self.ci < 0:
            raise ValidationError(f"ci must be non-negative, got {self.ci}")
        object.__setattr__(self, "rss", _readonly(rss))

    @property
    def ap_count(self) -> int:
        return int(self.rss.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return (
            self.rp_id == other.rp_id
            and self.device_id == other.device_id
            and self.ci == other.ci
            and np.array_equal(self.rss, other.rss)
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """A collection of fingerprints sharing one AP inventory."""

    fingerprints: tuple[Fingerprint, ...]
    ap_count: int

    def __post_init__(self):
        object.__setattr__(self, "fingerprints", tuple(self.fingerprints))
        if self.ap_count <= 0:
            raise ValidationError(f"ap_count must be positive, got {self.ap_count}")
        for fp in self.fingerprints:
            if fp.ap_count != self.ap_count:
                raise ValidationError(
                    f"fingerprint for rp {fp.rp_id} has {fp.ap_count} APs, expected {self.ap_count}"
                )

    @classmethod
    def from_fingerprints(cls, fingerprints: Iterable[Fingerprint]) -> "Dataset":
        fps = tuple(fingerprints)
        if not fps:
            raise ValidationError("cannot infer ap_count from an empty fingerprint list")
        return cls(fps, fps[0].ap_count)

    def __len__(self) -> int:
        return len(self.fingerprints)

    def __iter__(self) -> Iterator[Fingerprint]:
        return iter(self.fingerprints)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.ap_count == other.ap_count and self.fingerprints == other.fingerprints

    @property
    def rp_ids(self) -> frozenset[int]:
        return frozenset(fp.rp_id for fp in self.fingerprints)

    @property
    def cis(self) -> tuple[int, ...]:
        return tuple(sorted({fp.ci for fp in self.fingerprints}))

    def rss_matrix(self) -> np.ndarray:
        """Stack all RSS vectors into a (num_fingerprints, ap_count) matrix."""
        if not self.fingerprints:
            return np.empty((0, self.ap_count), dtype=np.float64)
        return np.stack([fp.rss for fp in self.fingerprints])

    def labels(self) -> np.ndarray:
        return np.asarray([fp.rp_id for fp in self.fingerprints], dtype=np.int64)

    def with_ci(self, ci: int) -> "Dataset":
        """Sub-dataset containing only the given collection instance."""
        return Dataset(tuple(fp for fp in self.fingerprints if fp.ci == ci), self.ap_count)


@dataclass(frozen=True)
class RpMap:
    """Planar (x, y) coordinates in meters for each reference point."""

    entries: Mapping[int, tuple[float, float]]

    def __post_init__(self):
        clean = {}
        for rp_id, xy in dict(self.entries).items():
            x, y = float(xy[0]), float(xy[1])
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ValidationError(f"coordinates for rp {rp_id} must be finite")
            clean[int(rp_id)] = (x, y)
        object.__setattr__(self, "entries", clean)

    def __contains__(self, rp_id: int) -> bool:
        return rp_id in self.entries

    @property
    def rp_ids(self) -> frozenset[int]:
        return frozenset(self.entries)

    def coords(self, rp_id: int) -> np.ndarray:
        if rp_id not in self.entries:
            raise UnknownRpError(f"rp_id {rp_id} has no coordinates")
        return np.asarray(self.entries[rp_id], dtype=np.float64)

    def require_covers(self, ds: Dataset) -> None:
        missing = sorted(ds.rp_ids - self.rp_ids)
        if missing:
            raise UnknownRpError(f"rp map lacks coordinates for rp_ids {missing}")


@dataclass(frozen=True, eq=False)
class BinaryFingerprint:
    """Thresholded fingerprint: one {0,1} activity bit per AP."""

    bits: np.ndarray
    source_ap_count: int

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1:
            raise ValidationError("bits must be a 1-D vector")
        if not np.all((bits == 0) | (bits == 1)):
            raise ValidationError("bits must contain only 0 and 1")
        if bits.size != self.source_ap_count:
            raise ValidationError(
                f"got {bits.size} bits for {self.source_ap_count} APs"
            )
        object.__setattr__(self, "bits", _readonly(bits.astype(np.uint8)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryFingerprint):
            return NotImplemented
        return self.source_ap_count == other.source_ap_count and np.array_equal(
            self.bits, other.bits
        )


def normalize_values(
    values: np.ndarray, lo: float = DEFAULT_RSS_LO, hi: float = DEFAULT_RSS_HI
) -> np.ndarray:
    """Clamp dBm values into [lo, hi] and scale linearly onto [0, 1]."""
    if lo >= hi:
        raise ConfigError(f"normalization range requires lo < hi, got [{lo}, {hi}]")
    clipped = np.clip(np.asarray(values, dtype=np.float64), lo, hi)
    return (clipped - lo) / (hi - lo)


def normalize(ds: Dataset, lo: float = DEFAULT_RSS_LO, hi: float = DEFAULT_RSS_HI) -> Dataset:
    """Normalize every fingerprint in the dataset onto [0, 1]."""
    if lo >= hi:
        raise ConfigError(f"normalization range requires lo < hi, got [{lo}, {hi}]")
    fps = tuple(replace(fp, rss=normalize_values(fp.rss, lo, hi)) for fp in ds)
    return Dataset(fps, ds.ap_count)


def binarize(fp: Fingerprint, threshold: float = DEFAULT_THRESHOLD) -> BinaryFingerprint:
    """Threshold a normalized fingerprint into activity bits.

    The comparison is inclusive: a value exactly at the threshold counts as
    active (1).
    """
    _check_threshold(threshold)
    rss = fp.rss
    if rss.min() < 0.0 or rss.max() > 1.0:
        raise ValidationError(
            "binarize expects normalized values in [0, 1]; run normalize() first"
        )
    return BinaryFingerprint((rss >= threshold).astype(np.uint8), fp.ap_count)


def binarize_matrix(values: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Vectorized binarize over a (samples, aps) matrix of normalized values."""
    _check_threshold(threshold)
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise ValidationError(
            "binarize expects normalized values in [0, 1]; run normalize() first"
        )
    return (values >= threshold).astype(np.uint8)


def _check_threshold(threshold: float) -> None:
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"threshold must lie in (0, 1), got {threshold}")


def split_train_test(ds: Dataset, per_rp_holdout: int, seed: int) -> tuple[Dataset, Dataset]:
    """Hold out `per_rp_holdout` fingerprints per (rp_id, ci) group for testing.

    The holdout is chosen by a seeded shuffle, stratified per reference point
    and collection instance, so the same seed always produces the same split.
    Train and test partition the dataset exactly.
    """
    if per_rp_holdout < 0:
        raise ConfigError(f"per_rp_holdout must be non-negative, got {per_rp_holdout}")

    groups: dict[tuple[int, int], list[int]] = {}
    for idx, fp in enumerate(ds):
        groups.setdefault((fp.rp_id, fp.ci), []).append(idx)

    rng = np.random.default_rng(seed)
    test_idx: set[int] = set()
    for (rp_id, ci) in sorted(groups):
        members = groups[(rp_id, ci)]
        if len(members) < per_rp_holdout + 1:
            raise SplitError(
                f"group rp_id={rp_id} ci={ci} has {len(members)} fingerprints; "
                f"need at least {per_rp_holdout + 1} for a holdout of {per_rp_holdout}"
            )
        order = rng.permutation(len(members))
        test_idx.update(members[i] for i in order[:per_rp_holdout])

    train = tuple(fp for i, fp in enumerate(ds) if i not in test_idx)
    test = tuple(fp for i, fp in enumerate(ds) if i in test_idx)
    return Dataset(train, ds.ap_count), Dataset(test, ds.ap_count)
