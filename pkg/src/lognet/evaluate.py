"""Metrics and analyses: localization error, latency, latent diffing, bitmaps."""

from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, RpMap
from .errors import ShapeError, ValidationError
from .gates import LatentCode, trace_bit_to_aps
from .models import count_params, model_size_bytes
from .pgm import write_pgm


def sample_errors(preds, truth, rp_map: RpMap) -> np.ndarray:
    """Per-sample Euclidean distance in meters between predicted and true RPs."""
    preds = np.asarray(preds, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if preds.shape != truth.shape:
        raise ShapeError(f"{preds.size} predictions for {truth.size} ground-truth labels")
    if preds.size == 0:
        raise ValidationError("cannot score an empty prediction list")
    pred_xy = np.stack([rp_map.coords(int(p)) for p in preds])
    true_xy = np.stack([rp_map.coords(int(t)) for t in truth])
    return np.linalg.norm(pred_xy - true_xy, axis=1)


def mean_localization_error(preds, truth, rp_map: RpMap) -> float:
    """Mean distance in meters between predicted and true RP coordinates."""
    return float(sample_errors(preds, truth, rp_map).mean())


@dataclass(frozen=True)
class CiStats:
    """Error and accuracy summary for one collection instance."""

    mean_error_m: float
    min_error_m: float
    max_error_m: float
    accuracy: float
    samples: int

    def __post_init__(self):
        if not self.min_error_m <= self.mean_error_m <= self.max_error_m:
            raise ValidationError("per-CI stats require min <= mean <= max")
        if self.mean_error_m < 0:
            raise ValidationError("mean error must be non-negative")


@dataclass
class EvalReport:
    """Per-CI metrics plus model accounting and a reproducibility config echo."""

    per_ci: dict[int, CiStats]
    model_meta: dict
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.per_ci:
            raise ValidationError("report must cover at least one collection instance")

    def to_json(self) -> str:
        doc = {
            "schema_version": 1,
            "per_ci": {
                str(ci): {
                    "mean_error_m": s.mean_error_m,
                    "min_error_m": s.min_error_m,
                    "max_error_m": s.max_error_m,
                    "accuracy": s.accuracy,
                    "samples": s.samples,
                }
                for ci, s in sorted(self.per_ci.items())
            },
            "model_meta": self.model_meta,
            "config": self.config,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        doc = json.loads(text)
        per_ci = {
            int(ci): CiStats(
                s["mean_error_m"], s["min_error_m"], s["max_error_m"], s["accuracy"], s["samples"]
            )
            for ci, s in doc["per_ci"].items()
        }
        return cls(per_ci, doc["model_meta"], doc.get("config", {}))

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())


def evaluate(classifier, test: Dataset, rp_map: RpMap, config: dict | None = None) -> EvalReport:
    """Score a classifier per collection instance on a (possibly multi-CI) test set."""
    if test.ap_count != classifier.input_dim:
        raise ShapeError(
            f"test set has {test.ap_count} APs but the model expects {classifier.input_dim}"
        )
    rp_map.require_covers(test)
    per_ci = {}
    for ci in test.cis:
        subset = test.with_ci(ci)
        preds = classifier.predict(subset)
        truth = subset.labels()
        errors = sample_errors(preds, truth, rp_map)
        per_ci[ci] = CiStats(
            mean_error_m=float(errors.mean()),
            min_error_m=float(errors.min()),
            max_error_m=float(errors.max()),
            accuracy=float((preds == truth).mean()),
            samples=int(len(subset)),
        )
    meta = {
        "params": count_params(classifier),
        "size_bytes": model_size_bytes(classifier),
    }
    return EvalReport(per_ci, meta, config or {})


@dataclass(frozen=True)
class LatencyResult:
    """Median full-test-set inference time plus the machine it was measured on."""

    milliseconds: float
    repetitions: int
    environment: dict


def environment_descriptor() -> dict:
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "machine": platform.machine(),
    }


def measure_latency(classifier, test: Dataset, repetitions: int = 5) -> LatencyResult:
    """Median wall-clock time of full-test-set inference, preprocessing included."""
    if repetitions < 3:
        raise ValidationError(f"need at least 3 repetitions, got {repetitions}")
    classifier.predict(test)  # warm-up outside the timed region
    times = []
    for _ in range(repetitions):
        start = time.perf_counter()
        classifier.predict(test)
        times.append(time.perf_counter() - start)
    return LatencyResult(
        milliseconds=float(np.median(times) * 1e3),
        repetitions=repetitions,
        environment=environment_descriptor(),
    )


def majority_code(latents: list[LatentCode]) -> LatentCode:
    """Bitwise majority across latent codes; ties resolve to 1."""
    if not latents:
        raise ValidationError("majority over an empty latent list")
    depth, input_len = latents[0].depth, latents[0].input_len
    if any(l.depth != depth or l.input_len != input_len for l in latents):
        raise ShapeError("all latents must share depth and input length")
    stack = np.stack([l.bits for l in latents])
    ones = stack.sum(axis=0, dtype=np.int64)
    return LatentCode((2 * ones >= len(latents)).astype(np.uint8), depth, input_len)


@dataclass(frozen=True)
class LatentDiff:
    """Positions where two RPs' majority latents disagree, with AP traces."""

    rp_a: int
    rp_b: int
    differing_bits: tuple[int, ...]
    ap_windows: tuple[range, ...]  # one window per differing bit
    majority_a: LatentCode
    majority_b: LatentCode

    def format_table(self) -> str:
        """Human-readable table: bit index -> AP window -> per-class bits."""
        lines = [
            f"latent diff: rp {self.rp_a} vs rp {self.rp_b} "
            f"({len(self.differing_bits)} differing bits)",
            f"{'bit':>5}  {'ap window':>14}  rp{self.rp_a:<6} rp{self.rp_b:<6}",
        ]
        for bit, window in zip(self.differing_bits, self.ap_windows):
            span = f"[{window.start}, {window.stop})"
            lines.append(
                f"{bit:>5}  {span:>14}  {self.majority_a.bits[bit]:<8} {self.majority_b.bits[bit]:<8}"
            )
        if not self.differing_bits:
            lines.append("  (identical latents)")
        return "\n".join(lines)


def latent_diff(latents_a: list[LatentCode], latents_b: list[LatentCode],
                rp_a: int = 0, rp_b: int = 1) -> LatentDiff:
    """Majority-vote both classes and report where their latents disagree."""
    maj_a = majority_code(latents_a)
    maj_b = majority_code(latents_b)
    if len(maj_a) != len(maj_b) or maj_a.input_len != maj_b.input_len:
        raise ShapeError("latent lists have mismatched shapes")
    differing = tuple(int(i) for i in np.flatnonzero(maj_a.bits != maj_b.bits))
    windows = tuple(trace_bit_to_aps(i, maj_a.depth, maj_a.input_len) for i in differing)
    return LatentDiff(rp_a, rp_b, differing, windows, maj_a, maj_b)


def export_latent_bitmap(latents_by_rp: dict[int, LatentCode], path: str) -> None:
    """Write per-RP majority latents as a binary-pixel PGM.

    Rows are RPs sorted by rp_id, columns latent bits; 0 maps to black and
    1 to white.
    """
    if not latents_by_rp:
        raise ValidationError("no latents to export")
    rp_ids = sorted(latents_by_rp)
    lengths = {len(latents_by_rp[rp]) for rp in rp_ids}
    if len(lengths) != 1:
        raise ShapeError("all latent codes must have equal length")
    matrix = np.stack([latents_by_rp[rp].bits for rp in rp_ids]).astype(np.uint8) * 255
    write_pgm(matrix, path)


def export_gray_bitmap(matrix: np.ndarray, path: str) -> None:
    """Write a real-valued matrix as a grayscale PGM with linear scaling."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValidationError("grayscale export requires a non-empty 2-D matrix")
    lo, hi = float(arr.min()), float(arr.max())
    scaled = np.zeros_like(arr) if hi == lo else (arr - lo) / (hi - lo)
    write_pgm(np.round(scaled * 255).astype(np.uint8), path)


def read_latent_bitmap(path: str) -> np.ndarray:
    """Read a latent bitmap back into a {0,1} matrix."""
    from .pgm import read_pgm

    return (read_pgm(path) >= 128).astype(np.uint8)
