"""Per-frame score matrices, label priors, and their file formats.

A :class:`PosteriorMatrix` holds T frames of natural-log probabilities
over the blank-augmented alphabet and enforces per-frame normalization.
Prior scaling produces a :class:`ScoreMatrix`, which has the same shape
but is only proportional to a distribution, so it skips that invariant.

Binary posterior format (little-endian throughout):
  magic ``CTCP`` (4 bytes), u32 version=1, u32 T, u32 K,
  then T*K f32 natural-log probabilities, frame-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InvalidInputError
from .logmath import log_sum_rows

MAGIC = b"CTCP"
VERSION = 1

# Freshly computed rows must normalize tightly; rows read back from f32
# storage get a looser bound.
FRESH_TOL = 1e-6
FILE_TOL = 1e-3

PRIOR_FLOOR = 1e-8


@dataclass(frozen=True)
class ScoreMatrix:
    """T x K natural-log scores, frame-major. Rows need not normalize."""

    log_values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.log_values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"score matrix must be 2-D and non-empty, got shape {arr.shape}")
        if np.any(np.isnan(arr)):
            raise InvalidInputError("score matrix contains NaN")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "log_values", arr)

    @property
    def num_frames(self) -> int:
        return self.log_values.shape[0]

    @property
    def num_labels(self) -> int:
        return self.log_values.shape[1]


@dataclass(frozen=True)
class PosteriorMatrix(ScoreMatrix):
    """Score matrix whose rows are log probability distributions."""

    tolerance: float = FRESH_TOL

    def __post_init__(self):
        super().__post_init__()
        sums = np.exp(log_sum_rows(self.log_values))
        bad = np.where(np.abs(sums - 1.0) > self.tolerance)[0]
        if bad.size:
            raise InvalidInputError(
                f"frame {bad[0]} probabilities sum to {sums[bad[0]]:.6g}, not 1 "
                f"(tolerance {self.tolerance:g})")

    @staticmethod
    def from_probs(probs, tolerance: float = FRESH_TOL) -> "PosteriorMatrix":
        """Build from linear-space probabilities; zeros become -inf."""
        arr = np.asarray(probs, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return PosteriorMatrix(np.log(arr), tolerance)


@dataclass(frozen=True)
class PriorVector:
    """K natural-log label priors; every entry finite, sums to 1."""

    log_values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.log_values, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise InvalidInputError("prior must be a non-empty vector")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("prior entries must be finite (floored)")
        total = np.exp(arr).sum()
        if abs(total - 1.0) > FILE_TOL:
            raise InvalidInputError(f"prior sums to {total:.6g}, not 1")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "log_values", arr)

    @property
    def size(self) -> int:
        return self.log_values.shape[0]


def apply_prior_scaling(post: ScoreMatrix, prior: PriorVector) -> ScoreMatrix:
    """Divide posteriors by label priors, in log space.

    The result is only proportional to a per-frame distribution, so it
    comes back as a plain :class:`ScoreMatrix`.
    """
    if prior.size != post.num_labels:
        raise InvalidInputError(
            f"prior has {prior.size} entries but matrix has {post.num_labels} labels")
    return ScoreMatrix(post.log_values - prior.log_values[None, :])


def estimate_priors(posteriors, floor: float = PRIOR_FLOOR) -> PriorVector:
    """Average per-frame probabilities over a calibration set.

    The per-label mean over all frames of all matrices is floored at
    ``floor`` and renormalized, so every prior is finite.
    """
    matrices = list(posteriors)
    if not matrices:
        raise InvalidInputError("prior estimation needs at least one matrix")
    k = matrices[0].num_labels
    total = np.zeros(k)
    frames = 0
    for m in matrices:
        if m.num_labels != k:
            raise InvalidInputError("matrices disagree on alphabet size")
        total += np.exp(m.log_values).sum(axis=0)
        frames += m.num_frames
    mean = np.maximum(total / frames, floor)
    mean /= mean.sum()
    return PriorVector(np.log(mean))


def write_posteriors(post: PosteriorMatrix, path) -> None:
    t, k = post.num_frames, post.num_labels
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, t, k))
        fh.write(post.log_values.astype("<f4").tobytes())


def read_posteriors(path) -> PosteriorMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}",
                          path=str(path), offset=0)
    if len(data) < 16:
        raise FormatError("truncated header", path=str(path), offset=len(data))
    version, t, k = struct.unpack("<III", data[4:16])
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", path=str(path), offset=4)
    expected = 16 + 4 * t * k
    if len(data) != expected:
        raise FormatError(
            f"payload holds {len(data) - 16} bytes, expected {4 * t * k} for {t}x{k}",
            path=str(path), offset=min(len(data), expected))
    values = np.frombuffer(data, dtype="<f4", offset=16).astype(np.float64)
    values = values.reshape(t, k)
    try:
        return PosteriorMatrix(values, FILE_TOL)
    except InvalidInputError as exc:
        raise FormatError(str(exc), path=str(path)) from exc


def write_priors(prior: PriorVector, path) -> None:
    """Text prior format: header line, then one natural-log value per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"CTCPRIOR 1 {prior.size}\n")
        for v in prior.log_values:
            fh.write(f"{float(v)!r}\n")


def read_priors(path) -> PriorVector:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("CTCPRIOR 1 "):
        raise FormatError("missing CTCPRIOR header", path=str(path), line=1)
    try:
        count = int(lines[0].split()[2])
    except (IndexError, ValueError):
        raise FormatError("malformed CTCPRIOR header", path=str(path), line=1) from None
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise FormatError(f"expected {count} prior entries, found {len(body)}",
                          path=str(path), line=len(lines))
    try:
        values = np.array([float(ln) for ln in body])
    except ValueError:
        raise FormatError("non-numeric prior entry", path=str(path)) from None
    try:
        return PriorVector(values)
    except InvalidInputError as exc:
        raise FormatError(str(exc), path=str(path)) from exc
