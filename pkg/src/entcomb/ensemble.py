"""Trial-ensemble data model and its file formats.

An ensemble is a stack of repeated trials of a multivariate time series,
shaped (n_trials, n_times, n_channels), all float64, all finite. Two
on-disk formats are supported:

* binary: magic ``EIN1``, three little-endian uint32 (trials, times,
  channels), then the samples as little-endian float64 in
  [trial][time][channel] order. Bit-exact round trip. Channel names and
  the time offset are not stored.
* CSV, long format: header ``trial,time,<name0>,<name1>,...``; one row per
  (trial, time); values printed with 17 significant digits so parsing
  recovers the exact doubles. Time indices must form the same contiguous
  range in every trial.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    ChannelLookupError,
    FormatError,
    NonFiniteSampleError,
    RaggedTrialsError,
)

MAGIC = b"EIN1"
_HEADER = struct.Struct("<III")

ChannelRef = Union[int, str]


def default_channel_names(n_channels: int) -> tuple[str, ...]:
    return tuple(f"channel_{i}" for i in range(n_channels))


@dataclass(frozen=True, eq=False)
class TrialEnsemble:
    """Immutable (n_trials, n_times, n_channels) float64 sample block.

    time_start is the absolute index of the first retained sample, so
    ensembles truncated by lag alignment keep their original clock.
    """

    samples: np.ndarray
    channel_names: tuple[str, ...] = field(default=())
    time_start: int = 0

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=np.float64, order="C")
        if arr.ndim != 3:
            raise FormatError(
                f"samples must be 3-d (trials, times, channels), got shape {arr.shape}"
            )
        if min(arr.shape) < 1:
            raise FormatError(f"empty ensemble axis in shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteSampleError("ensemble contains NaN or infinite samples")
        arr.setflags(write=False)
        names = tuple(self.channel_names) or default_channel_names(arr.shape[2])
        if len(names) != arr.shape[2]:
            raise FormatError(
                f"{len(names)} channel names for {arr.shape[2]} channels"
            )
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "time_start", int(self.time_start))

    @property
    def n_trials(self) -> int:
        return self.samples.shape[0]

    @property
    def n_times(self) -> int:
        return self.samples.shape[1]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[2]

    @property
    def times(self) -> np.ndarray:
        """Absolute time index of each sample column."""
        return self.time_start + np.arange(self.n_times)

    def channel_index(self, ref: ChannelRef) -> int:
        if isinstance(ref, str):
            try:
                return self.channel_names.index(ref)
            except ValueError:
                raise ChannelLookupError(
                    f"unknown channel {ref!r}; have {self.channel_names}"
                ) from None
        i = int(ref)
        if not 0 <= i < self.n_channels:
            raise ChannelLookupError(
                f"channel index {i} out of range for {self.n_channels} channels"
            )
        return i

    def slice_channels(self, channels: Sequence[ChannelRef]) -> "TrialEnsemble":
        """Restrict to the listed channels, in the listed order."""
        idx = [self.channel_index(ref) for ref in channels]
        return TrialEnsemble(
            self.samples[:, :, idx],
            tuple(self.channel_names[i] for i in idx),
            self.time_start,
        )


def store_binary(ensemble: TrialEnsemble, path) -> None:
    r, n, c = ensemble.samples.shape
    if max(r, n, c) > 0xFFFFFFFF:
        raise FormatError("dimension exceeds uint32 range")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(r, n, c))
        fh.write(np.ascontiguousarray(ensemble.samples, dtype="<f8").tobytes())


def load_binary(path) -> TrialEnsemble:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 4 + _HEADER.size:
        raise FormatError("truncated header")
    r, n, c = _HEADER.unpack_from(blob, 4)
    if min(r, n, c) < 1:
        raise FormatError(f"zero dimension in header ({r}, {n}, {c})")
    expected = 4 + _HEADER.size + 8 * r * n * c
    if len(blob) != expected:
        raise FormatError(
            f"file length {len(blob)} does not match header ({expected} expected)"
        )
    flat = np.frombuffer(blob, dtype="<f8", offset=4 + _HEADER.size)
    samples = flat.reshape(r, n, c).astype(np.float64)
    return TrialEnsemble(samples)


def store_csv(ensemble: TrialEnsemble, path) -> None:
    times = ensemble.times
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "time", *ensemble.channel_names])
        for r in range(ensemble.n_trials):
            for t in range(ensemble.n_times):
                row = ensemble.samples[r, t]
                writer.writerow(
                    [r, times[t], *(format(v, ".17g") for v in row)]
                )


def load_csv(path, trial_col: str = "trial", time_col: str = "time",
             channels: Sequence[str] | None = None) -> TrialEnsemble:
    """Parse a long-format CSV into an ensemble.

    channels selects the value columns by header name; None takes every
    column that is not the trial or time column, in header order.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("empty file, header row required") from None
        header = [h.strip() for h in header]
        for col in (trial_col, time_col):
            if col not in header:
                raise FormatError(f"missing required column {col!r} in header")
        if channels is None:
            names = [h for h in header if h not in (trial_col, time_col)]
        else:
            names = list(channels)
        if not names:
            raise FormatError("no channel columns")
        try:
            cols = [header.index(name) for name in names]
        except ValueError as exc:
            raise FormatError(f"channel column not in header: {exc}") from None
        t_col = header.index(trial_col)
        n_col = header.index(time_col)

        per_trial: dict[int, dict[int, list[float]]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(
                    f"line {lineno}: {len(row)} fields, header has {len(header)}"
                )
            try:
                trial = _parse_index(row[t_col])
                time = _parse_index(row[n_col])
                values = [float(row[i]) for i in cols]
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
            if not all(np.isfinite(values)):
                raise NonFiniteSampleError(f"line {lineno}: non-finite sample")
            slot = per_trial.setdefault(trial, {})
            if time in slot:
                raise FormatError(f"line {lineno}: duplicate (trial, time) ({trial}, {time})")
            slot[time] = values

    if not per_trial:
        raise FormatError("no data rows")
    trial_ids = sorted(per_trial)
    ref_times = sorted(per_trial[trial_ids[0]])
    t0, n_times = ref_times[0], len(ref_times)
    if ref_times != list(range(t0, t0 + n_times)):
        raise RaggedTrialsError(f"trial {trial_ids[0]}: time indices not contiguous")
    for tid in trial_ids[1:]:
        if sorted(per_trial[tid]) != ref_times:
            raise RaggedTrialsError(
                f"trial {tid} has a different time grid than trial {trial_ids[0]}"
            )
    samples = np.empty((len(trial_ids), n_times, len(names)))
    for i, tid in enumerate(trial_ids):
        rows = per_trial[tid]
        for j, t in enumerate(ref_times):
            samples[i, j] = rows[t]
    return TrialEnsemble(samples, tuple(names), time_start=t0)


def _parse_index(text: str) -> int:
    v = float(text)
    i = int(v)
    if i != v:
        raise ValueError(f"expected integer index, got {text!r}")
    return i
