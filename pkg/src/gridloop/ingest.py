"""Minute-level meter readings -> hourly energy series.

Template CSVs hold one home's instantaneous power draw sampled once per
minute (columns ``minute,kw``). Hourly energy is the sampling period times
the mean power over the hour's readings, i.e. for a full hour of minutes
E[kWh] = mean(kW). Short gaps in the minute index are linearly
interpolated; anything longer is refused rather than guessed at.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HourlySeries",
    "TemplateHome",
    "load_template",
    "load_template_dir",
    "read_hourly",
    "resample_hourly",
    "write_hourly",
]

MAX_GAP_MINUTES = 5


@dataclass
class TemplateHome:
    """One home's minute-resolution power trace (kW, 0-based minute index)."""

    home_id: str
    minutes: np.ndarray
    kw: np.ndarray

    def __post_init__(self):
        self.minutes = np.asarray(self.minutes, dtype=np.int64)
        self.kw = np.asarray(self.kw, dtype=float)
        if self.minutes.shape != self.kw.shape or self.minutes.ndim != 1:
            raise ValueError("minutes and kw must be 1-d arrays of equal length")
        if len(self.minutes) == 0:
            raise ValueError("template has no readings")
        if np.any(np.diff(self.minutes) <= 0):
            raise ValueError("minute index must be strictly increasing")
        if np.any(self.kw < 0) or not np.all(np.isfinite(self.kw)):
            raise ValueError("invalid reading: power must be finite and non-negative")


@dataclass
class HourlySeries:
    """Hourly energy series in kWh (0-based hour index, contiguous)."""

    home_id: str
    hours: np.ndarray
    kwh: np.ndarray

    def __post_init__(self):
        self.hours = np.asarray(self.hours, dtype=np.int64)
        self.kwh = np.asarray(self.kwh, dtype=float)
        if self.hours.shape != self.kwh.shape or self.hours.ndim != 1:
            raise ValueError("hours and kwh must be 1-d arrays of equal length")
        if len(self.hours) and np.any(np.diff(self.hours) != 1):
            raise ValueError("hour index must be contiguous")
        if np.any(self.kwh < 0) or not np.all(np.isfinite(self.kwh)):
            raise ValueError("invalid reading: energy must be finite and non-negative")


def load_template(path: str) -> TemplateHome:
    """Parse one ``minute,kw`` CSV into a TemplateHome.

    Raises ValueError naming the offending line for malformed rows,
    negative power, or a non-increasing minute index.
    """
    minutes: list[int] = []
    kw: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["minute", "kw"]:
            raise ValueError(f"{path}: expected header 'minute,kw'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # ignore blank lines
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r}")
            try:
                m = int(row[0])
                p = float(row[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r}") from exc
            if p < 0 or not np.isfinite(p):
                raise ValueError(f"{path}:{lineno}: invalid reading {row[1]!r}")
            if minutes and m <= minutes[-1]:
                raise ValueError(
                    f"{path}:{lineno}: minute index must be strictly increasing"
                )
            minutes.append(m)
            kw.append(p)
    if not minutes:
        raise ValueError(f"{path}: template has no readings")
    home_id = os.path.splitext(os.path.basename(path))[0]
    filled_m, filled_kw = _fill_gaps(np.array(minutes), np.array(kw), path)
    return TemplateHome(home_id=home_id, minutes=filled_m, kw=filled_kw)


def _fill_gaps(minutes: np.ndarray, kw: np.ndarray, origin: str):
    """Linearly interpolate internal gaps of at most MAX_GAP_MINUTES minutes."""
    gaps = np.diff(minutes)
    if np.all(gaps == 1):
        return minutes, kw
    too_wide = np.where(gaps > MAX_GAP_MINUTES + 1)[0]
    if len(too_wide):
        i = too_wide[0]
        raise ValueError(
            f"{origin}: unfillable gap of {gaps[i] - 1} minutes "
            f"after minute {minutes[i]}"
        )
    full = np.arange(minutes[0], minutes[-1] + 1)
    return full, np.interp(full, minutes, kw)


def load_template_dir(path: str) -> list[TemplateHome]:
    """All ``*.csv`` templates under ``path``, sorted by filename."""
    names = sorted(n for n in os.listdir(path) if n.endswith(".csv"))
    if not names:
        raise ValueError(f"{path}: no template CSVs found")
    return [load_template(os.path.join(path, n)) for n in names]


def resample_hourly(home: TemplateHome) -> HourlySeries:
    """Aggregate minute kW readings into hourly kWh.

    Each hour bucket (minute // 60) may carry 1..60 readings; its energy is
    the bucket's mean power times the one-hour period. Buckets are indexed
    from the first hour present so the output is contiguous.
    """
    bucket = home.minutes // 60
    first = bucket[0]
    idx = bucket - first
    n_hours = int(idx[-1]) + 1
    sums = np.bincount(idx, weights=home.kw, minlength=n_hours)
    counts = np.bincount(idx, minlength=n_hours)
    if np.any(counts == 0):
        # cannot happen after gap filling, but guard the direct-construction path
        h = int(np.where(counts == 0)[0][0]) + first
        raise ValueError(f"unfillable gap: hour {h} has no readings")
    return HourlySeries(home_id=home.home_id, hours=np.arange(n_hours), kwh=sums / counts)


def write_hourly(series: HourlySeries, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour", "kwh"])
        for h, e in zip(series.hours, series.kwh):
            writer.writerow([int(h), repr(float(e))])


def read_hourly(path: str) -> HourlySeries:
    hours: list[int] = []
    kwh: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["hour", "kwh"]:
            raise ValueError(f"{path}: expected header 'hour,kwh'")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r}")
            hours.append(int(row[0]))
            kwh.append(float(row[1]))
    home_id = os.path.splitext(os.path.basename(path))[0]
    return HourlySeries(home_id=home_id, hours=np.array(hours), kwh=np.array(kwh))
