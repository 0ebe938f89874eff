"""Failure-time datasets: records of (load profile, time, censoring flag).

The on-disk format is a CSV with header ``profile_id,time_hours,censored``
(censored written as 0/1), one row per specimen, plus one JSON profile
file per distinct profile id.  ``Dataset.save``/``Dataset.load`` lay these
out in a directory as ``records.csv`` and ``profiles/<id>.json``.
"""

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .load_profile import LoadProfile

__all__ = ["FailureRecord", "Dataset"]

_TRUE = {"1", "true", "t", "yes"}
_FALSE = {"0", "false", "f", "no"}


@dataclass(frozen=True)
class FailureRecord:
    """One specimen: which profile it was under, when it failed or was
    withdrawn, and whether the time is a censoring time."""

    profile_id: str
    time_hours: float
    censored: bool

    def __post_init__(self):
        if not self.profile_id:
            raise ValidationError("record needs a nonempty profile_id")
        if not np.isfinite(self.time_hours) or self.time_hours <= 0:
            raise ValidationError("record time must be positive and finite")


class Dataset:
    """A list of failure records plus the profiles they refer to.

    ``profiles`` maps profile_id to :class:`LoadProfile`.  Records whose
    id has a known profile are validated against its horizon.
    """

    def __init__(self, records, profiles=None):
        self.records = list(records)
        self.profiles = dict(profiles) if profiles else {}
        for rec in self.records:
            prof = self.profiles.get(rec.profile_id)
            if prof is not None and rec.time_hours > prof.horizon * (1 + 1e-9):
                raise ValidationError(
                    f"record time {rec.time_hours} exceeds the horizon of "
                    f"profile {rec.profile_id!r}"
                )

    def __len__(self):
        return len(self.records)

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.records == other.records
            and self.profiles == other.profiles
        )

    @property
    def n_failures(self):
        return sum(not r.censored for r in self.records)

    @property
    def n_censored(self):
        return sum(r.censored for r in self.records)

    def group(self):
        """dict profile_id -> (times array, censored bool array)."""
        out = {}
        for rec in self.records:
            out.setdefault(rec.profile_id, []).append(rec)
        return {
            pid: (
                np.array([r.time_hours for r in recs]),
                np.array([r.censored for r in recs], dtype=bool),
            )
            for pid, recs in out.items()
        }

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["profile_id", "time_hours", "censored"])
            for rec in self.records:
                writer.writerow(
                    [rec.profile_id, repr(float(rec.time_hours)), int(rec.censored)]
                )

    @classmethod
    def from_csv(cls, path, profiles=None):
        records = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != [
                "profile_id",
                "time_hours",
                "censored",
            ]:
                raise ValidationError(
                    "dataset CSV must start with header profile_id,time_hours,censored"
                )
            for lineno, row in enumerate(reader, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 3:
                    raise ValidationError(f"line {lineno}: expected 3 columns")
                pid, t_str, c_str = (f.strip() for f in row)
                try:
                    t = float(t_str)
                except ValueError:
                    raise ValidationError(
                        f"line {lineno}: bad time {t_str!r}"
                    ) from None
                c_norm = c_str.lower()
                if c_norm in _TRUE:
                    cens = True
                elif c_norm in _FALSE:
                    cens = False
                else:
                    raise ValidationError(
                        f"line {lineno}: bad censored flag {c_str!r}"
                    )
                records.append(FailureRecord(pid, t, cens))
        return cls(records, profiles)

    def save(self, dir_path):
        """Write records.csv plus profiles/<id>.json under dir_path."""
        os.makedirs(dir_path, exist_ok=True)
        self.to_csv(os.path.join(dir_path, "records.csv"))
        pdir = os.path.join(dir_path, "profiles")
        os.makedirs(pdir, exist_ok=True)
        for pid, prof in self.profiles.items():
            prof.to_json(os.path.join(pdir, f"{pid}.json"))

    @classmethod
    def load(cls, dir_path):
        pdir = os.path.join(dir_path, "profiles")
        profiles = {}
        if os.path.isdir(pdir):
            for name in sorted(os.listdir(pdir)):
                if name.endswith(".json"):
                    profiles[name[:-5]] = LoadProfile.from_json(
                        os.path.join(pdir, name)
                    )
        return cls.from_csv(os.path.join(dir_path, "records.csv"), profiles)
