"""Load histories: piecewise constant/ramp stress profiles.

A profile is a contiguous sequence of segments starting at t = 0, each
either holding a constant stress or ramping linearly.  Time is in hours,
stress in psi.  The central operation is exceedance time: for a level tau
and time t, how long the applied stress has been at or above tau within
[0, t].  The damage shape function is built entirely from these times.

Beyond hand-built profiles (ramp tests, ramp-then-hold experiments) the
module can draw random 50-year residential occupancy histories: a constant
dead load, a sustained occupancy component renewed at random epochs, and
short extraordinary load events arriving as a Poisson process.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .units import HOURS_PER_YEAR, parse_duration_hours

__all__ = [
    "LoadSegment",
    "LoadProfile",
    "ramp_profile",
    "ramp_then_constant",
    "ResidentialConfig",
    "generate_residential",
]

_KINDS = ("constant", "ramp")


@dataclass(frozen=True)
class LoadSegment:
    """One piece of a load history.

    ``level`` is the stress at ``t_start``; for a ramp the stress then
    changes at ``slope`` psi per hour until ``t_end``.  Constant segments
    keep ``slope`` at 0.
    """

    t_start: float
    t_end: float
    kind: str
    level: float
    slope: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"segment kind must be one of {_KINDS}, got {self.kind!r}")
        for name in ("t_start", "t_end", "level", "slope"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValidationError(f"segment {name} must be finite")
        if not self.t_end > self.t_start:
            raise ValidationError("segment must have t_end > t_start")
        if self.kind == "constant" and self.slope != 0.0:
            raise ValidationError("constant segment cannot carry a slope")
        end_level = self.level + self.slope * (self.t_end - self.t_start)
        if self.level < 0.0 or end_level < -1e-9:
            raise ValidationError("stress must stay nonnegative over the segment")

    @property
    def duration(self):
        return self.t_end - self.t_start

    def to_dict(self):
        return {
            "t_start": self.t_start,
            "t_end": self.t_end,
            "kind": self.kind,
            "level": self.level,
            "slope": self.slope,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                t_start=parse_duration_hours(d["t_start"]),
                t_end=parse_duration_hours(d["t_end"]),
                kind=d["kind"],
                level=float(d["level"]),
                slope=float(d.get("slope", 0.0)),
            )
        except KeyError as e:
            raise ValidationError(f"segment is missing field {e.args[0]!r}") from None


class LoadProfile:
    """A contiguous load history on [0, horizon].

    Segments must tile [0, horizon] without gaps; stress levels may jump
    between segments.  Evaluation beyond the horizon is an error rather
    than an extrapolation.
    """

    def __init__(self, segments):
        segs = list(segments)
        if not segs:
            raise ValidationError("profile needs at least one segment")
        if abs(segs[0].t_start) > 1e-12:
            raise ValidationError("profile must start at t = 0")
        for prev, cur in zip(segs, segs[1:]):
            gap = cur.t_start - prev.t_end
            tol = 1e-9 * max(1.0, abs(prev.t_end))
            if abs(gap) > tol:
                raise ValidationError(
                    f"segments must be contiguous; gap of {gap} hours at t = {prev.t_end}"
                )
        self.segments = tuple(segs)
        self._starts = np.array([s.t_start for s in segs])
        self._ends = np.array([s.t_end for s in segs])
        self._levels = np.array([s.level for s in segs])
        self._slopes = np.array([s.slope for s in segs])

    @property
    def horizon(self):
        return float(self._ends[-1])

    def _segment_index(self, t):
        t = np.asarray(t, dtype=float)
        if t.size and (np.any(t < -1e-12) or np.any(t > self.horizon * (1 + 1e-12) + 1e-9)):
            raise ValidationError(
                f"time outside profile domain [0, {self.horizon}]"
            )
        idx = np.searchsorted(self._starts, np.clip(t, 0.0, self.horizon), side="right") - 1
        return np.clip(idx, 0, len(self.segments) - 1)

    def load_at(self, t):
        """Stress at time(s) t in [0, horizon].  Vectorized."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        idx = self._segment_index(t)
        out = self._levels[idx] + self._slopes[idx] * (t - self._starts[idx])
        out = np.maximum(out, 0.0)
        return out[0] if scalar else out

    def exceedance_matrix(self, levels, times):
        """Time spent at or above each level, by each time.

        Returns an array of shape (len(times), len(levels)) whose (k, i)
        entry is measure{s <= times[k] : load(s) >= levels[i]} in hours.
        Levels where the load only touches from below contribute zero.
        """
        levels = np.atleast_1d(np.asarray(levels, dtype=float))
        times = np.atleast_1d(np.asarray(times, dtype=float))
        self._segment_index(times)  # domain check
        out = np.zeros((times.size, levels.size))
        for s0, s1, lev, slope in zip(self._starts, self._ends, self._levels, self._slopes):
            dur = s1 - s0
            overlap = np.clip(times - s0, 0.0, dur)[:, None]
            if slope == 0.0:
                above = (lev >= levels)[None, :]
                out += overlap * above
            elif slope > 0.0:
                # at or above tau from offset (tau - level)/slope onward
                s_on = np.clip((levels - lev) / slope, 0.0, dur)[None, :]
                out += np.maximum(overlap - s_on, 0.0)
            else:
                # at or above tau until offset (tau - level)/slope
                s_off = np.clip((levels - lev) / slope, 0.0, dur)[None, :]
                off = np.where(levels <= lev, np.maximum(s_off, 0.0), 0.0)
                out += np.minimum(overlap, off)
        return out

    def exceedance_time(self, level, t):
        """Scalar convenience wrapper around :meth:`exceedance_matrix`."""
        return float(self.exceedance_matrix([level], [t])[0, 0])

    def max_load(self):
        ends = self._levels + self._slopes * (self._ends - self._starts)
        return float(max(self._levels.max(), ends.max()))

    def to_dict(self):
        return {
            "segments": [s.to_dict() for s in self.segments],
            "horizon": self.horizon,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            segs = [LoadSegment.from_dict(s) for s in d["segments"]]
        except (TypeError, KeyError):
            raise ValidationError("profile dict needs a 'segments' list") from None
        prof = cls(segs)
        if "horizon" in d:
            horizon = parse_duration_hours(d["horizon"])
            if abs(horizon - prof.horizon) > 1e-6 * max(1.0, horizon):
                raise ValidationError(
                    f"declared horizon {horizon} disagrees with segments ({prof.horizon})"
                )
        return prof

    def to_json(self, path=None, indent=2):
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_json(cls, source):
        """Parse from a JSON string or a file path."""
        text = source
        if "\n" not in str(source) and not str(source).lstrip().startswith("{"):
            with open(source) as fh:
                text = fh.read()
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"invalid profile JSON: {e}") from None
        return cls.from_dict(d)

    def __eq__(self, other):
        return isinstance(other, LoadProfile) and self.segments == other.segments

    def __repr__(self):
        return (
            f"LoadProfile({len(self.segments)} segments, horizon={self.horizon:g} h, "
            f"max load {self.max_load():g} psi)"
        )


def ramp_profile(rate, horizon):
    """Pure ramp test: stress rises from 0 at ``rate`` psi/h until ``horizon``."""
    rate = float(rate)
    horizon = parse_duration_hours(horizon)
    if rate <= 0 or horizon <= 0:
        raise ValidationError("ramp needs positive rate and horizon")
    return LoadProfile([LoadSegment(0.0, horizon, "ramp", 0.0, rate)])


def ramp_then_constant(rate, level, horizon):
    """Ramp from 0 to ``level`` at ``rate`` psi/h, then hold until ``horizon``."""
    rate = float(rate)
    level = float(level)
    horizon = parse_duration_hours(horizon)
    if rate <= 0 or level <= 0:
        raise ValidationError("ramp-then-hold needs positive rate and level")
    t_reach = level / rate
    if t_reach >= horizon:
        raise ValidationError("horizon ends before the ramp reaches its hold level")
    return LoadProfile(
        [
            LoadSegment(0.0, t_reach, "ramp", 0.0, rate),
            LoadSegment(t_reach, horizon, "constant", level),
        ]
    )


@dataclass
class ResidentialConfig:
    """Parameters of the stochastic residential load generator.

    The generated history is dead load plus a sustained occupancy component
    that is redrawn (exponential with the given mean) at renewal epochs,
    plus short extraordinary events (Poisson arrivals, exponential
    magnitudes) that stack on top.  Defaults produce occasional peaks near
    2000 psi over 50 years, in the range where duration-of-load effects
    matter for lumber.
    """

    horizon_hours: float = 50.0 * HOURS_PER_YEAR
    dead_load: float = 750.0
    occupancy_mean: float = 200.0
    occupancy_renewal_years: float = 5.0
    event_rate_per_year: float = 0.6
    event_mean_magnitude: float = 330.0
    event_duration_hours: float = 336.0

    def __post_init__(self):
        if self.horizon_hours <= 0:
            raise ValidationError("horizon must be positive")
        for name in ("dead_load", "occupancy_mean", "occupancy_renewal_years",
                     "event_rate_per_year", "event_mean_magnitude", "event_duration_hours"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")

    def to_dict(self):
        return {
            "horizon_hours": self.horizon_hours,
            "dead_load": self.dead_load,
            "occupancy_mean": self.occupancy_mean,
            "occupancy_renewal_years": self.occupancy_renewal_years,
            "event_rate_per_year": self.event_rate_per_year,
            "event_mean_magnitude": self.event_mean_magnitude,
            "event_duration_hours": self.event_duration_hours,
        }

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown residential config fields: {sorted(extra)}")
        kwargs = dict(d)
        if "horizon_hours" in kwargs:
            kwargs["horizon_hours"] = parse_duration_hours(kwargs["horizon_hours"])
        return cls(**kwargs)


def generate_residential(config=None, rng=None, seed=None):
    """Draw one residential load history as a piecewise constant profile.

    Pass either an ``rng`` (numpy Generator) or a ``seed``; the same seed
    reproduces the same profile for a given config.
    """
    if config is None:
        config = ResidentialConfig()
    if rng is None:
        rng = np.random.default_rng(seed)
    horizon = float(config.horizon_hours)

    # occupancy renewal epochs and levels
    renew_mean = config.occupancy_renewal_years * HOURS_PER_YEAR
    epochs = [0.0]
    while epochs[-1] < horizon and renew_mean > 0:
        epochs.append(epochs[-1] + rng.exponential(renew_mean))
    occ_levels = rng.exponential(config.occupancy_mean, size=max(len(epochs) - 1, 1))

    # extraordinary events: arrival times, each active for a fixed-mean
    # exponential duration with an exponential magnitude
    events = []
    rate_h = config.event_rate_per_year / HOURS_PER_YEAR
    if rate_h > 0:
        t = rng.exponential(1.0 / rate_h)
        while t < horizon:
            dur = rng.exponential(config.event_duration_hours)
            mag = rng.exponential(config.event_mean_magnitude)
            events.append((t, min(t + dur, horizon), mag))
            t = t + rng.exponential(1.0 / rate_h)

    # assemble breakpoints and the total load on each piece
    cuts = {0.0, horizon}
    for e in epochs:
        if 0.0 < e < horizon:
            cuts.add(e)
    for s, e, _ in events:
        cuts.add(s)
        if e < horizon:
            cuts.add(e)
    cuts = np.array(sorted(cuts))
    segs = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (lo + hi)
        occ_idx = min(int(np.searchsorted(epochs, mid, side="right")) - 1, len(occ_levels) - 1)
        level = config.dead_load + occ_levels[occ_idx]
        for s, e, mag in events:
            if s <= mid < e:
                level += mag
        segs.append(LoadSegment(float(lo), float(hi), "constant", float(level)))
    return LoadProfile(segs)
