"""Shape function of the damage gamma process.

Damage accumulates as a gamma process whose expected value at time t is
proportional to a load-history functional eta(t).  The load axis is cut
into a ladder of levels (20 psi apart by default); each level tau_i that
the stress has spent time above contributes according to how long it has
been exceeded:

    eta(t) = sum_i psi(texc_i(t)) * [(u tau_i - v)_+ - (u tau_{i-1} - v)_+],
    psi(s) = s^a + b s^c,

with texc_i(t) the time spent at or above tau_i within [0, t].  Levels
below the damage threshold tau* = v/u contribute nothing; for a constant
load tau the sum telescopes to (t^a + b t^c)(u tau_g - v)_+ with tau_g the
grid level at or below tau.

The time derivative adds up psi'(texc_i) over the levels currently
exceeded.  psi' blows up like s^{a-1} as s -> 0, so eta_dot is singular at
the instant a level is first crossed; evaluating exactly there emits
DiscontinuityWarning and returns the right-hand limit.  During ramp
loading the crossings come every few dozen milliseconds and the exact
derivative is a fast sawtooth; for density work the evaluator also offers
a smoothed version that replaces eta by its chord between successive
crossing knots inside ramp segments, which is the standard treatment.

``ShapeEvaluator.bind`` precomputes everything that depends only on the
profile and evaluation times, so repeated evaluation at new parameters
(the inference hot path) costs two exponentials per matrix entry.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DiscontinuityWarning, ValidationError

__all__ = [
    "DegradationParams",
    "REFERENCE_PARAMS",
    "LoadGrid",
    "ShapeEvaluator",
    "BoundShape",
]

_PARAM_NAMES = ("a", "b", "c", "u", "v", "xi")


@dataclass(frozen=True)
class DegradationParams:
    """The six parameters of the damage model.

    a, b, c shape the time response psi(s) = s^a + b s^c of each load
    level; u and v set the stress response (u tau - v)_+, so v/u is the
    stress threshold below which no damage accrues; xi is the gamma
    process scale, so the damage coefficient of variation at shape eta
    is eta^{-1/2}.
    """

    a: float
    b: float
    c: float
    u: float
    v: float
    xi: float

    def __post_init__(self):
        for name in _PARAM_NAMES:
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0.0:
                raise ValidationError(f"parameter {name} must be positive and finite")

    @property
    def threshold_stress(self):
        """Stress level v/u below which the load causes no damage."""
        return self.v / self.u

    def as_array(self):
        return np.array([getattr(self, n) for n in _PARAM_NAMES])

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (6,):
            raise ValidationError("parameter array must have shape (6,)")
        return cls(**dict(zip(_PARAM_NAMES, arr)))

    def to_dict(self):
        return {n: float(getattr(self, n)) for n in _PARAM_NAMES}

    @classmethod
    def from_dict(cls, d):
        extra = set(d) - set(_PARAM_NAMES)
        if extra:
            raise ValidationError(f"unknown parameters: {sorted(extra)}")
        missing = set(_PARAM_NAMES) - set(d)
        if missing:
            raise ValidationError(f"missing parameters: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in d.items()})


# point estimates for hemlock lumber reported in the duration-of-load
# literature; convenient defaults for demonstrations and sanity checks
REFERENCE_PARAMS = DegradationParams(
    a=0.019, b=0.01026, c=0.40, u=0.00088, v=0.359, xi=0.21
)


@dataclass(frozen=True)
class LoadGrid:
    """Uniform ladder of stress levels used to discretize the load axis."""

    spacing: float = 20.0

    def __post_init__(self):
        if not np.isfinite(self.spacing) or self.spacing <= 0:
            raise ValidationError("grid spacing must be positive")

    def levels_for(self, max_load):
        """Grid levels spacing, 2*spacing, ... up to max_load inclusive."""
        if max_load < self.spacing:
            return np.empty(0)
        n = int(np.floor(max_load / self.spacing + 1e-9))
        return self.spacing * np.arange(1, n + 1)


def _psi(tmat, log_tmat, zero_mask, a, b, c):
    # s^a + b s^c elementwise, with 0^a = 0 handled via the mask; extreme
    # parameters may overflow to inf, which downstream ceiling checks turn
    # into zero likelihood
    with np.errstate(under="ignore", over="ignore"):
        sa = np.exp(a * log_tmat)
        sc = np.exp(c * log_tmat)
    sa[zero_mask] = 0.0
    sc[zero_mask] = 0.0
    return sa, sc


class BoundShape:
    """Evaluation times bound to a profile, ready for fast re-evaluation.

    Splits the times into those inside constant segments (exact formulas)
    and those inside ramp segments (chord interpolation between crossing
    knots).  All geometry is precomputed; ``eta_and_dot`` costs a couple
    of vectorized exponentials.
    """

    def __init__(self, evaluator, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if times.size and times.min() < 0:
            raise ValidationError("evaluation times must be nonnegative")
        profile = evaluator.profile
        self.evaluator = evaluator
        self.times = times
        levels = evaluator.levels
        idx = profile._segment_index(times)
        seg_slopes = profile._slopes[idx]
        self.is_ramp = seg_slopes != 0.0
        self.n = times.size

        # exact branch (constant segments)
        tc = times[~self.is_ramp]
        self._const_pos = np.flatnonzero(~self.is_ramp)
        self._const_tmat = profile.exceedance_matrix(levels, tc) if tc.size else np.zeros((0, levels.size))
        self._const_zero = self._const_tmat <= 0.0
        with np.errstate(divide="ignore"):
            self._const_log = np.where(self._const_zero, 0.0, np.log(np.where(self._const_zero, 1.0, self._const_tmat)))
        loads_c = profile.load_at(tc) if tc.size else np.empty(0)
        self._const_active = levels[None, :] <= loads_c[:, None]

        # ramp branch: bracketing crossing knots
        tr = times[self.is_ramp]
        self._ramp_pos = np.flatnonzero(self.is_ramp)
        if tr.size:
            lo, hi = evaluator._bracket_knots(tr, idx[self.is_ramp])
            knots = np.unique(np.concatenate([lo, hi]))
            kmat = profile.exceedance_matrix(levels, knots)
            kzero = kmat <= 0.0
            with np.errstate(divide="ignore"):
                klog = np.where(kzero, 0.0, np.log(np.where(kzero, 1.0, kmat)))
            self._knots = knots
            self._knot_log = klog
            self._knot_zero = kzero
            self._lo_idx = np.searchsorted(knots, lo)
            self._hi_idx = np.searchsorted(knots, hi)
            width = hi - lo
            self._alpha = np.where(width > 0, (tr - lo) / np.where(width > 0, width, 1.0), 0.0)
            self._width = width
        else:
            self._knots = np.empty(0)

    def eta_and_dot(self, params):
        """(eta, eta_dot) at the bound times; ramp times use chord slopes."""
        a, b, c, u, v = params.a, params.b, params.c, params.u, params.v
        w = self.evaluator.weights(params)
        eta = np.zeros(self.n)
        etad = np.zeros(self.n)
        if self._const_pos.size:
            sa, sc = _psi(self._const_tmat, self._const_log, self._const_zero, a, b, c)
            with np.errstate(over="ignore", invalid="ignore"):
                eta[self._const_pos] = sa @ w + b * (sc @ w)
                with np.errstate(divide="ignore"):
                    da = np.where(self._const_zero, 0.0, sa / self._const_tmat)
                    dc = np.where(self._const_zero, 0.0, sc / self._const_tmat)
                act = self._const_active
                etad[self._const_pos] = a * ((da * act) @ w) + b * c * ((dc * act) @ w)
        if self._ramp_pos.size:
            sa, sc = _psi(None, self._knot_log, self._knot_zero, a, b, c)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                eta_k = sa @ w + b * (sc @ w)
                e_lo = eta_k[self._lo_idx]
                e_hi = eta_k[self._hi_idx]
                eta[self._ramp_pos] = e_lo + self._alpha * (e_hi - e_lo)
                slope = np.where(self._width > 0, (e_hi - e_lo) / np.where(self._width > 0, self._width, 1.0), 0.0)
            etad[self._ramp_pos] = slope
        return eta, etad

    def eta(self, params):
        return self.eta_and_dot(params)[0]

    def eta_and_dot_many(self, a, b, c, u, v):
        """Batched eta/eta_dot over P parameter vectors.

        Arguments are (P,) arrays of the five shape parameters; returns
        (eta, eta_dot) of shape (P, n_times).  One fused evaluation is
        much cheaper than P separate ones because the special-function
        iteration overhead is shared.
        """
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b, c, u, v = (np.atleast_1d(np.asarray(z, dtype=float)) for z in (b, c, u, v))
        n_p = a.size
        ext = np.concatenate([[0.0], self.evaluator.levels])
        w = np.diff(np.maximum(u[:, None] * ext[None, :] - v[:, None], 0.0), axis=1)
        eta = np.zeros((n_p, self.n))
        etad = np.zeros((n_p, self.n))
        if self._const_pos.size:
            zero = self._const_zero
            with np.errstate(under="ignore", over="ignore"):
                sa = np.exp(a[:, None, None] * self._const_log[None])
                sc = np.exp(c[:, None, None] * self._const_log[None])
            sa[:, zero] = 0.0
            sc[:, zero] = 0.0
            with np.errstate(over="ignore", invalid="ignore"):
                eta[:, self._const_pos] = np.einsum("pkm,pm->pk", sa, w) + b[
                    :, None
                ] * np.einsum("pkm,pm->pk", sc, w)
                with np.errstate(divide="ignore"):
                    da = np.where(zero[None], 0.0, sa / self._const_tmat[None])
                    dc = np.where(zero[None], 0.0, sc / self._const_tmat[None])
                act = self._const_active[None]
                etad[:, self._const_pos] = a[:, None] * np.einsum(
                    "pkm,pm->pk", da * act, w
                ) + (b * c)[:, None] * np.einsum("pkm,pm->pk", dc * act, w)
        if self._ramp_pos.size:
            zk = self._knot_zero
            with np.errstate(under="ignore", over="ignore"):
                sa = np.exp(a[:, None, None] * self._knot_log[None])
                sc = np.exp(c[:, None, None] * self._knot_log[None])
            sa[:, zk] = 0.0
            sc[:, zk] = 0.0
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                eta_k = np.einsum("pum,pm->pu", sa, w) + b[:, None] * np.einsum(
                    "pum,pm->pu", sc, w
                )
                e_lo = eta_k[:, self._lo_idx]
                e_hi = eta_k[:, self._hi_idx]
                eta[:, self._ramp_pos] = e_lo + self._alpha[None] * (e_hi - e_lo)
                slope = np.where(
                    self._width[None] > 0,
                    (e_hi - e_lo) / np.where(self._width[None] > 0, self._width[None], 1.0),
                    0.0,
                )
            etad[:, self._ramp_pos] = slope
        return eta, etad


class ShapeEvaluator:
    """Shape function eta and its derivative for one load profile."""

    def __init__(self, profile, grid=None):
        self.profile = profile
        self.grid = grid if grid is not None else LoadGrid()
        max_load = profile.max_load()
        # an absurd level count is almost always a unit mistake in the
        # profile; fail with a message before allocating gigabytes
        n_levels = int(np.floor(max_load / self.grid.spacing + 1e-9))
        if n_levels > 2_000_000:
            raise ValidationError(
                f"load grid yields {n_levels} levels for max load "
                f"{max_load:g}; check profile units or grid spacing"
            )
        self.levels = self.grid.levels_for(max_load)
        self._knots_by_segment = self._build_knots()

    def _build_knots(self):
        """Crossing times of grid levels inside each ramp segment."""
        prof = self.profile
        knots = {}
        for j, seg in enumerate(prof.segments):
            if seg.slope == 0.0:
                continue
            lev0 = seg.level
            lev1 = seg.level + seg.slope * seg.duration
            lo, hi = min(lev0, lev1), max(lev0, lev1)
            mask = (self.levels > lo) & (self.levels <= hi) if seg.slope > 0 else \
                   (self.levels >= lo) & (self.levels < hi)
            cross = seg.t_start + (self.levels[mask] - lev0) / seg.slope
            ks = np.unique(np.concatenate([[seg.t_start, seg.t_end], cross]))
            knots[j] = ks
        return knots

    def _bracket_knots(self, times, seg_idx):
        """Per-time (lo, hi) knots bounding t inside its ramp segment."""
        lo = np.empty_like(times)
        hi = np.empty_like(times)
        for j in np.unique(seg_idx):
            ks = self._knots_by_segment[int(j)]
            m = seg_idx == j
            t = times[m]
            pos = np.clip(np.searchsorted(ks, t, side="right") - 1, 0, ks.size - 2)
            lo[m] = ks[pos]
            hi[m] = ks[pos + 1]
        return lo, hi

    def weights(self, params):
        """Level weights (u tau_i - v)_+ - (u tau_{i-1} - v)_+ including tau_0 = 0."""
        ext = np.concatenate([[0.0], self.levels])
        return np.diff(np.maximum(params.u * ext - params.v, 0.0))

    def bind(self, times):
        return BoundShape(self, times)

    def eta(self, times, params):
        """eta at the given times.  Vectorized over times.

        Inside ramp segments this interpolates linearly between crossing
        knots (where it agrees with the raw ladder sum); the interpolant
        is what the failure-time distribution is built on, keeping the
        density the exact derivative of the survival curve between knots.
        Because psi has a vertical tangent at zero, the raw sum rises in
        steep sawteeth within each knot interval; the chord averages that
        fine structure, staying within one level weight times psi(knot
        spacing / rate) of the raw sum, which is the scale of the ladder
        discretization error itself.
        """
        scalar = np.ndim(times) == 0
        out = self.bind(times).eta(params)
        return float(out[0]) if scalar else out

    def eta_raw(self, times, params):
        """The un-smoothed ladder sum sum_i psi(texc_i(t)) w_i itself."""
        scalar = np.ndim(times) == 0
        times = np.atleast_1d(np.asarray(times, dtype=float))
        tmat = self.profile.exceedance_matrix(self.levels, times)
        zero = tmat <= 0.0
        with np.errstate(divide="ignore"):
            log_t = np.where(zero, 0.0, np.log(np.where(zero, 1.0, tmat)))
        sa, sc = _psi(tmat, log_t, zero, params.a, params.b, params.c)
        w = self.weights(params)
        out = sa @ w + params.b * (sc @ w)
        return float(out[0]) if scalar else out

    def eta_dot(self, times, params):
        """Exact right-hand derivative of eta at the given times.

        At an instant where some level is first being crossed the
        derivative is its right-hand limit, which is infinite when a < 1
        (or c < 1 with b > 0); a DiscontinuityWarning is emitted.
        """
        scalar = np.ndim(times) == 0
        times = np.atleast_1d(np.asarray(times, dtype=float))
        prof = self.profile
        tmat = prof.exceedance_matrix(self.levels, times)
        loads = prof.load_at(times)
        active = self.levels[None, :] <= loads[:, None]
        at_crossing = active & (tmat <= 0.0)
        if at_crossing.any():
            warnings.warn(
                "eta_dot evaluated at a level-crossing instant; returning the "
                "right-hand limit",
                DiscontinuityWarning,
                stacklevel=2,
            )
        a, b, c = params.a, params.b, params.c
        w = self.weights(params)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_t = np.where(tmat > 0, np.log(np.where(tmat > 0, tmat, 1.0)), 0.0)
            da = np.where(tmat > 0, np.exp((a - 1.0) * log_t), np.inf if a < 1 else (1.0 if a == 1 else 0.0))
            dc = np.where(tmat > 0, np.exp((c - 1.0) * log_t), np.inf if c < 1 else (1.0 if c == 1 else 0.0))
        da = np.where(active, da, 0.0)
        dc = np.where(active, dc, 0.0)
        contrib = a * da + b * c * dc
        # a crossing of a below-threshold level has infinite psi' but zero
        # weight; its contribution is zero, not inf * 0
        contrib = np.where((w > 0.0)[None, :], contrib, 0.0)
        out = np.einsum("km,m->k", contrib, w)
        return float(out[0]) if scalar else out

    def smooth_eta_and_dot(self, times, params):
        """eta and eta_dot with ramp segments chord-smoothed between knots.

        Inside constant segments this is the exact formula; inside ramps
        eta is linearly interpolated between successive crossing knots, so
        the derivative is the (finite) chord slope.  This is the form used
        for failure densities under ramp loading.
        """
        scalar = np.ndim(times) == 0
        bound = self.bind(times)
        eta, etad = bound.eta_and_dot(params)
        if scalar:
            return float(eta[0]), float(etad[0])
        return eta, etad

    def eta_constant_load(self, t, tau, params):
        """Closed form for a constant load tau held from 0: the level sum
        telescopes to (t^a + b t^c)(u tau_g - v)_+ with tau_g the grid
        level at or below tau."""
        t = np.asarray(t, dtype=float)
        tau_g = np.floor(tau / self.grid.spacing + 1e-9) * self.grid.spacing
        wsum = max(params.u * tau_g - params.v, 0.0)
        with np.errstate(divide="ignore"):
            psi = np.where(t > 0, t ** params.a + params.b * t ** params.c, 0.0)
        return psi * wsum
