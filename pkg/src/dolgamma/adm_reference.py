"""Reference implementation of the Canadian accumulated damage model.

Damage alpha grows from 0 (intact) to 1 (failed) along

    alpha'(t) = a [tau(t) - sigma0 tau_s]_+^b
              + c [tau(t) - sigma0 tau_s]_+^n alpha(t),

where a, b, c, n, sigma0 are lognormal random effects for the piece and
tau_s is its short-term breaking strength.  No damage accumulates while
the stress stays below the piece threshold sigma0 tau_s.

The model is integrated exactly as written, in psi and hours.  This form
famously cannot be nondimensionalized (its fitted parameters change
meaning with the units); that is a documented limitation of the model
itself, reproduced here deliberately because this module exists to
compare against it.

Integration is adaptive Runge-Kutta, segment by segment, skipping every
stretch the stress never exceeds the piece threshold; the failure event
alpha = 1 is located inside the step by the solver's root finder.
Pieces are independent, so the Monte Carlo failure probability is the
average over independent integrations with a binomial standard error.
The population parameters behind published Canadian-model reliability
figures are not available here, so the shipped configuration is an
illustrative calibration and comparisons against published numbers are
qualitative.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericError, ValidationError

__all__ = [
    "ADMPieceParams",
    "ADMPopulationParams",
    "illustrative_population",
    "adm_integrate",
    "adm_failure_prob",
]

_EFFECTS = ("a", "b", "c", "n", "sigma0")


@dataclass(frozen=True)
class ADMPieceParams:
    """Random effects of one piece plus its short-term strength.

    ``c`` may be zero, dropping the damage-proportional term; the other
    effects and the strength must be strictly positive.
    """

    a: float
    b: float
    c: float
    n: float
    sigma0: float
    tau_s: float

    def __post_init__(self):
        for name in ("a", "b", "n", "sigma0", "tau_s"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0.0:
                raise ValidationError(f"piece parameter {name} must be positive and finite")
        if not np.isfinite(self.c) or self.c < 0.0:
            raise ValidationError("piece parameter c must be nonnegative and finite")

    @property
    def threshold_stress(self):
        """Stress sigma0 * tau_s below which this piece takes no damage."""
        return self.sigma0 * self.tau_s


@dataclass(frozen=True)
class ADMPopulationParams:
    """Lognormal population: log-mean and log-sd per random effect.

    Ten values parameterize the five random effects of the damage
    equation; the short-term strength tau_s carries its own lognormal
    pair, conventionally set from a mean around 6900 psi.
    """

    log_mean_a: float
    log_sd_a: float
    log_mean_b: float
    log_sd_b: float
    log_mean_c: float
    log_sd_c: float
    log_mean_n: float
    log_sd_n: float
    log_mean_sigma0: float
    log_sd_sigma0: float
    log_mean_tau_s: float
    log_sd_tau_s: float

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not np.isfinite(val):
                raise ValidationError(f"population parameter {name} must be finite")
            if name.startswith("log_sd") and val < 0.0:
                raise ValidationError(f"population parameter {name} must be nonnegative")

    @classmethod
    def from_means(cls, means, covs):
        """Build from natural means and coefficients of variation.

        ``means`` and ``covs`` map each of a, b, c, n, sigma0, tau_s to
        the mean and CV of its lognormal distribution.
        """
        vals = {}
        for name in _EFFECTS + ("tau_s",):
            if name not in means or name not in covs:
                raise ValidationError(f"means and covs must both include {name!r}")
            m = float(means[name])
            v = float(covs[name])
            if m <= 0 or v < 0:
                raise ValidationError(f"mean of {name} must be positive, CV nonnegative")
            s2 = np.log1p(v * v)
            vals[f"log_mean_{name}"] = float(np.log(m) - 0.5 * s2)
            vals[f"log_sd_{name}"] = float(np.sqrt(s2))
        return cls(**vals)

    def mean_of(self, name):
        """Natural mean of one component."""
        mu = getattr(self, f"log_mean_{name}")
        sd = getattr(self, f"log_sd_{name}")
        return float(np.exp(mu + 0.5 * sd * sd))

    def sample(self, n, rng=None, seed=None):
        """Draw n independent pieces."""
        if n < 1:
            raise ValidationError("need at least one piece")
        rng = rng if rng is not None else np.random.default_rng(seed)
        cols = {}
        for name in _EFFECTS + ("tau_s",):
            mu = getattr(self, f"log_mean_{name}")
            sd = getattr(self, f"log_sd_{name}")
            cols[name] = np.exp(mu + sd * rng.standard_normal(n))
        return [
            ADMPieceParams(**{k: float(cols[k][i]) for k in cols}) for i in range(n)
        ]

    def to_dict(self):
        return {k: float(v) for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown population fields: {sorted(extra)}")
        missing = known - set(d)
        if missing:
            raise ValidationError(f"missing population fields: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in d.items()})

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def illustrative_population():
    """A documented illustrative population for qualitative comparisons.

    The stress-ratio threshold sigma0 has mean 0.533 and the short-term
    strength has mean 6900 psi, the values reported for this model in
    the reliability literature; the remaining effects, whose fitted
    values are not published alongside them, are calibrated so that a
    heavy 50-year residential profile yields a failure probability of
    order 0.01.  Comparisons built on it are qualitative by design.
    """
    return ADMPopulationParams.from_means(
        means={
            "a": 4e-8,
            "b": 1.3,
            "c": 4e-6,
            "n": 1.2,
            "sigma0": 0.533,
            "tau_s": 6900.0,
        },
        covs={
            "a": 1.5,
            "b": 0.15,
            "c": 1.0,
            "n": 0.15,
            "sigma0": 0.25,
            "tau_s": 0.25,
        },
    )


def _active_window(segment, thr, lo, hi):
    """Sub-interval of [lo, hi] where the segment stress exceeds thr."""
    if segment.slope == 0.0:
        return (lo, hi) if segment.level > thr else None
    t_cross = segment.t_start + (thr - segment.level) / segment.slope
    if segment.slope > 0.0:
        start = max(lo, t_cross)
        return (start, hi) if start < hi else None
    end = min(hi, t_cross)
    return (lo, end) if lo < end else None


def adm_integrate(piece, profile, horizon=None, rtol=1e-8, atol=1e-12):
    """Integrate the damage equation for one piece under a load profile.

    Returns ``(failure_time, final_alpha)``; ``failure_time`` is None if
    the piece survives to the horizon.  Failure is the first time alpha
    reaches 1, located by the solver's event root finding.  Failure
    times are accurate to roughly ten times ``rtol`` in relative terms,
    the event time inheriting the dense interpolant's error.
    """
    if not isinstance(piece, ADMPieceParams):
        raise ValidationError("expected ADMPieceParams")
    horizon = float(profile.horizon if horizon is None else horizon)
    if not (0.0 < horizon <= profile.horizon * (1 + 1e-12)):
        raise ValidationError("horizon must be positive and within the profile")
    thr = piece.threshold_stress
    a, b, c, n = piece.a, piece.b, piece.c, piece.n
    alpha = 0.0

    def event(t, y):
        return y[0] - 1.0

    event.terminal = True
    event.direction = 1.0

    for seg in profile.segments:
        lo = seg.t_start
        hi = min(seg.t_end, horizon)
        if hi <= lo:
            break
        window = _active_window(seg, thr, lo, hi)
        if window is None:
            continue
        w_lo, w_hi = window
        level, slope, t0 = seg.level, seg.slope, seg.t_start

        def rhs(t, y):
            s = max(level + slope * (t - t0) - thr, 0.0)
            # extreme exponents overflow; hand the solver an inf so its
            # step control fails visibly instead of crashing mid-step
            try:
                return [a * s**b + c * s**n * y[0]]
            except OverflowError:
                return [np.inf]

        with np.errstate(over="ignore", invalid="ignore"):
            sol = solve_ivp(
                rhs,
                (w_lo, w_hi),
                [alpha],
                method="RK45",
                rtol=rtol,
                atol=atol,
                events=event,
            )
        if sol.status < 0:
            raise NumericError(
                f"damage integration failed on [{w_lo:g}, {w_hi:g}] h "
                f"(threshold {thr:g} psi): {sol.message}"
            )
        if sol.status == 1:
            return float(sol.t_events[0][0]), 1.0
        alpha = float(sol.y[0, -1])
        if alpha >= 1.0:
            return float(sol.t[-1]), alpha
    return None, alpha


def adm_failure_prob(pop, profile, n_sim, rng=None, seed=None, horizon=None):
    """Monte Carlo failure probability under the profile.

    Returns ``(probability, standard_error)`` over ``n_sim`` pieces drawn
    from the population; the standard error is binomial.
    """
    if not isinstance(pop, ADMPopulationParams):
        raise ValidationError("expected ADMPopulationParams")
    if n_sim < 1:
        raise ValidationError("n_sim must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(seed)
    max_load = profile.max_load()
    failures = 0
    for piece in pop.sample(n_sim, rng=rng):
        if piece.threshold_stress >= max_load:
            continue
        t_f, _ = adm_integrate(piece, profile, horizon=horizon)
        if t_f is not None:
            failures += 1
    p = failures / n_sim
    se = float(np.sqrt(p * (1.0 - p) / n_sim))
    return p, se
