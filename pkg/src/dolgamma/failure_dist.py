"""Failure-time distribution induced by the damage gamma process.

Damage at time t is gamma distributed with shape eta(t) and scale xi; the
piece fails when accumulated damage reaches 1, so survival to t is the
probability that a Ga(eta(t), xi) variate stays below 1:

    S(t) = P(eta(t), x),    x = 1 / xi,

with P the regularized lower incomplete gamma function.  Differentiating
in t gives the density

    f(t) = eta_dot(t) [ (psi(eta) - ln x) P(eta, x) + L(eta, x) / Gamma(eta) ],
    L(a, x) = integral_0^x u^{a-1} e^{-u} ln(x/u) du,

psi being the digamma function.  The identity
integral_0^inf u^{a-1} e^{-u} ln(x/u) du = Gamma(a) (ln x - psi(a)) turns
the bracket into an upper-tail form,

    (ln x - psi(eta)) Q(eta, x) + R(eta, x) / Gamma(eta),
    R(a, x) = integral_x^inf u^{a-1} e^{-u} ln(u/x) du.

All terms of the first form are nonnegative when psi(eta) >= ln x and of
the second form when psi(eta) <= ln x, so picking the form that matches
the sign of psi(eta) - ln x makes the evaluation cancellation-free; the
two pieces are combined in log space so tiny densities keep full relative
accuracy.
"""

import numpy as np

from .errors import MedianBeyondHorizon, NumericError, ValidationError
from .shape_model import ShapeEvaluator
from .specfn import (
    digamma,
    ln_gamma,
    log_hyp2f2_family,
    log_reg_lower_inc_gamma,
    log_reg_upper_inc_gamma,
    log_tail_integral,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
)

__all__ = [
    "log_density_factor",
    "density_factor",
    "FailureTimeDistribution",
    "failure_probabilities",
    "residual_life_samples",
    "save_curve",
]

_LN2 = float(np.log(2.0))


def log_density_factor(eta, x):
    """log of f(t)/eta_dot(t) as a function of a = eta(t) and x = 1/xi.

    Vectorized over eta and x (broadcast together).  Returns -inf where
    eta == 0, where the failure density vanishes.
    """
    eta, x = np.broadcast_arrays(
        np.asarray(eta, dtype=float), np.asarray(x, dtype=float)
    )
    scalar = eta.ndim == 0
    a = np.atleast_1d(eta).copy()
    xx = np.atleast_1d(x).copy()
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValidationError("eta must be finite and nonnegative")
    if np.any(xx <= 0) or not np.all(np.isfinite(xx)):
        raise ValidationError("x must be finite and positive")
    out = np.full(a.shape, -np.inf)
    pos = a > 0
    if pos.any():
        ap = a[pos]
        xp = xx[pos]
        d = digamma(ap) - np.log(xp)
        res = np.empty(ap.shape)
        lower = d >= 0
        if lower.any():
            al, xl = ap[lower], xp[lower]
            dl = d[lower]
            log_t2 = (
                al * np.log(xl)
                - ln_gamma(al)
                - 2.0 * np.log(al)
                + log_hyp2f2_family(al, xl)
            )
            with np.errstate(divide="ignore"):
                log_t1 = np.where(
                    dl > 0,
                    np.log(np.where(dl > 0, dl, 1.0)) + log_reg_lower_inc_gamma(al, xl),
                    -np.inf,
                )
            res[lower] = np.logaddexp(log_t1, log_t2)
        upper = ~lower
        if upper.any():
            au, xu = ap[upper], xp[upper]
            du = -d[upper]
            log_t2 = log_tail_integral(au, xu) - ln_gamma(au)
            log_t1 = np.log(du) + log_reg_upper_inc_gamma(au, xu)
            res[upper] = np.logaddexp(log_t1, log_t2)
        out[pos] = res
    return float(out[0]) if scalar else out.reshape(eta.shape)


def density_factor(eta, x):
    """f(t)/eta_dot(t); the exponential of :func:`log_density_factor`."""
    out = log_density_factor(eta, x)
    with np.errstate(over="ignore"):
        return np.exp(out)


class FailureTimeDistribution:
    """Failure time distribution for one load profile at fixed parameters.

    Wraps a :class:`ShapeEvaluator` (built on demand, or pass a shared
    one) and exposes survival, cdf, density, and residual-life medians.
    All time arguments are hours within [0, profile horizon].
    """

    def __init__(self, profile, params, grid=None, evaluator=None):
        if evaluator is not None and evaluator.profile is not profile:
            raise ValidationError("evaluator was built for a different profile")
        self.profile = profile
        self.params = params
        self.evaluator = evaluator if evaluator is not None else ShapeEvaluator(profile, grid)
        self.x = 1.0 / params.xi

    def _eta(self, t):
        return self.evaluator.bind(t).eta(self.params)

    def survival(self, t):
        """P(T > t): probability the piece is intact at time t."""
        scalar = np.ndim(t) == 0
        eta = self._eta(t)
        out = np.ones_like(eta)
        pos = eta > 0
        if pos.any():
            out[pos] = reg_lower_inc_gamma(eta[pos], self.x)
        return float(out[0]) if scalar else out

    def log_survival(self, t):
        scalar = np.ndim(t) == 0
        eta = self._eta(t)
        out = np.zeros_like(eta)
        pos = eta > 0
        if pos.any():
            out[pos] = log_reg_lower_inc_gamma(eta[pos], self.x)
        return float(out[0]) if scalar else out

    def cdf(self, t):
        """P(T <= t), computed from the upper tail so small values are exact."""
        scalar = np.ndim(t) == 0
        eta = self._eta(t)
        out = np.zeros_like(eta)
        pos = eta > 0
        if pos.any():
            out[pos] = reg_upper_inc_gamma(eta[pos], self.x)
        return float(out[0]) if scalar else out

    def log_density(self, t):
        scalar = np.ndim(t) == 0
        eta, etad = self.evaluator.bind(t).eta_and_dot(self.params)
        out = np.full(eta.shape, -np.inf)
        live = (eta > 0) & (etad > 0)
        if live.any():
            with np.errstate(divide="ignore"):
                out[live] = np.log(etad[live]) + log_density_factor(eta[live], self.x)
        return float(out[0]) if scalar else out

    def density(self, t):
        out = self.log_density(t)
        with np.errstate(over="ignore"):
            return np.exp(out)

    def failure_probability(self, t=None):
        """P(T <= t), defaulting to the profile horizon."""
        return float(self.cdf(self.profile.horizon if t is None else t))

    def residual_survivor(self, t, t0):
        """P(T > t | T > t0) for t >= t0."""
        scalar = np.ndim(t) == 0
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < t0):
            raise ValidationError("residual survivor needs t >= t0")
        ls0 = self.log_survival(float(t0))
        if not np.isfinite(ls0):
            raise NumericError("survival at t0 underflows; cannot condition on it")
        out = np.exp(np.minimum(self.log_survival(t_arr) - ls0, 0.0))
        return float(out[0]) if scalar else out

    def median_residual_life(self, t0, bisect_iters=100):
        """Median additional lifetime given survival to t0, in hours.

        Solves S(t) = S(t0)/2 by bisection on [t0, horizon]; raises
        MedianBeyondHorizon when more than half the conditional
        distribution lies beyond the profile horizon.
        """
        t0 = float(t0)
        if not 0.0 <= t0 <= self.profile.horizon:
            raise ValidationError("t0 outside the profile domain")
        ls0 = self.log_survival(t0)
        if not np.isfinite(ls0):
            raise NumericError("survival at t0 underflows; residual life undefined")
        target = ls0 - _LN2
        hi = self.profile.horizon
        if self.log_survival(hi) > target:
            raise MedianBeyondHorizon(
                "median residual life exceeds the profile horizon "
                f"({(hi - t0):g} h after t0)"
            )
        lo = t0
        for _ in range(bisect_iters):
            mid = 0.5 * (lo + hi)
            if self.log_survival(mid) > target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi) - t0

    def cdf_curve(self, times=None, n=513):
        """(times, cdf) pair suitable for plotting or CSV export."""
        if times is None:
            times = np.linspace(0.0, self.profile.horizon, n)
        else:
            times = np.atleast_1d(np.asarray(times, dtype=float))
        return times, self.cdf(times)


def failure_probabilities(profile, params_seq, t=None, grid=None):
    """P(T <= t) for each parameter draw; t defaults to the horizon."""
    ev = ShapeEvaluator(profile, grid)
    tt = profile.horizon if t is None else float(t)
    bound = ev.bind([tt])
    x_eta = []
    for p in params_seq:
        eta = bound.eta(p)[0]
        if eta <= 0:
            x_eta.append(0.0)
        else:
            x_eta.append(float(reg_upper_inc_gamma(eta, 1.0 / p.xi)))
    return np.array(x_eta)


def residual_life_samples(profile, params_seq, t0, grid=None):
    """Median residual life (hours) per draw; inf when beyond the horizon."""
    ev = ShapeEvaluator(profile, grid)
    out = []
    for p in params_seq:
        dist = FailureTimeDistribution(profile, p, evaluator=ev)
        try:
            out.append(dist.median_residual_life(t0))
        except MedianBeyondHorizon:
            out.append(np.inf)
    return np.array(out)


def save_curve(path, times, values, value_name="value"):
    """Write a two-column CSV with a time_hours,<value_name> header."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValidationError("curve arrays must be 1-d and equally long")
    data = np.column_stack([times, values])
    # 17 significant digits make the text form reproduce the binary value
    np.savetxt(
        path,
        data,
        delimiter=",",
        header=f"time_hours,{value_name}",
        comments="",
        fmt="%.17g",
    )
