"""Bayesian inference for the damage model parameters.

The likelihood multiplies failure densities for observed failures and
survival probabilities for censored specimens, all under the gamma
process with load-profile shape eta.  Record times are bound to their
profiles once, so each parameter evaluation costs a couple of vectorized
exponentials per record-by-level matrix.

Sampling runs random-walk Metropolis in log-parameter space (the
Jacobian sum of logs is part of the target) inside a parallel-tempering
ladder: geometrically spaced temperatures, adjacent-pair swaps proposed
on a fixed stride alternating even and odd pairs, and per-chain proposal
scales adapted toward a 20 to 50 percent acceptance rate during burn-in
only, so the kept samples come from a fixed transition kernel.  A
Nelder-Mead ascent of the log posterior provides the starting point.

Parameters are positive; each carries a half-normal prior with a large
scale, plus the shape-identifiability constraint a < c.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .dataset import Dataset
from .errors import ValidationError
from .failure_dist import log_density_factor
from .shape_model import DegradationParams, LoadGrid, ShapeEvaluator
from .specfn import log_reg_lower_inc_gamma

__all__ = [
    "PriorSpec",
    "LikelihoodEvaluator",
    "PosteriorTarget",
    "nelder_mead_init",
    "PTConfig",
    "PosteriorSamples",
    "run_parallel_tempering",
    "fit",
]

_PARAM_NAMES = ("a", "b", "c", "u", "v", "xi")
# proposals beyond exp(+-300) have no posterior mass under any sane prior
# and start overflowing double precision inside the special functions
_PSI_BOUND = 300.0
# shapes beyond this cannot be resolved in double precision (the density
# series overflow); every such state is rejected outright, which changes
# nothing statistically because its log likelihood is below -1e90 anyway
_ETA_CEILING = 1e100


@dataclass(frozen=True)
class PriorSpec:
    """Half-normal priors on the positive parameters, plus a < c.

    The common scale is deliberately weak; the data carry the
    information, the prior mostly just rules out the exponent swap
    between the two power terms of the shape response.
    """

    scale: float = 1000.0
    require_a_lt_c: bool = True

    def __post_init__(self):
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ValidationError("prior scale must be positive")

    def log_prior(self, theta):
        """Log prior density at a positive parameter vector (6,)."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (6,):
            raise ValidationError("theta must have shape (6,)")
        if np.any(theta <= 0) or not np.all(np.isfinite(theta)):
            return -np.inf
        if self.require_a_lt_c and theta[0] >= theta[2]:
            return -np.inf
        return float(-0.5 * np.sum((theta / self.scale) ** 2))


class LikelihoodEvaluator:
    """Censored log likelihood of a dataset, precomputed for fast re-evaluation."""

    def __init__(self, dataset, grid=None):
        if not isinstance(dataset, Dataset):
            raise ValidationError("expected a Dataset")
        if len(dataset) == 0:
            raise ValidationError("dataset has no records")
        missing = {r.profile_id for r in dataset.records} - set(dataset.profiles)
        if missing:
            raise ValidationError(
                f"dataset lacks profiles for ids: {sorted(missing)}"
            )
        self.dataset = dataset
        self.grid = grid if grid is not None else LoadGrid()
        self._parts = []
        for pid, (times, censored) in dataset.group().items():
            ev = ShapeEvaluator(dataset.profiles[pid], self.grid)
            bound = ev.bind(times)
            self._parts.append((pid, bound, censored))

    def log_likelihood(self, params):
        """Sum of log densities (failures) and log survivals (censored)."""
        total = 0.0
        x = 1.0 / params.xi
        for _, bound, censored in self._parts:
            eta, etad = bound.eta_and_dot(params)
            # beyond the ceiling (or overflowed to inf/nan) the state has
            # no resolvable likelihood; comparisons with nan are False, so
            # this single check catches all three cases
            if not np.all(eta <= _ETA_CEILING):
                return -np.inf
            obs = ~censored
            if obs.any():
                eta_o = eta[obs]
                etad_o = etad[obs]
                if np.any(eta_o <= 0) or np.any(etad_o <= 0) or not np.all(
                    np.isfinite(etad_o)
                ):
                    return -np.inf
                with np.errstate(divide="ignore"):
                    total += float(
                        np.sum(np.log(etad_o) + log_density_factor(eta_o, x))
                    )
            if censored.any():
                eta_c = eta[censored]
                pos = eta_c > 0
                if pos.any():
                    total += float(np.sum(log_reg_lower_inc_gamma(eta_c[pos], x)))
            if not np.isfinite(total):
                return -np.inf
        return total

    def log_likelihood_many(self, theta):
        """Batched log likelihood over rows of a (P, 6) parameter matrix.

        Rows must already be positive and finite.  Returns a (P,) array
        with -inf for rows of zero likelihood; one fused evaluation costs
        far less than P separate ones because the special-function
        iteration overhead is shared across rows.
        """
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        a, b, c, u, v, xi = theta.T
        x = (1.0 / xi)[:, None]
        total = np.zeros(theta.shape[0])
        for _, bound, censored in self._parts:
            eta, etad = bound.eta_and_dot_many(a, b, c, u, v)
            # rows where eta exceeds the ceiling (or overflowed) have zero
            # likelihood; sanitize them so the special functions still
            # accept the batch
            ok = eta <= _ETA_CEILING
            bad = ~np.all(ok, axis=1)
            if bad.any():
                eta = np.where(ok, eta, 0.0)
                etad = np.where(np.isfinite(etad), etad, 0.0)
            obs = ~censored
            if obs.any():
                with np.errstate(divide="ignore", invalid="ignore"):
                    contrib = np.log(etad[:, obs]) + log_density_factor(
                        eta[:, obs], x
                    )
                total += contrib.sum(axis=1)
            if censored.any():
                eta_c = eta[:, censored]
                logs = np.zeros_like(eta_c)
                pos = eta_c > 0
                if pos.any():
                    xb = np.broadcast_to(x, eta_c.shape)
                    logs[pos] = log_reg_lower_inc_gamma(eta_c[pos], xb[pos])
                total += logs.sum(axis=1)
            total[bad] = -np.inf
        # any remaining numeric escape (nan or +inf) is zero mass
        return np.where(np.isnan(total) | np.isposinf(total), -np.inf, total)


class PosteriorTarget:
    """Log posterior over psi = ln(theta), Jacobian included."""

    def __init__(self, likelihood, prior=None):
        self.likelihood = likelihood
        self.prior = prior if prior is not None else PriorSpec()

    def __call__(self, psi):
        psi = np.asarray(psi, dtype=float)
        if psi.shape != (6,) or not np.all(np.isfinite(psi)):
            return -np.inf
        if np.any(np.abs(psi) > _PSI_BOUND):
            return -np.inf
        theta = np.exp(psi)
        lp = self.prior.log_prior(theta)
        if not np.isfinite(lp):
            return -np.inf
        params = DegradationParams(*theta)
        ll = self.likelihood.log_likelihood(params)
        out = ll + lp + float(np.sum(psi))
        return out if np.isfinite(out) else -np.inf

    def many(self, psi_mat):
        """Batched target over the rows of a (P, 6) psi matrix."""
        psi_mat = np.atleast_2d(np.asarray(psi_mat, dtype=float))
        out = np.full(psi_mat.shape[0], -np.inf)
        ok = np.all(np.isfinite(psi_mat), axis=1) & np.all(
            np.abs(psi_mat) <= _PSI_BOUND, axis=1
        )
        if not ok.any():
            return out
        psi_ok = psi_mat[ok]
        theta = np.exp(psi_ok)
        lp = np.array([self.prior.log_prior(t) for t in theta])
        fin = np.isfinite(lp)
        ll = np.full(theta.shape[0], -np.inf)
        if fin.any():
            ll[fin] = self.likelihood.log_likelihood_many(theta[fin])
        val = ll + lp + psi_ok.sum(axis=1)
        out[ok] = np.where(np.isfinite(val), val, -np.inf)
        return out


_DEFAULT_START = np.array([0.05, 0.01, 0.5, 0.001, 0.3, 0.3])


def nelder_mead_init(target, start=None, maxiter=4000):
    """Climb the log posterior with Nelder-Mead in psi space.

    Returns (params, psi, log_post).  The default start is a neutral
    point whose damage threshold sits well below ordinary hold levels,
    so the likelihood is finite from the first step.
    """
    psi0 = np.log(_DEFAULT_START if start is None else np.asarray(start, dtype=float))
    if not np.isfinite(target(psi0)):
        raise ValidationError("starting point has zero posterior density")
    res = optimize.minimize(
        lambda p: -target(p),
        psi0,
        method="Nelder-Mead",
        options={"maxiter": maxiter, "xatol": 1e-6, "fatol": 1e-8, "adaptive": True},
    )
    psi = res.x
    return DegradationParams(*np.exp(psi)), psi, float(-res.fun)


@dataclass(frozen=True)
class PTConfig:
    """Parallel-tempering run settings (desk-scale defaults)."""

    n_chains: int = 8
    n_burn: int = 2000
    n_keep: int = 5000
    temp_max: float = 20.0
    swap_stride: int = 5
    adapt_interval: int = 100
    init_step: float = 0.15
    accept_lo: float = 0.2
    accept_hi: float = 0.5

    def __post_init__(self):
        if self.n_chains < 2:
            raise ValidationError("tempering needs at least 2 chains")
        if self.temp_max <= 1.0:
            raise ValidationError("temp_max must exceed 1")
        if min(self.n_burn, self.n_keep, self.swap_stride, self.adapt_interval) <= 0:
            raise ValidationError("iteration counts must be positive")
        if not (0 < self.accept_lo < self.accept_hi < 1):
            raise ValidationError("acceptance window must satisfy 0 < lo < hi < 1")

    def betas(self):
        temps = np.geomspace(1.0, self.temp_max, self.n_chains)
        return 1.0 / temps


@dataclass
class PosteriorSamples:
    """Kept cold-chain samples in natural parameter space."""

    theta: np.ndarray
    log_post: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.log_post = np.asarray(self.log_post, dtype=float)
        if self.theta.ndim != 2 or self.theta.shape[1] != 6:
            raise ValidationError("theta must have shape (n, 6)")
        if self.log_post.shape != (self.theta.shape[0],):
            raise ValidationError("log_post length must match theta")

    def __len__(self):
        return self.theta.shape[0]

    def params_at(self, i):
        return DegradationParams(*self.theta[i])

    def params_list(self, thin=1):
        return [DegradationParams(*row) for row in self.theta[::thin]]

    def column(self, name):
        return self.theta[:, _PARAM_NAMES.index(name)]

    def summary(self):
        """Per-parameter mean/sd/median/90% interval, plus the threshold v/u."""
        out = {}
        cols = {name: self.column(name) for name in _PARAM_NAMES}
        cols["v/u"] = cols["v"] / cols["u"]
        for name, col in cols.items():
            out[name] = {
                "mean": float(col.mean()),
                "sd": float(col.std(ddof=1)),
                "median": float(np.median(col)),
                "q05": float(np.quantile(col, 0.05)),
                "q95": float(np.quantile(col, 0.95)),
            }
        return out

    def format_summary(self):
        rows = ["parameter      mean        sd        median      q05         q95"]
        for name, s in self.summary().items():
            rows.append(
                f"{name:<10} {s['mean']:>10.5g} {s['sd']:>10.4g} {s['median']:>11.5g}"
                f" {s['q05']:>11.5g} {s['q95']:>11.5g}"
            )
        return "\n".join(rows)

    def credible_interval(self, name, level=0.95):
        col = self.column(name) if name != "v/u" else self.column("v") / self.column("u")
        alpha = 0.5 * (1.0 - level)
        return (float(np.quantile(col, alpha)), float(np.quantile(col, 1 - alpha)))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(_PARAM_NAMES) + ",log_post\n")
            for row, lp in zip(self.theta, self.log_post):
                fh.write(",".join(repr(float(v)) for v in row) + f",{float(lp)!r}\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip()
            if header != ",".join(_PARAM_NAMES) + ",log_post":
                raise ValidationError(
                    "posterior CSV must start with header a,b,c,u,v,xi,log_post"
                )
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        if data.size == 0:
            raise ValidationError("posterior CSV has no rows")
        if data.shape[1] != 7:
            raise ValidationError("posterior CSV must have 7 columns")
        return cls(theta=data[:, :6], log_post=data[:, 6])


def _target_batch(target, mat):
    # evaluate all chains in one call when the target supports it
    many = getattr(target, "many", None)
    if many is not None:
        return np.asarray(many(mat), dtype=float)
    return np.array([target(p) for p in mat])


def run_parallel_tempering(target, psi0, config=None, rng=None, seed=None):
    """Sample the target (a callable on psi vectors) with parallel tempering.

    Returns a PosteriorSamples of the cold chain.  Deterministic for a
    given seed.  The target is any callable mapping a (6,) psi vector to
    a log density; model fitting passes a :class:`PosteriorTarget`, whose
    batched ``many`` path evaluates all chains at once.
    """
    config = config if config is not None else PTConfig()
    rng = rng if rng is not None else np.random.default_rng(seed)
    psi0 = np.asarray(psi0, dtype=float)
    if psi0.shape != (6,):
        raise ValidationError("psi0 must have shape (6,)")
    if not np.isfinite(target(psi0)):
        raise ValidationError("psi0 has zero target density")

    nc = config.n_chains
    betas = config.betas()
    psi = np.tile(psi0, (nc, 1)) + 0.01 * rng.standard_normal((nc, 6))
    psi[0] = psi0
    logp = _target_batch(target, psi)
    steps = np.full((nc, 6), config.init_step)
    acc_count = np.zeros(nc)
    prop_count = np.zeros(nc)
    swap_acc = np.zeros(nc - 1)
    swap_prop = np.zeros(nc - 1)

    n_total = config.n_burn + config.n_keep
    kept_theta = np.empty((config.n_keep, 6))
    kept_logp = np.empty(config.n_keep)
    recent = [[] for _ in range(nc)]

    for it in range(n_total):
        burning = it < config.n_burn
        prop = psi + steps * rng.standard_normal((nc, 6))
        logu = np.log(rng.random(nc))
        lp_new = _target_batch(target, prop)
        with np.errstate(invalid="ignore"):
            # -inf minus -inf is nan; the comparison rejects it, as it should
            accept = logu < betas * (lp_new - logp)
        psi[accept] = prop[accept]
        logp[accept] = lp_new[accept]
        acc_count += accept
        prop_count += 1
        if burning:
            for k in range(nc):
                recent[k].append(psi[k].copy())

        if (it + 1) % config.swap_stride == 0:
            parity = ((it + 1) // config.swap_stride) % 2
            for k in range(parity, nc - 1, 2):
                swap_prop[k] += 1
                delta = (betas[k] - betas[k + 1]) * (logp[k + 1] - logp[k])
                if np.log(rng.random()) < delta:
                    psi[[k, k + 1]] = psi[[k + 1, k]]
                    logp[[k, k + 1]] = logp[[k + 1, k]]
                    swap_acc[k] += 1

        if burning and (it + 1) % config.adapt_interval == 0:
            for k in range(nc):
                rate = acc_count[k] / max(prop_count[k], 1)
                if rate < config.accept_lo:
                    steps[k] *= 0.7
                elif rate > config.accept_hi:
                    steps[k] *= 1.4
                window = np.array(recent[k][-config.adapt_interval :])
                spread = window.std(axis=0)
                good = spread > 1e-12
                # lean the per-axis widths toward the chain's own spread
                steps[k][good] = np.sqrt(
                    steps[k][good] * np.maximum(spread[good], 1e-4)
                )
            acc_count[:] = 0
            prop_count[:] = 0

        if not burning:
            j = it - config.n_burn
            kept_theta[j] = np.exp(psi[0])
            kept_logp[j] = logp[0]

    meta = {
        "acceptance": (acc_count / np.maximum(prop_count, 1)).tolist(),
        "swap_acceptance": (swap_acc / np.maximum(swap_prop, 1)).tolist(),
        "betas": betas.tolist(),
        "n_burn": config.n_burn,
        "n_keep": config.n_keep,
    }
    return PosteriorSamples(kept_theta, kept_logp, meta)


def fit(dataset, prior=None, config=None, grid=None, seed=None, start=None):
    """Nelder-Mead initialization followed by parallel tempering.

    Returns (samples, init_params).
    """
    like = LikelihoodEvaluator(dataset, grid)
    target = PosteriorTarget(like, prior)
    init_params, psi_hat, _ = nelder_mead_init(target, start=start)
    samples = run_parallel_tempering(target, psi_hat, config=config, seed=seed)
    samples.meta["init"] = init_params.to_dict()
    return samples, init_params
