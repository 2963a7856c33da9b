"""Per-mode autoregressive structure of the centered string and the
large-deviation machinery for time-averaged squared modes.

Each cosine mode of the centered field is an AR(1) chain.  The module
decomposes trajectories into those chains, verifies the Parseval link
between the gyration radius and the mode time averages, and evaluates
the rate function governing P(S_T > K) together with its cumulant
fixed point and Monte Carlo tail probes.

The rate function is normalized to unit innovation variance; general
variances enter through I_sigma(x) = I_1(x / sigma^2).  That choice is
forced by the zero: the minimizer sits at 1/(1-rho^2), the stationary
second moment of the UNIT-variance chain, for every sigma.  An
alternative normalization that weights only the second bracket by
1/(2 sigma^2) is kept alongside for comparison; the two agree exactly
at sigma = 1 and disagree elsewhere.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .dynamics import counter_rng, mode_innovation_std
from .spectral import Basis, Convention

_FIXED_POINT_TOL = 1e-12
_FIXED_POINT_MAX_ITER = 100_000


class DegenerateProcessError(ValueError):
    """Zero innovation variance where the operation needs a spread."""


class CumulantDomainError(ValueError):
    """Tilt parameter at or above the explosion threshold."""

    def __init__(self, message: str, last_iterate: float):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class AR1Params:
    rho: float
    sigma2: float

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.sigma2 < 0.0:
            raise ValueError("sigma2 must be nonnegative")


@dataclass(frozen=True)
class ModeProcess:
    """One mode's series X_1..X_T with its quadratic time average."""

    m: int
    series: np.ndarray

    @property
    def time_average(self) -> float:
        return float(np.mean(self.series ** 2))


def ar1_params_for_mode(basis: Basis, m: int,
                        conv: Convention = Convention.LITERAL) -> AR1Params:
    """Autoregression coefficient and innovation variance of mode m."""
    if not 1 <= m <= basis.J - 1:
        raise ValueError(f"mode index must lie in 1..{basis.J - 1}")
    sig = mode_innovation_std(basis, conv)[m]
    return AR1Params(rho=float(basis.rho[m]), sigma2=float(sig * sig))


def mode_decompose(traj, basis: Basis) -> list:
    """Project the centered field onto the orthonormal modes m >= 1.

    Requires the zero initial profile; each returned series then starts
    from X_0 = 0 implicitly and satisfies X_{t+1} = rho_m X_t + innovation.
    """
    u = np.asarray(traj.u, dtype=float)
    if u.shape[1] != basis.J:
        raise ValueError("trajectory width does not match the basis")
    if np.any(u[0] != 0.0):
        raise ValueError("mode decomposition requires the zero initial "
                         "profile")
    centered = u[1:] - u[1:].mean(axis=1, keepdims=True)
    coeffs = centered @ basis.e[1:].T          # (T, J-1)
    return [ModeProcess(m=m, series=coeffs[:, m - 1].copy())
            for m in range(1, basis.J)]


def reconstruct_centered(modes: list, basis: Basis) -> np.ndarray:
    """Resynthesize the centered field rows from mode series."""
    coeffs = np.stack([mp.series for mp in modes], axis=1)
    return coeffs @ basis.e[1:]


def gyration_spectral_identity(traj, basis: Basis) -> dict:
    """Check R^2 = c * sum_m S_T^(m) and report the fitted constant.

    Orthonormality of the e_m gives sum_n (u - ubar)^2 = sum_m X_m^2 per
    row, hence c = 1/J after averaging over sites; a brute-force check
    fixed that value ahead of this implementation (some presentations
    absorb the 1/J and print c = 1).  R2_spectral uses the fixed 1/J;
    `constant` is the per-trajectory fitted ratio, nan for the zero
    trajectory.
    """
    from .observables import radius_of_gyration

    modes = mode_decompose(traj, basis)
    s_sum = float(sum(mp.time_average for mp in modes))
    r2 = float(radius_of_gyration(traj) ** 2)
    c_fixed = 1.0 / basis.J
    fitted = r2 / s_sum if s_sum > 0.0 else float("nan")
    return {"R2_direct": r2, "R2_spectral": c_fixed * s_sum,
            "constant": fitted}


def _check_positive_sigma(params: AR1Params):
    if params.sigma2 == 0.0:
        raise DegenerateProcessError(
            "zero innovation variance: S_T is deterministic")


def rate_function(params: AR1Params, x):
    """Large-deviation rate of S_T = (1/T) sum X_t^2.

    Unit-variance normal form for x > 0:

        I(x) = -1/2 ln(2x / (1 + sqrt(4 rho^2 x^2 + 1)))
               + 1/2 [(rho^2 + 1) x - sqrt(4 rho^2 x^2 + 1)]

    +inf for x <= 0; general variance by I(x / sigma2).  Vanishes
    exactly at the stationary mean.
    """
    _check_positive_sigma(params)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x) / params.sigma2
    out = np.full(xs.shape, np.inf)
    pos = xs > 0.0
    xp = xs[pos]
    root = np.sqrt(4.0 * params.rho ** 2 * xp ** 2 + 1.0)
    out[pos] = (-0.5 * np.log(2.0 * xp / (1.0 + root))
                + 0.5 * ((params.rho ** 2 + 1.0) * xp - root))
    return float(out[0]) if scalar else out


def rate_function_as_printed(params: AR1Params, x):
    """Alternative normalization with 1/(2 sigma^2) weighting the
    second bracket only.  Coincides with `rate_function` at sigma2 = 1;
    kept for side-by-side comparison, not for production use."""
    _check_positive_sigma(params)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    out = np.full(xs.shape, np.inf)
    pos = xs > 0.0
    xp = xs[pos]
    root = np.sqrt(4.0 * params.rho ** 2 * xp ** 2 + 1.0)
    out[pos] = (-0.5 * np.log(2.0 * xp / (1.0 + root))
                + ((params.rho ** 2 + 1.0) * xp - root)
                / (2.0 * params.sigma2))
    return float(out[0]) if scalar else out


def cumulant_threshold(params: AR1Params) -> float:
    """Largest tilt with a finite limiting cumulant: (1-rho)^2/(2 sigma2)."""
    _check_positive_sigma(params)
    return (1.0 - params.rho) ** 2 / (2.0 * params.sigma2)


def cumulant_fixed_point(params: AR1Params, y: float) -> dict:
    """Iterate lambda <- rho^2 lambda / (1 - 2 sigma2 lambda) + y from
    lambda_0 = y to its stable fixed point; the limiting cumulant of
    (1/T) log E exp(y sum X_t^2) is -(1/2) ln(1 - 2 sigma2 lambda*).

    Stops when successive iterates agree to 1e-12 or after 1e5 steps; an
    iterate reaching 1/(2 sigma2) means y is above threshold and raises
    with the last finite iterate attached.
    """
    s2 = params.sigma2
    r2 = params.rho ** 2
    lam = float(y)
    cap = np.inf if s2 == 0.0 else 1.0 / (2.0 * s2)
    for _ in range(_FIXED_POINT_MAX_ITER):
        if lam >= cap:
            raise CumulantDomainError(
                f"tilt y={y} is at or above the explosion threshold",
                last_iterate=lam)
        nxt = r2 * lam / (1.0 - 2.0 * s2 * lam) + y
        if abs(nxt - lam) < _FIXED_POINT_TOL:
            lam = nxt
            break
        lam = nxt
    else:
        raise CumulantDomainError(
            f"no fixed point within {_FIXED_POINT_MAX_ITER} iterations "
            f"for tilt y={y}", last_iterate=lam)
    if lam >= cap:
        raise CumulantDomainError(
            f"tilt y={y} is at or above the explosion threshold",
            last_iterate=lam)
    cum = 0.0 if s2 == 0.0 else -0.5 * np.log(1.0 - 2.0 * s2 * lam)
    return {"lambda_star": lam, "cumulant": float(cum)}


def _cumulant_grid(params: AR1Params, ys: np.ndarray) -> np.ndarray:
    """Limiting cumulant on a grid, via the closed-form stable root of
    the fixed-point quadratic 2 s2 L^2 - (1 - r2 + 2 s2 y) L + y = 0."""
    s2 = params.sigma2
    r2 = params.rho ** 2
    b = 1.0 - r2 + 2.0 * s2 * ys
    disc = b * b - 8.0 * s2 * ys
    lam = np.where(disc >= 0.0,
                   (b - np.sqrt(np.maximum(disc, 0.0))) / (4.0 * s2),
                   np.nan)
    arg = 1.0 - 2.0 * s2 * lam
    return np.where(arg > 0.0, -0.5 * np.log(np.maximum(arg, 1e-300)),
                    np.inf)


def legendre_rate(params: AR1Params, x, n_grid: int = 20_001):
    """Numerical Legendre transform sup_y (x y - cumulant(y)) over a grid
    reaching deep into the negative tilts (the optimizer for small x sits
    far left) and up to just under the explosion threshold.

    The cumulant meets the threshold in a square-root cusp, so the
    optimizer for large x crowds against it; the grid is uniform over
    the body and geometric in the gap to the threshold.
    """
    _check_positive_sigma(params)
    y_hi = cumulant_threshold(params)
    y_lo = -60.0 / params.sigma2
    gap0 = 0.01 * (y_hi - y_lo)
    body = np.linspace(y_lo, y_hi - gap0, n_grid)
    tail = y_hi - gap0 * np.logspace(0.0, -9.0, n_grid // 4)[1:]
    ys = np.concatenate([body, tail])
    cums = _cumulant_grid(params, ys)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    vals = np.atleast_1d(x)[:, None] * ys[None, :] - cums[None, :]
    sup = vals.max(axis=1)
    return float(sup[0]) if scalar else sup


def tail_probe(params: AR1Params, T: int, K: float, samples: int,
               seed: int = 0, chunk: int = 100_000,
               workers: int = 4) -> dict:
    """Monte Carlo estimate of -(1/T) log P(S_T > K) for the chain
    started at 0, reported next to the rate function at K.

    Spreads chunks across threads with deterministic per-chunk streams
    and a fixed-order reduction.  Fewer than 20 exceedances flags the
    result as underpowered; zero exceedances report an infinite
    empirical rate, still flagged, never an error.
    """
    _check_positive_sigma(params)
    stat_mean = params.sigma2 / (1.0 - params.rho ** 2)
    if K <= stat_mean:
        raise ValueError(
            f"threshold K={K} must exceed the stationary mean {stat_mean}")
    if T < 1 or samples < 1:
        raise ValueError("T and samples must be positive")
    sigma = np.sqrt(params.sigma2)

    sizes = [min(chunk, samples - start)
             for start in range(0, samples, chunk)]

    def run(idx_size):
        idx, size = idx_size
        rng = counter_rng(seed, 7, idx)
        xi = rng.standard_normal((size, T))
        x = lfilter([sigma], [1.0, -params.rho], xi, axis=1)
        s = np.mean(x * x, axis=1)
        return int(np.count_nonzero(s > K))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        counts = list(pool.map(run, enumerate(sizes)))
    exceed = sum(counts)

    if exceed == 0:
        emp = float("inf")
    else:
        emp = -np.log(exceed / samples) / T
    return {"empirical_log_prob_over_T": float(emp),
            "rate_at_K": float(rate_function(params, K)),
            "exceedances": exceed,
            "underpowered": exceed < 20,
            "T": T, "K": K, "samples": samples}


def ldp_rows_to_csv(rows: list) -> str:
    """Serialize rate-table and tail-probe rows.

    Columns: rho, sigma2, x_or_K, value, empirical, T, samples.  Rate
    rows leave the last three fields empty.
    """
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return f"{v:.12g}"

    lines = ["rho,sigma2,x_or_K,value,empirical,T,samples"]
    for r in rows:
        lines.append(",".join(fmt(r.get(k)) for k in
                              ("rho", "sigma2", "x_or_K", "value",
                               "empirical", "T", "samples")))
    return "\n".join(lines) + "\n"
