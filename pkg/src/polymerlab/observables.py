"""Geometric and self-intersection observables of a string configuration:
center of mass, radius of gyration, near-pair counts, and the bin
occupancy histogram with its counting inequalities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import Trajectory


def _row(traj, t):
    if isinstance(traj, Trajectory):
        if not (0 <= t <= traj.T):
            raise ValueError(f"time {t} outside 0..{traj.T}")
        return traj.u[t]
    u = np.asarray(traj, dtype=float)
    if u.ndim == 1:
        return u
    if not (0 <= t < u.shape[0]):
        raise ValueError(f"time {t} outside 0..{u.shape[0] - 1}")
    return u[t]


def center_of_mass(traj, t: int = 0) -> float:
    """Site average of the configuration at time t."""
    return float(_row(traj, t).mean())


def mean_height_series(traj: Trajectory) -> np.ndarray:
    """ubar(t) for t = 0..T."""
    return traj.u.mean(axis=1)


def radius_of_gyration(traj: Trajectory) -> float:
    """Root mean square spread about the per-time center of mass,
    averaged over t = 1..T (the initial slice is excluded)."""
    if traj.T < 1:
        raise ValueError("need at least one evolved time slice")
    u = traj.u[1:]
    dev = u - u.mean(axis=1, keepdims=True)
    return float(np.sqrt(np.mean(dev ** 2)))


def gyration_from_rows(rows: np.ndarray) -> np.ndarray:
    """Vectorized R over a batch: rows has shape (..., T, J); returns the
    rms spread per leading index."""
    dev = rows - rows.mean(axis=-1, keepdims=True)
    return np.sqrt((dev ** 2).mean(axis=(-2, -1)))


def self_intersection_count(traj, t=0, epsilon: float = None) -> int:
    """Number of ordered site pairs (i, j), diagonal included, with
    |u(t,i) - u(t,j)| <= epsilon.  Sort plus binary search, O(J log J).

    Boundary pairs are resolved through the interval test
    u_j in [u_i - eps, u_i + eps]; when a pair distance differs from
    eps by less than one rounding error this can disagree with direct
    subtraction by a pair or two."""
    if epsilon is None or epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = np.sort(_row(traj, t))
    lo = np.searchsorted(x, x - epsilon, side="left")
    hi = np.searchsorted(x, x + epsilon, side="right")
    return int((hi - lo).sum())


def self_intersection_count_brute(traj, t=0, epsilon: float = None) -> int:
    """Quadratic reference implementation kept as a test oracle."""
    if epsilon is None or epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = _row(traj, t)
    return int((np.abs(x[:, None] - x[None, :]) <= epsilon).sum())


def intersection_counts_batch(rows: np.ndarray, epsilon: float) -> np.ndarray:
    """Pair counts for a batch of configurations, shape (..., J) -> (...).

    Small strings go through one broadcast comparison (J^2 per row in a
    single kernel); wide ones fall back to sorted two-sided searches to
    keep memory at O(J) per row.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rows = np.asarray(rows, dtype=float)
    J = rows.shape[-1]
    if J <= 64:
        close = np.abs(rows[..., :, None] - rows[..., None, :]) <= epsilon
        return close.sum(axis=(-2, -1)).astype(np.int64)
    x = np.sort(rows, axis=-1)
    flat = x.reshape(-1, J)
    out = np.empty(flat.shape[0], dtype=np.int64)
    for r in range(flat.shape[0]):
        row = flat[r]
        lo = np.searchsorted(row, row - epsilon, side="left")
        hi = np.searchsorted(row, row + epsilon, side="right")
        out[r] = (hi - lo).sum()
    return out.reshape(x.shape[:-1])


@dataclass(frozen=True)
class OccupancyHistogram:
    epsilon: float
    alpha: float
    counts: dict = field(default_factory=dict)   # bin index z -> occupancy

    def total(self) -> int:
        return sum(self.counts.values())

    def sum_of_squares(self) -> int:
        return sum(v * v for v in self.counts.values())


def occupancy_histogram(traj, t=0, epsilon: float = None,
                        alpha: float = 0.0) -> OccupancyHistogram:
    """Assign each site value to the half-open bin
    (z*eps - alpha*eps, z*eps + (1-alpha)*eps]; every site lands in
    exactly one bin."""
    if epsilon is None or epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not (0.0 <= alpha <= 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    x = _row(traj, t)
    # x in (z*e - a*e, z*e + (1-a)*e]  <=>  x/e + a in (z, z+1]
    z = np.ceil(x / epsilon + alpha).astype(np.int64) - 1
    vals, cnts = np.unique(z, return_counts=True)
    return OccupancyHistogram(epsilon=epsilon, alpha=alpha,
                              counts=dict(zip(vals.tolist(), cnts.tolist())))


@dataclass(frozen=True)
class InequalityReport:
    lhs: int                 # near-pair count
    rhs: int                 # sum of squared bin occupancies
    holds: bool
    window_site_count: int | None = None
    window_bin_count: int | None = None
    window_quadratic_mean_bound: float | None = None
    chain_holds: bool | None = None


def local_inequality_check(traj, t=0, epsilon: float = None,
                           alpha: float = 0.0,
                           window: tuple[int, int] | None = None
                           ) -> InequalityReport:
    """Near pairs dominate the occupancy square sum: sites sharing a bin
    of width eps are within eps of each other, so N >= sum_z l(z)^2.

    With a bin window [z-, z+) the quadratic-mean step is also reported:
    (sum of l over the window)^2 / (number of window bins) <= sum l^2 <= N.
    """
    N = self_intersection_count(traj, t, epsilon)
    hist = occupancy_histogram(traj, t, epsilon, alpha)
    sq = hist.sum_of_squares()
    rep = dict(lhs=N, rhs=sq, holds=N >= sq)
    if window is not None:
        zlo, zhi = window
        if zhi <= zlo:
            raise ValueError("empty bin window")
        in_win = [hist.counts.get(z, 0) for z in range(zlo, zhi)]
        L = sum(in_win)
        nb = zhi - zlo
        bound = L * L / nb
        rep.update(window_site_count=L, window_bin_count=nb,
                   window_quadratic_mean_bound=bound,
                   chain_holds=bool(N >= sq >= bound - 1e-12))
    return InequalityReport(**rep)


def observable_record(traj: Trajectory, beta: float, epsilon: float) -> dict:
    """Summary dict for JSONL export: seed, sizes, R, and the total
    near-pair count over t = 1..T."""
    n_total = int(sum(self_intersection_count(traj, t, epsilon)
                      for t in range(1, traj.T + 1)))
    return {
        "seed": traj.seed,
        "J": traj.J,
        "T": traj.T,
        "beta": beta,
        "epsilon": epsilon,
        "R": radius_of_gyration(traj),
        "N_total": n_total,
    }
