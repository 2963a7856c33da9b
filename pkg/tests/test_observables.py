import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polymerlab.dynamics import sample_noise, simulate_recursion
from polymerlab.observables import (center_of_mass, gyration_from_rows,
                                    intersection_counts_batch,
                                    local_inequality_check,
                                    mean_height_series, observable_record,
                                    occupancy_histogram, radius_of_gyration,
                                    self_intersection_count,
                                    self_intersection_count_brute)


def _traj(seed=0, T=4, J=6):
    return simulate_recursion(np.zeros(J), sample_noise(seed, T, J))


def test_center_of_mass_and_series():
    traj = _traj()
    assert center_of_mass(traj, 2) == pytest.approx(traj.u[2].mean())
    series = mean_height_series(traj)
    assert series.shape == (traj.T + 1,)
    assert series[0] == 0.0


def test_radius_of_gyration_hand_value():
    u = np.array([[0.0, 0.0], [1.0, 3.0]])
    from polymerlab.dynamics import Trajectory
    traj = Trajectory(u=u)
    # single evolved row, deviations are +-1 about the mean 2
    assert radius_of_gyration(traj) == pytest.approx(1.0)


def test_gyration_from_rows_matches_scalar():
    traj = _traj(3)
    batch = gyration_from_rows(traj.u[None, 1:, :])
    assert batch[0] == pytest.approx(radius_of_gyration(traj), abs=1e-14)


def test_count_constant_row_is_square():
    row = np.zeros(7)
    assert self_intersection_count(row, 0, 0.5) == 49


def test_count_spread_row_is_diagonal():
    row = np.arange(6) * 10.0
    assert self_intersection_count(row, 0, 0.5) == 6


def test_count_bounds_hold():
    for seed in range(20):
        row = np.random.default_rng(seed).normal(size=9)
        n = self_intersection_count(row, 0, 0.3)
        assert 9 <= n <= 81


def test_count_matches_brute_on_ties():
    # exact-boundary pairs: |diff| == eps counts, just beyond does not
    row = np.array([0.0, 0.5, 1.0 + 1e-12])
    assert (self_intersection_count(row, 0, 0.5)
            == self_intersection_count_brute(row, 0, 0.5))


# dyadic lattice: differences are exact, so the interval test and the
# direct subtraction agree on every boundary tie.  Off the lattice the
# two can differ when |u_i - u_j| sits within one ulp of eps (see the
# note on self_intersection_count); that is a rounding coincidence, not
# a property of either algorithm.
@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-51200, 51200), min_size=1, max_size=24),
       st.integers(1, 10240))
def test_count_sorted_equals_brute(grid_values, grid_eps):
    row = np.array(grid_values, dtype=float) / 1024.0
    eps = grid_eps / 1024.0
    assert (self_intersection_count(row, 0, eps)
            == self_intersection_count_brute(row, 0, eps))


def test_batch_counts_match_scalar_both_paths():
    rng = np.random.default_rng(5)
    small = rng.normal(size=(10, 12))       # broadcast path
    wide = rng.normal(size=(4, 80))         # sorted-search path
    for rows in (small, wide):
        got = intersection_counts_batch(rows, 0.4)
        expect = [self_intersection_count(r, 0, 0.4) for r in rows]
        assert got.tolist() == expect


def test_occupancy_histogram_totals():
    traj = _traj(7, T=3, J=8)
    hist = occupancy_histogram(traj, 2, 0.5, 0.25)
    assert hist.total() == 8
    assert hist.sum_of_squares() >= 8
    assert all(c > 0 for c in hist.counts.values())


def test_histogram_shift_keeps_total():
    traj = _traj(8, T=2, J=5)
    for alpha in (0.0, 0.3, 0.9):
        assert occupancy_histogram(traj, 1, 0.7, alpha).total() == 5


def test_local_inequality_random_sweep():
    rng = np.random.default_rng(11)
    for _ in range(200):
        row = rng.normal(scale=2.0, size=10)
        rep = local_inequality_check(row, 0, 0.5, rng.uniform())
        assert rep.holds
        assert rep.lhs >= 10


def test_local_inequality_window_chain():
    row = np.array([0.1, 0.2, 0.3, 5.0, 5.1, -4.0])
    rep = local_inequality_check(row, 0, 0.5, 0.0, window=(-2, 3))
    assert rep.holds and rep.chain_holds
    assert rep.window_bin_count >= 1
    assert rep.window_quadratic_mean_bound <= rep.rhs + 1e-9


def test_inequality_tight_case():
    # all sites in one bin: N = J^2 equals the square-sum exactly
    row = np.full(6, 0.2)
    rep = local_inequality_check(row, 0, 1.0, 0.0)
    assert rep.lhs == 36 and rep.rhs == 36


def test_observable_record_fields():
    traj = _traj(2, T=3, J=4)
    rec = observable_record(traj, beta=0.1, epsilon=0.5)
    assert set(rec) == {"seed", "J", "T", "beta", "epsilon", "R", "N_total"}
    assert rec["J"] == 4 and rec["T"] == 3
    assert rec["R"] == pytest.approx(radius_of_gyration(traj))
    total = sum(self_intersection_count(traj, t, 0.5)
                for t in range(1, 4))
    assert rec["N_total"] == total


def test_epsilon_validation():
    with pytest.raises(ValueError):
        self_intersection_count(np.zeros(3), 0, 0.0)
    with pytest.raises(ValueError):
        intersection_counts_batch(np.zeros((2, 3)), -1.0)
