"""Simulation laboratory for a weakly self-avoiding moving polymer.

A string of J coupled heights evolves by a discrete heat flow driven by
unit Gaussian noise, reflecting at both ends.  The library provides the
exact cosine-mode solution of that flow, the self-repelling measure
obtained by penalizing near-collisions, increment and gyration
statistics with their closed forms, the large-deviation toolkit for
time-averaged squared modes, and batch experiment drivers with
deterministic reports.
"""

from .ar1 import (AR1Params, CumulantDomainError, DegenerateProcessError,
                  ModeProcess, ar1_params_for_mode, cumulant_fixed_point,
                  cumulant_threshold, gyration_spectral_identity,
                  legendre_rate, mode_decompose, rate_function,
                  rate_function_as_printed, reconstruct_centered, tail_probe)
from .dynamics import (NoiseField, PinnedString, Trajectory, counter_rng,
                       mode_innovation_std, neumann_laplacian, pinned_string,
                       read_trajectory_binary, required_past_depth,
                       sample_noise, sample_stationary_field,
                       sample_stationary_pinned, simulate_recursion,
                       solution_formula, stationary_mode_std,
                       trajectory_to_csv, truncation_error_bound,
                       write_trajectory_binary)
from .experiments import (ConfigError, ScalingReport, StudyConfig,
                          ValidationReport, emit_report, load_config,
                          parse_config_text, parse_report_csv,
                          read_report_jsonl, rows_to_csv, run_scaling_study,
                          run_tail_probes, run_validation_suite,
                          scaling_exact_r2, validation_manifest)
from .gibbs import (SamplerDegeneracyError, WeightedEnsemble,
                    boltzmann_log_weight, estimate_measure,
                    jensen_lower_bound, log_mgf, metropolis_sampler,
                    pair_proximity_bound, sample_ensemble, tilted_ensemble)
from .increments import (IncrementStat, ScanResult, ScanRow,
                         increment_mean_and_variance,
                         min_variance_by_distance,
                         monte_carlo_increment_check, scan_distances,
                         variance_scaling_scan)
from .observables import (InequalityReport, OccupancyHistogram,
                          center_of_mass, gyration_from_rows,
                          intersection_counts_batch, local_inequality_check,
                          mean_height_series, observable_record,
                          occupancy_histogram, radius_of_gyration,
                          self_intersection_count,
                          self_intersection_count_brute)
from .spectral import (MAX_J, Basis, Convention, build_basis,
                       cosecant_square_sum, green_function,
                       normalizing_constant_c0, transition_matrix,
                       transition_matrix_power)

__version__ = "0.1.0"
