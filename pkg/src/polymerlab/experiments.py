"""Experiment drivers and report plumbing.

Everything here is batch-oriented and deterministic: a study config
(flat key=value file plus overrides) fully determines the output bytes.
Random streams are derived per cell from the base seed with fixed tags,
so thread scheduling cannot reorder randomness, and report assembly is
single-threaded in declared order.

Report floats are quantized to 12 significant digits when rows are
built; emission then reproduces the stored values exactly and a
re-parsed table matches to the last bit.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ar1 import AR1Params, legendre_rate, rate_function
from .dynamics import (counter_rng, mode_innovation_std, sample_noise,
                       simulate_recursion, solution_formula,
                       stationary_mode_std)
from .gibbs import (SamplerDegeneracyError, _ess, jensen_lower_bound,
                    metropolis_sampler, sample_ensemble)
from .increments import monte_carlo_increment_check
from .observables import intersection_counts_batch, local_inequality_check
from .spectral import (Basis, Convention, build_basis, cosecant_square_sum,
                       green_function, normalizing_constant_c0,
                       transition_matrix_power)

SCHEMA_VERSION = "1.0"


class ConfigError(ValueError):
    """Bad key, bad value, or unreadable study configuration."""


def _parse_int_list(s):
    try:
        if isinstance(s, (tuple, list)):
            return tuple(int(p) for p in s)
        return tuple(int(p) for p in str(s).split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"bad integer list {s!r}") from exc


def _parse_convention(s):
    if isinstance(s, Convention):
        return s
    try:
        return Convention(str(s).lower())
    except ValueError as exc:
        raise ConfigError(f"unknown convention {s!r}") from exc


_SAMPLERS = ("importance", "metropolis", "auto")


@dataclass(frozen=True)
class StudyConfig:
    """Validated experiment parameters.

    `replicates` is the per-cell sample count; `T_list` carries the
    horizons for tail probes (scaling uses the single `T`).
    `output_dir=None` means drivers return reports without writing.
    """

    J_list: tuple = (8, 16, 32, 64)
    T: int = 512
    T_list: tuple = None
    kappa: float = 0.5
    beta: float = 0.0
    epsilon: float = 0.5
    drift: float = 0.0
    convention: Convention = Convention.LITERAL
    sampler: str = "importance"
    seed: int = 0
    replicates: int = 1000
    ess_floor: float = 50.0
    output_dir: str = None

    def __post_init__(self):
        object.__setattr__(self, "J_list", tuple(self.J_list))
        if self.T_list is not None:
            object.__setattr__(self, "T_list", tuple(self.T_list))
        object.__setattr__(self, "convention",
                           _parse_convention(self.convention))
        if not self.J_list or any(int(J) < 2 for J in self.J_list):
            raise ConfigError("J_list needs entries >= 2")
        if self.T < 1:
            raise ConfigError("T must be positive")
        if self.T_list is not None and any(t < 1 for t in self.T_list):
            raise ConfigError("T_list entries must be positive")
        if not 0.0 < self.kappa <= 0.5:
            raise ConfigError("kappa must lie in (0, 1/2]")
        if self.beta < 0.0:
            raise ConfigError("beta must be nonnegative")
        if self.epsilon <= 0.0:
            raise ConfigError("epsilon must be positive")
        if self.sampler not in _SAMPLERS:
            raise ConfigError(f"sampler must be one of {_SAMPLERS}")
        if self.replicates < 1:
            raise ConfigError("replicates must be positive")
        if self.ess_floor <= 0.0:
            raise ConfigError("ess_floor must be positive")


_FIELD_PARSERS = {
    "J_list": _parse_int_list,
    "T": int,
    "T_list": _parse_int_list,
    "kappa": float,
    "beta": float,
    "epsilon": float,
    "drift": float,
    "convention": _parse_convention,
    "sampler": str,
    "seed": int,
    "replicates": int,
    "ess_floor": float,
    "output_dir": str,
}


def parse_config_text(text: str) -> dict:
    """Flat key=value lines; '#' starts a comment; unknown keys are hard
    errors because a silently dropped beta or epsilon corrupts a study."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got "
                              f"{raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = _FIELD_PARSERS[key](val)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(
                f"line {lineno}: bad value for {key}: {val!r}") from exc
    return out


def load_config(path: str = None, overrides: dict = None) -> StudyConfig:
    """Config file, then overrides, then validation."""
    values = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"unknown override {key!r}")
        values[key] = _FIELD_PARSERS[key](val)
    try:
        return StudyConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def quantize12(x) -> float:
    """Round to 12 significant digits, the storage precision of every
    report float; emitting and re-parsing such a value is lossless."""
    if x is None or isinstance(x, str):
        return x
    v = float(x)
    if not np.isfinite(v):
        return v
    return float(f"{v:.12g}")


# ---------------------------------------------------------------------------
# scaling study


def scaling_exact_r2(basis: Basis, T: int,
                     conv: Convention = Convention.LITERAL,
                     init: str = "stationary") -> float:
    """Closed-form E[R^2] of the free string.

    Parseval reduces R^2 to (1/(T J)) sum_m sum_t Var X_t^(m).  Started
    stationary the variance is t-independent; started from zero it is
    sigma_m^2 (1 - rho^(2t)) / (1 - rho^2), summed geometrically.
    """
    rho = basis.rho[1:]
    if init == "stationary":
        var_sum = T * stationary_mode_std(basis, conv)[1:] ** 2
    elif init == "zero":
        sig2 = mode_innovation_std(basis, conv)[1:] ** 2
        r2 = rho ** 2
        t_sum = np.where(r2 < 1.0,
                         (T - r2 * (1.0 - r2 ** T) / (1.0 - r2))
                         / (1.0 - r2),
                         0.5 * T * (T + 1.0))
        var_sum = sig2 * t_sum
    else:
        raise ValueError(f"unknown init {init!r}")
    return float(var_sum.sum() / (T * basis.J))


def _stationary_mode_r(basis: Basis, T: int, reps: int, rng,
                       conv: Convention) -> np.ndarray:
    """Per-replicate gyration radius of stationary free trajectories,
    simulated in mode coordinates (time-stepped to bound memory)."""
    sd = stationary_mode_std(basis, conv)[1:]
    sig = mode_innovation_std(basis, conv)[1:]
    rho = basis.rho[1:]
    X = sd * rng.standard_normal((reps, len(rho)))
    acc = np.zeros(reps)
    for _ in range(T):
        X = rho * X + sig * rng.standard_normal((reps, len(rho)))
        acc += np.einsum("ij,ij->i", X, X)
    return np.sqrt(acc / (T * basis.J))


def _weighted_rms_quantiles(R: np.ndarray, log_w: np.ndarray,
                            qs=(0.05, 0.95)):
    wn = np.exp(log_w - log_w.max())
    wn = wn / wn.sum()
    rms = float(np.sqrt(np.dot(wn, R ** 2)))
    order = np.argsort(R)
    cum = np.cumsum(wn[order])
    quants = [float(R[order][np.searchsorted(cum, q)]) for q in qs]
    return rms, quants


def _scaling_cell(config: StudyConfig, J: int) -> dict:
    """One J row.  beta=0 samples the stationary free law directly;
    beta>0 goes through the configured sampler, AUTO falling back to
    Metropolis when importance weights degenerate."""
    basis = build_basis(J, config.kappa)
    T, conv, reps = config.T, config.convention, config.replicates
    exact = np.sqrt(scaling_exact_r2(basis, T, conv))
    row = {"J": J, "beta": config.beta, "flagged": False,
           "R_exact": quantize12(exact)}

    def importance_cell():
        ens = sample_ensemble(J, T, config.beta, config.epsilon, reps,
                              config.seed * 1000003 + J, config.kappa)
        ess = _ess(ens.log_weights)
        if ess < min(config.ess_floor, reps):
            raise SamplerDegeneracyError(
                f"ESS {ess:.1f} below floor at J={J}")
        rms, (q05, q95) = _weighted_rms_quantiles(ens.obs["R"],
                                                  ens.log_weights)
        return rms, q05, q95, ess, "importance"

    def metropolis_cell():
        ens = metropolis_sampler(basis, T, config.beta, config.epsilon,
                                 reps, config.seed * 1000003 + J,
                                 init="stationary", conv=conv)
        R = ens.obs["R"]
        rms = float(np.sqrt(np.mean(R ** 2)))
        q05, q95 = np.quantile(R, [0.05, 0.95])
        return (rms, float(q05), float(q95),
                ens.diagnostics["acceptance_rate"], "metropolis")

    try:
        if config.beta == 0.0:
            rng = counter_rng(config.seed, 10, J)
            R = _stationary_mode_r(basis, T, reps, rng, conv)
            rms = float(np.sqrt(np.mean(R ** 2)))
            q05, q95 = np.quantile(R, [0.05, 0.95])
            stats = (rms, float(q05), float(q95), float(reps), "direct")
        elif config.sampler == "importance":
            stats = importance_cell()
        elif config.sampler == "metropolis":
            stats = metropolis_cell()
        else:
            try:
                stats = importance_cell()
            except SamplerDegeneracyError:
                stats = metropolis_cell()
    except SamplerDegeneracyError as exc:
        row.update({"R_mean": float("nan"), "R_q05": float("nan"),
                    "R_q95": float("nan"), "ESS_or_acceptance": 0.0,
                    "sampler": config.sampler, "flagged": True,
                    "detail": str(exc)})
        return row

    rms, q05, q95, diag, label = stats
    row.update({"R_mean": quantize12(rms), "R_q05": quantize12(q05),
                "R_q95": quantize12(q95),
                "ESS_or_acceptance": quantize12(diag), "sampler": label})
    return row


@dataclass(frozen=True)
class ScalingReport:
    rows: tuple
    fitted_exponent: float
    exponent_se: float
    n_used: int
    convention: Convention
    T: int
    beta: float

    FIELDS = ("J", "beta", "R_mean", "R_q05", "R_q95",
              "ESS_or_acceptance", "sampler", "flagged", "R_exact")


def _slope_with_se(x: np.ndarray, y: np.ndarray):
    n = len(x)
    xc = x - x.mean()
    slope = float(np.dot(xc, y) / np.dot(xc, xc))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    if n > 2:
        se = float(np.sqrt(np.dot(resid, resid) / (n - 2)
                           / np.dot(xc, xc)))
    else:
        se = float("nan")
    return slope, se


def run_scaling_study(config: StudyConfig) -> ScalingReport:
    """Gyration radius versus string width.

    Cells run concurrently with per-cell seed streams; rows are
    assembled in J_list order.  R_mean is the quadratic mean of R over
    replicates, matched against the closed-form column R_exact.  The
    log-log slope is fitted over unflagged rows; fewer than 3 of them
    raises the degeneracy error.  With output_dir set, writes
    scaling.csv and scaling_summary.jsonl.
    """
    with ThreadPoolExecutor(max_workers=min(4, len(config.J_list))) as pool:
        rows = list(pool.map(lambda J: _scaling_cell(config, J),
                             config.J_list))
    used = [r for r in rows if not r["flagged"]]
    if len(used) < 3:
        raise SamplerDegeneracyError(
            f"only {len(used)} usable rows; the exponent fit needs 3")
    x = np.log([r["J"] for r in used])
    y = np.log([r["R_mean"] for r in used])
    slope, se = _slope_with_se(x, y)
    report = ScalingReport(rows=tuple(rows),
                           fitted_exponent=quantize12(slope),
                           exponent_se=quantize12(se),
                           n_used=len(used), convention=config.convention,
                           T=config.T, beta=config.beta)
    if config.output_dir is not None:
        emit_report(report, "csv", config.output_dir)
        emit_report(report, "jsonl", config.output_dir)
    return report


# ---------------------------------------------------------------------------
# tail probes


def _tail_cell(config: StudyConfig, T: int, K1: float, K2: float) -> dict:
    J = config.J_list[0]
    basis = build_basis(J, config.kappa)
    reps = config.replicates
    if config.beta == 0.0:
        rng = counter_rng(config.seed, 20, T)
        R = _stationary_mode_r(basis, T, reps, rng, config.convention)
        diag, label = float(reps), "direct"
    else:
        ens = metropolis_sampler(basis, T, config.beta, config.epsilon,
                                 reps, config.seed * 1000003 + T,
                                 init="stationary",
                                 conv=config.convention)
        R = ens.obs["R"]
        diag, label = ens.diagnostics["acceptance_rate"], "metropolis"
    n = len(R)
    lo_count = int(np.count_nonzero(R < K1 * J))
    hi_count = int(np.count_nonzero(R > K2 * J))

    def se(count):
        # add-one smoothing keeps the error bar positive at zero counts
        p = (count + 1.0) / (n + 2.0)
        return float(np.sqrt(p * (1.0 - p) / n))

    return {"T": T,
            "lower_prob": quantize12(lo_count / n),
            "lower_se": quantize12(se(lo_count)),
            "lower_count": lo_count,
            "upper_prob": quantize12(hi_count / n),
            "upper_se": quantize12(se(hi_count)),
            "upper_count": hi_count,
            "lower_underpowered": lo_count < 20,
            "upper_underpowered": hi_count < 20,
            "sampler": label,
            "ESS_or_acceptance": quantize12(diag)}


_TAIL_FIELDS = ("T", "lower_prob", "lower_se", "lower_count", "upper_prob",
                "upper_se", "upper_count", "lower_underpowered",
                "upper_underpowered", "sampler", "ESS_or_acceptance")


def run_tail_probes(config: StudyConfig, K1: float, K2: float) -> dict:
    """P(R < K1*J) and P(R > K2*J) across the horizons in T_list, with a
    nonincreasing-in-T verdict per tail at three combined standard
    errors.  Horizons run concurrently; the table is assembled in
    T_list order.  Sampling is stationary-start (direct at beta=0,
    Metropolis otherwise) so horizon comparisons are not confounded by
    the burn-in transient."""
    if not 0.0 <= K1 < K2:
        raise ConfigError("need 0 <= K1 < K2")
    if config.T_list is None or len(config.T_list) < 2:
        raise ConfigError("tail probes need T_list with at least two "
                          "horizons")
    ts = sorted(config.T_list)
    with ThreadPoolExecutor(max_workers=min(4, len(ts))) as pool:
        rows = list(pool.map(lambda T: _tail_cell(config, T, K1, K2), ts))

    def nonincreasing(side):
        for prev, cur in zip(rows, rows[1:]):
            slack = 3.0 * float(np.hypot(prev[f"{side}_se"],
                                         cur[f"{side}_se"]))
            if cur[f"{side}_prob"] > prev[f"{side}_prob"] + slack:
                return False
        return True

    result = {"rows": rows, "K1": K1, "K2": K2,
              "lower_nonincreasing": nonincreasing("lower"),
              "upper_nonincreasing": nonincreasing("upper")}
    if config.output_dir is not None:
        emit_report(result, "csv", config.output_dir)
        emit_report(result, "jsonl", config.output_dir)
    return result


# ---------------------------------------------------------------------------
# validation suite

_CHECKS = []


def validation_check(name):
    def deco(fn):
        _CHECKS.append((name, fn))
        return fn
    return deco


def validation_manifest() -> tuple:
    """Check names in execution order, generated from the registry."""
    return tuple(name for name, _ in _CHECKS)


def _ok(detail=""):
    return True, detail


def _bad(detail):
    return False, detail


@validation_check("trig_identity")
def _check_trig(config):
    worst = max(abs(cosecant_square_sum(J) - (J * J - 1) / 3.0)
                for J in range(2, 129))
    return (worst < 1e-9, f"max |sum csc^2 - (J^2-1)/3| = {worst:.3g}")


@validation_check("normalizing_constant")
def _check_c0(config):
    worst = 0.0
    for J in (2, 3, 8, 17, 64):
        basis = build_basis(J)
        s = float(np.sum(1.0 / (1.0 - basis.rho[1:] ** 2)))
        worst = max(worst, abs(normalizing_constant_c0(J) * s - 1.0))
    return (worst < 1e-9, f"max |c0 * sum 1/(1-rho^2) - 1| = {worst:.3g}")


@validation_check("kernel_oracle")
def _check_kernel(config):
    worst = 0.0
    for J in (2, 5, 16):
        basis = build_basis(J)
        for t in (0, 1, 7, 16):
            G = green_function(basis, t)
            P = transition_matrix_power(J, t)
            worst = max(worst, float(np.abs(G - P).max()))
    return (worst < 1e-10, f"max |G_t - P^t| = {worst:.3g}")


@validation_check("kernel_negative_control")
def _check_kernel_negative(config):
    # corrupted exponent must be caught by the oracle comparison
    basis = build_basis(8)
    G_bad = green_function(basis, 8)
    P = transition_matrix_power(8, 7)
    diff = float(np.abs(G_bad - P).max())
    return (diff > 1e-6,
            f"corrupted-exponent kernel differs from P^t by {diff:.3g}")


@validation_check("solution_vs_recursion")
def _check_solution(config):
    basis = build_basis(8)
    worst = 0.0
    for s in range(3):
        noise = sample_noise(1234 + s, 16, 8)
        u0 = np.zeros(8)
        a = simulate_recursion(u0, noise)
        b = solution_formula(u0, noise, basis)
        worst = max(worst, float(np.abs(a.u - b.u).max()))
    return (worst < 1e-9, f"max |recursion - formula| = {worst:.3g}")


@validation_check("mean_mode_split")
def _check_mean_split(config):
    # the site average moves as a pure noise average: P preserves row sums
    noise = sample_noise(99, 32, 8)
    u0 = np.linspace(-1.0, 1.0, 8)
    traj = simulate_recursion(u0, noise)
    ubar = traj.u.mean(axis=1)
    walk = u0.mean() + np.concatenate(
        [[0.0], np.cumsum(noise.xi.mean(axis=1))])
    worst = float(np.abs(ubar - walk).max())
    return (worst < 1e-12, f"max |ubar - noise walk| = {worst:.3g}")


@validation_check("mean_variance_growth")
def _check_mean_variance(config):
    t, J, n = 4, 8, 100_000
    rng = counter_rng(config.seed, 31)
    steps = rng.standard_normal((n, t, J)).mean(axis=2).sum(axis=1)
    var = float(steps.var(ddof=1))
    rel = abs(var - t / J) / (t / J)
    return (rel < 0.05, f"Var[ubar(t)-ubar(0)] rel err {rel:.3%} at t={t}")


@validation_check("increment_oracle")
def _check_increments(config):
    basis = build_basis(8)
    msgs = []
    ok = True
    for conv in (Convention.LITERAL, Convention.PAPER):
        r = monte_carlo_increment_check(basis, 0, 3, conv, 20_000,
                                        config.seed + 7)
        ok &= (abs(r["mc_mean"]) < 5 * r["mean_se"]
               and r["variance_rel_err"] < 0.05)
        msgs.append(f"{conv.value}: var rel err {r['variance_rel_err']:.3%}")
    return ok, "; ".join(msgs)


@validation_check("jensen_bound")
def _check_jensen(config):
    basis = build_basis(4)
    r = jensen_lower_bound(basis, 8, 0.1, 0.5, 0.5, 20_000,
                           config.seed + 11)
    return (r["holds"],
            f"logZ/T {r['logZ_over_T']:.4f} vs bound {r['bound']:.4f}")


@validation_check("local_inequality")
def _check_local_inequality(config):
    rng = counter_rng(config.seed, 41)
    J = 8
    rows = 3.0 * rng.standard_normal((2000, J))
    bad = 0
    for row in rows:
        rep = local_inequality_check(row, 0, 0.5, 0.0)
        n = intersection_counts_batch(row, 0.5)
        bad += not (rep.holds and J <= n <= J * J)
    return (bad == 0, f"{bad} violations in 2000 random rows")


@validation_check("scaling_oracle_mc")
def _check_scaling_mc(config):
    basis = build_basis(16)
    rng = counter_rng(config.seed, 51)
    R = _stationary_mode_r(basis, 64, 400, rng, Convention.LITERAL)
    rms = float(np.sqrt(np.mean(R ** 2)))
    exact = np.sqrt(scaling_exact_r2(basis, 64))
    rel = abs(rms - exact) / exact
    return (rel < 0.05, f"rms rel err {rel:.3%} vs closed form")


@validation_check("legendre_vs_rate")
def _check_legendre(config):
    p = AR1Params(rho=0.5, sigma2=1.0)
    xs = np.array([0.5, 1.0, 2.0, 5.0])
    worst = float(np.abs(legendre_rate(p, xs) - rate_function(p, xs)).max())
    return (worst < 1e-4, f"max |Legendre - rate| = {worst:.3g}")


@validation_check("mode_reconstruction")
def _check_reconstruction(config):
    from .ar1 import mode_decompose, reconstruct_centered
    basis = build_basis(8)
    noise = sample_noise(5, 16, 8)
    traj = simulate_recursion(np.zeros(8), noise)
    modes = mode_decompose(traj, basis)
    centered = traj.u[1:] - traj.u[1:].mean(axis=1, keepdims=True)
    worst = float(np.abs(reconstruct_centered(modes, basis)
                         - centered).max())
    return (worst < 1e-9, f"max reconstruction error {worst:.3g}")


@validation_check("report_roundtrip")
def _check_roundtrip(config):
    rows = ({"J": 8, "beta": 0.0, "R_mean": quantize12(1.6180339887),
             "R_q05": quantize12(0.5), "R_q95": quantize12(2.5),
             "ESS_or_acceptance": 100.0, "sampler": "direct",
             "flagged": False, "R_exact": quantize12(1.62)},)
    text1 = rows_to_csv(ScalingReport.FIELDS, rows)
    text2 = rows_to_csv(ScalingReport.FIELDS, rows)
    if text1 != text2:
        return _bad("emission is not deterministic")
    back = parse_report_csv(text1)
    for key in ("R_mean", "R_q05", "R_q95", "R_exact"):
        if abs(back[0][key] - rows[0][key]) > 1e-12:
            return _bad(f"round-trip drift in {key}")
    return _ok("byte-stable and parse-back exact")


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    passed: bool
    manifest: tuple = field(default_factory=validation_manifest)


def run_validation_suite(config: StudyConfig = None) -> ValidationReport:
    """Run every registered invariant check with seeds derived from the
    config; the manifest is the registry itself, never a hand-kept list.
    """
    config = config or StudyConfig()
    results = []
    for name, fn in _CHECKS:
        try:
            passed, detail = fn(config)
        except Exception as exc:        # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append({"name": name, "passed": bool(passed),
                        "detail": detail})
    report = ValidationReport(checks=tuple(results),
                              passed=all(r["passed"] for r in results))
    if config.output_dir is not None:
        emit_report(report, "jsonl", config.output_dir)
    return report


# ---------------------------------------------------------------------------
# report emission


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def rows_to_csv(fieldnames, rows) -> str:
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(_format_cell(row.get(k)) for k in fieldnames))
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> list:
    """Inverse of rows_to_csv with typed cells: int, float, bool, or str."""
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    out = []
    for ln in lines[1:]:
        row = {}
        for key, cell in zip(header, ln.split(",")):
            if cell == "":
                row[key] = None
            elif cell in ("true", "false"):
                row[key] = cell == "true"
            else:
                try:
                    row[key] = int(cell)
                except ValueError:
                    try:
                        row[key] = float(cell)
                    except ValueError:
                        row[key] = cell
        out.append(row)
    return out


def _json_line(obj) -> str:
    def clean(v):
        if isinstance(v, Convention):
            return v.value
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, float):
            return quantize12(v)
        if isinstance(v, (np.floating,)):
            return quantize12(float(v))
        return v
    return json.dumps({k: clean(v) for k, v in obj.items()},
                      separators=(",", ":"))


def _normalize_report(report):
    """Report object -> (stem, fieldnames, rows, meta)."""
    if isinstance(report, ScalingReport):
        meta = {"schema_version": SCHEMA_VERSION, "kind": "scaling",
                "convention": report.convention, "T": report.T,
                "beta": report.beta,
                "fitted_exponent": report.fitted_exponent,
                "exponent_se": report.exponent_se, "n_used": report.n_used}
        return "scaling", ScalingReport.FIELDS, report.rows, meta
    if isinstance(report, ValidationReport):
        meta = {"schema_version": SCHEMA_VERSION, "kind": "validation",
                "passed": report.passed, "n_checks": len(report.checks),
                "manifest": list(report.manifest)}
        return ("validation", ("name", "passed", "detail"), report.checks,
                meta)
    if isinstance(report, dict) and "rows" in report and "K1" in report:
        meta = {"schema_version": SCHEMA_VERSION, "kind": "tails",
                "K1": report["K1"], "K2": report["K2"],
                "lower_nonincreasing": report["lower_nonincreasing"],
                "upper_nonincreasing": report["upper_nonincreasing"]}
        return "tails", _TAIL_FIELDS, report["rows"], meta
    if isinstance(report, dict) and "fieldnames" in report:
        meta = dict(report.get("meta", {}))
        meta.setdefault("schema_version", SCHEMA_VERSION)
        return (report.get("stem", "report"), tuple(report["fieldnames"]),
                report["rows"], meta)
    raise TypeError(f"cannot emit report of type {type(report).__name__}")


def emit_report(report, format: str, out_dir: str) -> str:
    """Write one report file; identical inputs give identical bytes.

    CSV carries the rows under the fixed header; JSONL starts with a
    schema_version header object followed by one row object per line.
    Returns the written path.
    """
    if format not in ("csv", "jsonl"):
        raise ValueError(f"format must be csv or jsonl, got {format!r}")
    stem, fieldnames, rows, meta = _normalize_report(report)
    os.makedirs(out_dir, exist_ok=True)
    if format == "csv":
        path = os.path.join(out_dir, f"{stem}.csv")
        payload = rows_to_csv(fieldnames, rows)
    else:
        suffix = "_summary" if stem == "scaling" else ""
        path = os.path.join(out_dir, f"{stem}{suffix}.jsonl")
        lines = [_json_line(meta)]
        lines += [_json_line({k: r.get(k) for k in fieldnames})
                  for r in rows]
        payload = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload)
    return path


def read_report_jsonl(path: str) -> tuple:
    """(meta, rows) from an emitted JSONL file."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [json.loads(ln) for ln in fh if ln.strip()]
    return lines[0], lines[1:]
