"""Monte Carlo study drivers behind the CLI subcommands.

Every driver takes a validated run config (section -> key -> value) and is
deterministic given study.base_seed. Paths are independent work items run
through parallel_map; aggregation happens afterwards in path order.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np

from penalty_ns.experiments.errors import (
    CouplingError,
    ErrorRecord,
    ErrorReport,
    compute_error_record,
    merge_reports,
)
from penalty_ns.experiments.probability import (
    Exceedance,
    SampleQuantities,
    SampleSetStats,
    estimate_exceedance,
    exceeds,
    median_threshold,
    membership_from_quantities,
    quantile_thresholds,
    sample_set_quantities,
    schedule_thresholds,
)
from penalty_ns.experiments.rates import RateFit, RateFitError, fit_rate
from penalty_ns.noise.increments import (
    WienerIncrements,
    coarsen,
    increment_field,
    sample_increments,
    to_level,
)
from penalty_ns.noise.model import NoiseModel, build_noise_model, gram_matrix
from penalty_ns.noise.model import basis_field
from penalty_ns.schemes.base_scheme import SchemeError
from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.schemes.trajectory import TrajectoryRecord, run_trajectory
from penalty_ns.spectral.fields import SpectralVector
from penalty_ns.spectral.grid import Grid
from penalty_ns.spectral.operators import (
    divergence,
    norm,
    random_vector,
    taylor_green,
)
from penalty_ns.utils.config import config_hash
from penalty_ns.utils.metric import MonteCarloMeter
from penalty_ns.utils.parallel import parallel_map
from penalty_ns.utils.types import ConfigDict

logger = logging.getLogger(__name__)

# Allowed relative spread of stability means across levels
STABILITY_SPREAD = 0.2
# Decomposition residual threshold in units of picard_tol
DECOMPOSITION_FACTOR = 10.0


# =========================================================================== #
#                                   Setup                                     #
# =========================================================================== #


def setup_grid(config: Mapping[str, Mapping[str, Any]]) -> Grid:
    """Grid from the [grid] section."""
    section = config["grid"]
    return Grid(
        L=section["L"],
        N=section["N"],
        dealias_pad=section["dealias_pad"],
        fft_workers=section["fft_workers"],
    )


def setup_noise(
    config: Mapping[str, Mapping[str, Any]], grid: Grid
) -> NoiseModel:
    """Noise model from the [noise] section."""
    section = config["noise"]
    return build_noise_model(grid, J=section["J"], gamma=section["gamma"])


def initial_velocity(
    grid: Grid,
    init: str,
    amplitude: float,
    base_seed: int,
    path_index: int,
) -> SpectralVector:
    """Initial velocity of one path.

    Args:
        grid: Grid.
        init: "zero", "random" or "taylor-green".
        amplitude: L2 norm of the random field or Taylor-Green amplitude.
        base_seed: Study seed; random data is drawn from (base_seed, path).
        path_index: Path number.
    """
    if init == "zero":
        return SpectralVector.zeros(grid)
    if init == "taylor-green":
        return taylor_green(grid, amplitude)
    if init == "random":
        rng = np.random.default_rng([base_seed, path_index])
        return random_vector(grid, rng, amplitude=amplitude)
    raise ValueError(f"Unknown initial condition {init}!")


def check_telescoping(fine: WienerIncrements, levels: Sequence[int]) -> None:
    """Verify that every level sums the fine increments exactly.

    Raises:
        CouplingError: Some level total or nested coarsening is not
            bit-identical to the direct one.
    """
    total = fine.total()
    for M in levels:
        coarse = to_level(fine, M)
        if not np.array_equal(coarse.total(), total):
            raise CouplingError(
                f"Level {M} increments do not sum to the fine total!"
            )
        for M_other in levels:
            if M_other > M and M_other % M == 0:
                nested = to_level(to_level(fine, M_other), M)
                if not np.array_equal(
                    nested.increments, coarse.increments
                ):
                    raise CouplingError(
                        f"Coarsening via level {M_other} to level {M} is "
                        "not exact!"
                    )


def reference_cadence(M_ref: int, levels: Sequence[int]) -> int:
    """Largest snapshot cadence of the reference hitting all coarse times."""
    return functools.reduce(math.gcd, [M_ref // M for M in levels])


# =========================================================================== #
#                            Convergence study                                #
# =========================================================================== #


@dataclass
class PathResult:
    """Outcome of one Monte Carlo path."""

    path: int
    errors: List[ErrorRecord] = field(default_factory=list)
    z_errors: Dict[int, ErrorRecord] = field(default_factory=dict)
    quantities: Dict[int, SampleQuantities] = field(default_factory=dict)


@dataclass
class StudyResult:
    """Aggregated output of a convergence study.

    Attributes:
        reports: One ErrorReport per level, levels ascending.
        rates: Rate fits of the mean error functionals versus k.
        exceedance: Exceedance fraction per level.
        sample_sets: Sample-set statistics per level (empty when disabled).
        z_reports: z-scheme error reports per level (empty when disabled).
    """

    reports: List[ErrorReport]
    rates: List[RateFit]
    exceedance: List[Exceedance]
    sample_sets: List[SampleSetStats] = field(default_factory=list)
    z_reports: List[ErrorReport] = field(default_factory=list)

    def error_rows(self) -> List[Dict[str, object]]:
        """errors.csv rows ordered by level, then path."""
        return [row for report in self.reports for row in report.rows()]


def _run_stokes_pair(
    params: SchemeParams,
    opts: SolverOpts,
    model: NoiseModel,
    fine: WienerIncrements,
    levels: Sequence[int],
    M_ref: int,
    path: int,
) -> tuple[TrajectoryRecord, Dict[int, ErrorRecord]]:
    """Stokes reference and z-scheme errors at every level (z0 = 0)."""
    zero = SpectralVector.zeros(model.grid)
    ref = run_trajectory(
        "stokes-direct",
        params.at_level(M_ref),
        zero,
        fine,
        opts=opts,
        model=model,
        record_every=reference_cadence(M_ref, levels),
    )
    z_errors = {}
    for M in levels:
        level_params = params.at_level(M)
        try:
            traj = run_trajectory(
                "stokes-penalty", level_params, zero, fine, opts=opts,
                model=model,
            )
            z_errors[M] = compute_error_record(traj, ref, path=path)
        except SchemeError as err:
            logger.warning("z-scheme path %d level %d: %s", path, M, err)
            z_errors[M] = ErrorRecord.blown_up(
                path, M, level_params.k, level_params.eps
            )
    return ref, z_errors


def run_path(config: ConfigDict, path: int) -> PathResult:
    """Reference and every level of one path of the convergence study."""
    grid = setup_grid(config)
    model = setup_noise(config, grid)
    params = SchemeParams.from_config(config)
    opts = SolverOpts.from_config(config)
    study = config["study"]
    levels = sorted(study["levels"])
    M_ref = study["M_ref"]
    seed = study["base_seed"]

    fine = sample_increments(model, M_ref, seed, path, T=params.T)
    check_telescoping(fine, levels)
    u0 = initial_velocity(
        grid, study["init"], study["init_amplitude"], seed, path
    )
    result = PathResult(path=path)

    try:
        ref = run_trajectory(
            "direct",
            params.at_level(M_ref),
            u0,
            fine,
            opts=opts,
            model=model,
            record_every=reference_cadence(M_ref, levels),
        )
    except SchemeError as err:
        logger.warning("Reference of path %d failed: %s", path, err)
        for M in levels:
            level_params = params.at_level(M)
            result.errors.append(
                ErrorRecord.blown_up(path, M, level_params.k, level_params.eps)
            )
        return result

    for M in levels:
        level_params = params.at_level(M)
        try:
            traj = run_trajectory(
                "main", level_params, u0, fine, opts=opts, model=model
            )
            result.errors.append(compute_error_record(traj, ref, path=path))
        except SchemeError as err:
            logger.warning("Path %d level %d blew up: %s", path, M, err)
            result.errors.append(
                ErrorRecord.blown_up(path, M, level_params.k, level_params.eps)
            )

    if study["sample_sets"]:
        _, result.z_errors = _run_stokes_pair(
            params, opts, model, fine, levels, M_ref, path
        )
        for M in levels:
            result.quantities[M] = sample_set_quantities(
                ref, result.z_errors[M], M, params.eta, path=path
            )
    return result


def _fit_means(
    reports: Sequence[ErrorReport], names: Mapping[str, str]
) -> List[RateFit]:
    rates = []
    ks = [report.k for report in reports]
    for response, attr in names.items():
        means = [report.finite_mean(attr) for report in reports]
        try:
            rates.append(fit_rate(ks, means, response=response))
        except RateFitError as err:
            logger.warning("Skipping %s rate: %s", response, err)
    return rates


def _sample_set_stats(
    config: ConfigDict,
    reports: Sequence[ErrorReport],
    path_results: Sequence[PathResult],
    C: float,
) -> List[SampleSetStats]:
    study = config["study"]
    eta = config["scheme"]["eta"]
    r = study["r"]
    stats = []
    for report in reports:
        quantities = [
            res.quantities[report.level]
            for res in path_results
            if report.level in res.quantities
        ]
        if not quantities:
            logger.warning("No sample-set data at level %d.", report.level)
            continue
        if study["threshold_mode"] == "schedule":
            mu = study["mu"] if study["mu"] >= 0 else None
            thresholds = schedule_thresholds(report.k, eta, r, mu)
        else:
            thresholds = quantile_thresholds(
                quantities, study["threshold_quantile"]
            )
        flags = exceeds(report.values("em"), report.blew_up, C * report.k**r)
        paths = sorted(rec.path for rec in report.records)
        by_path = dict(zip(paths, flags))
        selected = np.array([by_path[q.path] for q in quantities])
        stats.append(
            membership_from_quantities(
                quantities, thresholds, report.level, report.k, selected
            )
        )
    return stats


def run_mc_study(config: ConfigDict, progress: bool = True) -> StudyResult:
    """Strong and in-probability convergence study of the main scheme.

    For every path: sample the fine noise at M_ref, run the direct reference,
    run the main scheme at each level with the coarsened noise and record
    the error functionals. A failed level is recorded as blown up without
    aborting the other paths or levels.
    """
    study = config["study"]
    paths = range(study["paths"])
    logger.info(
        "Convergence study: %d paths, levels %s, M_ref=%d.",
        study["paths"],
        sorted(study["levels"]),
        study["M_ref"],
    )
    path_results = parallel_map(
        functools.partial(run_path, config),
        paths,
        workers=study["workers"],
        desc="paths",
        progress=progress,
    )
    reports = merge_reports(
        [
            ErrorReport(rec.level, rec.k, rec.eps, [rec])
            for res in path_results
            for rec in res.errors
        ]
    )
    rates = _fit_means(reports, {"mean_tEM": "tem", "mean_EM": "em"})

    C = study["C"]
    if C < 0:
        C = median_threshold(reports[0])
        logger.info("Exceedance constant C set to coarsest median %.6g.", C)
    exceedance = estimate_exceedance(reports, C, study["r"])
    for item in exceedance:
        logger.info(
            "Level %d: P[E >= C k^r] = %.3f +/- %.3f (%d blow-ups).",
            item.level,
            item.fraction,
            item.ci_half_width,
            item.blow_ups,
        )

    sample_sets: List[SampleSetStats] = []
    z_reports: List[ErrorReport] = []
    if study["sample_sets"]:
        sample_sets = _sample_set_stats(config, reports, path_results, C)
        z_reports = merge_reports(
            [
                ErrorReport(rec.level, rec.k, rec.eps, [rec])
                for res in path_results
                for rec in res.z_errors.values()
            ]
        )
        rates.extend(fit_z_rates(z_reports))
    return StudyResult(
        reports=reports,
        rates=rates,
        exceedance=exceedance,
        sample_sets=sample_sets,
        z_reports=z_reports,
    )


# =========================================================================== #
#                               z-scheme study                                #
# =========================================================================== #


def _run_z_path(config: ConfigDict, path: int) -> List[ErrorRecord]:
    grid = setup_grid(config)
    model = setup_noise(config, grid)
    params = SchemeParams.from_config(config)
    study = config["study"]
    fine = sample_increments(
        model, study["M_ref"], study["base_seed"], path, T=params.T
    )
    levels = sorted(study["levels"])
    check_telescoping(fine, levels)
    _, z_errors = _run_stokes_pair(
        params,
        SolverOpts.from_config(config),
        model,
        fine,
        levels,
        study["M_ref"],
        path,
    )
    return [z_errors[M] for M in levels]


def run_z_study(
    config: ConfigDict, progress: bool = True
) -> tuple[List[ErrorReport], List[RateFit]]:
    """Error of the first auxiliary scheme against a fine Stokes reference.

    Returns:
        Per-level reports and rate fits of the mean z-error functional
        (max and gradient terms) and of its pressure term.
    """
    study = config["study"]
    records = parallel_map(
        functools.partial(_run_z_path, config),
        range(study["paths"]),
        workers=study["workers"],
        desc="z-paths",
        progress=progress,
    )
    reports = merge_reports(
        [
            ErrorReport(rec.level, rec.k, rec.eps, [rec])
            for path_records in records
            for rec in path_records
        ]
    )
    return reports, fit_z_rates(reports)


def fit_z_rates(reports: Sequence[ErrorReport]) -> List[RateFit]:
    """Rates of the mean z-error (max and gradient terms) and its pressure
    term versus k."""
    rates = []
    ks = [report.k for report in reports]
    velocity = [
        report.finite_mean("max_term") + report.finite_mean("grad_term")
        for report in reports
    ]
    pressure = [report.finite_mean("pressure_term") for report in reports]
    for name, values in (("z_velocity", velocity), ("z_pressure", pressure)):
        try:
            rates.append(fit_rate(ks, values, response=name))
        except RateFitError as err:
            logger.warning("Skipping %s rate: %s", name, err)
    return rates


# =========================================================================== #
#                              Stability sweep                                #
# =========================================================================== #


STABILITY_QUANTITIES = ("max_energy", "grad_sum", "pressure_sum")


@dataclass(frozen=True)
class StabilityLevel:
    """Monte Carlo means of the stability quantities at one level."""

    level: int
    k: float
    eps: float
    means: Dict[str, float]
    stderrs: Dict[str, float]
    blow_ups: int

    def as_row(self) -> Dict[str, object]:
        """Row of stability.csv."""
        row: Dict[str, object] = {
            "level": self.level,
            "k": self.k,
            "eps": self.eps,
        }
        for name in STABILITY_QUANTITIES:
            row[name] = self.means[name]
            row[f"{name}_stderr"] = self.stderrs[name]
        row["blow_ups"] = self.blow_ups
        return row


@dataclass(frozen=True)
class StabilityResult:
    """Stability sweep outcome; spread is (max - min) / min per quantity."""

    levels: List[StabilityLevel]
    spread: Dict[str, float]

    @property
    def passed(self) -> bool:
        return all(
            math.isfinite(s) and s < STABILITY_SPREAD
            for s in self.spread.values()
        )


def stability_quantities(traj: TrajectoryRecord) -> Dict[str, float]:
    """max_m |u^m|^2, nu k sum |grad u~^l|^2 and k sum |p^l|^2 of a run."""
    params = traj.params
    rows = traj.rows()
    steps = [d for d in rows if d.step >= 1]
    return {
        "max_energy": max(d.energy for d in steps or rows),
        "grad_sum": params.nu * params.k * sum(d.grad_tilde_sq for d in steps),
        "pressure_sum": params.k * sum(d.pressure_sq for d in steps),
    }


def _run_stability_path(
    config: ConfigDict, path: int
) -> Dict[int, Dict[str, float] | None]:
    grid = setup_grid(config)
    model = setup_noise(config, grid)
    params = SchemeParams.from_config(config)
    opts = SolverOpts.from_config(config)
    study = config["study"]
    levels = sorted(study["levels"])
    fine = sample_increments(
        model, study["M_ref"], study["base_seed"], path, T=params.T
    )
    u0 = initial_velocity(
        grid, study["init"], study["init_amplitude"], study["base_seed"], path
    )
    out: Dict[int, Dict[str, float] | None] = {}
    for M in levels:
        try:
            traj = run_trajectory(
                "main", params.at_level(M), u0, fine, opts=opts, model=model,
                record_every=M,
            )
            out[M] = stability_quantities(traj)
        except SchemeError as err:
            logger.warning("Path %d level %d blew up: %s", path, M, err)
            out[M] = None
    return out


def run_stability_sweep(
    config: ConfigDict, progress: bool = True
) -> StabilityResult:
    """Monte Carlo means of the velocity and pressure stability bounds."""
    study = config["study"]
    params = SchemeParams.from_config(config)
    levels = sorted(study["levels"])
    results = parallel_map(
        functools.partial(_run_stability_path, config),
        range(study["paths"]),
        workers=study["workers"],
        desc="stability",
        progress=progress,
    )
    summary = []
    for M in levels:
        meters = {name: MonteCarloMeter(name) for name in STABILITY_QUANTITIES}
        blow_ups = 0
        for path_result in results:
            values = path_result[M]
            if values is None:
                blow_ups += 1
                continue
            for name, meter in meters.items():
                meter.update(values[name])
        level_params = params.at_level(M)
        summary.append(
            StabilityLevel(
                level=M,
                k=level_params.k,
                eps=level_params.eps,
                means={n: m.avg for n, m in meters.items()},
                stderrs={n: m.stderr for n, m in meters.items()},
                blow_ups=blow_ups,
            )
        )
        logger.info(
            "Level %d: %s",
            M,
            ", ".join(str(m) for m in meters.values()),
        )
    spread = {}
    for name in STABILITY_QUANTITIES:
        means = np.array([s.means[name] for s in summary])
        if not np.all(np.isfinite(means)):
            spread[name] = math.nan
        elif means.max() == 0:
            spread[name] = 0.0
        elif means.min() <= 0:
            spread[name] = math.inf
        else:
            spread[name] = float((means.max() - means.min()) / means.min())
    return StabilityResult(levels=summary, spread=spread)


# =========================================================================== #
#                           Decomposition check                               #
# =========================================================================== #


@dataclass(frozen=True)
class DecompositionRow:
    """Residuals of u = z + v, phi = xi + psi and p = pi + rho at one step."""

    step: int
    u_residual: float
    phi_residual: float
    p_residual: float
    scale: float

    def as_row(self) -> Dict[str, object]:
        return {
            "step": self.step,
            "u_residual": self.u_residual,
            "phi_residual": self.phi_residual,
            "p_residual": self.p_residual,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class DecompositionResult:
    """Decomposition identity check over one path."""

    rows: List[DecompositionRow]
    threshold: float

    @property
    def max_scale(self) -> float:
        return max((r.scale for r in self.rows), default=0.0)

    @property
    def worst_ratio(self) -> float:
        """Largest per-step residual relative to its own scale."""
        return max(
            (r.u_residual / max(r.scale, 1e-30) for r in self.rows),
            default=0.0,
        )

    @property
    def passed(self) -> bool:
        return all(
            r.u_residual <= self.threshold * r.scale for r in self.rows
        )


def run_decomposition_check(config: ConfigDict) -> DecompositionResult:
    """Run the main scheme and the z/v pair on one shared noise path.

    At every step l the residual |u^l - (z^l + v^l)| must not exceed
    10 picard_tol (|z^l| + |v^l|).
    """
    grid = setup_grid(config)
    model = setup_noise(config, grid)
    params = SchemeParams.from_config(config)
    opts = SolverOpts.from_config(config)
    sim = config["simulate"]
    seed = config["study"]["base_seed"]
    path = sim["path_index"]
    M = params.M
    u0 = initial_velocity(grid, sim["init"], sim["init_amplitude"], seed, path)
    incs = None
    if M > 0 and not sim["zero_noise"]:
        incs = sample_increments(model, M, seed, path, T=params.T)

    parts: Dict[int, tuple] = {}
    main_states: Dict[int, tuple] = {}

    def keep_parts(step: int, t: float, state) -> None:
        scale = norm(state.z.u) + norm(state.v.u)
        parts[step] = (state.u, state.phi, state.p, scale)

    def keep_main(step: int, t: float, state) -> None:
        main_states[step] = (state.u, state.phi, state.p)

    cadence = max(M, 1)
    run_trajectory(
        "main", params, u0, incs, opts=opts, model=model,
        hooks=(keep_main,), record_every=cadence,
    )
    run_trajectory(
        "decomposed", params, u0, incs, opts=opts, model=model,
        hooks=(keep_parts,), record_every=cadence,
    )
    rows = []
    for step in range(1, M + 1):
        u, phi, p = main_states[step]
        uz, phiz, pz, scale = parts[step]
        rows.append(
            DecompositionRow(
                step=step,
                u_residual=norm(u - uz),
                phi_residual=norm(phi - phiz),
                p_residual=norm(p - pz),
                scale=scale,
            )
        )
    result = DecompositionResult(
        rows=rows, threshold=DECOMPOSITION_FACTOR * opts.picard_tol
    )
    logger.info(
        "Decomposition residual at most %.3e x scale (threshold %.3e).",
        result.worst_ratio,
        result.threshold,
    )
    return result


# =========================================================================== #
#                               Noise checks                                  #
# =========================================================================== #


@dataclass(frozen=True)
class NoiseCheck:
    """One statistic of the noise suite with its acceptance interval."""

    check: str
    value: float
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return self.lower <= self.value <= self.upper

    def as_row(self) -> Dict[str, object]:
        return {
            "check": self.check,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "passed": int(self.passed),
        }


def run_noise_check(
    config: ConfigDict,
    num_increments: int = 1000,
    num_single: int = 10000,
) -> List[NoiseCheck]:
    """Statistics suite of the noise model and increment ladders.

    Checks orthonormality and solenoidality of the basis, the field energy
    E|dW|^2 / (k trace Q), the single-mode variance ratio, exact
    telescoping, and the cross-path correlation of one mode.
    """
    grid = setup_grid(config)
    model = setup_noise(config, grid)
    T = config["scheme"]["T"]
    seed = config["study"]["base_seed"]
    checks = []

    gram = gram_matrix(model)
    checks.append(
        NoiseCheck(
            "gram_deviation",
            float(np.abs(gram - np.eye(model.num_basis)).max()),
            0.0,
            1e-12,
        )
    )
    div = max(
        norm(divergence(basis_field(model, i, c))) / max(
            norm(basis_field(model, i, c), 1), 1e-30
        )
        for i in range(model.num_modes)
        for c in (0, 1)
    )
    checks.append(NoiseCheck("basis_divergence", div, 0.0, 1e-12))

    incs = sample_increments(model, num_increments, seed, 0, T=T)
    energies = [
        norm(increment_field(model, incs, incs.M, ell)) ** 2
        for ell in range(1, incs.M + 1)
    ]
    ratio = float(np.mean(energies)) / (incs.k * model.trace)
    checks.append(NoiseCheck("field_energy_ratio", ratio, 0.9, 1.1))

    single = sample_increments(model, num_single, seed, 0, T=T)
    draws = np.asarray(single.increments[:, 0, 0])
    checks.append(
        NoiseCheck(
            "single_mode_variance_ratio",
            float(np.mean(draws**2)) / single.k,
            0.95,
            1.05,
        )
    )

    usable = num_increments - num_increments % 4
    ladder = sample_increments(model, usable, seed, 1, T=T)
    twice = coarsen(coarsen(ladder, 2), 2)
    once = coarsen(ladder, 4)
    exact = np.array_equal(twice.increments, once.increments) and (
        np.array_equal(once.total(), ladder.total())
    )
    checks.append(NoiseCheck("telescoping_exact", float(exact), 1.0, 1.0))

    other = sample_increments(model, num_single, seed, 1, T=T)
    corr = float(
        np.corrcoef(draws, np.asarray(other.increments[:, 0, 0]))[0, 1]
    )
    bound = 3 / math.sqrt(num_single)
    checks.append(NoiseCheck("cross_path_correlation", corr, -bound, bound))

    for check in checks:
        logger.info(
            "%s = %.6g in [%g, %g]: %s",
            check.check,
            check.value,
            check.lower,
            check.upper,
            "ok" if check.passed else "FAILED",
        )
    return checks


# =========================================================================== #
#                                 Simulate                                    #
# =========================================================================== #


def run_simulation(
    config: ConfigDict, checkpoint_dir: str | None = None
) -> TrajectoryRecord:
    """One path of one scheme, as configured in [simulate]."""
    grid = setup_grid(config)
    model = setup_noise(config, grid)
    params = SchemeParams.from_config(config)
    sim = config["simulate"]
    seed = config["study"]["base_seed"]
    path = sim["path_index"]
    u0 = initial_velocity(grid, sim["init"], sim["init_amplitude"], seed, path)
    if sim["scheme"] == "stokes-penalty" and sim["init"] != "zero":
        logger.info("The z-scheme starts from u0 as given, not from zero.")
    incs = None
    if params.M > 0 and not sim["zero_noise"]:
        incs = sample_increments(model, params.M, seed, path, T=params.T)
    return run_trajectory(
        sim["scheme"],
        params,
        u0,
        incs,
        opts=SolverOpts.from_config(config),
        model=model,
        record_every=max(params.M, 1),
        checkpoint_every=sim["checkpoint_every"],
        checkpoint_dir=checkpoint_dir,
        checkpoint_metadata={"manifest": config_hash(config)},
    )
