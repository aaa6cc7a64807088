import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..asymptotics import (
    REFERENCE_PATHS,
    EnsembleStats,
    clt_test,
    estimate_delta_batch_means,
    estimate_delta_ensemble,
    estimate_epr,
    lil_calibration,
    lil_scan,
    mdp_curve,
    point_start_suite,
)
from ..config import SETTING_KEYS, default_settings
from ..coupling import (
    coupling_check,
    exp_moment_check,
    harnack_grid,
    ibp_check,
    psi_exp_moment_check,
    resolve,
    simulate_ibp_paths,
)
from ..coupling.coupled import DISSIPATIVITY_STREAM
from ..coupling.functions import HARNACK_FUNCTIONS
from ..epr import EnsembleSettings, geometric_grid, martingale_mean
from ..epr.functional import TrajectoryRecord
from ..errors import ConfigurationError, EprLabError
from ..families.closed_forms import discrete_epr, stationary_mean_psi_sq
from ..sde.dissipativity import check_dissipativity, default_burn_in
from ..sde.noise import LANE_AUXILIARY, NoiseStream
from ..verification import mean_and_se
from .artifacts import ArtifactSet, RunManifest
from .scheduler import ensemble_runner


logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2

REFERENCE_STREAM = 2**63 + 1
LIL_REFERENCE_STREAM = 2**63 + 2
REFERENCE_SAMPLES = 100_000


@dataclass
class RunResult:
    kind: str
    exit_code: int
    out_dir: str
    reports: dict = field(default_factory=dict)
    error: dict = None

    @property
    def status(self):
        return {EXIT_PASS: "passed", EXIT_FAIL: "failed"}.get(self.exit_code, "error")


class Experiment:
    """Everything one run shares: model, artifacts, manifest and the ensemble runner."""

    def __init__(self, config, settings):
        self.config = config
        self.settings = settings
        self.model = config.build_model()
        self.artifacts = ArtifactSet(config.out_dir)
        self.manifest = RunManifest(
            config=config.to_dict(),
            stream_ids=[],
            seed=config.seed,
            settings={key: settings[key] for key in SETTING_KEYS if key in settings},
        )
        self.run_ensemble = ensemble_runner(config.workers)
        self._burn_in = None
        self._reference = None
        self._closed = self.model.closed_forms()

    def option(self, table, key, default=None):
        """Option from the experiment table; the value in force is recorded in the manifest."""
        value = self.config.section(table).get(key, default)
        self.manifest.options.setdefault(table, {})[key] = value
        return value

    @property
    def burn_in(self):
        if self._burn_in is None:
            if self.config.burn_in is not None:
                self._burn_in = float(self.config.burn_in)
            elif self.config.initial.is_stationary:
                report = check_dissipativity(
                    self.model, 512, 4.0, NoiseStream(self.config.seed, DISSIPATIVITY_STREAM)
                )
                self._burn_in = default_burn_in(report)
            else:
                self._burn_in = 0.0
        return self._burn_in

    @property
    def reference(self):
        """The EPR reference R used to centre S_t, with how it was obtained."""
        if self._reference is None:
            choice = self.config.epr_reference
            if choice == "closed-form":
                if not self._closed.available:
                    raise ConfigurationError(
                        f"{self._closed.reason}; use stationary-mc or a number",
                        field="epr_reference",
                    )
                self._reference = {"R": self._closed.R_exact, "source": "closed-form", "se": 0.0}
            elif choice == "discrete":
                R_h = discrete_epr(self.model, self.config.h)
                self._reference = {"R": R_h, "source": "discrete", "se": 0.0, "h": self.config.h}
            elif choice == "stationary-mc":
                generator = NoiseStream(self.config.seed, REFERENCE_STREAM).generator(0, LANE_AUXILIARY)
                mean, se = stationary_mean_psi_sq(self.model, REFERENCE_SAMPLES, generator)
                self._reference = {"R": 0.5 * mean, "source": "stationary-mc", "se": 0.5 * se}
            else:
                self._reference = {"R": float(choice), "source": "given", "se": 0.0}
        return self._reference["R"]

    def ensemble(self, horizons, ids=None, law=None, burn_in=None, h=None, checkpoints=(), uniform_dt=None):
        config = self.config
        ids = np.arange(config.replicas) if ids is None else np.asarray(ids)
        settings = EnsembleSettings(
            h=config.h if h is None else h,
            horizons=tuple(horizons),
            burn_in=self.burn_in if burn_in is None else burn_in,
            seed=config.seed,
            noise_block=config.noise_block,
            checkpoints=tuple(checkpoints),
            uniform_dt=uniform_dt,
        )
        logger.info(
            "ensemble: %d replicas, horizons %s, burn-in %g", ids.shape[0], list(horizons), settings.burn_in
        )
        run = self.run_ensemble(self.model, law or config.initial, settings, ids)
        self.note_streams(ids)
        self.manifest.realized_horizons.extend(float(t) for t in run.horizons)
        return run

    def note_streams(self, ids):
        ids = np.asarray(ids)
        if ids.size:
            self.manifest.stream_ids.append([int(ids[0]), int(ids[-1]) + 1])

    def delta(self, stats=None):
        """Closed-form delta when there is one, otherwise the ensemble estimate from ``stats``."""
        if self._closed.available and self._closed.delta_exact is not None:
            return self._closed.delta_exact, "closed-form"
        return estimate_delta_ensemble(stats).delta_hat, "ensemble"

    def finish_reference(self):
        if self._reference is not None:
            self.artifacts.add_report("reference", self._reference)


def _horizon_rows(run, R):
    rows = []
    for t in run.horizons:
        stats = EnsembleStats.from_run(run, t, R)
        mean, se = mean_and_se(stats.R_t)
        S = stats.S()
        spread = float(np.var(S, ddof=1) / stats.t) if stats.n > 1 else 0.0
        rows.append((stats.t, mean, se, float(np.mean(S)), spread))
    return rows


def run_simulate(exp):
    R = exp.reference
    run = exp.ensemble(exp.config.horizons)
    exp.artifacts.write_samples([run.sample(t, R) for t in run.horizons])
    rows = _horizon_rows(run, R)
    exp.artifacts.write_tsv("horizons.tsv", ("t", "R_hat", "R_se", "S_mean", "S_var_over_t"), rows)
    exp.artifacts.add_report(
        "simulate",
        {
            "n": run.n,
            "R": R,
            "horizons": [dict(zip(("t", "R_hat", "R_se", "S_mean", "S_var_over_t"), r)) for r in rows],
            "max_norm": float(np.max(run.max_norm)),
        },
    )
    return True


def run_estimate(exp):
    config = exp.config
    R = exp.reference
    run = exp.ensemble(config.horizons)
    exp.artifacts.write_samples([run.sample(t, R) for t in run.horizons])

    rows = []
    for t in run.horizons:
        stats = EnsembleStats.from_run(run, t, R)
        R_hat, R_se = estimate_epr(stats)
        delta = estimate_delta_ensemble(stats)
        rows.append((stats.t, R_hat, R_se, delta.delta_hat, delta.se))
    exp.artifacts.write_tsv("estimates.tsv", ("t", "R_hat", "R_se", "delta_hat", "delta_se"), rows)

    t, R_hat, R_se, delta_hat, delta_se = rows[-1]
    report = {"t": t, "n": run.n, "R_hat": R_hat, "R_se": R_se, "delta_hat": delta_hat, "delta_se": delta_se}
    checks = {}
    if exp._closed.available:
        R_exact = exp._closed.R_exact
        report["R_exact"] = R_exact
        checks["R_within_3se"] = bool(abs(R_hat - R_exact) <= 3.0 * R_se + 1e-12)
        if exp._closed.delta_exact is not None:
            delta_exact = exp._closed.delta_exact
            report["delta_exact"] = delta_exact
            tolerance = exp.option("estimate", "delta_tolerance", 0.10)
            checks["delta_within_tolerance"] = bool(
                abs(delta_hat - delta_exact) <= tolerance * max(delta_exact, 1e-12)
            )

    batch = config.section("estimate").get("batch_means")
    if batch:
        T = float(batch.get("t", 1e5))
        dt = float(batch.get("dt", 1.0))
        single = exp.ensemble((T,), ids=[config.replicas], h=batch.get("h"), uniform_dt=dt)
        record = single.trajectory(R, grid="uniform")
        estimate = estimate_delta_batch_means(
            TrajectoryRecord(record.times, record.values[0]), float(batch.get("batch_len", 100.0))
        )
        report["batch_means"] = estimate.to_dict()
        tolerance = float(batch.get("tolerance", 0.15))
        checks["batch_means_agrees"] = bool(abs(estimate.delta_hat - delta_hat) <= tolerance * delta_hat)

    starts = exp.option("estimate", "point_starts", [])
    if starts:
        report["point_starts"] = []
        point_n = int(exp.option("estimate", "point_replicas", config.replicas))
        for x0 in starts:
            suite = point_start_suite(
                exp.model, x0, t, point_n, config.h, config.seed, exp.burn_in, R,
                run_ensemble=exp.run_ensemble,
            )
            exp.note_streams(np.arange(2 * point_n))
            report["point_starts"].append(suite.to_dict())

    report["checks"] = checks
    passed = all(checks.values())
    report["pass"] = passed
    exp.artifacts.add_report("estimate", report)
    return passed


def run_clt(exp):
    config = exp.config
    R = exp.reference
    run = exp.ensemble(config.horizons)
    exp.artifacts.write_samples([run.sample(t, R) for t in run.horizons])
    per_t = [EnsembleStats.from_run(run, t, R) for t in run.horizons]
    delta, source = exp.delta(per_t[-1])
    alpha = float(exp.option("clt", "alpha", exp.settings["KS_ALPHA"]))

    reports = [clt_test(stats, delta, alpha=alpha) for stats in per_t]
    exp.artifacts.write_tsv(
        "clt.tsv", ("t", "ks_statistic", "p_value"), [(r.t, r.ks_statistic, r.p_value) for r in reports]
    )
    checks = {"p_value_at_largest_t": reports[-1].passed}
    if len(reports) > 1:
        checks["ks_decreases"] = bool(reports[-1].ks_statistic < reports[0].ks_statistic)

    point_reports = []
    for x0 in exp.option("clt", "point_starts", []):
        suite = point_start_suite(
            exp.model, x0, per_t[-1].t, config.replicas, config.h, config.seed, exp.burn_in, R, delta,
            run_ensemble=exp.run_ensemble,
        )
        exp.note_streams(np.arange(2 * config.replicas))
        point_reports.append(suite.to_dict())
        if suite.clt_point is not None:
            checks[f"point_start_{list(suite.x0)}"] = suite.clt_point.passed

    passed = all(checks.values())
    exp.artifacts.add_report(
        "clt",
        {
            "delta": delta,
            "delta_source": source,
            "alpha": alpha,
            "per_t": [r.to_dict() for r in reports],
            "point_starts": point_reports,
            "checks": checks,
            "pass": passed,
        },
    )
    return passed


def run_mdp(exp):
    config = exp.config
    R = exp.reference
    run = exp.ensemble(config.horizons)
    per_t = [EnsembleStats.from_run(run, t, R) for t in run.horizons]
    delta, source = exp.delta(per_t[-1])
    exponent = float(exp.option("mdp", "lambda_exponent", 0.15))
    u_grid = exp.option("mdp", "u_grid")
    if u_grid is None:
        u_grid = math.sqrt(delta) * np.arange(0.05, 4.0, 0.05)
    min_hits = int(exp.option("mdp", "min_hits", exp.settings["MDP_MIN_HITS"]))
    report = mdp_curve(per_t, exponent, np.asarray(u_grid, dtype=float), delta, min_hits=min_hits)

    exp.artifacts.write_tsv(
        "mdp.tsv",
        ("t", "u", "lambda_t", "hits", "empirical", "theory", "gaussian"),
        [(r.t, r.u, r.lambda_t, r.hits, r.empirical, r.theory, r.gaussian) for r in report.rows],
    )
    tolerance = float(exp.option("mdp", "tolerance", 0.25))
    limit_tolerance = exp.option("mdp", "limit_tolerance")
    checks = {"rows": not report.empty}
    best = report.largest_u()
    if best:
        top = best[-1]
        checks["gaussian_rate_at_largest_t"] = bool(top.t == per_t[-1].t and top.gaussian_discrepancy <= tolerance)
        if limit_tolerance is not None:
            checks["limit_rate_at_largest_t"] = bool(top.discrepancy <= float(limit_tolerance))
    shared = report.common_u([stats.t for stats in per_t])
    if len(per_t) > 1:
        discrepancies = [row.discrepancy for row in shared]
        checks["discrepancy_decreases"] = bool(shared) and bool(np.all(np.diff(discrepancies) < 0.0))
    passed = all(checks.values())
    payload = report.to_dict()
    payload.update({"delta_source": source, "tolerance": tolerance, "checks": checks, "pass": passed})
    exp.artifacts.add_report("mdp", payload)
    return passed


def run_lil(exp):
    config = exp.config
    T = max(config.horizons)
    theta = float(exp.option("lil", "theta", exp.settings["LIL_THETA"]))
    margin = float(exp.option("lil", "margin", exp.settings["LIL_MARGIN"]))
    checkpoints = geometric_grid(theta, T, config.h)
    R = exp.reference
    run = exp.ensemble((T,), checkpoints=checkpoints)
    stats = EnsembleStats.from_run(run, T, R)
    if exp._closed.available and exp._closed.delta_exact is not None:
        delta, source = exp._closed.delta_exact, "closed-form"
    else:
        delta = float(exp.option("lil", "delta", estimate_delta_ensemble(stats).delta_hat))
        source = "given" if "delta" in config.section("lil") else "ensemble"

    report = lil_scan(run.trajectory(R), delta, margin)
    exp.artifacts.write_tsv(
        "lil.tsv",
        ("replica", "sup", "inf"),
        [(i, s, f) for i, (s, f) in enumerate(zip(report.sup.tolist(), report.inf.tolist()))],
    )
    exp.artifacts.write_tsv("lil_trace.tsv", ("replica", "t", "S_over_lil", "S_over_lil_sqrt_delta"), report.trace_rows())

    generator = NoiseStream(config.seed, LIL_REFERENCE_STREAM).generator(0, LANE_AUXILIARY)
    calibration = lil_calibration(
        report,
        generator,
        n_reference=int(exp.option("lil", "reference_paths", REFERENCE_PATHS)),
        alpha=float(exp.option("lil", "alpha", exp.settings["KS_ALPHA"])),
    )
    checks = {
        "matches_brownian": calibration.p_value > calibration.alpha,
        "upper_tail": calibration.tail_fraction <= calibration.tail_bound,
    }
    min_fraction = exp.option("lil", "min_fraction")
    if min_fraction is not None:
        checks["fraction_within"] = report.fraction_within >= float(min_fraction)
    max_ratio = exp.option("lil", "max_ratio")
    if max_ratio is not None:
        checks["max_sup_ratio"] = report.max_sup_ratio <= float(max_ratio)
    passed = all(checks.values())
    payload = report.to_dict()
    payload.update(
        {
            "theta": theta,
            "delta_source": source,
            "brownian_reference": calibration.to_dict(),
            "checks": checks,
            "pass": passed,
        }
    )
    exp.artifacts.add_report("lil", payload)
    return passed


def _verification_tsv(exp, name, reports, keys):
    exp.artifacts.write_tsv(
        name,
        (*keys, "lhs", "rhs", "combined_se", "margin", "pass"),
        [
            (*(str(r.details.get(k)) for k in keys), r.lhs, r.rhs, r.combined_se, r.margin, int(r.passed))
            for r in reports
        ],
    )


def run_verify_harnack(exp):
    config = exp.config
    grid = harnack_grid(
        exp.model,
        config.replicas,
        config.h,
        config.seed,
        functions=tuple(exp.option("verify", "functions", HARNACK_FUNCTIONS)),
        ps=tuple(exp.option("verify", "ps", (1.5, 2.0, 4.0))),
        distances=tuple(exp.option("verify", "distances", (0.5, 1.0, 2.0))),
        horizons=tuple(exp.option("verify", "T", (0.25, 1.0))),
        base=exp.option("verify", "x"),
    )
    exp.note_streams(np.arange(config.replicas))
    _verification_tsv(exp, "harnack.tsv", grid.reports, ("f", "p", "x", "y", "T"))
    exp.artifacts.add_report("harnack", grid.to_dict())
    return grid.passed


def run_verify_ibp(exp):
    config = exp.config
    dim = exp.model.dim
    v = exp.option("verify", "v", np.eye(dim)[0].tolist())
    x = exp.option("verify", "x", [0.0] * dim)
    T = float(exp.option("verify", "T", max(config.horizons)))
    paths = simulate_ibp_paths(
        exp.model, v, x, T, config.replicas, config.h, config.seed,
        jacobian=exp.option("verify", "jacobian", "auto"),
    )
    exp.note_streams(np.arange(config.replicas))
    reports = [
        ibp_check(exp.model, resolve(name), v, x, T, config.replicas, paths=paths)
        for name in exp.option("verify", "functions", ("gaussian", "sigmoid", "tanh"))
    ]
    _verification_tsv(exp, "ibp.tsv", reports, ("f", "T", "jacobian"))
    passed = all(r.passed for r in reports)
    exp.artifacts.add_report("ibp", {"pass": passed, "reports": [r.to_dict() for r in reports]})
    return passed


def default_coupling_grid(dim, distances=(0.5, 1.0, 2.0), horizons=(0.25, 1.0)):
    base = np.zeros(dim)
    direction = np.eye(dim)[0]
    return [(base, base + d * direction, T) for d in distances for T in horizons]


def run_verify_coupling(exp):
    config = exp.config
    grid = exp.option("verify", "grid")
    if grid is None:
        grid = default_coupling_grid(
            exp.model.dim,
            tuple(exp.option("verify", "distances", (0.5, 1.0, 2.0))),
            tuple(exp.option("verify", "T", (0.25, 1.0))),
        )
    report = coupling_check(
        exp.model,
        grid,
        config.replicas,
        config.h,
        config.seed,
        kappa=exp.option("verify", "kappa"),
        K=exp.option("verify", "K"),
        min_fraction=float(exp.option("verify", "min_fraction", 0.999)),
        eps=float(exp.settings["COUPLING_EPS"]),
    )
    exp.note_streams(np.arange(config.replicas))
    exp.artifacts.write_tsv(
        "coupling.tsv",
        ("x", "y", "T", "fraction_coupled", "fraction_strict", "max_tau", "worst_gap_excess", "pass"),
        [
            (str(r["x"]), str(r["y"]), r["T"], r["fraction_coupled"], r["fraction_strict"],
             r["max_tau"], r["worst_gap_excess"], int(r["pass"]))
            for r in report.rows
        ],
    )
    exp.artifacts.add_report("coupling", report.to_dict())
    return report.passed


def run_verify_martingale(exp):
    config = exp.config
    t = max(config.horizons)
    reports = []
    steps = [config.h]
    if exp.option("verify", "refine", False):
        steps.append(config.h / 2.0)
    for h in steps:
        run = exp.ensemble((t,), h=h)
        reports.append(martingale_mean(exp.model, t, config.replicas, h=h, seed=config.seed, run=run))

    checks = {f"h={r.details['h']:g}": r.passed for r in reports}
    if len(reports) == 2:
        coarse, fine = reports
        gap = abs(coarse.lhs - fine.lhs)
        checks["stable_under_refinement"] = bool(gap <= 3.0 * math.hypot(coarse.lhs_se, fine.lhs_se) + 1e-12)
    _verification_tsv(exp, "martingale.tsv", reports, ("t", "h"))
    passed = all(checks.values())
    exp.artifacts.add_report(
        "martingale", {"pass": passed, "checks": checks, "reports": [r.to_dict() for r in reports]}
    )
    return passed


def run_verify_moments(exp):
    config = exp.config
    model = exp.model
    dim = model.dim
    epsilon = float(exp.option("verify", "epsilon", 0.25))
    x = np.asarray(exp.option("verify", "x", [1.0] + [0.0] * (dim - 1)), dtype=float)
    t = float(exp.option("verify", "t", max(config.horizons)))
    reports = [
        exp_moment_check(
            model, x, epsilon, t, config.replicas, config.h, config.seed,
            starts=exp.option("verify", "starts"),
        )
    ]
    exp.note_streams(np.arange(config.replicas))
    if model.has_stationary:
        psi_epsilon = float(exp.option("verify", "psi_epsilon", epsilon / 4.0))
        reports.append(psi_exp_moment_check(model, psi_epsilon, config.replicas, config.seed))
    _verification_tsv(exp, "moments.tsv", reports, ("epsilon",))
    passed = all(r.passed for r in reports)
    exp.artifacts.add_report("moments", {"pass": passed, "reports": [r.to_dict() for r in reports]})
    return passed


HANDLERS = {
    "simulate": run_simulate,
    "estimate": run_estimate,
    "clt": run_clt,
    "mdp": run_mdp,
    "lil": run_lil,
    "verify-harnack": run_verify_harnack,
    "verify-ibp": run_verify_ibp,
    "verify-coupling": run_verify_coupling,
    "verify-martingale": run_verify_martingale,
    "verify-moments": run_verify_moments,
}


def describe_error(exc):
    data = {"type": type(exc).__name__, "message": str(exc), "exit_code": EXIT_ERROR}
    for name in ("field", "step", "required", "got"):
        value = getattr(exc, name, None)
        if value is not None:
            data[name] = value
    state = getattr(exc, "state", None)
    if state is not None:
        data["state"] = np.asarray(state).tolist()
    return data


def run_experiment(config, settings=None):
    """Run one validated experiment and write its artifact set.

    Returns a RunResult whose exit code is 0 when every check passed, 2 when a
    statistical check failed and 1 when the run stopped on an error; in that
    case ``error.json`` and the manifest are still written.
    """
    settings = settings or default_settings()
    config.validate()
    exp = Experiment(config, settings)
    started = time.perf_counter()
    logger.info("%s: %d replicas on %d workers into %s", config.kind, config.replicas, config.workers, config.out_dir)

    error = None
    try:
        passed = HANDLERS[config.kind](exp)
        exit_code = EXIT_PASS if passed else EXIT_FAIL
    except EprLabError as exc:
        logger.error("%s failed: %s", config.kind, exc)
        error = describe_error(exc)
        exp.artifacts.write_json("error.json", error)
        exit_code = EXIT_ERROR

    exp.finish_reference()
    if exp.artifacts.reports:
        exp.artifacts.write_reports()
    exp.manifest.wall_clock = time.perf_counter() - started
    exp.manifest.exit_code = exit_code
    result = RunResult(
        kind=config.kind,
        exit_code=exit_code,
        out_dir=exp.artifacts.out_dir,
        reports=dict(exp.artifacts.reports),
        error=error,
    )
    exp.manifest.status = result.status
    exp.artifacts.write_manifest(exp.manifest)
    logger.info("%s finished: %s (exit %d)", config.kind, result.status, exit_code)
    return result
