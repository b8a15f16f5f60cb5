"""Sequential three-GP multi-objective loop with an ask/tell interface.

Each :meth:`Optimizer.ask` draws a fresh weight vector, scalarizes the
feasible observations, fits the objective GP, the Pareto-front classifier
and the feasibility classifier, and returns the maximizer of their
composite acquisition. Randomness inside ``ask`` is derived from the run
seed and the dataset size only, so asking twice without telling returns
the same point.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import acquisition as acq
from . import gp
from .constraints import KnownConstraintSet, fit_feasibility
from .metrics import MetricsReport, evaluate_front, hypervolume
from .pareto import extract_front, fit_pareto_classifier
from .scalarize import DEFAULT_LAMBDA, DEFAULT_RHO, Method, ScalarizationSpec, sample_weights, scalarize

log = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], "np.ndarray | None"]

_REJECTION_TRIES = 100


@dataclass
class RunConfig:
    """Everything that determines one optimization run."""

    bounds: np.ndarray
    n_objectives: int
    n_init: int = 5
    budget: int = 1500
    seed: int = 0
    acquisition: acq.AcquisitionSpec = field(default_factory=acq.AcquisitionSpec)
    rho: float = DEFAULT_RHO
    lam: float = DEFAULT_LAMBDA
    kernel: gp.KernelKind = gp.KernelKind.MATERN52
    fit_starts: int = 5
    known_constraints: KnownConstraintSet = field(default_factory=KnownConstraintSet)
    metric_cadence: int = 10
    maximizer: acq.MaximizerConfig = field(default_factory=acq.MaximizerConfig)

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.bounds.ndim != 2 or self.bounds.shape[1] != 2 or np.any(self.bounds[:, 1] <= self.bounds[:, 0]):
            raise ValueError("bounds must be a (d, 2) array with lower < upper")
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.n_objectives < 1:
            raise ValueError("n_objectives must be >= 1")
        if self.metric_cadence < 1:
            raise ValueError("metric_cadence must be >= 1")
        self.kernel = gp.KernelKind(self.kernel)

    @property
    def dim(self) -> int:
        return self.bounds.shape[0]

    def scalarization_method(self) -> Method:
        if self.acquisition.regularized:
            return Method.REGULARIZED_AUGMENTED_TCHEBYCHEFF
        return Method.AUGMENTED_TCHEBYCHEFF


@dataclass
class ObservationRecord:
    x: np.ndarray
    objectives: np.ndarray | None
    feasible: bool
    iteration: int
    scalarized: float | None = None


@dataclass
class _AskContext:
    """Scalarization state of the last ask, used to annotate the matching tell."""

    x: np.ndarray
    spec: ScalarizationSpec
    weights: np.ndarray
    offset: np.ndarray
    span: np.ndarray


class Optimizer:
    """Run state: append-only dataset plus the ask/tell protocol."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.records: list[ObservationRecord] = []
        self._last_ask: _AskContext | None = None
        rng = np.random.default_rng([config.seed, 0x1D])
        self.initial_design = self._sample_known_feasible(rng, config.n_init)

    @property
    def bounds(self) -> np.ndarray:
        return self.config.bounds

    @property
    def iteration(self) -> int:
        return len(self.records)

    def inputs(self) -> np.ndarray:
        return np.array([r.x for r in self.records]).reshape(-1, self.config.dim)

    def feasible_mask(self) -> np.ndarray:
        return np.array([r.feasible for r in self.records], dtype=bool)

    def objective_matrix(self) -> np.ndarray:
        """Objectives per record; rows of infeasible records are NaN."""
        s = self.config.n_objectives
        out = np.full((len(self.records), s), np.nan)
        for i, r in enumerate(self.records):
            if r.feasible:
                out[i] = r.objectives
        return out

    def front_indices(self) -> np.ndarray:
        """Indices of feasible records on the current nondominated front."""
        mask = self.feasible_mask()
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return idx
        labels = extract_front(self.objective_matrix()[idx])
        return idx[labels == 1]

    def front(self) -> np.ndarray:
        return self.objective_matrix()[self.front_indices()]

    def _sample_known_feasible(self, rng: np.random.Generator, n: int) -> np.ndarray:
        known = self.config.known_constraints
        pts = acq.uniform_probes(self.bounds, n, rng)
        if known.count == 0:
            return pts
        for _ in range(_REJECTION_TRIES):
            bad = known.indicator(pts) == 0
            if not bad.any():
                return pts
            pts[bad] = acq.uniform_probes(self.bounds, int(bad.sum()), rng)
        raise RuntimeError("could not sample points satisfying the known constraints")

    def _random_point(self, rng: np.random.Generator) -> np.ndarray:
        return self._sample_known_feasible(rng, 1)[0]

    def ask(self) -> np.ndarray:
        """Propose the next input to evaluate without modifying the dataset."""
        n = len(self.records)
        if n < self.config.n_init:
            self._last_ask = None
            return self.initial_design[n].copy()
        rng = np.random.default_rng([self.config.seed, n])
        try:
            return self._propose(rng)
        except (linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            log.warning("GP fit failed at iteration %d (%s); sampling at random", n, exc)
            self._last_ask = None
            return self._random_point(rng)

    def _fit_config(self, rng: np.random.Generator) -> gp.FitConfig:
        return gp.FitConfig(
            n_starts=self.config.fit_starts,
            input_bounds=self.bounds,
            seed=int(rng.integers(2**31 - 1)),
        )

    def _maximizer_config(self, rng: np.random.Generator) -> acq.MaximizerConfig:
        m = self.config.maximizer
        return acq.MaximizerConfig(m.n_probes, m.restarts, m.max_evals, m.sigma0, int(rng.integers(2**31 - 1)))

    def _propose(self, rng: np.random.Generator) -> np.ndarray:
        cfg = self.config
        known = cfg.known_constraints
        x_all = self.inputs()
        mask = self.feasible_mask()
        self._last_ask = None

        if mask.sum() < 2:
            feas = fit_feasibility(x_all, mask.astype(float), cfg.kernel, self._fit_config(rng))
            if feas.model is None:
                return self._random_point(rng)

            def explore(xq):
                return feas.probability(xq) * known.indicator(xq)

            probes = acq.uniform_probes(self.bounds, cfg.maximizer.n_probes, rng)
            x = acq.maximize_acquisition(explore, self.bounds, self._maximizer_config(rng), probes, known.indicator)
            return x if known.indicator(x[None, :])[0] > 0 else self._random_point(rng)

        s = cfg.n_objectives
        weights = sample_weights(s, rng)
        y_feas = self.objective_matrix()[mask]
        x_feas = x_all[mask]
        offset = y_feas.min(axis=0)
        span = y_feas.max(axis=0) - offset
        span = np.where(span > 0, span, 1.0)
        y_norm = (y_feas - offset) / span
        spec = ScalarizationSpec(cfg.scalarization_method(), cfg.rho, cfg.lam, y_norm.min(axis=0))
        # maximization convention: larger is better
        target = -np.asarray(scalarize(spec, weights, y_norm, x_feas))

        obj_model = gp.fit(x_feas, target, cfg.kernel, self._fit_config(rng))
        pareto_clf = fit_pareto_classifier(x_all, mask, self.objective_matrix(), cfg.kernel, self._fit_config(rng))
        feas = fit_feasibility(x_all, mask.astype(float), cfg.kernel, self._fit_config(rng))

        spec_acq = cfg.acquisition
        obj_incumbent = float(target.max())
        pareto_incumbent = float(pareto_clf.predict(x_all)[0].max())
        probes = acq.uniform_probes(self.bounds, cfg.maximizer.n_probes, rng)
        obj_shift = par_shift = 0.0
        if spec_acq.objective_acq is acq.AcqKind.UCB:
            m, v = gp.predict_batch(obj_model, probes)
            obj_shift = float(np.min(m + spec_acq.ucb_kappa * np.sqrt(v)))
        if spec_acq.pareto_acq is acq.AcqKind.UCB:
            m, v = pareto_clf.predict(probes)
            par_shift = float(np.min(m + spec_acq.ucb_kappa * np.sqrt(v)))

        def composite(xq):
            return acq.composite_acquisition(
                spec_acq,
                gp.predict_batch(obj_model, xq),
                pareto_clf.predict(xq),
                feas.probability(xq),
                known.indicator(xq),
                obj_incumbent,
                pareto_incumbent,
                obj_shift,
                par_shift,
            )

        def fallback(xq):
            return known.indicator(xq) * (1.0 + feas.probability(xq))

        x = acq.maximize_acquisition(composite, self.bounds, self._maximizer_config(rng), probes, fallback)
        if known.indicator(x[None, :])[0] == 0:
            x = self._random_point(rng)
        self._last_ask = _AskContext(x.copy(), spec, weights, offset, span)
        return x

    def tell(self, x, objectives=None) -> ObservationRecord:
        """Record an evaluation; ``objectives=None`` marks a failed (infeasible) one."""
        cfg = self.config
        x = np.asarray(x, dtype=float).copy()
        if x.shape != (cfg.dim,):
            raise ValueError(f"x must have shape ({cfg.dim},), got {x.shape}")
        if np.any(x < self.bounds[:, 0]) or np.any(x > self.bounds[:, 1]):
            raise ValueError(f"x = {x.tolist()} lies outside the search box")
        y = None
        if objectives is not None:
            y = np.asarray(objectives, dtype=float).copy()
            if y.shape != (cfg.n_objectives,):
                raise ValueError(f"objectives must have shape ({cfg.n_objectives},), got {y.shape}")
            if not np.all(np.isfinite(y)):
                raise ValueError("objectives must be finite; report failures as None")
        scalar = None
        ctx = self._last_ask
        if y is not None and ctx is not None and np.array_equal(ctx.x, x):
            scalar = float(scalarize(ctx.spec, ctx.weights, (y - ctx.offset) / ctx.span, x))
        record = ObservationRecord(x, y, y is not None, len(self.records), scalar)
        self.records.append(record)
        self._last_ask = None
        return record


def safe_evaluate(
    evaluator: Evaluator, x: np.ndarray, n_objectives: int | None = None
) -> tuple[np.ndarray | None, bool]:
    """Call ``evaluator``; returns ``(objectives or None, crashed)``."""
    try:
        y = evaluator(x)
    except Exception as exc:  # noqa: BLE001 - any evaluator crash is an infeasible point
        log.warning("evaluator raised %s at x=%s; recording as infeasible", exc, np.asarray(x).tolist())
        return None, True
    if y is None:
        return None, False
    y = np.asarray(y, dtype=float).reshape(-1)
    if not np.all(np.isfinite(y)):
        log.warning("evaluator returned non-finite objectives at x=%s; recording as infeasible", x.tolist())
        return None, False
    if n_objectives is not None and y.size != n_objectives:
        log.warning("evaluator returned %d objectives, expected %d; recording as infeasible", y.size, n_objectives)
        return None, False
    return y, False


def initialize(config: RunConfig, evaluator: Evaluator) -> Optimizer:
    """Create the run state and evaluate the random initial design."""
    opt = Optimizer(config)
    crashes = 0
    for _ in range(config.n_init):
        x = opt.ask()
        y, crashed = safe_evaluate(evaluator, x, config.n_objectives)
        crashes += crashed
        opt.tell(x, y)
    if crashes == config.n_init:
        raise RuntimeError(f"evaluator failed on all {config.n_init} initial points; aborting run")
    return opt


@dataclass
class Checkpoint:
    evaluations: int
    report: MetricsReport


@dataclass
class RunResult:
    config: RunConfig
    records: list[ObservationRecord]
    front_indices: np.ndarray
    checkpoints: list[Checkpoint]

    def front(self) -> np.ndarray:
        return np.array([self.records[i].objectives for i in self.front_indices])


class _Tracker:
    def __init__(self, true_front, reference):
        self.true_front = None if true_front is None else np.asarray(true_front, dtype=float)
        self.reference = reference
        self.hv_ideal = None
        if self.true_front is not None:
            from .metrics import default_reference

            self.reference = (
                default_reference(self.true_front) if reference is None else np.asarray(reference, dtype=float)
            )
            self.hv_ideal = hypervolume(self.true_front, self.reference)
        self.checkpoints: list[Checkpoint] = []

    def update(self, opt: Optimizer, cadence: int) -> None:
        n = len(opt.records)
        if self.true_front is None or n % cadence:
            return
        front = opt.front()
        if front.shape[0] == 0:
            return
        report = evaluate_front(front, self.true_front, self.reference, hv_ideal=self.hv_ideal)
        self.checkpoints.append(Checkpoint(n, report))


def run(
    config: RunConfig,
    evaluator: Evaluator,
    true_front=None,
    reference=None,
    callback: Callable[[Optimizer, ObservationRecord], None] | None = None,
) -> RunResult:
    """Initial design plus ``config.budget`` ask/tell iterations.

    With a ``true_front``, metrics are recorded every ``metric_cadence``
    evaluations (counting the initial design).
    """
    tracker = _Tracker(true_front, reference)
    opt = Optimizer(config)
    crashes = 0
    total = config.n_init + config.budget
    while len(opt.records) < total:
        x = opt.ask()
        y, crashed = safe_evaluate(evaluator, x, config.n_objectives)
        record = opt.tell(x, y)
        if len(opt.records) <= config.n_init:
            crashes += crashed
            if len(opt.records) == config.n_init and crashes == config.n_init:
                raise RuntimeError(f"evaluator failed on all {config.n_init} initial points; aborting run")
        tracker.update(opt, config.metric_cadence)
        if callback is not None:
            callback(opt, record)
    return RunResult(config, opt.records, opt.front_indices(), tracker.checkpoints)


def random_search(config: RunConfig, evaluator: Evaluator, true_front=None, reference=None) -> RunResult:
    """Uniform random sampling with the same budget, seed and checkpoints."""
    tracker = _Tracker(true_front, reference)
    opt = Optimizer(config)
    rng = np.random.default_rng([config.seed, 0x1D])
    xs = opt._sample_known_feasible(rng, config.n_init + config.budget)
    for x in xs:
        y, _ = safe_evaluate(evaluator, x, config.n_objectives)
        opt.tell(x, y)
        tracker.update(opt, config.metric_cadence)
    return RunResult(config, opt.records, opt.front_indices(), tracker.checkpoints)


def summarize(result: RunResult) -> dict:
    last = result.checkpoints[-1].report.to_dict() if result.checkpoints else {}
    return {
        "evaluations": len(result.records),
        "feasible": int(sum(r.feasible for r in result.records)),
        "front_size": int(len(result.front_indices)),
        **{k: last.get(k, math.nan) for k in ("gd", "igd", "hv", "lrhd")},
    }
