"""Box-bounded CMA-ES (single run, minimization).

Strategy parameters follow Hansen's tutorial defaults. Out-of-box samples
are resampled up to ten times; survivors are clamped to the box and
ranked with a quadratic penalty on the clamping distance.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

MIN_EIGENVALUE = 1e-14
MAX_RESAMPLES = 10


@dataclass
class CmaesConfig:
    population_size: int | None = None
    sigma0: float | None = None
    max_evals: int = 10_000
    tol_fun: float = 1e-12
    seed: int = 0
    x0: np.ndarray | None = None
    penalty_weight: float = 1e4

    def resolved_population(self, dim: int) -> int:
        lam = self.population_size or 4 + int(3 * math.log(dim))
        if lam < 4:
            raise ValueError(f"population_size must be >= 4, got {lam}")
        return lam


@dataclass
class CmaesState:
    mean: np.ndarray
    step_size: float
    covariance: np.ndarray
    path_sigma: np.ndarray
    path_c: np.ndarray
    eval_count: int = 0
    generation: int = 0


@dataclass
class CmaesResult:
    x_best: np.ndarray
    f_best: float
    evals: int
    generations: int
    best_history: list[float]
    stop_reason: str


def _as_bounds(bounds) -> np.ndarray:
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2:
        raise ValueError(f"bounds must have shape (d, 2), got {b.shape}")
    if not np.all(np.isfinite(b)) or np.any(b[:, 1] <= b[:, 0]):
        raise ValueError("bounds must be finite with lower < upper")
    return b


def minimize(
    objective: Callable,
    bounds,
    config: CmaesConfig | None = None,
    vectorized: bool = False,
) -> CmaesResult:
    """Minimize ``objective`` over a box.

    With ``vectorized=True`` the objective receives a ``(lam, d)`` array
    and returns ``lam`` values; otherwise it is called once per point.
    Non-finite objective values count as ``+inf``.
    """
    config = config or CmaesConfig()
    box = _as_bounds(bounds)
    lo, hi = box[:, 0], box[:, 1]
    width = hi - lo
    n = box.shape[0]
    rng = np.random.default_rng(config.seed)

    lam = config.resolved_population(n)
    if config.max_evals < lam:
        raise ValueError(f"max_evals ({config.max_evals}) must be >= population size ({lam})")
    mu = lam // 2
    weights = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights /= weights.sum()
    mueff = 1.0 / float(np.sum(weights**2))
    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

    if config.x0 is not None:
        mean = np.clip(np.asarray(config.x0, dtype=float), lo, hi)
    else:
        mean = lo + width * rng.random(n)
    sigma = config.sigma0 if config.sigma0 is not None else 0.3 * float(np.max(width))
    if not sigma > 0:
        raise ValueError(f"sigma0 must be positive, got {sigma}")
    state = CmaesState(mean, sigma, np.eye(n), np.zeros(n), np.zeros(n))

    def evaluate(points: np.ndarray) -> np.ndarray:
        if vectorized:
            vals = np.asarray(objective(points), dtype=float).reshape(-1)
        else:
            vals = np.array([float(objective(p)) for p in points])
        return np.where(np.isfinite(vals), vals, np.inf)

    history_len = 10 + math.ceil(30 * n / lam)
    gen_best: list[float] = []
    best_history: list[float] = []
    x_best, f_best = None, math.inf
    stop_reason = "max_evals"

    while state.eval_count + lam <= config.max_evals:
        eigval, eigvec = np.linalg.eigh(state.covariance)
        eigval = np.maximum(eigval, MIN_EIGENVALUE)
        sqrt_d = np.sqrt(eigval)
        bd = eigvec * sqrt_d

        z = rng.standard_normal((lam, n))
        x = state.mean + state.step_size * z @ bd.T
        for _ in range(MAX_RESAMPLES):
            out = np.any((x < lo) | (x > hi), axis=1)
            if not out.any():
                break
            z_new = rng.standard_normal((int(out.sum()), n))
            x[out] = state.mean + state.step_size * z_new @ bd.T
        clamped = np.clip(x, lo, hi)
        f = evaluate(clamped)
        state.eval_count += lam
        penalty = config.penalty_weight * np.sum(((x - clamped) / width) ** 2, axis=1)
        fitness = f + penalty

        i = int(np.argmin(f))
        if f[i] < f_best:
            x_best, f_best = clamped[i].copy(), float(f[i])
        best_history.append(f_best)

        order = np.argsort(fitness, kind="stable")
        selected = x[order[:mu]]
        old_mean = state.mean
        state.mean = weights @ selected
        y_w = (state.mean - old_mean) / state.step_size
        inv_sqrt = (eigvec / sqrt_d) @ eigvec.T
        state.path_sigma = (1 - cs) * state.path_sigma + math.sqrt(cs * (2 - cs) * mueff) * inv_sqrt @ y_w
        ps_norm = float(np.linalg.norm(state.path_sigma))
        hsig = ps_norm / math.sqrt(1 - (1 - cs) ** (2 * (state.generation + 1))) / chi_n < 1.4 + 2 / (n + 1)
        state.path_c = (1 - cc) * state.path_c + hsig * math.sqrt(cc * (2 - cc) * mueff) * y_w
        steps = (selected - old_mean) / state.step_size
        cov = (
            (1 - c1 - cmu) * state.covariance
            + c1 * (np.outer(state.path_c, state.path_c) + (1 - hsig) * cc * (2 - cc) * state.covariance)
            + cmu * (steps.T * weights) @ steps
        )
        cov = 0.5 * (cov + cov.T)
        ev, evec = np.linalg.eigh(cov)
        if ev.min() < MIN_EIGENVALUE:
            cov = (evec * np.maximum(ev, MIN_EIGENVALUE)) @ evec.T
        state.covariance = cov
        state.step_size *= math.exp((cs / damps) * (ps_norm / chi_n - 1))
        state.generation += 1

        gen_best.append(float(np.min(fitness)))
        if len(gen_best) >= history_len:
            recent = gen_best[-history_len:]
            spread = max(recent) - min(recent)
            if math.isfinite(spread) and spread <= config.tol_fun:
                stop_reason = "tol_fun"
                break
        if not math.isfinite(state.step_size) or state.step_size <= 0:
            stop_reason = "step_size"
            break
        if state.step_size * math.sqrt(float(eigval.max())) < 1e-14 * float(np.max(width)):
            stop_reason = "tol_x"
            break

    if x_best is None:
        x_best = state.mean.copy()
        f_best = float(evaluate(x_best[None, :])[0])
    return CmaesResult(x_best, f_best, state.eval_count, state.generation, best_history, stop_reason)
