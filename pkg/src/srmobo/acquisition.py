"""PI / EI / UCB acquisitions, the composite product, and its maximizer.

All acquisitions use the maximization convention: larger ``mean`` is
better and ``incumbent`` is the best value observed so far.
"""

from __future__ import annotations

import enum
import itertools
import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import cmaes

log = logging.getLogger(__name__)


class AcqKind(str, enum.Enum):
    PI = "PI"
    EI = "EI"
    UCB = "UCB"


@dataclass(frozen=True)
class AcquisitionSpec:
    """One of the 18 ``Reg|NoReg-{PI,EI,UCB}-{PI,EI,UCB}`` variants."""

    objective_acq: AcqKind = AcqKind.UCB
    pareto_acq: AcqKind = AcqKind.EI
    ucb_kappa: float = 2.0
    regularized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "objective_acq", AcqKind(self.objective_acq))
        object.__setattr__(self, "pareto_acq", AcqKind(self.pareto_acq))
        if not self.ucb_kappa > 0:
            raise ValueError(f"ucb_kappa must be positive, got {self.ucb_kappa}")

    @property
    def name(self) -> str:
        prefix = "Reg" if self.regularized else "NoReg"
        return f"{prefix}-{self.objective_acq.value}-{self.pareto_acq.value}"

    @classmethod
    def from_name(cls, name: str, ucb_kappa: float = 2.0) -> AcquisitionSpec:
        parts = name.split("-")
        if len(parts) != 3 or parts[0] not in ("Reg", "NoReg"):
            raise ValueError(f"variant {name!r} does not match Reg|NoReg-<ACQ>-<ACQ>; valid: {', '.join(VARIANTS)}")
        try:
            return cls(AcqKind(parts[1]), AcqKind(parts[2]), ucb_kappa, parts[0] == "Reg")
        except ValueError:
            raise ValueError(f"unknown acquisition in variant {name!r}; valid: {', '.join(VARIANTS)}") from None


VARIANTS = tuple(
    f"{reg}-{a}-{b}" for reg, a, b in itertools.product(("Reg", "NoReg"), ("PI", "EI", "UCB"), ("PI", "EI", "UCB"))
)


def base_acquisition(kind, mean, variance, incumbent, kappa=2.0, ucb_shift=0.0):
    """Evaluate PI, EI or UCB; scalar in, scalar out, arrays broadcast.

    UCB is reported as ``max(mean + kappa * sd - ucb_shift, 0)`` so it can
    enter a product of factors. Zero variance uses the deterministic limits.
    """
    kind = AcqKind(kind)
    mu = np.asarray(mean, dtype=float)
    var = np.asarray(variance, dtype=float)
    if np.any(var < 0):
        raise ValueError("variance must be nonnegative")
    sd = np.sqrt(var)
    if kind is AcqKind.UCB:
        out = np.maximum(mu + kappa * sd - ucb_shift, 0.0)
    else:
        diff = mu - incumbent
        pos = sd > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(pos, diff / np.where(pos, sd, 1.0), 0.0)
        if kind is AcqKind.PI:
            out = np.where(pos, norm.cdf(z), (diff > 0).astype(float))
        else:
            ei = diff * norm.cdf(z) + sd * norm.pdf(z)
            out = np.where(pos, np.maximum(ei, 0.0), np.maximum(diff, 0.0))
    return float(out) if out.ndim == 0 else out


def composite_acquisition(
    spec: AcquisitionSpec,
    obj_posterior,
    pareto_posterior,
    feas_prob,
    known_ind,
    obj_incumbent: float = 0.0,
    pareto_incumbent: float = 1.0,
    obj_ucb_shift: float = 0.0,
    pareto_ucb_shift: float = 0.0,
):
    """Product of objective acquisition, Pareto acquisition, feasibility
    probability and the known-constraint indicator.

    Posteriors are ``(mean, variance)`` pairs (scalars or arrays).
    """
    a_obj = base_acquisition(spec.objective_acq, *obj_posterior, obj_incumbent, spec.ucb_kappa, obj_ucb_shift)
    a_par = base_acquisition(spec.pareto_acq, *pareto_posterior, pareto_incumbent, spec.ucb_kappa, pareto_ucb_shift)
    known = np.asarray(known_ind, dtype=float)
    out = np.where(known > 0, a_obj * a_par * np.asarray(feas_prob, dtype=float) * known, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass
class MaximizerConfig:
    n_probes: int = 1024
    restarts: int = 3
    max_evals: int = 300
    sigma0: float = 0.2  # fraction of each box side
    seed: int = 0


def best_index(values: np.ndarray, points: np.ndarray) -> int:
    """Index of the maximum; ties go to the lexicographically smallest point."""
    top = np.flatnonzero(values == np.max(values))
    if top.size == 1:
        return int(top[0])
    sub = points[top]
    order = np.lexsort(sub.T[::-1])
    return int(top[order[0]])


def uniform_probes(bounds, n: int, rng: np.random.Generator) -> np.ndarray:
    box = np.asarray(bounds, dtype=float)
    return box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((n, box.shape[0]))


def maximize_acquisition(
    acq: Callable[[np.ndarray], np.ndarray],
    bounds,
    config: MaximizerConfig | None = None,
    probes: np.ndarray | None = None,
    fallback: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Maximize a batched acquisition over a box.

    A random probe set seeds CMA-ES restarts from its best distinct
    members; the result is never worse than the best probe. If the
    acquisition is zero on every probe, probes are ranked by ``fallback``
    instead.
    """
    config = config or MaximizerConfig()
    box = np.asarray(bounds, dtype=float)
    lo, width = box[:, 0], box[:, 1] - box[:, 0]
    rng = np.random.default_rng(config.seed)
    if probes is None:
        probes = uniform_probes(box, config.n_probes, rng)
    values = np.asarray(acq(probes), dtype=float)
    values = np.where(np.isfinite(values), values, -np.inf)

    if not np.any(values != 0):
        log.warning("acquisition vanishes on all %d probes; ranking by fallback score", len(probes))
        if fallback is None:
            return probes[best_index(values, probes)].copy()
        scores = np.asarray(fallback(probes), dtype=float)
        return probes[best_index(scores, probes)].copy()

    finite = np.abs(values[np.isfinite(values)])
    scale = float(np.max(finite)) if finite.size and np.max(finite) > 0 else 1.0

    def neg_unit(u: np.ndarray) -> np.ndarray:
        return -np.asarray(acq(lo + u * width), dtype=float) / scale

    order = np.argsort(-values, kind="stable")
    starts = []
    for idx in order:
        if not np.isfinite(values[idx]) or len(starts) >= config.restarts:
            break
        if all(not np.array_equal(probes[idx], s) for s in starts):
            starts.append(probes[idx])

    cand_x = [probes]
    cand_f = [values]
    unit_box = np.tile([0.0, 1.0], (box.shape[0], 1))
    seeds = rng.integers(0, 2**31 - 1, size=len(starts))
    for start, seed in zip(starts, seeds):
        cfg = cmaes.CmaesConfig(
            sigma0=config.sigma0,
            max_evals=config.max_evals,
            tol_fun=1e-10,
            seed=int(seed),
            x0=(start - lo) / width,
        )
        res = cmaes.minimize(neg_unit, unit_box, cfg, vectorized=True)
        x = lo + res.x_best * width
        cand_x.append(x[None, :])
        cand_f.append(np.asarray(acq(x[None, :]), dtype=float))
    xs = np.vstack(cand_x)
    fs = np.concatenate(cand_f)
    fs = np.where(np.isfinite(fs), fs, -np.inf)
    return xs[best_index(fs, xs)].copy()
