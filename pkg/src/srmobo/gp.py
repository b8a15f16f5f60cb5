"""Gaussian process regression with stationary kernels.

Models are built in raw input/target units. :func:`fit` searches the
hyperparameters in a normalized space (inputs scaled to the unit box,
targets standardized) and maps the optimum back, so a fitted
:class:`GpModel` never needs de-standardization at prediction time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.linalg import lapack

LOG_2PI = math.log(2.0 * math.pi)

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)


class KernelKind(str, enum.Enum):
    MATERN12 = "matern12"
    MATERN32 = "matern32"
    MATERN52 = "matern52"
    SQEXP = "sqexp"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, amplitude and one lengthscale per input dimension.

    ``k(x, x') = amplitude**2 * profile(r)`` with
    ``r = ||(x - x') / lengthscales||``.
    """

    kind: KernelKind
    amplitude: float
    lengthscales: np.ndarray

    def __post_init__(self):
        kind = KernelKind(self.kind)
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        if ls.ndim != 1 or ls.size == 0:
            raise ValueError("lengthscales must be a non-empty vector")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if np.any(~(ls > 0)):
            raise ValueError(f"lengthscales must be positive, got {ls}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "lengthscales", ls)

    @property
    def dim(self) -> int:
        return self.lengthscales.size


def _profile(kind: KernelKind, r: np.ndarray) -> np.ndarray:
    """Unit-amplitude correlation as a function of scaled distance."""
    if kind is KernelKind.MATERN12:
        return np.exp(-r)
    if kind is KernelKind.MATERN32:
        sr = _SQRT3 * r
        return (1.0 + sr) * np.exp(-sr)
    if kind is KernelKind.MATERN52:
        sr = _SQRT5 * r
        return (1.0 + sr + (5.0 / 3.0) * r * r) * np.exp(-sr)
    if kind is KernelKind.SQEXP:
        return np.exp(-0.5 * r * r)
    raise ValueError(f"unknown kernel kind {kind!r}")


def _profile_slope(kind: KernelKind, r: np.ndarray) -> np.ndarray:
    """``-(d profile / dr) / r``, finite at r = 0 except for Matern-1/2."""
    if kind is KernelKind.MATERN12:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(-r) / r
        # multiplied by squared scaled offsets that vanish at r = 0
        return np.where(r > 0, out, 0.0)
    if kind is KernelKind.MATERN32:
        return 3.0 * np.exp(-_SQRT3 * r)
    if kind is KernelKind.MATERN52:
        return (5.0 / 3.0) * (1.0 + _SQRT5 * r) * np.exp(-_SQRT5 * r)
    if kind is KernelKind.SQEXP:
        return np.exp(-0.5 * r * r)
    raise ValueError(f"unknown kernel kind {kind!r}")


def _as_matrix(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a vector or a matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    return arr


def kernel_matrix(spec: KernelSpec, x1, x2=None) -> np.ndarray:
    """Covariance matrix between the rows of ``x1`` and ``x2``."""
    a = _as_matrix(x1, spec.dim, "x1") / spec.lengthscales
    b = a if x2 is None else _as_matrix(x2, spec.dim, "x2") / spec.lengthscales
    diff = a[:, None, :] - b[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return spec.amplitude**2 * _profile(spec.kind, r)


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != (spec.dim,) or x2.shape != (spec.dim,):
        raise ValueError(
            f"kernel inputs must have shape ({spec.dim},), got {x.shape} and {x2.shape}"
        )
    diff = (x - x2) / spec.lengthscales
    r = math.sqrt(float(diff @ diff))
    return float(spec.amplitude**2 * _profile(spec.kind, np.float64(r)))


def _cholesky_with_jitter(k: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``k``, adding diagonal jitter on failure.

    Returns the factor and the jitter actually added.
    """
    scale = float(np.mean(np.diag(k))) if k.size else 1.0
    if not scale > 0:
        scale = 1.0
    jitter = 0.0
    step = 1e-10 * scale
    while True:
        try:
            return linalg.cholesky(k + jitter * np.eye(k.shape[0]), lower=True), jitter
        except linalg.LinAlgError:
            if step > 1e-4 * scale:
                raise
            jitter = step
            step *= 2.0


@dataclass(frozen=True)
class Posterior:
    mean: float
    variance: float


@dataclass(frozen=True)
class GpModel:
    """A factorized GP conditioned on training data.

    Any jitter needed to factorize ``K + noise * I`` is folded into
    ``noise_variance``, so ``chol_factor @ chol_factor.T`` always equals
    the covariance built from the stored hyperparameters.
    """

    kernel: KernelSpec
    noise_variance: float
    prior_mean: float
    train_inputs: np.ndarray
    train_targets: np.ndarray
    chol_factor: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, kernel: KernelSpec, noise_variance: float, prior_mean: float, inputs, targets) -> GpModel:
        x = _as_matrix(inputs, kernel.dim, "inputs")
        y = np.asarray(targets, dtype=float).reshape(-1)
        if x.shape[0] == 0:
            raise ValueError("at least one training point is required")
        if y.shape[0] != x.shape[0]:
            raise ValueError(f"{x.shape[0]} inputs but {y.shape[0]} targets")
        if noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")
        k = kernel_matrix(kernel, x)
        k[np.diag_indices_from(k)] += noise_variance
        chol, jitter = _cholesky_with_jitter(k)
        alpha = linalg.cho_solve((chol, True), y - prior_mean)
        x.setflags(write=False)
        y = y.copy()
        y.setflags(write=False)
        return cls(kernel, float(noise_variance + jitter), float(prior_mean), x, y, chol, alpha)

    @property
    def n(self) -> int:
        return self.train_inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.kernel.dim


def log_marginal_likelihood(model: GpModel) -> float:
    resid = model.train_targets - model.prior_mean
    logdet = 2.0 * float(np.sum(np.log(np.diag(model.chol_factor))))
    return -0.5 * model.n * LOG_2PI - 0.5 * logdet - 0.5 * float(resid @ model.alpha)


def predict_batch(model: GpModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and (clamped) variances at the rows of ``x``."""
    xq = _as_matrix(x, model.dim)
    kx = kernel_matrix(model.kernel, xq, model.train_inputs)
    mean = model.prior_mean + kx @ model.alpha
    v = linalg.solve_triangular(model.chol_factor, kx.T, lower=True)
    var = model.kernel.amplitude**2 - np.einsum("ij,ij->j", v, v)
    return mean, np.maximum(var, 0.0)


def predict(model: GpModel, x) -> Posterior:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise ValueError(f"query must have shape ({model.dim},), got {x.shape}")
    mean, var = predict_batch(model, x)
    return Posterior(float(mean[0]), float(var[0]))


@dataclass
class FitConfig:
    """Hyperparameter search settings for :func:`fit`.

    ``input_bounds`` is a ``(d, 2)`` array used to normalize inputs; when
    omitted the training data range is used.
    """

    n_starts: int = 5
    noise_floor: float = 1e-10
    isotropic: bool = False
    max_iter: int = 200
    seed: int = 0
    input_bounds: np.ndarray | None = None

    AMPLITUDE_RANGE = (1e-3, 1e3)
    LENGTHSCALE_RANGE = (1e-3, 1e3)


class _Objective:
    """Negative log marginal likelihood and gradient in log-hyperparameters.

    Parameter vector: ``[log amplitude, log lengthscale(s)..., log noise]``.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, kind: KernelKind, isotropic: bool):
        self.y = y
        self.kind = kind
        self.isotropic = isotropic
        self.n = x.shape[0]
        # per-dimension squared offsets, shape (d, n, n)
        self.sq = (x.T[:, :, None] - x.T[:, None, :]) ** 2
        self.eye = np.eye(self.n)

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        amp2 = math.exp(2.0 * theta[0])
        ls = np.exp(theta[1:-1])
        noise = math.exp(theta[-1])
        if self.isotropic:
            scaled = self.sq / ls[0] ** 2
        else:
            scaled = self.sq / (ls**2)[:, None, None]
        r2 = np.sum(scaled, axis=0)
        r = np.sqrt(r2)
        kbase = amp2 * _profile(self.kind, r)
        k = kbase + noise * self.eye
        chol, info = lapack.dpotrf(k, lower=1, clean=1)
        if info != 0:
            return 1e25, np.zeros_like(theta)
        alpha, _ = lapack.dpotrs(chol, self.y, lower=1)
        kinv, _ = lapack.dpotri(chol, lower=1)
        kinv = np.tril(kinv) + np.tril(kinv, -1).T
        nll = 0.5 * float(self.y @ alpha) + float(np.sum(np.log(np.diag(chol)))) + 0.5 * self.n * LOG_2PI
        w = kinv - np.outer(alpha, alpha)
        grad = np.empty_like(theta)
        grad[0] = float(np.vdot(w, kbase))
        wg = w * (amp2 * _profile_slope(self.kind, r))
        if self.isotropic:
            grad[1] = 0.5 * float(np.vdot(wg, r2))
        else:
            grad[1:-1] = 0.5 * (scaled.reshape(scaled.shape[0], -1) @ wg.reshape(-1))
        grad[-1] = 0.5 * noise * float(np.trace(w))
        return nll, grad


def fit(inputs, targets, kernel_kind=KernelKind.MATERN52, config: FitConfig | None = None) -> GpModel:
    """Fit a GP by multi-start maximization of the marginal likelihood.

    Amplitude, lengthscales and noise are searched in log-space within
    bounds scaled to the data; the constant prior mean is the target mean.
    Identical targets short-circuit to a model pinned at the amplitude
    floor.
    """
    config = config or FitConfig()
    kind = KernelKind(kernel_kind)
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(targets, dtype=float).reshape(-1)
    if x.shape[0] == 0:
        raise ValueError("fit requires at least one training point")
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"{x.shape[0]} inputs but {y.shape[0]} targets")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be finite")
    n, d = x.shape

    if config.input_bounds is not None:
        bounds = np.asarray(config.input_bounds, dtype=float)
        lo, span = bounds[:, 0], bounds[:, 1] - bounds[:, 0]
    else:
        lo, span = x.min(axis=0), np.ptp(x, axis=0)
    span = np.where(span > 0, span, 1.0)
    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    n_ls = 1 if config.isotropic else d

    if y_std == 0.0 or n == 1:
        kernel = KernelSpec(kind, FitConfig.AMPLITUDE_RANGE[0], np.ones(d) * span)
        return GpModel.build(kernel, config.noise_floor, y_mean, x, y)

    xn = (x - lo) / span
    yn = (y - y_mean) / y_std
    objective = _Objective(xn, yn, kind, config.isotropic)
    log_bounds = (
        [tuple(np.log(FitConfig.AMPLITUDE_RANGE))]
        + [tuple(np.log(FitConfig.LENGTHSCALE_RANGE))] * n_ls
        + [(math.log(config.noise_floor), 0.0)]
    )
    lower = np.array([b[0] for b in log_bounds])
    upper = np.array([b[1] for b in log_bounds])

    rng = np.random.default_rng(config.seed)
    starts = []
    starts.append(np.concatenate([[0.0], np.full(n_ls, math.log(0.5)), [math.log(1e-4)]]))
    while len(starts) < max(config.n_starts, 1):
        starts.append(
            np.concatenate(
                [
                    [rng.uniform(math.log(0.5), math.log(2.0))],
                    rng.uniform(math.log(0.05), math.log(2.0), n_ls),
                    [rng.uniform(math.log(1e-8), math.log(1e-2))],
                ]
            )
        )

    best_theta, best_val = None, math.inf
    for start in starts:
        start = np.clip(start, lower, upper)
        start_val = objective(start)[0]
        res = optimize.minimize(
            objective,
            start,
            jac=True,
            method="L-BFGS-B",
            bounds=log_bounds,
            options={"maxiter": config.max_iter},
        )
        theta, val = (res.x, float(res.fun)) if res.fun <= start_val else (start, start_val)
        if val < best_val:
            best_theta, best_val = theta, val

    amp = math.exp(best_theta[0]) * y_std
    ls = np.exp(best_theta[1:-1]) * np.ones(d) * span
    noise = math.exp(best_theta[-1]) * y_std**2
    return GpModel.build(KernelSpec(kind, amp, ls), noise, y_mean, x, y)

