"""Random simplex weights and multi- to single-objective scalarization."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

DEFAULT_RHO = 0.65
DEFAULT_LAMBDA = 0.01


class Method(str, enum.Enum):
    WEIGHTED_TCHEBYCHEFF = "weighted_tchebycheff"
    WEIGHTED_SUM = "weighted_sum"
    AUGMENTED_TCHEBYCHEFF = "augmented_tchebycheff"
    REGULARIZED_AUGMENTED_TCHEBYCHEFF = "regularized_augmented_tchebycheff"


@dataclass(frozen=True)
class ScalarizationSpec:
    method: Method = Method.REGULARIZED_AUGMENTED_TCHEBYCHEFF
    rho: float = DEFAULT_RHO
    lam: float = DEFAULT_LAMBDA
    ideal_point: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.rho < 0:
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.ideal_point is not None:
            object.__setattr__(self, "ideal_point", np.asarray(self.ideal_point, dtype=float))


def sample_weights(s: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a weight vector uniformly from the (s-1)-simplex.

    Uses the spacings of sorted uniforms on [0, 1].
    """
    if s < 1:
        raise ValueError(f"number of objectives must be >= 1, got {s}")
    cuts = np.sort(rng.random(s - 1))
    return np.diff(np.concatenate(([0.0], cuts, [1.0])))


def scalarize(spec: ScalarizationSpec, w, y, x=None):
    """Collapse objective vector(s) ``y`` to a scalar with weights ``w``.

    ``y`` may be a single ``(s,)`` vector or an ``(n, s)`` batch; ``x``
    (only used by the regularized method) must match that batching.
    Returns a float for a single vector and an array for a batch.
    """
    w = np.asarray(w, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y2 = np.atleast_2d(y)
    s = w.shape[0]
    if w.ndim != 1 or y2.shape[1] != s:
        raise ValueError(f"weights of length {s} do not match objectives of shape {y.shape}")

    method = spec.method
    if method is Method.WEIGHTED_SUM:
        out = y2 @ w
    elif method is Method.REGULARIZED_AUGMENTED_TCHEBYCHEFF:
        if x is None:
            raise ValueError("the regularized method needs the input x")
        x2 = np.atleast_2d(np.asarray(x, dtype=float))
        if x2.shape[0] != y2.shape[0]:
            raise ValueError(f"{x2.shape[0]} inputs for {y2.shape[0]} objective vectors")
        out = np.max(w * y2, axis=1) + spec.rho * (y2 @ w) + spec.lam * np.linalg.norm(x2, axis=1)
    else:
        z = np.zeros(s) if spec.ideal_point is None else spec.ideal_point
        if z.shape != (s,):
            raise ValueError(f"ideal point of shape {z.shape} for {s} objectives")
        out = np.max(w * (y2 - z), axis=1)
        if method is Method.AUGMENTED_TCHEBYCHEFF:
            out = out + spec.rho * (y2 @ w)
    return float(out[0]) if single else out
