"""ZDT and DTLZ test problems with discretized true Pareto fronts.

DTLZ problems default to a half-scaled variant (``form="scaled"``): every
objective carries a 0.5 prefactor, DTLZ1's g sums over all ``d``
variables with an additive ``d``, DTLZ4 applies the exponent only inside
the cosines, and DTLZ5/6 use the angles only inside the cosines.
``form="canonical"`` gives the standard DTLZ definitions.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import comb

from .pareto import extract_front

ZDT_NAMES = ("ZDT1", "ZDT2", "ZDT3", "ZDT4", "ZDT6")
DTLZ_NAMES = ("DTLZ1", "DTLZ2", "DTLZ3", "DTLZ4", "DTLZ5", "DTLZ6")
NAMES = ZDT_NAMES + DTLZ_NAMES
FORMS = ("scaled", "canonical")


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    d: int | None = None
    M: int | None = None
    alpha: float = 100.0
    form: str = "scaled"
    bounds: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        name = self.name.upper()
        if name not in NAMES:
            raise ValueError(f"unknown benchmark {self.name!r}; valid names: {', '.join(NAMES)}")
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}, got {self.form!r}")
        object.__setattr__(self, "name", name)
        if name in ZDT_NAMES:
            d = 3 if self.d is None else self.d
            m = 2 if self.M is None else self.M
            if m != 2:
                raise ValueError("ZDT problems have exactly 2 objectives")
            if d < 2:
                raise ValueError("ZDT problems need d >= 2")
            bounds = np.tile([0.0, 1.0], (d, 1))
            if name == "ZDT4":
                bounds[1:] = [-5.0, 5.0]
        else:
            d = 4 if self.d is None else self.d
            m = 3 if self.M is None else self.M
            if m < 2:
                raise ValueError("DTLZ problems need M >= 2")
            if d - m + 1 < 1:
                raise ValueError(f"DTLZ needs k = d - M + 1 >= 1, got d={d}, M={m}")
            bounds = np.tile([0.0, 1.0], (d, 1))
        bounds.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "M", m)
        object.__setattr__(self, "bounds", bounds)

    @property
    def k(self) -> int:
        return self.d - self.M + 1


def _zdt_g(x: np.ndarray) -> np.ndarray:
    return 1.0 + 9.0 * np.sum(x[:, 1:], axis=1) / (x.shape[1] - 1)


def _zdt6_f1(x1):
    return 1.0 - np.exp(-4.0 * x1) * np.sin(6.0 * np.pi * x1) ** 6


def _zdt(name: str, x: np.ndarray) -> np.ndarray:
    d = x.shape[1]
    f1 = x[:, 0]
    if name == "ZDT4":
        g = 1.0 + 10.0 * (d - 1) + np.sum(x[:, 1:] ** 2 - 10.0 * np.cos(4.0 * np.pi * x[:, 1:]), axis=1)
    elif name == "ZDT6":
        f1 = _zdt6_f1(x[:, 0])
        g = 1.0 + 9.0 * (np.sum(x[:, 1:], axis=1) / (d - 1)) ** 0.25
    else:
        g = _zdt_g(x)
    if name in ("ZDT1", "ZDT4"):
        h = 1.0 - np.sqrt(f1 / g)
    elif name in ("ZDT2", "ZDT6"):
        h = 1.0 - (f1 / g) ** 2
    else:
        h = 1.0 - np.sqrt(f1 / g) - (f1 / g) * np.sin(10.0 * np.pi * f1)
    return np.stack([f1, g * h], axis=1)


def _sphere_objectives(scale: np.ndarray, cos_args: np.ndarray, sin_args: np.ndarray) -> np.ndarray:
    """``f_k = scale * prod_{i<M-k} cos(cos_args_i) * sin(sin_args_{M-k})``.

    ``cos_args`` and ``sin_args`` have shape ``(n, M - 1)``; column ``j``
    holds the angle for position variable ``j + 1``.
    """
    n, m1 = cos_args.shape
    cos = np.cos(cos_args)
    sin = np.sin(sin_args)
    out = np.empty((n, m1 + 1))
    for k in range(1, m1 + 2):
        term = np.prod(cos[:, : m1 + 1 - k], axis=1)
        if k > 1:
            term = term * sin[:, m1 + 1 - k]
        out[:, k - 1] = scale * term
    return out


def _dtlz(spec: BenchmarkSpec, x: np.ndarray) -> np.ndarray:
    m = spec.M
    scaled = spec.form == "scaled"
    pos = x[:, : m - 1]
    tail = x[:, m - 1 :]
    name = spec.name
    half_pi = 0.5 * np.pi

    if name in ("DTLZ1", "DTLZ3"):
        if name == "DTLZ1" and scaled:
            g = 100.0 * (spec.d + np.sum((x - 0.5) ** 2 - np.cos(20.0 * np.pi * (x - 0.5)), axis=1))
        else:
            g = 100.0 * (spec.k + np.sum((tail - 0.5) ** 2 - np.cos(20.0 * np.pi * (tail - 0.5)), axis=1))
    elif name == "DTLZ6":
        g = np.sum(tail**0.1, axis=1)
    else:
        g = np.sum((tail - 0.5) ** 2, axis=1)

    if name == "DTLZ1":
        scale = 0.5 * (1.0 + g)
        n = x.shape[0]
        out = np.empty((n, m))
        for k in range(1, m + 1):
            term = np.prod(pos[:, : m - k], axis=1)
            if k > 1:
                term = term * (1.0 - pos[:, m - k])
            out[:, k - 1] = scale * term
        return out

    scale = (0.5 if scaled else 1.0) * (1.0 + g)
    if name in ("DTLZ2", "DTLZ3"):
        return _sphere_objectives(scale, pos * half_pi, pos * half_pi)
    if name == "DTLZ4":
        bent = pos**spec.alpha * half_pi
        return _sphere_objectives(scale, bent, bent if not scaled else pos * half_pi)
    # DTLZ5 / DTLZ6
    gcol = g[:, None]
    if scaled:
        theta = np.pi / (4.0 * (1.0 + gcol)) * (1.0 + 2.0 * gcol * pos)
        theta[:, 0] = pos[:, 0]
        return _sphere_objectives(scale, theta * half_pi, pos * half_pi)
    theta = (1.0 + 2.0 * gcol * pos) / (2.0 * (1.0 + gcol))
    theta[:, 0] = pos[:, 0]
    return _sphere_objectives(scale, theta * half_pi, theta * half_pi)


def evaluate(spec: BenchmarkSpec, x) -> np.ndarray:
    """Objective vector(s) at ``x`` (a ``(d,)`` vector or ``(n, d)`` batch)."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    x2 = np.atleast_2d(arr)
    if x2.shape[1] != spec.d:
        raise ValueError(f"{spec.name} expects {spec.d} inputs, got {x2.shape[1]}")
    lo, hi = spec.bounds[:, 0], spec.bounds[:, 1]
    if np.any(x2 < lo) or np.any(x2 > hi):
        raise ValueError(f"input outside the {spec.name} box")
    out = _zdt(spec.name, x2) if spec.name in ZDT_NAMES else _dtlz(spec, x2)
    return out[0] if single else out


@functools.lru_cache(maxsize=None)
def zdt6_f1_min() -> float:
    """Smallest attainable ZDT6 first objective on x1 in [0, 1]."""
    grid = np.linspace(0.0, 1.0, 100_001)
    i = int(np.argmin(_zdt6_f1(grid)))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(lambda t: float(_zdt6_f1(t)), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-14})
    return float(min(res.fun, _zdt6_f1(grid[i])))


def _das_dennis(m: int, divisions: int) -> np.ndarray:
    """All points of the simplex lattice with ``divisions`` steps."""
    pts = []

    def rec(prefix, left, depth):
        if depth == m - 1:
            pts.append(prefix + [left])
            return
        for i in range(left + 1):
            rec(prefix + [i], left - i, depth + 1)

    rec([], divisions, 0)
    return np.asarray(pts, dtype=float) / divisions


def _lattice_for(m: int, resolution: int) -> np.ndarray:
    h = 1
    while comb(h + m - 1, m - 1, exact=True) < resolution:
        h += 1
    return _das_dennis(m, h)


def _grid_eval(spec: BenchmarkSpec, axes: list[np.ndarray], tail_value: float) -> tuple[np.ndarray, np.ndarray]:
    mesh = np.meshgrid(*axes, indexing="ij")
    pos = np.stack([a.reshape(-1) for a in mesh], axis=1)
    f = evaluate(spec, np.hstack([pos, np.full((pos.shape[0], spec.k), tail_value)]))
    keep = extract_front(f) == 1
    return pos[keep], f[keep]


def _grid_front(spec: BenchmarkSpec, resolution: int, tail_value: float) -> np.ndarray:
    m = spec.M
    per_axis = max(2, math.ceil(resolution ** (1.0 / (m - 1))) * 2)
    axis = np.linspace(0.0, 1.0, per_axis)
    if spec.name == "DTLZ4":
        # the exponent squeezes the cosine terms into x near 1; add a grid uniform in x**alpha
        half = np.linspace(0.0, 1.0, per_axis // 2 + 1)
        axis = np.unique(np.concatenate([axis[::2], half ** (1.0 / spec.alpha)]))
    pos, f = _grid_eval(spec, [axis] * (m - 1), tail_value)
    # degenerate fronts: position variables pinned on the front are fixed and
    # the remaining ones re-gridded at the full resolution
    active = [j for j in range(m - 1) if np.unique(pos[:, j]).size > 1]
    if f.shape[0] < resolution and 0 < len(active) < m - 1:
        n_active = math.ceil(resolution ** (1.0 / len(active))) * 2
        axes = [np.linspace(0.0, 1.0, n_active) if j in active else pos[:1, j] for j in range(m - 1)]
        _, f = _grid_eval(spec, axes, tail_value)
    return f


def _thin(points: np.ndarray, resolution: int) -> np.ndarray:
    """Keep ``resolution`` points spread along the first objective."""
    if points.shape[0] <= resolution:
        return points
    order = np.lexsort(points.T[::-1])
    idx = np.unique(np.round(np.linspace(0, points.shape[0] - 1, resolution)).astype(int))
    return points[order[idx]]


@dataclass(frozen=True)
class TrueFront:
    points: np.ndarray
    resolution: int


@functools.lru_cache(maxsize=64)
def true_front(spec: BenchmarkSpec, resolution: int = 500) -> TrueFront:
    """Discretized Pareto front of ``spec``.

    ZDT fronts and DTLZ1-3 are built analytically; the remaining DTLZ
    fronts are traced on a grid of position variables with the distance
    variables at the minimizer of g and then dominance-filtered.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    name = spec.name
    if name in ("ZDT1", "ZDT4"):
        f1 = np.linspace(0.0, 1.0, resolution)
        pts = np.stack([f1, 1.0 - np.sqrt(f1)], axis=1)
    elif name in ("ZDT2", "ZDT6"):
        start = zdt6_f1_min() if name == "ZDT6" else 0.0
        f1 = np.linspace(start, 1.0, resolution)
        pts = np.stack([f1, 1.0 - f1**2], axis=1)
    elif name == "ZDT3":
        f1 = np.linspace(0.0, 1.0, max(10_000, 20 * resolution))
        dense = np.stack([f1, 1.0 - np.sqrt(f1) - f1 * np.sin(10.0 * np.pi * f1)], axis=1)
        pts = _thin(dense[extract_front(dense) == 1], resolution)
    else:
        scaled = spec.form == "scaled"
        if name == "DTLZ1":
            pts = 0.5 * _lattice_for(spec.M, resolution)
        elif name in ("DTLZ2", "DTLZ3") or (name == "DTLZ4" and not scaled):
            lat = _lattice_for(spec.M, resolution)
            radius = 0.5 if scaled else 1.0
            pts = radius * lat / np.linalg.norm(lat, axis=1, keepdims=True)
        else:
            tail = 0.0 if name == "DTLZ6" else 0.5
            pts = _grid_front(spec, resolution, tail)
            pts = _thin(pts, resolution)
    pts = np.asarray(pts, dtype=float)
    pts.setflags(write=False)
    return TrueFront(pts, resolution)
