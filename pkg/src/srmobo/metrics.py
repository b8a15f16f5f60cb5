"""Front quality metrics: GD, IGD, exact hypervolume (WFG) and LRHD."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .pareto import extract_front


def _points(front, name: str) -> np.ndarray:
    arr = np.asarray(front, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty set of points")
    return arr


def _min_distances(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    if src.shape[1] != dst.shape[1]:
        raise ValueError(f"point dimensions differ: {src.shape[1]} vs {dst.shape[1]}")
    return cdist(src, dst).min(axis=1)


def gd(front, true_front, squared: bool = False) -> float:
    """Generational distance ``sqrt(sum_u d(u, PF*)) / |PF|``.

    ``squared=True`` gives the conventional ``sqrt(sum_u d^2) / |PF|``.
    """
    pf = _points(front, "front")
    d = _min_distances(pf, _points(true_front, "true_front"))
    return math.sqrt(float(np.sum(d**2 if squared else d))) / pf.shape[0]


def igd(front, true_front, squared: bool = False) -> float:
    """Inverted generational distance, distances taken from each true-front point."""
    ref = _points(true_front, "true_front")
    d = _min_distances(ref, _points(front, "front"))
    return math.sqrt(float(np.sum(d**2 if squared else d))) / ref.shape[0]


def _box_volume(p: np.ndarray, ref: np.ndarray) -> float:
    return float(np.prod(ref - p))


def _filter(points: np.ndarray) -> np.ndarray:
    """Drop duplicates and dominated points; the hypervolume is unchanged."""
    pts = np.unique(points, axis=0)
    if pts.shape[0] <= 1:
        return pts
    return pts[extract_front(pts) == 1]


def _wfg(points: np.ndarray, ref: np.ndarray) -> float:
    """Hypervolume as a sum of exclusive contributions.

    Points are visited from worst to best in the last objective, so every
    point limited by the current one shares its last coordinate and the
    exclusive volume is a slab height times a hypervolume in one fewer
    objective.
    """
    n, s = points.shape
    if n == 0:
        return 0.0
    if s == 1:
        return float(ref[0] - points[:, 0].min())
    if n == 1:
        return _box_volume(points[0], ref)
    points = points[np.argsort(-points[:, -1], kind="stable")]
    total = 0.0
    for i in range(n):
        p = points[i]
        height = ref[-1] - p[-1]
        if height <= 0:
            continue
        excl = _box_volume(p[:-1], ref[:-1])
        rest = points[i + 1 :, :-1]
        if rest.shape[0]:
            limited = np.maximum(rest, p[:-1])
            if s > 2:
                limited = _filter(limited)
            excl -= _wfg(limited, ref[:-1])
        total += height * excl
    return total


def hypervolume(front, reference) -> float:
    """Exact hypervolume dominated by ``front`` and bounded by ``reference``.

    Minimization convention; every point must be componentwise ``<=`` the
    reference. Dominated and duplicate points add nothing.
    """
    pts = _points(front, "front")
    ref = np.asarray(reference, dtype=float)
    if ref.shape != (pts.shape[1],):
        raise ValueError(f"reference of shape {ref.shape} for {pts.shape[1]}-objective points")
    bad = np.flatnonzero(np.any(pts > ref, axis=1))
    if bad.size:
        raise ValueError(f"point {pts[bad[0]].tolist()} exceeds the reference point {ref.tolist()}")
    return _wfg(_filter(pts), ref)


def hypervolume_2d(front, reference) -> float:
    """Two-objective hypervolume by a sorted sweep."""
    pts = _points(front, "front")
    ref = np.asarray(reference, dtype=float)
    if pts.shape[1] != 2 or ref.shape != (2,):
        raise ValueError("hypervolume_2d needs two objectives")
    if np.any(pts > ref):
        raise ValueError("points must not exceed the reference point")
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    total, best_f2 = 0.0, ref[1]
    for f1, f2 in pts:
        if f2 < best_f2:
            total += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return total


def lrhd(hv: float, hv_ideal: float) -> float:
    """``log(|hv - hv_ideal|)``; ``-inf`` marks an exact match."""
    diff = abs(hv - hv_ideal)
    return -math.inf if diff == 0 else math.log(diff)


def default_reference(true_front, margin: float = 0.1) -> np.ndarray:
    """True-front nadir pushed out by ``margin`` times the front's extent."""
    pts = _points(true_front, "true_front")
    nadir = pts.max(axis=0)
    extent = nadir - pts.min(axis=0)
    extent = np.where(extent > 0, extent, np.abs(nadir))
    extent = np.where(extent > 0, extent, 1.0)
    return nadir + margin * extent


@dataclass
class MetricsReport:
    gd: float
    igd: float
    hv: float
    lrhd: float
    front_size: int
    reference_point: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_front(
    front, true_front, reference=None, squared: bool = False, hv_ideal: float | None = None
) -> MetricsReport:
    """All metrics for an obtained front against a discretized true front.

    Front points that do not strictly dominate the reference are left out
    of the hypervolume only. ``hv_ideal`` caches the true front's
    hypervolume for repeated calls with the same reference.
    """
    pf = _points(front, "front")
    ref_front = _points(true_front, "true_front")
    ref = default_reference(ref_front) if reference is None else np.asarray(reference, dtype=float)
    inside = pf[np.all(pf < ref, axis=1)]
    hv = hypervolume(inside, ref) if inside.shape[0] else 0.0
    if hv_ideal is None:
        hv_ideal = hypervolume(ref_front, ref)
    return MetricsReport(
        gd=gd(pf, ref_front, squared),
        igd=igd(pf, ref_front, squared),
        hv=hv,
        lrhd=lrhd(hv, hv_ideal),
        front_size=int(pf.shape[0]),
        reference_point=[float(v) for v in ref],
    )
