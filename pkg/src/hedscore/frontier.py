"""False-alarm-rate versus early-detection trade-off curves.

A detector's curve is traced by sweeping a decision threshold ``theta``:
the x coordinate is the fraction of pre-onset steps at or above ``theta``,
the y coordinate is the score of the binarized stream ``1[P_t >= theta]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from hedscore.core import ProbabilityStream, hed_score
from hedscore.errors import EmptyCurve, InvalidParameter


@dataclass(frozen=True)
class FrontierPoint:
    theta: float
    far: float
    hed: float


@dataclass(frozen=True)
class FrontierCurve:
    points: tuple[FrontierPoint, ...]
    label: str = ""

    def __post_init__(self):
        th = [p.theta for p in self.points]
        if any(b <= a for a, b in zip(th, th[1:])):
            raise InvalidParameter("frontier thresholds must be strictly increasing")

    @property
    def thetas(self) -> np.ndarray:
        return np.array([p.theta for p in self.points])

    @property
    def fars(self) -> np.ndarray:
        return np.array([p.far for p in self.points])

    @property
    def heds(self) -> np.ndarray:
        return np.array([p.hed for p in self.points])

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class AbcResult:
    abc: float
    grid: np.ndarray
    dominated: Literal["A", "B", "neither"]


def far(stream: ProbabilityStream, theta: float) -> float:
    """Fraction of pre-onset steps whose posterior is at least ``theta``."""
    return np.count_nonzero(stream.pre >= theta) / stream.t_start


def auto_thresholds(stream: ProbabilityStream) -> np.ndarray:
    return np.union1d(stream.probs, [0.0, 1.0])


def frontier_curve(
    stream: ProbabilityStream,
    decay,
    thetas: Optional[Sequence[float]] = None,
    label: str = "",
) -> FrontierCurve:
    """Evaluate (FAR, score) at each threshold; ``thetas=None`` uses every
    distinct stream value plus 0 and 1."""
    if thetas is None:
        grid = auto_thresholds(stream)
    else:
        grid = np.unique(np.asarray(thetas, dtype=np.float64))
        if grid.size and (grid[0] < 0.0 or grid[-1] > 1.0 or not np.all(np.isfinite(grid))):
            raise InvalidParameter("thresholds must lie in [0, 1]")
    pts = []
    for th in grid:
        binary = ProbabilityStream((stream.probs >= th).astype(np.float64), stream.t_start)
        pts.append(FrontierPoint(float(th), far(stream, th), hed_score(binary, decay).score))
    return FrontierCurve(tuple(pts), label)


def _step_function(curve: FrontierCurve):
    if not curve.points:
        raise EmptyCurve(f"curve {curve.label!r} has no points")
    fars = curve.fars
    heds = curve.heds
    # equal FAR: keep the best score reachable at that false-alarm level
    ux = np.unique(fars)
    best = np.array([heds[fars == x].max() for x in ux])

    def value(u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(ux, u, side="right") - 1
        return best[np.clip(idx, 0, ux.size - 1)]

    return ux, value


def _shared_grid(curve_a: FrontierCurve, curve_b: FrontierCurve):
    xa, fa = _step_function(curve_a)
    xb, fb = _step_function(curve_b)
    grid = np.union1d(np.union1d(xa, xb), [0.0, 1.0])
    return grid, fa(grid), fb(grid)


def _verdict(ha: np.ndarray, hb: np.ndarray) -> str:
    if np.all(ha >= hb) and np.any(ha > hb):
        return "A"
    if np.all(hb >= ha) and np.any(hb > ha):
        return "B"
    return "neither"


def abc(curve_a: FrontierCurve, curve_b: FrontierCurve) -> AbcResult:
    """Signed area between the two curves over FAR in [0, 1].

    Both curves are read as right-continuous step functions of FAR and
    sampled on the union of their FAR values; the difference is integrated
    with the trapezoid rule on that grid.
    """
    grid, ha, hb = _shared_grid(curve_a, curve_b)
    area = float(np.trapezoid(ha - hb, grid))
    grid.setflags(write=False)
    return AbcResult(abc=area, grid=grid, dominated=_verdict(ha, hb))


def pareto_dominates(curve_a: FrontierCurve, curve_b: FrontierCurve) -> bool:
    """A at or above B everywhere on the shared grid, strictly above somewhere."""
    _, ha, hb = _shared_grid(curve_a, curve_b)
    return _verdict(ha, hb) == "A"
