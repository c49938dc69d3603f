"""The early-detection score, its exact and smoothed variants, and helpers.

All scores work on a :class:`ProbabilityStream`: posterior values on the
integer grid ``t = 0..T`` with a known onset ``t_start``. The pre-onset mean
is the noise floor subtracted from every post-onset value; positive excess
("lift") is discounted by ``exp(-lambda_h * (t - t_start))`` and averaged
over the window length ``T - t_start``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from hedscore._accel import kernels
from hedscore.errors import (
    DegenerateWindow,
    EmptyPreOnsetWindow,
    InvalidDecay,
    InvalidPartition,
    InvalidRegimeLog,
    IrregularGridError,
    NonPositiveBeta,
    NonPositiveBudget,
    NoTransitions,
    ProbabilityRangeError,
    WindowTooShort,
)

# |beta * x| beyond which softplus is replaced by its asymptotes
SOFTPLUS_SWITCH = 30.0


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProbabilityStream:
    """Posterior stream ``probs[0..T]`` with onset index ``t_start``.

    ``0 < t_start < T`` is enforced so that both the pre-onset window used for
    the baseline and the post-onset window used for scoring are non-empty.
    """

    probs: np.ndarray
    t_start: int

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64, copy=True)
        if p.ndim != 1 or p.size == 0:
            raise ProbabilityRangeError("probs must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0:
            bad = int(np.flatnonzero(~((p >= 0.0) & (p <= 1.0)))[0])
            raise ProbabilityRangeError(
                f"probability at t={bad} is {p[bad]!r}; every value must lie in [0, 1]"
            )
        if int(self.t_start) != self.t_start:
            raise EmptyPreOnsetWindow(f"t_start must be an integer, got {self.t_start!r}")
        t_start = int(self.t_start)
        horizon = p.size - 1
        if t_start <= 0:
            raise EmptyPreOnsetWindow(
                f"t_start={t_start}: the pre-onset window [0, t_start) is empty"
            )
        if t_start >= horizon:
            raise DegenerateWindow(
                f"t_start={t_start} must be strictly below the horizon T={horizon}"
            )
        object.__setattr__(self, "probs", _readonly(p))
        object.__setattr__(self, "t_start", t_start)

    @classmethod
    def from_timestamps(cls, t: Sequence[int], probs: Sequence[float], t_start: int):
        """Build a stream from explicit ``(t, p)`` pairs on a unit grid from 0."""
        t = np.asarray(t)
        if t.size != len(probs):
            raise IrregularGridError("timestamps and probabilities differ in length")
        expected = np.arange(t.size)
        if t.size == 0 or not np.array_equal(t, expected):
            bad = int(np.flatnonzero(t != expected)[0]) if t.size else 0
            raise IrregularGridError(
                f"timestamps must run 0, 1, 2, ... in unit steps; row {bad} has t={t[bad] if t.size else None}"
            )
        return cls(np.asarray(probs, dtype=np.float64), t_start)

    @property
    def horizon(self) -> int:
        return self.probs.size - 1

    @property
    def pre(self) -> np.ndarray:
        return self.probs[: self.t_start]

    @property
    def post(self) -> np.ndarray:
        return self.probs[self.t_start :]

    def with_post(self, post: np.ndarray) -> "ProbabilityStream":
        """Same pre-onset segment and onset, new post-onset segment."""
        return ProbabilityStream(np.concatenate([self.pre, post]), self.t_start)

    def __eq__(self, other):
        if not isinstance(other, ProbabilityStream):
            return NotImplemented
        return self.t_start == other.t_start and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash((self.t_start, self.probs.tobytes()))


@dataclass(frozen=True)
class DecayParams:
    """Per-step decay rate of the latency discount."""

    lambda_h: float

    def __post_init__(self):
        lam = float(self.lambda_h)
        if not math.isfinite(lam) or lam <= 0.0:
            raise InvalidDecay(f"lambda_h must be a finite positive number, got {self.lambda_h!r}")
        object.__setattr__(self, "lambda_h", lam)

    @property
    def half_life(self) -> float:
        return half_life(self)


@dataclass(frozen=True)
class HedResult:
    score: float
    baseline: float
    lifts: np.ndarray
    discounts: np.ndarray
    normalizer: float


@dataclass(frozen=True)
class PhaseReport:
    boundaries: tuple[int, ...]
    contributions: np.ndarray

    @property
    def total(self) -> float:
        return kernels.neumaier_sum(self.contributions)


def _as_decay(decay) -> DecayParams:
    return decay if isinstance(decay, DecayParams) else DecayParams(decay)


def compute_baseline(stream: ProbabilityStream) -> float:
    """Mean of the ``t_start`` pre-onset values."""
    if stream.t_start < 1:
        raise EmptyPreOnsetWindow("t_start must be at least 1")
    return kernels.neumaier_sum(stream.pre) / stream.t_start


def discounts(n_terms: int, decay) -> np.ndarray:
    """``exp(-lambda_h * k)`` for ``k = 0..n_terms-1``; the first entry is exactly 1."""
    lam = _as_decay(decay).lambda_h
    return np.exp(-lam * np.arange(n_terms, dtype=np.float64))


def hed_score(stream: ProbabilityStream, decay) -> HedResult:
    """Discrete score with its audit trail.

    The sum runs over the ``T - t_start + 1`` indices ``t_start..T`` and is
    divided by ``T - t_start``.
    """
    decay = _as_decay(decay)
    base = compute_baseline(stream)
    norm = float(stream.horizon - stream.t_start)
    if norm <= 0:
        raise DegenerateWindow("T == t_start")
    lifts = np.maximum(stream.post - base, 0.0)
    disc = discounts(lifts.size, decay)
    score = kernels.neumaier_sum(lifts * disc) / norm
    return HedResult(
        score=float(score),
        baseline=float(base),
        lifts=_readonly(lifts),
        discounts=_readonly(disc),
        normalizer=norm,
    )


def _interval_weights(n: int, lam: float) -> np.ndarray:
    # integral of exp(-lam * s) over [k, k+1], k = 0..n-1
    return np.exp(-lam * np.arange(n, dtype=np.float64)) * (-math.expm1(-lam) / lam)


def hed_exact_piecewise(stream: ProbabilityStream, decay) -> float:
    """Exact integral score of the step-function extension of ``stream``.

    ``P`` is held at ``probs[k]`` on ``[k, k+1)``; the value at ``T`` itself
    carries no mass.
    """
    lam = _as_decay(decay).lambda_h
    base = compute_baseline(stream)
    n = stream.horizon - stream.t_start
    lifts = np.maximum(stream.probs[stream.t_start : stream.horizon] - base, 0.0)
    return float(kernels.neumaier_sum(lifts * _interval_weights(n, lam)) / n)


def half_life(decay) -> float:
    """Delay after which the discount has halved: ``ln 2 / lambda_h``."""
    return math.log(2.0) / _as_decay(decay).lambda_h


def lambda_from_budget(delta_t_min: float) -> DecayParams:
    """Decay rate whose half-life equals the response budget ``delta_t_min``."""
    d = float(delta_t_min)
    if not math.isfinite(d) or d <= 0.0:
        raise NonPositiveBudget(f"response budget must be positive, got {delta_t_min!r}")
    return DecayParams(math.log(2.0) / d)


def hed_upper_bound(
    stream: ProbabilityStream,
    decay,
    mode: Literal["continuous", "discrete"] = "discrete",
) -> float:
    """Largest score attainable given the stream's baseline.

    Both modes are the score of a detector sitting at 1 over the whole
    post-onset window: ``continuous`` bounds :func:`hed_exact_piecewise` and
    equals ``(1 - base) * (1 - exp(-lambda_h * N)) / (lambda_h * N)``;
    ``discrete`` bounds :func:`hed_score`. Each is summed along the same path
    as the score it bounds, so equality cases cannot round past the bound.
    """
    lam = _as_decay(decay).lambda_h
    base = compute_baseline(stream)
    n = stream.horizon - stream.t_start
    if mode == "continuous":
        return kernels.neumaier_sum((1.0 - base) * _interval_weights(n, lam)) / n
    if mode == "discrete":
        return kernels.neumaier_sum((1.0 - base) * discounts(n + 1, lam)) / n
    raise ValueError(f"mode must be 'continuous' or 'discrete', got {mode!r}")


def hed_phase_decomposition(
    stream: ProbabilityStream, decay, boundaries: Sequence[int]
) -> PhaseReport:
    """Split the score over ``t_start = b[0] < b[1] < ... < b[-1] = T``.

    Phase ``k`` covers ``[b[k], b[k+1])``; the last phase also includes ``T``.
    Every phase uses the global baseline and normalizer.
    """
    b = [int(x) for x in boundaries]
    if len(b) < 2:
        raise InvalidPartition("a partition needs at least two boundaries")
    if b[0] != stream.t_start or b[-1] != stream.horizon:
        raise InvalidPartition(
            f"partition must start at t_start={stream.t_start} and end at T={stream.horizon}"
        )
    if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
        raise InvalidPartition("partition boundaries must be strictly increasing")
    res = hed_score(stream, decay)
    terms = res.lifts * res.discounts
    offs = [x - stream.t_start for x in b]
    offs[-1] += 1
    contrib = np.array(
        [kernels.neumaier_sum(terms[lo:hi]) / res.normalizer for lo, hi in zip(offs, offs[1:])]
    )
    return PhaseReport(boundaries=tuple(b), contributions=_readonly(contrib))


def softplus(x: np.ndarray, beta: float) -> np.ndarray:
    z = beta * np.asarray(x, dtype=np.float64)
    out = np.empty_like(z)
    hi = z > SOFTPLUS_SWITCH
    lo = z < -SOFTPLUS_SWITCH
    mid = ~(hi | lo)
    out[hi] = z[hi]
    out[lo] = np.exp(z[lo])
    out[mid] = np.log1p(np.exp(z[mid]))
    return out / beta


def _logistic(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise NonPositiveBeta(f"beta must be positive, got {beta!r}")
    return beta


def hed_smooth(stream: ProbabilityStream, decay, beta: float) -> float:
    """Score with the hard clamp replaced by ``softplus_beta``."""
    beta = _check_beta(beta)
    base = compute_baseline(stream)
    n = stream.horizon - stream.t_start
    disc = discounts(n + 1, decay)
    return float(kernels.neumaier_sum(softplus(stream.post - base, beta) * disc) / n)


def hed_smooth_grad(stream: ProbabilityStream, decay, beta: float) -> np.ndarray:
    """Gradient of :func:`hed_smooth` with respect to every ``probs[t]``.

    Pre-onset entries act only through the baseline, so they all share the
    same (non-positive) value.
    """
    beta = _check_beta(beta)
    base = compute_baseline(stream)
    n = stream.horizon - stream.t_start
    disc = discounts(n + 1, decay)
    post_grad = _logistic(beta * (stream.post - base)) * disc / n
    grad = np.empty(stream.probs.size)
    grad[stream.t_start :] = post_grad
    grad[: stream.t_start] = -kernels.neumaier_sum(post_grad) / stream.t_start
    return grad


@dataclass(frozen=True)
class Transition:
    source: int
    target: int
    onset: int


@dataclass(frozen=True)
class RegimeTransitionLog:
    """K regime posterior streams on a shared grid plus logged switch events.

    ``posteriors`` has shape ``(K, T+1)``; column ``t`` is a point of the
    probability simplex.
    """

    posteriors: np.ndarray
    transitions: tuple[Transition, ...] = field(default_factory=tuple)

    def __post_init__(self):
        p = np.array(self.posteriors, dtype=np.float64, copy=True)
        if p.ndim != 2 or p.shape[0] < 2 or p.shape[1] < 2:
            raise InvalidRegimeLog("posteriors must have shape (K, T+1) with K >= 2")
        if not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0:
            raise ProbabilityRangeError("regime posteriors must lie in [0, 1]")
        worst = np.max(np.abs(p.sum(axis=0) - 1.0))
        if worst > 1e-9:
            raise InvalidRegimeLog(f"regime posteriors must sum to 1 at every t (off by {worst:.3g})")
        k, length = p.shape
        events = tuple(Transition(*map(int, e)) if not isinstance(e, Transition) else e
                       for e in self.transitions)
        for e in events:
            if not (0 <= e.source < k and 0 <= e.target < k):
                raise InvalidRegimeLog(f"regime index out of range [0, {k}) in {e}")
            if e.source == e.target:
                raise InvalidRegimeLog(f"self-transition {e} is not a regime switch")
            if not 0 <= e.onset < length:
                raise InvalidRegimeLog(f"onset {e.onset} outside the grid [0, {length - 1}]")
        if any(b.onset <= a.onset for a, b in zip(events, events[1:])):
            raise InvalidRegimeLog("transition onsets must be strictly increasing")
        object.__setattr__(self, "posteriors", _readonly(p))
        object.__setattr__(self, "transitions", events)

    @property
    def num_regimes(self) -> int:
        return self.posteriors.shape[0]

    @property
    def horizon(self) -> int:
        return self.posteriors.shape[1] - 1

    def windows(self):
        """Yield ``(transition, stream)`` with the per-event scoring window."""
        events = self.transitions
        for idx, e in enumerate(events):
            end = events[idx + 1].onset - 1 if idx + 1 < len(events) else self.horizon
            if e.onset == 0 or end <= e.onset:
                raise WindowTooShort(
                    f"transition {e.source}->{e.target} at t={e.onset} leaves no room "
                    f"for a pre-onset or post-onset window (window ends at {end})"
                )
            yield e, ProbabilityStream(self.posteriors[e.target, : end + 1], e.onset)


def hed_matrix(log: RegimeTransitionLog, decay) -> np.ndarray:
    """K x K matrix of mean per-transition scores.

    Entry ``(i, j)`` averages the score of the regime-``j`` stream over every
    logged ``i -> j`` switch, each scored on the window that ends just before
    the next switch. Unobserved pairs and the diagonal are NaN.
    """
    if not log.transitions:
        raise NoTransitions("the regime log contains no transitions")
    k = log.num_regimes
    sums: dict[tuple[int, int], list[float]] = {}
    for e, s in log.windows():
        sums.setdefault((e.source, e.target), []).append(hed_score(s, decay).score)
    out = np.full((k, k), np.nan)
    for (i, j), scores in sums.items():
        out[i, j] = kernels.neumaier_sum(np.array(scores)) / len(scores)
    return out


def first_crossing(stream: ProbabilityStream, threshold: float) -> int | None:
    """First index ``t >= t_start`` with ``probs[t] >= threshold``, or None."""
    hits = np.flatnonzero(stream.post >= threshold)
    return int(hits[0]) + stream.t_start if hits.size else None
