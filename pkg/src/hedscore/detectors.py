"""Reference detectors that turn observations into posterior streams.

* :func:`fbm_sample` draws fractional Gaussian noise by circulant embedding.
* :func:`fsde_euler` integrates a regime-switching mean-reverting latent
  state driven by that noise.
* :func:`slds_forward` is the forward filter of a switching model with
  scalar Gaussian emissions.
* :func:`ewma_detector` is a deliberately slow smoothed-deviation baseline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from hedscore._accel import kernels
from hedscore.core import ProbabilityStream, compute_baseline
from hedscore.errors import DelayExceedsWindow, EmbeddingFailure, InvalidParameter, ZeroLikelihood

SeedLike = Union[int, np.random.SeedSequence]

# open-interval guard for the logistic output
_P_EPS = 1e-12


@dataclass(frozen=True)
class FbmSpec:
    hurst: float
    length: int
    scale: float = 1.0
    seed: SeedLike = 0

    def __post_init__(self):
        if not 0.0 < self.hurst < 1.0:
            raise InvalidParameter(f"hurst must lie in (0, 1), got {self.hurst!r}")
        if int(self.length) != self.length or self.length < 1:
            raise InvalidParameter(f"length must be a positive integer, got {self.length!r}")
        if not self.scale > 0.0:
            raise InvalidParameter(f"scale must be positive, got {self.scale!r}")


@dataclass(frozen=True)
class FsdeParams:
    """Linear mean reversion toward a per-regime level, constant diffusion."""

    rate: float
    levels: tuple[float, ...]
    sigma: float
    hurst: float
    mu0: float = 0.0
    var0: float = 0.0

    def __post_init__(self):
        if not self.rate >= 0.0:
            raise InvalidParameter(f"reversion rate must be nonnegative, got {self.rate!r}")
        if not self.sigma >= 0.0:
            raise InvalidParameter(f"diffusion must be nonnegative, got {self.sigma!r}")
        if not self.var0 >= 0.0:
            raise InvalidParameter(f"initial variance must be nonnegative, got {self.var0!r}")
        if not 0.0 < self.hurst < 1.0:
            raise InvalidParameter(f"hurst must lie in (0, 1), got {self.hurst!r}")
        object.__setattr__(self, "levels", tuple(float(x) for x in self.levels))


@dataclass(frozen=True)
class SldsParams:
    transition: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        pi = np.array(self.transition, dtype=np.float64)
        mu = np.array(self.means, dtype=np.float64).ravel()
        var = np.array(self.variances, dtype=np.float64).ravel()
        init = np.array(self.initial, dtype=np.float64).ravel()
        k = mu.size
        if pi.shape != (k, k) or var.size != k or init.size != k or k < 2:
            raise InvalidParameter("transition must be KxK and means/variances/initial length K >= 2")
        if pi.min() < 0.0 or np.max(np.abs(pi.sum(axis=1) - 1.0)) > 1e-12:
            raise InvalidParameter("transition rows must be probability vectors (sum to 1 within 1e-12)")
        if not np.all(var > 0.0):
            raise InvalidParameter("emission variances must be positive")
        if init.min() < 0.0 or abs(init.sum() - 1.0) > 1e-12:
            raise InvalidParameter("initial occupancy must lie on the probability simplex")
        for name, arr in (("transition", pi), ("means", mu), ("variances", var), ("initial", init)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_regimes(self) -> int:
        return self.means.size


def fgn_autocovariance(hurst: float, lags, scale: float = 1.0) -> np.ndarray:
    k = np.abs(np.asarray(lags, dtype=np.float64))
    h2 = 2.0 * hurst
    return 0.5 * scale**2 * (np.abs(k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)


def _circulant(gamma: np.ndarray, rng: np.random.Generator) -> Optional[np.ndarray]:
    n = gamma.size - 1
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    if eig.min() < -1e-10 * max(eig.max(), 1.0):
        return None
    m = row.size
    w = np.sqrt(np.maximum(eig, 0.0) / m) * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    return np.fft.fft(w).real[:n]


def _cholesky(gamma: np.ndarray, rng: np.random.Generator) -> Optional[np.ndarray]:
    n = gamma.size - 1
    try:
        low = scipy.linalg.cholesky(scipy.linalg.toeplitz(gamma[:n]), lower=True)
    except np.linalg.LinAlgError:
        return None
    return low @ rng.standard_normal(n)


def fbm_sample(
    spec: FbmSpec, method: Literal["auto", "circulant", "cholesky"] = "auto"
) -> np.ndarray:
    """Fractional Gaussian noise (unit-step fBm increments) of length ``spec.length``.

    Circulant embedding is tried first; if the embedding has negative
    eigenvalues the Toeplitz covariance is factored instead.
    """
    rng = np.random.default_rng(spec.seed)
    gamma = fgn_autocovariance(spec.hurst, np.arange(spec.length + 1), spec.scale)
    order = {"auto": (_circulant, _cholesky), "circulant": (_circulant,), "cholesky": (_cholesky,)}
    if method not in order:
        raise InvalidParameter(f"unknown method {method!r}")
    for fn in order[method]:
        x = fn(gamma, rng)
        if x is not None:
            return x
    raise EmbeddingFailure(
        f"could not factor the fGn covariance (H={spec.hurst}, N={spec.length})"
    )


def fsde_euler(params: FsdeParams, regime_path: Sequence[int], seed: SeedLike) -> np.ndarray:
    """Euler path ``Z_0..Z_N`` with unit step.

    ``Z_{t+1} = Z_t + rate * (levels[r_t] - Z_t) + sigma * xi_t`` where ``xi`` is
    fractional Gaussian noise with the configured Hurst exponent.
    """
    path = np.asarray(regime_path, dtype=np.int64)
    if path.ndim != 1 or path.size == 0:
        raise InvalidParameter("regime_path must be a non-empty 1-d sequence")
    levels = np.asarray(params.levels)
    if path.min() < 0 or path.max() >= levels.size:
        raise InvalidParameter(f"regime indices must lie in [0, {levels.size})")
    init_ss, noise_ss = np.random.SeedSequence(seed).spawn(2) if isinstance(seed, int) else seed.spawn(2)
    z0 = params.mu0 + math.sqrt(params.var0) * np.random.default_rng(init_ss).standard_normal()
    n = path.size
    if params.sigma > 0.0:
        xi = fbm_sample(FbmSpec(params.hurst, n, 1.0, noise_ss))
        drive = params.rate * levels[path] + params.sigma * xi
    else:
        drive = params.rate * levels[path]
    return kernels.linear_recursion(np.ascontiguousarray(drive), 1.0 - params.rate, float(z0))


def slds_forward(observations: Sequence[float], params: SldsParams) -> np.ndarray:
    """Filtered regime posteriors, shape ``(N, K)``.

    ``params.initial`` is the prior for the first observation; later steps
    predict through ``params.transition`` and correct with the Gaussian
    emission likelihoods, all in log space.
    """
    y = np.ascontiguousarray(observations, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise InvalidParameter("observations must be a non-empty 1-d sequence")
    with np.errstate(divide="ignore"):
        log_trans = np.log(params.transition)
        log_init = np.log(params.initial)
    post, status = kernels.slds_filter(
        y, np.ascontiguousarray(log_trans), np.ascontiguousarray(params.means),
        np.ascontiguousarray(params.variances), np.ascontiguousarray(log_init),
    )
    if status >= 0:
        raise ZeroLikelihood(f"every regime likelihood vanished at t={int(status)}")
    return np.clip(post, 0.0, 1.0)


def regime_stream(posteriors: np.ndarray, t_start: int, regime: int = 1) -> ProbabilityStream:
    return ProbabilityStream(posteriors[:, regime], t_start)


def ewma_detector(
    observations: Sequence[float],
    half_life_steps: float,
    logistic_scale: float,
    warmup: Optional[int] = None,
) -> np.ndarray:
    """Smoothed squared-deviation alarm squashed through a logistic.

    Deviations are taken from the mean of the first ``warmup`` observations
    (default ``ceil(4 * half_life_steps)``, capped at the series length).
    ``s_t`` is their EWMA and ``P_t = logistic((s_t - mean(s)) / logistic_scale)``
    with ``mean(s)`` the grand mean over the whole record.
    """
    if not half_life_steps > 0.0 or not logistic_scale > 0.0:
        raise InvalidParameter("half_life_steps and logistic_scale must be positive")
    x = np.ascontiguousarray(observations, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidParameter("observations must be a non-empty 1-d sequence")
    w = math.ceil(4.0 * half_life_steps) if warmup is None else int(warmup)
    w = min(max(w, 1), x.size)
    level = kernels.neumaier_sum(x[:w]) / w
    dev = (x - level) ** 2
    alpha = -math.expm1(-math.log(2.0) / half_life_steps)
    s = kernels.ewma(dev, alpha, kernels.neumaier_sum(dev[:w]) / w)
    z = (s - kernels.neumaier_sum(s) / s.size) / logistic_scale
    p = 0.5 * (1.0 + np.tanh(0.5 * z))
    return np.clip(p, _P_EPS, 1.0 - _P_EPS)


def delay_stream(stream: ProbabilityStream, delta: int) -> ProbabilityStream:
    """Shift the post-onset profile right by ``delta`` steps.

    Vacated steps hold the pre-onset mean; values pushed past ``T`` are
    dropped.
    """
    if int(delta) != delta or delta < 0:
        raise InvalidParameter(f"delta must be a nonnegative integer, got {delta!r}")
    delta = int(delta)
    if delta > stream.horizon - stream.t_start:
        raise DelayExceedsWindow(
            f"delay {delta} exceeds the post-onset window T - t_start = {stream.horizon - stream.t_start}"
        )
    if delta == 0:
        return stream
    post = stream.post
    fill = np.full(delta, compute_baseline(stream))
    return stream.with_post(np.concatenate([fill, post[: post.size - delta]]))
