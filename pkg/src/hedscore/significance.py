"""Paired moving-block bootstrap comparison of two detectors.

Only the post-onset segments are resampled, and both detectors receive the
same block starts in every iteration. The pre-onset windows (and therefore
both baselines) stay fixed.

Each iteration ``i`` draws its block starts from a Philox generator keyed by
``(i + 1, seed)``, so results do not depend on how iterations are scheduled.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from hedscore._accel import kernels
from hedscore.core import ProbabilityStream, compute_baseline, discounts, hed_score
from hedscore.errors import BlockTooLong, InvalidBootstrapConfig, MismatchedWindows

_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class BootstrapConfig:
    seed: int
    num_resamples: int = 2000
    block_len: Optional[int] = None  # None: floor(T ** (1/3)) capped at the post-onset length
    confidence_level: float = 0.95

    def __post_init__(self):
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < _SEED_LIMIT:
            raise InvalidBootstrapConfig(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if int(self.num_resamples) != self.num_resamples or self.num_resamples < 1:
            raise InvalidBootstrapConfig(f"num_resamples must be >= 1, got {self.num_resamples!r}")
        if self.block_len is not None and (int(self.block_len) != self.block_len or self.block_len < 1):
            raise InvalidBootstrapConfig(f"block_len must be >= 1, got {self.block_len!r}")
        if not 0.0 < self.confidence_level < 1.0:
            raise InvalidBootstrapConfig(
                f"confidence_level must lie in (0, 1), got {self.confidence_level!r}"
            )


@dataclass(frozen=True)
class BootstrapResult:
    observed_diff: float
    resampled_diffs: np.ndarray
    p_value: float
    ci_low: float
    ci_high: float
    block_len: int
    seed: int
    confidence_level: float

    @property
    def num_resamples(self) -> int:
        return self.resampled_diffs.size

    def to_dict(self) -> dict:
        return {
            "observed_diff": self.observed_diff,
            "p_value": self.p_value,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "ci_method": "percentile",
            "confidence_level": self.confidence_level,
            "num_resamples": self.num_resamples,
            "block_len": self.block_len,
            "seed": self.seed,
        }


def default_block_len(horizon: int) -> int:
    """``floor(T ** (1/3))``, at least 1, computed without float cube-root error."""
    horizon = int(horizon)
    if horizon < 1:
        return 1
    b = int(round(horizon ** (1.0 / 3.0)))
    while b > 1 and b**3 > horizon:
        b -= 1
    while (b + 1) ** 3 <= horizon:
        b += 1
    return max(b, 1)


def derive_seed(seed: int, iteration: int) -> int:
    """Key of the generator used by bootstrap iteration ``iteration``."""
    return ((iteration + 1) << 64) | int(seed)


def _generator(key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(key)))


def _draw_starts(key: int, length: int, block_len: int) -> np.ndarray:
    n_blocks = -(-length // block_len)
    return _generator(key).integers(0, length - block_len + 1, size=n_blocks, dtype=np.int64)


def block_resample(stream: ProbabilityStream, block_len: int, rng_seed: int) -> ProbabilityStream:
    """Moving-block resample of the post-onset segment.

    Overlapping length-``block_len`` blocks are drawn uniformly, concatenated,
    and truncated to the original length. The pre-onset part is copied.
    """
    post = stream.post
    block_len = int(block_len)
    if block_len < 1:
        raise InvalidBootstrapConfig("block length must be >= 1")
    if block_len > post.size:
        raise BlockTooLong(
            f"block length {block_len} exceeds the post-onset segment length {post.size}"
        )
    starts = _draw_starts(rng_seed, post.size, block_len)
    idx = (starts[:, None] + np.arange(block_len)).ravel()[: post.size]
    return stream.with_post(post[idx])


def _check_pair(a: ProbabilityStream, b: ProbabilityStream):
    if a.t_start != b.t_start or a.horizon != b.horizon:
        raise MismatchedWindows(
            f"streams must share onset and horizon: (t_start={a.t_start}, T={a.horizon}) "
            f"vs (t_start={b.t_start}, T={b.horizon})"
        )


def resolve_block_len(stream: ProbabilityStream, cfg: BootstrapConfig) -> int:
    length = stream.post.size
    if cfg.block_len is None:
        return min(default_block_len(stream.horizon), length)
    if cfg.block_len > stream.horizon + 1:
        raise InvalidBootstrapConfig(
            f"block_len {cfg.block_len} exceeds the stream length {stream.horizon + 1}"
        )
    if cfg.block_len > length:
        raise BlockTooLong(
            f"block length {cfg.block_len} exceeds the post-onset segment length {length}"
        )
    return int(cfg.block_len)


def bootstrap_compare(
    stream_a: ProbabilityStream,
    stream_b: ProbabilityStream,
    decay,
    cfg: BootstrapConfig,
    workers: int = 1,
) -> BootstrapResult:
    """One-sided test that detector A scores higher than detector B.

    ``p_value`` is the fraction of resampled differences that are at least
    the observed difference; the interval is the percentile interval of the
    resampled differences.
    """
    _check_pair(stream_a, stream_b)
    blen = resolve_block_len(stream_a, cfg)
    observed = hed_score(stream_a, decay).score - hed_score(stream_b, decay).score

    length = stream_a.post.size
    norm = float(stream_a.horizon - stream_a.t_start)
    disc = discounts(length, decay)
    base_a = compute_baseline(stream_a)
    base_b = compute_baseline(stream_b)
    post_a = np.ascontiguousarray(stream_a.post)
    post_b = np.ascontiguousarray(stream_b.post)

    def run(lo: int, hi: int) -> np.ndarray:
        starts = np.stack([_draw_starts(derive_seed(cfg.seed, i), length, blen) for i in range(lo, hi)])
        sa = kernels.block_hed_batch(post_a, starts, blen, base_a, disc, norm)
        sb = kernels.block_hed_batch(post_b, starts, blen, base_b, disc, norm)
        return sa - sb

    n = cfg.num_resamples
    workers = max(1, int(workers))
    if workers == 1:
        diffs = run(0, n)
    else:
        edges = np.linspace(0, n, workers + 1).astype(int)
        spans = [(lo, hi) for lo, hi in zip(edges, edges[1:]) if hi > lo]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            diffs = np.concatenate(list(pool.map(lambda s: run(*s), spans)))

    p_value = np.count_nonzero(diffs >= observed) / n
    alpha = 1.0 - cfg.confidence_level
    lo, hi = np.quantile(diffs, [alpha / 2.0, 1.0 - alpha / 2.0])
    diffs.setflags(write=False)
    return BootstrapResult(
        observed_diff=float(observed),
        resampled_diffs=diffs,
        p_value=float(p_value),
        ci_low=float(lo),
        ci_high=float(hi),
        block_len=blen,
        seed=int(cfg.seed),
        confidence_level=cfg.confidence_level,
    )


__all__ = [
    "BootstrapConfig",
    "BootstrapResult",
    "block_resample",
    "bootstrap_compare",
    "default_block_len",
    "derive_seed",
    "resolve_block_len",
]

