"""Seeded single-onset scenarios with paired detector streams."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Mapping

import numpy as np

from hedscore.core import ProbabilityStream
from hedscore.detectors import (
    FsdeParams,
    SldsParams,
    ewma_detector,
    fsde_euler,
    regime_stream,
    slds_forward,
)
from hedscore.errors import InvalidParameter

DETECTORS = ("slds", "ewma")


@dataclass(frozen=True)
class ScenarioSpec:
    """Nominal regime before ``onset``, anomalous regime from ``onset`` on.

    Observations are ``y_t = Z_{t+1} + e_t``: ``Z`` is the fSDE latent state
    reverting toward the current regime mean, ``e_t`` is white emission noise
    with the current regime variance.
    """

    horizon: int = 200
    onset: int = 50
    nominal_mean: float = 0.0
    nominal_var: float = 1.0
    anomalous_mean: float = 3.0
    anomalous_var: float = 1.0
    hurst: float = 0.7
    seed: int = 0
    detectors: tuple[str, ...] = DETECTORS
    latent_scale: float = 0.5
    reversion_rate: float = 1.0
    switch_prob: float = 0.1
    ewma_half_life: float = 80.0
    ewma_scale: float = 0.5
    ewma_warmup: int = 20

    def __post_init__(self):
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if not 0 < self.onset < self.horizon:
            raise InvalidParameter(
                f"onset must satisfy 0 < onset < horizon, got onset={self.onset}, horizon={self.horizon}"
            )
        if not (self.nominal_var > 0.0 and self.anomalous_var > 0.0):
            raise InvalidParameter("emission variances must be positive")
        if not 0.0 < self.hurst < 1.0:
            raise InvalidParameter(f"hurst must lie in (0, 1), got {self.hurst!r}")
        unknown = [d for d in self.detectors if d not in DETECTORS]
        if unknown:
            raise InvalidParameter(
                f"unknown detector(s) {unknown}; valid names are {list(DETECTORS)}"
            )
        if not 0.0 < self.reversion_rate <= 1.0:
            raise InvalidParameter("reversion_rate must lie in (0, 1]")
        if not 0.0 < self.switch_prob < 1.0:
            raise InvalidParameter("switch_prob must lie in (0, 1)")
        if not 0 < self.ewma_warmup <= self.onset:
            raise InvalidParameter("ewma_warmup must lie in [1, onset]")
        if self.latent_scale < 0.0 or self.ewma_half_life <= 0.0 or self.ewma_scale <= 0.0:
            raise InvalidParameter("latent_scale must be >= 0; ewma settings must be positive")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["detectors"] = list(self.detectors)
        return d


@dataclass(frozen=True)
class Scenario:
    spec: ScenarioSpec
    observations: np.ndarray
    regimes: np.ndarray
    latent: np.ndarray
    streams: Mapping[str, ProbabilityStream] = field(default_factory=dict)

    @property
    def onset(self) -> int:
        return self.spec.onset


def latent_variance(spec: ScenarioSpec) -> float:
    # stationary variance of the AR(1) form under white driving noise
    phi = 1.0 - spec.reversion_rate
    return spec.latent_scale**2 / (1.0 - phi * phi)


def slds_params(spec: ScenarioSpec) -> SldsParams:
    p = spec.switch_prob
    lv = latent_variance(spec)
    return SldsParams(
        transition=[[1.0 - p, p], [p, 1.0 - p]],
        means=[spec.nominal_mean, spec.anomalous_mean],
        variances=[spec.nominal_var + lv, spec.anomalous_var + lv],
        initial=[0.5, 0.5],
    )


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    n = spec.horizon + 1
    regimes = (np.arange(n) >= spec.onset).astype(np.int64)
    latent_ss, noise_ss = np.random.SeedSequence(spec.seed).spawn(2)
    fsde = FsdeParams(
        rate=spec.reversion_rate,
        levels=(spec.nominal_mean, spec.anomalous_mean),
        sigma=spec.latent_scale,
        hurst=spec.hurst,
        mu0=spec.nominal_mean,
        var0=latent_variance(spec),
    )
    z = fsde_euler(fsde, regimes, latent_ss)
    sd = np.where(regimes == 0, math.sqrt(spec.nominal_var), math.sqrt(spec.anomalous_var))
    y = z[1:] + sd * np.random.default_rng(noise_ss).standard_normal(n)

    streams = {}
    for name in spec.detectors:
        if name == "slds":
            streams[name] = regime_stream(slds_forward(y, slds_params(spec)), spec.onset)
        elif name == "ewma":
            streams[name] = ProbabilityStream(
                ewma_detector(y, spec.ewma_half_life, spec.ewma_scale, spec.ewma_warmup), spec.onset
            )
    for a in (y, regimes, z):
        a.setflags(write=False)
    return Scenario(spec=spec, observations=y, regimes=regimes, latent=z, streams=streams)
