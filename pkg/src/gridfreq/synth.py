"""Seedable synthetic frequency and exogenous-feature generator.

The frequency model is ``nominal + dispatch steps + mean-reverting noise``.
Every hour starts with a step whose size is drawn around ``jump_profile[hour]``
and which decays exponentially. The noise is a discrete linear relaxation
``x[t+1] = (1 - rate) * x[t] + amplitude * xi[t]`` with standard Gaussian
shocks from a Philox (counter-based) generator.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .timebase import SECONDS_PER_DAY, SECONDS_PER_HOUR, FrequencySeries, RawFeature

# 2021-01-04 00:00:00 UTC, a Monday: days 5 and 6 of every week are Sat/Sun.
DEFAULT_START_EPOCH = 1609718400


def default_jump_profile() -> tuple[float, ...]:
    """24 hourly step sizes with magnitudes spread over 20-60 mHz."""
    out = []
    for h in range(24):
        magnitude = 0.020 + 0.040 * ((7 * h) % 24) / 23
        out.append(round(magnitude if h % 2 == 0 else -magnitude, 6))
    return tuple(out)


@dataclass(frozen=True)
class SynthSpec:
    days: int = 90
    nominal_hz: float = 50.0
    jump_profile: tuple[float, ...] = field(default_factory=default_jump_profile)
    decay_time: float = 300.0
    noise_reversion_rate: float = 1.0 / 1800.0
    noise_amplitude: float = 0.030 * np.sqrt(2.0 / 1800.0)
    weekend_scale: float = 0.3
    # relative std of the per-(day, hour) random scaling of each step
    jump_jitter: float = 1.0
    seed: int = 0
    start_epoch: int = DEFAULT_START_EPOCH

    def __post_init__(self):
        if self.days < 1:
            raise ValueError("days must be >= 1")
        if len(self.jump_profile) != 24:
            raise ValueError("jump_profile needs 24 entries")
        if self.decay_time <= 0 or self.noise_reversion_rate <= 0:
            raise ValueError("decay_time and noise_reversion_rate must be positive")
        if self.noise_amplitude < 0 or self.jump_jitter < 0:
            raise ValueError("noise_amplitude and jump_jitter must be non-negative")
        if self.start_epoch % SECONDS_PER_DAY:
            raise ValueError("start_epoch must fall on midnight UTC")

    @property
    def stationary_std(self) -> float:
        r = self.noise_reversion_rate
        return self.noise_amplitude / np.sqrt(2 * r - r * r)


def _streams(spec: SynthSpec):
    # independent child streams keep jumps, noise and feature noise decoupled
    seq = np.random.SeedSequence(spec.seed)
    return [np.random.Generator(np.random.Philox(s)) for s in seq.spawn(3)]


def realized_jumps(spec: SynthSpec) -> np.ndarray:
    """Step size in Hz for every (day, hour) of the record, shape ``(days, 24)``."""
    jump_rng = _streams(spec)[0]
    profile = np.asarray(spec.jump_profile, dtype=np.float64)
    day_scale = np.where(np.arange(spec.days) % 7 >= 5, spec.weekend_scale, 1.0)
    jitter = 1.0 + spec.jump_jitter * jump_rng.standard_normal((spec.days, 24))
    return day_scale[:, None] * profile[None, :] * jitter


def deterministic_component(spec: SynthSpec) -> np.ndarray:
    """Dispatch-step part of the signal (Hz deviation), one value per second."""
    steps = realized_jumps(spec).reshape(-1)
    decay = np.exp(-np.arange(SECONDS_PER_HOUR) / spec.decay_time)
    return (steps[:, None] * decay[None, :]).reshape(-1)


def noise_component(spec: SynthSpec) -> np.ndarray:
    n = spec.days * SECONDS_PER_DAY
    noise_rng = _streams(spec)[1]
    shocks = noise_rng.standard_normal(n + 1)
    if spec.noise_amplitude == 0:
        return np.zeros(n)
    keep = 1.0 - spec.noise_reversion_rate
    x0 = spec.stationary_std * shocks[0]
    out, _ = lfilter([spec.noise_amplitude], [1.0, -keep], shocks[1:], zi=[keep * x0])
    return out


def generate(spec: SynthSpec) -> FrequencySeries:
    values = spec.nominal_hz + deterministic_component(spec) + noise_component(spec)
    return FrequencySeries(spec.start_epoch, values, np.zeros(values.size, dtype=bool), spec.nominal_hz)


def generate_feature(
    spec: SynthSpec,
    coupling: float = 1.0,
    noise_std: float = 5.0,
    resolution: int = 600,
    base_level: float = 500.0,
    gain: float = 1000.0,
) -> RawFeature:
    """Generation-like series whose hourly level tracks the realized dispatch steps.

    Each sample equals ``base_level + coupling * gain * step + noise_std * N(0, 1)``,
    where ``step`` is the realized step (Hz) of the hour containing the sample.
    """
    if SECONDS_PER_HOUR % resolution:
        raise ValueError("resolution must divide 3600 s")
    per_hour = SECONDS_PER_HOUR // resolution
    steps = np.repeat(realized_jumps(spec).reshape(-1), per_hour)
    noise = _streams(spec)[2].standard_normal(steps.size)
    values = base_level + coupling * gain * steps + noise_std * noise
    return RawFeature(spec.start_epoch, resolution, values)
