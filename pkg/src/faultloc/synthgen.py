"""Synthetic stand-in for two-field fault measurements over 8 angular sectors.

Each signal is a slow carrier, a damped impulse train whose phase encodes the
sector centre angle, a field-specific chirp and white noise. Classes are
distinct at zero noise and overlap progressively as ``noise_std`` grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import NUM_CLASSES, FieldId, RawSample

SECTOR_DEG = 360.0 / NUM_CLASSES

_FIELD_CODE = {FieldId.FIELD_I: 0, FieldId.FIELD_II: 1}

# per-field signal shape: (carrier amplitude, chirp start Hz, chirp rate Hz/s, impulse gain)
_FIELD_SHAPE = {
    FieldId.FIELD_I: (0.6, 4.0, 18.0, 1.0),
    FieldId.FIELD_II: (0.4, 6.0, 36.0, 1.5),
}

IMPULSE_PERIOD = 0.25  # seconds; the record spans one second
RESONANCE_HZ = 12.0
DECAY_S = 0.06


@dataclass(frozen=True)
class SynthConfig:
    samples_per_class_per_field: int = 10
    signal_len: int = 4096
    noise_std: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.samples_per_class_per_field < 1:
            raise ValueError("samples_per_class_per_field must be >= 1")
        if self.signal_len < 64:
            raise ValueError("signal_len must be >= 64")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")


def sector_center(label: int) -> float:
    """Centre angle of a fault sector in degrees."""
    return (label + 0.5) * SECTOR_DEG


def clean_signal(label: int, field_id: FieldId, signal_len: int) -> np.ndarray:
    if not 0 <= label < NUM_CLASSES:
        raise ValueError(f"label {label} outside [0, {NUM_CLASSES - 1}]")
    field_id = FieldId(field_id)
    carrier_amp, f0, rate, gain = _FIELD_SHAPE[field_id]
    t = np.arange(signal_len) / signal_len

    carrier = carrier_amp * np.sin(2 * np.pi * 2.0 * t)
    chirp = 0.5 * np.sin(2 * np.pi * (f0 * t + 0.5 * rate * t ** 2))

    offset = sector_center(label) / 360.0 * IMPULSE_PERIOD
    onsets = offset + IMPULSE_PERIOD * np.arange(int(np.ceil(1.0 / IMPULSE_PERIOD)) + 1)
    lag = t[:, None] - onsets[None, :]
    ring = np.where(lag >= 0,
                    np.exp(-np.clip(lag, 0, None) / DECAY_S) * np.sin(2 * np.pi * RESONANCE_HZ * lag),
                    0.0)
    impulses = gain * ring.sum(axis=1)
    return carrier + chirp + impulses


def sample_rng(seed: int, label: int, field_id: FieldId, sample_index: int) -> np.random.Generator:
    """Independent stream per sample, so generation order never matters."""
    ss = np.random.SeedSequence([seed, label, _FIELD_CODE[FieldId(field_id)], sample_index])
    return np.random.default_rng(ss)


def generate_class_signal(label: int, field_id: FieldId, sample_index: int,
                          cfg: SynthConfig) -> RawSample:
    values = clean_signal(label, field_id, cfg.signal_len)
    if cfg.noise_std > 0:
        rng = sample_rng(cfg.seed, label, field_id, sample_index)
        values = values + rng.normal(0.0, cfg.noise_std, size=cfg.signal_len)
    return RawSample(label, FieldId(field_id), values)


def generate_dataset(cfg: SynthConfig | None = None) -> list[RawSample]:
    """All samples ordered by class, then field, then index."""
    cfg = cfg or SynthConfig()
    return [
        generate_class_signal(label, field_id, i, cfg)
        for label in range(NUM_CLASSES)
        for field_id in (FieldId.FIELD_I, FieldId.FIELD_II)
        for i in range(cfg.samples_per_class_per_field)
    ]
