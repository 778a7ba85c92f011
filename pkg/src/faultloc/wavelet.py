"""Multilevel discrete wavelet transform and coefficient thresholding.

Boundary handling is half-sample symmetric extension. One analysis level maps
a length-``n`` signal to ``(n + F - 1) // 2`` approximation and detail
coefficients (``F`` = filter length); synthesis inverts it exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Filter(enum.Enum):
    HAAR = "haar"
    DB4 = "db4"


_SQRT_HALF = np.sqrt(0.5)

# reconstruction lowpass filters; the other three follow by the QMF relations
_REC_LO = {
    Filter.HAAR: np.array([_SQRT_HALF, _SQRT_HALF]),
    Filter.DB4: np.array([
        0.2303778133088965, 0.7148465705529157, 0.6308807679298589,
        -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
        0.0328830116668852, -0.010597401785069032,
    ]),
}


def filter_bank(filter_id: Filter):
    """Return ``(dec_lo, dec_hi, rec_lo, rec_hi)`` for ``filter_id``."""
    rec_lo = _REC_LO[Filter(filter_id)]
    dec_lo = rec_lo[::-1].copy()
    sign = (-1.0) ** (np.arange(rec_lo.size) + 1)
    dec_hi = sign * rec_lo
    rec_hi = dec_hi[::-1].copy()
    return dec_lo, dec_hi, rec_lo, rec_hi


@dataclass
class WaveletCoeffs:
    """Coefficient pyramid. ``details[0]`` is the coarsest level."""

    approx: np.ndarray
    details: list
    filter_id: Filter
    original_len: int

    @property
    def levels(self) -> int:
        return len(self.details)

    def level_lengths(self) -> list[int]:
        return level_lengths(self.original_len, self.filter_id, self.levels)

    def validate(self) -> None:
        lengths = self.level_lengths()
        expected = [lengths[-1]] + lengths[:0:-1]
        got = [self.approx.size] + [d.size for d in self.details]
        if got != expected:
            raise ValueError(f"coefficient sizes {got} inconsistent with original_len "
                             f"{self.original_len}: expected {expected}")

    def map_details(self, fn) -> "WaveletCoeffs":
        return WaveletCoeffs(self.approx.copy(), [fn(d) for d in self.details],
                             self.filter_id, self.original_len)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.approx] + list(self.details))


@dataclass(frozen=True)
class ThresholdPlan:
    """Threshold rule plus the hard/soft mixing weights.

    ``fixed_lambda=None`` selects the universal threshold.
    """

    w_hard: float = 0.5
    w_soft: float = 0.5
    fixed_lambda: float | None = None

    def __post_init__(self):
        if self.w_hard < 0 or self.w_soft < 0:
            raise ValueError("merge weights must be non-negative")
        if abs(self.w_hard + self.w_soft - 1.0) > 1e-12:
            raise ValueError("merge weights must sum to 1")
        if self.fixed_lambda is not None and self.fixed_lambda < 0:
            raise ValueError("threshold must be non-negative")


def level_lengths(n: int, filter_id: Filter, levels: int) -> list[int]:
    """Signal length entering each analysis level, plus the final coefficient length."""
    flen = _REC_LO[Filter(filter_id)].size
    lengths = [n]
    for _ in range(levels):
        lengths.append((lengths[-1] + flen - 1) // 2)
    return lengths


def _analyze(x, dec_lo, dec_hi):
    flen = dec_lo.size
    n_out = (x.size + flen - 1) // 2
    ext = np.pad(x, flen - 1, mode="symmetric")
    lo = np.convolve(ext, dec_lo)[flen:flen + 2 * n_out:2]
    hi = np.convolve(ext, dec_hi)[flen:flen + 2 * n_out:2]
    return lo, hi


def _synthesize(lo, hi, rec_lo, rec_hi, out_len):
    flen = rec_lo.size
    up_lo = np.zeros(2 * lo.size)
    up_hi = np.zeros(2 * hi.size)
    up_lo[::2] = lo
    up_hi[::2] = hi
    full = np.convolve(up_lo, rec_lo) + np.convolve(up_hi, rec_hi)
    return full[flen - 2:flen - 2 + out_len]


def dwt(signal, filter_id=Filter.DB4, levels: int = 4) -> WaveletCoeffs:
    filter_id = Filter(filter_id)
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("dwt expects a 1-D signal")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite values")
    dec_lo, dec_hi, _, _ = filter_bank(filter_id)
    lengths = level_lengths(x.size, filter_id, levels)
    if min(lengths[:-1]) < dec_lo.size:
        raise ValueError(f"signal of length {x.size} too short for {levels} levels of "
                         f"{filter_id.value} (needs >= {dec_lo.size} samples at every level)")
    details = []
    approx = x
    for _ in range(levels):
        approx, detail = _analyze(approx, dec_lo, dec_hi)
        details.append(detail)
    return WaveletCoeffs(approx, details[::-1], filter_id, x.size)


def idwt(coeffs: WaveletCoeffs) -> np.ndarray:
    coeffs.validate()
    _, _, rec_lo, rec_hi = filter_bank(coeffs.filter_id)
    lengths = coeffs.level_lengths()
    approx = np.asarray(coeffs.approx, dtype=np.float64)
    for level, detail in enumerate(coeffs.details):
        target = lengths[coeffs.levels - 1 - level]
        approx = _synthesize(approx, np.asarray(detail, dtype=np.float64), rec_lo, rec_hi, target)
    return approx


def soft(w, lam: float) -> np.ndarray:
    if lam < 0:
        raise ValueError("threshold must be non-negative")
    w = np.asarray(w, dtype=np.float64)
    return np.where(np.abs(w) >= lam, np.sign(w) * (np.abs(w) - lam), 0.0)


def hard(w, lam: float) -> np.ndarray:
    if lam < 0:
        raise ValueError("threshold must be non-negative")
    w = np.asarray(w, dtype=np.float64)
    return np.where(np.abs(w) >= lam, w, 0.0)


def soft_threshold(coeffs: WaveletCoeffs, lam: float) -> WaveletCoeffs:
    """Soft-shrink the detail bands; the approximation band is left as is."""
    if lam < 0:
        raise ValueError("threshold must be non-negative")
    return coeffs.map_details(lambda d: soft(d, lam))


def hard_threshold(coeffs: WaveletCoeffs, lam: float) -> WaveletCoeffs:
    if lam < 0:
        raise ValueError("threshold must be non-negative")
    return coeffs.map_details(lambda d: hard(d, lam))


def merge_coefficients(c_hard: WaveletCoeffs, c_soft: WaveletCoeffs,
                       plan: ThresholdPlan) -> WaveletCoeffs:
    """Convex mix ``w_hard * c_hard + w_soft * c_soft`` over every band."""
    same = (c_hard.filter_id == c_soft.filter_id
            and c_hard.original_len == c_soft.original_len
            and c_hard.approx.shape == c_soft.approx.shape
            and [d.shape for d in c_hard.details] == [d.shape for d in c_soft.details])
    if not same:
        raise ValueError("coefficient structures differ")
    wh, ws = plan.w_hard, plan.w_soft
    return WaveletCoeffs(
        wh * c_hard.approx + ws * c_soft.approx,
        [wh * h + ws * s for h, s in zip(c_hard.details, c_soft.details)],
        c_hard.filter_id,
        c_hard.original_len,
    )


def estimate_lambda(coeffs: WaveletCoeffs) -> float:
    """Universal threshold from the median absolute finest-level detail."""
    if not coeffs.details or coeffs.details[-1].size == 0:
        raise ValueError("no detail coefficients to estimate noise from")
    sigma = np.median(np.abs(coeffs.details[-1])) / 0.6745
    return float(sigma * np.sqrt(2.0 * np.log(coeffs.original_len)))


def denoise(signal, filter_id=Filter.DB4, levels: int = 4,
            plan: ThresholdPlan | None = None) -> np.ndarray:
    plan = plan or ThresholdPlan()
    coeffs = dwt(signal, filter_id, levels)
    lam = estimate_lambda(coeffs) if plan.fixed_lambda is None else plan.fixed_lambda
    merged = merge_coefficients(hard_threshold(coeffs, lam), soft_threshold(coeffs, lam), plan)
    return idwt(merged)


def denoise_rows(x, filter_id=Filter.DB4, levels: int = 4,
                 plan: ThresholdPlan | None = None) -> np.ndarray:
    x = np.atleast_2d(x)
    return np.stack([denoise(row, filter_id, levels, plan) for row in x])
