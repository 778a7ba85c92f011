"""
Denoising with merged thresholding
==================================

Hard thresholding keeps large coefficients intact but leaves a ragged signal;
soft thresholding is smooth but biased. Mixing the two trades one for the other.
A piecewise-constant signal has sharp edges, so its detail coefficients carry
real structure and the mix matters.
"""

import numpy as np

from faultloc.wavelet import Filter, ThresholdPlan, denoise, dwt, estimate_lambda

n = 2048
t = np.arange(n) / n
jumps = [0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81]
heights = [4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2]
clean = sum(h * (1 + np.sign(t - p)) / 2 for p, h in zip(jumps, heights))
noisy = clean + np.random.default_rng(0).normal(0, 0.5, n)


def snr_db(estimate):
    return 10 * np.log10(np.sum(clean ** 2) / np.sum((estimate - clean) ** 2))


print(f"input SNR {snr_db(noisy):6.2f} dB")
for filt in (Filter.HAAR, Filter.DB4):
    coeffs = dwt(noisy, filt, 5)
    lam = estimate_lambda(coeffs)
    kept = sum(int(np.sum(np.abs(d) >= lam)) for d in coeffs.details)
    print(f"\n{filt.value}: universal threshold {lam:.3f}, {kept} detail coefficients survive")
    # sweep the hard weight from pure soft (0) to pure hard (1)
    for w_hard in np.linspace(0, 1, 6):
        out = denoise(noisy, filt, 5, ThresholdPlan(w_hard, 1 - w_hard))
        print(f"  w_hard={w_hard:.1f}  SNR {snr_db(out):6.2f} dB")
