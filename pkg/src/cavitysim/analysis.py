"""Signal diagnostics for inversion traces and Q-function grids."""
import numpy as np
from scipy import ndimage

COLLAPSE_WINDOW = (8.0, 16.0)


def collapse_baseline(times, signal, window=COLLAPSE_WINDOW):
    """Median of the signal over the collapse window of scaled time."""
    times = np.asarray(times)
    mask = (times >= window[0]) & (times <= window[1])
    if not mask.any():
        raise ValueError(f"no samples inside the window {window}")
    return float(np.median(np.asarray(signal)[mask]))


def envelope(times, signal, baseline, width=2.0):
    """Boxcar-smoothed ``|signal - baseline|`` with a window of ``width`` time units."""
    times = np.asarray(times)
    dev = np.abs(np.asarray(signal) - baseline)
    dt = times[1] - times[0]
    n = max(1, int(round(width / dt)))
    return np.convolve(dev, np.ones(n) / n, mode="same")


def revival_time(times, signal, after=COLLAPSE_WINDOW[1], width=2.0):
    """Time of the largest envelope excursion past ``after``.

    The baseline is the collapse-window median; the envelope is smoothed so a
    single fast oscillation does not decide the answer.
    """
    times = np.asarray(times)
    base = collapse_baseline(times, signal)
    env = envelope(times, signal, base, width)
    mask = times > after
    if not mask.any():
        raise ValueError(f"no samples after t={after}")
    idx = np.flatnonzero(mask)
    return float(times[idx[np.argmax(env[idx])]])


def autocorrelation(signal, max_lag=None):
    """Pearson correlation between the signal and its shifted copy.

    Lag ``L`` compares ``s[:-L]`` with ``s[L:]``, each centred and normalized
    on its own overlap, so a strictly periodic signal scores 1 at its period.
    """
    s = np.asarray(signal, dtype=float)
    n = s.size
    max_lag = n // 2 if max_lag is None else min(int(max_lag), n - 2)
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for lag in range(1, max_lag + 1):
        a = s[:-lag] - s[:-lag].mean()
        b = s[lag:] - s[lag:].mean()
        den = np.sqrt(np.dot(a, a) * np.dot(b, b))
        out[lag] = np.dot(a, b) / den if den > 0 else 0.0
    return out


def autocorrelation_peak(times, signal):
    """``(peak, lag_time)``: highest correlation past the first zero crossing."""
    ac = autocorrelation(signal)
    neg = np.flatnonzero(ac <= 0.0)
    if not neg.size:
        return 0.0, float("nan")
    start = neg[0]
    lag = start + int(np.argmax(ac[start:]))
    dt = float(np.asarray(times)[1] - np.asarray(times)[0])
    return float(ac[lag]), lag * dt


def local_maxima(values, rel_height=0.5, size=3):
    """Grid indices ``(iy, ix)`` of local maxima above ``rel_height * max``."""
    values = np.asarray(values)
    peak = ndimage.maximum_filter(values, size=size, mode="nearest")
    mask = (values == peak) & (values >= rel_height * values.max())
    return [tuple(int(i) for i in idx) for idx in np.argwhere(mask)]


def separated(points, min_distance=2.0):
    """True when every pair of grid points is at least ``min_distance`` apart."""
    pts = np.asarray(points, dtype=float)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if np.hypot(*(pts[i] - pts[j])) < min_distance:
                return False
    return True
