"""Quantitative extraction from raw series: log-linear exponential fits,
automatic fit-window search, Ehrenfest time, and the classical-quantum
correspondence (deviation) time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatch,
    InvalidRate,
    NonPositiveValues,
    WindowTooSparse,
)
from .evolution import TimeSeries

MIN_FIT_SAMPLES = 5


@dataclass(frozen=True)
class ExpFit:
    """Least-squares fit of ln(values) = rate * t + log_intercept."""

    rate: float
    log_intercept: float
    r_squared: float
    window: tuple[float, float]


def fit_exponential(series: TimeSeries, window: tuple[float, float]) -> ExpFit:
    """Fit ln(values) vs t over [window[0], window[1]]."""
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ValueError("window must satisfy t_lo < t_hi")
    mask = (series.times >= t_lo) & (series.times <= t_hi)
    if np.count_nonzero(mask) < MIN_FIT_SAMPLES:
        raise WindowTooSparse(
            f"only {np.count_nonzero(mask)} samples in [{t_lo}, {t_hi}]"
        )
    vals = series.values[mask]
    if np.any(vals <= 0):
        raise NonPositiveValues("cannot fit log of non-positive values")
    t = series.times[mask]
    y = np.log(vals)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return ExpFit(
        rate=float(slope),
        log_intercept=float(intercept),
        r_squared=min(max(r2, 0.0), 1.0),
        window=(float(t_lo), float(t_hi)),
    )


def auto_window(
    series: TimeSeries,
    min_span: float,
    search: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Contiguous window of span >= min_span maximizing the fit r^2,
    found by scanning all sample-aligned windows with prefix sums."""
    if min_span <= 0:
        raise ValueError("min_span must be positive")
    t = series.times
    v = series.values
    if search is not None:
        mask = (t >= search[0]) & (t <= search[1])
        t, v = t[mask], v[mask]
    if np.any(v <= 0):
        raise NonPositiveValues("auto_window requires positive values")
    n = t.size
    if n < MIN_FIT_SAMPLES:
        raise WindowTooSparse(f"only {n} samples available")
    y = np.log(v)
    # prefix sums for O(1) per-window regression statistics
    c1 = np.concatenate([[0.0], np.cumsum(t)])
    c2 = np.concatenate([[0.0], np.cumsum(t * t)])
    cy = np.concatenate([[0.0], np.cumsum(y)])
    cy2 = np.concatenate([[0.0], np.cumsum(y * y)])
    cty = np.concatenate([[0.0], np.cumsum(t * y)])
    best_r2, best_span, best = -np.inf, -np.inf, None
    for i in range(n):
        for j in range(i + MIN_FIT_SAMPLES - 1, n):
            span = t[j] - t[i]
            if span < min_span:
                continue
            m = j - i + 1
            st = c1[j + 1] - c1[i]
            st2 = c2[j + 1] - c2[i]
            sy = cy[j + 1] - cy[i]
            sy2 = cy2[j + 1] - cy2[i]
            sty = cty[j + 1] - cty[i]
            sxx = st2 - st * st / m
            sxy = sty - st * sy / m
            syy = sy2 - sy * sy / m
            if sxx <= 0 or syy <= 0:
                continue
            r2 = (sxy * sxy) / (sxx * syy)
            # ties within rounding noise go to the longest window, so a
            # clean exponential yields the full domain rather than an
            # arbitrary minimal slice
            if r2 > best_r2 + 1e-12 or (r2 > best_r2 - 1e-12 and span > best_span):
                best_r2 = max(best_r2, r2)
                best_span, best = span, (float(t[i]), float(t[j]))
    if best is None:
        raise WindowTooSparse("no window of the requested span fits the grid")
    return best


def ehrenfest_time(rate: float, n_p: int) -> float:
    """tau = ln(n_p) / rate."""
    if rate <= 0:
        raise InvalidRate(f"rate must be positive, got {rate}")
    if n_p < 2:
        raise InvalidRate(f"n_p must be >= 2, got {n_p}")
    return math.log(n_p) / rate


def correspondence_time(
    run: TimeSeries, reference: TimeSeries, epsilon: float
) -> float | None:
    """First time |run - reference| > epsilon * max(1, |reference|);
    None when the series never separate."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if run.times.shape != reference.times.shape or not np.allclose(
        run.times, reference.times, rtol=0, atol=1e-12
    ):
        raise GridMismatch("series must share the same time grid")
    dev = np.abs(run.values - reference.values)
    bound = epsilon * np.maximum(1.0, np.abs(reference.values))
    idx = np.nonzero(dev > bound)[0]
    if idx.size == 0:
        return None
    return float(run.times[idx[0]])
