"""Error norm, PI step-size controller and starting-step heuristic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS = np.finfo(float).eps


def error_norm(u_prev, u_new, err_est, abstol, reltol) -> float:
    """Weighted RMS norm of a local error estimate.

    Each component is scaled by ``abstol + reltol * max(|u_prev|, |u_new|)``.
    A step is accepted when the result is at most 1. NaN anywhere gives
    ``inf`` so the step is rejected.
    """
    err_est = np.asarray(err_est, dtype=float)
    scale = abstol + reltol * np.maximum(np.abs(u_prev), np.abs(u_new))
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        r = err_est / scale
        val = math.sqrt(float(np.mean(r * r)))
    if math.isnan(val):
        return math.inf
    return val


def scaled_rms(x, scale) -> float:
    with np.errstate(invalid="ignore", over="ignore"):
        r = np.asarray(x) / scale
        val = math.sqrt(float(np.mean(r * r)))
    return math.inf if math.isnan(val) else val


@dataclass
class PIController:
    """Proportional-integral step controller for embedded pairs.

    ``error_order`` is the exponent with which the local error estimate
    scales in ``dt`` (order of the lower member of the pair plus one).
    Proposed step ratios are always clipped to ``[min_ratio, max_ratio]``.
    """

    error_order: int
    safety: float = 0.9
    min_ratio: float = 0.2
    max_ratio: float = 10.0
    err_prev: float = 1e-4
    last_rejected: bool = False

    @property
    def beta1(self) -> float:
        return 0.7 / self.error_order

    @property
    def beta2(self) -> float:
        return 0.4 / self.error_order

    def reset(self) -> None:
        self.err_prev = 1e-4
        self.last_rejected = False

    def ratio(self, err: float, accepted: bool) -> float:
        if accepted:
            if err == 0.0:
                ratio = self.max_ratio
            else:
                ratio = self.safety * err ** (-self.beta1) * self.err_prev ** self.beta2
            if self.last_rejected:
                ratio = min(ratio, 1.0)
            self.err_prev = max(err, 1e-4)
            self.last_rejected = False
        else:
            if math.isfinite(err) and err > 0.0:
                ratio = self.safety * err ** (-1.0 / self.error_order)
            else:
                ratio = self.min_ratio
            self.last_rejected = True
        return min(self.max_ratio, max(self.min_ratio, ratio))

    def propose(self, dt: float, err: float, accepted: bool) -> float:
        return dt * self.ratio(err, accepted)


def initial_dt(rhs, t0, u0, tf, abstol, reltol, order, f0=None) -> float:
    """Starting step from two derivative evaluations.

    A trial Euler step estimates the first and second time derivatives in
    tolerance-scaled units. Their ratios to ``|u0|`` give a characteristic
    rate ``L`` (1/time), and the step is chosen so that ``(dt * L)**(order+1)``
    times the state magnitude sits at 1% of the tolerance. Because only
    rates enter, rescaling time rescales the result. Capped at
    ``(tf - t0) / 100``, floored at ``1e-10 * (tf - t0)``; a vanishing
    derivative returns the cap.
    """
    span = tf - t0
    cap = span / 100.0
    floor = 1e-10 * span
    if f0 is None:
        f0 = rhs(u0, t0)
    sc = abstol + np.abs(u0) * reltol
    d0 = max(scaled_rms(u0, sc), 1.0)
    d1 = scaled_rms(f0, sc)
    if not math.isfinite(d1):
        return floor
    if d1 <= 1e-12 * d0 / span:
        return cap
    h0 = min(0.01 * d0 / d1, cap)
    f1 = rhs(u0 + h0 * f0, t0 + h0)
    d2 = scaled_rms(f1 - f0, sc) / h0
    if not math.isfinite(d2):
        return max(floor, 1e-3 * h0)
    rate = max(d1 / d0, math.sqrt(d2 / d0))
    h1 = (0.01 / d0) ** (1.0 / (order + 1)) / rate
    return min(max(min(100 * h0, h1), floor), cap)
