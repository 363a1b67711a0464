"""Error-controlled ODE integration with dense, uniform output.

A Dormand-Prince 5(4) embedded pair with PI step-size control drives both
the 3-component coherence-vector system and the flattened 3x3 density
matrix (18 real components).  Two output modes are provided:

* :func:`integrate` - adaptive stepping, output grid filled by the
  standard 4th-order continuous extension of the pair;
* :func:`resample_uniform` - re-integration that lands *exactly* on every
  output time (no interpolation), which is what the finite-difference
  geometry wants.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

__all__ = ["IntegratorConfig", "Trajectory", "IntegrationError", "integrate", "resample_uniform"]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

# continuous-extension weights (4th-order dense output)
_D = np.array([
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_PI_ALPHA = 0.7 / 5.0   # PI controller exponents for a 5th-order pair
_PI_BETA = 0.4 / 5.0


class IntegrationError(RuntimeError):
    """Raised on step underflow; carries the last successfully reached time."""

    def __init__(self, message, last_time):
        super().__init__(f"{message} (last good time t={last_time:.6g})")
        self.last_time = last_time


@dataclass
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf
    output_points_per_period: int = 2000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")


@dataclass
class Trajectory:
    """Dense uniform-grid solution plus enough provenance to re-integrate."""

    times: np.ndarray
    states: np.ndarray                  # (n, dim)
    max_error_estimate: float           # largest weighted local error accepted
    n_steps: int
    n_rejected: int
    rhs: Optional[Callable] = field(default=None, repr=False)
    y0: Optional[np.ndarray] = field(default=None, repr=False)
    t_span: Optional[Tuple[float, float]] = None
    cfg: Optional[IntegratorConfig] = None


def _error_norm(err, y_old, y_new, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, direction, cfg):
    # Hairer-style startup estimate
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = np.asarray(rhs(t0 + h0 * direction, y1), dtype=float)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, cfg.max_step)


def _dense_coeffs(y_old, y_new, k, h):
    ydiff = y_new - y_old
    bspl = h * k[0] - ydiff
    r4 = ydiff - h * k[6] - bspl
    r5 = h * (_D @ k)
    return y_old, ydiff, bspl, r4, r5


def _dense_eval(coeffs, theta):
    r1, r2, r3, r4, r5 = coeffs
    return r1 + theta * (r2 + (1.0 - theta) * (r3 + theta * (r4 + (1.0 - theta) * r5)))


def _step(rhs, t, y, f0, h, direction):
    """One DOPRI5 step of signed size h*direction; returns y_new, err, k."""
    hs = h * direction
    k = np.empty((7,) + y.shape)
    k[0] = f0
    for i in range(1, 7):
        yi = y + hs * (_A[i] @ k[:i])
        k[i] = rhs(t + _C[i] * hs, yi)
    y_new = y + hs * (_B5 @ k)
    # FSAL: stage 7 was evaluated at (t+h, y_new) because _A[6] == _B5[:6]
    err = hs * (_E @ k)
    return y_new, err, k


def _run(rhs, y0, t_span, cfg, out_times, exact_landing):
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 == t1:
        raise ValueError("empty integration span")
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)

    y = np.array(y0, dtype=float)
    t = t0
    f0 = np.asarray(rhs(t0, y), dtype=float)

    out = np.empty((len(out_times), y.size))
    next_out = 0
    if out_times[0] == t0:
        out[0] = y
        next_out = 1

    h = min(_initial_step(rhs, t0, y, f0, direction, cfg), span)
    max_err = 0.0
    err_prev = 1.0
    n_steps = 0
    n_rejected = 0

    while (t1 - t) * direction > 0.0:
        if abs(t1 - t) <= 1e-12 * max(1.0, abs(t1)):
            break  # span exhausted up to float slack
        if h <= abs(t) * 1e-14 + 1e-300:
            raise IntegrationError("step size underflow", t)
        h_try = min(h, cfg.max_step, abs(t1 - t))
        if exact_landing and next_out < len(out_times):
            gap = abs(out_times[next_out] - t)
            if gap > 1e-12 * max(1.0, abs(t)):
                h_try = min(h_try, gap)

        y_new, err, k = _step(rhs, t, y, f0, h_try, direction)
        errn = _error_norm(err, y, y_new, cfg)
        if errn > 1.0:
            n_rejected += 1
            h = h_try * max(_MIN_FACTOR, _SAFETY * errn ** (-_PI_ALPHA))
            continue

        t_new = t + h_try * direction
        n_steps += 1
        max_err = max(max_err, errn)

        if exact_landing:
            while next_out < len(out_times) and abs(out_times[next_out] - t_new) <= 1e-12 * max(1.0, abs(t_new)):
                out[next_out] = y_new
                next_out += 1
        else:
            coeffs = None
            while next_out < len(out_times) and (out_times[next_out] - t_new) * direction <= 1e-12 * max(1.0, abs(t_new)):
                if coeffs is None:
                    coeffs = _dense_coeffs(y, y_new, k, h_try * direction)
                theta = (out_times[next_out] - t) / (h_try * direction)
                out[next_out] = _dense_eval(coeffs, min(max(theta, 0.0), 1.0))
                next_out += 1

        # PI step-size controller (memory only over accepted steps)
        errn = max(errn, 1e-10)
        factor = _SAFETY * errn ** (-_PI_ALPHA) * err_prev ** _PI_BETA
        h = h_try * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        err_prev = errn
        t, y, f0 = t_new, y_new, k[6]

    while next_out < len(out_times):  # final point, guards float slack
        out[next_out] = y
        next_out += 1

    return out, max_err, n_steps, n_rejected


def integrate(rhs, y0, t_span, cfg=None, n_out=None):
    """Integrate y' = rhs(t, y) over t_span onto a uniform output grid.

    Adaptive DOPRI5(4) stepping; output values come from the pair's
    4th-order continuous extension.  `n_out` defaults to
    cfg.output_points_per_period + 1 treating the span as one period.
    """
    cfg = cfg or IntegratorConfig()
    if n_out is None:
        n_out = cfg.output_points_per_period + 1
    if n_out < 2:
        raise ValueError("need at least 2 output points")
    times = np.linspace(t_span[0], t_span[1], n_out)
    out, max_err, n_steps, n_rej = _run(rhs, y0, t_span, cfg, times, exact_landing=False)
    return Trajectory(times, out, max_err, n_steps, n_rej,
                      rhs=rhs, y0=np.array(y0, dtype=float), t_span=tuple(t_span), cfg=cfg)


def resample_uniform(traj_or_rhs, n, y0=None, t_span=None, cfg=None):
    """Re-integrate (never interpolate) onto a uniform grid of n points.

    Accepts either a Trajectory carrying its own problem definition or an
    explicit (rhs, y0, t_span) triple.  Steps are clipped so the solver
    lands exactly on every grid time, which keeps the samples free of
    interpolation error for the high-order finite differences downstream.
    """
    if isinstance(traj_or_rhs, Trajectory):
        traj = traj_or_rhs
        if traj.rhs is None:
            raise ValueError("trajectory carries no problem definition to re-integrate")
        rhs, y0, t_span, cfg = traj.rhs, traj.y0, traj.t_span, cfg or traj.cfg
    else:
        rhs = traj_or_rhs
        if y0 is None or t_span is None:
            raise ValueError("rhs form requires y0 and t_span")
    cfg = cfg or IntegratorConfig()
    if n < 7:
        raise ValueError("uniform resampling needs at least 7 points")
    times = np.linspace(t_span[0], t_span[1], n)
    out, max_err, n_steps, n_rej = _run(rhs, y0, t_span, cfg, times, exact_landing=True)
    return Trajectory(times, out, max_err, n_steps, n_rej,
                      rhs=rhs, y0=np.array(y0, dtype=float), t_span=tuple(t_span), cfg=cfg)
