"""Qubit drive fields, coherence-vector equation of motion, and the exact
rotating-frame solutions used as oracles.

Units: all field amplitudes and rates are angular frequencies (hbar = 1).
The coherence (Bloch) vector R obeys

    dR/dt = h(t) x R - (gamma2 R1, gamma2 R2, gamma1 (R3 - r_eq))

with the drive

    h(t) = (h1 cn(wt|k), h2 sn(wt|k), H dn(wt|k)),

which sweeps from a circularly polarized field (k=0, h1=h2) to hyperbolic
impulses (k=1).  The longitudinal modulation runs at twice the transverse
rate, hence "consistent" modulation.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .elliptic import jacobi_sncndn

__all__ = [
    "FieldMode", "FieldParams", "DampingParams", "InitialAngles",
    "field_at", "bloch_rhs", "make_bloch_rhs",
    "analytic_rabi_general", "analytic_elliptic_resonance",
    "spin_flip_probability", "bloch_length", "qubit_energy",
    "closed_trajectory_amplitude_qubit",
]


class FieldMode(Enum):
    CIRCULAR = "circular"
    LINEAR = "linear"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True)
class FieldParams:
    """Drive-field amplitudes, frequency, and modulation shape.

    Amplitudes may be negative; no absolute values are taken anywhere.
    """

    h1: float
    h2: float
    H: float
    omega: float
    k: float = 0.0
    mode: FieldMode = FieldMode.CIRCULAR

    def __post_init__(self):
        if not (0.0 <= self.k <= 1.0):
            raise ValueError(f"elliptic modulus must lie in [0, 1], got {self.k}")
        if self.mode is FieldMode.CIRCULAR:
            if self.k != 0.0 or self.h1 != self.h2:
                raise ValueError("circular mode requires k = 0 and h1 = h2")
        elif self.mode is FieldMode.LINEAR:
            if self.k != 0.0 or self.h2 != 0.0:
                raise ValueError("linear mode requires k = 0 and h2 = 0")
        else:  # consistent elliptic modulation
            if self.h1 != self.h2:
                raise ValueError("elliptic mode requires h1 = h2")

    @classmethod
    def circular(cls, h, H, omega):
        return cls(h, h, H, omega, 0.0, FieldMode.CIRCULAR)

    @classmethod
    def linear(cls, h, H, omega):
        return cls(h, 0.0, H, omega, 0.0, FieldMode.LINEAR)

    @classmethod
    def elliptic(cls, h, H, omega, k):
        return cls(h, h, H, omega, k, FieldMode.ELLIPTIC)

    @property
    def detuning(self):
        return self.H - self.omega


@dataclass(frozen=True)
class DampingParams:
    """Longitudinal/transverse relaxation rates and equilibrium population."""

    gamma1: float = 0.0
    gamma2: float = 0.0
    r_eq: float = 0.0

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ValueError("relaxation rates must be non-negative")

    @classmethod
    def uniform(cls, gamma):
        """Rabi-model damping: gamma1 = gamma2 = gamma, r_eq = 0."""
        return cls(gamma, gamma, 0.0)

    @property
    def is_uniform(self):
        return self.gamma1 == self.gamma2 and self.r_eq == 0.0


@dataclass(frozen=True)
class InitialAngles:
    """Pure initial state on the unit sphere (polar, azimuth)."""

    theta0: float = 0.0
    phi0: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta0 <= math.pi):
            raise ValueError(f"theta0 must lie in [0, pi], got {self.theta0}")

    def bloch(self):
        st = math.sin(self.theta0)
        return np.array([math.cos(self.phi0) * st,
                         math.sin(self.phi0) * st,
                         math.cos(self.theta0)])


def field_at(t, fp):
    """Drive field vector at time t (3-array)."""
    if fp.k == 0.0:
        c, s = math.cos(fp.omega * t), math.sin(fp.omega * t)
        return np.array([fp.h1 * c, fp.h2 * s, fp.H])
    sn, cn, dn = jacobi_sncndn(fp.omega * t, fp.k)
    return np.array([fp.h1 * cn, fp.h2 * sn, fp.H * dn])


def bloch_rhs(t, R, fp, dp):
    """Right-hand side of the coherence-vector equation (3-array)."""
    h1, h2, h3 = field_at(t, fp)
    return np.array([
        h2 * R[2] - h3 * R[1] - dp.gamma2 * R[0],
        h3 * R[0] - h1 * R[2] - dp.gamma2 * R[1],
        h1 * R[1] - h2 * R[0] - dp.gamma1 * (R[2] - dp.r_eq),
    ])


def make_bloch_rhs(fp, dp):
    """Closure form of :func:`bloch_rhs` for the integrator hot loop."""
    w, k, a1, a2, H = fp.omega, fp.k, fp.h1, fp.h2, fp.H
    g1, g2, req = dp.gamma1, dp.gamma2, dp.r_eq
    if k == 0.0:
        def rhs(t, R):
            h1 = a1 * math.cos(w * t)
            h2 = a2 * math.sin(w * t)
            return np.array([
                h2 * R[2] - H * R[1] - g2 * R[0],
                H * R[0] - h1 * R[2] - g2 * R[1],
                h1 * R[1] - h2 * R[0] - g1 * (R[2] - req),
            ])
    else:
        def rhs(t, R):
            sn, cn, dn = jacobi_sncndn(w * t, k)
            h1, h2, h3 = a1 * cn, a2 * sn, H * dn
            return np.array([
                h2 * R[2] - h3 * R[1] - g2 * R[0],
                h3 * R[0] - h1 * R[2] - g2 * R[1],
                h1 * R[1] - h2 * R[0] - g1 * (R[2] - req),
            ])
    return rhs


def _sinc_factors(Om, t):
    """S = sin(Om t)/Om and C2 = (1 - cos(Om t))/Om^2, cancellation-free.

    C2 uses the half-angle identity 2 sin^2(Om t / 2)/Om^2, so both factors
    stay exact through the Om -> 0 resonance-degenerate limit.
    """
    if Om == 0.0:
        t = np.asarray(t, dtype=float)
        return t.copy(), 0.5 * t * t
    x = Om * np.asarray(t, dtype=float)
    S = np.sin(x) / Om
    half = np.sin(0.5 * x)
    C2 = 2.0 * half * half / (Om * Om)
    return S, C2


def analytic_rabi_general(t, angles, h, H, omega, gamma=0.0):
    """Exact coherence vector in a circularly polarized field, general pure
    initial state, uniform damping (gamma1 = gamma2 = gamma, r_eq = 0).

    Accepts scalar or array t; returns shape (3,) or (n, 3).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    delta = H - omega
    Om = math.hypot(delta, h)
    st0, ct0 = math.sin(angles.theta0), math.cos(angles.theta0)
    cp0, sp0 = math.cos(angles.phi0), math.sin(angles.phi0)

    S, C2 = _sinc_factors(Om, t_arr)
    cosOt = 1.0 - Om * Om * C2          # = cos(Om t), exact for Om = 0 too
    sw, cw = np.sin(omega * t_arr), np.cos(omega * t_arr)

    R1 = (-(st0 * (delta * cp0 * S + cosOt * sp0) - h * ct0 * S) * sw
          + (h * delta * ct0 * C2
             + st0 * (cp0 * (1.0 - delta * delta * C2) - delta * sp0 * S)) * cw)
    R2 = ((st0 * cp0 * (1.0 - delta * delta * C2) + delta * h * ct0 * C2
           - delta * st0 * sp0 * S) * sw
          - (h * ct0 * S - delta * st0 * cp0 * S - st0 * sp0 * cosOt) * cw)
    R3 = ct0 * (1.0 - h * h * C2) + h * st0 * (delta * cp0 * C2 + sp0 * S)

    R = np.stack([R1, R2, R3], axis=-1)
    if gamma != 0.0:
        R = R * np.exp(-gamma * t_arr)[..., None]
    return R[0] if np.isscalar(t) or np.ndim(t) == 0 else R


def analytic_elliptic_resonance(t, h, omega, k, gamma=0.0):
    """Exact coherence vector for the consistent elliptic field at resonance
    (detuning zero), north-pole start:

        R = e^{-gamma t} (sn(wt|k) sin ht, -cn(wt|k) sin ht, cos ht).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    sn = np.empty_like(t_arr)
    cn = np.empty_like(t_arr)
    for i, ti in enumerate(t_arr):
        sn[i], cn[i], _ = jacobi_sncndn(omega * ti, k)
    sh, ch = np.sin(h * t_arr), np.cos(h * t_arr)
    R = np.stack([sn * sh, -cn * sh, ch], axis=-1)
    if gamma != 0.0:
        R = R * np.exp(-gamma * t_arr)[..., None]
    return R[0] if np.isscalar(t) or np.ndim(t) == 0 else R


def spin_flip_probability(R3):
    """Spin-flip probability P = (1 - R3)/2 for |R3| <= 1."""
    R3 = np.asarray(R3, dtype=float)
    if np.any(np.abs(R3) > 1.0 + 1e-9):
        raise ValueError("R3 outside [-1, 1]")
    return (1.0 - R3) / 2.0


def bloch_length(R):
    """Euclidean length of the coherence vector (conserved when undamped)."""
    return np.linalg.norm(np.asarray(R, dtype=float), axis=-1)


def qubit_energy(R, h):
    """Mean energy (1/2) sum_i h_i R_i of the qubit in field h."""
    return 0.5 * float(np.dot(np.asarray(R, dtype=float), np.asarray(h, dtype=float)))


def closed_trajectory_amplitude_qubit(x, y, omega, H):
    """Transverse amplitude closing the circular-field hodograph.

    The apex curve closes when the rotating-frame precession rate is
    commensurate with the drive: Omega = |y/x| * omega, i.e.
    h = sqrt(y^2 omega^2 / x^2 - (H - omega)^2).  Returns None when the
    radicand is negative (no real amplitude for that pair).
    """
    if x == 0:
        raise ValueError("x must be nonzero")
    radicand = (y * omega / x) ** 2 - (H - omega) ** 2
    if radicand < 0.0:
        return None
    return math.sqrt(radicand)
