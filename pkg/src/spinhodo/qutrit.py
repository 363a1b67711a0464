"""Spin-1 dynamics: anisotropic Hamiltonian, unitary density-matrix
evolution, generalized 8-component coherence vector, level populations,
polarization direction, and the exact resonance solution.

The density matrix is expanded as rho = E/3 + (1/3) sum_a q_a L_a over a
fixed Hermitian basis with Tr(L_a L_b) = 3 delta_ab.  The first three
elements are the (scaled) spin components; the quadrupole elements are
ordered and signed so that the exact resonance solution comes out
component-for-component (a calibration test pins this down).  A pure state
has |q| = sqrt(2).
"""

import math
from dataclasses import dataclass

import numpy as np

from .integrator import IntegratorConfig, resample_uniform
from .qubit import field_at

__all__ = [
    "S1", "S2", "S3", "LAMBDA8", "AnisotropyParams", "Populations",
    "qutrit_hamiltonian", "qutrit_rhs", "make_qutrit_rhs_real",
    "bloch8_from_density", "populations", "qutrit_polarization",
    "polarization_series", "analytic_qutrit_resonance",
    "closed_trajectory_amplitude_qutrit", "evolve_density",
    "initial_density_north", "two_photon_frequency",
]

_SQRT2 = math.sqrt(2.0)
_SQRT32 = math.sqrt(1.5)

# spin-1 matrices, ladder normalization, basis (m = +1, 0, -1)
S1 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _SQRT2
S2 = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _SQRT2
S3 = np.diag([1.0, 0.0, -1.0]).astype(complex)
_E3 = np.eye(3, dtype=complex)
_QUAD_Q = S3 @ S3 - (2.0 / 3.0) * _E3          # axial anisotropy operator
_QUAD_D = S1 @ S1 - S2 @ S2                     # transverse (two-quantum) operator

# Hermitian expansion basis; Tr(L_a L_b) = 3 delta_ab.
LAMBDA8 = np.stack([
    _SQRT32 * S1,
    _SQRT32 * S2,
    _SQRT32 * S3,
    _SQRT32 * (S1 @ S2 + S2 @ S1),
    _SQRT32 * (S2 @ S3 + S3 @ S2),
    np.diag([1.0, -2.0, 1.0]).astype(complex) / _SQRT2,
    _SQRT32 * (S1 @ S3 + S3 @ S1),
    _SQRT32 * _QUAD_D,
])


@dataclass(frozen=True)
class AnisotropyParams:
    """Axial (Q) and transverse (d) anisotropy constants, frequency units."""

    Q: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.Q) and math.isfinite(self.d)):
            raise ValueError("anisotropy constants must be finite")


@dataclass(frozen=True)
class Populations:
    p_plus: float
    p_zero: float
    p_minus: float

    def as_array(self):
        return np.array([self.p_plus, self.p_zero, self.p_minus])


def initial_density_north():
    """Pure m=+1 state diag(1, 0, 0)."""
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def qutrit_hamiltonian(t, fp, ap):
    """3x3 Hermitian Hamiltonian h_i(t) S_i + Q-term + d-term."""
    h1, h2, h3 = field_at(t, fp)
    return h1 * S1 + h2 * S2 + h3 * S3 + ap.Q * _QUAD_Q + ap.d * _QUAD_D


def qutrit_rhs(t, rho, fp, ap):
    """Unitary Liouville derivative -i [H(t), rho] (Hermitian, traceless)."""
    H = qutrit_hamiltonian(t, fp, ap)
    return -1j * (H @ rho - rho @ H)


def make_qutrit_rhs_real(fp, ap):
    """Flattened real-vector (dim 18) form of the unitary evolution.

    The complex 3x3 matrix is carried as [Re(rho).ravel(), Im(rho).ravel()]
    so the real-valued integrator can drive it.
    """
    static = ap.Q * _QUAD_Q + ap.d * _QUAD_D
    w, k, a1, a2, Hl = fp.omega, fp.k, fp.h1, fp.h2, fp.H
    if k == 0.0:
        def hamil(t):
            return (a1 * math.cos(w * t)) * S1 + (a2 * math.sin(w * t)) * S2 + Hl * S3 + static
    else:
        from .elliptic import jacobi_sncndn

        def hamil(t):
            sn, cn, dn = jacobi_sncndn(w * t, k)
            return (a1 * cn) * S1 + (a2 * sn) * S2 + (Hl * dn) * S3 + static

    def rhs(t, y):
        rho = (y[:9] + 1j * y[9:]).reshape(3, 3)
        H = hamil(t)
        drho = -1j * (H @ rho - rho @ H)
        return np.concatenate([drho.real.ravel(), drho.imag.ravel()])

    return rhs


def density_to_real(rho):
    return np.concatenate([rho.real.ravel(), rho.imag.ravel()])


def real_to_density(y):
    return (y[:9] + 1j * y[9:]).reshape(3, 3)


def bloch8_from_density(rho):
    """Generalized coherence vector q_a = Tr(rho L_a), shape (8,)."""
    q = np.einsum('ij,aji->a', rho, LAMBDA8)
    if np.max(np.abs(q.imag)) > 1e-9:
        raise ValueError("density matrix is not Hermitian enough for a real q")
    return q.real


def populations(q3, q6):
    """Level populations (m = +1, 0, -1) from the two diagonal components.

    The three expressions sum to one identically.
    """
    r6q3 = math.sqrt(6.0) * q3
    r2q6 = _SQRT2 * q6
    p = Populations((2.0 + r6q3 + r2q6) / 6.0,
                    (1.0 - r2q6) / 3.0,
                    (2.0 - r6q3 + r2q6) / 6.0)
    for v in (p.p_plus, p.p_zero, p.p_minus):
        if v < -1e-9 or v > 1.0 + 1e-9:
            raise ValueError(f"population {v} outside [0, 1]: inconsistent q input")
    return p


def qutrit_polarization(q, eps=1e-9):
    """Unit polarization direction q_{1..3}/|q_{1..3}|.

    Raises when the spin part is too short to define a direction; callers
    walking a trajectory should use :func:`polarization_series`, which
    flags such samples instead.
    """
    q = np.asarray(q, dtype=float)
    spin = q[..., :3]
    n = np.linalg.norm(spin)
    if n <= eps:
        raise ValueError("spin part of q vanishes: polarization direction undefined")
    return spin / n


def polarization_series(qs, eps=1e-9):
    """Unit polarization for each row of an (n, 8) array; NaN where undefined."""
    qs = np.asarray(qs, dtype=float)
    spin = qs[:, :3]
    n = np.linalg.norm(spin, axis=1)
    out = np.full_like(spin, np.nan)
    ok = n > eps
    out[ok] = spin[ok] / n[ok, None]
    return out


def analytic_qutrit_resonance(t, h, Q, omega):
    """Exact 8-component coherence vector at resonance (drive frequency equal
    to the longitudinal field), axial anisotropy only, north-pole start.

    f = sqrt(4 h^2 + Q^2) sets the beat structure; f = 0 returns the frozen
    initial vector (nothing couples).  Accepts scalar or array t.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    f = math.hypot(2.0 * h, Q)
    if f == 0.0:
        q = np.zeros(t_arr.shape + (8,))
        q[..., 2] = _SQRT32
        q[..., 5] = 1.0 / _SQRT2
        return q[0] if np.ndim(t) == 0 else q

    sf, cf = np.sin(f * t_arr / 2.0), np.cos(f * t_arr / 2.0)
    sq, cq = np.sin(Q * t_arr / 2.0), np.cos(Q * t_arr / 2.0)
    sw, cw = np.sin(omega * t_arr), np.cos(omega * t_arr)
    s2w, c2w = np.sin(2.0 * omega * t_arr), np.cos(2.0 * omega * t_arr)
    r6h = math.sqrt(6.0) * h

    q1 = r6h * sf / f**2 * (f * cq * sw + Q * sf * cw)
    q2 = r6h * sf / f**2 * (Q * sf * sw - f * cq * cw)
    q3 = _SQRT32 * (Q * sf * sq / f + cf * cq)
    q4 = _SQRT32 / f**2 * (-2.0 * h * h * sf * sf * s2w
                           + (f * f * cf * sq - f * Q * sf * cq) * c2w)
    q5 = r6h * sf / f * (sq * sw - cf * cw)
    q6 = (h * h + Q * Q + 3.0 * h * h * np.cos(f * t_arr)) / (_SQRT2 * f**2)
    q7 = r6h * sf / f * (cf * sw + sq * cw)
    q8 = _SQRT32 / f**2 * (f * (Q * sf * cq - f * cf * sq) * s2w
                           - 2.0 * h * h * sf * sf * c2w)

    q = np.stack([q1, q2, q3, q4, q5, q6, q7, q8], axis=-1)
    return q[0] if np.ndim(t) == 0 else q


def closed_trajectory_amplitude_qutrit(x, y, Q, d=0.0, sign=1.0):
    """Transverse amplitude for a closed hodograph at commensurate (x, y).

    h + sqrt(2) d = +- sqrt(y^2 - x^2) Q / (2 x); d = 0 recovers the pure
    axial-anisotropy condition.
    """
    if x == 0:
        raise ValueError("x must be nonzero")
    if y * y < x * x:
        raise ValueError("no real amplitude: |y| < |x|")
    return sign * math.sqrt(y * y - x * x) * Q / (2.0 * x) - _SQRT2 * d


def evolve_density(fp, ap, rho0, t_final, cfg=None, n_out=None):
    """Integrate the unitary evolution; return (times, rhos, trajectory).

    Output densities are re-symmetrized; the Hermiticity drift before
    symmetrization must stay below 1e-12 or this raises.
    """
    cfg = cfg or IntegratorConfig()
    if n_out is None:
        n_out = cfg.output_points_per_period + 1
    rhs = make_qutrit_rhs_real(fp, ap)
    traj = resample_uniform(rhs, n_out, y0=density_to_real(rho0), t_span=(0.0, t_final), cfg=cfg)
    rhos = traj.states[:, :9].reshape(-1, 3, 3) + 1j * traj.states[:, 9:].reshape(-1, 3, 3)
    drift = np.max(np.abs(rhos - np.conj(np.transpose(rhos, (0, 2, 1)))))
    if drift > 1e-12:
        raise RuntimeError(f"Hermiticity drift {drift:.2e} exceeds 1e-12")
    rhos = 0.5 * (rhos + np.conj(np.transpose(rhos, (0, 2, 1))))
    return traj.times, rhos, traj


def two_photon_frequency(times, p_minus):
    """Angular frequency of the slow population-transfer beat.

    Takes the lowest-frequency prominent line (>= half the tallest peak) of
    the detrended m=-1 population spectrum; that line is the two-photon
    transition frequency between the m = +1 and m = -1 levels.
    """
    times = np.asarray(times, dtype=float)
    y = np.asarray(p_minus, dtype=float)
    dt = times[1] - times[0]
    window = np.hanning(len(y))   # tames leakage so the peak fit is unbiased
    amp = np.abs(np.fft.rfft((y - y.mean()) * window))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(len(y), d=dt)
    amp[0] = 0.0
    floor = 0.5 * amp.max()
    # lowest local maximum that clears the prominence floor
    for i in range(1, len(amp) - 1):
        if amp[i] >= floor and amp[i] >= amp[i - 1] and amp[i] >= amp[i + 1]:
            # quadratic refinement around the bin
            denom = amp[i - 1] - 2 * amp[i] + amp[i + 1]
            shift = 0.0 if denom == 0 else 0.5 * (amp[i - 1] - amp[i + 1]) / denom
            return float(freqs[i] + shift * (freqs[1] - freqs[0]))
    raise ValueError("no prominent spectral line found")
