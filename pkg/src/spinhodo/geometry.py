"""Hodograph diagnostics on the unit sphere: spherical angles,
precession/nutation rates, Frenet curvature/torsion/speed/arc length, the
osculating-sphere identity, closed-form resonance geometry, and cusp/loop
event detection.

Derivatives are 7-point finite differences on a uniform grid (Fornberg
weights, shifted windows at the edges), which keeps the third derivative
needed by the torsion at 4th-order accuracy without interpolation noise.
"""

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import incomplete_e

__all__ = [
    "GeometrySample", "GeometrySeries", "CuspEvent", "LoopEvent",
    "spherical_angles", "angular_velocities", "frenet_geometry",
    "resonance_geometry", "adjoining_sphere_residual", "curvature_rate",
    "detect_cusps", "detect_loops", "count_torsion_sign_changes",
    "fd_derivative", "fornberg_weights",
]

_STENCIL = 7
_POLE_RHO = 1e-4          # below this transverse radius phi and the rates are flagged
_SPEED_FLOOR = 1e-6       # |p'| below this leaves curvature/torsion unreliable
_TORSION_DEADBAND = 1e-12


def fornberg_weights(z, x, m):
    """Finite-difference weights for derivatives 0..m at point z on nodes x.

    Classic Fornberg recursion; rows of the returned (m+1, len(x)) array are
    the weights of the 0th..mth derivative.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for s in range(mn, 0, -1):
                    c[s, i] = c1 * (s * c[s - 1, i - 1] - c5 * c[s, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for s in range(mn, 0, -1):
                c[s, j] = ((x[i] - z) * c[s, j] - s * c[s - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


# weight tables for a 7-point window, evaluation at window positions 0..6
_W = {m: np.array([fornberg_weights(p, np.arange(_STENCIL), m)[m]
                   for p in range(_STENCIL)])
      for m in (1, 2, 3)}


def fd_derivative(F, dt, order):
    """order-th time derivative of samples F (n,) or (n, d), uniform step dt.

    Interior points use the centered 7-point stencil; the first/last three
    use shifted windows of the same width, so every sample gets a value.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n < _STENCIL:
        raise ValueError(f"need at least {_STENCIL} samples, got {n}")
    w = _W[order]
    out = np.zeros_like(F)
    center = w[3]
    for j in range(_STENCIL):  # vectorized over the long interior
        out[3:n - 3] += center[j] * F[j:n - _STENCIL + 1 + j]
    for i in (0, 1, 2):
        out[i] = np.tensordot(w[i], F[:_STENCIL], axes=(0, 0))
    for i in (n - 3, n - 2, n - 1):
        pos = i - (n - _STENCIL)
        out[i] = np.tensordot(w[pos], F[n - _STENCIL:], axes=(0, 0))
    return out / dt ** order


def _cumulative_parabolic(f, dt):
    """Cumulative integral of samples f on a uniform grid, local parabolas.

    Each increment integrates the quadratic through three neighbouring
    samples over one subinterval (the scheme behind cumulative Simpson).
    """
    n = len(f)
    out = np.zeros(n)
    if n == 1:
        return out
    if n == 2:
        out[1] = 0.5 * dt * (f[0] + f[1])
        return out
    inc = np.empty(n - 1)
    inc[0] = dt * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0
    inc[1:] = dt * (-f[:-2] + 8.0 * f[1:-1] + 5.0 * f[2:]) / 12.0
    out[1:] = np.cumsum(inc)
    return out


def spherical_angles(p, pole_eps=_POLE_RHO):
    """(theta, phi) of a unit vector; phi is None at the poles."""
    p = np.asarray(p, dtype=float)
    if abs(np.linalg.norm(p) - 1.0) > 1e-9:
        raise ValueError("input is not a unit vector")
    theta = math.acos(min(1.0, max(-1.0, p[2])))
    rho = math.hypot(p[0], p[1])
    if rho <= pole_eps:
        return theta, None
    return theta, math.atan2(p[1], p[0])


def angular_velocities(p, h):
    """Field-form nutation and precession rates (theta', phi') at a point.

    theta' = (h2 p1 - h1 p2)/sqrt(1 - p3^2),
    phi'   = h3 - (h1 p1 + h2 p2) p3/(p1^2 + p2^2).

    Valid for dynamics whose unit vector precesses as p' = h x p; near the
    poles both are returned as NaN (undefined-direction signal).
    """
    p = np.asarray(p, dtype=float)
    h = np.asarray(h, dtype=float)
    rho2 = p[0] ** 2 + p[1] ** 2
    if rho2 <= _POLE_RHO ** 2:
        return math.nan, math.nan
    rho = math.sqrt(rho2)
    theta_dot = (h[1] * p[0] - h[0] * p[1]) / rho
    phi_dot = h[2] - (h[0] * p[0] + h[1] * p[1]) * p[2] / rho2
    return theta_dot, phi_dot


@dataclass(frozen=True)
class GeometrySample:
    t: float
    theta: float
    phi: float
    theta_dot: float
    phi_dot: float
    curvature: float
    torsion: float
    speed: float
    arc_length: float
    valid: bool
    pole: bool


@dataclass
class GeometrySeries:
    """Per-sample hodograph diagnostics over a uniform time grid.

    `valid` marks samples whose curvature/torsion are trustworthy (speed
    above the floor); `pole` marks samples where phi and the angular rates
    are undefined (transverse radius below threshold).
    """

    times: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    theta_dot: np.ndarray
    phi_dot: np.ndarray
    curvature: np.ndarray
    torsion: np.ndarray
    speed: np.ndarray
    arc_length: np.ndarray
    valid: np.ndarray
    pole: np.ndarray

    def sample(self, i):
        return GeometrySample(self.times[i], self.theta[i], self.phi[i],
                              self.theta_dot[i], self.phi_dot[i],
                              self.curvature[i], self.torsion[i],
                              self.speed[i], self.arc_length[i],
                              bool(self.valid[i]), bool(self.pole[i]))

    def __len__(self):
        return len(self.times)


def _unwrap_skipping(phi_raw, defined):
    """Continuity unwrap of raw azimuths, carrying the branch across pole
    gaps; undefined samples stay NaN."""
    phi = np.full_like(phi_raw, np.nan)
    prev = None
    for i in np.flatnonzero(defined):
        if prev is None:
            phi[i] = phi_raw[i]
        else:
            d = (phi_raw[i] - phi[prev] + math.pi) % (2.0 * math.pi) - math.pi
            if d == -math.pi:
                d = math.pi
            phi[i] = phi[prev] + d
        prev = i
    return phi


def frenet_geometry(times, p):
    """Frenet diagnostics of a unit-vector trajectory on a uniform grid.

    Returns a :class:`GeometrySeries` with curvature |p' x p''|/|p'|^3,
    torsion (p', p'', p''')/|p' x p''|^2, speed |p'|, cumulative arc
    length, spherical angles (phi unwrapped), and the angular rates from
    finite differences of p.
    """
    times = np.asarray(times, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(times) < _STENCIL:
        raise ValueError(f"need at least {_STENCIL} samples")
    dts = np.diff(times)
    dt = dts[0]
    if np.max(np.abs(dts - dt)) > 1e-9 * max(abs(dt), 1e-30):
        raise ValueError("time grid must be uniform")
    norms = np.linalg.norm(p, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-6:
        raise ValueError("trajectory is not on the unit sphere")

    d1 = fd_derivative(p, dt, 1)
    d2 = fd_derivative(p, dt, 2)
    d3 = fd_derivative(p, dt, 3)

    speed = np.linalg.norm(d1, axis=1)
    cross = np.cross(d1, d2)
    ncross = np.linalg.norm(cross, axis=1)
    valid = speed > _SPEED_FLOOR

    with np.errstate(divide="ignore", invalid="ignore"):
        curvature = np.where(valid, ncross / np.maximum(speed, 1e-300) ** 3, np.nan)
        torsion = np.where(valid & (ncross > 1e-300),
                           np.einsum("ij,ij->i", cross, d3) / np.maximum(ncross, 1e-300) ** 2,
                           np.nan)
    arc = _cumulative_parabolic(speed, dt)

    theta = np.arccos(np.clip(p[:, 2], -1.0, 1.0))
    rho2 = p[:, 0] ** 2 + p[:, 1] ** 2
    pole = rho2 <= _POLE_RHO ** 2
    defined = ~pole
    phi_raw = np.where(defined, np.arctan2(p[:, 1], p[:, 0]), np.nan)
    phi = _unwrap_skipping(phi_raw, defined)

    with np.errstate(divide="ignore", invalid="ignore"):
        theta_dot = np.where(defined, -d1[:, 2] / np.sqrt(np.maximum(rho2, 1e-300)), np.nan)
        phi_dot = np.where(defined,
                           (p[:, 0] * d1[:, 1] - p[:, 1] * d1[:, 0]) / np.maximum(rho2, 1e-300),
                           np.nan)

    return GeometrySeries(times, theta, phi, theta_dot, phi_dot,
                          curvature, torsion, speed, arc, valid, pole)


def resonance_geometry(t, h, omega):
    """Closed-form curvature, torsion, speed, arc length on the resonant
    circular-field hodograph (north-pole start, detuning zero).

    The cos(4ht) term of the curvature radicand enters with a minus sign;
    with it the radicand equals 8 |p' x p''|^2 identically (and the
    formulas reproduce the published figure ranges, which the plus sign
    cannot: it makes the radicand negative for omega >> |h|).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if h == 0.0:
        raise ValueError("resonance geometry needs a nonzero transverse amplitude")
    h2, w2 = h * h, omega * omega
    c2 = np.cos(2.0 * h * t_arr)
    c4 = np.cos(4.0 * h * t_arr)
    sh = np.sin(h * t_arr)

    A = (h2 + 3.0 * w2) * (8.0 * h2 * h2 + 4.0 * w2 * h2 + w2 * w2)
    g = 4.0 * (w2 * w2 - h2 * h2 + 3.0 * w2 * h2) * w2 * c2 - (w2 - h2) * w2 * w2 * c4
    radicand = np.maximum(A - g, 0.0)

    speed2 = h2 + w2 * sh * sh
    speed = np.sqrt(speed2)
    denom = (2.0 * speed2) ** 1.5
    curvature = np.sqrt(radicand) / denom

    kap_num = -4.0 * h * omega * (4.0 * h2 * h2 + 7.0 * w2 * h2 + w2 * w2
                                  + w2 * (h2 - w2) * c2) * sh
    with np.errstate(divide="ignore", invalid="ignore"):
        torsion = np.where(radicand > 1e-300, kap_num / radicand, np.nan)

    m = -w2 / h2
    arc = np.array([incomplete_e(abs(h) * ti, m) for ti in t_arr])

    if np.ndim(t) == 0:
        return curvature[0], torsion[0], speed[0], arc[0]
    return curvature, torsion, speed, arc


def curvature_rate(series):
    """dk/dt along a geometry series (7-point finite difference)."""
    dt = series.times[1] - series.times[0]
    k = np.where(np.isfinite(series.curvature), series.curvature, 0.0)
    return fd_derivative(k, dt, 1)


def adjoining_sphere_residual(curvature, curvature_dot, speed, torsion):
    """Deviation of 1/k^2 + (k'/(v k^2 kappa))^2 from the unit-sphere value 1.

    NaN where torsion or speed is too small for the identity to be
    conditioned (those samples are skipped by callers).
    """
    k = np.asarray(curvature, dtype=float)
    kd = np.asarray(curvature_dot, dtype=float)
    v = np.asarray(speed, dtype=float)
    kap = np.asarray(torsion, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        res = 1.0 / k ** 2 + (kd / (v * k * k * kap)) ** 2 - 1.0
        bad = (np.abs(kap) < 1e-9) | (v < _SPEED_FLOOR) | ~np.isfinite(res)
    return np.where(bad, np.nan, res)


@dataclass(frozen=True)
class CuspEvent:
    t: float
    speed: float
    curvature: float


@dataclass(frozen=True)
class LoopEvent:
    t_a: float
    t_b: float


def detect_cusps(series, speed_factor=0.05, curvature_factor=50.0):
    """Cusps: local speed minima below speed_factor x median speed with a
    curvature spike above curvature_factor x median curvature."""
    v = series.speed
    k = series.curvature
    med_v = float(np.median(v))
    med_k = float(np.nanmedian(k))
    events = []
    for i in range(1, len(v) - 1):
        if v[i] <= v[i - 1] and v[i] <= v[i + 1] and v[i] < speed_factor * med_v:
            if np.isfinite(k[i]) and k[i] > curvature_factor * med_k:
                events.append(CuspEvent(float(series.times[i]), float(v[i]), float(k[i])))
    return events


def count_torsion_sign_changes(torsion, deadband=_TORSION_DEADBAND):
    """Count sign flips of the torsion sequence.

    Values beyond the dead-band use hysteresis counting (a flip must cross
    from one side of the band to the other); if the whole sequence sits
    inside the dead-band, raw sign crossings of the sequence are counted
    instead, so near-zero torsion still reports its flip count.
    """
    kap = np.asarray(torsion, dtype=float)
    kap = kap[np.isfinite(kap)]
    if kap.size == 0:
        return 0
    if np.max(np.abs(kap)) <= deadband:
        s = np.sign(kap)
        s = s[s != 0]
        return int(np.sum(s[1:] * s[:-1] < 0))
    state = 0
    count = 0
    for x in kap:
        s = 1 if x > deadband else (-1 if x < -deadband else 0)
        if s != 0:
            if state != 0 and s != state:
                count += 1
            state = s
    return count


def _arc_contains(a, b, n_hat, x, tol=1e-12):
    # x assumed on the great circle of (a, b); test betweenness on the short arc
    return (np.dot(np.cross(a, x), n_hat) >= -tol
            and np.dot(np.cross(x, b), n_hat) >= -tol)


def detect_loops(times, p, max_segments=1500, guard=3):
    """Parameter-distant self-intersections of the spherical polyline.

    The polyline is subsampled to at most `max_segments` chords; two chords
    intersect when the line of their great-circle planes pierces both short
    arcs.  Chord pairs closer than `guard` segments (cyclically, when the
    trajectory is closed) are excluded.
    """
    times = np.asarray(times, dtype=float)
    p = np.asarray(p, dtype=float)
    n = len(p)
    stride = max(1, int(math.ceil((n - 1) / max_segments)))
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    q = p[idx]
    tq = times[idx]
    m = len(q) - 1
    closed = np.linalg.norm(q[0] - q[-1]) < 1e-6

    a, b = q[:-1], q[1:]
    normals = np.cross(a, b)
    nlen = np.linalg.norm(normals, axis=1)
    ok = nlen > 1e-14
    events = []
    for i in range(m - guard - 1):
        if not ok[i]:
            continue
        j0 = i + guard + 1
        js = np.arange(j0, m)
        if closed and i < guard:  # cyclic neighbourhood of the seam
            js = js[js < m - (guard - i)]
        if len(js) == 0:
            continue
        js = js[ok[js]]
        if len(js) == 0:
            continue
        line = np.cross(normals[i], normals[js])
        llen = np.linalg.norm(line, axis=1)
        good = llen > 1e-14
        if not np.any(good):
            continue
        js = js[good]
        x = line[good] / llen[good, None]
        n1 = normals[i] / nlen[i]
        n2 = normals[js] / nlen[js, None]
        for sign in (1.0, -1.0):
            xs = sign * x
            in1 = (np.einsum("ij,j->i", np.cross(np.broadcast_to(a[i], xs.shape), xs), n1) >= -1e-12) \
                & (np.einsum("ij,j->i", np.cross(xs, np.broadcast_to(b[i], xs.shape)), n1) >= -1e-12)
            in2 = (np.einsum("ij,ij->i", np.cross(a[js], xs), n2) >= -1e-12) \
                & (np.einsum("ij,ij->i", np.cross(xs, b[js]), n2) >= -1e-12)
            for jj in np.flatnonzero(in1 & in2):
                events.append(LoopEvent(float(tq[i]), float(tq[js[jj]])))
    return events
