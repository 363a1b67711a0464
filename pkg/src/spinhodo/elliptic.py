"""Jacobi elliptic functions and the elliptic integrals used by the field
model and arc-length formulas.

Conventions
-----------
`k` always denotes the elliptic *modulus* (0 <= k <= 1).  The arc-length
integral takes the *parameter* `m`, which may be negative; the two are
related by m = k**2 only on the non-negative branch.  Everything here is
evaluated with descending-Landen/AGM recursions or fixed-order
Gauss-Legendre panels, accurate to ~1e-15 relative, so downstream 1e-8
ODE tolerances are never limited by the special functions.
"""

import math

import numpy as np

__all__ = [
    "jacobi_sncndn",
    "complete_k",
    "incomplete_e",
]

# AGM scale convergence: quadratic, so the loop terminates in ~8 iterations
# for any k in (0, 1); the bound only guards pathological float input.
_AGM_EPS = 1.0e-10
_AGM_MAX_ITER = 32

# 16-point Gauss-Legendre rule on [-1, 1]; panels of width <= pi/8 push the
# quadrature error for the smooth arc-length integrand below 1e-15.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_PANEL_WIDTH = math.pi / 8.0


def _check_modulus(k):
    if not (isinstance(k, (int, float)) and math.isfinite(k)):
        raise ValueError(f"elliptic modulus must be a finite real, got {k!r}")
    if k < 0.0 or k > 1.0:
        raise ValueError(f"elliptic modulus must lie in [0, 1], got {k}")


def jacobi_sncndn(u, k):
    """Return the triple (sn(u|k), cn(u|k), dn(u|k)).

    Uses the descending-Landen AGM scale with a backward recurrence for dn.
    The limits k=0 (trigonometric) and k=1 (hyperbolic) are returned in
    closed form.
    """
    if not math.isfinite(u):
        raise ValueError(f"argument must be finite, got {u!r}")
    _check_modulus(k)

    if k == 0.0:
        return math.sin(u), math.cos(u), 1.0
    if k == 1.0:
        sech = 1.0 / math.cosh(u)
        return math.tanh(u), sech, sech

    # descending AGM ladder; em/en record the scale for the back substitution
    mc = (1.0 - k) * (1.0 + k)  # complementary parameter 1 - k^2
    a = 1.0
    c = 0.0
    em = []
    en = []
    for _ in range(_AGM_MAX_ITER):
        em.append(a)
        mc = math.sqrt(mc)
        en.append(mc)
        c = 0.5 * (a + mc)
        if abs(a - mc) <= _AGM_EPS * a:
            break
        mc = a * mc
        a = c

    u = c * u
    sn, cn = math.sin(u), math.cos(u)
    dn = 1.0
    if sn != 0.0:
        a = cn / sn
        c *= a
        for b, e in zip(reversed(em), reversed(en)):
            a *= c
            c *= dn
            dn = (e + a) / (b + a)
            a = c / b
        a = 1.0 / math.sqrt(c * c + 1.0)
        sn = a if sn >= 0.0 else -a
        cn = c * sn
    return sn, cn, dn


def complete_k(k):
    """Complete elliptic integral of the first kind K(k), by AGM.

    4*K(k)/omega is the real period of sn and cn in the drive field;
    dn repeats already after 2*K(k)/omega.
    """
    _check_modulus(k)
    if k == 1.0:
        raise ValueError("K(k) diverges at k = 1")
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    while abs(a - b) > 1e-16 * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def incomplete_e(phi, m):
    """Incomplete integral  int_0^phi sqrt(1 - m sin^2 x) dx.

    This is the second-kind form (integrand power +1/2).  `m` is the
    parameter and may be negative, which is how the resonance arc length
    uses it (m = -omega^2/h^2).  Evaluated by composite 16-point
    Gauss-Legendre panels; the integrand is analytic whenever
    m sin^2 x < 1 on the range, so convergence is spectral.
    """
    if not (math.isfinite(phi) and math.isfinite(m)):
        raise ValueError("phi and m must be finite reals")
    if phi == 0.0:
        return 0.0
    if m > 1.0:
        # integrand turns imaginary once |sin x| reaches 1/sqrt(m)
        x_crit = math.asin(1.0 / math.sqrt(m))
        if abs(phi) > x_crit + 1e-15:
            raise ValueError(
                f"integrand imaginary on range: m*sin^2 reaches {m * 1.0:.3g} > 1"
            )

    sign = 1.0 if phi > 0 else -1.0
    span = abs(phi)
    n_panels = max(1, int(math.ceil(span / _PANEL_WIDTH)))
    edges = np.linspace(0.0, span, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    # (n_panels, 16) evaluation points
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    s = np.sin(x)
    radicand = 1.0 - m * s * s
    if np.any(radicand < 0.0):
        raise ValueError("integrand imaginary on range (m sin^2 x > 1 reached)")
    vals = np.sqrt(radicand)
    total = float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * vals))
    return sign * total
