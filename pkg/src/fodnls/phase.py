"""Stationary points, the band endpoint, and the slow-phase constants.

For a given ray speed xi = x/t this module solves, in order:

1. the quartic numerator of f'(k) for the stationary points (two real roots
   k1 < k2 and a complex-conjugate pair),
2. the moment condition fixing the real point k0 (with the band endpoint
   chi tied to k0 algebraically), and
3. the Abelian-integral constants Omega, omega0 and G(infinity) attached to
   the corrected phase omega(k).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .contours import path_integral, route, segment_quad
from .spectral import Background, BandEndpoint, lam, z_curve

__all__ = [
    "PhaseGeometry",
    "AbelianConstants",
    "stationary_points",
    "sign_structure",
    "chi_from_k0",
    "solve_k0",
    "omega_eval",
    "linear_defect",
    "omega0_const",
    "Omega_const",
    "G_infty",
    "f_prime",
]


@dataclass(frozen=True)
class PhaseGeometry:
    """Solved geometry for one xi: stationary points, k0 and the band endpoint."""

    xi: float
    k0: float
    k1: float
    k2: float
    chi: BandEndpoint
    residuals: dict = field(default_factory=dict)

    def cuts(self, bg: Background):
        """The cut segments eta, [k0, chi], [k0, chi*] as endpoint pairs."""
        return [(-1j * bg.q0, 1j * bg.q0),
                (complex(self.k0), self.chi.chi),
                (complex(self.k0), self.chi.chi_conj)]


@dataclass
class AbelianConstants:
    """Every scalar constant entering the leading-order formula."""

    Omega: float
    omega0: float
    G_infty: float
    vartheta: float | None = None
    g_infty: float | None = None


def _quartic_coeffs(xi: float, bg: Background):
    q0sq = bg.q0**2
    return [-32.0, 0.0, -(16.0 * q0sq - 4.0), xi, 4.0 * q0sq**2 + 2.0 * q0sq]


def f_prime(k, xi: float, bg: Background):
    """df/dk = quartic(k) / sqrt(k^2 + q0^2) on the lam branch."""
    num = np.polyval(_quartic_coeffs(xi, bg), k)
    return num / lam(k, bg)


def stationary_points(xi: float, bg: Background):
    """Roots of f'(k): (k1, k2) real with k1 <= k2, plus the complex pair."""
    if xi == 0:
        raise ValueError("xi must be nonzero")
    roots = np.roots(_quartic_coeffs(xi, bg))
    tol = 1e-8 * max(1.0, np.max(np.abs(roots)))
    real = np.sort(roots[np.abs(roots.imag) < tol].real)
    cplx = roots[np.abs(roots.imag) >= tol]
    if len(real) != 2 or len(cplx) != 2:
        raise ValueError("outside single-band regime: expected 2 real roots, "
                         f"got {len(real)}")
    return float(real[0]), float(real[1]), complex(cplx[0]), complex(cplx[1])


def sign_structure(xi: float, bg: Background, window=(-3.0, 3.0, -2.0, 2.0),
                   n: int = 100):
    """Sampled sign of Re(i f) on a rectangular grid; NaN on the cut line."""
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys)
    K = X + 1j * Y
    out = np.full(K.shape, np.nan)
    on_eta = (np.abs(X) < 1e-12) & (np.abs(Y) <= bg.q0)
    ok = ~on_eta
    q0sq = bg.q0**2
    lm = K[ok] * np.sqrt(1.0 + q0sq / K[ok] ** 2)
    f = lm * (xi - 8.0 * K[ok] ** 3 + 2.0 * K[ok] + 4.0 * K[ok] * q0sq)
    out[ok] = np.sign((1j * f).real)
    return X, Y, out


def chi_from_k0(k0: float, k1: float, k2: float, bg: Background) -> BandEndpoint:
    """Band endpoint from the large-k matching: chi1 = -(k0+k1+k2) and the
    chi2 radical."""
    rad = (8.0 * (k0**2 + k1**2 + k2**2)
           + 8.0 * (k1 * k0 + k2 * k0 + k2 * k1)
           + 4.0 * bg.q0**2 - 1.0)
    if rad <= 0:
        raise ValueError("band endpoint collapsed: nonpositive radicand")
    return BandEndpoint(chi1=-(k0 + k1 + k2), chi2=0.5 * np.sqrt(rad))


def _moment(k0: float, k1: float, k2: float, bg: Background, n: int = 200):
    """The vanishing moment over eta that pins k0 (chi is re-tied to k0)."""
    chi = chi_from_k0(k0, k1, k2, bg)
    q0 = bg.q0
    j = np.arange(1, n + 1)
    s = q0 * np.cos((2 * j - 1) * np.pi / (2 * n))
    y = 1j * s
    w = np.sqrt((y - chi.chi1) ** 2 + chi.chi2**2)
    vals = w * (y - k0) * (y - k1) * (y - k2)
    # dy = i ds; the 1/sqrt(q0^2 - s^2) weight is absorbed by the nodes
    return 1j * (np.pi / n) * np.sum(vals)


def solve_k0(xi: float, bg: Background, n_quad: int = 200,
             residual_tol: float = 1e-8) -> tuple[float, PhaseGeometry]:
    """Root of the eta-moment inside (k1, k2), with chi(k0) nested."""
    k1, k2, *_ = stationary_points(xi, bg)
    span = k2 - k1
    grid = np.linspace(k1 + 1e-6 * span, k2 - 1e-6 * span, 201)
    vals = np.array([_moment(g, k1, k2, bg, n_quad) for g in grid])
    # the moment is one complex number per k0; root-solve its dominant part
    comp = np.real if np.ptp(vals.real) >= np.ptp(vals.imag) else np.imag
    cv = comp(vals)
    sign_flip = np.nonzero(np.diff(np.sign(cv)))[0]
    if len(sign_flip) == 0:
        raise ValueError("k0 bracket failed: no sign change in (k1, k2)")
    i = sign_flip[0]
    k0 = brentq(lambda g: comp(_moment(g, k1, k2, bg, n_quad)),
                grid[i], grid[i + 1], xtol=1e-14)
    resid = abs(_moment(k0, k1, k2, bg, 2 * n_quad))
    if resid > residual_tol:
        raise ValueError(f"k0 moment residual {resid:.3e} above tolerance")
    chi = chi_from_k0(k0, k1, k2, bg)
    geo = PhaseGeometry(
        xi=xi, k0=float(k0), k1=k1, k2=k2, chi=chi,
        residuals={
            "fprime_k1": abs(f_prime(k1, xi, bg)),
            "fprime_k2": abs(f_prime(k2, xi, bg)),
            "moment_k0": resid,
        })
    return float(k0), geo


def _quintic_over_z(geo: PhaseGeometry, bg: Background):
    chi = geo.chi

    def fn(y):
        num = ((y - geo.k0) * (y - geo.k1) * (y - geo.k2)
               * (y - chi.chi) * (y - chi.chi_conj))
        return num / z_curve(y, chi, bg, k0=geo.k0)

    return fn


def _regularized_integrand(geo: PhaseGeometry, bg: Background):
    """P5/z minus its cubic large-k part (stabilized at large |k|).

    The direct difference loses ~|k|^3 * eps of absolute accuracy to
    cancellation, so away from the cuts it is swapped for the equivalent
    rational form N / (l * (c3*w + p*l)) where N = c3^2 w^2 - p^2 l^2 is a
    polynomial whose top three coefficients vanish identically (and are
    zeroed explicitly so the cancellation happens once, in coefficient
    space).
    """
    from .spectral import _w_wedge

    fn = _quintic_over_z(geo, bg)
    xi = geo.xi
    chi = geo.chi
    q0 = bg.q0

    c3 = np.poly([geo.k0, geo.k1, geo.k2])
    wsq = np.array([1.0, -2.0 * chi.chi1, chi.chi1**2 + chi.chi2**2])
    lsq = np.array([1.0, 0.0, q0**2])
    p = np.array([1.0, 0.0, -1.0 / 8.0, -xi / 32.0])
    num = np.polysub(np.polymul(np.polymul(c3, c3), wsq),
                     np.polymul(np.polymul(p, p), lsq))
    num[:3] = 0.0
    switch = 20.0 * max(q0, chi.chi2, abs(geo.k1), abs(geo.k2), 1.0)

    def reg(y):
        y = np.asarray(y, dtype=complex)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        out = np.empty_like(y)
        near = np.abs(y) <= switch
        if np.any(near):
            yn = y[near]
            out[near] = fn(yn) - (yn**3 - yn / 8.0 - xi / 32.0)
        if np.any(~near):
            yf = y[~near]
            ell = yf * np.sqrt(1.0 + q0**2 / yf**2)
            w = _w_wedge(yf, chi, geo.k0)
            den = ell * (np.polyval(c3, yf) * w + np.polyval(p, yf) * ell)
            out[~near] = np.polyval(num, yf) / den
        return out[0] if scalar else out

    return reg


def omega_eval(k: complex, geo: PhaseGeometry, bg: Background,
               n_quad: int = 96) -> complex:
    """omega(k) along cut-avoiding paths from +-i q0.

    Uses the regularized split: the cubic part of P5/z integrates in closed
    form to the explicit quartic polynomial, so only the decaying remainder
    is quadratured (keeps relative accuracy at large k).
    """
    reg = _regularized_integrand(geo, bg)
    cuts = geo.cuts(bg)
    total = 0.0 + 0.0j
    for s0 in (1j * bg.q0, -1j * bg.q0):
        wp = route(s0, complex(k), cuts)
        total += path_integral(reg, wp, n=n_quad, sing_start=True)
    q0 = bg.q0
    poly = -8.0 * k**4 + 2.0 * k**2 + geo.xi * k + 8.0 * q0**4 + 2.0 * q0**2
    return -16.0 * total + poly


def omega_boundary(k: complex, geo: PhaseGeometry, bg: Background, side: str,
                   cut: str, n_quad: int = 96) -> complex:
    """Boundary value of omega on a cut via a small normal offset."""
    from .spectral import boundary_value, cut_normal

    if cut == "eta":
        a, b = -1j * bg.q0, 1j * bg.q0
    elif cut == "varpi+":
        a, b = complex(geo.k0), geo.chi.chi
    elif cut == "varpi-":
        a, b = complex(geo.k0), geo.chi.chi_conj
    else:
        raise ValueError(f"unknown cut {cut!r}")
    side = {"+": "left", "-": "right"}.get(side, side)
    n = cut_normal(a, b, side)
    scale = max(bg.q0, geo.chi.chi2)
    return boundary_value(lambda kk: omega_eval(complex(kk), geo, bg, n_quad),
                          k, n, scale=scale)


def linear_defect(geo: PhaseGeometry, bg: Background) -> float:
    """Constant term of P5/z - (k^3 - k/8 - xi/32) at large k, in closed form.

    The symmetric-function expansion of P5/z gives the k^0 coefficient
    S*P - T - chi2^2*S with S, P, T the elementary symmetric functions of
    (k0, k1, k2).  At the k0 pinned by the vanishing eta-moment this does
    not coincide with -xi/32, so omega carries a residual linear term
    -32*linear_defect*k on top of the quartic tail.
    """
    k0, k1, k2 = geo.k0, geo.k1, geo.k2
    S = k0 + k1 + k2
    P = k0 * k1 + k0 * k2 + k1 * k2
    T = k0 * k1 * k2
    return (S * P - T - geo.chi.chi2**2 * S) + geo.xi / 32.0


def _tail_fit(geo: PhaseGeometry, bg: Background, n_terms: int = 6,
              radius: float = 60.0, n_fft: int = 256):
    """Laurent coefficients c_m of sum_{m>=1} c_m / y^m for the regularized
    integrand, extracted by FFT on a circle enclosing all cuts.

    The y^0 coefficient is checked against the closed-form linear defect as
    a branch sanity test before the tail is trusted.
    """
    reg = _regularized_integrand(geo, bg)
    R = radius * max(bg.q0, geo.chi.chi2, abs(geo.k1), abs(geo.k2), 1.0)
    th = 2.0 * np.pi * np.arange(n_fft) / n_fft
    ring = R * np.exp(1j * th)
    vals = reg(ring)
    # y^{-m} pairs with e^{-im theta}, i.e. the negative-frequency FFT bin
    modes = np.fft.fft(vals) / n_fft
    dc = linear_defect(geo, bg)
    if abs(modes[0] - dc) > 1e-8 * max(1.0, abs(dc)):
        raise ValueError("tail expansion inconsistent with closed-form "
                         f"constant: {modes[0]:.3e} vs {dc:.3e}")
    return np.array([(modes[-m] * R**m).real for m in range(1, n_terms + 1)])


def omega0_const(geo: PhaseGeometry, bg: Background, n_quad: int = 96,
                 anchor: float | None = None, radius: float = 2000.0) -> float:
    """The constant term omega0 of the large-k expansion of omega(k).

    The regularized integrand tends to a nonzero constant (linear_defect)
    and carries a 1/y tail, so the plain improper integral picks up linear
    and logarithmic growth in the truncation radius.  Both are removed in
    closed form using the fitted tail model; what remains converges like
    radius^-4 and doubling the radius is a cheap self-check.
    """
    reg = _regularized_integrand(geo, bg)
    dc = linear_defect(geo, bg)
    c = _tail_fit(geo, bg)
    if anchor is None:
        anchor = max(geo.k2, geo.chi.chi1, 0.0) + bg.q0 + 2.0
    a = float(anchor)

    def remainder(y):
        out = reg(y) - dc
        for m, cm in enumerate(c, start=1):
            out = out - cm / y**m
        return out

    cuts = geo.cuts(bg)
    total = 0.0 + 0.0j
    for s0 in (1j * bg.q0, -1j * bg.q0):
        wp = route(s0, complex(a), cuts)
        total += path_integral(reg, wp, n=n_quad, sing_start=True)
        lo = a
        while lo < radius:
            hi = min(2.0 * lo, radius)
            total += segment_quad(remainder, complex(lo), complex(hi), n=n_quad)
            lo = hi
    # finite part of the model tail on [a, infinity): the divergent
    # dc*R + c1*log(R) pieces cancel against the expansion of omega itself
    model_fp = dc * a + c[0] * np.log(a)
    for m, cm in enumerate(c[1:], start=2):
        model_fp -= cm / ((m - 1) * a ** (m - 1))
    val = (-16.0 * total + 8.0 * bg.q0**4 + 2.0 * bg.q0**2
           + 32.0 * model_fp)
    return _real_checked(val, "omega0")


def Omega_const(geo: PhaseGeometry, bg: Background, n_quad: int = 96) -> float:
    """Omega = -32 (int_{i q0}^{chi} + int_{-i q0}^{chi*}) P5/z dk (real)."""
    fn = _quintic_over_z(geo, bg)
    cuts = geo.cuts(bg)
    total = 0.0 + 0.0j
    for s0, s1 in ((1j * bg.q0, geo.chi.chi), (-1j * bg.q0, geo.chi.chi_conj)):
        wp = route(s0, s1, cuts)
        total += path_integral(fn, wp, n=n_quad, sing_start=True, sing_end=True)
    return _real_checked(-32.0 * total, "Omega")


def G_infty(omega0: float, bg: Background) -> float:
    """G(infinity) = omega0 - 3 q0^4 - q0^2."""
    return omega0 - 3.0 * bg.q0**4 - bg.q0**2


def _real_checked(val: complex, name: str, tol: float = 1e-6) -> float:
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ValueError(f"{name} expected real, got imaginary part {val.imag:.3e}")
    return float(val.real)
