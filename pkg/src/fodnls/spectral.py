"""Branch-cut-aware elementary functions of the spectral parameter k.

All functions share the same branch conventions:

* ``lam`` has its cut on the vertical segment eta = [-i*q0, i*q0] and is
  normalized so that lam(k) ~ k at infinity.
* ``z_curve`` adds the "wedge" cut varpi = [k0, chi] u [k0, chi*] (straight
  segments) and is normalized so that z(k) ~ k^2 at infinity.
* ``r_quartic`` has the same cut system eta u varpi and tends to 1 at
  infinity.

On-cut boundary values are obtained by evaluating a small distance off the
cut on the requested side and Richardson-extrapolating to the cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Background",
    "BandEndpoint",
    "OnCutError",
    "lam",
    "d_factor",
    "phase_f",
    "theta_phase",
    "z_curve",
    "r_quartic",
    "boundary_value",
    "cut_normal",
]


class OnCutError(ValueError):
    """Raised when a cut-interior point is evaluated without a side flag."""


@dataclass(frozen=True)
class Background:
    """Boundary data anchoring every branch cut and formula.

    q0 is the background amplitude, q_plus the (complex) boundary value with
    |q_plus| = q0, and gamma_disp the fourth-order dispersion coefficient.
    """

    q0: float
    q_plus: complex
    gamma_disp: float = 1.0

    def __post_init__(self):
        if self.q0 <= 0:
            raise ValueError("q0 must be positive")
        if abs(abs(self.q_plus) - self.q0) > 1e-12 * self.q0:
            raise ValueError("|q_plus| must equal q0")


@dataclass(frozen=True)
class BandEndpoint:
    """Upper band endpoint chi = chi1 + i*chi2 (chi2 > 0) and its conjugate."""

    chi1: float
    chi2: float

    def __post_init__(self):
        if self.chi2 <= 0:
            raise ValueError("chi2 must be positive")

    @property
    def chi(self) -> complex:
        return complex(self.chi1, self.chi2)

    @property
    def chi_conj(self) -> complex:
        return complex(self.chi1, -self.chi2)


_CUT_TOL = 1e-14


def _on_segment(k, a, b, tol):
    """True where k lies on the open segment (a, b)."""
    k = np.asarray(k, dtype=complex)
    d = b - a
    L = abs(d)
    t = ((k - a) * np.conj(d)).real / L**2
    off = np.abs((k - a) - t * d)
    return (off < tol * max(L, 1.0)) & (t > tol) & (t < 1 - tol)


def cut_normal(a: complex, b: complex, side: str) -> complex:
    """Unit normal pointing to the given side of the cut oriented a -> b.

    "left" is the + side for a contour traversed from a to b.
    """
    d = (b - a) / abs(b - a)
    if side == "left":
        return 1j * d
    if side == "right":
        return -1j * d
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def boundary_value(fn, k, normal: complex, scale: float = 1.0):
    """Boundary value of fn at k on the side of the given unit normal.

    Three-point Richardson extrapolation in the offset eps removes the
    linear and quadratic terms of fn(k + eps*normal).
    """
    eps = 1e-4 * scale
    f1 = fn(k + eps * normal)
    f2 = fn(k + (eps / 2) * normal)
    f3 = fn(k + (eps / 4) * normal)
    # eliminate O(eps) and O(eps^2)
    return (f1 - 6.0 * f2 + 8.0 * f3) / 3.0


def lam(k, bg: Background, side: str | None = None):
    """sqrt(k^2 + q0^2) with cut [-i*q0, i*q0], normalized lam ~ k at infinity.

    Realized as k*sqrt(1 + q0^2/k^2) with the principal square root, which
    places the cut exactly on the segment and keeps Schwartz symmetry.
    """
    q0 = bg.q0
    if side is not None:
        n = cut_normal(-1j * q0, 1j * q0, side)
        return boundary_value(lambda kk: lam(kk, bg), k, n, scale=q0)
    k = np.asarray(k, dtype=complex)
    if np.any(_on_segment(k, -1j * q0, 1j * q0, _CUT_TOL)):
        raise OnCutError("on-cut evaluation requires side")
    out = k * np.sqrt(1.0 + q0**2 / k**2)
    return out if out.ndim else complex(out)


def d_factor(k, bg: Background, side: str | None = None):
    """d(k) = 2*lam/(lam + k), the Jost-solution determinant; -> 1 at infinity."""
    lm = lam(k, bg, side=side)
    k = np.asarray(k, dtype=complex)
    den = lm + k
    if np.any(np.abs(den) < 1e-14):
        raise ZeroDivisionError("d-factor pole")
    out = 2.0 * lm / den
    return out if np.asarray(out).ndim else complex(out)


def phase_f(k, xi: float, bg: Background, side: str | None = None):
    """f(k) = lam * (xi - 8k^3 + 2k + 4k q0^2); for real k -> +inf, f ~ -8k^4."""
    lm = lam(k, bg, side=side)
    k = np.asarray(k, dtype=complex)
    out = lm * (xi - 8.0 * k**3 + 2.0 * k + 4.0 * k * bg.q0**2)
    return out if np.asarray(out).ndim else complex(out)


def theta_phase(x: float, t: float, k, bg: Background, side: str | None = None):
    """theta = lam * [x + (-8k^3 + 2k + 4k q0^2) t]; equals t*f(k, x/t) for t != 0."""
    lm = lam(k, bg, side=side)
    k = np.asarray(k, dtype=complex)
    out = lm * (x + (-8.0 * k**3 + 2.0 * k + 4.0 * k * bg.q0**2) * t)
    return out if np.asarray(out).ndim else complex(out)


def _in_triangle(k, a: complex, b: complex, c: complex):
    """True where k is strictly inside the triangle (a, b, c)."""
    k = np.asarray(k, dtype=complex)

    def cross(p, q, r):
        return ((q - p) * np.conj(r - p)).imag

    d1 = cross(a, b, k)
    d2 = cross(b, c, k)
    d3 = cross(c, a, k)
    neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    return ~(neg & pos) & (np.abs(d1) + np.abs(d2) + np.abs(d3) > 0)


def _w_wedge(k, chi: BandEndpoint, k0: float):
    """sqrt((k - chi)(k - chi*)) ~ k at infinity, cut on [k0,chi] u [k0,chi*].

    Built from the straight-segment branch between chi and chi*, then
    sign-flipped inside the triangle (chi, k0, chi*), which moves the cut
    from the straight segment onto the wedge through k0.
    """
    c, cc = chi.chi, chi.chi_conj
    k = np.asarray(k, dtype=complex)
    m = chi.chi1  # segment midpoint
    u = 1j * chi.chi2  # half-chord
    w = (k - m) * np.sqrt(1.0 - u**2 / (k - m) ** 2)
    if abs(k0 - chi.chi1) > _CUT_TOL:
        flip = _in_triangle(k, c, complex(k0), cc)
        w = np.where(flip, -w, w)
    return w


def _check_wedge(k, chi: BandEndpoint, k0: float):
    c, cc = chi.chi, chi.chi_conj
    p0 = complex(k0)
    on = _on_segment(k, p0, c, _CUT_TOL) | _on_segment(k, p0, cc, _CUT_TOL)
    if np.any(on):
        raise OnCutError("on-cut evaluation requires side")


def z_curve(k, chi: BandEndpoint, bg: Background, k0: float | None = None,
            side: str | None = None, cut: str | None = None):
    """z(k) = sqrt((k^2 + q0^2)(k - chi)(k - chi*)) with cuts eta u varpi.

    The branch is fixed by z(k) ~ k^2 at infinity.  k0 locates the wedge
    vertex of varpi; it defaults to chi1 (straight cut between chi and
    chi*).  For boundary values pass side together with cut in
    {"eta", "varpi+", "varpi-"} naming the cut the point lies on.
    """
    if k0 is None:
        k0 = chi.chi1

    def _z(kk):
        return lam(kk, bg) * _w_wedge(kk, chi, k0)

    if side is not None:
        if cut == "eta":
            a, b = -1j * bg.q0, 1j * bg.q0
        elif cut == "varpi+":
            a, b = complex(k0), chi.chi
        elif cut == "varpi-":
            a, b = complex(k0), chi.chi_conj
        else:
            raise ValueError("boundary value needs cut in {'eta','varpi+','varpi-'}")
        n = cut_normal(a, b, side)
        return boundary_value(_z, k, n, scale=max(bg.q0, chi.chi2))
    _check_wedge(k, chi, k0)
    out = _z(k)
    return out if np.asarray(out).ndim else complex(out)


def r_quartic(k, chi: BandEndpoint, bg: Background, k0: float | None = None,
              side: str | None = None, cut: str | None = None):
    """Fourth root ((k-chi)(k-i q0) / ((k-chi*)(k+i q0)))^(1/4) with r -> 1.

    Realized as exp((Log u + Log v)/4) with u = (k-chi)/(k-chi*) and
    v = (k-i q0)/(k+i q0); the principal Log of u has its cut on the straight
    segment [chi*, chi], moved onto the wedge by adding +-2*pi*i inside the
    triangle (chi, k0, chi*).  Jump across every cut is a factor i.
    """
    if k0 is None:
        k0 = chi.chi1

    shift = 0.0
    if abs(k0 - chi.chi1) > _CUT_TOL:
        # continuity probe across the straight segment [chi*, chi]: the
        # interior Log u gets the 2*pi*i shift that cancels the jump there.
        eps = 1e-7 * chi.chi2
        d = 1.0 if k0 > chi.chi1 else -1.0
        p_in = chi.chi1 + eps * d
        p_out = chi.chi1 - eps * d
        lu_in = np.log((p_in - chi.chi) / (p_in - chi.chi_conj))
        lu_out = np.log((p_out - chi.chi) / (p_out - chi.chi_conj))
        shift = 2j * np.pi * round((lu_out - lu_in).imag / (2 * np.pi))

    def _r(kk):
        kk = np.asarray(kk, dtype=complex)
        lu = np.log((kk - chi.chi) / (kk - chi.chi_conj))
        lv = np.log((kk - 1j * bg.q0) / (kk + 1j * bg.q0))
        if abs(k0 - chi.chi1) > _CUT_TOL:
            flip = _in_triangle(kk, chi.chi, complex(k0), chi.chi_conj)
            lu = np.where(flip, lu + shift, lu)
        return np.exp(0.25 * (lu + lv))

    if side is not None:
        if cut == "eta":
            a, b = -1j * bg.q0, 1j * bg.q0
        elif cut == "varpi+":
            a, b = complex(k0), chi.chi
        elif cut == "varpi-":
            a, b = complex(k0), chi.chi_conj
        else:
            raise ValueError("boundary value needs cut in {'eta','varpi+','varpi-'}")
        n = cut_normal(a, b, side)
        return boundary_value(_r, k, n, scale=max(bg.q0, chi.chi2))
    _check_wedge(k, chi, k0)
    q0 = bg.q0
    kk = np.asarray(k, dtype=complex)
    if np.any(_on_segment(kk, -1j * q0, 1j * q0, _CUT_TOL)):
        raise OnCutError("on-cut evaluation requires side")
    out = _r(k)
    return out if np.asarray(out).ndim else complex(out)
