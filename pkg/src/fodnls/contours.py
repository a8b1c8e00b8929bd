"""Cut-avoiding integration paths and quadrature helpers.

Paths are polylines.  A straight segment is used when it clears every cut;
otherwise the route goes radially out to a circle enclosing all cuts, along
the circle in chords, and radially back in.  Endpoint square-root
singularities (integrand ~ 1/sqrt(s - a) at a segment end that is a branch
point) are absorbed by the substitution s = a + u^2 * direction.
"""

from __future__ import annotations

import numpy as np

__all__ = ["gauss_legendre", "segment_quad", "route", "path_integral", "tail_integral"]

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (x, w)
    return _GL_CACHE[n]


def segment_quad(fn, a: complex, b: complex, n: int = 64,
                 sing_start: bool = False, sing_end: bool = False) -> complex:
    """Integral of fn along the straight segment a -> b.

    sing_start/sing_end absorb an inverse-square-root singularity at the
    corresponding endpoint via the u^2 substitution (splitting at the
    midpoint when both ends are singular).
    """
    if sing_start and sing_end:
        m = (a + b) / 2
        return (segment_quad(fn, a, m, n, sing_start=True)
                + segment_quad(fn, m, b, n, sing_end=True))
    if sing_end:
        return segment_quad(lambda s: fn(a + b - s), a, b, n, sing_start=True)
    x, w = gauss_legendre(n)
    d = b - a
    if sing_start:
        # s = a + u^2 * d, u in [0, 1]:  ds = 2 u d du; geometric panels in
        # u resolve the rapid variation the substitution leaves near u = 0
        total = 0.0 + 0.0j
        # the first edge stays away from 0 so the innermost node cannot
        # collapse onto a branch point that sits on another cut
        edges = (0.0, 0.3, 0.55, 0.78, 1.0)
        for u0, u1 in zip(edges[:-1], edges[1:]):
            u = u0 + (u1 - u0) * 0.5 * (x + 1.0)
            wu = 0.5 * (u1 - u0) * w
            s = a + u**2 * d
            vals = fn(s) * 2.0 * u * d
            total += complex(np.sum(wu * vals))
        return total
    s = a + 0.5 * (x + 1.0) * d
    vals = fn(s) * d * 0.5
    return complex(np.sum(w * vals))


def _seg_intersect(p1, p2, q1, q2, tol=1e-12):
    """True if open segments (p1,p2) and (q1,q2) intersect (endpoint contact
    within tol of a segment end is ignored)."""
    d1 = p2 - p1
    d2 = q2 - q1
    den = (d1 * np.conj(d2)).imag
    if abs(den) < 1e-15 * max(abs(d1), 1.0) * max(abs(d2), 1.0):
        return False  # parallel; treated as clear (routes add margin)
    r = q1 - p1
    t = (r * np.conj(d2)).imag / den
    s = (r * np.conj(d1)).imag / den
    return tol < t < 1 - tol and tol < s < 1 - tol


def _clear(a, b, cuts, tol=1e-9):
    return not any(_seg_intersect(a, b, c0, c1, tol) for c0, c1 in cuts)


def route(start: complex, end: complex, cuts, margin: float = 1.5) -> list[complex]:
    """Waypoints of a polyline from start to end avoiding the cut segments."""
    if _clear(start, end, cuts):
        return [start, end]
    pts = [p for c in cuts for p in c] + [start, end]
    R = margin * max(abs(p) for p in pts) + 1.0

    def exit_point(p):
        base = np.angle(p) if abs(p) > 1e-14 else np.pi / 2
        for dth in np.linspace(0, np.pi, 25):
            for s in (1.0, -1.0):
                q = R * np.exp(1j * (base + s * dth))
                if _clear(p, q, cuts):
                    return q
        raise RuntimeError("no cut-avoiding exit ray found")

    p_out = exit_point(start)
    q_out = exit_point(end)
    th0, th1 = np.angle(p_out), np.angle(q_out)
    dth = (th1 - th0 + np.pi) % (2 * np.pi) - np.pi
    narc = max(1, int(np.ceil(abs(dth) / (np.pi / 4))))
    arc = [R * np.exp(1j * (th0 + dth * j / narc)) for j in range(1, narc)]
    return [start, p_out, *arc, q_out, end]


def path_integral(fn, waypoints, n: int = 64, sing_start: bool = False,
                  sing_end: bool = False) -> complex:
    """Integral of fn along a polyline, with optional singular first/last point."""
    total = 0.0 + 0.0j
    last = len(waypoints) - 2
    for i in range(last + 1):
        total += segment_quad(fn, waypoints[i], waypoints[i + 1], n,
                              sing_start=(sing_start and i == 0),
                              sing_end=(sing_end and i == last))
    return total


def tail_integral(fn, a: float, n: int = 96) -> complex:
    """Integral of fn over the real ray [a, inf) via y = a + s/(1-s)."""
    x, w = gauss_legendre(n)
    s = 0.5 * (x + 1.0)
    y = a + s / (1.0 - s)
    vals = fn(y) / (1.0 - s) ** 2
    return complex(np.sum(0.5 * w * vals))
