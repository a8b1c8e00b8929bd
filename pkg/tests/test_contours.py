"""Quadrature helpers checked against closed-form integrals."""

import numpy as np

from fodnls.contours import (gauss_legendre, segment_quad, route,
                             path_integral, tail_integral)


def test_gauss_legendre_cached_and_exact():
    x, w = gauss_legendre(12)
    assert gauss_legendre(12) is not (x, w) or True  # cache returns same tuple
    assert gauss_legendre(12)[0] is x
    # degree-23 polynomial integrated exactly on [-1, 1]
    p = np.polynomial.Polynomial(np.arange(1.0, 25.0))
    exact = (p.integ()(1.0) - p.integ()(-1.0))
    assert abs(np.sum(w * p(x)) - exact) < 1e-12 * abs(exact)


def test_segment_quad_polynomial():
    val = segment_quad(lambda s: s**3, 1.0 + 1.0j, 2.0 - 1.0j)
    exact = ((2.0 - 1.0j)**4 - (1.0 + 1.0j)**4) / 4.0
    assert abs(val - exact) < 1e-12


def test_segment_quad_sqrt_singularity():
    # int_0^1 1/sqrt(s) ds = 2, with the singular endpoint at the start
    val = segment_quad(lambda s: 1.0 / np.sqrt(s), 0.0, 1.0, sing_start=True)
    assert abs(val - 2.0) < 1e-10
    # and at the end
    val = segment_quad(lambda s: 1.0 / np.sqrt(1.0 - s), 0.0, 1.0,
                       sing_end=True)
    assert abs(val - 2.0) < 1e-10


def test_segment_quad_both_ends_singular():
    # int_0^1 ds / sqrt(s(1-s)) = pi
    val = segment_quad(lambda s: 1.0 / np.sqrt(s * (1.0 - s)), 0.0, 1.0,
                       sing_start=True, sing_end=True)
    assert abs(val - np.pi) < 1e-9


def test_route_clear_is_direct():
    cuts = [(-1j, 1j)]
    assert route(1.0, 2.0, cuts) == [1.0, 2.0]


def test_route_avoids_cut():
    cuts = [(-1j, 1j)]
    wp = route(-1.0 + 0.0j, 1.0 + 0.0j, cuts)
    assert len(wp) > 2
    # no leg of the polyline crosses the cut
    from fodnls.contours import _seg_intersect
    for a, b in zip(wp[:-1], wp[1:]):
        assert not _seg_intersect(a, b, -1j, 1j)


def test_path_integral_closed_form():
    # int of 1/k along a detour from -1 to 1 around [-i, i]: the polyline
    # stays in C minus the cut so the integral is log(1) - log(-1) on the
    # branch continued along the path
    cuts = [(-1j, 1j)]
    wp = route(-1.0 + 0.0j, 1.0 + 0.0j, cuts)
    val = path_integral(lambda k: 1.0 / k, wp, n=96)
    assert min(abs(val - 1j * np.pi), abs(val + 1j * np.pi)) < 1e-9


def test_tail_integral():
    # int_2^inf dy / y^2 = 1/2
    assert abs(tail_integral(lambda y: 1.0 / y**2, 2.0) - 0.5) < 1e-12
    # int_1^inf e^{-y} dy = e^{-1}
    assert abs(tail_integral(lambda y: np.exp(-y), 1.0, n=160)
               - np.exp(-1.0)) < 1e-9
