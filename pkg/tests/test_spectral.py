"""Branch functions checked against algebraic oracles: squared relations,
large-k normalization, Schwartz symmetry, and cut placement."""

import numpy as np
import pytest

from fodnls.spectral import (Background, BandEndpoint, OnCutError, lam,
                             d_factor, phase_f, z_curve, r_quartic,
                             boundary_value, cut_normal)

BG = Background(q0=np.sqrt(0.5), q_plus=np.sqrt(0.5))
CHI = BandEndpoint(chi1=-0.0129449916, chi2=0.8023220864)
K0 = -0.047583123

RNG = np.random.default_rng(7)


def _samples(n=200, spread=3.0):
    return RNG.uniform(-spread, spread, n) + 1j * RNG.uniform(-spread,
                                                              spread, n)


def test_lam_square_and_normalization():
    k = _samples()
    np.testing.assert_allclose(lam(k, BG)**2, k**2 + BG.q0**2, rtol=1e-12)
    big = 1e6 * np.exp(1j * np.linspace(0.1, 2 * np.pi, 17))
    np.testing.assert_allclose(lam(big, BG) / big, 1.0, rtol=1e-10)


def test_lam_schwartz_symmetry():
    k = _samples(50)
    np.testing.assert_allclose(lam(np.conj(k), BG), np.conj(lam(k, BG)),
                               rtol=1e-12)


def test_lam_cut_jump_sign():
    # the two boundary values across eta differ by a sign
    for y in (0.3, -0.5, 0.66):
        p = 1j * y * BG.q0
        lp = lam(p, BG, side="left")
        lm = lam(p, BG, side="right")
        assert abs(lp + lm) < 1e-8
        assert abs(lp) > 0.1


def test_lam_on_cut_requires_side():
    with pytest.raises(OnCutError):
        lam(0.3j * BG.q0, BG)


def test_d_factor_identity():
    k = _samples(100)
    lm = lam(k, BG)
    np.testing.assert_allclose(d_factor(k, BG), 2.0 * lm / (lm + k),
                               rtol=1e-12)


def test_phase_f_large_k():
    k = np.array([300.0, -300.0])
    np.testing.assert_allclose(phase_f(k, 1.0, BG) / (-8.0 * k**4), 1.0,
                               rtol=1e-3)


def test_z_curve_square():
    k = _samples()
    z = z_curve(k, CHI, BG, k0=K0)
    target = (k**2 + BG.q0**2) * (k - CHI.chi) * (k - CHI.chi_conj)
    np.testing.assert_allclose(z**2, target, rtol=1e-10)
    big = 1e5 * np.exp(1j * np.linspace(0.1, 2 * np.pi, 9))
    np.testing.assert_allclose(z_curve(big, CHI, BG, k0=K0) / big**2, 1.0,
                               rtol=1e-8)


def test_z_curve_continuity_across_chord():
    # the straight segment [chi*, chi] is not a cut once the wedge vertex
    # k0 is supplied: values on both sides of the chord must agree
    eps = 1e-9
    p = CHI.chi1 + 0.2j
    zl = z_curve(p - eps, CHI, BG, k0=K0)
    zr = z_curve(p + eps, CHI, BG, k0=K0)
    assert abs(zl - zr) < 1e-6 * abs(zl)


def test_z_curve_jump_on_wedge():
    mid = 0.5 * (complex(K0) + CHI.chi)
    zp = z_curve(mid, CHI, BG, k0=K0, side="left", cut="varpi+")
    zm = z_curve(mid, CHI, BG, k0=K0, side="right", cut="varpi+")
    assert abs(zp + zm) < 1e-6 * abs(zp)


def test_r_quartic_normalization_and_fourth_power():
    k = _samples(100)
    r = r_quartic(k, CHI, BG, k0=K0)
    target = ((k - CHI.chi) * (k - 1j * BG.q0)
              / ((k - CHI.chi_conj) * (k + 1j * BG.q0)))
    np.testing.assert_allclose(r**4, target, rtol=1e-10)
    big = 1e6 + 0.3j
    assert abs(r_quartic(big, CHI, BG, k0=K0) - 1.0) < 1e-5


def test_r_quartic_jump_factor_i():
    # across every cut the boundary values differ by a factor +-i
    pts = {
        "eta": 0.25j * BG.q0,
        "varpi+": 0.5 * (complex(K0) + CHI.chi),
        "varpi-": 0.5 * (complex(K0) + CHI.chi_conj),
    }
    for cut, p in pts.items():
        rp = r_quartic(p, CHI, BG, k0=K0, side="left", cut=cut)
        rm = r_quartic(p, CHI, BG, k0=K0, side="right", cut=cut)
        ratio = rp / rm
        assert min(abs(ratio - 1j), abs(ratio + 1j)) < 1e-6


def test_boundary_value_extrapolation():
    # Richardson extrapolation recovers polynomial boundary data exactly
    fn = lambda k: 2.0 + 3.0 * k + 0.5 * k**2
    n = cut_normal(0.0, 1j, "left")
    val = boundary_value(fn, 0.4j, n)
    assert abs(val - fn(0.4j)) < 1e-12


def test_background_validation():
    with pytest.raises(ValueError):
        Background(q0=-1.0, q_plus=1.0)
    with pytest.raises(ValueError):
        Background(q0=1.0, q_plus=2.0)
    with pytest.raises(ValueError):
        BandEndpoint(chi1=0.0, chi2=-0.1)
