"""Shared fixtures.  The expensive pipeline objects (band-scalar solves,
scattering runs, the end-to-end benchmark) are session-scoped so every test
file reuses one instance."""

import time

import numpy as np
import pytest

from fodnls.spectral import Background
from fodnls.scattering import (InitialDatum, compute_scattering,
                               continue_reflection)
from fodnls.phase import (solve_k0, omega0_const, Omega_const, G_infty,
                          AbelianConstants)
from fodnls.profiles import RationalReflection
from fodnls.rh import GFunction
from fodnls.thetamodel import period_tau
from fodnls.pde import SimulationConfig, FieldSnapshot, compare_asymptotic

BG_A = Background(q0=np.sqrt(0.5), q_plus=np.sqrt(0.5), gamma_disp=1.0)


def gaussian_datum(bg, width_sq=4.0, amp=0.2, span=14.0, n=1401):
    x = np.linspace(-span, span, n)
    q = bg.q0 * (1.0 + amp * np.exp(-x**2 / width_sq))
    return InitialDatum(x, q.astype(complex), bg)


@pytest.fixture(scope="session")
def bg_a():
    return BG_A


@pytest.fixture(scope="session")
def gamma_synth():
    return RationalReflection()


@pytest.fixture(scope="session")
def geo_a():
    return solve_k0(1.0, BG_A)[1]


@pytest.fixture(scope="session")
def gf_a(geo_a, gamma_synth):
    return GFunction(geo_a, BG_A, gamma_synth)


@pytest.fixture(scope="session")
def surface_a(geo_a):
    return period_tau(geo_a, BG_A)


@pytest.fixture(scope="session")
def consts_a(geo_a, gf_a):
    om0 = omega0_const(geo_a, BG_A)
    return AbelianConstants(
        Omega=float(np.real(Omega_const(geo_a, BG_A))),
        omega0=float(np.real(om0)),
        G_infty=float(np.real(G_infty(om0, BG_A))),
        vartheta=float(np.real(gf_a.vartheta)),
        g_infty=float(np.real(gf_a.g_infty)))


@pytest.fixture(scope="session")
def datum_a():
    return gaussian_datum(BG_A)


@pytest.fixture(scope="session")
def scattering_a(datum_a):
    t0 = time.perf_counter()
    data = compute_scattering(datum_a)
    return data, time.perf_counter() - t0


@pytest.fixture(scope="session")
def benchmark_run():
    """End-to-end run on a weak background (kept weak so the modulational
    noise amplification 2.83 * q0^2 * t stays below the double-precision
    saturation threshold through t = 80)."""
    t0 = time.perf_counter()
    bg = Background(q0=np.sqrt(0.05), q_plus=np.sqrt(0.05), gamma_disp=1.0)
    datum = gaussian_datum(bg)
    data = compute_scattering(datum)
    gamma = continue_reflection(datum, data)
    xi = 0.6
    _, geo = solve_k0(xi, bg)
    om0 = omega0_const(geo, bg)
    gf = GFunction(geo, bg, gamma)
    consts = AbelianConstants(
        Omega=float(np.real(Omega_const(geo, bg))),
        omega0=float(np.real(om0)),
        G_infty=float(np.real(G_infty(om0, bg))),
        vartheta=float(np.real(gf.vartheta)),
        g_infty=float(np.real(gf.g_infty)))
    surface = period_tau(geo, bg)
    sim = SimulationConfig(L=256.0, n_modes=2048, dt=2e-3, T=80.0, bg=bg,
                           sponge_width=0.12, sponge_strength=2.0)
    x = sim.x_grid
    u0 = bg.q0 * (1.0 + 0.2 * np.exp(-x**2 / 4.0))
    init = FieldSnapshot(t=0.0, x_grid=x, u_values=u0.astype(complex))
    report = compare_asymptotic(sim, init, consts, surface, xi,
                                t_list=(20.0, 40.0, 80.0))
    return {
        "report": report,
        "elapsed": time.perf_counter() - t0,
        "consts": consts,
        "surface": surface,
        "vartheta_raw": gf.vartheta,
        "g_infty_raw": gf.g_infty,
        "xi": xi,
    }
