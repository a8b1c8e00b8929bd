"""Direct scattering: Jost solutions, the coefficients a, b and gamma = b/a.

The Jost functions are integrated as an ODE in x (the derivative form of the
Volterra equations), starting from the plane-wave normalization at each end
of the grid and meeting at a matching point, where Wronskians give the
scattering coefficients.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .spectral import Background, d_factor, lam

__all__ = [
    "InitialDatum",
    "ScatteringData",
    "jost_normalizer",
    "integrate_jost",
    "det_drift",
    "scattering_coeffs",
    "compute_scattering",
    "reflection",
    "continue_reflection",
    "read_datum_csv",
    "write_scattering_csv",
    "read_scattering_csv",
]


@dataclass(frozen=True)
class InitialDatum:
    """Samples of q(x, 0) on a uniform grid, decaying to q-+ at the ends."""

    x_grid: np.ndarray
    q_values: np.ndarray
    bg: Background
    decay_tol: float = 1e-8

    def __post_init__(self):
        x = np.asarray(self.x_grid, dtype=float)
        q = np.asarray(self.q_values, dtype=complex)
        if x.shape != q.shape:
            raise ValueError("x_grid and q_values must have matching shapes")
        dx = np.diff(x)
        if not np.allclose(dx, dx[0], rtol=1e-10):
            raise ValueError("x_grid must be uniform")
        object.__setattr__(self, "x_grid", x)
        object.__setattr__(self, "q_values", q)
        for endpoint, target in ((q[0], self.q_minus), (q[-1], self.q_plus)):
            if abs(endpoint - target) > self.decay_tol * max(1.0, self.bg.q0):
                raise ValueError(
                    "datum has not reached the background at a grid end: "
                    f"|q - q_bc| = {abs(endpoint - target):.3e}")

    @property
    def q_plus(self) -> complex:
        return self.bg.q_plus

    @property
    def q_minus(self) -> complex:
        # symmetric boundary data: the same modulus-q0 constant on both ends
        return self.bg.q_plus

    def interpolant(self):
        return CubicSpline(self.x_grid, self.q_values)

    def matching_point(self) -> float:
        """Midpoint of the support of q - background, per-side weighted."""
        dev = np.abs(self.q_values - self.q_plus)
        if dev.max() < 1e-14:
            return float(0.5 * (self.x_grid[0] + self.x_grid[-1]))
        w = dev / dev.sum()
        return float(np.sum(w * self.x_grid))


def jost_normalizer(k: complex, bg: Background, sign: int):
    """E_pm(k): the plane-wave eigenvector matrix normalizing the Jost
    solutions at x -> +-infinity."""
    qb = bg.q_plus  # q_plus = q_minus here
    lm = lam(k, bg)
    off = (lm - k)
    return np.array([[1.0, off / (1j * np.conj(qb))],
                     [off / (1j * qb), 1.0]], dtype=complex)


def _mu_rhs(x, y, k_arr, lam_arr, q_of_x):
    """Right side of mu_x = (-ik sigma3 + Q) mu + i lam mu sigma3, stacked
    over the k grid (y holds 4 complex entries per k)."""
    nk = len(k_arr)
    mu = y.reshape(nk, 2, 2)
    q = q_of_x(x)
    out = np.empty_like(mu)
    m11, m12, m21, m22 = mu[:, 0, 0], mu[:, 0, 1], mu[:, 1, 0], mu[:, 1, 1]
    ik = 1j * k_arr
    il = 1j * lam_arr
    qc = np.conj(q)
    out[:, 0, 0] = -ik * m11 + q * m21 + il * m11
    out[:, 0, 1] = -ik * m12 + q * m22 - il * m12
    out[:, 1, 0] = ik * m21 - qc * m11 + il * m21
    out[:, 1, 1] = ik * m22 - qc * m12 - il * m22
    return out.reshape(-1)


def integrate_jost(datum: InitialDatum, k, side: str, x_m: float | None = None,
                   rtol: float = 1e-10, atol: float = 1e-12):
    """mu_- (integrated from the left end) or mu_+ (from the right end) at
    the matching point, for one k or an array of real k.

    Returns an array of shape (nk, 2, 2); raises if the determinant drifts
    from 2*lam/(lam + k) by more than 1e-6.
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    k_arr = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(np.abs(k_arr) < 1e-12):
        raise ValueError("k = 0 lies on the branch cut")
    lam_arr = np.array([lam(complex(kv), datum.bg) for kv in k_arr])
    if x_m is None:
        x_m = datum.matching_point()
    q_of_x = datum.interpolant()
    if side == "minus":
        x0, x1 = float(datum.x_grid[0]), float(x_m)
    else:
        x0, x1 = float(datum.x_grid[-1]), float(x_m)
    y0 = np.array([jost_normalizer(complex(kv), datum.bg, +1)
                   for kv in k_arr]).reshape(-1)
    sol = solve_ivp(_mu_rhs, (x0, x1), y0, args=(k_arr, lam_arr, q_of_x),
                    method="RK45", rtol=rtol, atol=atol, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"Jost integration failed: {sol.message}")
    mu = sol.y[:, -1].reshape(len(k_arr), 2, 2)
    det = mu[:, 0, 0] * mu[:, 1, 1] - mu[:, 0, 1] * mu[:, 1, 0]
    d_ref = np.array([d_factor(complex(kv), datum.bg) for kv in k_arr])
    drift = np.max(np.abs(det - d_ref))
    if drift > 1e-6:
        raise RuntimeError(
            f"integration unstable, refine step (det drift {drift:.3e})")
    return mu


def det_drift(datum: InitialDatum, k, x_m: float | None = None,
              rtol: float = 1e-10) -> float:
    """Max deviation of det mu_+- at the matching point from 2*lam/(lam+k)."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    if x_m is None:
        x_m = datum.matching_point()
    worst = 0.0
    d_ref = np.array([d_factor(complex(kv), datum.bg) for kv in k_arr])
    for side in ("minus", "plus"):
        mu = integrate_jost(datum, k_arr, side, x_m=x_m, rtol=rtol)
        det = mu[:, 0, 0] * mu[:, 1, 1] - mu[:, 0, 1] * mu[:, 1, 0]
        worst = max(worst, float(np.max(np.abs(det - d_ref))))
    return worst


def scattering_coeffs(datum: InitialDatum, k, x_m: float | None = None,
                      rtol: float = 1e-10):
    """(a, b) for one k or an array, via Wronskians of the matched Jost
    columns divided by d(k).

    Complex k is allowed: the datum coincides with the background outside
    a bounded interval, so both Wronskians continue analytically off the
    real axis."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=complex))
    if x_m is None:
        x_m = datum.matching_point()
    mu_m = integrate_jost(datum, k_arr, "minus", x_m=x_m, rtol=rtol)
    mu_p = integrate_jost(datum, k_arr, "plus", x_m=x_m, rtol=rtol)
    kc = k_arr.astype(complex)
    lam_arr = np.array([lam(complex(kv), datum.bg) for kv in kc])
    d_arr = np.array([d_factor(complex(kv), datum.bg) for kv in kc])
    # Psi = mu * exp(-i theta sigma3); theta = lam * x at t = 0.
    ph_m = np.exp(-1j * lam_arr * x_m)
    ph_p = np.exp(+1j * lam_arr * x_m)
    psi_m1 = mu_m[:, :, 0] * ph_m[:, None]
    psi_p2 = mu_p[:, :, 1] * ph_p[:, None]
    psi_p1 = mu_p[:, :, 0] * ph_m[:, None]
    a = (psi_m1[:, 0] * psi_p2[:, 1] - psi_m1[:, 1] * psi_p2[:, 0]) / d_arr
    b = (psi_p1[:, 0] * psi_m1[:, 1] - psi_p1[:, 1] * psi_m1[:, 0]) / d_arr
    if np.any(np.abs(a) < 1e-10):
        raise ValueError("zero of a(k) encountered")
    if np.isscalar(k) or np.asarray(k).ndim == 0:
        return complex(a[0]), complex(b[0])
    return a, b


@dataclass
class ScatteringData:
    """a, b, gamma sampled on a real k grid with a cubic interpolant."""

    k_grid: np.ndarray
    a_values: np.ndarray
    b_values: np.ndarray
    gamma_values: np.ndarray
    _spline_re: CubicSpline = field(init=False, repr=False)
    _spline_im: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        self.k_grid = np.asarray(self.k_grid, dtype=float)
        self.a_values = np.asarray(self.a_values, dtype=complex)
        self.b_values = np.asarray(self.b_values, dtype=complex)
        self.gamma_values = np.asarray(self.gamma_values, dtype=complex)
        uni = np.abs(self.a_values * np.conj(self.a_values)
                     + self.b_values * np.conj(self.b_values) - 1.0)
        self.unitarity_defect = float(np.max(uni))
        self._spline_re = CubicSpline(self.k_grid, self.gamma_values.real)
        self._spline_im = CubicSpline(self.k_grid, self.gamma_values.imag)


def compute_scattering(datum: InitialDatum, k_grid=None,
                       rtol: float = 1e-10) -> ScatteringData:
    """Scattering data on a real grid (default 801 points on [-6,6] with a
    hole at 0)."""
    if k_grid is None:
        k_grid = np.linspace(-6.0, 6.0, 801)
        k_grid = k_grid[np.abs(k_grid) > 1e-3]
    k_grid = np.asarray(k_grid, dtype=float)
    a, b = scattering_coeffs(datum, k_grid, rtol=rtol)
    return ScatteringData(k_grid=k_grid, a_values=a, b_values=b,
                          gamma_values=b / a)


def reflection(data: ScatteringData, k):
    """Interpolated gamma(k) inside the grid hull; exact at the nodes."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k_arr < data.k_grid[0]) or np.any(k_arr > data.k_grid[-1]):
        raise ValueError("reflection requested outside the sampled k hull")
    out = np.empty(k_arr.shape, dtype=complex)
    # exact node values bit-for-bit; spline only between nodes
    idx = np.searchsorted(data.k_grid, k_arr)
    idx = np.clip(idx, 0, len(data.k_grid) - 1)
    exact = np.isclose(data.k_grid[idx], k_arr, rtol=0, atol=0)
    out[exact] = data.gamma_values[idx[exact]]
    rest = ~exact
    out[rest] = (data._spline_re(k_arr[rest])
                 + 1j * data._spline_im(k_arr[rest]))
    if np.isscalar(k) or np.asarray(k).ndim == 0:
        return complex(out[0])
    return out


def continue_reflection(datum: InitialDatum, data: ScatteringData,
                        imag_tol: float = 1e-12):
    """gamma as a callable on complex arguments.

    Real arguments use the sampled-grid interpolant (zero beyond the hull,
    where gamma has decayed below the quadrature tolerances); arguments off
    the axis are computed from the Jost Wronskians directly, which is the
    analytic continuation because the datum has bounded support."""
    lo, hi = float(data.k_grid[0]), float(data.k_grid[-1])

    def gamma(k):
        k_arr = np.atleast_1d(np.asarray(k, dtype=complex))
        out = np.zeros(k_arr.shape, dtype=complex)
        on_axis = np.abs(k_arr.imag) <= imag_tol
        inside = on_axis & (k_arr.real >= lo) & (k_arr.real <= hi)
        if np.any(inside):
            out[inside] = reflection(data, k_arr[inside].real)
        off = ~on_axis
        if np.any(off):
            a, b = scattering_coeffs(datum, k_arr[off])
            out[off] = np.atleast_1d(b) / np.atleast_1d(a)
        if np.isscalar(k) or np.asarray(k).ndim == 0:
            return complex(out[0])
        return out

    return gamma


def read_datum_csv(path, bg: Background, decay_tol: float = 1e-8) -> InitialDatum:
    """CSV columns: x, Re q, Im q (header row optional)."""
    xs, qs = [], []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                x, re_q, im_q = (float(c) for c in row[:3])
            except ValueError:
                if i == 0:
                    continue  # header
                raise ValueError(f"malformed CSV row {i} in {path}")
            xs.append(x)
            qs.append(re_q + 1j * im_q)
    if not xs:
        raise ValueError(f"no data rows in {path}")
    return InitialDatum(np.array(xs), np.array(qs), bg, decay_tol=decay_tol)


def write_scattering_csv(path, data: ScatteringData, header_comment: str = ""):
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["k", "Re a", "Im a", "Re b", "Im b",
                    "Re gamma", "Im gamma"])
        for k, a, b, g in zip(data.k_grid, data.a_values, data.b_values,
                              data.gamma_values):
            w.writerow([repr(float(k)), repr(float(a.real)),
                        repr(float(a.imag)), repr(float(b.real)),
                        repr(float(b.imag)), repr(float(g.real)),
                        repr(float(g.imag))])


def read_scattering_csv(path) -> ScatteringData:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#") or row[0] == "k":
                continue
            rows.append([float(c) for c in row])
    arr = np.array(rows)
    return ScatteringData(
        k_grid=arr[:, 0],
        a_values=arr[:, 1] + 1j * arr[:, 2],
        b_values=arr[:, 3] + 1j * arr[:, 4],
        gamma_values=arr[:, 5] + 1j * arr[:, 6])
