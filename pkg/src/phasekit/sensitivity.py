"""Parameter sensitivity of the orbit, the iPRC, and derived curves.

Differentiating the periodic-orbit BVP with respect to a parameter gives a
linear BVP for the orbit sensitivity Z_x and the frequency sensitivity
S_omega:

    Z' - (1/w) A Z + (1/w^2) v S_w - (1/w) b = 0,   Z periodic,  Z[i](0) = 0

(the last row is the differentiated coordinate phase condition).
Differentiating the adjoint BVP gives a linear BVP for the iPRC sensitivity:

    Zq' + (1/w) A^T Zq + (1/w) C^T q_x = 0,   Zq periodic,
    <Zq, v> + <q_x, Zv> - S_w = 0,

with C the curvature matrix combining second derivatives of f, Z_x, and
S_omega, and Zv = A Z_x + b. Both BVPs are solved by linear shooting with
the variational transport (forward for Z_x, backward for Zq, each its stable
direction); a dense spectral collocation on the grid is the fallback when
shooting conditioning degrades.

A finite-difference oracle recomputes orbits and iPRCs from scratch at
lam_k +- h, phase-aligned through the shared section, for validation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import fourier
from .errors import DegenerateSectionError, UndefinedRelativeError
from .model import (ModelDefinition, ParameterVector, derivatives, dfdlam,
                    eval_f, eval_input_field, jacobian_x)
from .odeint import integrate_rhs
from .orbit import OrbitOptions, PeriodicOrbit, Section, find_periodic_orbit
from .prc import PhaseResponse, compute_iprc

COND_LIMIT = 1e10


@dataclass(frozen=True, eq=False)
class OrbitSensitivity:
    """Solution of the orbit-sensitivity BVP for one parameter."""

    k: int
    s_omega: float
    z_orbit: np.ndarray      # (n, N)
    method: str


@dataclass(frozen=True, eq=False)
class PrcSensitivity:
    """Solution of the iPRC-sensitivity BVP for one parameter."""

    k: int
    z_qx: np.ndarray         # (n, N)
    z_q: np.ndarray          # (N,)
    normalization_residual: float
    method: str


@dataclass(frozen=True, eq=False)
class CMatrixField:
    """The curvature matrix C(theta_j) entering the iPRC-sensitivity BVP."""

    theta: np.ndarray
    values: np.ndarray       # (N, n, n)


@dataclass(frozen=True, eq=False)
class SensitivityBundle:
    """All sensitivity curves of one parameter on the shared phase grid."""

    k: int
    name: str
    omega: float
    theta: np.ndarray
    s_omega: float
    z_orbit: np.ndarray
    z_qx: np.ndarray
    z_q: np.ndarray
    relative: bool = False

    @property
    def s_period(self) -> float:
        # S_T / T = -S_omega / omega with T = 2*pi/omega
        return -2.0 * np.pi * self.s_omega / self.omega ** 2

    @property
    def grid_size(self) -> int:
        return self.z_q.shape[0]


@dataclass(frozen=True, eq=False)
class FDOracle:
    """Central differences of independently recomputed orbit/iPRC objects."""

    k: int
    h: float
    s_omega: float
    z_orbit: np.ndarray
    z_q: np.ndarray
    omega_plus: float
    omega_minus: float


def _orbit_fields(orbit, model, params, k):
    """A, v, b sampled on the grid plus interpolants used by the transports."""
    N = orbit.grid_size
    n = orbit.dim
    a_grid = np.empty((N, n, n))
    v_grid = np.empty((n, N))
    b_grid = np.empty((n, N))
    for j in range(N):
        xj = orbit.states[:, j]
        a_grid[j] = jacobian_x(model, xj, params)
        v_grid[:, j] = eval_f(model, xj, params)
        b_grid[:, j] = dfdlam(model, xj, params, k)
    return a_grid, v_grid, b_grid


def orbit_sensitivity(orbit: PeriodicOrbit, model: ModelDefinition,
                      params: ParameterVector | None = None, k: int = 0, *,
                      ode_tol: float = 1e-12,
                      method: str = "auto") -> OrbitSensitivity:
    """Frequency sensitivity S_omega and orbit sensitivity curve Z_x."""
    if params is None:
        params = orbit.params
    if not 0 <= k < len(params):
        raise ValueError(f"parameter index {k} out of range (q={len(params)})")
    n = orbit.dim
    N = orbit.grid_size
    omega = orbit.omega
    i_sec = orbit.section.index

    if method not in ("auto", "shooting", "collocation"):
        raise ValueError(f"unknown method {method!r}")
    if method == "collocation":
        s_omega, z = _orbit_sensitivity_collocation(orbit, model, params, k)
        return OrbitSensitivity(k=k, s_omega=s_omega, z_orbit=z,
                                method="collocation")

    def rhs(theta, y):
        x = orbit.point(theta)
        a = jacobian_x(model, x, params)
        v = eval_f(model, x, params)
        b = dfdlam(model, x, params, k)
        z_s, z_b, vmat = y[:n], y[n:2 * n], y[2 * n:].reshape(n, n)
        d_s = (a @ z_s) / omega - v / omega ** 2
        d_b = (a @ z_b) / omega + b / omega
        d_v = (a @ vmat) / omega
        return np.concatenate([d_s, d_b, d_v.ravel()])

    y0 = np.concatenate([np.zeros(2 * n), np.eye(n).ravel()])
    transport = integrate_rhs(rhs, y0, (0.0, 2.0 * np.pi), ode_tol)
    y_end = transport.states[:, -1]
    w_s = y_end[:n]
    w_b = y_end[n:2 * n]
    mono = y_end[2 * n:].reshape(n, n)

    bordered = np.zeros((n + 1, n + 1))
    bordered[:n, :n] = mono - np.eye(n)
    bordered[:n, n] = w_s
    bordered[n, i_sec] = 1.0
    rhs_vec = np.zeros(n + 1)
    rhs_vec[:n] = -w_b

    cond = np.linalg.cond(bordered)
    if not np.isfinite(cond):
        raise DegenerateSectionError(
            "orbit-sensitivity shooting system is singular; the section does "
            "not isolate the anchor")
    if cond > COND_LIMIT:
        if method == "shooting":
            raise DegenerateSectionError(
                f"shooting system condition {cond:.2e} exceeds {COND_LIMIT:.0e}")
        s_omega, z = _orbit_sensitivity_collocation(orbit, model, params, k)
        return OrbitSensitivity(k=k, s_omega=s_omega, z_orbit=z,
                                method="collocation")

    sol = np.linalg.solve(bordered, rhs_vec)
    z0, s_omega = sol[:n], float(sol[n])

    z = np.empty((n, N))
    for j in range(N):
        yj = transport.sol(orbit.theta[j])
        z[:, j] = (yj[2 * n:].reshape(n, n) @ z0 + s_omega * yj[:n]
                   + yj[n:2 * n])
    return OrbitSensitivity(k=k, s_omega=s_omega, z_orbit=z, method="shooting")


def _spectral_block_system(orbit):
    """(D kron I_n) for grid unknowns ordered grid-major, state within."""
    N = orbit.grid_size
    n = orbit.dim
    # spectral differentiation matrix, column by column through the FFT route
    dmat = np.empty((N, N))
    for j in range(N):
        e = np.zeros(N)
        e[j] = 1.0
        dmat[:, j] = fourier.grid_derivative(e)
    return np.kron(dmat, np.eye(n))


def _orbit_sensitivity_collocation(orbit, model, params, k):
    n = orbit.dim
    N = orbit.grid_size
    omega = orbit.omega
    a_grid, v_grid, b_grid = _orbit_fields(orbit, model, params, k)

    big_d = _spectral_block_system(orbit)
    block_a = np.zeros((n * N, n * N))
    for j in range(N):
        block_a[j * n:(j + 1) * n, j * n:(j + 1) * n] = a_grid[j]

    rows = np.zeros((n * N + 1, n * N + 1))
    rows[:n * N, :n * N] = big_d - block_a / omega
    rows[:n * N, n * N] = v_grid.T.ravel() / omega ** 2
    rows[n * N, orbit.section.index] = 1.0   # Z_i at theta_0
    rhs = np.zeros(n * N + 1)
    rhs[:n * N] = b_grid.T.ravel() / omega

    try:
        sol, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSectionError(f"collocation system failed: {exc}") from exc
    z = sol[:n * N].reshape(N, n).T
    return float(sol[n * N]), z


def c_matrix_field(orbit: PeriodicOrbit, z_orbit: np.ndarray, s_omega: float,
                   model: ModelDefinition, params: ParameterVector,
                   k: int) -> CMatrixField:
    """Curvature matrix on the grid: C = H_xx . Z_x + H_xlam - (S_w/w) A."""
    N = orbit.grid_size
    n = orbit.dim
    values = np.empty((N, n, n))
    for j in range(N):
        bundle = derivatives(model, orbit.states[:, j], params, k)
        values[j] = (np.einsum("ijk,k->ij", bundle.h_xx, z_orbit[:, j])
                     + bundle.h_xlam - (s_omega / orbit.omega) * bundle.a)
    return CMatrixField(theta=orbit.theta.copy(), values=values)


def prc_sensitivity(orbit: PeriodicOrbit, prc: PhaseResponse,
                    orbit_sens: OrbitSensitivity, model: ModelDefinition,
                    params: ParameterVector | None = None, *,
                    ode_tol: float = 1e-12,
                    method: str = "auto") -> PrcSensitivity:
    """iPRC sensitivity curves Z_qx and Z_q for the parameter of orbit_sens."""
    if params is None:
        params = orbit.params
    k = orbit_sens.k
    n = orbit.dim
    N = orbit.grid_size
    omega = orbit.omega
    s_omega = orbit_sens.s_omega
    z_orbit = orbit_sens.z_orbit

    if method not in ("auto", "shooting", "collocation"):
        raise ValueError(f"unknown method {method!r}")

    bundles = [derivatives(model, orbit.states[:, j], params, k)
               for j in range(N)]
    cvalues = np.stack([
        np.einsum("ijk,k->ij", bundles[j].h_xx, z_orbit[:, j])
        + bundles[j].h_xlam - (s_omega / omega) * bundles[j].a
        for j in range(N)
    ])
    c_coeffs = fourier.coefficients(cvalues.reshape(N, n * n).T)

    anchor = orbit.states[:, 0]
    v0 = eval_f(model, anchor, params)
    zv0 = bundles[0].a @ z_orbit[:, 0] + bundles[0].b
    norm_rhs = s_omega - float(prc.q_x[:, 0] @ zv0)

    if method == "collocation":
        z_qx = _prc_sensitivity_collocation(orbit, prc, bundles, cvalues,
                                            v0, norm_rhs)
        used = "collocation"
    else:
        def rhs(theta, y):
            a = jacobian_x(model, orbit.point(theta), params)
            c = fourier.evaluate(c_coeffs, theta).reshape(n, n)
            qx = prc.q_x_at(theta)
            p, wmat = y[:n], y[n:].reshape(n, n)
            d_p = -(a.T @ p + c.T @ qx) / omega
            d_w = -(a.T @ wmat) / omega
            return np.concatenate([d_p, d_w.ravel()])

        y0 = np.concatenate([np.zeros(n), np.eye(n).ravel()])
        transport = integrate_rhs(rhs, y0, (2.0 * np.pi, 0.0), ode_tol)
        y_at0 = transport.sol(0.0)
        p0 = y_at0[:n]
        w0 = y_at0[n:].reshape(n, n)

        stacked = np.vstack([w0 - np.eye(n), v0])
        rhs_vec = np.concatenate([-p0, [norm_rhs]])
        cond = np.linalg.cond(stacked)
        if cond > COND_LIMIT and method == "auto":
            z_qx = _prc_sensitivity_collocation(orbit, prc, bundles, cvalues,
                                                v0, norm_rhs)
            used = "collocation"
        else:
            z_end, *_ = np.linalg.lstsq(stacked, rhs_vec, rcond=None)
            z_qx = np.empty((n, N))
            for j in range(N):
                yj = transport.sol(orbit.theta[j])
                z_qx[:, j] = yj[:n] + yj[n:].reshape(n, n) @ z_end
            used = "shooting"

    # differentiated normalization residual, reported per contract
    worst = 0.0
    z_q = np.empty(N)
    for j in range(N):
        xj = orbit.states[:, j]
        bundle = bundles[j]
        vj = eval_f(model, xj, params)
        zvj = bundle.a @ z_orbit[:, j] + bundle.b
        res = abs(float(z_qx[:, j] @ vj) + float(prc.q_x[:, j] @ zvj) - s_omega)
        worst = max(worst, res)
        gj = eval_input_field(model, xj, params)
        z_q[j] = float(z_qx[:, j] @ gj) + float(
            prc.q_x[:, j] @ (bundle.g_x @ z_orbit[:, j] + bundle.g_lam))

    return PrcSensitivity(k=k, z_qx=z_qx, z_q=z_q,
                          normalization_residual=worst, method=used)


def _prc_sensitivity_collocation(orbit, prc, bundles, cvalues, v0, norm_rhs):
    n = orbit.dim
    N = orbit.grid_size
    omega = orbit.omega
    big_d = _spectral_block_system(orbit)

    block_at = np.zeros((n * N, n * N))
    forcing = np.empty(n * N)
    for j in range(N):
        block_at[j * n:(j + 1) * n, j * n:(j + 1) * n] = bundles[j].a.T / omega
        forcing[j * n:(j + 1) * n] = (cvalues[j].T @ prc.q_x[:, j]) / omega

    rows = np.zeros((n * N + 1, n * N))
    rows[:n * N] = big_d + block_at
    rows[n * N, :n] = v0
    rhs = np.concatenate([-forcing, [norm_rhs]])
    sol, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    return sol.reshape(N, n).T


def relative_sensitivities(bundle: SensitivityBundle,
                           params: ParameterVector) -> SensitivityBundle:
    """Scale every curve by lam_k: sensitivity to relative parameter change."""
    if bundle.relative:
        return bundle
    lam = float(params.values[bundle.k])
    if lam == 0.0:
        raise UndefinedRelativeError(
            f"parameter {params.names[bundle.k]!r} is zero; relative "
            "sensitivity undefined")
    return replace(bundle, s_omega=bundle.s_omega * lam,
                   z_orbit=bundle.z_orbit * lam, z_qx=bundle.z_qx * lam,
                   z_q=bundle.z_q * lam, relative=True)


def compute_bundle(orbit: PeriodicOrbit, prc: PhaseResponse,
                   model: ModelDefinition,
                   params: ParameterVector | None = None, k: int = 0, *,
                   ode_tol: float = 1e-12, method: str = "auto",
                   relative: bool = False) -> SensitivityBundle:
    """Full sensitivity bundle (orbit + iPRC curves) for one parameter."""
    if params is None:
        params = orbit.params
    osens = orbit_sensitivity(orbit, model, params, k, ode_tol=ode_tol,
                              method=method)
    psens = prc_sensitivity(orbit, prc, osens, model, params,
                            ode_tol=ode_tol, method=method)
    bundle = SensitivityBundle(k=k, name=params.names[k], omega=orbit.omega,
                               theta=orbit.theta.copy(), s_omega=osens.s_omega,
                               z_orbit=osens.z_orbit, z_qx=psens.z_qx,
                               z_q=psens.z_q)
    if relative:
        bundle = relative_sensitivities(bundle, params)
    return bundle


def finite_difference_oracle(model: ModelDefinition, params: ParameterVector,
                             k: int, h: float | None = None, *,
                             grid_size: int = 256,
                             section: Section | None = None,
                             seed=None,
                             ode_tol: float = 1e-12) -> FDOracle:
    """Central differences of orbit and iPRC recomputed at lam_k +- h.

    Both perturbed orbits are anchored by the same section, so theta = 0 is
    comparable and the curve differences are meaningful.
    """
    if not 0 <= k < len(params):
        raise ValueError(f"parameter index {k} out of range (q={len(params)})")
    lam = float(params.values[k])
    if h is None:
        h = 1e-4 * max(abs(lam), 1.0)

    opts = OrbitOptions(grid_size=grid_size, ode_tol=ode_tol)
    results = {}
    for sign in (+1.0, -1.0):
        p_shift = params.with_value_at(k, lam + sign * h)
        orb = find_periodic_orbit(model, p_shift, seed=seed, options=opts,
                                  section=section)
        resp = compute_iprc(orb, model, p_shift, ode_tol=ode_tol)
        results[sign] = (orb, resp)

    orb_p, prc_p = results[1.0]
    orb_m, prc_m = results[-1.0]
    return FDOracle(
        k=k, h=h,
        s_omega=(orb_p.omega - orb_m.omega) / (2.0 * h),
        z_orbit=(orb_p.states - orb_m.states) / (2.0 * h),
        z_q=(prc_p.q - prc_m.q) / (2.0 * h),
        omega_plus=orb_p.omega, omega_minus=orb_m.omega,
    )
