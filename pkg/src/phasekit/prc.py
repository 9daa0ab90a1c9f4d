"""Phase response curves: adjoint (infinitesimal) and direct (finite).

The state iPRC q_x solves the adjoint boundary value problem

    q_x'(theta) + (1/omega) A(theta)^T q_x(theta) = 0,
    q_x periodic,   <q_x(theta), f(x(theta))> = omega,

solved here by taking the eigenvector of the monodromy adjoint Phi(T)^T at
eigenvalue 1, normalizing at theta = 0, and transporting backward over one
period (the stable direction for the adjoint of a stable orbit). The drift
of the normalization before per-point rescaling is reported as the residual.

The finite PRC applies the impulse as a state jump x -> x + eps*g(x) (exact
for Dirac inputs on input-affine systems) and measures the asymptotic phase
shift by direct simulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fourier
from .errors import (AccuracyError, BasinEscapeError, DivergenceError,
                     NonHyperbolicError, StiffnessError)
from .model import (ModelDefinition, ParameterVector, eval_f, eval_input_field,
                    jacobian_x)
from .odeint import integrate, integrate_rhs
from .orbit import PeriodicOrbit


def wrap_phase(x):
    """Wrap an angle (or array) to (-pi, pi]."""
    return -((-np.asarray(x) + np.pi) % (2.0 * np.pi) - np.pi)


@dataclass(frozen=True, eq=False)
class PhaseResponse:
    """State and input iPRCs on the orbit's phase grid."""

    theta: np.ndarray
    q_x: np.ndarray                    # (n, N)
    q: np.ndarray                      # (N,)
    normalization_residual: np.ndarray  # per grid point, before rescaling
    omega: float
    periodicity_defect: float
    coeffs: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.coeffs is None:
            object.__setattr__(self, "coeffs", fourier.coefficients(self.q_x))

    @property
    def grid_size(self) -> int:
        return self.q_x.shape[1]

    def q_x_at(self, theta) -> np.ndarray:
        return fourier.evaluate(self.coeffs, theta)

    def q_at(self, theta) -> np.ndarray:
        return fourier.evaluate(fourier.coefficients(self.q), theta)


@dataclass(frozen=True)
class FinitePrcSample:
    """One direct-perturbation measurement of the phase shift."""

    theta: float
    eps: float
    delta_theta: float        # wrapped to (-pi, pi]
    periods: int              # whole periods integrated before convergence
    residual_distance: float  # final distance to the orbit


def compute_iprc(orbit: PeriodicOrbit, model: ModelDefinition,
                 params: ParameterVector | None = None,
                 ode_tol: float = 1e-12,
                 residual_tol: float = 1e-6) -> PhaseResponse:
    """Adjoint-route iPRC on the orbit's grid."""
    if not orbit.hyperbolic:
        raise NonHyperbolicError("iPRC requires a hyperbolic orbit")
    if params is None:
        params = orbit.params
    n = orbit.dim
    N = orbit.grid_size
    omega = orbit.omega

    eigvals, eigvecs = np.linalg.eig(orbit.monodromy_matrix.T)
    idx = int(np.argmin(np.abs(eigvals - 1.0)))
    v = eigvecs[:, idx]
    if np.max(np.abs(v.imag)) > 1e-9 * np.max(np.abs(v.real)):
        raise AccuracyError("adjoint eigenvector at multiplier 1 is not real")
    v = np.real(v)

    f0 = eval_f(model, orbit.anchor, params)
    scale = float(v @ f0)
    if scale == 0.0:
        raise AccuracyError("adjoint eigenvector is orthogonal to the flow")
    q0 = v * (omega / scale)

    def rhs(theta, q):
        a = jacobian_x(model, orbit.point(theta), params)
        return -(a.T @ q) / omega

    transport = integrate_rhs(rhs, q0, (2.0 * np.pi, 0.0), ode_tol)

    q_x = np.empty((n, N))
    residual = np.empty(N)
    for j in range(N):
        qj = transport.sol(orbit.theta[j])
        fj = eval_f(model, orbit.states[:, j], params)
        ip = float(qj @ fj)
        residual[j] = abs(ip - omega) / omega
        if ip == 0.0:
            raise AccuracyError(f"adjoint transport degenerate at grid point {j}")
        q_x[:, j] = qj * (omega / ip)
    if residual.max() > residual_tol:
        worst = int(np.argmax(residual))
        raise AccuracyError(
            f"iPRC normalization drift {residual.max():.3e} exceeds "
            f"{residual_tol:.1e} (worst at theta index {worst})")

    periodicity_defect = float(np.linalg.norm(q_x[:, 0] - q0))

    g_grid = np.column_stack([eval_input_field(model, orbit.states[:, j], params)
                              for j in range(N)])
    q = np.einsum("ij,ij->j", q_x, g_grid)

    return PhaseResponse(theta=orbit.theta.copy(), q_x=q_x, q=q,
                         normalization_residual=residual, omega=omega,
                         periodicity_defect=periodicity_defect)


def project_to_orbit(orbit: PeriodicOrbit, x) -> tuple[float, float]:
    """Nearest-point phase on the orbit and the distance to it.

    Grid argmin (ties resolved to the smallest phase) followed by Newton on
    the closest-point condition of the trigonometric interpolant.
    """
    x = np.asarray(x, dtype=float)
    d2 = np.sum((orbit.states - x[:, None]) ** 2, axis=0)
    theta = float(orbit.theta[int(np.argmin(d2))])

    dcoeffs = fourier.derivative_coefficients(orbit.coeffs)
    d2coeffs = fourier.derivative_coefficients(dcoeffs)
    step_cap = 2.0 * np.pi / orbit.grid_size
    for _ in range(20):
        p = fourier.evaluate(orbit.coeffs, theta)
        dp = fourier.evaluate(dcoeffs, theta)
        ddp = fourier.evaluate(d2coeffs, theta)
        r = x - p
        grad = -2.0 * float(r @ dp)
        hess = 2.0 * float(dp @ dp) - 2.0 * float(r @ ddp)
        if hess <= 0.0:
            break
        step = -grad / hess
        step = float(np.clip(step, -step_cap, step_cap))
        theta += step
        if abs(step) < 1e-14:
            break
    theta %= 2.0 * np.pi
    dist = float(np.linalg.norm(x - fourier.evaluate(orbit.coeffs, theta)))
    return theta, dist


def _asymptotic_phase_full(orbit, model, params, x, delta_conv, max_periods,
                           ode_tol, basin_factor):
    x = np.asarray(x, dtype=float)
    centroid = orbit.states.mean(axis=1)
    bound = basin_factor * max(orbit.diameter, 1e-12)
    if np.linalg.norm(x - centroid) > bound:
        raise BasinEscapeError(
            f"initial point is {np.linalg.norm(x - centroid):.3g} from the "
            f"orbit centroid, beyond the basin heuristic {bound:.3g}")

    period = orbit.period
    y = x
    elapsed = 0.0
    for k in range(max_periods + 1):
        theta, dist = project_to_orbit(orbit, y)
        if dist <= delta_conv:
            phase = (theta - orbit.omega * elapsed) % (2.0 * np.pi)
            return phase, k, dist
        try:
            traj = integrate(model, y, params, None, (0.0, period), ode_tol)
        except (DivergenceError, StiffnessError) as exc:
            raise BasinEscapeError(f"trajectory left the basin: {exc}") from exc
        y = traj.states[:, -1]
        if np.linalg.norm(y - centroid) > bound:
            raise BasinEscapeError("trajectory left the basin heuristic bound")
        elapsed += period
    raise BasinEscapeError(
        f"no convergence to the orbit within {max_periods} periods "
        f"(distance {dist:.3e}, needs {delta_conv:.3e})")


def asymptotic_phase(orbit: PeriodicOrbit, model: ModelDefinition,
                     params: ParameterVector | None = None,
                     x=None, *, delta_conv: float | None = None,
                     max_periods: int = 200, ode_tol: float = 1e-12,
                     basin_factor: float = 100.0) -> float:
    """Asymptotic phase of a basin point, by convergence onto the orbit."""
    if params is None:
        params = orbit.params
    if delta_conv is None:
        delta_conv = 1e-8 * orbit.diameter
    phase, _, _ = _asymptotic_phase_full(orbit, model, params, x, delta_conv,
                                         max_periods, ode_tol, basin_factor)
    return phase


def compute_finite_prc(orbit: PeriodicOrbit, model: ModelDefinition,
                       params: ParameterVector | None = None,
                       eps: float = 1e-4, thetas=None, *,
                       delta_conv: float | None = None, max_periods: int = 200,
                       ode_tol: float = 1e-12) -> list[FinitePrcSample]:
    """Finite-amplitude PRC by direct perturbation at the given phases."""
    if eps == 0.0:
        raise ValueError("finite PRC needs a nonzero impulse amplitude")
    if params is None:
        params = orbit.params
    if thetas is None:
        thetas = fourier.grid(16)
    if delta_conv is None:
        delta_conv = 1e-8 * orbit.diameter

    samples = []
    for theta in np.atleast_1d(np.asarray(thetas, dtype=float)):
        x = orbit.point(theta)
        jumped = x + eps * eval_input_field(model, x, params)
        phase, periods, dist = _asymptotic_phase_full(
            orbit, model, params, jumped, delta_conv, max_periods, ode_tol,
            basin_factor=100.0)
        shift = float(wrap_phase(phase - theta))
        samples.append(FinitePrcSample(theta=float(theta), eps=float(eps),
                                       delta_theta=shift, periods=periods,
                                       residual_distance=dist))
    return samples
