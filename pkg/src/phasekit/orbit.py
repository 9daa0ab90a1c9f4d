"""Periodic-orbit boundary value problem via single shooting.

Unknowns are the anchor state x0 and the period T; the residual stacks the
periodicity defect x(T) - x0 with the phase condition x0[i] - level (a
coordinate Poincare section). The Newton matrix is the bordered system

    [ Phi(T) - I   f(x(T)) ] [dx]   [ x0 - x(T) ]
    [   e_i^T         0    ] [dT] = [ level - x0[i] ]

whose border removes the time-translation null direction. Floquet
multipliers of the monodromy matrix certify hyperbolicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import fourier
from .errors import ConvergenceError, NoCrossingError, NonHyperbolicError
from .model import ModelDefinition, ParameterVector, eval_f
from .odeint import integrate, integrate_variational, section_crossings


@dataclass(frozen=True)
class Section:
    """Coordinate phase anchor x[index] = level, crossed in direction +-1."""

    index: int
    level: float
    direction: int = 1

    def as_tuple(self):
        return (self.index, self.level, self.direction)

    @classmethod
    def for_model(cls, model: ModelDefinition) -> "Section":
        return cls(model.section_index, model.section_level, model.section_direction)


@dataclass(frozen=True)
class OrbitOptions:
    grid_size: int = 256
    ode_tol: float = 1e-12
    residual_tol: float = 1e-9
    newton_tol: float = 1e-11
    max_iterations: int = 40
    hyperbolicity_margin: float = 1e-6
    trivial_tol: float = 1e-6
    allow_nonhyperbolic: bool = False


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    """Solved periodic orbit on a uniform phase grid.

    ``states[:, j]`` samples the orbit at theta_j = 2*pi*j/N; ``point``
    evaluates the trigonometric interpolant anywhere on the circle.
    """

    model_name: str
    params: ParameterVector
    section: Section
    theta: np.ndarray
    states: np.ndarray
    omega: float
    monodromy_matrix: np.ndarray
    multipliers: np.ndarray          # nontrivial, sorted by decreasing modulus
    trivial_multiplier: complex
    hyperbolic: bool
    periodicity_residual: float
    coeffs: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.coeffs is None:
            object.__setattr__(self, "coeffs", fourier.coefficients(self.states))

    @property
    def grid_size(self) -> int:
        return self.states.shape[1]

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    @property
    def anchor(self) -> np.ndarray:
        return self.states[:, 0].copy()

    @property
    def diameter(self) -> float:
        spans = self.states.max(axis=1) - self.states.min(axis=1)
        return float(np.linalg.norm(spans))

    def point(self, theta) -> np.ndarray:
        """Orbit state at the given phase(s), by trigonometric interpolation."""
        return fourier.evaluate(self.coeffs, theta)

    def tangent(self, theta) -> np.ndarray:
        """d x / d theta at the given phase(s)."""
        return fourier.evaluate(fourier.derivative_coefficients(self.coeffs), theta)


def _align_seed_to_section(model, params, x0, T, section, tol):
    """Move the seed onto the section (right direction) if the flow crosses it."""
    try:
        traj = integrate(model, x0, params, None, (0.0, 3.0 * T), tol)
    except Exception:
        return np.asarray(x0, dtype=float)
    times = section_crossings(traj, section.as_tuple())
    if not times:
        return np.asarray(x0, dtype=float)
    # take a late crossing so transients have partly decayed
    return np.asarray(traj.sol(times[-1]), dtype=float)


def find_periodic_orbit(model: ModelDefinition,
                        params: ParameterVector | None = None,
                        seed: tuple[Sequence[float], float] | None = None,
                        options: OrbitOptions = OrbitOptions(),
                        section: Section | None = None) -> PeriodicOrbit:
    """Solve for the periodic orbit from a (state, period) seed.

    Raises :class:`ConvergenceError` when Newton stalls (seed outside the
    basin of convergence) and :class:`NonHyperbolicError` when a nontrivial
    multiplier reaches the unit circle (the flagged orbit rides along on the
    exception, or is returned when ``options.allow_nonhyperbolic``).
    """
    if params is None:
        params = model.defaults
    if section is None:
        section = Section.for_model(model)
    if seed is None:
        if model.seed_state is None or model.seed_period is None:
            raise ConvergenceError(f"model {model.name!r} has no seed metadata")
        seed = (model.seed_state, model.seed_period)

    n = model.dim
    x0 = np.asarray(seed[0], dtype=float).copy()
    T = float(seed[1])
    if T <= 0.0:
        raise ConvergenceError("seed period must be positive")
    x0 = _align_seed_to_section(model, params, x0, T, section, options.ode_tol)

    e_i = np.zeros(n)
    e_i[section.index] = 1.0

    def residual_parts(x, period):
        traj, phi = integrate_variational(model, x, params, (0.0, period),
                                          options.ode_tol)
        xT = traj.states[:, -1]
        r = np.concatenate([xT - x, [x[section.index] - section.level]])
        return r, xT, phi(period)

    r, xT, phiT = residual_parts(x0, T)
    res_norm = float(np.linalg.norm(r))
    converged = res_norm <= options.newton_tol
    for _ in range(options.max_iterations):
        if converged:
            break
        jac = np.zeros((n + 1, n + 1))
        jac[:n, :n] = phiT - np.eye(n)
        jac[:n, n] = eval_f(model, xT, params)
        jac[n, :n] = e_i
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        # backtracking keeps the iteration inside the basin
        scale = 1.0
        for _ in range(8):
            x_new = x0 + scale * step[:n]
            T_new = T + scale * step[n]
            if T_new > 0.1 * T:
                try:
                    r_new, xT_new, phiT_new = residual_parts(x_new, T_new)
                except Exception:
                    scale *= 0.5
                    continue
                if np.linalg.norm(r_new) < res_norm or scale < 0.2:
                    break
            scale *= 0.5
        else:
            raise ConvergenceError(
                f"orbit Newton stalled at residual {res_norm:.3e}; "
                "the seed is likely outside the basin")
        x0, T, r, xT, phiT = x_new, T_new, r_new, xT_new, phiT_new
        res_norm = float(np.linalg.norm(r))
        converged = res_norm <= options.newton_tol
    if not converged and res_norm > options.residual_tol:
        raise ConvergenceError(
            f"orbit Newton did not converge within {options.max_iterations} "
            f"iterations (residual {res_norm:.3e})")

    # enforce the requested crossing direction at the anchor
    f0 = eval_f(model, x0, params)
    if f0[section.index] * section.direction < 0.0:
        traj = integrate(model, x0, params, None, (0.0, 1.5 * T), options.ode_tol)
        times = section_crossings(traj, section.as_tuple())
        if not times:
            raise NoCrossingError(
                "orbit does not cross the section in the requested direction")
        x0 = np.asarray(traj.sol(times[0]), dtype=float)
        r, xT, phiT = residual_parts(x0, T)
        for _ in range(4):
            if np.linalg.norm(r) <= options.newton_tol:
                break
            jac = np.zeros((n + 1, n + 1))
            jac[:n, :n] = phiT - np.eye(n)
            jac[:n, n] = eval_f(model, xT, params)
            jac[n, :n] = e_i
            step = np.linalg.solve(jac, -r)
            x0 = x0 + step[:n]
            T = T + step[n]
            r, xT, phiT = residual_parts(x0, T)

    return _assemble_orbit(model, params, section, x0, T, options)


def _assemble_orbit(model, params, section, x0, T, options) -> PeriodicOrbit:
    n = model.dim
    N = options.grid_size
    traj, phi = integrate_variational(model, x0, params, (0.0, T), options.ode_tol)
    xT = traj.states[:, -1]
    periodicity_residual = float(np.linalg.norm(xT - x0))
    if periodicity_residual > options.residual_tol:
        raise ConvergenceError(
            f"periodicity residual {periodicity_residual:.3e} exceeds "
            f"{options.residual_tol:.1e}")

    t_grid = T * np.arange(N) / N
    states = np.empty((n, N))
    for j, tj in enumerate(t_grid):
        states[:, j] = traj.sol(tj)

    monodromy_matrix = phi(T)
    eigvals = np.linalg.eigvals(monodromy_matrix)
    trivial_idx = int(np.argmin(np.abs(eigvals - 1.0)))
    trivial = complex(eigvals[trivial_idx])
    nontrivial = np.delete(eigvals, trivial_idx)
    nontrivial = nontrivial[np.argsort(-np.abs(nontrivial))]
    hyperbolic = bool(np.all(np.abs(nontrivial) <= 1.0 - options.hyperbolicity_margin)
                      and abs(trivial - 1.0) <= options.trivial_tol)

    orbit = PeriodicOrbit(
        model_name=model.name,
        params=params,
        section=section,
        theta=fourier.grid(N),
        states=states,
        omega=2.0 * np.pi / T,
        monodromy_matrix=monodromy_matrix,
        multipliers=nontrivial,
        trivial_multiplier=trivial,
        hyperbolic=hyperbolic,
        periodicity_residual=periodicity_residual,
    )
    if not hyperbolic and not options.allow_nonhyperbolic:
        worst = np.abs(nontrivial).max() if len(nontrivial) else float("nan")
        raise NonHyperbolicError(
            f"orbit is not hyperbolic: largest nontrivial multiplier modulus "
            f"{worst:.8f} (margin {options.hyperbolicity_margin:g})", orbit=orbit)
    return orbit


def monodromy(orbit: PeriodicOrbit, model: ModelDefinition,
              ode_tol: float = 1e-12) -> np.ndarray:
    """Fundamental matrix over one period, integrated around the stored orbit."""
    _, phi = integrate_variational(model, orbit.anchor, orbit.params,
                                   (0.0, orbit.period), ode_tol)
    return phi(orbit.period)


def resample(orbit: PeriodicOrbit, n_new: int) -> PeriodicOrbit:
    """Same orbit on a different uniform grid (trigonometric resampling)."""
    states = fourier.resample(orbit.states, n_new)
    return replace(orbit, theta=fourier.grid(n_new), states=states, coeffs=None)


def orbit_point(orbit: PeriodicOrbit, theta) -> np.ndarray:
    """Orbit state at a phase in [0, 2*pi); alias of ``orbit.point``."""
    return orbit.point(theta)
