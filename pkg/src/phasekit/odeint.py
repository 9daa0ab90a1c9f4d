"""Adaptive explicit Runge-Kutta transport with dense output and sections.

A single embedded 5(4) pair (Dormand-Prince, scipy's stepper) with its free
quartic interpolant serves every solver in the package. The driving loop is
ours so that step statistics are recorded and failures are classified:
step-size underflow raises :class:`StiffnessError` (stiff systems are out of
scope), non-finite states raise :class:`DivergenceError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import RK45, OdeSolution
from scipy.optimize import brentq

from .errors import DivergenceError, NoCrossingError, StiffnessError
from .model import ModelDefinition, ParameterVector, eval_f, eval_input_field, jacobian_x

TOL_MIN = 1e-13
TOL_MAX = 1e-3


class _CountingRK45(RK45):
    """RK45 that counts attempted steps (accepted + rejected)."""

    attempts = 0

    def _estimate_error_norm(self, K, h, scale):
        self.attempts += 1
        return super()._estimate_error_norm(K, h, scale)


class _PrefixSolution:
    """View of a dense solution restricted to the leading state components."""

    def __init__(self, sol, n: int):
        self._sol = sol
        self._n = n

    def __call__(self, t):
        return self._sol(t)[: self._n]


@dataclass(eq=False)
class Trajectory:
    """Dense solution of one integration.

    ``states[:, j]`` is the state at ``t[j]``; ``sol`` interpolates anywhere
    in the covered span with error consistent with the requested tolerance.
    """

    t: np.ndarray
    states: np.ndarray
    sol: OdeSolution
    steps: int
    rejected: int
    nfev: int

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])

    def __call__(self, t):
        return self.sol(t)


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not TOL_MIN <= tol <= TOL_MAX:
        raise ValueError(f"tol must lie in [{TOL_MIN}, {TOL_MAX}], got {tol}")
    return tol


def integrate_rhs(rhs: Callable, y0, t_span, tol: float,
                  max_step: float = np.inf) -> Trajectory:
    """Integrate an arbitrary right-hand side; backward spans are allowed."""
    tol = _check_tol(tol)
    t0, t1 = float(t_span[0]), float(t_span[-1])
    if t0 == t1:
        raise ValueError("empty integration span")
    y0 = np.asarray(y0, dtype=float)
    solver = _CountingRK45(rhs, t0, y0, t_bound=t1, rtol=tol, atol=tol,
                           max_step=max_step)
    ts = [t0]
    ys = [y0.copy()]
    segments = []
    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            if np.all(np.isfinite(solver.y)):
                raise StiffnessError(
                    f"step size underflow at t={solver.t:.6g}: {message}; "
                    "explicit RK only, the problem is likely stiff")
            raise DivergenceError(f"state became non-finite near t={solver.t:.6g}")
        if not np.all(np.isfinite(solver.y)):
            raise DivergenceError(f"state became non-finite at t={solver.t:.6g}")
        segments.append(solver.dense_output())
        ts.append(solver.t)
        ys.append(solver.y.copy())
    sol = OdeSolution(ts, segments)
    steps = len(ts) - 1
    return Trajectory(t=np.array(ts), states=np.array(ys).T, sol=sol,
                      steps=steps, rejected=solver.attempts - steps,
                      nfev=solver.nfev)


def integrate(model: ModelDefinition, x0, params: ParameterVector,
              input: Callable[[float], float] | None,
              t_span, tol: float, max_step: float = np.inf) -> Trajectory:
    """Simulate x' = f(x) + g(x) u(t); ``input=None`` means zero input."""
    pd = params.as_dict()

    if input is None:
        def rhs(t, x):
            return np.asarray(model.f(list(x), pd), dtype=float)
    else:
        def rhs(t, x):
            xs = list(x)
            f = np.asarray(model.f(xs, pd), dtype=float)
            return f + float(input(t)) * np.asarray(model.g(xs, pd), dtype=float)

    return integrate_rhs(rhs, x0, t_span, tol, max_step=max_step)


def integrate_variational(model: ModelDefinition, x0, params: ParameterVector,
                          t_span, tol: float):
    """Zero-input flow plus fundamental matrix Phi' = A(x(t)) Phi, Phi(t0) = I.

    Returns ``(trajectory, phi)`` where ``phi(t)`` evaluates the fundamental
    matrix anywhere in the span.
    """
    n = model.dim
    pd = params.as_dict()
    eye = np.eye(n)

    def rhs(t, y):
        x = y[:n]
        a = jacobian_x(model, x, params)
        dx = np.asarray(model.f(list(x), pd), dtype=float)
        dphi = a @ y[n:].reshape(n, n)
        return np.concatenate([dx, dphi.ravel()])

    y0 = np.concatenate([np.asarray(x0, dtype=float), eye.ravel()])
    aug = integrate_rhs(rhs, y0, t_span, tol)

    traj = Trajectory(t=aug.t, states=aug.states[:n], sol=_PrefixSolution(aug.sol, n),
                      steps=aug.steps, rejected=aug.rejected, nfev=aug.nfev)

    def phi(t):
        return aug.sol(t)[n:].reshape(n, n)

    return traj, phi


def _signed(value: float, direction: int) -> float:
    return direction * value


def section_crossings(traj: Trajectory, section: Sequence) -> list[float]:
    """All times where x_i crosses the level in the stated direction.

    ``section`` is (index, level, direction) with direction +1 for upward
    (x_i increasing through the level), -1 for downward. Roots are polished
    on the dense interpolant to 1e-12 in time.
    """
    index, level, direction = int(section[0]), float(section[1]), int(section[2])
    if direction not in (-1, 1):
        raise ValueError("section direction must be +1 or -1")

    def s(t):
        return _signed(float(traj.sol(t)[index]) - level, direction)

    times = []
    ts = traj.t
    vals = _signed(traj.states[index] - level, direction)
    for a, b, va, vb in zip(ts[:-1], ts[1:], vals[:-1], vals[1:]):
        if va < 0.0 <= vb:
            times.append(float(brentq(s, a, b, xtol=1e-12)))
    return times


def find_section_crossing(traj: Trajectory, section: Sequence) -> float:
    """First crossing time of the section; error if the span has none."""
    times = section_crossings(traj, section)
    if not times:
        index, level, direction = section
        word = "upward" if int(direction) > 0 else "downward"
        raise NoCrossingError(
            f"no {word} crossing of x[{index}] = {level} in "
            f"[{traj.t0:.6g}, {traj.t1:.6g}]")
    return times[0]
