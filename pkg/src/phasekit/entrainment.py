"""Averaged 1:1 entrainment: coupling function, locking points, sensitivity.

For weak periodic forcing u(t) = eps * w(omega_u t) the slow phase difference
chi obeys

    chi' = V(chi) = (Delta - Delta_u) + eps * Gamma(chi),
    Gamma(chi) = (1/2pi) integral q(s + chi) w(s) ds,

with the 1:1 convention Omega = omega_u, Delta = omega - omega_u, Delta_u = 0
(the only split under which S_Delta = S_omega). Note the amplitude eps is
kept explicit in V rather than absorbed into Gamma. Stable roots V(chi*) = 0,
V'(chi*) < 0 are the locked phases; differentiating the root condition splits
the locking sensitivity into a frequency and a coupling-shape contribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import fourier
from .errors import NearTangencyError
from .model import ModelDefinition, ParameterVector
from .odeint import integrate
from .orbit import PeriodicOrbit
from .prc import PhaseResponse, _asymptotic_phase_full, wrap_phase


@dataclass(frozen=True, eq=False)
class InputWaveform:
    """Normalized 2*pi-periodic forcing waveform, |w| <= 1 (amplitude in eps).

    kind "fourier": mean + sum_m cos_coeffs[m-1] cos(m s) + sin_coeffs[m-1]
    sin(m s). kind "smoothed_square": logistic-smoothed square pulse, high on
    a fraction ``duty`` of the cycle, scaled to peak ``amplitude``.
    """

    kind: str
    omega_u: float
    mean: float = 0.0
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()
    duty: float = 0.5
    steepness: float = 50.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ("fourier", "smoothed_square"):
            raise ValueError(f"unknown waveform kind {self.kind!r}")
        if self.omega_u <= 0.0:
            raise ValueError("forcing angular frequency must be positive")
        if self.kind == "smoothed_square" and not 0.0 < self.duty < 1.0:
            raise ValueError("duty cycle must lie in (0, 1)")
        peak = float(np.max(np.abs(self.values(fourier.grid(4096)))))
        if peak > 1.0 + 1e-9:
            raise ValueError(
                f"waveform magnitude {peak:.6g} exceeds 1; carry amplitude in eps")

    @classmethod
    def sine(cls, omega_u: float) -> "InputWaveform":
        return cls(kind="fourier", omega_u=omega_u, sin_coeffs=(1.0,))

    @classmethod
    def square(cls, omega_u: float, duty: float = 0.5,
               steepness: float = 50.0, amplitude: float = 1.0) -> "InputWaveform":
        return cls(kind="smoothed_square", omega_u=omega_u, duty=duty,
                   steepness=steepness, amplitude=amplitude)

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega_u

    def values(self, phase) -> np.ndarray:
        """Waveform as a function of the forcing phase (2*pi-periodic)."""
        s = np.asarray(phase, dtype=float)
        if self.kind == "fourier":
            out = np.full_like(s, self.mean, dtype=float)
            for m, c in enumerate(self.cos_coeffs, start=1):
                out += c * np.cos(m * s)
            for m, c in enumerate(self.sin_coeffs, start=1):
                out += c * np.sin(m * s)
            return out
        # smoothed square: high for s in (0, 2*pi*duty), C-infinity periodic
        half = np.pi * self.duty
        gate = np.cos(s - half) - math.cos(half)
        return self.amplitude / (1.0 + np.exp(-self.steepness * gate))

    def grid_mean(self, n: int = 4096) -> float:
        return float(self.values(fourier.grid(n)).mean())


@dataclass(frozen=True, eq=False)
class CouplingFunction:
    """Averaged coupling Gamma on a uniform chi grid, with its derivative."""

    chi: np.ndarray
    values: np.ndarray
    deriv: np.ndarray
    omega_u: float
    coeffs: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.coeffs is None:
            object.__setattr__(self, "coeffs", fourier.coefficients(self.values))

    def gamma(self, chi) -> np.ndarray:
        return fourier.evaluate(self.coeffs, chi)

    def dgamma(self, chi) -> np.ndarray:
        return fourier.evaluate(fourier.derivative_coefficients(self.coeffs), chi)


@dataclass(frozen=True)
class LockingRoot:
    chi: float
    v_prime: float
    stable: bool


@dataclass(frozen=True, eq=False)
class LockingReport:
    """Roots of V, the selected stable phase, and per-parameter sensitivities."""

    detuning: float
    eps: float
    roots: tuple[LockingRoot, ...]
    selected: float | None               # stable chi*, None when drifting
    drift: bool
    sensitivities: dict = field(default_factory=dict)

    @property
    def stable_roots(self) -> tuple[LockingRoot, ...]:
        return tuple(r for r in self.roots if r.stable)


def coupling_function(prc, waveform: InputWaveform,
                      omega: float | None = None,
                      grid_size: int | None = None) -> CouplingFunction:
    """Gamma(chi) = (1/2pi) integral q(s+chi) w(s) ds on a shared grid.

    ``prc`` may be a PhaseResponse or a raw array of q samples on a uniform
    grid (used for the coupling-sensitivity curve built from Z_q).
    """
    if isinstance(prc, PhaseResponse):
        q = prc.q
    else:
        q = np.asarray(prc, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ValueError("q must be a nonempty 1-d grid array")
    if omega is not None and not np.isclose(omega, waveform.omega_u,
                                            rtol=1e-9, atol=0.0):
        raise ValueError(
            "1:1 averaging requires the shared fast frequency Omega = omega_u")
    if grid_size is not None and grid_size != q.size:
        q = fourier.resample(q, grid_size)
    n = q.size
    chi = fourier.grid(n)
    w = waveform.values(chi)
    values = fourier.circular_mean_product(q, w)
    deriv = fourier.grid_derivative(values)
    return CouplingFunction(chi=chi, values=values, deriv=deriv,
                            omega_u=waveform.omega_u)


def locking_points(gamma: CouplingFunction, detuning: float,
                   eps: float) -> LockingReport:
    """All roots of V(chi) = detuning + eps*Gamma(chi), stability-labelled."""
    if eps <= 0.0:
        raise ValueError("forcing amplitude eps must be positive")

    def v(chi):
        return detuning + eps * float(gamma.gamma(chi))

    def vp(chi):
        return eps * float(gamma.dgamma(chi))

    n = gamma.chi.size
    grid_v = detuning + eps * gamma.values
    roots = []
    for j in range(n):
        a = gamma.chi[j]
        b = gamma.chi[(j + 1) % n] if j + 1 < n else 2.0 * np.pi
        va, vb = grid_v[j], grid_v[(j + 1) % n]
        if va == 0.0:
            root = float(a)
        elif va * vb < 0.0:
            root = float(brentq(v, a, b, xtol=1e-13))
        else:
            continue
        # Newton polish on the spectral interpolant
        for _ in range(6):
            dv = vp(root)
            if dv == 0.0:
                break
            step = -v(root) / dv
            root += step
            if abs(step) < 1e-14:
                break
        root %= 2.0 * np.pi
        slope = vp(root)
        roots.append(LockingRoot(chi=root, v_prime=slope, stable=slope < 0.0))

    # deduplicate wrap-around double detections
    unique = []
    for r in sorted(roots, key=lambda r: r.chi):
        if not unique or abs(wrap_phase(r.chi - unique[-1].chi)) > 1e-8:
            unique.append(r)
    if len(unique) > 1 and abs(wrap_phase(unique[0].chi - unique[-1].chi)) <= 1e-8:
        unique.pop()

    stable = [r for r in unique if r.stable]
    drift = not stable
    selected = None
    if stable:
        selected = min(stable, key=lambda r: r.v_prime).chi
    return LockingReport(detuning=detuning, eps=eps, roots=tuple(unique),
                         selected=selected, drift=drift)


def coupling_sensitivity(z_q: np.ndarray, waveform: InputWaveform) -> CouplingFunction:
    """S_Gamma from the iPRC sensitivity, by the same circular correlation."""
    return coupling_function(z_q, waveform)


def locking_sensitivity(report: LockingReport, gamma: CouplingFunction,
                        s_omega: float, s_gamma: CouplingFunction,
                        *, v_prime_tol: float = 1e-8) -> tuple[float, float, float]:
    """(S_chi*, frequency contribution, coupling contribution).

    S_chi*|omega = -S_omega / (eps*Gamma'(chi*)),
    S_chi*|Gamma = -S_Gamma(chi*) / Gamma'(chi*); the total is their sum
    (exact decomposition identity).
    """
    if report.selected is None:
        raise NearTangencyError("no stable locking point: sensitivity undefined")
    chi_star = report.selected
    v_prime = report.eps * float(gamma.dgamma(chi_star))
    if abs(v_prime) < v_prime_tol:
        raise NearTangencyError(
            f"|V'(chi*)| = {abs(v_prime):.3e} below {v_prime_tol:.1e}: "
            "locking sensitivity unbounded near tangency")
    s_w = -s_omega / v_prime
    s_g = -report.eps * float(s_gamma.gamma(chi_star)) / v_prime
    return s_w + s_g, s_w, s_g


@dataclass(frozen=True, eq=False)
class EntrainmentSimulation:
    """Empirical phase-difference trace from forced full-model simulation."""

    boundary_times: np.ndarray
    chi: np.ndarray                    # wrapped chi at forcing-period boundaries
    states: np.ndarray                 # (n, len(boundary_times)) snapshots
    converged: bool
    chi_locked: float | None
    slips: int


def simulate_entrainment(orbit: PeriodicOrbit, model: ModelDefinition,
                         params: ParameterVector | None = None, *,
                         waveform: InputWaveform, eps: float,
                         x0=None, horizon_periods: int = 80,
                         ode_tol: float = 1e-10,
                         settle_tol: float = 1e-3,
                         window: int = 10) -> EntrainmentSimulation:
    """Integrate the forced model and extract chi(t) at period boundaries.

    chi_k = Theta(x(k*T_u)) - theta_u(k*T_u) with theta_u(0) = 0; at the
    boundaries theta_u is a multiple of 2*pi, so chi_k is the asymptotic
    phase of the snapshot. Convergence means the last ``window`` values agree
    within ``settle_tol``; otherwise accumulated drift is reported as slips.
    """
    if params is None:
        params = orbit.params
    if horizon_periods < 50:
        raise ValueError("horizon must cover at least 50 forcing periods")
    omega_u = waveform.omega_u
    t_u = waveform.period
    if x0 is None:
        x0 = orbit.anchor

    def u(t):
        return eps * float(waveform.values(omega_u * t))

    delta_conv = 1e-7 * orbit.diameter
    y = np.asarray(x0, dtype=float)
    times = [0.0]
    chis = []
    snapshots = [y.copy()]
    phase, _, _ = _asymptotic_phase_full(orbit, model, params, y, delta_conv,
                                         200, ode_tol, 100.0)
    chis.append(phase)
    for k in range(1, horizon_periods + 1):
        t0 = (k - 1) * t_u
        traj = integrate(model, y, params, u if eps != 0.0 else None,
                         (t0, k * t_u), ode_tol)
        y = traj.states[:, -1]
        phase, _, _ = _asymptotic_phase_full(orbit, model, params, y,
                                             delta_conv, 200, ode_tol, 100.0)
        times.append(k * t_u)
        snapshots.append(y.copy())
        chis.append(phase)

    chi = np.array(chis)
    # unwrap to measure drift/slips
    unwrapped = np.unwrap(chi)
    slips = int(abs(unwrapped[-1] - unwrapped[0]) // (2.0 * np.pi))

    tail = unwrapped[-window:]
    converged = bool(np.max(tail) - np.min(tail) < settle_tol)
    chi_locked = float(np.mean(tail) % (2.0 * np.pi)) if converged else None
    return EntrainmentSimulation(
        boundary_times=np.array(times), chi=chi,
        states=np.column_stack(snapshots), converged=converged,
        chi_locked=chi_locked, slips=slips)
