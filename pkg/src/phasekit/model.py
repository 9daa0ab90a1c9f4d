"""Parameterized open oscillator models and their exact derivatives.

A model is the input-affine system

    x' = f(x, lam) + g(x, lam) u,      y = h(x, lam)

with f, g: R^n -> R^n and h: R^n -> R. Evaluators are plain Python callables
``f(x, p)`` receiving a sequence of state carriers and a dict of parameter
carriers; writing them with the operators and functions from
:mod:`phasekit.dual` makes first and mixed second derivatives exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import dual
from .dual import Dual
from .errors import ConfigError, ModelDomainError


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """Named parameter values; immutable, order defines the parameter index."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        values = np.asarray(self.values, dtype=float).copy()
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)
        if len(names) < 1:
            raise ConfigError("parameter vector must hold at least one parameter")
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate parameter names in {names}")
        if values.shape != (len(names),):
            raise ConfigError("parameter names and values have mismatched lengths")
        if not np.all(np.isfinite(values)):
            bad = names[int(np.flatnonzero(~np.isfinite(values))[0])]
            raise ConfigError(f"parameter {bad!r} is not finite")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @classmethod
    def from_dict(cls, mapping: Mapping[str, float]) -> "ParameterVector":
        return cls(tuple(mapping.keys()), np.array(list(mapping.values()), dtype=float))

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ConfigError(
                f"unknown parameter {name!r}; known: {', '.join(self.names)}"
            ) from None

    def __getitem__(self, key):
        if isinstance(key, str):
            return float(self.values[self.index(key)])
        return float(self.values[key])

    def __len__(self):
        return len(self.names)

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}

    def with_updates(self, updates: Mapping[str, float]) -> "ParameterVector":
        """New vector with the given overrides; unknown names are a hard error."""
        vals = self.values.copy()
        for name, value in updates.items():
            vals[self.index(name)] = float(value)
        return ParameterVector(self.names, vals)

    def with_value_at(self, k: int, value: float) -> "ParameterVector":
        vals = self.values.copy()
        vals[k] = value
        return ParameterVector(self.names, vals)


@dataclass(frozen=True, eq=False)
class ModelDefinition:
    """An oscillator model plus registry metadata used to seed its solvers.

    ``f``, ``g`` map (state sequence, parameter dict) to a length-``dim``
    sequence; ``h`` to a scalar. All three must be pure and dual-friendly.
    Section metadata picks the default phase anchor x_i = level with the
    stated crossing direction (+1 upward, -1 downward).
    """

    name: str
    dim: int
    f: Callable
    g: Callable
    h: Callable
    defaults: ParameterVector
    seed_state: tuple[float, ...] | None = None
    seed_period: float | None = None
    section_index: int = 0
    section_level: float = 0.0
    section_direction: int = 1
    description: str = ""
    param_groups: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 2:
            raise ConfigError(f"model {self.name!r}: dim must be >= 2")
        if not 0 <= self.section_index < self.dim:
            raise ConfigError(f"model {self.name!r}: section index out of range")
        if self.section_direction not in (-1, 1):
            raise ConfigError(f"model {self.name!r}: section direction must be +-1")


@dataclass(frozen=True, eq=False)
class DerivativeBundle:
    """All model derivatives needed by the sensitivity boundary value problems.

    a        : df/dx                    (n, n)
    b        : df/dlam_k                (n,)
    h_xx     : d2 f_i / dx_j dx_k       (n, n, n), symmetric in (j, k)
    h_xlam   : d2 f_i / dx_j dlam_k     (n, n)
    g_x      : dg/dx                    (n, n)
    g_lam    : dg/dlam_k                (n,)
    """

    a: np.ndarray
    b: np.ndarray
    h_xx: np.ndarray
    h_xlam: np.ndarray
    g_x: np.ndarray
    g_lam: np.ndarray


def _pdict(params: ParameterVector) -> dict:
    return params.as_dict()


def _check_finite(model: ModelDefinition, which: str, out) -> np.ndarray:
    arr = np.asarray(out, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(np.atleast_1d(arr)))[0])
        raise ModelDomainError(
            f"model {model.name!r}: {which}[{bad}] is non-finite at the evaluated point"
        )
    return arr


def eval_f(model: ModelDefinition, x, params: ParameterVector) -> np.ndarray:
    """Zero-input vector field f(x, lam)."""
    out = model.f(list(map(float, x)), _pdict(params))
    return _check_finite(model, "f", out)


def eval_input_field(model: ModelDefinition, x, params: ParameterVector) -> np.ndarray:
    """Input vector field g(x, lam)."""
    out = model.g(list(map(float, x)), _pdict(params))
    return _check_finite(model, "g", out)


def eval_output(model: ModelDefinition, x, params: ParameterVector) -> float:
    """Measurement y = h(x, lam)."""
    out = model.h(list(map(float, x)), _pdict(params))
    return float(_check_finite(model, "h", out))


def _eps(y) -> float:
    return y.eps if isinstance(y, Dual) else 0.0


def _eps2(y) -> float:
    return _eps(y.eps) if isinstance(y, Dual) else 0.0


def jacobian_x(model: ModelDefinition, x, params: ParameterVector) -> np.ndarray:
    """df/dx by one forward-mode pass per state direction."""
    n = model.dim
    pd = _pdict(params)
    xs = list(map(float, x))
    a = np.empty((n, n))
    for j in range(n):
        seeded = list(xs)
        seeded[j] = Dual(xs[j], 1.0)
        fx = model.f(seeded, pd)
        for i in range(n):
            a[i, j] = _eps(fx[i])
    if not np.all(np.isfinite(a)):
        raise ModelDomainError(f"model {model.name!r}: df/dx is non-finite")
    return a


def dfdlam(model: ModelDefinition, x, params: ParameterVector, k: int) -> np.ndarray:
    """df/dlam_k by a single forward-mode pass."""
    pd = _pdict(params)
    pd[params.names[k]] = Dual(pd[params.names[k]], 1.0)
    fx = model.f(list(map(float, x)), pd)
    return np.array([_eps(fi) for fi in fx])


def derivatives(model: ModelDefinition, x, params: ParameterVector,
                k: int) -> DerivativeBundle:
    """Exact derivative bundle at (x, lam) for parameter index k.

    Second derivatives come from nested duals; h_xx is filled for j <= k and
    mirrored, so its symmetry holds exactly.
    """
    n = model.dim
    if not 0 <= k < len(params):
        raise ConfigError(f"parameter index {k} out of range (q={len(params)})")
    name_k = params.names[k]
    pd = _pdict(params)
    xs = list(map(float, x))

    a = jacobian_x(model, x, params)

    pd_k = dict(pd)
    pd_k[name_k] = Dual(pd[name_k], 1.0)
    fb = model.f(xs, pd_k)
    b = np.array([_eps(fi) for fi in fb])

    h_xx = np.empty((n, n, n))
    for j1 in range(n):
        for j2 in range(j1, n):
            # inner direction e_j1, outer direction e_j2
            fxx = model.f([Dual(Dual(xs[m], 1.0 if m == j1 else 0.0),
                                Dual(1.0 if m == j2 else 0.0, 0.0))
                           for m in range(n)], pd)
            for i in range(n):
                val = _eps2(fxx[i])
                h_xx[i, j1, j2] = val
                h_xx[i, j2, j1] = val

    h_xlam = np.empty((n, n))
    pd_nested = dict(pd)
    pd_nested[name_k] = Dual(Dual(pd[name_k], 0.0), Dual(1.0, 0.0))
    for j in range(n):
        fxl = model.f([Dual(Dual(xs[m], 1.0 if m == j else 0.0), Dual(0.0, 0.0))
                       for m in range(n)], pd_nested)
        for i in range(n):
            h_xlam[i, j] = _eps2(fxl[i])

    g_x = np.empty((n, n))
    for j in range(n):
        seeded = list(xs)
        seeded[j] = Dual(xs[j], 1.0)
        gx = model.g(seeded, pd)
        for i in range(n):
            g_x[i, j] = _eps(gx[i])
    gl = model.g(xs, pd_k)
    g_lam = np.array([_eps(gi) for gi in gl])

    for label, block in (("A", a), ("b", b), ("H_xx", h_xx),
                         ("H_xlam", h_xlam), ("G_x", g_x), ("G_lam", g_lam)):
        if not np.all(np.isfinite(block)):
            raise ModelDomainError(
                f"model {model.name!r}: derivative block {label} is non-finite")
    return DerivativeBundle(a=a, b=b, h_xx=h_xx, h_xlam=h_xlam, g_x=g_x, g_lam=g_lam)


def resolve_parameters(model: ModelDefinition,
                       overrides: Mapping[str, float] | None) -> ParameterVector:
    """Model defaults with config overrides applied; unknown names are fatal."""
    if not overrides:
        return model.defaults
    return model.defaults.with_updates(overrides)
