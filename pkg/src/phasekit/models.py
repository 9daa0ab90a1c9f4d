"""Built-in oscillator models.

Every entry solves to a hyperbolic periodic orbit at its default parameters
(enforced by the test suite), and carries the seed and Poincare-section
metadata the orbit solver needs.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .model import ModelDefinition, ParameterVector


def _radial_f(x, p):
    # planar normal form: r' = s*r*(rho - r^2), angle' = s
    s, rho = p["scale"], p["radius"]
    x1, x2 = x[0], x[1]
    r2 = x1 * x1 + x2 * x2
    return [s * (rho * x1 - x2 - x1 * r2),
            s * (x1 + rho * x2 - x2 * r2)]


def _radial_g(x, p):
    return [1.0, 0.0]


def _radial_h(x, p):
    return x[0]


RADIAL = ModelDefinition(
    name="radial",
    dim=2,
    f=_radial_f,
    g=_radial_g,
    h=_radial_h,
    defaults=ParameterVector(("scale", "radius"), np.array([1.0, 1.0])),
    seed_state=(1.1, 0.0),
    seed_period=6.0,
    section_index=1,
    section_level=0.0,
    section_direction=1,
    description="planar radial normal form; orbit radius sqrt(radius), "
                "angular frequency scale",
    param_groups={"scale": "timing", "radius": "shape"},
)


def _vdp_f(x, p):
    mu = p["mu"]
    return [x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0]]


def _vdp_g(x, p):
    return [0.0, 1.0]


def _vdp_h(x, p):
    return x[0]


VAN_DER_POL = ModelDefinition(
    name="vdp",
    dim=2,
    f=_vdp_f,
    g=_vdp_g,
    h=_vdp_h,
    defaults=ParameterVector(("mu",), np.array([1.0])),
    seed_state=(0.0, 2.0),
    seed_period=6.7,
    section_index=0,
    section_level=0.0,
    section_direction=1,
    description="van der Pol oscillator, forcing on the velocity equation",
    param_groups={"mu": "damping"},
)


def _goodwin_f(x, p):
    X, Y, Z = x[0], x[1], x[2]
    hill = p["a"] / (p["K"] ** p["n"] + Z ** p["n"])
    return [hill - p["b"] * X,
            p["c"] * X - p["d"] * Y,
            p["e"] * Y - p["g"] * Z]


def _goodwin_g(x, p):
    # light acts additively on the maximal mRNA synthesis rate a
    Z = x[2]
    return [1.0 / (p["K"] ** p["n"] + Z ** p["n"]), 0.0, 0.0]


def _goodwin_h(x, p):
    return x[0]


GOODWIN = ModelDefinition(
    name="goodwin",
    dim=3,
    f=_goodwin_f,
    g=_goodwin_g,
    h=_goodwin_h,
    defaults=ParameterVector(
        ("a", "K", "n", "b", "c", "d", "e", "g"),
        np.array([3.0, 1.0, 12.0, 0.5, 0.6, 0.5, 0.6, 0.5]),
    ),
    seed_state=(1.0, 0.8, 1.0),
    seed_period=7.6,
    section_index=0,
    section_level=1.0,
    section_direction=1,
    description="three-state Goodwin genetic loop (mRNA X, protein Y, "
                "repressor Z), light input on the synthesis rate a",
    param_groups={
        "a": "synthesis", "K": "repression", "n": "repression",
        "b": "degradation", "c": "translation", "d": "degradation",
        "e": "translation", "g": "degradation",
    },
)


REGISTRY: dict[str, ModelDefinition] = {
    RADIAL.name: RADIAL,
    VAN_DER_POL.name: VAN_DER_POL,
    GOODWIN.name: GOODWIN,
}


def get_model(name: str) -> ModelDefinition:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(
            f"unknown model {name!r}; available: {', '.join(sorted(REGISTRY))}"
        ) from None
