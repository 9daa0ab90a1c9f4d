"""Model evaluators, derivative bundles, parameter handling."""

import numpy as np
import pytest

import phasekit as pk
from phasekit import model as model_mod
from phasekit.errors import ConfigError, ModelDomainError
from phasekit.model import ModelDefinition, ParameterVector


def _vdp_jacobian_by_hand(x, mu):
    # hand-coded oracle, kept out of the library on purpose
    return np.array([[0.0, 1.0],
                     [-1.0 - 2.0 * mu * x[0] * x[1], mu * (1.0 - x[0] ** 2)]])


def test_vdp_equilibrium_at_origin():
    out = pk.eval_f(pk.VAN_DER_POL, [0.0, 0.0], pk.VAN_DER_POL.defaults)
    assert np.allclose(out, [0.0, 0.0])


def test_radial_tangential_motion_on_unit_circle():
    out = pk.eval_f(pk.RADIAL, [1.0, 0.0], pk.RADIAL.defaults)
    assert np.allclose(out, [0.0, 1.0], atol=1e-15)


def test_goodwin_rate_laws_by_hand():
    p = pk.GOODWIN.defaults.as_dict()
    x = [0.1, 0.1, 0.1]
    want = [p["a"] / (p["K"] ** p["n"] + 0.1 ** p["n"]) - p["b"] * 0.1,
            p["c"] * 0.1 - p["d"] * 0.1,
            p["e"] * 0.1 - p["g"] * 0.1]
    out = pk.eval_f(pk.GOODWIN, x, pk.GOODWIN.defaults)
    assert np.allclose(out, want, rtol=1e-14)


def test_vdp_jacobian_hand_value():
    bundle = pk.derivatives(pk.VAN_DER_POL, [1.0, 2.0],
                            pk.VAN_DER_POL.defaults, 0)
    assert np.allclose(bundle.a, [[0.0, 1.0], [-5.0, 0.0]], atol=1e-14)


def test_linear_model_second_derivatives_vanish():
    m = np.array([[0.3, -1.2], [0.9, 0.4]])

    def f(x, p):
        return [m[0, 0] * x[0] + m[0, 1] * x[1],
                m[1, 0] * x[0] + m[1, 1] * x[1]]

    linear = ModelDefinition(
        name="linear", dim=2, f=f, g=lambda x, p: [0.0, 0.0],
        h=lambda x, p: x[0],
        defaults=ParameterVector(("unused",), np.array([1.0])))
    bundle = pk.derivatives(linear, [0.7, -0.3], linear.defaults, 0)
    assert np.allclose(bundle.a, m, atol=1e-15)
    assert np.allclose(bundle.h_xx, 0.0, atol=1e-15)


def test_timescale_family_dfdlam_is_base_field():
    # f = scale * f0(x): df/dscale = f0(x)
    params = pk.RADIAL.defaults
    x = [0.4, -0.9]
    bundle = pk.derivatives(pk.RADIAL, x, params, params.index("scale"))
    f0 = pk.eval_f(pk.RADIAL, x, params)
    assert np.allclose(bundle.b, f0, rtol=1e-14)


def test_additive_input_field_constant():
    out = pk.eval_input_field(pk.VAN_DER_POL, [3.0, -7.0],
                              pk.VAN_DER_POL.defaults)
    assert np.allclose(out, [0.0, 1.0])


def test_output_projection():
    assert pk.eval_output(pk.VAN_DER_POL, [3.0, -1.0],
                          pk.VAN_DER_POL.defaults) == 3.0


@pytest.mark.parametrize("model", [pk.RADIAL, pk.VAN_DER_POL, pk.GOODWIN],
                         ids=lambda m: m.name)
def test_derivative_bundles_match_finite_differences(model, rng):
    """Every block agrees with central differences at >= 100 random points."""
    params = model.defaults
    n = model.dim
    h = 1e-5
    lo, hi = (0.3, 1.6) if model.name == "goodwin" else (-1.5, 1.5)
    checked = 0
    for _ in range(100 // len(params.names) + 1):
        x = rng.uniform(lo, hi, size=n)
        for k in range(len(params.names)):
            bundle = pk.derivatives(model, x, params, k)
            _assert_block_fd(model, params, k, x, bundle, h)
            checked += 1
    assert checked >= 100


def _relcheck(exact, fd, tol=1e-6, floor=1e-8):
    exact, fd = np.asarray(exact), np.asarray(fd)
    mask = np.abs(fd) > floor
    assert np.allclose(exact[mask], fd[mask], rtol=tol)
    assert np.allclose(exact[~mask], fd[~mask], atol=1e-6)


def _assert_block_fd(model, params, k, x, bundle, h):
    n = model.dim

    def fx(xv, pv=params):
        return pk.eval_f(model, xv, pv)

    def gx(xv, pv=params):
        return pk.eval_input_field(model, xv, pv)

    a_fd = np.empty((n, n))
    gx_fd = np.empty((n, n))
    for j in range(n):
        dp, dm = x.copy(), x.copy()
        dp[j] += h
        dm[j] -= h
        a_fd[:, j] = (fx(dp) - fx(dm)) / (2 * h)
        gx_fd[:, j] = (gx(dp) - gx(dm)) / (2 * h)
    _relcheck(bundle.a, a_fd)
    _relcheck(bundle.g_x, gx_fd)

    lam = params.values[k]
    pp = params.with_value_at(k, lam + h)
    pm = params.with_value_at(k, lam - h)
    _relcheck(bundle.b, (fx(x, pp) - fx(x, pm)) / (2 * h))
    _relcheck(bundle.g_lam, (gx(x, pp) - gx(x, pm)) / (2 * h))

    for j in range(n):
        dp, dm = x.copy(), x.copy()
        dp[j] += h
        dm[j] -= h
        hxx_fd = np.empty((n, n))
        for j2 in range(n):
            dpp, dpm = dp.copy(), dp.copy()
            dmp, dmm = dm.copy(), dm.copy()
            dpp[j2] += h
            dpm[j2] -= h
            dmp[j2] += h
            dmm[j2] -= h
            hxx_fd[:, j2] = (fx(dpp) - fx(dpm) - fx(dmp) + fx(dmm)) / (4 * h * h)
        _relcheck(bundle.h_xx[:, j, :], hxx_fd, tol=2e-5, floor=1e-6)
        hxl_fd = (fx(dp, pp) - fx(dp, pm) - fx(dm, pp) + fx(dm, pm)) / (4 * h * h)
        _relcheck(bundle.h_xlam[:, j], hxl_fd, tol=2e-5, floor=1e-6)


@pytest.mark.parametrize("model", [pk.RADIAL, pk.VAN_DER_POL, pk.GOODWIN],
                         ids=lambda m: m.name)
def test_hxx_symmetry_exact(model, rng):
    params = model.defaults
    lo, hi = (0.3, 1.6) if model.name == "goodwin" else (-1.5, 1.5)
    for _ in range(10):
        x = rng.uniform(lo, hi, size=model.dim)
        bundle = pk.derivatives(model, x, params, 0)
        assert np.array_equal(bundle.h_xx, np.swapaxes(bundle.h_xx, 1, 2))


def test_non_finite_output_names_component():
    def f(x, p):
        return [x[0], 1.0 / (x[1] - x[1])]  # always non-finite

    bad = ModelDefinition(
        name="bad", dim=2, f=f, g=lambda x, p: [0.0, 0.0],
        h=lambda x, p: x[0],
        defaults=ParameterVector(("q",), np.array([1.0])))
    with pytest.raises(ZeroDivisionError):
        pk.eval_f(bad, [1.0, 2.0], bad.defaults)

    def f_inf(x, p):
        return [x[0], float("inf")]

    bad2 = ModelDefinition(
        name="bad2", dim=2, f=f_inf, g=lambda x, p: [0.0, 0.0],
        h=lambda x, p: x[0],
        defaults=ParameterVector(("q",), np.array([1.0])))
    with pytest.raises(ModelDomainError, match=r"f\[1\]"):
        pk.eval_f(bad2, [1.0, 2.0], bad2.defaults)


def test_parameter_vector_validation():
    with pytest.raises(ConfigError):
        ParameterVector(("a", "a"), np.array([1.0, 2.0]))
    with pytest.raises(ConfigError):
        ParameterVector(("a",), np.array([np.inf]))
    with pytest.raises(ConfigError):
        ParameterVector((), np.array([]))


def test_unknown_override_is_hard_error():
    with pytest.raises(ConfigError, match="unknown parameter"):
        pk.resolve_parameters(pk.GOODWIN, {"nosuch": 1.0})
    updated = pk.resolve_parameters(pk.GOODWIN, {"a": 3.25})
    assert updated["a"] == 3.25
    assert pk.GOODWIN.defaults["a"] == 3.0  # original untouched


def test_dfdlam_helper_matches_bundle():
    params = pk.GOODWIN.defaults
    x = [0.8, 0.9, 1.1]
    for k in range(len(params)):
        b = pk.derivatives(pk.GOODWIN, x, params, k)
        assert np.allclose(model_mod.dfdlam(pk.GOODWIN, x, params, k), b.b,
                           rtol=1e-14)
