import numpy as np
import pytest

from retropert import (
    DimensionMismatch,
    NonFiniteIntegrand,
    PropagatorSettings,
    QuadratureSettings,
    UnitarityLost,
    ValidationError,
    integrate_complex,
    propagate_backward_exact,
    propagate_exact,
)


def test_unit_circle_integral():
    # int_0^pi e^{it} dt = (e^{i pi} - 1)/i = 2i
    res = integrate_complex(lambda t: np.exp(1j * t), (0.0, np.pi))
    assert res.converged
    assert res.value == pytest.approx(2j, abs=1e-12)


def test_polynomials_integrated_exactly():
    # a single Gauss panel is exact far beyond degree 10
    res = integrate_complex(lambda t: t ** 10, (0.0, 1.0))
    assert res.value.real == pytest.approx(1.0 / 11.0, rel=1e-14)
    assert abs(res.value.imag) < 1e-15


def test_linearity_within_twice_tolerance():
    s = QuadratureSettings()
    w = (0.0, 3.0)
    f = lambda t: np.exp(1j * 1.7 * t)
    g = lambda t: t * np.exp(-t)
    lhs = integrate_complex(lambda t: 2.0 * f(t) + (0.5 - 1j) * g(t), w, s).value
    rhs = 2.0 * integrate_complex(f, w, s).value \
        + (0.5 - 1j) * integrate_complex(g, w, s).value
    tol = 2.0 * max(s.abs_tol, s.rel_tol * abs(lhs))
    assert abs(lhs - rhs) <= max(tol, 1e-13)


def test_additivity_over_adjacent_windows():
    s = QuadratureSettings()
    f = lambda t: np.cos(3.0 * t) + 1j * np.sin(t)
    whole = integrate_complex(f, (0.0, 2.0), s).value
    split = integrate_complex(f, (0.0, 0.7), s).value \
        + integrate_complex(f, (0.7, 2.0), s).value
    tol = 2.0 * max(s.abs_tol, s.rel_tol * abs(whole))
    assert abs(whole - split) <= max(tol, 1e-13)


def test_oscillatory_with_frequency_hint():
    omega = 50.5
    span = 2.0 * np.pi
    exact = (np.exp(1j * omega * span) - 1.0) / (1j * omega)
    res = integrate_complex(lambda t: np.exp(1j * omega * t), (0.0, span),
                            frequency_hint=omega)
    assert res.converged
    assert abs(res.value - exact) < 1e-11
    # the seed grid respects the panels-per-period floor
    periods = span * omega / (2.0 * np.pi)
    assert res.panels >= int(periods * 8)


def test_unconverged_flag_instead_of_exception():
    s = QuadratureSettings(rel_tol=1e-16, abs_tol=1e-300, max_subdivisions=2)
    res = integrate_complex(lambda t: np.exp(1j * 37.0 * t) / (1.0 + t * t),
                            (0.0, 5.0), s)
    assert not res.converged
    assert res.error_estimate > 0.0
    assert np.isfinite(res.value.real) and np.isfinite(res.value.imag)


def test_non_finite_integrand_raises():
    with pytest.raises(NonFiniteIntegrand):
        integrate_complex(lambda t: float("nan"), (0.0, 1.0))


def test_settings_validation():
    with pytest.raises(ValidationError):
        QuadratureSettings(rel_tol=0.0, abs_tol=0.0)
    with pytest.raises(ValidationError):
        QuadratureSettings(min_panels_per_period=0)
    with pytest.raises(ValidationError):
        PropagatorSettings(method="verlet")
    with pytest.raises(ValidationError):
        PropagatorSettings(steps_per_unit_time=0)


# --------------------------------------------------------------------------
# propagators


def test_free_phase_evolution():
    # H = diag(0, 1), |1> over [0, pi] -> phase e^{-i pi} = -1
    h = np.diag([0.0, 1.0]).astype(complex)
    psi = propagate_exact(h, [0.0, 1.0], (0.0, np.pi))
    assert psi[0] == pytest.approx(0.0, abs=1e-12)
    assert psi[1] == pytest.approx(-1.0, abs=1e-9)


@pytest.mark.parametrize("method", ["rk4", "midpoint-exponential"])
def test_rabi_oscillation(method):
    # H = g sigma_x: psi(t) = (cos gt, -i sin gt) starting from |0>
    g = 0.7
    h = np.array([[0.0, g], [g, 0.0]], dtype=complex)
    settings = PropagatorSettings(method=method)
    t = 2.0
    psi = propagate_exact(h, [1.0, 0.0], (0.0, t), settings)
    assert psi[0] == pytest.approx(np.cos(g * t), abs=1e-9)
    assert psi[1] == pytest.approx(-1j * np.sin(g * t), abs=1e-9)


def test_methods_agree_on_time_dependent_hamiltonian():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a = 0.5 * (a + a.conj().T)
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = 0.5 * (b + b.conj().T)

    def ham(t):
        return a + np.cos(3.0 * t) * b

    psi0 = np.zeros(3, dtype=complex)
    psi0[0] = 1.0
    p_rk4 = propagate_exact(ham, psi0, (0.0, 2.0), PropagatorSettings(method="rk4"))
    p_exp = propagate_exact(ham, psi0, (0.0, 2.0),
                            PropagatorSettings(method="midpoint-exponential"))
    # the midpoint rule is the laggard here (second order in dt for
    # time-dependent H), so agreement is at its error level, not rk4's
    assert np.max(np.abs(p_rk4 - p_exp)) < 1e-6


def test_backward_inverts_forward():
    rng = np.random.default_rng(8)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = 0.5 * (a + a.conj().T)
    psi0 = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi0 /= np.linalg.norm(psi0)
    forward = propagate_exact(h, psi0, (0.0, 1.5))
    back = propagate_backward_exact(h, forward, (0.0, 1.5))
    assert np.max(np.abs(back - psi0)) < 1e-8


def test_norm_preserved():
    h = np.array([[0.4, 0.2 - 0.1j], [0.2 + 0.1j, -0.3]], dtype=complex)
    psi = propagate_exact(h, [0.6, 0.8], (0.0, 5.0))
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-9


def test_unitarity_lost_on_coarse_steps():
    h = 10.0 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    coarse = PropagatorSettings(steps_per_unit_time=1, unitarity_check_tol=1e-8)
    with pytest.raises(UnitarityLost):
        propagate_exact(h, [1.0, 0.0], (0.0, 10.0), coarse)


def test_rk4_error_shrinks_sixteenfold_per_step_halving():
    g = 1.0
    h = np.array([[0.0, g], [g, 0.0]], dtype=complex)
    t = 1.0
    exact = np.array([np.cos(g * t), -1j * np.sin(g * t)])

    def err(steps):
        # the norm check is relaxed: at 10 steps rk4 drifts ~1e-7 by design
        psi = propagate_exact(h, [1.0, 0.0], (0.0, t),
                              PropagatorSettings(steps_per_unit_time=steps,
                                                 unitarity_check_tol=1e-3))
        return np.max(np.abs(psi - exact))

    ratio = err(10) / err(20)
    assert 8.0 < ratio < 32.0  # 16 +/- a factor of two


def test_propagator_input_validation():
    h = np.eye(2, dtype=complex)
    with pytest.raises(ValidationError):
        propagate_exact(h, [1.0, 1.0], (0.0, 1.0))  # not normalized
    with pytest.raises(DimensionMismatch):
        propagate_exact(h, [1.0, 0.0, 0.0], (0.0, 1.0))
    skew = np.array([[0.0, 1.0], [0.5, 0.0]], dtype=complex)
    with pytest.raises(ValidationError):
        propagate_exact(skew, [1.0, 0.0], (0.0, 1.0))
