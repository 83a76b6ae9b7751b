"""First-order transition amplitudes and probabilities when the forward and
backward evolutions feel different perturbation strengths.

Forward amplitude, first order in H':

    A_F = (1 / i hbar) * int_{t_i}^{t_f} e^{i omega_fi t} <f|H'(t)|i> dt

The backward-evolving state is perturbed by (1 + lambda_f(t)) H' instead of
H', which gives the backward amplitude

    A_B = conj[ (1 / i hbar) * int_{t_i}^{t_f}
                e^{i omega_fi t} (1 + lambda_f(t)) <f|H'(t)|i> dt ]

so that lambda = 0 collapses A_B to conj(A_F) and the standard Born rule.
The transition probability is the product

    Pr(f) = A_F * A_B = Pr_QM + Pr_retro,   Pr_QM = |A_F|^2,

which for nonzero lambda need not be real and need not stay inside [0, 1].
Both facts are physics, not bugs, so results carry the complex value
unclamped together with ``is_real`` / ``in_unit_interval`` flags.

When lambda_f is constant in time it factors out of the backward integral,
A_B = (1 + lambda_f) conj(A_F), and the code reuses the forward quadrature
verbatim: Pr = (1 + lambda_f) |A_F|^2 then holds to rounding error rather
than to quadrature tolerance, and lambda_f = -1 gives exactly zero.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError, WrongPerturbationKind
from .model import (
    ConstantPerturbation,
    HarmonicPerturbation,
    LambdaProfile,
    QuantumSystem,
    TransitionChannel,
)
from .numerics import (
    DEFAULT_PROPAGATOR,
    PropagatorSettings,
    QuadratureResult,
    QuadratureSettings,
    integrate_complex,
    propagate_exact,
)

#: probabilities whose imaginary part is below this are reported as real
IMAG_TOL = 1e-9

#: |kappa * T| below which oscillatory closed forms switch to series
SMALL_PHASE = 1e-4


@dataclass(frozen=True)
class AmplitudePair:
    forward: complex
    backward: complex


@dataclass(frozen=True)
class TransitionResult:
    """Pr(f) = probability = pr_qm + pr_retro, kept complex on purpose."""

    probability: complex
    pr_qm: float
    pr_retro: complex
    is_real: bool
    in_unit_interval: bool
    quadrature_converged: bool
    lambda_summary: str


def _frequency_hint(system: QuantumSystem, channel: TransitionChannel,
                    extra: float = 0.0) -> float:
    hint = abs(system.bohr_frequency(channel.f, channel.i))
    if isinstance(system.perturbation, HarmonicPerturbation):
        hint += abs(system.perturbation.frequency)
    return hint + extra


def _forward(system: QuantumSystem, channel: TransitionChannel,
             settings: Optional[QuadratureSettings]) -> QuadratureResult:
    f, i = system.check_index(channel.f), system.check_index(channel.i)
    omega = system.bohr_frequency(f, i)
    pert = system.perturbation

    def integrand(t: float) -> complex:
        return cmath.exp(1j * omega * t) * pert.element(f, i, t)

    q = integrate_complex(
        integrand, channel.window, settings,
        frequency_hint=_frequency_hint(system, channel),
    )
    pref = 1.0 / (1j * system.hbar)
    return QuadratureResult(
        value=complex(pref * q.value),
        error_estimate=q.error_estimate / system.hbar,
        converged=q.converged,
        panels=q.panels,
    )


def _backward(system: QuantumSystem, profile: LambdaProfile,
              channel: TransitionChannel,
              settings: Optional[QuadratureSettings]) -> QuadratureResult:
    f, i = system.check_index(channel.f), system.check_index(channel.i)
    if profile.is_time_independent:
        lam = profile.constant_for(f)
        fw = _forward(system, channel, settings)
        return QuadratureResult(
            value=((1.0 + lam) * fw.value).conjugate(),
            error_estimate=abs(1.0 + lam) * fw.error_estimate,
            converged=fw.converged,
            panels=fw.panels,
        )

    omega = system.bohr_frequency(f, i)
    pert = system.perturbation

    def integrand(t: float) -> complex:
        return (cmath.exp(1j * omega * t)
                * (1.0 + profile.resolve(f, t))
                * pert.element(f, i, t))

    q = integrate_complex(
        integrand, channel.window, settings,
        frequency_hint=_frequency_hint(system, channel, profile.frequency_hint),
    )
    pref = 1.0 / (1j * system.hbar)
    return QuadratureResult(
        value=complex(pref * q.value).conjugate(),
        error_estimate=q.error_estimate / system.hbar,
        converged=q.converged,
        panels=q.panels,
    )


def forward_amplitude(system: QuantumSystem, channel: TransitionChannel,
                      settings: Optional[QuadratureSettings] = None) -> complex:
    """First-order amplitude for |i> -> |f> along the forward evolution."""
    return _forward(system, channel, settings).value


def backward_amplitude(system: QuantumSystem, profile: LambdaProfile,
                       channel: TransitionChannel,
                       settings: Optional[QuadratureSettings] = None) -> complex:
    """First-order amplitude contributed by the backward-evolving state."""
    return _backward(system, profile, channel, settings).value


def amplitude_pair(system: QuantumSystem, profile: LambdaProfile,
                   channel: TransitionChannel,
                   settings: Optional[QuadratureSettings] = None) -> AmplitudePair:
    return AmplitudePair(
        forward=forward_amplitude(system, channel, settings),
        backward=backward_amplitude(system, profile, channel, settings),
    )


def transition_probability(system: QuantumSystem, profile: LambdaProfile,
                           channel: TransitionChannel,
                           settings: Optional[QuadratureSettings] = None,
                           ) -> TransitionResult:
    """Pr(f) = A_F * A_B with its decomposition and reality diagnostics."""
    fw = _forward(system, channel, settings)
    if profile.is_time_independent:
        lam = profile.constant_for(channel.f)
        bw_value = ((1.0 + lam) * fw.value).conjugate()
        converged = fw.converged
    else:
        bw = _backward(system, profile, channel, settings)
        bw_value = bw.value
        converged = fw.converged and bw.converged

    probability = fw.value * bw_value
    pr_qm = (fw.value * fw.value.conjugate()).real
    pr_retro = probability - pr_qm
    is_real = abs(probability.imag) <= IMAG_TOL
    in_unit = is_real and -IMAG_TOL <= probability.real <= 1.0 + IMAG_TOL
    return TransitionResult(
        probability=complex(probability),
        pr_qm=float(pr_qm),
        pr_retro=complex(pr_retro),
        is_real=bool(is_real),
        in_unit_interval=bool(in_unit),
        quadrature_converged=bool(converged),
        lambda_summary=profile.describe(),
    )


# --------------------------------------------------------------------------
# closed forms for a constant perturbation


def oscillatory_probability(coupling_sq, delta_e, elapsed: float,
                            hbar: float = 1.0):
    """Standard first-order probability for a constant perturbation:

        4 |H'_fi|^2 sin^2(dE t / 2 hbar) / dE^2

    Near resonance (|dE| t / hbar < SMALL_PHASE) the quotient is replaced by
    its series |H'|^2 (t/hbar)^2 (1 - x^2/3 + 2 x^4/45), x = dE t / 2 hbar,
    whose truncation error ~x^6/315 is far below the 0/0 cancellation noise.
    Vectorized over ``coupling_sq`` and ``delta_e``.
    """
    csq = np.asarray(coupling_sq, dtype=float)
    de = np.asarray(delta_e, dtype=float)
    t = float(elapsed)
    if t < 0:
        raise ValidationError(f"elapsed time must be >= 0, got {t}")
    x = de * (t / (2.0 * hbar))
    small = np.abs(de) * (t / hbar) < SMALL_PHASE
    with np.errstate(divide="ignore", invalid="ignore"):
        general = 4.0 * csq * np.square(np.sin(x)) / np.square(de)
    x2 = np.square(x)
    series = csq * (t / hbar) ** 2 * (1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 45.0)
    out = np.where(small, series, general)
    if out.ndim == 0:
        return float(out)
    return out


def phase_integral(kappa, duration: float):
    """int_0^T e^{i kappa t} dt = (e^{i kappa T} - 1) / (i kappa), with a
    series branch for |kappa T| < SMALL_PHASE.  Vectorized over ``kappa``."""
    k = np.asarray(kappa, dtype=float)
    T = float(duration)
    z = k * T
    small = np.abs(z) < SMALL_PHASE
    with np.errstate(divide="ignore", invalid="ignore"):
        general = (np.exp(1j * z) - 1.0) / (1j * k)
    series = T * (1.0 + 1j * z / 2.0 - z ** 2 / 6.0
                  - 1j * z ** 3 / 24.0 + z ** 4 / 120.0)
    out = np.where(small, series, general)
    if out.ndim == 0:
        return complex(out)
    return out


def _linear_phase_integral(alpha: float, beta: float, t0: float, t1: float,
                           omega: float) -> complex:
    """int_{t0}^{t1} (alpha + beta t) e^{i omega t} dt, exactly."""
    h = t1 - t0
    m0 = phase_integral(omega, h)
    z = omega * h
    if abs(z) < SMALL_PHASE:
        m1 = h * h * (0.5 + 1j * z / 3.0 - z ** 2 / 8.0
                      - 1j * z ** 3 / 30.0 + z ** 4 / 144.0)
    else:
        m1 = (h * cmath.exp(1j * z) - m0) / (1j * omega)
    return cmath.exp(1j * omega * t0) * ((alpha + beta * t0) * m0 + beta * m1)


def _require_constant_from_zero(system: QuantumSystem,
                                channel: TransitionChannel) -> None:
    pert = system.perturbation
    if not isinstance(pert, ConstantPerturbation):
        raise WrongPerturbationKind(
            f"closed form needs a constant perturbation, got kind "
            f"{pert.kind!r}"
        )
    if pert.switch_on_time is not None and pert.switch_on_time > channel.window.t_i:
        raise ValidationError(
            "closed form assumes the perturbation is on over the whole window"
        )


def pr_qm_oscillatory(system: QuantumSystem, channel: TransitionChannel) -> float:
    """Closed-form |A_F|^2 for a constant perturbation over the channel
    window (the lambda-independent part of the probability)."""
    _require_constant_from_zero(system, channel)
    f, i = system.check_index(channel.f), system.check_index(channel.i)
    h_fi = system.perturbation.matrix[f, i]
    de = float(system.energies[f] - system.energies[i])
    return float(oscillatory_probability(
        abs(h_fi) ** 2, de, channel.window.span, system.hbar))


def _lambda_phase_integral(profile: LambdaProfile, f: int, omega: float,
                           duration: float) -> complex:
    """int_0^T lambda_f(t) e^{i omega t} dt for the supported profiles."""
    s = profile.state_part(f)
    tp = profile.time_profile
    if tp is None or tp.kind == "constant":
        lam = profile.constant_for(f)
        return lam * phase_integral(omega, duration)
    if tp.kind == "sinusoid":
        # sin(W t) = (e^{iWt} - e^{-iWt}) / 2i
        osc = (phase_integral(omega + tp.frequency, duration)
               - phase_integral(omega - tp.frequency, duration)) / 2j
        if profile.composition == "multiply":
            return s * tp.amplitude * osc
        return s * phase_integral(omega, duration) + tp.amplitude * osc
    if tp.kind == "sampled":
        if tp.times[0] > 0.0 or tp.times[-1] < duration:
            raise ValidationError(
                f"sampled profile grid [{tp.times[0]}, {tp.times[-1]}] does "
                f"not cover the window [0, {duration}]"
            )
        knots = [0.0]
        knots.extend(float(u) for u in tp.times if 0.0 < u < duration)
        knots.append(duration)
        acc = 0j
        for u, v in zip(knots[:-1], knots[1:]):
            lu = profile.resolve(f, u)
            lv = profile.resolve(f, v)
            beta = (lv - lu) / (v - u)
            alpha = lu - beta * u
            acc += _linear_phase_integral(alpha, beta, u, v, omega)
        return acc
    raise ValidationError(f"unsupported time profile kind {tp.kind!r}")


def pr_retro_constant_perturbation(system: QuantumSystem,
                                   profile: LambdaProfile,
                                   channel: TransitionChannel) -> complex:
    """Closed-form lambda-dependent part of the probability for a constant
    perturbation on a window starting at t_i = 0:

        Pr_retro = A_F * conj[ (1 / i hbar) H'_fi
                               int_0^{t_f} lambda_f(t) e^{i omega t} dt ]

    For time-independent lambda this reduces to lambda_f * Pr_QM (real); a
    time-dependent lambda generally leaves an imaginary part.
    """
    _require_constant_from_zero(system, channel)
    if channel.window.t_i != 0.0:
        raise ValidationError(
            f"closed form is derived for a window starting at 0, "
            f"got t_i = {channel.window.t_i}"
        )
    f, i = system.check_index(channel.f), system.check_index(channel.i)
    if profile.is_time_independent:
        return complex(profile.constant_for(f) * pr_qm_oscillatory(system, channel))

    h_fi = complex(system.perturbation.matrix[f, i])
    hbar = system.hbar
    omega = system.bohr_frequency(f, i)
    T = channel.window.t_f
    a_f = h_fi * phase_integral(omega, T) / (1j * hbar)
    lam_int = _lambda_phase_integral(profile, f, omega, T)
    return complex(a_f * (h_fi * lam_int / (1j * hbar)).conjugate())


# --------------------------------------------------------------------------
# first-order validity


def first_order_residual(system: QuantumSystem, channel: TransitionChannel,
                         propagator: Optional[PropagatorSettings] = None,
                         quadrature: Optional[QuadratureSettings] = None) -> float:
    """|A_exact - A_F| between the exactly propagated interaction-picture
    amplitude and the first-order one.

    Scaling the perturbation by epsilon scales A_F by epsilon and this
    residual by epsilon^2 (plus higher orders), which is the practical test
    that first order is trustworthy for a given strength.
    """
    prop = propagator or DEFAULT_PROPAGATOR
    f, i = system.check_index(channel.f), system.check_index(channel.i)
    win = channel.window
    ham = system.full_hamiltonian()
    psi0 = np.zeros(system.dimension, dtype=complex)
    psi0[i] = 1.0
    psi = propagate_exact(ham, psi0, win, prop, hbar=system.hbar)
    # strip the free phases: <f|U|i> -> interaction picture
    phase = cmath.exp(1j * (system.energies[f] * win.t_f
                            - system.energies[i] * win.t_i) / system.hbar)
    a_exact = phase * complex(psi[f])
    a_first = forward_amplitude(system, channel, quadrature)
    return abs(a_exact - a_first)
