"""Adaptive quadrature for complex-valued integrands and fixed-step
Schroedinger propagators.

The quadrature evaluates each panel with a nested Gauss-Legendre pair
(7-point inside 15-point, nodes from ``numpy.polynomial.legendre.leggauss``):
the 15-point value is kept, the difference to the 7-point value is the panel
error estimate.  The worst panel is split until the summed estimate meets
``max(abs_tol, rel_tol * |integral|)`` or the subdivision budget runs out, in
which case the best estimate is returned with ``converged=False`` instead of
raising - callers decide whether that is fatal.

Oscillatory integrands defeat coarse panels silently (a panel much wider than
a period can look converged at zero), so callers should pass the dominant
angular frequency as ``frequency_hint``; the initial grid then starts at
``min_panels_per_period`` panels per period.

The propagators are deliberately fixed-step so that identical inputs give
bit-identical trajectories: adaptive step-size controllers trade that away.
Norm drift beyond ``unitarity_check_tol`` raises :class:`UnitarityLost`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm

from .errors import (
    DimensionMismatch,
    NonFiniteIntegrand,
    UnitarityLost,
    ValidationError,
)
from .model import TimeWindow

_G7_NODES, _G7_WEIGHTS = np.polynomial.legendre.leggauss(7)
_G15_NODES, _G15_WEIGHTS = np.polynomial.legendre.leggauss(15)

_MAX_SEED_PANELS = 65536


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 1_000_000
    min_panels_per_period: int = 8

    def __post_init__(self):
        if self.rel_tol < 0 or self.abs_tol < 0:
            raise ValidationError("tolerances must be non-negative")
        if self.rel_tol == 0 and self.abs_tol == 0:
            raise ValidationError("at least one tolerance must be positive")
        if self.max_subdivisions < 0:
            raise ValidationError("max_subdivisions must be non-negative")
        if self.min_panels_per_period < 1:
            raise ValidationError("min_panels_per_period must be >= 1")


@dataclass(frozen=True)
class PropagatorSettings:
    steps_per_unit_time: int = 1000
    method: str = "rk4"
    unitarity_check_tol: float = 1e-8

    def __post_init__(self):
        if self.steps_per_unit_time < 1:
            raise ValidationError("steps_per_unit_time must be >= 1")
        if self.method not in ("rk4", "midpoint-exponential"):
            raise ValidationError(
                f"unknown propagator method {self.method!r}; "
                "use 'rk4' or 'midpoint-exponential'"
            )
        if not 0 < self.unitarity_check_tol < 1:
            raise ValidationError("unitarity_check_tol must be in (0, 1)")


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    converged: bool
    panels: int


DEFAULT_QUADRATURE = QuadratureSettings()
DEFAULT_PROPAGATOR = PropagatorSettings()

WindowLike = Union[TimeWindow, Tuple[float, float], Sequence[float]]


def _as_window(window: WindowLike) -> TimeWindow:
    if isinstance(window, TimeWindow):
        return window
    a, b = window
    return TimeWindow(float(a), float(b))


def _panel(f: Callable[[float], complex], a: float, b: float):
    """15-point value and |15-point - 7-point| estimate on [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    v15 = 0j
    for x, w in zip(_G15_NODES, _G15_WEIGHTS):
        v15 += w * complex(f(mid + half * x))
    v15 *= half
    v7 = 0j
    for x, w in zip(_G7_NODES, _G7_WEIGHTS):
        v7 += w * complex(f(mid + half * x))
    v7 *= half
    if not (math.isfinite(v15.real) and math.isfinite(v15.imag)):
        raise NonFiniteIntegrand(f"integrand is not finite on [{a}, {b}]")
    return v15, abs(v15 - v7)


def integrate_complex(
    integrand: Callable[[float], complex],
    window: WindowLike,
    settings: Optional[QuadratureSettings] = None,
    frequency_hint: Optional[float] = None,
) -> QuadratureResult:
    """Integrate a complex-valued function of one real variable.

    ``frequency_hint`` is the largest angular frequency expected in the
    integrand (rad per unit time); it sets the initial panel count and is
    essential for oscillatory integrands.
    """
    s = settings or DEFAULT_QUADRATURE
    win = _as_window(window)
    span = win.span

    n0 = 4
    if frequency_hint:
        periods = span * abs(frequency_hint) / (2.0 * math.pi)
        n0 = max(n0, math.ceil(periods * s.min_panels_per_period))
        n0 = min(n0, _MAX_SEED_PANELS)

    edges = np.linspace(win.t_i, win.t_f, n0 + 1)
    heap = []
    counter = 0
    total = 0j
    err_total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = _panel(integrand, a, b)
        heapq.heappush(heap, (-e, counter, a, b, v))
        counter += 1
        total += v
        err_total += e

    subdivisions = 0
    while True:
        tol = max(s.abs_tol, s.rel_tol * abs(total))
        if err_total <= tol or subdivisions >= s.max_subdivisions:
            break
        neg_e, _, a, b, v = heapq.heappop(heap)
        worst = -neg_e
        if worst == 0.0:
            # every remaining panel reports zero error; nothing left to split
            heapq.heappush(heap, (neg_e, counter, a, b, v))
            counter += 1
            break
        mid = 0.5 * (a + b)
        vl, el = _panel(integrand, a, mid)
        vr, er = _panel(integrand, mid, b)
        total += vl + vr - v
        err_total = max(err_total + el + er - worst, 0.0)
        heapq.heappush(heap, (-el, counter, a, mid, vl))
        counter += 1
        heapq.heappush(heap, (-er, counter, mid, b, vr))
        counter += 1
        subdivisions += 1

    converged = err_total <= max(s.abs_tol, s.rel_tol * abs(total))
    return QuadratureResult(
        value=complex(total),
        error_estimate=float(err_total),
        converged=bool(converged),
        panels=len(heap),
    )


# --------------------------------------------------------------------------
# propagation

Hamiltonian = Union[np.ndarray, Callable[[float], np.ndarray]]


def _check_hamiltonian(h: np.ndarray, dim: int) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape != (dim, dim):
        raise DimensionMismatch(
            f"hamiltonian has shape {h.shape}, state has dimension {dim}"
        )
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 0.0)
    dev = float(np.max(np.abs(h - h.conj().T)))
    if dev > 1e-9 * scale:
        raise ValidationError(
            f"hamiltonian is not Hermitian (max deviation {dev:.3e})"
        )
    return h


def _integrate_tdse(
    ham: Callable[[float], np.ndarray],
    psi0: np.ndarray,
    t_start: float,
    t_end: float,
    settings: PropagatorSettings,
    hbar: float,
) -> np.ndarray:
    span = t_end - t_start
    steps = max(1, math.ceil(settings.steps_per_unit_time * abs(span)))
    dt = span / steps
    psi = psi0.astype(complex).copy()
    norm0 = float(np.linalg.norm(psi))
    scale = -1j / hbar

    if settings.method == "rk4":
        for k in range(steps):
            t = t_start + k * dt
            k1 = scale * (ham(t) @ psi)
            k2 = scale * (ham(t + 0.5 * dt) @ (psi + 0.5 * dt * k1))
            k3 = scale * (ham(t + 0.5 * dt) @ (psi + 0.5 * dt * k2))
            k4 = scale * (ham(t + dt) @ (psi + dt * k3))
            psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:  # midpoint-exponential: exactly unitary per step for Hermitian H
        for k in range(steps):
            t_mid = t_start + (k + 0.5) * dt
            psi = expm((scale * dt) * ham(t_mid)) @ psi

    drift = abs(float(np.linalg.norm(psi)) - norm0)
    if drift > settings.unitarity_check_tol:
        raise UnitarityLost(
            f"norm drifted by {drift:.3e} over {steps} steps "
            f"(method={settings.method}); increase steps_per_unit_time"
        )
    return psi


def _prepare(hamiltonian: Hamiltonian, state, window: WindowLike):
    psi = np.array(state, dtype=complex, copy=True)
    if psi.ndim != 1 or psi.size == 0:
        raise ValidationError("state must be a non-empty 1-d vector")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-6:
        raise ValidationError(f"state is not normalized (|psi| = {norm})")
    win = _as_window(window)
    dim = psi.size
    if callable(hamiltonian):
        fn = hamiltonian
    else:
        fixed = np.asarray(hamiltonian, dtype=complex)

        def fn(t: float, _m=fixed) -> np.ndarray:
            return _m

    _check_hamiltonian(fn(win.t_i), dim)

    def checked(t: float) -> np.ndarray:
        return np.asarray(fn(t), dtype=complex)

    return checked, psi, win


def propagate_exact(
    hamiltonian: Hamiltonian,
    initial_state,
    window: WindowLike,
    settings: Optional[PropagatorSettings] = None,
    hbar: float = 1.0,
) -> np.ndarray:
    """Evolve ``initial_state`` from ``t_i`` to ``t_f`` under the full
    (not perturbative) Schroedinger equation."""
    s = settings or DEFAULT_PROPAGATOR
    ham, psi, win = _prepare(hamiltonian, initial_state, window)
    return _integrate_tdse(ham, psi, win.t_i, win.t_f, s, float(hbar))


def propagate_backward_exact(
    hamiltonian: Hamiltonian,
    final_state,
    window: WindowLike,
    settings: Optional[PropagatorSettings] = None,
    hbar: float = 1.0,
) -> np.ndarray:
    """Evolve ``final_state`` from ``t_f`` back to ``t_i``: the same equation
    integrated with a negative step, i.e. the inverse of forward evolution."""
    s = settings or DEFAULT_PROPAGATOR
    ham, psi, win = _prepare(hamiltonian, final_state, window)
    return _integrate_tdse(ham, psi, win.t_f, win.t_i, s, float(hbar))
