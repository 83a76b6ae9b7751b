"""Domain types: unperturbed system, perturbation operators, and the
time-reversal asymmetry profile.

Conventions used throughout the package:

* the unperturbed Hamiltonian is diagonal in the supplied basis, with real
  eigenvalues ``energies[k]``;
* Bohr frequencies are ``omega_fi = (E_f - E_i) / hbar``;
* the forward perturbation is ``H'(t)``; the backward-evolving state feels
  ``(1 + lambda_f(t)) * H'(t)``, where the scaling may depend on the final
  state ``f`` and on time.  ``lambda = 0`` everywhere reproduces standard
  quantum mechanics and ``lambda_f = -1`` switches the channel off entirely.

All public types are immutable after construction: arrays are defensively
copied and marked read-only, and dataclasses are frozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, ClassVar, Mapping, Optional, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NonFiniteEntry,
    NonHermitianPerturbation,
    ValidationError,
)

HERMITICITY_TOL = 1e-12


def _frozen_complex_matrix(data, what: str) -> np.ndarray:
    m = np.array(data, dtype=complex, copy=True)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{what} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise NonFiniteEntry(f"{what} contains non-finite entries")
    m.setflags(write=False)
    return m


def _check_hermitian(m: np.ndarray, what: str) -> None:
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > HERMITICITY_TOL:
        raise NonHermitianPerturbation(
            f"{what} is not Hermitian (max |M - M^dagger| = {dev:.3e})",
            max_deviation=dev,
        )


def _check_finite_scalar(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise NonFiniteEntry(f"{what} must be finite, got {x}")
    return x


@dataclass(frozen=True)
class ConstantPerturbation:
    """Time-independent Hermitian ``H'``, optionally switched on at a fixed
    time (zero before ``switch_on_time``, constant after)."""

    matrix: np.ndarray
    switch_on_time: Optional[float] = None

    kind: ClassVar[str] = "constant"

    def __post_init__(self):
        m = _frozen_complex_matrix(self.matrix, "perturbation matrix")
        _check_hermitian(m, "perturbation matrix")
        object.__setattr__(self, "matrix", m)
        if self.switch_on_time is not None:
            object.__setattr__(
                self,
                "switch_on_time",
                _check_finite_scalar(self.switch_on_time, "switch_on_time"),
            )

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def _active(self, t: float) -> bool:
        return self.switch_on_time is None or t >= self.switch_on_time

    def element(self, f: int, i: int, t: float) -> complex:
        return complex(self.matrix[f, i]) if self._active(t) else 0j

    def matrix_at(self, t: float) -> np.ndarray:
        if self._active(t):
            return self.matrix
        return np.zeros_like(self.matrix)

    def scaled(self, factor: float) -> "ConstantPerturbation":
        return ConstantPerturbation(self.matrix * factor, self.switch_on_time)


@dataclass(frozen=True)
class HarmonicPerturbation:
    """Monochromatic drive ``H'(t) = V e^{i w t} + V^dagger e^{-i w t}``.

    ``v`` is the (generally non-Hermitian) amplitude matrix; the combination
    above is Hermitian at every instant by construction.
    """

    v: np.ndarray
    frequency: float
    switch_on_time: Optional[float] = None

    kind: ClassVar[str] = "harmonic"

    def __post_init__(self):
        m = _frozen_complex_matrix(self.v, "harmonic amplitude matrix")
        object.__setattr__(self, "v", m)
        object.__setattr__(
            self, "frequency", _check_finite_scalar(self.frequency, "frequency")
        )
        if self.switch_on_time is not None:
            object.__setattr__(
                self,
                "switch_on_time",
                _check_finite_scalar(self.switch_on_time, "switch_on_time"),
            )

    @property
    def dimension(self) -> int:
        return self.v.shape[0]

    def _active(self, t: float) -> bool:
        return self.switch_on_time is None or t >= self.switch_on_time

    def element(self, f: int, i: int, t: float) -> complex:
        if not self._active(t):
            return 0j
        phase = 1j * self.frequency * t
        return complex(
            self.v[f, i] * np.exp(phase) + np.conj(self.v[i, f]) * np.exp(-phase)
        )

    def matrix_at(self, t: float) -> np.ndarray:
        if not self._active(t):
            return np.zeros_like(self.v)
        phase = 1j * self.frequency * t
        return self.v * np.exp(phase) + self.v.conj().T * np.exp(-phase)

    def scaled(self, factor: float) -> "HarmonicPerturbation":
        return HarmonicPerturbation(self.v * factor, self.frequency, self.switch_on_time)


@dataclass(frozen=True)
class SampledPerturbation:
    """Piecewise-linear interpolation of Hermitian snapshots on a time grid.

    ``times`` must be strictly increasing and every snapshot Hermitian;
    evaluation outside the grid is an error rather than an extrapolation.
    """

    times: np.ndarray
    matrices: np.ndarray
    switch_on_time: Optional[float] = None

    kind: ClassVar[str] = "sampled"

    def __post_init__(self):
        t = np.array(self.times, dtype=float, copy=True)
        if t.ndim != 1 or t.size < 2:
            raise ValidationError("sampled grid needs at least two times")
        if not np.all(np.isfinite(t)):
            raise NonFiniteEntry("sampled grid contains non-finite times")
        if not np.all(np.diff(t) > 0):
            raise ValidationError("sampled grid must be strictly increasing")
        m = np.array(self.matrices, dtype=complex, copy=True)
        if m.ndim != 3 or m.shape[0] != t.size or m.shape[1] != m.shape[2]:
            raise DimensionMismatch(
                "snapshots must have shape (len(times), n, n), got "
                f"{m.shape} for {t.size} times"
            )
        if not np.all(np.isfinite(m.view(float))):
            raise NonFiniteEntry("snapshots contain non-finite entries")
        for k in range(m.shape[0]):
            _check_hermitian(m[k], f"snapshot at t={t[k]}")
        t.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "matrices", m)
        if self.switch_on_time is not None:
            object.__setattr__(
                self,
                "switch_on_time",
                _check_finite_scalar(self.switch_on_time, "switch_on_time"),
            )

    @property
    def dimension(self) -> int:
        return self.matrices.shape[1]

    def _segment(self, t: float):
        if t < self.times[0] or t > self.times[-1]:
            raise ValidationError(
                f"t={t} lies outside the sampled grid "
                f"[{self.times[0]}, {self.times[-1]}]"
            )
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        k = min(max(k, 0), self.times.size - 2)
        w = (t - self.times[k]) / (self.times[k + 1] - self.times[k])
        return k, w

    def element(self, f: int, i: int, t: float) -> complex:
        if self.switch_on_time is not None and t < self.switch_on_time:
            return 0j
        k, w = self._segment(t)
        return complex(
            (1.0 - w) * self.matrices[k, f, i] + w * self.matrices[k + 1, f, i]
        )

    def matrix_at(self, t: float) -> np.ndarray:
        if self.switch_on_time is not None and t < self.switch_on_time:
            return np.zeros_like(self.matrices[0])
        k, w = self._segment(t)
        return (1.0 - w) * self.matrices[k] + w * self.matrices[k + 1]

    def scaled(self, factor: float) -> "SampledPerturbation":
        return SampledPerturbation(
            self.times, self.matrices * factor, self.switch_on_time
        )


Perturbation = Union[ConstantPerturbation, HarmonicPerturbation, SampledPerturbation]


@dataclass(frozen=True)
class QuantumSystem:
    """Diagonal unperturbed Hamiltonian plus a perturbation operator."""

    energies: np.ndarray
    perturbation: Perturbation
    hbar: float = 1.0

    def __post_init__(self):
        e = np.array(self.energies, dtype=float, copy=True)
        if e.ndim != 1 or e.size == 0:
            raise ValidationError("energies must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(e)):
            raise NonFiniteEntry("energies contain non-finite values")
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)
        hb = _check_finite_scalar(self.hbar, "hbar")
        if hb <= 0:
            raise ValidationError(f"hbar must be positive, got {hb}")
        object.__setattr__(self, "hbar", hb)
        if self.perturbation.dimension != e.size:
            raise DimensionMismatch(
                f"perturbation is {self.perturbation.dimension}-dimensional but "
                f"there are {e.size} energies"
            )

    @property
    def dimension(self) -> int:
        return int(self.energies.size)

    def check_index(self, k: int, what: str = "state index") -> int:
        k = int(k)
        if not 0 <= k < self.dimension:
            raise IndexOutOfRange(
                f"{what} {k} outside 0..{self.dimension - 1}"
            )
        return k

    def bohr_frequency(self, f: int, i: int) -> float:
        """(E_f - E_i) / hbar."""
        f = self.check_index(f, "final index")
        i = self.check_index(i, "initial index")
        return (self.energies[f] - self.energies[i]) / self.hbar

    def full_hamiltonian(self) -> Callable[[float], np.ndarray]:
        """H0 + H'(t) as a callable, for exact propagation."""
        h0 = np.diag(self.energies.astype(complex))

        def ham(t: float) -> np.ndarray:
            return h0 + self.perturbation.matrix_at(t)

        return ham

    def with_scaled_perturbation(self, factor: float) -> "QuantumSystem":
        return QuantumSystem(self.energies, self.perturbation.scaled(factor), self.hbar)


def build_system(
    energies,
    perturbation: Perturbation,
    hbar: float = 1.0,
    hermiticity_times=None,
) -> QuantumSystem:
    """Construct a validated :class:`QuantumSystem`.

    ``hermiticity_times`` optionally re-checks Hermiticity of the assembled
    ``H'(t)`` at extra sample times (the constructors already check the
    stored matrices themselves).
    """
    system = QuantumSystem(np.asarray(energies, dtype=float), perturbation, hbar)
    if hermiticity_times is not None:
        for t in hermiticity_times:
            _check_hermitian(perturbation.matrix_at(float(t)), f"H'(t={t})")
    return system


def matrix_element(system: QuantumSystem, f: int, i: int, t: float) -> complex:
    """``<f| H'(t) |i>`` with index validation."""
    f = system.check_index(f, "final index")
    i = system.check_index(i, "initial index")
    return complex(system.perturbation.element(f, i, float(t)))


# --------------------------------------------------------------------------
# time-reversal asymmetry profiles


@dataclass(frozen=True)
class ConstantTimeProfile:
    value: float

    kind: ClassVar[str] = "constant"

    def __post_init__(self):
        object.__setattr__(self, "value", _check_finite_scalar(self.value, "value"))

    def value_at(self, t: float) -> float:
        return self.value

    @property
    def frequency_hint(self) -> float:
        return 0.0

    def describe(self) -> str:
        return f"{self.value:g}"


@dataclass(frozen=True)
class SinusoidTimeProfile:
    """``amplitude * sin(frequency * t)``."""

    amplitude: float
    frequency: float

    kind: ClassVar[str] = "sinusoid"

    def __post_init__(self):
        object.__setattr__(
            self, "amplitude", _check_finite_scalar(self.amplitude, "amplitude")
        )
        object.__setattr__(
            self, "frequency", _check_finite_scalar(self.frequency, "frequency")
        )

    def value_at(self, t: float) -> float:
        return self.amplitude * math.sin(self.frequency * t)

    @property
    def frequency_hint(self) -> float:
        return abs(self.frequency)

    def describe(self) -> str:
        return f"{self.amplitude:g}*sin({self.frequency:g}*t)"


@dataclass(frozen=True)
class SampledTimeProfile:
    """Piecewise-linear profile on a strictly increasing grid; evaluation
    outside the grid is an error."""

    times: np.ndarray
    values: np.ndarray

    kind: ClassVar[str] = "sampled"

    def __post_init__(self):
        t = np.array(self.times, dtype=float, copy=True)
        v = np.array(self.values, dtype=float, copy=True)
        if t.ndim != 1 or t.size < 2 or v.shape != t.shape:
            raise ValidationError(
                "sampled profile needs matching 1-d times and values (n >= 2)"
            )
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise NonFiniteEntry("sampled profile contains non-finite entries")
        if not np.all(np.diff(t) > 0):
            raise ValidationError("sampled profile grid must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def value_at(self, t: float) -> float:
        if t < self.times[0] or t > self.times[-1]:
            raise ValidationError(
                f"t={t} lies outside the profile grid "
                f"[{self.times[0]}, {self.times[-1]}]"
            )
        return float(np.interp(t, self.times, self.values))

    @property
    def frequency_hint(self) -> float:
        # fastest representable variation: one kink per grid step
        return float(2.0 * math.pi / np.min(np.diff(self.times)))

    def describe(self) -> str:
        return f"sampled[{self.times.size} pts]"


TimeProfile = Union[ConstantTimeProfile, SinusoidTimeProfile, SampledTimeProfile]

_COMPOSITIONS = ("add", "multiply")


@dataclass(frozen=True)
class LambdaProfile:
    """How strongly, per final state and per instant, the backward-evolving
    state's perturbation is scaled relative to the forward one.

    The state-dependent part is ``base`` overridden by ``per_final_state``;
    when a ``time_profile`` is present it is combined with the state part
    according to ``composition``:

    * ``"add"``:       lambda_f(t) = state_part(f) + profile(t)
    * ``"multiply"``:  lambda_f(t) = state_part(f) * profile(t)

    ``composition`` is required together with ``time_profile`` and forbidden
    without it; there is no implicit default blend.
    """

    base: float = 0.0
    per_final_state: Optional[Mapping[int, float]] = None
    time_profile: Optional[TimeProfile] = None
    composition: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "base", _check_finite_scalar(self.base, "base"))
        if self.per_final_state is not None:
            clean = {}
            for k, v in dict(self.per_final_state).items():
                k = int(k)
                if k < 0:
                    raise ValidationError(f"per-final-state index {k} is negative")
                clean[k] = _check_finite_scalar(v, f"lambda override for state {k}")
            object.__setattr__(self, "per_final_state", MappingProxyType(clean))
        if self.time_profile is not None and self.composition is None:
            raise ValidationError(
                "a time profile requires an explicit composition "
                f"({' or '.join(_COMPOSITIONS)})"
            )
        if self.composition is not None:
            if self.time_profile is None:
                raise ValidationError("composition given without a time profile")
            if self.composition not in _COMPOSITIONS:
                raise ValidationError(
                    f"composition must be one of {_COMPOSITIONS}, "
                    f"got {self.composition!r}"
                )

    def state_part(self, f: int) -> float:
        if self.per_final_state is not None and int(f) in self.per_final_state:
            return self.per_final_state[int(f)]
        return self.base

    def resolve(self, f: int, t: float) -> float:
        s = self.state_part(f)
        if self.time_profile is None:
            return s
        p = self.time_profile.value_at(t)
        return s + p if self.composition == "add" else s * p

    @property
    def is_time_independent(self) -> bool:
        return self.time_profile is None or self.time_profile.kind == "constant"

    def constant_for(self, f: int) -> float:
        """The resolved value when it does not depend on time."""
        if not self.is_time_independent:
            raise ValidationError(
                "profile is time-dependent; there is no single constant value"
            )
        return self.resolve(f, 0.0)

    @property
    def frequency_hint(self) -> float:
        return 0.0 if self.time_profile is None else self.time_profile.frequency_hint

    def describe(self) -> str:
        if self.per_final_state:
            overrides = ", ".join(
                f"{k}: {v:g}" for k, v in sorted(self.per_final_state.items())
            )
            state = f"lambda={self.base:g} except {{{overrides}}}"
        else:
            state = f"lambda={self.base:g}"
        if self.time_profile is None:
            if self.base == 0.0 and not self.per_final_state:
                return "lambda=0 (standard QM)"
            return state
        op = "+" if self.composition == "add" else "*"
        return f"{state} {op} {self.time_profile.describe()}"


def resolve_lambda(profile: LambdaProfile, f: int, t: float) -> float:
    """Value of lambda_f(t).  Pure: identical inputs give bit-identical
    outputs (no hidden state, no randomness)."""
    return profile.resolve(f, t)


# --------------------------------------------------------------------------
# transition bookkeeping


@dataclass(frozen=True)
class TimeWindow:
    """Half-open in spirit, closed in practice: integration runs t_i -> t_f."""

    t_i: float
    t_f: float

    def __post_init__(self):
        ti = _check_finite_scalar(self.t_i, "t_i")
        tf = _check_finite_scalar(self.t_f, "t_f")
        if not tf > ti:
            raise ValidationError(f"need t_f > t_i, got [{ti}, {tf}]")
        object.__setattr__(self, "t_i", ti)
        object.__setattr__(self, "t_f", tf)

    @property
    def span(self) -> float:
        return self.t_f - self.t_i


@dataclass(frozen=True)
class TransitionChannel:
    """An |i> -> |f> transition over a window, with i != f."""

    i: int
    f: int
    window: TimeWindow

    def __post_init__(self):
        i, f = int(self.i), int(self.f)
        if i < 0 or f < 0:
            raise ValidationError("state indices must be non-negative")
        if i == f:
            raise ValidationError(
                "initial and final state coincide; first order only connects "
                "distinct states"
            )
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "f", f)
