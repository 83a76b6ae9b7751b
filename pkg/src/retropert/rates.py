"""Transition rates into a quasi-continuum, with the golden rule picking up a
(1 + lambda_f) factor from the backward-evolving state.

A delta function over final energies is never evaluated literally.  It is
realized two independent ways and their agreement is itself a check:

* closed form: the delta becomes the band's density of states at resonance,
  giving w = (1 + lambda_f) (2 pi / hbar) |H'_fi|^2 rho;
* band sum: the first-order probability 4|H'|^2 sin^2(dE t/2 hbar)/dE^2 is
  summed over a finite band of equally spaced states and divided by t.  The
  sinc^2 kernel integrates to 2 pi t / hbar over energy, so for intermediate
  times the sum grows linearly in t and the quotient plateaus at the golden
  rule value.

The band sum is evaluated in a fixed order (ascending state index, exact
compensated summation), so identical inputs give bit-identical rates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidBand, ResonanceOutsideBand, ValidationError
from .model import LambdaProfile
from .transitions import oscillatory_probability, phase_integral

FLAG_VALID = "golden-rule-valid"
FLAG_TOO_EARLY = "too-early"
FLAG_BAND_EDGE = "band-edge-reached"


@dataclass(frozen=True)
class BandSpec:
    """Uniform band of final states: ``count`` (odd) equally spaced energies
    centered on ``center_energy`` spanning ``width``, so the density of
    states is ``count / width`` everywhere in the band.

    ``coupling`` is either one complex number (uniform) or a per-state
    sequence of length ``count``; it is the matrix element of the process
    being summed (for a harmonic drive, the element of the resonant term).
    """

    center_energy: float
    width: float
    count: int
    coupling: Union[complex, np.ndarray] = 1.0

    def __post_init__(self):
        c = float(self.center_energy)
        if not math.isfinite(c):
            raise InvalidBand("center_energy must be finite")
        w = float(self.width)
        if not (math.isfinite(w) and w > 0):
            raise InvalidBand(f"width must be positive and finite, got {w}")
        n = int(self.count)
        if n != self.count or n < 3 or n % 2 == 0:
            raise InvalidBand(f"count must be an odd integer >= 3, got {self.count}")
        coup = np.atleast_1d(np.asarray(self.coupling, dtype=complex))
        if coup.ndim != 1 or coup.size not in (1, n):
            raise InvalidBand(
                f"coupling must be a scalar or a length-{n} sequence, "
                f"got shape {coup.shape}"
            )
        if not np.all(np.isfinite(coup.view(float))):
            raise InvalidBand("coupling contains non-finite entries")
        if coup.size == 1:
            coup = np.full(n, coup[0])
        coup.setflags(write=False)
        object.__setattr__(self, "center_energy", c)
        object.__setattr__(self, "width", w)
        object.__setattr__(self, "count", n)
        object.__setattr__(self, "coupling", coup)

    @property
    def spacing(self) -> float:
        return self.width / self.count

    @property
    def rho(self) -> float:
        """Density of states, count/width = 1/spacing."""
        return self.count / self.width

    @property
    def energies(self) -> np.ndarray:
        k = np.arange(self.count, dtype=float)
        return self.center_energy + (k - 0.5 * (self.count - 1)) * self.spacing

    def contains(self, energy: float) -> bool:
        return abs(energy - self.center_energy) <= 0.5 * self.width

    def nearest_index(self, energy: float) -> int:
        return int(np.argmin(np.abs(self.energies - energy)))


@dataclass(frozen=True)
class RateResult:
    rate: float
    time_used: float
    regime_flag: str


@dataclass(frozen=True)
class HarmonicRateResult:
    """Golden-rule rate for one branch of a monochromatic drive, computed by
    both regularizations, plus the size of the dropped counter-rotating
    contribution as a diagnostic."""

    branch: str
    resonant_energy: float
    closed_form: float
    band_sum: RateResult
    counter_rotating_deviation: float


def golden_rule_rate(coupling_sq: float, rho: float, lambda_f: float = 0.0,
                     hbar: float = 1.0) -> float:
    """(1 + lambda_f) * (2 pi / hbar) * |H'_fi|^2 * rho."""
    if coupling_sq < 0:
        raise ValidationError(f"coupling_sq must be >= 0, got {coupling_sq}")
    if rho < 0:
        raise ValidationError(f"rho must be >= 0, got {rho}")
    if hbar <= 0:
        raise ValidationError(f"hbar must be positive, got {hbar}")
    if lambda_f < -1.0:
        warnings.warn(
            f"lambda_f = {lambda_f} is below -1; the rate is negative and no "
            "longer interpretable as a probability per unit time",
            stacklevel=2,
        )
    return (1.0 + lambda_f) * (2.0 * math.pi / hbar) * coupling_sq * rho


def _regime_flag(band: BandSpec, t: float, hbar: float) -> str:
    # energy resolution hbar/t against the band geometry; the too-early
    # condition is the coarser one and takes precedence
    if hbar / t > 0.1 * (0.5 * band.width):
        return FLAG_TOO_EARLY
    if 2.0 * math.pi * hbar / t > band.width:
        return FLAG_BAND_EDGE
    return FLAG_VALID


def _lambda_vector(lambda_profile, band: BandSpec) -> np.ndarray:
    if isinstance(lambda_profile, LambdaProfile):
        if not lambda_profile.is_time_independent:
            raise ValidationError(
                "band rates are defined for constant lambda only"
            )
        if lambda_profile.per_final_state:
            return np.array(
                [lambda_profile.constant_for(k) for k in range(band.count)]
            )
        return np.full(band.count, lambda_profile.constant_for(0))
    lam = float(lambda_profile)
    if not math.isfinite(lam):
        raise ValidationError("lambda must be finite")
    return np.full(band.count, lam)


def finite_time_band_rate(band: BandSpec, lambda_profile, t: float,
                          initial_energy: float, hbar: float = 1.0) -> RateResult:
    """Sum of per-state first-order probabilities over the band at elapsed
    time ``t``, divided by ``t``.

    ``lambda_profile`` may be a plain number or a constant
    :class:`LambdaProfile` (per-final-state values are indexed by band state,
    ascending energy).
    """
    if not t > 0:
        raise ValidationError(f"t must be positive, got {t}")
    lam = _lambda_vector(lambda_profile, band)
    csq = np.abs(band.coupling) ** 2
    probs = oscillatory_probability(csq, band.energies - initial_energy, t, hbar)
    total = math.fsum((1.0 + lam) * probs)
    return RateResult(
        rate=total / t,
        time_used=float(t),
        regime_flag=_regime_flag(band, t, hbar),
    )


def harmonic_rate(band: BandSpec, branch: str, t: float, initial_energy: float,
                  drive_frequency: float, lambda_f: float = 0.0,
                  hbar: float = 1.0) -> HarmonicRateResult:
    """Golden-rule rate for one branch of H'(t) = V e^{iwt} + V^dag e^{-iwt}.

    ``branch`` selects the resonant final energy: ``"emission"`` targets
    E_i - hbar*w, ``"absorption"`` targets E_i + hbar*w; ``band.coupling``
    holds the matrix elements of the resonant term for that branch.

    Computed two ways: the closed form uses the band's density of states at
    resonance; the band sum keeps only the resonant rotating term at finite
    time.  The counter-rotating term is evaluated separately and its relative
    effect on the band sum reported as a diagnostic; its coefficient is taken
    as conj(coupling), which assumes a symmetric amplitude matrix
    (V_if = V_fi, true in particular for real V).
    """
    if branch not in ("emission", "absorption"):
        raise ValidationError(
            f"branch must be 'emission' or 'absorption', got {branch!r}"
        )
    if not t > 0:
        raise ValidationError(f"t must be positive, got {t}")
    if not drive_frequency > 0:
        raise ValidationError(
            f"drive_frequency must be positive, got {drive_frequency}"
        )
    sign = -1.0 if branch == "emission" else 1.0
    e_res = initial_energy + sign * hbar * drive_frequency
    if not band.contains(e_res):
        raise ResonanceOutsideBand(
            f"{branch} resonance at E = {e_res:g} lies outside the band "
            f"[{band.center_energy - band.width / 2:g}, "
            f"{band.center_energy + band.width / 2:g}]"
        )

    c_res = band.coupling[band.nearest_index(e_res)]
    closed = golden_rule_rate(abs(c_res) ** 2, band.rho, lambda_f, hbar)

    csq = np.abs(band.coupling) ** 2
    probs = oscillatory_probability(csq, band.energies - e_res, t, hbar)
    rate_rot = (1.0 + lambda_f) * math.fsum(probs) / t
    band_part = RateResult(
        rate=rate_rot,
        time_used=float(t),
        regime_flag=_regime_flag(band, t, hbar),
    )

    # full first-order amplitude with both drive terms, per state
    kappa_res = (band.energies - e_res) / hbar
    kappa_ctr = kappa_res + 2.0 * sign * drive_frequency
    amp = (band.coupling * phase_integral(kappa_res, t)
           + np.conj(band.coupling) * phase_integral(kappa_ctr, t))
    probs_full = np.abs(amp) ** 2 / hbar ** 2
    rate_full = (1.0 + lambda_f) * math.fsum(probs_full) / t
    if rate_rot != 0.0:
        deviation = abs(rate_full - rate_rot) / abs(rate_rot)
    else:
        deviation = 0.0 if rate_full == 0.0 else math.inf

    return HarmonicRateResult(
        branch=branch,
        resonant_energy=float(e_res),
        closed_form=closed,
        band_sum=band_part,
        counter_rotating_deviation=float(deviation),
    )
