"""Pre/post-selected measurement statistics (two-state-vector formalism).

For an ensemble pre-selected in |phi> and post-selected in |psi>, the
probability that an intermediate projective measurement gave outcome q_n is

    Pr(q_n) = |<psi| P_n |phi>|^2 / sum_j |<psi| P_j |phi>|^2

With no post-selection (averaging over a complete set of post-selection
outcomes, each weighted by how often it occurs) this reduces exactly to the
Born rule, which is the baseline the asymmetric-perturbation model is
compared against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Hashable, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, OrthogonalSelection, ValidationError

PROJECTOR_TOL = 1e-12
NORM_TOL = 1e-12


def _unit_vector(data, what: str) -> np.ndarray:
    v = np.array(data, dtype=complex, copy=True)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"{what} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(v.view(float))):
        raise ValidationError(f"{what} contains non-finite entries")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"{what} is not normalized (|v| = {norm!r})")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class TwoStateVector:
    """Pre-selected state |phi> and post-selected state |psi> (stored as a
    ket; the conjugation in <psi| is applied at use)."""

    pre: np.ndarray
    post: np.ndarray

    def __post_init__(self):
        pre = _unit_vector(self.pre, "pre-selection vector")
        post = _unit_vector(self.post, "post-selection vector")
        if pre.size != post.size:
            raise DimensionMismatch(
                f"pre ({pre.size}) and post ({post.size}) dimensions differ"
            )
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "post", post)

    @property
    def dimension(self) -> int:
        return int(self.pre.size)


class ProjectiveMeasurement:
    """A complete set of mutually orthogonal projectors with outcome labels.

    Degenerate outcomes (rank > 1 projectors) are allowed.
    """

    def __init__(self, outcomes: Sequence[Tuple[Hashable, np.ndarray]]):
        if not outcomes:
            raise ValidationError("measurement needs at least one outcome")
        cleaned = []
        labels = set()
        dim = None
        for label, proj in outcomes:
            p = np.array(proj, dtype=complex, copy=True)
            if p.ndim != 2 or p.shape[0] != p.shape[1]:
                raise DimensionMismatch(
                    f"projector for {label!r} is not square: shape {p.shape}"
                )
            if dim is None:
                dim = p.shape[0]
            elif p.shape[0] != dim:
                raise DimensionMismatch(
                    f"projector for {label!r} has dimension {p.shape[0]}, "
                    f"expected {dim}"
                )
            if not np.all(np.isfinite(p.view(float))):
                raise ValidationError(f"projector for {label!r} is not finite")
            if np.max(np.abs(p - p.conj().T)) > PROJECTOR_TOL:
                raise ValidationError(f"projector for {label!r} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL:
                raise ValidationError(f"projector for {label!r} is not idempotent")
            if label in labels:
                raise ValidationError(f"duplicate outcome label {label!r}")
            labels.add(label)
            p.setflags(write=False)
            cleaned.append((label, p))
        for a in range(len(cleaned)):
            for b in range(a + 1, len(cleaned)):
                cross = cleaned[a][1] @ cleaned[b][1]
                if np.max(np.abs(cross)) > PROJECTOR_TOL:
                    raise ValidationError(
                        f"projectors {cleaned[a][0]!r} and {cleaned[b][0]!r} "
                        "are not orthogonal"
                    )
        total = sum(p for _, p in cleaned)
        if np.max(np.abs(total - np.eye(dim))) > PROJECTOR_TOL:
            raise ValidationError("projectors do not sum to the identity")
        self._outcomes = tuple(cleaned)
        self._dim = dim

    @property
    def outcomes(self) -> Tuple[Tuple[Hashable, np.ndarray], ...]:
        return self._outcomes

    @property
    def dimension(self) -> int:
        return self._dim

    @classmethod
    def computational_basis(cls, dim: int) -> "ProjectiveMeasurement":
        eye = np.eye(dim, dtype=complex)
        return cls([(k, np.outer(eye[k], eye[k])) for k in range(dim)])

    def basis_states(self) -> list:
        """One orthonormal eigenvector per unit of rank, covering the space."""
        states = []
        for _, p in self._outcomes:
            vals, vecs = np.linalg.eigh(p)
            for k in range(vals.size):
                if vals[k] > 0.5:
                    states.append(np.ascontiguousarray(vecs[:, k]))
        return states


def _check_dim(meas: ProjectiveMeasurement, dim: int) -> None:
    if meas.dimension != dim:
        raise DimensionMismatch(
            f"measurement dimension {meas.dimension} does not match state "
            f"dimension {dim}"
        )


def abl_probability(tsv: TwoStateVector,
                    meas: ProjectiveMeasurement) -> Dict[Hashable, float]:
    """Outcome distribution of an intermediate measurement between pre- and
    post-selection."""
    _check_dim(meas, tsv.dimension)
    numerators = []
    for label, p in meas.outcomes:
        amp = np.vdot(tsv.post, p @ tsv.pre)
        numerators.append((label, abs(amp) ** 2))
    denom = math.fsum(w for _, w in numerators)
    if denom == 0.0:
        raise OrthogonalSelection(
            "post-selection is unreachable from the pre-selection through "
            "every measurement outcome; conditional probabilities undefined"
        )
    return {label: float(w / denom) for label, w in numerators}


def born_probability(state, meas: ProjectiveMeasurement) -> Dict[Hashable, float]:
    """Standard (no post-selection) outcome distribution <phi|P_n|phi>."""
    phi = _unit_vector(state, "state")
    _check_dim(meas, phi.size)
    return {
        label: float(np.vdot(phi, p @ phi).real) for label, p in meas.outcomes
    }


def abl_reduces_to_born_check(state, meas: ProjectiveMeasurement,
                              tol: float = 1e-10) -> Tuple[bool, float]:
    """Average the ABL distribution over post-selections in the measurement's
    own eigenbasis, weighting each post-selection by how often it occurs, and
    compare against the Born distribution.  Returns (within tol, max
    absolute deviation)."""
    phi = _unit_vector(state, "state")
    _check_dim(meas, phi.size)
    born = born_probability(phi, meas)
    averaged = {label: 0.0 for label, _ in meas.outcomes}
    for b in meas.basis_states():
        weight = math.fsum(
            abs(np.vdot(b, p @ phi)) ** 2 for _, p in meas.outcomes
        )
        if weight == 0.0:
            continue  # this post-selection never occurs
        dist = abl_probability(TwoStateVector(pre=phi, post=b), meas)
        for label, pr in dist.items():
            averaged[label] += weight * pr
    deviation = max(abs(averaged[label] - born[label]) for label in averaged)
    return deviation <= tol, float(deviation)
