import numpy as np
import pytest

from retropert import (
    ConstantPerturbation,
    ProjectiveMeasurement,
    TimeWindow,
    TransitionChannel,
    build_system,
)

# collected by the acceptance tests, printed after the normal summary so the
# per-criterion verdicts are visible regardless of output capturing
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(number, name, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number} ({name}): {status}"
        if detail:
            line += f" -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def random_hermitian(rng, dim, max_entry=0.2):
    """Random Hermitian matrix with every entry's modulus <= max_entry."""
    m = rng.uniform(-1.0, 1.0, (dim, dim)) + 1j * rng.uniform(-1.0, 1.0, (dim, dim))
    m = 0.5 * (m + m.conj().T)
    top = np.max(np.abs(m))
    if top > 0:
        m *= max_entry / top
    return m


def random_system(rng, dim, max_entry=0.2, energy_spread=3.0):
    energies = np.sort(rng.uniform(0.0, energy_spread, dim))
    return build_system(energies, ConstantPerturbation(random_hermitian(rng, dim, max_entry)))


def random_channel(rng, dim, t_max=6.0):
    i, f = rng.choice(dim, size=2, replace=False)
    t_f = float(rng.uniform(0.5, t_max))
    return TransitionChannel(int(i), int(f), TimeWindow(0.0, t_f))


def random_measurement(rng, dim):
    """Random projective measurement, possibly with degenerate outcomes."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(a)
    # partition the orthonormal columns into contiguous groups
    n_groups = int(rng.integers(1, dim + 1))
    cuts = sorted(rng.choice(np.arange(1, dim), size=n_groups - 1, replace=False)) \
        if n_groups > 1 else []
    bounds = [0] + list(int(c) for c in cuts) + [dim]
    outcomes = []
    for g in range(len(bounds) - 1):
        cols = q[:, bounds[g]:bounds[g + 1]]
        outcomes.append((g, cols @ cols.conj().T))
    return ProjectiveMeasurement(outcomes)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def two_level():
    """The standing two-level example: dE = 1, |H'_01| = 0.1."""
    system = build_system([0.0, 1.0], ConstantPerturbation([[0.0, 0.1], [0.1, 0.0]]))
    channel = TransitionChannel(0, 1, TimeWindow(0.0, float(np.pi)))
    return system, channel
