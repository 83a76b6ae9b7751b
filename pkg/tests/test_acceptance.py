"""End-to-end acceptance checks, one numbered criterion per test.

Each test computes its quantities, records a one-line PASS/FAIL verdict (shown
in the terminal summary), then asserts.  Criterion 4 is expected to fail at
the short end of its time range: the finite-band rate sits below the
golden-rule value by the sinc-squared tail mass outside the band, which decays
like 2/(pi t) and is still above the 2 percent bound for t < 33.  That gap is
a property of the quantity itself, not of this implementation, so the bound is
asserted as stated rather than widened to fit.
"""

import math
import os
import time

import numpy as np

from retropert import (
    BandSpec,
    ConstantPerturbation,
    LambdaProfile,
    OrthogonalSelection,
    ProjectiveMeasurement,
    QuadratureSettings,
    SinusoidTimeProfile,
    TimeWindow,
    TransitionChannel,
    TwoStateVector,
    abl_probability,
    abl_reduces_to_born_check,
    build_system,
    finite_time_band_rate,
    first_order_residual,
    forward_amplitude,
    golden_rule_rate,
    harmonic_rate,
    pr_qm_oscillatory,
    pr_retro_constant_perturbation,
    transition_probability,
)
from retropert.cli import main

from conftest import random_channel, random_measurement, random_state, random_system

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "scenarios")
SWEEP_SCENARIO = os.path.join(SCENARIO_DIR, "two_level_lambda_sweep.toml")


def _random_cases(count=50, seed=2024):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        system = random_system(rng, int(rng.integers(2, 9)))
        cases.append((system, random_channel(rng, system.dimension)))
    return cases


def test_criterion_1_standard_qm_recovered_at_zero_lambda(record_criterion):
    t0 = time.perf_counter()
    profile = LambdaProfile()
    worst_diff = 0.0
    worst_imag = 0.0
    for system, channel in _random_cases():
        res = transition_probability(system, profile, channel)
        a = forward_amplitude(system, channel)
        worst_diff = max(worst_diff, abs(res.probability - abs(a) ** 2))
        worst_imag = max(worst_imag, abs(res.probability.imag))
    elapsed = time.perf_counter() - t0
    ok = worst_diff < 1e-9 and worst_imag < 1e-9 and elapsed < 30.0
    record_criterion(1, "standard QM recovered at lambda=0", ok,
                     f"worst |Pr - |A_F|^2| = {worst_diff:.2e}, "
                     f"worst |Im| = {worst_imag:.2e}, {elapsed:.1f}s")
    assert worst_diff < 1e-9
    assert worst_imag < 1e-9
    assert elapsed < 30.0


def test_criterion_2_constant_lambda_scaling_law(record_criterion):
    t0 = time.perf_counter()
    worst_rel = 0.0
    worst_deselect = 0.0
    for system, channel in _random_cases():
        base = transition_probability(system, LambdaProfile(), channel)
        for lam in (-1.0, -0.5, 0.25, 0.5, 1.0):
            res = transition_probability(system, LambdaProfile(base=lam), channel)
            target = (1.0 + lam) * base.pr_qm
            rel = abs(res.probability.real - target) / max(abs(target), 1e-12)
            worst_rel = max(worst_rel, rel)
            if lam == -1.0:
                worst_deselect = max(worst_deselect, abs(res.probability))
    elapsed = time.perf_counter() - t0
    ok = worst_rel < 1e-9 and worst_deselect < 1e-12 and elapsed < 60.0
    record_criterion(2, "probability scales as (1+lambda)", ok,
                     f"worst relative error = {worst_rel:.2e}, worst "
                     f"|Pr| at lambda=-1 = {worst_deselect:.2e}, {elapsed:.1f}s")
    assert worst_rel < 1e-9
    assert worst_deselect < 1e-12
    assert elapsed < 60.0


def test_criterion_3_oscillatory_closed_form_vs_quadrature(record_criterion):
    t0 = time.perf_counter()
    tight = QuadratureSettings(rel_tol=1e-12, abs_tol=1e-14)
    worst = 0.0  # excess over the allowed bound, as a fraction of it
    for omega in np.logspace(-6.0, 1.0, 20):
        system = build_system([0.0, omega],
                              ConstantPerturbation([[0.0, 0.1], [0.1, 0.0]]))
        for t_f in np.linspace(2.5, 50.0, 20):
            channel = TransitionChannel(0, 1, TimeWindow(0.0, float(t_f)))
            closed = pr_qm_oscillatory(system, channel)
            a = forward_amplitude(system, channel, tight)
            diff = abs(closed - (a * a.conjugate()).real)
            bound = max(1e-10 * closed, 1e-12)
            worst = max(worst, diff / bound)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 and elapsed < 30.0
    record_criterion(3, "oscillatory closed form matches quadrature", ok,
                     f"worst error = {worst:.2e} of the allowed bound "
                     f"over a 20x20 grid, {elapsed:.1f}s")
    assert worst <= 1.0
    assert elapsed < 30.0


def test_criterion_4_band_rate_reaches_the_modified_golden_rule(record_criterion):
    t0 = time.perf_counter()
    band = BandSpec(center_energy=0.0, width=2.0, count=2001, coupling=0.01)
    times = (20.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0)
    devs = {}
    rates = {}
    for lam in (0.0, 0.5):
        target = golden_rule_rate(0.01 ** 2, band.rho, lambda_f=lam)
        for t in times:
            r = finite_time_band_rate(band, LambdaProfile(base=lam), t, 0.0)
            rates[(lam, t)] = r.rate
            devs[(lam, t)] = (r.rate - target) / target
    ratio_err = max(abs(rates[(0.5, t)] / rates[(0.0, t)] - 1.5) for t in times)
    worst_t, worst_dev = max(devs.items(), key=lambda kv: abs(kv[1]))
    elapsed = time.perf_counter() - t0

    plateau_ok = all(abs(d) <= 0.02 for d in devs.values())
    ratio_ok = ratio_err < 1e-10
    ok = plateau_ok and ratio_ok and elapsed < 10.0
    record_criterion(4, "band rate within 2% of modified golden rule", ok,
                     f"worst deviation {worst_dev:+.2%} at lambda={worst_t[0]}, "
                     f"t={worst_t[1]:g}; lambda-ratio error {ratio_err:.2e}; "
                     f"{elapsed:.1f}s")
    assert ratio_ok
    assert elapsed < 10.0
    assert plateau_ok, (
        f"band-sum rate misses the golden-rule value by {worst_dev:+.2%} at "
        f"t={worst_t[1]:g}: the sinc-squared tail outside the band carries "
        f"~2/(pi t) of the weight, which stays above 2% until t ~ 33"
    )


def test_criterion_5_harmonic_branch_rates(record_criterion):
    t0 = time.perf_counter()
    band = BandSpec(center_energy=0.0, width=2.0, count=2001, coupling=0.01)
    worst_band = 0.0
    closed_exact = True
    for branch, e0 in (("absorption", -3.0), ("emission", 3.0)):
        for lam in (0.0, 0.5):
            res = harmonic_rate(band, branch, t=50.0, initial_energy=e0,
                                drive_frequency=3.0, lambda_f=lam)
            target = golden_rule_rate(0.01 ** 2, band.rho, lambda_f=lam)
            closed_exact = closed_exact and (res.closed_form == target)
            worst_band = max(worst_band,
                             abs(res.band_sum.rate - target) / target)
    elapsed = time.perf_counter() - t0
    ok = closed_exact and worst_band < 0.03 and elapsed < 10.0
    record_criterion(5, "harmonic emission/absorption rates", ok,
                     f"closed form exact: {closed_exact}; worst band-sum "
                     f"deviation {worst_band:.2%}; {elapsed:.1f}s")
    assert closed_exact
    assert worst_band < 0.03
    assert elapsed < 10.0


def test_criterion_6_first_order_residual_is_second_order(record_criterion):
    h = np.array([[0.3, 0.1 + 0.05j], [0.1 - 0.05j, -0.2]])
    system = build_system([0.0, 1.3], ConstantPerturbation(h))
    channel = TransitionChannel(0, 1, TimeWindow(0.0, 2.0))
    residuals = [first_order_residual(system.with_scaled_perturbation(eps), channel)
                 for eps in (0.1, 0.05, 0.025)]
    ratios = [residuals[k] / residuals[k + 1] for k in range(2)]
    ok = all(2.0 <= r <= 6.0 for r in ratios)
    record_criterion(6, "first-order residual scales as epsilon^2", ok,
                     "halving ratios " + ", ".join(f"{r:.2f}" for r in ratios)
                     + " (want 4 +/- 50%)")
    for r in ratios:
        assert 2.0 <= r <= 6.0


def test_criterion_7_pre_post_selected_statistics(record_criterion):
    rng = np.random.default_rng(99)
    worst_norm = 0.0
    worst_reduction = 0.0
    for _ in range(30):
        dim = int(rng.integers(2, 9))
        meas = random_measurement(rng, dim)
        tsv = TwoStateVector(random_state(rng, dim), random_state(rng, dim))
        probs = abl_probability(tsv, meas)
        worst_norm = max(worst_norm, abs(math.fsum(probs.values()) - 1.0))
        ok_red, dev = abl_reduces_to_born_check(random_state(rng, dim), meas)
        worst_reduction = max(worst_reduction, dev)
        if not ok_red:
            worst_reduction = max(worst_reduction, 1.0)
    z_basis = ProjectiveMeasurement.computational_basis(2)
    orthogonal_raised = False
    try:
        abl_probability(TwoStateVector(np.array([1.0, 0.0]),
                                       np.array([0.0, 1.0])), z_basis)
    except OrthogonalSelection:
        orthogonal_raised = True
    ok = (worst_norm < 1e-12 and worst_reduction < 1e-10 and orthogonal_raised)
    record_criterion(7, "ABL normalization and Born reduction", ok,
                     f"worst normalization error {worst_norm:.2e}, worst "
                     f"Born-reduction deviation {worst_reduction:.2e}, "
                     f"orthogonal selection raised: {orthogonal_raised}")
    assert worst_norm < 1e-12
    assert worst_reduction < 1e-10
    assert orthogonal_raised


def test_criterion_8_time_dependent_lambda_retro_term(record_criterion):
    system = build_system([0.0, 1.0],
                          ConstantPerturbation([[0.0, 0.1], [0.1, 0.0]]))
    channel = TransitionChannel(0, 1, TimeWindow(0.0, 2.0))
    profile = LambdaProfile(base=1.0,
                            time_profile=SinusoidTimeProfile(0.3, 5.0),
                            composition="multiply")  # lambda(t) = 0.3 sin 5t
    closed = pr_retro_constant_perturbation(system, profile, channel)
    res = transition_probability(system, profile, channel)
    diff = abs(closed - res.pr_retro)
    imag = abs(res.pr_retro.imag)
    unclamped = (res.probability == res.pr_qm + res.pr_retro
                 and not res.is_real)
    ok = diff <= 1e-8 and imag > 1e-6 and unclamped
    record_criterion(8, "time-dependent lambda retro term", ok,
                     f"closed vs quadrature diff {diff:.2e}, Im(pr_retro) = "
                     f"{res.pr_retro.imag:.2e} (reported, not clamped)")
    assert diff <= 1e-8
    assert imag > 1e-6
    assert unclamped


def test_criterion_9_cli_reruns_are_byte_identical(record_criterion, tmp_path):
    paths = {name: tmp_path / f"{name}.csv"
             for name in ("first", "second", "threaded")}
    assert main(["run", SWEEP_SCENARIO, "--out", str(paths["first"])]) == 0
    assert main(["run", SWEEP_SCENARIO, "--out", str(paths["second"])]) == 0
    assert main(["run", SWEEP_SCENARIO, "--out", str(paths["threaded"]),
                 "--threads", "4"]) == 0

    def body(p):
        return [ln for ln in p.read_text().splitlines()
                if not ln.startswith("#")]

    repeat_same = body(paths["first"]) == body(paths["second"])
    threads_same = body(paths["first"]) == body(paths["threaded"])
    ok = repeat_same and threads_same
    record_criterion(9, "CLI reruns byte-identical", ok,
                     f"repeat run identical: {repeat_same}, serial vs 4 "
                     f"threads identical: {threads_same}")
    assert repeat_same
    assert threads_same
