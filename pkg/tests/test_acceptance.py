"""End-to-end acceptance checks, one numbered criterion per test.

Each test pins an advertised guarantee of the toolkit: exact endpoint
values of the witness curves, the five-probability signatures of the
disturbance families, the partial-interference operating point, the
closed-form/pipeline oracle, statistical consistency of the sampled
estimator at experiment scale, classifier round-trips, and the
substitute anchors used in place of hardware-specific witness values.

Two subcases are expected to fail and are left failing on purpose; the
assertion messages explain why the requirement cannot hold:
  - criterion 5's bootstrap width band at the amplitude d=1 boundary,
    where the heralded signal vanishes identically;
  - criterion 6's exact round-trip for depolarizing d > 0.75, where the
    strength is not identifiable from the five probabilities.
"""

import time

import numpy as np
import pytest

from swapdiag import channels, diagnose, sampler, swapnet, witness

EXACT_TOL = 1e-10
ORACLE_TOL = 1e-12
PROB_TOL = 0.02
WITNESS_TOL = 0.02
CROSS_TOL = 0.06
WIDTH_BAND = (0.02, 0.15)
DESIGN_RAW_RATE = 0.28
STRENGTH_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
ROUNDTRIP_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))
TRIALS = 100
RESAMPLES = 400
REFERENCE_UNCOMPENSATED = (0.29, 0.49, 0.27, 0.29, 0.5)

CHANNEL_MAKERS = {
    "depolarizing": channels.make_depolarizing,
    "phase_damping": channels.make_phase_damping,
    "amplitude_damping": channels.make_amplitude_damping,
}


def pipeline_probabilities(kind, strength, visibility=1.0, mode=witness.CONDITIONED):
    make = channels.make_identity if kind == "identity" else CHANNEL_MAKERS[kind]
    channel = make() if kind == "identity" else make(strength)
    outcome = swapnet.run_swap(channel, swapnet.BsmModel(visibility))
    return witness.probabilities(outcome, mode=mode)


def pipeline_witness(kind, strength, visibility=1.0, mode=witness.CONDITIONED):
    return witness.collectibility(pipeline_probabilities(kind, strength, visibility, mode)).value


@pytest.fixture(scope="module")
def convergence_sweep():
    # 3 channel kinds x 5 strengths x 100 seeded trials at experiment
    # scale (16 configs x 60 sequences x 100 shots, visibility 0.44,
    # fresh interference calibration per trial).
    start = time.perf_counter()
    table = {}
    for kind, make in CHANNEL_MAKERS.items():
        for d in STRENGTH_GRID:
            truth = float(witness.analytic_curve(kind, [d])[0])
            hits = 0
            widths = np.empty(TRIALS)
            for trial in range(TRIALS):
                data = sampler.simulate_experiment(
                    make(d), swapnet.BsmModel(0.44),
                    shots=100, sequences=60, seed=trial)
                cal = sampler.hom_calibrate(0.44, shots=100000, seed=trial)
                est = sampler.estimate_witness(data, cal, resamples=RESAMPLES, seed=trial)
                hits += abs(est.value - truth) <= 3.0 * est.uncertainty
                widths[trial] = est.uncertainty
            table[kind, d] = (hits, float(np.median(widths)))
    return table, time.perf_counter() - start


def test_criterion_1_analytic_endpoints():
    start = time.perf_counter()
    assert abs(pipeline_witness("identity", 0.0) - (-0.25)) <= EXACT_TOL
    endpoints = [("depolarizing", 0.0, -0.25),
                 ("depolarizing", 0.75, 0.75),
                 ("phase_damping", 1.0, 0.25),
                 ("amplitude_damping", 1.0, 0.0)]
    for kind, d, want in endpoints:
        got = float(witness.analytic_curve(kind, [d])[0])
        assert abs(got - want) <= EXACT_TOL, (kind, d)
    assert time.perf_counter() - start < 1.0


def test_criterion_2_signature_table():
    table = {("identity", 0.0): (0.0, 0.5, 0.0, 0.0, 0.5),
             ("depolarizing", 0.75): (0.25, 0.25, 0.25, 0.25, 0.5),
             ("phase_damping", 1.0): (0.0, 0.5, 0.0, 0.25, 0.5),
             ("amplitude_damping", 1.0): (0.0, 0.5, 0.0, 0.0, 1.0)}
    for (kind, d), want in table.items():
        got = pipeline_probabilities(kind, d).as_tuple()
        assert np.allclose(got, want, atol=EXACT_TOL, rtol=0.0), (kind, d, got)


def test_criterion_3_partial_interference_operating_point():
    # Visibility tuned so the raw rectilinear floor sits at 0.28.
    v = 1.0 - 2.0 * DESIGN_RAW_RATE
    pset = pipeline_probabilities("identity", 0.0, visibility=v, mode=witness.CALIBRATED)
    assert abs(pset.p_hh - DESIGN_RAW_RATE) <= EXACT_TOL
    model = pset.as_tuple()
    for got, want in zip(model[:4], (0.28, 0.50, 0.28, 0.28)):
        assert abs(got - want) <= PROB_TOL + 1e-12
    w_model = witness.collectibility(pset).value
    assert abs(w_model - 0.75) <= WITNESS_TOL + 1e-12

    # Agreement with the reference uncompensated measurement.
    for got, want in zip(model[:4], REFERENCE_UNCOMPENSATED[:4]):
        assert abs(got - want) <= PROB_TOL + 1e-12
    w_ref = float(witness.collectibility_values(*REFERENCE_UNCOMPENSATED))
    assert abs(w_ref - 0.75) <= CROSS_TOL

    # The cross-basis probability stays pinned at 1/2 for every visibility.
    for vv in np.linspace(0.0, 1.0, 101):
        ps = pipeline_probabilities("identity", 0.0, visibility=float(vv),
                                    mode=witness.CALIBRATED)
        assert abs(ps.p_hv - 0.5) <= EXACT_TOL, vv


def test_criterion_4_closed_form_matches_pipeline():
    start = time.perf_counter()
    grid = np.linspace(0.0, 1.0, 11)
    for kind in CHANNEL_MAKERS:
        curve = witness.analytic_curve(kind, grid)
        for d, want in zip(grid, curve):
            got = pipeline_witness(kind, float(d))
            assert abs(got - want) <= ORACLE_TOL, (kind, float(d))
    assert time.perf_counter() - start < 1.0


def test_criterion_5_three_sigma_coverage(convergence_sweep):
    table, elapsed = convergence_sweep
    assert elapsed < 120.0
    misses = {point: hits for point, (hits, _) in table.items() if hits < 99}
    assert not misses, f"fewer than 99/{TRIALS} trials within 3 sigma at {misses}"


def test_criterion_5_bootstrap_width_band(convergence_sweep):
    table, _ = convergence_sweep
    lo, hi = WIDTH_BAND
    outside = {point: med for point, (_, med) in table.items()
               if not lo <= med <= hi}
    assert not outside, (
        f"median bootstrap widths outside [{lo}, {hi}]: {outside}. "
        "At amplitude_damping d=1.0 the heralded coincidence rate is exactly "
        "zero, so the no-signal guard pins the estimate and nearly every "
        "bootstrap replica to W=0; the reported spread collapses below the "
        "band (without the guard the widths explode past the upper edge and "
        "three-sigma coverage is lost instead). The other fourteen points "
        "sit comfortably inside the band."
    )


def exact_signature(kind, d):
    if kind == "imperfect_bsm":
        outcome = swapnet.run_swap(channels.make_identity(), swapnet.BsmModel(d))
        return witness.probabilities(outcome, mode=witness.CALIBRATED)
    return pipeline_probabilities(kind, d)


@pytest.mark.parametrize("kind", ("depolarizing", "phase_damping",
                                  "amplitude_damping", "imperfect_bsm"))
def test_criterion_6_exact_roundtrip(kind):
    start = time.perf_counter()
    failures = []
    for d in ROUNDTRIP_GRID:
        diag = diagnose.classify(exact_signature(kind, d))
        if diag.kind != kind or not abs(diag.strength - d) < 1e-9:
            failures.append((d, diag.kind, round(diag.strength, 6)))
    assert not failures, (
        f"exact round-trip failed for {kind} at {failures}. For the "
        "depolarizing family the strengths d and 1.5-d produce identical "
        "Bell-diagonal weights and hence identical probabilities, so any "
        "estimator must pick one root; this one returns the smaller root "
        "and strengths above 0.75 are not recoverable."
    )
    assert time.perf_counter() - start < 15.0


@pytest.mark.parametrize("kind", ("depolarizing", "phase_damping",
                                  "amplitude_damping", "imperfect_bsm"))
def test_criterion_6_sampled_accuracy(kind):
    # 1e4 shots per configuration (1000 per sequence x 10 sequences),
    # strengths cycling over 0.2..0.9.
    start = time.perf_counter()
    cal = sampler.HomCalibration(1.0, (0, 0), 0, 0)
    grid = np.round(np.arange(0.2, 0.95, 0.1), 10)
    correct = 0
    for trial in range(200):
        d = float(grid[trial % grid.size])
        if kind == "imperfect_bsm":
            channel, bsm = channels.make_identity(), swapnet.BsmModel(d)
            mode = witness.CALIBRATED
        else:
            channel, bsm = CHANNEL_MAKERS[kind](d), swapnet.BsmModel(1.0)
            mode = witness.CONDITIONED
        data = sampler.simulate_experiment(channel, bsm, shots=1000,
                                           sequences=10, seed=trial)
        pset, sig = sampler.estimate_probabilities(data, cal, mode=mode,
                                                   resamples=200, seed=trial)
        correct += diagnose.classify(pset, sig).kind == kind
    assert correct >= 190, f"{kind}: {correct}/200 classified correctly"
    assert time.perf_counter() - start < 60.0


def test_criterion_7_substitute_anchors(convergence_sweep):
    # Hardware-measured witness values carry setup-specific error bars and
    # are not reproduced bit for bit; acceptance instead pins the
    # partial-interference probability match and the statistical
    # consistency of the emulated estimator.
    pset = pipeline_probabilities("identity", 0.0, visibility=0.44,
                                  mode=witness.CALIBRATED)
    assert abs(witness.collectibility(pset).value - 0.73) <= 1e-12
    w_ref = float(witness.collectibility_values(*REFERENCE_UNCOMPENSATED))
    assert abs(w_ref - 0.75) <= CROSS_TOL

    table, _ = convergence_sweep
    assert all(hits >= 99 for hits, _ in table.values())
