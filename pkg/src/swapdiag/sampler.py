"""Shot-noise emulation of the coincidence-counting experiment.

The measurement program mirrors the lab procedure: 16 analyzer
configurations (each photon of the heralded pair projected onto one of
H, V, D = +45deg, A = -45deg), each acquired as ``sequences`` repeated
sequences of ``shots`` heralding attempts. Counts per sequence are
binomial in the exact fourfold coincidence probability, which contains
the interfering (genuine swap) term plus the non-interfering background
of a visibility-v BSM. Drawing the channel's unitary-mixture element
independently per shot gives exactly this binomial, so the sequence
mixing is not simulated event by event.

The unconditioned p_H of the witness is not recoverable from heralded
fourfolds (heralding erases the marginal asymmetry), so an experiment
bundles a dedicated unconditioned polarizer measurement on photon 2
alongside the 16 coincidence records.

Estimators:

* subtract_noise removes the estimated non-interfering background
  (1-v)/2 * m_x * m_y per configuration, using the dip-calibrated
  visibility and marginals estimated from the data, then renormalizes by
  the recovered genuine rate. The background model is exact for the
  channel families modeled here (their marginals are diagonal in H/V).
* the calibrated mode divides raw fourfold fractions by the design
  coincidence rate 1/4 of an undisturbed ideal-BSM swap, leaving the
  background in.
* uncertainties come from a nonparametric bootstrap over sequences.

All randomness is derived from one integer seed through fixed
SeedSequence spawn keys, so identical inputs give identical records.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import witness as wit
from .channels import QubitChannel
from .qmat import KET_A, KET_D, KET_H, KET_V
from .swapnet import BsmModel, fourfold_rate, run_swap
from .witness import CALIBRATED, CONDITIONED, ProbabilitySet, WitnessResult

SETTINGS = ("H", "V", "D", "A")
SETTING_KETS = {"H": KET_H, "V": KET_V, "D": KET_D, "A": KET_A}
CONFIG_LABELS = tuple(x + y for x in SETTINGS for y in SETTINGS)
RECT_CONFIGS = (0, 1, 4, 5)              # HH HV VH VV
KEY_CONFIGS = {"hh": 0, "hv": 1, "vv": 5, "pp": 10}

DESIGN_SINGLET_RATE = 0.25               # undisturbed ideal-BSM coincidence rate
ZERO_SIGNAL_GUARD = 3.0                  # genuine rate below this many sigma -> no signal

_STREAM_MARGINAL = 16
_STREAM_HOM_DIP = 17
_STREAM_HOM_REF = 18
_STREAM_BOOTSTRAP = 19


def config_index(label: str) -> int:
    label = label.upper().replace("+", "D").replace("-", "A")
    if label not in CONFIG_LABELS:
        raise ValueError(f"unknown analyzer configuration {label!r}")
    return CONFIG_LABELS.index(label)


@dataclass
class CoincidenceRecord:
    """Per-configuration fourfold counts, one entry per sequence."""

    config_id: int
    sequence_counts: np.ndarray
    shots_per_sequence: int
    seed: int

    def __post_init__(self):
        self.sequence_counts = np.asarray(self.sequence_counts, dtype=np.int64)
        if not 0 <= self.config_id < 16:
            raise ValueError("config_id must lie in 0..15")
        if self.shots_per_sequence <= 0:
            raise ValueError("shots_per_sequence must be positive")
        bad = (self.sequence_counts < 0) | (self.sequence_counts > self.shots_per_sequence)
        if bad.any():
            raise ValueError("counts must lie in [0, shots_per_sequence]")

    @property
    def label(self) -> str:
        return CONFIG_LABELS[self.config_id]


@dataclass
class MarginalRecord:
    """Unconditioned polarizer counts on photon 2 (basis H)."""

    sequence_counts: np.ndarray
    shots_per_sequence: int
    seed: int
    basis: str = "H"

    def __post_init__(self):
        self.sequence_counts = np.asarray(self.sequence_counts, dtype=np.int64)
        if self.shots_per_sequence <= 0:
            raise ValueError("shots_per_sequence must be positive")


@dataclass
class ExperimentData:
    """One simulated run: 16 coincidence records plus the marginal record."""

    coincidences: list
    marginal: MarginalRecord
    seed: int

    def __post_init__(self):
        if len(self.coincidences) != 16:
            raise ValueError("expected one record per analyzer configuration")
        ids = sorted(r.config_id for r in self.coincidences)
        if ids != list(range(16)):
            raise ValueError("configuration ids must cover 0..15 exactly once")


@dataclass
class HomCalibration:
    """Visibility estimate from a two-photon interference dip."""

    visibility: float
    raw_dip_counts: tuple
    shots: int
    seed: int


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def exact_config_rates(channel: QubitChannel, bsm: BsmModel) -> np.ndarray:
    """Exact fourfold coincidence probability for each of the 16 configurations."""
    outcome = run_swap(channel, bsm)
    rates = np.empty(16)
    for i, x in enumerate(SETTINGS):
        for j, y in enumerate(SETTINGS):
            rates[4 * i + j] = fourfold_rate(outcome, SETTING_KETS[x], SETTING_KETS[y])
    return np.clip(rates, 0.0, 1.0)


def exact_marginal_ph(channel: QubitChannel) -> float:
    """Unconditioned probability that photon 2 passes a horizontal polarizer."""
    outcome = run_swap(channel, BsmModel(1.0))
    return float(np.real(KET_H.conj() @ outcome.marginal_2 @ KET_H))


def simulate_counts(channel: QubitChannel, bsm: BsmModel, shots: int = 100,
                    sequences: int = 60, seed: int = 0) -> list:
    """Binomial fourfold counts for all 16 configurations; deterministic in seed."""
    if shots <= 0 or sequences <= 0:
        raise ValueError("shots and sequences must be positive")
    rates = exact_config_rates(channel, bsm)
    records = []
    for cfg in range(16):
        rng = _rng(seed, cfg)
        counts = rng.binomial(shots, rates[cfg], size=sequences)
        records.append(CoincidenceRecord(config_id=cfg, sequence_counts=counts,
                                         shots_per_sequence=shots, seed=seed))
    return records


def simulate_marginal(channel: QubitChannel, shots: int = 100,
                      sequences: int = 60, seed: int = 0) -> MarginalRecord:
    """Unconditioned photon-2 polarizer counts; deterministic in seed."""
    if shots <= 0 or sequences <= 0:
        raise ValueError("shots and sequences must be positive")
    p_h = exact_marginal_ph(channel)
    rng = _rng(seed, _STREAM_MARGINAL)
    counts = rng.binomial(shots, p_h, size=sequences)
    return MarginalRecord(sequence_counts=counts, shots_per_sequence=shots, seed=seed)


def simulate_experiment(channel: QubitChannel, bsm: BsmModel, shots: int = 100,
                        sequences: int = 60, seed: int = 0,
                        marginal_shots: int | None = None) -> ExperimentData:
    """Coincidence records plus the marginal record, from one master seed."""
    records = simulate_counts(channel, bsm, shots=shots, sequences=sequences, seed=seed)
    marginal = simulate_marginal(channel, shots=marginal_shots or shots,
                                 sequences=sequences, seed=seed)
    return ExperimentData(coincidences=records, marginal=marginal, seed=seed)


def hom_calibrate(overlap: float, shots: int = 100000, seed: int = 0) -> HomCalibration:
    """Visibility from a simulated interference dip.

    A fraction ``overlap`` of identically polarized photon pairs
    interferes (never produces a coincidence); the rest give coincidences
    half the time, as does the reference measurement outside the dip.
    The estimate 1 - dip/reference converges to ``overlap``.
    """
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    if shots <= 0:
        raise ValueError("shots must be positive")
    dip = int(_rng(seed, _STREAM_HOM_DIP).binomial(shots, (1.0 - overlap) / 2.0))
    ref = int(_rng(seed, _STREAM_HOM_REF).binomial(shots, 0.5))
    if ref == 0:
        raise ValueError("reference measurement recorded no coincidences")
    v = float(np.clip(1.0 - dip / ref, 0.0, 1.0))
    return HomCalibration(visibility=v, raw_dip_counts=(dip, ref), shots=shots, seed=seed)


def _background_matrix(p_h, visibility):
    """Background rate per configuration for marginal p_H (and 1/2 diagonally)."""
    p_h = np.asarray(p_h, dtype=float)
    half = np.full_like(p_h, 0.5)
    m = np.stack([p_h, 1.0 - p_h, half, half])          # per-photon marginals
    mm = m[:, None, ...] * m[None, :, ...]              # (4, 4, ...)
    return (1.0 - visibility) / 2.0 * mm.reshape((16,) + p_h.shape)


def _conditioned_probs(raw, p_h, visibility, n_per_config):
    """Background-subtracted conditional probabilities.

    ``raw`` has shape (16, ...) of fourfold count fractions, ``p_h``
    broadcasts against the trailing dimensions. Returns clamped
    probabilities (16, ...), the recovered genuine rate, and flags.
    """
    raw = np.asarray(raw, dtype=float)
    bg = _background_matrix(p_h, visibility)
    num = raw - bg
    genuine = num[list(RECT_CONFIGS)].sum(axis=0) / visibility
    sigma_g = np.sqrt((raw[list(RECT_CONFIGS)]
                       * (1.0 - raw[list(RECT_CONFIGS)])).sum(axis=0)
                      / n_per_config) / visibility
    no_signal = genuine <= ZERO_SIGNAL_GUARD * sigma_g
    denom = np.where(no_signal, 1.0, visibility * genuine)
    probs = np.clip(num / denom, 0.0, 1.0)
    probs = np.where(no_signal, 0.0, probs)
    over = (num < -3.0 * np.sqrt(bg * (1.0 - bg) / n_per_config) - 1e-12).any(axis=0)
    return probs, genuine, no_signal, over


def _stack_counts(data: ExperimentData):
    recs = sorted(data.coincidences, key=lambda r: r.config_id)
    shots = {r.shots_per_sequence for r in recs}
    seqs = {r.sequence_counts.size for r in recs}
    if len(shots) != 1 or len(seqs) != 1:
        raise ValueError("records disagree on shots or sequence count")
    return np.stack([r.sequence_counts for r in recs]), shots.pop(), seqs.pop()


def subtract_noise(data: ExperimentData, cal: HomCalibration) -> ProbabilitySet:
    """Background-corrected conditional probabilities from raw records.

    Uses the calibrated visibility for the background level, the marginal
    record for p_H (photon 4 is assumed to share photon 2's marginal, and
    diagonal-basis marginals are taken as 1/2; both are exact for the
    modeled channel families). Corrected values are clamped to [0, 1];
    over-subtraction beyond counting noise is flagged, and a genuine rate
    indistinguishable from zero yields all-zero probabilities with a
    "zero_signal" flag.
    """
    if cal.visibility <= 0.0:
        raise ValueError("calibration visibility must be positive")
    counts, shots, seqs = _stack_counts(data)
    raw = counts.mean(axis=1) / shots
    p_h = float(data.marginal.sequence_counts.mean() / data.marginal.shots_per_sequence)
    probs, genuine, no_signal, over = _conditioned_probs(
        raw, p_h, cal.visibility, seqs * shots)
    flags = []
    if bool(no_signal):
        flags.append("zero_signal")
    if bool(over):
        flags.append("over_subtraction")
    k = KEY_CONFIGS
    return ProbabilitySet(p_hh=float(probs[k["hh"]]), p_hv=float(probs[k["hv"]]),
                          p_vv=float(probs[k["vv"]]), p_pp=float(probs[k["pp"]]),
                          p_h=p_h, normalization=CONDITIONED, source="sampled",
                          flags=tuple(flags))


def calibrated_probabilities(data: ExperimentData) -> ProbabilitySet:
    """Raw fourfold fractions over the design rate 1/4; background left in."""
    counts, shots, _ = _stack_counts(data)
    raw = counts.mean(axis=1) / shots
    p = raw / DESIGN_SINGLET_RATE
    p_h = float(data.marginal.sequence_counts.mean() / data.marginal.shots_per_sequence)
    k = KEY_CONFIGS
    return ProbabilitySet(p_hh=float(p[k["hh"]]), p_hv=float(p[k["hv"]]),
                          p_vv=float(p[k["vv"]]), p_pp=float(p[k["pp"]]),
                          p_h=p_h, normalization=CALIBRATED, source="sampled")


def _bootstrap_replicas(data: ExperimentData, cal: HomCalibration, mode: str,
                        resamples: int, seed: int):
    """Resample sequences with replacement; probabilities per replica."""
    counts, shots, seqs = _stack_counts(data)
    rng = _rng(seed, _STREAM_BOOTSTRAP)
    raws = np.empty((16, resamples))
    for cfg in range(16):
        idx = rng.integers(0, seqs, size=(resamples, seqs))
        raws[cfg] = counts[cfg][idx].mean(axis=1) / shots
    mcounts = data.marginal.sequence_counts
    midx = rng.integers(0, mcounts.size, size=(resamples, mcounts.size))
    p_h = mcounts[midx].mean(axis=1) / data.marginal.shots_per_sequence
    if mode == CONDITIONED:
        probs, _, _, _ = _conditioned_probs(raws, p_h, cal.visibility, seqs * shots)
    else:
        probs = raws / DESIGN_SINGLET_RATE
    k = KEY_CONFIGS
    return probs[k["hh"]], probs[k["hv"]], probs[k["vv"]], probs[k["pp"]], p_h


def estimate_witness(data: ExperimentData, cal: HomCalibration,
                     mode: str = CONDITIONED, resamples: int = 1000,
                     seed: int | None = None) -> WitnessResult:
    """Witness point estimate with a bootstrap-over-sequences uncertainty."""
    pset, sigmas = estimate_probabilities(data, cal, mode=mode,
                                          resamples=resamples, seed=seed)
    value = wit.collectibility_values(*pset.as_tuple())
    return WitnessResult(value=float(value), uncertainty=sigmas["witness"],
                         probabilities=pset, method="bootstrap")


def estimate_probabilities(data: ExperimentData, cal: HomCalibration,
                           mode: str = CONDITIONED, resamples: int = 1000,
                           seed: int | None = None):
    """Point probabilities plus bootstrap standard deviations.

    Returns (ProbabilitySet, sigmas) where sigmas maps p_hh/p_hv/p_vv/
    p_pp/p_h and "witness" to bootstrap standard deviations.
    """
    if mode not in (CONDITIONED, CALIBRATED):
        raise ValueError(f"unknown normalization {mode!r}")
    if resamples < 2:
        raise ValueError("need at least two bootstrap resamples")
    pset = (subtract_noise(data, cal) if mode == CONDITIONED
            else calibrated_probabilities(data))
    reps = _bootstrap_replicas(data, cal, mode, resamples,
                               data.seed if seed is None else seed)
    w = wit.collectibility_values(*reps)
    names = ("p_hh", "p_hv", "p_vv", "p_pp", "p_h")
    sigmas = {n: float(np.std(r, ddof=1)) for n, r in zip(names, reps)}
    sigmas["witness"] = float(np.std(w, ddof=1))
    return pset, sigmas


def to_jsonl_rows(data: ExperimentData) -> list:
    """Serializable rows: one per (config_id, sequence) plus marginal rows."""
    rows = []
    for rec in sorted(data.coincidences, key=lambda r: r.config_id):
        for seq, count in enumerate(rec.sequence_counts):
            rows.append({"config_id": rec.config_id, "seq": seq,
                         "count": int(count), "shots": rec.shots_per_sequence,
                         "seed": rec.seed})
    m = data.marginal
    for seq, count in enumerate(m.sequence_counts):
        rows.append({"marginal_basis": m.basis, "seq": seq, "count": int(count),
                     "shots": m.shots_per_sequence, "seed": m.seed})
    return rows


def from_jsonl_rows(rows) -> ExperimentData:
    """Rebuild ExperimentData from parsed JSONL rows."""
    by_cfg, marg = {}, []
    shots_c, shots_m, seed = {}, None, None
    for row in rows:
        if "config_id" in row:
            by_cfg.setdefault(int(row["config_id"]), []).append(row)
            shots_c[int(row["config_id"])] = int(row["shots"])
        elif "marginal_basis" in row:
            marg.append(row)
            shots_m = int(row["shots"])
        else:
            raise ValueError("row is neither a coincidence nor a marginal record")
        seed = int(row["seed"])
    if not marg:
        raise ValueError("records contain no marginal measurement")
    records = []
    for cfg, cfg_rows in sorted(by_cfg.items()):
        cfg_rows.sort(key=lambda r: int(r["seq"]))
        counts = np.array([int(r["count"]) for r in cfg_rows], dtype=np.int64)
        records.append(CoincidenceRecord(config_id=cfg, sequence_counts=counts,
                                         shots_per_sequence=shots_c[cfg], seed=seed))
    marg.sort(key=lambda r: int(r["seq"]))
    mcounts = np.array([int(r["count"]) for r in marg], dtype=np.int64)
    marginal = MarginalRecord(sequence_counts=mcounts, shots_per_sequence=shots_m,
                              seed=seed, basis=str(marg[0]["marginal_basis"]))
    return ExperimentData(coincidences=records, marginal=marginal, seed=seed)
