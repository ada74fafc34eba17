"""Collective entanglement witness from coincidence probabilities.

The witness needs five numbers: the heralded projection probabilities
p_HH, p_HV, p_VV, p_++ of photons (2,4) and the unconditioned probability
p_H that photon 2 alone passes a horizontal polarizer. A negative value
certifies entanglement of the heralded pair; the most entangled reachable
value is -1/4 and separable-but-correlated outcomes push it positive.

Two normalizations of the projection probabilities are supported:

* "conditioned": divide fourfold rates by the coincidence rate of the
  modeled BSM, i.e. genuine conditional probabilities of the heralded
  state (they sum to 1 over a complete projector set);
* "genuine_rate_calibrated": divide by the coincidence rate an ideal BSM
  would produce. Background from non-interfering photons is then left
  in, which reproduces the uncompensated analysis of a lossy-visibility
  experiment: a pseudo-probability like p_HH rises from 0 toward 1/2 as
  visibility drops while p_HV stays pinned at 1/2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import qmat
from .swapnet import SwapOutcome

CONDITIONED = "conditioned"
CALIBRATED = "genuine_rate_calibrated"

CURVE_KINDS = ("depolarizing", "phase_damping", "amplitude_damping")


@dataclass
class ProbabilitySet:
    """The five inputs of the witness plus provenance."""

    p_hh: float
    p_hv: float
    p_vv: float
    p_pp: float
    p_h: float
    normalization: str = CONDITIONED
    source: str = "analytic"  # "analytic" | "sampled"
    flags: tuple = ()

    def __post_init__(self):
        if self.normalization not in (CONDITIONED, CALIBRATED):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    def as_tuple(self):
        return (self.p_hh, self.p_hv, self.p_vv, self.p_pp, self.p_h)


@dataclass
class WitnessResult:
    value: float
    uncertainty: float
    probabilities: ProbabilitySet
    method: str = "analytic"  # "analytic" | "bootstrap"


def probabilities(outcome: SwapOutcome, mode: str = CONDITIONED) -> ProbabilitySet:
    """Witness inputs computed exactly from a swap outcome.

    p_H always comes from the unconditional marginal of photon 2; the
    four projection probabilities follow the chosen normalization.
    """
    cond = outcome.conditional
    pairs = {"hh": (qmat.KET_H, qmat.KET_H), "hv": (qmat.KET_H, qmat.KET_V),
             "vv": (qmat.KET_V, qmat.KET_V), "pp": (qmat.KET_D, qmat.KET_D)}
    c = {}
    for key, (ka, kb) in pairs.items():
        proj = np.kron(np.outer(ka, ka.conj()), np.outer(kb, kb.conj()))
        c[key] = float(np.trace(proj @ cond.matrix).real)
    p_h = float(np.real(qmat.KET_H.conj() @ outcome.marginal_2 @ qmat.KET_H))

    if mode == CONDITIONED:
        scale = 1.0
    elif mode == CALIBRATED:
        if outcome.singlet_overlap <= qmat.DEGENERACY_THRESHOLD:
            raise ValueError("calibrated mode undefined at zero ideal coincidence rate")
        scale = outcome.singlet_rate / outcome.singlet_overlap
    else:
        raise ValueError(f"unknown normalization {mode!r}")

    flags = ("limit",) if outcome.limit else ()
    return ProbabilitySet(p_hh=c["hh"] * scale, p_hv=c["hv"] * scale,
                          p_vv=c["vv"] * scale, p_pp=c["pp"] * scale,
                          p_h=p_h, normalization=mode, source="analytic",
                          flags=flags)


def collectibility(probs: ProbabilitySet) -> WitnessResult:
    """Witness value from a probability set; negative certifies entanglement."""
    p_hh, p_hv, p_vv, p_pp, p_h = probs.as_tuple()
    cross = p_hh * p_vv
    if cross < 0.0:
        warnings.warn("negative p_HH*p_VV clamped to 0 under the square root",
                      stacklevel=2)
        cross = 0.0
    eta = 16.0 * p_h * (1.0 - p_h) * np.sqrt(cross) + 4.0 * p_pp
    value = 0.5 * (eta
                   + p_h ** 2 * (1.0 - 2.0 * p_hh)
                   + (1.0 - p_h) ** 2 * (1.0 - 2.0 * p_vv)
                   + 2.0 * p_h * (1.0 - p_h) * (1.0 - 2.0 * p_hv)
                   - 1.0)
    return WitnessResult(value=float(value), uncertainty=0.0,
                         probabilities=probs, method="analytic")


def collectibility_values(p_hh, p_hv, p_vv, p_pp, p_h):
    """Vectorized witness formula for arrays (bootstrap replicas)."""
    cross = np.clip(np.asarray(p_hh) * np.asarray(p_vv), 0.0, None)
    eta = 16.0 * p_h * (1.0 - p_h) * np.sqrt(cross) + 4.0 * np.asarray(p_pp)
    return 0.5 * (eta
                  + np.asarray(p_h) ** 2 * (1.0 - 2.0 * np.asarray(p_hh))
                  + (1.0 - np.asarray(p_h)) ** 2 * (1.0 - 2.0 * np.asarray(p_vv))
                  + 2.0 * np.asarray(p_h) * (1.0 - np.asarray(p_h))
                  * (1.0 - 2.0 * np.asarray(p_hv))
                  - 1.0)


def analytic_curve(channel_kind: str, strength_grid) -> np.ndarray:
    """Closed-form witness along a strength grid for one channel family.

    depolarizing       (13 q_e - q_c)/4,  q_e = 2d/3 - 4d^2/9,
                                          q_c = 1 - 2d + 4d^2/3
    phase_damping      d - d^2/2 - 1/4
    amplitude_damping  -(1 - d)/(2 - d)^2
    """
    d = np.asarray(strength_grid, dtype=float)
    if ((d < 0) | (d > 1)).any():
        raise ValueError("strengths must lie in [0, 1]")
    if channel_kind == "depolarizing":
        q_e = 2.0 * d / 3.0 - 4.0 * d ** 2 / 9.0
        q_c = 1.0 - 2.0 * d + 4.0 * d ** 2 / 3.0
        return (13.0 * q_e - q_c) / 4.0
    if channel_kind == "phase_damping":
        return d - d ** 2 / 2.0 - 0.25
    if channel_kind == "amplitude_damping":
        return -(1.0 - d) / (2.0 - d) ** 2
    raise ValueError(f"no analytic curve for channel kind {channel_kind!r}")
