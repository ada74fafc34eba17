"""Classify the disturbance acting on a swap from its probability signature.

Each modeled imperfection leaves a distinct fingerprint in the five
witness inputs (p_HH, p_HV, p_VV, p_++, p_H):

* perfect            (0, 1/2, 0, 0) with p_H = 1/2
* depolarizing       p_HH = p_VV = p_++ = q_e rise together while
                     p_HV = 1/2 - q_e dips below 1/2
* phase damping      only p_++ rises, up to 1/4
* amplitude damping  projections stay perfect but p_H grows toward 1
* imperfect BSM      (calibrated normalization only) p_HH = p_VV = p_++
                     rise with p_HV pinned at exactly 1/2

Classification minimizes a chi-square against each one-parameter family,
with the parameter fitted in closed form (all families are linear in a
monotone function of their parameter). In the conditioned normalization
an imperfect BSM is algebraically indistinguishable from depolarizing
(both give p_HH = p_++ = 1/2 - p_HV), so that hypothesis only competes
for calibrated-mode inputs.

The depolarizing strength is reported as the smaller root of
q_e(d) = 2d/3 - 4d^2/9: the swapped signature is symmetric about
d = 3/4 (strengths d and 3/2 - d produce identical data), so only
d <= 3/4 is identifiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .witness import CALIBRATED, CONDITIONED, ProbabilitySet

SIGMA_FLOOR = 0.005
REJECTION_THRESHOLD = 50.0   # min chi-square above this -> unmodeled
TIE_MARGIN = 1.0             # chi-square ties within this go to fewer parameters

PROB_NAMES = ("p_hh", "p_hv", "p_vv", "p_pp", "p_h")


@dataclass
class ChannelDiagnosis:
    kind: str
    strength: float
    confidence: float
    residuals: dict


def _invert_depolarizing(q_e: float) -> float:
    # q_e = 2d/3 - 4d^2/9, smaller root; q_e maxes out at 1/4 (d = 3/4)
    q_e = min(max(q_e, 0.0), 0.25)
    return 0.75 * (1.0 - math.sqrt(1.0 - 4.0 * q_e))


def _invert_phase(p_pp: float) -> float:
    # p_++ = (d/2)(1 - d/2), root in [0, 1]; maxes out at 1/4 (d = 1)
    p_pp = min(max(p_pp, 0.0), 0.25)
    return 1.0 - math.sqrt(1.0 - 4.0 * p_pp)


def _invert_amplitude(p_h: float) -> float:
    # p_H = 1/(2 - d)
    p_h = min(max(p_h, 0.5), 1.0)
    return 2.0 - 1.0 / p_h


class _Family:
    def __init__(self, kind, n_params, model, fit, modes):
        self.kind = kind
        self.n_params = n_params
        self.model = model      # strength -> 5 model probabilities
        self.fit = fit          # (p, weights) -> strength
        self.modes = modes


def _fit_linear(values, weights, slopes, offsets):
    # weighted least squares for p_i = slope_i * t + offset_i
    num = float(np.sum(weights * slopes * (values - offsets)))
    den = float(np.sum(weights * slopes * slopes))
    return num / den if den > 0 else 0.0


def _depolarizing_fit(p, w):
    slopes = np.array([1.0, -1.0, 1.0, 1.0, 0.0])
    offsets = np.array([0.0, 0.5, 0.0, 0.0, 0.5])
    return _invert_depolarizing(_fit_linear(p, w, slopes, offsets))


def _phase_fit(p, w):
    return _invert_phase(p[3])


def _amplitude_fit(p, w):
    return _invert_amplitude(p[4])


def _bsm_fit(p, w):
    slopes = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
    offsets = np.array([0.0, 0.5, 0.0, 0.0, 0.5])
    b = min(max(_fit_linear(p, w, slopes, offsets), 0.0), 0.5)
    return 1.0 - 2.0 * b


def _perfect_model(_):
    return np.array([0.0, 0.5, 0.0, 0.0, 0.5])


def _depolarizing_model(d):
    q_e = 2.0 * d / 3.0 - 4.0 * d ** 2 / 9.0
    return np.array([q_e, 0.5 - q_e, q_e, q_e, 0.5])


def _phase_model(d):
    return np.array([0.0, 0.5, 0.0, (d / 2.0) * (1.0 - d / 2.0), 0.5])


def _amplitude_model(d):
    return np.array([0.0, 0.5, 0.0, 0.0, 1.0 / (2.0 - d)])


def _bsm_model(v):
    b = (1.0 - v) / 2.0
    return np.array([b, 0.5, b, b, 0.5])


FAMILIES = (
    _Family("perfect", 0, _perfect_model, lambda p, w: 0.0,
            (CONDITIONED, CALIBRATED)),
    _Family("depolarizing", 1, _depolarizing_model, _depolarizing_fit,
            (CONDITIONED, CALIBRATED)),
    _Family("phase_damping", 1, _phase_model, _phase_fit,
            (CONDITIONED, CALIBRATED)),
    _Family("amplitude_damping", 1, _amplitude_model, _amplitude_fit,
            (CONDITIONED, CALIBRATED)),
    _Family("imperfect_bsm", 1, _bsm_model, _bsm_fit, (CALIBRATED,)),
)


def _as_sigma_array(sigma):
    if sigma is None:
        return np.zeros(5)
    if isinstance(sigma, dict):
        return np.array([float(sigma.get(n, 0.0)) for n in PROB_NAMES])
    arr = np.asarray(sigma, dtype=float).ravel()
    if arr.size != 5:
        raise ValueError("sigma must provide one uncertainty per probability")
    return arr


def classify(p: ProbabilitySet, sigma=None,
             rejection_threshold: float = REJECTION_THRESHOLD,
             tie_margin: float = TIE_MARGIN) -> ChannelDiagnosis:
    """Best-fitting disturbance family for a probability set.

    ``sigma`` gives per-probability uncertainties (dict keyed like
    p_hh/p_hv/p_vv/p_pp/p_h, a 5-sequence, or None for exact inputs);
    every sigma is floored at 0.005 in the chi-square. Ties within
    ``tie_margin`` go to the family with fewer parameters; if no family
    gets below ``rejection_threshold`` the kind is "unmodeled".
    Confidence shrinks to zero as the top-two chi-square gap closes.
    """
    values = np.array(p.as_tuple(), dtype=float)
    sig = np.maximum(_as_sigma_array(sigma), SIGMA_FLOOR)
    weights = 1.0 / sig ** 2

    results = {}
    for fam in FAMILIES:
        if p.normalization not in fam.modes:
            continue
        strength = fam.fit(values, weights)
        resid = float(np.sum(weights * (values - fam.model(strength)) ** 2))
        results[fam.kind] = (resid, strength, fam.n_params)

    ranked = sorted(results.items(), key=lambda kv: kv[1][0])
    best_kind, (best_resid, best_strength, _) = ranked[0]
    # prefer the simplest family among near-ties
    contenders = [(kind, r) for kind, r in ranked if r[0] <= best_resid + tie_margin]
    contenders.sort(key=lambda kv: (kv[1][2], kv[1][0]))
    best_kind, (best_resid, best_strength, _) = contenders[0]

    others = [r[0] for kind, r in ranked if kind != best_kind]
    gap = (min(others) - best_resid) if others else float("inf")
    confidence = float(1.0 - math.exp(-max(gap, 0.0) / 2.0))

    residuals = {kind: float(r[0]) for kind, r in results.items()}
    if best_resid > rejection_threshold:
        return ChannelDiagnosis(kind="unmodeled", strength=float("nan"),
                                confidence=0.0, residuals=residuals)
    return ChannelDiagnosis(kind=best_kind, strength=float(best_strength),
                            confidence=confidence, residuals=residuals)


def estimate_parameter(kind: str, p: ProbabilitySet, tolerance: float = 1e-9) -> float:
    """Single-component parameter inversion for a known disturbance kind.

    Raises ValueError when the identifying probability falls outside the
    family's invertible range by more than ``tolerance``.
    """
    def check(value, low, high):
        if value < low - tolerance or value > high + tolerance:
            raise ValueError(
                f"probability {value!r} outside invertible range [{low}, {high}]")
        return min(max(value, low), high)

    if kind == "depolarizing":
        return _invert_depolarizing(check(p.p_hh, 0.0, 0.25))
    if kind == "phase_damping":
        return _invert_phase(check(p.p_pp, 0.0, 0.25))
    if kind == "amplitude_damping":
        return _invert_amplitude(check(p.p_h, 0.5, 1.0))
    if kind == "imperfect_bsm":
        return 1.0 - 2.0 * check(p.p_hh, 0.0, 0.5)
    if kind == "perfect":
        return 0.0
    raise ValueError(f"unknown disturbance kind {kind!r}")
