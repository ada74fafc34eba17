"""Entanglement swapping between two polarization-entangled pairs.

Photons are labeled 1..4: pair (1,2) and pair (3,4) each start in
(|HH> + |VV>)/sqrt(2). The error channel acts on one photon of each pair
(photons 2 and 4). Photons 1 and 3 meet on a beam splitter whose
coincidence events implement a Bell-state measurement of limited
visibility v:

    Pi_v = v |psi-><psi-| + (1 - v)/2 * identity

so v = 1 is an ideal singlet projection and v = 0 registers coincidences
for completely non-interfering photons. A coincidence heralds the
conditional two-photon state on photons (2,4).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat
from .channels import QubitChannel, apply_channel
from .qmat import DensityState, ImpossibleBranchError

LABEL_PAIR_A = (1, 2)
LABEL_PAIR_B = (3, 4)
BSM_LABELS = (1, 3)
HERALDED_LABELS = (2, 4)

RATE_FLOOR = 1e-12


@dataclass
class BsmModel:
    """Bell-state measurement with two-photon interference visibility v."""

    visibility: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")

    @property
    def mode(self) -> str:
        if self.visibility == 1.0:
            return "ideal"
        if self.visibility == 0.0:
            return "non_interfering"
        return "partial"


@dataclass
class SwapOutcome:
    """Everything the heralded swap produces.

    singlet_rate  coincidence probability of the modeled BSM
    genuine_rate  the interfering (singlet-projector) part, v * overlap
    singlet_overlap  ideal-BSM coincidence probability Tr[psi- rho]
    channel_success  survival weight through the (possibly filtering) channels
    conditional   heralded state of photons (2,4), unit trace
    limit         True when the coincidence rate vanished and the
                  conditional is the analytic limit state instead
    """

    conditional: DensityState
    singlet_rate: float
    genuine_rate: float
    singlet_overlap: float
    channel_success: float
    marginal_2: np.ndarray
    marginal_4: np.ndarray
    post_channel: DensityState
    bsm: BsmModel
    limit: bool = False


def prepare_pairs() -> DensityState:
    """Two independent maximally entangled pairs on labels (1,2,3,4)."""
    a = qmat.bell_state("phi_plus", LABEL_PAIR_A)
    b = qmat.bell_state("phi_plus", LABEL_PAIR_B)
    return qmat.tensor(a, b).to_density()


def coincidence_operator(bsm: BsmModel) -> np.ndarray:
    """POVM element on photons (1,3) whose click heralds the swap."""
    singlet = qmat.bell_state("psi_minus", BSM_LABELS)
    proj = np.outer(singlet.amplitudes, singlet.amplitudes.conj())
    v = bsm.visibility
    return v * proj + (1.0 - v) / 2.0 * np.eye(4, dtype=complex)


def run_swap(channel: QubitChannel, bsm: BsmModel,
             channel_second: QubitChannel | None = None) -> SwapOutcome:
    """Propagate both pairs through the channel and herald on a coincidence.

    The same channel acts on photons 2 and 4 unless ``channel_second``
    overrides the second pair. When the coincidence rate vanishes exactly
    (full amplitude damping with an ideal BSM) the outcome carries the
    analytic limit: a pure singlet conditional at rate zero, flagged with
    ``limit=True``.
    """
    second = channel if channel_second is None else channel_second
    rho = prepare_pairs()
    rho = apply_channel(rho, channel, 2)
    rho = apply_channel(rho, second, 4)
    channel_success = rho.trace_weight

    marginal_2 = qmat.partial_trace(rho, (2,)).matrix
    marginal_4 = qmat.partial_trace(rho, (4,)).matrix

    singlet = qmat.bell_state("psi_minus", BSM_LABELS)
    singlet_proj = np.outer(singlet.amplitudes, singlet.amplitudes.conj())
    overlap = qmat.expectation(rho, singlet_proj, BSM_LABELS)
    overlap = max(overlap, 0.0)

    povm = coincidence_operator(bsm)
    try:
        rate, conditional = qmat.project(rho, povm, BSM_LABELS)
    except ImpossibleBranchError:
        # v = 1 and a fully transmitted-H state: no coincidences at all.
        # The heralded state converges to the singlet as the rate -> 0.
        limit_state = qmat.bell_state("psi_minus", HERALDED_LABELS).to_density()
        limit_state.trace_weight = 0.0
        return SwapOutcome(conditional=limit_state, singlet_rate=0.0,
                           genuine_rate=0.0, singlet_overlap=0.0,
                           channel_success=channel_success,
                           marginal_2=marginal_2, marginal_4=marginal_4,
                           post_channel=rho, bsm=bsm, limit=True)

    return SwapOutcome(conditional=conditional,
                       singlet_rate=float(rate),
                       genuine_rate=float(bsm.visibility * overlap),
                       singlet_overlap=float(overlap),
                       channel_success=channel_success,
                       marginal_2=marginal_2, marginal_4=marginal_4,
                       post_channel=rho, bsm=bsm, limit=False)


def fourfold_rate(outcome: SwapOutcome, ket_2: np.ndarray, ket_4: np.ndarray) -> float:
    """Coincidence probability of BSM click + local projections on (2,4).

    Equals v * overlap * <xy|cond_ideal|xy> plus the non-interfering
    background (1-v)/2 * m_x * m_y; computed here as one exact trace on
    the post-channel state.
    """
    rho = outcome.post_channel
    povm = coincidence_operator(outcome.bsm)
    proj2 = np.outer(ket_2, ket_2.conj())
    proj4 = np.outer(ket_4, ket_4.conj())
    full = (qmat.expand_operator(povm, BSM_LABELS, rho.labels)
            @ qmat.expand_operator(proj2, (2,), rho.labels)
            @ qmat.expand_operator(proj4, (4,), rho.labels))
    return float(np.trace(full @ rho.matrix).real)
