"""Single-qubit error channels in Kraus form.

Three one-parameter families model the disturbance acting on one photon
of each entangled pair:

* depolarizing: isotropic Pauli noise, trace preserving;
* phase damping: dephasing in the H/V basis, trace preserving;
* amplitude damping: modeled as the single non-trace-preserving filter
  diag(1, sqrt(1-d)) that attenuates the V component. Successful
  transmission is a post-selected branch, so applying it shrinks the
  state's trace_weight rather than adding a decay term toward |H>.

Trace-preserving channels made of unitaries with probabilities also have
a mixture form (see unitary_mixture_form), used to emulate how error
settings are mixed across measurement sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmat import (DensityState, PAULI_I, PAULI_X, PAULI_Y, PAULI_Z,
                   expand_operator)

KINDS = ("identity", "depolarizing", "phase_damping", "amplitude_damping")


@dataclass
class QubitChannel:
    """One-parameter single-qubit channel as a list of Kraus operators."""

    kind: str
    strength: float
    kraus: tuple
    trace_preserving: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError("channel strength must lie in [0, 1]")
        self.kraus = tuple(np.asarray(k, dtype=complex) for k in self.kraus)


@dataclass
class UnitaryMixture:
    """Probabilistic mixture of wave-plate operations equivalent to a channel.

    Elements are unitaries for the Pauli-type kinds; the filter kind is
    represented by its single non-unitary element with probability 1.
    """

    probabilities: np.ndarray
    unitaries: tuple

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        self.unitaries = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        if abs(self.probabilities.sum() - 1.0) > 1e-12 or (self.probabilities < 0).any():
            raise ValueError("mixture probabilities must be nonnegative and sum to 1")
        if len(self.unitaries) != self.probabilities.size:
            raise ValueError("probability/unitary count mismatch")


def make_identity() -> QubitChannel:
    return QubitChannel("identity", 0.0, (PAULI_I,))


def make_depolarizing(strength: float) -> QubitChannel:
    """With probability d the qubit is hit by a uniformly random Pauli."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError("channel strength must lie in [0, 1]")
    d = float(strength)
    kraus = (np.sqrt(1.0 - d) * PAULI_I,
             np.sqrt(d / 3.0) * PAULI_X,
             np.sqrt(d / 3.0) * PAULI_Y,
             np.sqrt(d / 3.0) * PAULI_Z)
    return QubitChannel("depolarizing", d, kraus)


def make_phase_damping(strength: float) -> QubitChannel:
    """With probability d/2 the qubit picks up a Z flip (H/V dephasing)."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError("channel strength must lie in [0, 1]")
    d = float(strength)
    kraus = (np.sqrt(1.0 - d / 2.0) * PAULI_I, np.sqrt(d / 2.0) * PAULI_Z)
    return QubitChannel("phase_damping", d, kraus)


def make_amplitude_damping(strength: float) -> QubitChannel:
    """Polarization-dependent loss: V amplitude attenuated by sqrt(1-d).

    A single filter element, deliberately not completed to a
    trace-preserving map: the lost events simply never produce a
    coincidence, which is what the post-selected experiment sees.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError("channel strength must lie in [0, 1]")
    d = float(strength)
    flt = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - d)]], dtype=complex)
    return QubitChannel("amplitude_damping", d, (flt,), trace_preserving=False)


def kraus_completeness_defect(channel: QubitChannel) -> float:
    """Max-norm deviation of sum_k E_k^dag E_k from the identity."""
    s = sum(k.conj().T @ k for k in channel.kraus)
    return float(np.max(np.abs(s - np.eye(2))))


def apply_channel(rho: DensityState, channel: QubitChannel, label) -> DensityState:
    """Apply the channel to one labeled qubit of a register.

    For a trace-decreasing channel the output matrix is renormalized and
    the discarded weight is folded into trace_weight.
    """
    out = np.zeros_like(rho.matrix)
    for k in channel.kraus:
        full = expand_operator(k, (label,), rho.labels)
        out += full @ rho.matrix @ full.conj().T
    t = float(np.trace(out).real)
    if t < 1e-14:
        raise ValueError("channel annihilated the state (zero success weight)")
    return DensityState(out / t, rho.labels, trace_weight=rho.trace_weight * t)


def unitary_mixture_form(channel: QubitChannel) -> UnitaryMixture:
    """Rewrite the channel as the random wave-plate settings that realize it.

    Pauli-type kinds become genuine mixtures of unitaries; the filter
    kind has no unitary decomposition and comes back as its single
    element applied with probability 1.
    """
    if channel.kind == "identity":
        return UnitaryMixture(np.array([1.0]), (PAULI_I,))
    if channel.kind == "depolarizing":
        d = channel.strength
        return UnitaryMixture(np.array([1.0 - d, d / 3.0, d / 3.0, d / 3.0]),
                              (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z))
    if channel.kind == "phase_damping":
        d = channel.strength
        return UnitaryMixture(np.array([1.0 - d / 2.0, d / 2.0]), (PAULI_I, PAULI_Z))
    return UnitaryMixture(np.array([1.0]), channel.kraus)


def superoperator(ops, weights=None) -> np.ndarray:
    """Row-major superoperator matrix: vec(E rho E^dag) summed over elements.

    With ``weights`` given, elements are unitaries applied with those
    probabilities; without, elements are Kraus operators.
    """
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if weights is None:
        weights = [1.0] * len(ops)
    dim = ops[0].shape[0]
    s = np.zeros((dim * dim, dim * dim), dtype=complex)
    for w, op in zip(weights, ops):
        s += w * np.kron(op, op.conj())
    return s


def channel_superoperator(channel: QubitChannel) -> np.ndarray:
    return superoperator(channel.kraus)
