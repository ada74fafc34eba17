"""Dense states and operators for small registers of labeled qubits.

Conventions used throughout the package:

* |H> = (1, 0), |V> = (0, 1) in the computational basis (H maps to bit 0).
* Composite indices are big-endian in label order: the first label in
  ``labels`` is the most significant bit of the basis index.
* Everything is a dense complex ndarray. The intended scale is at most
  four qubits (16x16 matrices), so no sparsity or factorized storage.

Post-selected branches keep their matrix normalized to unit trace and
carry the accumulated branch probability in ``trace_weight`` instead of
silently renormalizing it away.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGENERACY_THRESHOLD = 1e-12

KET_H = np.array([1.0, 0.0], dtype=complex)
KET_V = np.array([0.0, 1.0], dtype=complex)
KET_D = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
KET_A = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class ImpossibleBranchError(ValueError):
    """Raised when a projection branch has probability below threshold."""


@dataclass
class PureState:
    """State vector over an ordered tuple of qubit labels."""

    amplitudes: np.ndarray
    labels: tuple[int, ...]

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        self.labels = tuple(self.labels)
        if self.amplitudes.size != 2 ** len(self.labels):
            raise ValueError("amplitude length does not match label count")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate qubit labels")

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        n = self.norm()
        if n < DEGENERACY_THRESHOLD:
            raise ValueError("cannot normalize a null vector")
        return PureState(self.amplitudes / n, self.labels)

    def to_density(self) -> "DensityState":
        v = self.normalized().amplitudes
        return DensityState(np.outer(v, v.conj()), self.labels)


@dataclass
class DensityState:
    """Density matrix over labeled qubits.

    ``matrix`` is kept normalized to unit trace; ``trace_weight`` carries
    the probability of having reached this branch of the computation.
    """

    matrix: np.ndarray
    labels: tuple[int, ...]
    trace_weight: float = 1.0

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        self.labels = tuple(self.labels)
        dim = 2 ** len(self.labels)
        if self.matrix.shape != (dim, dim):
            raise ValueError("matrix shape does not match label count")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate qubit labels")
        if self.trace_weight < 0:
            raise ValueError("trace_weight must be nonnegative")

    @property
    def n_qubits(self) -> int:
        return len(self.labels)


@dataclass
class LinearOp:
    """A matrix acting on a fixed number of qubits, tagged by role."""

    matrix: np.ndarray
    kind: str = "kraus"  # "unitary" | "kraus" | "projector"

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = self.matrix.shape[0]
        if self.matrix.ndim != 2 or self.matrix.shape[1] != n or n & (n - 1):
            raise ValueError("operator must be square with power-of-two size")
        if self.kind not in ("unitary", "kraus", "projector"):
            raise ValueError(f"unknown operator kind {self.kind!r}")

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.matrix.shape[0]))


@dataclass
class DensityCheck:
    """Report from validate_density."""

    hermiticity_defect: float
    min_eigenvalue: float
    trace_defect: float
    ok: bool


def basis_ket(bits, labels=None) -> PureState:
    """Computational basis state from a bit sequence, e.g. (0,1) -> |HV>."""
    bits = tuple(int(b) for b in bits)
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError("bits must be 0 (H) or 1 (V)")
        idx = (idx << 1) | b
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[idx] = 1.0
    if labels is None:
        labels = tuple(range(1, len(bits) + 1))
    return PureState(amps, labels)


def bell_state(name: str, labels) -> PureState:
    """Two-qubit Bell state: phi_plus/phi_minus are HH+-VV, psi_plus/psi_minus HV+-VH."""
    signs = {"phi_plus": 1, "phi_minus": -1, "psi_plus": 1, "psi_minus": -1}
    if name not in signs:
        raise ValueError(f"unknown Bell state {name!r}")
    amps = np.zeros(4, dtype=complex)
    if name.startswith("phi"):
        amps[0b00], amps[0b11] = 1.0, signs[name]
    else:
        amps[0b01], amps[0b10] = 1.0, signs[name]
    return PureState(amps / np.sqrt(2.0), tuple(labels))


def tensor(a, b):
    """Tensor product of two like operands.

    State labels concatenate (a's first) and must not collide; operators
    need no labels but must share the same kind tag.
    """
    if isinstance(a, LinearOp) and isinstance(b, LinearOp):
        if a.kind != b.kind:
            raise TypeError("cannot tensor operators of different kinds")
        return LinearOp(np.kron(a.matrix, b.matrix), a.kind)
    if set(a.labels) & set(b.labels):
        raise ValueError("tensor factors share qubit labels")
    labels = a.labels + b.labels
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), labels)
    if isinstance(a, DensityState) and isinstance(b, DensityState):
        return DensityState(np.kron(a.matrix, b.matrix), labels,
                            trace_weight=a.trace_weight * b.trace_weight)
    raise TypeError("tensor operands must share one kind")


def _axis_of(labels, label):
    try:
        return labels.index(label)
    except ValueError:
        raise KeyError(f"label {label!r} not present in {labels!r}") from None


def partial_trace(rho: DensityState, keep) -> DensityState:
    """Trace out all qubits except ``keep`` (kept in their original order)."""
    keep = tuple(keep)
    if not keep:
        raise ValueError("must keep at least one qubit")
    for lb in keep:
        _axis_of(rho.labels, lb)
    kept_labels = tuple(lb for lb in rho.labels if lb in keep)
    n = rho.n_qubits
    cur = rho.matrix.reshape([2] * (2 * n))
    present = list(rho.labels)
    for lb in [x for x in rho.labels if x not in keep][::-1]:
        idx = present.index(lb)
        half = len(present)
        cur = np.trace(cur, axis1=idx, axis2=idx + half)
        present.pop(idx)
    dim = 2 ** len(present)
    return DensityState(cur.reshape(dim, dim), kept_labels, trace_weight=rho.trace_weight)


def expand_operator(op, op_labels, system_labels) -> np.ndarray:
    """Embed ``op`` acting on ``op_labels`` into the full register.

    The returned matrix is ordered according to ``system_labels``.
    """
    op = op.matrix if isinstance(op, LinearOp) else np.asarray(op, dtype=complex)
    op_labels = tuple(op_labels)
    system_labels = tuple(system_labels)
    if op.shape != (2 ** len(op_labels), 2 ** len(op_labels)):
        raise ValueError("operator size does not match op_labels")
    rest = [lb for lb in system_labels if lb not in op_labels]
    if len(rest) + len(op_labels) != len(system_labels) or set(op_labels) - set(system_labels):
        raise ValueError("op_labels must be a subset of system_labels")
    n = len(system_labels)
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    # full is ordered op_labels + rest; permute qubit axes into system order
    order = list(op_labels) + rest
    perm = [order.index(lb) for lb in system_labels]
    t = full.reshape([2] * (2 * n))
    t = t.transpose(perm + [p + n for p in perm])
    return t.reshape(2 ** n, 2 ** n)


def expectation(rho: DensityState, op, on_labels) -> float:
    """Tr[op rho] with op embedded on ``on_labels``; real part."""
    full = expand_operator(op, on_labels, rho.labels)
    return float(np.trace(full @ rho.matrix).real)


def project(rho: DensityState, op, on_labels):
    """Probability and conditional state of a detection event on ``on_labels``.

    The measured qubits are destroyed (traced out) when ``on_labels`` is a
    strict subset of the register, matching photodetection; when the operator
    covers the whole register the projected state itself is returned.
    Returns (probability, DensityState); the conditional's trace_weight is
    the parent weight times the branch probability.
    """
    on_labels = tuple(on_labels)
    full = expand_operator(op, on_labels, rho.labels)
    prob = float(np.trace(full @ rho.matrix).real)
    if prob < DEGENERACY_THRESHOLD:
        raise ImpossibleBranchError(
            f"branch probability {prob:.3e} below {DEGENERACY_THRESHOLD:.0e}")
    weight = rho.trace_weight * prob
    if set(on_labels) == set(rho.labels):
        opm = op.matrix if isinstance(op, LinearOp) else np.asarray(op, dtype=complex)
        post = full @ rho.matrix @ full.conj().T / prob
        # valid for projectors; general POVM elements need their square root
        post = 0.5 * (post + post.conj().T)
        return prob, DensityState(post, rho.labels, trace_weight=weight)
    rest = tuple(lb for lb in rho.labels if lb not in on_labels)
    reduced = partial_trace(
        DensityState(full @ rho.matrix, rho.labels, trace_weight=1.0), rest)
    cond = reduced.matrix / prob
    cond = 0.5 * (cond + cond.conj().T)  # exact up to roundoff; resymmetrize
    return prob, DensityState(cond, rest, trace_weight=weight)


def validate_density(rho: DensityState,
                     hermiticity_tol: float = 1e-10,
                     eigenvalue_tol: float = -1e-9,
                     trace_tol: float = 1e-10) -> DensityCheck:
    """Check Hermiticity, positivity, and unit trace of the normalized matrix."""
    m = rho.matrix
    herm = float(np.max(np.abs(m - m.conj().T)))
    eigs = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    tr = float(abs(np.trace(m).real - 1.0) + abs(np.trace(m).imag))
    ok = herm <= hermiticity_tol and eigs.min() >= eigenvalue_tol and tr <= trace_tol
    return DensityCheck(hermiticity_defect=herm, min_eigenvalue=float(eigs.min()),
                        trace_defect=tr, ok=bool(ok))


def partial_transpose(rho: DensityState, label) -> np.ndarray:
    """Transpose of one qubit's indices; used for entanglement checks."""
    n = rho.n_qubits
    ax = _axis_of(rho.labels, label)
    t = rho.matrix.reshape([2] * (2 * n))
    t = np.swapaxes(t, ax, ax + n)
    return t.reshape(2 ** n, 2 ** n)
