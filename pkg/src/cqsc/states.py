"""Bell states and the family of eight orthonormal GHZ-like three-qubit states.

The GHZ-like state with index bits (x, y, z) is

    (phi_x |z>  +  (-1)^y  psi_x |1-z>) / sqrt(2)

where phi_x is phi+/phi- and psi_x is psi+/psi- as x is 0/1, the Bell pair
lives on the first two labels, and the single qubit on the third.  Index 0
is the workhorse: measuring its third qubit in Z leaves the first two in
phi+ (outcome 0) or psi+ (outcome 1), which is what the whole protocol
rides on.
"""
from __future__ import annotations

import numpy as np

from .sim import (
    SAME_STATE_FIDELITY,
    BellKind,
    Gate,
    LabelError,
    PureState,
    apply_gate,
    fidelity,
    single,
    tensor,
)

__all__ = [
    "BellKind",
    "bell",
    "ghz_like",
    "ghz_bits",
    "ghz_collapse_kind",
    "prepare_ghz_circuit",
    "classify_bell",
    "GHZ_LABELS",
]

_SQ2 = 1.0 / np.sqrt(2.0)

_BELL_AMPS = {
    BellKind.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) * _SQ2,
    BellKind.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) * _SQ2,
    BellKind.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) * _SQ2,
    BellKind.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) * _SQ2,
}

GHZ_LABELS = tuple(range(8))


def bell(kind: BellKind, labels=("a", "b")) -> PureState:
    """The Bell state of the given kind on two labels."""
    labels = tuple(labels)
    if len(set(labels)) != 2:
        raise LabelError(f"need two distinct labels, got {labels}")
    return PureState._wrap(labels, _BELL_AMPS[BellKind(kind)].copy())


def ghz_bits(index: int) -> tuple[int, int, int]:
    """Split a GHZ-like family index 0..7 into its (x, y, z) bits."""
    if not 0 <= index <= 7:
        raise ValueError(f"GHZ-like index must be 0..7, got {index}")
    return (index >> 2) & 1, (index >> 1) & 1, index & 1


def _ghz_amps(index: int) -> np.ndarray:
    x, y, z = ghz_bits(index)
    phi = _BELL_AMPS[BellKind.PHI_MINUS if x else BellKind.PHI_PLUS]
    psi = _BELL_AMPS[BellKind.PSI_MINUS if x else BellKind.PSI_PLUS]
    e = np.eye(2, dtype=complex)
    return (np.kron(phi, e[z]) + (-1) ** y * np.kron(psi, e[1 - z])) * _SQ2


_GHZ_AMPS = tuple(_ghz_amps(i) for i in range(8))


def ghz_like(index: int, labels=("a", "b", "c")) -> PureState:
    """GHZ-like state number ``index`` with the Bell pair on labels[0:2]."""
    ghz_bits(index)  # validates the index range
    labels = tuple(labels)
    if len(set(labels)) != 3:
        raise LabelError(f"need three distinct labels, got {labels}")
    return PureState._wrap(labels, _GHZ_AMPS[index].copy())


def ghz_collapse_kind(index: int, third_outcome: int) -> BellKind:
    """Bell kind left on the first two qubits after a Z result on the third."""
    x, y, z = ghz_bits(index)
    if third_outcome == z:
        return BellKind.PHI_MINUS if x else BellKind.PHI_PLUS
    return BellKind.PSI_MINUS if x else BellKind.PSI_PLUS


def prepare_ghz_circuit(labels=("a", "b", "c")) -> PureState:
    """Build GHZ-like state 0 from scratch: |+> and a Bell pair plus one CNOT.

    The first label starts in |+>, the remaining two in phi+, then a CNOT
    from the first onto the second entangles the three.
    """
    la, lb, lc = labels
    state = tensor(single(la, "+"), bell(BellKind.PHI_PLUS, (lb, lc)))
    return apply_gate(state, Gate("CNOT", lb, control=la))


def classify_bell(state: PureState) -> BellKind | None:
    """Which Bell state this two-qubit state is, or None if it is not one."""
    if state.n_qubits != 2:
        raise LabelError("classify_bell needs a 2-qubit state")
    for kind in BellKind:
        if fidelity(state, bell(kind, state.labels)) > SAME_STATE_FIDELITY:
            return kind
    return None
