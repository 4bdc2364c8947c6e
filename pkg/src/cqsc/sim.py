"""Pure-state simulator over registers of named qubits.

A state is a dense complex amplitude vector together with an ordered tuple
of qubit labels.  The first label owns the most significant index bit, so a
register labelled ``("a", "b", "c")`` reads its basis kets as ``|abc>``.

States are immutable: every gate or measurement returns a new ``PureState``
(measurements also return the outcome, and drop the measured qubits from
the register).  A simulation trial owns its states and its RNG stream, so
independent trials can run in parallel without any shared mutable state.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

# Amplitude comparisons after normalization; two states are "the same" when
# their fidelity clears SAME_STATE_FIDELITY (global phase is never compared).
NORM_ATOL = 1e-12
AMP_ATOL = 1e-9
SAME_STATE_FIDELITY = 1.0 - 1e-9


class LabelError(ValueError):
    """A qubit label is missing, duplicated, or otherwise unusable."""


class ProjectionError(ValueError):
    """A forced measurement outcome has (numerically) zero probability."""


_SQ2 = 1.0 / np.sqrt(2.0)

# iY is fixed as Z @ X = [[0, 1], [-1, 0]]; with the two-bit operation codes
# used throughout, applying a Pauli with code p to either qubit of a Bell
# state with code c yields the Bell state with code c XOR p.
GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "iY": np.array([[0, 1], [-1, 0]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
}

SINGLE_QUBIT_KINDS = frozenset(GATES)
GATE_KINDS = SINGLE_QUBIT_KINDS | {"CNOT"}


class BellKind(IntEnum):
    """The four Bell states and their two-bit codes (phase bit, parity bit)."""

    PHI_PLUS = 0b00
    PSI_PLUS = 0b01
    PHI_MINUS = 0b10
    PSI_MINUS = 0b11

    @property
    def code(self) -> str:
        return format(int(self), "02b")

    @property
    def symbol(self) -> str:
        return ("phi+", "psi+", "phi-", "psi-")[int(self)]


@dataclass(frozen=True)
class Gate:
    """A named unitary bound to its target label(s).

    ``kind`` is one of I, X, Z, iY, H (single target) or CNOT (control and
    target labels).
    """

    kind: str
    target: str
    control: str | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if (self.kind == "CNOT") != (self.control is not None):
            raise ValueError("CNOT needs a control label; single-qubit gates must not have one")
        if self.control == self.target:
            raise LabelError("control and target must differ")


@dataclass(frozen=True)
class MeasureBasis:
    """Measurement basis: Z or X on one label, or Bell on a pair of labels."""

    kind: str
    targets: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in ("Z", "X", "BELL"):
            raise ValueError(f"unknown measurement basis {self.kind!r}")
        want = 2 if self.kind == "BELL" else 1
        if len(self.targets) != want:
            raise LabelError(f"{self.kind} basis takes {want} target(s)")
        if len(set(self.targets)) != len(self.targets):
            raise LabelError("measurement targets must be distinct")


class PureState:
    """Normalized amplitude vector over an ordered tuple of labelled qubits."""

    __slots__ = ("labels", "amps")

    def __init__(self, labels, amps):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate labels in {labels}")
        amps = np.asarray(amps, dtype=complex).reshape(-1).copy()
        if amps.size != 2 ** len(labels):
            raise ValueError(f"{len(labels)} qubits need {2 ** len(labels)} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"state is not normalized (norm={norm})")
        amps /= norm
        amps.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amps", amps)

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    @classmethod
    def _wrap(cls, labels: tuple, amps: np.ndarray) -> "PureState":
        # internal fast path: callers guarantee unique labels, matching
        # length, and unit norm (unitary evolution or explicit renormalize)
        self = object.__new__(cls)
        amps.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amps", amps)
        return self

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"label {label!r} not in register {self.labels}") from None

    def probabilities(self) -> np.ndarray:
        """Born probabilities of the computational basis states."""
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __repr__(self):
        return f"PureState(labels={self.labels}, dim={self.amps.size})"


def basis_state(labels, bits) -> PureState:
    """Computational basis ket |bits> on the given labels."""
    labels = tuple(labels)
    bits = tuple(int(b) for b in bits)
    if len(bits) != len(labels):
        raise ValueError("one bit per label required")
    idx = 0
    for b in bits:
        idx = (idx << 1) | (b & 1)
    amps = np.zeros(2 ** len(labels), dtype=complex)
    amps[idx] = 1.0
    return PureState(labels, amps)


_SINGLE_VECS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([_SQ2, _SQ2], dtype=complex),
    "-": np.array([_SQ2, -_SQ2], dtype=complex),
}


def single(label: str, symbol: str) -> PureState:
    """One qubit in |0>, |1>, |+>, or |-> selected by symbol."""
    if symbol not in _SINGLE_VECS:
        raise ValueError(f"unknown single-qubit symbol {symbol!r}")
    return PureState._wrap((label,), _SINGLE_VECS[symbol].copy())


def tensor(a: PureState, b: PureState) -> PureState:
    """Kronecker product; a's labels stay most significant."""
    overlap = set(a.labels) & set(b.labels)
    if overlap:
        raise LabelError(f"labels {sorted(overlap)} appear in both factors")
    return PureState._wrap(a.labels + b.labels, np.kron(a.amps, b.amps))


def relabel(state: PureState, mapping: dict[str, str]) -> PureState:
    """Rename qubit labels; amplitudes are untouched."""
    new = tuple(mapping.get(l, l) for l in state.labels)
    return PureState(new, state.amps)


def apply_gate(state: PureState, gate: Gate) -> PureState:
    """Apply a gate to its target label(s); norm is preserved."""
    n = state.n_qubits
    view = state.amps.reshape((2,) * n)
    if gate.kind == "CNOT":
        kc = state.axis(gate.control)
        kt = state.axis(gate.target)
        out = np.array(view)
        moved = np.moveaxis(out, kc, 0)
        flip_axis = kt if kt < kc else kt - 1
        moved[1] = np.flip(moved[1], axis=flip_axis)
        return PureState._wrap(state.labels, out.reshape(-1))
    k = state.axis(gate.target)
    u = GATES[gate.kind]
    out = np.moveaxis(np.tensordot(u, view, axes=([1], [k])), 0, k)
    return PureState._wrap(state.labels, np.ascontiguousarray(out.reshape(-1)))


def _collapse_z(state: PureState, label: str, rng, forced: int | None):
    """Z-basis collapse of one qubit; returns (bit, post state without it)."""
    k = state.axis(label)
    n = state.n_qubits
    moved = np.moveaxis(state.amps.reshape((2,) * n), k, 0)
    p0 = float(np.sum(np.abs(moved[0]) ** 2))
    probs = (p0, 1.0 - p0)
    if forced is None:
        outcome = 0 if rng.random() < p0 else 1
    else:
        outcome = int(forced)
        if outcome not in (0, 1):
            raise ValueError(f"forced Z/X outcome must be 0 or 1, got {forced!r}")
        if probs[outcome] < NORM_ATOL:
            raise ProjectionError(f"forced outcome {outcome} on {label!r} has zero probability")
    branch = moved[outcome].reshape(-1) / np.sqrt(probs[outcome])
    rest = state.labels[:k] + state.labels[k + 1:]
    return outcome, PureState._wrap(rest, np.ascontiguousarray(branch))


def measure(state: PureState, basis: MeasureBasis, rng, forced=None):
    """Born-rule measurement.

    Returns ``(outcome, post_state)``; the measured qubit(s) are removed
    from the register.  Z/X outcomes are bits (X: 0 is |+>, 1 is |->);
    Bell outcomes are ``BellKind``.  ``forced`` is a debug hook that picks
    a branch; forcing a zero-probability branch raises ``ProjectionError``.
    """
    if basis.kind == "Z":
        return _collapse_z(state, basis.targets[0], rng, forced)
    if basis.kind == "X":
        rotated = apply_gate(state, Gate("H", basis.targets[0]))
        return _collapse_z(rotated, basis.targets[0], rng, forced)
    # Bell basis: rotate with CNOT + H so that the two Z bits spell the code.
    q1, q2 = basis.targets
    rotated = apply_gate(state, Gate("CNOT", q2, control=q1))
    rotated = apply_gate(rotated, Gate("H", q1))
    f1 = f2 = None
    if forced is not None:
        code = int(forced)
        if not 0 <= code <= 3:
            raise ValueError(f"forced Bell outcome must be a 2-bit code, got {forced!r}")
        f1, f2 = (code >> 1) & 1, code & 1
    b1, rotated = _collapse_z(rotated, q1, rng, f1)
    b2, rotated = _collapse_z(rotated, q2, rng, f2)
    return BellKind((b1 << 1) | b2), rotated


def outcome_probabilities(state: PureState, basis: MeasureBasis) -> np.ndarray:
    """Outcome distribution of ``measure`` without collapsing the state."""
    if basis.kind == "Z":
        k = state.axis(basis.targets[0])
        moved = np.moveaxis(state.amps.reshape((2,) * state.n_qubits), k, 0)
        p0 = float(np.sum(np.abs(moved[0]) ** 2))
        return np.array([p0, 1.0 - p0])
    if basis.kind == "X":
        rotated = apply_gate(state, Gate("H", basis.targets[0]))
        return outcome_probabilities(rotated, MeasureBasis("Z", basis.targets))
    q1, q2 = basis.targets
    rotated = apply_gate(state, Gate("CNOT", q2, control=q1))
    rotated = apply_gate(rotated, Gate("H", q1))
    k1, k2 = rotated.axis(q1), rotated.axis(q2)
    moved = np.moveaxis(rotated.amps.reshape((2,) * state.n_qubits), (k1, k2), (0, 1))
    return np.array([
        float(np.sum(np.abs(moved[b >> 1, b & 1]) ** 2)) for b in range(4)
    ])


def _aligned(a: PureState, b: PureState) -> np.ndarray:
    """b's amplitudes permuted into a's label order."""
    if set(a.labels) != set(b.labels):
        raise LabelError(f"label sets differ: {a.labels} vs {b.labels}")
    if a.labels == b.labels:
        return b.amps
    perm = tuple(b.labels.index(l) for l in a.labels)
    return b.amps.reshape((2,) * b.n_qubits).transpose(perm).reshape(-1)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 over matching label sets; label order is reconciled."""
    return float(np.abs(np.vdot(a.amps, _aligned(a, b))) ** 2)


def same_state(a: PureState, b: PureState) -> bool:
    """True when the states agree up to global phase."""
    return fidelity(a, b) > SAME_STATE_FIDELITY


class StateBag:
    """A set of mutually unentangled registers under one label namespace.

    Operations address qubits by label; registers are tensored together
    lazily when an operation spans two of them.  This keeps a protocol run
    at O(2^k) cost for the largest connected group instead of 2^(total).
    """

    def __init__(self, states=()):
        self._states: list[PureState] = []
        for st in states:
            self.add(st)

    @property
    def labels(self) -> set[str]:
        out = set()
        for st in self._states:
            out.update(st.labels)
        return out

    @property
    def states(self) -> tuple[PureState, ...]:
        return tuple(self._states)

    def __contains__(self, label: str) -> bool:
        return any(label in st.labels for st in self._states)

    def add(self, state: PureState) -> None:
        clash = self.labels & set(state.labels)
        if clash:
            raise LabelError(f"labels {sorted(clash)} already present")
        self._states.append(state)

    def state_of(self, label: str) -> PureState:
        for st in self._states:
            if label in st.labels:
                return st
        raise LabelError(f"label {label!r} not in bag")

    def _merge(self, labels) -> int:
        """Tensor all registers containing the labels into one; return its index."""
        idxs = []
        for lbl in labels:
            for i, st in enumerate(self._states):
                if lbl in st.labels:
                    if i not in idxs:
                        idxs.append(i)
                    break
            else:
                raise LabelError(f"label {lbl!r} not in bag")
        merged = self._states[idxs[0]]
        for i in idxs[1:]:
            merged = tensor(merged, self._states[i])
        for i in sorted(idxs, reverse=True):
            del self._states[i]
        self._states.append(merged)
        return len(self._states) - 1

    def apply(self, gate: Gate) -> None:
        targets = (gate.target,) if gate.control is None else (gate.control, gate.target)
        i = self._merge(targets)
        self._states[i] = apply_gate(self._states[i], gate)

    def measure(self, basis: MeasureBasis, rng, forced=None):
        """Measure by label; collapsed registers shrink or disappear."""
        i = self._merge(basis.targets)
        outcome, post = measure(self._states[i], basis, rng, forced)
        if post.n_qubits == 0:
            del self._states[i]
        else:
            self._states[i] = post
        return outcome

    def relabel(self, mapping: dict[str, str]) -> None:
        new = [relabel(st, mapping) for st in self._states]
        seen: set[str] = set()
        for st in new:
            clash = seen & set(st.labels)
            if clash:
                raise LabelError(f"relabelling collides on {sorted(clash)}")
            seen.update(st.labels)
        self._states = new

    def joint(self, labels) -> PureState:
        """The register containing the labels (merging first if needed)."""
        i = self._merge(labels)
        return self._states[i]
