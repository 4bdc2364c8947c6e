"""Eavesdropping strategies and Monte-Carlo detection statistics.

Three channel attacks are modelled, each attachable to the distribution
phase (the user qubits travelling from the controller), the encoded return
sequence (Alice back to Bob), or both:

* intercept-resend: keep the genuine qubits, hand the users particles from
  a self-made GHZ-like state.  On the return path this degrades to the
  classic measure-in-a-random-basis-and-forward attack.
* measure-resend: measure every passing qubit in Z and forward the
  collapsed qubit.
* entangle-measure: attach a fresh |00> ancilla pair per position with two
  CNOTs (travelling qubits as controls) and measure the ancillas once the
  encoded sequence has passed.

A strategy object is a cheap spec; each protocol run builds its own
stateful executor, so trials stay independent and parallelizable.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .protocol import PositionSim, ProtocolConfig, SequenceItem, run_cqsc
from .sim import Gate, MeasureBasis, StateBag, basis_state, measure, single, tensor
from .states import ghz_like

__all__ = [
    "AttackKind",
    "TargetPhase",
    "AttackStrategy",
    "DetectionReport",
    "detection_stats",
]


class AttackKind(Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept"
    MEASURE_RESEND = "measure"
    ENTANGLE_MEASURE = "entangle"


class TargetPhase(Enum):
    DISTRIBUTION = "distribution"
    ENCODED_RETURN = "encoded_return"
    BOTH = "both"


@dataclass(frozen=True)
class AttackStrategy:
    """Which attack to mount and which transmission it touches."""

    kind: AttackKind = AttackKind.NONE
    target_phase: TargetPhase = TargetPhase.DISTRIBUTION

    def build(self):
        """Fresh per-run executor (None when there is no attack)."""
        if self.kind is AttackKind.NONE:
            return None
        cls = {
            AttackKind.INTERCEPT_RESEND: _InterceptResendEve,
            AttackKind.MEASURE_RESEND: _MeasureResendEve,
            AttackKind.ENTANGLE_MEASURE: _EntangleMeasureEve,
        }[self.kind]
        return cls(self.target_phase)


def _forward_symbol(basis: str, outcome: int) -> str:
    if basis == "Z":
        return "1" if outcome else "0"
    return "-" if outcome else "+"


def _measure_and_forward(bag: StateBag, label: str, basis: str, rng) -> int:
    """Measure a qubit in the bag and resend it in its collapsed state."""
    outcome = bag.measure(MeasureBasis(basis, (label,)), rng)
    bag.add(single(label, _forward_symbol(basis, outcome)))
    return outcome


def _measure_and_forward_state(state, basis: str, rng):
    """Same for a free-standing sequence qubit (decoys travel unlabelled)."""
    outcome, post = measure(state, MeasureBasis(basis, ("d",)), rng)
    fresh = single("d", _forward_symbol(basis, outcome))
    if post.n_qubits:
        return outcome, tensor(post, fresh)
    return outcome, fresh


class _Eavesdropper:
    """Per-run attack executor; subclasses fill in the channel hooks."""

    kind = AttackKind.NONE

    def __init__(self, target_phase: TargetPhase):
        self.target_phase = target_phase
        self.notes: dict = {}

    @property
    def covers_distribution(self) -> bool:
        return self.target_phase in (TargetPhase.DISTRIBUTION, TargetPhase.BOTH)

    @property
    def covers_return(self) -> bool:
        return self.target_phase in (TargetPhase.ENCODED_RETURN, TargetPhase.BOTH)

    def attack_distribution(self, pos: PositionSim, rng) -> None:
        raise NotImplementedError

    def attack_return(self, items: list[SequenceItem], rng) -> None:
        raise NotImplementedError

    def after_return(self, survivors: list[PositionSim], rng) -> None:
        """Measurement point once the encoded sequence has passed."""

    def guess_chunks(self, n_chunks: int, rng) -> list[int]:
        """Maximum-likelihood guess of the encoded two-bit chunks.

        None of the observations these attacks collect are correlated with
        the encoding operation (it acts on qubits the eavesdropper no
        longer holds), so the likelihood is flat and the guess falls back
        to the tie-break rule: uniform draws from the run's stream.
        """
        return [int(rng.integers(4)) for _ in range(n_chunks)]


class _InterceptResendEve(_Eavesdropper):
    """Substitute the users' particles with a self-made GHZ-like state.

    The forged state is a uniformly random member of the eight-state
    family; the genuine particles stay with the eavesdropper.
    """

    kind = AttackKind.INTERCEPT_RESEND

    def attack_distribution(self, pos: PositionSim, rng) -> None:
        pos.bag.relabel({"a": "eve_a", "b": "eve_b"})
        family = int(rng.integers(8))
        pos.bag.add(ghz_like(family, ("a", "b", "eve_z")))
        self.notes.setdefault("captured", []).append((pos.index, family))

    def attack_return(self, items: list[SequenceItem], rng) -> None:
        outcomes = []
        for item in items:
            basis = "Z" if rng.integers(2) == 0 else "X"
            if item.kind == "message":
                outcomes.append(_measure_and_forward(item.position.bag, "a", basis, rng))
            else:
                bit, item.state = _measure_and_forward_state(item.state, basis, rng)
                outcomes.append(bit)
        self.notes.setdefault("return_outcomes", []).append(outcomes)


class _MeasureResendEve(_Eavesdropper):
    """Measure every passing qubit in Z and forward the collapsed qubit."""

    kind = AttackKind.MEASURE_RESEND

    def attack_distribution(self, pos: PositionSim, rng) -> None:
        bits = [
            _measure_and_forward(pos.bag, label, "Z", rng) for label in ("a", "b")
        ]
        self.notes.setdefault("distribution_bits", []).append(bits)

    def attack_return(self, items: list[SequenceItem], rng) -> None:
        outcomes = []
        for item in items:
            if item.kind == "message":
                outcomes.append(_measure_and_forward(item.position.bag, "a", "Z", rng))
            else:
                bit, item.state = _measure_and_forward_state(item.state, "Z", rng)
                outcomes.append(bit)
        self.notes.setdefault("return_outcomes", []).append(outcomes)


class _EntangleMeasureEve(_Eavesdropper):
    """CNOT-couple fresh ancillas to the travelling qubits, measure later."""

    kind = AttackKind.ENTANGLE_MEASURE

    def __init__(self, target_phase: TargetPhase):
        super().__init__(target_phase)
        self._tagged: list[PositionSim] = []

    def attack_distribution(self, pos: PositionSim, rng) -> None:
        pos.bag.add(basis_state(("eve_x", "eve_y"), (0, 0)))
        pos.bag.apply(Gate("CNOT", "eve_x", control="a"))
        pos.bag.apply(Gate("CNOT", "eve_y", control="b"))
        self._tagged.append(pos)

    def attack_return(self, items: list[SequenceItem], rng) -> None:
        for item in items:
            if item.kind == "message":
                bag = item.position.bag
                if "eve_r" not in bag:
                    bag.add(basis_state(("eve_r",), (0,)))
                    bag.apply(Gate("CNOT", "eve_r", control="a"))
            else:
                item.state = tensor(item.state, basis_state(("eve_d",), (0,)))
                from .sim import apply_gate
                item.state = apply_gate(item.state, Gate("CNOT", "eve_d", control="d"))

    def after_return(self, survivors: list[PositionSim], rng) -> None:
        outcomes = []
        alive = set(id(p) for p in survivors)
        for pos in self._tagged:
            if id(pos) not in alive:
                continue
            kind = pos.bag.measure(MeasureBasis("BELL", ("eve_x", "eve_y")), rng)
            outcomes.append(int(kind))
        self.notes["ancilla_bell_codes"] = outcomes


def _rate(violations: int, samples: int):
    return violations / samples if samples else None


def _stderr(p, n: int):
    if p is None or n == 0:
        return None
    return float(np.sqrt(p * (1.0 - p) / n))


@dataclass
class DetectionReport:
    """Aggregated Monte-Carlo detection statistics for one strategy."""

    attack: str
    target_phase: str
    trials: int
    aborted_runs: int
    detection_probability: float
    first_check_error_rate: float | None
    first_check_stderr: float | None
    per_basis_error: dict
    decoy_error_rate: float | None
    decoy_stderr: float | None
    eve_information: float | None
    counts: dict

    def to_dict(self) -> dict:
        return {
            "attack": self.attack,
            "target_phase": self.target_phase,
            "trials": self.trials,
            "aborted_runs": self.aborted_runs,
            "detection_probability": self.detection_probability,
            "first_check_error_rate": self.first_check_error_rate,
            "first_check_stderr": self.first_check_stderr,
            "per_basis_error": self.per_basis_error,
            "decoy_error_rate": self.decoy_error_rate,
            "decoy_stderr": self.decoy_stderr,
            "eve_information": self.eve_information,
            "counts": self.counts,
        }


def detection_stats(strategy: AttackStrategy, config: ProtocolConfig, trials: int,
                    rng=None, message_bits: int = 8, n_controllers: int = 1) -> DetectionReport:
    """Run the protocol ``trials`` times under a strategy and pool the stats.

    Each trial gets an independent child stream spawned from the main one,
    so results do not depend on any execution interleaving.  Error rates
    are pooled across trials with binomial standard errors;
    ``eve_information`` is the per-bit guess accuracy over undetected
    (completed) runs, None when every run aborted.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if message_bits % 2:
        raise ValueError("message_bits must be even")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    streams = rng.spawn(trials)

    counts = {
        "z_samples": 0, "z_violations": 0,
        "x_samples": 0, "x_violations": 0,
        "decoys_checked": 0, "decoy_mismatches": 0,
        "eve_bits": 0, "eve_correct": 0,
        "undetected_runs": 0,
    }
    aborted = 0
    for child in streams:
        message = "".join(str(b) for b in child.integers(0, 2, size=message_bits))
        transcript = run_cqsc(config, message, attacker=strategy, rng=child,
                              n_controllers=n_controllers)
        detail = transcript.first_check_detail
        for key in ("z_samples", "z_violations", "x_samples", "x_violations"):
            counts[key] += detail[key]
        if transcript.decoy_detail is not None:
            counts["decoys_checked"] += transcript.decoy_detail["checked"]
            counts["decoy_mismatches"] += transcript.decoy_detail["mismatches"]
        if transcript.aborted_at is not None:
            aborted += 1
        else:
            counts["undetected_runs"] += 1
            if transcript.eve_detail is not None:
                counts["eve_bits"] += transcript.eve_detail["bits"]
                counts["eve_correct"] += transcript.eve_detail["correct"]

    first_samples = counts["z_samples"] + counts["x_samples"]
    first_viol = counts["z_violations"] + counts["x_violations"]
    first_rate = _rate(first_viol, first_samples)
    decoy_rate = _rate(counts["decoy_mismatches"], counts["decoys_checked"])
    eve_info = _rate(counts["eve_correct"], counts["eve_bits"])
    return DetectionReport(
        attack=strategy.kind.value,
        target_phase=strategy.target_phase.value,
        trials=trials,
        aborted_runs=aborted,
        detection_probability=aborted / trials,
        first_check_error_rate=first_rate,
        first_check_stderr=_stderr(first_rate, first_samples),
        per_basis_error={
            "Z": _rate(counts["z_violations"], counts["z_samples"]),
            "X": _rate(counts["x_violations"], counts["x_samples"]),
        },
        decoy_error_rate=decoy_rate,
        decoy_stderr=_stderr(decoy_rate, counts["decoys_checked"]),
        eve_information=eve_info,
        counts=counts,
    )
