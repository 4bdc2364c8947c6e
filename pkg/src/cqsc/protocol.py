"""The controlled secure-communication state machine.

One run walks six phases:

1.  distribute     - the controller prepares GHZ-like triples and deals the
                     first two particles of each to Alice and Bob (the
                     in-flight qubits an eavesdropper can touch).
2.  first check    - a sampled subset of triples is measured in random Z/X
                     bases and tested against the GHZ-like correlation
                     rules; a high error rate aborts the run.
3.  release        - every remaining third particle is measured in Z (for
                     several controllers: the whole swap cascade runs) and
                     the resulting pair identity goes to Bob alone.
4.  scramble       - Bob applies a uniformly random Pauli to each of his
                     qubits, hiding the pair identity even from the
                     controller, then signals ready.
5.  encode + send  - Alice applies the two-bit Pauli encoding to her qubits,
                     mixes decoy photons into the sequence at secret
                     positions, and sends it back over the quantum channel.
6.  decoy check +  - after Bob confirms receipt, Alice discloses the decoy
    decode           positions/bases; Bob measures them (second abort
                     gate), then Bell-measures each pair and inverts the
                     encoding with his private scramble + release records.

Classical traffic is recorded as transcript events with explicit sender and
recipient so that tests can audit who learned what (Alice never sees the
release bits; decoy disclosure strictly follows Bob's confirmation).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .multictrl import (
    DistributionPlan,
    SwapSchedule,
    distribution_plan,
    execute_swap_phase,
    shared_pair_from_outcomes,
    swap_schedule,
)
from .sim import BellKind, Gate, MeasureBasis, StateBag
from .states import ghz_like

__all__ = [
    "PauliOp",
    "ProtocolConfig",
    "DecoyPhoton",
    "TranscriptEvent",
    "RunTranscript",
    "ProtocolError",
    "PositionSim",
    "SequenceItem",
    "distribute",
    "first_eavesdrop_check",
    "controller_release",
    "bob_scramble",
    "alice_encode",
    "decoy_check",
    "bob_decode",
    "efficiency",
    "run_cqsc",
    "ghz_rule_holds",
]


class ProtocolError(RuntimeError):
    """Ordering or bookkeeping contract of the protocol was violated."""


class PauliOp(IntEnum):
    """The four encoding operations and their two-bit message codes.

    The code doubles as Bell-code arithmetic: applying an operation with
    code p to one qubit of a Bell pair with code c yields code c XOR p.
    """

    I = 0b00
    X = 0b01
    Z = 0b10
    IY = 0b11

    @property
    def message(self) -> str:
        return format(int(self), "02b")

    @property
    def gate_kind(self) -> str:
        return ("I", "X", "Z", "iY")[int(self)]

    @classmethod
    def from_message(cls, bits: str) -> "PauliOp":
        if len(bits) != 2 or set(bits) - {"0", "1"}:
            raise ValueError(f"message chunk must be two bits, got {bits!r}")
        return cls(int(bits, 2))


@dataclass(frozen=True)
class ProtocolConfig:
    """Run parameters; ``seed`` fixes the whole run's random stream."""

    n_triples: int
    check_fraction: float = 0.5
    n_decoys: int = 16
    error_threshold: float = 0.05
    seed: int = 0
    scramble_enabled: bool = True

    def __post_init__(self):
        if self.n_triples < 1:
            raise ValueError("n_triples must be at least 1")
        if not 0.0 < self.check_fraction < 1.0:
            raise ValueError("check_fraction must lie in (0, 1)")
        if self.n_decoys < 0:
            raise ValueError("n_decoys must be non-negative")
        if self.error_threshold < 0.0:
            raise ValueError("error_threshold must be non-negative")

    @property
    def check_samples(self) -> int:
        return min(self.n_triples, max(1, round(self.check_fraction * self.n_triples)))


_DECOY_SYMBOLS = "01+-"


@dataclass(frozen=True)
class DecoyPhoton:
    """A single qubit in a random Z/X eigenstate hidden in the sequence."""

    position: int
    symbol: str

    @property
    def basis(self) -> str:
        return "Z" if self.symbol in "01" else "X"

    @property
    def expected_bit(self) -> int:
        return 0 if self.symbol in "0+" else 1


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    sender: str
    recipient: str
    kind: str
    payload: object = None


@dataclass
class RunTranscript:
    """Everything a run produced: outcomes, classical traffic, verdicts."""

    seed: int
    n_controllers: int
    message_sent: str | None = None
    first_check_error_rate: float | None = None
    first_check_detail: dict | None = None
    charlie_bits: str | None = None
    release_codes: tuple[int, ...] | None = None
    bob_scramble_ops: tuple[PauliOp, ...] | None = None
    alice_encode_ops: tuple[PauliOp, ...] | None = None
    decoy_error_rate: float | None = None
    decoy_detail: dict | None = None
    bell_results: tuple[BellKind, ...] | None = None
    decoded_message: str | None = None
    aborted_at: str | None = None
    eve_guess_accuracy: float | None = None
    eve_detail: dict | None = None
    events: list[TranscriptEvent] = field(default_factory=list)

    def add_event(self, sender: str, recipient: str, kind: str, payload=None) -> None:
        self.events.append(TranscriptEvent(len(self.events), sender, recipient, kind, payload))

    def events_of(self, kind: str) -> list[TranscriptEvent]:
        return [e for e in self.events if e.kind == kind]

    @property
    def completed(self) -> bool:
        return self.aborted_at is None and self.decoded_message is not None

    @property
    def bell_code_string(self) -> str | None:
        if self.bell_results is None:
            return None
        return "".join(k.code for k in self.bell_results)

    def event_lines(self) -> list[str]:
        """The classical-traffic log, one structured line per event."""
        return [
            f"{e.seq:04d} {e.sender} -> {e.recipient} {e.kind}"
            + (f" {e.payload}" if e.payload is not None else "")
            for e in self.events
        ]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "controllers": self.n_controllers,
            "message": self.message_sent,
            "first_check_error_rate": self.first_check_error_rate,
            "first_check_detail": self.first_check_detail,
            "charlie_bits": self.charlie_bits,
            "release_codes": list(self.release_codes) if self.release_codes is not None else None,
            "scramble_ops": [op.message for op in self.bob_scramble_ops] if self.bob_scramble_ops is not None else None,
            "encode_ops": [op.message for op in self.alice_encode_ops] if self.alice_encode_ops is not None else None,
            "decoy_error_rate": self.decoy_error_rate,
            "bell_codes": self.bell_code_string,
            "decoded_message": self.decoded_message,
            "aborted_at": self.aborted_at,
            "eve_guess_accuracy": self.eve_guess_accuracy,
        }


@dataclass
class PositionSim:
    """One sequence position: the plan's triples instantiated as live states."""

    index: int
    bag: StateBag
    release_code: int | None = None
    scramble: PauliOp | None = None
    encode: PauliOp | None = None
    bell_outcome: BellKind | None = None


class SequenceItem:
    """One slot of the transmitted sequence: a message qubit or a decoy."""

    __slots__ = ("kind", "position", "decoy", "state")

    def __init__(self, kind, position=None, decoy=None, state=None):
        self.kind = kind
        self.position = position
        self.decoy = decoy
        self.state = state


def ghz_rule_holds(first: int, second: int, third: int, basis: str) -> bool:
    """Correlation rule of GHZ-like state 0 for a joint Z or X measurement.

    Z: third 0 means the pair agrees, third 1 means it disagrees.
    X: the pair agrees (all three outcomes coincide for this state, so the
    pair's minus-parity is even; the third outcome adds no extra test).
    """
    if basis == "Z":
        return (first == second) == (third == 0)
    if basis == "X":
        return first == second
    raise ValueError(f"unknown check basis {basis!r}")


def _controller_name(plan: DistributionPlan, holder: str) -> str:
    if plan.n_controllers == 1 and holder == "C1":
        return "Charlie"
    return holder


def distribute(config: ProtocolConfig, rng, plan: DistributionPlan | None = None,
               eve=None, transcript: RunTranscript | None = None) -> list[PositionSim]:
    """Prepare fresh GHZ-like triples for every position and deal them out.

    The in-flight user qubits pass through the channel here, so a strategy
    covering the distribution phase gets its hook per position.
    """
    if plan is None:
        plan = distribution_plan(1)
    positions = []
    for i in range(config.n_triples):
        bag = StateBag(
            ghz_like(0, (t[0].name, t[1].name, t[2].name)) for t in plan.triples
        )
        pos = PositionSim(index=i, bag=bag)
        if eve is not None and eve.covers_distribution:
            eve.attack_distribution(pos, rng)
        positions.append(pos)
    if transcript is not None:
        preparer = _controller_name(plan, "C1")
        transcript.add_event(preparer, "Alice", "qubit_sequence", {"count": config.n_triples, "particle": "a"})
        transcript.add_event(preparer, "Bob", "qubit_sequence", {"count": config.n_triples, "particle": "b"})
    return positions


def first_eavesdrop_check(positions: list[PositionSim], config: ProtocolConfig, rng,
                          plan: DistributionPlan | None = None,
                          transcript: RunTranscript | None = None):
    """Sample positions, measure every triple in a random basis, count rule
    violations.

    Returns ``(error_rate, survivors, detail)``; the caller compares the
    rate with the configured threshold and aborts on excess.
    """
    if plan is None:
        plan = distribution_plan(1)
    if not positions:
        raise ValueError("nothing to check")
    k = config.check_samples
    sampled = sorted(int(i) for i in rng.choice(len(positions), size=k, replace=False))
    sampled_set = set(sampled)
    detail = {"z_samples": 0, "z_violations": 0, "x_samples": 0, "x_violations": 0}
    for i in sampled:
        pos = positions[i]
        for t1, t2, t3 in plan.triples:
            basis = "Z" if rng.integers(2) == 0 else "X"
            announcer = _controller_name(plan, t3.holder)
            if transcript is not None:
                transcript.add_event(announcer, "public", "check_basis",
                                     {"position": pos.index, "particle": t3.name, "basis": basis})
            third = pos.bag.measure(MeasureBasis(basis, (t3.name,)), rng)
            first = pos.bag.measure(MeasureBasis(basis, (t1.name,)), rng)
            second = pos.bag.measure(MeasureBasis(basis, (t2.name,)), rng)
            key = basis.lower()
            detail[f"{key}_samples"] += 1
            if not ghz_rule_holds(first, second, third, basis):
                detail[f"{key}_violations"] += 1
    total = detail["z_samples"] + detail["x_samples"]
    violations = detail["z_violations"] + detail["x_violations"]
    error_rate = violations / total
    survivors = [pos for i, pos in enumerate(positions) if i not in sampled_set]
    if transcript is not None:
        transcript.add_event("Alice", "public", "check_results", {"samples": total})
        transcript.add_event("Bob", "public", "check_results", {"samples": total})
    return error_rate, survivors, detail


def controller_release(positions: list[PositionSim], rng,
                       plan: DistributionPlan | None = None,
                       schedule: SwapSchedule | None = None,
                       transcript: RunTranscript | None = None,
                       forced_bits=None) -> list[int]:
    """Measure every remaining third particle (running the swap cascade when
    there are several controllers) and deliver the pair identity to Bob only.

    Returns the release codes, one per position: for a single controller
    these are the announced Z bits (0 selects phi+, 1 selects psi+).
    ``forced_bits`` pins the single-controller branch per position.
    """
    if plan is None:
        plan = distribution_plan(1)
    if schedule is None:
        schedule = swap_schedule(plan)
    single_controller = not schedule.bell_measurements
    codes = []
    for j, pos in enumerate(positions):
        z_bits = None
        if forced_bits is not None:
            if not single_controller:
                raise ValueError("forced_bits is only supported for one controller")
            z_bits = [int(forced_bits[j])]
        log = execute_swap_phase(pos.bag, schedule, rng, z_bits=z_bits)
        code = int(shared_pair_from_outcomes(plan, log.z_bits, log.bell_outcomes))
        pos.release_code = code
        codes.append(code)
        if transcript is not None:
            if single_controller:
                transcript.add_event("Charlie", "Bob", "release",
                                     {"position": pos.index, "bit": log.z_bits[0]})
            else:
                for (holder, tag), bit in zip(schedule.z_measurements, log.z_bits):
                    transcript.add_event(holder, "public", "swap_z_result",
                                         {"position": pos.index, "particle": tag.name, "bit": bit})
                for (holder, pair), kind in zip(schedule.bell_measurements, log.bell_outcomes):
                    recipient = "Bob" if holder == "C1" else "public"
                    transcript.add_event(holder, recipient, "swap_bell_result",
                                         {"position": pos.index,
                                          "particles": [pair[0].name, pair[1].name],
                                          "code": kind.code})
    return codes


def bob_scramble(positions: list[PositionSim], rng, ops=None, enabled: bool = True,
                 transcript: RunTranscript | None = None) -> list[PauliOp]:
    """Apply an independently uniform Pauli to each of Bob's qubits.

    Bob records the operations privately; afterwards nobody else knows
    which Bell pair a position holds.  ``ops`` overrides the draw (tests),
    ``enabled=False`` degrades every operation to the identity.
    """
    chosen = []
    for j, pos in enumerate(positions):
        if ops is not None:
            op = PauliOp(ops[j])
        elif enabled:
            op = PauliOp(int(rng.integers(4)))
        else:
            op = PauliOp.I
        pos.bag.apply(Gate(op.gate_kind, "b"))
        pos.scramble = op
        chosen.append(op)
    if transcript is not None:
        transcript.add_event("Bob", "Alice", "ready", None)
    return chosen


def alice_encode(message: str, positions: list[PositionSim], config: ProtocolConfig, rng,
                 transcript: RunTranscript | None = None):
    """Encode two message bits per position and hide decoys in the sequence.

    Returns ``(items, decoys, ops)``: the transmitted sequence (message
    qubits plus fresh decoy qubits at secret positions), the decoy records
    Alice keeps for the later disclosure, and the encoding operations.
    """
    if set(message) - {"0", "1"}:
        raise ValueError(f"message must be a bit string, got {message!r}")
    if len(message) % 2:
        raise ValueError("message length must be even (two bits per pair)")
    n_chunks = len(message) // 2
    if n_chunks > len(positions):
        raise ValueError(f"message needs {n_chunks} pairs but only {len(positions)} survive the check")
    ops = []
    for j in range(n_chunks):
        op = PauliOp.from_message(message[2 * j: 2 * j + 2])
        positions[j].bag.apply(Gate(op.gate_kind, "a"))
        positions[j].encode = op
        ops.append(op)
    total = n_chunks + config.n_decoys
    decoy_slots = set()
    if config.n_decoys:
        decoy_slots = {int(i) for i in rng.choice(total, size=config.n_decoys, replace=False)}
    items, decoys = [], []
    next_message = 0
    from .sim import single  # local import keeps module top uncluttered
    for slot in range(total):
        if slot in decoy_slots:
            symbol = _DECOY_SYMBOLS[int(rng.integers(4))]
            decoy = DecoyPhoton(position=slot, symbol=symbol)
            decoys.append(decoy)
            items.append(SequenceItem("decoy", decoy=decoy, state=single("d", symbol)))
        else:
            items.append(SequenceItem("message", position=positions[next_message]))
            next_message += 1
    if transcript is not None:
        transcript.add_event("Alice", "Bob", "quantum_sequence",
                             {"length": total, "decoys": config.n_decoys})
    return items, decoys, ops


def decoy_check(items: list[SequenceItem], disclosure: list[DecoyPhoton] | None, rng,
                transcript: RunTranscript | None = None):
    """Measure the disclosed decoys and report the mismatch rate.

    Bob must have confirmed receipt before Alice disclosed; a withheld
    disclosure stalls the protocol.  Returns ``(error_rate,
    message_positions, detail)`` with the decoys stripped out.
    """
    if disclosure is None:
        raise ProtocolError("decoy disclosure withheld; the check cannot run")
    by_slot = {d.position: d for d in disclosure}
    mismatches = 0
    checked = 0
    message_positions = []
    results = []
    for slot, item in enumerate(items):
        if item.kind == "message":
            message_positions.append(item.position)
            continue
        decoy = by_slot.get(slot)
        if decoy is None:
            raise ProtocolError(f"undisclosed decoy at slot {slot}")
        outcome, _ = _measure_item(item.state, decoy.basis, rng)
        checked += 1
        results.append(outcome)
        if outcome != decoy.expected_bit:
            mismatches += 1
    if checked != len(disclosure):
        raise ProtocolError("disclosure does not match the received sequence")
    error_rate = mismatches / checked if checked else 0.0
    detail = {"checked": checked, "mismatches": mismatches}
    if transcript is not None:
        transcript.add_event("Bob", "Alice", "decoy_results", {"outcomes": results})
    return error_rate, message_positions, detail


def _measure_item(state, basis: str, rng):
    from .sim import measure
    return measure(state, MeasureBasis(basis, ("d",)), rng)


def bob_decode(message_positions: list[PositionSim], rng,
               transcript: RunTranscript | None = None):
    """Bell-measure every pair and invert the encoding.

    Bob knows each pair's pre-encode identity from the release code and his
    own scramble record; the measured Bell code XORed with that identity is
    the message chunk.
    """
    kinds = []
    bits = []
    for pos in message_positions:
        if pos.release_code is None or pos.scramble is None:
            raise ProtocolError(f"position {pos.index} is missing release or scramble records")
        kind = pos.bag.measure(MeasureBasis("BELL", ("a", "b")), rng)
        pos.bell_outcome = kind
        pre_code = pos.release_code ^ int(pos.scramble)
        chunk = int(kind) ^ pre_code
        kinds.append(kind)
        bits.append(format(chunk, "02b"))
    return kinds, "".join(bits)


def efficiency(c_bits: int, q_qubits: int, b_classical: int) -> float:
    """Classical bits conveyed per quantum-plus-classical resource."""
    denom = q_qubits + b_classical
    if denom <= 0:
        raise ValueError("efficiency needs a positive resource count")
    return c_bits / denom


def run_cqsc(config: ProtocolConfig, message: str, attacker=None, rng=None,
             n_controllers: int = 1) -> RunTranscript:
    """Execute a full protocol run and return its transcript.

    ``attacker`` is an optional strategy; its per-run executor is attached
    to the channels its target phase covers.  Aborts at the first failed
    check, leaving the downstream transcript fields unset.
    """
    if set(message) - {"0", "1"}:
        raise ValueError(f"message must be a bit string, got {message!r}")
    if len(message) % 2:
        raise ValueError("message length must be even (two bits per pair)")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    plan = distribution_plan(n_controllers)
    schedule = swap_schedule(plan)
    eve = attacker.build() if attacker is not None else None

    transcript = RunTranscript(seed=config.seed, n_controllers=n_controllers,
                               message_sent=message)
    needed = len(message) // 2
    if config.n_triples - config.check_samples < needed:
        raise ValueError(
            f"{config.n_triples} triples minus {config.check_samples} check samples "
            f"cannot carry {len(message)} message bits")

    positions = distribute(config, rng, plan=plan, eve=eve, transcript=transcript)
    error_rate, survivors, detail = first_eavesdrop_check(
        positions, config, rng, plan=plan, transcript=transcript)
    transcript.first_check_error_rate = error_rate
    transcript.first_check_detail = detail
    if error_rate > config.error_threshold:
        transcript.aborted_at = "first_check"
        transcript.add_event("Charlie" if n_controllers == 1 else "C1",
                             "public", "abort", {"phase": "first_check", "error_rate": error_rate})
        return transcript

    codes = controller_release(survivors, rng, plan=plan, schedule=schedule,
                               transcript=transcript)
    transcript.release_codes = tuple(codes)
    if n_controllers == 1:
        transcript.charlie_bits = "".join(str(c) for c in codes)

    scramble_ops = bob_scramble(survivors, rng, enabled=config.scramble_enabled,
                                transcript=transcript)
    transcript.bob_scramble_ops = tuple(scramble_ops)

    items, decoys, encode_ops = alice_encode(message, survivors, config, rng,
                                             transcript=transcript)
    transcript.alice_encode_ops = tuple(encode_ops)
    if eve is not None and eve.covers_return:
        eve.attack_return(items, rng)
    if eve is not None:
        eve.after_return(survivors, rng)

    transcript.add_event("Bob", "Alice", "receipt_confirmation", None)
    transcript.add_event("Alice", "Bob", "decoy_disclosure",
                         {"positions": [d.position for d in decoys],
                          "bases": [d.basis for d in decoys]})
    decoy_rate, message_positions, decoy_detail = decoy_check(items, decoys, rng,
                                                              transcript=transcript)
    transcript.decoy_error_rate = decoy_rate
    transcript.decoy_detail = decoy_detail
    if decoy_rate > config.error_threshold:
        transcript.aborted_at = "decoy_check"
        transcript.add_event("Alice", "public", "abort",
                             {"phase": "decoy_check", "error_rate": decoy_rate})
        return transcript

    kinds, decoded = bob_decode(message_positions, rng, transcript=transcript)
    transcript.bell_results = tuple(kinds)
    transcript.decoded_message = decoded

    if eve is not None and needed:
        guess = eve.guess_chunks(needed, rng)
        guess_bits = "".join(format(int(g), "02b") for g in guess)
        correct = sum(1 for g, m in zip(guess_bits, message) if g == m)
        transcript.eve_guess_accuracy = correct / len(message)
        transcript.eve_detail = {"bits": len(message), "correct": correct}
    return transcript
