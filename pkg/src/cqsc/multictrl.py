"""Layered distribution plans and entanglement swapping for N controllers.

With N controllers the users' shared Bell pair is produced indirectly: a
chain of GHZ-like triples is dealt out so that controller k holds the
particles named p_k and p'_k, every triple's third particle is measured in
Z (collapsing it to a Bell pair on its first two particles), and the
controllers then Bell-measure their particle pairs in decreasing index
order, swapping entanglement down the chain until only the users' (a, b)
pair remains.

The final pair never needs amplitude-level simulation to predict: Z results
contribute their bit as a Bell code (0 -> 00, 1 -> 01) and every Bell
measurement contributes its own outcome code, all XORed together.
``run_swapping`` simulates amplitudes; ``shared_pair_from_outcomes`` applies
the XOR bookkeeping; the two must always agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sim import BellKind, MeasureBasis, StateBag
from .states import classify_bell, ghz_like

__all__ = [
    "ParticleTag",
    "DistributionPlan",
    "SwapSchedule",
    "PlanError",
    "distribution_plan",
    "swap_schedule",
    "run_swapping",
    "shared_pair_from_outcomes",
    "SHARED_PAIR_REFERENCE",
]


class PlanError(ValueError):
    """A distribution plan or swap schedule is internally inconsistent."""


@dataclass(frozen=True)
class ParticleTag:
    """One particle of one GHZ-like triple.

    ``role`` is set for the particles handed to the users ("a", "b") and for
    the single-controller degenerate case ("c"); indexed tags p_k / p'_k are
    held by controller k.
    """

    primed: bool = False
    index: int = 0
    role: str | None = None

    @property
    def name(self) -> str:
        if self.role is not None:
            return self.role
        return f"p'{self.index}" if self.primed else f"p{self.index}"

    @property
    def holder(self) -> str:
        if self.role == "a":
            return "Alice"
        if self.role == "b":
            return "Bob"
        return f"C{self.index}"

    def __str__(self) -> str:
        return self.name


def _tag(primed: bool, index: int) -> ParticleTag:
    # Index 0 / -1 on primed tags are placeholders for the users' particles.
    if primed and index == 0:
        return ParticleTag(role="a")
    if primed and index == -1:
        return ParticleTag(role="b")
    return ParticleTag(primed=primed, index=index)


@dataclass(frozen=True)
class DistributionPlan:
    """Which particles form each GHZ-like triple and who holds them."""

    n_controllers: int
    triples: tuple[tuple[ParticleTag, ParticleTag, ParticleTag], ...]

    @property
    def holders(self) -> dict[str, str]:
        return {t.name: t.holder for triple in self.triples for t in triple}

    @property
    def all_tags(self) -> tuple[ParticleTag, ...]:
        return tuple(t for triple in self.triples for t in triple)

    def validate(self) -> None:
        n = self.n_controllers
        expected = (n + 1) // 2 if n % 2 else (n + 2) // 2
        if len(self.triples) != expected:
            raise PlanError(f"{n} controllers need {expected} triples, plan has {len(self.triples)}")
        names = [t.name for t in self.all_tags]
        if len(set(names)) != len(names):
            raise PlanError("a particle appears in two triples")
        roles = [t.role for t in self.all_tags if t.role in ("a", "b")]
        if sorted(roles) != ["a", "b"]:
            raise PlanError("plan must hand out exactly one 'a' and one 'b'")
        held = {t.holder for t in self.all_tags}
        missing = {f"C{k}" for k in range(1, n + 1)} - held
        if missing:
            raise PlanError(f"controllers {sorted(missing)} hold no particle")


@dataclass(frozen=True)
class SwapSchedule:
    """Measurement assignments: Z on every third particle, then Bell pairs.

    Bell measurements run in strictly decreasing controller order, each
    controller pairing the two particles it holds, ending at C1.
    """

    z_measurements: tuple[tuple[str, ParticleTag], ...]
    bell_measurements: tuple[tuple[str, tuple[ParticleTag, ParticleTag]], ...]


def distribution_plan(n_controllers: int) -> DistributionPlan:
    """Generate the triple layout for ``n_controllers`` trusted controllers.

    One controller degenerates to the single shared triple (a, b, c).  For
    larger N the layered recurrences emit (N+1)/2 triples for odd N and
    (N+2)/2 for even N, with the placeholder particles p'_0 and p'_-1
    substituted by the users' a and b.
    """
    n = n_controllers
    if n < 1:
        raise ValueError(f"need at least one controller, got {n}")
    if n == 1:
        triples = [(ParticleTag(role="a"), ParticleTag(role="b"), ParticleTag(role="c", index=1))]
        plan = DistributionPlan(1, tuple(triples))
        plan.validate()
        return plan
    triples = []
    if n % 2:
        triples.append((_tag(True, (n - 1) // 2), _tag(True, (n - 3) // 2), _tag(False, (n + 1) // 2)))
        for m in range((n - 1) // 2):
            triples.append((
                _tag(False, (n - (2 * m + 1)) // 2),
                _tag(True, (n - (2 * m + 5)) // 2),
                _tag(False, (n + (2 * m + 3)) // 2),
            ))
    else:
        triples.append((_tag(True, n // 2), _tag(True, (n - 2) // 2), _tag(True, (n + 2) // 2)))
        for m in range(n // 2):
            triples.append((
                _tag(False, (n - 2 * m) // 2),
                _tag(True, (n - (2 * m + 4)) // 2),
                _tag(False, (n + (2 * m + 2)) // 2),
            ))
    plan = DistributionPlan(n, tuple(triples))
    plan.validate()
    return plan


def swap_schedule(plan: DistributionPlan) -> SwapSchedule:
    """Derive who measures what, and in which order, from a plan."""
    z_meas = tuple((t[2].holder, t[2]) for t in plan.triples)
    z_names = {t[2].name for t in plan.triples}
    n = plan.n_controllers
    last_bell = (n - 1) // 2 if n % 2 else n // 2
    by_holder: dict[str, list[ParticleTag]] = {}
    for t in plan.all_tags:
        if t.name not in z_names:
            by_holder.setdefault(t.holder, []).append(t)
    bells = []
    for k in range(last_bell, 0, -1):
        held = by_holder.get(f"C{k}", [])
        if len(held) != 2:
            raise PlanError(f"C{k} must hold exactly 2 unmeasured particles, holds {len(held)}")
        primed = [t for t in held if t.primed]
        plain = [t for t in held if not t.primed]
        if len(primed) != 1 or len(plain) != 1:
            raise PlanError(f"C{k} should hold one primed and one plain particle")
        bells.append((f"C{k}", (primed[0], plain[0])))
    return SwapSchedule(z_meas, tuple(bells))


@dataclass
class SwapOutcomeLog:
    """Raw measurement record of one swapping run, in schedule order."""

    z_bits: list[int] = field(default_factory=list)
    bell_outcomes: list[BellKind] = field(default_factory=list)


def execute_swap_phase(bag: StateBag, schedule: SwapSchedule, rng,
                       z_bits=None, bell_outcomes=None) -> SwapOutcomeLog:
    """Run the schedule's measurements against the registers in ``bag``.

    ``z_bits`` / ``bell_outcomes`` force specific branches (used to
    enumerate outcome tables); omitted entries are drawn from ``rng``.
    """
    log = SwapOutcomeLog()
    for i, (_, tag) in enumerate(schedule.z_measurements):
        forced = None if z_bits is None else z_bits[i]
        bit = bag.measure(MeasureBasis("Z", (tag.name,)), rng, forced=forced)
        log.z_bits.append(int(bit))
    for j, (_, pair) in enumerate(schedule.bell_measurements):
        forced = None if bell_outcomes is None else int(bell_outcomes[j])
        kind = bag.measure(MeasureBasis("BELL", (pair[0].name, pair[1].name)), rng, forced=forced)
        log.bell_outcomes.append(kind)
    return log


def run_swapping(plan: DistributionPlan, rng=None, z_bits=None, bell_outcomes=None):
    """Simulate a full swapping cascade on fresh GHZ-like triples.

    Returns ``(kind, log)`` where ``kind`` classifies the final (a, b)
    state.  The final state failing to be a Bell state would be a
    correctness bug, so it raises rather than returning None.
    """
    if rng is None:
        rng = np.random.default_rng()
    schedule = swap_schedule(plan)
    bag = StateBag(
        ghz_like(0, (t[0].name, t[1].name, t[2].name)) for t in plan.triples
    )
    log = execute_swap_phase(bag, schedule, rng, z_bits=z_bits, bell_outcomes=bell_outcomes)
    final = bag.joint(("a", "b"))
    if final.n_qubits != 2:
        raise PlanError(f"swap cascade left {final.n_qubits} qubits, expected the (a, b) pair")
    kind = classify_bell(final)
    if kind is None:
        raise PlanError("swap cascade did not terminate in a Bell state")
    return kind, log


def shared_pair_from_outcomes(plan: DistributionPlan, z_bits, bell_outcomes) -> BellKind:
    """Resolve the users' Bell pair from outcomes alone (no amplitudes).

    Every Z bit enters as the code it selects (0 -> phi+, 1 -> psi+) and
    every swap XORs in its own Bell outcome code.
    """
    schedule = swap_schedule(plan)
    z_bits = list(z_bits)
    bell_outcomes = list(bell_outcomes)
    if len(z_bits) != len(schedule.z_measurements):
        raise ValueError(f"need {len(schedule.z_measurements)} Z bits, got {len(z_bits)}")
    if len(bell_outcomes) != len(schedule.bell_measurements):
        raise ValueError(f"need {len(schedule.bell_measurements)} Bell outcomes, got {len(bell_outcomes)}")
    code = 0
    for bit in z_bits:
        if bit not in (0, 1):
            raise ValueError(f"Z bits must be 0/1, got {bit!r}")
        code ^= bit
    for kind in bell_outcomes:
        code ^= int(kind)
    return BellKind(code)


def _reference_block(first: BellKind, second: BellKind, third: BellKind, fourth: BellKind):
    return {BellKind(m): kind for m, kind in enumerate((first, second, third, fourth))}

_PP, _SP, _PM, _SM = BellKind.PHI_PLUS, BellKind.PSI_PLUS, BellKind.PHI_MINUS, BellKind.PSI_MINUS

# Reference outcome-to-pair mapping for the two- and three-controller
# cascades, keyed by (z bits in plan-triple order) then the C1 Bell outcome.
# These rows are the protocol's published truth table; tests and the
# table-verification command check simulation and the XOR resolver against
# them row by row.
SHARED_PAIR_REFERENCE: dict[int, dict[tuple[int, int], dict[BellKind, BellKind]]] = {
    2: {
        (0, 0): _reference_block(_PP, _SP, _PM, _SM),
        (0, 1): _reference_block(_SP, _PP, _SM, _PM),
        (1, 0): _reference_block(_SP, _PP, _SM, _PM),
        (1, 1): _reference_block(_PP, _SP, _PM, _SM),
    },
    3: {
        (0, 0): _reference_block(_PP, _SP, _PM, _SM),
        (1, 0): _reference_block(_SP, _PP, _SM, _PM),
        (0, 1): _reference_block(_SP, _PP, _SM, _PM),
        (1, 1): _reference_block(_PP, _SP, _PM, _SM),
    },
}
