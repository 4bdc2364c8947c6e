"""Distribution plans, swap schedules, swapping runs, and the XOR resolver."""
import numpy as np
import pytest
from scipy import stats

from cqsc.multictrl import (
    SHARED_PAIR_REFERENCE,
    DistributionPlan,
    ParticleTag,
    PlanError,
    distribution_plan,
    run_swapping,
    shared_pair_from_outcomes,
    swap_schedule,
)
from cqsc.sim import BellKind

CHI2_4SIGMA_3DOF = stats.chi2.isf(2 * stats.norm.sf(4), 3)


def names(plan):
    return [[t.name for t in triple] for triple in plan.triples]


# ---------------------------------------------------------------------------
# plans
# ---------------------------------------------------------------------------

def test_plan_one_controller_degenerates_to_single_triple():
    plan = distribution_plan(1)
    assert names(plan) == [["a", "b", "c"]]
    assert plan.holders == {"a": "Alice", "b": "Bob", "c": "C1"}


def test_plan_two_controllers():
    plan = distribution_plan(2)
    assert names(plan) == [["p'1", "a", "p'2"], ["p1", "b", "p2"]]
    assert plan.holders["p'2"] == "C2"
    assert plan.holders["a"] == "Alice"


def test_plan_three_controllers():
    plan = distribution_plan(3)
    assert names(plan) == [["p'1", "a", "p2"], ["p1", "b", "p3"]]


def test_plan_four_controllers():
    plan = distribution_plan(4)
    assert names(plan) == [["p'2", "p'1", "p'3"], ["p2", "a", "p3"], ["p1", "b", "p4"]]


def test_plan_five_controllers():
    plan = distribution_plan(5)
    assert names(plan) == [["p'2", "p'1", "p3"], ["p2", "a", "p4"], ["p1", "b", "p5"]]


def test_plan_counts_up_to_thirty_two():
    for n in range(1, 33):
        plan = distribution_plan(n)
        want = (n + 1) // 2 if n % 2 else (n + 2) // 2
        assert len(plan.triples) == want, n


def test_plan_holder_coverage_and_tag_uniqueness():
    for n in range(1, 33):
        plan = distribution_plan(n)
        all_names = [t.name for t in plan.all_tags]
        assert len(set(all_names)) == len(all_names)
        holders = set(plan.holders.values())
        assert {"Alice", "Bob"} <= holders
        assert all(f"C{k}" in holders for k in range(1, n + 1))
        roles = sorted(t.role for t in plan.all_tags if t.role in ("a", "b"))
        assert roles == ["a", "b"]


def test_plan_substitution_leaves_no_placeholder_indices():
    for n in range(2, 20):
        for tag in distribution_plan(n).all_tags:
            if tag.role is None:
                assert tag.index >= 1


def test_plan_rejects_zero_controllers():
    with pytest.raises(ValueError):
        distribution_plan(0)


def test_plan_validate_catches_missing_user():
    bad = DistributionPlan(1, ((ParticleTag(role="a"), ParticleTag(index=1),
                                ParticleTag(role="c", index=1)),))
    with pytest.raises(PlanError):
        bad.validate()


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

def test_schedule_two_controllers():
    sched = swap_schedule(distribution_plan(2))
    assert [(h, t.name) for h, t in sched.z_measurements] == [("C2", "p'2"), ("C2", "p2")]
    assert [(h, (p[0].name, p[1].name)) for h, p in sched.bell_measurements] == [("C1", ("p'1", "p1"))]


def test_schedule_three_controllers():
    sched = swap_schedule(distribution_plan(3))
    assert [(h, t.name) for h, t in sched.z_measurements] == [("C2", "p2"), ("C3", "p3")]
    assert [h for h, _ in sched.bell_measurements] == ["C1"]


def test_schedule_five_controllers_orders_bells_downward():
    sched = swap_schedule(distribution_plan(5))
    assert [h for h, _ in sched.z_measurements] == ["C3", "C4", "C5"]
    assert [h for h, _ in sched.bell_measurements] == ["C2", "C1"]
    for holder, pair in sched.bell_measurements:
        k = holder[1:]
        assert {pair[0].name, pair[1].name} == {f"p'{k}", f"p{k}"}


def test_schedule_one_controller_has_no_bell_measurements():
    sched = swap_schedule(distribution_plan(1))
    assert [(h, t.name) for h, t in sched.z_measurements] == [("C1", "c")]
    assert sched.bell_measurements == ()


# ---------------------------------------------------------------------------
# reference tables (forced-outcome simulation + resolver, row by row)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_reference_outcome_tables(n):
    rng = np.random.default_rng(0)
    plan = distribution_plan(n)
    checked = 0
    for z_bits, block in SHARED_PAIR_REFERENCE[n].items():
        for outcome, expected in block.items():
            simulated, log = run_swapping(plan, rng, z_bits=list(z_bits),
                                          bell_outcomes=[outcome])
            resolved = shared_pair_from_outcomes(plan, log.z_bits, log.bell_outcomes)
            assert simulated == expected, (z_bits, outcome)
            assert resolved == expected, (z_bits, outcome)
            checked += 1
    assert checked == 16


def test_reference_table_spot_rows():
    plan2 = distribution_plan(2)
    # C2 measured (p'2, p2) = (0, 0) and C1 found phi+ -> shared pair phi+
    kind, _ = run_swapping(plan2, np.random.default_rng(1), z_bits=[0, 0],
                           bell_outcomes=[BellKind.PHI_PLUS])
    assert kind == BellKind.PHI_PLUS
    # (0, 1) with phi+ -> psi+
    kind, _ = run_swapping(plan2, np.random.default_rng(1), z_bits=[0, 1],
                           bell_outcomes=[BellKind.PHI_PLUS])
    assert kind == BellKind.PSI_PLUS
    # three controllers: p2 (C2) = 1, p3 (C3) = 0, C1 found psi- -> phi-
    plan3 = distribution_plan(3)
    kind, _ = run_swapping(plan3, np.random.default_rng(1), z_bits=[1, 0],
                           bell_outcomes=[BellKind.PSI_MINUS])
    assert kind == BellKind.PHI_MINUS


# ---------------------------------------------------------------------------
# swapping runs
# ---------------------------------------------------------------------------

def test_swap_always_terminates_in_bell_state_and_resolver_agrees():
    for n in range(1, 9):
        plan = distribution_plan(n)
        rng = np.random.default_rng(100 + n)
        for _ in range(60):
            kind, log = run_swapping(plan, rng)
            assert kind == shared_pair_from_outcomes(plan, log.z_bits, log.bell_outcomes)


def test_swap_outcome_distribution_is_uniform():
    plan = distribution_plan(3)
    rng = np.random.default_rng(7)
    counts = np.zeros(4)
    trials = 4000
    for _ in range(trials):
        kind, _ = run_swapping(plan, rng)
        counts[int(kind)] += 1
    chi2 = float(np.sum((counts - trials / 4) ** 2 / (trials / 4)))
    assert chi2 < CHI2_4SIGMA_3DOF


def test_six_controller_resolver_matches_simulation_on_forced_records():
    plan = distribution_plan(6)
    sched = swap_schedule(plan)
    rng = np.random.default_rng(3)
    for _ in range(40):
        z = [int(rng.integers(2)) for _ in sched.z_measurements]
        bells = [BellKind(int(rng.integers(4))) for _ in sched.bell_measurements]
        kind, log = run_swapping(plan, rng, z_bits=z, bell_outcomes=bells)
        assert log.z_bits == z and log.bell_outcomes == bells
        assert kind == shared_pair_from_outcomes(plan, z, bells)


def test_resolver_validates_record_lengths():
    plan = distribution_plan(3)
    with pytest.raises(ValueError):
        shared_pair_from_outcomes(plan, [0], [BellKind.PHI_PLUS])
    with pytest.raises(ValueError):
        shared_pair_from_outcomes(plan, [0, 1], [])
    with pytest.raises(ValueError):
        shared_pair_from_outcomes(plan, [0, 2], [BellKind.PHI_PLUS])
