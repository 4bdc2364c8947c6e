"""Protocol phases: checks, release, scramble, encode, decoys, decode."""
import numpy as np
import pytest
from scipy import stats

from cqsc.protocol import (
    DecoyPhoton,
    PauliOp,
    PositionSim,
    ProtocolConfig,
    ProtocolError,
    alice_encode,
    bob_decode,
    bob_scramble,
    controller_release,
    decoy_check,
    distribute,
    efficiency,
    first_eavesdrop_check,
    ghz_rule_holds,
    run_cqsc,
)
from cqsc.sim import BellKind, Gate, StateBag, apply_gate
from cqsc.states import bell, classify_bell, ghz_like

CHI2_4SIGMA_3DOF = stats.chi2.isf(2 * stats.norm.sf(4), 3)


def pair_kind(pos):
    return classify_bell(pos.bag.joint(("a", "b")))


def fresh_positions(n, rng=None, config=None):
    config = config or ProtocolConfig(n_triples=n)
    return distribute(config, rng or np.random.default_rng(0))


# ---------------------------------------------------------------------------
# encoding table and config
# ---------------------------------------------------------------------------

def test_pauli_message_codes():
    assert PauliOp.I.message == "00"
    assert PauliOp.X.message == "01"
    assert PauliOp.Z.message == "10"
    assert PauliOp.IY.message == "11"
    for op in PauliOp:
        assert PauliOp.from_message(op.message) == op


def test_config_validation():
    with pytest.raises(ValueError):
        ProtocolConfig(n_triples=0)
    with pytest.raises(ValueError):
        ProtocolConfig(n_triples=4, check_fraction=1.0)
    with pytest.raises(ValueError):
        ProtocolConfig(n_triples=4, n_decoys=-1)


# ---------------------------------------------------------------------------
# distribution and first check
# ---------------------------------------------------------------------------

def test_distribute_prepares_exact_ghz_states():
    positions = fresh_positions(3)
    from cqsc.sim import fidelity
    for pos in positions:
        st = pos.bag.joint(("a", "b", "c"))
        assert fidelity(st, ghz_like(0, st.labels)) > 1 - 1e-9


def test_distribute_release_branch_classifies_as_phi_plus():
    rng = np.random.default_rng(1)
    positions = fresh_positions(1, rng)
    controller_release(positions, rng, forced_bits=[0])
    assert pair_kind(positions[0]) == BellKind.PHI_PLUS


def test_rule_table():
    assert ghz_rule_holds(0, 0, 0, "Z") and ghz_rule_holds(1, 1, 0, "Z")
    assert ghz_rule_holds(0, 1, 1, "Z") and not ghz_rule_holds(0, 1, 0, "Z")
    assert ghz_rule_holds(0, 0, 0, "X") and ghz_rule_holds(1, 1, 1, "X")
    assert not ghz_rule_holds(0, 1, 0, "X")
    with pytest.raises(ValueError):
        ghz_rule_holds(0, 0, 0, "BELL")


def test_first_check_is_clean_without_attacker():
    rng = np.random.default_rng(2)
    config = ProtocolConfig(n_triples=400, check_fraction=0.5)
    positions = distribute(config, rng)
    rate, survivors, detail = first_eavesdrop_check(positions, config, rng)
    assert rate == 0.0
    assert detail["z_violations"] == detail["x_violations"] == 0
    assert len(survivors) == 400 - config.check_samples


def test_first_check_sampling_count():
    config = ProtocolConfig(n_triples=10, check_fraction=0.3)
    rng = np.random.default_rng(3)
    positions = distribute(config, rng)
    _, survivors, detail = first_eavesdrop_check(positions, config, rng)
    assert detail["z_samples"] + detail["x_samples"] == 3
    assert len(survivors) == 7


# ---------------------------------------------------------------------------
# release
# ---------------------------------------------------------------------------

def test_release_forced_bits_select_advertised_pairs():
    rng = np.random.default_rng(4)
    positions = fresh_positions(2, rng)
    codes = controller_release(positions, rng, forced_bits=[0, 1])
    assert codes == [0, 1]
    assert pair_kind(positions[0]) == BellKind.PHI_PLUS
    assert pair_kind(positions[1]) == BellKind.PSI_PLUS


def test_release_bit_frequency_is_balanced():
    rng = np.random.default_rng(5)
    n = 10_000
    positions = fresh_positions(n, rng, ProtocolConfig(n_triples=n))
    codes = controller_release(positions, rng)
    zeros = codes.count(0)
    assert abs(zeros / n - 0.5) < 0.02


# ---------------------------------------------------------------------------
# scramble and encode
# ---------------------------------------------------------------------------

def test_scramble_transformations_match_pair_algebra():
    rng = np.random.default_rng(6)
    positions = fresh_positions(3, rng)
    controller_release(positions, rng, forced_bits=[0, 1, 0])  # phi+, psi+, phi+
    bob_scramble(positions, rng, ops=[PauliOp.X, PauliOp.I, PauliOp.Z])
    assert pair_kind(positions[0]) == BellKind.PSI_PLUS
    assert pair_kind(positions[1]) == BellKind.PSI_PLUS
    assert pair_kind(positions[2]) == BellKind.PHI_MINUS


def test_scramble_disabled_applies_identity():
    rng = np.random.default_rng(7)
    positions = fresh_positions(2, rng)
    controller_release(positions, rng, forced_bits=[0, 0])
    ops = bob_scramble(positions, rng, enabled=False)
    assert all(op == PauliOp.I for op in ops)
    assert pair_kind(positions[0]) == BellKind.PHI_PLUS


def test_encode_chunk_operations_and_worked_pair_sequence():
    rng = np.random.default_rng(8)
    config = ProtocolConfig(n_triples=3, n_decoys=0)
    positions = fresh_positions(3, rng, config)
    controller_release(positions, rng, forced_bits=[0, 1, 0])
    bob_scramble(positions, rng, ops=[PauliOp.X, PauliOp.I, PauliOp.Z])
    items, decoys, ops = alice_encode("100101", positions, config, rng)
    assert ops == [PauliOp.Z, PauliOp.X, PauliOp.X]
    assert [pair_kind(p) for p in positions] == [
        BellKind.PSI_MINUS, BellKind.PHI_PLUS, BellKind.PSI_MINUS]
    assert decoys == [] and len(items) == 3


def test_encode_rejects_bad_messages():
    rng = np.random.default_rng(9)
    config = ProtocolConfig(n_triples=2)
    positions = fresh_positions(2, rng, config)
    with pytest.raises(ValueError):
        alice_encode("101", positions, config, rng)
    with pytest.raises(ValueError):
        alice_encode("12", positions, config, rng)
    with pytest.raises(ValueError):
        alice_encode("010101", positions, config, rng)  # needs 3 pairs


def test_encode_inserts_decoys_at_sampled_slots():
    rng = np.random.default_rng(10)
    config = ProtocolConfig(n_triples=2, n_decoys=5)
    positions = fresh_positions(2, rng, config)
    controller_release(positions, rng)
    bob_scramble(positions, rng)
    items, decoys, _ = alice_encode("0110", positions, config, rng)
    assert len(items) == 7 and len(decoys) == 5
    assert [i.kind for i in items].count("decoy") == 5
    for item, decoy in zip((i for i in items if i.kind == "decoy"), decoys):
        assert item.decoy is decoy
        assert decoy.symbol in "01+-"


# ---------------------------------------------------------------------------
# decoy check
# ---------------------------------------------------------------------------

def test_decoy_check_clean_channel():
    rng = np.random.default_rng(11)
    config = ProtocolConfig(n_triples=2, n_decoys=50)
    positions = fresh_positions(2, rng, config)
    controller_release(positions, rng)
    bob_scramble(positions, rng)
    items, decoys, _ = alice_encode("0110", positions, config, rng)
    rate, message_positions, detail = decoy_check(items, decoys, rng)
    assert rate == 0.0
    assert detail == {"checked": 50, "mismatches": 0}
    assert message_positions == positions


def test_decoy_check_requires_disclosure():
    rng = np.random.default_rng(12)
    config = ProtocolConfig(n_triples=2, n_decoys=3)
    positions = fresh_positions(2, rng, config)
    controller_release(positions, rng)
    bob_scramble(positions, rng)
    items, _, _ = alice_encode("01", positions, config, rng)
    with pytest.raises(ProtocolError):
        decoy_check(items, None, rng)


def test_decoy_expected_bits():
    assert DecoyPhoton(0, "0").basis == "Z" and DecoyPhoton(0, "0").expected_bit == 0
    assert DecoyPhoton(0, "-").basis == "X" and DecoyPhoton(0, "-").expected_bit == 1


# ---------------------------------------------------------------------------
# decode
# ---------------------------------------------------------------------------

def test_roundtrip_all_thirtytwo_cases():
    # release bit x scramble x encode, all deterministic, no sampling
    rng = np.random.default_rng(13)
    for release_bit in (0, 1):
        for scramble in PauliOp:
            for encode in PauliOp:
                config = ProtocolConfig(n_triples=1, n_decoys=0)
                positions = fresh_positions(1, rng, config)
                controller_release(positions, rng, forced_bits=[release_bit])
                bob_scramble(positions, rng, ops=[scramble])
                items, decoys, _ = alice_encode(encode.message, positions, config, rng)
                _, message_positions, _ = decoy_check(items, decoys, rng)
                _, decoded = bob_decode(message_positions, rng)
                assert decoded == encode.message, (release_bit, scramble, encode)


def test_worked_six_bit_walkthrough():
    rng = np.random.default_rng(14)
    config = ProtocolConfig(n_triples=3, n_decoys=0)
    positions = fresh_positions(3, rng, config)
    bits = controller_release(positions, rng, forced_bits=[0, 1, 0])
    assert bits == [0, 1, 0]
    bob_scramble(positions, rng, ops=[PauliOp.X, PauliOp.I, PauliOp.Z])
    items, decoys, _ = alice_encode("100101", positions, config, rng)
    _, message_positions, _ = decoy_check(items, decoys, rng)
    kinds, decoded = bob_decode(message_positions, rng)
    assert kinds == [BellKind.PSI_MINUS, BellKind.PHI_PLUS, BellKind.PSI_MINUS]
    assert "".join(k.code for k in kinds) == "110011"
    assert decoded == "100101"


def test_decode_all_identity_gives_zeros():
    rng = np.random.default_rng(15)
    config = ProtocolConfig(n_triples=2, n_decoys=0)
    positions = fresh_positions(2, rng, config)
    controller_release(positions, rng, forced_bits=[0, 0])
    bob_scramble(positions, rng, ops=[PauliOp.I, PauliOp.I])
    items, decoys, _ = alice_encode("0000", positions, config, rng)
    _, message_positions, _ = decoy_check(items, decoys, rng)
    _, decoded = bob_decode(message_positions, rng)
    assert decoded == "0000"


def test_decode_requires_bookkeeping():
    pos = PositionSim(index=0, bag=StateBag([bell(BellKind.PHI_PLUS, ("a", "b"))]))
    with pytest.raises(ProtocolError):
        bob_decode([pos], np.random.default_rng(0))


def test_random_roundtrips_always_decode():
    rng = np.random.default_rng(16)
    for _ in range(200):
        n_bits = 2 * int(rng.integers(1, 4))
        message = "".join(str(b) for b in rng.integers(0, 2, size=n_bits))
        config = ProtocolConfig(n_triples=n_bits // 2, n_decoys=2)
        positions = distribute(config, rng)
        controller_release(positions, rng)
        bob_scramble(positions, rng)
        items, decoys, _ = alice_encode(message, positions, config, rng)
        _, message_positions, _ = decoy_check(items, decoys, rng)
        _, decoded = bob_decode(message_positions, rng)
        assert decoded == message


# ---------------------------------------------------------------------------
# efficiency
# ---------------------------------------------------------------------------

def test_efficiency_values():
    assert efficiency(2, 3, 1) == 0.5
    assert efficiency(2, 2, 0) == 1.0
    assert efficiency(0, 3, 1) == 0.0
    with pytest.raises(ValueError):
        efficiency(2, 0, 0)


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

def test_full_run_decodes_exactly_without_attacker():
    config = ProtocolConfig(n_triples=10, seed=99)
    transcript = run_cqsc(config, "11011000")
    assert transcript.aborted_at is None
    assert transcript.decoded_message == "11011000"
    assert transcript.first_check_error_rate == 0.0
    assert transcript.decoy_error_rate == 0.0
    assert len(transcript.bell_results) == 4
    assert len(transcript.charlie_bits) == 10 - config.check_samples


def test_full_run_empty_message():
    transcript = run_cqsc(ProtocolConfig(n_triples=2, seed=1), "")
    assert transcript.decoded_message == ""
    assert transcript.aborted_at is None


def test_full_run_multi_controller_decodes():
    for n in (2, 3, 4):
        transcript = run_cqsc(ProtocolConfig(n_triples=6, seed=n), "1001", n_controllers=n)
        assert transcript.aborted_at is None
        assert transcript.decoded_message == "1001"
        assert transcript.charlie_bits is None
        assert all(0 <= c <= 3 for c in transcript.release_codes)


def test_full_run_rejects_undersized_configs():
    with pytest.raises(ValueError):
        run_cqsc(ProtocolConfig(n_triples=2, seed=0), "110110")
    with pytest.raises(ValueError):
        run_cqsc(ProtocolConfig(n_triples=4, seed=0), "1:0")
    with pytest.raises(ValueError):
        run_cqsc(ProtocolConfig(n_triples=4, seed=0), "101")


def test_full_run_is_deterministic_per_seed():
    config = ProtocolConfig(n_triples=8, seed=12345)
    first = run_cqsc(config, "100101").to_dict()
    second = run_cqsc(config, "100101").to_dict()
    assert first == second


def test_transcript_classical_channel_discipline():
    transcript = run_cqsc(ProtocolConfig(n_triples=6, seed=5), "1010")
    releases = transcript.events_of("release")
    assert releases and all(e.recipient == "Bob" for e in releases)
    assert not any(e.recipient == "Alice" for e in releases)
    confirm = [e.seq for e in transcript.events_of("receipt_confirmation")]
    disclose = [e.seq for e in transcript.events_of("decoy_disclosure")]
    assert confirm and disclose and max(confirm) < min(disclose)


def test_transcript_multi_controller_keeps_final_swap_private():
    transcript = run_cqsc(ProtocolConfig(n_triples=4, seed=6), "10", n_controllers=3)
    bells = transcript.events_of("swap_bell_result")
    assert bells and all(e.recipient == "Bob" for e in bells if e.sender == "C1")
    zs = transcript.events_of("swap_z_result")
    assert zs and all(e.recipient == "public" for e in zs)


def test_abort_leaves_downstream_fields_unset():
    from cqsc.adversary import AttackKind, AttackStrategy
    config = ProtocolConfig(n_triples=60, seed=2, error_threshold=0.05)
    transcript = run_cqsc(config, "1001", attacker=AttackStrategy(AttackKind.MEASURE_RESEND))
    assert transcript.aborted_at == "first_check"
    assert transcript.first_check_error_rate > 0.05
    for field in (transcript.charlie_bits, transcript.bob_scramble_ops,
                  transcript.alice_encode_ops, transcript.decoy_error_rate,
                  transcript.bell_results, transcript.decoded_message):
        assert field is None


# ---------------------------------------------------------------------------
# blindness properties
# ---------------------------------------------------------------------------

def _uniformity_chi2(counts, trials):
    expected = trials / 4
    return float(sum((c - expected) ** 2 / expected for c in counts))


def test_controller_blindness_post_scramble():
    # given the released bit, the scrambled pair is uniform over all four kinds
    rng = np.random.default_rng(17)
    trials = 4000
    for release_bit in (0, 1):
        counts = [0, 0, 0, 0]
        for _ in range(trials):
            positions = [PositionSim(index=0, bag=StateBag([ghz_like(0)]))]
            controller_release(positions, rng, forced_bits=[release_bit])
            bob_scramble(positions, rng)
            counts[int(pair_kind(positions[0]))] += 1
        assert _uniformity_chi2(counts, trials) < CHI2_4SIGMA_3DOF, release_bit


def test_encode_result_uniform_given_op():
    # with a uniform scramble, the post-encode kind carries nothing about the op
    rng = np.random.default_rng(18)
    trials = 4000
    for op in PauliOp:
        counts = [0, 0, 0, 0]
        for _ in range(trials):
            pos = PositionSim(index=0, bag=StateBag([ghz_like(0)]))
            controller_release([pos], rng)
            bob_scramble([pos], rng)
            pos.bag.apply(Gate(op.gate_kind, "a"))
            counts[int(pair_kind(pos))] += 1
        assert _uniformity_chi2(counts, trials) < CHI2_4SIGMA_3DOF, op
