"""Tour of the GHZ-like state family that carries the whole protocol.

Shows the eight orthonormal three-qubit states, the preparation circuit
(one qubit in |+>, a Bell pair, one CNOT), and the two correlation rules
the eavesdrop check relies on: a Z result on the third qubit picks which
Bell pair the other two collapse to, and X results on the first two
qubits always agree.
"""
import numpy as np

from cqsc.sim import BellKind, MeasureBasis, fidelity, measure
from cqsc.states import (
    GHZ_LABELS,
    bell,
    classify_bell,
    ghz_bits,
    ghz_collapse_kind,
    ghz_like,
    prepare_ghz_circuit,
)

rng = np.random.default_rng(2024)

print("=== the workhorse state ===")
state = ghz_like(0)
print("amplitudes over |abc>:")
for idx, amp in enumerate(state.amps):
    if abs(amp) > 1e-12:
        print(f"  |{idx:03b}>  {amp.real:+.3f}")

print("\n=== family orthonormality ===")
vectors = np.array([ghz_like(i).amps for i in GHZ_LABELS])
gram = vectors.conj() @ vectors.T
print("max |gram - identity| =", float(np.max(np.abs(gram - np.eye(8)))))

print("\n=== preparation circuit ===")
prepared = prepare_ghz_circuit()
print("fidelity(|+> x phi+ then CNOT, family member 0) =",
      round(fidelity(prepared, ghz_like(0)), 12))

print("\n=== Z collapse table (third qubit measured) ===")
for index in GHZ_LABELS:
    x, y, z = ghz_bits(index)
    row = []
    for outcome in (0, 1):
        _, post = measure(ghz_like(index), MeasureBasis("Z", ("c",)), rng,
                          forced=outcome)
        kind = classify_bell(post)
        assert kind == ghz_collapse_kind(index, outcome)
        row.append(f"{outcome} -> {kind.symbol}")
    print(f"  state {index} (bits {x}{y}{z}):  {',  '.join(row)}")

print("\n=== X-basis correlations of member 0 ===")
agree = 0
trials = 2000
for _ in range(trials):
    a, post = measure(ghz_like(0), MeasureBasis("X", ("a",)), rng)
    b, post = measure(post, MeasureBasis("X", ("b",)), rng)
    c, _ = measure(post, MeasureBasis("X", ("c",)), rng)
    agree += (a == b == c)
print(f"all three X outcomes agree in {agree}/{trials} trials")

print("\n=== dense-coding alphabet ===")
for kind in BellKind:
    print(f"  {kind.symbol:5s} code {kind.code}")
print("applying I/X/Z/iY to either qubit moves a Bell state to code XOR op")
