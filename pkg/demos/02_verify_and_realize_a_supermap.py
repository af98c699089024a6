"""Verify a deterministic supermap and realise it as a circuit.

A supermap eats a channel A -> B (as its Choi operator) and emits a channel
C -> D.  Deterministic means completely positive and sending trace-preserving
Choi operators to trace-preserving Choi operators.  Every such supermap is a
fixed circuit: copy the classical input, pre-process with a channel E into
A tensored with a memory B(P), plug in the transformed channel, post-process
with a channel G.  This script runs the whole pipeline and certifies the
result numerically.
"""

import supermap_forge as sf
from supermap_forge import gen

# channel types: classically controlled qubit pairs in, hybrid out
a = sf.MultiMatrixAlgebra((("i0", 2), ("i1", 1)))
b = sf.MultiMatrixAlgebra.single(2, "j")
c = sf.MultiMatrixAlgebra((("k0", 1), ("k1", 2)))
d = sf.MultiMatrixAlgebra((("l0", 2), ("l1", 1)))

s = gen.random_supermap_from_circuit(a, b, c, d, p_dim=2, seed=2024)
report = sf.verify_deterministic(s)
print("verification:", report.summary())

# The verifier is linear-algebraic; the brute-force oracle probes an affine
# spanning set of trace-preserving Choi operators and must agree.
basis = gen.tp_affine_basis(a, b)
print("brute-force oracle agrees:", gen.brute_force_tp_preservation(s, basis))

r = sf.realize(s)
print("realisation:", r.summary())
print("E type:", r.e_channel.source.dims, "->", r.e_channel.target.dims)
print("G type:", r.g_channel.source.dims, "->", r.g_channel.target.dims)

# Certify: the circuit's action agrees with the supermap on a full spanning
# set of Hom(A, B) and on randomly drawn plugged channels.
check = sf.check_realisation(r, s, trials=5, tol=1e-6, seed=7)
print("certificate:", check.summary())

# Evaluate the circuit at one concrete channel and compare Choi operators.
f = gen.random_channel(a, b, seed=5)
out = sf.evaluate_circuit(r, f)
target = sf.cpmap_from_element(
    sf.apply_to_choi(s, sf.choi_element(f, s.source_hom)), s.target_hom
)
print("single-channel deviation:", out.choi_distance(target))
