# Dense state-vector registers and the gate set.
#
# Every circuit in the package is built from four gates (H, Rx, Rz, CNOT)
# acting on a register of 2^n complex amplitudes, with qubit q stored as
# bit q of the amplitude index.

import numpy as np

from z2sim.statevector import GateOp, StateVector

# A Bell pair from scratch
sv = StateVector.init_zero(2)
sv.apply_gate(GateOp("h", 0))
sv.apply_gate(GateOp("cnot", target=1, control=0))
print("Bell amplitudes:", np.round(sv.amplitudes, 6))
print("norm:", sv.norm())

# Forced measurement: collapse qubit 0 to |1> and renormalize
sv.collapse(0, 1)
print("after collapse:", np.round(sv.amplitudes, 6))

# sigma_z products over arbitrary qubit sets are the workhorse observable
sv = StateVector.init_zero(3)
for q in range(3):
    sv.apply_h(q)
sv.apply_rx(1, np.pi)  # flip qubit 1 through the x axis
print("<Z0 Z1> on |+,1,+>:", sv.expect_z_mask_product({0, 1}))

# Diagonal fast path: a parity-conditioned phase without any ancilla
sv = StateVector.init_zero(4)
sv.phase_on_parity([0, 1, 2, 3], theta=0.25)
print("phase on |0000> (even parity):", sv.amplitudes[0])
