# Preparing the flux-free ground state by projective plaquette measurements.
#
# Hadamards put every link in the uniform superposition; a CNOT ladder then
# writes each plaquette's parity onto an ancilla, which is collapsed to 0.
# What survives is the equal-weight superposition of all configurations
# with Z_p = -1 on every plaquette: a topologically ordered state.

import numpy as np

from z2sim import circuits, lattice as lt, observables as obs
from z2sim.statevector import StateVector

lat = lt.build(2, 3)
state = StateVector.init_zero(lat.num_links + 1)  # 18 links + 1 work ancilla
circuits.prepare_z_ground(state, lat, ancilla=lat.num_links, mode="gate")

nonzero = np.abs(state.amplitudes) > 1e-14
print("surviving basis states:", int(nonzero.sum()))  # 2^(18-8) = 1024
print("<Z> =", obs.expect_plaquette_sum(state, lat))  # -9: every plaquette at -1
print("<X> =", obs.expect_transverse_sum(state, lat))
print("gauss residual:", obs.gauss_residual(state, lat))
print("'t Hooft labels:", obs.thooft_values(state, lat))

# Winding a Wilson operator moves the state to another topological sector
# without costing any energy at zero coupling.
circuits.apply_wilson(state, lt.noncontractible_loop(lat, 0))
print("after W_x:", obs.thooft_values(state, lat))
print("<Z> unchanged:", obs.expect_plaquette_sum(state, lat))

# The dual starting point: every link along +x, the strong-coupling ground state
xstate = StateVector.init_zero(lat.num_links)
circuits.prepare_x_ground(xstate, lat)
print("<X> of the transverse ground state:", obs.expect_transverse_sum(xstate, lat))
