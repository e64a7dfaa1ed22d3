"""Gate-level building blocks: plaquette evolution, transverse sweeps,
ground-state preparation, Wilson operators, conditional evolution and
iterative phase estimation.

Register layout convention: qubits [0, N_l) are the links, qubit N_l (when
allocated) is the work ancilla, and any further qubit is the phase-
estimation control. Two circuit modes exist for every diagonal operation:

  "gate"   the literal one- and two-qubit gate sequence (CNOT ladders onto
           the ancilla around an Rz);
  "fused"  an equivalent diagonal kernel acting on the links only.

Both must agree to 1e-12; the fused path is the production default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import lattice as lt
from .statevector import StateVector
from .tables import get_tables

MODES = ("gate", "fused")


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def default_ancilla(lat: lt.LatticeSpec) -> int:
    return lat.num_links


def _check_ancilla(lat, state, ancilla, plaquette=()):
    if ancilla is None:
        raise ValueError("gate mode needs an ancilla qubit")
    if not lat.num_links <= ancilla < state.num_qubits:
        raise ValueError(f"ancilla {ancilla} must be a non-link qubit of the register")
    if ancilla in plaquette:
        raise ValueError("ancilla overlaps the plaquette")


def evolve_plaquette(
    state: StateVector,
    lat: lt.LatticeSpec,
    plaquette: Sequence[int],
    theta: float,
    ancilla: Optional[int] = None,
    mode: str = "fused",
) -> StateVector:
    """exp(-i * Z_plaq * theta) with Z_plaq = -prod sigma_z over the 4 links.

    Applies phase e^{+i theta} to even-parity link configurations and
    e^{-i theta} to odd ones. In gate mode the parity is accumulated on the
    ancilla by a CNOT ladder around Rz(-2 theta); an ancilla prepared in
    |1> yields the reversed evolution exp(+i Z_plaq theta).
    """
    _check_mode(mode)
    if mode == "fused":
        state.phase_on_parity(plaquette, theta)
        return state
    _check_ancilla(lat, state, ancilla, plaquette)
    for q in plaquette:
        state.apply_cnot(q, ancilla)
    state.apply_rz(ancilla, -2.0 * theta)
    for q in reversed(plaquette):
        state.apply_cnot(q, ancilla)
    return state


def evolve_plaquette_sum(
    state: StateVector,
    lat: lt.LatticeSpec,
    dt: float,
    ancilla: Optional[int] = None,
    mode: str = "fused",
) -> StateVector:
    """exp(-i * Z * dt) over all plaquettes (ascending canonical order).

    The fused path applies the whole diagonal in one lookup against the
    per-index flux count; plaquette factors commute, so it equals the
    plaquette-by-plaquette product.
    """
    _check_mode(mode)
    if mode == "fused":
        tab = get_tables(lat)
        state.phase_lookup(tab.flips, tab.z_phase_table(dt))
        return state
    for plaq in get_tables(lat).plaquettes:
        evolve_plaquette(state, lat, plaq, dt, ancilla, mode)
    return state


def evolve_transverse(state: StateVector, lat: lt.LatticeSpec, g: float, dt: float) -> StateVector:
    """exp(-i * g * X * dt) with X = -sum sigma_x: Rx(-2 g dt) on every link."""
    if not math.isfinite(dt):
        raise ValueError("dt must be finite")
    from .statevector import rx_matrix

    state.apply_1q_broadcast(range(lat.num_links), rx_matrix(-2.0 * g * dt))
    return state


def prepare_z_ground(
    state: StateVector,
    lat: lt.LatticeSpec,
    ancilla: Optional[int] = None,
    mode: str = "gate",
) -> StateVector:
    """Project a fresh register onto the flux-free sector.

    Hadamards put the links in the uniform superposition; each plaquette is
    then forced to even parity. Gate mode runs the ladder-measure-unladder
    circuit on the ancilla per plaquette; fused mode zeroes odd-parity
    amplitudes directly. The result is the equal-weight superposition of
    all constraint-satisfying configurations, an eigenstate of every
    't Hooft operator with eigenvalue +1.
    """
    _check_mode(mode)
    state.hadamard_all(range(lat.num_links))
    tab = get_tables(lat)
    if mode == "gate":
        _check_ancilla(lat, state, ancilla)
        for plaq in tab.plaquettes:
            for q in plaq:
                state.apply_cnot(q, ancilla)
            state.collapse(ancilla, 0)
            for q in reversed(plaq):
                state.apply_cnot(q, ancilla)
    else:
        n_rest = state.amplitudes.size // tab.flips.size
        view = state.amplitudes.reshape(n_rest, tab.flips.size)
        view[:, tab.flips != 0] = 0.0
        nrm = state.norm()
        if nrm < 1e-12:
            raise ValueError("projection annihilated the state; register was not fresh")
        state.amplitudes *= 1.0 / nrm
    return state


def prepare_x_ground(state: StateVector, lat: lt.LatticeSpec) -> StateVector:
    """All links to |+>: the transverse-field ground state."""
    state.hadamard_all(range(lat.num_links))
    return state


def apply_wilson(state: StateVector, loop: lt.LoopSpec) -> StateVector:
    """Multiply by prod sigma_z over the loop links (paired links cancel)."""
    state.apply_z_product(loop.links)
    return state


def conditional_substep(
    state: StateVector,
    lat: lt.LatticeSpec,
    g: float,
    dt: float,
    control: int,
    mode: str = "fused",
) -> StateVector:
    """One symmetric substep of exp(-i H dt), time-reversed on control=|1>.

    Gate mode realizes the direction flip with the ancilla trick: the
    control is copied onto the work ancilla so each plaquette Rz sees the
    reversed parity, and each link rotation is conjugated into a zz-phase
    with the control. Fused mode evolves the two control branches of the
    register in opposite time directions, which is the same block-diagonal
    unitary.
    """
    _check_mode(mode)
    if mode == "fused":
        if control != state.num_qubits - 1:
            raise ValueError("fused conditional evolution needs the control as top qubit")
        half = state.amplitudes.size // 2
        for sign, sub in ((1.0, state.amplitudes[:half]), (-1.0, state.amplitudes[half:])):
            branch = StateVector(control, sub.reshape(-1))
            evolve_plaquette_sum(branch, lat, sign * dt / 2.0, mode="fused")
            evolve_transverse(branch, lat, g, sign * dt)
            evolve_plaquette_sum(branch, lat, sign * dt / 2.0, mode="fused")
        return state

    ancilla = default_ancilla(lat)
    if control == ancilla or control < lat.num_links:
        raise ValueError("control must be distinct from links and the work ancilla")

    def z_half():
        state.apply_cnot(control, ancilla)
        for plaq in get_tables(lat).plaquettes:
            evolve_plaquette(state, lat, plaq, dt / 2.0, ancilla, mode="gate")
        state.apply_cnot(control, ancilla)

    def x_full():
        for q in range(lat.num_links):
            state.apply_h(q)
            state.apply_cnot(control, q)
            state.apply_rz(q, -2.0 * g * dt)
            state.apply_cnot(control, q)
            state.apply_h(q)

    z_half()
    x_full()
    z_half()
    return state


def conditional_evolution(
    state: StateVector,
    lat: lt.LatticeSpec,
    g: float,
    t: float,
    n_steps: int,
    control: int,
    mode: str = "fused",
) -> StateVector:
    """U(t) = |0><0| exp(-iHt) + |1><1| exp(+iHt), symmetric decomposition."""
    if n_steps < 1:
        raise ValueError("need at least one decomposition step")
    dt = t / n_steps
    for _ in range(n_steps):
        conditional_substep(state, lat, g, dt, control, mode)
    return state


@dataclass
class PhaseEstimate:
    energy: float
    resolution: float
    bits: tuple
    confidence: float  # product of the chosen-branch probabilities
    survival: float  # |<input|output>|^2 across the projective rounds
    flagged: bool  # low survival: the rounds pruned a multimodal input


def phase_estimate(
    state: StateVector,
    lat: lt.LatticeSpec,
    g: float,
    t: float,
    precision_bits: int,
    control: Optional[int] = None,
    n_steps: int = 16,
    mode: str = "fused",
    survival_floor: float = 0.9,
) -> PhaseEstimate:
    """Iterative single-ancilla estimation of the energy of an eigenstate.

    Bit k of the phase 2*E*t/(2*pi) is read from U(2^k t) with feedback of
    the previously determined lower bits; each round forces the likelier
    outcome. An eigenstate passes through the projective rounds unchanged
    up to phase, while a superposition of separated eigenvalues is pruned
    by the first collapse: the survival overlap |<in|out>|^2 drops and the
    result is flagged as multimodal. The duration must keep |E|*t below
    pi/2 so the folded phase identifies E. The register is mutated.
    """
    if precision_bits < 1:
        raise ValueError("need at least one bit")
    if control is None:
        control = state.num_qubits - 1
    e_max = lat.num_plaquettes + abs(g) * lat.num_links
    if e_max * t >= math.pi / 2.0:
        raise ValueError(
            f"t={t} risks phase wrapping: |E|t can reach {e_max * t:.2f} >= pi/2"
        )
    if state.prob_zero(control) < 1.0 - 1e-9:
        raise ValueError("control qubit must start in |0>")
    initial = state.amplitudes.copy()

    bits = []
    confidence = 1.0
    for k in range(precision_bits - 1, -1, -1):
        state.apply_h(control)
        conditional_evolution(state, lat, g, t * (1 << k), n_steps * (1 << k), control, mode)
        # feedback: unwind the already-determined lower bits
        tail = 0.0
        for j, b in enumerate(bits):
            tail += b / float(1 << (j + 2))
        if tail:
            state.apply_rz(control, -2.0 * math.pi * tail)
        state.apply_h(control)
        p0 = state.prob_zero(control)
        outcome = 0 if p0 >= 0.5 else 1
        confidence *= max(p0, 1.0 - p0)
        state.collapse(control, outcome)
        if outcome == 1:  # reset for the next round (global phase immaterial)
            state.apply_rx(control, math.pi)
        bits.insert(0, outcome)

    frac = 0.0
    for j, b in enumerate(bits):
        frac += b / float(1 << (j + 1))
    theta = 2.0 * math.pi * frac  # estimate of 2*E*t mod 2*pi
    if theta > math.pi:
        theta -= 2.0 * math.pi
    energy = theta / (2.0 * t)
    resolution = math.pi / (t * (1 << precision_bits))
    survival = float(abs(np.vdot(initial, state.amplitudes)) ** 2)
    return PhaseEstimate(
        energy=energy,
        resolution=resolution,
        bits=tuple(bits),
        confidence=confidence,
        survival=survival,
        flagged=survival < survival_floor,
    )
