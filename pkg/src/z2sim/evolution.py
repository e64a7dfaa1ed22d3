"""Adiabatic driver: stepwise coupling schedule, generalized asymmetric and
symmetric decompositions, closed-form error estimators, checkpoints.

The coupling ramps in N_s steps of g_s, each step split into n substeps of
duration t_s/n during which the coupling takes

    g(k, m) = (k-1) * g_s + m * g_s / n,   m = 1..n, k = 1..N_s

so a step ends exactly at g = k * g_s, where the driver pauses and hands
the register to the observer. The symmetric decomposition merges adjacent
half-steps inside a step, leaving a single leading and trailing half
plaquette factor.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import circuits, lattice as lt
from .statevector import StateVector

KINDS = ("asym", "sym")
DIRECTIONS = ("z-to-x", "x-to-z")


@dataclass(frozen=True)
class AdiabaticSchedule:
    g_final: float
    g_step: float
    t_step: float
    substeps: int
    kind: str = "sym"
    direction: str = "z-to-x"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.g_step <= 0 or self.t_step <= 0 or self.substeps < 1:
            raise ValueError("g_step, t_step must be positive, substeps >= 1")
        ratio = self.g_final / self.g_step
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("g_final must be an integral number of g_step increments")

    @property
    def num_steps(self) -> int:
        return int(round(self.g_final / self.g_step))

    @property
    def delta(self) -> float:
        return self.g_step / self.substeps

    @property
    def dt(self) -> float:
        return self.t_step / self.substeps

    def coupling(self, k: int, m: int) -> float:
        """Coupling of substep m (1-based) inside step k (1-based)."""
        return (k - 1) * self.g_step + m * self.delta

    def to_dict(self) -> dict:
        return {
            "g_final": self.g_final,
            "g_step": self.g_step,
            "t_step": self.t_step,
            "substeps": self.substeps,
            "kind": self.kind,
            "direction": self.direction,
        }


@dataclass(frozen=True)
class ErrorEstimate:
    """Closed-form decomposition-error totals (order-of-magnitude diagnostics).

    `total` keeps the sub-leading term of the estimator, `leading` is the
    dominant term alone, `per_substep_max` bounds the worst (final) substep.
    """

    total: float
    leading: float
    per_substep_max: float


def error_bound(schedule: AdiabaticSchedule, lat: lt.LatticeSpec, kind: Optional[str] = None) -> ErrorEstimate:
    """Evaluate the closed-form decomposition-error totals for a schedule."""
    kind = kind or schedule.kind
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    n_s = schedule.num_steps
    n = schedule.substeps
    g_s = schedule.g_step
    t_s = schedule.t_step
    n_p = lat.num_plaquettes
    g_f = schedule.g_final
    if kind == "asym":
        total = (n_s**2 + n_s / n) * n_p * g_s * t_s**2 / n
        leading = n_s**2 * n_p * g_s * t_s**2 / n
        per_sub = 2.0 * g_f * n_p * t_s**2 / n**2
    else:
        t3n2 = t_s**3 / n**2
        total = ((lat.d - 1) / 6.0 * n_s**2 * g_s + 4.0 / 9.0 * n_s**3 * g_s**2) * n_p * t3n2
        leading = 4.0 / 9.0 * n_s**3 * g_s**2 * n_p * t3n2
        per_sub = ((lat.d - 1) * g_f + 4.0 * g_f**2) / 3.0 * n_p * t_s**3 / n**3
    return ErrorEstimate(total=total, leading=leading, per_substep_max=per_sub)


@dataclass
class AdiabaticityReport:
    rate: float
    degenerate: bool
    checks: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.warnings and not self.degenerate


# Gap heuristics: 4 at weak coupling (vison pair), 8g deep in the strong
# phase, and ~0.5 generically for these small sizes near the transition.
GAP_WEAK = 4.0
GAP_GENERIC = 0.5


def adiabaticity_report(schedule, g_final: Optional[float] = None) -> AdiabaticityReport:
    """Compare the drive rate g_step/t_step against squared-gap heuristics.

    Accepts a schedule or a bare rate. Diagnostic only: emits warning
    flags, never aborts.
    """
    if isinstance(schedule, AdiabaticSchedule):
        rate = schedule.g_step / schedule.t_step
        g_final = schedule.g_final
    else:
        rate = float(schedule)
        g_final = 2.0 if g_final is None else g_final
    report = AdiabaticityReport(rate=rate, degenerate=rate == 0.0)
    if report.degenerate:
        report.warnings.append("degenerate schedule: zero coupling increment")
        return report
    gap_strong = 8.0 * g_final
    for name, gap in (
        ("weak_coupling", GAP_WEAK),
        ("strong_coupling", gap_strong),
        ("generic", GAP_GENERIC),
    ):
        passed = rate < gap**2
        report.checks[name] = {"gap": gap, "gap_sq": gap**2, "ok": passed}
        if not passed:
            report.warnings.append(
                f"drive rate {rate:g} is not below the squared {name} gap {gap**2:g}"
            )
    return report


def substep(
    state: StateVector,
    lat: lt.LatticeSpec,
    g: float,
    dt: float,
    kind: str = "sym",
    mode: str = "fused",
    ancilla: Optional[int] = None,
    dual: bool = False,
) -> StateVector:
    """One decomposition substep at fixed coupling.

    asym: exp(-iZ dt) exp(-igX dt); sym: the half-step-split version.
    With dual=True the roles swap: the Hamiltonian is X + gZ and the ramped
    coupling multiplies the plaquette part.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    gz, gx = (g, 1.0) if dual else (1.0, g)
    if kind == "asym":
        circuits.evolve_transverse(state, lat, gx, dt)
        circuits.evolve_plaquette_sum(state, lat, gz * dt, ancilla, mode)
    else:
        circuits.evolve_plaquette_sum(state, lat, gz * dt / 2.0, ancilla, mode)
        circuits.evolve_transverse(state, lat, gx, dt)
        circuits.evolve_plaquette_sum(state, lat, gz * dt / 2.0, ancilla, mode)
    return state


class ObserverError(RuntimeError):
    """Observer callback raised; carries the last completed step."""

    def __init__(self, step: int, checkpoint_path: Optional[str] = None):
        self.step = step
        self.checkpoint_path = checkpoint_path
        msg = f"observer failed after step {step}"
        if checkpoint_path:
            msg += f"; register checkpointed to {checkpoint_path}"
        super().__init__(msg)


def _run_step(state, lat, schedule, k, mode, ancilla):
    """All n substeps of step k, with merged half-steps for the symmetric kind."""
    n = schedule.substeps
    dt = schedule.dt
    dual = schedule.direction == "x-to-z"

    def z_factor(tau):
        circuits.evolve_plaquette_sum(state, lat, tau, ancilla, mode)

    def x_factor(g, tau):
        circuits.evolve_transverse(state, lat, g, tau)

    if schedule.kind == "asym":
        for m in range(1, n + 1):
            g = schedule.coupling(k, m)
            if dual:
                z_factor(g * dt)
                x_factor(1.0, dt)
            else:
                x_factor(g, dt)
                z_factor(dt)
        return
    if dual:
        # half x, alternate, half x -- mirrored roles
        x_factor(1.0, dt / 2.0)
        for m in range(1, n):
            z_factor(schedule.coupling(k, m) * dt)
            x_factor(1.0, dt)
        z_factor(schedule.coupling(k, n) * dt)
        x_factor(1.0, dt / 2.0)
    else:
        z_factor(dt / 2.0)
        for m in range(1, n):
            x_factor(schedule.coupling(k, m), dt)
            z_factor(dt)
        x_factor(schedule.coupling(k, n), dt)
        z_factor(dt / 2.0)


def run_adiabatic(
    state: StateVector,
    lat: lt.LatticeSpec,
    schedule: AdiabaticSchedule,
    observer: Optional[Callable] = None,
    mode: str = "fused",
    ancilla: Optional[int] = None,
    start_step: int = 0,
    checkpoint_path: Optional[str] = None,
    checkpoint_every: Optional[int] = None,
) -> list:
    """Execute the ramp, pausing after every step for the observer.

    The observer is called as observer(k, g, state) with g = k * g_step;
    non-None returns are collected and returned. start_step > 0 resumes a
    checkpointed register. If a checkpoint path is configured, the register
    is saved every checkpoint_every steps and on observer failure.
    """
    series = []
    for k in range(start_step + 1, schedule.num_steps + 1):
        _run_step(state, lat, schedule, k, mode, ancilla)
        if observer is not None:
            try:
                rec = observer(k, k * schedule.g_step, state)
            except Exception as exc:
                if checkpoint_path:
                    save_checkpoint(checkpoint_path, lat, schedule, k, state)
                raise ObserverError(k, checkpoint_path) from exc
            if rec is not None:
                series.append(rec)
        if checkpoint_path and checkpoint_every and k % checkpoint_every == 0:
            save_checkpoint(checkpoint_path, lat, schedule, k, state)
    return series


# -- checkpoint file format -------------------------------------------------
#
# header: magic "Z2CKPT" + version u16 + d u16 + L u16 + num_qubits u16 +
#         step u32 + kind/direction bytes + g_final/g_step/t_step f64 +
#         substeps u32, little-endian throughout; then the raw amplitude
#         array as interleaved (re, im) float64 pairs.

_MAGIC = b"Z2CKPT"
_VERSION = 1
_HEADER = struct.Struct("<6sHHHHIBBdddI")


class CheckpointError(Exception):
    pass


def save_checkpoint(path, lat: lt.LatticeSpec, schedule: AdiabaticSchedule, step: int, state: StateVector):
    header = _HEADER.pack(
        _MAGIC,
        _VERSION,
        lat.d,
        lat.L,
        state.num_qubits,
        step,
        KINDS.index(schedule.kind),
        DIRECTIONS.index(schedule.direction),
        schedule.g_final,
        schedule.g_step,
        schedule.t_step,
        schedule.substeps,
    )
    buf = np.ascontiguousarray(state.amplitudes, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(buf.tobytes())


def load_checkpoint(path):
    """Returns (lat, schedule, step, state); byte-exact inverse of save."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise CheckpointError("truncated checkpoint header")
        (magic, version, d, L, num_qubits, step, kind_i, dir_i, g_final, g_step, t_step, substeps) = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise CheckpointError("not a checkpoint file")
        if version != _VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        payload = fh.read()
    expected = (1 << num_qubits) * 16
    if len(payload) != expected:
        raise CheckpointError("amplitude payload has wrong size")
    amps = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    lat = lt.build(d, L)
    schedule = AdiabaticSchedule(
        g_final=g_final,
        g_step=g_step,
        t_step=t_step,
        substeps=substeps,
        kind=KINDS[kind_i],
        direction=DIRECTIONS[dir_i],
    )
    state = StateVector(num_qubits, amps)
    return lat, schedule, step, state


def fixed_g_trotter(
    state: StateVector,
    lat: lt.LatticeSpec,
    g: float,
    t: float,
    n: int,
    kind: str = "sym",
    mode: str = "fused",
    ancilla: Optional[int] = None,
) -> StateVector:
    """n repetitions of the constant-coupling substep: exp(-iHt) up to Trotter error."""
    if n < 1:
        raise ValueError("need n >= 1")
    dt = t / n
    if kind == "asym":
        for _ in range(n):
            substep(state, lat, g, dt, "asym", mode, ancilla)
        return state
    # merged symmetric execution
    circuits.evolve_plaquette_sum(state, lat, dt / 2.0, ancilla, mode)
    for _ in range(n - 1):
        circuits.evolve_transverse(state, lat, g, dt)
        circuits.evolve_plaquette_sum(state, lat, dt, ancilla, mode)
    circuits.evolve_transverse(state, lat, g, dt)
    circuits.evolve_plaquette_sum(state, lat, dt / 2.0, ancilla, mode)
    return state
