"""Dense complex state-vector register with gate kernels.

Qubit q is bit q of the basis index (little-endian), so amplitude index
``i`` describes the configuration whose qubit-q value is ``(i >> q) & 1``.
All kernels are stride-based numpy operations over views of the amplitude
array; diagonal operators additionally get fused kernels that skip the
explicit gate sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

MAX_QUBITS = 26  # 2^26 complex128 amplitudes = 1 GiB; hard memory guard
COLLAPSE_MIN_PROB = 1e-12

_SQRT1_2 = 1.0 / np.sqrt(2.0)
_HADAMARD = np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=np.complex128)


class CapacityError(Exception):
    """Register would exceed the configured memory budget."""


class ImpossibleOutcomeError(Exception):
    """Forced collapse onto an outcome of (numerically) zero probability."""


def rx_matrix(angle: float) -> np.ndarray:
    """exp(-i*angle*sigma_x/2)."""
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def rz_matrix(angle: float) -> np.ndarray:
    """exp(-i*angle*sigma_z/2)."""
    return np.array(
        [[np.exp(-0.5j * angle), 0.0], [0.0, np.exp(0.5j * angle)]],
        dtype=np.complex128,
    )


@dataclass(frozen=True)
class GateOp:
    """One gate of the supported set: h | rx | rz | cnot."""

    kind: str
    target: int
    control: Optional[int] = None
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in ("h", "rx", "rz", "cnot"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "cnot":
            if self.control is None:
                raise ValueError("cnot requires a control qubit")
            if self.control == self.target:
                raise ValueError("cnot control and target must differ")
        elif self.control is not None:
            raise ValueError(f"{self.kind} takes no control qubit")

    def matrix(self) -> np.ndarray:
        if self.kind == "h":
            return _HADAMARD
        if self.kind == "rx":
            return rx_matrix(self.angle)
        if self.kind == "rz":
            return rz_matrix(self.angle)
        raise ValueError("cnot has no single-qubit matrix")


class StateVector:
    """2^num_qubits complex amplitudes, kept normalized by construction."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: Optional[np.ndarray] = None):
        if num_qubits < 1:
            raise ValueError("need at least one qubit")
        if num_qubits > MAX_QUBITS:
            raise CapacityError(
                f"{num_qubits} qubits exceed the {MAX_QUBITS}-qubit memory budget"
            )
        self.num_qubits = num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(1 << num_qubits, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            if amplitudes.shape != (1 << num_qubits,):
                raise ValueError("amplitude array has wrong length")
            if amplitudes.dtype != np.complex128:
                amplitudes = amplitudes.astype(np.complex128)
        self.amplitudes = amplitudes

    # -- construction -----------------------------------------------------

    @classmethod
    def init_zero(cls, num_qubits: int) -> "StateVector":
        """All-|0> register."""
        return cls(num_qubits)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    # -- bookkeeping ------------------------------------------------------

    def norm(self) -> float:
        return float(np.sqrt(np.real(np.vdot(self.amplitudes, self.amplitudes))))

    def probabilities(self) -> np.ndarray:
        p = np.empty(self.amplitudes.shape, dtype=np.float64)
        np.abs(self.amplitudes, out=p)
        np.square(p, out=p)
        return p

    def _check_qubit(self, qubit: int):
        if not 0 <= qubit < self.num_qubits:
            raise IndexError(f"qubit {qubit} out of range for {self.num_qubits}-qubit register")

    def _split(self, qubit: int) -> np.ndarray:
        """View as (high, bit, low) with low stride 2^qubit."""
        return self.amplitudes.reshape(-1, 2, 1 << qubit)

    # -- gates ------------------------------------------------------------

    def apply_gate(self, op: GateOp) -> "StateVector":
        if op.kind == "cnot":
            self.apply_cnot(op.control, op.target)
        elif op.kind == "h":
            self.apply_h(op.target)
        elif op.kind == "rx":
            self.apply_rx(op.target, op.angle)
        else:
            self.apply_rz(op.target, op.angle)
        return self

    def apply_1q(self, qubit: int, u: np.ndarray, chunk_rows: Optional[int] = None):
        """Apply a 2x2 unitary on one qubit.

        chunk_rows bounds how many (high-index) rows are processed per pass;
        results are identical for any chunking because rows are independent.
        """
        self._check_qubit(qubit)
        a = self._split(qubit)
        rows = a.shape[0]
        step = rows if chunk_rows is None else max(1, chunk_rows)
        for start in range(0, rows, step):
            blk = a[start : start + step]
            lo, hi = blk[:, 0, :], blk[:, 1, :]
            tmp = lo.copy()
            lo *= u[0, 0]
            lo += u[0, 1] * hi
            hi *= u[1, 1]
            hi += u[1, 0] * tmp

    def apply_h(self, qubit: int):
        self.apply_1q(qubit, _HADAMARD)

    def apply_rx(self, qubit: int, angle: float):
        self.apply_1q(qubit, rx_matrix(angle))

    def apply_rz(self, qubit: int, angle: float):
        # diagonal: no mixing, two scalar multiplies
        self._check_qubit(qubit)
        a = self._split(qubit)
        a[:, 0, :] *= np.exp(-0.5j * angle)
        a[:, 1, :] *= np.exp(0.5j * angle)

    def apply_cnot(self, control: int, target: int):
        self._check_qubit(control)
        self._check_qubit(target)
        if control == target:
            raise ValueError("cnot control and target must differ")
        n = self.num_qubits
        v = self.amplitudes.reshape((2,) * n)
        axc = n - 1 - control
        axt = n - 1 - target
        sel = [slice(None)] * n
        sel[axc] = 1
        sub = v[tuple(sel)]  # control=1 branch; axes past axc shift down by one
        if axt > axc:
            axt -= 1
        i0 = [slice(None)] * (n - 1)
        i1 = [slice(None)] * (n - 1)
        i0[axt] = 0
        i1[axt] = 1
        tmp = sub[tuple(i0)].copy()
        sub[tuple(i0)] = sub[tuple(i1)]
        sub[tuple(i1)] = tmp

    def hadamard_all(self, qubits: Iterable[int]) -> "StateVector":
        self.apply_1q_broadcast(qubits, _HADAMARD)
        return self

    def apply_1q_broadcast(self, qubits: Iterable[int], u: np.ndarray, group_width: int = 4):
        """Apply the same 2x2 unitary to every listed qubit.

        Contiguous runs of qubits are fused into one 2^w x 2^w kron-power
        kernel, cutting the number of passes over the amplitudes by ~w.
        """
        qubits = sorted(set(qubits))
        for q in qubits:
            self._check_qubit(q)
        i = 0
        while i < len(qubits):
            j = i
            while (
                j + 1 < len(qubits)
                and qubits[j + 1] == qubits[j] + 1
                and j + 1 - i < group_width
            ):
                j += 1
            width = j - i + 1
            big = u
            for _ in range(width - 1):
                big = np.kron(big, u)
            self._apply_group(qubits[i], width, big)
            i = j + 1

    def _apply_group(self, start: int, width: int, u: np.ndarray, chunk_bytes: int = 1 << 23):
        """Apply a 2^width unitary on qubits [start, start+width)."""
        dim = 1 << width
        low = 1 << start
        if low == 1:
            # group sits at the bottom: one large row-major GEMM
            view = self.amplitudes.reshape(-1, dim)
            ut = np.ascontiguousarray(u.T)
            rows = view.shape[0]
            step = max(1, chunk_bytes // (dim * 16))
            for a in range(0, rows, step):
                blk = view[a : a + step]
                blk[...] = blk @ ut
            return
        view = self.amplitudes.reshape(-1, dim, low)
        rows = view.shape[0]
        row_bytes = dim * low * 16
        step = max(1, chunk_bytes // row_bytes)
        for a in range(0, rows, step):
            blk = view[a : a + step]
            blk[...] = np.matmul(u, blk)

    # -- diagonal fast paths ----------------------------------------------

    def phase_on_parity(self, qubits: Iterable[int], theta: float):
        """Multiply by e^{+i theta} on even parity of the listed bits, e^{-i theta} on odd.

        Fused equivalent of the ancilla-ladder circuit for one plaquette.
        """
        qubits = sorted(set(qubits))
        for q in qubits:
            self._check_qubit(q)
        n = self.num_qubits
        v = self.amplitudes.reshape((2,) * n)
        axes = [n - 1 - q for q in qubits]
        even, odd = np.exp(1j * theta), np.exp(-1j * theta)
        for bits in range(1 << len(qubits)):
            sel = [slice(None)] * n
            parity = 0
            for j, ax in enumerate(axes):
                b = (bits >> j) & 1
                sel[ax] = b
                parity ^= b
            v[tuple(sel)] *= odd if parity else even

    def apply_z_product(self, qubits: Iterable[int]):
        """Multiply amplitudes by prod sigma_z over the listed qubits.

        Pairs of repeated qubits cancel (sigma_z^2 = 1): callers pass link
        multisets from closed walks and get the reduced operator.
        """
        counts: dict[int, int] = {}
        for q in qubits:
            counts[q] = counts.get(q, 0) + 1
        for q, c in counts.items():
            if c % 2 == 0:
                continue
            self._check_qubit(q)
            a = self._split(q)
            a[:, 1, :] *= -1.0

    def phase_lookup(self, labels: np.ndarray, table: np.ndarray):
        """Multiply amplitude i by table[labels[i mod len(labels)]].

        labels indexes a small phase table and may cover only the low
        qubits; higher qubits (ancillas) broadcast over it.
        """
        rest = self.amplitudes.size // labels.size
        view = self.amplitudes.reshape(rest, labels.size)
        view *= table[labels][None, :]

    # -- measurement ------------------------------------------------------

    def prob_zero(self, qubit: int) -> float:
        self._check_qubit(qubit)
        a = self._split(qubit)
        lo = a[:, 0, :]
        return float(np.real(np.sum(lo.real**2 + lo.imag**2)))

    def collapse(self, qubit: int, outcome: int) -> "StateVector":
        """Project the qubit onto |outcome> and renormalize."""
        self._check_qubit(qubit)
        if outcome not in (0, 1):
            raise ValueError("outcome must be 0 or 1")
        p0 = self.prob_zero(qubit)
        p = p0 if outcome == 0 else 1.0 - p0
        if p < COLLAPSE_MIN_PROB:
            raise ImpossibleOutcomeError(
                f"collapse of qubit {qubit} to {outcome} has probability {p:.3e}"
            )
        a = self._split(qubit)
        a[:, 1 - outcome, :] = 0.0
        self.amplitudes *= 1.0 / np.sqrt(p)
        return self

    def expect_z_mask_product(self, qubits: Iterable[int]) -> float:
        """<prod sigma_z> over the given qubit set."""
        qubits = sorted(set(qubits))
        if not qubits:
            raise ValueError("empty qubit set")
        for q in qubits:
            self._check_qubit(q)
        return parity_expectation(self.probabilities(), self.num_qubits, qubits)


def parity_expectation(probs: np.ndarray, num_qubits: int, qubits) -> float:
    """Sum of probs weighted by (-1)^(popcount over the masked bits).

    Works on any probability array of length 2^num_qubits; used to batch
    many mask expectations off one |amplitude|^2 pass. Masked qubits are
    folded out highest-first (each fold halves the array, leaving lower
    qubit strides intact), then the signed remainder is summed flat.
    """
    qubits = sorted(set(qubits), reverse=True)
    arr = probs
    for q in qubits:
        split = arr.reshape(-1, 2, 1 << q)
        arr = split[:, 0, :] - split[:, 1, :]
        arr = arr.reshape(-1)
    return float(np.sum(arr))
