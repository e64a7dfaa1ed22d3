"""Brute-force reference: exact Hamiltonian, eigensolution, exact evolution.

Everything here is built independently of the circuit kernels (own parity
arithmetic, scipy eigensolvers) so it can serve as the oracle against
which the gate path is validated. Basis convention matches the register:
link q is bit q of the index, H = Z + gX acting on the 2^N_l link space.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg as spla

from . import lattice as lt

DENSE_MAX_LINKS = 12
MATVEC_MAX_LINKS = 20


class OracleSizeError(Exception):
    pass


class OracleConvergenceError(Exception):
    pass


def _check_size(lat: lt.LatticeSpec, limit: int):
    if lat.num_links > limit:
        raise OracleSizeError(
            f"{lat.num_links} links exceed the {limit}-link oracle limit"
        )


def _plaquette_diagonal(lat: lt.LatticeSpec) -> np.ndarray:
    """Eigenvalue of the plaquette sum for every z-basis configuration."""
    dim = 1 << lat.num_links
    idx = np.arange(dim, dtype=np.uint32)
    diag = np.zeros(dim, dtype=np.float64)
    for coords in lat.sites():
        for plane in lat.planes:
            mask = np.uint32(0)
            for q in lt.plaquette_links(lat, plane, coords):
                mask |= np.uint32(1 << q)
            parity = np.bitwise_count(idx & mask).astype(np.int8) & 1
            diag += 2.0 * parity - 1.0
    return diag


class SparseHamiltonian:
    """Matrix-free H = Z + gX: diagonal plaquette part plus single-bit flips."""

    def __init__(self, lat: lt.LatticeSpec, g: float):
        _check_size(lat, MATVEC_MAX_LINKS)
        self.lat = lat
        self.g = float(g)
        self.dim = 1 << lat.num_links
        self.diagonal = _plaquette_diagonal(lat)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v).reshape(-1)
        out = self.diagonal * v
        if self.g != 0.0:
            n = self.lat.num_links
            for q in range(n):
                flipped = v.reshape(-1, 2, 1 << q)[:, ::-1, :].reshape(-1)
                out -= self.g * flipped
        return out

    def to_linear_operator(self, dtype=np.float64) -> spla.LinearOperator:
        return spla.LinearOperator(
            (self.dim, self.dim), matvec=self.matvec, dtype=dtype
        )

    def dense(self) -> np.ndarray:
        _check_size(self.lat, DENSE_MAX_LINKS)
        h = np.diag(self.diagonal)
        cols = np.arange(self.dim)
        for q in range(self.lat.num_links):
            h[cols ^ (1 << q), cols] -= self.g
        return h


def build_hamiltonian(lat: lt.LatticeSpec, g: float) -> SparseHamiltonian:
    return SparseHamiltonian(lat, g)


def gauge_project(lat: lt.LatticeSpec, v: np.ndarray) -> np.ndarray:
    """Apply prod_i (1 + G_i)/2: keeps the gauge-invariant component."""
    out = v.copy()
    for coords in lat.sites():
        mask = 0
        for q in lt.star_links(lat, coords):
            mask ^= 1 << q
        flipped = out[np.arange(out.size) ^ mask]
        out = 0.5 * (out + flipped)
    return out


def ground_state(lat: lt.LatticeSpec, g: float, residual_tol: float = 1e-10, maxiter: int = 20000):
    """Lowest eigenpair of H(g) in the gauge-invariant sector.

    The Lanczos start vector is the flux-free equal superposition (itself
    gauge invariant), so iterates stay in the physical sector up to
    round-off. Returns (energy, eigenvector); raises on non-convergence.
    """
    _check_size(lat, MATVEC_MAX_LINKS)
    ham = build_hamiltonian(lat, g)
    v0 = (ham.diagonal == -float(lat.num_plaquettes)).astype(np.float64)
    v0 /= np.linalg.norm(v0)
    if g == 0.0:
        return -float(lat.num_plaquettes), v0
    op = ham.to_linear_operator()
    try:
        vals, vecs = spla.eigsh(op, k=1, which="SA", v0=v0, maxiter=maxiter, tol=0)
    except spla.ArpackNoConvergence as exc:
        raise OracleConvergenceError(f"Lanczos did not converge: {exc}") from exc
    energy = float(vals[0])
    vec = vecs[:, 0]
    resid = np.linalg.norm(ham.matvec(vec) - energy * vec)
    if resid > residual_tol:
        raise OracleConvergenceError(
            f"eigenpair residual {resid:.3e} above {residual_tol:.0e}"
        )
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return energy, vec


def exact_evolve(vec: np.ndarray, lat: lt.LatticeSpec, g: float, t: float) -> np.ndarray:
    """exp(-i H t) applied to vec, to solver precision.

    Dense eigendecomposition up to 12 links; Krylov exponential beyond.
    """
    _check_size(lat, MATVEC_MAX_LINKS)
    if t == 0.0:
        return vec.astype(np.complex128)
    ham = build_hamiltonian(lat, g)
    if lat.num_links <= DENSE_MAX_LINKS:
        w, u = np.linalg.eigh(ham.dense())
        phases = np.exp(-1j * t * w)
        return (u * phases) @ (u.conj().T @ vec.astype(np.complex128))
    def scaled(x):  # -i t H x; H symmetric so rmatvec coincides
        return -1j * t * ham.matvec(x)

    op = spla.LinearOperator(
        (ham.dim, ham.dim), matvec=scaled, rmatvec=scaled, dtype=np.complex128
    )
    return spla.expm_multiply(
        op, vec.astype(np.complex128), traceA=-1j * t * float(np.sum(ham.diagonal))
    )


def stepwise_exact_sweep(state0: np.ndarray, lat: lt.LatticeSpec, schedule) -> np.ndarray:
    """Exact execution of the stepwise ramp (no decomposition error).

    Evolves with exp(-i H(g_km) dt) per substep via dense exponentials:
    the reference for adiabatic fidelity at small sizes.
    """
    _check_size(lat, DENSE_MAX_LINKS)
    ham0 = build_hamiltonian(lat, 0.0)
    hz = ham0.dense()
    hx = (build_hamiltonian(lat, 1.0).dense() - hz)  # the pure -sum sigma_x part
    vec = state0.astype(np.complex128)
    dt = schedule.dt
    for k in range(1, schedule.num_steps + 1):
        for m in range(1, schedule.substeps + 1):
            g = schedule.coupling(k, m)
            h = hz + g * hx if schedule.direction == "z-to-x" else hx + g * hz
            w, u = np.linalg.eigh(h)
            vec = (u * np.exp(-1j * dt * w)) @ (u.conj().T @ vec)
    return vec
