"""Precomputed per-lattice basis tables shared by evolution and measurement.

For a register whose low qubits are the links, every z-basis index carries
two cheap integer labels:

  flips[i]    number of plaquettes with odd link parity (flux-carrying)
  popcount[i] number of set link bits

The plaquette-sum eigenvalue is 2*flips - N_p and the transverse-sum
eigenvalue (read in the x basis) is 2*popcount - N_l. Both phase evolution
and densities of states reduce to lookups into these labels.
"""

from __future__ import annotations

import numpy as np

from . import lattice as lt

_CACHE: dict = {}


class LatticeTables:
    def __init__(self, lat: lt.LatticeSpec):
        from .statevector import CapacityError, MAX_QUBITS

        self.lat = lat
        self.plaquettes = lt.all_plaquettes(lat)
        n = lat.num_links
        if n > MAX_QUBITS:
            raise CapacityError(f"{n}-link lattice exceeds the {MAX_QUBITS}-qubit budget")
        idx = np.arange(1 << n, dtype=np.uint32)
        flips = np.zeros(1 << n, dtype=np.uint8)
        for plaq in self.plaquettes:
            mask = np.uint32(sum(1 << q for q in plaq))
            flips += np.bitwise_count(idx & mask).astype(np.uint8) & 1
        self.flips = flips
        self.popcount = np.bitwise_count(idx).astype(np.uint8)
        del idx
        self.flip_support = np.flatnonzero(np.bincount(flips, minlength=lat.num_plaquettes + 1))
        self.pop_support = np.flatnonzero(np.bincount(self.popcount, minlength=n + 1))

    # -- eigenvalue labels --------------------------------------------------

    def z_eigenvalues(self) -> np.ndarray:
        """Structurally possible plaquette-sum eigenvalues, ascending."""
        return 2 * self.flip_support.astype(np.int64) - self.lat.num_plaquettes

    def x_eigenvalues(self) -> np.ndarray:
        """Transverse-sum eigenvalues over all link configurations, ascending."""
        return 2 * self.pop_support.astype(np.int64) - self.lat.num_links

    def z_diagonal(self) -> np.ndarray:
        """Plaquette-sum eigenvalue per z-basis index, as float64."""
        return 2.0 * self.flips - float(self.lat.num_plaquettes)

    def z_phase_table(self, dt: float) -> np.ndarray:
        """exp(-i * z * dt) for z = 2f - N_p, indexed by flip count f."""
        f = np.arange(self.lat.num_plaquettes + 1, dtype=np.float64)
        return np.exp(-1j * dt * (2.0 * f - self.lat.num_plaquettes))


def get_tables(lat: lt.LatticeSpec) -> LatticeTables:
    key = (lat.d, lat.L)
    tab = _CACHE.get(key)
    if tab is None:
        tab = LatticeTables(lat)
        _CACHE[key] = tab
    return tab
