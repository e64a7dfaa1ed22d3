"""Measured quantities: energies, Wilson/'t Hooft expectations, densities of
states, Gauss residuals, critical-point extraction, duality checks, sector
sweeps and fits.

Everything is a pure function of a state snapshot. A measurement step costs
one |amplitude|^2 pass for all z-basis quantities plus one Hadamard-rotated
copy for all x-basis quantities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import circuits, evolution, lattice as lt
from .statevector import StateVector, parity_expectation
from .tables import get_tables


@dataclass
class SweepRecord:
    g: float
    expect_Z: float
    expect_X: float
    wilson: Dict[str, float] = field(default_factory=dict)
    gauss_residual: float = 0.0
    thooft: Dict[int, float] = field(default_factory=dict)

    @property
    def expect_H(self) -> float:
        return self.expect_Z + self.g * self.expect_X


@dataclass
class DosHistogram:
    basis: str  # "Z" | "X"
    g: float
    support: np.ndarray  # ascending eigenvalues
    mass: np.ndarray

    def __post_init__(self):
        if self.basis not in ("Z", "X"):
            raise ValueError("basis must be 'Z' or 'X'")
        if len(self.support) != len(self.mass):
            raise ValueError("support and mass lengths differ")
        if np.any(self.mass < -1e-12):
            raise ValueError("negative probability mass")
        total = float(np.sum(self.mass))
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"mass sums to {total}, not 1")

    def mass_at(self, eigenvalue) -> float:
        hit = np.flatnonzero(self.support == eigenvalue)
        return float(self.mass[hit[0]]) if hit.size else 0.0


# -- snapshot -----------------------------------------------------------------


class Snapshot:
    """One measurement pause: shared probability arrays for all kernels.

    `probs` is |amplitude|^2 in the z basis; `xprobs` the same after
    rotating every link through Hadamard, so x-basis products become mask
    parities. Link-space marginals trace out any ancilla qubits.
    """

    def __init__(self, state: StateVector, lat: lt.LatticeSpec):
        self.lat = lat
        self.num_qubits = state.num_qubits
        self.probs = state.probabilities()
        rotated = state.copy()
        rotated.hadamard_all(range(lat.num_links))
        self.xprobs = rotated.probabilities()
        dim_links = 1 << lat.num_links
        self.link_probs = self.probs.reshape(-1, dim_links).sum(axis=0)
        self.link_xprobs = self.xprobs.reshape(-1, dim_links).sum(axis=0)

    def z_parity(self, qubits) -> float:
        return parity_expectation(self.probs, self.num_qubits, qubits)

    def x_parity(self, qubits) -> float:
        return parity_expectation(self.xprobs, self.num_qubits, qubits)


def expect_plaquette_sum(state: StateVector, lat: lt.LatticeSpec) -> float:
    """<Z> = -sum over plaquettes of the sigma_z products, via the flux-count label."""
    snap = state if isinstance(state, Snapshot) else Snapshot(state, lat)
    tab = get_tables(lat)
    flux = float(np.dot(snap.link_probs, tab.flips))
    return 2.0 * flux - lat.num_plaquettes * float(np.sum(snap.link_probs))


def expect_transverse_sum(state: StateVector, lat: lt.LatticeSpec) -> float:
    """<X> = -sum over links of <sigma_x>, read in the rotated basis."""
    snap = state if isinstance(state, Snapshot) else Snapshot(state, lat)
    tab = get_tables(lat)
    pops = float(np.dot(snap.link_xprobs, tab.popcount))
    return 2.0 * pops - lat.num_links * float(np.sum(snap.link_xprobs))


def dos(state: StateVector, lat: lt.LatticeSpec, basis: str, g: float = np.nan) -> DosHistogram:
    """Probability mass over the eigenvalues of Z or X, at the snapshot's g.

    The support lists every structurally possible eigenvalue; selection
    rules show up as (near-)zero masses outside the allowed subsets.
    """
    snap = state if isinstance(state, Snapshot) else Snapshot(state, lat)
    tab = get_tables(lat)
    if basis == "Z":
        full = np.bincount(tab.flips, weights=snap.link_probs, minlength=lat.num_plaquettes + 1)
        support = tab.z_eigenvalues()
        mass = full[tab.flip_support]
    elif basis == "X":
        full = np.bincount(tab.popcount, weights=snap.link_xprobs, minlength=lat.num_links + 1)
        support = tab.x_eigenvalues()
        mass = full[tab.pop_support]
    else:
        raise ValueError("basis must be 'Z' or 'X'")
    return DosHistogram(basis=basis, g=g, support=support, mass=mass)


def gauss_residual(state: StateVector, lat: lt.LatticeSpec) -> float:
    """max over sites of |<G_i> - 1| with G_i the star sigma_x product."""
    snap = state if isinstance(state, Snapshot) else Snapshot(state, lat)
    worst = 0.0
    for coords in lat.sites():
        val = snap.x_parity(lt.star_links(lat, coords))
        worst = max(worst, abs(val - 1.0))
    return worst


def wilson_values(state: StateVector, lat: lt.LatticeSpec, contours: Dict[str, lt.LoopSpec]) -> Dict[str, float]:
    snap = state if isinstance(state, Snapshot) else Snapshot(state, lat)
    return {name: snap.z_parity(loop.link_set()) for name, loop in contours.items()}


def thooft_values(state: StateVector, lat: lt.LatticeSpec, axes: Optional[Iterable[int]] = None) -> Dict[int, float]:
    snap = state if isinstance(state, Snapshot) else Snapshot(state, lat)
    axes = range(lat.d) if axes is None else axes
    return {mu: snap.x_parity(lt.thooft_surface(lat, mu).links) for mu in axes}


def single_link_report(state: StateVector, lat: lt.LatticeSpec, link: int) -> Tuple[float, float, float, float]:
    """(<sigma_z_l>, <z_l>, <x_l>, <h_l>) for one link.

    z_l averages the plaquette operators containing the link, normalized
    by the 2(d-1) plaquettes per link; x_l = -<sigma_x_l>; h_l = z_l + x_l.
    """
    if not 0 <= link < lat.num_links:
        raise ValueError(f"invalid link {link}")
    snap = state if isinstance(state, Snapshot) else Snapshot(state, lat)
    tab = get_tables(lat)
    sigma_z = snap.z_parity([link])
    sharing = [p for p in tab.plaquettes if link in p]
    assert len(sharing) == 2 * (lat.d - 1)
    z_l = -sum(snap.z_parity(p) for p in sharing) / len(sharing)
    x_l = -snap.x_parity([link])
    return sigma_z, z_l, x_l, z_l + x_l


def measure_record(
    state: StateVector,
    lat: lt.LatticeSpec,
    g: float,
    contours: Optional[Dict[str, lt.LoopSpec]] = None,
) -> SweepRecord:
    """Full per-step record off a single snapshot."""
    snap = state if isinstance(state, Snapshot) else Snapshot(state, lat)
    if contours is None:
        contours = lt.wilson_contours(lat)
    return SweepRecord(
        g=g,
        expect_Z=expect_plaquette_sum(snap, lat),
        expect_X=expect_transverse_sum(snap, lat),
        wilson=wilson_values(snap, lat, contours),
        gauss_residual=gauss_residual(snap, lat),
        thooft=thooft_values(snap, lat),
    )


# -- series post-processing ---------------------------------------------------


def derivatives(gs: Sequence[float], values: Sequence[float]):
    """First and second finite-difference derivatives on a uniform grid.

    Central differences inside, one-sided at the ends, no smoothing.
    """
    gs = np.asarray(gs, dtype=np.float64)
    ys = np.asarray(values, dtype=np.float64)
    if gs.size < 5:
        raise ValueError("need at least 5 grid points")
    h = gs[1] - gs[0]
    if not np.allclose(np.diff(gs), h, rtol=0, atol=1e-9 * max(abs(h), 1.0)):
        raise ValueError("derivative grid must be uniform")
    d1 = np.empty_like(ys)
    d1[1:-1] = (ys[2:] - ys[:-2]) / (2 * h)
    d1[0] = (-3 * ys[0] + 4 * ys[1] - ys[2]) / (2 * h)
    d1[-1] = (3 * ys[-1] - 4 * ys[-2] + ys[-3]) / (2 * h)
    d2 = np.empty_like(ys)
    d2[1:-1] = (ys[2:] - 2 * ys[1:-1] + ys[:-2]) / h**2
    d2[0] = (ys[0] - 2 * ys[1] + ys[2]) / h**2
    d2[-1] = (ys[-1] - 2 * ys[-2] + ys[-3]) / h**2
    return d1, d2


@dataclass
class CriticalPoint:
    g_c: float
    index: int
    tie: bool
    no_transition: bool


def find_critical(gs: Sequence[float], expect_H: Sequence[float]) -> CriticalPoint:
    """Critical coupling from the valley of the second energy derivative.

    argmin of d2<H>/dg2 over the interior grid, ties toward smaller g. A
    monotone second derivative (valley absent) sets the no-transition flag.
    """
    gs = np.asarray(gs, dtype=np.float64)
    _, d2 = derivatives(gs, expect_H)
    interior = d2[1:-1]
    idx = int(np.argmin(interior)) + 1
    ties = int(np.sum(interior == interior[idx - 1]))
    diffs = np.diff(d2)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    return CriticalPoint(
        g_c=float(gs[idx]), index=idx, tie=ties > 1, no_transition=monotone
    )


def crossing_point(gs: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    """First g where series a and b cross, linearly interpolated."""
    gs = np.asarray(gs, dtype=np.float64)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    sign = np.sign(diff)
    hits = np.flatnonzero(np.diff(sign) != 0)
    if hits.size == 0:
        raise ValueError("series do not cross")
    i = int(hits[0])
    frac = diff[i] / (diff[i] - diff[i + 1])
    return float(gs[i] + frac * (gs[i + 1] - gs[i]))


def duality_check(dos_g: DosHistogram, dos_inv: DosHistogram) -> float:
    """max |D_Z(z, g) - D_X(x=z, 1/g)| over the union of supports.

    Mismatched support sets report deviation 1 (the histograms live on
    different eigenvalue grids, as happens without self-duality).
    """
    if dos_g.basis == dos_inv.basis:
        raise ValueError("need one Z-basis and one X-basis histogram")
    thresh = 1e-9
    occ_a = set(np.asarray(dos_g.support)[np.asarray(dos_g.mass) > thresh].tolist())
    occ_b = set(np.asarray(dos_inv.support)[np.asarray(dos_inv.mass) > thresh].tolist())
    if not (occ_a <= set(np.asarray(dos_inv.support).tolist()) and occ_b <= set(np.asarray(dos_g.support).tolist())):
        return 1.0
    worst = 0.0
    for ev in sorted(occ_a | occ_b):
        worst = max(worst, abs(dos_g.mass_at(ev) - dos_inv.mass_at(ev)))
    return worst


def sweep_duality_deviation(gs: Sequence[float], expect_Z: Sequence[float], expect_X: Sequence[float]) -> float:
    """max over grid pairs (g, 1/g) of |<Z>(g) - <X>(1/g)|, nearest-point matched."""
    gs = np.asarray(gs, dtype=np.float64)
    ez = np.asarray(expect_Z, dtype=np.float64)
    ex = np.asarray(expect_X, dtype=np.float64)
    worst = 0.0
    for i, g in enumerate(gs):
        if g <= 0:
            continue
        inv = 1.0 / g
        if inv < gs[0] or inv > gs[-1]:
            continue
        j = int(np.argmin(np.abs(gs - inv)))
        worst = max(worst, abs(ez[i] - ex[j]))
    return worst


def fit_linear(xs: Sequence[float], ys: Sequence[float]):
    """Ordinary least squares: (slope, intercept, sum of squared residuals)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 2:
        raise ValueError("need at least two points")
    if np.ptp(xs) == 0:
        raise ValueError("degenerate fit: all x equal")
    a = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(a, ys, rcond=None)
    resid = float(np.sum((ys - a @ coef) ** 2))
    return float(coef[0]), float(coef[1]), resid


# -- sector sweeps ------------------------------------------------------------


@dataclass
class SectorResult:
    labels: Tuple[int, ...]
    gs: np.ndarray
    energies: np.ndarray


class SectorLabelError(RuntimeError):
    pass


def sector_sweep(
    lat: lt.LatticeSpec,
    schedule: evolution.AdiabaticSchedule,
    sectors: Sequence[Tuple[int, ...]],
    mode: str = "fused",
    label_tol: float = 1e-6,
) -> List[SectorResult]:
    """Adiabatic energy of the lowest state of each topological sector.

    Each requested sector is reached from the flux-free ground state by
    winding Wilson operators on the axes whose 't Hooft label is -1, then
    ramped like the ground state. Labels are re-measured at every step;
    a mismatch aborts that sector.
    """
    results = []
    for labels in sectors:
        if len(labels) != lat.d or any(s not in (-1, 1) for s in labels):
            raise ValueError(f"bad sector labels {labels}")
        state = StateVector.init_zero(lat.num_links)
        circuits.prepare_z_ground(state, lat, mode="fused")
        for mu, sign in enumerate(labels):
            if sign == -1:
                circuits.apply_wilson(state, lt.noncontractible_loop(lat, mu))

        def observer(k, g, st, labels=labels):
            snap = Snapshot(st, lat)
            measured = thooft_values(snap, lat)
            for mu, sign in enumerate(labels):
                if abs(measured[mu] - sign) > label_tol:
                    raise SectorLabelError(
                        f"sector {labels}: V_{mu} drifted to {measured[mu]:.3e} at g={g:g}"
                    )
            return (
                g,
                expect_plaquette_sum(snap, lat) + g * expect_transverse_sum(snap, lat),
            )

        try:
            series = evolution.run_adiabatic(state, lat, schedule, observer, mode=mode)
        except evolution.ObserverError as err:
            if isinstance(err.__cause__, SectorLabelError):
                raise err.__cause__
            raise
        gs = np.array([g for g, _ in series])
        es = np.array([e for _, e in series])
        results.append(SectorResult(labels=tuple(labels), gs=gs, energies=es))
    return results


# -- fixed CSV schemas ----------------------------------------------------
#
# sweep.csv    g, Z, X, H, W_c1, W_c2, W_c3, gauss, V_x, V_y[, V_z]
# dos_z.csv    g, eigenvalue, mass     (dos_x.csv identical)
# sectors.csv  g, labels, E            labels: one sign character per axis
#
# All doubles printed with 17 significant digits so files round-trip.

AXIS_NAMES = ("V_x", "V_y", "V_z")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def sweep_header(lat: lt.LatticeSpec) -> str:
    cols = ["g", "Z", "X", "H", "W_c1", "W_c2", "W_c3", "gauss"]
    cols += list(AXIS_NAMES[: lat.d])
    return ",".join(cols)


def sweep_row(lat: lt.LatticeSpec, rec: SweepRecord) -> str:
    vals = [rec.g, rec.expect_Z, rec.expect_X, rec.expect_H]
    for name in ("c1", "c2", "c3"):
        vals.append(rec.wilson.get(name, float("nan")))
    vals.append(rec.gauss_residual)
    vals += [rec.thooft[mu] for mu in range(lat.d)]
    return ",".join(_fmt(v) for v in vals)


def dos_rows(g: float, hist: DosHistogram):
    for ev, m in zip(hist.support, hist.mass):
        yield f"{_fmt(g)},{int(ev)},{_fmt(float(m))}"


def sector_labels_str(labels) -> str:
    return "".join("+" if s > 0 else "-" for s in labels)


def sectors_rows(results: Sequence[SectorResult]):
    for res in results:
        lab = sector_labels_str(res.labels)
        for g, e in zip(res.gs, res.energies):
            yield f"{_fmt(float(g))},{lab},{_fmt(float(e))}"


def sector_splittings(results: Sequence[SectorResult]) -> Dict[Tuple[int, ...], np.ndarray]:
    """E_i(g) - E_1(g) against the all-(+1) reference sector."""
    ref = None
    for r in results:
        if all(s == 1 for s in r.labels):
            ref = r
    if ref is None:
        raise ValueError("results must include the all-(+1) sector")
    out = {}
    for r in results:
        if r is ref:
            continue
        if r.gs.shape != ref.gs.shape or not np.allclose(r.gs, ref.gs):
            raise ValueError("sector sweeps ran on different grids")
        out[r.labels] = r.energies - ref.energies
    return out
