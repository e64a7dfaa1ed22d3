import numpy as np
import pytest

from z2sim import circuits, evolution, lattice as lt, observables as obs, oracle
from z2sim.statevector import StateVector
from z2sim.tables import get_tables

LAT22 = lt.build(2, 2)
LAT23 = lt.build(2, 3)


def z_ground(lat):
    st = StateVector.init_zero(lat.num_links)
    circuits.prepare_z_ground(st, lat, mode="fused")
    return st


def x_ground(lat):
    st = StateVector.init_zero(lat.num_links)
    circuits.prepare_x_ground(st, lat)
    return st


# -- flux tables against a literal bit-twiddling oracle ----------------------


@pytest.mark.parametrize("d,L", [(2, 2), (2, 3)])
def test_flip_table_matches_python_enumeration(d, L):
    lat = lt.build(d, L)
    tab = get_tables(lat)
    plaqs = lt.all_plaquettes(lat)
    masks = [sum(1 << q for q in p) for p in plaqs]
    rng = np.random.default_rng(0)
    for idx in rng.integers(0, 1 << lat.num_links, size=200):
        expected = sum((int(idx) & m).bit_count() & 1 for m in masks)
        assert int(tab.flips[idx]) == expected
        assert int(tab.popcount[idx]) == int(idx).bit_count()


# -- expectations --------------------------------------------------------------


def test_expect_sums_on_reference_states():
    assert obs.expect_plaquette_sum(z_ground(LAT23), LAT23) == pytest.approx(-9.0, abs=1e-10)
    assert obs.expect_transverse_sum(z_ground(LAT23), LAT23) == pytest.approx(0.0, abs=1e-10)
    assert obs.expect_transverse_sum(x_ground(LAT23), LAT23) == pytest.approx(-18.0, abs=1e-10)
    assert obs.expect_plaquette_sum(x_ground(LAT23), LAT23) == pytest.approx(0.0, abs=1e-10)


def test_expectations_against_dense_oracle():
    lat = LAT22
    rng = np.random.default_rng(1)
    psi = rng.normal(size=1 << lat.num_links) + 1j * rng.normal(size=1 << lat.num_links)
    psi /= np.linalg.norm(psi)
    st = StateVector(lat.num_links, psi.copy())
    hz = oracle.build_hamiltonian(lat, 0.0).dense()
    hx = oracle.build_hamiltonian(lat, 1.0).dense() - hz
    assert obs.expect_plaquette_sum(st, lat) == pytest.approx(np.real(np.vdot(psi, hz @ psi)), abs=1e-10)
    assert obs.expect_transverse_sum(st, lat) == pytest.approx(np.real(np.vdot(psi, hx @ psi)), abs=1e-10)


def test_record_energy_identity():
    st = z_ground(LAT23)
    evolution.run_adiabatic(
        st, LAT23, evolution.AdiabaticSchedule(g_final=0.05, g_step=0.05, t_step=0.1, substeps=10)
    )
    rec = obs.measure_record(st, LAT23, 0.05)
    assert rec.expect_H == rec.expect_Z + 0.05 * rec.expect_X


def test_expectation_through_trotter_matches_oracle_ground():
    lat = LAT22
    sched = evolution.AdiabaticSchedule(g_final=0.3, g_step=0.01, t_step=0.4, substeps=20)
    st = z_ground(lat)
    evolution.run_adiabatic(st, lat, sched)
    e = obs.expect_plaquette_sum(st, lat) + 0.3 * obs.expect_transverse_sum(st, lat)
    e_ref, _ = oracle.ground_state(lat, 0.3)
    assert e == pytest.approx(e_ref, abs=5e-3)


# -- densities of states ---------------------------------------------------------


def exhaustive_z_support(lat):
    """Pure-python enumeration of plaquette-sum eigenvalues over all configs."""
    plaqs = lt.all_plaquettes(lat)
    masks = [sum(1 << q for q in p) for p in plaqs]
    vals = set()
    for idx in range(1 << lat.num_links):
        flips = sum((idx & m).bit_count() & 1 for m in masks)
        vals.add(2 * flips - lat.num_plaquettes)
    return vals


def exhaustive_gauge_x_support(lat):
    """x-eigenvalues achievable under the star (Gauss) constraint."""
    stars = [sum(1 << q for q in lt.star_links(lat, s)) for s in lat.sites()]
    vals = set()
    for idx in range(1 << lat.num_links):
        if all((idx & m).bit_count() % 2 == 0 for m in stars):
            vals.add(2 * int(idx).bit_count() - lat.num_links)
    return vals


def test_dos_z_support_exhaustive_d2_l2():
    lat = LAT22
    tab = get_tables(lat)
    assert set(tab.z_eigenvalues().tolist()) == exhaustive_z_support(lat)


def test_dos_sums_to_one_and_matches_flux_free_state():
    st = z_ground(LAT23)
    hist = obs.dos(st, LAT23, "Z", g=0.0)
    assert np.sum(hist.mass) == pytest.approx(1.0, abs=1e-12)
    assert hist.mass_at(-9) == pytest.approx(1.0, abs=1e-12)


def test_dos_x_selection_rule_under_gauss_law():
    """Evolved gauge-invariant states put no mass on Gauss-forbidden x values."""
    lat = LAT22
    allowed = exhaustive_gauge_x_support(lat)
    st = z_ground(lat)
    evolution.run_adiabatic(
        st, lat, evolution.AdiabaticSchedule(g_final=0.4, g_step=0.04, t_step=0.1, substeps=10)
    )
    hist = obs.dos(st, lat, "X", g=0.4)
    off = sum(m for ev, m in zip(hist.support, hist.mass) if int(ev) not in allowed)
    assert off < 1e-12


def test_dos_supports_paper_lattices():
    t23 = get_tables(LAT23)
    assert set(t23.z_eigenvalues().tolist()) == {-9, -5, -1, 3, 7}
    t32 = get_tables(lt.build(3, 2))
    zvals = set(t32.z_eigenvalues().tolist())
    assert 20 not in zvals and -20 not in zvals
    assert zvals <= {0, 4, -4, 8, -8, 12, -12, 16, -16, 24, -24}


def test_dos_x_equals_z_after_global_rotation():
    """Rotating every link maps the x histogram onto the z histogram."""
    st = z_ground(LAT23)
    evolution.run_adiabatic(
        st, LAT23, evolution.AdiabaticSchedule(g_final=0.2, g_step=0.04, t_step=0.1, substeps=5)
    )
    hx = obs.dos(st, LAT23, "X", g=0.2)
    rotated = st.copy()
    rotated.hadamard_all(range(LAT23.num_links))
    # popcount histogram of the rotated state in the plain z basis
    tab = get_tables(LAT23)
    full = np.bincount(tab.popcount, weights=rotated.probabilities(), minlength=LAT23.num_links + 1)
    assert np.max(np.abs(full[tab.pop_support] - hx.mass)) < 1e-12
    # and <X> agrees with a dense-oracle evaluation
    hz = oracle.build_hamiltonian(LAT23, 0.0)
    direct = -float(
        sum(
            np.real(
                np.vdot(st.amplitudes, st.amplitudes.reshape(-1, 2, 1 << q)[:, ::-1, :].reshape(-1))
            )
            for q in range(LAT23.num_links)
        )
    )
    assert obs.expect_transverse_sum(st, LAT23) == pytest.approx(direct, abs=1e-10)


# -- gauss residual ---------------------------------------------------------------


def test_gauss_residual_reference_states():
    assert obs.gauss_residual(z_ground(LAT23), LAT23) <= 1e-10
    assert obs.gauss_residual(x_ground(LAT23), LAT23) <= 1e-12


def test_gauss_residual_detects_violation():
    st = z_ground(LAT23)
    st.apply_rz(4, np.pi)  # sigma_z on one link anticommutes with both end stars
    snap = obs.Snapshot(st, LAT23)
    bad = [
        coords
        for coords in LAT23.sites()
        if abs(snap.x_parity(lt.star_links(LAT23, coords)) - 1.0) > 1.5
    ]
    assert len(bad) == 2
    assert obs.gauss_residual(snap, LAT23) == pytest.approx(2.0, abs=1e-10)


# -- wilson / thooft ---------------------------------------------------------------


def test_wilson_values_flux_free():
    st = z_ground(LAT23)
    vals = obs.wilson_values(st, LAT23, lt.wilson_contours(LAT23))
    assert all(v == pytest.approx(1.0, abs=1e-10) for v in vals.values())


def test_single_link_report_reference_states():
    sz, zl, xl, hl = obs.single_link_report(z_ground(LAT23), LAT23, 4)
    assert abs(sz) <= 1e-10
    assert zl == pytest.approx(-1.0, abs=1e-10)
    assert hl == pytest.approx(zl + xl)
    _, _, xl2, _ = obs.single_link_report(x_ground(LAT23), LAT23, 4)
    assert xl2 == pytest.approx(-1.0, abs=1e-10)


# -- derivatives and critical point ------------------------------------------------


def test_derivatives_linear_and_quadratic():
    gs = np.linspace(0, 1, 21)
    d1, d2 = obs.derivatives(gs, 3.0 * gs + 1.0)
    assert np.max(np.abs(d2)) < 1e-10
    assert np.max(np.abs(d1 - 3.0)) < 1e-10
    a = 0.7
    d1, d2 = obs.derivatives(gs, a * gs**2)
    assert np.max(np.abs(d2 - 2 * a)) < 1e-8


def test_derivatives_reject_nonuniform_grid():
    with pytest.raises(ValueError):
        obs.derivatives([0, 0.1, 0.3, 0.4, 0.5], [0, 1, 2, 3, 4])


def test_find_critical_synthetic_valley():
    gs = np.linspace(0.01, 1.0, 100)
    h = -np.hypot(gs - 0.4, 0.05)  # rounded kink: d2 valley centred at 0.4
    cp = obs.find_critical(gs, h)
    assert abs(cp.g_c - 0.4) <= 0.02
    assert not cp.no_transition


def test_find_critical_invariant_under_affine_shift():
    gs = np.linspace(0.01, 1.0, 100)
    h = -np.hypot(gs - 0.4, 0.05)
    base = obs.find_critical(gs, h)
    shifted = obs.find_critical(gs, h + 5.0 + 2.3 * gs)
    assert shifted.g_c == base.g_c
    assert shifted.index == base.index


def test_find_critical_flags_monotone():
    gs = np.linspace(0.01, 1.0, 50)
    cp = obs.find_critical(gs, np.exp(gs))
    assert cp.no_transition


def test_crossing_point_linear():
    gs = np.linspace(0, 2, 41)
    a = -2 + gs
    b = -gs
    assert obs.crossing_point(gs, a, b) == pytest.approx(1.0)


# -- duality -------------------------------------------------------------------------


def test_duality_check_self_pair():
    st = z_ground(LAT23)
    evolution.run_adiabatic(
        st, LAT23, evolution.AdiabaticSchedule(g_final=0.1, g_step=0.02, t_step=0.1, substeps=5)
    )
    hz = obs.dos(st, LAT23, "Z", g=0.1)
    # against itself relabeled as X on the same support: deviation 0
    fake_x = obs.DosHistogram(basis="X", g=0.1, support=hz.support, mass=hz.mass)
    assert obs.duality_check(hz, fake_x) == pytest.approx(0.0, abs=1e-12)


def test_duality_check_mismatched_supports_is_unity():
    st = z_ground(LAT23)
    hz = obs.dos(st, LAT23, "Z", g=0.0)
    hx = obs.dos(st, LAT23, "X", g=0.0)
    assert obs.duality_check(hz, hx) == 1.0


def test_duality_check_needs_mixed_bases():
    st = z_ground(LAT23)
    hz = obs.dos(st, LAT23, "Z", g=0.0)
    with pytest.raises(ValueError):
        obs.duality_check(hz, hz)


def test_sweep_duality_deviation_synthetic():
    # gs symmetric under inversion around 1: 0.5, 1, 2
    gs = [0.5, 1.0, 2.0]
    ez = [-20.0, -12.0, -4.0]
    ex = [-4.0, -12.0, -20.0]  # mirror: <X>(1/g) == <Z>(g) exactly
    assert obs.sweep_duality_deviation(gs, ez, ex) == pytest.approx(0.0)
    ex_off = [-4.0, -11.0, -20.0]
    assert obs.sweep_duality_deviation(gs, ez, ex_off) == pytest.approx(1.0)


# -- fits ------------------------------------------------------------------------------


def test_fit_linear_exact_line():
    xs = np.array([0.0, 1.0, 2.0, 3.0])
    slope, intercept, resid = obs.fit_linear(xs, 2 * xs + 1)
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert intercept == pytest.approx(1.0, abs=1e-12)
    assert resid == pytest.approx(0.0, abs=1e-20)


def test_fit_linear_degenerate_xs():
    with pytest.raises(ValueError):
        obs.fit_linear([1.0, 1.0], [0.0, 1.0])


# -- sectors ----------------------------------------------------------------------------


def test_sector_sweep_small_lattice():
    lat = LAT22
    sched = evolution.AdiabaticSchedule(g_final=0.1, g_step=0.02, t_step=0.1, substeps=5)
    res = obs.sector_sweep(lat, sched, [(1, 1), (-1, 1), (1, -1)])
    spl = obs.sector_splittings(res)
    # symmetric sectors split identically
    assert np.max(np.abs(spl[(-1, 1)] - spl[(1, -1)])) < 1e-10
    assert np.all(spl[(-1, 1)] >= -1e-9)


def test_sector_sweep_rejects_bad_labels():
    with pytest.raises(ValueError):
        obs.sector_sweep(LAT22, evolution.AdiabaticSchedule(g_final=0.02, g_step=0.02, t_step=0.1, substeps=2), [(0, 1)])


def test_sector_label_mismatch_aborts(monkeypatch):
    """A drifted 't Hooft reading aborts that sector's sweep."""
    lat = LAT22
    sched = evolution.AdiabaticSchedule(g_final=0.02, g_step=0.02, t_step=0.1, substeps=2)
    real = obs.thooft_values
    monkeypatch.setattr(
        obs, "thooft_values", lambda *a, **k: {mu: -v for mu, v in real(*a, **k).items()}
    )
    with pytest.raises(obs.SectorLabelError):
        obs.sector_sweep(lat, sched, [(1, 1)])


# -- csv schemas -----------------------------------------------------------------------


def test_sweep_row_formatting():
    rec = obs.SweepRecord(
        g=0.25,
        expect_Z=-8.123456789012345,
        expect_X=-1.0,
        wilson={"c1": 0.5, "c2": 0.25, "c3": 0.125},
        gauss_residual=1e-12,
        thooft={0: 1.0, 1: -1.0},
    )
    header = obs.sweep_header(LAT23)
    row = obs.sweep_row(LAT23, rec)
    assert header == "g,Z,X,H,W_c1,W_c2,W_c3,gauss,V_x,V_y"
    fields = row.split(",")
    assert len(fields) == len(header.split(","))
    assert float(fields[0]) == 0.25
    assert float(fields[1]) == -8.123456789012345  # 17 digits round-trip
    assert float(fields[3]) == rec.expect_H


def test_sector_rows_format():
    res = obs.SectorResult(labels=(-1, 1), gs=np.array([0.1]), energies=np.array([-3.5]))
    ref = obs.SectorResult(labels=(1, 1), gs=np.array([0.1]), energies=np.array([-3.6]))
    rows = list(obs.sectors_rows([ref, res]))
    assert rows[0] == "0.10000000000000001,++,-3.6000000000000001"
    assert rows[1].split(",")[1] == "-+"
