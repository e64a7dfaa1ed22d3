"""Acceptance gate: one test per criterion, each printing a pass/fail line.

The desk-scale d=2 sweep fixtures are shared across criteria; the reduced
d=3 sweep (criterion 7) takes hours and only runs when Z2SIM_RUN_SLOW=1.
Run with `pytest -s tests/test_acceptance.py` to see the criterion lines.
"""

import json
import os
from pathlib import Path

import numpy as np
import pytest

from z2sim import circuits, cli, evolution, lattice as lt, observables as obs, oracle
from z2sim.evolution import AdiabaticSchedule
from z2sim.presets import PRESETS
from z2sim.statevector import StateVector

RUN_SLOW = os.environ.get("Z2SIM_RUN_SLOW", "") not in ("", "0")


def criterion(num, description, checks):
    """Print one [PASS]/[FAIL] line, then assert every check."""
    ok = all(c for c, _ in checks)
    tag = "PASS" if ok else "FAIL"
    print(f"\n[{tag}] criterion {num}: {description}")
    for good, msg in checks:
        print(f"    {'ok  ' if good else 'FAIL'} {msg}")
    assert ok, f"criterion {num} failed: " + "; ".join(m for g, m in checks if not g)


def read_rows(path):
    lines = Path(path).read_text().splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


# -- shared desk-d2 artifacts -------------------------------------------------


class DeskRuns:
    def __init__(self, root: Path):
        self.dir_a = root / "full_a"
        self.dir_b = root / "full_b"
        self.dir_c = root / "resumed"
        self.checkpoint = root / "resumed.ck"
        self.state_g05 = None
        self.sigma_z_max = 0.0

        for out in (self.dir_a, self.dir_b):
            code = cli.main(["--preset", "desk-d2", "--mode", "sweep", "--out", str(out)])
            assert code == cli.EXIT_OK

        # interrupted twin of the same run: snapshot at g=0.5, bail after
        # step 100 (checkpoint written), then resume through the CLI
        parser = cli.build_parser()
        cfg = cli.resolve_config(
            parser.parse_args(
                ["--preset", "desk-d2", "--out", str(self.dir_c), "--checkpoint", str(self.checkpoint)]
            )
        )
        lat = lt.build(2, 3)
        self.dir_c.mkdir(parents=True, exist_ok=True)
        (self.dir_c / "lattice.json").write_text(json.dumps(lt.to_json_dict(lat)) + "\n")
        writer = cli.SweepWriter(self.dir_c, lat, cfg, resume_step=0)
        state = cli._prepare_start(lat, cfg.schedule)

        class Bail(Exception):
            pass

        def observer(k, g, st):
            rec = writer.observe(k, g, st)
            self.sigma_z_max = max(
                self.sigma_z_max, abs(obs.single_link_report(st, lat, 0)[0])
            )
            if k == 50:
                self.state_g05 = st.amplitudes.copy()
            if k == 100:
                raise Bail()
            return rec

        with pytest.raises(evolution.ObserverError):
            evolution.run_adiabatic(
                state, lat, cfg.schedule, observer=observer, checkpoint_path=str(self.checkpoint)
            )
        writer.close()
        code = cli.main(
            ["--preset", "desk-d2", "--out", str(self.dir_c), "--checkpoint", str(self.checkpoint), "--resume"]
        )
        assert code == cli.EXIT_OK


@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    return DeskRuns(tmp_path_factory.mktemp("desk_d2"))


# -- criteria -------------------------------------------------------------------


def test_criterion_1_lattice_counts():
    a, b = lt.build(2, 3), lt.build(3, 2)
    criterion(
        1,
        "link and plaquette counts",
        [
            (a.num_links == 18 and a.num_plaquettes == 9, f"d=2 L=3: {a.num_links} links, {a.num_plaquettes} plaquettes"),
            (b.num_links == 24 and b.num_plaquettes == 24, f"d=3 L=2: {b.num_links} links, {b.num_plaquettes} plaquettes"),
        ],
    )


def test_criterion_2_preparation():
    lat = lt.build(2, 3)
    st = StateVector.init_zero(lat.num_links + 1)
    circuits.prepare_z_ground(st, lat, ancilla=lat.num_links, mode="gate")
    snap = obs.Snapshot(st, lat)
    plaq_vals = [snap.z_parity(p) for p in lt.all_plaquettes(lat)]
    gauss = obs.gauss_residual(snap, lat)
    th = obs.thooft_values(snap, lat)
    nz = np.abs(st.amplitudes) > 1e-14
    mags = np.abs(st.amplitudes[nz])
    # independent enumeration oracle: count configurations with every
    # plaquette parity even, straight off the link masks
    idx = np.arange(1 << lat.num_links, dtype=np.uint32)
    good = np.ones(idx.size, dtype=bool)
    for p in lt.all_plaquettes(lat):
        mask = np.uint32(sum(1 << q for q in p))
        good &= (np.bitwise_count(idx & mask) & 1) == 0
    expected_count = int(good.sum())
    criterion(
        2,
        "flux-free preparation on d=2 L=3",
        [
            (all(abs(v - 1.0) < 1e-10 for v in plaq_vals), "every plaquette sigma_z product is +1 (Z_p = -1)"),
            (gauss <= 1e-10, f"gauss residual {gauss:.2e} <= 1e-10"),
            (abs(th[0] - 1) < 1e-10 and abs(th[1] - 1) < 1e-10, "V_x = V_y = +1"),
            (expected_count == 1024, f"enumeration oracle counts {expected_count} configurations"),
            (int(nz.sum()) == 1024, f"{int(nz.sum())} nonzero amplitudes"),
            (np.allclose(mags, 1 / np.sqrt(1024), atol=1e-12), "amplitudes equal-weight"),
        ],
    )


def test_criterion_3_trotter_order():
    lat = lt.build(2, 2)
    st = StateVector.init_zero(lat.num_links)
    circuits.prepare_z_ground(st, lat, mode="fused")
    psi0 = st.amplitudes.copy()
    exact = oracle.exact_evolve(psi0, lat, 0.5, 1.0)
    ns = [8, 16, 32, 64, 128]
    devs = {}
    for kind in ("asym", "sym"):
        devs[kind] = []
        for n in ns:
            s = StateVector(lat.num_links, psi0.copy())
            evolution.fixed_g_trotter(s, lat, 0.5, 1.0, n, kind=kind)
            devs[kind].append(float(np.max(np.abs(s.amplitudes - exact))))
    slope_a, _, _ = obs.fit_linear(np.log(ns), np.log(devs["asym"]))
    slope_s, _, _ = obs.fit_linear(np.log(ns), np.log(devs["sym"]))
    criterion(
        3,
        "decomposition error orders on d=2 L=2",
        [
            (abs(slope_a + 1) <= 0.2, f"asymmetric slope {slope_a:+.3f} within -1 +/- 0.2"),
            (abs(slope_s + 2) <= 0.2, f"symmetric slope {slope_s:+.3f} within -2 +/- 0.2"),
            (all(s <= a for s, a in zip(devs["sym"], devs["asym"])), "symmetric <= asymmetric pointwise"),
        ],
    )


def test_criterion_4_error_budgets():
    targets = {
        "paper-d3-sym": 2.1e-3,
        "paper-d2-sym": 1.1e-5,
        "paper-d3-asym": 1.92e-3,
        "paper-d2-asym": 2.9e-3,
    }
    checks = []
    for name, target in targets.items():
        pre = PRESETS[name]
        lat = lt.build(pre["d"], pre["L"])
        got = evolution.error_bound(pre["schedule"], lat).leading
        rel = abs(got - target) / target
        checks.append((rel <= 0.05, f"{name}: {got:.4e} vs {target:.2e} ({rel * 100:.1f}%)"))
    criterion(4, "closed-form error budgets reproduce the published totals", checks)


D2_X_ALLOWED = {18, -18, 10, -10, 6, -6, 2, -2}
D2_Z_ALLOWED = {-9, -5, -1, 3, 7}


def test_criterion_5_desk_sweep(desk):
    header, rows = read_rows(desk.dir_a / "sweep.csv")
    col = {name: i for i, name in enumerate(header)}
    gs = np.array([float(r[col["g"]]) for r in rows])
    H = np.array([float(r[col["H"]]) for r in rows])
    cp = obs.find_critical(gs, H)

    def ratios(row):
        w1, w2, w3 = (float(row[col[c]]) for c in ("W_c1", "W_c2", "W_c3"))
        return np.log(w2) / np.log(w1), np.log(w3) / np.log(w1)

    small = ratios(rows[14])  # g = 0.15
    large = ratios(rows[-1])  # g = 2.0
    gauss_max = max(float(r[col["gauss"]]) for r in rows)

    _, zrows = read_rows(desk.dir_a / "dos_z.csv")
    _, xrows = read_rows(desk.dir_a / "dos_x.csv")
    z_off = max((float(m) for g, ev, m in zrows if int(ev) not in D2_Z_ALLOWED), default=0.0)
    x_off = max((float(m) for g, ev, m in xrows if int(ev) not in D2_X_ALLOWED), default=0.0)

    criterion(
        5,
        "desk-scale d=2 L=3 sweep reproduces the published physics",
        [
            (0.33 <= cp.g_c <= 0.43, f"critical point {cp.g_c:.3f} in [0.33, 0.43]"),
            (abs(small[0] - 1.5) <= 0.15, f"log-ratio c2/c1 at g=0.15: {small[0]:.3f} vs 1.5 +/- 0.15"),
            (abs(small[1] - 2.0) <= 0.2, f"log-ratio c3/c1 at g=0.15: {small[1]:.3f} vs 2.0 +/- 0.2"),
            (abs(large[0] - 2.0) <= 0.3, f"log-ratio c2/c1 at g=2.0: {large[0]:.3f} vs 2.0 +/- 0.3"),
            (abs(large[1] - 3.0) <= 0.4, f"log-ratio c3/c1 at g=2.0: {large[1]:.3f} vs 3.0 +/- 0.4"),
            (z_off < 1e-9, f"off-support plaquette-sum mass {z_off:.1e} < 1e-9"),
            (x_off < 1e-9, f"off-support transverse-sum mass {x_off:.1e} < 1e-9"),
            (gauss_max <= 1e-8, f"gauss residual {gauss_max:.2e} <= 1e-8 throughout"),
        ],
    )


def test_criterion_6_sector_splittings(desk):
    lat = lt.build(2, 3)
    sched = AdiabaticSchedule(g_final=0.3, g_step=0.01, t_step=0.2, substeps=100, kind="sym")
    results = obs.sector_sweep(lat, sched, [(1, 1), (-1, 1), (1, -1), (-1, -1)])
    spl = obs.sector_splittings(results)
    gs = results[0].gs
    win = gs >= 0.05 - 1e-12
    e2_e3 = float(np.max(np.abs(spl[(-1, 1)] - spl[(1, -1)])))
    s21, i21, _ = obs.fit_linear(gs[win], np.maximum(spl[(-1, 1)][win], 0) ** 0.25)
    s41, i41, _ = obs.fit_linear(gs[win], np.maximum(spl[(-1, -1)][win], 0) ** 0.25)
    criterion(
        6,
        "topological sector splittings on d=2 L=3 (fits over g in [0.05, 0.3])",
        [
            (abs(s21 - 1.88719) / 1.88719 <= 0.10, f"E21^(1/4) slope {s21:.5f} within 10% of 1.88719 (intercept {i21:.5f})"),
            (abs(s41 - 2.08307) / 2.08307 <= 0.10, f"E41^(1/4) slope {s41:.5f} within 10% of 2.08307 (intercept {i41:.5f})"),
            (e2_e3 <= 1e-3, f"|E2 - E3| = {e2_e3:.2e} <= 1e-3"),
            (desk.sigma_z_max <= 1e-8, f"single-link <sigma_z> stays at {desk.sigma_z_max:.2e} <= 1e-8"),
        ],
    )


@pytest.mark.slow
@pytest.mark.skipif(not RUN_SLOW, reason="hours-long d=3 sweep; set Z2SIM_RUN_SLOW=1")
def test_criterion_7_d3_reduced_sweep(tmp_path):
    out = tmp_path / "d3"
    code = cli.main(
        ["--preset", "desk-d3", "--mode", "sweep", "--out", str(out), "--dos-every", "1"]
    )
    assert code == cli.EXIT_OK
    header, rows = read_rows(out / "sweep.csv")
    col = {name: i for i, name in enumerate(header)}
    gs = np.array([float(r[col["g"]]) for r in rows])
    Z = np.array([float(r[col["Z"]]) for r in rows])
    X = np.array([float(r[col["X"]]) for r in rows])
    g_cross = obs.crossing_point(gs, Z, X)

    _, zrows = read_rows(out / "dos_z.csv")
    _, xrows = read_rows(out / "dos_x.csv")

    def hist(rows_, g):
        sel = [(int(ev), float(m)) for gg, ev, m in rows_ if abs(float(gg) - g) < 1e-9]
        support = np.array([ev for ev, _ in sel])
        mass = np.array([m for _, m in sel])
        return support, mass

    z_sup, z_mass = hist(zrows, 0.90)
    # nearest grid point to 1/0.9 on the 0.02 grid
    g_inv = gs[int(np.argmin(np.abs(gs - 1.0 / 0.9)))]
    x_sup, x_mass = hist(xrows, float(g_inv))
    dz = obs.DosHistogram(basis="Z", g=0.9, support=z_sup, mass=z_mass)
    dx = obs.DosHistogram(basis="X", g=g_inv, support=x_sup, mass=x_mass)
    duality_dev = obs.duality_check(dz, dx)
    mass20 = max(
        (float(m) for g, ev, m in zrows if abs(int(ev)) == 20), default=0.0
    )
    sweep_dev = obs.sweep_duality_deviation(gs, Z, X)
    print(f"    info <Z>(g) vs <X>(1/g) sweep-level deviation: {sweep_dev:.3f}")
    criterion(
        7,
        "reduced d=3 L=2 sweep: self-duality signatures",
        [
            (abs(g_cross - 1.0) <= 0.05, f"<Z>/<X> crossing at g = {g_cross:.3f} (1.00 +/- 0.05)"),
            (duality_dev <= 5e-2, f"DOS duality pair (0.9, {g_inv:.2f}) deviation {duality_dev:.3f} <= 0.05"),
            (mass20 < 1e-9, f"plaquette-sum mass at +/-20: {mass20:.1e} < 1e-9"),
        ],
    )


def test_criterion_8_oracle_fidelity(desk):
    lat = lt.build(2, 3)
    e_ref, v_ref = oracle.ground_state(lat, 0.5)
    overlap = float(abs(np.vdot(v_ref, desk.state_g05)))
    criterion(
        8,
        "desk-d2 state at g=0.5 against the Lanczos ground state (2^18)",
        [(overlap >= 0.995, f"overlap {overlap:.6f} >= 0.995 (oracle E = {e_ref:.6f})")],
    )


def test_criterion_9_determinism_and_resume(desk):
    import hashlib

    def digest(path):
        return hashlib.sha256(path.read_bytes()).hexdigest()

    names = ("sweep.csv", "dos_z.csv", "dos_x.csv")
    identical = all(digest(desk.dir_a / n) == digest(desk.dir_b / n) for n in names)

    worst = 0.0
    same_shape = True
    n_rows = 0
    for name in names:
        full_rows = (desk.dir_a / name).read_text().splitlines()
        res_rows = (desk.dir_c / name).read_text().splitlines()
        if len(full_rows) != len(res_rows):
            same_shape = False
            continue
        if name == "sweep.csv":
            n_rows = len(res_rows) - 1
        for a, b in zip(full_rows[1:], res_rows[1:]):
            for x, y in zip(a.split(","), b.split(",")):
                worst = max(worst, abs(float(x) - float(y)))
    criterion(
        9,
        "byte-identical repeats and interrupt/resume at step 100",
        [
            (identical, "repeated runs byte-identical (sweep + dos files)"),
            (same_shape, f"resumed run emits {n_rows} sweep rows and matching dos files"),
            (worst <= 1e-10, f"resumed vs uninterrupted max deviation {worst:.2e} <= 1e-10"),
        ],
    )
