"""Batch front door: configuration, presets, run orchestration, file emission.

Modes: sweep | dos | sectors | trotter-bench | verify | phase-estimate.
Outputs land in --out as sweep.csv / dos_z.csv / dos_x.csv / sectors.csv /
lattice.json plus manifest.json (full config, wall time, error budgets,
adiabaticity report, sha256 of every emitted file). Identical configs
produce byte-identical CSVs.

Exit codes: 0 ok, 1 failed checks, 2 usage/config error, 3 capacity,
4 checkpoint mismatch.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import circuits, evolution, lattice as lt, observables as obs, oracle, presets
from .evolution import AdiabaticSchedule
from .statevector import CapacityError, StateVector

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_CHECKPOINT = 4

THREADS_ENV = "Z2SIM_THREADS"


class ConfigError(Exception):
    pass


class CheckpointMismatch(Exception):
    pass


@dataclass
class RunConfig:
    mode: str = "sweep"
    d: int = 2
    L: int = 3
    schedule: AdiabaticSchedule = field(
        default_factory=lambda: presets.PRESETS["desk-d2"]["schedule"]
    )
    preset: Optional[str] = None
    out_dir: Path = Path("runs/out")
    dos_every: int = 10
    checkpoint: Optional[Path] = None
    checkpoint_every: int = 50
    resume: bool = False
    pe_bits: int = 8
    pe_time: float = 0.05
    pe_steps: int = 8

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "d": self.d,
            "L": self.L,
            "schedule": self.schedule.to_dict(),
            "preset": self.preset,
            "out_dir": str(self.out_dir),
            "dos_every": self.dos_every,
            "checkpoint": str(self.checkpoint) if self.checkpoint else None,
            "checkpoint_every": self.checkpoint_every,
            "resume": self.resume,
        }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="z2sim",
        description="Adiabatic state-vector sweeps of Z2 gauge theory on periodic lattices",
    )
    p.add_argument("--mode", choices=["sweep", "dos", "sectors", "trotter-bench", "verify", "phase-estimate"], default="sweep")
    p.add_argument("--preset", help="named parameter set, e.g. desk-d2, paper-d3-sym")
    p.add_argument("--config", help="INI-style config file (sections: lattice, schedule, observables, output)")
    p.add_argument("--d", type=int, help="spatial dimension (2 or 3)")
    p.add_argument("--L", type=int, help="linear lattice size")
    p.add_argument("--g-final", type=float, dest="g_final")
    p.add_argument("--g-step", type=float, dest="g_step")
    p.add_argument("--t-step", type=float, dest="t_step")
    p.add_argument("--substeps", type=int)
    p.add_argument("--kind", choices=list(evolution.KINDS))
    p.add_argument("--direction", choices=list(evolution.DIRECTIONS))
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--dos-every", type=int, dest="dos_every", help="record DOS every k steps (sweep mode)")
    p.add_argument("--checkpoint", help="checkpoint file path")
    p.add_argument("--checkpoint-every", type=int, dest="checkpoint_every", default=None)
    p.add_argument("--resume", action="store_true", help="continue from --checkpoint")
    p.add_argument("--pe-bits", type=int, dest="pe_bits", help="phase-estimation precision bits")
    p.add_argument("--pe-time", type=float, dest="pe_time", help="phase-estimation base duration")
    return p


def _read_config_file(path: str) -> dict:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    flat: dict = {}
    for section, keys in (
        ("lattice", ("d", "L")),
        ("schedule", ("g_final", "g_step", "t_step", "substeps", "kind", "direction")),
        ("observables", ("dos_every",)),
        ("output", ("dir",)),
    ):
        if not cp.has_section(section):
            continue
        for key in cp.options(section):
            if key not in [k.lower() for k in keys]:
                raise ConfigError(f"unknown key [{section}] {key}")
            flat[key] = cp.get(section, key)
    return flat


def resolve_config(args) -> RunConfig:
    """Merge preset < config file < explicit flags."""
    cfg = RunConfig(mode=args.mode)
    sched_kw = {}
    if args.preset:
        try:
            pre = presets.get_preset(args.preset)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.preset = args.preset
        cfg.d, cfg.L = pre["d"], pre["L"]
        sched_kw = pre["schedule"].to_dict()
    if args.config:
        flat = _read_config_file(args.config)
        if "d" in flat:
            cfg.d = int(flat["d"])
        if "l" in flat:
            cfg.L = int(flat["l"])
        for key in ("g_final", "g_step", "t_step"):
            if key in flat:
                sched_kw[key] = float(flat[key])
        if "substeps" in flat:
            sched_kw["substeps"] = int(flat["substeps"])
        for key in ("kind", "direction"):
            if key in flat:
                sched_kw[key] = flat[key]
        if "dos_every" in flat:
            cfg.dos_every = int(flat["dos_every"])
        if "dir" in flat:
            cfg.out_dir = Path(flat["dir"])
    if args.d is not None:
        cfg.d = args.d
    if args.L is not None:
        cfg.L = args.L
    for key in ("g_final", "g_step", "t_step", "substeps", "kind", "direction"):
        val = getattr(args, key, None)
        if val is not None:
            sched_kw[key] = val
    if not sched_kw and not args.preset:
        sched_kw = RunConfig().schedule.to_dict()
    try:
        cfg.schedule = AdiabaticSchedule(**{**RunConfig().schedule.to_dict(), **sched_kw})
    except ValueError as exc:
        raise ConfigError(f"invalid schedule: {exc}") from exc
    if args.out:
        cfg.out_dir = Path(args.out)
    if args.dos_every is not None:
        if args.dos_every < 1:
            raise ConfigError("--dos-every must be >= 1")
        cfg.dos_every = args.dos_every
    if args.checkpoint:
        cfg.checkpoint = Path(args.checkpoint)
    if args.checkpoint_every is not None:
        cfg.checkpoint_every = args.checkpoint_every
    cfg.resume = args.resume
    if cfg.resume and not cfg.checkpoint:
        raise ConfigError("--resume requires --checkpoint")
    if args.pe_bits is not None:
        cfg.pe_bits = args.pe_bits
    if args.pe_time is not None:
        cfg.pe_time = args.pe_time
    if cfg.d not in (2, 3):
        raise ConfigError(f"d must be 2 or 3, got {cfg.d}")
    if cfg.mode == "dos":
        cfg.dos_every = 1
    return cfg


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# -- output helpers -----------------------------------------------------------


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _truncate_csv(path: Path, max_rows: Optional[int] = None, g_max: Optional[float] = None):
    """Drop rows past the resume point (rows written after the checkpoint)."""
    if not path.exists():
        raise CheckpointMismatch(f"cannot resume: {path} is missing")
    lines = path.read_text().splitlines()
    header, rows = lines[0], lines[1:]
    if max_rows is not None:
        if len(rows) < max_rows:
            raise CheckpointMismatch(
                f"cannot resume: {path} has {len(rows)} rows, checkpoint expects {max_rows}"
            )
        rows = rows[:max_rows]
    if g_max is not None:
        rows = [r for r in rows if float(r.split(",", 1)[0]) <= g_max]
    path.write_text("\n".join([header] + rows) + "\n")


def write_manifest(cfg: RunConfig, lat, out_dir: Path, wall: float, files, extra=None):
    bounds = {
        kind: vars(evolution.error_bound(cfg.schedule, lat, kind))
        for kind in evolution.KINDS
    }
    report = evolution.adiabaticity_report(cfg.schedule)
    manifest = {
        "config": cfg.to_dict(),
        "preset": cfg.preset,
        "wall_time_s": wall,
        "error_bounds": bounds,
        "adiabaticity": {
            "rate": report.rate,
            "degenerate": report.degenerate,
            "checks": report.checks,
            "warnings": report.warnings,
        },
        "outputs": {f.name: _sha256(f) for f in files if f.exists()},
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


class SweepWriter:
    """Streams sweep/dos rows so an interrupted run leaves usable files."""

    def __init__(self, out_dir: Path, lat, cfg: RunConfig, resume_step: int = 0):
        self.lat = lat
        self.cfg = cfg
        self.contours = lt.wilson_contours(lat)
        paths = [out_dir / name for name in ("sweep.csv", "dos_z.csv", "dos_x.csv")]
        if resume_step > 0:
            g_max = (resume_step + 0.5) * cfg.schedule.g_step
            _truncate_csv(paths[0], max_rows=resume_step)
            for p in paths[1:]:
                _truncate_csv(p, g_max=g_max)
        self.sweep, self.dos_z, self.dos_x = (open(p, "a" if resume_step else "w") for p in paths)
        if not resume_step:
            self.sweep.write(obs.sweep_header(lat) + "\n")
            self.dos_z.write("g,eigenvalue,mass\n")
            self.dos_x.write("g,eigenvalue,mass\n")

    def observe(self, k: int, g: float, state) -> obs.SweepRecord:
        snap = obs.Snapshot(state, self.lat)
        rec = obs.measure_record(snap, self.lat, g, self.contours)
        self.sweep.write(obs.sweep_row(self.lat, rec) + "\n")
        if k % self.cfg.dos_every == 0:
            for line in obs.dos_rows(g, obs.dos(snap, self.lat, "Z", g)):
                self.dos_z.write(line + "\n")
            for line in obs.dos_rows(g, obs.dos(snap, self.lat, "X", g)):
                self.dos_x.write(line + "\n")
        self.flush()
        return rec

    def flush(self):
        for fh in (self.sweep, self.dos_z, self.dos_x):
            fh.flush()

    def close(self):
        for fh in (self.sweep, self.dos_z, self.dos_x):
            fh.close()

    @property
    def files(self):
        return [Path(self.sweep.name), Path(self.dos_z.name), Path(self.dos_x.name)]


def _prepare_start(lat, schedule) -> StateVector:
    state = StateVector.init_zero(lat.num_links)
    if schedule.direction == "z-to-x":
        circuits.prepare_z_ground(state, lat, mode="fused")
    else:
        circuits.prepare_x_ground(state, lat)
    return state


def cmd_sweep(cfg: RunConfig) -> int:
    lat = lt.build(cfg.d, cfg.L)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "lattice.json").write_text(json.dumps(lt.to_json_dict(lat), indent=1) + "\n")

    start_step = 0
    if cfg.resume:
        if not cfg.checkpoint or not cfg.checkpoint.exists():
            raise CheckpointMismatch("no checkpoint file to resume from")
        ck_lat, ck_sched, start_step, state = evolution.load_checkpoint(cfg.checkpoint)
        if (ck_lat.d, ck_lat.L) != (lat.d, lat.L) or ck_sched != cfg.schedule:
            raise CheckpointMismatch(
                "checkpoint was written by a different lattice/schedule; refusing to resume"
            )
    else:
        state = _prepare_start(lat, cfg.schedule)

    writer = SweepWriter(out, lat, cfg, resume_step=start_step)
    t0 = time.time()
    try:
        evolution.run_adiabatic(
            state,
            lat,
            cfg.schedule,
            observer=writer.observe,
            start_step=start_step,
            checkpoint_path=str(cfg.checkpoint) if cfg.checkpoint else None,
            checkpoint_every=cfg.checkpoint_every if cfg.checkpoint else None,
        )
    finally:
        writer.close()
    wall = time.time() - t0
    files = writer.files + [out / "lattice.json"]
    write_manifest(cfg, lat, out, wall, files)
    print(f"sweep finished in {wall:.1f} s -> {out}")
    return EXIT_OK


SECTOR_SETS = {
    2: [(1, 1), (-1, 1), (1, -1), (-1, -1)],
    3: [(1, 1, 1), (-1, 1, 1), (-1, -1, 1), (-1, -1, -1)],
}


def cmd_sectors(cfg: RunConfig) -> int:
    lat = lt.build(cfg.d, cfg.L)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    labels = SECTOR_SETS[cfg.d]
    workers = min(thread_count(), len(labels))
    t0 = time.time()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(obs.sector_sweep, lat, cfg.schedule, [lab]) for lab in labels
            ]
            results = [f.result()[0] for f in futs]
    else:
        results = obs.sector_sweep(lat, cfg.schedule, labels)
    wall = time.time() - t0
    path = out / "sectors.csv"
    with open(path, "w") as fh:
        fh.write("g,labels,E\n")
        for line in obs.sectors_rows(results):
            fh.write(line + "\n")
    write_manifest(cfg, lat, out, wall, [path])
    print(f"sectors finished in {wall:.1f} s -> {path}")
    return EXIT_OK


TROTTER_BENCH_NS = (8, 16, 32, 64, 128)


def cmd_trotter_bench(cfg: RunConfig) -> int:
    """Deviation from the exact propagator vs substep count, both kinds."""
    lat = lt.build(cfg.d, cfg.L)
    if lat.num_links > oracle.DENSE_MAX_LINKS:
        raise ConfigError("trotter-bench needs a dense-oracle-sized lattice (try --d 2 --L 2)")
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    g, t = 0.5, 1.0
    st = StateVector.init_zero(lat.num_links)
    circuits.prepare_z_ground(st, lat, mode="fused")
    psi0 = st.amplitudes.copy()
    exact = oracle.exact_evolve(psi0, lat, g, t)
    rows = []
    slopes = {}
    for kind in evolution.KINDS:
        devs = []
        for n in TROTTER_BENCH_NS:
            s = StateVector(lat.num_links, psi0.copy())
            evolution.fixed_g_trotter(s, lat, g, t, n, kind=kind)
            dev = float(np.max(np.abs(s.amplitudes - exact)))
            devs.append(dev)
            rows.append((kind, n, dev))
        slope, _, _ = obs.fit_linear(np.log(TROTTER_BENCH_NS), np.log(devs))
        slopes[kind] = slope
    path = out / "trotter_bench.csv"
    with open(path, "w") as fh:
        fh.write("kind,n,deviation\n")
        for kind, n, dev in rows:
            fh.write(f"{kind},{n},{dev:.17g}\n")
    for kind, slope in slopes.items():
        print(f"{kind}: fitted order {slope:+.3f}")
    write_manifest(cfg, lat, cfg.out_dir, 0.0, [path], extra={"trotter_slopes": slopes})
    ok = abs(slopes["asym"] + 1) <= 0.2 and abs(slopes["sym"] + 2) <= 0.2
    return EXIT_OK if ok else EXIT_FAIL


def cmd_phase_estimate(cfg: RunConfig) -> int:
    """Ramp to g_final, then read the energy back through phase estimation."""
    lat = lt.build(cfg.d, cfg.L)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    state = StateVector.init_zero(lat.num_links + 1)
    circuits.prepare_z_ground(state, lat, ancilla=lat.num_links, mode="gate")
    evolution.run_adiabatic(state, lat, cfg.schedule)
    g = cfg.schedule.g_final
    direct = obs.expect_plaquette_sum(state, lat) + g * obs.expect_transverse_sum(state, lat)
    est = circuits.phase_estimate(
        state, lat, g, cfg.pe_time, cfg.pe_bits, n_steps=cfg.pe_steps
    )
    result = {
        "g": g,
        "estimate": est.energy,
        "resolution": est.resolution,
        "direct_expectation": direct,
        "survival": est.survival,
        "flagged": est.flagged,
        "bits": list(est.bits),
    }
    if lat.num_links <= oracle.MATVEC_MAX_LINKS:
        result["oracle_ground_energy"] = oracle.ground_state(lat, g)[0]
    (out / "phase_estimate.json").write_text(json.dumps(result, indent=2) + "\n")
    print(json.dumps(result, indent=2))
    return EXIT_OK


# -- verify -------------------------------------------------------------------


def verify_checks():
    """Oracle-equivalence and invariant suite at d=2 L=2 scale.

    Yields (name, ok, detail) triples; every check runs even after failures.
    """
    lat = lt.build(2, 2)
    n_l = lat.num_links

    def check_counts():
        a, b = lt.build(2, 3), lt.build(3, 2)
        return a.num_links == 18 and a.num_plaquettes == 9 and b.num_links == 24 and b.num_plaquettes == 24, ""

    def check_prepare():
        st = StateVector.init_zero(n_l + 1)
        circuits.prepare_z_ground(st, lat, ancilla=n_l, mode="gate")
        z = obs.expect_plaquette_sum(st, lat)
        gr = obs.gauss_residual(st, lat)
        return abs(z + lat.num_plaquettes) < 1e-10 and gr < 1e-10, f"Z={z:.6f} gauss={gr:.2e}"

    def check_gate_vs_fused():
        rng = np.random.default_rng(11)
        amps = rng.normal(size=1 << (n_l + 1)) + 1j * rng.normal(size=1 << (n_l + 1))
        amps[1 << n_l :] = 0.0  # work ancilla in |0>
        amps /= np.linalg.norm(amps)
        sa = StateVector(n_l + 1, amps.copy())
        sb = StateVector(n_l + 1, amps.copy())
        plaq = lt.plaquette_links(lat, (0, 1), (0, 0))
        circuits.evolve_plaquette(sa, lat, plaq, 0.37, ancilla=n_l, mode="gate")
        circuits.evolve_plaquette(sb, lat, plaq, 0.37, ancilla=n_l, mode="fused")
        dev = float(np.max(np.abs(sa.amplitudes - sb.amplitudes)))
        return dev < 1e-12, f"max dev {dev:.2e}"

    def check_trotter_vs_oracle():
        st = StateVector.init_zero(n_l)
        circuits.prepare_z_ground(st, lat, mode="fused")
        psi0 = st.amplitudes.copy()
        exact = oracle.exact_evolve(psi0, lat, 0.5, 0.5)
        s = StateVector(n_l, psi0.copy())
        evolution.fixed_g_trotter(s, lat, 0.5, 0.5, 64, kind="sym")
        dev = float(np.max(np.abs(s.amplitudes - exact)))
        return dev < 1e-4, f"max dev {dev:.2e}"

    def check_energy_vs_oracle():
        sched = AdiabaticSchedule(g_final=0.3, g_step=0.01, t_step=0.4, substeps=20)
        st = _prepare_start(lat, sched)
        evolution.run_adiabatic(st, lat, sched)
        e = obs.expect_plaquette_sum(st, lat) + 0.3 * obs.expect_transverse_sum(st, lat)
        e_ref, _ = oracle.ground_state(lat, 0.3)
        return abs(e - e_ref) < 5e-3, f"E={e:.6f} oracle={e_ref:.6f}"

    def check_gauge_preserved():
        sched = AdiabaticSchedule(g_final=0.5, g_step=0.05, t_step=0.1, substeps=10)
        st = _prepare_start(lat, sched)
        evolution.run_adiabatic(st, lat, sched)
        gr = obs.gauss_residual(st, lat)
        return gr < 1e-8, f"gauss={gr:.2e}"

    def check_oracle_convergence():
        try:
            e, v = oracle.ground_state(lat, 0.4)
        except oracle.OracleConvergenceError as exc:
            return False, str(exc)
        resid = float(np.linalg.norm(oracle.build_hamiltonian(lat, 0.4).matvec(v) - e * v))
        return resid < 1e-10, f"residual {resid:.2e}"

    for name, fn in (
        ("lattice-counts", check_counts),
        ("prepare-z-ground", check_prepare),
        ("plaquette-gate-vs-fused", check_gate_vs_fused),
        ("trotter-vs-oracle", check_trotter_vs_oracle),
        ("adiabatic-energy-vs-oracle", check_energy_vs_oracle),
        ("gauge-preservation", check_gauge_preserved),
        ("oracle-convergence", check_oracle_convergence),
    ):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        yield name, ok, detail


def cmd_verify(cfg: RunConfig) -> int:
    failures = 0
    for name, ok, detail in verify_checks():
        tag = "ok" if ok else "FAIL"
        print(f"[{tag:4s}] {name}" + (f" ({detail})" if detail else ""))
        failures += 0 if ok else 1
    return EXIT_OK if failures == 0 else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if cfg.mode in ("sweep", "dos"):
            return cmd_sweep(cfg)
        if cfg.mode == "sectors":
            return cmd_sectors(cfg)
        if cfg.mode == "trotter-bench":
            return cmd_trotter_bench(cfg)
        if cfg.mode == "verify":
            return cmd_verify(cfg)
        if cfg.mode == "phase-estimate":
            return cmd_phase_estimate(cfg)
        raise ConfigError(f"unhandled mode {cfg.mode}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except CheckpointMismatch as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT


if __name__ == "__main__":
    sys.exit(main())
