"""The renderer is exercised against real (short) runs of the simulation CLI,
its only coupling to the simulation being the emitted files.
"""

import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from z2plots import cli
from z2plots.data import RunDir, SchemaError, fit_line
from z2plots.render import FIGURE_IDS, render


def run_sim(args):
    proc = subprocess.run(
        [sys.executable, "-m", "z2sim.cli"] + args, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def d2_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "d2"
    run_sim(
        ["--mode", "sweep", "--d", "2", "--L", "3", "--g-final", "2.0",
         "--g-step", "0.1", "--t-step", "0.1", "--substeps", "5",
         "--dos-every", "2", "--out", str(out)]
    )
    run_sim(
        ["--mode", "sectors", "--d", "2", "--L", "3", "--g-final", "0.3",
         "--g-step", "0.05", "--t-step", "0.1", "--substeps", "5", "--out", str(out)]
    )
    return out


@pytest.fixture(scope="module")
def d3_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "d3"
    run_sim(
        ["--mode", "sweep", "--d", "3", "--L", "2", "--g-final", "2.0",
         "--g-step", "0.2", "--t-step", "0.1", "--substeps", "2",
         "--dos-every", "1", "--out", str(out)]
    )
    return out


def test_all_figure_ids_render(d2_run, d3_run, tmp_path):
    out_dir = tmp_path / "figs"
    outputs = render([d2_run, d3_run], FIGURE_IDS, out_dir, fmt="svg")
    assert sorted(outputs) == sorted(FIGURE_IDS)
    for path in outputs.values():
        assert path.exists() and path.stat().st_size > 0


def test_cli_renders_png(d2_run, tmp_path, capsys):
    code = cli.main(["--run", str(d2_run), "--figs", "5,6,7", "--format", "png", "--out", str(tmp_path)])
    assert code == 0
    for fid in (5, 6, 7):
        assert (tmp_path / f"fig{fid:02d}.png").exists()


def test_legend_fit_matches_primary_fit(d2_run, tmp_path):
    """The fit shown in fig 12 equals the simulation package's OLS to 1e-9."""
    run = RunDir(d2_run)
    sectors = run.sectors()
    g, e_ref = sectors["++"]
    _, e2 = sectors["-+"]
    ys = np.maximum(e2 - e_ref, 0.0) ** (1.0 / (run.size + 1))
    slope, intercept = fit_line(g, ys)
    from z2sim.observables import fit_linear

    slope_ref, intercept_ref, _ = fit_linear(g, ys)
    assert abs(slope - slope_ref) <= 1e-9
    assert abs(intercept - intercept_ref) <= 1e-9
    render([d2_run], [12], tmp_path, fmt="svg")
    assert (tmp_path / "fig12.svg").exists()


def test_missing_column_is_schema_error(d2_run, tmp_path):
    broken = tmp_path / "broken"
    shutil.copytree(d2_run, broken)
    sweep = broken / "sweep.csv"
    lines = sweep.read_text().splitlines()
    cols = lines[0].split(",")
    drop = cols.index("W_c2")
    rewritten = [",".join(c for i, c in enumerate(ln.split(",")) if i != drop) for ln in lines]
    sweep.write_text("\n".join(rewritten) + "\n")
    with pytest.raises(SchemaError, match="W_c2"):
        render([broken], [5], tmp_path / "figs")


def test_empty_but_valid_csv_warns_and_succeeds(d2_run, tmp_path):
    empty = tmp_path / "empty"
    shutil.copytree(d2_run, empty)
    for name in ("sweep.csv", "dos_z.csv", "dos_x.csv", "sectors.csv"):
        path = empty / name
        path.write_text(path.read_text().splitlines()[0] + "\n")
    with pytest.warns(UserWarning):
        outputs = render([empty], [6], tmp_path / "figs")
    assert outputs[6].exists()


def test_rendering_is_read_only_and_idempotent(d2_run, tmp_path):
    before = {p.name: p.read_bytes() for p in Path(d2_run).iterdir() if p.is_file()}
    render([d2_run], [6, 7], tmp_path / "one")
    render([d2_run], [6, 7], tmp_path / "two")
    after = {p.name: p.read_bytes() for p in Path(d2_run).iterdir() if p.is_file()}
    assert before == after
    assert (tmp_path / "one" / "fig06.svg").exists()
    assert (tmp_path / "two" / "fig06.svg").exists()


def test_unknown_figure_id_rejected(d2_run, tmp_path):
    with pytest.raises(SchemaError):
        render([d2_run], [99], tmp_path)
