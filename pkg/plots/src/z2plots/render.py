"""Figure builders, keyed by the figure numbers of the source publication.

Every builder takes the list of run directories and an output path; it
returns a list of warning strings (empty axes, missing companion runs).
Rendering never mutates run artifacts.
"""

from __future__ import annotations

import warnings

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .data import RunDir, SchemaError, fit_line, pick_run

FIGURE_IDS = (5, 6, 7, 8, 10, 11, 12, 13)


def _empty(ax, message):
    ax.text(0.5, 0.5, message, ha="center", va="center", transform=ax.transAxes)
    ax.set_xticks([])
    ax.set_yticks([])


def _lat_label(run):
    return f"d={run.dimension}, L={run.size}"


def fig_05(runs, out):
    """Loop expectations and their log-ratios against the coupling."""
    warns = []
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    run = runs[0]
    sweep = run.sweep()
    g = sweep["g"]
    if g.size == 0:
        for ax in axes:
            _empty(ax, "empty sweep")
        warns.append("fig 5: empty sweep.csv")
    else:
        for name in ("W_c1", "W_c2", "W_c3"):
            axes[0].plot(g, sweep[name], label=name.replace("W_", ""))
        axes[0].set_yscale("log")
        axes[0].set_xlabel("$g$")
        axes[0].set_ylabel(r"$\langle W_C\rangle$")
        axes[0].legend()
        with np.errstate(divide="ignore", invalid="ignore"):
            r21 = np.log(sweep["W_c2"]) / np.log(sweep["W_c1"])
            r31 = np.log(sweep["W_c3"]) / np.log(sweep["W_c1"])
        axes[1].plot(g, r21, label="log c2 / log c1")
        axes[1].plot(g, r31, label="log c3 / log c1")
        for ref in (1.5, 2.0, 3.0):
            axes[1].axhline(ref, color="gray", lw=0.5, ls=":")
        axes[1].set_xlabel("$g$")
        axes[1].set_ylabel("log-ratio")
        axes[1].legend()
    fig.suptitle(f"Loop operators, {_lat_label(run)}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return warns


def fig_06(runs, out):
    """Plaquette, transverse and total energies along the ramp."""
    warns = []
    fig, ax = plt.subplots(figsize=(6, 4))
    run = runs[0]
    sweep = run.sweep()
    g = sweep["g"]
    if g.size == 0:
        _empty(ax, "empty sweep")
        warns.append("fig 6: empty sweep.csv")
    else:
        ax.plot(g, sweep["Z"], label=r"$\langle Z\rangle$")
        ax.plot(g, g * sweep["X"], label=r"$g\langle X\rangle$")
        ax.plot(g, sweep["H"], label=r"$\langle H\rangle$")
        ax.set_xlabel("$g$")
        ax.legend()
    ax.set_title(f"Energies, {_lat_label(run)}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return warns


def _derivatives(g, y):
    d1 = np.gradient(y, g)
    d2 = np.gradient(d1, g)
    return d1, d2


def fig_07(runs, out):
    """Energy derivatives; the second derivative valley marks g_c."""
    warns = []
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    run = runs[0]
    sweep = run.sweep()
    g = sweep["g"]
    if g.size < 5:
        for ax in axes:
            _empty(ax, "not enough sweep points")
        warns.append("fig 7: fewer than 5 sweep rows")
    else:
        for name, series in (
            (r"$\partial\langle Z\rangle/\partial g$", sweep["Z"]),
            (r"$\partial\langle gX\rangle/\partial g$", g * sweep["X"]),
            (r"$\partial\langle H\rangle/\partial g$", sweep["H"]),
        ):
            axes[0].plot(g, _derivatives(g, series)[0], label=name)
        axes[0].set_xlabel("$g$")
        axes[0].legend()
        _, d2 = _derivatives(g, sweep["H"])
        axes[1].plot(g, d2)
        idx = int(np.argmin(d2[1:-1])) + 1
        axes[1].axvline(g[idx], color="crimson", ls="--", lw=1)
        axes[1].annotate(f"$g_c \\approx {g[idx]:.3f}$", (g[idx], d2[idx]), textcoords="offset points", xytext=(8, 8))
        axes[1].set_xlabel("$g$")
        axes[1].set_ylabel(r"$\partial^2\langle H\rangle/\partial g^2$")
    fig.suptitle(f"Derivatives, {_lat_label(run)}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return warns


def fig_08(runs, out):
    """<Z> and <X> on one axis; their crossing is the self-dual point in d=3."""
    warns = []
    fig, ax = plt.subplots(figsize=(6, 4))
    run = pick_run(runs, 3) or runs[0]
    sweep = run.sweep()
    g = sweep["g"]
    if g.size == 0:
        _empty(ax, "empty sweep")
        warns.append("fig 8: empty sweep.csv")
    else:
        ax.plot(g, sweep["Z"], label=r"$\langle Z\rangle$")
        ax.plot(g, sweep["X"], label=r"$\langle X\rangle$")
        diff = sweep["Z"] - sweep["X"]
        sign_change = np.flatnonzero(np.diff(np.sign(diff)) != 0)
        if sign_change.size:
            i = int(sign_change[0])
            frac = diff[i] / (diff[i] - diff[i + 1])
            gc = g[i] + frac * (g[i + 1] - g[i])
            ax.axvline(gc, color="crimson", ls="--", lw=1)
            ax.annotate(f"crossing at $g={gc:.2f}$", (gc, sweep["Z"][i]), textcoords="offset points", xytext=(8, 0))
        else:
            warns.append("fig 8: series do not cross")
        ax.set_xlabel("$g$")
        ax.legend()
    ax.set_title(f"Duality comparison, {_lat_label(run)}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return warns


def _dos_panel(ax, hists, label):
    gs = sorted(hists)
    if not gs:
        _empty(ax, "no recorded histograms")
        return False
    support = hists[gs[0]][0]
    grid = np.full((len(support), len(gs)), np.nan)
    for j, g in enumerate(gs):
        ev, mass = hists[g]
        for i, e in enumerate(support):
            hit = np.flatnonzero(ev == e)
            if hit.size:
                grid[i, j] = mass[hit[0]]
    mesh = ax.pcolormesh(gs, support, grid, shading="nearest")
    ax.set_xlabel("$g$")
    ax.set_ylabel(label)
    return mesh


def fig_10(runs, out):
    """Densities of states over the whole ramp, both bases."""
    warns = []
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    run = runs[0]
    for ax, basis in zip(axes, ("Z", "X")):
        hists = run.dos(basis)
        mesh = _dos_panel(ax, hists, f"{basis} eigenvalue")
        if mesh is False:
            warns.append(f"fig 10: empty dos_{basis.lower()}.csv")
        else:
            fig.colorbar(mesh, ax=ax, label="mass")
    fig.suptitle(f"Densities of states, {_lat_label(run)}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return warns


def fig_11(runs, out):
    """DOS slices near the transition: three couplings and their inverses."""
    warns = []
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    run = runs[0]
    for ax, basis in zip(axes, ("Z", "X")):
        hists = run.dos(basis)
        if not hists:
            _empty(ax, "no recorded histograms")
            warns.append(f"fig 11: empty dos_{basis.lower()}.csv")
            continue
        gs = np.array(sorted(hists))
        if run.dimension == 3:
            wanted = (0.9, 1.0, 1.1) if basis == "Z" else (1 / 0.9, 1.0, 1 / 1.1)
        else:
            wanted = tuple(np.quantile(gs, (0.25, 0.5, 0.75)))
        for target in wanted:
            g = float(gs[int(np.argmin(np.abs(gs - target)))])
            ev, mass = hists[g]
            ax.plot(ev, mass, marker="o", label=f"$g={g:.3f}$")
        ax.set_xlabel(f"{basis} eigenvalue")
        ax.set_ylabel("mass")
        ax.legend()
    fig.suptitle(f"DOS slices, {_lat_label(run)}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return warns


def fig_12(runs, out):
    """Sector energies and splittings, with fitted lines in the legend."""
    warns = []
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    run = runs[0]
    sectors = run.sectors()
    if not sectors:
        for ax in axes:
            _empty(ax, "no sector data")
        warns.append("fig 12: empty sectors.csv")
    else:
        for labels, (g, e) in sorted(sectors.items()):
            axes[0].plot(g, e, label=labels)
        axes[0].set_xlabel("$g$")
        axes[0].set_ylabel("$E$")
        axes[0].legend(title="sector")
        ref_label = "+" * run.dimension
        if ref_label not in sectors:
            warns.append("fig 12: reference sector missing")
        else:
            g_ref, e_ref = sectors[ref_label]
            expo = 1.0 / (run.size + 1)
            for labels, (g, e) in sorted(sectors.items()):
                if labels == ref_label:
                    continue
                split = np.maximum(e - e_ref, 0.0)
                ys = split**expo
                if run.dimension == 2 and g.size >= 2:
                    slope, intercept = fit_line(g, ys)
                    axes[1].plot(g, ys, marker=".", ls="none")
                    axes[1].plot(
                        g,
                        slope * g + intercept,
                        label=f"{labels}: ${slope:.5f}g + {intercept:.5f}$",
                    )
                else:
                    axes[1].plot(g, split, label=labels)
            axes[1].set_xlabel("$g$")
            axes[1].set_ylabel(
                rf"$E_{{i1}}^{{1/{run.size + 1}}}$" if run.dimension == 2 else r"$E_{i1}$"
            )
            axes[1].legend(fontsize=8)
    fig.suptitle(f"Topological sectors, {_lat_label(run)}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return warns


def fig_13(runs, out):
    """d=2 vs d=3 comparison on the rescaled coupling (g - g_c)/g_c."""
    warns = []
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    shown = 0
    for d in (3, 2):
        run = pick_run(runs, d)
        if run is None:
            warns.append(f"fig 13: no d={d} run supplied")
            continue
        sweep = run.sweep()
        g = sweep["g"]
        if g.size < 5:
            warns.append(f"fig 13: d={d} sweep too short")
            continue
        _, d2 = _derivatives(g, sweep["H"])
        idx = int(np.argmin(d2[1:-1])) + 1
        gc = g[idx]
        x = (g - gc) / gc
        axes[0].plot(x, sweep["Z"] / abs(sweep["Z"][0]), label=f"d={d}")
        axes[1].plot(x, d2, label=f"d={d}")
        shown += 1
    if shown == 0:
        for ax in axes:
            _empty(ax, "no usable runs")
    else:
        axes[0].set_xlabel(r"$(g-g_c)/g_c$")
        axes[0].set_ylabel(r"$\langle Z\rangle / |\langle Z\rangle_{g=0}|$")
        axes[1].set_xlabel(r"$(g-g_c)/g_c$")
        axes[1].set_ylabel(r"$\partial^2\langle H\rangle/\partial g^2$")
        for ax in axes:
            ax.legend()
    fig.suptitle("Transition sharpness comparison")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return warns


BUILDERS = {
    5: fig_05,
    6: fig_06,
    7: fig_07,
    8: fig_08,
    10: fig_10,
    11: fig_11,
    12: fig_12,
    13: fig_13,
}


def render(run_dirs, fig_ids, out_dir, fmt="svg"):
    """Render the requested figures; returns {fig id: output path}.

    Raises SchemaError if a required input file or column is missing.
    Empty-but-valid inputs render as empty axes with a warning.
    """
    runs = [r if isinstance(r, RunDir) else RunDir(r) for r in run_dirs]
    if not runs:
        raise SchemaError("no run directories supplied")
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {}
    for fid in fig_ids:
        if fid not in BUILDERS:
            raise SchemaError(f"unknown figure id {fid}; have {sorted(BUILDERS)}")
        out = out_dir / f"fig{fid:02d}.{fmt}"
        for warning in BUILDERS[fid](runs, out):
            warnings.warn(warning)
        outputs[fid] = out
    return outputs
