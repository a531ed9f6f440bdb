#!/usr/bin/env python3
"""Render maser-ldp CSV output as figures.

Usage: plot_figures.py DATA_DIR [--out FIG_DIR]

Each figure is drawn only when its input tables are present in DATA_DIR.
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def load(data: Path, name: str):
    path = data / name
    if not path.exists():
        return None
    frame = pd.read_csv(path, comment="#")
    with open(path) as fh:
        manifest = fh.read().rstrip("\n").splitlines()[-1]
    if "complete=false" in manifest:
        print(f"note: {name} is incomplete")
    return frame


def stationary(data, out):
    summary = load(data, "stationary_summary.csv")
    dist = load(data, "stationary_distribution.csv")
    if summary is None or dist is None:
        return
    grid = dist.pivot_table(index="n", columns="alpha", values="prob", fill_value=0.0)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.pcolormesh(grid.columns, grid.index, grid.values, shading="nearest", cmap="Greys")
    ax.plot(summary["alpha"], summary["mean"], color="black", lw=1.5)
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel("n")
    ax.set_ylim(0, summary["mean"].max() * 1.3)
    fig.tight_layout()
    fig.savefig(out / "stationary.png", dpi=150)
    plt.close(fig)


def potential(data, out):
    levels = load(data, "potential_levels.csv")
    limit = load(data, "potential_limit.csv")
    if levels is None or limit is None:
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    for nex, part in levels.groupby("nex"):
        ax.plot(part["x"], part["U_over_nex"], lw=1, label=f"N_ex={nex:g}")
    ax.plot(limit["x"], limit["v"], "k--", lw=1.5, label="limit")
    ax.set_xlabel(r"$n/N_{ex}$")
    ax.set_ylabel(r"$U/N_{ex}$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "potential.png", dpi=150)
    plt.close(fig)


def trajectory(data, out):
    events = load(data, "trajectory_events.csv")
    if events is None:
        return
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    for path, part in events.groupby("path"):
        top.step(part["time"], part["count"], where="post", lw=1, label=f"path {path}")
        bottom.step(part["time"], part["level"], where="post", lw=0.6)
    top.set_ylabel(r"$\Lambda_t$")
    bottom.set_ylabel("n")
    bottom.set_xlabel("t")
    top.legend()
    fig.tight_layout()
    fig.savefig(out / "trajectories.png", dpi=150)
    plt.close(fig)


def grid(data, out):
    table = load(data, "grid.csv")
    if table is None:
        return
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, column, title in zip(axes, ["dlambda_ds", "gap"], [r"$\lambda'(s)$", r"$g(s)$"]):
        piv = table.pivot(index="s", columns="alpha", values=column)
        values = np.log10(piv.values) if column == "gap" else piv.values
        mesh = ax.pcolormesh(piv.columns, piv.index, values, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=r"$\log_{10} g$" if column == "gap" else None)
        ax.set_xlabel(r"$\alpha$")
        ax.set_ylabel("s")
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out / "grid.png", dpi=150)
    plt.close(fig)


def zoom(data, out):
    table = load(data, "zoom.csv")
    if table is None:
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    for nex, part in table.groupby("nex"):
        ax.plot(part["s"], part["dlambda_ds"] / nex, label=f"N_ex={nex:g}")
    ax.set_xlabel("s")
    ax.set_ylabel(r"$\lambda'(s)/N_{ex}$")
    ax.locator_params(axis="x", nbins=5)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "zoom.png", dpi=150)
    plt.close(fig)


def spectrum(data, out):
    table = load(data, "spectrum.csv")
    if table is None:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for _, part in table.groupby("index"):
        ax.plot(part["alpha"], part["eigenvalue"], color="black", lw=0.7)
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel("eigenvalue")
    fig.tight_layout()
    fig.savefig(out / "spectrum.png", dpi=150)
    plt.close(fig)


def cumulants(data, out):
    table = load(data, "cumulants.csv")
    if table is None:
        return
    variance = table[table["order"] == 2]
    fig, ax = plt.subplots(figsize=(6, 4))
    for nex, part in variance.groupby("nex"):
        ax.semilogy(part["alpha"], part["per_nex"], label=f"N_ex={nex:g}")
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel(r"$V/N_{ex}$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "cumulants.png", dpi=150)
    plt.close(fig)


def ldp(data, out):
    table = load(data, "ldp.csv")
    clt = load(data, "ldp_clt.csv")
    if table is None:
        return
    ok = table[table["attainable"]]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(ok["x"], ok["rate"], label="I(x)")
    if clt is not None and clt["V"].iloc[0] > 0:
        m, v = clt["m"].iloc[0], clt["V"].iloc[0]
        ax.plot(ok["x"], (ok["x"] - m) ** 2 / (2 * v), "--", label="Gaussian")
    ax.set_xlabel("x")
    ax.set_ylabel("I(x)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "ldp.png", dpi=150)
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("data", type=Path)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()
    out = args.out or args.data
    out.mkdir(parents=True, exist_ok=True)
    for draw in (stationary, potential, trajectory, grid, zoom, spectrum, cumulants, ldp):
        draw(args.data, out)


if __name__ == "__main__":
    main()
