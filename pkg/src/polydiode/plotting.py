"""Figures for reports: energy-level diagrams, I-V curves, gate voltages, sweep summaries."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .device import DiodeModel, EnergyProfile, TruthTable  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def _levels(ax, x0, energies, occupations, color, shift=0.0):
    for e, occ in zip(energies, occupations):
        y = e + shift
        ax.hlines(y, x0, x0 + 0.8, color=color, lw=2 if occ else 1, linestyles="-" if occ else "--")
        if occ:
            ax.text(x0 + 0.82, y, "↑↓" if occ == 2 else "↑", va="center", fontsize=7)


def energy_diagram(profile: EnergyProfile, path, title: str = "") -> Path:
    """Donor and acceptor pi levels (eV) at zero bias and with the acceptor side raised by delta E_lumo."""
    from .huckel import occupy

    scale = profile.ev_per_unit
    sides = []
    for side in (profile.donor, profile.acceptor):
        occ = occupy(side.orbitals, side.pi.electron_count)
        sides.append(([e * scale for e in side.orbitals.energies], occ.counts))
    delta = profile.delta_e_lumo_ev
    fig, axes = plt.subplots(1, 2, figsize=(9, 5), sharey=True)
    for ax, shift, name in ((axes[0], 0.0, "zero bias"), (axes[1], delta, "forward bias")):
        _levels(ax, 0.0, *sides[0], "tab:blue")
        _levels(ax, 2.2, *sides[1], "tab:red", shift)
        lo = min(min(sides[0][0]), min(sides[1][0]) + shift)
        ax.add_patch(plt.Rectangle((1.15, lo), 0.7, profile.bridge_barrier_ev, color="0.85"))
        ax.set_xticks([0.4, 1.5, 2.6], ["donor", "bridge", "acceptor"])
        ax.set_title(name)
        ax.set_xlim(-0.3, 3.4)
    axes[0].set_ylabel("orbital energy (eV, relative to alpha)")
    fig.suptitle(title or f"delta E_lumo = {delta:.3f} eV")
    fig.tight_layout()
    return _save(fig, path)


def iv_plot(model: DiodeModel, points, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    v = [p[0] for p in points]
    i = [p[1] for p in points]
    ax.plot(v, i, color="tab:purple")
    ax.axvline(model.forward_threshold, color="0.6", ls=":", lw=1)
    ax.axvline(-model.reverse_threshold, color="0.6", ls=":", lw=1)
    ax.axhline(0.0, color="0.3", lw=0.5)
    ax.set_xlabel("bias (V)")
    ax.set_ylabel("current (A)")
    ax.set_title(title or f"threshold diode, ratio {model.rectification_ratio:.3g}")
    fig.tight_layout()
    return _save(fig, path)


def truth_table_plot(table: TruthTable, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = ["".join(map(str, r.inputs)) for r in table.rows]
    volts = [r.output_volts for r in table.rows]
    colors = ["tab:gray" if r.logic is None else ("tab:green" if r.logic else "tab:orange") for r in table.rows]
    ax.bar(labels, volts, color=colors)
    ax.axhline(table.levels.v_low_max, color="tab:orange", ls="--", lw=1)
    ax.axhline(table.levels.v_high_min, color="tab:green", ls="--", lw=1)
    ax.set_xlabel("inputs AB")
    ax.set_ylabel("V(C) (V)")
    ax.set_title(f"{table.kind} gate output")
    fig.tight_layout()
    return _save(fig, path)


def sweep_plot(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(max(6, 0.3 * len(rows)), 4))
    names = [f"{r.spec.donor_group}|{r.spec.bridge}|{r.spec.acceptor_group}" for r in rows]
    ax.bar(range(len(rows)), [r.model.rectification_ratio for r in rows], color="tab:blue")
    ax.axhline(1.0, color="0.3", lw=0.5)
    ax.set_xticks(range(len(rows)), names, rotation=90, fontsize=7)
    ax.set_ylabel("rectification ratio")
    fig.tight_layout()
    return _save(fig, path)
