"""Hückel (LCAO) pi-electron engine.

Energies are carried in natural units, alpha = 0 and beta = -1, so a value
``E`` means ``alpha + x * beta`` with ``x = -E``. Conversion to eV happens
only at the reporting boundary through :meth:`OrbitalSet.to_ev`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .jacobi import ConvergenceFailure, jacobi_eigh
from .molgraph import PiSystem

__all__ = [
    "ConvergenceFailure",
    "DEFAULT_SITE_TABLE",
    "FrontierReport",
    "HuckelError",
    "HuckelMatrix",
    "HuckelParameters",
    "MissingParameter",
    "NoFrontier",
    "Occupation",
    "OrbitalLabel",
    "OrbitalSet",
    "SiteParameter",
    "TooManyElectrons",
    "build_matrix",
    "classify_orbitals",
    "frontier",
    "generic_ordering_holds",
    "occupy",
    "solve_eigensystem",
]


class HuckelError(Exception):
    pass


class MissingParameter(HuckelError, KeyError):
    def __str__(self):
        return self.args[0]


class TooManyElectrons(HuckelError, ValueError):
    pass


class NoFrontier(HuckelError):
    pass


@dataclass(frozen=True)
class SiteParameter:
    """Coulomb offset ``h`` and bond factor ``k`` of a heteroatom or group site.

    ``ring_shift`` is added to the ``h`` of every carbon in the ring the
    group is bonded to; it carries the section-wide level shift a donor or
    acceptor imposes on its ring.
    """

    h: float
    k: float
    ring_shift: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"bond factor k must be positive, got {self.k}")


# Calibrated values, not measured ones. Donors: filled pseudo-site below the
# ring levels plus a negative ring shift. Acceptors: empty pseudo-site inside
# the ring HOMO-LUMO gap plus a positive ring shift.
DEFAULT_SITE_TABLE: dict[str, SiteParameter] = {
    "N": SiteParameter(0.5, 1.0),
    "O": SiteParameter(1.0, 1.0),
    "NH2": SiteParameter(1.5, 0.8, -0.10),
    "OH": SiteParameter(2.0, 0.8, -0.08),
    "CH3": SiteParameter(2.0, 0.7, -0.06),
    "CH2CH3": SiteParameter(2.0, 0.65, -0.05),
    "NO2": SiteParameter(0.8, 1.0, 0.10),
    "CN": SiteParameter(0.6, 0.9, 0.08),
    "CHO": SiteParameter(0.5, 1.0, 0.06),
    "NC": SiteParameter(0.4, 0.8, 0.05),
}


@dataclass(frozen=True)
class HuckelParameters:
    alpha: float = 0.0
    beta: float = -1.0
    alpha_ev: float = 0.0
    beta_ev: float = -2.4
    table: Mapping[str, SiteParameter] = field(default_factory=lambda: dict(DEFAULT_SITE_TABLE))
    degeneracy_tol: float = 1e-6
    jacobi_tol: float = 1e-12
    max_sweeps: int = 100

    def __post_init__(self):
        if not self.beta < 0 or not self.beta_ev < 0:
            raise ValueError("beta must be negative")

    def site(self, label: str) -> SiteParameter:
        try:
            return self.table[label]
        except KeyError:
            raise MissingParameter(f"no Hückel parameters for site {label!r}") from None


@dataclass(frozen=True)
class HuckelMatrix:
    entries: np.ndarray
    site_labels: tuple[str, ...]
    alpha: float = 0.0
    beta: float = -1.0

    @property
    def dimension(self) -> int:
        return len(self.site_labels)


def build_matrix(pi: PiSystem, params: HuckelParameters | None = None) -> HuckelMatrix:
    params = params or HuckelParameters()
    n = pi.size
    if n < 1:
        raise ValueError("pi system has no sites")
    alpha, beta = params.alpha, params.beta
    h = np.zeros(n)
    for i, site in enumerate(pi.sites):
        if site.label != "C":
            h[i] = params.site(site.label).h
    for i, site in enumerate(pi.sites):
        if not site.pseudo:
            continue
        shift = params.site(site.label).ring_shift
        if shift == 0.0:
            continue
        touched: set[int] = set()
        for anchor in pi.neighbors(i):
            rings = [r for r in pi.rings if anchor in r]
            for r in rings:
                touched |= set(r)
            if not rings:
                touched.add(anchor)
        for j in sorted(touched):
            if pi.sites[j].label == "C":
                h[j] += shift
    m = np.zeros((n, n))
    m[np.diag_indices(n)] = alpha + h * beta
    for a, b in pi.bonds:
        sa, sb = pi.sites[a], pi.sites[b]
        if sa.pseudo or sb.pseudo:
            k = params.site(sa.label if sa.pseudo else sb.label).k
        else:
            ka = 1.0 if sa.label == "C" else params.site(sa.label).k
            kb = 1.0 if sb.label == "C" else params.site(sb.label).k
            k = math.sqrt(ka * kb)
        m[a, b] = m[b, a] = k * beta
    m.setflags(write=False)
    return HuckelMatrix(m, tuple(s.label for s in pi.sites), alpha, beta)


@dataclass(frozen=True)
class OrbitalLabel:
    kind: str  # pi | n | pi*
    bonding: str  # bonding | nonbonding | antibonding


@dataclass(frozen=True)
class OrbitalSet:
    """Eigenpairs: ``coefficients[:, j]`` expands orbital j over the pi sites."""

    energies: np.ndarray
    coefficients: np.ndarray
    labels: tuple[OrbitalLabel, ...]
    site_labels: tuple[str, ...]
    alpha: float = 0.0
    scale: float = 1.0  # energy of one |beta| in these units
    units: str = "beta"
    sweeps: int = 0

    def __len__(self):
        return len(self.energies)

    def to_ev(self, params: HuckelParameters) -> "OrbitalSet":
        if self.units == "ev":
            return self
        x = (self.energies - self.alpha) / params.beta
        energies = params.alpha_ev + x * params.beta_ev
        energies.setflags(write=False)
        return replace(self, energies=energies, alpha=params.alpha_ev,
                       scale=abs(params.beta_ev) * self.scale / abs(params.beta), units="ev")


def solve_eigensystem(m: HuckelMatrix, params: HuckelParameters | None = None) -> OrbitalSet:
    params = params or HuckelParameters()
    values, vectors, sweeps = jacobi_eigh(m.entries, tol=params.jacobi_tol, max_sweeps=params.max_sweeps)
    values.setflags(write=False)
    vectors.setflags(write=False)
    scale = abs(m.beta)
    labels = _labels(values, m.alpha, params.degeneracy_tol * scale)
    return OrbitalSet(values, vectors, labels, m.site_labels, m.alpha, scale, "beta", sweeps)


def _labels(energies, alpha, tol) -> tuple[OrbitalLabel, ...]:
    out = []
    for e in energies:
        if e < alpha - tol:
            out.append(OrbitalLabel("pi", "bonding"))
        elif e > alpha + tol:
            out.append(OrbitalLabel("pi*", "antibonding"))
        else:
            out.append(OrbitalLabel("n", "nonbonding"))
    return tuple(out)


def classify_orbitals(orbitals: OrbitalSet, params: HuckelParameters | None = None) -> tuple[OrbitalLabel, ...]:
    """Bonding (below alpha), nonbonding (at alpha) or antibonding (above alpha)."""
    params = params or HuckelParameters()
    return _labels(orbitals.energies, orbitals.alpha, params.degeneracy_tol * orbitals.scale)


def generic_ordering_holds(labels) -> bool:
    """True when, in ascending energy, pi levels precede n levels precede pi* levels."""
    rank = {"pi": 0, "n": 1, "pi*": 2}
    seq = [rank[lab.kind] for lab in labels]
    return seq == sorted(seq)


@dataclass(frozen=True)
class Occupation:
    counts: tuple[int, ...]
    total_electrons: int
    homo_index: int | None
    lumo_index: int | None
    is_open_shell: bool

    def energy(self, orbitals: OrbitalSet) -> float:
        return float(sum(c * e for c, e in zip(self.counts, orbitals.energies)))


def shells(energies, tol: float) -> list[list[int]]:
    """Group ascending energies into degenerate shells (consecutive gaps <= tol)."""
    out: list[list[int]] = []
    for i, e in enumerate(energies):
        if out and e - energies[out[-1][-1]] <= tol:
            out[-1].append(i)
        else:
            out.append([i])
    return out


def occupy(orbitals: OrbitalSet, n_electrons: int, params: HuckelParameters | None = None) -> Occupation:
    """Ground-state filling: Aufbau order, at most two per orbital, Hund within shells.

    Inside a degenerate shell every member takes one electron before any is
    paired; pairing then starts from the lowest orbital index.
    """
    params = params or HuckelParameters()
    n = len(orbitals)
    if n_electrons < 0:
        raise ValueError("electron count must be non-negative")
    if n_electrons > 2 * n:
        raise TooManyElectrons(f"{n_electrons} electrons do not fit in {n} orbitals")
    counts = [0] * n
    left = n_electrons
    for shell in shells(orbitals.energies, params.degeneracy_tol * orbitals.scale):
        if left == 0:
            break
        put = min(left, 2 * len(shell))
        for idx in shell[:min(put, len(shell))]:
            counts[idx] = 1
        for idx in shell[:max(0, put - len(shell))]:
            counts[idx] = 2
        left -= put
    occupied = [i for i, c in enumerate(counts) if c > 0]
    empty = [i for i, c in enumerate(counts) if c == 0]
    return Occupation(
        counts=tuple(counts),
        total_electrons=n_electrons,
        homo_index=occupied[-1] if occupied else None,
        lumo_index=empty[0] if empty else None,
        is_open_shell=any(c == 1 for c in counts),
    )


@dataclass(frozen=True)
class FrontierReport:
    e_homo: float
    e_lumo: float
    gap: float
    ionization_potential: float
    electron_affinity: float
    transfer_balance: float
    homo_index: int
    lumo_index: int
    units: str = "beta"

    def to_ev(self, params: HuckelParameters) -> "FrontierReport":
        if self.units == "ev":
            return self

        def conv(e):
            return params.alpha_ev + (e - params.alpha) / params.beta * params.beta_ev

        return _frontier(conv(self.e_homo), conv(self.e_lumo), self.homo_index, self.lumo_index, "ev")


def _frontier(e_homo, e_lumo, homo, lumo, units) -> FrontierReport:
    ip = -e_homo
    ea = -e_lumo
    return FrontierReport(e_homo, e_lumo, e_lumo - e_homo, ip, ea, ea - ip, homo, lumo, units)


def frontier(orbitals: OrbitalSet, occ: Occupation, params: HuckelParameters | None = None) -> FrontierReport:
    """HOMO/LUMO levels with Koopmans estimates I = -E_homo, A = -E_lumo, and A - I."""
    if occ.homo_index is None or occ.lumo_index is None:
        state = "empty" if occ.homo_index is None else "fully occupied"
        raise NoFrontier(f"orbital set is {state}; HOMO/LUMO pair undefined")
    e = orbitals.energies
    return _frontier(float(e[occ.homo_index]), float(e[occ.lumo_index]), occ.homo_index, occ.lumo_index,
                     orbitals.units)
