"""Molecular graph data model, valence validation and electron inventory."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

ELEMENTS = ("C", "H", "N", "O", "S", "Cl")
VALENCE = {"C": 4, "H": 1, "N": 3, "O": 2, "S": 2, "Cl": 1}
VALENCE_ELECTRONS = {"C": 4, "H": 1, "N": 5, "O": 6, "S": 6, "Cl": 7}
ATOMIC_MASS = {
    "C": 12.011,
    "H": 1.008,
    "N": 14.007,
    "O": 15.999,
    "S": 32.06,
    "Cl": 35.45,
}

BOND_ORDERS = ("single", "double", "triple", "aromatic")
BOND_VALUE = {"single": 1, "double": 2, "triple": 3}
HYBRIDIZATIONS = ("sp2", "sp3", "sp", "terminal")
SECTIONS = ("donor", "bridge", "acceptor", "contact", "unassigned")

# Catalog constants recorded for reference only; geometry is never computed.
BENZENE_CC_BOND_LENGTH = 1.397  # angstrom
SP2_BOND_ANGLE = 120.0  # degrees


class MolGraphError(Exception):
    """Base class for molecular graph errors."""


class NoPiSystem(MolGraphError):
    """Raised when a graph (or section) has no sp2 atom to build a pi system from."""


class MultiplePiSystems(MolGraphError):
    """Raised when a single pi system was requested but several disjoint ones exist."""


@dataclass(frozen=True)
class Atom:
    element: str
    hybridization: str
    site_index: int

    def __post_init__(self):
        if self.element not in ELEMENTS:
            raise ValueError(f"unsupported element {self.element!r}")
        if self.hybridization not in HYBRIDIZATIONS:
            raise ValueError(f"unknown hybridization {self.hybridization!r}")


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: str = "single"

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"bond endpoints must be distinct (site {self.a})")
        if self.order not in BOND_ORDERS:
            raise ValueError(f"unknown bond order {self.order!r}")

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.a, self.b)

    def other(self, site: int) -> int:
        return self.b if site == self.a else self.a


@dataclass(frozen=True)
class GroupTag:
    """A catalog functional group embedded in a graph.

    ``root`` is the atom bonded to the rest of the molecule (the attachment
    point); ``pi_electrons`` is None for groups that are not conjugated
    pseudo-sites (aliphatic insulators).
    """

    name: str
    role: str
    atoms: tuple[int, ...]
    root: int
    pi_electrons: int | None = None


@dataclass(frozen=True)
class MolecularGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    section_tags: tuple[str, ...] = ()
    groups: tuple[GroupTag, ...] = ()

    def __post_init__(self):
        n = len(self.atoms)
        if not self.section_tags:
            object.__setattr__(self, "section_tags", ("unassigned",) * n)
        if len(self.section_tags) != n:
            raise ValueError("section_tags must have one entry per atom")
        for tag in self.section_tags:
            if tag not in SECTIONS:
                raise ValueError(f"unknown section tag {tag!r}")
        for i, atom in enumerate(self.atoms):
            if atom.site_index != i:
                raise ValueError(f"atom at position {i} has site_index {atom.site_index}")
        seen = set()
        for bond in self.bonds:
            for end in bond.endpoints:
                if not 0 <= end < n:
                    raise ValueError(f"bond endpoint {end} does not exist")
            key = frozenset(bond.endpoints)
            if key in seen:
                raise ValueError(f"duplicate bond between {bond.a} and {bond.b}")
            seen.add(key)

    def __len__(self):
        return len(self.atoms)

    @cached_property
    def _adjacency(self) -> tuple[tuple[tuple[int, str], ...], ...]:
        adj: list[list[tuple[int, str]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond.order))
            adj[bond.b].append((bond.a, bond.order))
        return tuple(tuple(sorted(x)) for x in adj)

    def neighbors(self, site: int) -> tuple[int, ...]:
        return tuple(j for j, _ in self._adjacency[site])

    def bonded(self, site: int) -> tuple[tuple[int, str], ...]:
        """(neighbor, order) pairs of ``site``, sorted by neighbor index."""
        return self._adjacency[site]

    def bond_order(self, a: int, b: int) -> str | None:
        for j, order in self._adjacency[a]:
            if j == b:
                return order
        return None

    def element(self, site: int) -> str:
        return self.atoms[site].element

    def hydrogen_count(self, site: int) -> int:
        return sum(1 for j in self.neighbors(site) if self.atoms[j].element == "H")

    def sites_with_tag(self, tag: str) -> tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.section_tags) if t == tag)

    def with_tags(self, tags: Sequence[str] | Mapping[int, str]) -> "MolecularGraph":
        if isinstance(tags, Mapping):
            new = list(self.section_tags)
            for site, tag in tags.items():
                new[site] = tag
            tags = new
        return MolecularGraph(self.atoms, self.bonds, tuple(tags), self.groups)

    def formula(self) -> str:
        """Hill-order formula, e.g. ``C6H6``."""
        counts: dict[str, int] = {}
        for atom in self.atoms:
            counts[atom.element] = counts.get(atom.element, 0) + 1
        order = []
        if "C" in counts:
            order = ["C"] + (["H"] if "H" in counts else [])
        order += sorted(e for e in counts if e not in order)
        return "".join(e + (str(counts[e]) if counts[e] > 1 else "") for e in order)

    @cached_property
    def aromatic_rings(self) -> tuple[tuple[int, ...], ...]:
        """Six-membered aromatic carbon rings, each in cyclic order.

        A ring starts at its lowest site index and proceeds towards the
        lower-indexed of that atom's two ring neighbours.
        """
        arom: dict[int, list[int]] = {}
        for bond in self.bonds:
            if bond.order == "aromatic":
                arom.setdefault(bond.a, []).append(bond.b)
                arom.setdefault(bond.b, []).append(bond.a)
        rings = []
        seen: set[int] = set()
        for start in sorted(arom):
            if start in seen:
                continue
            comp = _component(start, lambda s: arom.get(s, []))
            seen |= comp
            if len(comp) != 6 or any(len(arom[s]) != 2 for s in comp):
                continue
            if any(self.atoms[s].element != "C" for s in comp):
                continue
            first = min(comp)
            cycle = [first, min(arom[first])]
            while len(cycle) < 6:
                prev, cur = cycle[-2], cycle[-1]
                cycle.append(next(x for x in arom[cur] if x != prev))
            rings.append(tuple(cycle))
        return tuple(rings)

    def components(self, sites: Iterable[int] | None = None) -> list[tuple[int, ...]]:
        """Connected components of the subgraph induced by ``sites``."""
        allowed = set(range(len(self.atoms)) if sites is None else sites)
        out = []
        seen: set[int] = set()
        for s in sorted(allowed):
            if s in seen:
                continue
            comp = _component(s, lambda x: (j for j in self.neighbors(x) if j in allowed))
            seen |= comp
            out.append(tuple(sorted(comp)))
        return out


def _component(start, step) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt in step(cur):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def assign_hybridization(element: str, orders: Iterable[str]) -> str:
    orders = list(orders)
    if element in ("H", "Cl"):
        return "terminal"
    if "aromatic" in orders or "double" in orders:
        return "sp2"
    if "triple" in orders:
        return "sp"
    return "sp3"


def disjoint_union(*graphs: MolecularGraph) -> MolecularGraph:
    """Place several graphs side by side without connecting them."""
    atoms, bonds, tags, groups = [], [], [], []
    offset = 0
    for g in graphs:
        for atom in g.atoms:
            atoms.append(Atom(atom.element, atom.hybridization, atom.site_index + offset))
        bonds += [Bond(b.a + offset, b.b + offset, b.order) for b in g.bonds]
        tags += list(g.section_tags)
        groups += [
            GroupTag(t.name, t.role, tuple(a + offset for a in t.atoms), t.root + offset, t.pi_electrons)
            for t in g.groups
        ]
        offset += len(g.atoms)
    return MolecularGraph(tuple(atoms), tuple(bonds), tuple(tags), tuple(groups))


def kekule_orders(g: MolecularGraph) -> dict[frozenset, int]:
    """Integer bond orders with every aromatic ring replaced by a Kekulé structure.

    The ring's lowest-index atom starts a double bond towards its lower-index
    ring neighbour; bonds then alternate around the ring.  Aromatic bonds not
    inside a detected ring are left out of the mapping.
    """
    orders = {frozenset(b.endpoints): BOND_VALUE[b.order] for b in g.bonds if b.order != "aromatic"}
    for ring in g.aromatic_rings:
        for i in range(6):
            orders[frozenset((ring[i], ring[(i + 1) % 6]))] = 2 if i % 2 == 0 else 1
    return orders


@dataclass(frozen=True)
class Violation:
    kind: str  # valence | connectivity | aromatic | hybridization
    site: int
    message: str


def _valence_exception(g: MolecularGraph, site: int, total: int, orders) -> bool:
    """Neutral drawings of nitro and isocyano groups that exceed the plain valence table.

    Nitro is accepted as N(=O)=O (nitrogen total 5) and isocyanide as
    R-N#C (nitrogen total 4, terminal carbon total 3); charges are not modelled.
    """
    element = g.element(site)
    nbrs = g.bonded(site)
    if element == "N" and total == 5:
        oxy = [(j, o) for j, o in nbrs if g.element(j) == "O"]
        return len(oxy) == 2 and any(o == "double" for _, o in oxy)
    if element == "N" and total == 4:
        return any(o == "triple" and g.element(j) == "C" and len(g.neighbors(j)) == 1 for j, o in nbrs)
    if element == "C" and total == 3 and len(nbrs) == 1:
        j, o = nbrs[0]
        return o == "triple" and g.element(j) == "N" and len(g.neighbors(j)) == 2
    return False


def validate_graph(g: MolecularGraph) -> list[Violation]:
    """Report every valence, aromaticity and connectivity problem; empty means valid."""
    report: list[Violation] = []
    ring_bonds = {frozenset((r[i], r[(i + 1) % 6])) for r in g.aromatic_rings for i in range(6)}
    for bond in g.bonds:
        if bond.order == "aromatic" and frozenset(bond.endpoints) not in ring_bonds:
            report.append(Violation("aromatic", min(bond.endpoints),
                                    f"aromatic bond {bond.a}-{bond.b} is not inside a six-membered carbon ring"))
    orders = kekule_orders(g)
    for atom in g.atoms:
        i = atom.site_index
        total = 0.0
        for j, order in g.bonded(i):
            key = frozenset((i, j))
            total += orders[key] if key in orders else 1.5
        expected = VALENCE[atom.element]
        if total != expected and not _valence_exception(g, i, int(total), orders):
            report.append(Violation("valence", i,
                                    f"{atom.element} at site {i} has bond order sum {total:g}, expected {expected}"))
        want = assign_hybridization(atom.element, (o for _, o in g.bonded(i)))
        if atom.hybridization != want:
            report.append(Violation("hybridization", i,
                                    f"site {i} marked {atom.hybridization}, bonding implies {want}"))
    comps = g.components()
    for comp in comps[1:]:
        report.append(Violation("connectivity", comp[0],
                                f"fragment starting at site {comp[0]} ({len(comp)} atoms) is disconnected"))
    return report


@dataclass(frozen=True)
class InventoryReport:
    formula: str
    molecular_mass: float
    valence_electrons: int
    sigma_electrons: int
    pi_electrons: int
    lone_pair_electrons: int
    ring_count: int
    counts: dict = field(default_factory=dict)


def inventory(g: MolecularGraph) -> InventoryReport:
    """Mass and valence-electron census of a graph.

    Every bond holds one sigma pair. Double bonds add one pi pair, triple
    bonds two; an aromatic ring holds six delocalised pi electrons. What is
    left of the valence electrons is lone pairs.
    """
    counts: dict[str, int] = {}
    for atom in g.atoms:
        counts[atom.element] = counts.get(atom.element, 0) + 1
    mass = round(sum(ATOMIC_MASS[e] * n for e, n in counts.items()), 6)
    valence = sum(VALENCE_ELECTRONS[e] * n for e, n in counts.items())
    sigma = 2 * len(g.bonds)
    pi = 0
    for bond in g.bonds:
        if bond.order == "double":
            pi += 2
        elif bond.order == "triple":
            pi += 4
    rings = len(g.aromatic_rings)
    pi += 6 * rings
    return InventoryReport(
        formula=g.formula(),
        molecular_mass=mass,
        valence_electrons=valence,
        sigma_electrons=sigma,
        pi_electrons=pi,
        lone_pair_electrons=valence - sigma - pi,
        ring_count=rings,
        counts=dict(sorted(counts.items())),
    )
