"""Conjugated pi-system extraction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .graph import MolecularGraph, MultiplePiSystems, NoPiSystem


@dataclass(frozen=True)
class PiSite:
    """One p orbital of the conjugated system.

    Plain sp2 atoms carry their element as label and one electron. Catalog
    groups collapse into a single pseudo-site labelled with the group name,
    carrying the group's pi electrons.
    """

    label: str
    atoms: tuple[int, ...]
    electrons: int
    pseudo: bool = False

    @property
    def site(self) -> int:
        return self.atoms[0]


@dataclass(frozen=True)
class PiSystem:
    sites: tuple[PiSite, ...]
    bonds: tuple[tuple[int, int], ...]  # local index pairs, i < j
    rings: tuple[tuple[int, ...], ...]  # aromatic rings as local indices

    @property
    def member_sites(self) -> tuple[int, ...]:
        return tuple(s.site for s in self.sites)

    @property
    def electron_count(self) -> int:
        return sum(s.electrons for s in self.sites)

    @property
    def size(self) -> int:
        return len(self.sites)

    def neighbors(self, i: int) -> list[int]:
        return [b if a == i else a for a, b in self.bonds if i in (a, b)]

    def adjacency(self) -> list[list[int]]:
        n = len(self.sites)
        adj = [[0] * n for _ in range(n)]
        for a, b in self.bonds:
            adj[a][b] = adj[b][a] = 1
        return adj


def pi_systems(g: MolecularGraph, section: str | None = None) -> list[PiSystem]:
    """All disjoint conjugated systems of ``g`` (optionally within one section).

    Members are the maximal connected sets of sp2 atoms outside catalog
    groups, plus one pseudo-site per conjugating group bonded to them.
    """
    allowed = set(range(len(g))) if section is None else set(g.sites_with_tag(section))
    in_group = {a for grp in g.groups for a in grp.atoms}
    sp2 = [i for i in sorted(allowed) if g.atoms[i].hybridization == "sp2" and i not in in_group]
    out = []
    for comp in g.components(sp2):
        comp_set = set(comp)
        sites = [PiSite(g.element(i), (i,), 1) for i in comp]
        pairs = [(a, b) for a in comp for b in g.neighbors(a) if b in comp_set and a < b]
        for grp in g.groups:
            if grp.pi_electrons is None or grp.root not in allowed:
                continue
            anchors = [j for j in g.neighbors(grp.root) if j in comp_set]
            if anchors:
                members = (grp.root,) + tuple(a for a in grp.atoms if a != grp.root)
                sites.append(PiSite(grp.name, members, grp.pi_electrons, pseudo=True))
                pairs += [(grp.root, a) for a in anchors]
        rings = [r for r in g.aromatic_rings if set(r) <= comp_set]
        out.append(_canonical(sites, pairs, rings))
    return out


def extract_pi_system(g: MolecularGraph, section: str | None = None) -> PiSystem:
    found = pi_systems(g, section)
    where = f" in section {section!r}" if section else ""
    if not found:
        raise NoPiSystem(f"no sp2 atoms{where}; the structure is saturated")
    if len(found) > 1:
        raise MultiplePiSystems(f"{len(found)} disjoint pi systems{where}; select a section")
    return found[0]


def _canonical(sites: list[PiSite], pairs, rings) -> PiSystem:
    """Order sites so isomorphic systems give identical matrices.

    Colour refinement ranks sites by label and neighbourhood; a breadth-first
    walk from the lowest colour then fixes the order, breaking remaining
    ties (symmetry-equivalent sites) by graph index.
    """
    index = {s.site: i for i, s in enumerate(sites)}
    n = len(sites)
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for a, b in pairs:
        i, j = index[a], index[b]
        nbrs[i].append(j)
        nbrs[j].append(i)
    ring_count = [0] * n
    for r in rings:
        for s in r:
            ring_count[index[s]] += 1
    keys = [(s.label, s.electrons, s.pseudo, ring_count[i]) for i, s in enumerate(sites)]
    colour = _rank(keys)
    while True:
        refined = _rank([(colour[i], tuple(sorted(colour[j] for j in nbrs[i]))) for i in range(n)])
        if len(set(refined)) == len(set(colour)):
            colour = refined
            break
        colour = refined
    order: list[int] = []
    placed = set()
    for seed in sorted(range(n), key=lambda i: (colour[i], sites[i].site)):
        if seed in placed:
            continue
        queue = deque([seed])
        placed.add(seed)
        while queue:
            cur = queue.popleft()
            order.append(cur)
            for j in sorted(nbrs[cur], key=lambda i: (colour[i], sites[i].site)):
                if j not in placed:
                    placed.add(j)
                    queue.append(j)
    local = {old: new for new, old in enumerate(order)}
    new_sites = tuple(sites[i] for i in order)
    bonds = tuple(sorted(tuple(sorted((local[index[a]], local[index[b]]))) for a, b in pairs))
    new_rings = tuple(tuple(local[index[s]] for s in r) for r in rings)
    return PiSystem(new_sites, bonds, new_rings)


def _rank(keys) -> list[int]:
    table = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [table[k] for k in keys]
