"""Design compiler: functional-group catalog, diode and gate construction, design-space enumeration."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping

from .huckel import DEFAULT_SITE_TABLE
from .molgraph import (
    Atom,
    Bond,
    GroupTag,
    MolecularGraph,
    ResolvedGroup,
    parse_molecule,
    render_molecule,
    validate_graph,
)

ROLES = ("donor", "acceptor", "insulator")
ROLE_LETTER = {"donor": "X", "acceptor": "Y", "insulator": "R"}
LETTER_ROLE = {v: k for k, v in ROLE_LETTER.items()}
ROLE_ALIASES = {
    "donor": "donor", "x": "donor",
    "acceptor": "acceptor", "y": "acceptor",
    "insulator": "insulator", "bridge": "insulator", "r": "insulator",
}
CONTACT_FERMI_EV = {"Au": 5.1, "Al": 4.1, "U": 3.6}
GATE_KINDS = ("AND", "OR")
AROMATIC_BRIDGES = ("C6H4", "PHENYL", "PHENYLENE", "BENZENE", "C6", "C6H5")

_SUBSCRIPTS = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")


class BuildError(Exception):
    pass


class UnknownGroup(BuildError, LookupError):
    def __str__(self):
        return self.args[0]


class RoleMismatch(BuildError, LookupError):
    def __str__(self):
        return self.args[0]


class AromaticBridge(BuildError, ValueError):
    pass


class UnsupportedGate(BuildError, ValueError):
    pass


class InvalidSpec(BuildError, ValueError):
    pass


@dataclass(frozen=True)
class FunctionalGroupSpec:
    name: str
    role: str
    notation: str
    pi_electrons: int | None
    aliases: tuple[str, ...] = ()
    description: str = ""

    @property
    def attachments(self) -> int:
        return 2 if self.role == "insulator" else 1

    @property
    def pi_pseudo_site(self) -> tuple[float, float] | None:
        """Default (h, k) of the group's conjugated pseudo-site, if it has one."""
        if self.pi_electrons is None:
            return None
        p = DEFAULT_SITE_TABLE[self.name]
        return (p.h, p.k)

    def resolved(self) -> ResolvedGroup:
        return ResolvedGroup(self.name, self.notation, self.attachments, self.pi_electrons)

    @cached_property
    def fragment(self) -> MolecularGraph:
        """The group as a stub whose open valences are the attachment points."""
        letter = ROLE_LETTER[self.role]
        caps = "[Cl]" + f"[{letter}:{self.name}]" + ("[Cl]" if self.attachments == 2 else "")
        capped = parse_molecule(caps, lambda _r, _n: self.resolved())
        cl = [i for i, a in enumerate(capped.atoms) if a.element == "Cl" and i not in capped.groups[0].atoms]
        return remove_sites(capped, cl)


CATALOG: tuple[FunctionalGroupSpec, ...] = (
    FunctionalGroupSpec("NH2", "donor", "N", 2, description="amino"),
    FunctionalGroupSpec("OH", "donor", "O", 2, description="hydroxyl"),
    FunctionalGroupSpec("CH3", "donor", "C", 2, description="methyl"),
    FunctionalGroupSpec("CH2CH3", "donor", "CC", 2, description="ethyl"),
    FunctionalGroupSpec("NO2", "acceptor", "N(=O)=O", 0, description="nitro"),
    # "CH" is accepted as a spelling of the nitrile fragment
    FunctionalGroupSpec("CN", "acceptor", "C#N", 0, aliases=("CH",), description="nitrile"),
    FunctionalGroupSpec("CHO", "acceptor", "C=O", 0, description="formyl"),
    FunctionalGroupSpec("NC", "acceptor", "N#[C]", 0, description="isocyano"),
    FunctionalGroupSpec("CH2", "insulator", "C", None, description="methylene"),
    FunctionalGroupSpec("CH2CH2", "insulator", "CC", None, description="dimethylene"),
)


def normalize_role(role: str) -> str:
    try:
        return ROLE_ALIASES[role.strip().lower()]
    except KeyError:
        raise InvalidSpec(f"unknown group role {role!r}; use donor, acceptor or bridge") from None


def normalize_name(name: str) -> str:
    return name.strip().translate(_SUBSCRIPTS).strip("-").replace("-", "")


def catalog_groups(role: str | None = None) -> list[FunctionalGroupSpec]:
    if role is None:
        return list(CATALOG)
    role = normalize_role(role)
    return [g for g in CATALOG if g.role == role]


def lookup_group(name: str, role: str | None = None) -> FunctionalGroupSpec:
    key = normalize_name(name)
    for group in CATALOG:
        if key == group.name or key in group.aliases:
            if role is not None and group.role != normalize_role(role):
                raise RoleMismatch(
                    f"group {group.name} is {_article(group.role)} {group.role}, not usable as {normalize_role(role)}"
                )
            return group
    if role is not None:
        names = ", ".join(g.name for g in catalog_groups(role))
        raise UnknownGroup(f"unknown {normalize_role(role)} group {name!r}; choose one of: {names}")
    raise UnknownGroup(f"unknown group {name!r}")


def _article(word: str) -> str:
    return "an" if word[0] in "aeiou" else "a"


def resolver(strict: bool = True):
    """Placeholder resolver for :func:`parse_molecule`."""

    def resolve(letter: str, name: str) -> ResolvedGroup:
        role = LETTER_ROLE[letter]
        group = lookup_group(name, role if strict else None)
        if not strict and (group.role == "insulator") != (role == "insulator"):
            raise RoleMismatch(f"group {group.name} cannot stand in the {role} position")
        return group.resolved()

    return resolve


def catalog_listing() -> list[dict]:
    """Machine-readable catalog."""
    out = []
    for g in CATALOG:
        out.append({
            "name": g.name,
            "role": g.role,
            "notation": g.notation,
            "aliases": list(g.aliases),
            "attachments": g.attachments,
            "pi_electrons": g.pi_electrons,
            "pi_pseudo_site": None if g.pi_pseudo_site is None else {"h": g.pi_pseudo_site[0], "k": g.pi_pseudo_site[1]},
            "description": g.description,
        })
    return out


def remove_sites(g: MolecularGraph, sites) -> MolecularGraph:
    drop = set(sites)
    keep = [i for i in range(len(g)) if i not in drop]
    new = {old: i for i, old in enumerate(keep)}
    atoms = tuple(Atom(g.atoms[old].element, g.atoms[old].hybridization, i) for i, old in enumerate(keep))
    bonds = tuple(Bond(new[b.a], new[b.b], b.order) for b in g.bonds if b.a in new and b.b in new)
    tags = tuple(g.section_tags[old] for old in keep)
    groups = tuple(
        GroupTag(t.name, t.role, tuple(new[a] for a in t.atoms if a in new), new[t.root], t.pi_electrons)
        for t in g.groups if t.root in new
    )
    return MolecularGraph(atoms, bonds, tags, groups)


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class DiodeSpec:
    donor_group: str
    acceptor_group: str
    bridge: str
    rings_donor: int = 1
    rings_acceptor: int = 1
    contact_metal: str = "Au"

    def check(self, strict_roles: bool = True) -> "DiodeSpec":
        """Resolve names against the catalog; returns the spec with canonical names."""
        if self.rings_donor < 1 or self.rings_acceptor < 1:
            raise InvalidSpec("each side needs at least one benzene ring")
        if self.contact_metal not in CONTACT_FERMI_EV:
            raise InvalidSpec(f"unknown contact metal {self.contact_metal!r}; choose one of: Au, Al, U")
        if strict_roles:
            x = lookup_group(self.donor_group, "donor")
            y = lookup_group(self.acceptor_group, "acceptor")
        else:
            x, y = lookup_group(self.donor_group), lookup_group(self.acceptor_group)
            for g in (x, y):
                if g.role == "insulator":
                    raise RoleMismatch(f"group {g.name} is an insulator, not a ring substituent")
        if normalize_name(self.bridge).upper() in AROMATIC_BRIDGES:
            raise AromaticBridge(f"bridge must be aliphatic; {self.bridge} is aromatic and would conjugate the two halves")
        r = lookup_group(self.bridge, "insulator")
        return DiodeSpec(x.name, y.name, r.name, self.rings_donor, self.rings_acceptor, self.contact_metal)

    def swapped(self) -> "DiodeSpec":
        """Same molecule with donor and acceptor groups exchanged (roles unchecked)."""
        return DiodeSpec(self.acceptor_group, self.donor_group, self.bridge,
                         self.rings_acceptor, self.rings_donor, self.contact_metal)


@dataclass(frozen=True)
class GateSpec:
    kind: str
    diode_a: DiodeSpec
    diode_b: DiodeSpec
    load_resistance: float = 1e9
    supply_voltage: float = 5.0

    def __post_init__(self):
        kind = self.kind.strip().upper().replace("_GATE", "")
        if kind in ("NOT", "XOR", "NAND", "NOR", "XNOR"):
            raise UnsupportedGate(
                f"{kind} needs signal inversion, which diode-resistor logic cannot provide; only AND and OR compile"
            )
        if kind not in GATE_KINDS:
            raise UnsupportedGate(f"unknown gate kind {self.kind!r}; choose AND or OR")
        object.__setattr__(self, "kind", kind)
        if not self.load_resistance > 0:
            raise InvalidSpec(f"load resistance must be positive, got {self.load_resistance}")
        if not self.supply_voltage > 0:
            raise InvalidSpec(f"supply voltage must be positive, got {self.supply_voltage}")


@dataclass(frozen=True)
class Contact:
    metal: str
    fermi_ev: float
    anchor: int  # graph site the electrode pseudo-site binds to
    side: str


@dataclass(frozen=True)
class CompiledDesign:
    kind: str  # diode | AND | OR
    graph: MolecularGraph
    sections: Mapping[str, tuple[int, ...]]
    spec: DiodeSpec | GateSpec
    notation: str
    contacts: tuple[Contact, ...] = ()
    node_q: str | None = None
    output_c: str | None = None
    inputs: tuple[str, ...] = ()
    diodes: tuple["CompiledDesign", ...] = ()

    @property
    def canonical(self) -> str:
        return render_molecule(self.graph)


def _flood_sections(g: MolecularGraph, groups) -> dict[int, str]:
    """Section of each ring atom: the side whose X/Y group its ring chain carries."""
    in_group = {a for grp in g.groups for a in grp.atoms}
    tags: dict[int, str] = {}
    for grp in groups:
        if grp.role not in ("donor", "acceptor"):
            continue
        queue = deque(j for j in g.neighbors(grp.root) if j not in grp.atoms)
        seen = set(queue)
        while queue:
            cur = queue.popleft()
            if g.atoms[cur].hybridization != "sp2" or cur in in_group:
                continue
            tags[cur] = grp.role
            for j in g.neighbors(cur):
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        for a in grp.atoms:
            tags[a] = grp.role
    for site, tag in list(tags.items()):
        for j in g.neighbors(site):
            if g.element(j) == "H":
                tags[j] = tag
    return tags


def _sections_of(g: MolecularGraph, groups, prefix: str = "") -> dict[str, tuple[int, ...]]:
    flood = _flood_sections(g, groups)
    out = {}
    for role, name in (("donor", "donor"), ("insulator", "bridge"), ("acceptor", "acceptor")):
        if role == "insulator":
            sites = set()
            for grp in groups:
                if grp.role == "bridge":
                    sites |= set(grp.atoms)
        else:
            sites = {s for s, t in flood.items() if t == role}
        out[prefix + name] = tuple(sorted(sites))
    return out


def diode_notation(spec: DiodeSpec) -> str:
    return (f"[X:{spec.donor_group}]" + "c6<2>" * spec.rings_donor + f"[R:{spec.bridge}]"
            + "c6<2>" * spec.rings_acceptor + f"[Y:{spec.acceptor_group}]")


def build_diode(spec: DiodeSpec, check_roles: bool = True,
                fermi_levels: Mapping[str, float] | None = None) -> CompiledDesign:
    """Compile a donor-bridge-acceptor diode: X-(ring)n-R-(ring)m-Y, para-linked."""
    spec = spec.check(strict_roles=check_roles)
    text = diode_notation(spec)
    g = parse_molecule(text, resolver(strict=check_roles))
    sections = _sections_of(g, g.groups)
    tags = ["unassigned"] * len(g)
    for name in ("donor", "bridge", "acceptor"):
        for s in sections[name]:
            tags[s] = name
    g = g.with_tags(tags)
    problems = validate_graph(g)
    if problems:
        raise BuildError(f"compiler produced invalid chemistry: {problems[0].message}")
    fermi = dict(CONTACT_FERMI_EV, **(fermi_levels or {}))
    x_root = next(t.root for t in g.groups if t.role == "donor")
    y_root = next(t.root for t in g.groups if t.role == "acceptor")
    contacts = (
        Contact(spec.contact_metal, fermi[spec.contact_metal], x_root, "donor"),
        Contact(spec.contact_metal, fermi[spec.contact_metal], y_root, "acceptor"),
    )
    sections["contacts"] = (x_root, y_root)
    return CompiledDesign("diode", g, sections, spec, text, contacts)


def _gate_branch(spec: DiodeSpec, q_side: str) -> str:
    if q_side == "donor":
        return (f"c6<3>([X:{spec.donor_group}])" + "c6<2>" * (spec.rings_donor - 1) + f"[R:{spec.bridge}]"
                + "c6<2>" * spec.rings_acceptor + f"[Y:{spec.acceptor_group}]")
    return (f"c6<3>([Y:{spec.acceptor_group}])" + "c6<2>" * (spec.rings_acceptor - 1) + f"[R:{spec.bridge}]"
            + "c6<2>" * spec.rings_donor + f"[X:{spec.donor_group}]")


def build_gate(spec: GateSpec, fermi_levels: Mapping[str, float] | None = None) -> CompiledDesign:
    """Compile a two-input diode-logic gate.

    The two diodes meet at an sp3 CH junction (node Q) that also carries a
    phenyl output wire (node C). AND joins the diodes at their donor
    (anode) ends, OR at their acceptor (cathode) ends; the inputs A and B
    are the free ends.
    """
    da = build_diode(spec.diode_a, fermi_levels=fermi_levels)
    db = build_diode(spec.diode_b, fermi_levels=fermi_levels)
    q_side = "donor" if spec.kind == "AND" else "acceptor"
    text = f"C({_gate_branch(da.spec, q_side)})({_gate_branch(db.spec, q_side)})c6"
    g = parse_molecule(text, resolver(strict=True))
    groups_a, groups_b = g.groups[:3], g.groups[3:]
    sections = {}
    sections.update(_sections_of(g, groups_a, "a."))
    sections.update(_sections_of(g, groups_b, "b."))
    tags = ["unassigned"] * len(g)
    for key, sites in sections.items():
        for s in sites:
            tags[s] = key.split(".")[1]
    g = g.with_tags(tags)
    problems = validate_graph(g)
    if problems:
        raise BuildError(f"compiler produced invalid chemistry: {problems[0].message}")
    q_site = 0
    ring = g.aromatic_rings
    wire = next(r for r in ring if q_site in {n for s in r for n in g.neighbors(s)}
                and not any(tags[s] != "unassigned" for s in r))
    sections["q"] = (q_site,)
    sections["output"] = tuple(sorted(wire))
    return CompiledDesign(spec.kind, g, sections, spec, text, node_q="Q", output_c="C",
                          inputs=("A", "B"), diodes=(da, db))


def enumerate_designs(fixed: Mapping[str, str] | None = None, rings_donor: int = 1, rings_acceptor: int = 1,
                      contact_metal: str = "Au") -> Iterator[DiodeSpec]:
    """Cross product of the catalog over every role not fixed, donor-major order."""
    fixed = {normalize_role(k): lookup_group(v, k).name for k, v in (fixed or {}).items()}
    choices = []
    for role in ROLES:
        if role in fixed:
            choices.append([fixed[role]])
        else:
            choices.append([g.name for g in catalog_groups(role)])
    for x, y, r in itertools.product(*choices):
        yield DiodeSpec(x, y, r, rings_donor, rings_acceptor, contact_metal)


@dataclass(frozen=True)
class _Signature:
    text: str


def annotate_groups(g: MolecularGraph) -> MolecularGraph:
    """Recognise catalog donors and acceptors bonded to benzene rings in a plain graph.

    A substituent matches when the tree hanging off the ring carbon equals
    a catalog fragment. Matched groups gain a :class:`GroupTag` so that
    pi-system extraction treats them as pseudo-sites.
    """
    ring_sites = {s for r in g.aromatic_rings for s in r}
    known = {a for t in g.groups for a in t.atoms}
    wanted = {}
    for grp in CATALOG:
        if grp.role == "insulator":
            continue
        frag = grp.fragment
        root = frag.groups[0].root
        wanted[_tree_signature(frag, root, None)] = grp
    found = list(g.groups)
    for s in sorted(ring_sites):
        for j in g.neighbors(s):
            if j in ring_sites or j in known or g.element(j) == "H":
                continue
            sub = _subtree(g, j, s)
            if sub is None or sub & ring_sites:
                continue
            grp = wanted.get(_tree_signature(g, j, s))
            if grp is not None:
                found.append(GroupTag(grp.name, grp.role, tuple(sorted(sub)), j, grp.pi_electrons))
                known |= sub
    return MolecularGraph(g.atoms, g.bonds, g.section_tags, tuple(found))


def _subtree(g, start, parent):
    seen = {start}
    stack = [(start, parent)]
    while stack:
        cur, par = stack.pop()
        for j in g.neighbors(cur):
            if j == par:
                continue
            if j in seen:
                return None  # cycle
            seen.add(j)
            stack.append((j, cur))
    return seen


def _tree_signature(g, node, parent) -> str:
    parts = sorted(
        g.bond_order(node, j)[0] + _tree_signature(g, j, node) for j in g.neighbors(node) if j != parent
    )
    return g.element(node) + "(" + ",".join(parts) + ")"
