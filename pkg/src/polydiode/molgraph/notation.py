"""Linear molecular notation: parser and canonical renderer.

Grammar (ASCII)::

    molecule    := chain
    chain       := unit ( bond? unit | branch )*
    branch      := '(' bond? chain ')'
    unit        := atom ringlabel* | ring | placeholder
    atom        := 'Cl' | 'C' | 'N' | 'O' | 'S' | 'H' | '[' element ']'
    ring        := 'c6' ( '<' digit '>' )?
    placeholder := '[' ('X' | 'Y' | 'R') ':' name ']'
    ringlabel   := bond? digit
    bond        := '-' | '=' | '#'

``c6`` is a benzene ring. Its substitution points follow a fixed
position table: the incoming bond takes position 0, branches take the
middle entries and the chain continuation takes the last one, so a
two-point ring (``c6<2>``) is para-linked. A bare ``c6`` uses as many
points as it has attachments; ``c6<k>`` asserts that exactly ``k`` are
used.

Unfilled valence on plain atoms is completed with implicit hydrogens.
Bracketed atoms (``[C]``) receive none. ``[X:NAME]``, ``[Y:NAME]`` and
``[R:NAME]`` expand catalog groups through a resolver supplied by the
caller; their atoms are tagged donor, acceptor and bridge respectively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Callable, NamedTuple

from .graph import (
    VALENCE,
    Atom,
    Bond,
    GroupTag,
    MolecularGraph,
    MolGraphError,
    assign_hybridization,
)

BOND_SYMBOL = {"-": "single", "=": "double", "#": "triple"}
SYMBOL_FOR = {"single": "", "double": "=", "triple": "#"}
ROLE_SECTION = {"X": "donor", "Y": "acceptor", "R": "bridge"}

# Ring positions per substitution count: first = incoming bond, last = chain continuation.
RING_POSITIONS = {
    0: (),
    1: (0,),
    2: (0, 3),
    3: (0, 1, 3),
    4: (0, 1, 5, 3),
    5: (0, 1, 2, 4, 3),
    6: (0, 1, 2, 4, 5, 3),
}


class ParseError(MolGraphError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class RenderError(MolGraphError):
    """The graph uses a feature the notation cannot express."""


class ResolvedGroup(NamedTuple):
    name: str  # canonical catalog name
    notation: str
    attachments: int  # 1 for donors/acceptors, 2 for insulators
    pi_electrons: int | None


Resolver = Callable[[str, str], ResolvedGroup]


@dataclass
class _Unit:
    kind: str  # atom | ring | group
    offset: int
    element: str = ""
    bracket: bool = False
    ring_k: int | None = None
    role: str = ""
    name: str = ""
    labels: list = field(default_factory=list)  # (bond, digit, offset)
    children: list = field(default_factory=list)  # (bond, _Unit, offset, is_branch)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self, n=1) -> str:
        return self.text[self.pos:self.pos + n]

    def error(self, message, offset=None):
        raise ParseError(message, self.pos if offset is None else offset)

    def parse(self) -> _Unit:
        if not self.text:
            self.error("empty molecule", 0)
        head = self.chain()
        if self.pos != len(self.text):
            ch = self.text[self.pos]
            self.error("unbalanced ')'" if ch == ")" else f"unexpected character {ch!r}")
        return head

    def bond(self) -> str | None:
        ch = self.peek()
        if ch in BOND_SYMBOL:
            self.pos += 1
            return BOND_SYMBOL[ch]
        return None

    def chain(self) -> _Unit:
        head = self.unit()
        cur = head
        while self.pos < len(self.text):
            ch = self.peek()
            if ch == ")":
                break
            if ch == "(":
                start = self.pos
                self.pos += 1
                order = self.bond()
                if self.peek() in ("", ")"):
                    self.error("empty branch")
                sub = self.chain()
                if self.peek() != ")":
                    self.error("unclosed branch", start)
                self.pos += 1
                cur.children.append((order, sub, start, True))
                continue
            start = self.pos
            order = self.bond()
            if self.pos >= len(self.text) or self.peek() in "()":
                self.error("bond symbol must be followed by an atom")
            nxt = self.unit()
            cur.children.append((order, nxt, start, False))
            cur = nxt
        return head

    def unit(self) -> _Unit:
        start = self.pos
        text = self.text
        if text.startswith("c6", start):
            self.pos += 2
            k = None
            if self.peek() == "<":
                close = text.find(">", self.pos)
                body = text[self.pos + 1:close] if close != -1 else ""
                if close == -1 or not body.isdigit() or int(body) > 6:
                    self.error("ring substitution count must be <0> .. <6>")
                k = int(body)
                self.pos = close + 1
            return _Unit("ring", start, ring_k=k)
        if text.startswith("Cl", start):
            self.pos += 2
            unit = _Unit("atom", start, element="Cl")
        elif self.peek() in ("C", "N", "O", "S", "H"):
            unit = _Unit("atom", start, element=self.peek())
            self.pos += 1
        elif self.peek() == "[":
            close = text.find("]", start)
            if close == -1:
                self.error("unclosed '['")
            body = text[start + 1:close]
            self.pos = close + 1
            if ":" in body:
                role, _, name = body.partition(":")
                if role not in ROLE_SECTION or not name:
                    self.error(f"bad group placeholder [{body}]", start)
                return _Unit("group", start, role=role, name=name)
            if body not in VALENCE:
                self.error(f"unknown element {body!r}", start + 1)
            unit = _Unit("atom", start, element=body, bracket=True)
        elif self.peek() == "c":
            self.error("aromatic carbon is only available as the ring token 'c6'")
        elif self.peek().isalpha():
            j = self.pos + 1
            if j < len(text) and text[j].islower():
                j += 1
            self.error(f"unknown element {text[self.pos:j]!r}")
        else:
            self.error(f"unexpected character {self.peek()!r}")
        while self.pos < len(text):
            lab = self.pos
            order = None
            if self.peek() in BOND_SYMBOL and self.peek(2)[1:].isdigit():
                order = self.bond()
            if self.peek().isdigit():
                unit.labels.append((order, int(self.peek()), lab))
                self.pos += 1
            else:
                self.pos = lab
                break
        return unit


class _Builder:
    def __init__(self, resolver: Resolver | None):
        self.resolver = resolver
        self.elements: list[str] = []
        self.bracket: list[bool] = []
        self.tags: list[str] = []
        self.bonds: dict[frozenset, str] = {}
        self.groups: list[GroupTag] = []
        self.open_labels: dict[int, tuple[int, str | None, int]] = {}

    def add_atom(self, element, bracket=False, tag="unassigned") -> int:
        self.elements.append(element)
        self.bracket.append(bracket)
        self.tags.append(tag)
        return len(self.elements) - 1

    def add_bond(self, a, b, order, offset):
        key = frozenset((a, b))
        if a == b or key in self.bonds:
            raise ParseError(f"bond {a}-{b} repeats an existing bond", offset)
        self.bonds[key] = order

    def build(self, unit: _Unit, parent: int | None, parent_order: str | None, offset: int):
        n_children = len(unit.children)
        if unit.kind == "atom":
            site = self.add_atom(unit.element, unit.bracket)
            entry = site
            exits = [site] * n_children
            for order, digit, lab in unit.labels:
                if digit in self.open_labels:
                    other, other_order, _ = self.open_labels.pop(digit)
                    if order and other_order and order != other_order:
                        raise ParseError(f"ring label {digit} closed with a conflicting bond", lab)
                    self.add_bond(other, site, order or other_order or "single", lab)
                else:
                    self.open_labels[digit] = (site, order, lab)
        elif unit.kind == "ring":
            used = n_children + (parent is not None)
            k = used if unit.ring_k is None else unit.ring_k
            if k != used:
                raise ParseError(f"ring declares {k} substitution points but {used} are used", unit.offset)
            sites = [self.add_atom("C") for _ in range(6)]
            for i in range(6):
                self.add_bond(sites[i], sites[(i + 1) % 6], "aromatic", unit.offset)
            slots = [sites[p] for p in RING_POSITIONS[k]]
            entry = slots[0] if parent is not None else None
            exits = slots[1:] if parent is not None else slots
        else:
            entry, last = self.expand_group(unit)
            exits = [last] * n_children
        if parent is not None:
            self.add_bond(parent, entry, parent_order or "single", offset)
        for (order, child, off, _), site in zip(unit.children, exits):
            self.build(child, site, order, off)

    def expand_group(self, unit: _Unit) -> tuple[int, int]:
        if self.resolver is None:
            raise ParseError(f"unresolved group placeholder [{unit.role}:{unit.name}]", unit.offset)
        try:
            group = self.resolver(unit.role, unit.name)
        except LookupError as exc:
            raise ParseError(str(exc.args[0] if exc.args else exc), unit.offset) from None
        sub = _Parser(group.notation).parse()
        first = len(self.elements)
        inner = _Builder(None)
        inner.build(sub, None, None, 0)
        if inner.open_labels:
            raise ParseError(f"group {group.name} has an unclosed ring label", unit.offset)
        section = ROLE_SECTION[unit.role]
        for el, br in zip(inner.elements, inner.bracket):
            self.add_atom(el, br, section)
        for key, order in inner.bonds.items():
            a, b = sorted(key)
            self.bonds[frozenset((a + first, b + first))] = order
        # main-chain end of the fragment takes a second attachment
        last = sub
        while last.children and not last.children[-1][3]:
            last = last.children[-1][1]
        exit_site = first + (_preorder_index(sub, last) if group.attachments == 2 else 0)
        atoms = tuple(range(first, len(self.elements)))
        self.groups.append(GroupTag(group.name, section, atoms, first, group.pi_electrons))
        return first, exit_site

    def finish(self) -> MolecularGraph:
        heavy = len(self.elements)
        totals = [0.0] * heavy
        for key, order in self.bonds.items():
            for s in key:
                totals[s] += {"single": 1, "double": 2, "triple": 3, "aromatic": 1.5}[order]
        for site in range(heavy):
            if self.bracket[site]:
                continue
            missing = VALENCE[self.elements[site]] - totals[site]
            for _ in range(max(0, int(missing))):
                h = self.add_atom("H", tag=self.tags[site])
                self.bonds[frozenset((site, h))] = "single"
                for gi, grp in enumerate(self.groups):
                    if site in grp.atoms:
                        self.groups[gi] = GroupTag(grp.name, grp.role, grp.atoms + (h,), grp.root, grp.pi_electrons)
        orders: list[list[str]] = [[] for _ in self.elements]
        bonds = []
        for key, order in sorted(self.bonds.items(), key=lambda kv: sorted(kv[0])):
            a, b = sorted(key)
            orders[a].append(order)
            orders[b].append(order)
            bonds.append(Bond(a, b, order))
        atoms = tuple(
            Atom(el, assign_hybridization(el, orders[i]), i) for i, el in enumerate(self.elements)
        )
        return MolecularGraph(atoms, tuple(bonds), tuple(self.tags), tuple(self.groups))


def _preorder_index(head: _Unit, target: _Unit) -> int:
    """Site offset of ``target`` within a fragment built from ``head``."""
    counter = count()
    found = {}

    def walk(u):
        found[id(u)] = next(counter)
        if u.kind == "ring":
            for _ in range(5):
                next(counter)
        for child in u.children:
            walk(child[1])

    walk(head)
    return found[id(target)]


def parse_molecule(text: str, resolver: Resolver | None = None) -> MolecularGraph:
    """Parse linear notation into a hydrogen-complete molecular graph.

    >>> parse_molecule("c6").formula()
    'C6H6'
    """
    head = _Parser(text).parse()
    builder = _Builder(resolver)
    builder.build(head, None, None, 0)
    if builder.open_labels:
        digit, (_, _, offset) = min(builder.open_labels.items(), key=lambda kv: kv[1][2])
        raise ParseError(f"unclosed ring label {digit}", offset)
    return builder.finish()


# ---------------------------------------------------------------------------
# rendering


def _implicit_h(g: MolecularGraph, site: int, skeleton_bonds) -> int:
    total = sum({"single": 1, "double": 2, "triple": 3, "aromatic": 1.5}[o] for _, o in skeleton_bonds)
    return max(0, int(VALENCE[g.element(site)] - total))


def _bond_total(orders) -> float:
    return sum({"single": 1, "double": 2, "triple": 3, "aromatic": 1.5}[o] for o in orders)


def render_molecule(g: MolecularGraph) -> str:
    """Canonical notation for ``g``; parsing the result gives an isomorphic graph.

    Hydrogens bonded to a heavier atom are written implicitly. Raises
    RenderError for graphs outside the notation: fused or bridged aromatic
    rings, substitution patterns missing from the ring position table, and
    disconnected graphs.
    """
    if not g.atoms:
        raise RenderError("empty graph")
    if len(g.components()) > 1:
        raise RenderError("disconnected graph")

    def droppable(i):
        if g.element(i) != "H":
            return False
        nb = g.bonded(i)
        return len(nb) == 1 and nb[0][1] == "single" and g.element(nb[0][0]) != "H"

    skel = {i for i in range(len(g)) if not droppable(i)}
    ring_of = {s: ring for ring in g.aromatic_rings for s in ring}
    for bond in g.bonds:
        if bond.order == "aromatic" and bond.a not in ring_of:
            raise RenderError(f"aromatic bond {bond.a}-{bond.b} outside a benzene ring")
    unit_of = {s: ring_of.get(s, (s,)) for s in skel}

    def skel_nbrs(i):
        return [(j, o) for j, o in g.bonded(i) if j in skel]

    def h_count(i):
        return sum(1 for j, _ in g.bonded(i) if j not in skel)

    # spanning tree over units (single atoms or whole rings), depth first
    start = unit_of[min(skel)]
    children: dict = {}
    entry_of = {start: None}
    tree_edges: set = set()
    stack = [(start, None)]
    while stack:
        u, via = stack.pop()
        if u in children:
            continue
        children[u] = []
        if via is not None:
            tree_edges.add(frozenset(via[:2]))
            children[unit_of[via[0]]].append(via)
            entry_of[u] = via[1]
        nbrs = [(s, j, o) for s in u for j, o in skel_nbrs(s) if j not in u]
        for s, j, o in reversed(nbrs):
            if unit_of[j] not in children:
                stack.append((unit_of[j], (s, j, o)))

    ring_token = {}
    for u in children:
        if len(u) == 6:
            ring_token[u], children[u] = _place_ring(g, u, entry_of[u], children[u], skel_nbrs, h_count)

    closures = []
    for bond in g.bonds:
        if bond.a in skel and bond.b in skel and unit_of[bond.a] != unit_of[bond.b]:
            if frozenset(bond.endpoints) not in tree_edges:
                if len(unit_of[bond.a]) > 1 or len(unit_of[bond.b]) > 1:
                    raise RenderError("ring closure through a benzene ring is not expressible")
                closures.append((bond.a, bond.b, bond.order))

    emitted = []

    def preorder(u):
        emitted.append(u)
        for via in children[u]:
            preorder(unit_of[via[1]])

    preorder(start)
    rank = {u[0]: i for i, u in enumerate(emitted) if len(u) == 1}
    events = []
    for a, b, o in closures:
        first, second = sorted((a, b), key=rank.__getitem__)
        events.append((rank[first], 0, first, second, o))
        events.append((rank[second], 1, second, first, o))
    events.sort()
    labels: dict[int, list] = {}
    free = list(range(1, 10))
    open_digit = {}
    for _, closing, site, other, o in events:
        key = frozenset((site, other))
        if closing:
            d = open_digit.pop(key)
            free.append(d)
            free.sort()
        else:
            if not free:
                raise RenderError("more than nine simultaneous ring closures")
            d = open_digit[key] = free.pop(0)
        labels.setdefault(site, []).append(SYMBOL_FOR[o] + str(d))

    def atom_text(s):
        nbrs = skel_nbrs(s)
        implicit = max(0, int(VALENCE[g.element(s)] - _bond_total(o for _, o in nbrs)))
        hs = h_count(s)
        el = g.element(s)
        text = el if hs == implicit else f"[{el}]"
        text += "".join(labels.get(s, []))
        if hs != implicit:
            text += "(H)" * hs
        return text

    def emit(u):
        parts = [atom_text(u[0]) if len(u) == 1 else ring_token[u]]
        kids = children[u]
        for idx, (s, j, o) in enumerate(kids):
            body = SYMBOL_FOR[o] + emit(unit_of[j])
            parts.append(body if idx == len(kids) - 1 else f"({body})")
        return "".join(parts)

    return emit(start)


def _place_ring(g, ring, entry, kids, skel_nbrs, h_count):
    """Pick the ring orientation matching the position table; order children by it."""
    for s in ring:
        subs = sum(1 for j, _ in skel_nbrs(s) if j not in ring)
        if h_count(s) != max(0, 1 - subs) or subs > 1:
            raise RenderError(f"ring carbon {s} substitution is not expressible")
    used = [v[0] for v in kids] + ([entry] if entry is not None else [])
    k = len(used)
    table = RING_POSITIONS[k]
    rank = {p: i for i, p in enumerate(table)}
    for shift in range(6):
        for direction in (1, -1):
            pos = {ring[i]: (direction * (i - shift)) % 6 for i in range(6)}
            if entry is not None and pos[entry] != 0:
                continue
            if sorted(pos[s] for s in used) != sorted(table):
                continue
            ordered = sorted(kids, key=lambda v: rank[pos[v[0]]])
            return ("c6" if k <= 1 else f"c6<{k}>"), ordered
    raise RenderError("ring substitution pattern is not in the position table")
