"""Molecular graphs: data model, linear notation, pi-system extraction and inventory."""

from .graph import (
    ATOMIC_MASS,
    VALENCE,
    VALENCE_ELECTRONS,
    Atom,
    Bond,
    GroupTag,
    InventoryReport,
    MolecularGraph,
    MolGraphError,
    MultiplePiSystems,
    NoPiSystem,
    Violation,
    disjoint_union,
    inventory,
    kekule_orders,
    validate_graph,
)
from .notation import ParseError, RenderError, ResolvedGroup, parse_molecule, render_molecule
from .pisystem import PiSite, PiSystem, extract_pi_system, pi_systems

__all__ = [
    "ATOMIC_MASS",
    "VALENCE",
    "VALENCE_ELECTRONS",
    "Atom",
    "Bond",
    "GroupTag",
    "InventoryReport",
    "MolecularGraph",
    "MolGraphError",
    "MultiplePiSystems",
    "NoPiSystem",
    "ParseError",
    "PiSite",
    "PiSystem",
    "RenderError",
    "ResolvedGroup",
    "Violation",
    "disjoint_union",
    "extract_pi_system",
    "inventory",
    "kekule_orders",
    "parse_molecule",
    "pi_systems",
    "render_molecule",
    "validate_graph",
]
