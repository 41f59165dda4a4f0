import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import flood_sp2

from polydiode.builder import resolver
from polydiode.huckel import build_matrix
from polydiode.molgraph import (
    VALENCE,
    Atom,
    Bond,
    GroupTag,
    MolecularGraph,
    MultiplePiSystems,
    NoPiSystem,
    disjoint_union,
    extract_pi_system,
    inventory,
    kekule_orders,
    parse_molecule,
    pi_systems,
    validate_graph,
)
from polydiode.molgraph.graph import assign_hybridization


def kinds(g):
    return [v.kind for v in validate_graph(g)]


def test_atom_and_bond_validation():
    with pytest.raises(ValueError):
        Atom("Xx", "sp3", 0)
    with pytest.raises(ValueError):
        Atom("C", "sp4", 0)
    with pytest.raises(ValueError):
        Bond(1, 1)
    with pytest.raises(ValueError):
        Bond(0, 1, "quadruple")


def test_graph_rejects_bad_endpoints_and_duplicates():
    atoms = (Atom("C", "sp3", 0), Atom("C", "sp3", 1))
    with pytest.raises(ValueError):
        MolecularGraph(atoms, (Bond(0, 2),))
    with pytest.raises(ValueError):
        MolecularGraph(atoms, (Bond(0, 1), Bond(1, 0)))
    with pytest.raises(ValueError):
        MolecularGraph(atoms, (), section_tags=("donor",))


@pytest.mark.parametrize("orders,expected", [
    (["single"] * 4, "sp3"),
    (["double", "single", "single"], "sp2"),
    (["aromatic", "aromatic", "single"], "sp2"),
    (["triple", "single"], "sp"),
])
def test_hybridization_from_bonding(orders, expected):
    assert assign_hybridization("C", orders) == expected


@pytest.mark.parametrize("text", ["c6", "CC", "C=C", "C#N", "C1CCCCC1", "c6c6", "OCC(O)C", "CN#[C]",
                                  "c6c6<2>c6", "Cc6<3>(C)C"])
def test_well_formed_molecules_validate(text):
    assert kinds(parse_molecule(text)) == []


def test_benzene_graph():
    g = parse_molecule("c6")
    assert g.formula() == "C6H6"
    assert len(g.aromatic_rings) == 1
    assert all(g.atoms[i].hybridization == "sp2" for i in g.aromatic_rings[0])
    orders = kekule_orders(g)
    ring = g.aromatic_rings[0]
    assert sorted(orders[frozenset((ring[i], ring[(i + 1) % 6]))] for i in range(6)) == [1, 1, 1, 2, 2, 2]


def test_overbonded_carbon_is_a_valence_violation():
    g = parse_molecule("[C](C)(C)(C)(C)C")
    found = validate_graph(g)
    assert [(v.kind, v.site) for v in found] == [("valence", 0)]
    assert "expected 4" in found[0].message


def test_bare_bracket_atom_is_underbonded():
    assert kinds(parse_molecule("[C]")) == ["valence"]


def test_disjoint_fragments_violate_connectivity():
    g = disjoint_union(parse_molecule("c6"), parse_molecule("c6"))
    assert kinds(g) == ["connectivity"]
    assert len(g) == 24


def test_wrong_hybridization_label_is_reported():
    g = parse_molecule("CC")
    atoms = (Atom("C", "sp2", 0),) + g.atoms[1:]
    bad = MolecularGraph(atoms, g.bonds)
    assert "hybridization" in kinds(bad)


def test_nitro_and_isocyanide_drawings_are_accepted():
    assert kinds(parse_molecule("c6N(=O)=O")) == []
    assert kinds(parse_molecule("c6N#[C]")) == []
    # a lone nitrogen with five bonds to carbon is not
    assert "valence" in kinds(parse_molecule("[N](C)(C)(C)(C)C"))


def test_saturated_structure_has_no_pi_system():
    with pytest.raises(NoPiSystem):
        extract_pi_system(parse_molecule("CC"))
    assert pi_systems(parse_molecule("CC")) == []


def test_two_rings_through_sp3_are_separate_systems():
    g = parse_molecule("c6Cc6")
    assert len(pi_systems(g)) == 2
    with pytest.raises(MultiplePiSystems):
        extract_pi_system(g)


def test_biphenyl_pi_system_matches_sp2_flood():
    g = parse_molecule("c6c6")
    pi = extract_pi_system(g)
    assert pi.size == 12 and pi.electron_count == 12
    assert [set(pi.member_sites)] == flood_sp2(g)
    assert len(pi.bonds) == 13


def test_pseudo_sites_collapse_groups():
    g = parse_molecule("[X:NH2]c6c6<2>[Y:NO2]", resolver())
    pi = extract_pi_system(g)
    pseudo = sorted(s.label for s in pi.sites if s.pseudo)
    assert pseudo == ["NH2", "NO2"]
    assert pi.size == 14
    assert pi.electron_count == 12 + 2 + 0


def test_section_selection():
    g = parse_molecule("[X:NH2]c6<2>[R:CH2]c6<2>[Y:NO2]", resolver())
    assert len(pi_systems(g)) == 2
    with pytest.raises(NoPiSystem):
        extract_pi_system(g, "bridge")


def test_inventory_benzene():
    inv = inventory(parse_molecule("c6"))
    assert inv.formula == "C6H6"
    assert inv.molecular_mass == pytest.approx(78.114, abs=1e-3)
    assert inv.valence_electrons == 30
    assert inv.sigma_electrons == 24
    assert inv.pi_electrons == 6
    assert inv.lone_pair_electrons == 0
    assert inv.ring_count == 1


def test_inventory_methane_and_water():
    inv = inventory(parse_molecule("C"))
    assert (inv.formula, inv.valence_electrons, inv.sigma_electrons) == ("CH4", 8, 8)
    inv = inventory(parse_molecule("O"))
    assert inv.lone_pair_electrons == 4


def test_inventory_counts_nitrile_pi_pairs():
    inv = inventory(parse_molecule("C#N"))
    assert inv.pi_electrons == 4
    assert inv.valence_electrons == 10
    assert (inv.sigma_electrons, inv.lone_pair_electrons) == (4, 2)


def test_with_tags_and_sites_with_tag():
    g = parse_molecule("CC")
    tagged = g.with_tags({0: "donor"})
    assert tagged.sites_with_tag("donor") == (0,)
    with pytest.raises(ValueError):
        g.with_tags({0: "nonsense"})


VALID = ["c6", "CC(O)C", "c6c6<2>c6", "C1CCCCC1", "N#Cc6<2>C=O", "Oc6<2>Cc6<2>C#N", "c6N#[C]", "C=CC=C"]


@pytest.mark.parametrize("text", VALID)
def test_declared_valence_equals_twice_the_bond_orders(text):
    g = parse_molecule(text)
    assert validate_graph(g) == []
    declared = sum(VALENCE[a.element] for a in g.atoms)
    assert declared == 2 * sum(kekule_orders(g).values())


def test_nitro_is_the_one_documented_exception_to_the_valence_sum():
    g = parse_molecule("c6N(=O)=O")
    assert validate_graph(g) == []
    assert 2 * sum(kekule_orders(g).values()) - sum(VALENCE[a.element] for a in g.atoms) == 2


@pytest.mark.parametrize("text", VALID + ["c6N(=O)=O", "[Cl]c6<2>S"])
def test_valence_electrons_match_brute_force(text):
    g = parse_molecule(text)
    table = {"C": 4, "H": 1, "N": 5, "O": 6, "S": 6, "Cl": 7}
    assert inventory(g).valence_electrons == sum(table[a.element] for a in g.atoms)


def permuted(g, perm):
    """Relabel atom i as perm[i]."""
    inv = {new: old for old, new in enumerate(perm)}
    atoms = tuple(Atom(g.atoms[inv[i]].element, g.atoms[inv[i]].hybridization, i) for i in range(len(g)))
    bonds = tuple(Bond(perm[b.a], perm[b.b], b.order) for b in g.bonds)
    tags = tuple(g.section_tags[inv[i]] for i in range(len(g)))
    groups = tuple(GroupTag(t.name, t.role, tuple(sorted(perm[a] for a in t.atoms)), perm[t.root], t.pi_electrons)
                   for t in g.groups)
    return MolecularGraph(atoms, bonds, tags, groups)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["c6c6", "[X:NH2]c6c6<2>[Y:NO2]", "[X:OH]c6<2>C=C", "Cc6<3>(C)C"]), st.randoms())
def test_pi_system_is_invariant_under_atom_reordering(text, rnd):
    g = parse_molecule(text, resolver())
    perm = list(range(len(g)))
    rnd.shuffle(perm)
    a = extract_pi_system(g)
    b = extract_pi_system(permuted(g, perm))
    assert sorted(perm[s] for s in a.member_sites) == sorted(b.member_sites)
    assert [s.label for s in a.sites] == [s.label for s in b.sites]
    assert np.allclose(build_matrix(a).entries, build_matrix(b).entries)
