"""Parser coverage: grammar, hydrogen fill, and the error contract."""

import pytest

from moldialog import is_valid, parse
from moldialog.graph import BondOrder, SmilesError


def _bond_set(g):
    out = set()
    for bond in g.bonds:
        ends = tuple(sorted((g.atoms[bond.a].element, g.atoms[bond.b].element)))
        out.add(ends + (bond.order.value,))
    return out


def test_methane_is_a_single_bare_carbon():
    g = parse("C")
    assert len(g.atoms) == 1
    assert not g.bonds
    assert g.atoms[0].implicit_h == 4


def test_branch_adjacency_hand_checked():
    """Branching plus a double bond: every edge accounted for by hand."""
    g = parse("C(C(=O)O)I")
    assert sorted(a.element for a in g.atoms) == ["C", "C", "I", "O", "O"]
    assert _bond_set(g) == {
        ("C", "C", "single"),
        ("C", "O", "double"),
        ("C", "O", "single"),
        ("C", "I", "single"),
    }
    first = g.neighbors(0)
    assert [(i, b.order) for i, b in first] == [
        (1, BondOrder.SINGLE), (4, BondOrder.SINGLE)]
    assert g.atoms[4].element == "I"


def test_neighbors_sorted_by_index():
    g = parse("CCO")
    assert [(i, b.order) for i, b in g.neighbors(1)] == [
        (0, BondOrder.SINGLE), (2, BondOrder.SINGLE)]


def test_benzene_ring_adjacency():
    g = parse("c1ccccc1")
    assert [(i, b.order) for i, b in g.neighbors(0)] == [
        (1, BondOrder.AROMATIC), (5, BondOrder.AROMATIC)]
    assert all(a.aromatic for a in g.atoms)
    assert all(a.total_h == 1 for a in g.atoms)


def test_neighbors_index_out_of_range():
    g = parse("CC")
    with pytest.raises(IndexError):
        g.neighbors(2)


@pytest.mark.parametrize("smiles,kind", [
    ("C(", "unbalanced_paren"),
    ("C)C", "unbalanced_paren"),
    ("C1CC", "unclosed_ring_bond"),
    ("", "empty_input"),
    ("   ", "unknown_symbol"),
    ("CX", "unknown_symbol"),
    ("C$C", "unknown_symbol"),
    ("C(C)(C)(C)(C)C", "valence_violation"),
    ("O=C=O=C", "valence_violation"),
    ("c1ccc1", "kekulization_failure"),
    ("[13C", "unknown_symbol"),
])
def test_error_kinds(smiles, kind):
    with pytest.raises(SmilesError) as info:
        parse(smiles)
    assert info.value.kind == kind
    assert 0 <= info.value.position <= len(smiles)


def test_eof_errors_point_past_the_input():
    with pytest.raises(SmilesError) as info:
        parse("C(")
    assert info.value.position == 2
    with pytest.raises(SmilesError) as info:
        parse("C1CC")
    assert info.value.position == 4


@pytest.mark.parametrize("smiles,expected", [
    ("c1ccccc1", True),
    ("C1CC", False),
    ("", False),
    ("CCO", True),
    ("C(C)(C)(C)(C)C", False),
])
def test_is_valid(smiles, expected):
    assert is_valid(smiles) is expected


def test_is_valid_never_disagrees_with_parse(corpus_smiles):
    for smiles in corpus_smiles[:100]:
        assert is_valid(smiles)
        parse(smiles)


def test_bracket_atom_fields():
    g = parse("[13CH4]")
    atom = g.atoms[0]
    assert atom.isotope == 13
    assert atom.total_h == 4
    assert atom.bracket

    g = parse("[NH4+]")
    atom = g.atoms[0]
    assert atom.formal_charge == 1
    assert atom.total_h == 4


def test_bracket_atoms_carry_no_implicit_hydrogens():
    # bracket notation states the hydrogen count explicitly; a naked [C]
    # lands on valence 0, which the hard valence gate rejects (no radicals)
    assert parse("[CH4]").atoms[0].total_h == 4
    with pytest.raises(SmilesError) as info:
        parse("[C]")
    assert info.value.kind == "valence_violation"


def test_multi_component_input():
    g = parse("[Na+].[Cl-]")
    assert len(g.atoms) == 2
    assert not g.bonds
    assert g.components() == [[0], [1]]
    assert g.atoms[0].formal_charge == 1
    assert g.atoms[1].formal_charge == -1


def test_percent_ring_closure():
    from moldialog import canonical
    assert canonical(parse("C%10CC%10")) == canonical(parse("C1CC1"))


def test_stereo_markers_parse_and_are_discarded():
    from moldialog import canonical
    assert canonical(parse("F/C=C/F")) == canonical(parse("FC=CF"))
    assert canonical(parse("N[C@@H](C)C(=O)O")) == canonical(parse("NC(C)C(=O)O"))


def test_aromatic_nitrogen_hydrogen_forms():
    pyrrole = parse("c1cc[nH]c1")
    n_atom = next(a for a in pyrrole.atoms if a.element == "N")
    assert n_atom.aromatic
    assert n_atom.total_h == 1

    pyridine = parse("c1ccncc1")
    n_atom = next(a for a in pyridine.atoms if a.element == "N")
    assert n_atom.total_h == 0


def test_kekulized_aromatic_input_gains_flags():
    g = parse("C1=CC=CC=C1")
    assert all(a.aromatic for a in g.atoms)
    assert all(b.order is BondOrder.AROMATIC for b in g.bonds)
    # a kekule assignment is kept alongside the aromatic flags
    orders = sorted(b.kekule_order for b in g.bonds)
    assert orders == [1, 1, 1, 2, 2, 2]


def test_valence_conservation(corpus_smiles):
    """Bond orders plus hydrogens always land on a permitted valence."""
    from moldialog.graph import bond_valence, permitted_valences
    for smiles in corpus_smiles[:200]:
        g = parse(smiles)
        for atom in g.atoms:
            total = sum(bond_valence(b) for b in g.bonds_of(atom.index))
            total += atom.total_h
            allowed = permitted_valences(atom.element, atom.formal_charge)
            if allowed is None:
                continue
            assert total in allowed, (smiles, atom.index, total, allowed)
