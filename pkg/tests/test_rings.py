"""Ring perception against an independent minimum-cycle-basis oracle."""

import networkx as nx
import pytest

from moldialog import parse

import oracles


def test_cyclopropane_single_ring():
    g = parse("C1CC1")
    assert [len(r) for r in g.rings] == [3]
    assert all(g.in_ring(a.index) for a in g.atoms)
    assert all(g.min_ring_size(a.index) == 3 for a in g.atoms)


def test_acyclic_molecule_has_no_rings():
    g = parse("CCO")
    assert g.rings == []
    assert not any(g.in_ring(a.index) for a in g.atoms)
    assert g.min_ring_size(0) == 0


def test_naphthalene_two_fused_six_rings():
    g = parse("c1ccc2ccccc2c1")
    assert sorted(len(r) for r in g.rings) == [6, 6]
    shared = set(g.rings[0]) & set(g.rings[1])
    assert len(shared) == 2


def test_spiro_and_bridged_cases():
    # spiro: two rings meeting at exactly one atom
    g = parse("C1CCC2(CC1)CCCC2")
    assert sorted(len(r) for r in g.rings) == [5, 6]
    assert len(set(g.rings[0]) & set(g.rings[1])) == 1
    # norbornane: bicyclic bridge, both smallest rings are 5-rings
    g = parse("C1CC2CCC1C2")
    assert sorted(len(r) for r in g.rings) == [5, 5]


def test_ring_count_matches_cyclomatic_number(corpus_smiles):
    for smiles in corpus_smiles:
        g = parse(smiles)
        expected = len(g.bonds) - len(g.atoms) + len(g.components())
        assert len(g.rings) == expected, smiles


def test_ring_sizes_match_minimum_cycle_basis(corpus_smiles):
    """Sorted SSSR sizes equal a minimum-weight cycle basis of the graph."""
    for smiles in corpus_smiles[:300]:
        g = parse(smiles)
        edges = [(b.a, b.b) for b in g.bonds]
        expected = oracles.cycle_basis_sizes(len(g.atoms), edges)
        assert sorted(len(r) for r in g.rings) == expected, smiles


def test_every_listed_ring_is_a_real_cycle(corpus_smiles):
    for smiles in corpus_smiles[:200]:
        g = parse(smiles)
        for ring in g.rings:
            n = len(ring)
            assert n >= 3
            for i, atom in enumerate(ring):
                nxt = ring[(i + 1) % n]
                assert g.bond_between(atom, nxt) is not None, (smiles, ring)


def test_min_ring_size_consistent_with_ring_list(corpus_smiles):
    for smiles in corpus_smiles[:200]:
        g = parse(smiles)
        smallest: dict[int, int] = {}
        for ring in g.rings:
            for atom in ring:
                cur = smallest.get(atom)
                if cur is None or len(ring) < cur:
                    smallest[atom] = len(ring)
        for atom in g.atoms:
            assert g.min_ring_size(atom.index) == smallest.get(atom.index, 0)


def test_ring_bonds_flagged():
    g = parse("C1CC1CC")
    ring_atoms = set(g.rings[0])
    for bond in g.bonds:
        expected = bond.a in ring_atoms and bond.b in ring_atoms
        assert bond.in_ring == expected
