"""Kekulization and aromaticity perception.

The model is a deliberately small Hückel treatment: candidate rings are the
SSSR rings of size 5-7, pi contributions follow a fixed per-element table,
and a ring is aromatic when every member can sit in the pi system and the
contributions sum to 4n+2.  Fused systems whose individual rings fail are
retried as a union so azulene-like frameworks still qualify.  Anything the
table does not cover (exocyclic carbonyls, eight-membered rings, radicals)
stays kekulized; the point is a self-consistent dialect, not toolkit parity.
"""
from __future__ import annotations

from .graph import Atom, Bond, BondOrder, ErrorKind, SmilesError


def _adjacency(n: int, bonds: list[Bond]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for bi, bond in enumerate(bonds):
        adj[bond.a].append(bi)
        adj[bond.b].append(bi)
    return adj


def _needs_double(atom: Atom, degree: int, has_multiple_bond: bool) -> bool:
    """Whether an aromatic-input atom must receive one in-system double bond."""
    if has_multiple_bond:
        return False
    el = atom.element
    charge = atom.formal_charge
    if el == "C":
        return charge == 0
    if el in ("N", "P"):
        pyrrole_like = atom.explicit_h >= 1 or degree >= 3
        if charge == 0:
            return not pyrrole_like
        if charge > 0:
            return pyrrole_like
        return False
    if el in ("O", "S", "Se", "Te"):
        return charge > 0
    return False


def _perfect_matching(nodes: set[int], partners: dict[int, list[tuple[int, int]]]) -> set[int] | None:
    """Perfect matching over nodes; partners maps node -> [(node, bond index)].

    Returns the matched bond indices or None.  Plain backtracking: aromatic
    systems at desk scale stay small enough that nothing cleverer pays off.
    """
    unmatched = set(nodes)

    def recurse() -> set[int] | None:
        if not unmatched:
            return set()
        pivot = min(
            unmatched,
            key=lambda a: (sum(1 for m, _ in partners[a] if m in unmatched), a),
        )
        options = [(m, bi) for m, bi in partners[pivot] if m in unmatched]
        if not options:
            return None
        unmatched.discard(pivot)
        for m, bi in options:
            unmatched.discard(m)
            rest = recurse()
            if rest is not None:
                rest.add(bi)
                return rest
            unmatched.add(m)
        unmatched.add(pivot)
        return None

    return recurse()


def kekulize(atoms: list[Atom], bonds: list[Bond], input_aromatic: set[int]) -> None:
    """Assign concrete single/double orders inside aromatic bond systems.

    Args:
        atoms: all atoms, positions used for error reporting.
        bonds: all bonds; members with order AROMATIC get kekule_order set.
        input_aromatic: indices written lowercase (or touched by ':').

    Raises:
        SmilesError: kind kekulization_failure when no assignment exists.
    """
    adj = _adjacency(len(atoms), bonds)
    aromatic_bond_idx = [bi for bi, b in enumerate(bonds) if b.order is BondOrder.AROMATIC]
    if not aromatic_bond_idx:
        return

    # Connected systems over aromatic bonds.
    seen: set[int] = set()
    systems: list[list[int]] = []
    for bi in aromatic_bond_idx:
        for seed in (bonds[bi].a, bonds[bi].b):
            if seed in seen:
                continue
            stack = [seed]
            seen.add(seed)
            system = []
            while stack:
                cur = stack.pop()
                system.append(cur)
                for nbi in adj[cur]:
                    if bonds[nbi].order is not BondOrder.AROMATIC:
                        continue
                    nxt = bonds[nbi].other(cur)
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            systems.append(system)

    for system in systems:
        needy: set[int] = set()
        for idx in system:
            atom = atoms[idx]
            has_multiple = any(
                bonds[bi].order in (BondOrder.DOUBLE, BondOrder.TRIPLE) for bi in adj[idx]
            )
            if _needs_double(atom, len(adj[idx]), has_multiple):
                needy.add(idx)
        partners: dict[int, list[tuple[int, int]]] = {a: [] for a in needy}
        for idx in needy:
            for bi in adj[idx]:
                bond = bonds[bi]
                if bond.order is BondOrder.AROMATIC and bond.other(idx) in needy:
                    partners[idx].append((bond.other(idx), bi))
        matched = _perfect_matching(needy, partners)
        if matched is None:
            first = min(system, key=lambda a: atoms[a].position)
            raise SmilesError(
                ErrorKind.KEKULIZATION_FAILURE,
                atoms[first].position,
                "no alternating double bond assignment for aromatic system",
            )
        for bi in aromatic_bond_idx:
            bond = bonds[bi]
            if bond.a in system or bond.b in system:
                bond.kekule_order = 2 if bi in matched else 1


def _pi_contribution(atom: Atom, doubles: list[Bond], triples: int, candidate_atoms: set[int]) -> int | None:
    """Pi electrons the atom lends a candidate ring, None if it cannot sit in one."""
    if triples:
        return None
    if len(doubles) > 1:
        return None
    if len(doubles) == 1:
        partner = doubles[0].other(atom.index)
        return 1 if partner in candidate_atoms else None
    el = atom.element
    charge = atom.formal_charge
    if el in ("N", "P"):
        return 2 if charge <= 0 else None
    if el in ("O", "S", "Se", "Te"):
        return 2 if charge == 0 else None
    if el == "C":
        if charge > 0:
            return 0
        if charge < 0:
            return 2
        return None
    if el == "B":
        return 0 if charge == 0 else None
    return None


def perceive_aromaticity(atoms: list[Atom], bonds: list[Bond], rings: list[list[int]]) -> set[int]:
    """Mark aromatic atoms/bonds on a kekulized graph; returns aromatic atom set.

    Ring bonds of qualifying rings switch to order AROMATIC while keeping
    their kekulized order for valence arithmetic.
    """
    adj = _adjacency(len(atoms), bonds)
    candidates = [r for r in rings if 5 <= len(r) <= 7]
    candidate_atoms = {a for r in candidates for a in r}

    contribs: dict[int, int | None] = {}
    for idx in candidate_atoms:
        doubles = [bonds[bi] for bi in adj[idx] if bonds[bi].kekule_order == 2]
        triples = sum(1 for bi in adj[idx] if bonds[bi].kekule_order == 3)
        contribs[idx] = _pi_contribution(atoms[idx], doubles, triples, candidate_atoms)

    def huckel(atom_set: list[int]) -> bool:
        total = 0
        for a in atom_set:
            c = contribs[a]
            if c is None:
                return False
            total += c
        return total % 4 == 2

    aromatic_rings = [ring for ring in candidates if huckel(ring)]
    marked = {id(r) for r in aromatic_rings}

    # Fused systems where no individual ring qualifies (azulene) get one
    # attempt as a whole.
    leftover = [r for r in candidates if id(r) not in marked]
    groups: list[list[list[int]]] = []
    for ring in leftover:
        joined = None
        for group in groups:
            if any(set(ring) & set(other) for other in group):
                group.append(ring)
                joined = group
                break
        if joined is None:
            groups.append([ring])
    # Merge groups that became connected transitively.
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                atoms_i = {a for r in groups[i] for a in r}
                if any(set(r) & atoms_i for r in groups[j]):
                    groups[i].extend(groups[j])
                    del groups[j]
                    merged = True
                    break
            if merged:
                break
    for group in groups:
        if len(group) < 2:
            continue
        union = sorted({a for r in group for a in r})
        if huckel(union):
            aromatic_rings.extend(group)

    aromatic_atoms: set[int] = set()
    aromatic_bond_keys: set[tuple[int, int]] = set()
    for ring in aromatic_rings:
        aromatic_atoms.update(ring)
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            aromatic_bond_keys.add((min(a, b), max(a, b)))

    for idx in aromatic_atoms:
        atoms[idx].aromatic = True
    for bond in bonds:
        if (min(bond.a, bond.b), max(bond.a, bond.b)) in aromatic_bond_keys:
            bond.order = BondOrder.AROMATIC
    return aromatic_atoms
