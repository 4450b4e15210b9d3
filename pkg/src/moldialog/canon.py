"""Canonical SMILES output.

Ranking is iterative invariant refinement: atoms start from a local
invariant tuple, neighbourhood rank multisets refine the partition to a
fixpoint, and remaining ties break by doubling ranks and promoting the
lowest-index member of the lowest tied class.  The writer then walks each
component depth-first from its rank-0 atom with branches ordered by rank,
so isomorphic inputs produce byte-identical strings.
"""
from __future__ import annotations

import random

from .graph import (
    ORGANIC_SUBSET,
    PERMITTED_VALENCES,
    Atom,
    Bond,
    BondOrder,
    MolecularGraph,
    bond_valence,
)

_BOND_KEY = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 4,
}

_BOND_TOKEN = {
    BondOrder.DOUBLE: "=",
    BondOrder.TRIPLE: "#",
}


def _dense_ranks(keys: list) -> list[int]:
    ordered = {key: i for i, key in enumerate(sorted(set(keys)))}
    return [ordered[key] for key in keys]


def _refine(g: MolecularGraph, ranks: list[int]) -> list[int]:
    n = len(g.atoms)
    while True:
        keys = []
        for i in range(n):
            nbr_key = sorted(
                (_BOND_KEY[bond.order], ranks[nbr]) for nbr, bond in g.neighbors(i)
            )
            keys.append((ranks[i], tuple(nbr_key)))
        new_ranks = _dense_ranks(keys)
        if len(set(new_ranks)) == len(set(ranks)):
            return new_ranks
        ranks = new_ranks


def canonical_ranks(g: MolecularGraph) -> list[int]:
    """Dense atom ranks, one per atom, invariant under input atom order."""
    n = len(g.atoms)
    keys = []
    for atom in g.atoms:
        keys.append(
            (
                atom.element,
                g.degree(atom.index),
                atom.formal_charge,
                atom.total_h,
                g.in_ring(atom.index),
                g.min_ring_size(atom.index),
                atom.aromatic,
                atom.isotope or 0,
            )
        )
    ranks = _refine(g, _dense_ranks(keys))
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = min(i for i in range(n) if ranks[i] == tied)
        ranks = [r * 2 for r in ranks]
        ranks[chosen] -= 1
        ranks = _refine(g, _dense_ranks(ranks))
    return ranks


def _bond_sums(g: MolecularGraph) -> list[int]:
    sums = [0] * len(g.atoms)
    for bond in g.bonds:
        v = bond_valence(bond)
        sums[bond.a] += v
        sums[bond.b] += v
    return sums


def _atom_token(g: MolecularGraph, atom: Atom, bond_sum: int) -> str:
    symbol = atom.element.lower() if atom.aromatic else atom.element
    bare_ok = (
        atom.element in ORGANIC_SUBSET
        and atom.formal_charge == 0
        and atom.isotope is None
        and not (atom.aromatic and atom.element in ("N", "P") and atom.total_h > 0)
    )
    if bare_ok:
        base = PERMITTED_VALENCES[atom.element]
        fill = next((v for v in base if v >= bond_sum), None)
        if fill is not None and fill - bond_sum == atom.total_h:
            return symbol
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    h = atom.total_h
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    charge = atom.formal_charge
    if charge == 1:
        parts.append("+")
    elif charge == -1:
        parts.append("-")
    elif charge > 1:
        parts.append(f"+{charge}")
    elif charge < -1:
        parts.append(f"-{-charge}")
    parts.append("]")
    return "".join(parts)


def _bond_token(g: MolecularGraph, bond: Bond) -> str:
    if bond.order is BondOrder.AROMATIC:
        return ""
    if bond.order is BondOrder.SINGLE:
        if g.atoms[bond.a].aromatic and g.atoms[bond.b].aromatic:
            return "-"
        return ""
    return _BOND_TOKEN[bond.order]


def _digit_token(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"


def _write_component(g: MolecularGraph, start: int, ranks: list[int], sums: list[int]) -> str:
    order: list[int] = []
    emit_index: dict[int, int] = {}
    children: dict[int, list[tuple[int, Bond]]] = {}
    ring_bonds: list[tuple[int, int, Bond]] = []
    used: set[int] = set()
    visited: set[int] = set()

    bond_ids = {id(b): bi for bi, b in enumerate(g.bonds)}

    def walk(a: int) -> None:
        visited.add(a)
        emit_index[a] = len(order)
        order.append(a)
        children[a] = []
        for nbr, bond in sorted(g.neighbors(a), key=lambda t: (ranks[t[0]], t[0])):
            bi = bond_ids[id(bond)]
            if bi in used:
                continue
            if nbr in visited:
                used.add(bi)
                ring_bonds.append((nbr, a, bond))
            else:
                used.add(bi)
                children[a].append((nbr, bond))
                walk(nbr)

    walk(start)

    opens: dict[int, list[tuple[int, Bond]]] = {a: [] for a in order}
    closes: dict[int, list[tuple[int, Bond]]] = {a: [] for a in order}
    pending_digit: dict[int, tuple[int, Bond]] = {}
    free = list(range(99, 0, -1))
    events: dict[int, list[tuple[str, int, Bond]]] = {a: [] for a in order}
    for opener, closer, bond in ring_bonds:
        events[opener].append(("open", closer, bond))
        events[closer].append(("close", opener, bond))
    for a in order:
        for kind, partner, bond in sorted(
            events[a], key=lambda e: (e[0] != "close", emit_index[e[1]])
        ):
            key = id(bond)
            if kind == "close" and key in pending_digit:
                digit, _ = pending_digit.pop(key)
                closes[a].append((digit, bond))
                free.append(digit)
                free.sort(reverse=True)
            elif kind == "open" and key not in pending_digit:
                if not free:
                    raise RuntimeError("ring closure digits exhausted")
                digit = free.pop()
                pending_digit[key] = (digit, bond)
                opens[a].append((digit, bond))

    def emit(a: int) -> str:
        parts = [_atom_token(g, g.atoms[a], sums[a])]
        for digit, bond in sorted(closes[a]):
            parts.append(_bond_token(g, bond))
            parts.append(_digit_token(digit))
        for digit, bond in sorted(opens[a]):
            parts.append(_digit_token(digit))
        kids = children[a]
        for i, (child, bond) in enumerate(kids):
            sub = _bond_token(g, bond) + emit(child)
            if i < len(kids) - 1:
                parts.append(f"({sub})")
            else:
                parts.append(sub)
        return "".join(parts)

    return emit(start)


def canonical(g: MolecularGraph) -> str:
    """Canonical SMILES; multi-component graphs sort component strings."""
    ranks = canonical_ranks(g)
    sums = _bond_sums(g)
    pieces = []
    for comp in g.components():
        start = min(comp, key=lambda a: (ranks[a], a))
        pieces.append(_write_component(g, start, ranks, sums))
    return ".".join(sorted(pieces, key=lambda s: (len(s), s)))


def write_smiles(g: MolecularGraph, root: int | None = None,
                 rng: random.Random | None = None) -> str:
    """Non-canonical writer: arbitrary traversal root, optionally shuffled.

    Args:
        g: graph to serialize.
        root: atom index to start its component from; other components start
            at their lowest-priority atom.
        rng: shuffles neighbour visiting order when given.

    Returns:
        A SMILES string that reparses to an isomorphic graph.  Components
        keep graph order.
    """
    n = len(g.atoms)
    priorities = list(range(n))
    if rng is not None:
        rng.shuffle(priorities)
    sums = _bond_sums(g)
    pieces = []
    for comp in g.components():
        if root is not None and root in comp:
            start = root
        else:
            start = min(comp, key=lambda a: (priorities[a], a))
        pieces.append(_write_component(g, start, priorities, sums))
    return ".".join(pieces)
