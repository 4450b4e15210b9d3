"""Molecular graph model shared by the parser, fingerprints and canonical writer.

Atoms and bonds are plain dataclasses indexed by position in their graph.
Aromatic bonds additionally carry the concrete single/double order chosen
during kekulization so that valence arithmetic never has to special-case
aromaticity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class BondOrder(str, Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"


_NUMERIC_ORDER = {BondOrder.SINGLE: 1, BondOrder.DOUBLE: 2, BondOrder.TRIPLE: 3}


class ErrorKind(str, Enum):
    UNBALANCED_PAREN = "unbalanced_paren"
    UNCLOSED_RING_BOND = "unclosed_ring_bond"
    UNKNOWN_SYMBOL = "unknown_symbol"
    VALENCE_VIOLATION = "valence_violation"
    KEKULIZATION_FAILURE = "kekulization_failure"
    EMPTY_INPUT = "empty_input"


class SmilesError(ValueError):
    """Raised on any malformed or chemically impossible SMILES input.

    Args:
        kind: machine-readable failure category.
        position: byte offset of the first offending character.
        message: human-readable detail.
    """

    def __init__(self, kind: ErrorKind, position: int, message: str):
        super().__init__(f"{kind.value} at {position}: {message}")
        self.kind = kind
        self.position = position
        self.detail = message


# Valences permitted for a neutral atom.  A formal charge of c widens the
# set to {v - |c|, v + |c|}.  Elements absent from this table are accepted
# as written (bracket atoms only) with no gate applied.
PERMITTED_VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
    "H": (1,),
}

ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}

# Elements that may be written lowercase (aromatic) inside brackets.
AROMATIC_ELEMENTS = {"B", "C", "N", "O", "P", "S", "Se", "As", "Te"}

ELEMENT_SYMBOLS = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe",
    "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr",
    "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm",
    "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn",
    "Fr", "Ra", "Ac", "Th", "Pa", "U",
}


def permitted_valences(element: str, charge: int) -> set[int] | None:
    """Valences the hard gate accepts for element/charge, None if ungated."""
    base = PERMITTED_VALENCES.get(element)
    if base is None:
        return None
    if charge == 0:
        return set(base)
    shift = abs(charge)
    out: set[int] = set()
    for v in base:
        out.add(v + shift)
        if v - shift >= 0:
            out.add(v - shift)
    return out


@dataclass
class Atom:
    element: str
    index: int
    aromatic: bool = False
    formal_charge: int = 0
    isotope: int | None = None
    explicit_h: int = 0
    implicit_h: int = 0
    bracket: bool = False
    position: int = 0

    @property
    def total_h(self) -> int:
        return self.explicit_h + self.implicit_h


@dataclass
class Bond:
    a: int
    b: int
    order: BondOrder
    in_ring: bool = False
    # Concrete 1/2/3 order; for aromatic bonds this is the kekulized choice.
    kekule_order: int = 1
    position: int = 0

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass
class MolecularGraph:
    atoms: list[Atom]
    bonds: list[Bond]
    rings: list[list[int]] = field(default_factory=list)
    source: str = ""
    _adjacency: dict[int, list[int]] = field(default_factory=dict, repr=False)
    _min_ring: dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._adjacency:
            self._adjacency = {i: [] for i in range(len(self.atoms))}
            for bi, bond in enumerate(self.bonds):
                self._adjacency[bond.a].append(bi)
                self._adjacency[bond.b].append(bi)

    def _edges(self, idx: int) -> list[int]:
        if idx not in self._adjacency:
            raise IndexError(f"atom index {idx} out of range")
        return self._adjacency[idx]

    def bonds_of(self, idx: int) -> list[Bond]:
        return [self.bonds[bi] for bi in self._edges(idx)]

    def neighbors(self, idx: int) -> list[tuple[int, Bond]]:
        return [(self.bonds[bi].other(idx), self.bonds[bi]) for bi in self._edges(idx)]

    def bond_between(self, a: int, b: int) -> Bond | None:
        for bi in self._adjacency[a]:
            if self.bonds[bi].other(a) == b:
                return self.bonds[bi]
        return None

    def degree(self, idx: int) -> int:
        return len(self._adjacency[idx])

    def in_ring(self, idx: int) -> bool:
        return self.min_ring_size(idx) > 0

    def min_ring_size(self, idx: int) -> int:
        """Size of the smallest perceived ring containing the atom, 0 if none."""
        if not self._min_ring:
            self._min_ring = {}
            for ring in self.rings:
                for a in ring:
                    cur = self._min_ring.get(a, 0)
                    if cur == 0 or len(ring) < cur:
                        self._min_ring[a] = len(ring)
        return self._min_ring.get(idx, 0)

    def rings_of(self, idx: int) -> list[list[int]]:
        return [r for r in self.rings if idx in r]

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, in order of first atom."""
        seen: set[int] = set()
        out: list[list[int]] = []
        for start in range(len(self.atoms)):
            if start in seen:
                continue
            stack = [start]
            comp = []
            seen.add(start)
            while stack:
                cur = stack.pop()
                comp.append(cur)
                for nbr, _ in self.neighbors(cur):
                    if nbr not in seen:
                        seen.add(nbr)
                        stack.append(nbr)
            out.append(sorted(comp))
        return out

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.element != "H")

    def to_json_dict(self) -> dict:
        """Adjacency form served over HTTP and consumed by the UI."""
        return {
            "atoms": [
                {
                    "element": a.element,
                    "aromatic": a.aromatic,
                    "charge": a.formal_charge,
                    "ring": self.in_ring(a.index),
                }
                for a in self.atoms
            ],
            "bonds": [
                {"a": b.a, "b": b.b, "order": b.order.value} for b in self.bonds
            ],
            "rings": [list(r) for r in self.rings],
        }


def bond_valence(bond: Bond) -> int:
    """Contribution of the bond to each endpoint's valence sum."""
    if bond.order is BondOrder.AROMATIC:
        return bond.kekule_order
    return _NUMERIC_ORDER[bond.order]
