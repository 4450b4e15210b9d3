"""SMILES reader.

Supported subset: organic-subset atoms, bracket atoms with isotope, charge,
explicit hydrogens and @/@@ chirality markers, ring closures including %nn,
branches, bond symbols - = # : / \\ and dot-separated components.  Stereo
markers are parsed and then dropped: graphs carry constitution only.

Aromatic (lowercase) input is kekulized immediately and the final aromatic
flags always come from perception on the kekulized graph, so equivalent
aromatic and kekulized spellings converge to one internal form.
"""
from __future__ import annotations

from .aromaticity import kekulize, perceive_aromaticity
from .graph import (
    AROMATIC_ELEMENTS,
    ELEMENT_SYMBOLS,
    PERMITTED_VALENCES,
    Atom,
    Bond,
    BondOrder,
    ErrorKind,
    MolecularGraph,
    SmilesError,
    bond_valence,
    permitted_valences,
)
from .rings import sssr

_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}

_CREATION_ORDER = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 1,
}

_ORGANIC_ONE = set("BCNOPSFI")
_AROMATIC_ORGANIC = set("bcnops")
_BRACKET_AROMATIC_TWO = ("se", "as", "te")


class _Reader:
    """Single pass over the SMILES text building raw atoms and bonds."""

    __slots__ = (
        "text", "pos", "atoms", "bonds", "bond_pairs", "input_aromatic",
        "explicit_aromatic", "prev", "pending", "pending_pos", "branches",
        "ring_open",
    )

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        self.bond_pairs: set[tuple[int, int]] = set()
        self.input_aromatic: set[int] = set()
        self.explicit_aromatic: set[int] = set()
        self.prev: int | None = None
        self.pending: BondOrder | None = None
        self.pending_pos = 0
        self.branches: list[tuple[int, int]] = []
        self.ring_open: dict[int, tuple[int, BondOrder | None, int]] = {}

    def fail(self, kind: ErrorKind, position: int, message: str):
        raise SmilesError(kind, position, message)

    def add_bond(self, a: int, b: int, order: BondOrder, position: int, explicit_aromatic: bool) -> None:
        if a == b:
            self.fail(ErrorKind.UNCLOSED_RING_BOND, position, "ring bond back to the same atom")
        key = (min(a, b), max(a, b))
        if key in self.bond_pairs:
            self.fail(ErrorKind.UNCLOSED_RING_BOND, position, "two bonds between one atom pair")
        self.bond_pairs.add(key)
        self.bonds.append(
            Bond(a, b, order, kekule_order=_CREATION_ORDER[order], position=position)
        )
        if explicit_aromatic:
            self.explicit_aromatic.add(len(self.bonds) - 1)

    def attach(self, idx: int, position: int) -> None:
        if self.prev is not None:
            if self.pending is None:
                if self.prev in self.input_aromatic and idx in self.input_aromatic:
                    order = BondOrder.AROMATIC
                else:
                    order = BondOrder.SINGLE
                self.add_bond(self.prev, idx, order, position, False)
            else:
                self.add_bond(
                    self.prev, idx, self.pending, position,
                    self.pending is BondOrder.AROMATIC,
                )
        self.prev = idx
        self.pending = None

    def add_atom(self, element: str, aromatic: bool, position: int, *, charge: int = 0,
                 isotope: int | None = None, explicit_h: int = 0, bracket: bool = False) -> int:
        idx = len(self.atoms)
        self.atoms.append(
            Atom(
                element=element,
                index=idx,
                formal_charge=charge,
                isotope=isotope,
                explicit_h=explicit_h,
                bracket=bracket,
                position=position,
            )
        )
        if aromatic:
            self.input_aromatic.add(idx)
        return idx

    def read_ring_closure(self) -> None:
        start = self.pos
        ch = self.text[start]
        if self.prev is None:
            self.fail(ErrorKind.UNKNOWN_SYMBOL, start, "ring closure before any atom")
        if ch == "%":
            digits = self.text[start + 1 : start + 3]
            if len(digits) != 2 or not digits.isdigit():
                self.fail(ErrorKind.UNKNOWN_SYMBOL, start, "'%' needs two digits")
            number = int(digits)
            self.pos = start + 3
        else:
            number = int(ch)
            self.pos = start + 1
        if number in self.ring_open:
            other, opened_order, opened_pos = self.ring_open.pop(number)
            if (
                self.pending is not None
                and opened_order is not None
                and self.pending is not opened_order
            ):
                self.fail(ErrorKind.UNCLOSED_RING_BOND, start, "ring bond symbols disagree")
            order = self.pending if self.pending is not None else opened_order
            explicit = order is BondOrder.AROMATIC and order is not None
            if order is None:
                if other in self.input_aromatic and self.prev in self.input_aromatic:
                    order = BondOrder.AROMATIC
                    explicit = False
                else:
                    order = BondOrder.SINGLE
            self.add_bond(other, self.prev, order, start, explicit)
            self.pending = None
        else:
            self.ring_open[number] = (self.prev, self.pending, start)
            self.pending = None

    def read_bracket(self) -> None:
        start = self.pos
        text = self.text
        n = len(text)
        j = start + 1
        isotope = None
        iso_digits = ""
        while j < n and text[j].isdigit():
            iso_digits += text[j]
            j += 1
        if iso_digits:
            isotope = int(iso_digits)
        if j >= n:
            self.fail(ErrorKind.UNKNOWN_SYMBOL, start, "unterminated bracket atom")
        aromatic = False
        ch = text[j]
        if ch.isupper():
            symbol = ch
            j += 1
            if j < n and text[j].islower() and symbol + text[j] in ELEMENT_SYMBOLS:
                symbol += text[j]
                j += 1
        elif ch.islower():
            if text[j : j + 2] in _BRACKET_AROMATIC_TWO:
                symbol = text[j : j + 2].capitalize()
                j += 2
            else:
                symbol = ch.upper()
                j += 1
            aromatic = True
            if symbol not in AROMATIC_ELEMENTS:
                self.fail(ErrorKind.UNKNOWN_SYMBOL, start + len(iso_digits) + 1,
                          f"element {symbol} cannot be aromatic")
        else:
            self.fail(ErrorKind.UNKNOWN_SYMBOL, j, f"unexpected {ch!r} in bracket atom")
        if symbol not in ELEMENT_SYMBOLS:
            self.fail(ErrorKind.UNKNOWN_SYMBOL, start + len(iso_digits) + 1,
                      f"unknown element {symbol!r}")
        while j < n and text[j] == "@":
            j += 1
        explicit_h = 0
        if j < n and text[j] == "H" and symbol != "H":
            j += 1
            h_digits = ""
            while j < n and text[j].isdigit():
                h_digits += text[j]
                j += 1
            explicit_h = int(h_digits) if h_digits else 1
        charge = 0
        if j < n and text[j] in "+-":
            sign = 1 if text[j] == "+" else -1
            mark = text[j]
            j += 1
            charge_digits = ""
            while j < n and text[j].isdigit():
                charge_digits += text[j]
                j += 1
            if charge_digits:
                charge = sign * int(charge_digits)
            else:
                charge = sign
                while j < n and text[j] == mark:
                    charge += sign
                    j += 1
        if j >= n or text[j] != "]":
            self.fail(ErrorKind.UNKNOWN_SYMBOL, j if j < n else start, "malformed bracket atom")
        self.pos = j + 1
        idx = self.add_atom(
            symbol, aromatic, start, charge=charge, isotope=isotope,
            explicit_h=explicit_h, bracket=True,
        )
        self.attach(idx, start)

    def read_organic(self) -> None:
        start = self.pos
        two = self.text[start : start + 2]
        ch = self.text[start]
        if two in ("Cl", "Br"):
            symbol, width, aromatic = two, 2, False
        elif ch in _ORGANIC_ONE:
            symbol, width, aromatic = ch, 1, False
        elif ch in _AROMATIC_ORGANIC:
            symbol, width, aromatic = ch.upper(), 1, True
        else:
            self.fail(ErrorKind.UNKNOWN_SYMBOL, start, f"unknown atom symbol {ch!r}")
        idx = self.add_atom(symbol, aromatic, start)
        self.attach(idx, start)
        self.pos = start + width

    def run(self) -> None:
        text = self.text
        n = len(text)
        while self.pos < n:
            ch = text[self.pos]
            if ch == "(":
                if self.prev is None:
                    self.fail(ErrorKind.UNBALANCED_PAREN, self.pos, "branch before any atom")
                self.branches.append((self.prev, self.pos))
                self.pos += 1
            elif ch == ")":
                if not self.branches:
                    self.fail(ErrorKind.UNBALANCED_PAREN, self.pos, "unmatched ')'")
                if self.pending is not None:
                    self.fail(ErrorKind.UNKNOWN_SYMBOL, self.pending_pos, "dangling bond symbol")
                self.prev = self.branches.pop()[0]
                self.pos += 1
            elif ch == ".":
                if self.pending is not None:
                    self.fail(ErrorKind.UNKNOWN_SYMBOL, self.pending_pos, "bond symbol before '.'")
                if self.branches:
                    self.fail(ErrorKind.UNKNOWN_SYMBOL, self.pos, "'.' inside a branch")
                if self.prev is None:
                    self.fail(ErrorKind.UNKNOWN_SYMBOL, self.pos, "'.' without a preceding atom")
                if self.ring_open:
                    opened = min(pos for _, _, pos in self.ring_open.values())
                    self.fail(ErrorKind.UNCLOSED_RING_BOND, opened, "ring bond open across '.'")
                self.prev = None
                self.pos += 1
            elif ch in _BOND_SYMBOLS:
                if self.prev is None:
                    self.fail(ErrorKind.UNKNOWN_SYMBOL, self.pos, "bond symbol before any atom")
                if self.pending is not None:
                    self.fail(ErrorKind.UNKNOWN_SYMBOL, self.pos, "two bond symbols in a row")
                self.pending = _BOND_SYMBOLS[ch]
                self.pending_pos = self.pos
                self.pos += 1
            elif ch.isdigit() or ch == "%":
                self.read_ring_closure()
            elif ch == "[":
                self.read_bracket()
            elif ch.isalpha():
                self.read_organic()
            else:
                self.fail(ErrorKind.UNKNOWN_SYMBOL, self.pos, f"unexpected character {ch!r}")
        if self.branches:
            self.fail(
                ErrorKind.UNBALANCED_PAREN, n,
                f"'(' at {self.branches[0][1]} never closed",
            )
        if self.pending is not None:
            self.fail(ErrorKind.UNKNOWN_SYMBOL, self.pending_pos, "dangling bond symbol")
        if self.ring_open:
            opened = min(pos for _, _, pos in self.ring_open.values())
            self.fail(ErrorKind.UNCLOSED_RING_BOND, n, f"ring bond opened at {opened} never closed")
        if not self.atoms:
            self.fail(ErrorKind.EMPTY_INPUT, 0, "no atoms in input")


def _assign_implicit_hydrogens(atoms: list[Atom], bonds: list[Bond]) -> None:
    sums = [0] * len(atoms)
    for bond in bonds:
        v = bond_valence(bond)
        sums[bond.a] += v
        sums[bond.b] += v
    for atom in atoms:
        if atom.bracket:
            continue
        base = PERMITTED_VALENCES[atom.element]
        total = sums[atom.index]
        fill = next((v for v in base if v >= total), None)
        if fill is None:
            raise SmilesError(
                ErrorKind.VALENCE_VIOLATION, atom.position,
                f"{atom.element} cannot carry bond order sum {total}",
            )
        atom.implicit_h = fill - total


def _valence_gate(atoms: list[Atom], bonds: list[Bond]) -> None:
    sums = [0] * len(atoms)
    for bond in bonds:
        v = bond_valence(bond)
        sums[bond.a] += v
        sums[bond.b] += v
    for atom in atoms:
        allowed = permitted_valences(atom.element, atom.formal_charge)
        if allowed is None:
            continue
        total = sums[atom.index] + atom.implicit_h + atom.explicit_h
        if total not in allowed:
            raise SmilesError(
                ErrorKind.VALENCE_VIOLATION, atom.position,
                f"{atom.element} charge {atom.formal_charge:+d} has valence {total}, "
                f"permitted {sorted(allowed)}",
            )


def parse(smiles: str) -> MolecularGraph:
    """Parse SMILES into a kekulized, aromaticity-perceived molecular graph.

    Args:
        smiles: input string; every component must be non-empty.

    Returns:
        MolecularGraph with SSSR rings, implicit hydrogens and aromatic flags.

    Raises:
        SmilesError: with a kind from ErrorKind and the byte offset of the
            first offending character.
    """
    if not smiles:
        raise SmilesError(ErrorKind.EMPTY_INPUT, 0, "empty SMILES")
    reader = _Reader(smiles)
    reader.run()
    atoms, bonds = reader.atoms, reader.bonds

    rings = sssr(len(atoms), [(b.a, b.b) for b in bonds])
    ring_bond_keys: set[tuple[int, int]] = set()
    ring_atoms: set[int] = set()
    for ring in rings:
        ring_atoms.update(ring)
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            ring_bond_keys.add((min(a, b), max(a, b)))
    for bond in bonds:
        bond.in_ring = (min(bond.a, bond.b), max(bond.a, bond.b)) in ring_bond_keys

    # ':' forces both endpoints into the aromatic system even when the
    # atoms themselves were written uppercase.
    input_aromatic = set(reader.input_aromatic)
    for bi in reader.explicit_aromatic:
        bond = bonds[bi]
        if not bond.in_ring:
            raise SmilesError(
                ErrorKind.KEKULIZATION_FAILURE, bond.position,
                "':' bond outside any ring",
            )
        input_aromatic.add(bond.a)
        input_aromatic.add(bond.b)

    # Implicitly aromatic bonds (two lowercase atoms, no symbol) demote to
    # single off-ring: biphenyl written without '-'.
    for bond in bonds:
        if bond.order is BondOrder.AROMATIC and not bond.in_ring:
            bond.order = BondOrder.SINGLE
            bond.kekule_order = 1

    for idx in sorted(input_aromatic):
        if idx not in ring_atoms:
            raise SmilesError(
                ErrorKind.KEKULIZATION_FAILURE, atoms[idx].position,
                "aromatic atom outside any ring",
            )

    kekulize(atoms, bonds, input_aromatic)
    _assign_implicit_hydrogens(atoms, bonds)
    _valence_gate(atoms, bonds)
    perceived = perceive_aromaticity(atoms, bonds, rings)

    for idx in sorted(input_aromatic):
        if idx not in perceived:
            raise SmilesError(
                ErrorKind.KEKULIZATION_FAILURE, atoms[idx].position,
                "aromatic marking does not yield an aromatic ring",
            )

    return MolecularGraph(atoms=atoms, bonds=bonds, rings=rings, source=smiles)


def is_valid(smiles: str) -> bool:
    """True when parse() accepts the string."""
    try:
        parse(smiles)
    except SmilesError:
        return False
    return True
