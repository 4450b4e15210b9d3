"""Bit-vector fingerprints and Tanimoto similarity.

Three families:

* ``morgan``  - circular environments, one bit per (atom, radius) identifier.
* ``path``    - linear paths of 1..max_len bonds, direction-normalized.
* ``keys``    - 48 fixed structural predicates, one bit each.

Bit positions come from a 64-bit FNV-1a hash of a canonical byte encoding
of the feature, reduced modulo the width.  Bitsets are plain Python ints,
which keeps Tanimoto a pair of popcounts.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graph import BondOrder, MolecularGraph

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

_BOND_CODE = {
    BondOrder.SINGLE: "-",
    BondOrder.DOUBLE: "=",
    BondOrder.TRIPLE: "#",
    BondOrder.AROMATIC: ":",
}

_DEFAULT_PARAMS = {"morgan": (2,), "path": (7,), "keys": ()}

HALOGENS = ("F", "Cl", "Br", "I")


def fnv1a(data: bytes) -> int:
    """64-bit FNV-1a."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class Fingerprint:
    family: str
    width: int
    bits: int
    params: tuple = ()

    def popcount(self) -> int:
        return self.bits.bit_count()

    def to_hex(self) -> str:
        """Serialize as "<family>:<width>:<hex>" with fixed-width payload.

        Algorithm parameters are not carried; deserialized prints are
        assumed to use the family defaults.
        """
        digits = (self.width + 3) // 4
        return f"{self.family}:{self.width}:{self.bits:0{digits}x}"


def from_hex(text: str) -> Fingerprint:
    """Inverse of Fingerprint.to_hex, restoring family default params."""
    try:
        family, width_s, payload = text.split(":")
        width = int(width_s)
        bits = int(payload, 16)
    except ValueError as exc:
        raise ValueError(f"malformed fingerprint serialization: {text!r}") from exc
    if family not in _DEFAULT_PARAMS:
        raise ValueError(f"unknown fingerprint family {family!r}")
    if len(payload) != (width + 3) // 4 or bits >= (1 << width):
        raise ValueError("fingerprint payload does not match declared width")
    return Fingerprint(family=family, width=width, bits=bits, params=_DEFAULT_PARAMS[family])


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """Tanimoto similarity |a&b| / |a|b|; two empty prints compare as 1.0.

    Raises:
        ValueError: when family, width or params differ.
    """
    if a.family != b.family or a.width != b.width or a.params != b.params:
        raise ValueError(
            f"cannot compare {a.family}:{a.width}:{a.params} with "
            f"{b.family}:{b.width}:{b.params}"
        )
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union


def _atom_invariant(g: MolecularGraph, idx: int) -> str:
    atom = g.atoms[idx]
    return "|".join(
        (
            atom.element,
            str(atom.formal_charge),
            str(atom.total_h),
            str(g.degree(idx)),
            str(int(g.in_ring(idx))),
            str(g.min_ring_size(idx)),
            str(int(atom.aromatic)),
            str(atom.isotope or 0),
        )
    )


def morgan_environment_ids(g: MolecularGraph, radius: int) -> list[list[int]]:
    """Per-round environment identifiers, rounds 0..radius, one per atom.

    Two atoms share an identifier at round r exactly when the iterated
    neighbourhood encoding cannot tell their r-environments apart; these are
    the pre-hash values that back the morgan bits.
    """
    ids = [fnv1a(f"a|{_atom_invariant(g, i)}".encode()) for i in range(len(g.atoms))]
    rounds = [list(ids)]
    for r in range(1, radius + 1):
        nxt = []
        for i in range(len(g.atoms)):
            pairs = sorted(
                (_BOND_CODE[bond.order], ids[nbr]) for nbr, bond in g.neighbors(i)
            )
            enc = f"e|{r}|{ids[i]}|" + ",".join(f"{c}{v}" for c, v in pairs)
            nxt.append(fnv1a(enc.encode()))
        ids = nxt
        rounds.append(list(ids))
    return rounds


def morgan(g: MolecularGraph, radius: int = 2, width: int = 2048) -> Fingerprint:
    """Circular fingerprint: one bit per (atom, round) environment id."""
    bits = 0
    for round_ids in morgan_environment_ids(g, radius):
        for value in round_ids:
            bits |= 1 << (value % width)
    return Fingerprint(family="morgan", width=width, bits=bits, params=(radius,))


def _path_labels(g: MolecularGraph, max_len: int) -> set[str]:
    labels: set[str] = set()
    atom_code = [
        (a.element.lower() if a.aromatic else a.element) for a in g.atoms
    ]

    def extend(path: list[int], encoded: list[str]) -> None:
        last = path[-1]
        for nbr, bond in g.neighbors(last):
            if nbr in path:
                continue
            step = [_BOND_CODE[bond.order], atom_code[nbr]]
            enc = encoded + step
            forward = "".join(enc)
            backward = "".join(reversed(enc))
            labels.add(min(forward, backward))
            if (len(enc) - 1) // 2 < max_len:
                path.append(nbr)
                extend(path, enc)
                path.pop()

    for start in range(len(g.atoms)):
        extend([start], [atom_code[start]])
    return labels


def path_fp(g: MolecularGraph, max_len: int = 7, width: int = 2048) -> Fingerprint:
    """Linear path fingerprint over 1..max_len bonds.

    Path labels alternate atom and bond codes and are normalized to the
    lexicographically smaller reading direction, so each undirected path
    contributes one bit.  Single atoms contribute nothing.
    """
    bits = 0
    for label in _path_labels(g, max_len):
        bits |= 1 << (fnv1a(f"p|{label}".encode()) % width)
    return Fingerprint(family="path", width=width, bits=bits, params=(max_len,))


def _longest_chain_at_least(g: MolecularGraph, threshold: int) -> bool:
    """True when a simple path of >= threshold heavy atoms exists."""
    heavy = [a.index for a in g.atoms if a.element != "H"]
    heavy_set = set(heavy)

    found = False

    def extend(path: list[int], member: set[int]) -> bool:
        if len(path) >= threshold:
            return True
        for nbr, _ in g.neighbors(path[-1]):
            if nbr in member or nbr not in heavy_set:
                continue
            path.append(nbr)
            member.add(nbr)
            if extend(path, member):
                return True
            member.discard(nbr)
            path.pop()
        return False

    for start in heavy:
        if extend([start], {start}):
            found = True
            break
    return found


def _aromatic_ring_count(g: MolecularGraph) -> int:
    return sum(
        1
        for ring in g.rings
        if all(g.atoms[a].aromatic for a in ring)
        and all(
            (b := g.bond_between(ring[k], ring[(k + 1) % len(ring)])) is not None
            and b.order is BondOrder.AROMATIC
            for k in range(len(ring))
        )
    )


def _carbonyl_bonds(g: MolecularGraph) -> list[tuple[int, int]]:
    out = []
    for bond in g.bonds:
        if bond.order is BondOrder.DOUBLE:
            ea, eb = g.atoms[bond.a].element, g.atoms[bond.b].element
            if ea == "C" and eb == "O":
                out.append((bond.a, bond.b))
            elif ea == "O" and eb == "C":
                out.append((bond.b, bond.a))
    return out


def _has_carboxyl(g: MolecularGraph) -> bool:
    for carbon, _ in _carbonyl_bonds(g):
        for nbr, bond in g.neighbors(carbon):
            other = g.atoms[nbr]
            if (
                bond.order is BondOrder.SINGLE
                and other.element == "O"
                and (other.total_h >= 1 or other.formal_charge < 0)
            ):
                return True
    return False


def _element_count(g: MolecularGraph, element: str) -> int:
    return sum(1 for a in g.atoms if a.element == element)


def _halogen_count(g: MolecularGraph) -> int:
    return sum(1 for a in g.atoms if a.element in HALOGENS)


def _rings_sharing(g: MolecularGraph, min_shared: int) -> bool:
    rings = [set(r) for r in g.rings]
    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            if len(rings[i] & rings[j]) >= min_shared:
                return True
    return False


def _has_nh(g: MolecularGraph) -> bool:
    return any(a.element == "N" and a.total_h >= 1 for a in g.atoms)


def _has_hydroxyl(g: MolecularGraph) -> bool:
    for atom in g.atoms:
        if atom.element != "O" or atom.total_h < 1:
            continue
        for nbr, bond in g.neighbors(atom.index):
            if g.atoms[nbr].element == "C" and bond.order is BondOrder.SINGLE:
                return True
    return False


def _has_ether_oxygen(g: MolecularGraph) -> bool:
    for atom in g.atoms:
        if atom.element != "O" or atom.total_h != 0:
            continue
        carbons = [
            nbr
            for nbr, bond in g.neighbors(atom.index)
            if g.atoms[nbr].element == "C" and bond.order is BondOrder.SINGLE
        ]
        if len(carbons) == 2:
            return True
    return False


def _has_nitro_like(g: MolecularGraph) -> bool:
    for atom in g.atoms:
        if atom.element != "N" or atom.formal_charge <= 0:
            continue
        oxygens = sum(1 for nbr, _ in g.neighbors(atom.index) if g.atoms[nbr].element == "O")
        if oxygens >= 2:
            return True
    return False


def _has_so(g: MolecularGraph) -> bool:
    for bond in g.bonds:
        if bond.order is BondOrder.DOUBLE:
            pair = {g.atoms[bond.a].element, g.atoms[bond.b].element}
            if pair == {"S", "O"}:
                return True
    return False


# The 48 structural keys, in bit order.  Each entry is (name, predicate).
KEY_DEFINITIONS: tuple[tuple[str, object], ...] = (
    ("carbon present", lambda g: _element_count(g, "C") > 0),
    ("nitrogen present", lambda g: _element_count(g, "N") > 0),
    ("oxygen present", lambda g: _element_count(g, "O") > 0),
    ("sulfur present", lambda g: _element_count(g, "S") > 0),
    ("phosphorus present", lambda g: _element_count(g, "P") > 0),
    ("fluorine present", lambda g: _element_count(g, "F") > 0),
    ("chlorine present", lambda g: _element_count(g, "Cl") > 0),
    ("bromine present", lambda g: _element_count(g, "Br") > 0),
    ("iodine present", lambda g: _element_count(g, "I") > 0),
    ("boron present", lambda g: _element_count(g, "B") > 0),
    (
        "element outside organic subset present",
        lambda g: any(
            a.element not in ("C", "N", "O", "S", "P", "F", "Cl", "Br", "I", "B", "H")
            for a in g.atoms
        ),
    ),
    ("three-membered ring", lambda g: any(len(r) == 3 for r in g.rings)),
    ("four-membered ring", lambda g: any(len(r) == 4 for r in g.rings)),
    ("five-membered ring", lambda g: any(len(r) == 5 for r in g.rings)),
    ("six-membered ring", lambda g: any(len(r) == 6 for r in g.rings)),
    ("seven-membered ring", lambda g: any(len(r) == 7 for r in g.rings)),
    ("eight-membered ring", lambda g: any(len(r) == 8 for r in g.rings)),
    ("aromatic ring", lambda g: _aromatic_ring_count(g) >= 1),
    ("two aromatic rings", lambda g: _aromatic_ring_count(g) >= 2),
    ("three aromatic rings", lambda g: _aromatic_ring_count(g) >= 3),
    (
        "heteroatom in ring",
        lambda g: any(
            g.in_ring(a.index) and a.element in ("N", "O", "S", "P") for a in g.atoms
        ),
    ),
    ("aromatic nitrogen", lambda g: any(a.aromatic and a.element == "N" for a in g.atoms)),
    ("halogen", lambda g: _halogen_count(g) >= 1),
    ("two halogens", lambda g: _halogen_count(g) >= 2),
    ("three halogens", lambda g: _halogen_count(g) >= 3),
    ("carbonyl", lambda g: len(_carbonyl_bonds(g)) >= 1),
    ("two carbonyls", lambda g: len(_carbonyl_bonds(g)) >= 2),
    ("carboxyl", _has_carboxyl),
    ("hydroxyl on carbon", _has_hydroxyl),
    ("ether oxygen", _has_ether_oxygen),
    ("primary amine", lambda g: any(a.element == "N" and a.total_h >= 2 for a in g.atoms)),
    ("N-H", _has_nh),
    ("S=O", _has_so),
    ("nitro-like N(+) with two oxygens", _has_nitro_like),
    ("triple bond", lambda g: any(b.order is BondOrder.TRIPLE for b in g.bonds)),
    ("chain of four heavy atoms", lambda g: _longest_chain_at_least(g, 4)),
    ("chain of six heavy atoms", lambda g: _longest_chain_at_least(g, 6)),
    ("chain of eight heavy atoms", lambda g: _longest_chain_at_least(g, 8)),
    ("chain of ten heavy atoms", lambda g: _longest_chain_at_least(g, 10)),
    ("positive formal charge", lambda g: any(a.formal_charge > 0 for a in g.atoms)),
    ("negative formal charge", lambda g: any(a.formal_charge < 0 for a in g.atoms)),
    ("nonzero net charge", lambda g: sum(a.formal_charge for a in g.atoms) != 0),
    ("two rings", lambda g: len(g.rings) >= 2),
    ("three rings", lambda g: len(g.rings) >= 3),
    ("fused rings sharing a bond", lambda g: _rings_sharing(g, 2)),
    ("rings sharing an atom", lambda g: _rings_sharing(g, 1)),
    ("two nitrogens", lambda g: _element_count(g, "N") >= 2),
    ("three oxygens", lambda g: _element_count(g, "O") >= 3),
)


def structural_keys(g: MolecularGraph) -> Fingerprint:
    """48 fixed predicates from KEY_DEFINITIONS, one bit each."""
    bits = 0
    for position, (_, predicate) in enumerate(KEY_DEFINITIONS):
        if predicate(g):
            bits |= 1 << position
    return Fingerprint(family="keys", width=48, bits=bits, params=())
