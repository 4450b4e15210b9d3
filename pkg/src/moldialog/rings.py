"""Smallest set of smallest rings.

The basis is built Horton-style: shortest cycles through every vertex are
generated from per-vertex BFS trees, sorted by size, and added greedily
while they stay linearly independent over GF(2) on edge incidence vectors.
The basis size per component is |E| - |V| + 1.
"""
from __future__ import annotations

from collections import deque


def _bfs_tree(adj: list[list[tuple[int, int]]], root: int) -> tuple[dict[int, int], dict[int, int]]:
    parent = {root: -1}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        for nbr, _ in adj[cur]:
            if nbr not in parent:
                parent[nbr] = cur
                depth[nbr] = depth[cur] + 1
                queue.append(nbr)
    return parent, depth


def _path_to_root(parent: dict[int, int], node: int) -> list[int]:
    path = [node]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    return path


def sssr(n_atoms: int, bond_pairs: list[tuple[int, int]]) -> list[list[int]]:
    """Ring atom sequences (in cycle order) forming a minimum cycle basis.

    Args:
        n_atoms: number of atoms.
        bond_pairs: (a, b) per bond.

    Returns:
        Rings as atom index lists; len(rings) = |bonds| - |atoms| + #components.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    edge_index: dict[tuple[int, int], int] = {}
    for ei, (a, b) in enumerate(bond_pairs):
        adj[a].append((b, ei))
        adj[b].append((a, ei))
        edge_index[(min(a, b), max(a, b))] = ei

    components = 0
    seen: set[int] = set()
    for start in range(n_atoms):
        if start in seen:
            continue
        components += 1
        stack = [start]
        seen.add(start)
        while stack:
            cur = stack.pop()
            for nbr, _ in adj[cur]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)

    target = len(bond_pairs) - n_atoms + components
    if target <= 0:
        return []

    candidates: dict[frozenset[int], list[int]] = {}
    for root in range(n_atoms):
        parent, depth = _bfs_tree(adj, root)
        for a, b in bond_pairs:
            if a not in parent or b not in parent:
                continue
            pa = _path_to_root(parent, a)
            pb = _path_to_root(parent, b)
            # Paths must meet only at the root for the cycle to be simple.
            if set(pa) & set(pb) != {root}:
                continue
            cycle = pa + pb[::-1][1:]
            if len(cycle) < 3 or len(set(cycle)) != len(cycle):
                continue
            key = frozenset(cycle)
            if key not in candidates or len(cycle) < len(candidates[key]):
                candidates[key] = cycle

    ordered = sorted(candidates.values(), key=lambda c: (len(c), sorted(c)))

    def edge_mask(cycle: list[int]) -> int:
        mask = 0
        for i, atom in enumerate(cycle):
            nxt = cycle[(i + 1) % len(cycle)]
            mask |= 1 << edge_index[(min(atom, nxt), max(atom, nxt))]
        return mask

    basis: list[list[int]] = []
    pivots: dict[int, int] = {}
    for cycle in ordered:
        vec = edge_mask(cycle)
        while vec:
            low = vec & -vec
            if low not in pivots:
                pivots[low] = vec
                basis.append(cycle)
                break
            vec ^= pivots[low]
        if len(basis) == target:
            break
    return basis
