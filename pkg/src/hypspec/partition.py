"""Connected partitions of bounded-degree cell graphs, discrete Cheeger
constants, and eigenvalue lower-bound certificates.

The certificate splits a surface's cell graph into connected blocks of
dyadically bounded size, measures each block's cell-granularity Cheeger
constant, and reports min h^2/4 over the blocks together with enough
data to audit the claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, InvalidInputError
from .spectral import assemble_fem, lowest_eigs
from .surface import cell_graph

#: Reference minimum cell area assumed by the dyadic block-size rule.
#: Certificates record the measured minimum alongside it.
REFERENCE_MIN_CELL_AREA = 0.19

#: Companion reference cell bounds: side length and maximum area of the
#: cells the certification argument is calibrated for, plus the Cheeger
#: constant of the hyperbolic plane.  Reporting only.
REFERENCE_MAX_CELL_SIDE = math.log(4.0)
REFERENCE_MAX_CELL_AREA = 1.36
PLANE_CHEEGER = 1.0

#: Cell counts up to this get exhaustive bipartition enumeration.
DEFAULT_EXACT_LIMIT = 20


@dataclass(frozen=True)
class BoundedGraph:
    """Connected simple graph with maximum degree 3."""

    neighbors: tuple

    def __post_init__(self):
        n = len(self.neighbors)
        if n == 0:
            raise InvalidInputError("graph has no vertices")
        for u, nbrs in enumerate(self.neighbors):
            if len(nbrs) > 3:
                raise InvalidInputError(f"vertex {u} has degree {len(nbrs)}")
            if len(set(nbrs)) != len(nbrs):
                raise InvalidInputError(f"vertex {u} has a repeated neighbour")
            for v in nbrs:
                if v == u:
                    raise InvalidInputError(f"vertex {u} has a self-loop")
                if not (0 <= v < n):
                    raise InvalidInputError(f"vertex {u} lists neighbour {v} out of range")
                if u not in self.neighbors[v]:
                    raise InvalidInputError(f"edge {u}-{v} is not symmetric")
        if self._reach(0) != n:
            raise InvalidInputError("graph is not connected")

    @property
    def n(self):
        return len(self.neighbors)

    def _reach(self, start):
        seen = {start}
        stack = [start]
        while stack:
            for v in self.neighbors[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen)

    @staticmethod
    def from_edges(n, edges) -> "BoundedGraph":
        nbrs = [set() for _ in range(n)]
        for u, v in edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return BoundedGraph(tuple(tuple(sorted(s)) for s in nbrs))


@dataclass(frozen=True)
class Partition:
    """Blocks of size in [2^k, 2^(k+1) - 1] plus a connected remainder
    of size below 2^k (possibly empty)."""

    k: int
    blocks: tuple
    remainder: tuple

    @property
    def alpha(self):
        return len(self.blocks)


def _bfs_tree(graph: BoundedGraph):
    """Deterministic spanning tree as a parent array rooted at 0."""
    parent = [-2] * graph.n
    parent[0] = -1
    queue = [0]
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        for v in graph.neighbors[u]:
            if parent[v] == -2:
                parent[v] = u
                queue.append(v)
    return parent


def partition_bounded(graph: BoundedGraph, k: int, *, spanning_tree=None) -> Partition:
    """Split into connected blocks of size 2^k .. 2^(k+1)-1.

    Works on a spanning tree re-rooted at one of its leaves, so every
    vertex keeps at most two children.  While at least 2^k vertices
    remain, descending through heavier children always reaches a
    subtree of admissible size, which is split off whole; what is left
    stays connected.  Fewer than 2^k vertices remain as the remainder.

    ``spanning_tree`` optionally fixes the tree (a sequence of edges
    that must form a spanning tree using graph edges only).
    """
    if k < 0:
        raise InvalidInputError(f"k must be non-negative, got {k}")
    n = graph.n
    lo, hi = 2 ** k, 2 ** (k + 1) - 1
    if n < lo:
        return Partition(k=k, blocks=(), remainder=tuple(range(n)))
    if n == 1:
        # lo == 1 here; a lone vertex has no leaf to re-root at
        return Partition(k=k, blocks=((0,),), remainder=())

    if spanning_tree is None:
        parent = _bfs_tree(graph)
    else:
        edges = [tuple(e) for e in spanning_tree]
        if len(edges) != n - 1:
            raise InvalidInputError(f"spanning tree needs {n - 1} edges, got {len(edges)}")
        adj = [[] for _ in range(n)]
        for u, v in edges:
            if v not in graph.neighbors[u]:
                raise InvalidInputError(f"tree edge {u}-{v} is not a graph edge")
            adj[u].append(v)
            adj[v].append(u)
        parent = [-2] * n
        parent[0] = -1
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if parent[v] == -2:
                    parent[v] = u
                    stack.append(v)
        if any(p == -2 for p in parent):
            raise InvalidInputError("edges do not form a spanning tree")

    children = [[] for _ in range(n)]
    for v, p in enumerate(parent):
        if p >= 0:
            children[p].append(v)

    # re-root at the lowest-index leaf so every vertex has <= 2 children
    root = min(v for v in range(n) if len(children[v]) + (parent[v] >= 0) == 1)
    parent = _reroot(parent, children, root)
    children = [[] for _ in range(n)]
    for v, p in enumerate(parent):
        if p >= 0:
            children[p].append(v)
    for v in range(n):
        children[v].sort()
        limit = 1 if v == root else 2
        if len(children[v]) > limit:
            raise InternalConsistencyError(f"vertex {v} has {len(children[v])} children")

    alive = [True] * n
    n_alive = n
    blocks = []
    while n_alive >= lo:
        size = _subtree_sizes(root, children, alive)
        v = root
        while size[v] > hi:
            best = None
            for c in children[v]:
                if alive[c] and (best is None or size[c] > size[best]):
                    best = c
            if best is None or size[best] < lo:
                raise InternalConsistencyError("heavy-child descent failed")
            v = best
        block = _collect_subtree(v, children, alive)
        for u in block:
            alive[u] = False
        n_alive -= len(block)
        blocks.append(tuple(sorted(block)))
        if v == root:
            break
    remainder = tuple(v for v in range(n) if alive[v])
    return Partition(k=k, blocks=tuple(blocks), remainder=remainder)


def _reroot(parent, children, root):
    new_parent = [-2] * len(parent)
    new_parent[root] = -1
    stack = [root]
    while stack:
        u = stack.pop()
        for v in children[u]:
            if new_parent[v] == -2:
                new_parent[v] = u
                stack.append(v)
        p = parent[u]
        if p >= 0 and new_parent[p] == -2:
            new_parent[p] = u
            stack.append(p)
    return new_parent


def _subtree_sizes(root, children, alive):
    n = len(children)
    size = [0] * n
    order = []
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for c in children[u]:
            if alive[c]:
                stack.append(c)
    for u in reversed(order):
        size[u] = 1 + sum(size[c] for c in children[u] if alive[c])
    return size


def _collect_subtree(v, children, alive):
    out = []
    stack = [v]
    while stack:
        u = stack.pop()
        out.append(u)
        for c in children[u]:
            if alive[c]:
                stack.append(c)
    return out


def choose_block_exponent(epsilon: float) -> int:
    """Smallest k with 2^k at least 8*pi / (0.19 * epsilon)."""
    if not (0.0 < epsilon <= 2.0):
        raise InvalidInputError(f"epsilon must lie in (0, 2], got {epsilon!r}")
    target = 8.0 * math.pi / (REFERENCE_MIN_CELL_AREA * epsilon)
    k = 0
    while 2.0 ** k < target:
        k += 1
    return k


# ---------------------------------------------------------------------------
# discrete Cheeger constants


@dataclass(frozen=True)
class CheegerEstimate:
    """Cell-granularity bipartition quality.

    ``value`` is cut length over the smaller side's area.  Method
    "exact" means the true optimum over connected cell bipartitions;
    "sweep" means a spectral-ordering heuristic whose value can exceed
    the optimum.
    """

    value: float
    side: tuple
    method: str


def _subgraph_masks(cells, interface):
    index = {c: i for i, c in enumerate(cells)}
    nbr_mask = [0] * len(cells)
    pair_list = []
    for (a, b), length in interface.items():
        if a in index and b in index:
            ia, ib = index[a], index[b]
            nbr_mask[ia] |= 1 << ib
            nbr_mask[ib] |= 1 << ia
            pair_list.append((ia, ib, length))
    return index, nbr_mask, pair_list


def _mask_connected(mask, nbr_mask):
    if mask == 0:
        return False
    start = mask & -mask
    seen = start
    frontier = start
    while frontier:
        nxt = 0
        m = frontier
        while m:
            low = m & -m
            nxt |= nbr_mask[low.bit_length() - 1]
            m ^= low
        nxt &= mask & ~seen
        seen |= nxt
        frontier = nxt
    return seen == mask


def discrete_cheeger(mesh, cells=None, *, exact_limit: int = DEFAULT_EXACT_LIMIT,
                     tol: float = 1e-6, seed: int = 0) -> CheegerEstimate:
    """Cheeger constant of a cell subset at cell granularity.

    Cells default to all coarse cells.  Up to ``exact_limit`` cells all
    connected bipartitions are enumerated; beyond that a spectral sweep
    cut is returned (method "sweep").
    """
    cg = cell_graph(mesh)
    if cells is None:
        cells = tuple(range(cg.n))
    else:
        cells = tuple(sorted(set(int(c) for c in cells)))
        if any(c < 0 or c >= cg.n for c in cells):
            raise InvalidInputError("cell id out of range")
    if len(cells) < 2:
        raise InvalidInputError("need at least 2 cells to bipartition")

    index, nbr_mask, pairs = _subgraph_masks(cells, cg.interface)
    full = (1 << len(cells)) - 1
    if not _mask_connected(full, nbr_mask):
        raise InvalidInputError("cell subset is not connected")
    areas = np.array([cg.areas[c] for c in cells])

    if len(cells) <= exact_limit:
        return _cheeger_exact(cells, nbr_mask, pairs, areas)
    return _cheeger_sweep(mesh, cells, cg, nbr_mask, pairs, areas, tol=tol, seed=seed)


def _cut_ratio(mask, pairs, areas, total_area):
    cut = 0.0
    for ia, ib, length in pairs:
        if ((mask >> ia) & 1) != ((mask >> ib) & 1):
            cut += length
    area_a = float(sum(areas[i] for i in range(len(areas)) if (mask >> i) & 1))
    small = min(area_a, total_area - area_a)
    return cut / small


def _cheeger_exact(cells, nbr_mask, pairs, areas):
    n = len(cells)
    full = (1 << n) - 1
    total = float(areas.sum())
    area_arr = areas
    best = math.inf
    best_mask = None
    # cell 0 stays on side B, halving the enumeration
    for mask in range(1, 1 << (n - 1)):
        m = mask << 1
        if not _mask_connected(m, nbr_mask):
            continue
        if not _mask_connected(full ^ m, nbr_mask):
            continue
        cut = 0.0
        for ia, ib, length in pairs:
            if ((m >> ia) & 1) != ((m >> ib) & 1):
                cut += length
        area_a = 0.0
        mm = m
        while mm:
            low = mm & -mm
            area_a += area_arr[low.bit_length() - 1]
            mm ^= low
        ratio = cut / min(area_a, total - area_a)
        if ratio < best:
            best = ratio
            best_mask = m
    if best_mask is None:
        raise InternalConsistencyError("no connected bipartition found")
    side = tuple(cells[i] for i in range(n) if (best_mask >> i) & 1)
    return CheegerEstimate(value=float(best), side=side, method="exact")


def _cheeger_sweep(mesh, cells, cg, nbr_mask, pairs, areas, *, tol, seed):
    cell_set = set(cells)
    tri_cells = mesh.provenance[:, 1]
    tri_ids = np.nonzero(np.isin(tri_cells, list(cell_set)))[0]
    pair = assemble_fem(mesh, tri_ids=tri_ids)
    spec = lowest_eigs(pair, 2, tol=tol, seed=seed)
    phi = spec.vectors[:, 1]

    # mass-weighted mean of phi over each cell orders the sweep
    vids = pair.vertex_ids if pair.vertex_ids is not None else np.arange(pair.n)
    phi_of = np.zeros(mesh.n_vertices)
    phi_of[vids] = phi
    index = {c: i for i, c in enumerate(cells)}
    acc = np.zeros(len(cells))
    tri_third = mesh.tri_areas / 3.0
    for t in tri_ids:
        i = index[int(tri_cells[t])]
        acc[i] += tri_third[t] * phi_of[mesh.tris[t]].sum()
    score = acc / areas
    order = np.argsort(score, kind="stable")

    total = float(areas.sum())
    full = (1 << len(cells)) - 1
    best = math.inf
    best_mask = None
    mask = 0
    for j in range(len(cells) - 1):
        mask |= 1 << int(order[j])
        if not _mask_connected(mask, nbr_mask):
            continue
        if not _mask_connected(full ^ mask, nbr_mask):
            continue
        ratio = _cut_ratio(mask, pairs, areas, total)
        if ratio < best:
            best = ratio
            best_mask = mask
    if best_mask is None:
        # guaranteed fallback: split a spanning-tree leaf off
        leaf = _tree_leaf(nbr_mask)
        best_mask = 1 << leaf
        best = _cut_ratio(best_mask, pairs, areas, total)
    side = tuple(cells[i] for i in range(len(cells)) if (best_mask >> i) & 1)
    return CheegerEstimate(value=float(best), side=side, method="sweep")


def _tree_leaf(nbr_mask):
    parent = {0: None}
    order = [0]
    stack = [0]
    while stack:
        u = stack.pop()
        m = nbr_mask[u]
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            if v not in parent:
                parent[v] = u
                order.append(v)
                stack.append(v)
    children = {u: 0 for u in parent}
    for v, p in parent.items():
        if p is not None:
            children[p] += 1
    leaves = sorted(v for v in parent if children[v] == 0 and parent[v] is not None)
    return leaves[0] if leaves else order[-1]


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class PieceRecord:
    cells: tuple
    size: int
    area: float
    cheeger_value: float | None
    cheeger_method: str
    remainder: bool

    def to_dict(self):
        return {
            "size": self.size,
            "area": self.area,
            "cheeger": {"value": self.cheeger_value, "method": self.cheeger_method},
            "remainder": self.remainder,
            "cells": list(self.cells),
        }


@dataclass(frozen=True)
class Certificate:
    """Auditable record of an eigenvalue lower-bound computation.

    ``lower_bound`` is min h^2/4 over the pieces, claimed for the
    eigenvalue with index ``target_index`` (0-based, so index 1 is the
    first nonzero eigenvalue).  ``conforming`` is False whenever the
    piece count exceeds the target index or any piece lacks a usable
    Cheeger value; such certificates are reports, not claims.
    """

    epsilon: float
    genus: int
    branch: str                 # "small" or "large"
    k: int | None
    alpha: int
    pieces: tuple
    lower_bound: float
    target_index: int
    conforming: bool
    min_cell_area: float
    n_cells: int

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "genus": self.genus,
            "branch": self.branch,
            "k": self.k,
            "alpha": self.alpha,
            "blocks": [p.to_dict() for p in self.pieces],
            "lower_bound": self.lower_bound,
            "target_index": self.target_index,
            "conforming": self.conforming,
            "min_cell_area": self.min_cell_area,
            "cells": self.n_cells,
        }


def certify_lower_bound(mesh, epsilon: float, *, exact_limit: int = DEFAULT_EXACT_LIMIT,
                        k_override: int | None = None, tol: float = 1e-6,
                        seed: int = 0) -> Certificate:
    """Certified lower bound for eigenvalue number ceil(epsilon * genus).

    With epsilon * genus <= 1 the whole surface is one piece and its
    Cheeger constant bounds the first nonzero eigenvalue.  Otherwise
    the cell graph is split by `partition_bounded` at the exponent from
    `choose_block_exponent` and each piece is measured separately; the
    bound is the worst piece.  ``k_override`` forces a different block
    exponent (diagnostic use; the certificate stays honest because
    conformance is re-checked against the actual piece count).
    """
    if not (0.0 < epsilon <= 2.0):
        raise InvalidInputError(f"epsilon must lie in (0, 2], got {epsilon!r}")
    if not mesh.closed or mesh.genus is None:
        raise InvalidInputError("certification needs a closed mesh of known genus")
    genus = mesh.genus
    target = math.ceil(epsilon * genus)
    cg = cell_graph(mesh)
    min_cell_area = float(cg.areas.min())

    if epsilon * genus <= 1.0:
        est = discrete_cheeger(mesh, None, exact_limit=exact_limit, tol=tol, seed=seed)
        piece = PieceRecord(cells=tuple(range(cg.n)), size=cg.n,
                            area=float(cg.areas.sum()),
                            cheeger_value=est.value, cheeger_method=est.method,
                            remainder=True)
        return Certificate(
            epsilon=epsilon, genus=genus, branch="small", k=None, alpha=0,
            pieces=(piece,), lower_bound=est.value ** 2 / 4.0,
            target_index=target, conforming=True,
            min_cell_area=min_cell_area, n_cells=cg.n)

    k = choose_block_exponent(epsilon) if k_override is None else int(k_override)
    if max(len(nb) for nb in cg.neighbors) > 3:
        raise InvalidInputError(
            "cell graph has a cell with more than 3 neighbours (quarter-turn "
            "twists misalign cells across a cuff); partitioned certification "
            "needs aligned gluings")
    graph = BoundedGraph(cg.neighbors)
    part = partition_bounded(graph, k)
    groups = [(cells, False) for cells in part.blocks]
    if part.remainder:
        groups.append((part.remainder, True))

    pieces = []
    usable = []
    for cells, is_rem in groups:
        area = float(sum(cg.areas[c] for c in cells))
        if len(cells) < 2:
            pieces.append(PieceRecord(cells=tuple(cells), size=len(cells), area=area,
                                      cheeger_value=None, cheeger_method="none",
                                      remainder=is_rem))
            continue
        est = discrete_cheeger(mesh, cells, exact_limit=exact_limit, tol=tol, seed=seed)
        pieces.append(PieceRecord(cells=tuple(cells), size=len(cells), area=area,
                                  cheeger_value=est.value, cheeger_method=est.method,
                                  remainder=is_rem))
        usable.append(est.value)

    all_usable = len(usable) == len(pieces)
    lower = min(usable) ** 2 / 4.0 if (usable and all_usable) else 0.0
    conforming = all_usable and (part.alpha + 1 <= target)
    return Certificate(
        epsilon=epsilon, genus=genus, branch="large", k=k, alpha=part.alpha,
        pieces=tuple(pieces), lower_bound=lower, target_index=target,
        conforming=conforming, min_cell_area=min_cell_area, n_cells=cg.n)
