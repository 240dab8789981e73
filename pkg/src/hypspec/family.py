"""A family of surfaces with many small eigenvalues.

The building block is a chain of 2k pants: adjacent pants are glued in
pairs along two cuffs, pairs are linked through their remaining cuffs,
and the chain keeps one open cuff at each end.  Closing l copies of the
block into a ring gives a genus kl+1 surface.  A piecewise-linear
"staircase" function climbs hop-by-hop to height k in the middle of a
block and back to zero, one copy per block; the l of them have disjoint
supports and Rayleigh quotients of order 1/k^2, which forces l small
eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, InvalidInputError
from .spectral import assemble_fem, lowest_eigs, minimax_upper_bound
from .surface import MAX_TRIANGLES, Gluing, Surface, SurfaceSpec, assemble, triangulate
from .hypgeom import CuffLengths


@dataclass(frozen=True)
class ChainBlock:
    """Open chain of 2k pants; entry and exit are (pants, cuff) pairs
    left unglued."""

    k: int
    pants: tuple
    gluings: tuple
    entry: tuple
    exit: tuple


def build_chain_block(k: int, *, cuff_length: float = 1.0) -> ChainBlock:
    """Chain of 2k pants: pants 2i and 2i+1 share cuffs 1 and 2,
    consecutive pairs share cuff 0."""
    if k < 1:
        raise InvalidInputError(f"k must be at least 1, got {k}")
    cuffs = CuffLengths(cuff_length, cuff_length, cuff_length)
    pants = tuple(cuffs for _ in range(2 * k))
    gluings = []
    for i in range(k):
        gluings.append(Gluing(2 * i, 1, 2 * i + 1, 1))
        gluings.append(Gluing(2 * i, 2, 2 * i + 1, 2))
    for i in range(k - 1):
        gluings.append(Gluing(2 * i + 1, 0, 2 * i + 2, 0))
    return ChainBlock(k=k, pants=pants, gluings=tuple(gluings),
                      entry=(0, 0), exit=(2 * k - 1, 0))


def build_block_ring(k: int, l: int, *, cuff_length: float = 1.0,
                     twist: float = 0.0) -> Surface:
    """Ring of l chain blocks; genus comes out as k*l + 1."""
    if l < 1:
        raise InvalidInputError(f"l must be at least 1, got {l}")
    block = build_chain_block(k, cuff_length=cuff_length)
    n_b = 2 * k
    pants = block.pants * l
    gluings = []
    for c in range(l):
        off = c * n_b
        for g in block.gluings:
            gluings.append(Gluing(g.from_pants + off, g.from_cuff,
                                  g.to_pants + off, g.to_cuff, g.twist))
    for c in range(l):
        exit_p = c * n_b + block.exit[0]
        entry_p = ((c + 1) % l) * n_b + block.entry[0]
        gluings.append(Gluing(exit_p, block.exit[1], entry_p, block.entry[1], twist))
    surf = assemble(SurfaceSpec(pants=pants, gluings=tuple(gluings)))
    if surf.genus != k * l + 1:
        raise InternalConsistencyError(
            f"ring of {l} blocks of 2*{k} pants got genus {surf.genus}")
    return surf


# ---------------------------------------------------------------------------
# staircase test functions


def _chain_levels(k: int):
    """Boundary level between chain positions p and p+1 (1-based pants)."""
    return [min(p, 2 * k - p) for p in range(2 * k + 1)]


def _pants_vertex_sets(mesh):
    """Vertex ids touched by each pants' triangles."""
    n_p = int(mesh.provenance[:, 0].max()) + 1
    out = [set() for _ in range(n_p)]
    for t in range(mesh.n_triangles):
        p = int(mesh.provenance[t, 0])
        out[p].update(int(v) for v in mesh.tris[t])
    return out


def _pants_adjacency(mesh, pants_id):
    """Vertex adjacency restricted to one pants' triangles."""
    adj = {}
    mask = mesh.provenance[:, 0] == pants_id
    for t in np.nonzero(mask)[0]:
        vs = mesh.tris[t]
        for j in range(3):
            u, v = int(vs[j]), int(vs[(j + 1) % 3])
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
    return adj


def _hops_from(adj, sources):
    dist = {s: 0 for s in sources}
    frontier = list(sources)
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    return dist


def staircase_function(mesh, k: int, l: int, copy: int) -> np.ndarray:
    """Vertex values of the staircase supported on one block copy.

    Inside each pants the value interpolates linearly in hop distance
    between the entry-side level and the exit-side level; it vanishes
    on the block's two open-end cuffs, hence outside the copy.
    """
    if not (0 <= copy < l):
        raise InvalidInputError(f"copy must be in [0, {l}), got {copy}")
    levels = _chain_levels(k)
    n_b = 2 * k
    f = np.zeros(mesh.n_vertices)
    assigned = np.zeros(mesh.n_vertices, dtype=bool)
    for j in range(n_b):
        pants_id = copy * n_b + j
        pos = j + 1                          # 1-based chain position
        c_in, c_out = levels[pos - 1], levels[pos]
        if pos % 2 == 1:
            entry_cuffs, exit_cuffs = (0,), (1, 2)
        else:
            entry_cuffs, exit_cuffs = (1, 2), (0,)
        entry_vs = set()
        for c in entry_cuffs:
            entry_vs.update(mesh.cuff_cycle(pants_id, c).vertices)
        exit_vs = set()
        for c in exit_cuffs:
            exit_vs.update(mesh.cuff_cycle(pants_id, c).vertices)
        adj = _pants_adjacency(mesh, pants_id)
        d_in = _hops_from(adj, entry_vs)
        d_out = _hops_from(adj, exit_vs)
        for v in adj:
            din, dout = d_in.get(v), d_out.get(v)
            if din is None or dout is None or din + dout == 0:
                raise InternalConsistencyError(
                    f"vertex {v} of pants {pants_id} unreachable from a boundary")
            val = c_in + (c_out - c_in) * din / (din + dout)
            if assigned[v] and abs(f[v] - val) > 1e-9:
                raise InternalConsistencyError(
                    f"staircase value mismatch at shared vertex {v}")
            f[v] = val
            assigned[v] = True
    return f


def disjoint_test_functions(mesh, k: int, l: int) -> np.ndarray:
    """One staircase per block copy, as columns of an (n, l) array."""
    cols = [staircase_function(mesh, k, l, c) for c in range(l)]
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# sharpness study


@dataclass(frozen=True)
class SharpnessRow:
    k: int
    upper: float
    lam: float

    def to_dict(self):
        return {"k": self.k, "upper": self.upper, "lambda": self.lam}


@dataclass(frozen=True)
class SharpnessReport:
    l: int
    rows: tuple
    fit_upper_exponent: float | None
    fit_lambda_exponent: float | None

    def to_dict(self):
        return {
            "l": self.l,
            "rows": [r.to_dict() for r in self.rows],
            "fit_upper_exponent": self.fit_upper_exponent,
            "fit_lambda_exponent": self.fit_lambda_exponent,
        }


def _loglog_slope(ks, vals):
    if len(ks) < 2 or any(v <= 0.0 for v in vals):
        return None
    coeffs = np.polyfit(np.log(np.asarray(ks, float)), np.log(np.asarray(vals, float)), 1)
    return float(coeffs[0])


def verify_sharpness(k_values, l: int, *, h_max: float = 0.35,
                     cuff_length: float = 1.0, tol: float = 1e-8,
                     maxiter: int = 10000, seed: int = 0,
                     max_triangles: int = MAX_TRIANGLES) -> SharpnessReport:
    """Upper bound vs computed eigenvalue across block sizes.

    For each k the ring of l blocks is meshed, the l disjoint
    staircases give a variational upper bound for eigenvalue number
    l-1 (indexed from 0), and the eigensolver provides the computed
    value.  A computed value above its upper bound (beyond roundoff)
    is a contradiction and raises InternalConsistencyError.
    """
    ks = [int(k) for k in k_values]
    if len(ks) < 3:
        raise InvalidInputError(f"need at least three k values, got {len(ks)}")
    if sorted(set(ks)) != ks:
        raise InvalidInputError("k values must be strictly increasing and unique")
    if l < 1:
        raise InvalidInputError(f"l must be at least 1, got {l}")
    rows = []
    for k in ks:
        surf = build_block_ring(k, l, cuff_length=cuff_length)
        mesh = triangulate(surf, h_max=h_max, max_triangles=max_triangles)
        pair = assemble_fem(mesh)
        funcs = disjoint_test_functions(mesh, k, l)
        upper = minimax_upper_bound(pair, funcs)
        spec = lowest_eigs(pair, l, tol=tol, maxiter=maxiter, seed=seed)
        lam = float(spec.values[l - 1])
        if lam > upper * (1.0 + 1e-8) + 1e-12:
            raise InternalConsistencyError(
                f"k={k}: computed eigenvalue {lam} exceeds its upper bound {upper}")
        rows.append(SharpnessRow(k=k, upper=float(upper), lam=lam))
    return SharpnessReport(
        l=l, rows=tuple(rows),
        fit_upper_exponent=_loglog_slope(ks, [r.upper for r in rows]),
        fit_lambda_exponent=_loglog_slope(ks, [r.lam for r in rows]))
