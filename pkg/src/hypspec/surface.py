"""Closed hyperbolic surfaces glued from pairs of pants, and their
triangle meshes.

A surface description lists pants (three cuff lengths each) and cuff
gluings.  Each pants is cut along its three seams into two right-angled
hexagons, each hexagon is fanned into four geodesic triangles, and the
resulting coarse complex is glued along cuffs and then refined by
repeated 4-way subdivision until every edge is short enough.  The mesh
is coordinate-free: only combinatorics and edge lengths are stored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _dijkstra

from . import hypgeom
from .errors import (
    InternalConsistencyError,
    InvalidInputError,
    ResourceLimitError,
    SpecValidationError,
)
from .hypgeom import CuffLengths

#: Default cap on the number of mesh triangles.
MAX_TRIANGLES = 2_000_000


# ---------------------------------------------------------------------------
# surface description


@dataclass(frozen=True)
class Gluing:
    """Identification of cuff ``from_cuff`` of pants ``from_pants`` with
    cuff ``to_cuff`` of pants ``to_pants``.  ``twist`` is a fraction of
    the cuff length; it is discretized to the nearest boundary-vertex
    offset when the mesh is built."""

    from_pants: int
    from_cuff: int
    to_pants: int
    to_cuff: int
    twist: float = 0.0


@dataclass(frozen=True)
class SurfaceSpec:
    pants: tuple
    gluings: tuple

    @staticmethod
    def from_dict(data) -> "SurfaceSpec":
        try:
            pants = tuple(CuffLengths(*p["cuffs"]) for p in data["pants"])
            gluings = tuple(
                Gluing(g["from"][0], g["from"][1], g["to"][0], g["to"][1],
                       float(g.get("twist", 0.0)))
                for g in data["gluings"]
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise SpecValidationError(f"malformed surface description: {exc}") from exc
        return SurfaceSpec(pants, gluings)

    @staticmethod
    def from_json(text: str) -> "SurfaceSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecValidationError(f"invalid JSON: {exc}") from exc
        return SurfaceSpec.from_dict(data)

    def to_dict(self):
        return {
            "pants": [{"cuffs": list(p.as_tuple())} for p in self.pants],
            "gluings": [
                {"from": [g.from_pants, g.from_cuff], "to": [g.to_pants, g.to_cuff],
                 "twist": g.twist}
                for g in self.gluings
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class Surface:
    """A validated closed surface: the description plus genus and area."""

    spec: SurfaceSpec
    genus: int
    area: float


def assemble(spec: SurfaceSpec) -> Surface:
    """Validate a surface description and compute genus and area.

    Every cuff must appear in exactly one gluing, glued cuffs must have
    equal lengths, and the pants adjacency graph must be connected.
    """
    n = len(spec.pants)
    if n == 0:
        raise SpecValidationError("surface has no pants")
    seen = {}
    for gi, g in enumerate(spec.gluings):
        if (g.from_pants, g.from_cuff) == (g.to_pants, g.to_cuff):
            raise SpecValidationError(
                f"cuff ({g.from_pants}, {g.from_cuff}) cannot be glued to itself")
        for p, c in ((g.from_pants, g.from_cuff), (g.to_pants, g.to_cuff)):
            if not (0 <= p < n):
                raise SpecValidationError(f"gluing {gi} references pants {p} (have {n})")
            if c not in (0, 1, 2):
                raise SpecValidationError(f"gluing {gi} references cuff index {c}")
            if (p, c) in seen:
                raise SpecValidationError(f"cuff ({p}, {c}) appears in more than one gluing")
            seen[(p, c)] = gi
        if not math.isfinite(g.twist):
            raise SpecValidationError(f"gluing {gi} has non-finite twist")
        la = spec.pants[g.from_pants].as_tuple()[g.from_cuff]
        lb = spec.pants[g.to_pants].as_tuple()[g.to_cuff]
        if abs(la - lb) > 1e-12 * max(1.0, la, lb):
            raise SpecValidationError(
                f"cuff ({g.from_pants}, {g.from_cuff}) of length {la} glued to "
                f"({g.to_pants}, {g.to_cuff}) of length {lb}")
    for p in range(n):
        for c in range(3):
            if (p, c) not in seen:
                raise SpecValidationError(f"cuff ({p}, {c}) is never glued")
    # connectivity of the pants adjacency graph
    adj = [[] for _ in range(n)]
    for g in spec.gluings:
        adj[g.from_pants].append(g.to_pants)
        adj[g.to_pants].append(g.from_pants)
    stack, reached = [0], {0}
    while stack:
        for q in adj[stack.pop()]:
            if q not in reached:
                reached.add(q)
                stack.append(q)
    if len(reached) != n:
        raise SpecValidationError("surface is not connected")
    if n % 2 != 0:
        raise SpecValidationError(f"{n} pants cannot close up into a surface")
    genus = n // 2 + 1
    return Surface(spec=spec, genus=genus, area=2.0 * math.pi * (2 * genus - 2))


# ---------------------------------------------------------------------------
# mesh


@dataclass
class CuffCycle:
    """Closed vertex/edge cycle along one glued cuff.

    ``edges[i]`` joins ``vertices[i]`` and ``vertices[(i+1) % n]``.
    """

    ends: tuple           # ((pants, cuff), (pants, cuff))
    vertices: list
    edges: list
    length: float


@dataclass
class Mesh:
    """Triangle mesh with explicit edge identity.

    ``tri_edges[t, j]`` is the edge joining corners ``j`` and
    ``(j+1) % 3`` of triangle ``t``.  Edges are first-class because a
    coarse glued complex can contain two distinct edges with the same
    endpoints (the two arcs of one cuff).
    """

    n_vertices: int
    tris: np.ndarray           # (F, 3) vertex ids
    tri_edges: np.ndarray      # (F, 3) edge ids
    edge_vertices: np.ndarray  # (E, 2) endpoint ids
    edge_lengths: np.ndarray   # (E,)
    provenance: np.ndarray     # (F, 2): pants index, coarse cell id
    cuffs: list = field(default_factory=list)
    genus: int | None = None
    closed: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_triangles(self):
        return len(self.tris)

    @property
    def n_edges(self):
        return len(self.edge_lengths)

    @property
    def tri_lengths(self):
        """(F, 3) side lengths aligned with ``tri_edges``."""
        return self.edge_lengths[self.tri_edges]

    @property
    def tri_areas(self):
        if "tri_areas" not in self._cache:
            le = self.tri_lengths
            self._cache["tri_areas"] = hypgeom.tri_area_arr(le[:, 0], le[:, 1], le[:, 2])
        return self._cache["tri_areas"]

    @property
    def area(self):
        return float(self.tri_areas.sum())

    @property
    def max_edge(self):
        return float(self.edge_lengths.max())

    @property
    def edge_tris(self):
        """(E, 2) incident triangles per edge; -1 marks a boundary slot."""
        if "edge_tris" not in self._cache:
            et = np.full((self.n_edges, 2), -1, dtype=np.int64)
            counts = np.zeros(self.n_edges, dtype=np.int64)
            for t in range(self.n_triangles):
                for e in self.tri_edges[t]:
                    if counts[e] >= 2:
                        raise InternalConsistencyError(f"edge {e} lies in more than 2 triangles")
                    et[e, counts[e]] = t
                    counts[e] += 1
            self._cache["edge_tris"] = et
            self._cache["edge_counts"] = counts
        return self._cache["edge_tris"]

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    def cuff_cycle(self, pants: int, cuff: int) -> CuffCycle:
        for cc in self.cuffs:
            if (pants, cuff) in cc.ends:
                return cc
        raise InvalidInputError(f"no cuff cycle recorded for ({pants}, {cuff})")

    def validate(self):
        """Structural invariants: closedness, edge consistency, Euler."""
        et = self.edge_tris
        counts = self._cache["edge_counts"]
        if self.closed and not np.all(counts == 2):
            bad = int(np.argmin(counts))
            raise InternalConsistencyError(f"edge {bad} lies in {counts[bad]} triangles")
        # every triangle's edge endpoints must match its corners
        v, e = self.tris, self.tri_edges
        for j in range(3):
            pair = np.sort(np.stack([v[:, j], v[:, (j + 1) % 3]], axis=1), axis=1)
            stored = np.sort(self.edge_vertices[e[:, j]], axis=1)
            if not np.array_equal(pair, stored):
                raise InternalConsistencyError("triangle corners disagree with edge table")
        le = self.tri_lengths
        if not np.all(le.sum(axis=1) - 2.0 * le.max(axis=1) > 0):
            raise InternalConsistencyError("a mesh triangle violates the triangle inequality")
        if self.closed and self.genus is not None:
            if self.euler_characteristic != 2 - 2 * self.genus:
                raise InternalConsistencyError(
                    f"Euler characteristic {self.euler_characteristic} does not match "
                    f"genus {self.genus}")
        return self


# coarse complex construction ------------------------------------------------

# local vertex layout per pants: feet of seams on cuffs
#   v0 = cuff0/seam1   v1 = cuff0/seam2   v2 = cuff1/seam2
#   v3 = cuff1/seam0   v4 = cuff2/seam0   v5 = cuff2/seam1
# local edge layout per pants (15 edges):
#   0..5   cuff arcs: (cuff0 A, cuff0 B, cuff1 A, cuff1 B, cuff2 A, cuff2 B)
#   6..8   seams s0, s1, s2
#   9..11  hexagon A fan diagonals
#   12..14 hexagon B fan diagonals
_CUFF_CYCLES = {0: (0, 1), 1: (2, 3), 2: (4, 5)}  # cuff -> (vA, vB) feet


def _pants_complex(cuffs: CuffLengths):
    """Triangles of one pants as (corners, edges, local edge lengths)."""
    h = tuple(0.5 * l for l in cuffs.as_tuple())
    s0, s1, s2 = pants_seams_checked(cuffs)
    hexa = (h[0], s2, h[1], s0, h[2], s1)
    hexb = (h[0], s1, h[2], s0, h[1], s2)
    da = hypgeom.right_hexagon_fan(hexa)
    db = hypgeom.right_hexagon_fan(hexb)
    lengths = [h[0], h[0], h[1], h[1], h[2], h[2], s0, s1, s2,
               da[0], da[1], da[2], db[0], db[1], db[2]]
    # hexagon A cycle (v0 v1 v2 v3 v4 v5), fan from v0
    # hexagon B cycle (v1 v0 v5 v4 v3 v2), fan from v1
    tris = [
        ((0, 1, 2), (0, 8, 9)),
        ((0, 2, 3), (9, 2, 10)),
        ((0, 3, 4), (10, 6, 11)),
        ((0, 4, 5), (11, 4, 7)),
        ((1, 0, 5), (1, 7, 12)),
        ((1, 5, 4), (12, 5, 13)),
        ((1, 4, 3), (13, 6, 14)),
        ((1, 3, 2), (14, 3, 8)),
    ]
    return tris, lengths


def pants_seams_checked(cuffs: CuffLengths):
    """Seams with the hexagon identity asserted to 1e-12."""
    seams = hypgeom.pants_seams(cuffs)
    halves = tuple(0.5 * l for l in cuffs.as_tuple())
    res = hypgeom.hexagon_identity_residual(halves, seams)
    if res > hypgeom.HEXAGON_IDENTITY_TOL:
        raise InternalConsistencyError(f"hexagon identity residual {res:.3e}")
    return seams


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _pants_fragment(cuffs: CuffLengths) -> Mesh:
    """Open mesh of one pants: the 8-triangle fan complex refined once.

    The pre-gluing refinement round matters: it splits every seam and
    fan diagonal at its midpoint, so a gluing between two cuffs of the
    same pants can no longer identify both endpoints of a single edge.
    Without it such gluings create loop edges the subdivision rule does
    not support.  Cuff circles get 4 boundary positions, so twists are
    discretized in steps of a quarter cuff.
    """
    ptris, plens = _pants_complex(cuffs)
    tris = np.array([c for c, _ in ptris], dtype=np.int64)
    tri_edges = np.array([e for _, e in ptris], dtype=np.int64)
    edge_vertices = np.zeros((15, 2), dtype=np.int64)
    for t in range(8):
        for j in range(3):
            u, v = tris[t, j], tris[t, (j + 1) % 3]
            edge_vertices[tri_edges[t, j]] = (min(u, v), max(u, v))
    cuffs_cc = [
        CuffCycle(ends=((0, c),),
                  vertices=list(_CUFF_CYCLES[c]),
                  edges=[2 * c, 2 * c + 1],
                  length=float(plens[2 * c] + plens[2 * c + 1]))
        for c in range(3)
    ]
    prov = np.stack([np.zeros(8, dtype=np.int64), np.arange(8)], axis=1)
    frag = Mesh(n_vertices=6, tris=tris, tri_edges=tri_edges,
                edge_vertices=edge_vertices, edge_lengths=np.array(plens),
                provenance=prov, cuffs=cuffs_cc, genus=None, closed=False)
    return subdivide(frag)


def coarse_mesh(surface: Surface) -> Mesh:
    """Glued base complex: 32 triangles per pants (the 8 coarse fan
    cells, each pre-split once), twists discretized to quarter-cuff
    boundary offsets."""
    spec = surface.spec
    n_p = len(spec.pants)
    frags = []
    cache = {}
    for p, cuffs in enumerate(spec.pants):
        key = cuffs.as_tuple()
        if key not in cache:
            cache[key] = _pants_fragment(cuffs)
        frags.append(cache[key])

    v_off = np.cumsum([0] + [f.n_vertices for f in frags])
    e_off = np.cumsum([0] + [f.n_edges for f in frags])
    tris = np.concatenate([f.tris + v_off[p] for p, f in enumerate(frags)])
    tri_edges = np.concatenate([f.tri_edges + e_off[p] for p, f in enumerate(frags)])
    edge_vertices = np.concatenate([f.edge_vertices + v_off[p]
                                    for p, f in enumerate(frags)])
    lengths = np.concatenate([f.edge_lengths for f in frags])
    prov = np.concatenate([
        np.stack([np.full(f.n_triangles, p),
                  8 * p + f.provenance[:, 1] % 8], axis=1)
        for p, f in enumerate(frags)
    ])
    circles = {}
    for p, f in enumerate(frags):
        for cc in f.cuffs:
            c = cc.ends[0][1]
            circles[(p, c)] = ([v + v_off[p] for v in cc.vertices],
                               [e + e_off[p] for e in cc.edges], cc.length)

    n_v, n_e = int(v_off[-1]), int(e_off[-1])
    uf_v = _UnionFind(n_v)
    uf_e = _UnionFind(n_e)
    cuff_records = []
    for g in spec.gluings:
        pv, pe, plen = circles[(g.from_pants, g.from_cuff)]
        qv, qe, _ = circles[(g.to_pants, g.to_cuff)]
        n_pos = len(pv)
        offset = int(round(g.twist * n_pos)) % n_pos
        # orientation-reversing identification: position i meets
        # (offset - i), the arc out of i meets the arc out of (offset - i - 1)
        for i in range(n_pos):
            uf_v.union(pv[i], qv[(offset - i) % n_pos])
            uf_e.union(pe[i], qe[(offset - i - 1) % n_pos])
        cuff_records.append((
            ((g.from_pants, g.from_cuff), (g.to_pants, g.to_cuff)), pv, pe, plen))

    vmap = _compress(uf_v, n_v)
    emap = _compress(uf_e, n_e)
    n_edges = max(emap) + 1
    new_lengths = np.empty(n_edges)
    new_ev = np.empty((n_edges, 2), dtype=np.int64)
    for e in range(n_e):
        new_lengths[emap[e]] = lengths[e]
        u, w = vmap[edge_vertices[e, 0]], vmap[edge_vertices[e, 1]]
        new_ev[emap[e]] = (min(u, w), max(u, w))

    vmap_arr = np.array(vmap, dtype=np.int64)
    emap_arr = np.array(emap, dtype=np.int64)
    tris = vmap_arr[tris]
    tri_edges = emap_arr[tri_edges]

    cuffs = []
    for ends, pv, pe, plen in cuff_records:
        cuffs.append(CuffCycle(ends=ends,
                               vertices=[vmap[v] for v in pv],
                               edges=[emap[e] for e in pe],
                               length=plen))

    mesh = Mesh(
        n_vertices=int(tris.max()) + 1,
        tris=tris, tri_edges=tri_edges,
        edge_vertices=new_ev, edge_lengths=new_lengths,
        provenance=prov, cuffs=cuffs, genus=surface.genus, closed=True,
    )
    if np.any(mesh.edge_vertices[:, 0] == mesh.edge_vertices[:, 1]):
        raise InternalConsistencyError("gluing produced a loop edge")
    for j in range(3):
        if np.any(tris[:, j] == tris[:, (j + 1) % 3]):
            raise InternalConsistencyError("gluing produced a degenerate triangle")
    return mesh.validate()


def _compress(uf, n):
    roots = sorted({uf.find(i) for i in range(n)})
    ix = {r: i for i, r in enumerate(roots)}
    return [ix[uf.find(i)] for i in range(n)]


def subdivide(mesh: Mesh) -> Mesh:
    """One 4-way subdivision round.

    Every edge is split at its geodesic midpoint and every triangle is
    replaced by three corner triangles plus the medial triangle.  The
    sub-triangle tiles partition each parent exactly, so total area is
    preserved up to roundoff.  Triangle count quadruples.
    """
    V, E, F = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
    ev = mesh.edge_vertices
    el = mesh.edge_lengths
    tris, te = mesh.tris, mesh.tri_edges

    # per-triangle side arrays: side j joins corners j, j+1
    L = el[te]                                    # (F, 3)
    a, b, c = L[:, 1], L[:, 2], L[:, 0]           # opposite corners 0, 1, 2
    mid0 = hypgeom.midline_arr(c, b, a)           # cuts corner 0 (adjacent sides c, b)
    mid1 = hypgeom.midline_arr(a, c, b)
    mid2 = hypgeom.midline_arr(b, a, c)

    new_edge_lengths = np.empty(2 * E + 3 * F)
    new_edge_lengths[0:2 * E:2] = 0.5 * el
    new_edge_lengths[1:2 * E:2] = 0.5 * el
    new_edge_lengths[2 * E + 0::3] = mid0
    new_edge_lengths[2 * E + 1::3] = mid1
    new_edge_lengths[2 * E + 2::3] = mid2

    new_edge_vertices = np.empty((2 * E + 3 * F, 2), dtype=np.int64)
    lo = np.minimum(ev[:, 0], ev[:, 1])
    hi = np.maximum(ev[:, 0], ev[:, 1])
    mids = V + np.arange(E)
    new_edge_vertices[0:2 * E:2, 0] = np.minimum(lo, mids)
    new_edge_vertices[0:2 * E:2, 1] = np.maximum(lo, mids)
    new_edge_vertices[1:2 * E:2, 0] = np.minimum(hi, mids)
    new_edge_vertices[1:2 * E:2, 1] = np.maximum(hi, mids)

    def half_at(edge_ids, corner_ids):
        """Sub-edge of each parent edge adjacent to the given corner."""
        is_lo = corner_ids == np.minimum(ev[edge_ids, 0], ev[edge_ids, 1])
        return np.where(is_lo, 2 * edge_ids, 2 * edge_ids + 1)

    cA, cB, cC = tris[:, 0], tris[:, 1], tris[:, 2]
    eAB, eBC, eCA = te[:, 0], te[:, 1], te[:, 2]
    mAB, mBC, mCA = V + eAB, V + eBC, V + eCA
    mlA = 2 * E + 3 * np.arange(F) + 0
    mlB = 2 * E + 3 * np.arange(F) + 1
    mlC = 2 * E + 3 * np.arange(F) + 2
    for ml, u, w in ((mlA, mAB, mCA), (mlB, mBC, mAB), (mlC, mCA, mBC)):
        new_edge_vertices[ml, 0] = np.minimum(u, w)
        new_edge_vertices[ml, 1] = np.maximum(u, w)

    def tri_block(corner, m_in, m_out, e_in, e_out, ml):
        """Corner sub-triangle (corner, m_in, m_out)."""
        t = np.stack([corner, m_in, m_out], axis=1)
        e = np.stack([half_at(e_in, corner), ml, half_at(e_out, corner)], axis=1)
        return t, e

    tA, eA = tri_block(cA, mAB, mCA, eAB, eCA, mlA)
    tB, eB = tri_block(cB, mBC, mAB, eBC, eAB, mlB)
    tC, eC = tri_block(cC, mCA, mBC, eCA, eBC, mlC)
    tM = np.stack([mBC, mCA, mAB], axis=1)
    eM = np.stack([mlC, mlA, mlB], axis=1)

    new_tris = np.concatenate([tA, tB, tC, tM])
    new_te = np.concatenate([eA, eB, eC, eM])
    new_prov = np.concatenate([mesh.provenance] * 4)

    cuffs = []
    for cc in mesh.cuffs:
        n = len(cc.vertices)
        verts, edges = [], []
        for i in range(n):
            e = cc.edges[i]
            u = cc.vertices[i]
            verts.extend([u, V + e])
            u_is_lo = u == min(ev[e, 0], ev[e, 1])
            first, second = (2 * e, 2 * e + 1) if u_is_lo else (2 * e + 1, 2 * e)
            edges.extend([first, second])
        cuffs.append(CuffCycle(ends=cc.ends, vertices=verts, edges=edges, length=cc.length))

    return Mesh(
        n_vertices=V + E,
        tris=new_tris, tri_edges=new_te,
        edge_vertices=new_edge_vertices, edge_lengths=new_edge_lengths,
        provenance=new_prov, cuffs=cuffs, genus=mesh.genus, closed=mesh.closed,
    )


def triangulate(surface: Surface, h_max: float, max_triangles: int = MAX_TRIANGLES) -> Mesh:
    """Mesh the surface with every edge at most ``h_max`` long."""
    if not (h_max > 0.0) or not math.isfinite(h_max):
        raise InvalidInputError(f"h_max must be positive and finite, got {h_max!r}")
    mesh = coarse_mesh(surface)
    if mesh.n_triangles > max_triangles:
        raise ResourceLimitError(
            f"coarse mesh needs {mesh.n_triangles} triangles, cap is {max_triangles}")
    while mesh.max_edge > h_max:
        if 4 * mesh.n_triangles > max_triangles:
            raise ResourceLimitError(
                f"refining below h_max={h_max} needs more than {max_triangles} triangles "
                f"(next round: {4 * mesh.n_triangles})")
        mesh = subdivide(mesh)
    return mesh.validate()


# cell graph ------------------------------------------------------------------


@dataclass
class CellGraph:
    """Adjacency of mesh cells with areas and shared-interface lengths.

    With the default coarse level the cells are the pre-refinement fan
    triangles; every cell of a closed surface with aligned gluings
    (twists that are multiples of a half turn) then has exactly three
    neighbours.  Quarter-turn twists offset the cells across a cuff and
    split a side between two neighbours, so degree 4 is possible there.
    """

    n: int
    neighbors: tuple        # tuple of sorted tuples
    areas: np.ndarray
    interface: dict         # (i, j) with i < j -> total shared length

    def interface_length(self, i, j):
        return self.interface[(min(i, j), max(i, j))]


def cell_graph(mesh: Mesh, level: str = "coarse") -> CellGraph:
    """Adjacency graph of mesh cells (shared-side neighbourhood)."""
    if not mesh.closed:
        raise InvalidInputError("cell graph requires a closed mesh")
    if level == "coarse":
        cells = mesh.provenance[:, 1]
    elif level == "fine":
        cells = np.arange(mesh.n_triangles)
    else:
        raise InvalidInputError(f"unknown cell level {level!r}")
    n = int(cells.max()) + 1
    et = mesh.edge_tris
    interface = {}
    c1 = cells[et[:, 0]]
    c2 = cells[et[:, 1]]
    cross = c1 != c2
    for e in np.nonzero(cross)[0]:
        key = (int(min(c1[e], c2[e])), int(max(c1[e], c2[e])))
        interface[key] = interface.get(key, 0.0) + float(mesh.edge_lengths[e])
    nbrs = [set() for _ in range(n)]
    for i, j in interface:
        nbrs[i].add(j)
        nbrs[j].add(i)
    areas = np.bincount(cells, weights=mesh.tri_areas, minlength=n)
    # connectivity
    reached = {0}
    stack = [0]
    while stack:
        for q in nbrs[stack.pop()]:
            if q not in reached:
                reached.add(q)
                stack.append(q)
    if len(reached) != n:
        raise InternalConsistencyError("cell graph is disconnected")
    return CellGraph(n=n, neighbors=tuple(tuple(sorted(s)) for s in nbrs),
                     areas=areas, interface=interface)


# systole ---------------------------------------------------------------------


def _cycle_is_nontrivial(mesh: Mesh, cycle_edges: set) -> bool:
    """Cut along the (simple) cycle; it is null-homotopic exactly when
    one side of the cut is a disk."""
    uf = _UnionFind(mesh.n_triangles)
    et = mesh.edge_tris
    for e in range(mesh.n_edges):
        if e not in cycle_edges:
            uf.union(int(et[e, 0]), int(et[e, 1]))
    roots = {}
    for t in range(mesh.n_triangles):
        roots.setdefault(uf.find(t), []).append(t)
    if len(roots) == 1:
        return True
    if len(roots) != 2:
        # the edge set did not form a single simple closed curve
        return False
    for side in roots.values():
        side = np.array(side)
        vs = np.unique(mesh.tris[side])
        es = np.unique(mesh.tri_edges[side])
        chi = len(vs) - len(es) + len(side)
        if chi == 1:
            return False
    return True


def systole_upper_bound(mesh: Mesh, max_sources: int = 64) -> float:
    """Length of a short non-contractible cycle in the mesh edge graph.

    Heuristic witness search: multi-source shortest-path trees, closing
    each non-tree edge into a candidate loop, keeping loops that fail
    the disk test.  Cuff cycles seed the incumbent, so the returned
    value is always realized by some non-contractible cycle.
    """
    best = math.inf
    for cc in mesh.cuffs:
        best = min(best, cc.length)
    V = mesh.n_vertices
    ev, el = mesh.edge_vertices, mesh.edge_lengths

    # min-length representative per vertex pair for path reconstruction
    rep = {}
    for e in range(mesh.n_edges):
        key = (int(min(ev[e])), int(max(ev[e])))
        if key not in rep or el[e] < el[rep[key]]:
            rep[key] = e
    rows = np.array([min(u, v) for (u, v) in rep], dtype=np.int64)
    cols = np.array([max(u, v) for (u, v) in rep], dtype=np.int64)
    wts = np.array([el[rep[k]] for k in rep])
    W = csr_matrix((np.concatenate([wts, wts]),
                    (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                   shape=(V, V))

    sources = sorted({int(v) for v in np.linspace(0, V - 1, min(V, max_sources)).astype(int)}
                     | {cc.vertices[0] for cc in mesh.cuffs})
    dist, preds = _dijkstra(W, directed=False, indices=sources, return_predecessors=True)

    edge_list = list(rep.items())
    for si in range(len(sources)):
        d = dist[si]
        pred = preds[si]
        cands = []
        for (u, v), e in edge_list:
            if pred[v] == u or pred[u] == v:
                continue
            tot = d[u] + el[e] + d[v]
            if tot < best:
                cands.append((tot, u, v, e))
        cands.sort()
        for tot, u, v, e in cands[:8]:
            path_u = _walk(pred, u)
            path_v = _walk(pred, v)
            shared = 0
            while (shared < min(len(path_u), len(path_v)) - 1
                   and path_u[shared + 1] == path_v[shared + 1]):
                shared += 1
            loop = path_u[shared:][::-1] + path_v[shared:][1:]
            if len(set(loop)) != len(loop):
                continue
            cyc_edges = {e}
            ok = True
            cyc_len = el[e]
            for x, y in zip(loop, loop[1:]):
                key = (min(x, y), max(x, y))
                ee = rep.get(key)
                if ee is None:
                    ok = False
                    break
                cyc_edges.add(ee)
                cyc_len += el[ee]
            if not ok or cyc_len >= best:
                continue
            if _cycle_is_nontrivial(mesh, cyc_edges):
                best = float(cyc_len)
    if not math.isfinite(best):
        raise InternalConsistencyError("no non-contractible cycle found")
    return best


def _walk(pred, v):
    """Path from the tree root down to v, as a vertex list root..v."""
    out = [v]
    while pred[v] >= 0:
        v = pred[v]
        out.append(v)
    return out[::-1]


# mesh file format -------------------------------------------------------------

HYPMESH_HEADER = "HYPMESH 1"


def write_hypmesh(mesh: Mesh, fh):
    """Plain-text mesh export (versioned, lossless for topology/lengths)."""
    g = mesh.genus if mesh.genus is not None else -1
    fh.write(f"{HYPMESH_HEADER}\n")
    fh.write(f"{mesh.n_vertices} {mesh.n_edges} {mesh.n_triangles} {g}\n")
    ev, el = mesh.edge_vertices, mesh.edge_lengths
    for e in range(mesh.n_edges):
        fh.write(f"{ev[e, 0]} {ev[e, 1]} {float(el[e])!r}\n")
    for t in range(mesh.n_triangles):
        v, e, p = mesh.tris[t], mesh.tri_edges[t], mesh.provenance[t]
        fh.write(f"{v[0]} {v[1]} {v[2]} {e[0]} {e[1]} {e[2]} {p[0]} {p[1]}\n")


def read_hypmesh(fh) -> Mesh:
    header = fh.readline().strip()
    if header != HYPMESH_HEADER:
        raise InvalidInputError(f"not a {HYPMESH_HEADER} file (header {header!r})")
    try:
        nv, ne, nf, g = (int(x) for x in fh.readline().split())
        ev = np.empty((ne, 2), dtype=np.int64)
        el = np.empty(ne)
        for e in range(ne):
            u, v, ln = fh.readline().split()
            ev[e] = (int(u), int(v))
            el[e] = float(ln)
        tris = np.empty((nf, 3), dtype=np.int64)
        te = np.empty((nf, 3), dtype=np.int64)
        prov = np.empty((nf, 2), dtype=np.int64)
        for t in range(nf):
            parts = fh.readline().split()
            tris[t] = [int(x) for x in parts[0:3]]
            te[t] = [int(x) for x in parts[3:6]]
            prov[t] = [int(x) for x in parts[6:8]]
    except (ValueError, IndexError) as exc:
        raise InvalidInputError(f"malformed mesh file: {exc}") from exc
    return Mesh(n_vertices=nv, tris=tris, tri_edges=te, edge_vertices=ev,
                edge_lengths=el, provenance=prov,
                genus=None if g < 0 else g).validate()
