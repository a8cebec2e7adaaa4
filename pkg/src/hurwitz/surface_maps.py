"""Combinatorial maps (rotation systems) and marked Hurwitz galaxies.

Dart conventions, used by every map in this package:

  * edge k owns darts 2k (tail) and 2k+1 (head); alpha(d) = d XOR 1,
  * sigma = vertex rotation, giving the next dart COUNTERclockwise around
    the dart's origin vertex,
  * phi = sigma o alpha is the face permutation; the cycle of phi through a
    dart traverses the face lying on the LEFT of that dart.

Every edge is canonically oriented tail -> head.  In a galaxy the head dart
always has the white face on its left and the tail dart the black face, so
white faces consist of head darts and black faces of tail darts, and the
edge points from vertex color c to color c+1 (mod r+1).

The galaxy of a transitive factorization (tau_1..tau_r, sigma, rho) is built
sheet by sheet: color-0 vertices are the d sheets, the color-c vertices are
the cycles of tau_c (the 2-cycle giving the half-degree-2 vertex), edges of
color c are indexed by sheets, and the closing color r -> 0 edges are
twisted by the monodromy M = sigma.  With the counterclockwise rotation
(T_s, H_s, T_t, H_t) at ramified vertices, white faces realize the cycles of
sigma^{-1} (type mu) and black faces the cycles of sigma o tau_r o ... o
tau_1-prefix product (= rho^{-1}, type nu); the choice is pinned by the
class-count tests against the factorization oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .algebra import Partition
from .permutations import Factorization, Perm, cycles, inverse

Dart = int


class GalaxyInvariantError(ValueError):
    """A named galaxy or map invariant failed to hold."""

    def __init__(self, name: str, detail: str = ""):
        self.invariant = name
        super().__init__(f"{name}" + (f": {detail}" if detail else ""))


# ============================================================
# Rotation-system maps
# ============================================================


def _cycles_of(perm: Sequence[int]) -> List[List[int]]:
    seen = [False] * len(perm)
    out: List[List[int]] = []
    for i in range(len(perm)):
        if not seen[i]:
            cur = []
            j = i
            while not seen[j]:
                seen[j] = True
                cur.append(j)
                j = perm[j]
            out.append(cur)
    return out


@dataclass(frozen=True)
class CombinatorialMap:
    """A map on an oriented surface, encoded by (sigma, alpha) on darts."""

    sigma: Tuple[int, ...]
    alpha: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.sigma)
        if len(self.alpha) != n:
            raise GalaxyInvariantError("dart count", "sigma and alpha sizes differ")
        if sorted(self.sigma) != list(range(n)):
            raise GalaxyInvariantError("rotation permutation", "sigma is not a permutation")
        for d in range(n):
            if self.alpha[d] == d or self.alpha[self.alpha[d]] != d:
                raise GalaxyInvariantError("edge involution",
                                           "alpha is not a fixed-point-free involution")

    @property
    def n_darts(self) -> int:
        return len(self.sigma)

    @property
    def n_edges(self) -> int:
        return self.n_darts // 2

    def phi(self, d: Dart) -> Dart:
        return self.sigma[self.alpha[d]]

    def vertices(self) -> List[List[Dart]]:
        """sigma-cycles, each starting at its minimal dart, sorted."""
        cs = _cycles_of(self.sigma)
        cs.sort(key=lambda c: c[0])
        return cs

    def faces(self) -> List[List[Dart]]:
        """phi-cycles, each starting at its minimal dart, sorted."""
        phi = [self.sigma[self.alpha[d]] for d in range(self.n_darts)]
        cs = _cycles_of(phi)
        cs.sort(key=lambda c: c[0])
        return cs

    def is_connected(self) -> bool:
        if self.n_darts == 0:
            return True
        seen = [False] * self.n_darts
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in (self.sigma[u], self.alpha[u]):
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return all(seen)

    def genus(self) -> int:
        """Genus from Euler's formula V - E + F = 2 - 2g."""
        return euler_genus(self)


def euler_genus(m: CombinatorialMap) -> int:
    if not m.is_connected():
        raise GalaxyInvariantError("connectivity", "map is disconnected")
    chi = len(m.vertices()) - m.n_edges + len(m.faces())
    if chi % 2 != 0:
        raise GalaxyInvariantError("euler parity", f"odd Euler defect chi = {chi}")
    g = (2 - chi) // 2
    if g < 0:
        raise GalaxyInvariantError("euler genus", f"negative genus {g}")
    return g


# ============================================================
# Marked Hurwitz galaxies
# ============================================================


@dataclass(frozen=True)
class GalaxyType:
    mu: Partition
    nu: Partition
    g: int
    d: int
    r: int


@dataclass(frozen=True)
class MarkedGalaxy:
    """A marked galaxy: rotation-system map + colors + marked vertex.

    Edge k is oriented from the vertex of dart 2k (tail) to the vertex of
    dart 2k+1 (head).  ``vertex_colors`` is indexed like ``map.vertices()``;
    ``marked`` is the index of the color-0 vertex carrying sheet 1.
    """

    map: CombinatorialMap
    d: int
    r: int
    vertex_colors: Tuple[int, ...]
    marked: int

    # ---- dart/vertex/face helpers ----

    def vertex_of_dart(self) -> List[int]:
        out = [0] * self.map.n_darts
        for vi, cyc in enumerate(self.map.vertices()):
            for dd in cyc:
                out[dd] = vi
        return out

    def dart_color(self, dart: Dart) -> int:
        return self.vertex_colors[self.vertex_of_dart()[dart]]

    def edge_endpoints(self) -> List[Tuple[int, int]]:
        """(tail vertex, head vertex) per edge."""
        v_of = self.vertex_of_dart()
        return [(v_of[2 * k], v_of[2 * k + 1]) for k in range(self.map.n_edges)]

    def face_colors(self) -> List[str]:
        """'w' for all-head faces, 'b' for all-tail faces."""
        out = []
        for f in self.map.faces():
            if all(dd % 2 == 1 for dd in f):
                out.append("w")
            elif all(dd % 2 == 0 for dd in f):
                out.append("b")
            else:
                raise GalaxyInvariantError("face bicoloring",
                                           "face mixes head and tail darts")
        return out

    def to_json(self) -> str:
        return json.dumps({
            "darts": self.map.n_darts,
            "alpha": list(self.map.alpha),
            "rotation_cycles": self.map.vertices(),
            "face_colors": self.face_colors(),
            "vertex_colors": list(self.vertex_colors),
            "marked_vertex": self.marked,
            "d": self.d,
            "r": self.r,
        })

    @staticmethod
    def from_json(text: str) -> "MarkedGalaxy":
        obj = json.loads(text)
        n = obj["darts"]
        sigma = [0] * n
        for cyc in obj["rotation_cycles"]:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                sigma[a] = b
        m = CombinatorialMap(tuple(sigma), tuple(obj["alpha"]))
        return MarkedGalaxy(m, obj["d"], obj["r"],
                            tuple(obj["vertex_colors"]), obj["marked_vertex"])


def galaxy_from_factorization(f: Factorization) -> MarkedGalaxy:
    """Build the marked galaxy encoding a transitive factorization."""
    f.check()
    d, r = f.d, len(f.taus)
    n_edges = (r + 1) * d

    # vertex keys: (0, sheet) for color 0, (c, min sheet of tau_c-cycle) else
    cyc_of: List[Dict[int, Tuple[int, ...]]] = [{}]
    for c in range(1, r + 1):
        table: Dict[int, Tuple[int, ...]] = {}
        for cyc in cycles(f.taus[c - 1]):
            for j in cyc:
                table[j] = tuple(cyc)
        cyc_of.append(table)

    def tail_dart(c: int, j: int) -> Dart:
        return 2 * (c * d + j)

    def head_dart(c: int, j: int) -> Dart:
        return 2 * (c * d + j) + 1

    m_perm: Perm = f.sigma              # closing monodromy, pinned by tests
    m_inv = inverse(m_perm)

    rotations: List[List[Dart]] = []
    colors: List[int] = []
    marked_key = (0, 0)
    key_order: List[Tuple[int, int]] = []

    for j in range(d):
        rotations.append([tail_dart(0, j), head_dart(r, m_inv[j])])
        colors.append(0)
        key_order.append((0, j))
    for c in range(1, r + 1):
        done = set()
        for j in range(d):
            cyc = cyc_of[c][j]
            if cyc in done:
                continue
            done.add(cyc)
            rot: List[Dart] = []
            for s in cyc:
                rot.extend([tail_dart(c, s), head_dart(c - 1, s)])
            rotations.append(rot)
            colors.append(c)
            key_order.append((c, min(cyc)))

    n_darts = 2 * n_edges
    sigma = [0] * n_darts
    for rot in rotations:
        for a, b in zip(rot, rot[1:] + rot[:1]):
            sigma[a] = b
    alpha = tuple(dd ^ 1 for dd in range(n_darts))
    cmap = CombinatorialMap(tuple(sigma), alpha)

    # map.vertices() sorts by minimal dart; re-index colors accordingly
    min_dart_to_idx = {min(rot): i for i, rot in enumerate(rotations)}
    vertex_colors = []
    marked = -1
    for vi, cyc in enumerate(cmap.vertices()):
        orig = min_dart_to_idx[min(cyc)]
        vertex_colors.append(colors[orig])
        if key_order[orig] == marked_key:
            marked = vi
    galaxy = MarkedGalaxy(cmap, d, r, tuple(vertex_colors), marked)
    try:
        validate_galaxy(galaxy)
    except GalaxyInvariantError as e:
        raise GalaxyInvariantError("construction convention violated", str(e))
    return galaxy


def validate_galaxy(g: MarkedGalaxy) -> GalaxyType:
    """Check every marked-galaxy invariant and return the type."""
    m = g.map
    if not m.is_connected():
        raise GalaxyInvariantError("connectivity")
    if m.n_edges != (g.r + 1) * g.d:
        raise GalaxyInvariantError("edge count", f"{m.n_edges} != (r+1)d")
    genus2 = 2 - (len(m.vertices()) - m.n_edges + len(m.faces()))
    if genus2 % 2 or genus2 < 0:
        raise GalaxyInvariantError("euler genus", f"2 - chi = {genus2}")
    genus = genus2 // 2

    v_of = g.vertex_of_dart()
    rp1 = g.r + 1
    # edge color step: tail color c -> head color c+1 (mod r+1)
    per_color_edges = [0] * rp1
    for k in range(m.n_edges):
        ct = g.vertex_colors[v_of[2 * k]]
        ch = g.vertex_colors[v_of[2 * k + 1]]
        if (ct + 1) % rp1 != ch:
            raise GalaxyInvariantError("edge coloring",
                                       f"edge {k} goes color {ct} -> {ch}")
        per_color_edges[ct] += 1
    if any(c != g.d for c in per_color_edges):
        raise GalaxyInvariantError("size", f"edges per color {per_color_edges} != d")

    # faces: bicolored, adjacent faces differ, degrees multiples of r+1
    face_list = m.faces()
    fcolors = g.face_colors()    # raises "face bicoloring" if mixed
    face_of = [0] * m.n_darts
    for fi, fc in enumerate(face_list):
        for dd in fc:
            face_of[dd] = fi
    for k in range(m.n_edges):
        if fcolors[face_of[2 * k]] == fcolors[face_of[2 * k + 1]]:
            raise GalaxyInvariantError("adjacent face colors", f"edge {k}")
    for fi, fc in enumerate(face_list):
        if len(fc) % rp1:
            raise GalaxyInvariantError("face degree",
                                       f"face {fi} has degree {len(fc)}")

    # vertex half-degrees: all 1, except one half-degree-2 per color 1..r
    by_color: Dict[int, List[int]] = {}
    for vi, cyc in enumerate(m.vertices()):
        if len(cyc) % 2:
            raise GalaxyInvariantError("vertex degree parity")
        half = len(cyc) // 2
        by_color.setdefault(g.vertex_colors[vi], []).append(half)
    for c in range(rp1):
        halves = sorted(by_color.get(c, []))
        if c == 0:
            if halves != [1] * g.d:
                raise GalaxyInvariantError("color-0 vertices",
                                           f"half-degrees {halves}")
        else:
            if halves != [1] * (g.d - 2) + [2]:
                raise GalaxyInvariantError("one half-degree-2 vertex per color",
                                           f"color {c}: {halves}")
    if g.vertex_colors[g.marked] != 0:
        raise GalaxyInvariantError("marked vertex color")

    mu = tuple(sorted((len(face_list[fi]) // rp1 for fi in range(len(face_list))
                       if fcolors[fi] == "w"), reverse=True))
    nu = tuple(sorted((len(face_list[fi]) // rp1 for fi in range(len(face_list))
                       if fcolors[fi] == "b"), reverse=True))
    if sum(mu) != g.d or sum(nu) != g.d:
        raise GalaxyInvariantError("type size", f"mu={mu}, nu={nu}")
    if len(mu) + len(nu) - 2 + 2 * genus != g.r:
        raise GalaxyInvariantError("riemann-hurwitz",
                                   f"r={g.r} vs m+n-2+2g={len(mu)+len(nu)-2+2*genus}")
    return GalaxyType(mu, nu, genus, g.d, g.r)


# ============================================================
# Distance labeling
# ============================================================


@dataclass(frozen=True)
class DistanceLabeling:
    """Oriented BFS distances from the marked vertex, with edge weights."""

    delta: Tuple[int, ...]          # per vertex index
    weights: Tuple[int, ...]        # per edge index, >= 0; 0 = geodesic

    def geodesic(self, edge: int) -> bool:
        return self.weights[edge] == 0


def distance_labeling(g: MarkedGalaxy) -> DistanceLabeling:
    """BFS over canonically oriented edges from the marked vertex."""
    n_vert = len(g.map.vertices())
    endpoints = g.edge_endpoints()
    out_edges: List[List[int]] = [[] for _ in range(n_vert)]
    for k, (t, h) in enumerate(endpoints):
        out_edges[t].append(k)

    INF = -1
    delta = [INF] * n_vert
    delta[g.marked] = 0
    frontier = [g.marked]
    while frontier:
        nxt = []
        for v in frontier:
            for k in out_edges[v]:
                h = endpoints[k][1]
                if delta[h] == INF:
                    delta[h] = delta[v] + 1
                    nxt.append(h)
        frontier = nxt
    if any(x == INF for x in delta):
        raise GalaxyInvariantError("reachability", "unreachable vertex")

    rp1 = g.r + 1
    weights = []
    for k, (t, h) in enumerate(endpoints):
        num = delta[t] + 1 - delta[h]
        if num < 0 or num % rp1:
            raise GalaxyInvariantError("distance step",
                                       f"edge {k}: delta {delta[t]} -> {delta[h]}")
        weights.append(num // rp1)
    for vi in range(n_vert):
        if delta[vi] % rp1 != g.vertex_colors[vi]:
            raise GalaxyInvariantError("color vs distance", f"vertex {vi}")
    return DistanceLabeling(tuple(delta), tuple(weights))


def check_face_weight_sums(g: MarkedGalaxy, lab: DistanceLabeling) -> None:
    """Per face of degree (r+1)i, incident edge weights must sum to i."""
    rp1 = g.r + 1
    for face in g.map.faces():
        total = sum(lab.weights[dd // 2] for dd in face)
        if total != len(face) // rp1:
            raise GalaxyInvariantError("face weight sum",
                                       f"face at dart {face[0]}: {total} != {len(face) // rp1}")


def geodesic_in_degrees(g: MarkedGalaxy, lab: DistanceLabeling) -> List[int]:
    """Number of incoming geodesic edges per vertex."""
    n_vert = len(g.map.vertices())
    endpoints = g.edge_endpoints()
    indeg = [0] * n_vert
    for k, (t, h) in enumerate(endpoints):
        if lab.weights[k] == 0:
            indeg[h] += 1
    return indeg


# ============================================================
# Canonical codes for marked-galaxy isomorphism
# ============================================================


def canonical_code(g: MarkedGalaxy) -> bytes:
    """Canonical byte string; equal iff marked galaxies are isomorphic.

    The marked vertex has half-degree one, hence a unique tail dart; rooting
    the traversal there kills all automorphisms, so a deterministic DFS
    relabeling (sigma-neighbor first, then alpha) is already canonical.
    """
    start = next(dd for dd in g.map.vertices()[g.marked] if dd % 2 == 0)
    order: List[int] = []
    seen = [False] * g.map.n_darts
    stack = [start]
    while stack:
        u = stack.pop()
        if seen[u]:
            continue
        seen[u] = True
        order.append(u)
        stack.append(g.map.alpha[u])
        stack.append(g.map.sigma[u])
    if len(order) != g.map.n_darts:
        raise GalaxyInvariantError("connectivity")
    relabel = {old: new for new, old in enumerate(order)}
    n = g.map.n_darts
    sig = [0] * n
    alp = [0] * n
    tail = [0] * n
    for old in range(n):
        new = relabel[old]
        sig[new] = relabel[g.map.sigma[old]]
        alp[new] = relabel[g.map.alpha[old]]
        tail[new] = 1 - (old % 2)
    return repr((sig, alp, tail)).encode()
