"""The galaxy <-> mobile correspondence, step by step.

Pipeline (and its inverse):

    galaxy G --theta_tree--> splitting tree Theta(G)
             --gamma_cut---> boundary cactus C = Gamma(G)   (cut along Theta)
             --retract_pi--> Hurwitz mobile M = Pi(C)

``phi`` is the composite; ``phi_inverse`` undoes it via ``expand_pi_inverse``
and ``glue``.  Cutting along the tree is implemented as dart surgery: every
geodesic edge doubles into a white and a black boundary copy, each vertex
falls apart into the corner chains forced by face inheritance, and at a
doubly-geodesic (split) vertex the two chains ending in white in-copies fuse
into the single active vertex carrying two boundary corners.

Corner labels along the boundary walk reproduce the distance labels and
read off the contour code of Theta(G), which is what makes the gluing
inverse canonical.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .mobiles import HurwitzMobile, MobileEdge, MobileInvariantError, validate_mobile
from .surface_maps import (
    CombinatorialMap,
    DistanceLabeling,
    GalaxyInvariantError,
    MarkedGalaxy,
    distance_labeling,
    validate_galaxy,
)

Dart = int


# ============================================================
# The splitting tree Theta(G)
# ============================================================


@dataclass(frozen=True)
class SplitTree:
    """Plane tree of geodesic edges, with doubly-geodesic vertices split."""

    parent_edge: Tuple[int, ...]        # geodesic edge into each node; -1 at root
    children: Tuple[Tuple[int, ...], ...]   # node indices, plane order
    color: Tuple[int, ...]
    delta: Tuple[int, ...]
    root: int

    @property
    def n_nodes(self) -> int:
        return len(self.children)

    def contour_labels(self) -> List[int]:
        """Corner labels along the contour walk, starting at the root."""
        out: List[int] = []

        def visit(v: int, is_root: bool) -> None:
            for c in self.children[v]:
                out.append(self.delta[v])
                visit(c, False)
            if not is_root:
                out.append(self.delta[v])

        visit(self.root, True)
        return out


def _split_halves(g: MarkedGalaxy, lab: DistanceLabeling) -> Dict[int, List[List[Dart]]]:
    """Rotation arcs of each galaxy vertex after splitting.

    A doubly-geodesic vertex (two incoming geodesic edges) splits into the
    two arcs (geodesic head dart h, sigma(h)); every other vertex stays
    whole.  Arcs are rotation-ordered dart lists.
    """
    out: Dict[int, List[List[Dart]]] = {}
    for vi, cyc in enumerate(g.map.vertices()):
        geo_heads = [d for d in cyc if d % 2 == 1 and lab.weights[d // 2] == 0]
        if len(geo_heads) == 2:
            h1, h2 = geo_heads
            arc1 = [h1, g.map.sigma[h1]]
            arc2 = [h2, g.map.sigma[h2]]
            assert sorted(arc1 + arc2) == sorted(cyc)
            out[vi] = [arc1, arc2]
        else:
            out[vi] = [list(cyc)]
    return out


def theta_tree(g: MarkedGalaxy, lab: DistanceLabeling | None = None) -> SplitTree:
    """The splitting tree of geodesic edges, rooted at the marked vertex."""
    if lab is None:
        lab = distance_labeling(g)
    halves = _split_halves(g, lab)
    v_of = g.vertex_of_dart()

    node_of_dart: Dict[Dart, int] = {}
    colors: List[int] = []
    deltas: List[int] = []
    arcs: List[List[Dart]] = []
    root = -1
    for vi in sorted(halves):
        for arc in halves[vi]:
            idx = len(arcs)
            arcs.append(arc)
            colors.append(g.vertex_colors[vi])
            deltas.append(lab.delta[vi])
            for d in arc:
                node_of_dart[d] = idx
            if vi == g.marked:
                root = idx

    n = len(arcs)
    parent_edge = [-1] * n
    children: List[List[int]] = [[] for _ in range(n)]
    for idx, arc in enumerate(arcs):
        # children follow the plane order: scan the arc from the in-dart
        in_heads = [d for d in arc if d % 2 == 1 and lab.weights[d // 2] == 0]
        if idx == root:
            scan = arc
        else:
            assert len(in_heads) == 1
            h = in_heads[0]
            parent_edge[idx] = h // 2
            i0 = arc.index(h)
            scan = arc[i0:] + arc[:i0]
        for d in scan:
            if d % 2 == 0 and lab.weights[d // 2] == 0:
                head_dart = d ^ 1
                children[idx].append(node_of_dart[head_dart])

    tree = SplitTree(tuple(parent_edge), tuple(map(tuple, children)),
                     tuple(colors), tuple(deltas), root)
    n_edges = sum(len(c) for c in tree.children)
    if n_edges != n - 1:
        raise GalaxyInvariantError("splitting tree", "edge count != nodes - 1")
    for idx in range(n):
        for c in tree.children[idx]:
            if deltas[c] != deltas[idx] + 1:
                raise GalaxyInvariantError("splitting tree", "delta not tree distance")
    return tree


# ============================================================
# Boundary cacti
# ============================================================


@dataclass(frozen=True)
class BoundaryCactus:
    """A map with one boundary face, vertex colors, and typed edges.

    Edge k owns darts 2k (tail) and 2k+1 (head); kinds are 'i' (internal,
    with weight >= 1), 'w' (white boundary) and 'b' (black boundary).  The
    boundary face is the unique face carrying the tail darts of 'w' edges
    and the head darts of 'b' edges.
    """

    map: CombinatorialMap
    d: int
    r: int
    edge_kind: Tuple[str, ...]
    edge_weight: Tuple[int, ...]
    vertex_colors: Tuple[int, ...]
    marked_vertex: Optional[int] = None

    # ---- structure ----

    def vertex_of_dart(self) -> List[int]:
        out = [0] * self.map.n_darts
        for vi, cyc in enumerate(self.map.vertices()):
            for dd in cyc:
                out[dd] = vi
        return out

    def left_face_kind(self, dart: Dart) -> str:
        """Color of the face on the left of a dart: 'w', 'b' or '@' (boundary)."""
        kind = self.edge_kind[dart // 2]
        head = dart % 2 == 1
        if kind == "i":
            return "w" if head else "b"
        if kind == "w":
            return "w" if head else "@"
        return "@" if head else "b"

    def faces_by_kind(self) -> Tuple[List[List[Dart]], List[List[Dart]], List[Dart]]:
        """(white faces, black faces, boundary cycle); validates consistency."""
        whites: List[List[Dart]] = []
        blacks: List[List[Dart]] = []
        boundary: List[List[Dart]] = []
        for f in self.map.faces():
            kinds = {self.left_face_kind(d) for d in f}
            if len(kinds) != 1:
                raise GalaxyInvariantError("face kind", f"mixed face {f}")
            k = kinds.pop()
            (whites if k == "w" else blacks if k == "b" else boundary).append(f)
        if not boundary and all(k == "i" for k in self.edge_kind):
            return whites, blacks, []           # degenerate d = 1 cut
        if len(boundary) != 1:
            raise GalaxyInvariantError("single boundary", f"{len(boundary)} boundary faces")
        return whites, blacks, boundary[0]

    def boundary_cycle(self) -> List[Dart]:
        return self.faces_by_kind()[2]

    def genus(self) -> int:
        return self.map.genus()

    # ---- corner labels ----

    def corner_labels(self) -> List[int]:
        """Canonical corner labels along the boundary cycle.

        Entry i labels the corner at the endpoint of boundary dart i (the
        corner between darts i and i+1 of the cycle); +1 across a white
        boundary edge walked forward, -1 across a black one walked backward,
        normalized to minimum 0.
        """
        cyc = self.boundary_cycle()
        labels = [0] * len(cyc)
        cur = 0
        for i, dart in enumerate(cyc):
            kind = self.edge_kind[dart // 2]
            if kind == "w":
                cur += 1
            elif kind == "b":
                cur -= 1
            else:
                raise GalaxyInvariantError("boundary edge kind", "internal dart on boundary")
            labels[i] = cur
        if cur - labels[-1] != 0 and len(cyc) > 0 and cur != 0:
            raise GalaxyInvariantError("balanced boundary",
                                       "corner walk does not close to zero")
        if not labels:
            return []
        base = min(labels)
        return [x - base for x in labels]

    def vertex_corner_labels(self) -> Dict[int, List[int]]:
        """Boundary corner labels grouped by the vertex carrying the corner."""
        cyc = self.boundary_cycle()
        labels = self.corner_labels()
        v_of = self.vertex_of_dart()
        out: Dict[int, List[int]] = {}
        for i, dart in enumerate(cyc):
            v = v_of[dart ^ 1]      # endpoint of the walked dart
            out.setdefault(v, []).append(labels[i])
        return out

    def is_coherent(self) -> bool:
        """All boundary corners of each vertex share one label."""
        return all(len(set(ls)) == 1 for ls in self.vertex_corner_labels().values())

    def is_proper(self) -> bool:
        """Minimum-label vertices have color 0 (requires coherence)."""
        per_vertex = self.vertex_corner_labels()
        if not per_vertex:
            return True
        if not self.is_coherent():
            return False
        lmin = min(min(ls) for ls in per_vertex.values())
        return all(self.vertex_colors[v] == 0
                   for v, ls in per_vertex.items() if ls[0] == lmin)

    def shift(self) -> "BoundaryCactus":
        """Add one (mod r+1) to every vertex color."""
        rp1 = self.r + 1
        return BoundaryCactus(self.map, self.d, self.r, self.edge_kind,
                              self.edge_weight,
                              tuple((c + 1) % rp1 for c in self.vertex_colors),
                              self.marked_vertex)


def validate_cactus(c: BoundaryCactus) -> Tuple[Tuple[int, ...], Tuple[int, ...], int]:
    """Check the HC conditions; returns (mu, nu, genus)."""
    whites, blacks, boundary = c.faces_by_kind()
    rp1 = c.r + 1
    for f in whites + blacks:
        if len(f) % rp1:
            raise GalaxyInvariantError("face degree", f"{len(f)}")
    mu = tuple(sorted((len(f) // rp1 for f in whites), reverse=True))
    nu = tuple(sorted((len(f) // rp1 for f in blacks), reverse=True))
    if sum(mu) != c.d or sum(nu) != c.d:
        raise GalaxyInvariantError("type size", f"mu={mu} nu={nu} d={c.d}")

    v_of = c.vertex_of_dart()
    # vertex color condition: oriented edges go color c -> c+1; every vertex
    # is incident to the boundary
    for k, kind in enumerate(c.edge_kind):
        ct = c.vertex_colors[v_of[2 * k]]
        ch = c.vertex_colors[v_of[2 * k + 1]]
        if (ct + 1) % rp1 != ch:
            raise GalaxyInvariantError("vertex color condition", f"edge {k}: {ct}->{ch}")
    on_boundary = {v_of[d ^ 1] for d in boundary} | {v_of[d] for d in boundary}
    if boundary and on_boundary != set(range(len(c.map.vertices()))):
        raise GalaxyInvariantError("vertex boundary incidence")

    # Hurwitz condition: d-1 active vertices of each color
    active: Dict[int, Set[int]] = {}
    for k, kind in enumerate(c.edge_kind):
        if kind == "w":
            v = v_of[2 * k + 1]
            active.setdefault(c.vertex_colors[v], set()).add(v)
    for col in range(rp1):
        n_act = len(active.get(col, ()))
        if n_act != c.d - 1:
            raise GalaxyInvariantError("hurwitz condition",
                                       f"color {col}: {n_act} active vertices != d-1")
    c.corner_labels()
    genus = c.genus()
    if len(mu) + len(nu) - 2 + 2 * genus != c.r:
        raise GalaxyInvariantError("riemann-hurwitz", "r vs type/genus")
    return mu, nu, genus


# ============================================================
# Gamma: cutting the galaxy along its splitting tree
# ============================================================


def gamma_cut(g: MarkedGalaxy, lab: DistanceLabeling | None = None) -> BoundaryCactus:
    """Cut the surface along Theta(G), producing the boundary cactus."""
    if lab is None:
        lab = distance_labeling(g)
    n_edges_g = g.map.n_edges
    geo = [k for k in range(n_edges_g) if lab.weights[k] == 0]
    if not geo:
        # d = 1 (or r = 0 degenerate): nothing to cut
        if g.d != 1:
            raise GalaxyInvariantError("splitting tree", "no geodesic edges")
        return BoundaryCactus(g.map, g.d, g.r,
                              ("i",) * n_edges_g, lab.weights,
                              g.vertex_colors, g.marked)

    # new edge table: internal edges keep ids; geodesic edge k becomes
    # wcopy[k] (white boundary) and bcopy[k] (black boundary)
    internal = [k for k in range(n_edges_g) if lab.weights[k] > 0]
    new_id: Dict[Tuple[str, int], int] = {}
    kinds: List[str] = []
    weights: List[int] = []
    for k in internal:
        new_id[("i", k)] = len(kinds)
        kinds.append("i")
        weights.append(lab.weights[k])
    for k in geo:
        new_id[("w", k)] = len(kinds)
        kinds.append("w")
        weights.append(0)
    for k in geo:
        new_id[("b", k)] = len(kinds)
        kinds.append("b")
        weights.append(0)

    def dart(tag: str, k: int, head: bool) -> Dart:
        return 2 * new_id[(tag, k)] + (1 if head else 0)

    is_geo = [lab.weights[k] == 0 for k in range(n_edges_g)]
    halves = _split_halves(g, lab)

    # vertex copies: substitute doubled darts, cut at the doubled-pair gaps,
    # and at split vertices fuse the two chains ending in white in-copies
    copies: List[List[Dart]] = []
    copy_colors: List[int] = []
    marked_copy_dart: Dart = -1
    for vi, arcs in sorted(halves.items()):
        split = len(arcs) == 2
        chains: List[List[Dart]] = []
        for arc in arcs:
            # substituted dart run for the whole (un-split) vertex
            run: List[Tuple[Dart, str]] = []        # (new dart, cut mark)
            for d in arc:
                k = d // 2
                if not is_geo[k]:
                    nd = dart("i", k, d % 2 == 1)
                    run.append((nd, ""))
                elif d % 2 == 1:   # head: (h_w, h_b), cut between
                    run.append((dart("w", k, True), "cut-after"))
                    run.append((dart("b", k, True), ""))
                else:              # tail: (t_b, t_w), cut between
                    run.append((dart("b", k, False), "cut-after"))
                    run.append((dart("w", k, False), ""))
            # split the cyclic run at the cut marks
            cut_pos = [i for i, (_, mark) in enumerate(run) if mark == "cut-after"]
            if not cut_pos:
                chains.append([nd for nd, _ in run])
                continue
            for a, b in zip(cut_pos, cut_pos[1:] + [cut_pos[0] + len(run)]):
                chains.append([run[i % len(run)][0] for i in range(a + 1, b + 1)])
        if split:
            enders = [ch for ch in chains if ch[-1] % 2 == 1
                      and kinds[ch[-1] // 2] == "w"]
            if len(enders) != 2:
                raise GalaxyInvariantError("split fuse",
                                           f"{len(enders)} white-ending chains")
            fused = enders[0] + enders[1]
            chains = [ch for ch in chains if ch is not enders[0] and ch is not enders[1]]
            chains.append(fused)
        for ch in chains:
            copies.append(ch)
            copy_colors.append(g.vertex_colors[vi])
            if vi == g.marked:
                marked_copy_dart = ch[0]

    n_darts = 2 * len(kinds)
    sigma = [0] * n_darts
    seen_count = 0
    for ch in copies:
        for a, b in zip(ch, ch[1:] + ch[:1]):
            sigma[a] = b
        seen_count += len(ch)
    if seen_count != n_darts:
        raise GalaxyInvariantError("cut surgery", "darts lost in vertex chains")
    alpha = tuple(d ^ 1 for d in range(n_darts))
    cmap = CombinatorialMap(tuple(sigma), alpha)

    min_dart_to_copy = {min(ch): i for i, ch in enumerate(copies)}
    vertex_colors = []
    marked_vertex = -1
    for vi, cyc in enumerate(cmap.vertices()):
        ci = min_dart_to_copy[min(cyc)]
        vertex_colors.append(copy_colors[ci])
        if marked_copy_dart in cyc:
            marked_vertex = vi

    cactus = BoundaryCactus(cmap, g.d, g.r, tuple(kinds), tuple(weights),
                            tuple(vertex_colors), marked_vertex)

    # faces must be inherited from G verbatim (up to the dart renaming)
    def rename(d: Dart) -> Dart:
        k = d // 2
        if not is_geo[k]:
            return dart("i", k, d % 2 == 1)
        return dart("w" if d % 2 == 1 else "b", k, d % 2 == 1)

    g_faces = sorted(tuple(_rotate_min([rename(d) for d in f])) for f in g.map.faces())
    whites, blacks, boundary = cactus.faces_by_kind()
    c_faces = sorted(tuple(_rotate_min(f)) for f in whites + blacks)
    if g_faces != c_faces:
        raise GalaxyInvariantError("face inheritance", "cut changed an interior face")
    if len(boundary) != 2 * len(geo):
        raise GalaxyInvariantError("boundary length",
                                   f"{len(boundary)} != 2*{len(geo)}")
    return cactus


def _rotate_min(cyc: List[int]) -> List[int]:
    i = cyc.index(min(cyc))
    return cyc[i:] + cyc[:i]


def canonical_corner_labeling(c: BoundaryCactus) -> List[int]:
    """The unique +-1 corner labeling with minimum 0 (see corner_labels)."""
    return c.corner_labels()


# ============================================================
# Glue: the inverse of gamma_cut
# ============================================================


def glue(c: BoundaryCactus) -> MarkedGalaxy:
    """Reglue a proper coherent cactus into a marked galaxy."""
    if not c.is_coherent():
        raise GalaxyInvariantError("coherence", "cactus is not coherent")
    if not c.is_proper():
        raise GalaxyInvariantError("properness", "cactus is not proper")
    whites, blacks, boundary = c.faces_by_kind()
    if not boundary:
        if c.d != 1:
            raise GalaxyInvariantError("empty boundary")
        return MarkedGalaxy(c.map, c.d, c.r, c.vertex_colors,
                            c.marked_vertex if c.marked_vertex is not None else 0)

    labels = c.corner_labels()
    n = len(boundary)
    # match each white boundary edge (step up) with the black boundary edge
    # (step down) closing its excursion: standard parenthesis matching
    match: Dict[int, int] = {}
    stack: List[int] = []
    order = sorted(range(n), key=lambda i: 0)   # cyclic; rotate to a minimum corner
    start = labels.index(0) + 1 if 0 in labels else 0
    seq = [(i % n) for i in range(start, start + n)]
    for i in seq:
        kind = c.edge_kind[boundary[i] // 2]
        if kind == "w":
            stack.append(i)
        else:
            if not stack:
                raise GalaxyInvariantError("boundary matching", "unmatched black edge")
            match[stack.pop()] = i
    if stack:
        raise GalaxyInvariantError("boundary matching", "unmatched white edge")

    # glued edge table: internal edges keep their ids; each matched pair
    # becomes one new edge
    internal = [k for k, kind in enumerate(c.edge_kind) if kind == "i"]
    new_of_internal = {k: i for i, k in enumerate(internal)}
    pair_edge: Dict[int, int] = {}       # old edge id -> new edge id
    next_id = len(internal)
    for iw, ib in match.items():
        kw, kb = boundary[iw] // 2, boundary[ib] // 2
        if c.edge_kind[kw] != "w" or c.edge_kind[kb] != "b":
            raise GalaxyInvariantError("boundary matching", "kind mismatch")
        pair_edge[kw] = next_id
        pair_edge[kb] = next_id
        next_id += 1

    def rename(d: Dart) -> Dart:
        k = d // 2
        if c.edge_kind[k] == "i":
            return 2 * new_of_internal[k] + (d % 2)
        return 2 * pair_edge[k] + (d % 2)

    # glued faces: whites keep head darts (h_w -> new head), blacks keep
    # tails; sigma = phi o alpha
    n_darts = 2 * next_id
    phi = [0] * n_darts
    assigned = [False] * n_darts
    for f in whites + blacks:
        renamed = [rename(d) for d in f]
        for a, b in zip(renamed, renamed[1:] + renamed[:1]):
            if assigned[a]:
                raise GalaxyInvariantError("glue faces", "dart in two faces")
            phi[a] = b
            assigned[a] = True
    if not all(assigned):
        raise GalaxyInvariantError("glue faces", "darts missing from faces")
    alpha = tuple(d ^ 1 for d in range(n_darts))
    sigma = tuple(phi[alpha[d]] for d in range(n_darts))
    gmap = CombinatorialMap(sigma, alpha)

    # vertex colors carry over through any surviving dart
    v_of_c = c.vertex_of_dart()
    label_by_vertex = {v: ls[0] for v, ls in c.vertex_corner_labels().items()}
    inv_map: Dict[Dart, List[Dart]] = {}
    for d_old in range(c.map.n_darts):
        inv_map.setdefault(rename(d_old), []).append(d_old)
    v_index_of_new: List[int] = [0] * n_darts
    for vi, cyc in enumerate(gmap.vertices()):
        for d in cyc:
            v_index_of_new[d] = vi
    colors = [-1] * len(gmap.vertices())
    min_label = [None] * len(gmap.vertices())
    for d_new, olds in inv_map.items():
        vi = v_index_of_new[d_new]
        for d_old in olds:
            col = c.vertex_colors[v_of_c[d_old]]
            if colors[vi] == -1:
                colors[vi] = col
            elif colors[vi] != col:
                raise GalaxyInvariantError("glue colors", "merged vertices disagree")
            lbl = label_by_vertex.get(v_of_c[d_old])
            if lbl is not None and (min_label[vi] is None or lbl < min_label[vi]):
                min_label[vi] = lbl
    zero_vertices = [vi for vi in range(len(colors)) if min_label[vi] == 0]
    if len(zero_vertices) != 1:
        raise GalaxyInvariantError("glue marked vertex",
                                   f"{len(zero_vertices)} label-0 vertices")
    marked = zero_vertices[0]

    galaxy = MarkedGalaxy(gmap, c.d, c.r, tuple(colors), marked)
    validate_galaxy(galaxy)
    lab = distance_labeling(galaxy)
    for vi in range(len(colors)):
        if min_label[vi] is not None and lab.delta[vi] != min_label[vi]:
            raise GalaxyInvariantError("glue labels",
                                       "corner labels disagree with distances")
    return galaxy


# ============================================================
# Pi: retracting a cactus to a mobile (and the galaxy shortcut)
# ============================================================


def _face_subregions(cycle: Sequence[Dart], tail_color) -> Tuple[int, List[int]]:
    """(number of subregions, subregion index of each corner).

    Corner i sits between cycle[i] and cycle[i+1]; the dashed subregion
    borders cross the middles of the color r -> 0 edges, so the subregion
    index increments after every dart whose edge has tail color r.
    """
    breaks = [i for i, d in enumerate(cycle) if tail_color(d)]
    n_sub = len(breaks)
    sub = [0] * len(cycle)
    if n_sub == 0:
        return 0, sub
    cur = 0
    for i in range(len(cycle)):
        if tail_color(cycle[i]):
            cur += 1
        sub[i] = cur % n_sub
    return n_sub, sub


def retract_pi(c: BoundaryCactus) -> HurwitzMobile:
    """Pi: collapse a boundary cactus to its edge-labeled Hurwitz mobile."""
    whites, blacks, boundary = c.faces_by_kind()
    rp1 = c.r + 1
    v_of = c.vertex_of_dart()

    def tail_is_r(d: Dart) -> bool:
        return c.vertex_colors[v_of[2 * (d // 2)]] == c.r

    face_of: Dict[Dart, Tuple[str, int]] = {}
    pos_of: Dict[Dart, int] = {}
    sub_of: Dict[Tuple[str, int], List[int]] = {}
    sizes: Dict[Tuple[str, int], int] = {}
    for side, faces in (("w", whites), ("b", blacks)):
        for fi, f in enumerate(faces):
            n_sub, sub = _face_subregions(f, tail_is_r)
            if n_sub != len(f) // rp1:
                raise GalaxyInvariantError("subregions", f"{n_sub} vs degree {len(f)}")
            sub_of[(side, fi)] = sub
            sizes[(side, fi)] = n_sub
            for i, d in enumerate(f):
                face_of[d] = (side, fi)
                pos_of[d] = i

    def node_at_corner(d_prev_or_self: Dart, before: bool) -> Tuple[str, int, int]:
        """Mobile node of the face corner before/after a face dart."""
        side, fi = face_of[d_prev_or_self]
        i = pos_of[d_prev_or_self]
        f_len = len((whites if side == "w" else blacks)[fi])
        corner = (i - 1) % f_len if before else i
        return (side, fi, sub_of[(side, fi)][corner])

    edges: List[MobileEdge] = []
    for k, kind in enumerate(c.edge_kind):
        if kind != "i":
            continue
        h, t = 2 * k + 1, 2 * k
        head_color = c.vertex_colors[v_of[h]]
        x = node_at_corner(h, before=True)       # corner of the white face at v
        y = node_at_corner(t, before=False)      # corner of the black face at v
        if x[0] != "w" or y[0] != "b":
            raise GalaxyInvariantError("retract rule a", "face sides confused")
        edges.append(MobileEdge(x, y, c.edge_weight[k], head_color))

    # rule (b): vertices with two boundary corners join two white corners
    corner_count: Dict[int, int] = {}
    for d in boundary:
        corner_count[v_of[d ^ 1]] = corner_count.get(v_of[d ^ 1], 0) + 1
    for vi, cnt in sorted(corner_count.items()):
        if cnt == 1:
            continue
        if cnt != 2:
            raise GalaxyInvariantError("boundary corners", f"vertex {vi} has {cnt}")
        white_corners = []
        for d in c.map.vertices()[vi]:
            nxt = c.map.sigma[d]
            if c.left_face_kind(nxt) == "w":
                white_corners.append(node_at_corner(nxt, before=True))
        if len(white_corners) != 2:
            raise GalaxyInvariantError("retract rule b",
                                       f"vertex {vi}: {len(white_corners)} white corners")
        y1, y2 = sorted(white_corners)
        edges.append(MobileEdge(y1, y2, 0, c.vertex_colors[vi]))

    mobile = HurwitzMobile(
        tuple(len(f) // rp1 for f in whites),
        tuple(len(f) // rp1 for f in blacks),
        tuple(edges),
    )
    validate_mobile(mobile)
    return mobile


def phi(g: MarkedGalaxy, lab: DistanceLabeling | None = None) -> HurwitzMobile:
    """The full correspondence Phi = Pi o Gamma."""
    if lab is None:
        lab = distance_labeling(g)
    return retract_pi(gamma_cut(g, lab))


def phi_direct(g: MarkedGalaxy, lab: DistanceLabeling | None = None) -> HurwitzMobile:
    """Phi applied to the galaxy itself (no cutting); must equal phi(g)."""
    if lab is None:
        lab = distance_labeling(g)
    v_of = g.vertex_of_dart()
    rp1 = g.r + 1
    faces = g.map.faces()
    fcolors = g.face_colors()
    whites = [f for f, c in zip(faces, fcolors) if c == "w"]
    blacks = [f for f, c in zip(faces, fcolors) if c == "b"]

    def tail_is_r(d: Dart) -> bool:
        return g.vertex_colors[v_of[2 * (d // 2)]] == g.r

    face_of: Dict[Dart, Tuple[str, int]] = {}
    pos_of: Dict[Dart, int] = {}
    sub_of: Dict[Tuple[str, int], List[int]] = {}
    for side, fs in (("w", whites), ("b", blacks)):
        for fi, f in enumerate(fs):
            n_sub, sub = _face_subregions(f, tail_is_r)
            sub_of[(side, fi)] = sub
            for i, d in enumerate(f):
                face_of[d] = (side, fi)
                pos_of[d] = i

    def node_at_corner(d: Dart, before: bool) -> Tuple[str, int, int]:
        side, fi = face_of[d]
        i = pos_of[d]
        f_len = len((whites if side == "w" else blacks)[fi])
        corner = (i - 1) % f_len if before else i
        return (side, fi, sub_of[(side, fi)][corner])

    edges: List[MobileEdge] = []
    for k in range(g.map.n_edges):
        if lab.weights[k] == 0:
            continue
        h, t = 2 * k + 1, 2 * k
        x = node_at_corner(h, before=True)
        y = node_at_corner(t, before=False)
        edges.append(MobileEdge(x, y, lab.weights[k],
                                g.vertex_colors[v_of[h]]))
    for vi, cyc in enumerate(g.map.vertices()):
        geo_heads = [d for d in cyc if d % 2 == 1 and lab.weights[d // 2] == 0]
        if len(geo_heads) == 2:
            y1, y2 = sorted(node_at_corner(h, before=True) for h in geo_heads)
            edges.append(MobileEdge(y1, y2, 0, g.vertex_colors[vi]))

    mobile = HurwitzMobile(tuple(len(f) // rp1 for f in whites),
                           tuple(len(f) // rp1 for f in blacks), tuple(edges))
    validate_mobile(mobile)
    return mobile


# ============================================================
# Pi^{-1}: expanding a mobile back into a cactus
# ============================================================


def expand_pi_inverse(m: HurwitzMobile, require_single_boundary: bool = True
                      ) -> BoundaryCactus | Tuple[int, int]:
    """Rebuild the boundary cactus whose retract is the given mobile.

    With ``require_single_boundary`` the mobile must have genus equal to
    excess/2 (otherwise "degenerate excess" is raised); pass False to get
    back the pair (genus, number of boundary cycles) instead of a cactus.
    """
    mu, nu, excess = validate_mobile(m)
    r = len(m.edges) - 1
    rp1 = r + 1
    d = sum(mu)

    sizes = {("w", i): s for i, s in enumerate(m.white_sizes)}
    sizes.update({("b", j): s for j, s in enumerate(m.black_sizes)})

    # vertex slots and union-find merging
    slot_ids: Dict[Tuple[str, int, int, int], int] = {}

    def vslot(side: str, p: int, k: int, col: int) -> int:
        key = (side, p, k % sizes[(side, p)], col)
        if key not in slot_ids:
            slot_ids[key] = len(slot_ids)
        return slot_ids[key]

    for (side, p), s in sizes.items():
        for k in range(s):
            for col in range(rp1):
                vslot(side, p, k, col)
    parent = list(range(len(slot_ids)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    # edge slots: (face key, subregion, color c of the head) for c in 0..r
    # slot (f,k,c>=1): tail v(f,k,c-1) -> head v(f,k,c)
    # slot (f,k,0):    tail v(f,k-1,r) -> head v(f,k,0)
    internal_at: Dict[Tuple[str, int, int, int], int] = {}
    for ei, e in enumerate(m.edges):
        if e.weight == 0:
            (s1, p1, k1), (s2, p2, k2) = e.a, e.b
            union(vslot(s1, p1, k1, e.label), vslot(s2, p2, k2, e.label))
        else:
            w_end = e.a if e.a[0] == "w" else e.b
            b_end = e.b if e.a[0] == "w" else e.a
            for end in (w_end, b_end):
                key = (end[0], end[1], end[2] % sizes[end[:2]], e.label)
                if key in internal_at:
                    raise MobileInvariantError("slot clash",
                                               f"two edges at slot {key}")
                internal_at[key] = ei
            lw = e.label
            if lw >= 1:
                union(vslot(*w_end, lw), vslot(*b_end, lw))
                union(vslot(w_end[0], w_end[1], w_end[2], lw - 1),
                      vslot(b_end[0], b_end[1], b_end[2], lw - 1))
            else:
                union(vslot(*w_end, 0), vslot(*b_end, 0))
                union(vslot(w_end[0], w_end[1], w_end[2] - 1, r),
                      vslot(b_end[0], b_end[1], b_end[2] - 1, r))

    # zero-weight edges must land on slots that stay boundary
    for e in m.edges:
        if e.weight == 0:
            for end in (e.a, e.b):
                key = (end[0], end[1], end[2] % sizes[end[:2]], e.label)
                if key in internal_at:
                    raise MobileInvariantError("slot clash",
                                               "zero edge at an internal slot")

    # build edges: one internal edge per positive mobile edge; one boundary
    # edge per unassigned slot
    kinds: List[str] = []
    weights: List[int] = []
    edge_of_mobile: Dict[int, int] = {}
    edge_of_slot: Dict[Tuple[str, int, int, int], int] = {}
    for ei, e in enumerate(m.edges):
        if e.weight > 0:
            edge_of_mobile[ei] = len(kinds)
            kinds.append("i")
            weights.append(e.weight)
    for (side, p), s in sizes.items():
        for k in range(s):
            for col in range(rp1):
                key = (side, p, k, col)
                if key in internal_at:
                    edge_of_slot[key] = edge_of_mobile[internal_at[key]]
                else:
                    edge_of_slot[key] = len(kinds)
                    kinds.append("w" if side == "w" else "b")
                    weights.append(0)

    # faces: black faces walk tails in slot order, white faces walk heads in
    # reverse slot order
    def slot_list(side: str, p: int) -> List[Tuple[str, int, int, int]]:
        return [(side, p, k, col) for k in range(sizes[(side, p)])
                for col in range(rp1)]

    phi_pairs: List[Tuple[Dart, Dart]] = []
    face_cycles: List[Tuple[str, List[Dart]]] = []
    for (side, p), s in sorted(sizes.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        slots = slot_list(side, p)
        if side == "b":
            cyc = [2 * edge_of_slot[key] for key in slots]
        else:
            cyc = [2 * edge_of_slot[key] + 1 for key in reversed(slots)]
        face_cycles.append((side, cyc))

    # head/tail vertices per slot; merged via union-find
    head_of_slot: Dict[int, int] = {}
    tail_of_slot: Dict[int, int] = {}
    for (side, p), s in sizes.items():
        for k in range(s):
            for col in range(rp1):
                eid = edge_of_slot[(side, p, k, col)]
                hv = find(vslot(side, p, k, col))
                tv = find(vslot(side, p, k, col - 1) if col >= 1
                          else vslot(side, p, k - 1, r))
                # internal edges appear on two faces; their endpoints must agree
                if eid in head_of_slot and head_of_slot[eid] != hv:
                    raise MobileInvariantError("expansion endpoints", "head mismatch")
                if eid in tail_of_slot and tail_of_slot[eid] != tv:
                    raise MobileInvariantError("expansion endpoints", "tail mismatch")
                head_of_slot[eid] = hv
                tail_of_slot[eid] = tv

    n_darts = 2 * len(kinds)
    # sigma from face corner chains: phi(d) = next in face => sigma(alpha(d)) = next
    sigma_known: Dict[Dart, Dart] = {}
    for _, cyc in face_cycles:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            if (a ^ 1) in sigma_known:
                raise MobileInvariantError("expansion faces", "corner clash")
            sigma_known[a ^ 1] = b

    # chains per vertex; close each vertex's chains into one rotation cycle
    vert_of_dart: Dict[Dart, int] = {}
    for eid, kind in enumerate(kinds):
        vert_of_dart[2 * eid] = tail_of_slot[eid]
        vert_of_dart[2 * eid + 1] = head_of_slot[eid]

    chain_next = sigma_known
    starts: Dict[int, List[Dart]] = {}
    has_pred = set(chain_next.values())
    for dd in range(n_darts):
        if dd not in has_pred:
            starts.setdefault(vert_of_dart[dd], []).append(dd)
    sigma = [None] * n_darts
    for dd, nxt in chain_next.items():
        sigma[dd] = nxt
    for v, heads_ in sorted(starts.items()):
        # each chain start lacks a predecessor; walk chains to their ends
        chains = []
        for st in sorted(heads_):
            ch = [st]
            while ch[-1] in chain_next:
                ch.append(chain_next[ch[-1]])
            chains.append(ch)
        if len(chains) > 2:
            raise MobileInvariantError("expansion vertex", f"{len(chains)} chains")
        if len(chains) == 1:
            sigma[chains[0][-1]] = chains[0][0]
        else:
            sigma[chains[0][-1]] = chains[1][0]
            sigma[chains[1][-1]] = chains[0][0]
    # vertices not listed in starts have a single closed chain already; find them
    for dd in range(n_darts):
        if sigma[dd] is None:
            raise MobileInvariantError("expansion sigma", "uncovered dart")

    alpha = tuple(dd ^ 1 for dd in range(n_darts))
    cmap = CombinatorialMap(tuple(sigma), alpha)

    # vertex colors: color of each slot
    color_of_root: Dict[int, int] = {}
    for key, sid in slot_ids.items():
        col = key[3]
        root = find(sid)
        if root in color_of_root and color_of_root[root] != col:
            raise MobileInvariantError("expansion colors", "merged colors disagree")
        color_of_root[root] = col
    v_colors = []
    vert_index: Dict[int, int] = {}
    for vi, cyc in enumerate(cmap.vertices()):
        root = vert_of_dart[cyc[0]]
        for dd in cyc:
            if vert_of_dart[dd] != root:
                raise MobileInvariantError("expansion vertices",
                                           "rotation mixes merged vertices")
        v_colors.append(color_of_root[root])

    cactus = BoundaryCactus(cmap, d, r, tuple(kinds), tuple(weights),
                            tuple(v_colors), None)
    whites, blacks, boundary_faces = [], [], []
    for f in cmap.faces():
        k = {cactus.left_face_kind(dd) for dd in f}
        if k == {"@"}:
            boundary_faces.append(f)
        elif len(k) != 1:
            raise MobileInvariantError("expansion faces", "mixed face")
    n_bnd = len(boundary_faces)
    chi = len(cmap.vertices()) - cmap.n_edges + len(cmap.faces())
    genus = (2 - chi) // 2
    degenerate_d1 = n_bnd == 0 and all(k == "i" for k in kinds)
    if not require_single_boundary:
        return genus, n_bnd
    if n_bnd != 1 and not degenerate_d1:
        raise MobileInvariantError("degenerate excess",
                                   f"{n_bnd} boundary cycles; genus {genus} < excess/2")
    validate_cactus(cactus)
    return cactus


def mobile_genus_via_expansion(m: HurwitzMobile) -> Tuple[int, int]:
    """(genus, boundary cycle count) of the canonical embedding, via Pi^{-1}."""
    return expand_pi_inverse(m, require_single_boundary=False)


def phi_inverse(m: HurwitzMobile) -> MarkedGalaxy:
    """Invert Phi on a coherent mobile: expand every shift and glue the
    proper one."""
    from .mobiles import shift_class

    last_error: Exception | None = None
    for cand in shift_class(m):
        try:
            cactus = expand_pi_inverse(cand)
        except MobileInvariantError as e:
            last_error = e
            continue
        if cactus.is_coherent() and cactus.is_proper():
            return glue(cactus)
    raise GalaxyInvariantError("no proper representative",
                               f"shift class has no proper coherent cactus ({last_error})")


# ============================================================
# Trace output
# ============================================================


def trace_pipeline(g: MarkedGalaxy) -> Dict[str, object]:
    """All pipeline stages as JSON-ready structures (--trace support)."""
    lab = distance_labeling(g)
    tree = theta_tree(g, lab)
    cactus = gamma_cut(g, lab)
    mobile = retract_pi(cactus)
    import json
    return {
        "galaxy": json.loads(g.to_json()),
        "delta": list(lab.delta),
        "weights": list(lab.weights),
        "theta": {
            "root": tree.root,
            "children": [list(c) for c in tree.children],
            "colors": list(tree.color),
            "delta": list(tree.delta),
            "contour": tree.contour_labels(),
        },
        "gamma": {
            "edge_kinds": list(cactus.edge_kind),
            "corner_labels": cactus.corner_labels(),
            "coherent": cactus.is_coherent(),
            "proper": cactus.is_proper(),
        },
        "mobile": json.loads(mobile.to_json()),
    }
