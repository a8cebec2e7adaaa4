"""Hurwitz mobiles: validation, shift, canonical forms, embedding, enumeration.

A mobile node is addressed ('w'|'b', polygon index, position); the node order
of each polygon is its cyclic orientation.  Edges carry a nonnegative weight
and, for edge-labeled mobiles, a label in {0..r}; zero-weight edges join two
white polygons, positive-weight edges a white and a black one, and the
weights incident to each i-gon sum to i.

Equality of mobiles is isomorphism: polygons of equal color and size are
interchangeable (unless face-labeled) and each polygon may be rotated, but
orientation is never reversed.  ``canonical_code`` realizes this by rotating
every polygon to a deterministic anchor and minimizing over the admissible
polygon reorderings.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from .algebra import Partition, aut_partition
from .permutations import BudgetExceeded, current_budget

Node = Tuple[str, int, int]              # (side 'w'|'b', polygon index, position)


class MobileInvariantError(ValueError):
    def __init__(self, name: str, detail: str = ""):
        self.invariant = name
        super().__init__(f"{name}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class MobileEdge:
    a: Node
    b: Node
    weight: int
    label: int


@dataclass(frozen=True)
class HurwitzMobile:
    white_sizes: Tuple[int, ...]
    black_sizes: Tuple[int, ...]
    edges: Tuple[MobileEdge, ...]

    @property
    def n_polygons(self) -> int:
        return len(self.white_sizes) + len(self.black_sizes)

    @property
    def excess(self) -> int:
        return len(self.edges) - (self.n_polygons - 1)

    def size(self, node: Node) -> int:
        side, p, _ = node
        return self.white_sizes[p] if side == "w" else self.black_sizes[p]

    def mobile_type(self) -> Tuple[Partition, Partition]:
        return (tuple(sorted(self.white_sizes, reverse=True)),
                tuple(sorted(self.black_sizes, reverse=True)))

    def to_json(self) -> str:
        def node_str(nd: Node) -> str:
            return f"{nd[0]}{nd[1]}.{nd[2]}"
        return json.dumps({
            "white_polygons": [[f"w{i}.{k}" for k in range(s)]
                               for i, s in enumerate(self.white_sizes)],
            "black_polygons": [[f"b{i}.{k}" for k in range(s)]
                               for i, s in enumerate(self.black_sizes)],
            "edges": [{"a": node_str(e.a), "b": node_str(e.b),
                       "w": e.weight, "label": e.label} for e in self.edges],
            "excess": self.excess,
        })

    @staticmethod
    def from_json(text: str) -> "HurwitzMobile":
        obj = json.loads(text)

        def parse(s: str) -> Node:
            side = s[0]
            p, k = s[1:].split(".")
            return (side, int(p), int(k))

        return HurwitzMobile(
            tuple(len(p) for p in obj["white_polygons"]),
            tuple(len(p) for p in obj["black_polygons"]),
            tuple(MobileEdge(parse(e["a"]), parse(e["b"]), e["w"], e["label"])
                  for e in obj["edges"]),
        )


def validate_mobile(m: HurwitzMobile) -> Tuple[Partition, Partition, int]:
    """Check all mobile invariants; returns (mu, nu, excess)."""
    if any(s < 1 for s in m.white_sizes + m.black_sizes):
        raise MobileInvariantError("polygon sizes")
    n_edges = len(m.edges)
    r = n_edges - 1
    labels = sorted(e.label for e in m.edges)
    if labels != list(range(n_edges)):
        raise MobileInvariantError("distinct edge labels",
                                   f"labels {labels} not 0..{r}")
    excess = m.excess
    if excess < 0 or excess % 2:
        raise MobileInvariantError("excess", f"{excess}")
    weight_at: Dict[Tuple[str, int], int] = {}
    for e in m.edges:
        for nd in (e.a, e.b):
            side, p, k = nd
            if side not in "wb":
                raise MobileInvariantError("node reference", str(nd))
            if not (0 <= p < (len(m.white_sizes) if side == "w" else len(m.black_sizes))):
                raise MobileInvariantError("node reference", str(nd))
            if not (0 <= k < m.size(nd)):
                raise MobileInvariantError("node reference", str(nd))
        if e.weight == 0:
            if e.a[0] != "w" or e.b[0] != "w":
                raise MobileInvariantError("zero-weight edge endpoints",
                                           "must both lie on white polygons")
            if e.a == e.b:
                raise MobileInvariantError("zero-weight edge endpoints", "loop at a node")
        elif e.weight > 0:
            if {e.a[0], e.b[0]} != {"w", "b"}:
                raise MobileInvariantError("positive-weight edge endpoints",
                                           "must join a black and a white polygon")
        else:
            raise MobileInvariantError("edge weight", "negative")
        for nd in (e.a, e.b):
            key = nd[:2]
            weight_at[key] = weight_at.get(key, 0) + e.weight
    # the two endpoints of a positive edge lie on polygons of both colors, so
    # each end contributes its full weight to its own polygon
    for i, s in enumerate(m.white_sizes):
        if weight_at.get(("w", i), 0) != s:
            raise MobileInvariantError("weight sum", f"white polygon {i}")
    for j, s in enumerate(m.black_sizes):
        if weight_at.get(("b", j), 0) != s:
            raise MobileInvariantError("weight sum", f"black polygon {j}")
    # connectivity at the polygon level
    n_poly = m.n_polygons
    if n_poly:
        adj: Dict[int, Set[int]] = {}

        def pid(nd: Node) -> int:
            return nd[1] if nd[0] == "w" else len(m.white_sizes) + nd[1]

        for e in m.edges:
            adj.setdefault(pid(e.a), set()).add(pid(e.b))
            adj.setdefault(pid(e.b), set()).add(pid(e.a))
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != n_poly:
            raise MobileInvariantError("connectivity")
    mu, nu = m.mobile_type()
    return mu, nu, excess


# ============================================================
# Shift
# ============================================================


def shift_mobile(m: HurwitzMobile) -> HurwitzMobile:
    """Translate the endpoints of the label-r edge one step along their
    polygons and increment all labels mod r+1."""
    r = len(m.edges) - 1

    def step(nd: Node) -> Node:
        side, p, k = nd
        return (side, p, (k + 1) % m.size(nd))

    new_edges = []
    for e in m.edges:
        if e.label == r:
            new_edges.append(MobileEdge(step(e.a), step(e.b), e.weight, 0))
        else:
            new_edges.append(MobileEdge(e.a, e.b, e.weight, e.label + 1))
    return HurwitzMobile(m.white_sizes, m.black_sizes, tuple(new_edges))


def shift_class(m: HurwitzMobile) -> List[HurwitzMobile]:
    """The r+1 iterated shifts of m (starting with m itself)."""
    out = [m]
    cur = m
    for _ in range(len(m.edges) - 1):
        cur = shift_mobile(cur)
        out.append(cur)
    return out


# ============================================================
# Canonical codes
# ============================================================


def _polygon_incidences(m: HurwitzMobile) -> Dict[Tuple[str, int], List[Tuple[int, int, int]]]:
    """Per polygon: list of (edge index, end (0 for a / 1 for b), position)."""
    out: Dict[Tuple[str, int], List[Tuple[int, int, int]]] = {}
    for i in range(len(m.white_sizes)):
        out[("w", i)] = []
    for j in range(len(m.black_sizes)):
        out[("b", j)] = []
    for ei, e in enumerate(m.edges):
        out[e.a[:2]].append((ei, 0, e.a[2]))
        out[e.b[:2]].append((ei, 1, e.b[2]))
    return out


def canonical_code(m: HurwitzMobile, face_labeled: bool = False) -> bytes:
    """Canonical byte string up to mobile isomorphism.

    Every polygon is rotated so that an end of its minimal-label incident
    edge sits at position 0 (two anchor candidates when both ends of that
    edge lie on the same polygon).  For edge-labeled equality
    (``face_labeled=False``), polygons of equal color, size and incident
    (label, weight) profile are interchangeable, so the encoding is
    additionally minimized over the orderings within those tie classes.
    Edges are treated as undirected throughout: nothing in the encoding
    depends on the a/b storage order.
    """
    inc = _polygon_incidences(m)
    sizes = {("w", i): s for i, s in enumerate(m.white_sizes)}
    sizes.update({("b", j): s for j, s in enumerate(m.black_sizes)})

    offset_options: Dict[Tuple[str, int], Tuple[int, ...]] = {}
    for key, ends in inc.items():
        if not ends:
            raise MobileInvariantError("connectivity", "polygon without edges")
        min_label = min(m.edges[ei].label for ei, _, _ in ends)
        cands = sorted({pos % sizes[key] for ei, _, pos in ends
                        if m.edges[ei].label == min_label})
        offset_options[key] = tuple(cands)

    keys_w = [("w", i) for i in range(len(m.white_sizes))]
    keys_b = [("b", j) for j in range(len(m.black_sizes))]

    def poly_sig(key) -> tuple:
        ends = sorted((m.edges[ei].label, m.edges[ei].weight) for ei, _, _ in inc[key])
        return (key[0], sizes[key], tuple(ends))

    if face_labeled:
        orders = [keys_w + keys_b]
    else:
        groups: List[List] = []
        for keys in (sorted(keys_w, key=poly_sig), sorted(keys_b, key=poly_sig)):
            i = 0
            while i < len(keys):
                j = i
                while j < len(keys) and poly_sig(keys[j]) == poly_sig(keys[i]):
                    j += 1
                groups.append(keys[i:j])
                i = j
        orders = [list(itertools.chain.from_iterable(perm_parts))
                  for perm_parts in itertools.product(
                      *[list(map(list, itertools.permutations(gr))) for gr in groups])]

    poly_keys = keys_w + keys_b
    offset_open = [k for k in poly_keys if len(offset_options[k]) > 1]
    if len(orders) * (2 ** len(offset_open)) > 20000:
        raise MobileInvariantError("canonicalization blowup",
                                   f"{len(orders)} orders x 2^{len(offset_open)} anchors")

    best = None
    for order in orders:
        index = {key: i for i, key in enumerate(order)}
        enc_polys = tuple((key[0], sizes[key]) for key in order)
        for combo in itertools.product(*(offset_options[k] for k in offset_open)):
            offsets = {k: offset_options[k][0] for k in poly_keys}
            offsets.update(dict(zip(offset_open, combo)))

            def pos_of(nd: Node) -> int:
                return (nd[2] - offsets[nd[:2]]) % sizes[nd[:2]]

            enc_edges = []
            for e in sorted(m.edges, key=lambda e: e.label):
                ea = (index[e.a[:2]], pos_of(e.a))
                eb = (index[e.b[:2]], pos_of(e.b))
                if e.a[0] == e.b[0]:
                    if eb < ea:
                        ea, eb = eb, ea
                elif e.a[0] == "b":
                    ea, eb = eb, ea
                enc_edges.append((e.label, e.weight, ea, eb))
            cand = (enc_polys, tuple(enc_edges))
            if best is None or cand < best:
                best = cand
    return repr(best).encode()


def mobiles_isomorphic(a: HurwitzMobile, b: HurwitzMobile) -> bool:
    return canonical_code(a) == canonical_code(b)


def shift_class_code(m: HurwitzMobile) -> bytes:
    """Canonical code of the shift-equivalence class of m."""
    return min(canonical_code(s) for s in shift_class(m))


# ============================================================
# Canonical embedding and genus
# ============================================================

# Around a node, the counterclockwise rotation runs (arc in, arc out, then
# the incident mobile-edge ends).  The edge order making excess-0 mobiles
# planar and matching the galaxy cut is: decreasing labels on white nodes,
# increasing on black (i.e. labels increase clockwise on white polygons and
# counterclockwise on black ones).
_WHITE_CCW_DESCENDING = True
_BLACK_CCW_DESCENDING = False


def canonical_embedding_faces(m: HurwitzMobile) -> Tuple[int, int, List[List[int]]]:
    """(n_vertices, n_edges, faces) of the canonically embedded mobile."""
    node_list: List[Node] = []
    for i, s in enumerate(m.white_sizes):
        node_list.extend(("w", i, k) for k in range(s))
    for j, s in enumerate(m.black_sizes):
        node_list.extend(("b", j, k) for k in range(s))
    node_index = {nd: i for i, nd in enumerate(node_list)}

    darts_at: Dict[Node, Dict[str, object]] = {nd: {"in": None, "out": None, "edges": []}
                                               for nd in node_list}
    alpha: List[int] = []
    n_darts = 0

    def new_dart() -> int:
        nonlocal n_darts
        n_darts += 1
        return n_darts - 1

    # polygon arcs, following each polygon's stored orientation
    for side, sizes in (("w", m.white_sizes), ("b", m.black_sizes)):
        for p, s in enumerate(sizes):
            for k in range(s):
                d1, d2 = new_dart(), new_dart()
                alpha.extend([d2, d1])
                darts_at[(side, p, k)]["out"] = d1
                darts_at[(side, p, (k + 1) % s)]["in"] = d2
    for e in m.edges:
        d1, d2 = new_dart(), new_dart()
        alpha.extend([d2, d1])
        darts_at[e.a]["edges"].append((e.label, d1))
        darts_at[e.b]["edges"].append((e.label, d2))

    sigma = [0] * n_darts
    for nd in node_list:
        side = nd[0]
        desc = _WHITE_CCW_DESCENDING if side == "w" else _BLACK_CCW_DESCENDING
        edge_darts = [d for _, d in sorted(darts_at[nd]["edges"], reverse=desc)]
        rot = [darts_at[nd]["in"], darts_at[nd]["out"]] + edge_darts
        for a, b in zip(rot, rot[1:] + rot[:1]):
            sigma[a] = b

    phi = [sigma[alpha[d]] for d in range(n_darts)]
    seen = [False] * n_darts
    faces: List[List[int]] = []
    for d in range(n_darts):
        if not seen[d]:
            cyc = []
            x = d
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = phi[x]
            faces.append(cyc)
    return len(node_list), n_darts // 2, faces


def canonical_embedding_genus(m: HurwitzMobile) -> int:
    """Genus of the canonical embedding (Euler formula)."""
    v, e, faces = canonical_embedding_faces(m)
    chi = v - e + len(faces)
    assert chi % 2 == 0, "odd Euler characteristic"
    return (2 - chi) // 2


# ============================================================
# Exhaustive enumeration of free (excess-0) mobiles
# ============================================================


def _polygon_trees(n_white: int, n_black: int) -> Iterator[Tuple[Tuple[int, int], ...]]:
    """Spanning trees on polygons: edges (w,b) as (i, n_white+j), plus (w,w).

    Black-black pairs are never adjacent (every edge at a black polygon has
    positive weight, hence a white other end).
    """
    total = n_white + n_black
    slots = [(i, j) for i in range(n_white) for j in range(n_white, total)]
    slots += [(i, j) for i in range(n_white) for j in range(i + 1, n_white)]
    for subset in itertools.combinations(range(len(slots)), total - 1):
        parent = list(range(total))

        def find(a: int) -> int:
            while parent[a] != a:
                a = parent[a]
            return a

        ok = True
        for si in subset:
            a, b = slots[si]
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok:
            yield tuple(slots[si] for si in subset)


def _compositions_pos(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions_pos(total - first, parts - 1):
            yield (first,) + rest


def enumerate_face_labeled_mobiles(x: Sequence[int], y: Sequence[int],
                                   budget: int | None = None) -> List[HurwitzMobile]:
    """All free face-labeled Hurwitz mobiles of type (x, y), up to isomorphism.

    Mobiles are generated as polygon trees + weight distributions + node
    attachments and deduplicated by the face-labeled canonical code.  Edge
    labels are set to an arbitrary fixed assignment (face-labeled mobiles
    carry none; the field is reused so one data structure serves both).
    """
    x, y = tuple(x), tuple(y)
    n_w, n_b = len(x), len(y)
    d = sum(x)
    if sum(y) != d:
        raise ValueError("|x| != |y|")
    max_steps = current_budget(budget)
    steps = 0
    seen: Dict[bytes, HurwitzMobile] = {}
    total = n_w + n_b
    for tree in _polygon_trees(n_w, n_b):
        wb_edges = [(a, b) for (a, b) in tree if b >= n_w]
        ww_edges = [(a, b) for (a, b) in tree if b < n_w]
        by_black: Dict[int, List[int]] = {}
        for ei, (a, b) in enumerate(wb_edges):
            by_black.setdefault(b - n_w, []).append(ei)
        if any(j not in by_black for j in range(n_b)):
            continue
        weight_choices = []
        for j in range(n_b):
            weight_choices.append(list(_compositions_pos(y[j], len(by_black[j]))))
        for choice in itertools.product(*weight_choices):
            weights = [0] * len(wb_edges)
            for j in range(n_b):
                for ei, w in zip(by_black[j], choice[j]):
                    weights[ei] = w
            wsum = [0] * n_w
            for (a, _), w in zip(wb_edges, weights):
                wsum[a] += w
            if wsum != list(x):
                continue
            # attach each edge end to a node of its polygon
            end_sizes = []
            for a, b in wb_edges:
                end_sizes.append(x[a])
                end_sizes.append(y[b - n_w])
            for a, b in ww_edges:
                end_sizes.append(x[a])
                end_sizes.append(x[b])
            steps += math.prod(end_sizes) + 1
            if steps > max_steps:
                raise BudgetExceeded(f"{steps} enumeration steps exceed the budget")
            for attach in itertools.product(*(range(s) for s in end_sizes)):
                edges = []
                t = 0
                for ei, (a, b) in enumerate(wb_edges):
                    edges.append(MobileEdge(("w", a, attach[t]),
                                            ("b", b - n_w, attach[t + 1]),
                                            weights[ei], len(edges)))
                    t += 2
                for a, b in ww_edges:
                    edges.append(MobileEdge(("w", a, attach[t]),
                                            ("w", b, attach[t + 1]), 0, len(edges)))
                    t += 2
                mob = HurwitzMobile(x, y, tuple(edges))
                code = canonical_code(mob, face_labeled=True)
                if code not in seen:
                    seen[code] = mob
    return [seen[k] for k in sorted(seen)]


def enumerate_free_mobiles(mu: Sequence[int], nu: Sequence[int],
                           budget: int | None = None) -> Set[bytes]:
    """Canonical codes of all edge-labeled free Hurwitz mobiles of type (mu, nu)."""
    mu, nu = tuple(sorted(mu, reverse=True)), tuple(sorted(nu, reverse=True))
    base = enumerate_face_labeled_mobiles(mu, nu, budget)
    n_edges = len(mu) + len(nu) - 1
    codes: Set[bytes] = set()
    for mob in base:
        for perm in itertools.permutations(range(n_edges)):
            relabeled = HurwitzMobile(
                mob.white_sizes, mob.black_sizes,
                tuple(MobileEdge(e.a, e.b, e.weight, perm[i])
                      for i, e in enumerate(mob.edges)))
            codes.add(canonical_code(relabeled))
    return codes


def count_free_mobiles(mu: Sequence[int], nu: Sequence[int],
                       budget: int | None = None) -> int:
    """|HM_0(mu, nu)| by exhaustive enumeration and isomorphism rejection."""
    return len(enumerate_free_mobiles(mu, nu, budget))
