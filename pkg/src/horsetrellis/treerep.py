"""Tree representatives of horseshoe trellis types.

The compatible tree of a trellis is the dual tree of the stable segments
in the disk complement of the unstable arc: one centre vertex per region,
a control edge across each stable segment, spokes joining centres to the
control-edge flanks.  The induced tree map sends control edges to control
edges (the segment dynamics) and spokes to tight tree paths.  Tightening,
collapsing, retraction, valence-2 merging and folding bring the map to
representative form: locally injective away from control edges, with
every valence-1 or -2 vertex bounding a control edge.  Restricting to the
eventual image and collapsing control edges yields the topological tree
representative, whose transition matrix carries the forced entropy.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from . import entropy as _en
from .trellis import Trellis, x_coord

ITER_CAP = 20000

ZONE0 = frozenset({0})
ZONE1 = frozenset({1})
ZONES = frozenset({0, 1})


class TreeMap:
    """A tree with a self-map: edge paths of signed edge letters.

    Edges are keyed by positive ints; the signed letter +e traverses the
    edge from its first endpoint, -e from its second.  Control edges must
    map to a single control letter.  Cyclic germ orders at the vertices
    record the planar embedding data; a germ is (edge, end).
    """

    def __init__(self):
        self.everts: dict[int, tuple[int, int]] = {}
        self.control: dict[int, bool] = {}
        self.tags: dict[int, frozenset] = {}
        self.eimg: dict[int, list[int]] = {}
        self.vimg: dict[int, int] = {}
        self.cyc: dict[int, list[tuple[int, int]]] = {}
        self.marked: dict[int, list[str]] = {}   # vertex -> collapsed control names
        self._next_edge = 1
        self._next_vert = 0

    # -- construction -------------------------------------------------------

    def add_vertex(self) -> int:
        v = self._next_vert
        self._next_vert += 1
        self.cyc[v] = []
        return v

    def add_edge(self, a: int, b: int, control=False, tags=ZONES) -> int:
        e = self._next_edge
        self._next_edge += 1
        self.everts[e] = (a, b)
        self.control[e] = control
        self.tags[e] = frozenset(tags)
        self.cyc[a].append((e, 0))
        self.cyc[b].append((e, 1))
        return e

    def copy(self) -> "TreeMap":
        g = TreeMap()
        g.everts = dict(self.everts)
        g.control = dict(self.control)
        g.tags = dict(self.tags)
        g.eimg = {e: list(p) for e, p in self.eimg.items()}
        g.vimg = dict(self.vimg)
        g.cyc = {v: list(c) for v, c in self.cyc.items()}
        g.marked = {v: list(m) for v, m in self.marked.items()}
        g._next_edge = self._next_edge
        g._next_vert = self._next_vert
        return g

    # -- views ---------------------------------------------------------------

    def vertices(self):
        return self.cyc.keys()

    def edges(self):
        return self.everts.keys()

    def letter_ends(self, letter: int) -> tuple[int, int]:
        a, b = self.everts[abs(letter)]
        return (a, b) if letter > 0 else (b, a)

    def path_ends(self, path: list[int]) -> tuple[int, int]:
        return self.letter_ends(path[0])[0], self.letter_ends(path[-1])[1]

    def valence(self, v: int) -> int:
        return len(self.cyc[v])

    def germ_path(self, germ: tuple[int, int]) -> list[int]:
        e, end = germ
        return self.eimg[e] if end == 0 else [-x for x in reversed(self.eimg[e])]

    def adjacency(self) -> dict[int, list[tuple[int, int]]]:
        adj: dict[int, list[tuple[int, int]]] = {v: [] for v in self.cyc}
        for e, (a, b) in self.everts.items():
            adj[a].append((b, e))
            adj[b].append((a, -e))
        return adj

    def tree_path(self, a: int, b: int) -> list[int]:
        """The tight edge path from a to b (letters)."""
        if a == b:
            return []
        adj = self.adjacency()
        prev: dict[int, tuple[int, int]] = {a: (a, 0)}
        stack = [a]
        while stack:
            u = stack.pop()
            if u == b:
                break
            for w, letter in adj[u]:
                if w not in prev:
                    prev[w] = (u, letter)
                    stack.append(w)
        if b not in prev:
            raise ValueError("vertices not connected")
        path = []
        cur = b
        while cur != a:
            cur, letter = prev[cur]
            path.append(letter)
        path.reverse()
        return path

    # -- validation -----------------------------------------------------------

    def check(self):
        nv, ne = len(self.cyc), len(self.everts)
        if ne != nv - 1:
            raise AssertionError(f"not a tree: {nv} vertices, {ne} edges")
        for v in self.cyc:
            if v not in self.vimg:
                raise AssertionError(f"vertex {v} has no image")
        for e, (a, b) in self.everts.items():
            path = self.eimg[e]
            if self.control[e]:
                if len(path) != 1 or not self.control[abs(path[0])]:
                    raise AssertionError(f"control edge {e} image not a control")
            if path:
                if self.path_ends(path) != (self.vimg[a], self.vimg[b]):
                    raise AssertionError(f"edge {e} image endpoints mismatch")
                for x, y in zip(path, path[1:]):
                    if self.letter_ends(x)[1] != self.letter_ends(y)[0]:
                        raise AssertionError(f"edge {e} image path broken")
            else:
                if self.vimg[a] != self.vimg[b]:
                    raise AssertionError(f"edge {e} trivial image endpoints differ")
        for v, cycle in self.cyc.items():
            for e, end in cycle:
                if self.everts[e][end] != v:
                    raise AssertionError(f"germ table broken at {v}")
        return self

    # -- representative conditions ---------------------------------------------

    def fold_candidates(self):
        """Pairs of non-control germs at one vertex with equal first letters."""
        out = []
        for v, cycle in self.cyc.items():
            buckets: dict[int, list[tuple[int, int]]] = {}
            for germ in cycle:
                if self.control[germ[0]]:
                    continue
                path = self.germ_path(germ)
                if not path:
                    continue
                buckets.setdefault(path[0], []).append(germ)
            for letter, germs in buckets.items():
                if len(germs) >= 2:
                    out.append((v, germs[0], germs[1]))
        return out

    def violates_valence(self):
        for v, cycle in self.cyc.items():
            if len(cycle) in (1, 2) and not any(self.control[e] for e, _ in cycle):
                return v
        return None


# ----------------------------------------------------------------------------
# initial compatible tree of a trellis
# ----------------------------------------------------------------------------


def _segment_zone(t: Trellis, k: int) -> frozenset:
    a = t.s_order[k]
    x = x_coord(t.full.points[a])
    return ZONE0 if x <= Fraction(1, 3) else ZONE1


def _face_zone(t: Trellis, face_idx: int) -> frozenset:
    xs = [x_coord(t.full.points[t._halfedge_source(h)])
          for h in t.faces[face_idx]]
    if all(x <= Fraction(1, 3) for x in xs):
        return ZONE0
    if all(x >= Fraction(2, 3) for x in xs):
        return ZONE1
    return ZONES


def _stable_segment_shift(t: Trellis, k: int) -> int:
    """The stable segment containing the image of stable segment k."""
    from .trellis import s_key
    full = t.full
    a, b = t.s_order[k], t.s_order[k + 1]
    keys = [full.skey[v] for v in t.s_order]
    ka = s_key(full.points[a].shift(), full.j)
    kb = s_key(full.points[b].shift(), full.j)
    lo, hi = min(ka, kb), max(ka, kb)
    import bisect
    idx = bisect.bisect_right(keys, lo) - 1
    if idx >= len(keys) - 1:
        idx = len(keys) - 2
    if not (keys[idx] <= lo and hi <= keys[idx + 1]):
        raise AssertionError(f"segment image not inside one segment: {k}")
    return idx


def trivial_tree() -> TreeMap:
    """Compatible tree of the one-intersection trellis: a fixed control."""
    g = TreeMap()
    a, b = g.add_vertex(), g.add_vertex()
    e = g.add_edge(a, b, control=True, tags=ZONE0)
    g.vimg = {a: a, b: b}
    g.eimg = {e: [e]}
    return g.check()


def initial_compatible_tree(t: Trellis) -> TreeMap:
    """Dual-tree compatible map of a (possibly pruned) trellis.

    Centres sit in the regions, control edges cross the stable segments,
    and each centre image is fixed by transporting a marker beside the
    region's stable segment of least rank (image choices for centres are
    homotopic rel the control set, so any consistent marker works).
    """
    if t.nverts == 1:
        return trivial_tree()
    g = TreeMap()
    nseg = len(t.s_order) - 1
    centers = {f: g.add_vertex() for f in range(len(t.faces))}
    flankL = {}
    flankR = {}
    spokeL = {}
    spokeR = {}
    controls = {}
    face_L = {k: t.face_of[(1, k, 1)] for k in range(nseg)}
    face_R = {k: t.face_of[(1, k, -1)] for k in range(nseg)}
    for k in range(nseg):
        flankL[k] = g.add_vertex()
        flankR[k] = g.add_vertex()
    # centre germ order from the face boundary walks
    face_segments: dict[int, list[tuple[int, str]]] = {f: [] for f in centers}
    for f, walk in enumerate(t.faces):
        for h in walk:
            if h[0] == 1:
                face_segments[f].append((h[1], "L" if h[2] == 1 else "R"))
    for f, segs in face_segments.items():
        for k, side in segs:
            fl = flankL[k] if side == "L" else flankR[k]
            zone = _face_zone(t, f)
            spoke = g.add_edge(centers[f], fl, control=False, tags=zone)
            if side == "L":
                spokeL[k] = spoke
            else:
                spokeR[k] = spoke
    for k in range(nseg):
        controls[k] = g.add_edge(flankL[k], flankR[k], control=True,
                                 tags=_segment_zone(t, k))
    sigma = {k: _stable_segment_shift(t, k) for k in range(nseg)}
    # vertex images
    for k in range(nseg):
        g.vimg[flankL[k]] = flankL[sigma[k]]
        g.vimg[flankR[k]] = flankR[sigma[k]]
    rho = {}
    for f, segs in face_segments.items():
        k, side = min(segs)
        k2 = sigma[k]
        rho[f] = face_L[k2] if side == "L" else face_R[k2]
    for f in centers:
        g.vimg[centers[f]] = centers[rho[f]]
    # edge images
    for k in range(nseg):
        g.eimg[controls[k]] = [controls[sigma[k]]]
        g.eimg[spokeL[k]] = g.tree_path(centers[rho[face_L[k]]],
                                        flankL[sigma[k]])
        g.eimg[spokeR[k]] = g.tree_path(centers[rho[face_R[k]]],
                                        flankR[sigma[k]])
    return g.check()


# ----------------------------------------------------------------------------
# moves
# ----------------------------------------------------------------------------


def _tighten(g: TreeMap) -> bool:
    """Cancel adjacent inverse pairs of non-control letters in all images."""
    changed = False
    for e, path in g.eimg.items():
        out: list[int] = []
        for letter in path:
            if out and out[-1] == -letter and not g.control[abs(letter)]:
                out.pop()
                changed = True
            else:
                out.append(letter)
        g.eimg[e] = out
    return changed


def _remove_letter_everywhere(g: TreeMap, e: int):
    for f, path in g.eimg.items():
        g.eimg[f] = [x for x in path if abs(x) != e]


def _merge_vertices(g: TreeMap, keep: int, gone: int):
    if keep == gone:
        return
    for e, (a, b) in list(g.everts.items()):
        g.everts[e] = (keep if a == gone else a, keep if b == gone else b)
    for v, w in list(g.vimg.items()):
        if w == gone:
            g.vimg[v] = keep
    if gone in g.vimg:
        g.vimg.pop(gone)
    g.cyc[keep].extend(g.cyc.pop(gone))
    if gone in g.marked:
        g.marked.setdefault(keep, []).extend(g.marked.pop(gone))


def _collapse_edge(g: TreeMap, e: int) -> None:
    """Collapse an edge with trivial image (post-compose with the quotient)."""
    if g.eimg[e]:
        raise AssertionError("collapsing an edge with nontrivial image")
    a, b = g.everts.pop(e)
    g.control.pop(e)
    g.tags.pop(e)
    g.eimg.pop(e)
    g.cyc[a] = [x for x in g.cyc[a] if x[0] != e]
    g.cyc[b] = [x for x in g.cyc[b] if x[0] != e]
    _remove_letter_everywhere(g, e)
    _merge_vertices(g, a, b)


def _collapse_trivial(g: TreeMap) -> bool:
    for e in list(g.everts):
        if not g.eimg[e] and not g.control[e]:
            _collapse_edge(g, e)
            return True
    return False


def _retract_leaf(g: TreeMap, v: int) -> None:
    """Deformation-retract the single (non-control) edge at a leaf."""
    (e, end) = g.cyc[v][0]
    w = g.everts[e][1 - end]
    g.everts.pop(e)
    g.control.pop(e)
    g.tags.pop(e)
    g.eimg.pop(e)
    g.cyc.pop(v)
    g.cyc[w] = [x for x in g.cyc[w] if x[0] != e]
    _remove_letter_everywhere(g, e)
    for u, im in list(g.vimg.items()):
        if im == v:
            g.vimg[u] = w
    g.vimg.pop(v, None)
    if v in g.marked:
        g.marked.setdefault(w, []).extend(g.marked.pop(v))


def _retract_leaves(g: TreeMap) -> bool:
    for v in list(g.cyc):
        if len(g.cyc[v]) == 1 and not g.control[g.cyc[v][0][0]]:
            if len(g.everts) <= 1:
                return False
            _retract_leaf(g, v)
            return True
    return False


def _slide_vertex_image_off(g: TreeMap, v: int, target: int, letter: int):
    """Redirect every vertex image at v to target (letter runs target->v)."""
    for u in list(g.vimg):
        if g.vimg[u] == v and u != v:
            g.vimg[u] = target
            for e, (a, b) in g.everts.items():
                if a == u:
                    g.eimg[e] = [letter] + g.eimg[e]
                if b == u:
                    g.eimg[e] = g.eimg[e] + [-letter]


def _path_turns_at(g: TreeMap, v: int) -> bool:
    """Does some image path reverse direction at v?"""
    for path in g.eimg.values():
        for x, y in zip(path, path[1:]):
            if y == -x and g.letter_ends(x)[1] == v:
                return True
    return False


def _pinned(g: TreeMap, v: int) -> bool:
    return any(u != v and g.vimg[u] == v for u in g.vimg)


def _merge_valence2(g: TreeMap, v: int, slide: bool) -> None:
    """Absorb a valence-2 vertex into a single edge.

    The merged image is the unreduced concatenation, so an interior image
    turn at v (a fold at a collapsed control point) survives as a
    reversal in the path.
    """
    (e1, end1), (e2, end2) = g.cyc[v]
    # orient: let1 runs a -> v, let2 runs v -> b
    let1 = e1 if end1 == 1 else -e1
    let2 = e2 if end2 == 0 else -e2
    a = g.letter_ends(let1)[0]
    b = g.letter_ends(let2)[1]
    if slide:
        _slide_vertex_image_off(g, v, a, let1)
        _tighten(g)  # the slide can introduce a->v->a backtracks
    elif _pinned(g, v):
        raise AssertionError(f"merging pinned vertex {v}")
    p1 = g.eimg[e1] if let1 > 0 else [-x for x in reversed(g.eimg[e1])]
    p2 = g.eimg[e2] if let2 > 0 else [-x for x in reversed(g.eimg[e2])]
    new = g.add_edge(a, b, control=False, tags=g.tags[e1] | g.tags[e2])
    g.cyc[a].remove((new, 0))  # splice into the old germ slots instead
    g.cyc[b].remove((new, 1))
    g.eimg[new] = p1 + p2
    # rewrite through-traversals: (let1 let2) -> +new, (-let2 -let1) -> -new
    for f in list(g.eimg):
        if f in (e1, e2):
            continue
        path = g.eimg[f]
        out: list[int] = []
        i = 0
        while i < len(path):
            if i + 1 < len(path) and path[i] == let1 and path[i + 1] == let2:
                out.append(new)
                i += 2
            elif i + 1 < len(path) and path[i] == -let2 and path[i + 1] == -let1:
                out.append(-new)
                i += 2
            else:
                if abs(path[i]) in (e1, e2):
                    raise AssertionError(f"unpaired traversal of {v}")
                out.append(path[i])
                i += 1
        g.eimg[f] = out
    for e in (e1, e2):
        g.everts.pop(e)
        g.control.pop(e)
        g.tags.pop(e)
        g.eimg.pop(e)
    germ_a = (abs(let1), 0 if let1 > 0 else 1)
    germ_b = (abs(let2), 1 if let2 > 0 else 0)
    g.cyc[a] = [x if x != germ_a else (new, 0) for x in g.cyc[a]]
    g.cyc[b] = [x if x != germ_b else (new, 1) for x in g.cyc[b]]
    g.cyc.pop(v)
    g.vimg.pop(v, None)
    g.marked.pop(v, None)


def _junction_turns_at_self(g: TreeMap, v: int) -> bool:
    """Would merging v put an image turn at v itself?"""
    if g.vimg.get(v) != v:
        return False
    (e1, end1), (e2, end2) = g.cyc[v]
    let1 = e1 if end1 == 1 else -e1
    let2 = e2 if end2 == 0 else -e2
    p1 = g.eimg[e1] if let1 > 0 else [-x for x in reversed(g.eimg[e1])]
    p2 = g.eimg[e2] if let2 > 0 else [-x for x in reversed(g.eimg[e2])]
    return bool(p1 and p2 and p1[-1] == -p2[0])


def _merge_valence2_step(g: TreeMap, protect_marked=False, slide=True) -> bool:
    for v in list(g.cyc):
        if len(g.cyc[v]) != 2:
            continue
        if any(g.control[e] for e, _ in g.cyc[v]):
            continue
        if protect_marked and v in g.marked:
            continue
        if not slide and (_pinned(g, v) or _path_turns_at(g, v)
                          or _junction_turns_at_self(g, v)):
            continue
        _merge_valence2(g, v, slide)
        return True
    return False


def _subdivide(g: TreeMap, e: int, k: int) -> tuple[int, int, int]:
    """Split edge e so its first piece maps to eimg[e][:k]."""
    path = g.eimg[e]
    if not 0 < k < len(path):
        raise ValueError("subdivision position out of range")
    a, b = g.everts[e]
    m = g.add_vertex()
    g.vimg[m] = g.letter_ends(path[k - 1])[1]
    e1 = g.add_edge(a, m, control=False, tags=g.tags[e])
    e2 = g.add_edge(m, b, control=False, tags=g.tags[e])
    g.cyc[a].remove((e1, 0))  # splice into the old germ slots instead
    g.cyc[b].remove((e2, 1))
    g.eimg[e1] = path[:k]
    g.eimg[e2] = path[k:]
    for f in list(g.eimg):
        if f in (e1, e2):
            continue
        out = []
        for x in g.eimg[f]:
            if x == e:
                out.extend([e1, e2])
            elif x == -e:
                out.extend([-e2, -e1])
            else:
                out.append(x)
        g.eimg[f] = out
    g.cyc[a] = [x if x != (e, 0) else (e1, 0) for x in g.cyc[a]]
    g.cyc[b] = [x if x != (e, 1) else (e2, 1) for x in g.cyc[b]]
    # m's rotation: e1 then e2 (a 2-valent vertex)
    g.cyc[m] = [(e1, 1), (e2, 0)]
    g.everts.pop(e)
    g.control.pop(e)
    g.tags.pop(e)
    g.eimg.pop(e)
    return e1, e2, m


def _germ_prefix_edge(g: TreeMap, germ: tuple[int, int]) -> tuple[int, int]:
    """Make the germ's edge piece map to exactly its first letter.

    Returns (edge, end) of the piece adjacent to the germ's vertex.
    """
    e, end = germ
    path = g.eimg[e]
    if len(path) == 1:
        return (e, end)
    if end == 0:
        e1, _, _ = _subdivide(g, e, 1)
        return (e1, 0)
    _, e2, _ = _subdivide(g, e, len(path) - 1)
    return (e2, 1)


def _fold(g: TreeMap, v: int, germ1, germ2) -> None:
    """Identify the initial pieces of two germs with equal first letters."""
    p1 = _germ_prefix_edge(g, germ1)
    p2 = _germ_prefix_edge(g, germ2)
    (e1, end1), (e2, end2) = p1, p2
    if e1 == e2:
        raise AssertionError("folding an edge with itself")
    m1 = g.everts[e1][1 - end1]
    m2 = g.everts[e2][1 - end2]
    let1 = e1 if end1 == 0 else -e1   # v -> m1
    let2 = e2 if end2 == 0 else -e2   # v -> m2
    # rewrite e2 letters as e1 letters with matching orientation
    for f in list(g.eimg):
        out = []
        for x in g.eimg[f]:
            if x == let2:
                out.append(let1)
            elif x == -let2:
                out.append(-let1)
            else:
                out.append(x)
        g.eimg[f] = out
    g.tags[e1] = g.tags[e1] | g.tags[e2]
    g.everts.pop(e2)
    g.control.pop(e2)
    g.tags.pop(e2)
    g.eimg.pop(e2)
    g.cyc[v] = [x for x in g.cyc[v] if x[0] != e2]
    g.cyc[m2] = [x for x in g.cyc[m2] if x[0] != e2]
    _merge_vertices(g, m1, m2)


def tree_representative(g0: TreeMap) -> TreeMap:
    """Iterate tightening, collapses, retractions, merges and folds until
    the compatible map is a tree representative."""
    g = g0.copy()
    for _ in range(ITER_CAP):
        if _tighten(g):
            continue
        if _collapse_trivial(g):
            continue
        if _retract_leaves(g):
            continue
        folds = g.fold_candidates()
        if folds:
            v, germ1, germ2 = folds[0]
            _fold(g, v, germ1, germ2)
            continue
        if _merge_valence2_step(g):
            continue
        break
    else:
        raise AssertionError("tree representative iteration cap exceeded")
    g.check()
    if g.fold_candidates():
        raise AssertionError("fold candidates remain")
    v = g.violates_valence()
    if v is not None and len(g.everts) > 1:
        raise AssertionError(f"valence condition fails at {v}")
    return g


# ----------------------------------------------------------------------------
# restriction, control collapse, labels
# ----------------------------------------------------------------------------


def restricted_representative(g0: TreeMap) -> TreeMap:
    """Restrict to the eventual image: drop edges not covered forever."""
    g = g0.copy()
    alive = set(g.everts)
    while True:
        covered = set()
        for e in alive:
            covered.update(abs(x) for x in g.eimg[e])
        new = alive & covered
        if new == alive:
            break
        alive = new
    for e in list(g.everts):
        if e not in alive:
            a, b = g.everts.pop(e)
            g.control.pop(e)
            g.tags.pop(e)
            g.eimg.pop(e)
            g.cyc[a] = [x for x in g.cyc[a] if x[0] != e]
            g.cyc[b] = [x for x in g.cyc[b] if x[0] != e]
    for v in list(g.cyc):
        if not g.cyc[v]:
            g.cyc.pop(v)
            g.vimg.pop(v, None)
    for v, w in g.vimg.items():
        if w not in g.cyc:
            raise AssertionError("restriction broke a vertex image")
    return g


def fixed_control(g: TreeMap) -> int:
    for e in g.everts:
        if g.control[e] and abs(g.eimg[e][0]) == e:
            return e
    raise ValueError("no fixed control edge")


def topological_representative(g0: TreeMap) -> TreeMap:
    """Collapse all control edges of the restricted representative."""
    g = g0.copy()
    controls = [e for e in g.everts if g.control[e]]
    for e in controls:
        a, b = g.everts.pop(e)
        g.control.pop(e)
        g.tags.pop(e)
        g.eimg.pop(e)
        g.cyc[a] = [x for x in g.cyc[a] if x[0] != e]
        g.cyc[b] = [x for x in g.cyc[b] if x[0] != e]
        _remove_letter_everywhere(g, e)
        g.marked.setdefault(a, []).append(f"z{e}")
        _merge_vertices(g, a, b)
    # unmarked valence-2 vertices are artifacts of the spoke structure
    while _merge_valence2_step(g, protect_marked=True, slide=False):
        pass
    g.check()
    return g


def vertex_labels(g: TreeMap) -> dict[int, str]:
    """Preimage-depth labels: 0 at the collapsed fixed control, n for n-th
    preimages, primes at fold vertices (and to disambiguate)."""
    fixed = [v for v in g.cyc if g.vimg[v] == v and v in g.marked]
    if not fixed:
        fixed = [v for v in g.cyc if g.vimg[v] == v]
    if not fixed:
        return {}
    v0 = min(fixed)
    depth: dict[int, int] = {}
    for v in g.cyc:
        n, cur = 0, v
        seen = set()
        while cur != v0 and cur not in seen:
            seen.add(cur)
            cur = g.vimg[cur]
            n += 1
        if cur == v0:
            depth[v] = n
    folds = fold_vertices(g)
    labels: dict[int, str] = {}
    per_depth: dict[tuple[int, bool], int] = {}
    for v in sorted(depth):
        if g.valence(v) == 1 or v in folds or v == v0:
            primed = v in folds
            k = per_depth.get((depth[v], primed), 0)
            per_depth[(depth[v], primed)] = k + 1
            labels[v] = str(depth[v]) + "'" * (1 if primed else 0) + "'" * k
    return labels


def fold_vertices(g: TreeMap) -> set[int]:
    """Vertices at which the (collapsed) map fails to be locally injective."""
    out = set()
    for v, cycle in g.cyc.items():
        first = []
        for germ in cycle:
            path = g.germ_path(germ)
            if path:
                first.append(path[0])
        if len(first) != len(set(first)):
            out.add(v)
    return out


# ----------------------------------------------------------------------------
# canonical form and conjugacy
# ----------------------------------------------------------------------------


def canonical_form(g0: TreeMap) -> TreeMap:
    """Merge away valence-2 vertices that carry no dynamics.

    A valence-2 vertex survives only if it is fixed, some vertex maps onto
    it, or an image path turns there; interior marked points otherwise
    persist as reversals in the merged paths.  Conjugacy comparisons and
    transition matrices then agree across subdivision histories.
    """
    g = g0.copy()
    while _merge_valence2_step(g, protect_marked=False, slide=False):
        pass
    g.check()
    return g


def _iso_extend(g1: TreeMap, g2: TreeMap, vmap, emap, frontier):
    while frontier:
        v1, v2 = frontier.pop()
        germs1 = [x for x in g1.cyc[v1] if x[0] not in emap]
        germs2 = [x for x in g2.cyc[v2] if x[0] not in set(emap.values())]
        if len(germs1) != len(germs2):
            return None
        if not germs1:
            continue
        (e1, end1) = germs1[0]
        w1 = g1.everts[e1][1 - end1]
        for (e2, end2) in germs2:
            w2 = g2.everts[e2][1 - end2]
            vm = dict(vmap)
            em = dict(emap)
            if w1 in vm and vm[w1] != w2:
                continue
            vm[w1] = w2
            em[e1] = e2 if end1 == end2 else -e2
            res = _iso_extend(g1, g2, vm, em,
                              list(frontier) + [(v1, v2), (w1, w2)])
            if res is not None:
                return res
        return None
    return (vmap, emap)


def _apply_emap(emap, letter):
    m = emap[abs(letter)]
    return m if letter > 0 else -m


def conjugacy_check(g1: TreeMap, g2: TreeMap) -> bool:
    """Is there a tree isomorphism h with h g1 = g2 h?

    Both maps are brought to canonical form, then label/valence-guided
    backtracking searches for a commuting isomorphism.
    """
    a = canonical_form(g1)
    b = canonical_form(g2)
    if len(a.everts) != len(b.everts) or len(a.cyc) != len(b.cyc):
        return False
    if sorted(map(a.valence, a.cyc)) != sorted(map(b.valence, b.cyc)):
        return False
    va = min(a.cyc)
    for vb in b.cyc:
        if a.valence(va) != b.valence(vb):
            continue
        res = _iso_extend(a, b, {va: vb}, {}, [(va, vb)])
        if res is None:
            continue
        vmap, emap = res
        if all(vmap[a.vimg[v]] == b.vimg[vmap[v]] for v in a.cyc) and \
           all([_apply_emap(emap, x) for x in a.eimg[e]] ==
               (b.eimg[abs(emap[e])] if emap[e] > 0
                else [-y for y in reversed(b.eimg[abs(emap[e])])])
               for e in a.everts):
            return True
    return False


# ----------------------------------------------------------------------------
# transition matrix and entropy
# ----------------------------------------------------------------------------


def transition_matrix(g: TreeMap) -> tuple[list[int], list[list[int]]]:
    """Crossing counts of non-control edge images over non-control edges."""
    idx = sorted(e for e in g.everts if not g.control[e])
    pos = {e: k for k, e in enumerate(idx)}
    mat = [[0] * len(idx) for _ in idx]
    for e in idx:
        for x in g.eimg[e]:
            if abs(x) in pos:
                mat[pos[e]][pos[abs(x)]] += 1
    return idx, mat


def transition_entropy(g: TreeMap):
    """(matrix, characteristic polynomial, Perron root bracket)."""
    gc = canonical_form(g)
    _, mat = transition_matrix(gc)
    poly, lo, hi = _en.perron_root(mat)
    return mat, poly, (lo, hi)


def perron_value(g: TreeMap) -> float:
    _, _, (lo, hi) = transition_entropy(g)
    return float((lo + hi) / 2)


# ----------------------------------------------------------------------------
# orbit enumeration
# ----------------------------------------------------------------------------


def enumerate_orbits(g: TreeMap, max_period: int, support_cap: int = 0):
    """Periodic orbits (and optionally homoclinic excursions) of a tree map.

    Orbits are itineraries in the occurrence graph: states are edges, one
    transition per letter of each image path.  Zone tags translate the
    itineraries to horseshoe codes; a step through an edge tagged with
    both zones contributes both symbols.  Returns (periodic_codes,
    homoclinic_cores); cores are enumerated when support_cap > 0.
    """
    if max_period < 1:
        raise ValueError("period bound must be >= 1")
    gc = canonical_form(g)
    edges = sorted(e for e in gc.everts if not gc.control[e])
    trans: dict[int, list[int]] = {e: [] for e in edges}
    for e in edges:
        for x in gc.eimg[e]:
            if abs(x) in trans:
                trans[e].append(abs(x))
    codes: set[str] = set()
    seen_cycles: set[tuple] = set()

    def expand(cycle_edges):
        words = [""]
        for e in cycle_edges:
            tags = sorted(gc.tags[e])
            words = [w + str(z) for w in words for z in tags]
        for w in words:
            from .symbolic import max_rotation
            codes.add(max_rotation(w))

    def dfs(start, path):
        cur = path[-1]
        for nxt in trans[cur]:
            if nxt == start and len(path) <= max_period:
                key = min(tuple(path[i:] + path[:i]) for i in range(len(path)))
                if key not in seen_cycles:
                    seen_cycles.add(key)
                    expand(path)
            if len(path) < max_period and nxt >= start:
                dfs(start, path + [nxt])

    for e in edges:
        dfs(e, [e])

    cores: set[str] = set()
    if support_cap:
        fixed_edges = [e for e in edges if e in trans[e] and
                       any(gc.everts[e][i] in gc.marked and
                           gc.vimg[gc.everts[e][i]] == gc.everts[e][i]
                           for i in (0, 1))]
        base = fixed_edges[0] if fixed_edges else None
        if base is not None:
            def walk(path):
                if len(path) > support_cap + 2:
                    return
                cur = path[-1]
                for nxt in trans[cur]:
                    if nxt == base and len(path) > 1:
                        middle = path[1:]
                        words = [""]
                        for e in middle:
                            tags = sorted(gc.tags[e])
                            words = [w + str(z) for w in words for z in tags]
                        for w in words:
                            w = w.strip("0")
                            if w and w.count("1") and len(w) - 1 <= support_cap:
                                if w[0] == "1" and w[-1] == "1":
                                    cores.add(w)
                    walk(path + [nxt])
            walk([base])
    return codes, cores
