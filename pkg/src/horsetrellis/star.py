"""Star tree maps, glueing and pulling tight, and the star forcing chain.

The n-star map g_{m/n} rotates the prongs (e_i -> e_{i-1}) and wraps e_0
over the star with m folds; the star homoclinic orbit with core c_{m/n}
has g_{m/n} as its topological tree representative.  Glueing (a surjective
semiconjugacy) and pulling tight (free reduction of image paths) define
forcing at the tree level; witnesses between star maps are found by a
bounded search built on the prong-rotation structure.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .symbolic import rational_word
from .treerep import TreeMap, ZONE0, ZONE1, ZONES

HALF = Fraction(1, 2)


def _star_r(q: Fraction) -> int:
    m, n = q.numerator, q.denominator
    for r in range(1, n):
        if (m * r) % n == n - 1:
            return r
    raise ValueError(f"no inverse for {q}")


@dataclass(frozen=True)
class StarSpec:
    """Combinatorics of the star map g_{m/n}."""
    q: Fraction
    r: int
    cyclic_edges: tuple      # edge indices in anticlockwise order at the centre
    image_word: tuple        # g(e_0) as signed indices (+i = e_i, -i = reversed)
    fold_labels: tuple       # primed labels of the m fold points along e_0

    def to_json(self) -> dict:
        return {
            "q": f"{self.q.numerator}/{self.q.denominator}",
            "r": self.r,
            "cyclic_edges": list(self.cyclic_edges),
            "image_of_e0": ["e%d" % i if i >= 0 else "E%d" % -i
                            for i in self.image_word],
            "fold_labels": [f"{k}'" for k in self.fold_labels],
        }


def star_spec(q: Fraction) -> StarSpec:
    q = Fraction(q)
    if not 0 < q <= HALF:
        raise ValueError(f"star map needs q in (0, 1/2], got {q}")
    m, n = q.numerator, q.denominator
    r = _star_r(q)
    wrap = [0]
    for k in range(1, m + 1):
        idx = (k * r) % n
        wrap += [-idx, idx]
    cyc = tuple((k * m) % n for k in range(n))
    labels = tuple(((k * r + 1) % n) or n for k in range(1, m + 1))
    return StarSpec(q, r, cyc, tuple(wrap), labels)


def _edge_zone(q: Fraction, k: int) -> frozenset:
    """Horseshoe symbol of prong e_k: 1 iff within m cyclic positions of e_1."""
    m, n = q.numerator, q.denominator
    if n == 2:
        return ZONE1 if k == 1 else ZONES
    minv = pow(m, -1, n)
    pos = (k * minv) % n
    pos1 = minv % n
    dist = min((pos - pos1) % n, (pos1 - pos) % n)
    return ZONE1 if dist < m else ZONE0


def star_map(q: Fraction, subdivide_folds: bool = False) -> TreeMap:
    """The tree map g_{m/n} on the n-star.

    Prongs run tip -> centre; g(e_0) = e_0 ebar_r e_r ebar_2r e_2r ... with
    m folds on e_0.  With subdivide_folds the fold points become marked
    vertices cutting e_0 into monotone pieces (the form produced by the
    trellis pipeline).
    """
    spec = star_spec(Fraction(q))
    m, n = spec.q.numerator, spec.q.denominator
    g = TreeMap()
    center = g.add_vertex()
    tips = [g.add_vertex() for _ in range(n)]
    edges = {}
    for i in range(n):
        edges[i] = g.add_edge(tips[i], center, control=False,
                              tags=_edge_zone(spec.q, i) if i else ZONE0)
    # anticlockwise germ order at the centre: e_i then e_{i+m}
    g.cyc[center] = [(edges[i], 1) for i in spec.cyclic_edges]
    g.vimg[center] = center
    g.vimg[tips[0]] = tips[0]
    for i in range(1, n):
        g.vimg[tips[i]] = tips[i - 1]
    for i in range(1, n):
        g.eimg[edges[i]] = [edges[i - 1]]
    wrap = [edges[abs(i)] if i >= 0 else -edges[abs(i)]
            for i in spec.image_word]
    g.eimg[edges[0]] = wrap

    if not subdivide_folds:
        g.check()
        return g

    # cut e_0 at the m fold preimages: piece k maps over the k-th monotone
    # run of the wrap word (runs split at the ebar_kr | e_kr reversals)
    runs = [[wrap[0], wrap[1]]]
    for k in range(1, m):
        runs.append([wrap[2 * k], wrap[2 * k + 1]])
    runs.append([wrap[2 * m]])
    e0 = edges[0]
    g.everts.pop(e0)
    g.control.pop(e0)
    g.tags.pop(e0)
    g.eimg.pop(e0)
    pieces = []
    prev = tips[0]
    fold_verts = []
    for k in range(m + 1):
        if k < m:
            fv = g.add_vertex()
            fold_verts.append(fv)
            nxt = fv
        else:
            nxt = center
        tag = ZONE0 if k == 0 else ZONE1
        pieces.append(g.add_edge(prev, nxt, control=False, tags=tag))
        prev = nxt
    # the new germs at centre replace e_0's slot in the cyclic order
    g.cyc[center] = [x for x in g.cyc[center]
                     if x != (pieces[-1], 1)]
    g.cyc[center] = [(pieces[-1], 1) if x == (e0, 1) else x
                     for x in g.cyc[center]]
    g.cyc[tips[0]] = [(pieces[0], 0)]
    for k, fv in enumerate(fold_verts):
        g.cyc[fv] = [(pieces[k], 1), (pieces[k + 1], 0)]
        g.vimg[fv] = tips[(  (k + 1) * spec.r) % n]
        g.marked[fv] = [f"fold{k+1}"]
    piece_word = pieces  # +piece traverses tip0 -> centre
    def expand(letter: int) -> list[int]:
        if abs(letter) != e0:
            return [letter]
        seq = piece_word if letter > 0 else [-p for p in reversed(piece_word)]
        return list(seq)
    for k in range(m + 1):
        out = []
        for letter in runs[k]:
            out.extend(expand(letter))
        g.eimg[pieces[k]] = out
    for i in range(1, n):
        out = []
        for letter in g.eimg[edges[i]]:
            out.extend(expand(letter))
        g.eimg[edges[i]] = out
    g.check()
    return g


# ----------------------------------------------------------------------------
# pulling tight, semiconjugacies
# ----------------------------------------------------------------------------


def tighten_word(g: TreeMap, path: list[int]) -> list[int]:
    """Free reduction of a signed edge word."""
    out: list[int] = []
    for letter in path:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return out


def pull_tight(g0: TreeMap) -> TreeMap:
    """Freely reduce every image path (a forcing move, not a normalizer)."""
    g = g0.copy()
    for e in g.eimg:
        g.eimg[e] = tighten_word(g, g.eimg[e])
    return g


@dataclass
class Semiconjugacy:
    """A candidate glueing h: vertex map plus edge words in the target."""
    vmap: dict
    emap: dict   # edge of source -> signed word in target


def _apply_h(h: Semiconjugacy, g2: TreeMap, path: list[int]) -> list[int]:
    out: list[int] = []
    for letter in path:
        word = h.emap[abs(letter)]
        out.extend(word if letter > 0 else [-x for x in reversed(word)])
    return out


def _g_of_word(g: TreeMap, path: list[int]) -> list[int]:
    out: list[int] = []
    for letter in path:
        img = g.eimg[abs(letter)]
        out.extend(img if letter > 0 else [-x for x in reversed(img)])
    return out


def check_semiconjugacy(g: TreeMap, g2: TreeMap, h: Semiconjugacy) -> bool:
    """h o g = g2 o h as tightened edge-path identities, h surjective."""
    for v in g.cyc:
        if v not in h.vmap or h.vmap[v] not in g2.cyc:
            return False
    used = set()
    for e, (a, b) in g.everts.items():
        word = h.emap.get(e)
        if word is None:
            return False
        if word:
            ends = g2.path_ends(word)
            if ends != (h.vmap[a], h.vmap[b]):
                return False
            for x, y in zip(word, word[1:]):
                if g2.letter_ends(x)[1] != g2.letter_ends(y)[0]:
                    return False
            used.update(abs(x) for x in word)
        elif h.vmap[a] != h.vmap[b]:
            return False
    if used != set(g2.everts):
        return False
    for v in g.cyc:
        if h.vmap[g.vimg[v]] != g2.vimg[h.vmap[v]]:
            return False
    for e in g.everts:
        lhs = tighten_word(g2, _apply_h(h, g2, g.eimg[e]))
        rhs = tighten_word(g2, _g_of_word(g2, h.emap[e]))
        if lhs != rhs:
            return False
    return True


def identity_witness(g: TreeMap) -> Semiconjugacy:
    return Semiconjugacy({v: v for v in g.cyc}, {e: [e] for e in g.everts})


def compose_witnesses(h1: Semiconjugacy, h2: Semiconjugacy,
                      g3: TreeMap) -> Semiconjugacy:
    """h2 o h1 where h1: g -> g2 and h2: g2 -> g3."""
    vmap = {v: h2.vmap[w] for v, w in h1.vmap.items()}
    emap = {}
    for e, word in h1.emap.items():
        out: list[int] = []
        for letter in word:
            w2 = h2.emap[abs(letter)]
            out.extend(w2 if letter > 0 else [-x for x in reversed(w2)])
        emap[e] = out
    return Semiconjugacy(vmap, emap)


def _star_paths_from(g2: TreeMap, start: int, center2: int, max_tips: int):
    """Paths start -> center2 in a star, as words, by visited-tip sequences."""
    # edges at the centre
    prongs = {}
    for e, (a, b) in g2.everts.items():
        tip = a if b == center2 else b
        prongs[tip] = e if b == center2 else -e  # letter tip -> centre
    if start == center2:
        first: list[list[int]] = [[]]
    else:
        first = [[prongs[start]]]
    out = []
    tips = sorted(prongs)
    def extend(word, depth):
        out.append(list(word))
        if depth >= max_tips:
            return
        for t in tips:
            extend(word + [-prongs[t], prongs[t]], depth + 1)
    for w in first:
        extend(w, 0)
    return out


def find_semiconjugacy(g: TreeMap, g2: TreeMap, max_tips: int = None):
    """Bounded search for a glueing witness between star maps.

    The prong rotation makes h(e_i) = g2^(n-1-i)(h(e_{n-1})), so the search
    runs over the image of the last prong (paths bounded by max_tips fold
    returns) and the anchor vertices; each candidate is verified with
    check_semiconjugacy.  Returns a verified Semiconjugacy or None.
    """
    n = len(g.everts)
    center = max(g.cyc, key=g.valence)
    prong_of = {}
    for e, (a, b) in g.everts.items():
        tip = a if b == center else b
        prong_of[tip] = e
    # dynamical order of source tips: tip_i -> tip_{i-1}
    chain = {v: g.vimg[v] for v in g.cyc if v != center}
    fixed_tips = [v for v in chain if chain[v] == v]
    if len(fixed_tips) != 1 or g.vimg[center] != center:
        raise ValueError("find_semiconjugacy expects star-shaped maps")
    tip0 = fixed_tips[0]
    order = [tip0]
    while len(order) < n:
        prev = order[-1]
        nxts = [v for v in chain if chain[v] == prev and v not in order]
        if not nxts:
            break
        order.append(nxts[0])
    if len(order) != n:
        raise ValueError("source map is not a single prong rotation")
    center2 = max(g2.cyc, key=g2.valence)
    n2 = len(g2.everts)
    if max_tips is None:
        max_tips = 2 * n2
    tries = 0
    for start in sorted(g2.cyc):
        for word in _star_paths_from(g2, start, center2, max_tips):
            tries += 1
            if tries > 2_000_000:
                raise RuntimeError("semiconjugacy search budget exceeded")
            # derive h from h(e_{n-1}) = word
            emap = {prong_of[order[n - 1]]: word}
            vmap = {center: center2, order[n - 1]: start}
            cur = word
            ok = True
            for i in range(n - 2, -1, -1):
                cur = tighten_word(g2, _g_of_word(g2, cur))
                emap[prong_of[order[i]]] = cur
                if cur:
                    vmap[order[i]] = g2.path_ends(cur)[0]
                else:
                    vmap[order[i]] = vmap[order[i + 1]]
            h = Semiconjugacy(vmap, emap)
            if check_semiconjugacy(g, g2, h):
                return h
    return None


# ----------------------------------------------------------------------------
# star pipeline checks
# ----------------------------------------------------------------------------


def star_itinerary(q: Fraction) -> str:
    """Core word read from the star map along e_1 e_0 e_{n-1} ... e_2 e_1.

    A prong contributes symbol 0 exactly when it sits m or more cyclic
    positions from e_1 in the geometric order.
    """
    q = Fraction(q)
    m, n = q.numerator, q.denominator
    seq = [1, 0] + list(range(n - 1, 0, -1))
    out = []
    for k in seq:
        zone = _edge_zone(q, k)
        if zone == ZONES:
            out.append("0" if k == 0 else "1")
        else:
            out.append("1" if zone == ZONE1 else "0")
    return "".join(out)


def star_representative_check(q: Fraction, cap: int | None = None) -> bool:
    """Does the trellis pipeline reproduce g_{m/n} for the core c_{m/n}?"""
    from . import treerep as tp
    from .trellis import forced_trellis
    from .treerep import conjugacy_check

    q = Fraction(q)
    core = rational_word(q)
    sig = len(core) - 1
    if cap is not None and sig > cap:
        raise ValueError(f"signature {sig} exceeds cap {cap}")
    if star_itinerary(q) != core:
        return False
    t = forced_trellis(core, sig if sig >= 1 else 1)
    g0 = tp.initial_compatible_tree(t)
    rep = tp.tree_representative(g0)
    top = tp.topological_representative(tp.restricted_representative(rep))
    return conjugacy_check(top, star_map(q, subdivide_folds=True))


def rationals_up_to(bound: int):
    out = []
    for den in range(2, bound + 1):
        for num in range(1, den // 2 + 1):
            f = Fraction(num, den)
            if f.denominator == den and f <= HALF:
                out.append(f)
    return sorted(set(out))


def star_chain_verify(denominator_bound: int, max_tips: int = None) -> dict:
    """Witness the star forcing chain for all denominators up to the bound.

    Consecutive rationals get searched witnesses (higher forces lower),
    composed along the chain for the full relation; reverse searches must
    come up empty.  Returns a report dict.
    """
    if denominator_bound < 2:
        raise ValueError("bound must be >= 2")
    qs = rationals_up_to(denominator_bound)
    maps = {f: star_map(f) for f in qs}
    down: dict[tuple, Semiconjugacy] = {}
    missing = []
    for hi, lo in zip(qs[1:][::-1], qs[:-1][::-1]):
        h = find_semiconjugacy(maps[hi], maps[lo], max_tips)
        if h is None:
            missing.append((hi, lo))
        else:
            down[(hi, lo)] = h
    chain_ok = not missing
    pairs = {}
    if chain_ok:
        for i, hi in enumerate(qs):
            for lo in qs[:i]:
                # compose consecutive witnesses from hi down to lo
                idx = qs.index(hi)
                h = down[(qs[idx], qs[idx - 1])]
                idx -= 1
                while qs[idx] != lo:
                    h = compose_witnesses(h, down[(qs[idx], qs[idx - 1])],
                                          maps[qs[idx - 1]])
                    idx -= 1
                pairs[(hi, lo)] = check_semiconjugacy(maps[hi], maps[lo], h)
    reverse = {}
    for lo, hi in itertools.combinations(qs, 2):
        if (lo, hi) in reverse:
            continue
    for lo, hi in zip(qs[:-1], qs[1:]):
        reverse[(lo, hi)] = find_semiconjugacy(maps[lo], maps[hi], max_tips)
    return {
        "rationals": qs,
        "chain_ok": chain_ok,
        "missing": missing,
        "composed_ok": all(pairs.values()) if pairs else chain_ok,
        "pairs": pairs,
        "reverse_none": all(h is None for h in reverse.values()),
    }
