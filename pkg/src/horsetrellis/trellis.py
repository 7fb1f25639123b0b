"""Combinatorial trellises for the horseshoe map.

A full trellis of signature n consists of an unstable arc through p and a
stable arc through p whose intersections are exactly the homoclinic points
with itinerary support inside an (n+1)-slot window.  Orders along the two
arcs come from exact order-embeddings of one-sided itineraries, crossing
signs from branch parities, and the planar face structure from the induced
rotation system.  Pruning moves delete whole intersection orbits across
inner bigons; the trellis forced by a homoclinic orbit is the fixed point
of greedy pruning protecting that orbit.
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .symbolic import check_core, enumerate_cores

P_ORBIT = ""  # the fixed point p: empty core, never deletable

# Vertical/horizontal parity convention: +1 means the reading with an even
# number of 1-branch passages keeps the reference direction.  A single flag;
# the combinatorial anchors (q-point orders, counts, worked examples) pin it.
SIGN_CONVENTION = 1


def psi(bits) -> Fraction:
    """Order-embedding of 0/1 sequences (unimodal order) into [0,1].

    Accumulated-parity digits placed in base 3 so that distinct sequences
    get distinct values; the argument is the reading up to the end of the
    1-support, with zeros beyond.
    """
    val = Fraction(0)
    parity = 0
    pow3 = 1
    for b in bits:
        parity ^= b
        pow3 *= 3
        if parity:
            val += Fraction(2, pow3)
    if parity:
        val += Fraction(1, pow3)
    return val


@dataclass(frozen=True)
class Point:
    """A placed homoclinic point: core word at an offset (p is ("", 0))."""
    core: str
    offset: int

    def symbol(self, k: int) -> int:
        if self.offset <= k < self.offset + len(self.core):
            return int(self.core[k - self.offset])
        return 0

    def shift(self) -> "Point":
        return Point(self.core, self.offset - 1)

    @property
    def support_min(self) -> int:
        return self.offset

    @property
    def support_max(self) -> int:
        return self.offset + len(self.core) - 1


def u_key(pt: Point, i: int) -> Fraction:
    """Position key along the unstable arc: reading from index -i rightward."""
    if pt.core and pt.support_min < -i:
        raise ValueError(f"{pt} is not on the unstable arc of depth {i}")
    bits = [pt.symbol(k) for k in range(-i, pt.support_max + 1)] if pt.core else []
    return psi(bits)


def s_key(pt: Point, j: int) -> Fraction:
    """Position key along the stable arc: reading from index -j leftward."""
    if pt.core and pt.support_max > -j:
        raise ValueError(f"{pt} is not on the stable arc of extent {j}")
    bits = [pt.symbol(k) for k in range(-j, pt.support_min - 1, -1)] if pt.core else []
    return psi(bits)


def x_coord(pt: Point) -> Fraction:
    """Horizontal coordinate: forward reading from index 0."""
    bits = [pt.symbol(k) for k in range(0, max(pt.support_max, -1) + 1)]
    return psi(bits)


def _parity(pt: Point, lo: int, hi: int) -> int:
    if not pt.core:
        return 0
    a = max(lo, pt.support_min)
    b = min(hi, pt.support_max)
    if a > b:
        return 0
    return sum(int(c) for c in pt.core[a - pt.offset : b - pt.offset + 1]) % 2


class FullTrellisData:
    """The full trellis of one signature and placement, plus content data.

    Immutable once built; pruned trellises are views onto it.  Content
    points are the itinerary shifts of the vertex orbits that stick out of
    the window on one side; every such point lies on exactly one of the two
    arcs, and its position among the full vertex set never changes under
    pruning isotopies.
    """

    def __init__(self, n: int, placement: str = "j1"):
        if n < 1:
            raise ValueError("full trellis needs signature >= 1")
        if placement == "j1":
            j = -1
        elif placement == "balanced":
            j = n // 2 - n
        else:
            raise ValueError(f"unknown placement {placement!r}")
        i = j + n
        self.n, self.i, self.j, self.placement = n, i, j, placement

        pts = [Point(P_ORBIT, 0)]
        for length in range(1, n + 2):
            for core in enumerate_cores(length - 1):
                for off in range(-i, -j - length + 2):
                    pts.append(Point(core, off))
        ukeys = {pt: u_key(pt, i) for pt in pts}
        skeys = {pt: s_key(pt, j) for pt in pts}
        order = sorted(pts, key=lambda p: ukeys[p])
        self.points = order
        self.index = {pt: k for k, pt in enumerate(order)}
        self.nverts = len(order)
        self.ukey = [ukeys[pt] for pt in order]
        self.skey = [skeys[pt] for pt in order]
        self.orbit = [pt.core for pt in order]
        srt = sorted(range(self.nverts), key=lambda v: self.skey[v])
        self.full_s_rank = [0] * self.nverts
        for rank, v in enumerate(srt):
            self.full_s_rank[v] = rank
        self.eps_u = [SIGN_CONVENTION * (1 - 2 * _parity(pt, -i, -1)) for pt in order]
        self.eps_s = [SIGN_CONVENTION * (1 - 2 * _parity(pt, 0, -j)) for pt in order]
        self.orbits = sorted({pt.core for pt in order if pt.core},
                             key=lambda c: (len(c), c))
        self._contents()

    def _contents(self) -> None:
        """Locate out-of-window orbit shifts on the arcs, growing the shift
        slack until the (gap, orbit) incidence maps stabilize."""
        skeys_sorted = sorted(range(self.nverts), key=lambda v: self.skey[v])
        s_sorted_keys = [self.skey[v] for v in skeys_sorted]
        prev = None
        for slack in range(2, self.n + 4):
            u_gaps: list[set[str]] = [set() for _ in range(self.nverts)]
            s_gaps: list[set[str]] = [set() for _ in range(self.nverts)]
            for core in self.orbits:
                length = len(core)
                for out in range(1, slack + 1):
                    off = -self.j - length + 1 + out
                    key = u_key(Point(core, off), self.i)
                    g = bisect.bisect_left(self.ukey, key) - 1
                    u_gaps[g].add(core)
                    off = -self.i - out
                    key = s_key(Point(core, off), self.j)
                    g = bisect.bisect_left(s_sorted_keys, key) - 1
                    s_gaps[g].add(core)
            snapshot = (tuple(map(frozenset, u_gaps)), tuple(map(frozenset, s_gaps)))
            if snapshot == prev:
                break
            prev = snapshot
        else:
            raise AssertionError("content assignments did not stabilize")
        self.u_gap_orbits = [tuple(sorted(s)) for s in prev[0]]
        self.s_gap_orbits = [tuple(sorted(s)) for s in prev[1]]


_FULL_CACHE: dict[tuple[int, str], FullTrellisData] = {}


def _full(n: int, placement: str) -> FullTrellisData:
    key = (n, placement)
    if key not in _FULL_CACHE:
        _FULL_CACHE[key] = FullTrellisData(n, placement)
    return _FULL_CACHE[key]


@dataclass(frozen=True)
class PruningMove:
    """A single-bigon or adjacent-pair pruning move."""
    kind: str                      # "single" | "pair"
    bigons: tuple                  # one or two (v0, v1) corner pairs (full ids)
    deleted: frozenset             # orbit cores to delete
    flip: str | None = None        # orbit whose crossing orientation flips


# Halfedge encoding: (curve, k, d) is the germ leaving position k of the
# curve order if d=+1 (toward position k+1), or leaving k+1 if d=-1.
_E, _N, _W, _S = 0, 1, 2, 3


class Trellis:
    """A (possibly pruned) horseshoe trellis: an alive-subset view of the
    full trellis with accumulated crossing-sign flips."""

    def __init__(self, full: FullTrellisData, alive=None, flipped=frozenset(),
                 _orders=None):
        self.full = full
        if alive is None:
            alive = range(full.nverts)
        self.alive = frozenset(alive)
        self.flipped = frozenset(flipped)
        if _orders is not None:
            self.u_order, self.s_order = _orders
        else:
            self.u_order = sorted(self.alive)
            self.s_order = sorted(self.alive, key=lambda v: full.skey[v])
        self.u_pos = {v: k for k, v in enumerate(self.u_order)}
        self.s_pos = {v: k for k, v in enumerate(self.s_order)}

    # -- basic structure ---------------------------------------------------

    @property
    def signature(self) -> int:
        return self.full.n

    @property
    def nverts(self) -> int:
        return len(self.u_order)

    def orbit_of(self, v: int) -> str:
        return self.full.orbit[v]

    @cached_property
    def orbits_alive(self) -> frozenset:
        return frozenset(self.full.orbit[v] for v in self.alive
                         if self.full.orbit[v])

    def eps_u(self, v: int) -> int:
        return self.full.eps_u[v]

    def eps_s(self, v: int) -> int:
        s = self.full.eps_s[v]
        return -s if self.full.orbit[v] in self.flipped else s

    def pi(self) -> tuple[int, ...]:
        """Relative ordering: s-position of each vertex in u-order."""
        return tuple(self.s_pos[v] for v in self.u_order)

    # -- planar face structure ----------------------------------------------

    def _germs(self, v: int):
        """Outgoing germs at v with compass slots (E,N,W,S indices)."""
        germs = {}
        ku, ks = self.u_pos[v], self.s_pos[v]
        eu, es = self.eps_u(v), self.eps_s(v)
        if ku + 1 < len(self.u_order):
            germs[_E if eu > 0 else _W] = (0, ku, 1)
        if ku > 0:
            germs[_W if eu > 0 else _E] = (0, ku - 1, -1)
        if ks + 1 < len(self.s_order):
            germs[_N if es > 0 else _S] = (1, ks, 1)
        if ks > 0:
            germs[_S if es > 0 else _N] = (1, ks - 1, -1)
        return germs

    def _halfedge_target(self, h) -> int:
        curve, k, d = h
        order = self.u_order if curve == 0 else self.s_order
        return order[k + 1] if d == 1 else order[k]

    def _halfedge_source(self, h) -> int:
        curve, k, d = h
        order = self.u_order if curve == 0 else self.s_order
        return order[k] if d == 1 else order[k + 1]

    @cached_property
    def _rotation(self):
        """Counterclockwise germ cycle at each alive vertex."""
        rot = {}
        for v in self.alive:
            germs = self._germs(v)
            rot[v] = [germs[slot] for slot in (_E, _N, _W, _S) if slot in germs]
        return rot

    @cached_property
    def faces(self) -> list[tuple]:
        """Faces as cycles of halfedges, from the rotation system.

        The next halfedge after h is the rotation successor of reversed(h)
        at its target; the Euler relation V - E + F = 2 certifies that the
        sign data defines a sphere embedding.
        """
        rot = self._rotation
        succ = {}
        for v, cyc in rot.items():
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                succ[a] = b
        faces = []
        seen = set()
        for v, cyc in rot.items():
            for h in cyc:
                if h in seen:
                    continue
                walk = []
                cur = h
                while cur not in seen:
                    seen.add(cur)
                    walk.append(cur)
                    curve, k, d = cur
                    cur = succ[(curve, k, -d)]
                faces.append(tuple(walk))
        nv = self.nverts
        ne = (nv - 1) * 2 if nv > 1 else 0
        if nv - ne + len(faces) != 2:
            raise AssertionError(
                f"rotation system is not spherical: V={nv} E={ne} F={len(faces)}")
        return faces

    @cached_property
    def face_of(self):
        out = {}
        for idx, walk in enumerate(self.faces):
            for h in walk:
                out[h] = idx
        return out

    def bigons(self) -> list[tuple]:
        """Faces bounded by one unstable and one stable segment."""
        out = []
        for walk in self.faces:
            if len(walk) == 2 and {walk[0][0], walk[1][0]} == {0, 1}:
                out.append(walk)
        return out

    # -- content queries -----------------------------------------------------

    def _range_has_alive_orbit(self, curve: int, k: int) -> bool:
        """Any alive-orbit content point strictly inside curve segment k?"""
        order = self.u_order if curve == 0 else self.s_order
        a, b = order[k], order[k + 1]
        if curve == 0:
            lo, hi = a, b
            gaps = self.full.u_gap_orbits
        else:
            lo, hi = self.full.full_s_rank[a], self.full.full_s_rank[b]
            gaps = self.full.s_gap_orbits
        orbits_alive = self.orbits_alive
        for g in range(lo, hi):
            for orb in gaps[g]:
                if orb in orbits_alive:
                    return True
        return False

    def segment_contents(self, curve: int, k: int) -> set[str]:
        order = self.u_order if curve == 0 else self.s_order
        a, b = order[k], order[k + 1]
        if curve == 0:
            lo, hi, gaps = a, b, self.full.u_gap_orbits
        else:
            lo, hi = self.full.full_s_rank[a], self.full.full_s_rank[b]
            gaps = self.full.s_gap_orbits
        alive = self.orbits_alive
        out = set()
        for g in range(lo, hi):
            out.update(orb for orb in gaps[g] if orb in alive)
        return out

    def face_contents(self, face_idx: int) -> set[str]:
        """Alive orbits with points on the closure of a face (vertices aside)."""
        out = set()
        for curve, k, _ in self.faces[face_idx]:
            out |= self.segment_contents(curve, k)
        return out

    # -- pruning --------------------------------------------------------------

    def _bigon_corners(self, walk) -> tuple[int, int]:
        h0, h1 = walk
        return self._halfedge_source(h0), self._halfedge_source(h1)

    def _bigon_inner(self, walk) -> bool:
        for curve, k, _ in walk:
            if self._range_has_alive_orbit(curve, k):
                return False
        return True

    def find_pruning_moves(self, protected=frozenset()) -> list[PruningMove]:
        """All applicable single-bigon and adjacent-pair moves.

        Deleted orbits must avoid the protected set and p; pair moves need
        the two outer corners on different orbits and keep (but flip) the
        shared crossing.  Deterministic order: by smallest unstable rank,
        single moves first.
        """
        protected = set(protected) | {P_ORBIT}
        inner = []
        for walk in self.bigons():
            if self._bigon_inner(walk):
                inner.append((self._bigon_corners(walk), walk))
        moves = []
        for (v0, v1), _walk in inner:
            orbs = frozenset({self.orbit_of(v0), self.orbit_of(v1)})
            if orbs & protected:
                continue
            moves.append(PruningMove("single", ((v0, v1),), orbs))
        by_vertex: dict[int, list[tuple]] = {}
        for corners, walk in inner:
            for v in corners:
                by_vertex.setdefault(v, []).append(corners)
        for v, blist in sorted(by_vertex.items()):
            for c0, c1 in itertools.combinations(blist, 2):
                w0 = c0[0] if c0[1] == v else c0[1]
                w1 = c1[0] if c1[1] == v else c1[1]
                o0, o1, ov = self.orbit_of(w0), self.orbit_of(w1), self.orbit_of(v)
                if o0 == o1 or ov in (o0, o1):
                    continue
                orbs = frozenset({o0, o1})
                if orbs & protected:
                    continue
                moves.append(PruningMove("pair", ((v, w0), (v, w1)), orbs, flip=ov))
        def rank(m: PruningMove):
            lead = min(self.u_pos[v] for pair in m.bigons for v in pair)
            return (0 if m.kind == "single" else 1, lead, sorted(m.deleted))
        moves.sort(key=rank)
        return moves

    def apply_pruning_move(self, move: PruningMove) -> "Trellis":
        """Delete the move's orbits (toggling the kept crossing's sign for a
        pair move) and return the pruned trellis."""
        return self._apply_batch([move])

    def _apply_batch(self, moves) -> "Trellis":
        alive_orbits = self.orbits_alive
        deleted: set[str] = set()
        flipped = set(self.flipped)
        for move in moves:
            for orb in move.deleted:
                if orb not in alive_orbits:
                    raise ValueError(f"stale move: orbit {orb!r} already deleted")
            deleted |= move.deleted
            if move.flip is not None:
                flipped ^= {move.flip}
        u_order = [v for v in self.u_order if self.full.orbit[v] not in deleted]
        s_order = [v for v in self.s_order if self.full.orbit[v] not in deleted]
        out = Trellis(self.full, u_order, frozenset(flipped),
                      _orders=(u_order, s_order))
        if out.nverts >= self.nverts:
            raise AssertionError("pruning move deleted nothing")
        out.faces  # force the Euler check
        return out

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "signature": self.full.n,
            "placement": self.full.placement,
            "vertices": [
                {
                    "core": self.full.points[v].core,
                    "offset": self.full.points[v].offset,
                    "u_rank": self.u_pos[v],
                    "s_rank": self.s_pos[v],
                    "sign": self.eps_u(v) * self.eps_s(v),
                }
                for v in self.u_order
            ],
            "pi": list(self.pi()),
        }


def build_full_trellis(n: int, placement: str = "j1") -> Trellis:
    """The full horseshoe trellis of signature n."""
    return Trellis(_full(n, placement))


def relative_ordering(t: Trellis) -> tuple[int, ...]:
    return t.pi()


def forced_trellis(core: str, m: int | None = None, placement: str = "j1",
                   move_order=None) -> Trellis:
    """The signature-m trellis forced by the homoclinic orbit with the
    given core: prune the full trellis maximally, protecting the orbit.

    Moves that touch pairwise disjoint orbit sets commute, so each round
    applies a maximal non-conflicting batch in deterministic order.  An
    explicit move_order callable (moves -> moves) replaces the scan order,
    for confluence experiments.
    """
    check_core(core)
    sig = len(core) - 1
    if m is None:
        m = max(sig, 1)
    if m < sig:
        raise ValueError(f"need m >= signature({core}) = {sig}")
    t = build_full_trellis(m, placement)
    protected = frozenset({core})
    while True:
        moves = t.find_pruning_moves(protected)
        if not moves:
            return t
        if move_order is not None:
            moves = move_order(moves)
        touched: set[str] = set()
        batch = []
        for mv in moves:
            mv_orbits = set(mv.deleted) | ({mv.flip} if mv.flip else set())
            if mv_orbits & touched:
                continue
            batch.append(mv)
            touched |= mv_orbits
            if move_order is not None:
                break  # one move at a time under an explicit order
        if not batch:
            return t
        t = t._apply_batch(batch)
