"""Word-level combinatorics of horseshoe orbits.

Orbits of the horseshoe are coded by binary words: periodic orbits by their
maximal codes, homoclinic orbits by their cores (the maximal block of the
itinerary beginning and ending with 1).  This module provides the unimodal
order, maximality tests, rational words, heights, decorations and scopes,
all with exact rational arithmetic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

LT, EQ, GT = -1, 0, 1

# Decoration sentinels, matching the serialized forms.
ROTATION = "@"   # rotation-compatible / primary family
STAR = "*"       # NBT / cores 111 and 101
EMPTY = ""       # the empty decoration, serialized as "."

HALF = Fraction(1, 2)


def check_word(w: str) -> str:
    if not w or any(c not in "01" for c in w):
        raise ValueError(f"not a nonempty binary word: {w!r}")
    return w


def check_core(core: str) -> str:
    check_word(core)
    if core[0] != "1" or core[-1] != "1":
        raise ValueError(f"a core must begin and end with 1: {core!r}")
    return core


def signature(core: str) -> int:
    """Signature of a homoclinic orbit: length of its core minus one."""
    return len(check_core(core)) - 1


class Seq:
    """An eventually periodic one-sided 0/1 sequence (preperiod + cycle)."""

    __slots__ = ("pre", "per")

    def __init__(self, pre: tuple[int, ...], per: tuple[int, ...]):
        if not per:
            raise ValueError("period part must be nonempty")
        self.pre = pre
        self.per = per

    def __getitem__(self, n: int) -> int:
        if n < len(self.pre):
            return self.pre[n]
        return self.per[(n - len(self.pre)) % len(self.per)]

    def __repr__(self) -> str:
        pre = "".join(map(str, self.pre))
        per = "".join(map(str, self.per))
        return f"{pre}({per})*"


def periodic(word: str) -> Seq:
    """The two-sided-periodic extension overline(word), read forward."""
    check_word(word)
    return Seq((), tuple(int(c) for c in word))


def word_then_zeros(word: str) -> Seq:
    """The sequence word 000... (tail of a homoclinic itinerary)."""
    check_word(word)
    return Seq(tuple(int(c) for c in word), (0,))


def unimodal_compare(s: Seq, t: Seq) -> int:
    """Compare two sequences in the unimodal order.

    At the first index n where they disagree, s precedes t exactly when
    s_0 + ... + s_n is even.  Two eventually periodic sequences that agree
    past the combined preperiods for a full pair of cycles agree everywhere
    (Fine and Wilf), which bounds the scan.
    """
    bound = len(s.pre) + len(t.pre) + len(s.per) + len(t.per) + 1
    acc = 0
    for n in range(bound):
        a, b = s[n], t[n]
        if a != b:
            return LT if (acc + a) % 2 == 0 else GT
        acc += a
    return EQ


def is_maximal(word: str) -> bool:
    """True iff every nontrivial cyclic shift of overline(word) precedes it."""
    check_word(word)
    ref = periodic(word)
    for j in range(1, len(word)):
        shifted = periodic(word[j:] + word[:j])
        if unimodal_compare(shifted, ref) != LT:
            return False
    return True


def max_rotation(word: str) -> str:
    """The code of the periodic orbit through overline(word).

    This is the cyclic rotation of the primitive root of the word whose
    periodic extension is unimodally largest (the itinerary of the
    rightmost point of the orbit).
    """
    check_word(word)
    root = _primitive_root(word)
    best = root
    for j in range(1, len(root)):
        cand = root[j:] + root[:j]
        if unimodal_compare(periodic(cand), periodic(best)) == GT:
            best = cand
    return best


def _primitive_root(word: str) -> str:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word == word[:d] * (n // d):
            return word[:d]
    raise AssertionError("unreachable")


def rational_word(q: Fraction) -> str:
    """The rational word c_q, for q = m/n in (0, 1/2] in lowest terms.

    Symbol i (0 <= i <= n) is 1 iff the open interval
    (m(i-1)/n, m(i+1)/n) contains an integer.
    """
    q = Fraction(q)
    if not 0 < q <= HALF:
        raise ValueError(f"rational word requires q in (0, 1/2], got {q}")
    m, n = q.numerator, q.denominator
    out = []
    for i in range(n + 1):
        lo, hi = m * (i - 1), m * (i + 1)
        # is there k with lo < k*n < hi?
        k = lo // n + 1
        out.append("1" if k * n < hi else "0")
    return "".join(out)


def _below_code(q: Fraction, code_seq: Seq) -> bool:
    """True iff q = 1/2 or overline(c_q 0) strictly precedes code_seq."""
    if q == HALF:
        return True
    return unimodal_compare(periodic(rational_word(q) + "0"), code_seq) == LT


def height(code: str) -> Fraction:
    """Height of the periodic orbit with the given maximal code.

    The infimum of the rationals q in (0,1/2] with q = 1/2 or
    overline(c_q 0) < overline(code).  Located by Stern-Brocot descent:
    the predicate is monotone in q, the interval endpoints stay Farey
    neighbours, and the height is a rational with denominator at most
    len(code), so the descent pins it once the mediant denominator
    exceeds twice that bound.
    """
    if not is_maximal(code):
        raise ValueError(f"height is defined for maximal words only: {code!r}")
    seq = periodic(code)
    den_bound = max(len(code), 2)
    lo = Fraction(0, 1)
    hi = HALF
    while (lo.denominator + hi.denominator) <= 2 * den_bound:
        med = Fraction(lo.numerator + hi.numerator,
                       lo.denominator + hi.denominator)
        if _below_code(med, seq):
            hi = med
        else:
            lo = med
    candidates = [f for f in (lo, hi)
                  if 0 < f <= HALF and f.denominator <= den_bound]
    if len(candidates) != 1:
        raise AssertionError(f"height descent failed to isolate for {code!r}")
    return candidates[0]


@dataclass(frozen=True)
class OrbitClass:
    """Classification of a horseshoe orbit.

    kind is one of rotation_compatible / NBT / generic for periodic codes
    and primary_homoclinic / star_homoclinic / generic_homoclinic for cores.
    For periodic orbits value is the height; for homoclinic ones the
    signature.  decoration is "@" / "*" / a binary word / "" (empty word).
    """
    kind: str
    value: object
    decoration: str


def classify_periodic(code: str) -> OrbitClass:
    """Height, kind and decoration of a periodic orbit from its code."""
    if not is_maximal(code):
        raise ValueError(f"not a valid code (not maximal): {code!r}")
    if code in ("0", "1"):
        raise ValueError("fixed point codes carry no decoration")
    q = height(code)
    n = q.denominator
    cq = rational_word(q)
    k = len(code)
    if k == n and code[: n - 1] == cq[: n - 1]:
        return OrbitClass("rotation_compatible", q, ROTATION)
    if code[: n + 1] != cq:
        raise AssertionError(f"code {code!r} of height {q} does not start with c_q")
    if k == n + 2:
        return OrbitClass("NBT", q, STAR)
    if k < n + 3:
        raise AssertionError(f"period {k} impossible at height {q}")
    return OrbitClass("generic", q, code[n + 2 : k - 1])


def homoclinic_decoration(core: str) -> str:
    """Decoration of a homoclinic orbit from its core."""
    check_core(core)
    if core in ("1", "11"):
        return ROTATION
    if core in ("111", "101"):
        return STAR
    return core[2:-2]


def classify_homoclinic(core: str) -> OrbitClass:
    """Kind, signature and decoration of a homoclinic orbit."""
    check_core(core)
    w = homoclinic_decoration(core)
    if w == ROTATION:
        kind = "primary_homoclinic"
    elif _is_rational_core(core):
        kind = "star_homoclinic"
    else:
        kind = "generic_homoclinic"
    return OrbitClass(kind, signature(core), w)


def _is_rational_core(core: str) -> bool:
    n = len(core) - 1
    if n < 2:
        return False
    for m in range(1, n // 2 + 1):
        q = Fraction(m, n)
        if q.denominator == n and rational_word(q) == core:
            return True
    return False


def star_rational(core: str) -> Fraction | None:
    """The rational q with core == c_q, if the core is a rational word."""
    n = len(core) - 1
    if n >= 2:
        for m in range(1, n // 2 + 1):
            q = Fraction(m, n)
            if q.denominator == n and rational_word(q) == core:
                return q
    return None


def scope(w: str) -> Fraction:
    """Scope of a decoration: the supremum of heights at which it occurs.

    1/2 for the degenerate decorations; otherwise the height of the
    periodic orbit through overline(10 w 0).
    """
    if w in (ROTATION, STAR):
        return HALF
    if w != EMPTY:
        check_word(w)
    return height(max_rotation("10" + w + "0"))


def codes_for(q: Fraction, w: str) -> set[str]:
    """The codes of the height-q periodic orbits with decoration w.

    Up to four words c_q x w y (two for the degenerate decorations);
    membership is decided empirically, by maximality plus classification
    round-trip, which settles the q = q_w boundary cases.
    """
    q = Fraction(q)
    if not 0 < q <= HALF:
        raise ValueError(f"q must lie in (0, 1/2], got {q}")
    cq = rational_word(q)
    if w == ROTATION:
        candidates = [cq[:-2] + y for y in "01"]
    elif w == STAR:
        candidates = [cq + y for y in "01"]
    else:
        if w != EMPTY:
            check_word(w)
        candidates = [cq + x + w + y for x in "01" for y in "01"]
    out = set()
    for cand in candidates:
        if len(cand) < 2 or not is_maximal(cand):
            continue
        cls = classify_periodic(cand)
        if cls.value == q and cls.decoration == w:
            out.add(cand)
    return out


def enumerate_cores(sig: int) -> list[str]:
    """All cores of the given signature, in lexicographic order."""
    if sig < 0:
        raise ValueError("signature must be nonnegative")
    if sig == 0:
        return ["1"]
    mids = ("".join(bits) for bits in
            itertools.product("01", repeat=sig - 1))
    return ["1" + mid + "1" for mid in mids]


def decorations_of_signature(sig: int) -> list[str]:
    """All decorations occurring at the given signature, in lex order."""
    if sig < 2:
        raise ValueError("decorations are tabulated for signature >= 2")
    if sig == 2:
        return [STAR]
    if sig == 3:
        return [EMPTY]
    return ["".join(bits) for bits in itertools.product("01", repeat=sig - 3)]


def cores_for_decoration(w: str, sig: int | None = None) -> list[str]:
    """The cores of the homoclinic orbits with decoration w."""
    if w == ROTATION:
        cores = ["1", "11"]
    elif w == STAR:
        cores = ["111", "101"]
    else:
        if w != EMPTY:
            check_word(w)
        cores = sorted("1" + x + w + y + "1" for x in "01" for y in "01")
    if sig is not None:
        cores = [c for c in cores if len(c) - 1 == sig]
        if not cores:
            raise ValueError(f"decoration {w!r} does not occur at signature {sig}")
    return cores


def format_decoration(w: str) -> str:
    return "." if w == EMPTY else w


def parse_decoration(text: str) -> str:
    if text in (".", ""):
        return EMPTY
    if text in (ROTATION, STAR):
        return text
    return check_word(text)


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"
