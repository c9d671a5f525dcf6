"""Finite groups stored as multiplication tables.

Elements are integer indices ``0 .. order-1`` with ``0`` the identity.
Subgroups are handled internally as ``frozenset`` of indices; the
:class:`Subgroup` wrapper is the public handle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence


class GroupError(ValueError):
    """Raised for invalid tables, embeddings or quotients."""


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_infinity, ())


def _infinity():
    return INFINITY


INFINITY = _Infinity()


class FiniteGroup:
    __slots__ = ("order", "mult", "inv", "name", "labels", "_closure_cache", "__weakref__")

    def __init__(self, mult: Sequence[Sequence[int]], name: str = "G",
                 labels: Sequence[str] | None = None, validate: bool = True):
        n = len(mult)
        if n == 0:
            raise GroupError("empty table")
        self.order = n
        self.mult = tuple(tuple(int(x) for x in row) for row in mult)
        self.name = name
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        if validate:
            _validate_table(self.mult)
        inv = [None] * n
        for a in range(n):
            row = self.mult[a]
            for b in range(n):
                if row[b] == 0:
                    inv[a] = b
                    break
        if validate and any(x is None for x in inv):
            raise GroupError("some element has no inverse")
        self.inv = tuple(inv)
        self._closure_cache = {}

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"

    def mul(self, a: int, b: int) -> int:
        return self.mult[a][b]

    def prod(self, *xs: int) -> int:
        r = 0
        for x in xs:
            r = self.mult[r][x]
        return r

    def conj(self, g: int, x: int) -> int:
        """g x g^-1"""
        return self.mult[self.mult[g][x]][self.inv[g]]

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = self.mult[x][g]
            k += 1
        return k

    def closure(self, gens: Iterable[int]) -> frozenset:
        """Smallest subgroup containing ``gens``, as a frozenset."""
        key = frozenset(gens)
        hit = self._closure_cache.get(key)
        if hit is not None:
            return hit
        elems = {0}
        frontier = [0]
        gl = [g for g in key if g != 0]
        while frontier:
            nxt = []
            for x in frontier:
                row = self.mult[x]
                for g in gl:
                    y = row[g]
                    if y not in elems:
                        elems.add(y)
                        nxt.append(y)
            frontier = nxt
        res = frozenset(elems)
        if len(self._closure_cache) < 50000:
            self._closure_cache[key] = res
        return res

    def join(self, s: frozenset, t: Iterable[int]) -> frozenset:
        t = frozenset(t)
        if t <= s:
            return s
        return self.closure(s | t)

    def conj_set(self, g: int, s: Iterable[int]) -> frozenset:
        return frozenset(self.conj(g, x) for x in s)

    def is_subgroup(self, s: Iterable[int]) -> bool:
        s = set(s)
        if 0 not in s:
            return False
        return all(self.mult[a][self.inv[b]] in s for a in s for b in s)

    def is_normal(self, s: Iterable[int]) -> bool:
        s = frozenset(s)
        return all(self.conj(g, x) in s for g in range(self.order) for x in s)

    def right_coset(self, s: Iterable[int], g: int) -> frozenset:
        """S g"""
        return frozenset(self.mult[x][g] for x in s)

    def left_coset(self, g: int, s: Iterable[int]) -> frozenset:
        """g S"""
        row = self.mult[g]
        return frozenset(row[x] for x in s)

    def right_rep(self, s: Iterable[int], g: int) -> int:
        """Minimal index in S g."""
        return min(self.mult[x][g] for x in s)

    def center(self) -> frozenset:
        return frozenset(z for z in range(self.order)
                         if all(self.mult[z][g] == self.mult[g][z] for g in range(self.order)))


def _validate_table(mult):
    n = len(mult)
    for row in mult:
        if len(row) != n:
            raise GroupError("table is not square")
        for x in row:
            if not 0 <= x < n:
                raise GroupError(f"entry {x} out of range")
    for a in range(n):
        if mult[0][a] != a or mult[a][0] != a:
            raise GroupError(f"index 0 is not a two-sided identity (fails at {a})")
    for a in range(n):
        if sorted(mult[a]) != list(range(n)):
            raise GroupError(f"row {a} is not a permutation")
    for a in range(n):
        ra = mult[a]
        for b in range(n):
            rab = mult[ra[b]]
            rb = mult[b]
            for c in range(n):
                if rab[c] != ra[rb[c]]:
                    raise GroupError(f"associativity fails at ({a}, {b}, {c})")


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup
    elements: tuple

    @property
    def order(self) -> int:
        return len(self.elements)

    def as_set(self) -> frozenset:
        return frozenset(self.elements)


def subgroup(G: FiniteGroup, elems: Iterable[int]) -> Subgroup:
    s = frozenset(elems)
    if not G.is_subgroup(s):
        raise GroupError(f"{sorted(s)} is not a subgroup of {G.name}")
    return Subgroup(G, tuple(sorted(s)))


def subgroup_closure(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    gens = list(gens)
    for g in gens:
        if not 0 <= g < G.order:
            raise GroupError(f"element {g} out of range for {G.name}")
    return Subgroup(G, tuple(sorted(G.closure(gens))))


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, (0,))


# -- constructors -----------------------------------------------------------

def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupError("cyclic order must be positive")
    mult = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroup(mult, name=f"Z/{n}", validate=False)


def symmetric(n: int) -> FiniteGroup:
    """S_n on {1..n}; elements ordered lexicographically as images
    (identity first). Product is composition ``(p*q)(x) = p(q(x))``."""
    if not 1 <= n <= 5:
        raise GroupError("symmetric groups supported for n <= 5")
    perms = list(permutations(range(n)))
    index = {p: k for k, p in enumerate(perms)}
    mult = [[index[tuple(p[q[x]] for x in range(n))] for q in perms] for p in perms]
    labels = [_cycle_label(p) for p in perms]
    return FiniteGroup(mult, name=f"S{n}", labels=labels, validate=False)


def _cycle_label(p) -> str:
    seen, parts = set(), []
    for s in range(len(p)):
        if s in seen or p[s] == s:
            continue
        cyc, x = [], s
        while x not in seen:
            seen.add(x)
            cyc.append(str(x + 1))
            x = p[x]
        parts.append("(" + "".join(cyc) + ")")
    return "".join(parts) or "()"


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n; index ``k + n*e`` is r^k s^e."""
    if n < 1:
        raise GroupError("dihedral parameter must be positive")

    def idx(k, e):
        return (k % n) + n * e

    mult = []
    for a in range(2 * n):
        ka, ea = a % n, a // n
        row = []
        for b in range(2 * n):
            kb, eb = b % n, b // n
            row.append(idx(ka + (-kb if ea else kb), (ea + eb) % 2))
        mult.append(row)
    labels = [("r^%d" % (x % n) if x % n else "1") + ("s" if x >= n else "") for x in range(2 * n)]
    labels[n] = "s"
    return FiniteGroup(mult, name=f"D{n}", labels=labels, validate=False)


def from_table(rows, name="T") -> FiniteGroup:
    return FiniteGroup(rows, name=name, validate=True)


@lru_cache(maxsize=None)
def _cached(kind: str, n: int) -> FiniteGroup:
    if kind == "cyclic":
        return cyclic(n)
    if kind == "sym":
        return symmetric(n)
    if kind == "dihedral":
        return dihedral(n)
    raise GroupError(f"unknown group kind {kind!r}")


def make_group(kind, tables: dict | None = None) -> FiniteGroup:
    """Build a group from a descriptor such as ``"cyclic:3"``, ``"sym:3"``,
    ``"dihedral:4"``, ``"table:name"`` (looked up in ``tables``) or a
    ``(kind, n)`` tuple. Built-in groups are cached and shared."""
    if isinstance(kind, str):
        head, _, arg = kind.partition(":")
        head = head.strip()
        if head == "table":
            if not tables or arg not in tables:
                raise GroupError(f"no inline table named {arg!r}")
            return from_table(tables[arg], name=arg)
        if head in ("cyclic", "sym", "dihedral"):
            try:
                n = int(arg)
            except ValueError:
                raise GroupError(f"bad group descriptor {kind!r}") from None
            return _cached(head, n)
        raise GroupError(f"unknown group kind {kind!r}")
    head, n = kind
    return _cached(head, int(n))


def descriptor_of(G: FiniteGroup) -> str:
    for kind, prefix in (("cyclic", "Z/"), ("sym", "S"), ("dihedral", "D")):
        if G.name.startswith(prefix):
            try:
                n = int(G.name[len(prefix):])
            except ValueError:
                continue
            try:
                same = _cached(kind, n).mult == G.mult
            except GroupError:
                continue
            if same:
                return f"{kind}:{n}"
    return f"table:{G.name}"


# -- embeddings and quotients -----------------------------------------------

@dataclass(frozen=True)
class EmbeddingMap:
    source: FiniteGroup
    target: FiniteGroup
    images: tuple

    def __post_init__(self):
        A, G, im = self.source, self.target, self.images
        if len(im) != A.order:
            raise GroupError("embedding needs one image per source element")
        if im[0] != 0:
            raise GroupError("embedding must send identity to identity")
        if len(set(im)) != len(im):
            raise GroupError("embedding is not injective")
        for a in range(A.order):
            for b in range(A.order):
                if im[A.mult[a][b]] != G.mult[im[a]][im[b]]:
                    raise GroupError(f"embedding is not a homomorphism at ({a}, {b})")

    @property
    def image(self) -> frozenset:
        return frozenset(self.images)

    def is_normal(self) -> bool:
        return self.target.is_normal(self.image)

    def preimage(self) -> dict:
        return {g: a for a, g in enumerate(self.images)}


def embedding_from_generator(A: FiniteGroup, G: FiniteGroup, gen_images: dict) -> EmbeddingMap:
    """Extend ``gen_images`` (source element -> target element) to a homomorphism
    by closure; raises if inconsistent."""
    images = {0: 0}
    frontier = [0]
    gens = list(gen_images.items())
    while frontier:
        nxt = []
        for a in frontier:
            for s, t in gens:
                b = A.mult[a][s]
                c = G.mult[images[a]][t]
                if b in images:
                    if images[b] != c:
                        raise GroupError("generator images do not define a homomorphism")
                else:
                    images[b] = c
                    nxt.append(b)
        frontier = nxt
    if len(images) != A.order:
        raise GroupError("generator images do not cover the source group")
    return EmbeddingMap(A, G, tuple(images[a] for a in range(A.order)))


def central_embedding(A: FiniteGroup, G: FiniteGroup) -> EmbeddingMap:
    """Embed a cyclic group A into the centre of G (first element of the right order)."""
    n = A.order
    z = G.center()
    for g in sorted(z):
        if G.element_order(g) == n:
            return embedding_from_generator(A, G, {1 % n: g})
    raise GroupError(f"{G.name} has no central element of order {n}")


@dataclass(frozen=True)
class QuotientMap:
    source: FiniteGroup
    target: FiniteGroup
    images: tuple
    kernel: frozenset

    def __call__(self, g: int) -> int:
        return self.images[g]


def quotient_group(G: FiniteGroup, N: Iterable[int]) -> tuple:
    """G/N with cosets numbered by their minimal element (identity coset 0)."""
    N = frozenset(N)
    if not G.is_subgroup(N):
        raise GroupError("kernel is not a subgroup")
    for g in range(G.order):
        for x in sorted(N):
            y = G.conj(g, x)
            if y not in N:
                raise GroupError(f"not normal: {g} * {x} * {g}^-1 = {y} escapes the subgroup")
    reps = sorted({min(G.left_coset(g, N)) for g in range(G.order)})
    rep_index = {r: k for k, r in enumerate(reps)}
    images = tuple(rep_index[min(G.left_coset(g, N))] for g in range(G.order))
    mult = [[images[G.mult[r][s]] for s in reps] for r in reps]
    Q = FiniteGroup(mult, name=f"{G.name}/{len(N)}", validate=False)
    return Q, QuotientMap(G, Q, images, N)


# -- double cosets and invariants -------------------------------------------

def double_cosets(G: FiniteGroup, S: Iterable[int], T: Iterable[int]) -> list:
    """Partition of G into double cosets S g T, each as a sorted tuple, ordered
    by minimal element."""
    S = tuple(S.elements if isinstance(S, Subgroup) else S)
    T = tuple(T.elements if isinstance(T, Subgroup) else T)
    seen = set()
    blocks = []
    for g in range(G.order):
        if g in seen:
            continue
        block = {G.mult[G.mult[s][g]][t] for s in S for t in T}
        seen |= block
        blocks.append(tuple(sorted(block)))
    return blocks


def double_coset_rep(G: FiniteGroup, S: frozenset, T: frozenset, g: int) -> int:
    return min(G.mult[G.mult[s][g]][t] for s in S for t in T)


def a3_theta(G: FiniteGroup):
    """``(a3, theta)``: least order of a subgroup of order >= 3 and
    ``a3/(a3-2)``; ``(INFINITY, 1)`` when every subgroup has order <= 2."""
    best = None
    n = G.order
    shortlist = []
    for g in range(1, n):
        o = G.element_order(g)
        if o >= 3:
            best = o if best is None else min(best, o)
        elif o == 2:
            shortlist.append(g)
    # an elementary abelian 2-subgroup of order 4 needs two commuting involutions
    for i, a in enumerate(shortlist):
        for b in shortlist[i + 1:]:
            order = len(G.closure((a, b)))
            if order >= 3:
                best = order if best is None else min(best, order)
    if best is None:
        return INFINITY, Fraction(1)
    return best, Fraction(best, best - 2)


def theta_of(a3) -> Fraction:
    if a3 is INFINITY:
        return Fraction(1)
    return Fraction(a3, a3 - 2)


def conjugacy_class_key(G: FiniteGroup, s: frozenset) -> tuple:
    """Frame-independent label for a subgroup: its minimal conjugate."""
    return min(tuple(sorted(G.conj_set(g, s))) for g in range(G.order))
