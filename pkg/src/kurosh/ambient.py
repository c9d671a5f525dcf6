"""Ambient groups ``G_1 * ... * G_n * F_r`` and ``(*_A G_i) * F_r`` with
canonical normal forms.

A word is a tuple of letters:

* ``("f", i, t)``  element ``t`` of factor ``i`` (0-based factor index),
* ``("x", j, s)``  free generator ``j`` with sign ``s`` in {+1, -1},
* ``("a", k)``     element ``k`` of the amalgam A (amalgamated setting only).

In normal form every block of factor letters between free letters is
``[("a", k)] f f ... f`` with an optional nontrivial A-head, alternating factor
indices and every factor element the minimal representative of its coset of
the image of A. Free runs are freely reduced. The plain setting is treated as
the amalgamated one with A trivial, so the same code serves both.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .finite import EmbeddingMap, FiniteGroup, GroupError, cyclic, descriptor_of

PLAIN = "plain"
AMALGAMATED = "amalgamated"

Word = tuple


class WordError(ValueError):
    pass


_TRIVIAL = cyclic(1)


@dataclass(eq=False)
class AmbientSpec:
    setting: str
    factors: list
    free_rank: int = 0
    amalgam: FiniteGroup | None = None
    embeddings: list = field(default_factory=list)

    def __post_init__(self):
        if self.setting not in (PLAIN, AMALGAMATED):
            raise GroupError(f"unknown setting {self.setting!r}")
        if self.free_rank < 0:
            raise GroupError("free rank must be non-negative")
        if not self.factors and self.free_rank < 1:
            raise GroupError("need at least one factor or one free generator")
        if self.setting == PLAIN:
            if self.amalgam is not None or self.embeddings:
                raise GroupError("plain setting takes no amalgam")
            for G in self.factors:
                if G.order < 2:
                    raise GroupError("factors must be nontrivial")
            self.A = _TRIVIAL
            self.embeddings = []
            self._img = [(0,) for _ in self.factors]
        else:
            if self.amalgam is None or not self.factors:
                raise GroupError("amalgamated setting needs an amalgam and at least one factor")
            if len(self.embeddings) != len(self.factors):
                raise GroupError("one embedding per factor required")
            for k, (G, emb) in enumerate(zip(self.factors, self.embeddings)):
                if not isinstance(emb, EmbeddingMap):
                    emb = EmbeddingMap(self.amalgam, G, tuple(emb))
                    self.embeddings[k] = emb
                if emb.source is not self.amalgam and emb.source.mult != self.amalgam.mult:
                    raise GroupError("embedding source differs from the amalgam")
                if emb.target is not G and emb.target.mult != G.mult:
                    raise GroupError("embedding target differs from its factor")
                if not emb.is_normal():
                    raise GroupError(f"image of A is not normal in factor {k + 1}")
            self.A = self.amalgam
            self._img = [tuple(e.images) for e in self.embeddings]
        self._build_tables()

    def _build_tables(self):
        A = self.A
        self.img = self._img
        self.img_set = [frozenset(im) for im in self._img]
        self.pre = [{g: a for a, g in enumerate(im)} for im in self._img]
        self.rep = []
        self.split = []
        self.push = []
        for i, G in enumerate(self.factors):
            im, pre = self._img[i], self.pre[i]
            rep = [min(G.mult[g][x] for x in im) for g in range(G.order)]
            # g = img(a) * t  with t = rep(g)
            split = [(pre[G.mult[g][G.inv[rep[g]]]], rep[g]) for g in range(G.order)]
            # t * img(a) = img(push[t][a]) * t
            push = [tuple(pre[G.conj(t, im[a])] for a in range(A.order)) for t in range(G.order)]
            self.rep.append(tuple(rep))
            self.split.append(tuple(split))
            self.push.append(tuple(push))

    # -- structural identity ----------------------------------------------
    def key(self):
        return (self.setting, tuple(G.mult for G in self.factors), self.free_rank,
                self.A.mult, tuple(self._img))

    def __eq__(self, other):
        return isinstance(other, AmbientSpec) and (self is other or self.key() == other.key())

    def __hash__(self):
        return hash((self.setting, len(self.factors), self.free_rank, self.A.order))

    @property
    def n_factors(self):
        return len(self.factors)

    def describe(self) -> str:
        parts = [descriptor_of(G) for G in self.factors]
        if self.free_rank:
            parts.append(f"F{self.free_rank}")
        if self.setting == AMALGAMATED:
            return f"amalgamated over {descriptor_of(self.A)}: " + " * ".join(parts)
        return " * ".join(parts)

    def alphabet(self) -> list:
        """All single letters: nonidentity factor representatives, free letters
        and nonidentity amalgam elements."""
        out = []
        for i, G in enumerate(self.factors):
            for t in sorted(set(self.rep[i])):
                if t:
                    out.append(("f", i, t))
        for j in range(self.free_rank):
            out.append(("x", j, 1))
            out.append(("x", j, -1))
        for k in range(1, self.A.order):
            out.append(("a", k))
        return out


def plain(factors: Sequence[FiniteGroup], free_rank: int = 0) -> AmbientSpec:
    return AmbientSpec(PLAIN, list(factors), free_rank)


def amalgamated(factors: Sequence[FiniteGroup], A: FiniteGroup, embeddings, free_rank: int = 0) -> AmbientSpec:
    return AmbientSpec(AMALGAMATED, list(factors), free_rank, A, list(embeddings))


# -- normal forms -----------------------------------------------------------

def _check_letter(spec: AmbientSpec, letter):
    kind = letter[0]
    if kind == "f":
        _, i, g = letter
        if not 0 <= i < len(spec.factors):
            raise WordError(f"factor index {i + 1} out of range")
        if not 0 <= g < spec.factors[i].order:
            raise WordError(f"element {g} out of range for factor {i + 1}")
    elif kind == "x":
        _, j, s = letter
        if not 0 <= j < spec.free_rank:
            raise WordError(f"free generator {j + 1} out of range")
        if s not in (1, -1):
            raise WordError("free letter sign must be +1 or -1")
    elif kind == "a":
        if spec.setting != AMALGAMATED and letter[1] != 0:
            raise WordError("amalgam letters only exist in the amalgamated setting")
        if not 0 <= letter[1] < spec.A.order:
            raise WordError(f"amalgam element {letter[1]} out of range")
    else:
        raise WordError(f"unknown letter {letter!r}")


def _push_a(spec: AmbientSpec, out: list, a: int):
    """Multiply the word in ``out`` on the right by amalgam element ``a``."""
    if a == 0:
        return
    idx = len(out) - 1
    while idx >= 0 and out[idx][0] == "f":
        _, i, t = out[idx]
        a = spec.push[i][t][a]
        idx -= 1
    if idx >= 0 and out[idx][0] == "a":
        h = spec.A.mult[out[idx][1]][a]
        if h == 0:
            del out[idx]
        else:
            out[idx] = ("a", h)
    else:
        out.insert(idx + 1, ("a", a))


def _append(spec: AmbientSpec, out: list, letter):
    kind = letter[0]
    if kind == "x":
        if out and out[-1][0] == "x" and out[-1][1] == letter[1] and out[-1][2] == -letter[2]:
            out.pop()
        else:
            out.append(letter)
    elif kind == "f":
        _, i, g = letter
        if g == 0:
            return
        if out and out[-1][0] == "f" and out[-1][1] == i:
            g = spec.factors[i].mult[out.pop()[2]][g]
        a, t = spec.split[i][g]
        _push_a(spec, out, a)
        if t:
            out.append(("f", i, t))
    else:
        _push_a(spec, out, letter[1])


def normalize(spec: AmbientSpec, letters: Iterable, check: bool = True) -> Word:
    out = []
    for letter in letters:
        if check:
            _check_letter(spec, letter)
        _append(spec, out, letter)
    return tuple(out)


def multiply(spec: AmbientSpec, u: Word, v: Word, check: bool = False) -> Word:
    """With ``check``, both factors must be normal forms of ``spec`` (catches
    words that belong to a different ambient group)."""
    if check:
        for w in (u, v):
            if not is_normal_form(spec, w):
                raise WordError(f"{format_word(w)} is not a normal form of {spec.describe()}")
    out = list(u)
    for letter in v:
        _append(spec, out, letter)
    return tuple(out)


def product(spec: AmbientSpec, *words: Word) -> Word:
    out = []
    for w in words:
        for letter in w:
            _append(spec, out, letter)
    return tuple(out)


def inverse_letters(spec: AmbientSpec, u: Iterable) -> list:
    res = []
    for letter in reversed(tuple(u)):
        kind = letter[0]
        if kind == "x":
            res.append(("x", letter[1], -letter[2]))
        elif kind == "f":
            res.append(("f", letter[1], spec.factors[letter[1]].inv[letter[2]]))
        else:
            res.append(("a", spec.A.inv[letter[1]]))
    return res


def invert(spec: AmbientSpec, u: Word) -> Word:
    return normalize(spec, inverse_letters(spec, u), check=False)


def conjugate(spec: AmbientSpec, g: Word, u: Word) -> Word:
    """g u g^-1"""
    return product(spec, g, u, invert(spec, g))


def syllable_length(u: Word) -> int:
    return len(u)


def is_normal_form(spec: AmbientSpec, u: Word) -> bool:
    return normalize(spec, u) == tuple(u)


def random_word(spec: AmbientSpec, max_syllables: int, seed=None, rng: random.Random | None = None) -> Word:
    """Pseudo-random nontrivial normal form with at most ``max_syllables`` syllables."""
    if rng is None:
        rng = random.Random(seed)
    slots = [("f", i) for i in range(len(spec.factors))] + [("x", j) for j in range(spec.free_rank)]
    while True:
        n = rng.randint(1, max(1, max_syllables))
        raw = []
        last = None
        for _ in range(n):
            options = [s for s in slots if s != last or s[0] == "x"]
            if not options:
                break
            kind, idx = rng.choice(options)
            if kind == "f":
                raw.append(("f", idx, rng.randrange(1, spec.factors[idx].order)))
            else:
                s = rng.choice((1, -1))
                if raw and raw[-1] == ("x", idx, -s):
                    s = -s
                raw.append(("x", idx, s))
            last = (kind, idx)
        if spec.setting == AMALGAMATED and rng.random() < 0.3:
            raw.insert(rng.randrange(len(raw) + 1), ("a", rng.randrange(spec.A.order)))
        w = normalize(spec, raw, check=False)
        if w and len(w) <= max_syllables:
            return w


def all_words(spec: AmbientSpec, max_len: int, cap: int | None = None) -> list:
    """Every normal form of syllable length <= max_len (breadth first).
    Stops early (returning what it has) once ``cap`` words are produced."""
    alphabet = spec.alphabet()
    words = [()]
    seen = {()}
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for letter in alphabet:
                v = multiply(spec, w, (letter,))
                if len(v) == len(w) + 1 and v not in seen:
                    seen.add(v)
                    nxt.append(v)
        words.extend(nxt)
        frontier = nxt
        if cap is not None and len(words) > cap:
            break
    return words


def ball_size(spec: AmbientSpec, max_len: int, cap: int) -> int:
    return len(all_words(spec, max_len, cap))


# -- text form --------------------------------------------------------------

_TOKEN = re.compile(r"^(?:f(\d+):(\d+)|x(\d+)|X(\d+)|a:(\d+))$")


def parse_word(spec: AmbientSpec, text: str) -> Word:
    """Parse whitespace separated tokens ``f<i>:<k>``, ``x<j>``, ``X<j>``,
    ``a:<k>`` (1-based factor and generator indices) into a normal form.
    A lone ``1`` is the identity."""
    if text.strip() == "1":
        return ()
    letters = []
    for col, tok in _tokens(text):
        m = _TOKEN.match(tok)
        if not m:
            raise WordError(f"column {col}: bad token {tok!r}")
        fi, fk, xj, Xj, ak = m.groups()
        if fi is not None:
            letter = ("f", int(fi) - 1, int(fk))
            if int(fk) == 0:
                raise WordError(f"column {col}: factor elements are 1-based nonidentity indices")
        elif xj is not None:
            letter = ("x", int(xj) - 1, 1)
        elif Xj is not None:
            letter = ("x", int(Xj) - 1, -1)
        else:
            if spec.setting != AMALGAMATED:
                raise WordError(f"column {col}: amalgam token in plain setting")
            letter = ("a", int(ak))
            if int(ak) == 0:
                raise WordError(f"column {col}: amalgam elements are 1-based nonidentity indices")
        try:
            _check_letter(spec, letter)
        except WordError as exc:
            raise WordError(f"column {col}: {exc}") from None
        letters.append(letter)
    return normalize(spec, letters, check=False)


def _tokens(text):
    col = 0
    for piece in re.finditer(r"\S+", text):
        col = piece.start() + 1
        yield col, piece.group()


def format_word(u: Word) -> str:
    toks = []
    for letter in u:
        if letter[0] == "f":
            toks.append(f"f{letter[1] + 1}:{letter[2]}")
        elif letter[0] == "x":
            toks.append(("x" if letter[2] > 0 else "X") + str(letter[1] + 1))
        else:
            toks.append(f"a:{letter[1]}")
    return " ".join(toks) if toks else "1"
