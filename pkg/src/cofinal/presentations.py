"""Words, finite presentations, automorphisms and the standard group constructors.

Generators are indexed ``0..r-1``.  A letter is a pair ``(gen, sign)`` with
``sign`` in ``{+1, -1}``.  The text syntax uses one lowercase character per
generator and the matching uppercase character for its inverse, so
``"abAB"`` is the commutator ``a b a^-1 b^-1``.  Presentations with more
generators than fit in the alphabet fall back to space-separated tokens such
as ``x12 x3^-1``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InputError, PresentationSyntaxError, WitnessError

Letter = tuple[int, int]

_ALPHABET = string.ascii_lowercase


def _reduce_letters(letters: Iterable[Letter], num_generators: int | None = None) -> tuple[Letter, ...]:
    out: list[Letter] = []
    for gen, sign in letters:
        if sign not in (1, -1):
            raise InputError(f"letter sign must be +1 or -1, got {sign!r}")
        if gen < 0 or (num_generators is not None and gen >= num_generators):
            raise InputError(f"generator index {gen} out of range for {num_generators} generators")
        if out and out[-1][0] == gen and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((gen, sign))
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """A freely reduced word.  Build through :func:`free_reduce` or :meth:`parse`."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        # cheap guard; the constructors always reduce
        object.__setattr__(self, "letters", _reduce_letters(self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        return Word(self.letters * n)

    def inverse(self) -> "Word":
        return Word(tuple((g, -s) for g, s in reversed(self.letters)))

    def max_generator(self) -> int:
        return max((g for g, _ in self.letters), default=-1)

    def exponent_sum(self, gen: int) -> int:
        return sum(s for g, s in self.letters if g == gen)

    def cyclically_reduced(self) -> "Word":
        letters = self.letters
        lo, hi = 0, len(letters)
        while hi - lo >= 2 and letters[lo][0] == letters[hi - 1][0] and letters[lo][1] == -letters[hi - 1][1]:
            lo += 1
            hi -= 1
        return Word(letters[lo:hi])

    def format(self, names: Sequence[str] | None = None) -> str:
        return format_word(self, names)

    def __str__(self) -> str:
        return format_word(self)

    @classmethod
    def parse(cls, text: str, names: Sequence[str] | None = None) -> "Word":
        return parse_word(text, names)


def free_reduce(letters: Iterable[Letter], num_generators: int | None = None) -> Word:
    """Return the freely reduced word spelled by ``letters``.

    Raises :class:`InputError` if a generator index is negative or not below
    ``num_generators`` (when given).
    """
    return Word(_reduce_letters(letters, num_generators))


def commutator(x: Word, y: Word) -> Word:
    return x * y * x.inverse() * y.inverse()


def default_names(r: int) -> tuple[str, ...]:
    if r <= len(_ALPHABET):
        return tuple(_ALPHABET[:r])
    return tuple(f"x{i}" for i in range(r))


def _single_char(names: Sequence[str]) -> bool:
    return all(len(n) == 1 and n.islower() for n in names)


def format_word(w: Word, names: Sequence[str] | None = None) -> str:
    if names is None:
        names = default_names(w.max_generator() + 1)
    if _single_char(names):
        return "".join(names[g] if s > 0 else names[g].upper() for g, s in w.letters)
    return " ".join(names[g] if s > 0 else f"{names[g]}^-1" for g, s in w.letters)


def parse_word(text: str, names: Sequence[str] | None = None) -> Word:
    """Parse a word written in the lowercase/uppercase syntax (or tokens)."""
    text = text.strip()
    if names is None:
        names = _ALPHABET
    letters: list[Letter] = []
    if _single_char(names):
        index = {n: i for i, n in enumerate(names)}
        for ch in text:
            if ch.isspace() or ch == "1":
                continue
            if ch in index:
                letters.append((index[ch], 1))
            elif ch.lower() in index and ch.isupper():
                letters.append((index[ch.lower()], -1))
            else:
                raise InputError(f"unknown letter {ch!r}")
    else:
        index = {n: i for i, n in enumerate(names)}
        for tok in text.split():
            sign = 1
            if tok.endswith("^-1"):
                tok, sign = tok[:-3], -1
            if tok not in index:
                raise InputError(f"unknown generator {tok!r}")
            letters.append((index[tok], sign))
    return free_reduce(letters)


@dataclass(frozen=True)
class FinitePresentation:
    """``<x_0..x_{r-1} | relators>``.

    ``family`` records what the constructor knows about the group: ``"free"``
    for free groups (including punctured surfaces) and ``"surface"`` for
    closed orientable surface groups.  Finite-index subgroups inherit it.
    """

    num_generators: int
    relators: tuple[Word, ...] = ()
    names: tuple[str, ...] = ()
    family: str | None = None

    def __post_init__(self):
        if self.num_generators < 0:
            raise InputError("generator count must be non-negative")
        rels = []
        for rel in self.relators:
            if not isinstance(rel, Word):
                rel = free_reduce(rel, self.num_generators)
            elif rel.max_generator() >= self.num_generators:
                raise InputError(f"relator {rel} uses a generator beyond {self.num_generators}")
            if rel:
                rels.append(rel)
        object.__setattr__(self, "relators", tuple(rels))
        if not self.names:
            object.__setattr__(self, "names", default_names(self.num_generators))
        elif len(self.names) != self.num_generators:
            raise InputError("one name per generator required")

    @property
    def is_free(self) -> bool:
        return not self.relators

    @property
    def is_noncyclic_free(self) -> bool:
        return not self.relators and self.num_generators >= 2

    @property
    def is_trivial(self) -> bool:
        return self.num_generators == 0

    def generator(self, j: int) -> Word:
        return Word(((j, 1),))

    def word(self, text: str) -> Word:
        w = parse_word(text, self.names)
        if w.max_generator() >= self.num_generators:
            raise InputError(f"word {text!r} uses an unknown generator")
        return w

    def format_word(self, w: Word) -> str:
        return format_word(w, self.names)

    def to_text(self) -> str:
        lines = ["gens: " + " ".join(self.names)]
        lines += ["rel: " + self.format_word(r) for r in self.relators]
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        rels = ", ".join(self.format_word(r) for r in self.relators)
        return f"<{', '.join(self.names)} | {rels}>"


def parse_presentation(text: str) -> FinitePresentation:
    """Parse the ``gens:`` / ``rel:`` text format.

    Blank lines and ``#`` comments are ignored.  Errors carry the 1-based line
    number of the offending line.
    """
    names: list[str] | None = None
    relators: list[Word] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep:
            raise PresentationSyntaxError(f"expected 'gens:' or 'rel:', got {raw!r}", lineno)
        if key == "gens":
            if names is not None:
                raise PresentationSyntaxError("duplicate 'gens:' line", lineno)
            names = rest.split()
            if len(set(names)) != len(names):
                raise PresentationSyntaxError("repeated generator name", lineno)
            for n in names:
                if not (n.isalnum() and n[0].islower()):
                    raise PresentationSyntaxError(f"bad generator name {n!r}", lineno)
        elif key == "rel":
            if names is None:
                raise PresentationSyntaxError("'rel:' before 'gens:'", lineno)
            try:
                relators.append(parse_word(rest, names))
            except InputError as exc:
                raise PresentationSyntaxError(str(exc), lineno) from None
        else:
            raise PresentationSyntaxError(f"unknown key {key!r}", lineno)
    if names is None:
        raise PresentationSyntaxError("missing 'gens:' line")
    return FinitePresentation(len(names), tuple(relators), tuple(names))


def mk_free_group(r: int) -> FinitePresentation:
    """Free group of rank ``r >= 1``.  Rank 1 is cyclic; see ``is_noncyclic_free``."""
    if r < 1:
        raise InputError("free group rank must be at least 1")
    return FinitePresentation(r, (), family="free")


def mk_surface_group(genus: int, punctures: int = 0) -> FinitePresentation:
    """Fundamental group of the orientable surface of given genus and punctures.

    Closed surfaces get the one-relator presentation ``[a1,b1]...[ag,bg]``;
    punctured surfaces are free of rank ``2g + p - 1``.  The sphere and the
    disk come back as the trivial presentation on zero generators.
    """
    if genus < 0 or punctures < 0:
        raise InputError("genus and punctures must be non-negative")
    if punctures > 0:
        return FinitePresentation(2 * genus + punctures - 1, (), family="free")
    rel = Word()
    for i in range(genus):
        rel = rel * commutator(Word(((2 * i, 1),)), Word(((2 * i + 1, 1),)))
    return FinitePresentation(2 * genus, (rel,) if genus else (), family="surface")


def _abelian_matrix(words: Sequence[Word], r: int) -> list[list[int]]:
    return [[w.exponent_sum(j) for j in range(r)] for w in words]


def _matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def _substitute(images: Sequence[Word], w: Word) -> Word:
    letters: list[Letter] = []
    for g, s in w.letters:
        img = images[g].letters
        letters.extend(img if s > 0 else ((h, -t) for h, t in reversed(img)))
    return free_reduce(letters)


@dataclass(frozen=True)
class GroupAutomorphism:
    """An automorphism of ``domain`` given by generator images and their inverses.

    ``verification`` is ``"exact"`` when invertibility was checked by free
    reduction (free groups) and ``"abelianized"`` when only the induced map
    on ``H_1`` was checked, which is all we can do without a word-problem
    solver.
    """

    domain: FinitePresentation
    images: tuple[Word, ...]
    inverse_images: tuple[Word, ...]
    verification: str = field(default="unchecked", compare=False)

    def __post_init__(self):
        r = self.domain.num_generators
        if len(self.images) != r or len(self.inverse_images) != r:
            raise InputError(f"automorphism needs {r} images and {r} inverse images")

    def __call__(self, w: Word) -> Word:
        return _substitute(self.images, w)

    def inverse(self) -> "GroupAutomorphism":
        return GroupAutomorphism(self.domain, self.inverse_images, self.images, self.verification)

    def abelianized(self) -> list[list[int]]:
        """Matrix whose column ``j`` is the image of generator ``j`` in ``Z^r``."""
        r = self.domain.num_generators
        return [list(col) for col in zip(*_abelian_matrix(self.images, r))] if r else []

    def power(self, e: int) -> "GroupAutomorphism":
        base = self if e >= 0 else self.inverse()
        out = identity_automorphism(self.domain)
        for _ in range(abs(e)):
            out = compose(base, out)
        return out


def identity_automorphism(G: FinitePresentation) -> GroupAutomorphism:
    gens = tuple(G.generator(j) for j in range(G.num_generators))
    return GroupAutomorphism(G, gens, gens, "exact")


def apply_automorphism(phi: GroupAutomorphism, w: Word) -> Word:
    return _substitute(phi.images, w)


def compose(phi: GroupAutomorphism, psi: GroupAutomorphism) -> GroupAutomorphism:
    """``phi o psi``: first ``psi``, then ``phi``."""
    images = tuple(_substitute(phi.images, w) for w in psi.images)
    inv = tuple(_substitute(psi.inverse_images, w) for w in phi.inverse_images)
    order = ("exact", "abelianized", "unchecked")
    level = max(phi.verification, psi.verification, key=order.index)
    return GroupAutomorphism(phi.domain, images, inv, level)


def make_automorphism(G: FinitePresentation, images: Sequence[Word | str],
                      inverse_images: Sequence[Word | str]) -> GroupAutomorphism:
    """Build and validate an automorphism of ``G``.

    On free groups the two substitutions are checked to be mutually inverse
    exactly.  With relators present only the abelianized matrices are
    checked to be inverse, together with each relator's image abelianizing
    to zero when the relators themselves do (the surface-group case).
    """
    imgs = tuple(G.word(w) if isinstance(w, str) else w for w in images)
    inv = tuple(G.word(w) if isinstance(w, str) else w for w in inverse_images)
    phi = GroupAutomorphism(G, imgs, inv)
    r = G.num_generators
    for w in imgs + inv:
        if w.max_generator() >= r:
            raise WitnessError(f"image {w} uses a generator outside the domain")
    if G.is_free:
        for j in range(r):
            g = G.generator(j)
            if _substitute(imgs, _substitute(inv, g)) != g or _substitute(inv, _substitute(imgs, g)) != g:
                raise WitnessError(f"images are not mutually inverse on generator {G.names[j]}")
        return GroupAutomorphism(G, imgs, inv, "exact")
    a = phi.abelianized()
    b = phi.inverse().abelianized()
    ident = [[int(i == j) for j in range(r)] for i in range(r)]
    if _matmul(a, b) != ident or _matmul(b, a) != ident:
        raise WitnessError("abelianized images are not mutually inverse")
    rel_rows = _abelian_matrix(G.relators, r)
    if all(not any(row) for row in rel_rows):
        for rel in G.relators:
            for sub in (imgs, inv):
                if any(_substitute(sub, rel).exponent_sum(j) for j in range(r)):
                    raise WitnessError(f"relator {G.format_word(rel)} does not map into the relator subgroup")
    return GroupAutomorphism(G, imgs, inv, "abelianized")


def _fresh_name(names: Sequence[str]) -> str:
    for cand in "tsuvwxyz" + _ALPHABET:
        if cand not in names:
            return cand
    return f"x{len(names)}"


def mk_semidirect_Z(G: FinitePresentation, phi: GroupAutomorphism) -> FinitePresentation:
    """Mapping-torus presentation ``Z x|_phi G``.

    Generators are those of ``G`` followed by the stable letter ``t``; the
    extra relators are ``t g_j t^-1 phi(g_j)^-1``.
    """
    r = G.num_generators
    if len(phi.images) != r:
        raise InputError(f"automorphism has {len(phi.images)} images, presentation has {r} generators")
    t = Word(((r, 1),))
    rels = list(G.relators)
    for j in range(r):
        g = G.generator(j)
        rels.append(t * g * t.inverse() * phi.images[j].inverse())
    names = G.names + (_fresh_name(G.names),)
    return FinitePresentation(r + 1, tuple(rels), names)


def _eliminate(rel: Word, gen: int) -> Word | None:
    """If ``gen`` occurs exactly once in cyclic ``rel``, solve for it."""
    hits = [i for i, (g, _) in enumerate(rel.letters) if g == gen]
    if len(hits) != 1:
        return None
    i = hits[0]
    letters = rel.letters[i:] + rel.letters[:i]
    rest = Word(letters[1:])
    # x rest = 1  =>  x = rest^-1 ;  x^-1 rest = 1  =>  x = rest
    return rest.inverse() if letters[0][1] > 0 else rest


def tietze_reduce(P: FinitePresentation) -> FinitePresentation:
    """Eliminate generators that occur exactly once in some relator.

    Relators are kept cyclically reduced and empty ones dropped.  Each step
    picks the shortest relator offering such a generator (lowest generator
    index on ties), solves for it, substitutes everywhere and deletes both.
    Only the generator count is guaranteed to shrink; the result presents an
    isomorphic group.
    """
    r = P.num_generators
    names = list(P.names)
    alive = list(range(r))
    rels = [w.cyclically_reduced() for w in P.relators]
    rels = [w for w in rels if w]
    images: dict[int, Word] = {}
    while True:
        best = None
        for ri, rel in enumerate(rels):
            if best is not None and len(rel) >= len(rels[best[0]]):
                continue
            counts: dict[int, int] = {}
            for g, _ in rel.letters:
                counts[g] = counts.get(g, 0) + 1
            singles = [g for g, c in counts.items() if c == 1]
            if singles:
                best = (ri, min(singles))
        if best is None:
            break
        ri, gen = best
        sol = _eliminate(rels[ri], gen)
        del rels[ri]
        images[gen] = sol
        subst = [Word(((g, 1),)) for g in range(r)]
        subst[gen] = sol
        rels = [_substitute(subst, w).cyclically_reduced() for w in rels]
        rels = [w for w in rels if w]
        alive.remove(gen)
    renumber = {g: i for i, g in enumerate(alive)}
    new_rels = tuple(Word(tuple((renumber[g], s) for g, s in w.letters)) for w in rels)
    new_names = tuple(names[g] for g in alive)
    return FinitePresentation(len(alive), new_rels, new_names, P.family)
