"""Finite-index subgroups as transitive permutation actions on right cosets.

A :class:`CosetTable` stores, for every generator ``x`` of the parent
presentation, the permutation ``c -> c.x`` of the coset indices.  The
subgroup is the stabilizer of the basepoint 0.  Points are always numbered
in breadth-first order from the basepoint along the generators, which
makes every constructor deterministic.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from math import prod
from typing import Callable, Hashable, Sequence

from .errors import InputError, InvalidQuotientError, ResourceError
from .presentations import FinitePresentation, Word

DEFAULT_MAX_DEGREE = 1_000_000
DEFAULT_MAX_IMAGE = 1_000_000


@dataclass(frozen=True, eq=False)
class CosetTable:
    parent: FinitePresentation
    action: tuple[tuple[int, ...], ...]

    @property
    def degree(self) -> int:
        return len(self.action[0]) if self.action else 1

    @cached_property
    def inverse_action(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for perm in self.action:
            inv = [0] * len(perm)
            for c, d in enumerate(perm):
                inv[d] = c
            out.append(tuple(inv))
        return tuple(out)

    def step(self, c: int, gen: int, sign: int) -> int:
        return self.action[gen][c] if sign > 0 else self.inverse_action[gen][c]

    def act(self, c: int, w: Word) -> int:
        fwd, bwd = self.action, self.inverse_action
        for g, s in w.letters:
            c = fwd[g][c] if s > 0 else bwd[g][c]
        return c

    def contains(self, w: Word) -> bool:
        return self.act(0, w) == 0

    def word_permutation(self, w: Word) -> tuple[int, ...]:
        return tuple(self.act(c, w) for c in range(self.degree))

    def letters(self) -> list[tuple[int, int]]:
        r = self.parent.num_generators
        return [(g, 1) for g in range(r)] + [(g, -1) for g in range(r)]

    def validate(self) -> "CosetTable":
        """Check bijectivity, transitivity and that relators act trivially."""
        n = self.degree
        if len(self.action) != self.parent.num_generators:
            raise InputError("one permutation per generator required")
        for perm in self.action:
            if len(perm) != n or sorted(perm) != list(range(n)):
                raise InputError("generator action is not a permutation of the points")
        seen = {0}
        queue = deque([0])
        while queue:
            c = queue.popleft()
            for g, s in self.letters():
                d = self.step(c, g, s)
                if d not in seen:
                    seen.add(d)
                    queue.append(d)
        if len(seen) != n:
            raise InputError("action is not transitive")
        for rel in self.parent.relators:
            for c in range(n):
                if self.act(c, rel) != c:
                    raise InvalidQuotientError(f"relator {self.parent.format_word(rel)} acts nontrivially")
        return self

    def to_json(self) -> dict:
        return {"degree": self.degree, "generators": list(self.parent.names),
                "action": [list(p) for p in self.action]}


def _bfs_table(parent: FinitePresentation, start: Hashable,
               step: Callable[[Hashable, int, int], Hashable], cap: int, what: str) -> CosetTable:
    """Enumerate the orbit of ``start`` under ``step`` and build the table."""
    r = parent.num_generators
    index = {start: 0}
    points = [start]
    fwd: list[list[int]] = [[] for _ in range(r)]
    i = 0
    while i < len(points):
        p = points[i]
        for g in range(r):
            q = step(p, g, 1)
            j = index.get(q)
            if j is None:
                if len(points) >= cap:
                    raise ResourceError(f"{what} exceeds the configured size", cap)
                j = index[q] = len(points)
                points.append(q)
            fwd[g].append(j)
        i += 1
    # a finite orbit closed under the generators is closed under inverses too
    return CosetTable(parent, tuple(tuple(row) for row in fwd))


def whole_group_table(P: FinitePresentation) -> CosetTable:
    return CosetTable(P, tuple((0,) for _ in range(P.num_generators)))


def table_from_permutations(P: FinitePresentation, perms: Sequence[Sequence[int]],
                            basepoint: int = 0) -> CosetTable:
    """Stabilizer of ``basepoint`` under a transitive action given by permutations.

    Points are renumbered breadth-first from the basepoint.
    """
    perms = [tuple(p) for p in perms]
    if len(perms) != P.num_generators:
        raise InputError("one permutation per generator required")
    n = len(perms[0]) if perms else 1
    table = _bfs_table(P, basepoint, lambda c, g, s: perms[g][c], n + 1, "orbit")
    if table.degree != n:
        raise InputError("action is not transitive")
    return table.validate()


@dataclass(frozen=True)
class AbelianTargetMap:
    """Homomorphism to ``Z/m_1 x ... x Z/m_s``; a modulus of 0 stands for ``Z``."""

    moduli: tuple[int, ...]
    images: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if any(m < 0 for m in self.moduli):
            raise InputError("moduli must be non-negative")
        reduced = []
        for vec in self.images:
            if len(vec) != len(self.moduli):
                raise InputError("image vectors must match the moduli")
            reduced.append(tuple(v % m if m else v for v, m in zip(vec, self.moduli)))
        object.__setattr__(self, "images", tuple(reduced))

    def add(self, u: tuple[int, ...], v: tuple[int, ...], sign: int = 1) -> tuple[int, ...]:
        return tuple((a + sign * b) % m if m else a + sign * b for a, b, m in zip(u, v, self.moduli))

    def evaluate(self, w: Word) -> tuple[int, ...]:
        acc = tuple(0 for _ in self.moduli)
        for g, s in w.letters:
            acc = self.add(acc, self.images[g], s)
        return acc

    @property
    def order(self) -> int:
        return prod(self.moduli)


def subgroup_from_abelian_quotient(P: FinitePresentation, t: AbelianTargetMap,
                                   max_degree: int = DEFAULT_MAX_DEGREE) -> CosetTable:
    """Coset table of ``ker t``; its degree is the order of the image of ``t``."""
    if len(t.images) != P.num_generators:
        raise InputError("one image per generator required")
    if any(m == 0 for m in t.moduli):
        raise InputError("all moduli must be finite")
    zero = tuple(0 for _ in t.moduli)
    for rel in P.relators:
        if t.evaluate(rel) != zero:
            raise InvalidQuotientError(f"relator {P.format_word(rel)} has nonzero image")
    table = _bfs_table(P, zero, lambda v, g, s: t.add(v, t.images[g], s), max_degree, "abelian image")
    return table.validate()


def regular_image_table(P: FinitePresentation, images: Sequence[Hashable], identity: Hashable,
                        mul: Callable[[Hashable, Hashable], Hashable],
                        max_image: int = DEFAULT_MAX_IMAGE) -> CosetTable:
    """Kernel of ``P -> <images>`` via the right regular action on the image group."""
    if len(images) != P.num_generators:
        raise InputError("one image per generator required")
    table = _bfs_table(P, identity, lambda x, g, s: mul(x, images[g]), max_image, "image group")
    return table.validate()


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    # first p, then q (right actions)
    return tuple(q[i] for i in p)


def meet(A: CosetTable, B: CosetTable, max_degree: int = DEFAULT_MAX_DEGREE) -> CosetTable:
    """Intersection ``A ∩ B``: the basepoint orbit of the product action."""
    if A.parent != B.parent:
        raise InputError("tables act on different presentations")
    fa, fb = A.action, B.action
    return _bfs_table(A.parent, (0, 0), lambda pt, g, s: (fa[g][pt[0]], fb[g][pt[1]]),
                      max_degree, "meet")


def normal_core(P: FinitePresentation, H: CosetTable, max_image: int = DEFAULT_MAX_IMAGE) -> CosetTable:
    """Kernel of the coset action of ``H``, as the regular action of its image group."""
    if P != H.parent:
        raise InputError("table does not act on this presentation")
    ident = tuple(range(H.degree))
    return _bfs_table(P, ident, lambda x, g, s: _compose(x, H.action[g]), max_image, "image group")


def contains_word(H: CosetTable, w: Word) -> bool:
    return H.contains(w)


def index(H: CosetTable) -> int:
    return H.degree


def is_normal(P: FinitePresentation, H: CosetTable) -> bool:
    """True iff ``x^-1 H x = H`` for every generator ``x``.

    ``x^-1 H x`` is the stabilizer of ``0.x``; two points have the same
    stabilizer iff sending one to the other extends to an automorphism of
    the coset graph, which a single breadth-first pass decides.
    """
    if P != H.parent:
        raise InputError("table does not act on this presentation")
    return all(_same_stabilizer(H, H.action[g][0]) for g in range(P.num_generators))


def _same_stabilizer(H: CosetTable, c: int) -> bool:
    if c == 0:
        return True
    sigma = {0: c}
    queue = deque([0])
    while queue:
        p = queue.popleft()
        for g, s in H.letters():
            p2, q2 = H.step(p, g, s), H.step(sigma[p], g, s)
            seen = sigma.get(p2)
            if seen is None:
                sigma[p2] = q2
                queue.append(p2)
            elif seen != q2:
                return False
    return len(set(sigma.values())) == H.degree


def random_words(r: int, count: int, max_len: int, seed: int = 0) -> list[Word]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(0, max_len)
        out.append(Word(tuple((rng.randrange(r), rng.choice((1, -1))) for _ in range(n))))
    return out


def tables_equivalent(A: CosetTable, B: CosetTable, samples: int = 256, seed: int = 0,
                      max_len: int = 12) -> bool:
    """Same degree and same membership on a fixed pseudo-random word sample."""
    if A.parent != B.parent or A.degree != B.degree:
        return False
    return all(A.contains(w) == B.contains(w)
               for w in random_words(A.parent.num_generators, samples, max_len, seed))
