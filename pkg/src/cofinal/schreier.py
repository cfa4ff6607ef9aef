"""Schreier transversals and Reidemeister-Schreier rewriting."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .cosets import DEFAULT_MAX_DEGREE, CosetTable, _bfs_table
from .errors import InputError
from .homology import HomologySummary
from .presentations import FinitePresentation, Word, tietze_reduce


@dataclass(frozen=True)
class Transversal:
    """Prefix-closed coset representatives; ``tree[c]`` is ``(parent, letter)``."""

    representatives: tuple[Word, ...]
    tree: tuple[tuple[int, tuple[int, int]] | None, ...]

    def __len__(self):
        return len(self.representatives)

    def __getitem__(self, c: int) -> Word:
        return self.representatives[c]


def schreier_transversal(H: CosetTable, letter_order: Sequence[tuple[int, int]] | None = None) -> Transversal:
    """Breadth-first Schreier transversal.

    Letters are tried in ``letter_order`` (default: every generator, then
    every inverse), so the result is deterministic.
    """
    order = list(letter_order) if letter_order is not None else H.letters()
    n = H.degree
    reps: list[Word | None] = [None] * n
    tree: list = [None] * n
    reps[0] = Word()
    queue = deque([0])
    while queue:
        c = queue.popleft()
        for g, s in order:
            d = H.step(c, g, s)
            if reps[d] is None:
                reps[d] = Word(reps[c].letters + ((g, s),))
                tree[d] = (c, (g, s))
                queue.append(d)
    if any(r is None for r in reps):
        raise InputError("letter order does not reach every coset")
    return Transversal(tuple(reps), tuple(tree))


@dataclass(frozen=True, eq=False)
class ReidemeisterSchreier:
    """A rewritten subgroup presentation together with its bookkeeping.

    ``edges[i] = (c, g)`` is the Schreier generator ``t_c g t_{c.g}^-1``
    that became subgroup generator ``i``; ``edge_index`` inverts that.
    """

    parent: FinitePresentation
    table: CosetTable
    transversal: Transversal
    edges: tuple[tuple[int, int], ...]
    edge_index: dict
    presentation: FinitePresentation

    @cached_property
    def generator_words(self) -> tuple[Word, ...]:
        t = self.transversal
        H = self.table
        return tuple(t[c] * Word(((g, 1),)) * t[H.action[g][c]].inverse() for c, g in self.edges)

    def rewrite(self, w: Word, start: int = 0) -> tuple[Word, int]:
        """Rewrite ``w`` read from coset ``start``; returns ``(word, end_coset)``."""
        return _rewrite(self.table, self.edge_index, w, start)

    def rewrite_element(self, w: Word) -> Word:
        """Express an element of the subgroup in the subgroup generators."""
        out, end = self.rewrite(w)
        if end != 0:
            raise InputError("word is not in the subgroup")
        return out


def _rewrite(H: CosetTable, edge_index: dict, w: Word, start: int) -> tuple[Word, int]:
    c = start
    out = []
    for g, s in w.letters:
        if s > 0:
            i = edge_index.get((c, g))
            c = H.action[g][c]
        else:
            c = H.inverse_action[g][c]
            i = edge_index.get((c, g))
        if i is not None:
            out.append((i, s))
    return Word(tuple(out)), c


def reidemeister_schreier(P: FinitePresentation, H: CosetTable,
                          transversal: Transversal | None = None) -> ReidemeisterSchreier:
    if H.parent != P:
        raise InputError("table does not act on this presentation")
    if transversal is None:
        transversal = schreier_transversal(H)
    tree_edges = set()
    for d, link in enumerate(transversal.tree):
        if link is None:
            continue
        c, (g, s) = link
        tree_edges.add((c, g) if s > 0 else (d, g))
    edges = tuple((c, g) for c in range(H.degree) for g in range(P.num_generators)
                  if (c, g) not in tree_edges)
    edge_index = {e: i for i, e in enumerate(edges)}
    relators = []
    for c in range(H.degree):
        for rel in P.relators:
            w, end = _rewrite(H, edge_index, rel, c)
            assert end == c, "relator does not act trivially"
            relators.append(w)
    family = "free" if P.is_free else P.family
    names = tuple(f"x{i}" for i in range(len(edges)))
    pres = FinitePresentation(len(edges), tuple(relators), names, family)
    return ReidemeisterSchreier(P, H, transversal, edges, edge_index, pres)


def rewrite_presentation(P: FinitePresentation, H: CosetTable) -> FinitePresentation:
    return reidemeister_schreier(P, H).presentation


def schreier_generators(H: CosetTable) -> tuple[Word, ...]:
    return reidemeister_schreier(H.parent, H).generator_words


def induce_table(rs: ReidemeisterSchreier, inner: CosetTable,
                 max_degree: int = DEFAULT_MAX_DEGREE) -> CosetTable:
    """Pull a subgroup ``K`` of ``H`` (given over ``rs.presentation``) back to the parent.

    Cosets of ``K`` in the parent are pairs ``(c, v)`` with ``c`` a coset of
    ``H`` and ``v`` a coset of ``K`` in ``H``; generator ``x`` sends ``(c, v)``
    to ``(c.x, v.s_{c,x})``.
    """
    if inner.parent != rs.presentation:
        raise InputError("inner table must act on the rewritten presentation")
    H, idx, act = rs.table, rs.edge_index, inner.action

    def step(pt, g, s):
        c, v = pt
        i = idx.get((c, g))
        return H.action[g][c], (v if i is None else act[i][v])

    return _bfs_table(rs.parent, (0, 0), step, max_degree, "induced table")


def rs_rank_bound(d_G: int, n: int) -> int:
    """Reidemeister-Schreier bound ``n (d_G - 1) + 1`` on the rank of an index-``n`` subgroup."""
    if d_G < 1 or n < 1:
        raise InputError("rank and index must be positive")
    return n * (d_G - 1) + 1


def rank_interval(P_sub: FinitePresentation, hom: HomologySummary) -> tuple[int, int]:
    """``(b_1, generators after Tietze reduction)``, bracketing the rank."""
    lower = hom.b1
    upper = tietze_reduce(P_sub).num_generators
    if lower > upper:
        raise AssertionError(f"rank interval inverted ({lower} > {upper}): homology or rewriting bug")
    return lower, upper
