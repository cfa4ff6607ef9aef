"""Stallings folding for finitely generated subgroups of free groups.

Only what the witness checks need: build the folded core graph of
``<w_1, ..., w_k>`` in ``F_r`` and decide membership by reading words from
the base vertex.
"""

from __future__ import annotations

from typing import Sequence

from .presentations import Word


class FoldedGraph:
    """Deterministic labelled graph representing a subgroup of ``F_r``.

    ``out[v][(g, s)]`` is the endpoint of the edge leaving ``v`` that reads
    letter ``(g, s)``.  Vertex 0 is the base.
    """

    def __init__(self, rank: int, words: Sequence[Word]):
        self.rank = rank
        self._parent: list[int] = [0]
        self._out: list[dict[tuple[int, int], int]] = [{}]
        pending: list[tuple[int, tuple[int, int], int]] = []
        for w in words:
            if not w:
                continue
            v = 0
            for pos, (g, s) in enumerate(w.letters):
                if g >= rank:
                    raise ValueError(f"generator {g} outside F_{rank}")
                u = 0 if pos == len(w) - 1 else self._new_vertex()
                pending.append((v, (g, s), u))
                v = u
        for v, letter, u in pending:
            self._add_edge(v, letter, u)
        self._compact()

    def _new_vertex(self) -> int:
        self._parent.append(len(self._parent))
        self._out.append({})
        return len(self._parent) - 1

    def _find(self, v: int) -> int:
        root = v
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[v] != root:
            self._parent[v], v = root, self._parent[v]
        return root

    def _add_edge(self, v: int, letter: tuple[int, int], u: int) -> None:
        stack = [(v, letter, u)]
        while stack:
            v, (g, s), u = stack.pop()
            v, u = self._find(v), self._find(u)
            for a, lab, b in ((v, (g, s), u), (u, (g, -s), v)):
                a, b = self._find(a), self._find(b)
                old = self._out[a].get(lab)
                if old is None:
                    self._out[a][lab] = b
                    continue
                old = self._find(old)
                if old != b:
                    stack.extend(self._merge(old, b))

    def _merge(self, x: int, y: int) -> list:
        x, y = self._find(x), self._find(y)
        if x == y:
            return []
        if y == 0:
            x, y = y, x
        self._parent[y] = x
        moved = self._out[y]
        self._out[y] = {}
        return [(x, lab, dst) for lab, dst in moved.items()]

    def _compact(self) -> None:
        roots = sorted({self._find(v) for v in range(len(self._parent))})
        index = {v: i for i, v in enumerate(roots)}
        out = [{} for _ in roots]
        for v in roots:
            for lab, dst in self._out[v].items():
                out[index[v]][lab] = index[self._find(dst)]
        self.num_vertices = len(roots)
        self.out = out

    def contains(self, w: Word) -> bool:
        v = 0
        for letter in w.letters:
            v = self.out[v].get(letter)
            if v is None:
                return False
        return v == 0

    def is_whole_group(self) -> bool:
        return all(self.contains(Word(((g, 1),))) for g in range(self.rank))


def generates_free_group(words: Sequence[Word], rank: int) -> bool:
    """True iff ``words`` generate all of ``F_rank``."""
    return FoldedGraph(rank, words).is_whole_group()
