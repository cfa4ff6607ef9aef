"""First homology of finitely presented groups over Z, Q and F_p.

Everything is exact: Python integers throughout, no floating point.  The
Smith form uses smallest-absolute-value pivoting on sparse rows.  Ranks over
F_p are computed by a separate Gaussian elimination so the two routes can be
checked against each other via universal coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, prod
from typing import Iterable, Mapping, Sequence

from .errors import ResourceError
from .presentations import FinitePresentation

DEFAULT_MAX_NONZEROS = 5_000_000


@dataclass(frozen=True)
class IntegerMatrix:
    """Sparse integer matrix: one ``{col: value}`` dict per row, zeros omitted."""

    rows: tuple[Mapping[int, int], ...]
    ncols: int

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]], ncols: int | None = None) -> "IntegerMatrix":
        if ncols is None:
            ncols = len(dense[0]) if dense else 0
        rows = tuple({j: int(v) for j, v in enumerate(row) if v} for row in dense)
        return cls(rows, ncols)

    def to_dense(self) -> list[list[int]]:
        return [[row.get(j, 0) for j in range(self.ncols)] for row in self.rows]

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)


@dataclass(frozen=True)
class SmithForm:
    """Nonzero elementary divisors ``d_1 | d_2 | ... | d_k`` (all positive)."""

    divisors: tuple[int, ...]
    ncols: int

    @property
    def rank(self) -> int:
        return len(self.divisors)


@dataclass(frozen=True)
class HomologySummary:
    b1: int
    torsion_order: int
    b1_mod: Mapping[int, int] = field(default_factory=dict)
    torsion: tuple[int, ...] = ()

    def b1_mod_text(self) -> str:
        return ";".join(f"{p}:{v}" for p, v in sorted(self.b1_mod.items()))


def abelianization_matrix(P: FinitePresentation) -> IntegerMatrix:
    """Relator-by-generator matrix of exponent sums."""
    rows = []
    for rel in P.relators:
        row: dict[int, int] = {}
        for g, s in rel.letters:
            v = row.get(g, 0) + s
            if v:
                row[g] = v
            else:
                del row[g]
        rows.append(row)
    return IntegerMatrix(tuple(rows), P.num_generators)


def invariant_factors(diagonal: Iterable[int]) -> tuple[int, ...]:
    """Turn any nonzero diagonal into the divisibility chain with the same cokernel."""
    d = sorted(abs(x) for x in diagonal if x)
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            g = gcd(d[i], d[j])
            d[i], d[j] = g, d[i] * d[j] // g
    return tuple(d)


def smith_normal_form(M: IntegerMatrix, max_nonzeros: int = DEFAULT_MAX_NONZEROS) -> SmithForm:
    if M.nnz() > max_nonzeros:
        raise ResourceError("matrix too large for Smith form", max_nonzeros)
    rows: dict[int, dict[int, int]] = {i: dict(r) for i, r in enumerate(M.rows) if r}
    cols: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)

    def axpy(k: int, q: int, i: int) -> None:
        # row_k -= q * row_i
        rk = rows[k]
        for j, v in rows[i].items():
            nv = rk.get(j, 0) - q * v
            if nv:
                if j not in rk:
                    cols[j].add(k)
                rk[j] = nv
            elif j in rk:
                del rk[j]
                cols[j].discard(k)
        if not rk:
            del rows[k]

    diagonal: list[int] = []
    while rows:
        best = None
        for i, r in rows.items():
            for j, v in r.items():
                key = (abs(v), len(r) + len(cols[j]))
                if best is None or key < best[0]:
                    best = (key, i, j)
                    if key[0] == 1 and key[1] <= 2:
                        break
            if best is not None and best[0] == (1, 2):
                break
        _, i, j = best
        a = rows[i][j]
        for k in sorted(cols[j] - {i}):
            axpy(k, rows[k][j] // a, i)
        if cols[j] != {i}:
            continue
        ri = rows[i]
        for l in [l for l in ri if l != j]:
            q = ri[l] // a
            if q:
                nv = ri[l] - q * a
                if nv:
                    ri[l] = nv
                else:
                    del ri[l]
                    cols[l].discard(i)
        if len(ri) == 1:
            diagonal.append(a)
            del rows[i]
            del cols[j]
    return SmithForm(invariant_factors(diagonal), M.ncols)


def _echelon_mod_p(M: IntegerMatrix, p: int) -> dict[int, dict[int, int]]:
    """Pivot rows keyed by leading column, each normalised to leading entry 1."""
    pivots: dict[int, dict[int, int]] = {}
    for row in M.rows:
        r = {j: v % p for j, v in row.items() if v % p}
        while r:
            c = min(r)
            piv = pivots.get(c)
            if piv is None:
                inv = pow(r[c], -1, p)
                pivots[c] = {j: v * inv % p for j, v in r.items()}
                break
            f = r[c]
            for j, v in piv.items():
                nv = (r.get(j, 0) - f * v) % p
                if nv:
                    r[j] = nv
                else:
                    r.pop(j, None)
    return pivots


def rank_mod_p(M: IntegerMatrix, p: int) -> int:
    return len(_echelon_mod_p(M, p))


def quotient_map_mod_p(M: IntegerMatrix, p: int) -> tuple[int, list[tuple[int, ...]]]:
    """Coordinates of ``F_p^ncols / rowspace(M)``.

    Returns ``(dim, images)`` where ``images[j]`` is the image of the unit
    vector ``e_j`` in ``F_p^dim``.  The complement is spanned by the
    non-pivot columns of the reduced echelon form.
    """
    pivots = _echelon_mod_p(M, p)
    for c in sorted(pivots, reverse=True):
        for c2, row in pivots.items():
            if c2 < c and c in row:
                f = row[c]
                for j, v in pivots[c].items():
                    nv = (row.get(j, 0) - f * v) % p
                    if nv:
                        row[j] = nv
                    else:
                        row.pop(j, None)
    free = [j for j in range(M.ncols) if j not in pivots]
    pos = {j: i for i, j in enumerate(free)}
    images = []
    for j in range(M.ncols):
        vec = [0] * len(free)
        if j in pos:
            vec[pos[j]] = 1
        else:
            for l, v in pivots[j].items():
                if l != j:
                    vec[pos[l]] = -v % p
        images.append(tuple(vec))
    return len(free), images


def homology_summary(P: FinitePresentation, primes: Sequence[int] = (2,),
                     max_nonzeros: int = DEFAULT_MAX_NONZEROS) -> HomologySummary:
    M = abelianization_matrix(P)
    return summary_from_matrix(M, primes, max_nonzeros)


def summary_from_matrix(M: IntegerMatrix, primes: Sequence[int] = (2,),
                        max_nonzeros: int = DEFAULT_MAX_NONZEROS) -> HomologySummary:
    snf = smith_normal_form(M, max_nonzeros)
    torsion = tuple(d for d in snf.divisors if d > 1)
    b1_mod = {p: M.ncols - rank_mod_p(M, p) for p in sorted(set(primes))}
    return HomologySummary(M.ncols - snf.rank, prod(torsion), b1_mod, torsion)
