"""Filtration schedules: base cofinal families, the fast-Betti and slow-rank
constructions, normal-core normalization and exponent certificates.

All index and target arithmetic is exact.  Every schedule re-asserts the
inequalities its construction relies on from the stored numbers, so a
record that comes back is a checked record.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Iterable, Iterator, Sequence

from .catalog import FreeQuotientWitness
from .cosets import (
    DEFAULT_MAX_DEGREE,
    DEFAULT_MAX_IMAGE,
    AbelianTargetMap,
    CosetTable,
    is_normal,
    meet,
    normal_core,
    regular_image_table,
    subgroup_from_abelian_quotient,
    whole_group_table,
)
from .errors import CofinalError, InputError, ResourceError, UnsupportedRepresentationError
from .growth import GrowthFunction, Power, Scaled, monotone_increasing_envelope, ratio_decreasing_envelope
from .homology import (
    HomologySummary,
    IntegerMatrix,
    abelianization_matrix,
    homology_summary,
    quotient_map_mod_p,
    summary_from_matrix,
)
from .presentations import FinitePresentation, GroupAutomorphism, Word, mk_free_group
from .schreier import ReidemeisterSchreier, induce_table, rank_interval, reidemeister_schreier

log = logging.getLogger(__name__)

DEFAULT_MAX_INDEX = 100_000
DEFAULT_MAX_STEPS = 1_000_000
DEFAULT_MAX_DOUBLINGS = 4096


class NoAdmissibleModulusError(ResourceError):
    """No cyclic modulus satisfies the schedule's inequality within the cap."""


# ---------------------------------------------------------------------------
# terms

@dataclass(frozen=True, eq=False)
class SymbolicSemidirectTerm:
    """``n Z x| G_i`` inside ``Z x|_phi G``, kept as (modulus, fiber table).

    The subgroup has index ``modulus * [G:G_i]``; no table of that degree is
    ever built.
    """

    modulus: int
    fiber_subgroup: CosetTable
    monodromy: GroupAutomorphism

    @property
    def index(self) -> int:
        return self.modulus * self.fiber_subgroup.degree

    def contains(self, w: Word) -> bool:
        """Membership for a word over the mapping-torus generators (fiber gens, then ``t``)."""
        r = self.fiber_subgroup.parent.num_generators
        c, e = 0, 0
        cache: dict[tuple[int, int, int], Word] = {}
        for g, s in w.letters:
            if g == r:
                e += s
                continue
            key = (e, g, s)
            img = cache.get(key)
            if img is None:
                img = self.monodromy.power(e)(Word(((g, s),)))
                cache[key] = img
            c = self.fiber_subgroup.act(c, img)
        return c == 0 and e % self.modulus == 0


@dataclass(frozen=True, eq=False)
class FiltrationTerm:
    i: int
    subgroup: CosetTable | SymbolicSemidirectTerm
    d_i: int
    n_i: int
    total_index: int
    measures: HomologySummary | None = None
    rank_bounds: tuple[int, int] | None = None
    normal: bool = True
    notes: dict = field(default_factory=dict)

    @property
    def symbolic(self) -> bool:
        return isinstance(self.subgroup, SymbolicSemidirectTerm)

    def contains(self, w: Word) -> bool:
        return self.subgroup.contains(w)


class TermList(list):
    """A list of terms that may have been cut short by a resource cap."""

    def __init__(self, items: Iterable = (), truncated: bool = False, reason: str | None = None):
        super().__init__(items)
        self.truncated = truncated
        self.reason = reason

    def truncate(self, reason: str) -> None:
        self.truncated = True
        self.reason = reason
        log.info("schedule truncated: %s", reason)


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class CertificateRecord:
    i: int
    total_index: int
    measured: int
    target: GrowthFunction
    mode: str
    holds: bool
    precondition: bool | None = None

    def recheck(self) -> bool:
        return _verdict(self.mode, self.measured, self.target, self.total_index)

    def target_approx(self) -> float:
        return self.target.approx(self.total_index)


@dataclass
class GrowthCertificate:
    """Per-term verdicts.  ``mode`` is ``"lower"`` (measured >= target) or ``"upper"``."""

    mode: str
    records: list[CertificateRecord] = field(default_factory=list)
    epsilon: Fraction | None = None
    kind: str | None = None

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.records)

    def recheck(self) -> bool:
        return all(r.recheck() == r.holds for r in self.records)

    def add(self, i: int, index: int, measured: int, target: GrowthFunction,
            precondition: bool | None = None) -> CertificateRecord:
        rec = CertificateRecord(i, index, measured, target, self.mode,
                                _verdict(self.mode, measured, target, index), precondition)
        self.records.append(rec)
        return rec


def _verdict(mode: str, measured: int, target: GrowthFunction, index: int) -> bool:
    if mode == "lower":
        return target.compare(index, measured) <= 0
    if mode == "upper":
        return target.compare(index, measured) >= 0
    raise InputError(f"unknown certificate mode {mode!r}")


# ---------------------------------------------------------------------------
# measurement

def measure_table(P: FinitePresentation, H: CosetTable, primes: Sequence[int] = (2,),
                  rs: ReidemeisterSchreier | None = None
                  ) -> tuple[ReidemeisterSchreier, HomologySummary, tuple[int, int]]:
    """Reidemeister-Schreier, then Smith form and Tietze on the subgroup."""
    if rs is None:
        rs = reidemeister_schreier(P, H)
    hom = homology_summary(rs.presentation, primes)
    return rs, hom, rank_interval(rs.presentation, hom)


def measure_terms(P: FinitePresentation, terms: Sequence[FiltrationTerm],
                  primes: Sequence[int] = (2,)) -> TermList:
    out = TermList(truncated=getattr(terms, "truncated", False), reason=getattr(terms, "reason", None))
    for t in terms:
        if t.symbolic or t.measures is not None:
            out.append(t)
            continue
        _, hom, ranks = measure_table(P, t.subgroup, primes)
        out.append(replace(t, measures=hom, rank_bounds=ranks))
    return out


def assert_transfer_monotone(terms: Sequence[FiltrationTerm]) -> None:
    """Along a nested chain of finite-index subgroups b_1 never decreases."""
    prev = None
    for t in terms:
        if t.measures is None:
            continue
        if prev is not None and t.measures.b1 < prev:
            raise AssertionError(f"b1 decreased along a nested chain at term {t.i}")
        prev = t.measures.b1


def tables_nested(outer: CosetTable, inner: CosetTable) -> bool:
    """True iff every Schreier generator of ``inner`` lies in ``outer``."""
    rs = reidemeister_schreier(inner.parent, inner)
    return all(outer.contains(w) for w in rs.generator_words)


def terms_nested(outer: FiltrationTerm, inner: FiltrationTerm) -> bool:
    if outer.symbolic != inner.symbolic:
        raise InputError("cannot compare symbolic and materialized terms")
    if outer.symbolic:
        return (inner.subgroup.modulus % outer.subgroup.modulus == 0
                and tables_nested(outer.subgroup.fiber_subgroup, inner.subgroup.fiber_subgroup))
    return tables_nested(outer.subgroup, inner.subgroup)


def excludes_word(terms: Sequence[FiltrationTerm], w: Word) -> int | None:
    """Smallest term index ``i`` whose subgroup does not contain ``w``."""
    if not w:
        raise InputError("probe word must be nontrivial")
    for t in terms:
        if not t.contains(w):
            return t.i
    return None


# ---------------------------------------------------------------------------
# base filtrations

def mod_p_kernel(P: FinitePresentation, p: int, max_degree: int = DEFAULT_MAX_DEGREE) -> CosetTable:
    """Table of ``ker(P -> H_1(P; F_p))``."""
    dim, images = quotient_map_mod_p(abelianization_matrix(P), p)
    if p ** dim > max_degree:
        raise ResourceError(f"mod-{p} homology quotient has order {p}^{dim}", max_degree)
    if dim == 0:
        return whole_group_table(P)
    return subgroup_from_abelian_quotient(P, AbelianTargetMap((p,) * dim, tuple(images)), max_degree)


def iter_derived_p(P: FinitePresentation, p: int, max_index: int = DEFAULT_MAX_INDEX) -> Iterator[CosetTable]:
    """Lazily yield ``G_1 > G_2 > ...`` with ``G_{i+1} = ker(G_i -> H_1(G_i; F_p))``."""
    table = mod_p_kernel(P, p, max_index)
    yield table
    while True:
        rs = reidemeister_schreier(P, table)
        inner = mod_p_kernel(rs.presentation, p, max_index // table.degree)
        table = induce_table(rs, inner, max_index)
        yield table


def derived_p_filtration(P: FinitePresentation, p: int, depth: int,
                         max_index: int = DEFAULT_MAX_INDEX) -> TermList:
    """Derived mod-``p`` series, cut off at ``depth`` terms or at ``max_index``.

    Each term is characteristic in ``P``, hence normal.  The series is
    cofinal for free and surface groups.
    """
    if depth < 0:
        raise InputError("depth must be non-negative")
    if P.family not in ("free", "surface") and not P.is_free:
        log.warning("derived %d-series need not be cofinal for this presentation", p)
    out = TermList()
    it = iter_derived_p(P, p, max_index)
    for i in range(1, depth + 1):
        try:
            table = next(it)
        except ResourceError as exc:
            out.truncate(f"term {i}: {exc}")
            break
        out.append(FiltrationTerm(i, table, table.degree, 1, table.degree))
    return out


def _mat2_mul(x, y, m):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % m, (a * f + b * h) % m, (c * e + d * g) % m, (c * f + d * h) % m)


def sanov_images(r: int, modulus: int) -> list[tuple[int, int, int, int]]:
    """Images of the free basis in ``SL_2(Z/modulus)``.

    ``a -> [[1,2],[0,1]]``, ``b -> [[1,0],[2,1]]`` is faithful on ``F_2``; for
    ``r > 2`` the basis ``x_j -> a^j b a^-j`` of a free subgroup is used.
    """
    if r < 2:
        raise InputError("Sanov filtration needs rank >= 2")
    A = (1, 2 % modulus, 0, 1 % modulus)
    A_inv = (1, -2 % modulus, 0, 1 % modulus)
    B = (1 % modulus, 0, 2 % modulus, 1 % modulus)
    if r == 2:
        return [A, B]
    out = []
    conj, conj_inv = (1 % modulus, 0, 0, 1 % modulus), (1 % modulus, 0, 0, 1 % modulus)
    for _ in range(r):
        out.append(_mat2_mul(_mat2_mul(conj, B, modulus), conj_inv, modulus))
        conj = _mat2_mul(conj, A, modulus)
        conj_inv = _mat2_mul(A_inv, conj_inv, modulus)
    return out


def sanov_congruence_filtration(r: int, m: int, depth: int,
                                max_image: int = DEFAULT_MAX_IMAGE) -> TermList:
    """``G_i = ker(F_r -> SL_2(Z/m^i))`` through the Sanov representation."""
    if m < 2:
        raise InputError("base modulus must be at least 2")
    P = mk_free_group(r)
    out = TermList()
    for i in range(1, depth + 1):
        M = m ** i
        ident = (1 % M, 0, 0, 1 % M)
        try:
            table = regular_image_table(P, sanov_images(r, M), ident,
                                        lambda x, y, M=M: _mat2_mul(x, y, M), max_image)
        except ResourceError as exc:
            out.truncate(f"term {i}: {exc}")
            break
        out.append(FiltrationTerm(i, table, table.degree, 1, table.degree))
    return out


# ---------------------------------------------------------------------------
# fast Betti growth

def restrict_witness(alpha: FreeQuotientWitness, k: int
                     ) -> tuple[CosetTable, ReidemeisterSchreier, FreeQuotientWitness]:
    """Pass to ``Gamma = alpha^-1(K)`` with ``K = ker(F -> Z/k)``, first coordinate.

    Returns Gamma's table in the source, its rewritten presentation and the
    restricted epimorphism ``Gamma -> K`` with ``K`` free of rank
    ``k (rank - 1) + 1`` in its Schreier basis.
    """
    if k < 1:
        raise InputError("k must be positive")
    src = alpha.source
    tgt = AbelianTargetMap((k,), tuple((w.exponent_sum(0),) for w in alpha.images))
    gamma = subgroup_from_abelian_quotient(src, tgt)
    rs_gamma = reidemeister_schreier(src, gamma)
    F = mk_free_group(alpha.rank)
    K = subgroup_from_abelian_quotient(F, AbelianTargetMap((k,), ((1,),) + ((0,),) * (alpha.rank - 1)))
    rs_K = reidemeister_schreier(F, K)
    images = tuple(rs_K.rewrite_element(alpha(w)) for w in rs_gamma.generator_words)
    restricted = FreeQuotientWitness(rs_gamma.presentation, rs_K.presentation.num_generators, images)
    return gamma, rs_gamma, restricted.validate()


def choose_fast_modulus(g: GrowthFunction, d: int, prev: int, max_steps: int = DEFAULT_MAX_STEPS) -> int:
    """Smallest multiple ``n`` of ``prev`` with ``g(n d) < n``."""
    for m in range(1, max_steps + 1):
        n = prev * m
        if g.below(n * d, n):
            return n
    raise NoAdmissibleModulusError(f"no n with g(n*{d}) < n among the first multiples of {prev}", max_steps)


def fast_betti_schedule(Gamma: FinitePresentation, alpha: FreeQuotientWitness,
                        base: Sequence[FiltrationTerm], g: GrowthFunction, terms: int | None = None,
                        max_index: int = DEFAULT_MAX_INDEX, primes: Sequence[int] = (2,),
                        max_steps: int = DEFAULT_MAX_STEPS) -> tuple[TermList, GrowthCertificate]:
    """Normal filtration of ``Gamma`` with ``b_1(Gamma_i) >= g([Gamma:Gamma_i])``.

    ``Gamma_i = G_i ∩ ker(psi_{n_i})`` where ``psi_n`` is the first
    coordinate of ``alpha`` reduced mod ``n``, ``d_i = [Gamma:G_i]`` and
    ``n_i`` is the least multiple of ``n_{i-1}`` with ``g(n_i d_i) < n_i``.
    """
    if alpha.source != Gamma:
        raise InputError("witness is not defined on this presentation")
    alpha.validate()
    g = monotone_increasing_envelope(g)
    coords = [w.exponent_sum(0) for w in alpha.images]
    s = alpha.rank
    out = TermList(truncated=getattr(base, "truncated", False), reason=getattr(base, "reason", None))
    cert = GrowthCertificate("lower")
    prev_n = 1
    chosen = list(base) if terms is None else list(base)[:terms]
    for pos, bt in enumerate(chosen, start=1):
        if bt.symbolic:
            raise UnsupportedRepresentationError("base terms must be materialized tables")
        d = bt.total_index
        try:
            n = choose_fast_modulus(g, d, prev_n, max_steps)
            kernel = subgroup_from_abelian_quotient(
                Gamma, AbelianTargetMap((n,), tuple((c,) for c in coords)), max_index)
            table = meet(bt.subgroup, kernel, max_index)
        except ResourceError as exc:
            out.truncate(f"term {pos}: {exc}")
            break
        _, hom, ranks = measure_table(Gamma, table, primes)
        assert g.below(n * d, n), "modulus condition g(n d) < n violated"
        assert table.degree <= n * d
        # transfer onto ker(F -> Z/n), free of rank n(s-1)+1
        chain_lower = n * (s - 1) + 1
        assert hom.b1 >= chain_lower, "transfer lower bound violated"
        term = FiltrationTerm(bt.i, table, d, n, table.degree, hom, ranks, True,
                              {"chain_lower": chain_lower, "target": g})
        if out:
            assert table.degree % out[-1].total_index == 0 or tables_nested(out[-1].subgroup, table)
        out.append(term)
        cert.add(term.i, table.degree, hom.b1, g)
        prev_n = n
    assert_transfer_monotone(out)
    return out, cert


def almost_normal_betti_schedule(alpha: FreeQuotientWitness, k: int, f: GrowthFunction, terms: int,
                                 p: int = 2, horizon: int | None = None,
                                 max_index: int = DEFAULT_MAX_INDEX, primes: Sequence[int] = (2,)
                                 ) -> tuple[TermList, GrowthCertificate, CosetTable]:
    """Almost normal filtration of ``pi`` with ``b_1(pi_i) >= f([pi:pi_i])``.

    ``Gamma`` is the index-``k`` preimage of ``ker(F -> Z/k)``; the fast-Betti
    schedule runs on ``Gamma`` against ``g = k * f~`` where ``f~`` is the
    ratio-decreasing envelope of ``f``.  Returned terms live in ``Gamma``;
    the certificate is stated at ``pi``-level indices ``k [Gamma:Gamma_i]``.
    """
    gamma, rs_gamma, alpha_g = restrict_witness(alpha, k)
    f_env = ratio_decreasing_envelope(f, horizon)
    g = Scaled(k, f_env)
    Gamma = rs_gamma.presentation
    base = derived_p_filtration(Gamma, p, terms, max_index)
    gterms, _ = fast_betti_schedule(Gamma, alpha_g, base, g, terms, max_index, primes)
    cert = GrowthCertificate("lower")
    out = TermList(truncated=gterms.truncated, reason=gterms.reason)
    for t in gterms:
        pi_index = k * t.total_index
        out.append(replace(t, notes={**t.notes, "pi_index": pi_index}))
        cert.add(t.i, pi_index, t.measures.b1, f)
    return out, cert, gamma


# ---------------------------------------------------------------------------
# slow rank growth

def _coset_permutation(rs: ReidemeisterSchreier, phi: GroupAutomorphism) -> list[int]:
    H = rs.table
    return [H.act(0, phi(rs.transversal[c])) for c in range(H.degree)]


def _perm_order(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    order = 1
    for c in range(len(perm)):
        if seen[c]:
            continue
        length, d = 0, c
        while not seen[d]:
            seen[d] = True
            d = perm[d]
            length += 1
        order = lcm(order, length)
    return order


def choose_slow_modulus(f: GrowthFunction, d: int, threshold: int, step: int,
                        max_doublings: int = DEFAULT_MAX_DOUBLINGS) -> int:
    """Least multiple ``n`` of ``step`` with ``f(n d) >= threshold`` (``f`` non-decreasing)."""
    bound = f.bounded_above()
    if not f.unbounded and bound is not None and bound < threshold:
        raise NoAdmissibleModulusError(f"f is bounded by {bound} < {threshold}")

    def ok(m):
        return f.at_least(step * m * d, threshold)

    if ok(1):
        return step
    lo, hi = 1, 2
    for _ in range(max_doublings):
        if ok(hi):
            break
        lo, hi = hi, hi * 2
    else:
        raise NoAdmissibleModulusError(f"f(n*{d}) stays below {threshold}", max_doublings)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return step * hi


def slow_rank_schedule(G: FinitePresentation, phi: GroupAutomorphism, base: Sequence[FiltrationTerm],
                       f: GrowthFunction, terms: int | None = None, primes: Sequence[int] = (2,),
                       max_doublings: int = DEFAULT_MAX_DOUBLINGS) -> tuple[TermList, GrowthCertificate]:
    """Normal filtration ``Gamma_i = n_i Z x| G_i`` of ``Z x|_phi G`` with small rank.

    ``n_i`` is the least multiple of ``n_{i-1}`` (and of the order of
    ``phi`` on ``G/G_i``) with ``f(n_i d_i) >= 1 + d_i r``, ``r = b_1(G)``.
    Then ``d(Gamma_i) <= 1 + d(G_i) <= 1 + d_i r <= f([Gamma:Gamma_i])``.
    """
    if phi.domain != G:
        raise InputError("monodromy is not an automorphism of this presentation")
    r = homology_summary(G).b1
    f = monotone_increasing_envelope(f)
    surface_like = G.is_free or G.family in ("free", "surface")
    out = TermList(truncated=getattr(base, "truncated", False), reason=getattr(base, "reason", None))
    cert = GrowthCertificate("upper")
    prev_n = 1
    chosen = list(base) if terms is None else list(base)[:terms]
    for pos, bt in enumerate(chosen, start=1):
        H = bt.subgroup
        if bt.symbolic or H.parent != G:
            raise InputError("base terms must be tables over the fiber presentation")
        d = H.degree
        rs, hom, ranks = measure_table(G, H, primes)
        for w in rs.generator_words:
            if not H.contains(phi(w)):
                raise InputError(f"base term {bt.i} is not invariant under the monodromy")
        order = _perm_order(_coset_permutation(rs, phi))
        threshold = 1 + d * r
        try:
            n = choose_slow_modulus(f, d, threshold, lcm(prev_n, order), max_doublings)
        except ResourceError as exc:
            out.truncate(f"term {pos}: {exc}")
            break
        fiber_rank = hom.b1 if surface_like else ranks[1]
        if surface_like:
            assert fiber_rank <= d * r, "fiber rank exceeds the Euler-characteristic bound"
        rank_hi = 1 + fiber_rank
        assert f.at_least(n * d, threshold) and rank_hi <= threshold
        total = None
        try:
            total = mapping_torus_homology(rs, phi, n, primes)
        except CofinalError as exc:
            log.info("mapping-torus homology skipped: %s", exc)
        rank_lo = total.b1 if total is not None else 1
        term = FiltrationTerm(bt.i, SymbolicSemidirectTerm(n, H, phi), d, n, n * d, total,
                              (rank_lo, rank_hi), True,
                              {"fiber_measures": hom, "fiber_rank_bounds": ranks, "monodromy_order": order,
                               "threshold": threshold, "target": f})
        out.append(term)
        cert.add(term.i, n * d, rank_hi, f)
        prev_n = n
    return out, cert


# mapping-torus homology of n Z x| G_i ---------------------------------------

def _monodromy_matrix(rs: ReidemeisterSchreier, phi: GroupAutomorphism) -> list[list[int]]:
    """Columns: abelianized images of the subgroup generators under ``phi``."""
    g = rs.presentation.num_generators
    cols = []
    for w in rs.generator_words:
        img = rs.rewrite_element(phi(w))
        cols.append([img.exponent_sum(j) for j in range(g)])
    return [list(row) for row in zip(*cols)] if g else []


def _matmul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col) if x) for col in bt] for row in a]


def _matpow(a, e: int, max_bits: int):
    n = len(a)
    result = [[int(i == j) for j in range(n)] for i in range(n)]
    base = a
    while e:
        if e & 1:
            result = _matmul(result, base)
        e >>= 1
        if e:
            base = _matmul(base, base)
        biggest = max((abs(x).bit_length() for row in result + base for x in row), default=0)
        if biggest > max_bits:
            raise ResourceError("monodromy power entries too large", max_bits)
    return result


def mapping_torus_homology(rs: ReidemeisterSchreier, phi: GroupAutomorphism, n: int,
                           primes: Sequence[int] = (2,), max_bits: int = 1 << 14) -> HomologySummary:
    """``H_1`` of ``<t^n> x| G_i``, which is ``Z + H_1(G_i) / (A^n - 1)``.

    Exact over Z when ``A^n`` stays small; otherwise ``b_1`` and the mod-p
    Betti numbers come from ``gcd(x^n - 1, charpoly)`` and the torsion order
    is reported as unknown (``None``).
    """
    A = _monodromy_matrix(rs, phi)
    R = abelianization_matrix(rs.presentation)
    g = R.ncols
    try:
        An = _matpow(A, n, max_bits)
    except ResourceError:
        b1 = 1 + _fixed_dim(A, R, n, None)
        b1_mod = {p: 1 + _fixed_dim(A, R, n, p) for p in sorted(set(primes))}
        return HomologySummary(b1, None, b1_mod, ())
    rows = list(R.rows)
    for s in range(g):
        row = {j: -An[j][s] for j in range(g) if An[j][s]}
        row[s] = row.get(s, 0) + 1
        rows.append({j: v for j, v in row.items() if v})
    inner = summary_from_matrix(IntegerMatrix(tuple(rows), g), primes)
    return HomologySummary(inner.b1 + 1, inner.torsion_order,
                           {p: v + 1 for p, v in inner.b1_mod.items()}, inner.torsion)


def _fixed_dim(A, R: IntegerMatrix, n: int, p: int | None) -> int:
    """``dim ker(B^n - 1)`` for ``B`` induced by ``A`` on ``K^g / rowspace(R)``."""
    from sympy import GF, QQ, Poly, symbols
    from sympy.polys.matrices import DomainMatrix
    from sympy.polys.polyclasses import DMP

    K = QQ if p is None else GF(p)
    free, proj = _field_projection(R, p)
    dim = len(free)
    if dim == 0:
        return 0
    cols = []
    for j in free:
        col = [0] * dim
        for l in range(len(A)):
            if A[l][j]:
                for k, v in proj[l].items():
                    col[k] += A[l][j] * v
        cols.append(col)
    B = DomainMatrix([[_elem(K, cols[c][r]) for c in range(dim)] for r in range(dim)], (dim, dim), K)
    x = symbols("x")
    chi = Poly.new(DMP(B.charpoly(), K), x)
    xn = _powmod(Poly.new(DMP([K.one, K.zero], K), x), n, chi)
    h = (xn - 1).gcd(chi)
    hB = DomainMatrix.zeros((dim, dim), K)
    ident = DomainMatrix.eye(dim, K)
    for c in h.rep.to_list():
        hB = hB * B + ident * c
    return dim - hB.rank()


def _elem(K, q):
    q = Fraction(q)
    return K(q.numerator) / K(q.denominator)


def _powmod(base, e: int, mod):
    result = base ** 0
    base = base.rem(mod)
    while e:
        if e & 1:
            result = (result * base).rem(mod)
        e >>= 1
        if e:
            base = (base * base).rem(mod)
    return result


def _field_projection(R: IntegerMatrix, p: int | None) -> tuple[list[int], list[dict[int, Fraction]]]:
    """Free columns of RREF(R) over Q or F_p and the projection of each unit vector onto them."""
    if p is None:
        norm, inv = Fraction, lambda v: 1 / v
    else:
        norm, inv = (lambda v: v % p), (lambda v: pow(v, -1, p))
    pivots: dict[int, dict] = {}
    for row in R.rows:
        r = {j: norm(v) for j, v in row.items() if norm(v)}
        while r:
            c = min(r)
            piv = pivots.get(c)
            if piv is None:
                a = inv(r[c])
                pivots[c] = {j: norm(v * a) for j, v in r.items()}
                break
            _axpy(r, r[c], piv, norm)
    for c in sorted(pivots, reverse=True):
        for c2, row in pivots.items():
            if c2 < c and c in row:
                _axpy(row, row[c], pivots[c], norm)
    free = [j for j in range(R.ncols) if j not in pivots]
    pos = {j: i for i, j in enumerate(free)}
    proj = []
    for j in range(R.ncols):
        if j in pos:
            proj.append({pos[j]: Fraction(1)})
        else:
            proj.append({pos[l]: Fraction(norm(-v)) for l, v in pivots[j].items() if l != j})
    return free, proj


def _axpy(r: dict, f, piv: dict, norm) -> None:
    # r -= f * piv, dropping zeros
    for j, v in piv.items():
        nv = norm(r.get(j, 0) - f * v)
        if nv:
            r[j] = nv
        else:
            r.pop(j, None)


# ---------------------------------------------------------------------------
# normalization and exponent certificates

@dataclass(frozen=True)
class CoreCheck:
    i: int
    input_index: int
    core_index: int
    bound: int
    normal: bool
    contained: bool

    @property
    def holds(self) -> bool:
        return self.normal and self.contained and self.core_index <= self.bound


def normalize_schedule(pi: FinitePresentation, gamma: CosetTable, gamma_terms: Sequence[FiltrationTerm],
                       rs_gamma: ReidemeisterSchreier | None = None,
                       max_image: int = DEFAULT_MAX_IMAGE) -> tuple[TermList, list[CoreCheck]]:
    """Replace each ``Gamma_i`` by its normal core in ``pi``.

    ``gamma`` is a normal subgroup of index ``k`` in ``pi``; each input term
    must be normal in ``Gamma`` (a table over Gamma's rewritten
    presentation, or over ``pi`` itself when ``k = 1``).  Asserted per term:
    the core is normal in ``pi``, contained in the input, and has index at
    most ``k [Gamma:Gamma_i]^k``.
    """
    if gamma.parent != pi:
        raise InputError("gamma must be a table over pi")
    k = gamma.degree
    if not is_normal(pi, gamma):
        raise InputError("gamma must be normal in pi")
    if rs_gamma is None:
        rs_gamma = reidemeister_schreier(pi, gamma)
    out = TermList(truncated=getattr(gamma_terms, "truncated", False),
                   reason=getattr(gamma_terms, "reason", None))
    checks = []
    for t in gamma_terms:
        if t.symbolic:
            raise UnsupportedRepresentationError("symbolic semidirect terms cannot be normalized")
        H = t.subgroup
        if k == 1 and H.parent == pi:
            pulled = H
        else:
            if H.parent != rs_gamma.presentation:
                raise InputError("term is not a subgroup of gamma")
            if not is_normal(H.parent, H):
                raise InputError(f"term {t.i} is not normal in gamma")
            pulled = induce_table(rs_gamma, H)
        try:
            core = normal_core(pi, pulled, max_image)
        except ResourceError as exc:
            out.truncate(f"term {t.i}: {exc}")
            break
        check = CoreCheck(t.i, H.degree, core.degree, k * H.degree ** k,
                          is_normal(pi, core), tables_nested(pulled, core))
        assert check.holds, f"normal core check failed: {check}"
        checks.append(check)
        out.append(FiltrationTerm(t.i, core, t.d_i, t.n_i, core.degree, None, None, True,
                                  {"gamma_index": H.degree, "gamma_term": t}))
    return out, checks


@dataclass(frozen=True)
class CoreRecord:
    """Numbers the exponent certificates need for one ``pi_i`` inside ``Gamma_i``."""

    i: int
    gamma_index: int
    pi_index: int
    gamma_b1: int | None = None
    pi_b1: int | None = None
    gamma_rank_upper: int | None = None
    s: int | None = None
    pi_rank_upper: int | None = None


def exponent_certificate(records: Sequence[CoreRecord], k: int, kind: str) -> GrowthCertificate:
    """Exponent certificates for the normalized filtrations.

    ``T1_2``: epsilon = 1/(2k); checks ``b_1(pi_i) >= [pi:pi_i]^eps`` and
    records the precondition ``b_1(Gamma_i) >= k^(1/2k) [Gamma:Gamma_i]^(1/2)``.

    ``T2_2``: epsilon = (2k-1)/(2k); checks
    ``s_i d(Gamma_i) <= k^-eps [pi:pi_i]^eps`` with precondition
    ``d(Gamma_i) <= [Gamma:Gamma_i]^(1/2)`` and ``s_i <= n_i^(k-1)``.

    A record whose precondition holds but whose verdict fails raises
    ``AssertionError``: that would contradict the arithmetic, not the data.
    """
    if k < 1:
        raise InputError("k must be positive")
    if kind == "T1_2":
        eps = Fraction(1, 2 * k)
        cert = GrowthCertificate("lower", epsilon=eps, kind=kind)
        pre_fn, target = Power(k, 2 * k, k), Power(1, 2 * k)
        for rec in records:
            if rec.pi_b1 is None or rec.gamma_b1 is None:
                raise InputError(f"record {rec.i} lacks Betti numbers")
            pre = (pre_fn.compare(rec.gamma_index, rec.gamma_b1) <= 0
                   and rec.pi_index <= k * rec.gamma_index ** k and rec.pi_b1 >= rec.gamma_b1)
            r = cert.add(rec.i, rec.pi_index, rec.pi_b1, target, pre)
            if pre and not r.holds:
                raise AssertionError(f"T1_2 implication failed on record {rec.i}")
        return cert
    if kind == "T2_2":
        eps = Fraction(2 * k - 1, 2 * k)
        cert = GrowthCertificate("upper", epsilon=eps, kind=kind)
        target = Power(2 * k - 1, 2 * k, Fraction(1, k ** (2 * k - 1)))
        for rec in records:
            if rec.gamma_rank_upper is None:
                raise InputError(f"record {rec.i} lacks a rank bound")
            s = rec.s if rec.s is not None else (1 if k == 1 else None)
            if s is None:
                raise InputError(f"record {rec.i} lacks [Gamma_i:pi_i]")
            d_up = s * rec.gamma_rank_upper
            if rec.pi_rank_upper is not None:
                d_up = min(d_up, rec.pi_rank_upper)
            pre = (Power(1, 2).compare(rec.gamma_index, rec.gamma_rank_upper) >= 0
                   and s <= rec.gamma_index ** (k - 1)
                   and rec.pi_index == k * rec.gamma_index * s)
            r = cert.add(rec.i, rec.pi_index, d_up, target, pre)
            if pre and not r.holds:
                raise AssertionError(f"T2_2 implication failed on record {rec.i}")
        return cert
    raise InputError(f"unknown certificate {kind!r}; expected T1_2 or T2_2")


@dataclass
class NormalPipelineResult:
    gamma: CosetTable
    gamma_terms: TermList
    gamma_certificate: GrowthCertificate
    cores: TermList
    checks: list[CoreCheck]
    certificate: GrowthCertificate


def normal_betti_pipeline(alpha: FreeQuotientWitness, k: int, terms: int, p: int = 2,
                          max_index: int = DEFAULT_MAX_INDEX, max_image: int = DEFAULT_MAX_IMAGE,
                          primes: Sequence[int] = (2,)) -> NormalPipelineResult:
    """Normal filtration of ``pi`` with ``b_1(pi_i) >= [pi:pi_i]^(1/2k)``.

    Fast-Betti schedule on the index-``k`` subgroup ``Gamma`` against
    ``g(n) = k^(1/2k) n^(1/2)``, then normal cores in ``pi``.
    """
    pi = alpha.source
    gamma, rs_gamma, alpha_g = restrict_witness(alpha, k)
    Gamma = rs_gamma.presentation
    base = derived_p_filtration(Gamma, p, terms, max_index)
    gterms, gcert = fast_betti_schedule(Gamma, alpha_g, base, Power(k, 2 * k, k), terms, max_index, primes)
    cores, checks = normalize_schedule(pi, gamma, gterms, rs_gamma, max_image)
    cores = measure_terms(pi, cores, primes)
    records = []
    for c in cores:
        gt = c.notes["gamma_term"]
        records.append(CoreRecord(c.i, gt.total_index, c.total_index, gt.measures.b1, c.measures.b1,
                                  gt.rank_bounds[1], c.total_index // (k * gt.total_index),
                                  c.rank_bounds[1]))
    cert = exponent_certificate(records, k, "T1_2")
    return NormalPipelineResult(gamma, gterms, gcert, cores, checks, cert)


def slow_rank_records(terms: Sequence[FiltrationTerm]) -> list[CoreRecord]:
    """``k = 1`` records from slow-rank terms: ``pi_i = Gamma_i``."""
    return [CoreRecord(t.i, t.total_index, t.total_index,
                       t.measures.b1 if t.measures else None, t.measures.b1 if t.measures else None,
                       t.rank_bounds[1], 1, t.rank_bounds[1]) for t in terms]
