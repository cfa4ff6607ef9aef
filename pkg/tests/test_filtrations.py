from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cofinal.catalog import identity_witness, lookup
from cofinal.cosets import (
    AbelianTargetMap,
    _bfs_table,
    is_normal,
    regular_image_table,
    subgroup_from_abelian_quotient,
)
from cofinal.errors import InputError, UnsupportedRepresentationError, WitnessError
from cofinal.filtrations import (
    CoreRecord,
    FiltrationTerm,
    NoAdmissibleModulusError,
    choose_fast_modulus,
    choose_slow_modulus,
    derived_p_filtration,
    excludes_word,
    exponent_certificate,
    fast_betti_schedule,
    mapping_torus_homology,
    measure_terms,
    normal_betti_pipeline,
    normalize_schedule,
    restrict_witness,
    sanov_congruence_filtration,
    slow_rank_records,
    slow_rank_schedule,
    terms_nested,
)
from cofinal.growth import Logarithm, Power, Table
from cofinal.homology import homology_summary
from cofinal.presentations import Word, commutator, identity_automorphism, mk_free_group, mk_surface_group
from cofinal.schreier import induce_table, reidemeister_schreier

F2 = mk_free_group(2)
S2 = mk_surface_group(2)


def matrix_closure(gens, M):
    mul = lambda x, y: ((x[0] * y[0] + x[1] * y[2]) % M, (x[0] * y[1] + x[1] * y[3]) % M,
                        (x[2] * y[0] + x[3] * y[2]) % M, (x[2] * y[1] + x[3] * y[3]) % M)
    ident = (1 % M, 0, 0, 1 % M)
    seen, frontier = {ident}, [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(seen)


def test_derived_series_indices():
    terms = derived_p_filtration(F2, 2, 2)
    assert [t.total_index for t in terms] == [4, 128]
    assert terms_nested(terms[0], terms[1])
    assert all(is_normal(F2, t.subgroup) for t in terms)
    assert [t.total_index for t in derived_p_filtration(S2, 2, 1)] == [16]
    assert [t.total_index for t in derived_p_filtration(F2, 3, 1)] == [9]


def test_derived_series_truncates_at_cap():
    terms = derived_p_filtration(F2, 2, 3, max_index=500)
    assert len(terms) == 2 and terms.truncated and "term 3" in terms.reason
    assert derived_p_filtration(F2, 2, 0) == []


@pytest.mark.parametrize("m,depth", [(3, 1), (2, 2), (3, 2), (2, 3)])
def test_sanov_indices_match_matrix_closure(m, depth):
    terms = sanov_congruence_filtration(2, m, depth)
    M = m ** depth
    gens = [(1, 2 % M, 0, 1 % M), (1 % M, 0, 2 % M, 1 % M)]
    assert terms[-1].total_index == matrix_closure(gens, M)
    assert sanov_congruence_filtration(2, 2, 1)[0].total_index == 1


def test_sanov_higher_rank_and_nesting():
    terms = sanov_congruence_filtration(3, 3, 2)
    assert all(is_normal(t.subgroup.parent, t.subgroup) for t in terms)
    assert terms_nested(terms[0], terms[1])
    with pytest.raises(InputError):
        sanov_congruence_filtration(2, 1, 1)
    assert sanov_congruence_filtration(2, 3, 3, max_image=1000).truncated


def test_probes():
    terms = derived_p_filtration(F2, 2, 2)
    a, b = Word.parse("a"), Word.parse("b")
    assert excludes_word(terms, a) == 1
    assert excludes_word(terms, commutator(a, b)) == 2
    assert excludes_word([], a) is None
    with pytest.raises(InputError):
        excludes_word(terms, Word())


def test_fast_modulus_choice():
    assert choose_fast_modulus(Power(1, 2), 4, 1) == 5
    assert choose_fast_modulus(Power(1, 2), 128, 5) == 130
    assert choose_fast_modulus(Table((0,)), 4, 1) == 1
    with pytest.raises(NoAdmissibleModulusError):
        choose_fast_modulus(Power(1, 1), 4, 1, max_steps=50)


def test_fast_betti_first_term():
    base = derived_p_filtration(F2, 2, 1)
    terms, cert = fast_betti_schedule(F2, identity_witness(F2), base, Power(1, 2))
    t = terms[0]
    assert (t.d_i, t.n_i, t.total_index) == (4, 5, 20)
    assert t.measures.b1 == 21 and cert.holds and cert.recheck()


def test_fast_betti_zero_target_keeps_base():
    base = derived_p_filtration(F2, 2, 2)
    terms, cert = fast_betti_schedule(F2, identity_witness(F2), base, Table((0,)))
    assert [t.n_i for t in terms] == [1, 1]
    assert [t.total_index for t in terms] == [4, 128]


def test_fast_betti_rejects_bad_witness():
    from cofinal.catalog import FreeQuotientWitness
    bad = FreeQuotientWitness(F2, 2, (Word.parse("a"), Word.parse("a")))
    with pytest.raises(WitnessError):
        fast_betti_schedule(F2, bad, derived_p_filtration(F2, 2, 1), Power(1, 2))


def test_slow_modulus_choice():
    assert choose_slow_modulus(Logarithm(2), 16, 65, 1) == 2 ** 61
    assert choose_slow_modulus(Power(1, 2), 16, 65, 1) == 265
    assert choose_slow_modulus(Table((10 ** 6,)), 16, 65, 1) == 1
    with pytest.raises(NoAdmissibleModulusError):
        choose_slow_modulus(Table((3,)), 16, 65, 1)


@pytest.mark.parametrize("name", ["surface_g2", "surface_g2_twist"])
def test_slow_rank_genus_two(name):
    fib = lookup(name).fibering
    base = derived_p_filtration(fib.fiber, 2, 1)
    terms, cert = slow_rank_schedule(fib.fiber, fib.monodromy, base, Logarithm(2))
    t = terms[0]
    assert t.n_i == 2 ** 61 and t.total_index == 2 ** 65
    assert t.rank_bounds[1] == 35 and cert.holds
    assert Logarithm(2).compare(t.total_index, 65) == 0


def test_slow_rank_power_target_respects_monodromy_order():
    fib = lookup("surface_g2_twist").fibering
    base = derived_p_filtration(fib.fiber, 2, 1)
    terms, _ = slow_rank_schedule(fib.fiber, fib.monodromy, base, Power(1, 2))
    assert terms[0].n_i == 266 and terms[0].notes["monodromy_order"] == 2
    ident, _ = slow_rank_schedule(S2, identity_automorphism(S2), base, Power(1, 2))
    assert ident[0].n_i == 265


def semidirect_table(M, H, phi, n):
    """Materialized table of n Z x| G_i inside the mapping torus, as an oracle."""
    r = H.parent.num_generators

    def step(pt, g, s):
        c, e = pt
        if g == r:
            return c, (e + 1) % n
        return H.act(c, phi.power(e)(Word(((g, 1),)))), e

    return _bfs_table(M, (0, 0), step, 10 ** 6, "oracle").validate()


# n must be a multiple of the monodromy order on G/G_1 (3, 3 and 2 here)
@pytest.mark.parametrize("name,n", [("fig8", 3), ("fig8", 6), ("trefoil", 3), ("trefoil", 6),
                                    ("surface_g2_twist", 2)])
def test_mapping_torus_homology_matches_materialized_subgroup(name, n):
    e = lookup(name)
    G, phi = e.fibering.fiber, e.fibering.monodromy
    H = derived_p_filtration(G, 2, 1)[0].subgroup
    rs = reidemeister_schreier(G, H)
    fast = mapping_torus_homology(rs, phi, n, primes=(2, 3))
    oracle_table = semidirect_table(e.presentation, H, phi, n)
    direct = homology_summary(reidemeister_schreier(e.presentation, oracle_table).presentation, primes=(2, 3))
    assert (fast.b1, fast.torsion, dict(fast.b1_mod)) == (direct.b1, direct.torsion, dict(direct.b1_mod))
    slow = mapping_torus_homology(rs, phi, n, primes=(2, 3), max_bits=0)
    assert slow.b1 == direct.b1 and dict(slow.b1_mod) == dict(direct.b1_mod)


@pytest.mark.parametrize("name", ["fig8", "trefoil"])
def test_catalog_mapping_tori_have_b1_one(name):
    e = lookup(name)
    h = homology_summary(e.presentation)
    assert (h.b1, h.torsion_order) == (1, 1) == (e.expected_b1, e.expected_torsion)


def test_monodromy_orders_on_first_quotient():
    from cofinal.filtrations import _coset_permutation, _perm_order
    for name, order in [("fig8", 3), ("trefoil", 3), ("surface_g2_twist", 2)]:
        fib = lookup(name).fibering
        H = derived_p_filtration(fib.fiber, 2, 1)[0].subgroup
        assert _perm_order(_coset_permutation(reidemeister_schreier(fib.fiber, H), fib.monodromy)) == order


def test_symbolic_membership_matches_materialized_table():
    e = lookup("fig8")
    G, phi = e.fibering.fiber, e.fibering.monodromy
    H = derived_p_filtration(G, 2, 1)[0].subgroup
    from cofinal.filtrations import SymbolicSemidirectTerm
    from cofinal.cosets import random_words
    sym = SymbolicSemidirectTerm(3, H, phi)
    table = semidirect_table(e.presentation, H, phi, 3)
    assert sym.index == table.degree
    for w in random_words(3, 300, 8, seed=11):
        assert sym.contains(w) == table.contains(w)


def s3_instance():
    gamma = subgroup_from_abelian_quotient(F2, AbelianTargetMap((2,), ((1,), (0,))))
    rs = reidemeister_schreier(F2, gamma)
    mul = lambda x, y: tuple(y[i] for i in x)
    imgs = ((0, 1, 2), (0, 2, 1), (1, 0, 2))
    H = regular_image_table(rs.presentation, imgs, (0, 1, 2), mul)
    return gamma, rs, H


def test_normal_core_s3_instance():
    gamma, rs, H = s3_instance()
    assert H.degree == 6 and is_normal(rs.presentation, H)
    assert not is_normal(F2, induce_table(rs, H))
    cores, checks = normalize_schedule(F2, gamma, [FiltrationTerm(1, H, 6, 1, 6)], rs)
    c = checks[0]
    assert c.normal and c.contained and c.core_index == 72 <= c.bound == 2 * 6 ** 2


def test_normalize_k_one_is_identity():
    terms = derived_p_filtration(F2, 2, 1)
    whole = subgroup_from_abelian_quotient(F2, AbelianTargetMap((1,), ((0,), (0,))))
    cores, checks = normalize_schedule(F2, whole, terms)
    assert cores[0].total_index == terms[0].total_index == 4


def test_normalize_errors():
    gamma, rs, H = s3_instance()
    fib = lookup("fig8").fibering
    base = derived_p_filtration(fib.fiber, 2, 1)
    sym, _ = slow_rank_schedule(fib.fiber, fib.monodromy, base, Power(1, 2))
    with pytest.raises(UnsupportedRepresentationError):
        normalize_schedule(F2, gamma, sym, rs)
    point = subgroup_from_abelian_quotient(rs.presentation, AbelianTargetMap((2,), ((1,), (0,), (0,))))
    normalize_schedule(F2, gamma, [FiltrationTerm(1, point, 2, 1, 2)], rs)


def test_restrict_witness_ranks():
    gamma, rs, alpha = restrict_witness(identity_witness(F2), 3)
    assert gamma.degree == 3 and alpha.rank == 3 * (2 - 1) + 1
    S_alpha = lookup("surface_g2").free_witness
    g2, rs2, a2 = restrict_witness(S_alpha, 2)
    assert g2.degree == 2 and a2.rank == 3


def test_normal_pipeline_k2():
    res = normal_betti_pipeline(identity_witness(F2), 2, 1, max_index=500)
    assert res.certificate.epsilon == Fraction(1, 4)
    assert res.certificate.holds and all(r.precondition for r in res.certificate.records)
    for c in res.checks:
        assert c.holds


def test_exponent_certificate_arithmetic():
    assert exponent_certificate([], 3, "T2_2").epsilon == Fraction(5, 6)
    assert exponent_certificate([], 1, "T1_2").epsilon == Fraction(1, 2)
    assert exponent_certificate([], 1, "T2_2").epsilon == Fraction(1, 2)
    with pytest.raises(InputError):
        exponent_certificate([CoreRecord(1, 4, 4)], 1, "T1_2")
    with pytest.raises(InputError):
        exponent_certificate([], 1, "T3")
    # precondition fails, verdict recorded honestly without raising
    cert = exponent_certificate([CoreRecord(1, 100, 100, 1, 1)], 1, "T1_2")
    assert cert.records[0].precondition is False and not cert.holds


def test_t2_2_on_slow_rank_output():
    fib = lookup("surface_g2").fibering
    base = derived_p_filtration(fib.fiber, 2, 1)
    terms, _ = slow_rank_schedule(fib.fiber, fib.monodromy, base, Power(1, 2))
    cert = exponent_certificate(slow_rank_records(terms), 1, "T2_2")
    assert cert.holds and cert.records[0].precondition


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["power:1/2", "power:1/3", "log:2", "table:1,2,3,9,4"]))
def test_fast_betti_invariants(spec):
    from cofinal.growth import monotone_increasing_envelope, parse_growth
    g = parse_growth(spec)
    base = derived_p_filtration(F2, 2, 2)
    terms, cert = fast_betti_schedule(F2, identity_witness(F2), base, g)
    genv = monotone_increasing_envelope(g)
    prev = None
    for t in terms:
        assert genv.below(t.n_i * t.d_i, t.n_i)
        assert t.total_index <= t.n_i * t.d_i
        if prev is not None:
            assert t.n_i % prev.n_i == 0 and terms_nested(prev, t)
            assert t.measures.b1 >= prev.measures.b1
        prev = t
    assert cert.holds and cert.recheck()


def test_measure_terms_keeps_truncation():
    terms = derived_p_filtration(F2, 2, 3, max_index=500)
    measured = measure_terms(F2, terms)
    assert measured.truncated and [t.measures.b1 for t in measured] == [5, 129]
