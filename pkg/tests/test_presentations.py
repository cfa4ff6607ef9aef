import pytest
from hypothesis import given, strategies as st

from cofinal.errors import InputError, PresentationSyntaxError, WitnessError
from cofinal.presentations import (
    FinitePresentation,
    Word,
    commutator,
    compose,
    default_names,
    format_word,
    identity_automorphism,
    make_automorphism,
    mk_free_group,
    mk_semidirect_Z,
    mk_surface_group,
    parse_presentation,
    parse_word,
    tietze_reduce,
)

letters = st.lists(st.tuples(st.integers(0, 3), st.sampled_from((1, -1))), max_size=20)


def naive_reduce(ls):
    out = []
    for x in ls:
        if out and out[-1][0] == x[0] and out[-1][1] == -x[1]:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@given(letters)
def test_reduction_matches_stack_oracle(ls):
    assert Word(tuple(ls)).letters == naive_reduce(ls)


@given(letters, letters)
def test_inverse_and_product(u, v):
    u, v = Word(tuple(u)), Word(tuple(v))
    assert (u * u.inverse()).letters == ()
    assert (u * v).inverse() == v.inverse() * u.inverse()


@given(letters)
def test_text_round_trip(ls):
    w = Word(tuple(ls))
    assert parse_word(format_word(w)) == w


def test_token_syntax_for_many_generators():
    names = default_names(30)
    assert names[0] == "x0" and names[29] == "x29"
    w = parse_word("x12 x3^-1 x3 x29", names)
    assert w.letters == ((12, 1), (29, 1))
    assert parse_word(format_word(w, names), names) == w


def test_commutator_and_exponent_sums():
    a, b = Word(((0, 1),)), Word(((1, 1),))
    c = commutator(a, b)
    assert format_word(c) == "abAB"
    assert c.exponent_sum(0) == 0 and (a ** 3).exponent_sum(0) == 3
    assert Word.parse("aBAb").cyclically_reduced() == Word.parse("aBAb")
    assert Word.parse("baBB").cyclically_reduced() == Word.parse("aB")


def test_surface_and_free_constructors():
    S = mk_surface_group(2)
    assert S.family == "surface" and S.num_generators == 4
    assert S.format_word(S.relators[0]) == "abABcdCD"
    P = mk_surface_group(2, 1)
    assert P.is_free and P.num_generators == 4
    assert mk_free_group(1).is_free and not mk_free_group(1).is_noncyclic_free
    with pytest.raises(InputError):
        mk_free_group(0)


def test_parse_presentation_file_format():
    P = parse_presentation("gens: a b\nrel: abAB\n")
    assert P.num_generators == 2 and len(P.relators) == 1
    assert parse_presentation(P.to_text()) == P
    assert parse_presentation("gens: a\n").is_free
    with pytest.raises(PresentationSyntaxError) as exc:
        parse_presentation("gens: a b\nrel: abc\n")
    assert exc.value.line == 2
    with pytest.raises(PresentationSyntaxError):
        parse_presentation("rel: ab\n")
    with pytest.raises(PresentationSyntaxError):
        parse_presentation("gens: a a\n")


def test_comments_and_blank_lines():
    P = parse_presentation("# torus\n\ngens: a b   # two\nrel: ab AB\n")
    assert P.relators == (Word.parse("abAB"),)


def test_automorphism_checks():
    F2 = mk_free_group(2)
    phi = make_automorphism(F2, ["ab", "a"], ["b", "Ba"])
    assert phi.verification == "exact"
    w = Word.parse("abbAb")
    assert phi.inverse()(phi(w)) == w
    assert compose(phi, phi.inverse())(w) == w
    assert phi.power(3)(w) == phi(phi(phi(w)))
    assert phi.power(-2)(phi.power(2)(w)) == w
    with pytest.raises(WitnessError):
        make_automorphism(F2, ["ab", "a"], ["b", "a"])


def test_surface_automorphism_uses_abelianized_check():
    S = mk_surface_group(2)
    phi = make_automorphism(S, ["ab", "b", "c", "d"], ["aB", "b", "c", "d"])
    assert phi.verification != "unchecked"
    with pytest.raises(WitnessError):
        make_automorphism(S, ["aa", "b", "c", "d"], ["a", "b", "c", "d"])


def test_semidirect_presentation():
    F2 = mk_free_group(2)
    phi = make_automorphism(F2, ["ab", "a"], ["b", "Ba"])
    M = mk_semidirect_Z(F2, phi)
    assert M.names == ("a", "b", "t")
    assert [M.format_word(r) for r in M.relators] == ["taTBA", "tbTA"]
    with pytest.raises(InputError):
        mk_semidirect_Z(mk_free_group(3), phi)
    assert len(mk_semidirect_Z(F2, identity_automorphism(F2)).relators) == 2


def test_tietze_keeps_names_and_eliminates():
    P = parse_presentation("gens: a b c\nrel: abC\n")
    Q = tietze_reduce(P)
    assert Q.num_generators == 2 and Q.is_free
    assert set(Q.names) <= {"a", "b", "c"}
    S = tietze_reduce(mk_surface_group(2))
    assert S.num_generators == 4


def test_relators_are_reduced_and_empty_ones_dropped():
    P = FinitePresentation(2, (Word.parse("aA"), Word.parse("ab")))
    assert P.relators == (Word.parse("ab"),)
