from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from cofinal.cosets import (
    AbelianTargetMap,
    CosetTable,
    is_normal,
    meet,
    normal_core,
    random_words,
    regular_image_table,
    subgroup_from_abelian_quotient,
    table_from_permutations,
    tables_equivalent,
    whole_group_table,
)
from cofinal.errors import InputError, InvalidQuotientError, ResourceError
from cofinal.presentations import Word, mk_free_group, mk_surface_group
from cofinal.schreier import schreier_generators

F2 = mk_free_group(2)
S3 = list(permutations(range(3)))


def brute_normal(H: CosetTable) -> bool:
    gens = schreier_generators(H)
    P = H.parent
    for g in range(P.num_generators):
        x = P.generator(g)
        for w in gens:
            if not H.contains(x.inverse() * w * x) or not H.contains(x * w * x.inverse()):
                return False
    return True


def s3_table(pa, pb):
    return table_from_permutations(F2, [pa, pb])


def transitive(pa, pb):
    seen, todo = {0}, [0]
    while todo:
        c = todo.pop()
        for q in (pa[c], pb[c]):
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return len(seen) == 3


@pytest.mark.parametrize("pa,pb", [(pa, pb) for pa in S3 for pb in S3 if transitive(pa, pb)])
def test_is_normal_matches_conjugation_oracle(pa, pb):
    H = s3_table(pa, pb)
    assert is_normal(F2, H) == brute_normal(H)


def test_s3_point_stabilizer_core():
    H = s3_table((1, 0, 2), (0, 2, 1))
    assert H.degree == 3 and not is_normal(F2, H)
    core = normal_core(F2, H)
    assert core.degree == 6 and is_normal(F2, core)
    assert all(H.contains(w) for w in schreier_generators(core))


@given(st.lists(st.integers(0, 5), min_size=2, max_size=2), st.integers(2, 6))
def test_abelian_kernel_degree_is_image_order(imgs, m):
    from math import gcd
    t = AbelianTargetMap((m,), tuple((v,) for v in imgs))
    H = subgroup_from_abelian_quotient(F2, t)
    assert H.degree == m // gcd(m, gcd(*imgs))
    assert is_normal(F2, H)


def test_abelian_kernel_rejects_bad_quotient():
    S = mk_surface_group(1)
    t = AbelianTargetMap((2,), ((1,), (0,)))
    assert subgroup_from_abelian_quotient(S, t).degree == 2
    T = mk_free_group(2)
    from cofinal.presentations import FinitePresentation
    P = FinitePresentation(2, (Word.parse("aa"),))
    with pytest.raises(InvalidQuotientError):
        subgroup_from_abelian_quotient(P, AbelianTargetMap((3,), ((1,), (0,))))
    with pytest.raises(InputError):
        subgroup_from_abelian_quotient(T, AbelianTargetMap((0,), ((1,), (0,))))


def test_meet_of_coprime_kernels():
    A = subgroup_from_abelian_quotient(F2, AbelianTargetMap((2,), ((1,), (0,))))
    B = subgroup_from_abelian_quotient(F2, AbelianTargetMap((3,), ((0,), (1,))))
    M = meet(A, B)
    assert M.degree == 6
    for w in random_words(2, 200, 10, seed=1):
        assert M.contains(w) == (A.contains(w) and B.contains(w))


def test_regular_image_table_is_kernel():
    mul = lambda x, y: tuple(y[i] for i in x)
    H = regular_image_table(F2, [(1, 0, 2), (1, 2, 0)], (0, 1, 2), mul)
    assert H.degree == 6 and is_normal(F2, H)
    with pytest.raises(ResourceError):
        regular_image_table(F2, [(1, 0, 2), (1, 2, 0)], (0, 1, 2), mul, max_image=5)


def test_validate_and_equivalence():
    H = s3_table((1, 0, 2), (0, 2, 1))
    assert H.validate() is H
    with pytest.raises(InputError):
        CosetTable(F2, ((0, 0, 2), (0, 1, 2))).validate()
    with pytest.raises(InputError):
        CosetTable(F2, ((1, 0, 2), (1, 0, 2))).validate()
    assert tables_equivalent(H, s3_table((1, 0, 2), (0, 2, 1)))
    assert not tables_equivalent(H, whole_group_table(F2))


def test_bfs_numbering_is_canonical():
    # relabelling the points must give the identical table
    H = s3_table((1, 0, 2), (0, 2, 1))
    relabel = (0, 2, 1)
    pa = [0] * 3
    pb = [0] * 3
    for c in range(3):
        pa[relabel[c]] = relabel[(1, 0, 2)[c]]
        pb[relabel[c]] = relabel[(0, 2, 1)[c]]
    K = table_from_permutations(F2, [pa, pb])
    assert K.action == H.action


def test_json_shape():
    H = s3_table((1, 0, 2), (0, 2, 1))
    doc = H.to_json()
    assert doc["degree"] == 3 and doc["generators"] == ["a", "b"] and len(doc["action"]) == 2


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_core_contained_and_normal_random_actions(seed):
    import random
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    perms = []
    for _ in range(2):
        p = list(range(n))
        rng.shuffle(p)
        perms.append(tuple(p))
    try:
        H = table_from_permutations(F2, perms)
    except InputError:
        return
    core = normal_core(F2, H)
    assert is_normal(F2, core)
    assert all(H.contains(w) for w in schreier_generators(core))
    assert core.degree % H.degree == 0
