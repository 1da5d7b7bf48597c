import itertools
import json

import numpy as np

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellislab.finsemi import (
    CapExceeded, DegreeMismatch, NotMinimalIdempotent, Transformation, compose,
    generate_semigroup, hclass_isomorphism_check, hclass_map, idempotents, is_group_isomorphism,
    kernel, kernel_by_principal_ideals, parse_generators, rees_decomposition, rees_mismatches,
    semigroup_to_json, structure_groups, verify_kernel_laws,
)
from oracles import naive_closure, naive_kernel

T = Transformation
SWAP = T((1, 0))
ID2 = T((0, 1))
C0, C1 = T((0, 0)), T((1, 1))
T3_GENS = [T((1, 0, 2)), T((1, 2, 0)), T((0, 0, 1))]
GAMMA_GENS = [T((0, 0, 3, 3)), T((1, 1, 2, 2)), T((0, 3, 0, 3)), T((2, 1, 2, 1))]


@st.composite
def generator_sets(draw, max_degree=4, max_gens=3):
    n = draw(st.integers(1, max_degree))
    maps = st.tuples(*[st.integers(0, n - 1)] * n).map(T)
    return draw(st.lists(maps, min_size=1, max_size=max_gens))


# -- compose ---------------------------------------------------------------

def test_compose_identity_left():
    g = T((2, 0, 0))
    assert compose(T.identity(3), g) == g


def test_compose_swap_is_involution():
    assert compose(SWAP, SWAP) == ID2


def test_compose_constant_after_swap():
    # (f∘g)(0) = f(g(0)) = f(1) = 0 ; (f∘g)(1) = f(0) = 0
    assert compose(C0, SWAP) == T((0, 0))


def test_compose_order_convention():
    f, g = T((1, 2, 0)), T((0, 0, 1))
    assert compose(f, g).images == tuple(f(g(x)) for x in range(3))
    assert (f @ g) == compose(f, g)


def test_compose_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        compose(SWAP, T((0, 1, 2)))


def test_transformation_validation():
    with pytest.raises(ValueError):
        T((0, 3))
    with pytest.raises(ValueError):
        T(())


def test_parse_generators_literals():
    gens = parse_generators("[0,0,3,3],[1,1,2,2], [0,3,0,3]")
    assert gens[0] == T((0, 0, 3, 3)) and len(gens) == 3
    for bad in ("", "[0,1", "[0,x]", "[0,1]x", "[[0]]"):
        with pytest.raises(ValueError):
            parse_generators(bad)


# -- generate_semigroup ----------------------------------------------------

def test_generate_cyclic_group():
    S = generate_semigroup([SWAP])
    assert set(S.elements) == {SWAP, ID2}
    assert len(S) == 2


def test_generate_full_t2():
    S = generate_semigroup([SWAP, C0])
    assert len(S) == len(naive_closure([SWAP.images, C0.images])) == 4


def test_generate_full_t3():
    S = generate_semigroup(T3_GENS)
    assert len(naive_closure([g.images for g in T3_GENS])) == 27
    assert len(S) == 27


def test_generation_order_is_breadth_first():
    S = generate_semigroup([T((1, 2, 0))])
    assert [e.images for e in S.elements] == [(1, 2, 0), (2, 0, 1), (0, 1, 2)]


def test_words_rebuild_elements():
    S = generate_semigroup(T3_GENS)
    for i, e in enumerate(S.elements):
        f = T.identity(3)
        for k in S.word(i):
            f = compose(f, T3_GENS[k])
        assert f == e


def test_cap_exceeded_reports_count():
    with pytest.raises(CapExceeded) as exc:
        generate_semigroup(T3_GENS, cap=10)
    assert exc.value.count == 11


def test_degree_mismatch_in_generators():
    with pytest.raises(DegreeMismatch):
        generate_semigroup([SWAP, T((0, 0, 0))])


def test_single_idempotent_generator():
    S = generate_semigroup([C1])
    assert len(S) == 1
    ideals = kernel(S)
    assert ideals.kernel == (0,)
    rees = rees_decomposition(S, ideals=ideals)
    assert rees.sandwich == ((0,),) and rees_mismatches(S, rees) == []
    groups = structure_groups(S, ideals=ideals)
    assert groups.orthodox and groups.H_e == (0,)
    assert verify_kernel_laws(S).passed


# -- idempotents / kernel ---------------------------------------------------

def test_idempotents_of_group():
    S = generate_semigroup([T((1, 2, 0)), T((1, 0, 2))])
    assert [S.elements[i] for i in idempotents(S)] == [T.identity(3)]


def test_idempotents_of_t2():
    S = generate_semigroup([SWAP, C0])
    assert {S.elements[i] for i in idempotents(S)} == {ID2, C0, C1}


def test_gamma_example_generators_idempotent():
    assert all(compose(g, g) == g for g in GAMMA_GENS)


def test_kernel_of_group_is_group():
    S = generate_semigroup([T((1, 2, 0)), T((1, 0, 2))])
    ideals = kernel(S)
    assert len(ideals.kernel) == len(S) == 6
    assert len(ideals.minimal_left_ideals) == len(ideals.minimal_right_ideals) == 1


def test_kernel_of_t2():
    S = generate_semigroup([SWAP, C0])
    ideals = kernel(S)
    assert {S.elements[i] for i in ideals.kernel} == {C0, C1}
    assert len(ideals.minimal_left_ideals) == 1
    assert len(ideals.minimal_right_ideals) == 2


def test_kernel_of_t3_is_constants():
    S = generate_semigroup(T3_GENS)
    ideals = kernel(S)
    assert {S.elements[i] for i in ideals.kernel} == {T.constant(3, v) for v in range(3)}


@settings(max_examples=60, deadline=None)
@given(generator_sets())
def test_kernel_matches_principal_ideal_oracle(gens):
    S = generate_semigroup(gens)
    ideals = kernel(S)
    oracle = naive_kernel(naive_closure([g.images for g in gens]))
    assert {S.elements[i].images for i in ideals.kernel} == oracle
    assert set(ideals.kernel) == kernel_by_principal_ideals(S)


@settings(max_examples=60, deadline=None)
@given(generator_sets())
def test_closure_soundness(gens):
    S = generate_semigroup(gens)
    assert {e.images for e in S.elements} == naive_closure([g.images for g in gens])
    table = S.table
    for i, j in itertools.product(range(len(S)), repeat=2):
        assert S.elements[table[i, j]] == compose(S.elements[i], S.elements[j])


@settings(max_examples=40, deadline=None)
@given(generator_sets(max_degree=3))
def test_associativity(gens):
    S = generate_semigroup(gens)
    t = S.table
    for a, b, c in itertools.product(range(len(S)), repeat=3):
        assert t[t[a, b], c] == t[a, t[b, c]]


@settings(max_examples=60, deadline=None)
@given(generator_sets())
def test_minimal_ideals_are_ideals(gens):
    S = generate_semigroup(gens)
    ideals = kernel(S)
    t = S.table
    for L in ideals.minimal_left_ideals:
        assert {int(t[s, x]) for s in range(len(S)) for x in L} <= set(L)
        # minimal: S x regenerates L for every x in L
        for x in L:
            assert {int(t[s, x]) for s in range(len(S))} == set(L)
    for R in ideals.minimal_right_ideals:
        for x in R:
            assert {int(t[x, s]) for s in range(len(S))} == set(R)
    cover = sorted(x for L in ideals.minimal_left_ideals for x in L)
    assert cover == sorted(ideals.kernel)


# -- Rees decomposition -----------------------------------------------------

def test_rees_t2():
    S = generate_semigroup([SWAP, C0])
    rees = rees_decomposition(S)
    assert len(rees.I) == 2 and len(rees.Lambda) == 1 and len(rees.H) == 1
    assert all(v == rees.H[0] for row in rees.sandwich for v in row)


def test_rees_gamma_example():
    S = generate_semigroup(GAMMA_GENS)
    ideals = kernel(S)
    rees = rees_decomposition(S, ideals=ideals)
    assert len(ideals.kernel) == 8
    assert (len(rees.I), len(rees.Lambda), len(rees.H)) == (2, 2, 2)
    assert rees_mismatches(S, rees) == []


def test_rees_group():
    S = generate_semigroup([T((1, 2, 0, 3)), T((0, 1, 3, 2))])
    rees = rees_decomposition(S)
    assert len(rees.I) == len(rees.Lambda) == 1
    assert set(rees.H) == set(range(len(S)))
    e = rees.base_idempotent
    assert rees.sandwich == ((e,),)


def test_rees_rejects_non_minimal_idempotent():
    S = generate_semigroup([SWAP, C0])
    with pytest.raises(NotMinimalIdempotent):
        rees_decomposition(S, S.index(ID2))
    with pytest.raises(NotMinimalIdempotent):
        structure_groups(S, S.index(ID2))


@settings(max_examples=80, deadline=None)
@given(generator_sets())
def test_rees_faithful_and_round_trip(gens):
    S = generate_semigroup(gens)
    ideals = kernel(S)
    for e in ideals.minimal_idempotents:
        rees = rees_decomposition(S, e, ideals)
        assert rees_mismatches(S, rees) == []
        assert len(ideals.kernel) == len(rees.I) * len(rees.H) * len(rees.Lambda)
        for x, c in rees.coords.items():
            assert rees.element(S, *c) == x
        assert len(set(rees.coords.values())) == len(rees.coords)


# -- structure groups -------------------------------------------------------

def test_structure_groups_t2():
    S = generate_semigroup([SWAP, C0])
    g = structure_groups(S, S.index(C0))
    assert g.H_e == (S.index(C0),)
    assert g.gamma_trivial and g.orthodox


def test_structure_groups_gamma_example():
    S = generate_semigroup(GAMMA_GENS)
    ideals = kernel(S)
    for e in ideals.minimal_idempotents:
        g = structure_groups(S, e, ideals)
        assert len(g.H_e) == 2
        assert g.Gamma_e == g.H_e
        assert not g.orthodox


def test_structure_groups_permutation_group():
    S = generate_semigroup([T((1, 2, 0)), T((1, 0, 2))])
    e = S.index(T.identity(3))
    g = structure_groups(S, e)
    assert len(g.H_e) == 6 and g.gamma_trivial


@settings(max_examples=80, deadline=None)
@given(generator_sets())
def test_gamma_trivial_iff_orthodox(gens):
    S = generate_semigroup(gens)
    ideals = kernel(S)
    J = ideals.minimal_idempotents
    orthodox = all(S.elements[S.product(p, q)].is_idempotent() for p in J for q in J)
    for e in J:
        g = structure_groups(S, e, ideals)
        assert g.orthodox == orthodox == g.gamma_trivial
        assert is_group_isomorphism(S, {h: h for h in g.H_e})


# -- H-class isomorphisms ---------------------------------------------------

def test_hclass_iso_same_idempotent():
    S = generate_semigroup(GAMMA_GENS)
    p = kernel(S).minimal_idempotents[0]
    assert hclass_isomorphism_check(S, p, p)


def test_hclass_iso_t2_same_left_ideal():
    S = generate_semigroup([SWAP, C0])
    p, q = S.index(C0), S.index(C1)
    assert hclass_isomorphism_check(S, p, q)
    assert hclass_map(S, p, q) == {p: q}


def test_hclass_iso_gamma_all_pairs():
    S = generate_semigroup(GAMMA_GENS)
    J = kernel(S).minimal_idempotents
    assert len(J) == 4
    assert all(hclass_isomorphism_check(S, p, q) for p in J for q in J)


@settings(max_examples=60, deadline=None)
@given(generator_sets())
def test_right_multiplication_iso_within_right_ideal(gens):
    S = generate_semigroup(gens)
    ideals = kernel(S)
    J = ideals.minimal_idempotents
    for p, q in itertools.product(J, repeat=2):
        assert hclass_isomorphism_check(S, p, q, ideals)
        if ideals.right_of(p) == ideals.right_of(q):
            Hp = set(ideals.minimal_right_ideals[ideals.right_of(p)]) & set(
                ideals.minimal_left_ideals[ideals.left_of(p)])
            mapping = {x: S.product(x, q) for x in Hp}
            assert is_group_isomorphism(S, mapping)


# -- kernel laws --------------------------------------------------------------

def test_kernel_laws_t2():
    S = generate_semigroup([SWAP, C0])
    assert compose(C0, C1) == C0
    assert verify_kernel_laws(S).passed


def test_kernel_laws_group():
    S = generate_semigroup([T((1, 2, 0))])
    rep = verify_kernel_laws(S)
    assert rep.passed and rep.checked_pairs == 1


def test_kernel_laws_detects_a_broken_ideal_structure():
    S = generate_semigroup([SWAP, C0])
    ideals = kernel(S)
    # pretend both constants share a right ideal: then pq = q must fail
    from dataclasses import replace
    fake = replace(ideals, minimal_right_ideals=(ideals.kernel,))
    rep = verify_kernel_laws(S, fake)
    assert not rep.passed and any(v[0] == "right" for v in rep.violations)


# -- determinism / export -----------------------------------------------------

def test_deterministic_indexing_and_export():
    a = semigroup_to_json(generate_semigroup(GAMMA_GENS))
    b = semigroup_to_json(generate_semigroup(GAMMA_GENS))
    assert json.dumps(a) == json.dumps(b)


def test_json_export_fields():
    S = generate_semigroup(GAMMA_GENS)
    ideals = kernel(S)
    out = semigroup_to_json(S, ideals, rees_decomposition(S, ideals=ideals),
                            structure_groups(S, ideals=ideals))
    assert set(out) >= {"degree", "elements", "generators", "kernel", "rees"}
    assert set(out["rees"]) >= {"I", "Lambda", "H", "sandwich", "coords"}
    assert out["generators"] == [0, 1, 2, 3]
    json.dumps(out)



def test_lookup_on_large_degree():
    # degree 20 rows are packed into several integer codes
    cycle = T(tuple((x + 1) % 20 for x in range(20)))
    S = generate_semigroup([cycle, T.constant(20, 0)])
    assert len(S) == 40
    assert S.lookup(S.images[::-1]).tolist() == list(range(39, -1, -1))
    assert S.lookup(np.array([[1, 0] + list(range(2, 20))])).tolist() == [-1]
    for i, j in itertools.product(range(len(S)), repeat=2):
        assert S.elements[S.table[i, j]] == compose(S.elements[i], S.elements[j])
    assert len(kernel(S).kernel) == 20
