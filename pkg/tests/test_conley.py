import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vdpconley.conley import (
    AXIOM_BOUNDARY,
    AXIOM_HOMOLOGY,
    AXIOM_TRIANGULAR,
    AlgebraError,
    GeneralizedHomoclinicCertificate,
    GradedZ2Map,
    HeteroclinicCertificate,
    MorseDecomposition,
    Poset,
    TransitionConstraint,
    TransitionError,
    enumerate_connection_matrices,
    homology_of_interval,
    infer_bifurcation,
    is_attracting_interval,
    is_interval,
    mod2_connection_count,
    solve_transition_matrices,
    transition_residual,
    validate_connection_matrix,
)
from vdpconley.model import GradedZ2Index
from vdpconley.scenario import PRESETS, load_preset

import oracles

SINK, SADDLE, SOURCE, CYCLE = (GradedZ2Index(r) for r in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0)))
TABLE = [SINK, SADDLE, SOURCE, CYCLE]


def ex41_before():
    return MorseDecomposition.build(
        ["1", "pi", "2", "3"], [("1", "2"), ("pi", "2"), ("pi", "3")],
        {"1": SINK, "pi": CYCLE, "2": SADDLE, "3": SOURCE},
    )


def ex41_after():
    return MorseDecomposition.build(["1", "2", "3"], [("1", "2"), ("2", "3")],
                                    {"1": SINK, "2": SADDLE, "3": SOURCE})


# -- posets ------------------------------------------------------------------


def test_poset_axioms_checked():
    with pytest.raises(AlgebraError, match="irreflexive"):
        Poset(("a",), frozenset({("a", "a")}))
    with pytest.raises(AlgebraError, match="transitive"):
        Poset(("a", "b", "c"), frozenset({("a", "b"), ("b", "c")}))
    with pytest.raises(AlgebraError, match="cycle"):
        Poset.generated_by("ab", [("a", "b"), ("b", "a")])
    assert Poset.chain("123").lt("1", "3")


def test_intervals_on_chain():
    P = Poset.chain(["1", "2", "3"])
    assert not is_interval(P, {"1", "3"})
    assert is_interval(P, set()) and all(is_interval(P, {p}) for p in "123")
    assert is_attracting_interval(P, {"1"})
    assert not is_attracting_interval(P, {"2", "3"})


def test_intervals_example_order():
    P = ex41_before().poset
    assert is_interval(P, {"pi", "2"})
    assert is_attracting_interval(P, {"1", "pi"})


@settings(max_examples=50)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda t: t[0] < t[1])))))
def test_interval_enumeration_matches_definition(data):
    n, pairs = data
    P = Poset.generated_by([str(i) for i in range(n)], [(str(a), str(b)) for a, b in pairs])
    found = set(P.intervals())
    for k in range(1, n + 1):
        for combo in itertools.combinations(P.elements, k):
            I = frozenset(combo)
            convex = all(
                c in I for a, b in itertools.product(I, I) for c in P.elements if P.lt(a, c) and P.lt(c, b)
            )
            assert (I in found) == convex


# -- connection matrices -----------------------------------------------------


def test_cycle_decomposition_delta_is_valid():
    D = GradedZ2Map.connection(ex41_before(), [("1", "2", 1), ("pi", "2", 1), ("pi", "3", 2)])
    assert validate_connection_matrix(D).valid


def test_two_orbits_cancel():
    assert mod2_connection_count(2) == 0
    assert mod2_connection_count(1) == 1 and mod2_connection_count(0) == 0
    M = ex41_after()
    D = GradedZ2Map.connection(M, [("1", "2", 1)] * mod2_connection_count(2) + [("2", "3", 2)])
    assert validate_connection_matrix(D).valid and D.entry("1", "2", 1) == 0


def test_lower_triangular_entry_is_a_violation():
    M = MorseDecomposition.build(["1", "2"], [("1", "2")], {"1": SADDLE, "2": SINK})
    D = GradedZ2Map.connection(M, [("2", "1", 1)])
    rep = validate_connection_matrix(D)
    assert not rep.valid and rep.violations[0].axiom == AXIOM_TRIANGULAR


def test_boundary_violation():
    M = MorseDecomposition.build(["1", "2", "3"], [("1", "2"), ("2", "3")], {"1": SINK, "2": SADDLE, "3": SOURCE})
    D = GradedZ2Map.connection(M, [("1", "2", 1), ("2", "3", 2)])
    rep = validate_connection_matrix(D)
    assert [v.axiom for v in rep.violations] == [AXIOM_BOUNDARY]


def test_prescribed_interval_index_violation():
    P = Poset.chain(["1", "2"])
    M = MorseDecomposition(P, {"1": SINK, "2": SADDLE}, interval_index={frozenset("12"): GradedZ2Index()})
    assert validate_connection_matrix(GradedZ2Map.connection(M, [("1", "2", 1)])).valid
    rep = validate_connection_matrix(GradedZ2Map.connection(M))
    assert [v.axiom for v in rep.violations] == [AXIOM_HOMOLOGY]


def test_grading_enforced():
    with pytest.raises(AlgebraError, match="index ranks vanish"):
        GradedZ2Map.connection(ex41_after(), [("1", "3", 2)])
    with pytest.raises(AlgebraError, match="no Conley index"):
        MorseDecomposition(Poset.chain("12"), {"1": SINK})


def test_homology_examples():
    M = ex41_after()
    D = GradedZ2Map.connection(M, [("2", "3", 2)])
    assert homology_of_interval(D, M, {"1", "2"}).ranks == (1, 1, 0)
    assert homology_of_interval(D, M, {"3"}) == SOURCE
    het = load_preset("example4.2-het1")
    assert homology_of_interval(het.delta_before, None, {"1", "2"}).ranks == (0, 0, 0)
    with pytest.raises(AlgebraError, match="not an interval"):
        homology_of_interval(D, M, {"1", "3"})


def test_basis_order_and_text():
    D = GradedZ2Map.connection(ex41_before(), [("1", "2", 1)])
    assert D.source.basis_labels() == ["H0(1)", "H0(pi)", "H1(pi)", "H1(2)", "H2(3)"]
    assert "H0(pi)" in D.to_text().splitlines()[0]
    assert D.to_dict()["nonzero"] == [{"target": "1", "source": "2", "q": 1}]


def test_enumeration_small_cases():
    M = MorseDecomposition(Poset(("a", "b")), {"a": SINK, "b": SINK})
    assert [D.matrix.any() for D in enumerate_connection_matrices(M)] == [False]
    found = enumerate_connection_matrices(ex41_before())
    target = GradedZ2Map.connection(ex41_before(), [("1", "2", 1), ("pi", "2", 1), ("pi", "3", 2)])
    assert target in found


def test_enumeration_bound():
    M = MorseDecomposition(Poset.chain([str(i) for i in range(17)]), {str(i): SINK for i in range(17)})
    with pytest.raises(AlgebraError, match="exceeds"):
        enumerate_connection_matrices(M)


@st.composite
def decompositions(draw):
    n = draw(st.integers(1, 5))
    labels = [str(i) for i in range(n)]
    pairs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda t: t[0] < t[1])))
    idx = {p: draw(st.sampled_from(TABLE)) for p in labels}
    perm = draw(st.permutations(labels))
    return MorseDecomposition.build(perm, [(str(a), str(b)) for a, b in pairs], idx)


@settings(max_examples=50, deadline=None)
@given(decompositions())
def test_enumerated_matrices_satisfy_axioms(M):
    for D in enumerate_connection_matrices(M):
        assert not ((D.matrix.astype(int) @ D.matrix) % 2).any()
        rep = validate_connection_matrix(D)
        assert rep.valid
        for I, h in rep.interval_homology.items():
            block, basis = D.restrict(I)
            assert h.ranks == oracles.z2_homology_brute(block, [q for _, q in basis])


# -- transition matrices -----------------------------------------------------


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_transition_solutions_remultiply_to_zero(name):
    sc = load_preset(name)
    sol = solve_transition_matrices(sc.delta_before, sc.delta_after, sc.constraint)
    assert sol.solutions
    for T in sol.solutions:
        assert not transition_residual(sc.delta_before, T, sc.delta_after).any()
        for (t, s, q), v in {**sol.forced, **sol.constrained}.items():
            assert T.entry(t, s, q) == v
    # a forced entry takes one value across every solution; a free one takes both
    for t, s, q in sol.free:
        assert {T.entry(t, s, q) for T in sol.solutions} == {0, 1}


@pytest.mark.parametrize(
    "name,entry,value",
    [
        ("example4.1", ("2", "2", 1), 0),
        ("example4.2-het1", ("2", "3", 1), 1),
        ("example4.2-hom", ("1", "1", 1), 0),
        ("example4.2-het2", ("1", "2", 1), 1),
    ],
)
def test_forced_entries(name, entry, value):
    sc = load_preset(name)
    sol = solve_transition_matrices(sc.delta_before, sc.delta_after, sc.constraint)
    assert sol.forced[entry] == value


def test_inconsistent_constraints():
    sc = load_preset("example4.2-het1")
    C = TransitionConstraint.of({**{k: v for k, v in sc.constraint.values.items()}, ("2", "3", 1): "0"})
    with pytest.raises(TransitionError, match="no transition matrix exists"):
        solve_transition_matrices(sc.delta_before, sc.delta_after, C)


def test_certificates():
    expected = {
        "example4.1": "homoclinic orbit to M(2), θ*∈(0.02,0.04)",
        "example4.2-het1": "C(M(3),M(2)) ≠ ∅, θ*∈(-0.2,-0.05)",
        "example4.2-hom": "homoclinic orbit to M(1), θ*∈(0.1,0.2)",
        "example4.2-het2": "C(M(2),M(1)) ≠ ∅, θ*∈(1.1,1.2)",
    }
    for name, text in expected.items():
        sc = load_preset(name)
        sol = solve_transition_matrices(sc.delta_before, sc.delta_after, sc.constraint)
        certs = infer_bifurcation(sol, sc.bracket)
        assert [str(c) for c in certs] == [text]
    kinds = {type(infer_bifurcation(solve_transition_matrices(
        load_preset(n).delta_before, load_preset(n).delta_after, load_preset(n).constraint))[0])
        for n in expected}
    assert kinds == {HeteroclinicCertificate, GeneralizedHomoclinicCertificate}


def test_no_forced_entries_no_certificates():
    M = MorseDecomposition(Poset(("a",)), {"a": SINK})
    D = GradedZ2Map.connection(M)
    sol = solve_transition_matrices(D, D)
    assert sol.forced == {} and infer_bifurcation(sol) == []
