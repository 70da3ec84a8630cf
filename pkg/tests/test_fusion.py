"""Fusion systems: morphism sets, axioms, saturation and subsystem comparison."""
import pytest
import sympy

import catalog
import fusion
import gcore


# ---------------------------------------------------------------------------
# Construction and morphism sets
# ---------------------------------------------------------------------------


def test_constructor_preconditions(groups, sub):
    S3 = groups['S3']
    C3 = sub(S3, "(0 1 2)")
    with pytest.raises(ValueError, match="not prime"):
        fusion.realized(S3, C3, 9)
    with pytest.raises(ValueError, match="not a power of 2"):
        fusion.realized(S3, C3, 2)
    A4 = groups['A4']
    with pytest.raises(ValueError, match="not contained"):
        fusion.realized(A4, sub(groups['S4'], "(0 1)"), 2)


def test_subsystem_from_checks_containment(groups, sub, s3_pair):
    _, F = s3_pair
    with pytest.raises(ValueError):
        fusion.subsystem_from(F, sub(groups['S3'], "(0 1)"))


def test_hom_sets_in_s3(s3_pair):
    sub3, F = s3_pair
    C3 = F.S
    assert len(fusion.hom_F(F, C3, C3)) == 2
    assert len(fusion.hom_F(sub3, C3, C3)) == 1
    assert len(fusion.iso_F(F, C3, C3)) == 2
    assert fusion.aut_F(F, C3).order == 2
    assert len(fusion.aut_S(F, C3)) == 1


def test_hom_F_rejects_subgroup_outside_S(groups, sub, s3_pair):
    _, F = s3_pair
    with pytest.raises(ValueError, match="not a subgroup of S"):
        fusion.hom_F(F, sub(groups['S3'], "(0 1)"), F.S)


def test_hom_sets_are_memoized(s4_d8):
    V = s4_d8.subgroups[-2]
    assert s4_d8.hom(V, V) is s4_d8.hom(V, V)


def test_f_classes_of_d8_in_s4(s4_d8):
    classes = fusion.f_classes(s4_d8)
    assert len(classes) == 7
    assert sum(len(c) for c in classes) == 10
    sizes = sorted((len(c[0]), len(c)) for c in classes)
    assert sizes == [(1, 1), (2, 2), (2, 3), (4, 1), (4, 1), (4, 1), (8, 1)]


def test_automizers_of_four_groups(s4_d8, groups, sub):
    S4 = groups['S4']
    normal_v4 = sub(S4, "(0 1)(2 3)", "(0 2)(1 3)")
    other_v4 = sub(S4, "(0 2)", "(1 3)")
    assert fusion.aut_F(s4_d8, normal_v4).order == 6
    assert fusion.aut_F(s4_d8, other_v4).order == 2


def test_are_F_conjugate(s4_d8, groups, sub):
    S4 = groups['S4']
    assert fusion.are_F_conjugate(s4_d8, sub(S4, "(0 2)(1 3)"), sub(S4, "(0 1)(2 3)"))
    assert not fusion.are_F_conjugate(s4_d8, sub(S4, "(0 2)"), sub(S4, "(0 2)(1 3)"))


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------


def test_realized_systems_satisfy_axioms(s3_pair, s4_d8):
    for F in (*s3_pair, s4_d8):
        assert fusion.is_fusion_system(F)


def test_explicit_system_without_closure_fails(groups):
    V = groups['C2xC2'].whole()
    e, a, b, c = V.elements
    table = {(Q, R): gcore.homs_by_conjugation(V, Q, R)
             for Q in gcore.all_subgroups(V) for R in gcore.all_subgroups(V)}
    alpha = gcore.make_hom(V, V, {e: e, a: b, b: c, c: a})
    table[(V, V)] = table[(V, V)] + (alpha, gcore.compose(alpha, alpha))
    F = fusion.ExplicitFusionSystem(V, 2, table)
    check = fusion.is_fusion_system(F)
    assert not check
    assert check.violation == "not closed under composition"


def test_explicit_system_missing_inner_maps_fails(groups):
    V = groups['C2xC2'].whole()
    F = fusion.ExplicitFusionSystem(V, 2, {})
    check = fusion.is_fusion_system(F)
    assert check.violation == "Hom_S not contained"


# ---------------------------------------------------------------------------
# Saturation
# ---------------------------------------------------------------------------


def _sylow_cases():
    for spec in catalog.BUILTIN:
        G = catalog.build_group(spec)
        for p in sorted(sympy.factorint(G.order)):
            yield pytest.param(spec.name, p, id=f"{spec.name}-p{p}")


@pytest.mark.parametrize("name, p", list(_sylow_cases()))
def test_sylow_systems_are_saturated(groups, name, p):
    G = groups[name]
    F = fusion.realized(G, gcore.sylow(G, p), p, name=name)
    report = fusion.is_saturated(F)
    assert report.saturated, report.to_dict()
    assert not report.failures()


def test_cyclic_four_in_s4_is_not_saturated(groups, sub):
    S4 = groups['S4']
    C4 = sub(S4, "(0 1 2 3)")
    F = fusion.realized(S4, C4, 2)
    report = fusion.is_saturated(F)
    assert not report
    [bad] = report.failures()
    assert bad.representative == C4
    assert bad.fully_automized is None
    assert bad.receptive == C4
    assert bad.to_dict()['fully_automized'] is None
    assert not fusion.fully_automized(F, C4)


def test_receptive_and_n_phi(s3_pair):
    _, F = s3_pair
    C3 = F.S
    inv = [f for f in fusion.hom_F(F, C3, C3) if f != gcore.identity_hom(C3)][0]
    assert fusion.n_phi(F, inv) == C3
    assert fusion.receptive(F, C3)
    assert fusion.fully_automized(F, C3)
    assert fusion.fully_normalized(F, C3)


def test_saturation_report_dict(s4_d8):
    d = fusion.is_saturated(s4_d8).to_dict()
    assert d['saturated'] is True
    assert len(d['classes']) == 7
    assert all(c['witness'] is not None for c in d['classes'])


# ---------------------------------------------------------------------------
# Subsystems
# ---------------------------------------------------------------------------


def test_subsystem_relations(s3_pair):
    sub3, F = s3_pair
    assert fusion.is_subsystem(sub3, F)
    assert not fusion.is_subsystem(F, sub3)
    assert not fusion.systems_equal(sub3, F)
    Q, R, phi = fusion.first_difference(sub3, F)
    assert Q == F.S and R == F.S
    assert phi not in fusion.hom_F(sub3, Q, R)
    assert fusion.first_difference(F, F) is None


def test_systems_over_different_groups_are_rejected(s3_pair, s4_d8):
    with pytest.raises(ValueError, match="same p-group"):
        fusion.systems_equal(s3_pair[1], s4_d8)


# ---------------------------------------------------------------------------
# Laws over several realized systems
# ---------------------------------------------------------------------------


@pytest.fixture(params=['F_D8(S4)', 'F_Q8(Q8)', 'F_Q8(SL(2,3))', 'F_C3(C3)', 'F_C3(S3)'])
def system(request):
    q8_sub, q8_full = request.getfixturevalue('q8_pair')
    s3_sub, s3_full = request.getfixturevalue('s3_pair')
    return {
        'F_D8(S4)': request.getfixturevalue('s4_d8'),
        'F_Q8(Q8)': q8_sub,
        'F_Q8(SL(2,3))': q8_full,
        'F_C3(C3)': s3_sub,
        'F_C3(S3)': s3_full,
    }[request.param]


def test_restriction_stays_in_hom_sets(system):
    subs = system.subgroups
    for R in subs:
        for T in subs:
            for f in fusion.hom_F(system, R, T):
                for Q in subs:
                    if Q <= R:
                        assert gcore.restrict(f, Q) in set(fusion.hom_F(system, Q, T))


def test_F_conjugacy_is_an_equivalence(system):
    subs = system.subgroups
    conj = {(i, j): fusion.are_F_conjugate(system, Q, R)
            for i, Q in enumerate(subs) for j, R in enumerate(subs)}
    n = len(subs)
    for i in range(n):
        assert conj[i, i]
        for j in range(n):
            assert conj[i, j] == conj[j, i]
            for k in range(n):
                if conj[i, j] and conj[j, k]:
                    assert conj[i, k]


def test_F_conjugate_subgroups_have_equal_automizers(system):
    for cls in fusion.f_classes(system):
        assert len({len(Q.elements) for Q in cls}) == 1
        assert len({fusion.aut_F(system, Q).order for Q in cls}) == 1


def test_morphisms_factor_through_their_image(system):
    subs = system.subgroups
    by_elements = {Q.elements: Q for Q in subs}
    for Q in subs:
        for R in subs:
            for f in fusion.hom_F(system, Q, R):
                iso, im = gcore.is_iso_onto_image(f)
                im = by_elements[im.elements]
                assert gcore.corestrict(iso, im) in set(fusion.iso_F(system, Q, im))
                assert gcore.compose(gcore.inclusion(im, R), gcore.corestrict(iso, im)) == f


def test_subsystem_relation_is_a_partial_order(groups, sub):
    S4 = groups['S4']
    C3 = sub(S4, "(0 1 2)")
    top = fusion.realized(S4, C3, 3, name='F_C3(S4)')
    middle = fusion.subsystem_from(top, sub(S4, "(0 1 2)", "(0 1)"), name='F_C3(S3)')
    bottom = fusion.subsystem_from(top, C3, name='F_C3(C3)')
    chain = [bottom, middle, top]
    for F in chain:
        assert fusion.is_subsystem(F, F)
    assert fusion.is_subsystem(bottom, middle) and fusion.is_subsystem(middle, top)
    assert fusion.is_subsystem(bottom, top)
    # N_S4(C3) = S3, so the upper two coincide
    assert fusion.is_subsystem(top, middle)
    assert fusion.systems_equal(middle, top)
    assert not fusion.is_subsystem(middle, bottom)
    assert not fusion.systems_equal(bottom, middle)


def test_explicit_system_with_non_injective_map_fails(groups):
    V = groups['C2xC2'].whole()
    table = {(Q, R): gcore.homs_by_conjugation(V, Q, R)
             for Q in gcore.all_subgroups(V) for R in gcore.all_subgroups(V)}
    collapse = gcore.make_hom(V, V, {x: V.identity for x in V.elements})
    table[(V, V)] = table[(V, V)] + (collapse,)
    check = fusion.is_fusion_system(fusion.ExplicitFusionSystem(V, 2, table))
    assert not check
    assert check.violation == "not in Inj"
