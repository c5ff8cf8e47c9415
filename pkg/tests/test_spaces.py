import random
from fractions import Fraction as F
from itertools import combinations

import pytest

from conftest import finite_carrier_corpus, four_values_oracle, random_metric_space
from distmono import cuts as C
from distmono import monoid as M
from distmono import spaces as S
from distmono.errors import AmalgamationFailure, CarrierViolation, PreconditionError

TT = M.builtin("twoThree")
R2 = M.builtin("R2")
R3 = M.builtin("R3")
NA = M.builtin("nonassoc72")
Q1 = M.builtin("Q1")
CH = M.builtin("chain2")


def example_four_point():
    return S.make_space(
        TT,
        ["w", "x", "y", "z"],
        {
            ("w", "x"): 1,
            ("x", "z"): 1,
            ("w", "y"): 1,
            ("x", "y"): 3,
            ("w", "z"): 3,
            ("y", "z"): 4,
        },
    )


def stated_phi():
    phi = S.Approximation(TT, "values")
    phi.set_value(C.embed(TT, 1), S.interval(TT, 0, 1))
    phi.set_value(C.embed(TT, 3), S.interval(TT, 0, 3))
    phi.set_value(C.embed(TT, 4), S.interval(TT, 3, 4))
    return phi


class TestValidateMetric:
    def test_one_point(self):
        assert S.validate_metric(S.make_space(R2, ["a"], {})).passed

    def test_four_point_example(self):
        assert S.validate_metric(example_four_point()).passed

    def test_planted_violation(self):
        sp = S.make_space(
            TT,
            ["w", "x", "y", "z"],
            {
                ("w", "x"): 1,
                ("x", "z"): 1,
                ("w", "y"): 1,
                ("x", "y"): 3,
                ("w", "z"): 3,
                ("y", "z"): 100,
            },
        )
        rep = S.validate_metric(sp)
        assert any(v[0] == "triangle" and set(v[1:]) == {"w", "y", "z"} for v in rep.violations)

    def test_zero_violation(self):
        sp = S.make_space(R2, ["a", "b"], {("a", "b"): "0"})
        assert not S.validate_metric(sp).passed


class TestKatetov:
    def test_max_element_constant(self):
        sp = random_metric_space(R3, ["a", "b", "c"], random.Random(1))
        assert S.check_katetov(sp, {p: "3" for p in sp.points}) is None

    def test_ultrametric_failure(self):
        sp = S.make_space(CH, ["a", "b"], {("a", "b"): 2})
        assert S.check_katetov(sp, {"a": 1, "b": 1}) == ("a", "b")

    def test_additive_pass(self):
        sp = S.make_space(R2, ["a", "b"], {("a", "b"): "2"})
        assert S.check_katetov(sp, {"a": "1", "b": "1"}) is None
        assert S.check_katetov(sp, {"a": "1", "b": "2"}) is None

    def test_own_row_is_katetov(self):
        sp = example_four_point()
        row = {p: sp.d("y", p) for p in sp.points if p != "y"}
        assert S.check_katetov(sp.restrict(["w", "x", "z"]), row) is None

    def test_zero_rejected(self):
        sp = S.make_space(R2, ["a", "b"], {("a", "b"): "1"})
        with pytest.raises(PreconditionError):
            S.check_katetov(sp, {"a": "0", "b": "1"})


class TestFourValuesCheck:
    def test_all_equal(self):
        t = S.four_values_check(R3, "2", "2", "2", "2", "2")
        assert t is not None  # the degenerate configuration links at 0
        assert S.four_values_check(Q1, F(1, 2), F(1, 2), F(1, 2), F(1, 2), F(1, 2)) is not None

    def test_disjoint_intervals(self):
        assert S.four_values_check(NA, 1, 1, F(7, 2), 2, 2) is None

    def test_r2_returns_smallest(self):
        t = S.four_values_check(R2, "1", "2", "1", "2", "1")
        assert t == "1"

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            S.four_values_check(NA, 1, F(7, 2), 1, 1, 1)


class TestFourValuesSearch:
    def test_nonassoc_witness(self):
        rep = S.four_values_search(NA)
        assert not rep.passed and rep.decisive
        u1, u2, v1, v2, s0 = rep.witness
        pts = [F(0), F(1), F(2), F(7, 2)]
        assert not four_values_oracle(pts, u1, u2, v1, v2)

    def test_finite_truncated_pass(self):
        for name in ("R1", "R2", "R3"):
            assert S.four_values_search(M.builtin(name)).passed

    def test_corpus_matches_associativity(self):
        from conftest import associativity_oracle

        for pts in finite_carrier_corpus(3):
            spec = M.finite_rational_spec(pts)
            rep = S.four_values_search(spec)
            assert rep.passed == (associativity_oracle(pts) is None), pts

    def test_two_four_fails_with_verified_witness(self):
        # the linking interval for (1,7),(1,9) over s=8 pinches to {2}, outside the carrier
        rep = S.four_values_search(M.builtin("twoFour"))
        assert not rep.passed
        u1, u2, v1, v2, s0 = rep.witness
        spec = M.builtin("twoFour")
        assert M.ambient_triangle(spec, s0, u1, u2)
        assert M.ambient_triangle(spec, s0, v1, v2)
        assert S.four_values_check(spec, u1, u2, v1, v2, s0) is None

    def test_sum_complete_via_associativity(self):
        assert S.four_values_search(Q1).passed
        assert S.four_values_search(M.builtin("noQE")).passed

    def test_max_kind(self):
        assert S.four_values_search(M.builtin("maxQ1")).passed


class TestFreeAmalgam:
    def test_subset_case(self):
        a = random_metric_space(R2, ["p", "q", "r"], random.Random(2))
        b = a.restrict(["p", "q"])
        out = S.free_amalgam(a, b)
        assert out.points == a.points and S.validate_metric(out).passed

    def test_single_overlap(self):
        a = S.make_space(R2, ["a", "c"], {("a", "c"): "1"})
        b = S.make_space(R2, ["c", "b"], {("c", "b"): "1"})
        out = S.free_amalgam(a, b)
        assert out.d("a", "b") == C.embed(R2, "2")

    def test_associative_always_metric(self, rng):
        for _ in range(100):
            w = random_metric_space(R3, [f"p{i}" for i in range(6)], rng)
            a = w.restrict(["p0", "p1", "p2", "p3"])
            b = w.restrict(["p2", "p3", "p4", "p5"])
            assert S.validate_metric(S.free_amalgam(a, b)).passed

    def test_nonassociative_failure_exists(self):
        found = False
        pts = [F(1), F(2), F(7, 2)]
        for d_ac1 in pts:
            for d_ac2 in pts:
                for d_c in pts:
                    for d_bc1 in pts:
                        for d_bc2 in pts:
                            try:
                                a = S.make_space(
                                    NA, ["a", "c1", "c2"],
                                    {("a", "c1"): d_ac1, ("a", "c2"): d_ac2, ("c1", "c2"): d_c},
                                )
                                b = S.make_space(
                                    NA, ["c1", "c2", "b"],
                                    {("b", "c1"): d_bc1, ("b", "c2"): d_bc2, ("c1", "c2"): d_c},
                                )
                            except CarrierViolation:
                                continue
                            if not (S.validate_metric(a).passed and S.validate_metric(b).passed):
                                continue
                            if not S.validate_metric(S.free_amalgam(a, b)).passed:
                                found = True
        assert found

    def test_overlap_disagreement(self):
        a = S.make_space(R2, ["a", "c"], {("a", "c"): "1"})
        b = S.make_space(R2, ["c", "a"], {("c", "a"): "2"})
        with pytest.raises(PreconditionError):
            S.free_amalgam(a, b)


class TestOnePointAmalgam:
    def test_basic(self):
        x1 = S.make_space(R2, ["x1", "a"], {("x1", "a"): "1"})
        x2 = S.make_space(R2, ["x2", "a"], {("x2", "a"): "2"})
        out = S.one_point_amalgam(R2, x1, x2)
        assert S.validate_metric(out).passed
        assert out.d("x1", "x2") in (C.embed(R2, "1"), C.embed(R2, "2"))

    def test_diagonal_case(self):
        x1 = S.make_space(R3, ["x1", "a", "b"], {("x1", "a"): "1", ("x1", "b"): "2", ("a", "b"): "1"})
        x2 = S.make_space(R3, ["x2", "a", "b"], {("x2", "a"): "1", ("x2", "b"): "2", ("a", "b"): "1"})
        out = S.one_point_amalgam(R3, x1, x2)
        assert S.validate_metric(out).passed

    def test_failure_on_nonassociative_magma(self):
        y1 = S.make_space(NA, ["x1", "y", "y2"], {("x1", "y"): 1, ("x1", "y2"): 1, ("y", "y2"): 2})
        y2 = S.make_space(NA, ["x2", "y", "y2"], {("x2", "y"): F(7, 2), ("x2", "y2"): 2, ("y", "y2"): 2})
        with pytest.raises(AmalgamationFailure) as exc:
            S.one_point_amalgam(NA, y1, y2)
        assert exc.value.quadruple is not None

    def test_precondition_singletons(self):
        x1 = S.make_space(R2, ["u", "v", "a"], {("u", "v"): "1", ("u", "a"): "1", ("v", "a"): "1"})
        x2 = S.make_space(R2, ["x2", "a"], {("x2", "a"): "2"})
        with pytest.raises(PreconditionError):
            S.one_point_amalgam(R2, x1, x2)


class TestDisjointAmalgam:
    def test_subset(self):
        w = random_metric_space(R3, ["a", "b", "c"], random.Random(3))
        assert S.disjoint_amalgam(R3, w, w.restrict(["a", "b"])).points == w.points

    def test_glued_triangles(self):
        a = S.make_space(R2, ["p", "q", "r"], {("p", "q"): "1", ("p", "r"): "1", ("q", "r"): "1"})
        b = S.make_space(R2, ["q", "r", "s"], {("q", "r"): "1", ("q", "s"): "2", ("r", "s"): "2"})
        out = S.disjoint_amalgam(R2, a, b)
        assert out.size() == 4 and S.validate_metric(out).passed

    def test_random_pairs_always_metric(self, rng):
        for spec in (R2, R3, CH):
            for _ in range(60):
                w = random_metric_space(spec, [f"p{i}" for i in range(8)], rng)
                x1 = w.restrict(["p0", "p1", "p2", "p3", "p4"])
                x2 = w.restrict(["p3", "p4", "p5", "p6", "p7"])
                out = S.disjoint_amalgam(spec, x1, x2)
                assert S.validate_metric(out).passed
                # both factors embed isometrically
                for fac in (x1, x2):
                    for a, b in combinations(fac.points, 2):
                        assert out.d(a, b) == fac.d(a, b)


class TestMetricRefinement:
    def test_zero_only(self):
        phi = S.metric_refinement(Q1, [C.zero_value(Q1)], S.Approximation(Q1, "values"))
        assert phi.get_value(C.zero_value(Q1)).zero

    def test_worked_example(self):
        half = C.embed(Q1, F(1, 2))
        half_plus = C.normalize_cut(Q1, F(1, 2), True)
        psi = S.Approximation(Q1, "values")
        psi.set_value(half, S.interval(Q1, 0, F(1, 2)))
        psi.set_value(half_plus, S.interval(Q1, F(1, 2), F(3, 5)))
        phi = S.metric_refinement(Q1, [half, half_plus], psi)
        assert phi.get_value(half).hi == C.embed(Q1, F(1, 2))
        assert phi.get_value(half_plus).hi == C.embed(Q1, F(3, 5))
        assert F(3, 5) <= F(1, 2) + F(1, 2)

    def test_principal_values_forced_on_finite(self):
        psi = S.Approximation(R3, "values")
        for e in ("1", "2", "3"):
            psi.set_value(C.embed(R3, e), S.interval(R3, "0", "3"))
        vals = [C.embed(R3, e) for e in ("1", "2", "3")]
        phi = S.metric_refinement(R3, vals, psi)
        for v in vals:
            assert phi.get_value(v).hi == v

    def test_postconditions_random(self, rng):
        # refines the input and is metric in the exact stated sense
        for _ in range(120):
            spec = Q1
            elems = sorted(rng.sample([F(k, 12) for k in range(1, 13)], 4))
            values = []
            for e in elems:
                if e < 1 and rng.random() >= 0.6:
                    values.append(C.normalize_cut(spec, e, True))
                else:
                    values.append(C.embed(spec, e))
            values = list({(v.point, v.above): v for v in values}.values())
            psi = S.Approximation(spec, "values")
            for v in values:
                if v.kind == "principal" and rng.random() < 0.5:
                    hi = v.point
                else:
                    hi = F(1) if rng.random() < 0.7 else min(v.point + F(1, 24), F(1))
                psi.set_value(v, S.interval(spec, 0, hi))
            phi = S.metric_refinement(spec, values, psi)
            assert phi.refines(psi)
            for a in values:
                assert S.interval_contains(spec, phi.get_value(a), a)
                for b in values:
                    for c in values:
                        if C.value_le(spec, a, C.star_add(spec, b, c)):
                            pa = phi.get_value(a).hi.point
                            pb = phi.get_value(b).hi.point
                            pc = phi.get_value(c).hi.point
                            assert pa <= M.op_add(spec, pb, pc)

    def test_unbounded_value_rejected(self):
        q = M.builtin("Q")
        psi = S.Approximation(q, "values")
        om = C.omega_value(q)
        psi.set_value(om, S.ApproxInterval(False, C.embed(q, 1), om))
        with pytest.raises(PreconditionError):
            S.metric_refinement(q, [om], psi)


class TestApproximatelyMetric:
    def test_identity_realization(self):
        sp = example_four_point()
        phi = S.Approximation(TT, "values")
        for v in sp.distance_values():
            phi.set_value(v, S.interval(TT, 0, v.point))
        res = S.approximately_metric_check(TT, sp, phi)
        assert res.feasible
        assert S.validate_metric(res.space).passed

    def test_stated_phi_infeasible(self):
        assert not S.approximately_metric_check(TT, example_four_point(), stated_phi())

    def test_three_point_subspaces_feasible(self):
        sp = example_four_point()
        for sub in combinations(sp.points, 3):
            res = S.approximately_metric_check(TT, sp.restrict(sub), stated_phi())
            assert res.feasible
            out = res.space
            assert S.validate_metric(out).passed
            for a, b in combinations(out.points, 2):
                iv = stated_phi().get_value(sp.d(a, b))
                assert S.interval_contains(TT, iv, out.d(a, b))

    def test_equivalence_with_validate_on_sum_complete(self, rng):
        # for sum-complete carriers a valid space is realizable in any approximation
        for _ in range(60):
            spec = R3
            sp = random_metric_space(spec, ["a", "b", "c", "d"], rng)
            phi = S.canonical_approximation(spec, sp).hat(sp)
            res = S.approximately_metric_check(spec, sp, phi)
            assert res.feasible
            for a, b in combinations(sp.points, 2):
                assert res.space.d(a, b) == sp.d(a, b)

    def test_minimax_path(self):
        mq = M.builtin("maxQ1")
        sp = S.make_space(mq, ["a", "b", "c"],
                          {("a", "b"): F(1, 2), ("a", "c"): F(1, 2), ("b", "c"): F(1, 3)})
        phi = S.Approximation(mq, "values")
        phi.set_value(C.embed(mq, F(1, 2)), S.interval(mq, F(1, 3), F(1, 2)))
        phi.set_value(C.embed(mq, F(1, 3)), S.interval(mq, F(1, 4), F(1, 3)))
        res = S.approximately_metric_check(mq, sp, phi)
        assert res.feasible and S.validate_metric(res.space).passed

    def test_lattice_enumeration_path(self):
        s2 = M.builtin("S2")
        sp = S.make_space(s2, ["a", "b", "c"],
                          {("a", "b"): 1, ("a", "c"): F(1, 2), ("b", "c"): F(1, 2)})
        # force the enumeration path with a deliberately non-metric input
        bad = S.make_space(s2, ["a", "b", "c"],
                           {("a", "b"): 1, ("a", "c"): F(1, 2), ("b", "c"): F(1, 2)})
        phi = S.Approximation(s2, "values")
        phi.set_value(C.embed(s2, 1), S.interval(s2, F(1, 2), 1))
        phi.set_value(C.embed(s2, F(1, 2)), S.interval(s2, 0, F(1, 2)))
        res = S.approximately_metric_check(s2, sp, phi)
        assert res.feasible


class TestCanonicalApproximation:
    def test_r2_edge(self):
        sp = S.make_space(R2, ["a", "b"], {("a", "b"): "1"})
        phi = S.canonical_approximation(R2, sp)
        iv = phi.get_pair("a", "b")
        assert iv.lo == C.embed(R2, "0") and iv.hi == C.embed(R2, "1")

    def test_r3_distance_three(self):
        sp = S.make_space(R3, ["a", "b"], {("a", "b"): "3"})
        iv = S.canonical_approximation(R3, sp).get_pair("a", "b")
        assert iv.lo == C.embed(R3, "2") and iv.hi == C.embed(R3, "3")

    def test_diagonal_zero(self):
        sp = S.make_space(R2, ["a", "b"], {("a", "b"): "1"})
        assert S.canonical_approximation(R2, sp).get_pair("a", "a").zero

    def test_refines_everything(self):
        sp = S.make_space(R3, ["a", "b", "c"],
                          {("a", "b"): "1", ("a", "c"): "2", ("b", "c"): "3"})
        canon = S.canonical_approximation(R3, sp)
        other = S.Approximation(R3, "pairs")
        for x, y in combinations(sp.points, 2):
            other.set_pair(x, y, S.interval(R3, "0", "3"))
        assert canon.refines(other)
        assert not other.refines(canon)

    def test_infinite_rejected(self):
        sp = S.make_space(Q1, ["a", "b"], {("a", "b"): F(1, 2)})
        with pytest.raises(PreconditionError):
            S.canonical_approximation(Q1, sp)
