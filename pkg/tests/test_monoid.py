import random
from fractions import Fraction as F

import pytest

from conftest import (
    associativity_oracle,
    finite_carrier_corpus,
    truncated_sum_oracle,
)
from distmono import monoid as M
from distmono.errors import CarrierViolation, PreconditionError, UnsupportedOperation


class TestOpAdd:
    def test_two_three_values(self):
        tt = M.builtin("twoThree")
        assert M.op_add(tt, 1, 3) == 4
        with pytest.raises(UnsupportedOperation) as exc:
            M.op_add(tt, 1, 1)
        assert exc.value.witness == (F(1), F(1))

    def test_unity(self):
        for name in ("R2", "Q1", "noQE", "chain2"):
            spec = M.builtin(name)
            for r in (spec.all_elements() if name != "Q1" and name != "noQE" else []):
                assert M.op_add(spec, r, spec.zero()) == r
        q1 = M.builtin("Q1")
        assert M.op_add(q1, F(2, 7), 0) == F(2, 7)

    def test_finite_table_truncation(self):
        r2 = M.builtin("R2")
        assert M.op_add(r2, "1", "2") == "2"

    def test_membership_error(self):
        with pytest.raises(CarrierViolation):
            M.op_add(M.builtin("Q1"), F(3, 2), F(1, 2))

    def test_max_kind(self):
        ch = M.builtin("chain2")
        assert M.op_add(ch, 1, 2) == 2

    def test_oracle_agreement_on_rational_carriers(self, rng):
        for pts in finite_carrier_corpus(3):
            spec = M.finite_rational_spec(pts)
            for r in pts:
                for s in pts:
                    assert M.op_add(spec, r, s) == truncated_sum_oracle(pts, r, s)


class TestMagmaAxioms:
    def test_finite_pass(self):
        rep = M.check_magma_axioms(M.builtin("R2"))
        assert rep.passed

    def test_planted_commutativity_defect(self):
        spec = M.DistanceMonoidSpec(
            kind="finite",
            elements=("0", "a", "b"),
            table=((0, 1, 2), (1, 1, 1), (2, 2, 2)),
        )
        rep = M.check_magma_axioms(spec)
        assert ("a", "b") in rep.violations["commutativity"]

    def test_interval_pass_with_note(self):
        rep = M.check_magma_axioms(M.builtin("Q1"))
        assert rep.passed and "construction" in rep.note

    def test_interval_max_pass(self):
        assert M.check_magma_axioms(M.builtin("maxQ1")).passed


class TestAssociativity:
    def test_finite_exhaustive(self):
        rep = M.check_associativity(M.builtin("R2"))
        assert rep.passed and rep.exhaustive

    def test_nonassoc_witness(self):
        rep = M.check_associativity(M.builtin("nonassoc72"))
        assert not rep.passed and rep.exhaustive
        r, s, t = rep.witness
        pts = [F(0), F(1), F(2), F(7, 2)]
        left = truncated_sum_oracle(pts, truncated_sum_oracle(pts, r, s), t)
        right = truncated_sum_oracle(pts, r, truncated_sum_oracle(pts, s, t))
        assert left != right

    def test_corpus_matches_oracle(self):
        for pts in finite_carrier_corpus(3):
            spec = M.finite_rational_spec(pts)
            rep = M.check_associativity(spec)
            assert rep.passed == (associativity_oracle(pts) is None)

    def test_interval_max_always(self):
        assert M.check_associativity(M.builtin("maxQ1")).passed

    def test_non_total_raises(self):
        with pytest.raises(PreconditionError):
            M.check_associativity(M.builtin("twoFour"))


class TestSumComplete:
    def test_q1(self):
        assert M.check_sum_complete(M.builtin("Q1").carrier).passed

    def test_two_four_witness(self):
        rep = M.check_sum_complete(M.builtin("twoFour").carrier)
        assert not rep.passed and rep.witness == (F(1), F(1))

    def test_finite_always(self):
        assert M.check_sum_complete(M.finite_rational_spec([0, 1, F(7, 2)]).carrier).passed

    def test_lattice_always(self):
        assert M.check_sum_complete(M.builtin("S3").carrier).passed

    def test_two_three_fails(self):
        rep = M.check_sum_complete(M.builtin("twoThree").carrier)
        assert not rep.passed
        r, s = rep.witness
        c = M.builtin("twoThree").carrier
        assert c.member(r) and c.member(s) and c.max_le(r + s)[0] == "lub"


class TestClassify:
    def test_finite_right_closed(self):
        for name in ("R1", "R2", "R3"):
            assert M.classify_monoid(M.builtin(name)).right_closed

    def test_q1_group_like(self):
        flags = M.classify_monoid(M.builtin("Q1"))
        assert flags.group_like and not flags.right_closed and not flags.ultrametric

    def test_noqe_all_false(self):
        flags = M.classify_monoid(M.builtin("noQE"))
        assert not flags.right_closed and not flags.ultrametric and not flags.group_like

    def test_ultrametric(self):
        flags = M.classify_monoid(M.builtin("chain2"))
        assert flags.ultrametric and flags.right_closed and not flags.group_like

    def test_lattice_right_closed(self):
        assert M.classify_monoid(M.builtin("N")).right_closed
        assert M.classify_monoid(M.builtin("S2")).group_like

    def test_nonassociative_rejected(self):
        with pytest.raises(PreconditionError):
            M.classify_monoid(M.builtin("nonassoc72"))

    def test_r1_is_also_ultrametric(self):
        # truncation at 1 coincides with max on {0, 1}
        assert M.classify_monoid(M.builtin("R1")).ultrametric

    def test_group_like_definition_on_finite_sets(self):
        # {0} u {2,3}: a convex block of integers; {0,1,7/2}: not a block
        assert M.classify_monoid(M.finite_rational_spec([0, 2, 3])).group_like
        assert not M.classify_monoid(M.finite_rational_spec([0, 1, F(7, 2)])).group_like


class TestBuiltins:
    def test_r2_shape(self):
        r2 = M.builtin("R2")
        assert r2.elements == ("0", "1", "2")
        assert r2.table[1][2] == 2 and r2.table[1][1] == 2

    def test_q1_carrier(self):
        q1 = M.builtin("Q1")
        assert q1.carrier.member(F(1, 3)) and not q1.carrier.member(F(4, 3))

    def test_noqe_carrier(self):
        nq = M.builtin("noQE")
        assert nq.carrier.member(0) and nq.carrier.member(2) and nq.carrier.member(F(5, 2))
        assert not nq.carrier.member(3) and not nq.carrier.member(1)

    def test_unknown_name(self):
        with pytest.raises(CarrierViolation):
            M.builtin("nope")

    def test_catalog_monoids(self):
        for name in M.builtin_names():
            spec = M.builtin(name)
            if name in ("twoThree", "twoFour", "nonassoc72"):
                assert not M.is_distance_monoid(spec)
            else:
                assert M.is_distance_monoid(spec), name
