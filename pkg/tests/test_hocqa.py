"""Query answering: matching, the decision-tree search, retrieval tasks."""

import itertools
import random

import pytest

from fourlqs import parse_kb, parse_query, saturate, var0, var3
from fourlqs.baselines import saturate_foke, saturate_ke
from fourlqs.bench import gen_random_kb, gen_random_query
from fourlqs.core import Literal, Member1, Member3
from fourlqs.hocqa import (StaleBranchError, TaskArityError, answer,
                           match_literal, task_query)
from fourlqs.oracle import brute_answers
from fourlqs.syntax import Query

from conftest import MERGE_KB


def _pos_branch(result):
    for br, _ in result.open_complete:
        if Literal(True, Member3(var0("Rome"), var0("Italy"),
                                 var3("locatedIn"))) in br.literal_set():
            return br
    raise AssertionError("positive branch not found")


def _neg_branch(result):
    for br, _ in result.open_complete:
        if Literal(False, Member3(var0("Rome"), var0("Italy"),
                                  var3("locatedIn"))) in br.literal_set():
            return br
    raise AssertionError("negative branch not found")


class TestMatchLiteral:
    def test_positive_branch_two_matches(self, italy_kb, italy_result):
        q = parse_query("(rel Rome Italy ?r)", italy_kb)
        rhos = match_literal(q.conjuncts[0], _pos_branch(italy_result))
        values = {rho.map3[var3("?r")].name for rho in rhos}
        assert values == {"locatedIn", "isPartOf"}

    def test_negative_branch_no_match(self, italy_kb, italy_result):
        q = parse_query("(rel Rome Italy ?r)", italy_kb)
        assert match_literal(q.conjuncts[0], _neg_branch(italy_result)) == []

    def test_ground_conjunct_matches_with_epsilon(self, italy_kb, italy_result):
        q = parse_query("(rel Rome Rome isPartOf)", italy_kb)
        rhos = match_literal(q.conjuncts[0], _pos_branch(italy_result))
        assert len(rhos) == 1 and rhos[0].is_empty()

    def test_repeated_variable_within_literal(self, italy_kb, italy_result):
        q = parse_query("(rel ?v ?v isPartOf)", italy_kb)
        rhos = match_literal(q.conjuncts[0], _pos_branch(italy_result))
        values = {rho.map0[var0("?v")].name for rho in rhos}
        assert values == {"Italy", "Rome"}

    def test_polarity_respected(self, italy_kb, italy_result):
        q = parse_query("(not (rel ?a ?b locatedIn))", italy_kb)
        rhos = match_literal(q.conjuncts[0], _neg_branch(italy_result))
        pairs = {(r.map0[var0("?a")].name, r.map0[var0("?b")].name)
                 for r in rhos}
        assert pairs == {("Italy", "Rome"), ("Rome", "Italy")}


class TestAnswer:
    def test_worked_example(self, italy_kb, italy_result):
        q = task_query("role-instance", ["Rome", "Italy"], italy_kb)
        ans = answer(q, italy_result)
        assert ans.keys() == {((("?r", "isPartOf"),), ()),
                              ((("?r", "locatedIn"),), ())}

    def test_lambda_query(self, italy_kb, italy_result):
        q = parse_query("", italy_kb)
        ans = answer(q, italy_result)
        assert ans.keys() == {((), ())}

    def test_no_match_empty(self, italy_kb, italy_result):
        q = parse_query("(in ?v ?c)", italy_kb)
        assert answer(q, italy_result).keys() == set()

    def test_conjunct_join(self, italy_kb, italy_result):
        q = parse_query("(rel Rome ?v locatedIn) (rel Italy ?v isPartOf)",
                        italy_kb)
        ans = answer(q, italy_result)
        assert ans.keys() == {((("?v", "Italy"),), ())}

    def test_conjunct_order_irrelevant(self, italy_kb, italy_result):
        base = parse_query("(rel Rome ?v locatedIn) (rel ?w ?v isPartOf)",
                           italy_kb)
        expected = answer(base, italy_result).keys()
        for perm in itertools.permutations(base.conjuncts):
            q = Query(tuple(perm), base.qvars0, base.qvars1, base.qvars3,
                      kb=italy_kb)
            assert answer(q, italy_result).keys() == expected

    def test_engine_independence(self, italy_kb):
        q = task_query("role-instance", ["Rome", "Italy"], italy_kb)
        keys = answer(q, saturate(italy_kb)).keys()
        assert answer(q, saturate_ke(italy_kb)).keys() == keys
        assert answer(q, saturate_foke(italy_kb)).keys() == keys

    def test_merges_reported(self):
        kb = parse_kb("ind a b\nlit (eq a b)\nlit (in a A)")
        res = saturate(kb)
        q = parse_query("(in ?v A)", kb)
        ans = answer(q, res)
        assert ans.keys() == {((("?v", "a"),), (("b", "a"),))}

    def test_stale_branch_error(self, italy_kb, italy_result):
        other = parse_kb("lit (in a A)")
        q = parse_query("(in ?v A)", other)
        with pytest.raises(StaleBranchError):
            answer(q, italy_result)

    def test_uncollected_result_rejected(self, italy_kb):
        from fourlqs import EngineOptions
        res = saturate(italy_kb, EngineOptions(collect_branches=False))
        q = parse_query("", italy_kb)
        with pytest.raises(StaleBranchError):
            answer(q, res)

    def test_inconsistent_kb_has_no_answers(self):
        kb = parse_kb(MERGE_KB)
        res = saturate(kb)
        q = parse_query("(in ?v A)", kb)
        assert answer(q, res).keys() == set()


class TestTaskQuery:
    def test_role_filler(self, italy_kb):
        q = task_query("role-filler", ["Rome", "isPartOf"], italy_kb)
        assert len(q.conjuncts) == 1 and q.qvars0[0].name == "?x"

    def test_role_filler_values(self, italy_kb, italy_result):
        q = task_query("role-filler", ["Rome", "isPartOf"], italy_kb)
        ans = answer(q, italy_result)
        got = {dict(binding)["?x"] for binding, _ in ans.keys()}
        assert got == {"Rome", "Italy"}

    def test_concept_retrieval_shape(self, italy_kb):
        q = task_query("concept-retrieval", ["Rome"], italy_kb)
        assert isinstance(q.conjuncts[0].atom, Member1)
        assert q.qvars1[0].name == "?c"

    def test_arity_errors(self, italy_kb):
        with pytest.raises(TaskArityError):
            task_query("role-filler", ["Rome"], italy_kb)
        with pytest.raises(TaskArityError):
            task_query("role-instance", ["Rome"], italy_kb)
        with pytest.raises(TaskArityError):
            task_query("concept-retrieval", ["Nowhere"], italy_kb)
        with pytest.raises(TaskArityError):
            task_query("nonsense", [], italy_kb)


class TestAgreementSample:
    def test_random_pairs_agree_with_brute_force(self):
        rng = random.Random(1234)
        checked = 0
        for _ in range(40):
            kb = parse_kb(gen_random_kb(rng))
            res = saturate(kb)
            q = parse_query(gen_random_query(rng, kb), kb)
            assert answer(q, res).keys() == brute_answers(kb, q)
            checked += 1
        assert checked == 40
