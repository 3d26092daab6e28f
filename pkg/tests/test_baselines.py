"""The two comparison engines: grounding, parity with the fused rule."""

import random

from fourlqs import parse_kb, saturate
from fourlqs.baselines import ground_expand, saturate_foke, saturate_ke
from fourlqs.bench import BenchConfig, gen_family, gen_random_kb

from conftest import CONTRADICTION_KB


class TestGroundExpand:
    def test_reflexive_clause_two_individuals(self, italy_kb):
        instances = ground_expand(italy_kb)
        ref = [g for g in instances if g.clause_index == 0]
        assert len(ref) == 2
        incl = [g for g in instances if g.clause_index == 1]
        assert len(incl) == 4

    def test_tau_order_is_lexicographic(self, italy_kb):
        incl = [g for g in ground_expand(italy_kb) if g.clause_index == 1]
        firsts = [(g.disjuncts[0].atom.first.name, g.disjuncts[0].atom.second.name)
                  for g in incl]
        assert firsts == [("Italy", "Italy"), ("Italy", "Rome"),
                          ("Rome", "Italy"), ("Rome", "Rome")]

    def test_benchmark_clause_sixteen_instances(self):
        kb = parse_kb(gen_family(BenchConfig(individuals=4, clauses=1)))
        assert len(ground_expand(kb)) == 16

    def test_no_quantified_variables_remain(self, italy_kb):
        for g in ground_expand(italy_kb):
            for d in g.disjuncts:
                from fourlqs import free_vars
                v0, _, _ = free_vars(d)
                assert all(not v.quantified for v in v0)


def _branch_multiset(result):
    return sorted(sorted(map(repr, br.literal_set()))
                  for br, _ in result.open_complete)


class TestParity:
    def test_worked_example(self, italy_kb, italy_result):
        ke = saturate_ke(italy_kb)
        foke = saturate_foke(italy_kb)
        assert ke.open_count == foke.open_count == italy_result.open_count == 2
        assert _branch_multiset(ke) == _branch_multiset(foke) == \
            _branch_multiset(italy_result)

    def test_contradiction(self):
        kb = parse_kb(CONTRADICTION_KB)
        for run in (saturate_ke(kb), saturate_foke(kb)):
            assert not run.consistent
            assert run.closed_count == 1

    def test_random_corpus_counts_and_literal_sets(self):
        rng = random.Random(2718)
        for _ in range(40):
            kb = parse_kb(gen_random_kb(rng))
            keg = saturate(kb)
            ke = saturate_ke(kb)
            foke = saturate_foke(kb)
            assert keg.open_count == ke.open_count == foke.open_count
            assert keg.closed_count == ke.closed_count == foke.closed_count
            assert _branch_multiset(keg) == _branch_multiset(ke) == \
                _branch_multiset(foke)
            assert keg.consistent == ke.consistent == foke.consistent

    def test_product_family_small_sizes(self):
        for n in (1, 2):
            kb = parse_kb(gen_family(BenchConfig(individuals=n, clauses=1)))
            keg = saturate(kb)
            ke = saturate_ke(kb)
            foke = saturate_foke(kb)
            assert keg.open_count == ke.open_count == foke.open_count
            assert keg.closed_count == ke.closed_count == foke.closed_count

    def test_rule_application_counts_agree_between_keg_and_ke(self, italy_kb):
        # Same decision tree, so the elimination/split step counts match;
        # foke additionally counts its instantiation steps.
        keg = saturate(italy_kb)
        ke = saturate_ke(italy_kb)
        foke = saturate_foke(italy_kb)
        assert keg.stats.rule_apps == ke.stats.rule_apps == foke.stats.rule_apps
        assert keg.stats.pb_apps == ke.stats.pb_apps == foke.stats.pb_apps
        assert foke.stats.gamma_apps > 0 and keg.stats.gamma_apps == 0

    def test_memory_ordering(self, italy_kb):
        keg = saturate(italy_kb)
        foke = saturate_foke(italy_kb)
        assert keg.stats.peak_resident_formulae <= \
            foke.stats.peak_resident_formulae
