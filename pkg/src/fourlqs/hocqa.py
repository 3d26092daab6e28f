"""Higher-order conjunctive query answering over saturated branch sets.

A query is a conjunction of literals whose slots may hold query variables
of any sort (individual, set, relation).  For every open complete branch
the engine produced, a depth-first stack search instantiates the query
one conjunct at a time: the leftmost remaining conjunct is matched
purely syntactically against the branch literals, each match extends the
substitution and is pushed, and a node with no remaining conjuncts emits
the composition of the branch's merge map with the accumulated binding.
An unmatched conjunct simply abandons that node.

The answer set is the deduplicated union over branches.  It depends only
on the branch literal sets, so any of the three engines feeds it equally
well, and permuting the conjuncts changes the search shape but not the
set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (SORT0, SORT1, SORT3, Eq, FourlqsError, KnowledgeBase,
                   Literal, Member1, Member3, Substitution, Variable,
                   apply_substitution, atom_vars)
from .engine import Branch, SaturationResult
from .oracle import answer_key
from .syntax import Query, parse_query


class StaleBranchError(FourlqsError):
    """The query and the branch set come from different knowledge bases."""


class TaskArityError(FourlqsError):
    """A retrieval task was given the wrong number of arguments."""


@dataclass(frozen=True, slots=True)
class Answer:
    """One element of an answer set: the query-variable binding plus the
    branch's individual merges that the binding was computed under."""

    binding: Substitution
    merges: Substitution

    def key(self):
        return answer_key(self.binding, self.merges)


@dataclass(frozen=True, slots=True)
class AnswerSet:
    answers: Tuple[Answer, ...]

    def keys(self):
        return {a.key() for a in self.answers}

    def bindings(self):
        return [a.binding for a in self.answers]

    def __len__(self):
        return len(self.answers)

    def __iter__(self):
        return iter(self.answers)


def _set_symbol(atom) -> Optional[Variable]:
    if isinstance(atom, Member1):
        return atom.set1
    if isinstance(atom, Member3):
        return atom.set3
    return None


class BranchIndex:
    """Branch literals bucketed by (atom shape, polarity, set symbol) so
    per-conjunct matching touches only shape-compatible literals; a
    second bucketing without the symbol serves conjuncts whose set slot
    is itself a query variable."""

    def __init__(self, literals: Sequence[Literal]):
        self.by_shape: Dict[Tuple, List[Literal]] = {}
        self.by_symbol: Dict[Tuple, List[Literal]] = {}
        for t in literals:
            shape_key = (type(t.atom), t.positive)
            self.by_shape.setdefault(shape_key, []).append(t)
            self.by_symbol.setdefault(shape_key + (_set_symbol(t.atom),),
                                      []).append(t)

    def candidates(self, q: Literal, qvars) -> List[Literal]:
        shape_key = (type(q.atom), q.positive)
        sym = _set_symbol(q.atom)
        if sym is not None and sym not in qvars:
            return self.by_symbol.get(shape_key + (sym,), [])
        return self.by_shape.get(shape_key, [])


def match_literal(q: Literal, branch, qvars=None) -> List[Substitution]:
    """All substitutions of the query variables of ``q`` under which the
    instantiated literal occurs on the branch, in branch order.

    Matching is syntactic: polarity and atom shape must agree and every
    non-variable slot must be the identical symbol.  ``branch`` may be a
    Branch, a literal sequence, or a prebuilt :class:`BranchIndex`.
    """
    if qvars is None:
        qvars = frozenset(v for v in atom_vars(q.atom)
                          if v.name.startswith("?"))
    if isinstance(branch, BranchIndex):
        index = branch
    else:
        lits = branch.literals if isinstance(branch, Branch) else branch
        index = BranchIndex(list(lits))
    out: List[Substitution] = []
    seen = set()
    qa = q.atom
    for t in index.candidates(q, qvars):
        rho = _unify_atoms(qa, t.atom, qvars)
        if rho is None:
            continue
        key = tuple(sorted((k.name, v.name) for k, v in rho.items()))
        if key in seen:
            continue
        seen.add(key)
        m0 = {k: v for k, v in rho.items() if k.sort == SORT0}
        m1 = {k: v for k, v in rho.items() if k.sort == SORT1}
        m3 = {k: v for k, v in rho.items() if k.sort == SORT3}
        out.append(Substitution(map0=m0, map1=m1, map3=m3))
    return out


def _unify_atoms(qa, ta, qvars) -> Optional[Dict[Variable, Variable]]:
    rho: Dict[Variable, Variable] = {}

    def slot(qv: Variable, tv: Variable) -> bool:
        if qv in qvars:
            bound = rho.get(qv)
            if bound is None:
                rho[qv] = tv
                return True
            return bound is tv
        return qv is tv

    if isinstance(qa, Eq):
        ok = slot(qa.left, ta.left) and slot(qa.right, ta.right)
    elif isinstance(qa, Member1):
        ok = slot(qa.elem, ta.elem) and slot(qa.set1, ta.set1)
    else:
        ok = (slot(qa.first, ta.first) and slot(qa.second, ta.second)
              and slot(qa.set3, ta.set3))
    return rho if ok else None


def answer(q: Query, result: SaturationResult) -> AnswerSet:
    """Run the decision-tree search over every branch in the saturation
    result and return the deduplicated answer set."""
    if q.kb is not None and q.kb is not result.kb:
        raise StaleBranchError("query was parsed against a different "
                               "knowledge base than the branch set")
    if not result.collected:
        raise StaleBranchError("the saturation result did not collect "
                               "branches (collect_branches was off)")
    qvars = q.query_vars()
    found: Dict[Tuple, Answer] = {}
    for br, sigma in result.open_complete:
        index = BranchIndex(br.literals)
        seeded = tuple(apply_substitution(c, sigma) for c in q.conjuncts)
        # Stack of (accumulated binding, remaining instantiated conjuncts).
        stack: List[Tuple[Substitution, Tuple[Literal, ...]]] = [
            (Substitution(), seeded)]
        while stack:
            acc, remaining = stack.pop()
            if not remaining:
                ans = Answer(binding=acc, merges=sigma)
                found.setdefault(ans.key(), ans)
                continue
            head, rest = remaining[0], remaining[1:]
            for rho in match_literal(head, index, qvars):
                stack.append((_merge(acc, rho),
                              tuple(apply_substitution(c, rho) for c in rest)))
    ordered = [found[k] for k in sorted(found)]
    return AnswerSet(tuple(ordered))


def _merge(acc: Substitution, rho: Substitution) -> Substitution:
    return Substitution(map0={**acc.map0, **rho.map0},
                        map1={**acc.map1, **rho.map1},
                        map3={**acc.map3, **rho.map3})


TASK_KINDS = ("role-filler", "concept-retrieval", "role-instance", "cqa")


def task_query(kind: str, args: Sequence[str], kb: KnowledgeBase,
               text: Optional[str] = None) -> Query:
    """Build the query for one of the retrieval tasks.

    role-filler(a, R) asks for every x with (a, x) in R;
    concept-retrieval(a) for every set containing a;
    role-instance(a, b) for every relation containing (a, b);
    cqa passes a user-written query text through.
    """
    def ind(name: str) -> Variable:
        v = kb.lookup(SORT0, name)
        if v is None:
            raise TaskArityError(f"unknown individual {name!r}")
        return v

    if kind == "role-filler":
        if len(args) != 2:
            raise TaskArityError("role-filler needs an individual and a "
                                 "relation name")
        r = kb.lookup(SORT3, args[1])
        if r is None:
            raise TaskArityError(f"unknown relation {args[1]!r}")
        x = Variable(SORT0, "?x")
        lit = Literal(True, Member3(ind(args[0]), x, r))
        return Query((lit,), (x,), (), (), kb=kb)
    if kind == "concept-retrieval":
        if len(args) != 1:
            raise TaskArityError("concept-retrieval needs one individual")
        c = Variable(SORT1, "?c")
        lit = Literal(True, Member1(ind(args[0]), c))
        return Query((lit,), (), (c,), (), kb=kb)
    if kind == "role-instance":
        if len(args) != 2:
            raise TaskArityError("role-instance needs two individuals")
        r = Variable(SORT3, "?r")
        lit = Literal(True, Member3(ind(args[0]), ind(args[1]), r))
        return Query((lit,), (), (), (r,), kb=kb)
    if kind == "cqa":
        if text is None:
            raise TaskArityError("cqa needs a query text")
        return parse_query(text, kb)
    raise TaskArityError(f"unknown task kind {kind!r}; expected one of "
                         f"{', '.join(TASK_KINDS)}")
