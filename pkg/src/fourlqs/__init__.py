"""Reasoner for a stratified set fragment: KE-style tableau saturation,
model extraction, and higher-order conjunctive query answering."""

from .core import (EPSILON, SORT0, SORT1, SORT3, Eq, FourlqsError,
                   KnowledgeBase, KbBuilder, Literal, MalformedSubstitutionError,
                   Member1, Member3, NamespaceError, PreconditionError,
                   Substitution, UniversalClause, Variable, apply_substitution,
                   complement, compose, free_vars, qvar0, substitution0, var0,
                   var1, var3)
from .engine import (Branch, EngineOptions, EngineStats, Instantiation,
                     ResourceLimitError, SaturationResult, egamma,
                     equality_normalize, is_closed, is_fulfilled, saturate,
                     select_pb_literal)
from .baselines import GroundClause, ground_expand, saturate_foke, saturate_ke
from .hocqa import (Answer, AnswerSet, StaleBranchError, TaskArityError,
                    answer, match_literal, task_query)
from .oracle import (BoundsExceededError, Interpretation, OracleBounds,
                     brute_answers, enumerate_models, extract_model,
                     is_consistent, model_check, reference_saturate)
from .syntax import (ParseError, Query, SourceSpan, parse_kb, parse_query,
                     render, render_answer_set, render_kb,
                     render_model_report, render_query)

__version__ = "0.1.0"
