"""Linear Time Calculus reasoning engine.

Validate LTC theories, derive their initial and transition theories, and run
progression, simulation, invariant proving by induction, and bounded
planning over finite structures.
"""

from .truth import FALSE, TRUE, UNKNOWN, TruthValue
from .syntax import (
    And, Apply, Atom, Category, Definition, ElemTerm, Eq, Exists, FalseLit,
    Forall, Formula, Iff, Implies, InitTerm, Not, Or, Rule, Sort, SortKind,
    SuccTerm, SymbolDecl, Term, Theory, TrueLit, Variable, Vocabulary,
    alpha_equal,
)
from .validate import (
    LtcTheory, LtcValidationFailure, SentenceClass, SentenceKind,
    check_ltc_theory, classify, validate_vocabulary,
)
from .transform import (
    DerivedVocabularies, derive_initial_theory, derive_transition_theory,
    derive_vocabularies, expand_fluent_macro, time_eliminate,
)
from .structure import (
    Chain, FuncTable, PartialStructure, PredTable, chain_to_json,
    chain_to_partial, pair_states, project_bistate, project_state,
    state_from_json, state_to_json, structure_to_chain,
)
from .kleene import kleene_eval
from .wellfounded import eval_theory, satisfies, wf_eval_definition
from .ground import GroundTheory, UnboundedSort, ground
from .solver import ALL, Unsat, minimize, model_expand

__all__ = [name for name in dir() if not name.startswith("_")]
