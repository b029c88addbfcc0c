"""Situated conditionals: minimal closure over a propositional language."""

from .closure import (
    CompiledKB,
    FormulaRank,
    RankingTuple,
    RankKind,
    compute_ranking,
    exceptional,
    is_consistent,
    minimal_closure_query,
    partition,
    rank_of,
    rational_closure_query,
)
from .kb import (
    SCKB,
    DefeasibleConditional,
    DerivedKBs,
    KBSyntaxError,
    SituatedConditional,
    build_mu,
    conjunctive_form,
    materialise,
    parse_kb,
    parse_query,
    serialize_kb,
)
from .logic import (
    BOT,
    TOP,
    EntailmentOracle,
    Formula,
    FormulaSyntaxError,
    UnknownAtomError,
    Valuation,
    Vocabulary,
    characteristic_formula,
    equivalent,
    evaluate,
    models,
    parse_formula,
    render,
)
from .semantics import (
    INFINF,
    EpistemicInterpretation,
    InconsistentKBError,
    Rank,
    RankedInterpretation,
    build_classical_epistemic_model,
    build_minimal_epistemic_model,
    build_minimal_ranked_model,
    check_convexity,
    counterfactual_shift,
    extract_epistemic,
    extract_ranked,
    satisfies_defeasible,
    satisfies_situated,
)

__all__ = [name for name in dir() if not name.startswith("_")]
