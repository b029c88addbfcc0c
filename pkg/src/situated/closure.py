"""Exceptionality ranking, rational closure and minimal closure.

Every function takes an :class:`EntailmentOracle`; its ``calls`` counter is
the cost measure for the whole pipeline.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

from .kb import (
    SCKB,
    DefeasibleConditional,
    DerivedKBs,
    SituatedConditional,
    build_mu,
    conjunctive_form,
    materialise,
)
from .logic import BOT, And, EntailmentOracle, Formula, Not


@dataclass(frozen=True)
class RankingTuple:
    strata: list[list[DefeasibleConditional]]
    fixpoint: list[DefeasibleConditional]

    @cached_property
    def _materialised(self) -> list[tuple[Formula, ...]]:
        return [tuple(materialise(s)) for s in self.levels()]

    def material(self, i: int | None) -> tuple[Formula, ...]:
        """Materialisation of stratum ``i``, or of the fixpoint when ``i`` is None."""
        return self._materialised[-1 if i is None else i]

    def levels(self) -> list[list[DefeasibleConditional]]:
        """Strata followed by the fixpoint, the order used to rank valuations."""
        return [*self.strata, self.fixpoint]

    def stratum_of(self, c: DefeasibleConditional) -> int | None:
        """Index of the last stratum holding ``c``; None if ``c`` is in the fixpoint."""
        if c in self.fixpoint:
            return None
        idx = None
        for i, s in enumerate(self.strata):
            if c in s:
                idx = i
        return idx


class RankKind(enum.Enum):
    FINITE = "finite"
    INFINITY_LEVEL = "inf-level"
    INFINITE = "infinite"


@dataclass(frozen=True)
class FormulaRank:
    """Rank of a formula with respect to a ranking.

    ``INFINITY_LEVEL`` means the formula is consistent only with the fixpoint
    stratum; its ``level`` is the number of strata, i.e. the first level past
    the last stratum.
    """

    kind: RankKind
    level: int | None = None

    @classmethod
    def finite(cls, i: int) -> FormulaRank:
        return cls(RankKind.FINITE, i)

    @property
    def is_infinite(self) -> bool:
        return self.kind is RankKind.INFINITE

    def __str__(self) -> str:
        return "infinite" if self.is_infinite else str(self.level)


def exceptional(C: Sequence[DefeasibleConditional], oracle: EntailmentOracle) -> list[DefeasibleConditional]:
    """Conditionals of ``C`` whose antecedent the materialisation of ``C`` rules out."""
    mat = tuple(materialise(C))
    return [c for c in C if oracle.entails(mat, Not(c.antecedent))]


def compute_ranking(C: Sequence[DefeasibleConditional], oracle: EntailmentOracle) -> RankingTuple:
    current = list(C)
    strata: list[list[DefeasibleConditional]] = []
    while True:
        nxt = exceptional(current, oracle)
        if len(nxt) == len(current):
            break
        strata.append(current)
        current = nxt
    if not strata:
        strata = [current]
    return RankingTuple(strata, current)


def _rank_in(ranking: RankingTuple, alpha: Formula, oracle: EntailmentOracle) -> FormulaRank:
    neg = Not(alpha)
    for i in range(len(ranking.strata)):
        if not oracle.entails(ranking.material(i), neg):
            return FormulaRank.finite(i)
    if not oracle.entails(ranking.material(None), neg):
        return FormulaRank(RankKind.INFINITY_LEVEL, len(ranking.strata))
    return FormulaRank(RankKind.INFINITE)


def rank_of(
    C: Sequence[DefeasibleConditional],
    alpha: Formula,
    oracle: EntailmentOracle,
    ranking: RankingTuple | None = None,
) -> FormulaRank:
    if ranking is None:
        ranking = compute_ranking(C, oracle)
    return _rank_in(ranking, alpha, oracle)


def _stratum_for(ranking: RankingTuple, r: FormulaRank) -> tuple[Formula, ...]:
    """Materialised stratum consulted for an antecedent of rank ``r``."""
    return ranking.material(r.level if r.kind is RankKind.FINITE else None)


def rational_closure_query(
    C: Sequence[DefeasibleConditional],
    q: DefeasibleConditional,
    oracle: EntailmentOracle,
    ranking: RankingTuple | None = None,
) -> bool:
    if ranking is None:
        ranking = compute_ranking(C, oracle)
    r = _rank_in(ranking, q.antecedent, oracle)
    premises = (*_stratum_for(ranking, r), q.antecedent)
    return oracle.entails(premises, q.consequent)


def _partition(kb: SCKB, conj: list[DefeasibleConditional], ranking: RankingTuple,
               oracle: EntailmentOracle) -> DerivedKBs:
    ranks: dict[Formula, FormulaRank] = {}
    kb_inf = []
    for c in kb:
        if c.situation not in ranks:
            ranks[c.situation] = _rank_in(ranking, c.situation, oracle)
        if ranks[c.situation].is_infinite:
            kb_inf.append(c)
    mu = build_mu(ranking.fixpoint)
    shift = conjunctive_form(kb_inf) + [DefeasibleConditional(mu, BOT)]
    return DerivedKBs(conj, kb_inf, shift, mu)


def partition(kb: SCKB, oracle: EntailmentOracle) -> DerivedKBs:
    """Split off the conditionals whose situation is impossible in every
    finite-rank valuation, and build the set their counterfactual reading uses."""
    conj = conjunctive_form(kb)
    return _partition(kb, conj, compute_ranking(conj, oracle), oracle)


def is_consistent(kb: SCKB, oracle: EntailmentOracle | None = None) -> bool:
    oracle = oracle or EntailmentOracle()
    return oracle.is_satisfiable(materialise(conjunctive_form(kb)))


class CompiledKB:
    """A knowledge base with its rankings computed lazily and cached.

    Queries against one handle share the ranking of the conjunctive form and,
    once needed, the partition and the ranking of the shifted set.
    """

    def __init__(self, kb: SCKB, oracle: EntailmentOracle | None = None):
        self.kb = kb
        self.oracle = oracle or EntailmentOracle()
        self.conj = conjunctive_form(kb)
        self._situation_ranks: dict[Formula, FormulaRank] = {}

    @cached_property
    def consistent(self) -> bool:
        return self.oracle.is_satisfiable(materialise(self.conj))

    @cached_property
    def ranking(self) -> RankingTuple:
        return compute_ranking(self.conj, self.oracle)

    @cached_property
    def derived(self) -> DerivedKBs:
        return _partition(self.kb, self.conj, self.ranking, self.oracle)

    @cached_property
    def shift_ranking(self) -> RankingTuple:
        return compute_ranking(self.derived.conj_inf_shift, self.oracle)

    def situation_rank(self, gamma: Formula) -> FormulaRank:
        r = self._situation_ranks.get(gamma)
        if r is None:
            r = self._situation_ranks[gamma] = _rank_in(self.ranking, gamma, self.oracle)
        return r

    def rank(self, alpha: Formula) -> FormulaRank:
        return _rank_in(self.ranking, alpha, self.oracle)

    def query(self, q: SituatedConditional) -> bool:
        if not self.consistent:
            return True
        flat = DefeasibleConditional(And(q.antecedent, q.situation), q.consequent)
        if not self.situation_rank(q.situation).is_infinite:
            return rational_closure_query(self.conj, flat, self.oracle, self.ranking)
        return rational_closure_query(
            self.derived.conj_inf_shift, flat, self.oracle, self.shift_ranking
        )


def minimal_closure_query(
    kb: SCKB | CompiledKB, q: SituatedConditional, oracle: EntailmentOracle | None = None
) -> bool:
    """Decide whether ``q`` holds in the minimal epistemic model of ``kb``."""
    compiled = kb if isinstance(kb, CompiledKB) else CompiledKB(kb, oracle)
    return compiled.query(q)
