"""Ranked and epistemic interpretations over a finite vocabulary.

Interpretations store one rank per valuation, indexed by valuation index
(see :mod:`situated.logic`). Finite ranks of a ranked interpretation are
ints and the infinite rank is ``math.inf``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from functools import total_ordering

from .kb import SCKB, DefeasibleConditional, SituatedConditional, conjunctive_form
from .logic import (
    EntailmentOracle,
    Formula,
    LogicError,
    Valuation,
    Vocabulary,
    iter_bits,
    model_mask,
)

INF = math.inf

FIN, INF_TIER, INFINF_TIER = 0, 1, 2


class InconsistentKBError(LogicError):
    pass


@total_ordering
@dataclass(frozen=True)
class Rank:
    """An element of ``{(f,i)} + {(inf,i)} + {(inf,inf)}`` ordered tier first."""

    tier: int
    level: int = 0

    def __post_init__(self) -> None:
        if self.tier not in (FIN, INF_TIER, INFINF_TIER) or self.level < 0:
            raise ValueError(f"bad rank ({self.tier}, {self.level})")
        if self.tier == INFINF_TIER and self.level != 0:
            raise ValueError("(inf,inf) has no level")

    @classmethod
    def fin(cls, i: int) -> Rank:
        return cls(FIN, i)

    @classmethod
    def inf(cls, i: int) -> Rank:
        return cls(INF_TIER, i)

    def __lt__(self, other: Rank) -> bool:
        return (self.tier, self.level) < (other.tier, other.level)

    @property
    def is_finite(self) -> bool:
        return self.tier == FIN

    def __str__(self) -> str:
        if self.tier == FIN:
            return f"(f,{self.level})"
        if self.tier == INF_TIER:
            return f"(inf,{self.level})"
        return "(inf,inf)"


INFINF = Rank(INFINF_TIER)


_MASK_CACHE: dict[tuple[str, ...], dict[Formula, int]] = {}


def _masks_for(vocab: Vocabulary, *formulas: Formula) -> list[int]:
    atoms = vocab.atoms
    cache = _MASK_CACHE.get(atoms)
    if cache is None or len(cache) > 100_000:
        if len(_MASK_CACHE) > 64:
            _MASK_CACHE.clear()
        cache = _MASK_CACHE[atoms] = {}
    return [model_mask(f, atoms, cache) for f in formulas]


def _convex(levels: Iterable[int]) -> bool:
    used = set(levels)
    return all(j in used for j in range(max(used, default=-1)))


@dataclass(frozen=True)
class RankedInterpretation:
    vocab: Vocabulary
    ranks: tuple  # int or math.inf per valuation index

    def __post_init__(self) -> None:
        if len(self.ranks) != self.vocab.num_valuations:
            raise ValueError("one rank per valuation required")
        if not _convex(r for r in self.ranks if r != INF):
            raise ValueError("ranked interpretation must be convex")

    def __call__(self, v: Valuation | int):
        return self.ranks[v if isinstance(v, int) else v.index]

    @property
    def finite_mask(self) -> int:
        return sum(1 << k for k, r in enumerate(self.ranks) if r != INF)

    def plausible(self) -> list[Valuation]:
        return [Valuation(self.vocab, k) for k in iter_bits(self.finite_mask)]

    def layers(self) -> dict:
        out: dict = {}
        for k, r in enumerate(self.ranks):
            out.setdefault(r, []).append(Valuation(self.vocab, k))
        return dict(sorted(out.items()))

    def dump(self) -> str:
        lines = []
        for r, vals in sorted(self.layers().items(), reverse=True):
            name = "inf" if r == INF else str(r)
            lines.append(f"{name}: " + ", ".join(v.label() for v in vals))
        return "\n".join(lines)

    def leq(self, other: RankedInterpretation) -> bool:
        return all(a <= b for a, b in zip(self.ranks, other.ranks))


@dataclass(frozen=True)
class EpistemicInterpretation:
    vocab: Vocabulary
    ranks: tuple  # Rank per valuation index

    def __post_init__(self) -> None:
        if len(self.ranks) != self.vocab.num_valuations:
            raise ValueError("one rank per valuation required")

    def __call__(self, v: Valuation | int) -> Rank:
        return self.ranks[v if isinstance(v, int) else v.index]

    def tier_mask(self, tier: int) -> int:
        return sum(1 << k for k, r in enumerate(self.ranks) if r.tier == tier)

    def layers(self) -> dict[Rank, list[Valuation]]:
        out: dict[Rank, list[Valuation]] = {}
        for k, r in enumerate(self.ranks):
            out.setdefault(r, []).append(Valuation(self.vocab, k))
        return dict(sorted(out.items()))

    def dump(self) -> str:
        """One line per non-empty layer, highest rank first."""
        return "\n".join(
            f"{r}: " + ", ".join(v.label() for v in vals)
            for r, vals in sorted(self.layers().items(), reverse=True)
        )

    def leq(self, other: EpistemicInterpretation) -> bool:
        return all(a <= b for a, b in zip(self.ranks, other.ranks))


def check_convexity(E: EpistemicInterpretation) -> bool:
    """Both the finite and the possible-infinite tiers leave no gaps."""
    return _convex(r.level for r in E.ranks if r.tier == FIN) and _convex(
        r.level for r in E.ranks if r.tier == INF_TIER
    )


def _min_subset(ranks: Sequence, mask: int, eligible: Callable) -> int:
    """Bitset of the lowest-ranked valuations of ``mask`` among eligible ones."""
    best = None
    out = 0
    for k in iter_bits(mask):
        r = ranks[k]
        if not eligible(r):
            continue
        if best is None or r < best:
            best, out = r, 1 << k
        elif r == best:
            out |= 1 << k
    return out


def satisfies_defeasible(R: RankedInterpretation, c: DefeasibleConditional) -> bool:
    """The most typical plausible antecedent worlds all satisfy the consequent."""
    a, b = _masks_for(R.vocab, c.antecedent, c.consequent)
    lowest = _min_subset(R.ranks, a, lambda r: r != INF)
    return lowest & ~b == 0


def satisfies_situated(E: EpistemicInterpretation, c: SituatedConditional) -> bool:
    a, b, g = _masks_for(E.vocab, c.antecedent, c.consequent, c.situation)
    tier = FIN if g & E.tier_mask(FIN) else INF_TIER
    lowest = _min_subset(E.ranks, a & g, lambda r: r.tier == tier)
    return lowest & ~b == 0


def extract_ranked(E: EpistemicInterpretation) -> RankedInterpretation:
    return RankedInterpretation(E.vocab, tuple(r.level if r.tier == FIN else INF for r in E.ranks))


def extract_epistemic(R: RankedInterpretation) -> EpistemicInterpretation:
    return EpistemicInterpretation(R.vocab, tuple(INFINF if r == INF else Rank.fin(r) for r in R.ranks))


def counterfactual_shift(E: EpistemicInterpretation) -> EpistemicInterpretation:
    """Move the possible-infinite tier down to the finite tier; all else to (inf,inf)."""
    return EpistemicInterpretation(
        E.vocab, tuple(Rank.fin(r.level) if r.tier == INF_TIER else INFINF for r in E.ranks)
    )


def is_model_ranked(R: RankedInterpretation, C: Iterable[DefeasibleConditional]) -> bool:
    return all(satisfies_defeasible(R, c) for c in C)


def is_model_epistemic(E: EpistemicInterpretation, kb: Iterable[SituatedConditional]) -> bool:
    return all(satisfies_situated(E, c) for c in kb)


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def _vocab_for(C: Sequence[DefeasibleConditional], vocab: Vocabulary | None) -> Vocabulary:
    if vocab is None:
        vocab = Vocabulary()
    missing = [a for c in C for f in (c.antecedent, c.consequent) for a in f.atoms() if a not in vocab]
    if missing:
        raise ValueError(f"atoms {sorted(set(missing))} not in vocabulary")
    if len(vocab) == 0:
        raise ValueError("semantic models need a non-empty vocabulary")
    return vocab


def ranks_from_strata(levels: Sequence[Sequence[DefeasibleConditional]], vocab: Vocabulary) -> tuple:
    """``rank(u)`` = least ``i`` with ``u`` satisfying the materialisation of level ``i``."""
    atoms = vocab.atoms
    cache: dict = {}
    full = vocab.full_mask
    remaining = full
    ranks: list = [INF] * vocab.num_valuations
    for i, level in enumerate(levels):
        sat = full
        for c in level:
            sat &= model_mask(c.materialise(), atoms, cache)
        for k in iter_bits(sat & remaining):
            ranks[k] = i
        remaining &= ~sat
    return tuple(ranks)


def build_minimal_ranked_model(
    C: Sequence[DefeasibleConditional],
    vocab: Vocabulary,
    oracle: EntailmentOracle | None = None,
    *,
    allow_inconsistent: bool = False,
) -> RankedInterpretation:
    """The minimum ranked model of ``C``, read off the exceptionality strata.

    An inconsistent ``C`` raises unless ``allow_inconsistent``, in which case
    its only model (every valuation at infinity) is returned.
    """
    from .closure import compute_ranking

    C = list(C)
    vocab = _vocab_for(C, vocab)
    oracle = oracle or EntailmentOracle()
    ranking = compute_ranking(C, oracle)
    ranks = ranks_from_strata(ranking.levels(), vocab)
    if all(r == INF for r in ranks) and not allow_inconsistent:
        raise InconsistentKBError("conditional knowledge base is inconsistent")
    return RankedInterpretation(vocab, ranks)


def _kb_vocab(kb: SCKB, vocab: Vocabulary | None) -> Vocabulary:
    v = vocab if vocab is not None else kb.vocab
    if len(v) == 0:
        raise ValueError("semantic models need a non-empty vocabulary")
    return v


def build_classical_epistemic_model(
    kb: SCKB, oracle: EntailmentOracle | None = None, vocab: Vocabulary | None = None
) -> EpistemicInterpretation:
    vocab = _kb_vocab(kb, vocab)
    return extract_epistemic(build_minimal_ranked_model(conjunctive_form(kb), vocab, oracle))


def build_minimal_epistemic_model(
    kb: SCKB, oracle: EntailmentOracle | None = None, vocab: Vocabulary | None = None
) -> EpistemicInterpretation:
    """Finite tier from the minimum model of the conjunctive form; the
    possible-infinite tier from the minimum model of the shifted counterfactual
    part, restricted to the implausible valuations."""
    from .closure import partition

    vocab = _kb_vocab(kb, vocab)
    oracle = oracle or EntailmentOracle()
    derived = partition(kb, oracle)
    R = build_minimal_ranked_model(derived.conj_form, vocab, oracle)
    R2 = build_minimal_ranked_model(derived.conj_inf_shift, vocab, oracle, allow_inconsistent=True)
    ranks = []
    for r, r2 in zip(R.ranks, R2.ranks):
        if r != INF:
            ranks.append(Rank.fin(r))
        elif r2 != INF:
            ranks.append(Rank.inf(r2))
        else:
            ranks.append(INFINF)
    return EpistemicInterpretation(vocab, tuple(ranks))
