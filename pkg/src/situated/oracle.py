"""Brute-force semantic oracle for tiny vocabularies.

Interpretations are enumerated as integer code matrices, one row per
interpretation and one column per valuation index:

* ranked: finite rank ``i`` is ``i``; the infinite rank is ``U`` (number of
  valuations), so integer order is rank order.
* epistemic: ``(f,i)`` is ``i``, ``(inf,i)`` is ``U + i`` and ``(inf,inf)``
  is ``2U``, which again makes integer order the rank order.

Satisfaction is evaluated for all rows at once, so minimum models are the
pointwise minimum of the model rows, provided that minimum is itself a row.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .kb import SCKB, DefeasibleConditional, SituatedConditional
from .logic import (
    BOT,
    TOP,
    And,
    Atom,
    Formula,
    Iff,
    Implies,
    LogicError,
    Not,
    Or,
    Vocabulary,
    iter_bits,
    model_mask,
)
from .semantics import (
    FIN,
    INF,
    INF_TIER,
    INFINF,
    EpistemicInterpretation,
    Rank,
    RankedInterpretation,
    satisfies_situated,
)


class BudgetExceededError(LogicError):
    pass


class NoMinimumError(LogicError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_atoms: int = 2
    max_rank_levels: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.max_atoms <= 3:
            raise ValueError("exhaustive enumeration supports 1 to 3 atoms")

    def check(self, vocab: Vocabulary) -> None:
        if len(vocab) > self.max_atoms:
            raise BudgetExceededError(
                f"{len(vocab)} atoms exceeds the enumeration budget of {self.max_atoms}"
            )
        if len(vocab) == 0:
            raise BudgetExceededError("enumeration needs at least one atom")


# ---------------------------------------------------------------------------
# Rank matrices
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def weak_orders(m: int) -> np.ndarray:
    """All convex rank vectors over ``m`` items (ordered set partitions)."""
    rows = np.zeros((1, 0), dtype=np.int8)
    nlev = np.zeros(1, dtype=np.int8)
    for e in range(m):
        parts, lev_parts = [], []
        for j in range(e + 1):
            # join existing level j
            sel = nlev > j
            if sel.any():
                base = rows[sel]
                parts.append(np.hstack([base, np.full((len(base), 1), j, np.int8)]))
                lev_parts.append(nlev[sel])
            # open a new level at position j, pushing levels >= j up
            sel = nlev >= j
            if sel.any():
                base = rows[sel].copy()
                base[base >= j] += 1
                parts.append(np.hstack([base, np.full((len(base), 1), j, np.int8)]))
                lev_parts.append(nlev[sel] + 1)
        rows = np.vstack(parts)
        nlev = np.concatenate(lev_parts).astype(np.int8)
    return rows


def _spread(orders: np.ndarray, positions: Sequence[int], width: int, fill: int) -> np.ndarray:
    out = np.full((len(orders), width), fill, dtype=np.int16)
    if positions:
        out[:, list(positions)] = orders
    return out


@lru_cache(maxsize=None)
def ranked_matrix(n_atoms: int) -> np.ndarray:
    """Every convex ranked interpretation over ``n_atoms`` atoms, as codes."""
    U = 1 << n_atoms
    blocks = []
    for size in range(U + 1):
        for S in itertools.combinations(range(U), size):
            blocks.append(_spread(weak_orders(size), S, U, U))
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def epistemic_matrix(n_atoms: int) -> np.ndarray:
    """Every two-tier convex epistemic interpretation, as codes."""
    U = 1 << n_atoms
    blocks = []
    for tiers in itertools.product((FIN, INF_TIER, 2), repeat=U):
        fin = [k for k in range(U) if tiers[k] == FIN]
        inf = [k for k in range(U) if tiers[k] == INF_TIER]
        a = weak_orders(len(fin)).astype(np.int16)
        b = weak_orders(len(inf)).astype(np.int16) + U
        block = np.full((len(a) * len(b), U), 2 * U, dtype=np.int16)
        if fin:
            block[:, fin] = np.repeat(a, len(b), axis=0)
        if inf:
            block[:, inf] = np.tile(b, (len(a), 1))
        blocks.append(block)
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def count_ranked(n_atoms: int) -> int:
    U = 1 << n_atoms
    return sum(comb(U, m) * len(weak_orders(m)) for m in range(U + 1))


def _columns(mask: int) -> list[int]:
    return list(iter_bits(mask))


def _min_over(M: np.ndarray, mask: int, empty: int) -> np.ndarray:
    cols = _columns(mask)
    if not cols:
        return np.full(len(M), empty, dtype=M.dtype)
    return M[:, cols].min(axis=1)


def ranked_sat_vector(M: np.ndarray, a: int, b: int) -> np.ndarray:
    """Which rows of ranked code matrix ``M`` satisfy the conditional with
    antecedent models ``a`` and consequent models ``b``."""
    U = M.shape[1]
    lo = _min_over(M, a, U)
    bad = _min_over(M, a & ~b, U)
    return (lo >= U) | (bad > lo)


def epistemic_sat_vector(M: np.ndarray, a: int, b: int, g: int) -> np.ndarray:
    U = M.shape[1]
    plausible_g = _min_over(M, g, 2 * U) < U
    bound = np.where(plausible_g, U, 2 * U)
    lo = _min_over(M, a & g, 2 * U)
    bad = _min_over(M, a & g & ~b, 2 * U)
    return (lo >= bound) | (bad > lo)


def _decode_ranked(vocab: Vocabulary, row: np.ndarray) -> RankedInterpretation:
    U = vocab.num_valuations
    return RankedInterpretation(vocab, tuple(INF if c >= U else int(c) for c in row))


def _decode_epistemic(vocab: Vocabulary, row: np.ndarray) -> EpistemicInterpretation:
    U = vocab.num_valuations
    ranks = []
    for c in row:
        c = int(c)
        ranks.append(Rank.fin(c) if c < U else Rank.inf(c - U) if c < 2 * U else INFINF)
    return EpistemicInterpretation(vocab, tuple(ranks))


def encode_epistemic(E: EpistemicInterpretation) -> np.ndarray:
    U = E.vocab.num_valuations
    return np.array([r.level + U * r.tier for r in E.ranks], dtype=np.int16)


def _model_rows_ranked(C, vocab: Vocabulary, budget: EnumerationBudget) -> np.ndarray:
    budget.check(vocab)
    M = ranked_matrix(len(vocab))
    keep = np.ones(len(M), dtype=bool)
    atoms = vocab.atoms
    cache: dict = {}
    for c in C:
        keep &= ranked_sat_vector(M, model_mask(c.antecedent, atoms, cache), model_mask(c.consequent, atoms, cache))
    if budget.max_rank_levels is not None:
        U = M.shape[1]
        finite = np.where(M < U, M, -1)
        keep &= finite.max(axis=1) < budget.max_rank_levels
    return M[keep]


def _model_rows_epistemic(kb, vocab: Vocabulary, budget: EnumerationBudget) -> np.ndarray:
    budget.check(vocab)
    M = epistemic_matrix(len(vocab))
    keep = np.ones(len(M), dtype=bool)
    atoms = vocab.atoms
    cache: dict = {}
    for c in kb:
        keep &= epistemic_sat_vector(
            M,
            model_mask(c.antecedent, atoms, cache),
            model_mask(c.consequent, atoms, cache),
            model_mask(c.situation, atoms, cache),
        )
    return M[keep]


def _unique_minimum(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        raise NoMinimumError("no model found")
    low = rows.min(axis=0)
    if not (rows == low).all(axis=1).any():
        raise NoMinimumError("pointwise minimum of the models is not itself a model")
    return low


def enumerate_ranked_models(
    C: Sequence[DefeasibleConditional], vocab: Vocabulary, budget: EnumerationBudget | None = None
) -> Iterator[RankedInterpretation]:
    budget = budget or EnumerationBudget(max_atoms=3)
    for row in _model_rows_ranked(C, vocab, budget):
        yield _decode_ranked(vocab, row)


def brute_minimal_ranked_model(
    C: Sequence[DefeasibleConditional], vocab: Vocabulary, budget: EnumerationBudget | None = None
) -> RankedInterpretation:
    budget = budget or EnumerationBudget(max_atoms=3)
    return _decode_ranked(vocab, _unique_minimum(_model_rows_ranked(C, vocab, budget)))


def enumerate_epistemic_models(
    kb: SCKB | Sequence[SituatedConditional], vocab: Vocabulary, budget: EnumerationBudget | None = None
) -> Iterator[EpistemicInterpretation]:
    budget = budget or EnumerationBudget()
    for row in _model_rows_epistemic(kb, vocab, budget):
        yield _decode_epistemic(vocab, row)


def brute_minimal_epistemic_model(
    kb: SCKB | Sequence[SituatedConditional], vocab: Vocabulary, budget: EnumerationBudget | None = None
) -> EpistemicInterpretation:
    """Pointwise minimum over all epistemic models; raises if it is not unique."""
    budget = budget or EnumerationBudget()
    return _decode_epistemic(vocab, _unique_minimum(_model_rows_epistemic(kb, vocab, budget)))


# ---------------------------------------------------------------------------
# Independent constructions for larger vocabularies
# ---------------------------------------------------------------------------


def greedy_minimal_ranked_model(C: Sequence[DefeasibleConditional], vocab: Vocabulary) -> RankedInterpretation:
    """Minimum ranked model built world by world.

    Each level takes every remaining valuation that violates no remaining
    conditional; conditionals whose antecedent holds somewhere on that level
    are then discharged.
    """
    atoms = vocab.atoms
    cache: dict = {}
    pending = [(model_mask(c.antecedent, atoms, cache), model_mask(c.consequent, atoms, cache)) for c in C]
    left = vocab.full_mask
    ranks: list = [INF] * vocab.num_valuations
    level = 0
    while left:
        ok = left
        for a, b in pending:
            ok &= ~a | b
        if not ok:
            break
        for k in iter_bits(ok):
            ranks[k] = level
        pending = [(a, b) for a, b in pending if not a & ok]
        left &= ~ok
        level += 1
    return RankedInterpretation(vocab, tuple(ranks))


def random_epistemic_interpretation(vocab: Vocabulary, rng: np.random.Generator,
                                    tier_weights=(0.5, 0.3, 0.2)) -> EpistemicInterpretation:
    U = vocab.num_valuations
    tiers = rng.choice(3, size=U, p=np.asarray(tier_weights) / sum(tier_weights))
    raw = rng.integers(0, U, size=U)
    return _normalise(vocab, tiers, raw)


def _normalise(vocab: Vocabulary, tiers, raw) -> EpistemicInterpretation:
    """Compress levels per tier so both tiers are convex."""
    ranks: list = [None] * len(tiers)
    for tier in (FIN, INF_TIER):
        idx = [k for k in range(len(tiers)) if tiers[k] == tier]
        dense = {v: i for i, v in enumerate(sorted({int(raw[k]) for k in idx}))}
        for k in idx:
            ranks[k] = Rank(tier, dense[int(raw[k])])
    return EpistemicInterpretation(vocab, tuple(INFINF if r is None else r for r in ranks))


def perturb(E: EpistemicInterpretation, rng: np.random.Generator, moves: int = 2) -> EpistemicInterpretation:
    """Move a few valuations to random ranks, then restore convexity."""
    U = E.vocab.num_valuations
    tiers = [r.tier for r in E.ranks]
    raw = [2 * r.level for r in E.ranks]
    for _ in range(moves):
        k = int(rng.integers(U))
        tiers[k] = int(rng.integers(3))
        raw[k] = int(rng.integers(0, 2 * U + 1))
    return _normalise(E.vocab, tiers, raw)


def dominance_check(kb, E: EpistemicInterpretation, rng: np.random.Generator, samples: int = 10_000) -> dict:
    """Sample perturbations of ``E``; every one that is a model must lie above ``E``."""
    models_seen = 0
    violations = 0
    for _ in range(samples):
        F = perturb(E, rng, moves=int(rng.integers(1, 4)))
        if all(satisfies_situated(F, c) for c in kb):
            models_seen += 1
            if not E.leq(F):
                violations += 1
    return {"samples": samples, "models": models_seen, "violations": violations}


# ---------------------------------------------------------------------------
# Postulates
# ---------------------------------------------------------------------------


def grammar(atoms: Sequence[str], depth: int) -> list[Formula]:
    """All formulas of nesting depth at most ``depth``."""
    layers = [[TOP, BOT, *(Atom(a) for a in atoms)]]
    everything = list(layers[0])
    for _ in range(depth):
        prev = everything
        new = [Not(f) for f in prev]
        for op in (And, Or, Implies, Iff):
            new.extend(op(f, g) for f in prev for g in prev)
        seen = set(everything)
        everything = everything + [f for f in new if f not in seen and not seen.add(f)]
    return everything


@lru_cache(maxsize=None)
def _representatives(atoms: tuple[str, ...], depth: int) -> dict[int, list[Formula]]:
    """Per semantic class, the two shortest distinct formulas of the grammar."""
    out: dict[int, list[Formula]] = {}
    cache: dict = {}
    for f in sorted(grammar(atoms, depth), key=lambda f: (f.depth(), len(str(f)), str(f))):
        reps = out.setdefault(model_mask(f, atoms, cache), [])
        if len(reps) < 2:
            reps.append(f)
    return out


def situated_table(E: EpistemicInterpretation) -> np.ndarray:
    """``T[a, b, g]``: does ``E`` satisfy the conditional with these model sets."""
    U = E.vocab.num_valuations
    n = 1 << U
    codes = encode_epistemic(E)
    member = (np.arange(n)[:, None] >> np.arange(U)[None, :]) & 1
    minc = np.where(member.astype(bool), codes[None, :], 2 * U).min(axis=1)
    m = np.arange(n)
    a, b, g = np.ix_(m, m, m)
    lo = minc[a & g]
    bad = minc[a & g & ~b & (n - 1)]
    bound = np.where(minc[g] < U, U, 2 * U)
    return (lo >= bound) | (bad > lo)


def _imp(p, q) -> np.ndarray:
    return ~np.asarray(p) | np.asarray(q)


def check_postulates(E: EpistemicInterpretation, grammar_depth: int = 2) -> dict:
    """Check every situated postulate for ``E`` over the formula grammar.

    Meta-variables range over the semantic classes of grammar formulas; LLE
    and Ext are also checked syntactically on two distinct formulas per class.
    Returns ``{name: {"instances", "violations", "witness"}}``; ``Cons=>`` is
    reported but not expected to hold.
    """
    if len(E.vocab) > 2 or grammar_depth > 2:
        raise BudgetExceededError("postulate checks need at most 2 atoms and depth 2")
    U = E.vocab.num_valuations
    n = 1 << U
    full, top, bot = n - 1, n - 1, 0
    T = situated_table(E)
    reps = _representatives(E.vocab.atoms, grammar_depth)
    cls = np.array(sorted(reps))
    A, B, G, D = np.ix_(cls, cls, cls, cls)
    A3, B3, G3 = np.ix_(cls, cls, cls)
    A2, G2 = np.ix_(cls, cls)
    report: dict = {}

    def record(name: str, holds: np.ndarray, names: Sequence[str]) -> None:
        holds = np.broadcast_to(holds, (len(cls),) * len(names))
        bad = np.argwhere(~holds)
        witness = None
        if len(bad):
            witness = {v: _label(E.vocab, int(cls[i]), reps) for v, i in zip(names, bad[0])}
        report[name] = {"instances": int(holds.size), "violations": int(len(bad)), "witness": witness}

    ag = ("alpha", "gamma")
    ab = ("alpha", "beta")
    abg = ("alpha", "beta", "gamma")
    abgd = ("alpha", "beta", "gamma", "delta")
    record("Ref", T[A2, A2, G2], ag)
    record("And", _imp(T[A, B, G] & T[A, D, G], T[A, B & D, G]), abgd)
    record("Or", _imp(T[A, D, G] & T[B, D, G], T[A | B, D, G]), abgd)
    record("RW", _imp(T[A, B, G] & ((B & ~D & full) == 0), T[A, D, G]), abgd)
    record("RM", _imp(T[A, B, G] & ~T[A, ~D & full, G], T[A & D, B, G]), abgd)
    record("Inc", _imp(T[A3, B3, G3], T[A3 & G3, B3, top]), abg)
    record("Vac", _imp(~T[top, ~G3 & full, top] & T[A3 & G3, B3, top], T[A3, B3, G3]), abg)
    record("SupExp", _imp(T[A, B, G & D], T[A & G, B, D]), abgd)
    record("SubExp", _imp(T[D, bot, top] & T[A & G, B, D], T[A, B, G & D]), abgd)
    record("Succ", T[A2, G2, G2], ag)
    record("Incons", T[A2, G2, bot], ab)
    record("Cond", _imp(~T[G3, bot, top], T[A3 & G3, B3, top] == T[A3, B3, G3]), abg)
    report["Cons<="] = {"instances": 1, "violations": int(not T[top, bot, bot]), "witness": None}
    bad_g = sorted(
        (int(g) for g in cls if g != bot and T[top, bot, g]),
        key=lambda g: (reps[g][0].depth(), str(reps[g][0])),
    )
    report["Cons=>"] = {
        "instances": len(cls),
        "violations": len(bad_g),
        "witness": {"gamma": _label(E.vocab, bad_g[0], reps)} if bad_g else None,
    }
    _syntactic_checks(E, T, reps, report)
    return report


def _label(vocab: Vocabulary, mask: int, reps: dict) -> str:
    return str(reps[mask][0])


def _syntactic_checks(E: EpistemicInterpretation, T: np.ndarray, reps: dict, report: dict) -> None:
    """LLE and Ext on syntactically different but equivalent formulas,
    evaluated through the formula-level satisfaction relation."""
    pairs = [(m, fs) for m, fs in sorted(reps.items()) if len(fs) == 2]
    firsts = [(m, fs[0]) for m, fs in sorted(reps.items())]
    for name, slot in (("LLE", 0), ("Ext", 2)):
        count = bad = 0
        witness = None
        for m, (f1, f2) in pairs:
            for (mb, fb), (mg, fg) in itertools.product(firsts, firsts):
                if slot == 0:
                    c1 = SituatedConditional(f1, fb, fg)
                    c2 = SituatedConditional(f2, fb, fg)
                    expected = T[m, mb, mg]
                else:
                    c1 = SituatedConditional(fg, fb, f1)
                    c2 = SituatedConditional(fg, fb, f2)
                    expected = T[mg, mb, m]
                count += 1
                r1, r2 = satisfies_situated(E, c1), satisfies_situated(E, c2)
                if not (r1 == r2 == bool(expected)):
                    bad += 1
                    witness = witness or {"first": str(c1), "second": str(c2)}
        report[name] = {"instances": count, "violations": bad, "witness": witness}
