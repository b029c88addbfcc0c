"""Instance generators and helpers shared by the test modules."""

from __future__ import annotations

import itertools
import random
from collections.abc import Iterator, Sequence

from situated import (
    SCKB,
    CompiledKB,
    EntailmentOracle,
    SituatedConditional,
    Vocabulary,
    build_minimal_epistemic_model,
    satisfies_situated,
)
from situated.logic import And, Atom, Formula, Iff, Implies, Not, Or, TOP, BOT, model_mask
from situated.oracle import grammar


def class_representatives(atoms: Sequence[str], depth: int) -> dict[int, Formula]:
    """Shortest grammar formula for each semantic class reachable at ``depth``."""
    atoms = tuple(atoms)
    cache: dict = {}
    out: dict[int, Formula] = {}
    for f in sorted(grammar(atoms, depth), key=lambda f: (f.depth(), len(str(f)), str(f))):
        out.setdefault(model_mask(f, atoms, cache), f)
    return out


def conditional_key(c: SituatedConditional, atoms: Sequence[str], cache: dict | None = None) -> tuple[int, int, int]:
    """Model sets of situation, antecedent-in-situation and the part of it satisfying the consequent.

    Satisfaction and every entailment the closure algorithms make depend on
    a conditional only through this triple.
    """
    cache = {} if cache is None else cache
    a, b, g = (model_mask(f, atoms, cache) for f in (c.antecedent, c.consequent, c.situation))
    return g, a & g, a & g & b


def grammar_conditionals(atoms: Sequence[str], depth: int) -> dict[tuple[int, int, int], SituatedConditional]:
    """One conditional per key, over all (antecedent, consequent, situation) grammar triples."""
    reps = list(class_representatives(atoms, depth).values())
    cache: dict = {}
    out: dict[tuple[int, int, int], SituatedConditional] = {}
    for a, b, g in itertools.product(reps, repeat=3):
        c = SituatedConditional(a, b, g)
        out.setdefault(conditional_key(c, atoms, cache), c)
    return out


def swap_bits(mask: int, n_atoms: int, i: int, j: int) -> int:
    """Image of a model set under exchanging atoms ``i`` and ``j``."""
    out = 0
    bi, bj = n_atoms - 1 - i, n_atoms - 1 - j
    for k in range(1 << n_atoms):
        if mask >> k & 1:
            x, y = k >> bi & 1, k >> bj & 1
            kk = k & ~(1 << bi) & ~(1 << bj) | (y << bi) | (x << bj)
            out |= 1 << kk
    return out


def signature(compiled: CompiledKB, atoms: Sequence[str]) -> tuple:
    """Model sets of every materialised stratum the queries can consult."""
    cache: dict = {}

    def masks(ranking) -> tuple[int, ...]:
        out = []
        for i in [*range(len(ranking.strata)), None]:
            m = (1 << (1 << len(atoms))) - 1
            for f in ranking.material(i):
                m &= model_mask(f, atoms, cache)
            out.append(m)
        return tuple(out)

    return masks(compiled.ranking), masks(compiled.shift_ranking)


_BINARY = (And, Or, Implies, Iff)


def random_formula(rng: random.Random, atoms: Sequence[str], depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.08:
            return TOP
        if r < 0.12:
            return BOT
        return Atom(rng.choice(atoms))
    if rng.random() < 0.25:
        return Not(random_formula(rng, atoms, depth - 1))
    op = rng.choice(_BINARY)
    return op(random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1))


def random_conditional(rng: random.Random, atoms: Sequence[str], depth: int = 2,
                       p_top_situation: float = 0.5) -> SituatedConditional:
    a = random_formula(rng, atoms, depth)
    b = random_formula(rng, atoms, depth)
    g = TOP if rng.random() < p_top_situation else random_formula(rng, atoms, depth)
    return SituatedConditional(a, b, g)


def random_kb(rng: random.Random, atoms: Sequence[str], size: int, depth: int = 2,
              consistent: bool = True, max_tries: int = 1000) -> SCKB:
    """Random KB over exactly ``atoms`` (pinned vocabulary)."""
    for _ in range(max_tries):
        kb = SCKB([random_conditional(rng, atoms, depth) for _ in range(size)], Vocabulary(atoms))
        if not consistent or CompiledKB(kb).consistent:
            return kb
    raise RuntimeError("could not draw a consistent KB")


def two_atom_kbs(max_size: int = 3) -> Iterator[tuple[tuple, SCKB]]:
    """Every KB of up to ``max_size`` distinct depth-1 grammar conditionals over
    two atoms, one per orbit of the atom swap."""
    atoms = ("p", "q")
    conds = grammar_conditionals(atoms, 1)
    keys = sorted(conds)
    keyset = set(keys)
    swapped = {k: tuple(swap_bits(x, 2, 0, 1) for x in k) for k in keys}
    assert all(v in keyset for v in swapped.values())
    for r in range(max_size + 1):
        for combo in itertools.combinations(keys, r):
            if tuple(sorted(swapped[k] for k in combo)) < combo:
                continue
            yield combo, SCKB([conds[k] for k in combo], Vocabulary(atoms))


def check_agreement(kb: SCKB, queries: Sequence[SituatedConditional], engine: str = "tt",
                    compiled: CompiledKB | None = None, model=None) -> list[SituatedConditional]:
    """Queries on which the algorithm and the constructed model disagree."""
    compiled = compiled or CompiledKB(kb, EntailmentOracle(engine))
    model = model or build_minimal_epistemic_model(kb, compiled.oracle)
    return [q for q in queries if compiled.query(q) != satisfies_situated(model, q)]
