"""Situated conditional knowledge bases: parsing, serialisation and the
derived conditional sets the closure algorithms consume.

File format, one statement per line::

    # comment
    atoms: b d f p          (optional; pins the vocabulary, strict mode)
    b |~ f                  (situation defaults to true)
    d |~[d] ~f              (situated)
    p -> b                  (bare formula A, read as ~A |~ false)
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .logic import (
    BOT,
    TOP,
    And,
    Formula,
    FormulaSyntaxError,
    Implies,
    LogicError,
    Not,
    Top,
    UnknownAtomError,
    Vocabulary,
    conjunction,
    parse_formula,
    render,
)


class KBSyntaxError(LogicError):
    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
        self.offset = offset


@dataclass(frozen=True)
class DefeasibleConditional:
    """``antecedent |~ consequent``."""

    antecedent: Formula
    consequent: Formula

    def __str__(self) -> str:
        return f"{render(self.antecedent)} |~ {render(self.consequent)}"

    def __post_init__(self) -> None:
        # built once so repeated entailment checks hit the oracle caches
        object.__setattr__(self, "_material", Implies(self.antecedent, self.consequent))

    def materialise(self) -> Formula:
        return self._material


@dataclass(frozen=True)
class SituatedConditional:
    """``antecedent |~[situation] consequent``."""

    antecedent: Formula
    consequent: Formula
    situation: Formula = TOP

    def __str__(self) -> str:
        head = render(self.antecedent)
        tail = render(self.consequent)
        if isinstance(self.situation, Top):
            return f"{head} |~ {tail}"
        return f"{head} |~[{render(self.situation)}] {tail}"

    def conjunctive(self) -> DefeasibleConditional:
        return DefeasibleConditional(And(self.antecedent, self.situation), self.consequent)

    def atoms(self) -> frozenset[str]:
        return self.antecedent.atoms() | self.consequent.atoms() | self.situation.atoms()


@dataclass
class SCKB:
    """Ordered, duplicate-free list of situated conditionals plus its vocabulary."""

    conditionals: list[SituatedConditional] = field(default_factory=list)
    vocab: Vocabulary = field(default_factory=Vocabulary)

    def __post_init__(self) -> None:
        seen: set[SituatedConditional] = set()
        unique = []
        for c in self.conditionals:
            if c not in seen:
                seen.add(c)
                unique.append(c)
        self.conditionals = unique
        for c in unique:
            # keep insertion order of atoms as they first appear
            for f in (c.antecedent, c.situation, c.consequent):
                for name in _atoms_in_order(f):
                    self.vocab.add(name)

    def __len__(self) -> int:
        return len(self.conditionals)

    def __iter__(self):
        return iter(self.conditionals)

    def __str__(self) -> str:
        return serialize_kb(self)


def _atoms_in_order(f: Formula) -> list[str]:
    out: list[str] = []

    def go(g: Formula) -> None:
        name = getattr(g, "name", None)
        if name is not None:
            if name not in out:
                out.append(name)
            return
        for child in g.children():
            go(child)

    go(f)
    return out


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _parse_statement(
    text: str, vocab: Vocabulary, strict: bool, allow_bare: bool, line_no: int | None
) -> SituatedConditional:
    mode = "strict" if strict else "collect"
    split = text.find("|~")

    def formula(part: str, start: int) -> Formula:
        try:
            return parse_formula(part, mode, vocab, offset=len(text[:start].encode("utf-8")))
        except FormulaSyntaxError as e:
            raise KBSyntaxError(str(e), line_no, e.offset) from None
        except UnknownAtomError as e:
            raise KBSyntaxError(str(e), line_no, e.offset) from None

    if split < 0:
        if not allow_bare:
            raise KBSyntaxError("expected 'A |~ B' or 'A |~[G] B'", line_no, 0)
        return SituatedConditional(Not(formula(text, 0)), BOT, TOP)

    left = text[:split]
    rest_start = split + 2
    rest = text[rest_start:]
    situation: Formula = TOP
    stripped = rest.lstrip()
    if stripped.startswith("["):
        open_at = rest_start + (len(rest) - len(stripped))
        close_at = text.find("]", open_at)
        if close_at < 0:
            raise KBSyntaxError("unclosed '[' in situation", line_no, open_at)
        situation = formula(text[open_at + 1 : close_at], open_at + 1)
        rest_start = close_at + 1
        rest = text[rest_start:]
    if not left.strip():
        raise KBSyntaxError("missing antecedent", line_no, 0)
    if not rest.strip():
        raise KBSyntaxError("missing consequent", line_no, rest_start)
    antecedent = formula(left, 0)
    consequent = formula(rest, rest_start)
    return SituatedConditional(antecedent, consequent, situation)


def parse_kb(text: str) -> SCKB:
    """Parse a KB file. Raises :class:`KBSyntaxError` with a line number."""
    vocab = Vocabulary()
    strict = False
    conditionals: list[SituatedConditional] = []
    seen_statement = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.strip()
        if head.startswith("atoms:"):
            if seen_statement or strict:
                raise KBSyntaxError("'atoms:' header must come first and only once", line_no, 0)
            for name in head[len("atoms:") :].replace(",", " ").split():
                try:
                    vocab.add(name)
                except ValueError as e:
                    raise KBSyntaxError(str(e), line_no) from None
            strict = True
            continue
        seen_statement = True
        conditionals.append(_parse_statement(line, vocab, strict, True, line_no))
    return SCKB(conditionals, vocab)


def parse_query(text: str, vocab: Vocabulary | None = None) -> SituatedConditional:
    """Parse ``A |~ B`` or ``A |~[G] B``; unseen atoms extend ``vocab``."""
    if not text.strip():
        raise KBSyntaxError("empty query")
    return _parse_statement(text.strip(), vocab if vocab is not None else Vocabulary(), False, False, None)


def serialize_kb(kb: SCKB, header: bool = False) -> str:
    lines = []
    if header:
        lines.append("atoms: " + " ".join(kb.vocab))
    lines.extend(str(c) for c in kb.conditionals)
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Derived sets
# ---------------------------------------------------------------------------


def conjunctive_form(kb: SCKB | Iterable[SituatedConditional]) -> list[DefeasibleConditional]:
    """``a |~[g] b`` becomes ``a & g |~ b``, order preserved, no simplification."""
    return [c.conjunctive() for c in kb]


def materialise(C: Iterable[DefeasibleConditional]) -> list[Formula]:
    return [c.materialise() for c in C]


def build_mu(E_inf: Sequence[DefeasibleConditional]) -> Formula:
    """Conjunction of the negated antecedents of the fixpoint stratum."""
    return conjunction(Not(c.antecedent) for c in E_inf)


@dataclass(frozen=True)
class DerivedKBs:
    conj_form: list[DefeasibleConditional]
    kb_inf: list[SituatedConditional]
    conj_inf_shift: list[DefeasibleConditional]
    mu: Formula
