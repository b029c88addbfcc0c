"""Propositional formulas, valuations and the entailment oracle.

Formulas are immutable trees. Model sets are computed bit-parallel: a set of
valuations over an n-atom vocabulary is a Python int with one bit per
valuation, so conjunction is ``&`` and negation is xor with the full mask.
Valuation ``k`` assigns atom ``i`` the bit ``n - 1 - i`` of ``k``, which makes
the integer order of valuations equal to the vocabulary-order bitstring order.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from functools import lru_cache

ATOM_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
KEYWORDS = frozenset({"true", "false"})
DEFAULT_ENUMERATION_CAP = 20


class LogicError(Exception):
    """Base class for errors raised by this package."""


class FormulaSyntaxError(LogicError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnknownAtomError(LogicError):
    def __init__(self, atom: str, offset: int | None = None):
        where = "" if offset is None else f" at offset {offset}"
        super().__init__(f"unknown atom {atom!r}{where}")
        self.atom = atom
        self.offset = offset


class EnumerationCapError(LogicError):
    pass


# ---------------------------------------------------------------------------
# Formula AST
# ---------------------------------------------------------------------------


class Formula:
    """Base class of the formula AST.

    Nodes are hashable and compared structurally. Use :func:`equivalent` for
    logical equivalence.
    """

    __slots__ = ("_hash", "_atoms")
    precedence = 6

    def _key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Formula) else False
        return self._hash == other._hash and self._key() == other._key()

    def __hash__(self) -> int:
        return self._hash

    def atoms(self) -> frozenset[str]:
        if self._atoms is None:
            out: set[str] = set()
            for child in self.children():
                out |= child.atoms()
            self._atoms = frozenset(out)
        return self._atoms

    def children(self) -> tuple[Formula, ...]:
        return ()

    def depth(self) -> int:
        kids = self.children()
        return 0 if not kids else 1 + max(k.depth() for k in kids)

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        args = ", ".join(repr(c) for c in self.children())
        return f"{type(self).__name__}({args})"

    # operator sugar for building formulas in code and tests
    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return Not(self)

    def __rshift__(self, other: Formula) -> Formula:
        return Implies(self, other)


class Atom(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        if not ATOM_RE.match(name) or name in KEYWORDS:
            raise ValueError(f"invalid atom name {name!r}")
        self.name = name
        self._hash = hash(("Atom", name))
        self._atoms = frozenset({name})

    def _key(self) -> tuple:
        return (self.name,)

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


class _Constant(Formula):
    __slots__ = ()

    def __init__(self) -> None:
        self._hash = hash(type(self).__name__)
        self._atoms = frozenset()

    def _key(self) -> tuple:
        return ()

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Top(_Constant):
    __slots__ = ()


class Bot(_Constant):
    __slots__ = ()


class Not(Formula):
    __slots__ = ("operand",)
    precedence = 5

    def __init__(self, operand: Formula):
        self.operand = operand
        self._hash = hash(("Not", operand._hash))
        self._atoms = operand._atoms

    def _key(self) -> tuple:
        return (self.operand,)

    def children(self) -> tuple[Formula, ...]:
        return (self.operand,)


class _Binary(Formula):
    __slots__ = ("left", "right")
    symbol = "?"
    right_assoc = False

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._hash = hash((type(self).__name__, left._hash, right._hash))
        self._atoms = None

    def _key(self) -> tuple:
        return (self.left, self.right)

    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)


class And(_Binary):
    __slots__ = ()
    symbol = "&"
    precedence = 4


class Or(_Binary):
    __slots__ = ()
    symbol = "|"
    precedence = 3


class Implies(_Binary):
    __slots__ = ()
    symbol = "->"
    precedence = 2
    right_assoc = True


class Iff(_Binary):
    __slots__ = ()
    symbol = "<->"
    precedence = 1


TOP = Top()
BOT = Bot()


def conjunction(items: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    out: Formula | None = None
    for f in items:
        out = f if out is None else And(out, f)
    return TOP if out is None else out


def disjunction(items: Iterable[Formula]) -> Formula:
    """Left-nested disjunction; the empty disjunction is ``false``."""
    out: Formula | None = None
    for f in items:
        out = f if out is None else Or(out, f)
    return BOT if out is None else out


def render(f: Formula) -> str:
    """Render ``f`` with the fewest parentheses that parse back to ``f``."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Not):
        inner = render(f.operand)
        if f.operand.precedence < Not.precedence:
            inner = f"({inner})"
        return "~" + inner
    assert isinstance(f, _Binary)
    p = f.precedence
    left, right = render(f.left), render(f.right)
    left_min, right_min = (p + 1, p) if f.right_assoc else (p, p + 1)
    if f.left.precedence < left_min:
        left = f"({left})"
    if f.right.precedence < right_min:
        right = f"({right})"
    return f"{left} {f.symbol} {right}"


# ---------------------------------------------------------------------------
# Vocabulary and valuations
# ---------------------------------------------------------------------------


class Vocabulary(Sequence[str]):
    """Ordered set of distinct atom names, kept in first-appearance order."""

    __slots__ = ("_atoms", "_index")

    def __init__(self, atoms: Iterable[str] = ()):
        self._atoms: list[str] = []
        self._index: dict[str, int] = {}
        for a in atoms:
            self.add(a)

    def add(self, atom: str) -> int:
        if atom not in self._index:
            if not ATOM_RE.match(atom) or atom in KEYWORDS:
                raise ValueError(f"invalid atom name {atom!r}")
            self._index[atom] = len(self._atoms)
            self._atoms.append(atom)
        return self._index[atom]

    def extend(self, atoms: Iterable[str]) -> None:
        for a in atoms:
            self.add(a)

    def index(self, atom: str, *args) -> int:  # type: ignore[override]
        try:
            return self._index[atom]
        except KeyError:
            raise UnknownAtomError(atom) from None

    def __contains__(self, atom: object) -> bool:
        return atom in self._index

    def __getitem__(self, i):  # type: ignore[override]
        return self._atoms[i]

    def __len__(self) -> int:
        return len(self._atoms)

    def __iter__(self) -> Iterator[str]:
        return iter(self._atoms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Vocabulary):
            return self._atoms == other._atoms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._atoms))

    def __repr__(self) -> str:
        return f"Vocabulary({self._atoms!r})"

    def copy(self) -> Vocabulary:
        return Vocabulary(self._atoms)

    @property
    def atoms(self) -> tuple[str, ...]:
        return tuple(self._atoms)

    @property
    def num_valuations(self) -> int:
        return 1 << len(self._atoms)

    @property
    def full_mask(self) -> int:
        return (1 << self.num_valuations) - 1

    def valuations(self) -> list[Valuation]:
        return [Valuation(self, k) for k in range(self.num_valuations)]

    def valuation(self, assignment: Mapping[str, bool]) -> Valuation:
        if set(assignment) != set(self._atoms):
            raise ValueError("assignment must cover the vocabulary exactly")
        n = len(self._atoms)
        k = 0
        for i, a in enumerate(self._atoms):
            if assignment[a]:
                k |= 1 << (n - 1 - i)
        return Valuation(self, k)


class Valuation(Mapping[str, bool]):
    """A total truth assignment over a vocabulary, identified by its index."""

    __slots__ = ("vocab", "index")

    def __init__(self, vocab: Vocabulary, index: int):
        if not 0 <= index < vocab.num_valuations:
            raise ValueError("valuation index out of range")
        self.vocab = vocab
        self.index = index

    def __getitem__(self, atom: str) -> bool:
        i = self.vocab.index(atom)
        return bool((self.index >> (len(self.vocab) - 1 - i)) & 1)

    def __iter__(self) -> Iterator[str]:
        return iter(self.vocab)

    def __len__(self) -> int:
        return len(self.vocab)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Valuation):
            return self.index == other.index and self.vocab.atoms == other.vocab.atoms
        return super().__eq__(other)

    def __hash__(self) -> int:
        return hash((self.vocab.atoms, self.index))

    def label(self) -> str:
        """Space-separated literals, e.g. ``p ~d b f``."""
        return " ".join(a if self[a] else "~" + a for a in self.vocab)

    def __repr__(self) -> str:
        return f"Valuation({self.label()!r})"


@lru_cache(maxsize=None)
def atom_mask(position: int, n: int) -> int:
    """Bitset of the valuations (over ``n`` atoms) where atom ``position`` is true."""
    b = n - 1 - position
    block = 1 << b
    unit = ((1 << block) - 1) << block
    period = block << 1
    total = 1 << n
    return unit * (((1 << total) - 1) // ((1 << period) - 1))


def model_mask(f: Formula, atoms: Sequence[str], _cache: dict | None = None) -> int:
    """Bitset of the models of ``f`` over the ordered atom list ``atoms``."""
    memo: dict[Formula, int] = {} if _cache is None else _cache
    hit = memo.get(f)
    if hit is not None:
        return hit
    n = len(atoms)
    full = (1 << (1 << n)) - 1
    index = {a: i for i, a in enumerate(atoms)}

    def go(g: Formula) -> int:
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, Atom):
            try:
                m = atom_mask(index[g.name], n)
            except KeyError:
                raise UnknownAtomError(g.name) from None
        elif isinstance(g, Top):
            m = full
        elif isinstance(g, Bot):
            m = 0
        elif isinstance(g, Not):
            m = full ^ go(g.operand)
        elif isinstance(g, And):
            m = go(g.left) & go(g.right)
        elif isinstance(g, Or):
            m = go(g.left) | go(g.right)
        elif isinstance(g, Implies):
            m = (full ^ go(g.left)) | go(g.right)
        elif isinstance(g, Iff):
            m = full ^ (go(g.left) ^ go(g.right))
        else:  # pragma: no cover
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = m
        return m

    return go(f)


def evaluate(f: Formula, v: Mapping[str, bool]) -> bool:
    """Classical truth value of ``f`` under ``v``."""
    if isinstance(f, Atom):
        try:
            return bool(v[f.name])
        except (KeyError, UnknownAtomError):
            raise UnknownAtomError(f.name) from None
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Not):
        return not evaluate(f.operand, v)
    if isinstance(f, And):
        return evaluate(f.left, v) and evaluate(f.right, v)
    if isinstance(f, Or):
        return evaluate(f.left, v) or evaluate(f.right, v)
    if isinstance(f, Implies):
        return (not evaluate(f.left, v)) or evaluate(f.right, v)
    if isinstance(f, Iff):
        return evaluate(f.left, v) == evaluate(f.right, v)
    raise TypeError(f"not a formula: {f!r}")


def _check_cap(vocab: Vocabulary, cap: int) -> None:
    if len(vocab) > cap:
        raise EnumerationCapError(
            f"vocabulary has {len(vocab)} atoms, enumeration cap is {cap}"
        )


def models(f: Formula, vocab: Vocabulary, cap: int = DEFAULT_ENUMERATION_CAP) -> set[Valuation]:
    """All valuations of ``vocab`` satisfying ``f``."""
    _check_cap(vocab, cap)
    m = model_mask(f, vocab.atoms)
    return {Valuation(vocab, k) for k in iter_bits(m)}


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def minterm(v: Valuation) -> Formula:
    return conjunction(Atom(a) if v[a] else Not(Atom(a)) for a in v.vocab)


def characteristic_formula(V: Iterable[Valuation], vocab: Vocabulary) -> Formula:
    """Disjunction of full minterms, one per valuation, in valuation order."""
    vals = sorted(V, key=lambda v: v.index)
    for v in vals:
        if v.vocab.atoms != vocab.atoms:
            raise ValueError("valuation over a different vocabulary")
    return disjunction(minterm(v) for v in vals)


def formula_atoms(formulas: Iterable[Formula]) -> frozenset[str]:
    out: set[str] = set()
    for f in formulas:
        out |= f.atoms()
    return frozenset(out)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<iff><->)|(?P<imp>->)|(?P<op>[~&|()])|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<bad>\S))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:  # only trailing whitespace remains
            break
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "bad":
            raise FormulaSyntaxError(f"unexpected character {value!r}", _byte_offset(text, start), text)
        tokens.append((kind if kind != "op" else value, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _byte_offset(text: str, char_offset: int) -> int:
    return len(text[:char_offset].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary | None, strict: bool, base_offset: int):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.vocab = vocab
        self.strict = strict
        self.base = base_offset

    def error(self, message: str, char_pos: int) -> FormulaSyntaxError:
        return FormulaSyntaxError(message, self.base + _byte_offset(self.text, char_pos), self.text)

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        if self.peek()[0] == "end":
            raise self.error("empty formula", 0)
        f = self.iff()
        kind, value, pos = self.peek()
        if kind != "end":
            raise self.error(f"unexpected token {value!r}", pos)
        return f

    def iff(self) -> Formula:
        left = self.implies()
        while self.peek()[0] == "iff":
            self.take()
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.disj()
        if self.peek()[0] == "imp":
            self.take()
            return Implies(left, self.implies())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.peek()[0] == "|":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek()[0] == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, value, pos = self.take()
        if kind == "~":
            return Not(self.unary())
        if kind == "(":
            inner = self.iff()
            k2, v2, p2 = self.take()
            if k2 != ")":
                raise self.error("expected ')'" if k2 != "end" else "unclosed '('", p2)
            return inner
        if kind == "name":
            if value == "true":
                return TOP
            if value == "false":
                return BOT
            if self.vocab is not None:
                if value not in self.vocab:
                    if self.strict:
                        raise UnknownAtomError(value, self.base + _byte_offset(self.text, pos))
                    self.vocab.add(value)
            return Atom(value)
        if kind == "end":
            raise self.error("unexpected end of formula", pos)
        raise self.error(f"unexpected token {value!r}", pos)


def parse_formula(
    text: str,
    vocab_mode: str = "collect",
    vocab: Vocabulary | None = None,
    *,
    offset: int = 0,
) -> Formula:
    """Parse ``text`` into a :class:`Formula`.

    Precedence, tightest first: ``~``, ``&``, ``|``, ``->`` (right
    associative), ``<->``. In ``collect`` mode unseen atoms are appended to
    ``vocab`` (when given); in ``strict`` mode they raise
    :class:`UnknownAtomError`. ``offset`` shifts reported error positions.
    """
    if vocab_mode not in ("collect", "strict"):
        raise ValueError("vocab_mode must be 'collect' or 'strict'")
    if vocab_mode == "strict" and vocab is None:
        raise ValueError("strict mode needs a vocabulary")
    if not text or not text.strip():
        raise FormulaSyntaxError("empty formula", offset, text)
    return _Parser(text, vocab, vocab_mode == "strict", offset).parse()


# ---------------------------------------------------------------------------
# Entailment oracle
# ---------------------------------------------------------------------------

BACKENDS = ("truth-table", "search")
_BACKEND_ALIASES = {"tt": "truth-table", "truth-table": "truth-table", "search": "search"}


class EntailmentOracle:
    """Decides classical entailment and counts every query it answers.

    Two backends: ``truth-table`` (bit-parallel enumeration, the reference)
    and ``search`` (Tseitin encoding plus DPLL with unit propagation). A
    handle is single-owner; use one per thread.
    """

    def __init__(self, backend: str = "truth-table", cap: int = DEFAULT_ENUMERATION_CAP):
        try:
            self.backend = _BACKEND_ALIASES[backend]
        except KeyError:
            raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}") from None
        self.cap = cap
        self.calls = 0
        # truth-table state: every atom seen so far, in first-seen order.
        # Entailment is unaffected by extra atoms, so masks are taken over all
        # of them and the caches are dropped only when the registry changes.
        self._atoms: list[str] = []
        self._atom_set: set[str] = set()
        self._full = 1
        self._masks: dict[Formula, int] = {}
        self._conj: dict[tuple[Formula, ...], int] = {}

    def __repr__(self) -> str:
        return f"EntailmentOracle(backend={self.backend!r}, calls={self.calls})"

    def reset(self) -> None:
        self.calls = 0

    def is_satisfiable(self, X: Iterable[Formula]) -> bool:
        self.calls += 1
        X = tuple(X)
        if self.backend == "truth-table":
            self._register(X, None)
            return self._conjoin(X) != 0
        return dpll_satisfiable(tseitin(X))

    def entails(self, X: Iterable[Formula], f: Formula) -> bool:
        """True iff every model of ``X`` is a model of ``f``."""
        self.calls += 1
        X = tuple(X)
        if self.backend == "truth-table":
            self._register(X, f)
            return self._conjoin(X) & ~self._mask(f) == 0
        return not dpll_satisfiable(tseitin(X + (Not(f),)))

    def equivalent(self, f: Formula, g: Formula) -> bool:
        return self.entails([f], g) and self.entails([g], f)

    # -- truth-table internals --

    def _register(self, X: tuple[Formula, ...], f: Formula | None) -> None:
        known = self._atom_set
        new: list[str] = []
        for g in (*X, f) if f is not None else X:
            for a in g.atoms():
                if a not in known and a not in new:
                    new.append(a)
        if not new:
            return
        if len(self._atoms) + len(new) > self.cap:
            # start over with only what this query needs
            needed = formula_atoms(X if f is None else (*X, f))
            if len(needed) > self.cap:
                raise EnumerationCapError(
                    f"{len(needed)} atoms exceeds the truth-table cap of {self.cap}"
                )
            self._atoms, self._atom_set = [], set()
            new = sorted(needed)
        self._atoms.extend(new)
        self._atom_set.update(new)
        self._full = (1 << (1 << len(self._atoms))) - 1
        self._masks.clear()
        self._conj.clear()

    def _mask(self, f: Formula) -> int:
        m = self._masks.get(f)
        if m is None:
            m = model_mask(f, self._atoms, self._masks)
        return m

    def _conjoin(self, X: tuple[Formula, ...]) -> int:
        m = self._conj.get(X)
        if m is None:
            m = self._full
            for g in X:
                m &= self._mask(g)
                if not m:
                    break
            if len(self._conj) > 4096:
                self._conj.clear()
            self._conj[X] = m
        return m


def equivalent(f: Formula, g: Formula, oracle: EntailmentOracle | None = None) -> bool:
    oracle = oracle or EntailmentOracle()
    return oracle.equivalent(f, g)


# -- search backend --------------------------------------------------------


def tseitin(X: Sequence[Formula]) -> list[list[int]]:
    """Equisatisfiable CNF (DIMACS-style int literals) for the conjunction of ``X``."""
    var_of: dict[object, int] = {}
    clauses: list[list[int]] = []

    def fresh(key: object) -> int:
        var_of[key] = len(var_of) + 1
        return var_of[key]

    def lit(g: Formula) -> int:
        key = ("atom", g.name) if isinstance(g, Atom) else g
        hit = var_of.get(key)
        if hit is not None:
            return hit
        if isinstance(g, Atom):
            return fresh(key)
        if isinstance(g, Not):
            return -lit(g.operand)
        if isinstance(g, (Top, Bot)):
            t = fresh(("const",)) if ("const",) not in var_of else var_of[("const",)]
            if [t] not in clauses:
                clauses.append([t])
            return t if isinstance(g, Top) else -t
        a, b = lit(g.left), lit(g.right)
        x = fresh(g)
        if isinstance(g, And):
            clauses.extend([[-x, a], [-x, b], [x, -a, -b]])
        elif isinstance(g, Or):
            clauses.extend([[x, -a], [x, -b], [-x, a, b]])
        elif isinstance(g, Implies):
            clauses.extend([[x, a], [x, -b], [-x, -a, b]])
        elif isinstance(g, Iff):
            clauses.extend([[-x, -a, b], [-x, a, -b], [x, a, b], [x, -a, -b]])
        else:  # pragma: no cover
            raise TypeError(f"not a formula: {g!r}")
        return x

    for g in X:
        clauses.append([lit(g)])
    return clauses


def dpll_satisfiable(clauses: list[list[int]]) -> bool:
    """DPLL with unit propagation and pure-literal elimination."""
    clause_sets = [frozenset(c) for c in clauses]
    # a clause containing x and -x is always true
    clause_sets = [c for c in clause_sets if not any(-l in c for l in c)]
    return _dpll(clause_sets)


def _assign(clauses: list[frozenset[int]], lit: int) -> list[frozenset[int]] | None:
    out = []
    for c in clauses:
        if lit in c:
            continue
        if -lit in c:
            c = c - {-lit}
            if not c:
                return None
        out.append(c)
    return out


def _dpll(clauses: list[frozenset[int]] | None) -> bool:
    while True:
        if clauses is None:
            return False
        if not clauses:
            return True
        unit = next((c for c in clauses if len(c) == 1), None)
        if unit is not None:
            clauses = _assign(clauses, next(iter(unit)))
            continue
        polarity: dict[int, int] = {}
        for c in clauses:
            for l in c:
                polarity[abs(l)] = polarity.get(abs(l), 0) | (1 if l > 0 else 2)
        pure = next((v if p == 1 else -v for v, p in polarity.items() if p != 3), None)
        if pure is not None:
            clauses = _assign(clauses, pure)
            continue
        break
    # branch on the most frequent variable
    counts: dict[int, int] = {}
    for c in clauses:
        for l in c:
            counts[abs(l)] = counts.get(abs(l), 0) + 1
    v = max(counts, key=counts.__getitem__)
    return _dpll(_assign(clauses, v)) or _dpll(_assign(clauses, -v))
