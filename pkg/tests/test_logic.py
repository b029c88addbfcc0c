import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from situated.logic import (
    BOT,
    TOP,
    And,
    Atom,
    Bot,
    EntailmentOracle,
    EnumerationCapError,
    FormulaSyntaxError,
    Iff,
    Implies,
    Not,
    Or,
    Top,
    UnknownAtomError,
    Valuation,
    Vocabulary,
    atom_mask,
    characteristic_formula,
    dpll_satisfiable,
    equivalent,
    evaluate,
    model_mask,
    models,
    parse_formula,
    render,
    tseitin,
)

p, q, r, b, f = (Atom(x) for x in "pqrbf")


def formulas(atoms=("p", "q", "r"), max_leaves=12):
    leaves = st.sampled_from([TOP, BOT] + [Atom(a) for a in atoms])
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(Not, sub),
            st.builds(And, sub, sub),
            st.builds(Or, sub, sub),
            st.builds(Implies, sub, sub),
            st.builds(Iff, sub, sub),
        ),
        max_leaves=max_leaves,
    )


class TestParser:
    def test_precedence(self):
        assert parse_formula("p & ~b -> f") == Implies(And(p, Not(b)), f)

    def test_keywords(self):
        assert parse_formula("true") == TOP
        assert isinstance(parse_formula("false"), Bot)

    def test_implication_right_associative(self):
        assert parse_formula("p -> q -> r") == Implies(p, Implies(q, r))

    def test_other_binaries_left_associative(self):
        assert parse_formula("p & q & r") == And(And(p, q), r)
        assert parse_formula("p <-> q <-> r") == Iff(Iff(p, q), r)

    def test_full_precedence_chain(self):
        got = parse_formula("~p & q | r -> p <-> q")
        assert got == Iff(Implies(Or(And(Not(p), q), r), p), q)

    def test_parentheses_override(self):
        assert parse_formula("p & (q | r)") == And(p, Or(q, r))
        assert parse_formula("(p -> q) -> r") == Implies(Implies(p, q), r)

    def test_collect_mode_extends_vocabulary(self):
        vocab = Vocabulary(["q"])
        parse_formula("p & q | r", "collect", vocab)
        assert list(vocab) == ["q", "p", "r"]

    def test_strict_mode_rejects_unknown_atom(self):
        with pytest.raises(UnknownAtomError) as err:
            parse_formula("p & zz", "strict", Vocabulary(["p"]))
        assert err.value.offset == 4

    @pytest.mark.parametrize(
        "text, offset",
        [("p &", 3), ("p q", 2), ("(p", 2), ("p $ q", 2), ("", 0), ("p -> )", 5)],
    )
    def test_syntax_errors_carry_byte_offset(self, text, offset):
        with pytest.raises(FormulaSyntaxError) as err:
            parse_formula(text)
        assert err.value.offset == offset

    def test_offset_counts_bytes(self):
        with pytest.raises(FormulaSyntaxError) as err:
            parse_formula("p & é")
        assert err.value.offset == 4

    def test_keyword_not_an_atom(self):
        assert parse_formula("true & p").atoms() == {"p"}

    @settings(max_examples=300, deadline=None)
    @given(formulas(max_leaves=40))
    def test_round_trip(self, g):
        assert parse_formula(render(g)) == g

    def test_round_trip_deep(self):
        rng = random.Random(7)

        def gen(d):
            if d == 0:
                return rng.choice([TOP, BOT, p, q, r])
            k = rng.randrange(5)
            if k == 0:
                return Not(gen(d - 1))
            return (And, Or, Implies, Iff)[k - 1](gen(d - 1), gen(d - 1))

        for _ in range(200):
            g = gen(6)
            assert parse_formula(render(g)) == g


class TestEvaluate:
    def test_examples(self):
        vocab = Vocabulary(["p", "b"])
        v = vocab.valuation({"p": True, "b": False})
        assert evaluate(And(p, Not(b)), v)
        assert evaluate(TOP, v)
        assert not evaluate(Implies(p, b), v)

    def test_missing_atom(self):
        with pytest.raises(UnknownAtomError):
            evaluate(q, {"p": True})

    @settings(max_examples=200, deadline=None)
    @given(formulas())
    def test_mask_agrees_with_evaluation(self, g):
        vocab = Vocabulary(["p", "q", "r"])
        mask = model_mask(g, vocab.atoms)
        for v in vocab.valuations():
            assert bool(mask >> v.index & 1) == evaluate(g, v)


class TestValuations:
    def test_index_order_is_bitstring_order(self):
        vocab = Vocabulary(["p", "q"])
        labels = [v.label() for v in vocab.valuations()]
        assert labels == ["~p ~q", "~p q", "p ~q", "p q"]

    def test_atom_mask(self):
        assert atom_mask(0, 2) == 0b1100
        assert atom_mask(1, 2) == 0b1010

    def test_domain_is_vocabulary(self):
        v = Valuation(Vocabulary(["a", "b"]), 2)
        assert dict(v) == {"a": True, "b": False}

    def test_vocabulary_rejects_bad_names(self):
        with pytest.raises(ValueError):
            Vocabulary(["1x"])
        with pytest.raises(ValueError):
            Vocabulary(["true"])

    def test_vocabulary_first_appearance_order(self):
        vocab = Vocabulary(["b", "a", "b"])
        assert list(vocab) == ["b", "a"]


class TestModels:
    def test_single_atom(self):
        vocab = Vocabulary(["p", "q"])
        assert {v.label() for v in models(p, vocab)} == {"p q", "p ~q"}

    def test_bot(self):
        assert models(BOT, Vocabulary(["p"])) == set()

    def test_disjunction_count(self):
        assert len(models(Or(p, q), Vocabulary(["p", "q"]))) == 3

    def test_cap(self):
        vocab = Vocabulary([f"a{i}" for i in range(21)])
        with pytest.raises(EnumerationCapError):
            models(TOP, vocab)


class TestCharacteristicFormula:
    def test_single_minterm(self):
        vocab = Vocabulary(["p", "q"])
        v = vocab.valuation({"p": True, "q": True})
        assert characteristic_formula([v], vocab) == And(p, q)

    def test_empty(self):
        assert characteristic_formula([], Vocabulary(["p"])) == BOT

    def test_two_minterms(self):
        vocab = Vocabulary(["p", "q"])
        vals = [vocab.valuation({"p": True, "q": x}) for x in (True, False)]
        fm = characteristic_formula(vals, vocab)
        assert fm == Or(And(p, Not(q)), And(p, q))
        assert equivalent(fm, p)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_models_exactly_v(self, n):
        vocab = Vocabulary([f"x{i}" for i in range(n)])
        for mask in range(1 << (1 << n)):
            vals = [Valuation(vocab, k) for k in range(1 << n) if mask >> k & 1]
            assert model_mask(characteristic_formula(vals, vocab), vocab.atoms) == mask


@pytest.fixture(params=["truth-table", "search"])
def oracle(request):
    return EntailmentOracle(request.param)


class TestEntailment:
    def test_chaining(self, oracle):
        assert oracle.entails([Implies(p, b), Implies(b, f)], Implies(p, f))

    def test_empty_premises(self, oracle):
        assert not oracle.entails([], p)
        assert oracle.entails([], Or(p, Not(p)))

    def test_contradictory_consequences(self, oracle):
        assert oracle.entails([Implies(p, f), Implies(p, Not(f))], Not(p))

    def test_counter_increments_once_per_call(self, oracle):
        oracle.entails([p], p)
        oracle.is_satisfiable([p, Not(p)])
        oracle.entails([], TOP)
        assert oracle.calls == 3
        oracle.reset()
        assert oracle.calls == 0

    def test_satisfiability(self, oracle):
        assert oracle.is_satisfiable([])
        assert not oracle.is_satisfiable([BOT])
        assert not oracle.is_satisfiable([p, Not(p)])
        assert oracle.is_satisfiable([Or(p, q), Not(p)])

    def test_equivalence(self, oracle):
        assert oracle.equivalent(Implies(p, q), Or(Not(p), q))
        assert not oracle.equivalent(p, q)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            EntailmentOracle("bdd")

    def test_alias(self):
        assert EntailmentOracle("tt").backend == "truth-table"

    def test_registry_grows_without_changing_answers(self):
        o = EntailmentOracle()
        assert o.entails([Implies(p, q), p], q)
        assert not o.entails([Implies(r, b)], b)
        assert o.entails([Implies(p, q), p], q)

    def test_truth_table_cap(self):
        o = EntailmentOracle(cap=3)
        assert o.entails([p, q], And(p, q))
        assert o.entails([r, b], Or(r, b))  # registry restarts instead of growing past the cap
        with pytest.raises(EnumerationCapError):
            o.entails([p, q, r], b)


class TestBackendAgreement:
    def test_random_six_atoms(self):
        rng = random.Random(2024)
        names = [f"a{i}" for i in range(6)]

        def gen(d):
            if d == 0 or rng.random() < 0.25:
                return rng.choice([TOP, BOT] + [Atom(x) for x in names] * 3)
            k = rng.randrange(5)
            if k == 0:
                return Not(gen(d - 1))
            return (And, Or, Implies, Iff)[k - 1](gen(d - 1), gen(d - 1))

        tt, search = EntailmentOracle("tt"), EntailmentOracle("search")
        for _ in range(1000):
            X = [gen(3) for _ in range(rng.randrange(4))]
            g = gen(3)
            assert tt.entails(X, g) == search.entails(X, g)

    @settings(max_examples=300, deadline=None)
    @given(st.lists(formulas(max_leaves=8), max_size=4), formulas(max_leaves=8))
    def test_deduction_reduction(self, X, g):
        for backend in ("truth-table", "search"):
            o = EntailmentOracle(backend)
            assert o.entails(X, g) == (not o.is_satisfiable([*X, Not(g)]))


class TestSearchBackend:
    def test_tseitin_is_equisatisfiable(self):
        vocab = Vocabulary(["p", "q", "r"])
        for g in [And(p, Not(p)), Or(p, q), Iff(p, Not(p)), Implies(TOP, BOT), Not(BOT)]:
            assert dpll_satisfiable(tseitin([g])) == bool(model_mask(g, vocab.atoms))

    def test_exhaustive_small_cnf(self):
        # every clause set over two variables with clauses of width <= 2
        lits = [1, -1, 2, -2]
        clauses = [[a] for a in lits] + [list(c) for c in itertools.combinations(lits, 2)]
        for n in range(4):
            for cs in itertools.combinations(clauses, n):
                brute = any(
                    all(any((l > 0) == bool(bits >> (abs(l) - 1) & 1) for l in c) for c in cs)
                    for bits in range(4)
                )
                assert dpll_satisfiable(list(cs)) == brute


class TestFormulaBasics:
    def test_structural_equality_is_syntactic(self):
        assert And(p, q) != And(q, p)
        assert equivalent(And(p, q), And(q, p))

    def test_atoms_and_depth(self):
        g = parse_formula("p & ~(q | r)")
        assert g.atoms() == {"p", "q", "r"}
        assert g.depth() == 3

    def test_operator_sugar(self):
        assert (p & ~q) | (q >> r) == Or(And(p, Not(q)), Implies(q, r))

    def test_constants_are_singletons_by_value(self):
        assert Top() == TOP and hash(Top()) == hash(TOP)

    def test_render_minimal_parentheses(self):
        assert render(parse_formula("(p & q) | r")) == "p & q | r"
        assert render(parse_formula("p -> (q -> r)")) == "p -> q -> r"
        assert render(parse_formula("(p -> q) -> r")) == "(p -> q) -> r"
        assert render(Not(And(p, q))) == "~(p & q)"
