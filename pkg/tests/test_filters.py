"""Filter grammar: parsing, validation, evaluation, and printing."""

import random

import pytest

from curvequery import (
    ParseError,
    ValidationError,
    eval_filter,
    filter_to_text,
    parse_filter,
    validate_filter,
)
from curvequery.filters import And, Comparison, Not, Or

from genast import random_filter, random_row
from oracles import oracle_eval_filter

SCHEMA = {
    "flux": "quantitative",
    "CLASS_STAR": "quantitative",
    "gene": "quantitative",
    "name": "categorical",
    "state": "categorical",
}


class TestParsing:
    def test_conjunction_of_comparisons(self):
        ast = parse_filter("flux>10 AND CLASS_STAR=1")
        assert ast == And(
            Comparison("flux", ">", 10.0), Comparison("CLASS_STAR", "=", 1.0)
        )

    def test_single_equality(self):
        assert parse_filter("gene=9687") == Comparison("gene", "=", 9687.0)

    def test_and_binds_tighter_than_or(self):
        ast = parse_filter("a>1 OR b>1 AND c>1")
        assert ast == Or(
            Comparison("a", ">", 1.0),
            And(Comparison("b", ">", 1.0), Comparison("c", ">", 1.0)),
        )

    def test_not_binds_tightest(self):
        ast = parse_filter("NOT a=1 AND b=2")
        assert ast == And(Not(Comparison("a", "=", 1.0)), Comparison("b", "=", 2.0))

    def test_parentheses_group(self):
        ast = parse_filter("NOT (a=1 OR b=2)")
        assert ast == Not(Or(Comparison("a", "=", 1.0), Comparison("b", "=", 2.0)))

    def test_keywords_are_case_insensitive(self):
        assert parse_filter("a=1 and b=2") == parse_filter("a=1 AND b=2")
        assert parse_filter("not a=1") == parse_filter("NOT a=1")

    def test_quoted_string_values(self):
        assert parse_filter('name="NGC 1068"') == Comparison("name", "=", "NGC 1068")
        assert parse_filter("name='NGC 1068'") == Comparison("name", "=", "NGC 1068")

    def test_bare_token_is_a_string_value(self):
        assert parse_filter("state=solid") == Comparison("state", "=", "solid")

    def test_all_comparison_operators(self):
        for op in ("=", "!=", "<", "<=", ">", ">="):
            assert parse_filter(f"a {op} 2") == Comparison("a", op, 2.0)

    def test_negative_number_value(self):
        assert parse_filter("a > -5.5") == Comparison("a", ">", -5.5)


class TestParseErrors:
    def test_missing_value(self):
        with pytest.raises(ParseError) as err:
            parse_filter("flux >")
        assert str(err.value).startswith("1:")

    def test_missing_operator(self):
        with pytest.raises(ParseError):
            parse_filter("flux 10")

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse_filter("")

    def test_keyword_cannot_be_attribute(self):
        with pytest.raises(ParseError):
            parse_filter("AND = 1")

    def test_keyword_cannot_be_bare_value(self):
        with pytest.raises(ParseError):
            parse_filter("state = NOT")

    def test_dangling_connective(self):
        with pytest.raises(ParseError):
            parse_filter("a=1 AND")

    def test_position_reported(self):
        with pytest.raises(ParseError) as err:
            parse_filter("a=1 AND AND b=2")
        assert err.value.position is not None


class TestValidation:
    def test_valid_filter_passes(self):
        validate_filter(parse_filter("flux>10 AND CLASS_STAR=1"), SCHEMA)
        validate_filter(parse_filter('name="x" OR state=solid'), SCHEMA)

    def test_unknown_attribute(self):
        with pytest.raises(ValidationError):
            validate_filter(parse_filter("missing=1"), SCHEMA)

    def test_ordering_requires_quantitative_attribute(self):
        with pytest.raises(ValidationError):
            validate_filter(parse_filter("name > 5"), SCHEMA)

    def test_ordering_requires_numeric_value(self):
        with pytest.raises(ValidationError):
            validate_filter(parse_filter('flux > "high"'), SCHEMA)

    def test_quantitative_equality_needs_number(self):
        with pytest.raises(ValidationError):
            validate_filter(parse_filter('flux = "ten"'), SCHEMA)

    def test_categorical_equality_needs_string(self):
        with pytest.raises(ValidationError):
            validate_filter(parse_filter("state = 3"), SCHEMA)

    def test_nested_invalid_branch_is_caught(self):
        with pytest.raises(ValidationError):
            validate_filter(parse_filter("flux>1 OR state>2"), SCHEMA)


class TestEvaluation:
    def test_conjunction_on_row(self):
        row = {"flux": 12.0, "CLASS_STAR": 1.0}
        assert eval_filter(parse_filter("flux>10 AND CLASS_STAR=1"), row)
        assert not eval_filter(parse_filter("flux>20 AND CLASS_STAR=1"), row)

    def test_missing_cell_comparison_is_false(self):
        assert not eval_filter(parse_filter("a = 1"), {"a": None})
        assert not eval_filter(parse_filter("a != 1"), {"a": None})
        assert not eval_filter(parse_filter("a < 1"), {"a": None})

    def test_not_of_missing_comparison_is_true(self):
        assert eval_filter(parse_filter("NOT a=1"), {"a": None})

    def test_not_example(self):
        assert not eval_filter(parse_filter("NOT a=1"), {"a": 1.0})

    def test_string_comparison(self):
        assert eval_filter(parse_filter("state=solid"), {"state": "solid"})
        assert not eval_filter(parse_filter("state=solid"), {"state": "gas"})
        assert eval_filter(parse_filter("state!=solid"), {"state": "gas"})

    def test_matches_reference_evaluator(self):
        rng = random.Random(777)
        for _ in range(150):
            ast = random_filter(rng, rng.randrange(0, 5), SCHEMA)
            for _ in range(20):
                row = random_row(rng, SCHEMA)
                assert eval_filter(ast, row) == oracle_eval_filter(ast, row)


class TestPrinting:
    def test_minimal_parentheses(self):
        assert filter_to_text(parse_filter("a>1 OR b>1 AND c>1")) == "a > 1.0 OR b > 1.0 AND c > 1.0"
        text = filter_to_text(parse_filter("(a>1 OR b>1) AND c>1"))
        assert parse_filter(text) == parse_filter("(a>1 OR b>1) AND c>1")

    def test_strings_quoted_only_when_needed(self):
        assert filter_to_text(Comparison("state", "=", "solid")) == "state = solid"
        assert filter_to_text(Comparison("name", "=", "NGC 1068")) == 'name = "NGC 1068"'

    def test_keyword_value_gets_quoted(self):
        text = filter_to_text(Comparison("state", "=", "and"))
        assert parse_filter(text) == Comparison("state", "=", "and")

    def test_round_trip_random_trees(self):
        rng = random.Random(60606)
        for _ in range(400):
            ast = random_filter(rng, rng.randrange(0, 5), SCHEMA)
            assert parse_filter(filter_to_text(ast)) == ast
