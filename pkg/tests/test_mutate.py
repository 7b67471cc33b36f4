import random

import pytest

from mutexec.executors import BuiltinExecutor
from mutexec.minipy import interpret, parse
from mutexec.mutate import (
    Survivor,
    enumerate_mutants,
    enumerate_source_mutants,
    filter_valid,
    jaccard,
    mutate_dataset,
    mutation_sites,
    select_mutant,
)
from mutexec.problems import Problem
from mutexec.values import values_equal


def mutant_sources(source):
    return {mutated for mutated, _ in enumerate_source_mutants(source)}


def make_problem(source, input_text, output_text, pid="p0", fn="f"):
    return Problem(
        id=pid, dataset="dsl-list", source=source, function_name=fn,
        input=input_text, output=output_text,
        loc=len(source.splitlines()), executor="builtin",
    )


class TestEnumerate:
    def test_arithmetic_example(self):
        source = "def f(a, b):\n    return a + b"
        assert "def f(a, b):\n    return a - b" in mutant_sources(source)
        # full substitution family: each other member of {+, -, *, //, %}
        arith = [s for _, s in enumerate_source_mutants(source)
                 if s.kind == "arithmetic"]
        assert sorted(s.replacement_token for s in arith) == ["%", "*", "-", "//"]

    def test_relational_example(self):
        source = "def f(a, b):\n    return a < b"
        assert "def f(a, b):\n    return a <= b" in mutant_sources(source)
        rel = [s for _, s in enumerate_source_mutants(source)
               if s.kind == "relational"]
        assert len(rel) == 5

    def test_logical_example(self):
        source = "def f(a, b):\n    return a and b"
        assert "def f(a, b):\n    return a or b" in mutant_sources(source)

    def test_keyword_example(self):
        source = (
            "def f(a1):\n"
            "    v1 = 0\n"
            "    for i in range(len(a1)):\n"
            "        if a1[i] == 0:\n"
            "            continue\n"
            "        v1 = v1 + a1[i]\n"
            "    return v1"
        )
        expected = source.replace("continue", "break")
        assert expected in mutant_sources(source)

    def test_literal_example(self):
        source = "def f(a1):\n    return a1[1]"
        sources = mutant_sources(source)
        assert "def f(a1):\n    return a1[0]" in sources
        assert "def f(a1):\n    return a1[2]" in sources

    def test_negative_literal_single_span(self):
        source = "def f(a1):\n    return a1[-1]"
        sources = mutant_sources(source)
        assert "def f(a1):\n    return a1[-2]" in sources
        assert "def f(a1):\n    return a1[0]" in sources
        # the unary minus itself is not an operator site
        assert not any(s.kind == "arithmetic"
                       for _, s in enumerate_source_mutants(source))

    def test_binary_minus_vs_negative_literal(self):
        source = "def f(a, b):\n    return a - 1"
        sites = [s for _, s in enumerate_source_mutants(source)]
        kinds = sorted(s.kind for s in sites)
        assert kinds.count("arithmetic") == 4  # '-' is binary here
        assert kinds.count("literal") == 2

    def test_no_sites(self):
        assert enumerate_source_mutants("def f(lst):\n    return lst") == []

    def test_exactly_one_token_span_changes(self):
        source = (
            "def f(a1):\n"
            "    v1 = []\n"
            "    for i in range(len(a1)):\n"
            "        if a1[i] > 2 and a1[i] < 5:\n"
            "            v1.append(a1[i] + 1)\n"
            "    return v1"
        )
        original_lines = source.splitlines()
        for mutated, site in enumerate_source_mutants(source):
            lines = mutated.splitlines()
            assert len(lines) == len(original_lines)
            diff = [i for i, (a, b) in enumerate(zip(original_lines, lines)) if a != b]
            assert diff == [site.line - 1]
            line_a, line_b = original_lines[diff[0]], lines[diff[0]]
            assert line_a[: site.col] == line_b[: site.col]
            assert line_a[site.end_col:] == line_b[site.col + len(site.replacement_token):]

    def test_relational_if_site_yields_five_mutants(self):
        source = "def f(x):\n    if x < 0:\n        return 1\n    return 0"
        rel = [s for _, s in enumerate_source_mutants(source) if s.kind == "relational"]
        assert len(rel) == 5
        assert {s.replacement_token for s in rel} == {"<=", ">", ">=", "==", "!="}

    def test_mutants_of_minipy_programs_reparse(self):
        source = (
            "def f(a1):\n"
            "    a1.pop(0)\n"
            "    if len(a1) > 2 and len(a1) < 9:\n"
            "        v1 = a1[-1]\n"
            "    else:\n"
            "        v1 = a1[0] + 1\n"
            "    return v1"
        )
        triples = enumerate_mutants(source)
        assert triples
        for module, site, mutated in triples:
            assert module.functions()  # parsed successfully

    def test_strings_and_comments_are_not_sites(self):
        source = "def f(a):\n    return a  # 1 + 2 and 3 < 4\n"
        assert enumerate_source_mutants(source) == []
        source2 = 'def f(a):\n    return "1 + 2"\n'
        assert enumerate_source_mutants(source2) == []


class TestFilter:
    def test_symmetric_mutant_excluded(self):
        # a + b == a - b when b == 0
        problem = make_problem("def f(a, b):\n    return a + b", "2, 0", "2")
        candidates = [("def f(a, b):\n    return a - b", None)]
        survivors = filter_valid(problem, [(c, s) for c, s in candidates],
                                 BuiltinExecutor())
        assert survivors == []

    def test_erroring_mutant_excluded(self):
        problem = make_problem("def f(a1):\n    return a1[1]", "[1, 2]", "2")
        mutants = enumerate_source_mutants(problem.source)
        survivors = filter_valid(problem, mutants, BuiltinExecutor())
        # a1[2] errors on a two-element list, a1[0] survives
        assert {s.source for s in survivors} == {"def f(a1):\n    return a1[0]"}

    def test_survivors_match_exhaustive_execution(self):
        source = (
            "def f(a1):\n"
            "    v1 = []\n"
            "    for i in range(len(a1)):\n"
            "        if a1[i] > 2:\n"
            "            v1.append(a1[i] + 1)\n"
            "    return v1"
        )
        args = ([1, 3, 5],)
        base = interpret(parse(source), args)
        assert base.status == "ok"
        problem = make_problem(source, "[1, 3, 5]", str(base.output))
        survivors = filter_valid(
            problem, enumerate_source_mutants(source), BuiltinExecutor()
        )
        # independent brute force over every candidate
        expected = set()
        for mutated, site in enumerate_source_mutants(source):
            result = interpret(parse(mutated), args)
            if result.status == "ok" and not values_equal(result.output, base.output):
                expected.add(mutated)
        assert {s.source for s in survivors} == expected
        assert survivors  # fixture chosen to have survivors


def make_survivor(name, covered, site_index=0):
    sites = mutation_sites("def f(a):\n    return a + 1")
    return Survivor(name, sites[site_index], None, covered)


class TestSelect:
    def test_single_survivor_returned(self):
        survivor = make_survivor("s", {1, 2})
        assert select_mutant({1, 2, 3}, [survivor], random.Random(0)) is survivor

    def test_hand_computed_jaccard_values(self):
        original = {1, 2, 3}
        a = make_survivor("a", {1, 2, 3})  # J = 1.0
        b = make_survivor("b", {1, 2})  # J = 2/3
        c = make_survivor("c", {1})  # J = 1/3
        assert jaccard(original, a.covered_lines) == 1.0
        assert jaccard(original, b.covered_lines) == pytest.approx(2 / 3)
        assert jaccard(original, c.covered_lines) == pytest.approx(1 / 3)
        for order in ([a, b, c], [c, b, a], [b, a, c]):
            assert select_mutant(original, order, random.Random(1)) is a

    def test_tie_break_uniform_across_seeds(self):
        original = {1, 2, 3}
        counts = {"x": 0, "y": 0}
        for seed in range(1, 101):
            x = make_survivor("x", {1, 2}, site_index=0)
            y = make_survivor("y", {2, 3}, site_index=1)
            pick = select_mutant(original, [x, y], random.Random(seed))
            counts[pick.source] += 1
        assert counts["x"] + counts["y"] == 100
        assert 40 <= counts["x"] <= 60, counts

    def test_tie_break_order_independent(self):
        # survivors are distinct (site, replacement) pairs; the tie pool is
        # sorted by site position, so list order cannot change the draw
        original = {1, 2}
        x = make_survivor("x", {1}, site_index=0)
        y = make_survivor("y", {2}, site_index=1)
        pick_ab = select_mutant(original, [x, y], random.Random(42)).source
        x2 = make_survivor("x", {1}, site_index=0)
        y2 = make_survivor("y", {2}, site_index=1)
        pick_ba = select_mutant(original, [y2, x2], random.Random(42)).source
        assert pick_ab == pick_ba


class TestMutateDataset:
    def test_no_mutable_sites_drops_problem(self):
        problem = make_problem("def f(lst):\n    return lst", "[1, 2]", "[1, 2]")
        kept, mutants = mutate_dataset([problem], BuiltinExecutor(), seed=0)
        assert kept == [] and mutants == []

    def test_correspondence_and_different_outputs(self, small_corpus):
        problems = small_corpus[:40]
        kept, mutants = mutate_dataset(problems, BuiltinExecutor(), seed=3)
        assert len(kept) == len(mutants)
        for original, mutant in zip(kept, mutants):
            assert original.id == mutant.id
            assert mutant.mutation_info is not None
            assert not values_equal(original.output_value(), mutant.output_value())
            # exactly one line differs, at the recorded line
            diff = [
                i for i, (a, b) in enumerate(
                    zip(original.source.splitlines(), mutant.source.splitlines())
                ) if a != b
            ]
            assert diff == [mutant.mutation_info["line"] - 1]

    def test_mutants_execute_ok_on_their_input(self, small_corpus):
        problems = small_corpus[:40]
        executor = BuiltinExecutor()
        kept, mutants = mutate_dataset(problems, executor, seed=3)
        for mutant in mutants:
            result = executor.run(
                mutant.source, mutant.function_name, mutant.args()
            )
            assert result.status == "ok"
            assert values_equal(result.output, mutant.output_value())

    def test_deterministic_given_seed(self, small_corpus):
        problems = small_corpus[:20]
        first = mutate_dataset(problems, BuiltinExecutor(), seed=9)
        second = mutate_dataset(problems, BuiltinExecutor(), seed=9)
        assert [p.to_json() for p in first[1]] == [p.to_json() for p in second[1]]

    def test_drop_rate_regression(self, small_corpus):
        problems = small_corpus[:100]
        kept, _ = mutate_dataset(problems, BuiltinExecutor(), seed=0)
        # frozen after measurement on the session corpus (seed 11): the
        # 60-problem slice keeps 50 pairs, 10 dropped for empty survivor sets
        assert (len(problems), len(kept)) == (60, 50)
