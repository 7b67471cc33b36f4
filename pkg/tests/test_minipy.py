import pytest

from mutexec.minipy import Limits, ParseError, interpret, parse


def run(source, *args, limits=None, fn=None):
    return interpret(parse(source), args, limits, fn)


class TestParse:
    def test_two_statement_function(self):
        module = parse("def f(a1):\n    return len(a1)")
        fn = module.functions()["f"]
        assert fn.params == ["a1"]
        assert len(fn.body) == 1

    def test_import_rejected(self):
        with pytest.raises(ParseError):
            parse("import os\ndef f(a1):\n    return a1")

    def test_table_fragments_parse(self):
        # the mutation-operator vocabulary appears in expression statements
        for fragment in ("a + b", "a < b", "a and b", "continue", "1"):
            parse(fragment)

    def test_rejected_constructs(self):
        bad = [
            "def f(a1):\n    return a1.sort()",
            "def f(a1):\n    return 'x'",
            "def f(a1):\n    pass",
            "def f(a1):\n    return 1.5",
            "def f(a1):\n    return {1: 2}",
            "def f(a1):\n    return a1[0:2]",
            "def f(a1):\n    return g(a1)",
            "def f(a1):\n    return a < b < c",
        ]
        for source in bad:
            with pytest.raises(ParseError):
                parse(source)

    def test_parse_error_carries_line(self):
        with pytest.raises(ParseError) as err:
            parse("def f(a1):\n    return 'nope'")
        assert err.value.line == 2


class TestInterpret:
    def test_tail_program(self):
        result = run("def f(a1):\n    a1.pop(0)\n    return a1", [4, 1, 3])
        assert result.status == "ok"
        assert result.output == [1, 3]
        assert result.covered_lines == {2, 3}

    def test_branch_coverage_exclusive(self):
        source = (
            "def f(a1):\n"
            "    if len(a1) > 2:\n"
            "        v1 = 1\n"
            "    else:\n"
            "        v1 = 0\n"
            "    return v1"
        )
        taken = run(source, [1, 2, 3])
        skipped = run(source, [1])
        assert 3 in taken.covered_lines and 5 not in taken.covered_lines
        assert 5 in skipped.covered_lines and 3 not in skipped.covered_lines
        assert 6 in taken.covered_lines  # return line always covered when ok

    def test_step_limit(self):
        source = "def f(a1):\n    while True:\n        v1 = 1\n    return v1"
        result = run(source, [1], limits=Limits(max_steps=1000))
        assert result.status == "error"
        assert result.error_kind == "StepLimitExceeded"

    def test_negative_index_and_pop_variants(self):
        assert run("def f(a1):\n    return a1[-1]", [2, 5]).output == 5
        assert run("def f(a1):\n    return a1.pop()", [1, 2]).output == 2
        assert run("def f(a1):\n    return a1.pop(0)", [1, 2]).output == 1
        assert run("def f(a1):\n    return a1.pop(-2)", [1, 2, 3]).output == 2

    def test_runtime_error_kinds(self):
        cases = [
            ("def f(a1):\n    return a1[5]", [1], "IndexError"),
            ("def f(a1):\n    a1.pop(0)\n    a1.pop(0)\n    return a1", [1], "IndexError"),
            ("def f(a1):\n    return a1 + 1", [1], "TypeError"),
            ("def f(a1):\n    return v9", [1], "NameError"),
        ]
        for source, arg, kind in cases:
            result = run(source, arg)
            assert result.status == "error" and result.error_kind == kind, source

    def test_zero_division(self):
        result = run("def f(a1):\n    return len(a1) // 0", [1])
        assert result.error_kind == "ZeroDivisionError"
        result = run("def f(a1):\n    return len(a1) % 0", [1])
        assert result.error_kind == "ZeroDivisionError"

    def test_overflow_reported(self):
        source = (
            "def f(a1):\n"
            "    v1 = 2\n"
            "    while v1 > 0:\n"
            "        v1 = v1 * v1 * v1 * v1 * v1 * v1 * v1 * v1\n"
            "    return v1"
        )
        result = run(source, [1])
        assert result.status == "error"
        assert result.error_kind == "OverflowError"

    def test_floor_division_matches_python_on_negatives(self):
        source = "def f(a1):\n    return [a1[0] // a1[1], a1[0] % a1[1]]"
        assert run(source, [-7, 2]).output == [-7 // 2, -7 % 2]
        assert run(source, [7, -2]).output == [7 // -2, 7 % -2]

    def test_for_range_break_continue(self):
        source = (
            "def f(a1):\n"
            "    v1 = 0\n"
            "    for i in range(len(a1)):\n"
            "        if a1[i] == 3:\n"
            "            continue\n"
            "        if a1[i] == 5:\n"
            "            break\n"
            "        v1 = v1 + a1[i]\n"
            "    return v1"
        )
        assert run(source, [1, 3, 2, 5, 9]).output == 3

    def test_while_loop(self):
        source = (
            "def f(a1):\n"
            "    v1 = 0\n"
            "    while v1 < len(a1):\n"
            "        v1 = v1 + 1\n"
            "    return v1"
        )
        assert run(source, [7, 7, 7]).output == 3

    def test_tuple_assignment(self):
        source = "def f(a1):\n    v1, v2 = [], []\n    v1.append(len(a1))\n    return v1"
        assert run(source, [1, 2]).output == [2]

    def test_no_return_gives_none(self):
        result = run("def f(a1):\n    a1.pop(0)", [1, 2])
        assert result.status == "ok" and result.output is None

    def test_determinism(self):
        source = "def f(a1):\n    a1.append(len(a1))\n    return a1"
        first = run(source, [1, 2])
        second = run(source, [1, 2])
        assert (first.status, first.output, first.covered_lines, first.steps) == (
            second.status, second.output, second.covered_lines, second.steps
        )

    def test_inputs_deep_copied(self):
        arg = [1, 2, 3]
        run("def f(a1):\n    a1.pop(0)\n    return a1", arg)
        assert arg == [1, 2, 3]

    def test_list_limit(self):
        source = (
            "def f(a1):\n"
            "    while True:\n"
            "        a1.extend(a1)\n"
            "    return a1"
        )
        result = run(source, [1], limits=Limits(max_list_len=1000))
        assert result.error_kind == "ListLimitExceeded"

    def test_wrong_arity_is_error(self):
        assert run("def f(a1):\n    return a1", [1], [2]).error_kind == "TypeError"

    def test_function_lookup_by_name(self):
        source = "def g(a1):\n    return 1\ndef f(a1):\n    return 2"
        assert run(source, [0], fn="f").output == 2
        assert run(source, [0], fn="g").output == 1
        assert run(source, [0], fn="h").error_kind == "NameError"
