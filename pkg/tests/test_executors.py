import json
import sys

import pytest

from conftest import fixture_path

from mutexec.executors import BuiltinExecutor, ExternalExecutor
from mutexec.values import canonical_repr


@pytest.fixture(scope="module")
def external():
    executor = ExternalExecutor()
    yield executor
    executor.close()


class TestBuiltinExecutor:
    def test_run_and_cache(self):
        executor = BuiltinExecutor()
        source = "def f(a1):\n    return len(a1)"
        first = executor.run(source, "f", ([1, 2],))
        second = executor.run(source, "f", ([1, 2, 3],))
        assert first.output == 2 and second.output == 3

    def test_syntax_error_reported(self):
        executor = BuiltinExecutor()
        result = executor.run("def f(:\n    return 1", "f", ())
        assert result.status == "error"
        assert result.error_kind == "SyntaxError"


class TestExternalExecutor:
    def test_ok_roundtrip(self, external):
        result = external.run("def f(a1):\n    return a1[::-1]", "f", ([1, 2, 3],))
        assert result.status == "ok"
        assert result.output == [3, 2, 1]
        assert result.output_repr == "[3, 2, 1]"

    def test_string_values_supported(self, external):
        result = external.run(
            "def f(s):\n    return s.upper()", "f", "'hi'"
        )
        assert result.status == "ok"
        assert result.output == "HI"

    def test_error_classification_and_line(self, external):
        result = external.run("def f(a1):\n    return a1[9]", "f", ([1],))
        assert result.status == "error"
        assert result.error_kind == "IndexError"
        assert result.error_line == 2

    def test_coverage_tracing(self, external):
        source = (
            "def f(a1):\n"
            "    if len(a1) > 2:\n"
            "        return 1\n"
            "    else:\n"
            "        return 0\n"
        )
        taken = external.run(source, "f", ([1, 2, 3],), trace=True)
        assert 3 in taken.covered_lines and 5 not in taken.covered_lines
        skipped = external.run(source, "f", ([1],), trace=True)
        assert 5 in skipped.covered_lines and 3 not in skipped.covered_lines
        assert taken.steps > 0

    def test_timeout_kills_and_recovers(self):
        executor = ExternalExecutor(timeout=1.0)
        try:
            result = executor.run(
                "def f(a1):\n    while True:\n        pass", "f", ([1],)
            )
            assert result.status == "error"
            assert result.error_kind == "Timeout"
            # a fresh child serves the next request
            again = executor.run("def f(a1):\n    return 1", "f", ([1],))
            assert again.status == "ok" and again.output == 1
        finally:
            executor.close()

    def test_imports_allowed_externally(self, external):
        source = "import math\ndef f(a1):\n    return math.floor(a1[0] / 2)"
        result = external.run(source, "f", ([9],))
        assert result.status == "ok" and result.output == 4

    def test_custom_command_protocol(self):
        # any command speaking the JSON-lines protocol works
        command = [sys.executable, "-m", "mutexec.python_exec"]
        with ExternalExecutor(command) as executor:
            result = executor.run("def f(x):\n    return x + 1", "f", "41")
            assert result.output == 42


class TestDifferential:
    def test_fixture_size(self):
        with open(fixture_path("differential.jsonl")) as fh:
            entries = [json.loads(line) for line in fh if line.strip()]
        assert len(entries) >= 50

    def test_minipy_matches_reference_executor(self, external):
        """Differential check: identical canonical outputs and error kinds."""
        builtin = BuiltinExecutor()
        with open(fixture_path("differential.jsonl")) as fh:
            entries = [json.loads(line) for line in fh if line.strip()]
        mismatches = []
        for entry in entries:
            mini = builtin.run(entry["source"], entry["function_name"],
                               _args(entry["input"]))
            ext = external.run(entry["source"], entry["function_name"],
                               entry["input"])
            if mini.status != ext.status:
                mismatches.append((entry["source"], mini, ext))
            elif mini.status == "ok":
                if canonical_repr(mini.output) != ext.output_repr:
                    mismatches.append((entry["source"], mini.output, ext.output))
            elif mini.error_kind != ext.error_kind:
                mismatches.append((entry["source"], mini.error_kind, ext.error_kind))
        assert not mismatches, mismatches[:3]


def _args(input_text):
    from mutexec.values import parse_args

    return parse_args(input_text)
