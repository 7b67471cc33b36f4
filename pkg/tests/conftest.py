import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import pytest

from mutexec import datasets
from mutexec.executors import BuiltinExecutor
from mutexec.mutate import mutate_dataset
from mutexec.problems import pair_by_id

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def read_fixture(name: str) -> str:
    with open(fixture_path(name), encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def small_corpus():
    """A reduced sampled-program dataset for pipeline tests (fast)."""
    config = datasets.DslListConfig(seed=11, programs_per_combo=120, per_bin=2)
    return datasets.build_dsl_list(config)


@pytest.fixture(scope="session")
def small_pairs(small_corpus):
    kept, mutants = mutate_dataset(small_corpus, BuiltinExecutor(), seed=5)
    return kept, mutants, pair_by_id(kept, mutants)
