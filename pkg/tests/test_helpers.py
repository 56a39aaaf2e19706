from fractions import Fraction

import pytest

from utils.helpers import INF, format_rational, generate_run_id, parallel_map, parse_rational, resolve_jobs


def test_parse_rational():
    assert parse_rational("1/4") == Fraction(1, 4)
    assert parse_rational(3) == Fraction(3)
    assert parse_rational("inf") == INF
    with pytest.raises(ValueError):
        parse_rational(0.25)
    with pytest.raises(ValueError):
        parse_rational(True)


def test_format_rational():
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(INF) == "inf"


def test_resolve_jobs(monkeypatch):
    monkeypatch.delenv("TEMPOFLOW_JOBS", raising=False)
    assert resolve_jobs() == 1
    assert resolve_jobs(0) == 1
    monkeypatch.setenv("TEMPOFLOW_JOBS", "3")
    assert resolve_jobs() == 3
    assert resolve_jobs(2) == 2
    monkeypatch.setenv("TEMPOFLOW_JOBS", "many")
    assert resolve_jobs() == 1


def test_parallel_map_keeps_order():
    items = [-3, 1, -2, 5, 0]
    assert parallel_map(abs, items, jobs=2) == [3, 1, 2, 5, 0]
    assert parallel_map(abs, items) == [3, 1, 2, 5, 0]


def test_run_ids_are_unique():
    assert generate_run_id() != generate_run_id()
    assert generate_run_id("CLI").startswith("CLI")
