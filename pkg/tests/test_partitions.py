import itertools
from math import factorial, prod

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qconsensus.errors import DomainError, EmptyInputError
from qconsensus.partitions import (
    Partition,
    Tabloid,
    cover_category,
    dominates,
    enumerate_partitions,
    enumerate_tabloids,
    hasse_diagram,
    tabloid_count,
)


def partition_count(n):
    """Euler's pentagonal-number recurrence."""
    p = [1] + [0] * n
    for m in range(1, n + 1):
        k, total = 1, 0
        while True:
            g1, g2 = k * (3 * k - 1) // 2, k * (3 * k + 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p[n]


def brute_partitions(n):
    out = set()
    for k in range(1, n + 1):
        for combo in itertools.combinations_with_replacement(range(1, n + 1), k):
            if sum(combo) == n:
                out.add(tuple(sorted(combo, reverse=True)))
    return out


def naive_dominates(a, b):
    m = max(len(a), len(b))
    a = list(a) + [0] * (m - len(a))
    b = list(b) + [0] * (m - len(b))
    return all(sum(a[: i + 1]) >= sum(b[: i + 1]) for i in range(m))


def test_partitions_of_four_in_order():
    assert [p.parts for p in enumerate_partitions(4)] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_partitions_of_one():
    assert [p.parts for p in enumerate_partitions(1)] == [(1,)]


def test_partitions_of_six_count():
    assert len(enumerate_partitions(6)) == 11


@pytest.mark.parametrize("n", range(1, 9))
def test_partition_count_matches_recurrence_and_brute_force(n):
    parts = enumerate_partitions(n)
    assert len(parts) == partition_count(n)
    assert {p.parts for p in parts} == brute_partitions(n)
    assert len(set(parts)) == len(parts)


@pytest.mark.parametrize("n", range(1, 9))
def test_reverse_lexicographic_order(n):
    tuples = [p.parts for p in enumerate_partitions(n)]
    assert tuples == sorted(tuples, reverse=True)


def test_zero_is_empty_input():
    with pytest.raises(EmptyInputError):
        enumerate_partitions(0)


def test_invalid_partitions_rejected():
    with pytest.raises(DomainError):
        Partition((1, 2))
    with pytest.raises(DomainError):
        Partition((2, 0))
    with pytest.raises(DomainError):
        Partition(())


def test_dominance_examples():
    assert dominates(Partition((3, 3)), Partition((2, 2, 1, 1)))
    assert not dominates(Partition((4, 1, 1)), Partition((3, 3)))
    assert not dominates(Partition((3, 3)), Partition((4, 1, 1)))
    a = Partition((2, 1))
    assert dominates(a, a)


def test_dominance_total_mismatch():
    with pytest.raises(DomainError):
        dominates(Partition((2,)), Partition((2, 1)))


@pytest.mark.parametrize("n", range(1, 8))
def test_dominance_is_partial_order(n):
    ps = enumerate_partitions(n)
    for a in ps:
        assert dominates(a, a)
        for b in ps:
            assert dominates(a, b) == naive_dominates(a.parts, b.parts)
            if a != b and dominates(a, b):
                assert not dominates(b, a)
            for c in ps:
                if dominates(a, b) and dominates(b, c):
                    assert dominates(a, c)


def oracle_covers(n):
    """Transitive reduction of the naive dominance relation."""
    ps = [p.parts for p in enumerate_partitions(n)]
    strictly = {(a, b) for a in ps for b in ps if a != b and naive_dominates(a, b)}
    return {
        (a, b) for a, b in strictly
        if not any((a, c) in strictly and (c, b) in strictly for c in ps)
    }


@pytest.mark.parametrize("n", range(2, 8))
def test_hasse_edges_are_exactly_the_covers(n):
    hd = hasse_diagram(n)
    got = {(a.parts, b.parts) for a, b, _ in hd.cover_edges}
    assert got == oracle_covers(n)
    for a, b, cat in hd.cover_edges:
        # category 2 adds a row, category 1 keeps the number of rows
        assert cat == (2 if len(b) == len(a) + 1 else 1)
        assert len(b) in (len(a), len(a) + 1)


def test_hasse_six_contains_both_category_examples():
    edges = {(a.parts, b.parts): c for a, b, c in hasse_diagram(6).cover_edges}
    assert edges[((4, 2), (3, 3))] == 1
    assert edges[((4, 2), (4, 1, 1))] == 2


def test_hasse_two():
    hd = hasse_diagram(2)
    assert [(a.parts, b.parts, c) for a, b, c in hd.cover_edges] == [((2,), (1, 1), 2)]


def test_hasse_needs_two():
    with pytest.raises(DomainError):
        hasse_diagram(1)


def test_cover_category_rejects_non_covers():
    assert cover_category(Partition((4,)), Partition((2, 2))) is None
    assert cover_category(Partition((2, 2)), Partition((3, 1))) is None


def test_tabloids_of_two_one():
    words = [t.yamanouchi for t in enumerate_tabloids(Partition((2, 1)))]
    assert words == [(1, 1, 2), (1, 2, 1), (2, 1, 1)]


def test_single_row_has_one_tabloid():
    words = [t.yamanouchi for t in enumerate_tabloids(Partition((5,)))]
    assert words == [(1, 1, 1, 1, 1)]


def test_two_two_has_six_tabloids():
    assert len(enumerate_tabloids(Partition((2, 2)))) == 6


@pytest.mark.parametrize("n", range(1, 8))
def test_tabloid_counts_are_multinomial(n):
    for p in enumerate_partitions(n):
        tabs = enumerate_tabloids(p)
        expected = factorial(n) // prod(factorial(x) for x in p.parts)
        assert len(tabs) == expected == tabloid_count(p)
        words = [t.yamanouchi for t in tabs]
        assert words == sorted(set(words))
        base = tuple(r for i, c in enumerate(p.parts) for r in [i + 1] * c)
        assert words[0] == base
        assert set(words) == set(itertools.permutations(base))


def test_tabloid_word_must_match_shape():
    with pytest.raises(DomainError):
        Tabloid(Partition((2, 1)), (1, 2, 2))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=5))
def test_parse_roundtrip(parts):
    p = Partition(tuple(sorted(parts, reverse=True)))
    assert Partition.parse(str(p)) == p
