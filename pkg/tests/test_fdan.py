import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdstc.errors import BudgetExceeded
from fdstc.fdan import (HRQFReport, analyze, find_partition, hrqf, partition_valid,
                        predicted_zero_mask, r_factor, twin_classes, verify_r_structure)
from fdstc.stcode import random_block_code


def _report(adj):
    adj = np.array(adj, dtype=bool)
    return HRQFReport(adj.astype(float), adj, True)


def _brute_exponent(adj):
    k = adj.shape[0]
    G = nx.from_numpy_array(adj.astype(int))
    best = k
    for r in range(k + 1):
        if r >= best:
            break
        for W in itertools.combinations(range(k), r):
            H = G.subgraph(set(range(k)) - set(W))
            big = max((len(c) for c in nx.connected_components(H)), default=0)
            best = min(best, r + big)
    return min(best, k - 2) if k > 2 and best > k - 2 else best


def _graphs(max_k):
    @st.composite
    def draw(draw_):
        k = draw_(st.integers(1, max_k))
        bits = draw_(st.lists(st.booleans(), min_size=k * k, max_size=k * k))
        a = np.array(bits, dtype=bool).reshape(k, k)
        a = np.triu(a, 1)
        return a | a.T
    return draw()


@given(_graphs(9))
def test_search_matches_brute_force(adj):
    rep = find_partition(_report(adj))
    assert rep.partition.exponent == _brute_exponent(adj)
    assert rep.partition.exact


@given(_graphs(6), _graphs(6))
def test_search_on_disconnected_unions_matches_brute_force(a, b):
    adj = np.zeros((len(a) + len(b),) * 2, dtype=bool)
    adj[:len(a), :len(a)] = a
    adj[len(a):, len(a):] = b
    rep = find_partition(_report(adj))
    assert rep.partition.exponent == _brute_exponent(adj)


@given(_graphs(9))
def test_partition_is_consistent(adj):
    part = find_partition(_report(adj)).partition
    if part.gram_schmidt:
        return
    assert partition_valid(adj, part)
    assert sorted(part.ordering) == list(range(len(adj)))
    assert part.exponent == len(part.separator) + part.max_group


@given(_graphs(8))
def test_twin_classes_partition_the_vertices(adj):
    classes = twin_classes(adj)
    flat = sorted(v for c in classes for v in c)
    assert flat == list(range(len(adj)))


def test_budget_exhaustion_is_reported():
    rng = np.random.default_rng(2)
    a = np.triu(rng.random((24, 24)) < 0.3, 1)
    adj = a | a.T
    rep = find_partition(_report(adj), budget=5)
    assert not rep.partition.exact and rep.notes
    with pytest.raises(BudgetExceeded) as info:
        find_partition(_report(adj), budget=5, raise_on_budget=True)
    assert info.value.partial is not None


def test_hrqf_matrix_matches_definition(preset):
    code = preset("example1")
    rep = hrqf(code)
    W = code.weights
    for i, j in [(0, 1), (0, 9), (3, 12), (8, 15)]:
        S = W[i] @ W[j].conj().T + W[j] @ W[i].conj().T
        assert rep.M[i, j] == pytest.approx(np.linalg.norm(S) ** 2, abs=1e-9)
    assert np.array_equal(rep.adjacency, rep.adjacency.T)
    assert not rep.adjacency.diagonal().any()


def test_alamouti_weights_are_mutually_orthogonal(preset):
    rep = analyze(preset("alamouti"))
    assert not rep.adjacency.any()
    assert rep.partition.exponent == 1


def test_unstructured_code_has_no_structure():
    rep = analyze(random_block_code(2, 1, seed=3))
    assert rep.partition.gram_schmidt and rep.partition.exponent == 6


@pytest.mark.parametrize("name", ["example1", "example3-code2", "mac_example"])
def test_r_factor_zero_pattern(preset, name):
    code = preset(name)
    part = analyze(code).partition
    rs = verify_r_structure(code, part, trials=10, seed=7)
    assert rs.passed


def test_predicted_mask_is_strictly_upper():
    rep = find_partition(_report(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]])))
    mask = predicted_zero_mask(rep.partition)
    assert not np.tril(mask).any()


def test_r_factor_is_upper_triangular(preset):
    code = preset("alamouti")
    H = np.array([[1 + 1j, 0.5 - 0.2j]])
    R = r_factor(code, H, range(code.k))
    assert np.allclose(np.tril(R, -1), 0)
