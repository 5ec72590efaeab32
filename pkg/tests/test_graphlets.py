import numpy as np
import pytest

from gig.errors import DataError
from gig.graph import MolecularGraph
from gig.graphlets import (
    GroupComparison,
    OrbitSignature,
    OrbitVector,
    brute_force_orbits,
    compare_groups,
    count_orbits,
    graph_signature,
    parse_signature_table,
    signature_table,
    zscore_signatures,
)

from conftest import complete_graph, cycle_graph, path_graph, random_graph


def claw_graph():
    return MolecularGraph("cxyz", [("c", "x"), ("c", "y"), ("c", "z")])


def test_triangle_orbits():
    for v, vec in count_orbits(complete_graph("a", "b", "c")).items():
        assert vec[0] == 2 and vec[3] == 1
        assert sum(vec.counts) == 3  # nothing else


def test_k4_orbits():
    for v, vec in count_orbits(complete_graph("a", "b", "c", "d")).items():
        assert vec[0] == 3 and vec[3] == 3 and vec[14] == 1
        assert vec[1] == vec[2] == vec[8] == 0


def test_p4_orbits():
    orbits = count_orbits(path_graph("a", "b", "c", "d"))
    a, b = orbits["a"], orbits["b"]
    assert (a[0], a[1], a[4]) == (1, 1, 1)
    assert (b[0], b[2], b[5]) == (2, 1, 1)
    assert orbits["d"].counts == a.counts and orbits["c"].counts == b.counts
    assert all(v[3] == v[8] == v[14] == 0 for v in orbits.values())


def test_claw_orbits():
    orbits = count_orbits(claw_graph())
    assert orbits["c"][0] == 3 and orbits["c"][7] == 1
    assert orbits["x"][6] == 1 and orbits["x"][1] == 2


def test_c6_matches_oracle():
    c6 = cycle_graph(*"abcdef")
    assert count_orbits(c6) == brute_force_orbits(c6)


def test_isolated_node_zero_vector():
    g = MolecularGraph(["a", "b", "x"], [("a", "b")])
    orbits = count_orbits(g)
    assert orbits["x"].counts == (0,) * 15
    assert orbits["a"][0] == 1


def test_empty_graph_brute_force():
    assert brute_force_orbits(MolecularGraph()) == {}


def test_brute_force_cap():
    g = random_graph(40, 0.1, seed=0)
    with pytest.raises(DataError):
        brute_force_orbits(g, cap=30)


@pytest.mark.parametrize("seed", range(10))
def test_fast_path_equals_oracle_random(seed):
    g = random_graph(12 + seed, 0.15 + 0.04 * seed, seed=seed)
    assert count_orbits(g) == brute_force_orbits(g)


def _triangle_count(g):
    """Independent motif counter via trace(A^3)/6."""
    idx = {v: i for i, v in enumerate(g.nodes)}
    a = np.zeros((g.n_nodes, g.n_nodes))
    for u, v in g.edges:
        a[idx[u], idx[v]] = a[idx[v], idx[u]] = 1
    return round(np.trace(np.linalg.matrix_power(a, 3)) / 6)


def _k4_count(g):
    from itertools import combinations

    count = 0
    for quad in combinations(g.nodes, 4):
        if all(g.has_edge(x, y) for x, y in combinations(quad, 2)):
            count += 1
    return count


@pytest.mark.parametrize("seed", range(5))
def test_orbit_sum_identities(seed):
    g = random_graph(15, 0.3, seed=seed + 100)
    orbits = count_orbits(g)
    totals = np.sum([v.counts for v in orbits.values()], axis=0)
    assert totals[0] == 2 * g.n_edges
    assert totals[3] == 3 * _triangle_count(g)
    assert totals[14] == 4 * _k4_count(g)


def test_orbit_vector_validation():
    with pytest.raises(DataError):
        OrbitVector((1, 2))
    with pytest.raises(DataError):
        OrbitVector((-1,) + (0,) * 14)


def test_graph_signature_means():
    sig = graph_signature("k3", count_orbits(complete_graph("a", "b", "c")))
    assert sig.means[0] == 2.0 and sig.means[3] == 1.0
    p4 = graph_signature("p4", count_orbits(path_graph("a", "b", "c", "d")))
    assert p4.means[0] == pytest.approx(1.5)
    edge = graph_signature("e", count_orbits(MolecularGraph("ab", [("a", "b")])))
    assert edge.means[0] == 1.0 and sum(edge.means[1:]) == 0.0


def test_graph_signature_empty_errors():
    with pytest.raises(DataError):
        graph_signature("none", {})


def _sig(graph_id, o0=0.0, o3=0.0):
    means = [0.0] * 15
    means[0], means[3] = o0, o3
    return OrbitSignature(graph_id=graph_id, means=tuple(means))


def test_zscore_identical_groups_all_zero():
    sigs = [_sig("g1", o3=2.0), _sig("g2", o3=2.0)]
    result = zscore_signatures(sigs, {"g1": "A", "g2": "B"})
    assert np.allclose(result.z, 0.0)


def test_zscore_two_groups_hand_case():
    sigs = [_sig("g1", o3=1.0), _sig("g2", o3=3.0)]
    result = zscore_signatures(sigs, {"g1": "A", "g2": "B"})
    col = result.z[:, 3]
    assert col == pytest.approx([-1.0, 1.0], abs=1e-6)


def test_zscore_requires_two_groups():
    with pytest.raises(DataError):
        zscore_signatures([_sig("g1")], {"g1": "A"})


def test_compare_groups_no_signal():
    sigs = [_sig(f"a{i}", o3=1.0) for i in range(5)]
    sigs += [_sig(f"b{i}", o3=1.0) for i in range(5)]
    labels = {s.graph_id: s.graph_id[0] for s in sigs}
    results = compare_groups(sigs, labels)
    assert all(r.p_value == pytest.approx(1.0) for r in results)


def test_compare_groups_extreme_separation():
    sigs = [_sig(f"a{i}", o3=0.0) for i in range(10)]
    sigs += [_sig(f"b{i}", o3=1.0 + i) for i in range(10)]
    labels = {s.graph_id: s.graph_id[0] for s in sigs}
    results = compare_groups(sigs, labels)
    top = results[0]
    assert top.orbit_id == 3
    assert top.u_statistic in (0.0, 100.0)
    assert top.p_value < 0.001


def test_compare_groups_single_differing_orbit_ranks_first():
    sigs = [_sig(f"a{i}", o0=2.0, o3=float(i % 2)) for i in range(6)]
    sigs += [_sig(f"b{i}", o0=5.0, o3=float(i % 2)) for i in range(6)]
    labels = {s.graph_id: s.graph_id[0] for s in sigs}
    results = compare_groups(sigs, labels)
    assert results[0].orbit_id == 0


def test_compare_groups_requires_two_nonempty():
    sigs = [_sig("a1"), _sig("a2")]
    with pytest.raises(DataError):
        compare_groups(sigs, {"a1": "A", "a2": "A"})


def test_signature_table_round_trip():
    sigs = [
        graph_signature("k3", count_orbits(complete_graph("a", "b", "c"))),
        graph_signature("p4", count_orbits(path_graph("a", "b", "c", "d"))),
    ]
    text = signature_table(sigs)
    parsed = parse_signature_table(text)
    assert parsed == sigs
