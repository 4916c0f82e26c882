import json

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screennav.errors import (
    EmptySpecError,
    LengthMismatchError,
    NonTerminatedSpecError,
    UnknownNodeError,
)
from screennav.graph import (
    ROOT,
    BranchingSpec,
    EdgeKind,
    SplitRole,
    build_tree,
    distance_histogram,
    distances_from,
    partition_subtrees,
    shortest_path,
    transition_map,
)

from conftest import TABLE6


def test_env_base_node_count():
    # 1+5+15+30+60+60+60 by direct level-product arithmetic
    graph = build_tree(BranchingSpec.parse("5,3,2,2,1,1,0"))
    assert len(graph) == 231
    assert max(n.depth for n in graph.nodes) == 6
    assert graph.branching.node_count() == 231


def test_degenerate_trees():
    assert len(build_tree(BranchingSpec((0,)))) == 1
    two_leaf = build_tree(BranchingSpec((2, 0)))
    assert len(two_leaf) == 3
    assert sorted(n.depth for n in two_leaf.nodes) == [0, 1, 1]


def test_spec_validation():
    with pytest.raises(EmptySpecError):
        BranchingSpec(())
    with pytest.raises(NonTerminatedSpecError):
        BranchingSpec((2, 1))
    with pytest.raises(ValueError):
        BranchingSpec((2, -1, 0))


def test_breadth_first_numbering():
    graph = build_tree(BranchingSpec((2, 2, 0)))
    assert graph.children(0) == (1, 2)
    assert graph.children(1) == (3, 4)
    assert graph.children(2) == (5, 6)
    assert [graph.depth(n) for n in range(7)] == [0, 1, 1, 2, 2, 2, 2]


def test_tree_validity_union_find(env_base):
    graph = env_base.graph
    edges = [(n.id, c) for n in graph.nodes for c in n.children]
    assert len(edges) == len(graph) - 1
    parent = list(range(len(graph)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        assert ra != rb, "cycle detected"
        parent[ra] = rb
    assert len({find(n.id) for n in graph.nodes}) == 1


def test_transition_kinds(env_base):
    tmap = env_base.tmap
    graph = env_base.graph
    root_row = tmap.transitions(ROOT)
    assert [t.kind for t in root_row] == [EdgeKind.FORWARD] * 5

    depth1 = graph.children(ROOT)[0]
    row = tmap.transitions(depth1)
    assert [t.kind for t in row] == [EdgeKind.FORWARD] * 3 + [EdgeKind.BACK]

    leaf = max(graph.nodes, key=lambda n: (n.depth, n.id)).id
    row = tmap.transitions(leaf)
    assert [t.kind for t in row] == [EdgeKind.BACK, EdgeKind.HOME]
    assert row[1].target == ROOT


def test_back_chain_reaches_root(env_base):
    graph, tmap = env_base.graph, env_base.tmap
    for node in graph.nodes:
        current, hops = node.id, 0
        while current != ROOT:
            backs = [t for t in tmap.transitions(current) if t.kind is EdgeKind.BACK]
            assert len(backs) == 1
            current = backs[0].target
            hops += 1
        assert hops == node.depth


def test_shortest_path_identity_and_direct(env_base):
    tmap = env_base.tmap
    assert shortest_path(tmap, ROOT, ROOT) == []
    child = env_base.graph.children(ROOT)[2]
    assert shortest_path(tmap, ROOT, child) == [(EdgeKind.FORWARD, child)]


def test_cross_subtree_leaf_distance_is_seven(env_base):
    graph, tmap = env_base.graph, env_base.tmap
    leaves = [n.id for n in graph.nodes if n.depth == 6]
    sub_first = set(graph.subtree(graph.children(ROOT)[0]))
    sub_last = set(graph.subtree(graph.children(ROOT)[4]))
    first = next(l for l in leaves if l in sub_first)
    last = next(l for l in leaves if l in sub_last)
    path = shortest_path(tmap, first, last)
    assert len(path) == 7
    assert path[0][0] is EdgeKind.HOME
    assert all(kind is EdgeKind.FORWARD for kind, _ in path[1:])


def test_shortest_path_against_networkx(env_small):
    # Independent oracle: same digraph in networkx, compare all-pairs lengths.
    tmap = env_small.tmap
    digraph = nx.DiGraph()
    for node in range(len(tmap)):
        for t in tmap.transitions(node):
            digraph.add_edge(node, t.target)
    expected = dict(nx.all_pairs_shortest_path_length(digraph))
    for a in range(len(tmap)):
        for b in range(len(tmap)):
            if a == b:
                continue
            assert len(shortest_path(tmap, a, b)) == expected[a][b]


def test_path_hops_are_real_transitions(env_base):
    tmap = env_base.tmap
    for start, goal in [(17, 203), (230, 1), (88, 88 + 1)]:
        current = start
        for kind, target in shortest_path(tmap, start, goal):
            assert any(
                t.kind is kind and t.target == target for t in tmap.transitions(current)
            )
            current = target
        assert current == goal


def test_distance_histogram_matches_reference_counts(env_base):
    graph, tmap = env_base.graph, env_base.tmap
    test_subtree = graph.subtree(graph.children(ROOT)[4])
    node_set = set(test_subtree) | {ROOT}
    assert len(node_set) == 47
    histogram = distance_histogram(tmap, node_set)
    assert histogram == TABLE6
    assert sum(histogram.values()) == 47 * 46


def test_bucket_one_equals_internal_edge_count(env_base):
    graph, tmap = env_base.graph, env_base.tmap
    node_set = set(graph.subtree(graph.children(ROOT)[4])) | {ROOT}
    internal_edges = sum(
        1
        for node in node_set
        for t in tmap.transitions(node)
        if t.target in node_set
    )
    assert distance_histogram(tmap, node_set)[1] == internal_edges == 137


def test_histogram_tiny_pair(env_tiny):
    node_set = {ROOT, 1}
    assert distance_histogram(env_tiny.tmap, node_set) == {1: 2}


def test_max_pairwise_distance_is_seven(env_base):
    tmap = env_base.tmap
    worst = 0
    for node in range(len(tmap)):
        worst = max(worst, max(distances_from(tmap, node).values()))
    assert worst == 7


def test_partition_sizes(env_base):
    graph = env_base.graph
    assignment = partition_subtrees(
        graph, [SplitRole.SFT, SplitRole.SFT, SplitRole.RL, SplitRole.RL, SplitRole.TEST]
    )
    assert len(assignment.nodes_for(SplitRole.TEST)) == 46
    assert len(assignment.nodes_for(SplitRole.TEST, include_root=True)) == 47
    assert len(assignment.nodes_for(SplitRole.SFT)) == 92
    total = sum(len(assignment.nodes_for(r)) for r in SplitRole)
    assert total == len(graph) - 1  # every non-root node exactly once


def test_partition_single_child():
    graph = build_tree(BranchingSpec((1, 0)))
    assignment = partition_subtrees(graph, [SplitRole.TEST])
    assert assignment.nodes_for(SplitRole.TEST) == (1,)


def test_partition_length_mismatch(env_base):
    with pytest.raises(LengthMismatchError):
        partition_subtrees(env_base.graph, [SplitRole.SFT])


def test_unknown_node_errors(env_tiny):
    with pytest.raises(UnknownNodeError):
        shortest_path(env_tiny.tmap, 0, 99)
    with pytest.raises(UnknownNodeError):
        env_tiny.graph.node(99)


def test_graph_serialization_deterministic():
    spec = BranchingSpec.parse("3,2,0")
    one = json.dumps(build_tree(spec, 5).to_dict(), sort_keys=True)
    two = json.dumps(build_tree(spec, 5).to_dict(), sort_keys=True)
    assert one == two


@settings(max_examples=30, deadline=None)
@given(
    levels=st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=4),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_property_all_pairs_reachable(levels, seed):
    spec = BranchingSpec(tuple(levels) + (0,))
    graph = build_tree(spec, seed)
    tmap = transition_map(graph)
    for start in range(len(graph)):
        dist = distances_from(tmap, start)
        assert len(dist) == len(graph)
