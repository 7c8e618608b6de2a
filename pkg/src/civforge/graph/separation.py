"""d-separation by reachability, plus the path-enumeration oracle."""

from collections import deque
from typing import Iterable, Iterator, List, Set, Tuple

import networkx as nx

from ..exceptions import GraphError
from .dag import CausalDag

_UP = "up"  # arrived from a child, travelling against edge direction
_DOWN = "down"  # arrived from a parent


def _check_query(dag: CausalDag, a: str, b: str, z: Set[str]) -> None:
    dag.require(a, b, *sorted(z))
    if a == b:
        raise GraphError(f"d-separation query needs two distinct nodes, got {a} twice")
    for endpoint in (a, b):
        if endpoint in z:
            raise GraphError(f"node {endpoint} is both an endpoint and in the conditioning set")


def d_separated(dag: CausalDag, a: str, b: str, z: Iterable[str] = ()) -> bool:
    """
    Test whether z d-separates a from b.

    Bayes-ball style reachability: a trail may pass a non-collider only if it
    is outside z, and a collider only if the collider is in z or has a
    descendant in z (equivalently, the collider is in z or an ancestor of z).

    Args:
        dag: The causal graph
        a: First endpoint
        b: Second endpoint
        z: Conditioning set

    Returns:
        True iff every path between a and b is blocked by z

    Raises:
        GraphError: Unknown node, a == b, or an endpoint inside z
    """
    z = set(z)
    _check_query(dag, a, b, z)

    opens_colliders = set(z)
    for node in z:
        opens_colliders |= dag.ancestors(node)

    visited: Set[Tuple[str, str]] = set()
    frontier = deque([(a, _UP)])
    while frontier:
        node, direction = frontier.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node == b:
            return False

        if direction == _UP and node not in z:
            frontier.extend((parent, _UP) for parent in dag.parents(node))
            frontier.extend((child, _DOWN) for child in dag.children(node))
        elif direction == _DOWN:
            if node not in z:
                frontier.extend((child, _DOWN) for child in dag.children(node))
            if node in opens_colliders:
                frontier.extend((parent, _UP) for parent in dag.parents(node))
    return True


def _all_paths(dag: CausalDag, a: str, b: str) -> Iterator[List[str]]:
    skeleton = nx.Graph()
    skeleton.add_nodes_from(dag.nodes)
    skeleton.add_edges_from(dag.edges)
    return nx.all_simple_paths(skeleton, a, b)


def path_blocked(dag: CausalDag, path: List[str], z: Set[str]) -> bool:
    """
    Whether a single path is blocked by z.

    A path is blocked if it has a chain or fork whose middle node is in z, or
    a collider that is not in z and has no descendant in z.
    """
    for left, middle, right in zip(path, path[1:], path[2:]):
        collider = dag.has_edge(left, middle) and dag.has_edge(right, middle)
        if collider:
            if middle not in z and not (dag.descendants(middle) & z):
                return True
        elif middle in z:
            return True
    return False


def d_separated_by_paths(dag: CausalDag, a: str, b: str, z: Iterable[str] = ()) -> bool:
    """Brute-force d-separation: enumerate every path and test each one."""
    z = set(z)
    _check_query(dag, a, b, z)
    return all(path_blocked(dag, path, z) for path in _all_paths(dag, a, b))


def open_paths(
    dag: CausalDag, a: str, b: str, z: Iterable[str] = (), limit: int = 10
) -> List[List[str]]:
    """
    Paths between a and b that z leaves open, shortest first.

    Args:
        dag: The causal graph
        a: First endpoint
        b: Second endpoint
        z: Conditioning set
        limit: Maximum number of paths returned

    Returns:
        Up to ``limit`` d-connecting paths as node-name lists
    """
    z = set(z)
    _check_query(dag, a, b, z)
    found = [path for path in _all_paths(dag, a, b) if not path_blocked(dag, path, z)]
    found.sort(key=lambda path: (len(path), path))
    return found[:limit]


def blocked_paths(
    dag: CausalDag, a: str, b: str, z: Iterable[str] = (), limit: int = 10
) -> List[List[str]]:
    """Paths between a and b that z blocks, shortest first (at most limit)."""
    z = set(z)
    _check_query(dag, a, b, z)
    found = [path for path in _all_paths(dag, a, b) if path_blocked(dag, path, z)]
    found.sort(key=lambda path: (len(path), path))
    return found[:limit]


def format_path(dag: CausalDag, path: List[str]) -> str:
    """Render a path with edge directions, e.g. ``S <- X2 <- U3 -> Y``."""
    parts = [path[0]]
    for left, right in zip(path, path[1:]):
        parts.append("->" if dag.has_edge(left, right) else "<-")
        parts.append(right)
    return " ".join(parts)
