"""Causal DAG representation and the line-oriented graph text format.

Format: one statement per line (``;`` also separates statements)::

    # comment
    node S measured
    node U latent
    node T treatment
    node Y outcome
    edge S T

Blank lines and anything after ``#`` are ignored.
"""

from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Tuple, Union

import networkx as nx

from ..exceptions import CycleError, GraphError, GraphSyntaxError


class NodeKind(str, Enum):
    """Role of a node in a causal graph."""

    MEASURED = "measured"
    LATENT = "latent"
    TREATMENT = "treatment"
    OUTCOME = "outcome"


Edge = Tuple[str, str]


class CausalDag:
    """Immutable directed acyclic graph with typed nodes.

    Construction validates names, edge endpoints and acyclicity. All query
    methods are pure, so instances can be shared between threads.
    """

    __slots__ = ("_nodes", "_kinds", "_edges", "_graph")

    def __init__(
        self,
        nodes: Iterable[Tuple[str, Union[NodeKind, str]]],
        edges: Iterable[Edge] = (),
    ):
        """
        Build and validate a DAG.

        Args:
            nodes: Ordered (name, kind) pairs
            edges: (parent, child) pairs

        Raises:
            GraphError: On duplicate names or undeclared edge endpoints
            CycleError: If the edges contain a directed cycle
        """
        ordered: List[str] = []
        kinds: Dict[str, NodeKind] = {}
        for name, kind in nodes:
            if name in kinds:
                raise GraphError(f"duplicate declaration of node {name}")
            kinds[name] = NodeKind(kind)
            ordered.append(name)

        edge_set = frozenset((parent, child) for parent, child in edges)
        for parent, child in sorted(edge_set):
            for endpoint in (parent, child):
                if endpoint not in kinds:
                    raise GraphError(f"undeclared node {endpoint} in edge {parent} -> {child}")

        graph = nx.DiGraph()
        graph.add_nodes_from(ordered)
        graph.add_edges_from(sorted(edge_set))
        if not nx.is_directed_acyclic_graph(graph):
            cycle = [u for u, _ in nx.find_cycle(graph)]
            raise CycleError(cycle + [cycle[0]])

        self._nodes: Tuple[str, ...] = tuple(ordered)
        self._kinds = kinds
        self._edges: FrozenSet[Edge] = edge_set
        self._graph = graph

    @property
    def nodes(self) -> Tuple[str, ...]:
        """Node names in declaration order."""
        return self._nodes

    @property
    def edges(self) -> FrozenSet[Edge]:
        """Set of (parent, child) edges."""
        return self._edges

    def edge_count(self) -> int:
        return len(self._edges)

    def kind(self, name: str) -> NodeKind:
        """Kind of a declared node."""
        self.require(name)
        return self._kinds[name]

    def require(self, *names: str) -> None:
        """Raise GraphError unless every name is a declared node."""
        for name in names:
            if name not in self._kinds:
                raise GraphError(f"unknown node {name}")

    def has_edge(self, parent: str, child: str) -> bool:
        return (parent, child) in self._edges

    def nodes_of_kind(self, kind: Union[NodeKind, str]) -> List[str]:
        kind = NodeKind(kind)
        return [name for name in self._nodes if self._kinds[name] is kind]

    def _single(self, kind: NodeKind) -> str:
        found = self.nodes_of_kind(kind)
        if len(found) != 1:
            raise GraphError(f"expected exactly one {kind.value} node, found {len(found)}")
        return found[0]

    @property
    def treatment(self) -> str:
        """The unique treatment node."""
        return self._single(NodeKind.TREATMENT)

    @property
    def outcome(self) -> str:
        """The unique outcome node."""
        return self._single(NodeKind.OUTCOME)

    def parents(self, name: str) -> FrozenSet[str]:
        self.require(name)
        return frozenset(self._graph.predecessors(name))

    def children(self, name: str) -> FrozenSet[str]:
        self.require(name)
        return frozenset(self._graph.successors(name))

    def ancestors(self, name: str) -> FrozenSet[str]:
        """Proper ancestors of a node."""
        self.require(name)
        return frozenset(nx.ancestors(self._graph, name))

    def descendants(self, name: str) -> FrozenSet[str]:
        """Proper descendants of a node."""
        self.require(name)
        return frozenset(nx.descendants(self._graph, name))

    def topological_order(self) -> List[str]:
        return list(nx.lexicographical_topological_sort(self._graph))

    def to_networkx(self) -> nx.DiGraph:
        """Independent networkx copy, with node kinds as the ``kind`` attribute."""
        graph = self._graph.copy()
        nx.set_node_attributes(graph, {n: k.value for n, k in self._kinds.items()}, "kind")
        return graph

    def without_edge(self, parent: str, child: str) -> "CausalDag":
        """New DAG identical to this one minus a single edge."""
        if not self.has_edge(parent, child):
            raise GraphError(f"edge {parent} -> {child} is absent")
        return CausalDag(
            ((name, self._kinds[name]) for name in self._nodes),
            self._edges - {(parent, child)},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalDag):
            return NotImplemented
        return self._nodes == other._nodes and self._kinds == other._kinds and (
            self._edges == other._edges
        )

    def __hash__(self) -> int:
        return hash((self._nodes, self._edges))

    def __repr__(self) -> str:
        return f"CausalDag(nodes={len(self._nodes)}, edges={len(self._edges)})"


def _statements(text: str):
    """Yield (line_number, [(token, column), ...]) for each statement."""
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        offset = 0
        for chunk in line.split(";"):
            tokens = []
            position = 0
            for token in chunk.split():
                position = chunk.index(token, position)
                tokens.append((token, offset + position + 1))
                position += len(token)
            if tokens:
                yield line_number, tokens
            offset += len(chunk) + 1


def parse_dag(text: str) -> CausalDag:
    """
    Parse the graph text format into a validated CausalDag.

    Args:
        text: Graph description

    Returns:
        Validated CausalDag

    Raises:
        GraphSyntaxError: Malformed statement (with line and column)
        GraphError: Duplicate declaration or undeclared edge endpoint
        CycleError: Cyclic edges
    """
    nodes: List[Tuple[str, NodeKind]] = []
    declared: Dict[str, int] = {}
    edges: List[Edge] = []
    seen_edges = set()

    for line_number, tokens in _statements(text):
        keyword, column = tokens[0]
        if keyword == "node":
            if len(tokens) != 3:
                raise GraphSyntaxError("expected 'node NAME KIND'", line_number, column)
            (name, _), (kind, kind_column) = tokens[1], tokens[2]
            try:
                node_kind = NodeKind(kind)
            except ValueError:
                valid = ", ".join(k.value for k in NodeKind)
                raise GraphSyntaxError(
                    f"unknown node kind '{kind}' (expected one of {valid})",
                    line_number,
                    kind_column,
                )
            if name in declared:
                raise GraphError(
                    f"line {line_number}: duplicate declaration of node {name} "
                    f"(first declared on line {declared[name]})"
                )
            declared[name] = line_number
            nodes.append((name, node_kind))
        elif keyword == "edge":
            if len(tokens) != 3:
                raise GraphSyntaxError("expected 'edge PARENT CHILD'", line_number, column)
            (parent, _), (child, _) = tokens[1], tokens[2]
            if (parent, child) in seen_edges:
                raise GraphError(f"line {line_number}: duplicate edge {parent} -> {child}")
            seen_edges.add((parent, child))
            edges.append((parent, child))
        else:
            raise GraphSyntaxError(f"unknown statement '{keyword}'", line_number, column)

    # Endpoint checks happen here so that forward references to nodes declared
    # later in the file are allowed.
    for parent, child in edges:
        for endpoint in (parent, child):
            if endpoint not in declared:
                raise GraphError(f"undeclared node {endpoint} in edge {parent} -> {child}")

    return CausalDag(nodes, edges)


def load_dag(path: Union[str, Path]) -> CausalDag:
    """Read and parse a UTF-8 graph file."""
    return parse_dag(Path(path).read_text(encoding="utf-8"))


def format_dag(dag: CausalDag) -> str:
    """Canonical text rendering; ``parse_dag(format_dag(d)) == d``."""
    lines = [f"node {name} {dag.kind(name).value}" for name in dag.nodes]
    lines += [f"edge {parent} {child}" for parent, child in sorted(dag.edges)]
    return "\n".join(lines) + "\n"


def manipulate_remove_ty(dag: CausalDag) -> CausalDag:
    """
    Remove the direct treatment -> outcome edge.

    Args:
        dag: Graph with exactly one treatment and one outcome node

    Returns:
        New CausalDag without the edge; the input is not modified

    Raises:
        GraphError: If the edge treatment -> outcome is absent
    """
    treatment, outcome = dag.treatment, dag.outcome
    if not dag.has_edge(treatment, outcome):
        raise GraphError(f"edge {treatment} -> {outcome} is absent")
    return dag.without_edge(treatment, outcome)
