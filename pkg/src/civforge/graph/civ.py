"""Conditional instrumental variable checks on explicit causal graphs."""

from dataclasses import dataclass, field
from itertools import combinations
from typing import FrozenSet, Iterable, List, Optional

import networkx as nx

from ..exceptions import CivConditionError
from .dag import CausalDag, NodeKind, manipulate_remove_ty
from .separation import blocked_paths, d_separated, open_paths


@dataclass(frozen=True)
class CivVerdict:
    """Outcome of checking the three conditional-IV conditions."""

    is_civ: bool
    condition1: bool  # relevance: S and T d-connected given W
    condition2: bool  # S and Y d-separated given W once T -> Y is removed
    condition3: bool  # no member of W descends from Y
    # Blocked S-T paths, open S-Y paths and Y-to-W paths for failed conditions
    witness_paths: List[List[str]] = field(default_factory=list)

    def __post_init__(self):
        if self.is_civ != (self.condition1 and self.condition2 and self.condition3):
            raise ValueError("is_civ must equal the conjunction of the three conditions")

    def to_dict(self) -> dict:
        return {
            "is_civ": self.is_civ,
            "condition1": self.condition1,
            "condition2": self.condition2,
            "condition3": self.condition3,
            "witness_paths": [list(path) for path in self.witness_paths],
        }


def _validate(dag: CausalDag, s: str, w: FrozenSet[str]) -> None:
    dag.require(s, *sorted(w))
    treatment, outcome = dag.treatment, dag.outcome
    if dag.kind(s) is not NodeKind.MEASURED:
        raise CivConditionError(f"candidate instrument {s} is {dag.kind(s).value}, not measured")
    if not w:
        raise CivConditionError("the conditioning set must be nonempty")
    for name in (s, treatment, outcome):
        if name in w:
            raise CivConditionError(f"the conditioning set may not contain {name}")
    for name in sorted(w):
        if dag.kind(name) is not NodeKind.MEASURED:
            raise CivConditionError(
                f"conditioning node {name} is {dag.kind(name).value}, not measured"
            )


def is_civ(dag: CausalDag, s: str, w: Iterable[str]) -> CivVerdict:
    """
    Check whether s is a conditional IV for treatment -> outcome given w.

    Args:
        dag: Causal graph with one treatment and one outcome node
        s: Measured candidate instrument
        w: Nonempty set of measured conditioning nodes

    Returns:
        CivVerdict with each condition and witness paths for the failed ones:
        the S-T paths w blocks (none when S and T are unconnected), the S-Y
        paths w leaves open after removing T -> Y, and directed paths from Y
        to conditioning nodes

    Raises:
        CivConditionError: s not measured, w empty, or w containing s/T/Y or a
            non-measured node
    """
    w = frozenset(w)
    _validate(dag, s, w)
    treatment, outcome = dag.treatment, dag.outcome
    witnesses: List[List[str]] = []

    condition1 = not d_separated(dag, s, treatment, w)
    if not condition1:
        witnesses.extend(blocked_paths(dag, s, treatment, w))

    manipulated = manipulate_remove_ty(dag) if dag.has_edge(treatment, outcome) else dag
    condition2 = d_separated(manipulated, s, outcome, w)
    if not condition2:
        witnesses.extend(open_paths(manipulated, s, outcome, w))

    below_outcome = dag.descendants(outcome) & w
    condition3 = not below_outcome
    if not condition3:
        graph = dag.to_networkx()
        for name in sorted(below_outcome):
            witnesses.append(nx.shortest_path(graph, outcome, name))

    return CivVerdict(
        is_civ=condition1 and condition2 and condition3,
        condition1=condition1,
        condition2=condition2,
        condition3=condition3,
        witness_paths=witnesses,
    )


def find_conditioning_set(
    dag: CausalDag, s: str, max_size: Optional[int] = None
) -> Optional[FrozenSet[str]]:
    """
    Smallest measured set that makes s a conditional IV.

    Subsets are searched by increasing size and, within a size, in
    lexicographic order of their sorted member names. Exponential in the
    number of measured nodes; intended for graphs of about 20 nodes.

    Args:
        dag: Causal graph
        s: Measured candidate instrument
        max_size: Largest subset size to try (default: all measured nodes but s)

    Returns:
        The first qualifying set, or None when none exists within max_size
    """
    measured = dag.nodes_of_kind(NodeKind.MEASURED)
    if max_size is None:
        max_size = len(measured) - 1
    if max_size > len(measured):
        raise CivConditionError(
            f"max_size {max_size} exceeds the number of measured nodes ({len(measured)})"
        )
    dag.require(s)
    if dag.kind(s) is not NodeKind.MEASURED:
        raise CivConditionError(f"candidate instrument {s} is {dag.kind(s).value}, not measured")

    candidates = sorted(name for name in measured if name != s)
    for size in range(1, max_size + 1):
        for subset in combinations(candidates, size):
            if is_civ(dag, s, subset).is_civ:
                return frozenset(subset)
    return None
