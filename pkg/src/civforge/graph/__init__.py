"""Causal graphs, d-separation and conditional-IV verification"""

from .dag import CausalDag, NodeKind, parse_dag, load_dag, format_dag, manipulate_remove_ty
from .separation import (
    blocked_paths,
    d_separated,
    d_separated_by_paths,
    format_path,
    open_paths,
    path_blocked,
)
from .civ import CivVerdict, is_civ, find_conditioning_set
from .catalog import (
    simulation_dag,
    conditional_iv_dag,
    standard_iv_dag,
    representation_dag,
    list_graphs,
)

__all__ = [
    "CausalDag",
    "NodeKind",
    "parse_dag",
    "load_dag",
    "format_dag",
    "manipulate_remove_ty",
    "d_separated",
    "d_separated_by_paths",
    "open_paths",
    "blocked_paths",
    "path_blocked",
    "format_path",
    "CivVerdict",
    "is_civ",
    "find_conditioning_set",
    "simulation_dag",
    "conditional_iv_dag",
    "standard_iv_dag",
    "representation_dag",
    "list_graphs",
]
