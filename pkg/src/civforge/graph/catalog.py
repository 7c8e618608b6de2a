"""Reference graphs used by the method and its simulation study."""

from pathlib import Path
from typing import Callable, Dict, List

from .dag import CausalDag, load_dag

# One ``<name>.dag`` file per catalog graph, shipped inside the package
GRAPH_DIR = Path(__file__).resolve().parent / "graphs"


def graph_path(name: str) -> Path:
    """Location of a catalog graph file."""
    return GRAPH_DIR / f"{name}.dag"


def simulation_dag() -> CausalDag:
    """13-node, 17-edge DAG behind the synthetic datasets."""
    return load_dag(graph_path("simulation"))


def conditional_iv_dag() -> CausalDag:
    """Five-node conditional-IV example (S, W_S, U_C, T, Y)."""
    return load_dag(graph_path("conditional_iv"))


def standard_iv_dag() -> CausalDag:
    return load_dag(graph_path("standard_iv"))


def representation_dag() -> CausalDag:
    """Graph over X, Z_T, Z_C, U_C, T, Y assumed by the representation learner."""
    return load_dag(graph_path("representation"))


CATALOG: Dict[str, Callable[[], CausalDag]] = {
    "simulation": simulation_dag,
    "conditional_iv": conditional_iv_dag,
    "standard_iv": standard_iv_dag,
    "representation": representation_dag,
}


def list_graphs() -> List[str]:
    return sorted(CATALOG)
