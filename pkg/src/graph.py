"""
LangGraph orchestrator for one experiment run.

SAA experiments (example1, example2):
    prepare → solve_reference → replicate → write_artifacts

Single solve (solve-once):
    prepare → solve_once → write_artifacts

Analytic experiments (optimality5, lognormal61, dimension8, bounds3):
    prepare → analytic → write_artifacts
"""

import logging
from typing import Literal, Optional

from langgraph.graph import END, StateGraph

from .config import ANALYTIC_KINDS, ExperimentConfig, Settings, get_settings
from .stages import analytic, prepare, replicate, solve_once, solve_reference_stage, write_artifacts
from .state import ExperimentState

logger = logging.getLogger(__name__)


def route_after_prepare(state: ExperimentState) -> Literal["solve_reference", "solve_once", "analytic"]:
    """Route by experiment kind."""
    kind = state["config"].kind
    if kind in ANALYTIC_KINDS:
        logger.info(f"Graph: routing {kind} to analytic")
        return "analytic"
    if kind == "solve-once":
        logger.info("Graph: routing to single SAA solve")
        return "solve_once"
    logger.info(f"Graph: routing {kind} to reference solve and replications")
    return "solve_reference"


def build_experiment_graph() -> StateGraph:
    """Build and return the (uncompiled) experiment graph."""
    graph = StateGraph(ExperimentState)

    graph.add_node("prepare", prepare)
    graph.add_node("solve_reference", solve_reference_stage)
    graph.add_node("replicate", replicate)
    graph.add_node("solve_once", solve_once)
    graph.add_node("analytic", analytic)
    graph.add_node("write_artifacts", write_artifacts)

    graph.set_entry_point("prepare")

    graph.add_conditional_edges(
        "prepare",
        route_after_prepare,
        {"solve_reference": "solve_reference", "solve_once": "solve_once", "analytic": "analytic"},
    )
    graph.add_edge("solve_reference", "replicate")
    graph.add_edge("replicate", "write_artifacts")
    graph.add_edge("solve_once", "write_artifacts")
    graph.add_edge("analytic", "write_artifacts")
    graph.add_edge("write_artifacts", END)

    return graph


def run_experiment(config: ExperimentConfig, settings: Optional[Settings] = None) -> ExperimentState:
    """
    Resolve the config and run the full pipeline, returning the final state.

    Failures are logged and re-raised; the CLI turns them into exit codes.
    """
    resolved = config.resolve(settings or get_settings())
    initial_state: ExperimentState = {"config": resolved, "errors": []}

    logger.info(f"Starting experiment {resolved.kind} (scale={resolved.scale}, threads={resolved.threads})")
    try:
        compiled = build_experiment_graph().compile()
        final_state = compiled.invoke(initial_state)
        logger.info(f"Experiment complete: {len(final_state.get('files', []))} files in {resolved.output_dir}")
        return final_state
    except Exception as e:
        logger.error(f"Experiment {resolved.kind} failed: {e}", exc_info=True)
        raise


def get_graph_mermaid() -> str:
    """Return a Mermaid diagram of the graph (for documentation and debugging)."""
    try:
        return build_experiment_graph().compile().get_graph().draw_mermaid()
    except Exception:
        return """
graph TD
    A[prepare] --> B{route_after_prepare}
    B -->|example1, example2| C[solve_reference]
    B -->|solve-once| D[solve_once]
    B -->|analytic kinds| E[analytic]
    C --> F[replicate]
    F --> G[write_artifacts]
    D --> G
    E --> G
    G --> H[END]
"""
