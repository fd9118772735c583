"""Curvature, entropy, and feedback-controlled weight flow on networks."""

from .curvature import (
    CurvatureField,
    EntropyReport,
    curvature_field,
    edge_curvature,
    network_entropy,
    stationary_power_iteration,
)
from .flow import (
    ControlConfig,
    ErrorReport,
    FlowState,
    SimulationDriver,
    Telemetry,
    closed_loop_step,
    control_law,
    coupled_step,
    error_report,
    estimator_step,
    initial_state,
    open_loop_step,
    simulate,
)
from .graph import (
    NodeMeasure,
    WeightedGraph,
    generate_scale_free,
    load_edge_list,
    load_graph_file,
    load_json_graph,
    random_connected_graph,
    save_edge_list,
    save_json_graph,
)
from .schedule import (
    InputEvent,
    InputSchedule,
    apply_event,
    parse_inline_schedule,
    preset_schedule,
    resolve_targets,
)
from .transport import DiscreteMeasure, w1_distance, w1_oracle

__version__ = "0.1.0"

__all__ = [
    "ControlConfig",
    "CurvatureField",
    "DiscreteMeasure",
    "EntropyReport",
    "ErrorReport",
    "FlowState",
    "InputEvent",
    "InputSchedule",
    "NodeMeasure",
    "SimulationDriver",
    "Telemetry",
    "WeightedGraph",
    "apply_event",
    "closed_loop_step",
    "control_law",
    "coupled_step",
    "curvature_field",
    "edge_curvature",
    "error_report",
    "estimator_step",
    "generate_scale_free",
    "initial_state",
    "load_edge_list",
    "load_graph_file",
    "load_json_graph",
    "network_entropy",
    "open_loop_step",
    "parse_inline_schedule",
    "preset_schedule",
    "random_connected_graph",
    "resolve_targets",
    "save_edge_list",
    "save_json_graph",
    "simulate",
    "stationary_power_iteration",
    "w1_distance",
    "w1_oracle",
]
