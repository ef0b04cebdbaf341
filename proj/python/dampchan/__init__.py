"""Two-parameter damping channel: linear-optical simulation and process tomography."""

from ._core import (
    __version__,
    analytic_success,
    apply_channel,
    chi_from_kraus,
    choi_state,
    concurrence,
    conditional_operators,
    damping_kraus,
    max_trace_distance,
    optimal_success_probability,
    process_fidelity,
    reconstruct_channel,
    run_figure,
    simulate_transmission,
    success_probability,
    tangle,
)

__all__ = [
    "__version__",
    "analytic_success",
    "apply_channel",
    "chi_from_kraus",
    "choi_state",
    "concurrence",
    "conditional_operators",
    "damping_kraus",
    "max_trace_distance",
    "optimal_success_probability",
    "process_fidelity",
    "reconstruct_channel",
    "run_figure",
    "simulate_transmission",
    "success_probability",
    "tangle",
]
