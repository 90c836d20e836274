"""Bounded-confidence opinion dynamics laboratory.

Profiles are float arrays of shape (n, d); a 1-D array is read as d = 1.
Graphs are boolean (n, n) adjacency arrays with ``adj[i, j]`` true when
agent i observes agent j.
"""

from ._hklab import (
    async_step,
    best_response,
    build_neighborhoods,
    cheeger_audit,
    connected_components,
    consensus_residual,
    eigenvalues,
    factorization_residual,
    generate_initial,
    hetero_sync_step,
    hull_distance,
    is_delta_equilibrium,
    is_nash,
    is_steady_state,
    isoperimetric,
    lambda2,
    laplacian,
    lyapunov_V,
    monte_carlo_hitting,
    potential,
    run_async,
    run_hetero,
    run_sync,
    scrambling_coefficient,
    set_diameter,
    sync_matrix,
    sync_step,
    team_offset,
    utility,
)

__all__ = [
    "async_step",
    "best_response",
    "build_neighborhoods",
    "cheeger_audit",
    "connected_components",
    "consensus_residual",
    "eigenvalues",
    "factorization_residual",
    "generate_initial",
    "hetero_sync_step",
    "hull_distance",
    "is_delta_equilibrium",
    "is_nash",
    "is_steady_state",
    "isoperimetric",
    "lambda2",
    "laplacian",
    "lyapunov_V",
    "monte_carlo_hitting",
    "potential",
    "run_async",
    "run_hetero",
    "run_sync",
    "scrambling_coefficient",
    "set_diameter",
    "sync_matrix",
    "sync_step",
    "team_offset",
    "utility",
]
