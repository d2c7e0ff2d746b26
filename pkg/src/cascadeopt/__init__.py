"""
cascadeopt
==========

Evolve message styles that spread furthest through a follower network.

- ``netgen``: power-law follower graphs, pruning, path-length statistics
- ``diffusion``: styles, the deterministic forwarding filter, cascades
- ``ga``: elitist genetic algorithm with tournament selection
- ``harness``: replicated experiments, summaries, grid oracle

Basic example
-------------

.. code:: python

    import numpy as np
    from cascadeopt import (CascadeObjective, GaConfig, NetworkConfig,
                            PreferenceTable, generate_network, pick_sender, run_ga)

    graph = generate_network(NetworkConfig(node_count=250, exponent=2.4, seed=1))
    prefs = PreferenceTable.random(graph.node_count, np.random.default_rng(2))
    objective = CascadeObjective(graph, prefs, pick_sender(graph, 10), 0.25)
    result = run_ga(objective, GaConfig(generations=100, seed=3))
    result.best.fitness, result.best.genome
"""

from .diffusion import (
    CascadeObjective,
    CascadeResult,
    FilterConfig,
    MessageStyle,
    NodePreferences,
    PreferenceTable,
    fitness,
    forwards,
    simulate_cascade,
    style_distance,
)
from .errors import (
    CascadeOptError,
    ConfigError,
    DegenerateNetworkError,
    DomainError,
    GridTooLargeError,
    InvalidDegreeError,
    InvalidNodeError,
)
from .ga import GaConfig, GaResult, GenerationRecord, Individual, run_ga
from .harness import (
    ExperimentConfig,
    ReplicationSummary,
    grid_oracle,
    mix_seed,
    pick_sender,
    run_experiment,
    summarize,
    write_outputs,
)
from .netgen import (
    DirectedGraph,
    NetworkConfig,
    NetworkStats,
    compute_stats,
    generate_network,
    prune_isolated,
    reachable_set,
)

__version__ = "0.1.0"
