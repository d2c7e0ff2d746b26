"""Let the genetic algorithm search for the message style that spreads furthest.

The objective is the number of accounts reached from one sender. The run
keeps a best-so-far record per generation, printed here every 25 steps.
"""

import numpy as np

from cascadeopt import CascadeObjective, GaConfig, NetworkConfig, PreferenceTable, generate_network, run_ga

graph = generate_network(NetworkConfig(seed=0))
prefs = PreferenceTable.random(graph.node_count, np.random.default_rng(1))
sender = int(np.argmin(np.abs(graph.out_degrees() - 10)))
objective = CascadeObjective(graph, prefs, sender, 0.25)

print(f"sender {sender}, {len(graph.followers(sender))} followers, at most {objective.upper_bound()} reachable")
result = run_ga(objective, GaConfig(generations=150, seed=7))
for rec in result.records[::25] + [result.records[-1]]:
    print(f"gen {rec.generation_index:>3}  best {rec.best_fitness:>3}  population mean {rec.mean_fitness:6.2f}")
print("best style found:", result.best.genome.to_json())
