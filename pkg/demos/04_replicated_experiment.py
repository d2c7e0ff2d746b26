"""Compare senders of different reach across repeated GA runs.

The network and preferences stay fixed; only the GA seed changes between
replications. The table shows the average winning style per sender type.
A short run is used here; the defaults match the full 50 x 250 protocol.
"""

import sys
from pathlib import Path

from cascadeopt import ExperimentConfig, GaConfig, run_experiment, write_outputs
from cascadeopt.diffusion import FIELDS

config = ExperimentConfig(ga=GaConfig(generations=80), replications=8)
result = run_experiment(config)

header = f"{'':>14}" + "".join(f"{f'deg~{s.target_degree} (#{s.sender})':>22}" for s in result.summary.senders)
print(header)
for name in FIELDS:
    cells = "".join(f"{s.genome_mean[name]:>13.2f} +/- {s.genome_se[name]:<5.2f}" for s in result.summary.senders)
    print(f"{name:>14}{cells}")
cells = "".join(f"{s.fitness_mean:>13.2f} +/- {s.fitness_se:<5.2f}" for s in result.summary.senders)
print(f"{'reached':>14}{cells}")

if len(sys.argv) > 1:
    for path in write_outputs(result, Path(sys.argv[1])):
        print("wrote", path)
