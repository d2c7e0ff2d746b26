"""Build a follower network and look at its shape.

Every node draws a follower count and a followee count from a shifted
power law, so most accounts are small and a handful act as hubs. Nodes that
end up with no edges at all are dropped.
"""

import numpy as np

from cascadeopt import NetworkConfig, compute_stats, generate_network

graph = generate_network(NetworkConfig(node_count=250, exponent=2.4, seed=0))
stats = compute_stats(graph)

print(f"nodes kept:        {stats.retained_nodes} of 250")
print(f"follower edges:    {stats.edge_count}")
print(f"out-degree mean:   {stats.mean_out_degree:.2f}")
print(f"out-degree median: {stats.median_out_degree:.0f}")
print(f"largest audience:  {stats.max_out_degree}")
print(f"mean hops between reachable pairs: {stats.average_path_length:.2f}")

# a crude text histogram of out-degrees
counts = np.bincount(graph.out_degrees())
for k in range(0, 11):
    print(f"{k:>3} {'#' * int(counts[k] // 2) if k < counts.size else ''}")
print(f"... and {int((graph.out_degrees() > 10).sum())} nodes with more than 10 followers")
