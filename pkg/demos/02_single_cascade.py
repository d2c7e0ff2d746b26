"""Send one message from one account and trace how far it travels.

A follower passes the message on only when its style is close enough to
what that follower likes. Lowering the threshold makes the crowd pickier.
"""

import numpy as np

from cascadeopt import MessageStyle, NetworkConfig, PreferenceTable, generate_network, simulate_cascade

graph = generate_network(NetworkConfig(seed=0))
prefs = PreferenceTable.random(graph.node_count, np.random.default_rng(1))
sender = int(np.argmax(graph.out_degrees()))
msg = MessageStyle(polarity=0.2, emotionality=-0.1, length=70, time="afternoon", url_count=5, hashtag_count=5)

print(f"sender {sender} has {len(graph.followers(sender))} followers")
print("message:", msg.to_json())
for eps in (0.15, 0.25, 0.35):
    r = simulate_cascade(graph, prefs, sender, msg, eps)
    print(f"eps={eps:.2f}  reached {r.scale:>3}  forwarders {len(r.forwarders):>3}  depth {r.range}  speed {r.speed:.1f}")
