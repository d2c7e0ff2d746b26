"""
Message styles, node preferences and deterministic cascades.

A style is a point in a six-dimensional space (polarity, emotionality,
length, time of day, URL count, hashtag count). Each node holds a preferred
point in the same space and forwards a message iff the mean normalised
absolute difference between the two is strictly below ``epsilon``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, DomainError
from .netgen import DirectedGraph, reachable_set

__all__ = [
    "FIELDS",
    "TIME_LABELS",
    "LOWER",
    "UPPER",
    "WIDTHS",
    "MessageStyle",
    "random_style",
    "NodePreferences",
    "PreferenceTable",
    "FilterConfig",
    "CascadeResult",
    "CascadeObjective",
    "style_distance",
    "forwards",
    "simulate_cascade",
    "cascade_from_mask",
    "cascade_scale",
    "fitness",
]

FIELDS = ("polarity", "emotionality", "length", "time", "url_count", "hashtag_count")
TIME_LABELS = ("morning", "afternoon", "night")
INTEGER_FIELDS = frozenset({"length", "time", "url_count", "hashtag_count"})

LOWER = np.array([-1.0, -1.0, 1.0, 0.0, 0.0, 0.0])
UPPER = np.array([1.0, 1.0, 140.0, 2.0, 10.0, 10.0])
WIDTHS = UPPER - LOWER

DEFAULT_EPSILON = 0.25


def _coerce_time(value):
    if isinstance(value, str):
        try:
            return TIME_LABELS.index(value)
        except ValueError:
            raise DomainError(f"unknown time label {value!r}; expected one of {TIME_LABELS}") from None
    return value


@dataclass(frozen=True, order=True)
class MessageStyle:
    """One message style; also the genome evolved by the GA.

    ``time`` is stored as its ordinal (0 morning, 1 afternoon, 2 night). The
    dataclass ordering (field by field) is the serialisation order used for
    deterministic tie-breaking.
    """

    polarity: float
    emotionality: float
    length: int
    time: int
    url_count: int
    hashtag_count: int

    def __post_init__(self):
        object.__setattr__(self, "time", _coerce_time(self.time))
        for i, name in enumerate(FIELDS):
            value = getattr(self, name)
            if name in INTEGER_FIELDS:
                if isinstance(value, bool) or int(value) != value:
                    raise DomainError(f"{name} must be an integer, got {value!r}")
                value = int(value)
            else:
                value = float(value)
            if not LOWER[i] <= value <= UPPER[i]:
                raise DomainError(f"{name}={value!r} outside [{LOWER[i]:g}, {UPPER[i]:g}]")
            object.__setattr__(self, name, value)

    @property
    def time_label(self) -> str:
        return TIME_LABELS[self.time]

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name in FIELDS)

    def to_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "MessageStyle":
        v = [float(x) for x in values]
        return cls(v[0], v[1], int(round(v[2])), int(round(v[3])), int(round(v[4])), int(round(v[5])))

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in FIELDS}
        d["time"] = self.time_label
        return d

    @classmethod
    def from_dict(cls, data: dict):
        missing = [name for name in FIELDS if name not in data]
        if missing:
            raise DomainError(f"missing style fields: {', '.join(missing)}")
        return cls(**{name: data[name] for name in FIELDS})

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))


class NodePreferences(MessageStyle):
    """A node's preferred style. Same fields and bounds as `MessageStyle`."""


def random_style(rng: np.random.Generator, cls=MessageStyle):
    """Draw every field uniformly from its domain."""
    return cls(
        float(rng.uniform(-1.0, 1.0)),
        float(rng.uniform(-1.0, 1.0)),
        int(rng.integers(1, 141)),
        int(rng.integers(0, 3)),
        int(rng.integers(0, 11)),
        int(rng.integers(0, 11)),
    )


class PreferenceTable:
    """Per-node preferences kept as an ``(n, 6)`` array for vectorised filtering."""

    def __init__(self, prefs: Sequence[NodePreferences]):
        self._prefs = tuple(p if isinstance(p, NodePreferences) else NodePreferences(*p.as_tuple()) for p in prefs)
        arr = np.array([p.as_tuple() for p in self._prefs], dtype=np.float64).reshape(-1, 6)
        arr.setflags(write=False)
        self.array = arr

    @classmethod
    def random(cls, node_count: int, rng: np.random.Generator) -> "PreferenceTable":
        return cls([random_style(rng, NodePreferences) for _ in range(node_count)])

    @classmethod
    def uniform(cls, node_count: int, point: MessageStyle) -> "PreferenceTable":
        p = NodePreferences(*point.as_tuple())
        return cls([p] * node_count)

    def __len__(self):
        return len(self._prefs)

    def __getitem__(self, node):
        return self._prefs[node]

    def __iter__(self):
        return iter(self._prefs)

    def __eq__(self, other):
        return isinstance(other, PreferenceTable) and self._prefs == other._prefs

    def distances(self, msgs: np.ndarray) -> np.ndarray:
        """Style distances, shape ``(len(msgs), n)``, for raw ``(m, 6)`` message rows."""
        return _distance_matrix(np.atleast_2d(msgs), self.array)

    def forward_mask(self, msg: MessageStyle, epsilon: float) -> np.ndarray:
        return self.distances(msg.to_array())[0] < epsilon

    def to_list(self) -> list:
        return [p.to_dict() for p in self._prefs]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), separators=(",", ":"))

    @classmethod
    def from_list(cls, rows) -> "PreferenceTable":
        return cls([NodePreferences.from_dict(row) for row in rows])

    @classmethod
    def from_json(cls, text: str) -> "PreferenceTable":
        return cls.from_list(json.loads(text))


@dataclass(frozen=True)
class FilterConfig:
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ConfigError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")


def _epsilon(filter) -> float:
    # Bare floats skip the (0, 1] check so the edge cases 0 and > 1 stay reachable.
    if isinstance(filter, FilterConfig):
        return filter.epsilon
    eps = float(filter)
    if eps < 0 or eps != eps:
        raise ConfigError(f"epsilon must be non-negative, got {filter!r}")
    return eps


def _styles_array(style) -> np.ndarray:
    if not isinstance(style, MessageStyle):
        raise DomainError(f"expected a MessageStyle, got {type(style).__name__}")
    return style.to_array()


def _distance_matrix(msgs: np.ndarray, prefs: np.ndarray) -> np.ndarray:
    # Single code path for scalar and batched distances, so threshold ties agree.
    return (np.abs(msgs[:, None, :] - prefs[None, :, :]) / WIDTHS).mean(axis=2)


def style_distance(prefs: MessageStyle, msg: MessageStyle) -> float:
    """Mean over the six dimensions of ``|pref - msg| / domain width``; in [0, 1]."""
    a = _styles_array(prefs)
    b = _styles_array(msg)
    return float(_distance_matrix(b[None, :], a[None, :])[0, 0])


def forwards(prefs: MessageStyle, msg: MessageStyle, filter: Union[FilterConfig, float]) -> bool:
    return style_distance(prefs, msg) < _epsilon(filter)


@dataclass(frozen=True)
class CascadeResult:
    receivers: frozenset
    forwarders: frozenset
    depth_of: dict
    scale: int
    range: int
    speed: float

    def to_dict(self) -> dict:
        return {
            "receivers": sorted(self.receivers),
            "forwarders": sorted(self.forwarders),
            "depth_of": {str(k): v for k, v in sorted(self.depth_of.items())},
            "scale": self.scale,
            "range": self.range,
            "speed": self.speed,
        }


def _check_context(graph: DirectedGraph, prefs: PreferenceTable, sender) -> None:
    graph.check_node(sender)
    if len(prefs) != graph.node_count:
        raise ConfigError(f"{len(prefs)} preference rows for a graph of {graph.node_count} nodes")


def simulate_cascade(
    graph: DirectedGraph,
    prefs: PreferenceTable,
    sender: int,
    msg: MessageStyle,
    filter: Union[FilterConfig, float] = DEFAULT_EPSILON,
) -> CascadeResult:
    """Breadth-first spread of ``msg`` posted by ``sender``.

    The sender always posts to all its followers. Every other node is judged
    once, at the depth where it first receives the message; if it forwards,
    its followers that have not yet received the message get it one hop later.
    """
    _check_context(graph, prefs, sender)
    mask = prefs.forward_mask(msg, _epsilon(filter))
    return cascade_from_mask(graph.out_edges, mask, sender)


def cascade_from_mask(out_edges, mask, sender: int) -> CascadeResult:
    """Cascade over raw adjacency lists given each node's forwarding decision."""
    depth = {sender: 0}
    forwarders = set()
    queue = deque([sender])
    while queue:
        u = queue.popleft()
        d = depth[u] + 1
        for v in out_edges[u]:
            if v in depth:
                continue
            depth[v] = d
            if mask[v]:
                forwarders.add(v)
                queue.append(v)
    receivers = frozenset(depth) - {sender}
    scale = len(receivers)
    reach = max((depth[v] for v in forwarders), default=0)
    return CascadeResult(
        receivers=receivers,
        forwarders=frozenset(forwarders),
        depth_of=depth,
        scale=scale,
        range=reach,
        speed=scale / reach if reach else 0.0,
    )


def cascade_scale(out_edges, mask, sender: int) -> int:
    """Receiver count only; the hot path of fitness evaluation."""
    seen = {sender}
    stack = [sender]
    while stack:
        u = stack.pop()
        for v in out_edges[u]:
            if v not in seen:
                seen.add(v)
                if mask[v]:
                    stack.append(v)
    return len(seen) - 1


def fitness(
    graph: DirectedGraph,
    prefs: PreferenceTable,
    sender: int,
    msg: MessageStyle,
    filter: Union[FilterConfig, float] = DEFAULT_EPSILON,
) -> int:
    """Number of nodes reached by the cascade (its scale)."""
    _check_context(graph, prefs, sender)
    return cascade_scale(graph.out_edges, prefs.forward_mask(msg, _epsilon(filter)).tolist(), sender)


@dataclass(frozen=True)
class CascadeObjective:
    """Fixed experiment context; calling it scores a batch of styles."""

    graph: DirectedGraph
    prefs: PreferenceTable
    sender: int
    filter: Union[FilterConfig, float] = DEFAULT_EPSILON

    def __post_init__(self):
        _check_context(self.graph, self.prefs, self.sender)

    @property
    def epsilon(self) -> float:
        return _epsilon(self.filter)

    def upper_bound(self) -> int:
        return len(reachable_set(self.graph, self.sender))

    def scores(self, rows: np.ndarray) -> np.ndarray:
        """Scale for each raw ``(m, 6)`` style row."""
        masks = self.prefs.distances(rows) < self.epsilon
        out_edges = self.graph.out_edges
        return np.array(
            [cascade_scale(out_edges, m, self.sender) for m in masks.tolist()],
            dtype=np.int64,
        )

    def __call__(self, styles: Sequence[MessageStyle]) -> np.ndarray:
        if not styles:
            return np.zeros(0, dtype=np.int64)
        return self.scores(np.array([s.as_tuple() for s in styles], dtype=np.float64))

    def cascade(self, msg: MessageStyle) -> CascadeResult:
        return simulate_cascade(self.graph, self.prefs, self.sender, msg, self.filter)
