"""Core data model: graphs, thresholds, dynamics modes, instances, traces, certificates.

All types are immutable after construction and safe to share across workers.
Node ids are dense integers 0..n-1; labels are presentation-only. Algorithms
work on ids (and on int bitmasks internally); every file format carries labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

SIMULTANEOUS = "simultaneous"
SEQUENTIAL = "sequential"

# one non-negative entry per node; entries may exceed the node's degree
# (such nodes can only ever be active by seeding)
Thresholds = tuple[int, ...]


class InvalidInstanceError(ValueError):
    """Raised when a raw instance description violates the model invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def mask_of(nodes: Iterable[int]) -> int:
    """Pack node ids into an int bitmask."""
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def nodes_of(mask: int) -> frozenset[int]:
    """Unpack an int bitmask into a frozenset of node ids."""
    return frozenset(iter_bits(mask))


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set bit positions in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes 0..n-1.

    ``adj`` holds sorted neighbor tuples; ``adj_masks`` the same adjacency as
    int bitmasks (``adj_masks[v] >> u & 1`` tests the edge u-v).
    """

    n: int
    adj: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]
    adj_masks: tuple[int, ...] = field(repr=False, compare=False, default=())

    def __post_init__(self):
        if not self.adj_masks:
            object.__setattr__(
                self, "adj_masks", tuple(mask_of(nbrs) for nbrs in self.adj)
            )

    @staticmethod
    def from_edges(
        n: int,
        edges: Iterable[tuple[int, int]],
        labels: Optional[Iterable[str]] = None,
    ) -> "Graph":
        """Build a graph from an edge list, enforcing all structural invariants."""
        if n < 0:
            raise InvalidInstanceError([f"node count {n} is negative"])
        nbrs: list[set[int]] = [set() for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        violations: list[str] = []
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                violations.append(f"edge ({u},{v}) outside node range 0..{n - 1}")
                continue
            if u == v:
                violations.append(f"self-loop at node {u}")
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                violations.append(f"duplicate edge ({key[0]},{key[1]})")
                continue
            seen.add(key)
            nbrs[u].add(v)
            nbrs[v].add(u)
        if violations:
            raise InvalidInstanceError(violations)
        if labels is None:
            label_tuple = tuple(f"v{i}" for i in range(n))
        else:
            label_tuple = tuple(str(x) for x in labels)
            if len(label_tuple) != n:
                raise InvalidInstanceError(
                    [f"{len(label_tuple)} labels for {n} nodes"]
                )
        return Graph(n=n, adj=tuple(tuple(sorted(s)) for s in nbrs), labels=label_tuple)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def edges(self) -> list[tuple[int, int]]:
        """Canonical edge list: i<j pairs, sorted."""
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def node_set(self) -> frozenset[int]:
        return frozenset(range(self.n))

    def full_mask(self) -> int:
        return (1 << self.n) - 1


@dataclass(frozen=True)
class DynamicsMode:
    """Order dynamics (simultaneous vs sequential) crossed with seed commitment.

    ``monotone=True`` commits the seed set to stay active forever; together
    with best response this makes the active set grow monotonically. With
    ``monotone=False`` every node, seed included, may best-respond by
    deactivating.
    """

    order: str
    monotone: bool

    def __post_init__(self):
        if self.order not in (SIMULTANEOUS, SEQUENTIAL):
            raise ValueError(f"unknown order dynamics {self.order!r}")

    @property
    def simultaneous(self) -> bool:
        return self.order == SIMULTANEOUS

    @property
    def sequential(self) -> bool:
        return self.order == SEQUENTIAL

    def describe(self) -> str:
        return ("monotone " if self.monotone else "") + self.order


MONOTONE_SIMULTANEOUS = DynamicsMode(SIMULTANEOUS, True)
PLAIN_SIMULTANEOUS = DynamicsMode(SIMULTANEOUS, False)
MONOTONE_SEQUENTIAL = DynamicsMode(SEQUENTIAL, True)
PLAIN_SEQUENTIAL = DynamicsMode(SEQUENTIAL, False)

ALL_MODES = (
    MONOTONE_SIMULTANEOUS,
    PLAIN_SIMULTANEOUS,
    MONOTONE_SEQUENTIAL,
    PLAIN_SEQUENTIAL,
)


@dataclass(frozen=True)
class SnapshotInstance:
    """A feasibility question: can some seed of size <= budget produce exactly
    ``snapshot`` as the active set at some finite time under ``mode``?"""

    graph: Graph
    thresholds: tuple[int, ...]
    snapshot: frozenset[int]
    budget: int
    mode: DynamicsMode

    @property
    def n(self) -> int:
        return self.graph.n

    def snapshot_mask(self) -> int:
        return mask_of(self.snapshot)

    def with_(self, **changes) -> "SnapshotInstance":
        """Copy with selected fields replaced."""
        fields = dict(
            graph=self.graph,
            thresholds=self.thresholds,
            snapshot=self.snapshot,
            budget=self.budget,
            mode=self.mode,
        )
        fields.update(changes)
        return SnapshotInstance(**fields)


class Configuration:
    """A set of active nodes at one instant.

    Equality and hashing look at the active set only; the time index is
    metadata (the match condition is pure set equality).
    """

    __slots__ = ("active", "time")

    def __init__(self, active: frozenset[int], time: int = 0):
        self.active = frozenset(active)
        self.time = time

    def __eq__(self, other) -> bool:
        if isinstance(other, Configuration):
            return self.active == other.active
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.active)

    def __repr__(self) -> str:
        return f"Configuration(active={sorted(self.active)}, time={self.time})"


@dataclass(frozen=True)
class Move:
    """One agent's state change. ``activate=True`` turns the node on."""

    node: int
    activate: bool

    def to_wire(self) -> list:
        return [self.node, "on" if self.activate else "off"]

    @staticmethod
    def from_wire(pair) -> "Move":
        node, state = pair
        if state not in ("on", "off"):
            raise ValueError(f"move state must be 'on' or 'off', got {state!r}")
        return Move(int(node), state == "on")


@dataclass(frozen=True)
class TraceStep:
    """One recorded step: the move taken (None for a simultaneous sweep) and
    the configuration it produced."""

    time: int
    move: Optional[Move]
    config: Configuration


@dataclass(frozen=True)
class Trace:
    """A replayable run: seed configuration at time 0, then steps at 1,2,...

    ``match_time`` is the first time (0 included) the active set equalled the
    run's target, if any.
    """

    seed: frozenset[int]
    mode: DynamicsMode
    steps: tuple[TraceStep, ...]
    match_time: Optional[int] = None

    def configurations(self) -> Iterator[Configuration]:
        yield Configuration(self.seed, 0)
        for step in self.steps:
            yield step.config

    def final(self) -> Configuration:
        return self.steps[-1].config if self.steps else Configuration(self.seed, 0)


@dataclass(frozen=True)
class SimultaneousWitness:
    """Witness for simultaneous dynamics: the trajectory is deterministic, so
    the match time alone suffices."""

    match_time: int


@dataclass(frozen=True)
class SequentialWitness:
    """Witness for sequential dynamics: the move ordering whose prefix of
    length ``match_prefix`` produces the exact snapshot."""

    ordering: tuple[Move, ...]
    match_prefix: int


Witness = Union[SimultaneousWitness, SequentialWitness]


@dataclass(frozen=True)
class Certificate:
    """A seed set plus a replayable witness proving snapshot feasibility."""

    seed: frozenset[int]
    witness: Witness


def closed_neighborhood(graph: Graph, s: Iterable[int]) -> frozenset[int]:
    """N[s]: the nodes of s together with all their neighbors."""
    out = set(s)
    for v in list(out):
        out.update(graph.adj[v])
    return frozenset(out)


@dataclass(frozen=True)
class IdMap:
    """Bidirectional id translation for an induced subgraph."""

    to_original: tuple[int, ...]
    from_original: dict

    def original(self, sub_id: int) -> int:
        return self.to_original[sub_id]

    def sub(self, original_id: int) -> int:
        return self.from_original[original_id]


def induced_subgraph(
    graph: Graph, thresholds: tuple[int, ...], s: Iterable[int]
) -> tuple[Graph, tuple[int, ...], IdMap]:
    """G[s] with thresholds restricted (values unchanged) and an id map back."""
    kept = sorted(set(s))
    from_orig = {v: i for i, v in enumerate(kept)}
    edges = [
        (from_orig[u], from_orig[v])
        for u in kept
        for v in graph.adj[u]
        if u < v and v in from_orig
    ]
    sub = Graph.from_edges(len(kept), edges, labels=[graph.labels[v] for v in kept])
    sub_thresholds = tuple(thresholds[v] for v in kept)
    return sub, sub_thresholds, IdMap(tuple(kept), from_orig)


def instance_violations(
    n: int,
    edges: Iterable[tuple[int, int]],
    thresholds: Iterable[int],
    snapshot: Iterable[int],
    budget: int,
) -> list[str]:
    """All model-invariant violations in a raw description; empty if clean."""
    violations: list[str] = []
    try:
        Graph.from_edges(n, edges)
    except InvalidInstanceError as exc:
        violations.extend(exc.violations)
    tvec = list(thresholds)
    if len(tvec) != n:
        violations.append(f"{len(tvec)} thresholds for {n} nodes")
    for v, t in enumerate(tvec):
        if not isinstance(t, int) or isinstance(t, bool) or t < 0:
            violations.append(f"threshold of node {v} is {t!r}, must be a non-negative integer")
    for v in snapshot:
        if not (0 <= v < n):
            violations.append(f"snapshot node {v} outside V (0..{n - 1})")
    if budget < 0:
        violations.append(f"budget {budget} is negative")
    return violations


def validate_instance(
    graph: Graph,
    thresholds: Iterable[int],
    snapshot: Iterable[int],
    budget: int,
    mode: DynamicsMode,
) -> SnapshotInstance:
    """Check a parsed instance against every invariant and return it.

    Empty snapshots and budget 0 are both legal: the time-0 configuration of
    the empty seed counts as produced.
    """
    violations = instance_violations(
        graph.n, graph.edges(), thresholds, snapshot, budget
    )
    if violations:
        raise InvalidInstanceError(violations)
    return SnapshotInstance(
        graph=graph,
        thresholds=tuple(thresholds),
        snapshot=frozenset(snapshot),
        budget=budget,
        mode=mode,
    )
