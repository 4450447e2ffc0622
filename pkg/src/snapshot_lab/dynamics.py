"""Best responses and the four transition systems.

Simultaneous dynamics: every node best-responds at once; the trajectory is
deterministic and is run with exact repeat detection (every visited
configuration is stored, so fixed points and cycles of any period are found
without relying on periodicity assumptions). Sequential dynamics: one selected
node best-responds per step; the system is nondeterministic over selections,
so this module provides the legal-move enumeration and ordering replay that
the solvers search over.

A match against a target set is checked at every time step, time 0 included;
what happens after the first match is irrelevant to feasibility, so later
over-activation never invalidates an earlier exact hit.

All functions are pure over immutable inputs. Hot paths work on int bitmasks;
the public surface speaks Configuration/frozenset.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import (
    Configuration,
    DynamicsMode,
    Graph,
    Move,
    Trace,
    TraceStep,
    mask_of,
    nodes_of,
)

MAX_STEP_DEFAULT_CAP = 10**6


class EngineInvariantError(RuntimeError):
    """A dynamics invariant failed; signals an engine bug, not a user error."""


@dataclass(frozen=True)
class StepOutcome:
    """Result of one simultaneous sweep: new configuration plus the nodes that
    flipped state."""

    configuration: Configuration
    changed: frozenset[int]


@dataclass(frozen=True)
class Termination:
    """Why a run stopped.

    kind is one of: "matched", "fixed_point", "cycle_detected" (with period
    and entry_time), "step_cap_hit", "ordering_exhausted" (sequential replay
    ran out of moves without matching).
    """

    kind: str
    period: Optional[int] = None
    entry_time: Optional[int] = None


@dataclass(frozen=True)
class RunResult:
    trace: Trace
    termination: Termination

    @property
    def matched(self) -> bool:
        return self.termination.kind == "matched"


def default_max_steps(n: int) -> int:
    """Any simultaneous trajectory repeats within 2^n steps; cap generously."""
    return min(1 << n, MAX_STEP_DEFAULT_CAP)


def best_response(
    graph: Graph, thresholds: Sequence[int], config: Configuration, node: int
) -> bool:
    """True iff the node's best response is to be active: at least
    ``thresholds[node]`` of its neighbors are active. Threshold 0 means the
    active state is always the best response."""
    active = mask_of(config.active)
    return (graph.adj_masks[node] & active).bit_count() >= thresholds[node]


def _response_mask(adj_masks: Sequence[int], thresholds: Sequence[int], active: int) -> int:
    out = 0
    for v, adj in enumerate(adj_masks):
        if (adj & active).bit_count() >= thresholds[v]:
            out |= 1 << v
    return out


def _step_mask(
    adj_masks: Sequence[int],
    thresholds: Sequence[int],
    active: int,
    seed: int,
    monotone: bool,
) -> int:
    """One simultaneous sweep on bitmasks."""
    responders = _response_mask(adj_masks, thresholds, active)
    if not monotone:
        return responders
    stale = active & ~seed & ~responders
    if stale:
        raise EngineInvariantError(
            f"monotone step would drop best response of active nodes {sorted(nodes_of(stale))}"
        )
    return active | responders | seed


def simultaneous_step(
    graph: Graph,
    thresholds: Sequence[int],
    config: Configuration,
    seed: frozenset[int],
    mode: DynamicsMode,
) -> StepOutcome:
    """One simultaneous sweep from ``config``.

    Non-monotone: every node's new state is its best response against the old
    configuration, seed nodes included. Monotone: the old active set grows by
    the responders (committed seeds never drop out); the step checks that no
    formerly-active non-seed node's best response flipped to inactive, which
    holds on every configuration a monotone run can produce.
    """
    if not mode.simultaneous:
        raise ValueError("simultaneous_step requires simultaneous order dynamics")
    active = mask_of(config.active)
    new = _step_mask(graph.adj_masks, thresholds, active, mask_of(seed), mode.monotone)
    return StepOutcome(
        configuration=Configuration(nodes_of(new), config.time + 1),
        changed=nodes_of(active ^ new),
    )


def run_simultaneous(
    graph: Graph,
    thresholds: Sequence[int],
    seed: frozenset[int],
    mode: DynamicsMode,
    target: Optional[frozenset[int]] = None,
    max_steps: Optional[int] = None,
) -> RunResult:
    """Iterate simultaneous sweeps from the seed configuration.

    Stops at the first of: target matched (time 0 included), configuration
    repeat (fixed point or cycle; all visited configurations are stored for
    exact detection), or the step cap. Deterministic.
    """
    if not mode.simultaneous:
        raise ValueError("run_simultaneous requires simultaneous order dynamics")
    if max_steps is None:
        max_steps = default_max_steps(graph.n)
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    adj_masks, seed_mask = graph.adj_masks, mask_of(seed)
    target_mask = None if target is None else mask_of(target)

    steps: list[TraceStep] = []
    match_time: Optional[int] = None
    cur = seed_mask
    if target_mask is not None and cur == target_mask:
        trace = Trace(seed=frozenset(seed), mode=mode, steps=(), match_time=0)
        return RunResult(trace, Termination("matched"))
    first_seen = {cur: 0}
    termination = Termination("step_cap_hit")
    for t in range(1, max_steps + 1):
        new = _step_mask(adj_masks, thresholds, cur, seed_mask, mode.monotone)
        if new == cur:
            termination = Termination("fixed_point")
            break
        steps.append(TraceStep(t, None, Configuration(nodes_of(new), t)))
        if target_mask is not None and new == target_mask:
            match_time = t
            termination = Termination("matched")
            break
        if new in first_seen:
            entry = first_seen[new]
            termination = Termination("cycle_detected", period=t - entry, entry_time=entry)
            break
        first_seen[new] = t
        cur = new
    trace = Trace(seed=frozenset(seed), mode=mode, steps=tuple(steps), match_time=match_time)
    return RunResult(trace, termination)


def _move_targets(
    adj_masks: Sequence[int], thresholds: Sequence[int], active: int, monotone: bool
) -> list[tuple[Move, int]]:
    """State-changing best responses from ``active``, in ascending node order,
    paired with the resulting masks."""
    out = []
    for v, adj in enumerate(adj_masks):
        bit = 1 << v
        met = (adj & active).bit_count() >= thresholds[v]
        if not active & bit:
            if met:
                out.append((Move(v, True), active | bit))
        elif not met and not monotone:
            out.append((Move(v, False), active & ~bit))
    return out


def legal_moves(
    graph: Graph, thresholds: Sequence[int], config: Configuration, mode: DynamicsMode
) -> list[Move]:
    """All state-changing best responses available to a single agent.

    Activations for inactive nodes whose threshold is met; in non-monotone
    mode also deactivations for active nodes whose threshold is unmet (seed
    nodes included). Monotone mode excludes deactivations entirely: no run
    that starts from a committed seed ever makes one legal.
    """
    if not mode.sequential:
        raise ValueError("legal_moves requires sequential order dynamics")
    active = mask_of(config.active)
    return [m for m, _ in _move_targets(graph.adj_masks, thresholds, active, mode.monotone)]


def apply_ordering(
    graph: Graph,
    thresholds: Sequence[int],
    seed: frozenset[int],
    ordering: Sequence[int],
    mode: DynamicsMode,
    target: Optional[frozenset[int]] = None,
) -> RunResult:
    """Replay a selection ordering under sequential dynamics.

    At step i the i-th node is set to its best response; selecting a node
    whose best response equals its state is a legal no-op that still advances
    time. Under monotone dynamics active nodes never deactivate. match_time is
    the first prefix (time 0 included) whose active set equals the target.
    """
    if not mode.sequential:
        raise ValueError("apply_ordering requires sequential order dynamics")
    adj_masks = graph.adj_masks
    for v in ordering:
        if not (0 <= v < graph.n):
            raise ValueError(f"ordering selects node {v}, outside 0..{graph.n - 1}")
    target_mask = None if target is None else mask_of(target)
    active = mask_of(seed)
    match_time: Optional[int] = None
    if target_mask is not None and active == target_mask:
        match_time = 0
    steps: list[TraceStep] = []
    for t, v in enumerate(ordering, start=1):
        bit = 1 << v
        met = (adj_masks[v] & active).bit_count() >= thresholds[v]
        if met:
            active |= bit
        elif not (mode.monotone and active & bit):
            active &= ~bit
        steps.append(
            TraceStep(t, Move(v, bool(active & bit)), Configuration(nodes_of(active), t))
        )
        if match_time is None and target_mask is not None and active == target_mask:
            match_time = t
    trace = Trace(seed=frozenset(seed), mode=mode, steps=tuple(steps), match_time=match_time)
    kind = "matched" if match_time is not None else "ordering_exhausted"
    return RunResult(trace, Termination(kind))
