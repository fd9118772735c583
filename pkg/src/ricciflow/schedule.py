"""Timed operator input: events, node targeting, and the cumulative field.

An event adds a signed magnitude p to lambda on every edge incident to its
target nodes (once per edge, even when both endpoints are targeted).
lambda starts at zero and is a plain running sum, free to leave [0, 1].
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError, ParseError, TargetError
from .graph import WeightedGraph


@dataclass(frozen=True)
class InputEvent:
    """One injection: iteration index, target directive, magnitude p.

    Exactly one of ``targets`` (explicit node list) or ``top_k`` (the k
    highest-degree nodes at application time) must be set.
    """

    iteration: int
    magnitude: float
    targets: tuple | None = None
    top_k: int | None = None

    def __post_init__(self):
        if self.iteration < 0:
            raise ParameterError("event iteration must be >= 0")
        if not np.isfinite(self.magnitude):
            raise ParameterError("event magnitude must be finite")
        if (self.targets is None) == (self.top_k is None):
            raise ParameterError("set exactly one of targets or top_k")
        if self.top_k is not None and self.top_k < 1:
            raise ParameterError("top_k must be >= 1")
        if self.targets is not None:
            object.__setattr__(self, "targets", tuple(self.targets))


@dataclass(frozen=True)
class InputSchedule:
    events: tuple[InputEvent, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.events, key=lambda e: e.iteration))
        seen = set()
        for ev in ordered:
            key = (ev.iteration, ev.targets, ev.top_k)
            if key in seen:
                raise ParameterError(f"duplicate event {key!r}")
            seen.add(key)
        object.__setattr__(self, "events", ordered)

    def events_at(self, iteration: int) -> list[InputEvent]:
        return [ev for ev in self.events if ev.iteration == iteration]

    @property
    def max_iteration(self) -> int:
        return max((ev.iteration for ev in self.events), default=-1)

    def to_json_obj(self) -> list[dict]:
        out = []
        for ev in self.events:
            entry: dict = {"iteration": ev.iteration, "p": ev.magnitude}
            if ev.targets is not None:
                entry["targets"] = list(ev.targets)
            else:
                entry["top_k"] = ev.top_k
            out.append(entry)
        return out

    @classmethod
    def from_json_obj(cls, doc) -> "InputSchedule":
        if not isinstance(doc, list):
            raise ParseError("schedule JSON must be a list of events")
        events = []
        for entry in doc:
            try:
                events.append(
                    InputEvent(
                        iteration=int(entry["iteration"]),
                        magnitude=float(entry["p"]),
                        targets=tuple(entry["targets"]) if "targets" in entry else None,
                        top_k=int(entry["top_k"]) if "top_k" in entry else None,
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad schedule entry {entry!r}") from exc
        return cls(tuple(events))


def resolve_targets(ev: InputEvent, g: WeightedGraph) -> list:
    """Concrete node list for an event's directive, validated against g."""
    if ev.targets is not None:
        for x in ev.targets:
            if x not in g.topology.index:
                raise TargetError(f"unknown target node {x!r}")
        return list(ev.targets)
    if ev.top_k > g.n_nodes:
        raise TargetError(f"top_k={ev.top_k} exceeds node count {g.n_nodes}")
    return g.top_degree_nodes(ev.top_k)


def incident_edges(g: WeightedGraph, nodes) -> np.ndarray:
    """Sorted unique edge ids touching any of the given nodes."""
    ids: set[int] = set()
    for x in nodes:
        ids.update(int(k) for k in g.incident_edge_ids(x))
    return np.asarray(sorted(ids), dtype=np.intp)


def realize_event(ev: InputEvent, g: WeightedGraph) -> tuple[np.ndarray, str]:
    """Edge ids hit by the event plus a human-readable marker string."""
    nodes = resolve_targets(ev, g)
    edge_ids = incident_edges(g, nodes)
    if ev.top_k is not None:
        target_desc = f"top{ev.top_k}"
    else:
        target_desc = "+".join(str(x) for x in nodes)
    return edge_ids, f"i{ev.iteration}:p{ev.magnitude:+g}@{target_desc}"


def apply_event(state, ev: InputEvent, g: WeightedGraph):
    """Return a successor state with lambda incremented on incident edges."""
    edge_ids, _ = realize_event(ev, g)
    lam = state.lam.copy()
    lam[edge_ids] += ev.magnitude
    return replace(state, lam=lam)


# -- presets reproducing the reported experiments -----------------------------------


def preset_schedule(variant: str, theta: float | None = None, top_k: int = 1) -> InputSchedule:
    """Named injection schedules used by the experiment harness.

    ramp:         p = (-2, +2, +4, -4) at iterations (30, 75, 120, 175)
    ramp_cutoff:  same timing with the last two inputs turned off
    magnitude:    p = (-2, +2, +theta, -theta) at (30, 75, 100, 200),
                  theta in {1..5}
    multi_hub:    p = (-2, +2, +4, -4) at (30, 75, 100, 200) on the top_k
                  highest-degree nodes
    """
    if variant == "ramp":
        plan = [(30, -2.0), (75, 2.0), (120, 4.0), (175, -4.0)]
        k = top_k
    elif variant == "ramp_cutoff":
        plan = [(30, -2.0), (75, 2.0), (120, 0.0), (175, 0.0)]
        k = top_k
    elif variant == "magnitude":
        if theta is None or theta not in (1, 2, 3, 4, 5):
            raise ParameterError("magnitude preset needs theta in {1..5}")
        plan = [(30, -2.0), (75, 2.0), (100, float(theta)), (200, -float(theta))]
        k = top_k
    elif variant == "multi_hub":
        plan = [(30, -2.0), (75, 2.0), (100, 4.0), (200, -4.0)]
        k = top_k
    else:
        raise ParameterError(f"unknown schedule variant {variant!r}")
    return InputSchedule(
        tuple(InputEvent(iteration=it, magnitude=p, top_k=k) for it, p in plan)
    )


_INLINE_EVENT = re.compile(r"^(\d+):([-+]?\d+(?:\.\d+)?)$")


def parse_inline_schedule(text: str) -> InputSchedule:
    """Parse the CLI shorthand ``30:-2,75:2,120:4,175:-4@top1``.

    The optional ``@top<k>`` suffix applies to every event; it defaults to
    the single highest-degree node.
    """
    body, _, suffix = text.partition("@")
    top_k = 1
    if suffix:
        if not suffix.startswith("top"):
            raise ParseError(f"unknown target shorthand {suffix!r}")
        try:
            top_k = int(suffix[3:])
        except ValueError:
            raise ParseError(f"bad top-k value in {suffix!r}") from None
    events = []
    for chunk in body.split(","):
        m = _INLINE_EVENT.match(chunk.strip())
        if not m:
            raise ParseError(f"bad schedule chunk {chunk!r}; expected iter:p")
        events.append(
            InputEvent(iteration=int(m.group(1)), magnitude=float(m.group(2)), top_k=top_k)
        )
    return InputSchedule(tuple(events))


def load_schedule(path: str) -> InputSchedule:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    return InputSchedule.from_json_obj(doc)
