"""Weighted-graph data model: neighborhood measures, hop metric, generators.

A :class:`WeightedGraph` is an immutable snapshot of a fixed topology plus a
vector of nonnegative edge weights. Simulations never mutate a snapshot; they
build successors via :meth:`WeightedGraph.with_weights`, so topology-derived
caches (neighbor tables, hop distances) are shared across an entire run.
"""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateWeightsError,
    DisconnectedError,
    IsolatedNodeError,
    ParameterError,
    ParseError,
    UnreachableError,
)

DEFAULT_FLOOR_BUDGET = 1e-6  # split across edges: w_min = budget / |E|
SIMPLEX_TOL = 1e-12


def _ekey(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class NodeMeasure:
    """One-step random-walk distribution of a node over its neighbors."""

    node: object
    support: tuple
    masses: np.ndarray  # aligned with support, sums to 1

    def as_dict(self) -> dict:
        return {s: float(m) for s, m in zip(self.support, self.masses)}


class _Topology:
    """Frozen structural data shared by every snapshot of one graph.

    Holds index-based adjacency plus lazily built hop-distance rows. Node
    identifiers are mapped to dense indices in first-appearance order;
    edges keep their first-seen endpoint orientation (lookups canonicalize).
    """

    def __init__(self, node_ids: tuple, edges: tuple[tuple[int, int], ...]):
        self.node_ids = node_ids
        self.index = {v: i for i, v in enumerate(node_ids)}
        if len(self.index) != len(node_ids):
            raise ParameterError("duplicate node identifiers")
        self.edges = edges
        self.edge_index = {_ekey(u, v): k for k, (u, v) in enumerate(edges)}
        n = len(node_ids)
        nbr: list[list[int]] = [[] for _ in range(n)]
        nbr_edge: list[list[int]] = [[] for _ in range(n)]
        for k, (u, v) in enumerate(edges):
            if u == v:
                raise ParameterError("self-loops are not allowed")
            nbr[u].append(v)
            nbr_edge[u].append(k)
            nbr[v].append(u)
            nbr_edge[v].append(k)
        self.nbr_nodes = tuple(np.asarray(a, dtype=np.int32) for a in nbr)
        self.nbr_edges = tuple(np.asarray(a, dtype=np.int32) for a in nbr_edge)
        self.degrees = np.asarray([len(a) for a in nbr], dtype=np.int32)
        self.edges_u = np.asarray([e[0] for e in edges], dtype=np.int32)
        self.edges_v = np.asarray([e[1] for e in edges], dtype=np.int32)
        self._hops: dict[int, np.ndarray] = {}
        # Per-edge hop-cost blocks between endpoint neighborhoods, built on
        # first curvature evaluation and reused for the whole run.
        self._edge_costs: list[np.ndarray | None] = [None] * len(edges)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def hop_row(self, i: int) -> np.ndarray:
        """BFS distances from node i; -1 where unreachable. Cached."""
        row = self._hops.get(i)
        if row is None:
            row = np.full(self.n_nodes, -1, dtype=np.int32)
            row[i] = 0
            q = deque([i])
            while q:
                u = q.popleft()
                du = row[u]
                for v in self.nbr_nodes[u]:
                    if row[v] < 0:
                        row[v] = du + 1
                        q.append(int(v))
            self._hops[i] = row
        return row

    def edge_cost_block(self, k: int) -> np.ndarray:
        """Hop distances between the neighbor sets of edge k's endpoints."""
        block = self._edge_costs[k]
        if block is None:
            u, v = self.edges[k]
            su = self.nbr_nodes[u]
            sv = self.nbr_nodes[v]
            rows = np.vstack([self.hop_row(int(a))[sv] for a in su])
            block = rows.astype(np.float64)
            self._edge_costs[k] = block
        return block

    def is_connected(self) -> bool:
        if self.n_nodes == 0:
            return True
        return int((self.hop_row(0) >= 0).sum()) == self.n_nodes


class WeightedGraph:
    """Undirected graph with fixed topology and evolving edge weights.

    Weights are dimensionless mass. Under ``normalization="global"`` they
    live on the simplex (sum to 1 within 1e-12) and are floored at ``w_min``.
    """

    __slots__ = ("_top", "weights", "w_min", "normalization")

    def __init__(
        self,
        topology: _Topology,
        weights: np.ndarray,
        w_min: float,
        normalization: str,
    ):
        self._top = topology
        self.weights = weights
        self.w_min = w_min
        self.normalization = normalization

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edges(
        cls,
        edges,
        normalization: str = "global",
        floor_budget: float = DEFAULT_FLOOR_BUDGET,
        nodes=None,
    ) -> "WeightedGraph":
        """Build a graph from (u, v) or (u, v, weight) tuples.

        Edge and node order follow first appearance (so file round-trips are
        byte-stable); an explicit ``nodes`` sequence pre-seeds node order.
        Repeated edges collapse to the last weight given; weights default to 1.
        """
        node_ids: list = []
        seen: dict = {}
        if nodes is not None:
            for x in nodes:
                if x not in seen:
                    seen[x] = len(node_ids)
                    node_ids.append(x)
        edge_list: list[tuple[int, int]] = []
        pair_w: dict[tuple[int, int], float] = {}
        for item in edges:
            if len(item) == 2:
                u, v, w = item[0], item[1], 1.0
            else:
                u, v, w = item
            if u == v:
                raise ParameterError(f"self-loop at node {u!r}")
            for x in (u, v):
                if x not in seen:
                    seen[x] = len(node_ids)
                    node_ids.append(x)
            i, j = seen[u], seen[v]
            key = _ekey(i, j)
            if key not in pair_w:
                edge_list.append((i, j))
            pair_w[key] = float(w)
        if not edge_list:
            raise ParameterError("graph needs at least one edge")
        w = np.asarray([pair_w[_ekey(*e)] for e in edge_list], dtype=np.float64)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ParameterError("edge weights must be finite and nonnegative")
        top = _Topology(tuple(node_ids), tuple(edge_list))
        w_min = floor_budget / len(edge_list)
        g = cls(top, w, w_min, normalization)
        return g.normalize(normalization)

    def with_weights(self, weights: np.ndarray) -> "WeightedGraph":
        """Successor snapshot sharing this graph's topology."""
        return WeightedGraph(self._top, weights, self.w_min, self.normalization)

    # -- basic structure -----------------------------------------------------

    @property
    def nodes(self) -> tuple:
        return self._top.node_ids

    @property
    def n_nodes(self) -> int:
        return self._top.n_nodes

    @property
    def n_edges(self) -> int:
        return self._top.n_edges

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as index pairs (u < v), aligned with the weight vector."""
        return self._top.edges

    @property
    def topology(self) -> _Topology:
        return self._top

    def edge_ids(self) -> list[tuple]:
        """Edges as (identifier, identifier) pairs, weight-vector order."""
        ids = self._top.node_ids
        return [(ids[u], ids[v]) for u, v in self._top.edges]

    def node_index(self, x) -> int:
        try:
            return self._top.index[x]
        except KeyError:
            raise ParameterError(f"unknown node {x!r}") from None

    def degree(self, x) -> int:
        return int(self._top.degrees[self.node_index(x)])

    def neighbors(self, x) -> tuple:
        ids = self._top.node_ids
        return tuple(ids[i] for i in self._top.nbr_nodes[self.node_index(x)])

    def weight(self, x, y) -> float:
        i, j = self.node_index(x), self.node_index(y)
        try:
            return float(self.weights[self._top.edge_index[_ekey(i, j)]])
        except KeyError:
            raise ParameterError(f"no edge between {x!r} and {y!r}") from None

    def is_connected(self) -> bool:
        return self._top.is_connected()

    # -- measures and metric -------------------------------------------------

    def node_measure(self, x) -> NodeMeasure:
        """Weight-proportional distribution of x over its neighbors.

        Zero laziness: no mass stays at x. Raises IsolatedNodeError when x
        has no neighbors.
        """
        i = self.node_index(x)
        nbrs = self._top.nbr_nodes[i]
        if len(nbrs) == 0:
            raise IsolatedNodeError(f"node {x!r} has no neighbors")
        w = self.weights[self._top.nbr_edges[i]]
        total = float(w.sum())
        if total <= 0.0:
            raise DegenerateWeightsError(f"node {x!r} has zero total weight")
        ids = self._top.node_ids
        return NodeMeasure(
            node=x,
            support=tuple(ids[j] for j in nbrs),
            masses=w / total,
        )

    def hop_distance(self, x, y) -> int:
        """Unweighted shortest-path length between x and y."""
        i, j = self.node_index(x), self.node_index(y)
        d = int(self._top.hop_row(i)[j])
        if d < 0:
            raise UnreachableError(f"{x!r} and {y!r} are not connected")
        return d

    # -- normalization -------------------------------------------------------

    def normalize(self, mode: str | None = None) -> "WeightedGraph":
        """Return a snapshot with weights normalized per ``mode``.

        global: divide by the total (sum becomes 1), clamp to the floor,
        divide once more. none: clamp only.
        """
        mode = self.normalization if mode is None else mode
        if mode not in ("global", "none"):
            raise ParameterError(f"unknown normalization mode {mode!r}")
        w = self.weights
        if mode == "none":
            out = np.maximum(w, self.w_min)
            g = self.with_weights(out)
            g_mode = mode
        else:
            total = float(w.sum())
            if total <= 0.0:
                raise DegenerateWeightsError("all edge weights are zero")
            out = w / total
            out = np.maximum(out, self.w_min)
            out = out / float(out.sum())
            g = self.with_weights(out)
            g_mode = mode
        return WeightedGraph(g._top, g.weights, g.w_min, g_mode)

    def total_weight(self) -> float:
        return float(self.weights.sum())

    def node_strengths(self) -> np.ndarray:
        """Per-node sum of incident edge weights (index order)."""
        s = np.zeros(self.n_nodes)
        np.add.at(s, self._top.edges_u, self.weights)
        np.add.at(s, self._top.edges_v, self.weights)
        return s

    # -- queries used by the input model --------------------------------------

    def top_degree_nodes(self, k: int) -> list:
        """k nodes by descending degree; ties broken by ascending identifier."""
        if k < 0 or k > self.n_nodes:
            raise ParameterError(f"k={k} outside [0, {self.n_nodes}]")
        ids = self._top.node_ids
        ranked = sorted(range(self.n_nodes), key=lambda i: (-self._top.degrees[i], ids[i]))
        return [ids[i] for i in ranked[:k]]

    def incident_edge_ids(self, x) -> np.ndarray:
        return self._top.nbr_edges[self.node_index(x)]

    # -- checks ---------------------------------------------------------------

    def check_invariants(self) -> None:
        """Raise if a structural or normalization invariant is broken.

        The floor check carries a relative slack equal to the floor budget:
        the post-clamp re-division can dip clamped weights below w_min by
        at most that factor.
        """
        if np.any(self.weights < self.w_min * (1.0 - DEFAULT_FLOOR_BUDGET)):
            raise DegenerateWeightsError("weight below configured floor")
        if self.normalization == "global":
            if abs(self.total_weight() - 1.0) > SIMPLEX_TOL:
                raise DegenerateWeightsError("global weights do not sum to 1")


# -- generators ---------------------------------------------------------------


def generate_scale_free(
    n: int,
    m: int = 2,
    seed: int = 0,
    normalization: str = "global",
) -> WeightedGraph:
    """Preferential-attachment graph: n nodes, m edges per arrival.

    Starts from m isolated nodes; each new node attaches to m distinct
    existing nodes chosen proportionally to degree (uniformly while all
    degrees are zero), giving m*(n-m) edges, connected, uniform weights,
    globally normalized. Bit-reproducible for a fixed seed.
    """
    if m < 1 or n <= m:
        raise ParameterError(f"need n > m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int, float]] = []
    # Attachment pool holds one entry per edge endpoint, so uniform draws
    # from it realize degree-proportional selection.
    pool: list[int] = []
    targets = list(range(m))
    for new in range(m, n):
        for t in targets:
            edges.append((t, new, 1.0))
            pool.append(t)
            pool.append(new)
        # Sample m distinct targets for the next arrival.
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(pool[int(rng.integers(len(pool)))])
        targets = sorted(chosen)
    return WeightedGraph.from_edges(edges, normalization=normalization)


def random_connected_graph(
    n: int,
    extra_edges: int = 0,
    seed: int = 0,
    weight_low: float = 0.2,
    weight_high: float = 1.0,
    normalization: str = "global",
) -> WeightedGraph:
    """Random spanning tree plus extra edges, random positive weights.

    Used for randomized property checks; connected by construction.
    """
    if n < 2:
        raise ParameterError("need n >= 2")
    rng = np.random.default_rng(seed)
    pairs: set[tuple[int, int]] = set()
    for v in range(1, n):
        u = int(rng.integers(v))
        pairs.add((u, v))
    attempts = 0
    while len(pairs) < n - 1 + extra_edges and attempts < 50 * (extra_edges + 1):
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        attempts += 1
        if u == v:
            continue
        pairs.add((min(u, v), max(u, v)))
    weights = rng.uniform(weight_low, weight_high, size=len(pairs))
    edge_list = [(u, v, float(w)) for (u, v), w in zip(sorted(pairs), weights)]
    return WeightedGraph.from_edges(edge_list, normalization=normalization)


# -- file formats ---------------------------------------------------------------


def _parse_node_token(tok: str):
    """Edge-list node tokens: integers stay integers, anything else is a string."""
    try:
        return int(tok)
    except ValueError:
        return tok


def load_edge_list(path: str, normalization: str = "none") -> WeightedGraph:
    """Read ``x y [weight]`` triples, one edge per line. '#' starts a comment."""
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"{path}:{ln}: expected 'x y [weight]'")
            u, v = _parse_node_token(parts[0]), _parse_node_token(parts[1])
            try:
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise ParseError(f"{path}:{ln}: bad weight {parts[2]!r}") from None
            edges.append((u, v, w))
    if not edges:
        raise ParseError(f"{path}: no edges found")
    return WeightedGraph.from_edges(edges, normalization=normalization)


def save_edge_list(g: WeightedGraph, path: str) -> None:
    lines = []
    ids = g.nodes
    for (u, v), w in zip(g.edges, g.weights):
        lines.append(f"{ids[u]} {ids[v]} {float(w)!r}")
    _atomic_write(path, "\n".join(lines) + "\n")


def load_json_graph(path: str, normalization: str = "none") -> WeightedGraph:
    """Read ``{nodes: [...], edges: [{u, v, w}]}``."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "edges" not in doc:
        raise ParseError(f"{path}: expected an object with 'edges'")
    edges = []
    for item in doc["edges"]:
        try:
            edges.append((item["u"], item["v"], float(item.get("w", 1.0))))
        except (TypeError, KeyError) as exc:
            raise ParseError(f"{path}: bad edge entry {item!r}") from exc
    declared = doc.get("nodes")
    if declared:
        present = {u for u, v, _ in edges} | {v for _, v, _ in edges}
        missing = [x for x in declared if x not in present]
        if missing:
            raise ParseError(f"{path}: nodes {missing!r} have no incident edges")
    return WeightedGraph.from_edges(edges, normalization=normalization, nodes=declared)


def save_json_graph(g: WeightedGraph, path: str) -> None:
    ids = g.nodes
    doc = {
        "nodes": list(ids),
        "edges": [
            {"u": ids[u], "v": ids[v], "w": float(w)}
            for (u, v), w in zip(g.edges, g.weights)
        ],
    }
    _atomic_write(path, json.dumps(doc, indent=2) + "\n")


def load_graph_file(path: str, normalization: str = "none") -> WeightedGraph:
    """Dispatch on extension: .json uses the JSON schema, else edge list."""
    if path.endswith(".json"):
        return load_json_graph(path, normalization=normalization)
    return load_edge_list(path, normalization=normalization)


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def require_connected(g: WeightedGraph, context: str = "operation") -> None:
    if not g.is_connected():
        raise DisconnectedError(f"{context} requires a connected graph")
