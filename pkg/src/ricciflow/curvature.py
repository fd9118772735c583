"""Per-edge coarse curvature and random-walk network entropy.

Curvature of an edge (x, y) is ``1 - W1(mu_x, mu_y) / d(x, y)`` where the
node measures spread weight-proportionally over neighbors (zero laziness)
and d is the hop metric, so d = 1 on edges. Supports of adjacent nodes sit
within hop distance 3 of each other, which pins every edge value into
[-2, 1].

Entropy is the stationary-weighted average of per-node random-walk
entropies: H = sum_x pi_x * S_x in nats.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedError, IsolatedNodeError, ParameterError
from .graph import WeightedGraph
from .transport import transport_cost, transport_cost_warm

KAPPA_MIN = -2.0
KAPPA_MAX = 1.0


@dataclass(frozen=True)
class CurvatureField:
    """Curvature of every edge plus its two aggregate means."""

    edge_values: np.ndarray  # aligned with WeightedGraph.edges
    mean_unweighted: float
    mean_mass_weighted: float

    def as_dict(self, g: WeightedGraph) -> dict:
        return {e: float(k) for e, k in zip(g.edge_ids(), self.edge_values)}


@dataclass(frozen=True)
class EntropyReport:
    """Per-node walk entropies, stationary distribution, and their blend."""

    node_entropies: dict
    stationary: dict
    network_entropy: float


class _FieldEvaluator:
    """Reusable per-topology machinery for whole-field curvature passes.

    Everything weight-independent (neighbor edge lists, shared-support index
    pairs, hop-cost blocks) is frozen up front; an evaluation then runs in
    plain Python floats, which beats numpy dispatch at these tiny sizes.
    Reduced problems with more than two sites a side fall back to the exact
    transportation simplex.
    """

    def __init__(self, top):
        self.n_nodes = top.n_nodes
        self.edge_ends = [(int(u), int(v)) for u, v in top.edges]
        self.nbr_edges = [tuple(int(e) for e in top.nbr_edges[i]) for i in range(top.n_nodes)]
        self.plans = []
        for k in range(top.n_edges):
            u, v = self.edge_ends[k]
            su = [int(x) for x in top.nbr_nodes[u]]
            sv = [int(x) for x in top.nbr_nodes[v]]
            pos_v = {x: j for j, x in enumerate(sv)}
            overlap = [(i, pos_v[x]) for i, x in enumerate(su) if x in pos_v]
            block = top.edge_cost_block(k)
            # Sites with identical cost vectors are interchangeable to the
            # LP, so they aggregate. The shared sites (paired by `overlap`)
            # must stay distinct from everything else: their masses change
            # asymmetrically during cancellation.
            shared_u = {i for i, _ in overlap}
            shared_v = {j for _, j in overlap}
            row_groups = _merge_groups(
                [tuple(block[i]) for i in range(len(su))], shared_u
            )
            col_groups = _merge_groups(
                [tuple(block[:, j]) for j in range(len(sv))], shared_v
            )
            merged = tuple(
                tuple(float(block[g[0], h[0]]) for h in col_groups)
                for g in row_groups
            )
            merged_np = np.asarray(merged, dtype=np.float64)
            # Two-site-or-smaller marginals have closed forms; larger ones
            # run the simplex warm-started from the previous step's basis.
            warm = len(row_groups) > 2 and len(col_groups) > 2
            self.plans.append((u, v, overlap, row_groups, col_groups, merged, merged_np, warm))
        self.bases: list = [None] * len(self.plans)

    def evaluate(self, weights: np.ndarray) -> np.ndarray:
        w = weights.tolist()
        s = [0.0] * self.n_nodes
        for k, (u, v) in enumerate(self.edge_ends):
            s[u] += w[k]
            s[v] += w[k]
        if min(s) <= 0.0:
            raise IsolatedNodeError("every node needs positive incident weight")
        masses = []
        for i, nbr in enumerate(self.nbr_edges):
            inv = 1.0 / s[i]
            masses.append([w[e] * inv for e in nbr])
        values = np.empty(len(self.plans))
        for k, (u, v, overlap, row_groups, col_groups, merged, merged_np, warm) in enumerate(
            self.plans
        ):
            a = list(masses[u])
            b = list(masses[v])
            for i, j in overlap:
                common = a[i] if a[i] < b[j] else b[j]
                a[i] -= common
                b[j] -= common
            am = [a[g[0]] if len(g) == 1 else sum(a[i] for i in g) for g in row_groups]
            bm = [b[g[0]] if len(g) == 1 else sum(b[j] for j in g) for g in col_groups]
            if warm:
                w1, self.bases[k] = transport_cost_warm(
                    am, bm, merged_np, merged, self.bases[k]
                )
                values[k] = 1.0 - w1
            else:
                values[k] = 1.0 - _w1_small(am, bm, merged)
        return values


def _merge_groups(vectors: list[tuple], keep_alone: set[int]) -> list[tuple[int, ...]]:
    """Group indices whose cost vectors coincide; ``keep_alone`` stay single.

    Group order follows the first member's index, so the merged problem is
    deterministic.
    """
    groups: list[list[int]] = []
    by_vec: dict[tuple, list[int]] = {}
    for idx, vec in enumerate(vectors):
        if idx in keep_alone:
            groups.append([idx])
            continue
        group = by_vec.get(vec)
        if group is None:
            group = [idx]
            by_vec[vec] = group
            groups.append(group)
        else:
            group.append(idx)
    return [tuple(g) for g in groups]


def _w1_small(a: list, b: list, cost) -> float:
    """Exact transport cost for tiny marginals given as Python lists.

    Zero entries are compacted first; one- and two-site cases use closed
    forms, anything larger defers to the simplex.
    """
    ia = [i for i, x in enumerate(a) if x > 0.0]
    jb = [j for j, x in enumerate(b) if x > 0.0]
    if not ia or not jb:
        return 0.0
    if len(ia) == 1:
        row = cost[ia[0]]
        return sum(b[j] * row[j] for j in jb)
    if len(jb) == 1:
        j = jb[0]
        return sum(a[i] * cost[i][j] for i in ia)
    if len(ia) == 2:
        i0, i1 = ia
        base = sum(b[j] * cost[i1][j] for j in jb)
        remaining = a[i0]
        total = base
        for diff, j in sorted(((cost[i0][j] - cost[i1][j], j) for j in jb)):
            if remaining <= 0.0:
                break
            take = remaining if remaining < b[j] else b[j]
            total += take * diff
            remaining -= take
        return total
    if len(jb) == 2:
        j0, j1 = jb
        base = sum(a[i] * cost[i][j1] for i in ia)
        remaining = b[j0]
        total = base
        for diff, i in sorted(((cost[i][j0] - cost[i][j1], i) for i in ia)):
            if remaining <= 0.0:
                break
            take = remaining if remaining < a[i] else a[i]
            total += take * diff
            remaining -= take
        return total
    av = np.asarray([a[i] for i in ia])
    bv = np.asarray([b[j] for j in jb])
    cv = np.asarray([[cost[i][j] for j in jb] for i in ia])
    return transport_cost(av, bv, cv)


def _evaluator(g: WeightedGraph) -> _FieldEvaluator:
    top = g.topology
    ev = getattr(top, "_field_evaluator", None)
    if ev is None:
        ev = _FieldEvaluator(top)
        top._field_evaluator = ev
    return ev


def edge_curvature(g: WeightedGraph, x, y) -> float:
    """Curvature of the edge between x and y."""
    i, j = g.node_index(x), g.node_index(y)
    key = (i, j) if i < j else (j, i)
    k = g.topology.edge_index.get(key)
    if k is None:
        raise ParameterError(f"no edge between {x!r} and {y!r}")
    return float(_evaluator(g).evaluate(g.weights)[k])


def curvature_field(g: WeightedGraph) -> CurvatureField:
    """Curvature of every edge plus unweighted and mass-weighted means."""
    values = _evaluator(g).evaluate(g.weights)
    total = float(g.weights.sum())
    return CurvatureField(
        edge_values=values,
        mean_unweighted=float(values.mean()),
        mean_mass_weighted=float(np.dot(values, g.weights) / total),
    )


# -- entropy ---------------------------------------------------------------------


def _walk_entropies(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """(S_x, pi_x) arrays in node-index order.

    pi is strength-proportional — the exact stationary distribution of the
    weight-proportional walk on an undirected graph (reversibility).
    """
    top = g.topology
    strengths = g.node_strengths()
    if np.any(strengths <= 0.0):
        raise IsolatedNodeError("entropy needs positive strength at every node")
    s = np.empty(g.n_nodes)
    for i in range(g.n_nodes):
        p = g.weights[top.nbr_edges[i]] / strengths[i]
        nz = p[p > 0.0]
        s[i] = float(-(nz * np.log(nz)).sum())
    pi = strengths / float(strengths.sum())
    return s, pi


def entropy_value(g: WeightedGraph) -> float:
    """Network entropy H = sum pi_x S_x without building the full report."""
    top = g.topology
    strengths = g.node_strengths()
    if np.any(strengths <= 0.0):
        raise IsolatedNodeError("entropy needs positive strength at every node")
    w = g.weights
    pu = w / strengths[top.edges_u]
    pv = w / strengths[top.edges_v]
    s = np.zeros(g.n_nodes)
    np.add.at(s, top.edges_u, -pu * np.log(pu))
    np.add.at(s, top.edges_v, -pv * np.log(pv))
    pi = strengths / float(strengths.sum())
    return float(np.dot(pi, s))


def network_entropy(g: WeightedGraph, weighting: str = "stationary") -> EntropyReport:
    """Entropy report for a connected, positively weighted graph.

    weighting="stationary" blends node entropies by the stationary
    distribution; "uniform" takes the plain mean of S_x instead.
    """
    if not g.is_connected():
        raise DisconnectedError("network entropy requires a connected graph")
    if weighting not in ("stationary", "uniform"):
        raise ParameterError(f"unknown entropy weighting {weighting!r}")
    s, pi = _walk_entropies(g)
    h = float(np.dot(pi, s)) if weighting == "stationary" else float(s.mean())
    ids = g.nodes
    return EntropyReport(
        node_entropies={ids[i]: float(s[i]) for i in range(g.n_nodes)},
        stationary={ids[i]: float(pi[i]) for i in range(g.n_nodes)},
        network_entropy=h,
    )


def stationary_power_iteration(
    g: WeightedGraph, tol: float = 1e-12, max_iter: int = 1_000_000
) -> np.ndarray:
    """Stationary distribution by power iteration, to a 1e-12 L1 residual.

    Iterates the half-lazy chain (P + I) / 2, which shares P's stationary
    vector and converges even on bipartite graphs; the residual is checked
    against the original chain.
    """
    top = g.topology
    strengths = g.node_strengths()
    n = g.n_nodes
    rows_u = top.edges_u
    rows_v = top.edges_v
    w = g.weights

    def step(x: np.ndarray) -> np.ndarray:
        # y = x @ P for the weight-proportional walk
        xu = x[rows_u] / strengths[rows_u] * w
        xv = x[rows_v] / strengths[rows_v] * w
        y = np.zeros(n)
        np.add.at(y, rows_v, xu)
        np.add.at(y, rows_u, xv)
        return y

    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        x = 0.5 * (x + step(x))
        x = x / x.sum()
        if float(np.abs(step(x) - x).sum()) <= tol:
            return x
    raise RuntimeError("power iteration did not reach the requested residual")


# -- exports ---------------------------------------------------------------------


def write_curvature_table(g: WeightedGraph, field: CurvatureField, path: str) -> None:
    """(edge, kappa) table as CSV or JSON depending on the file extension."""
    rows = [
        {"u": u, "v": v, "kappa": float(k)}
        for (u, v), k in zip(g.edge_ids(), field.edge_values)
    ]
    meta = {
        "mean_unweighted": field.mean_unweighted,
        "mean_mass_weighted": field.mean_mass_weighted,
    }
    if path.endswith(".json"):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"edges": rows, **meta}, fh, indent=2)
            fh.write("\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["u", "v", "kappa"])
            for r in rows:
                writer.writerow([r["u"], r["v"], f"{r['kappa']:.12g}"])


def write_entropy_table(g: WeightedGraph, report: EntropyReport, path: str) -> None:
    """(node, S_x, pi_x) table as CSV or JSON depending on the extension."""
    rows = [
        {"node": x, "entropy": report.node_entropies[x], "pi": report.stationary[x]}
        for x in g.nodes
    ]
    if path.endswith(".json"):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {"nodes": rows, "network_entropy": report.network_entropy},
                fh,
                indent=2,
            )
            fh.write("\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node", "entropy", "pi"])
            for r in rows:
                writer.writerow([r["node"], f"{r['entropy']:.12g}", f"{r['pi']:.12g}"])
