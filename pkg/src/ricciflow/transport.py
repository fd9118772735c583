"""Exact Wasserstein-1 distance between finitely supported measures.

Two independent routes to the same number:

* :func:`w1_distance` — transportation simplex (network form of the exact
  LP), with closed-form shortcuts for one- and two-site marginals. This is
  the production path used by curvature evaluation.
* :func:`w1_oracle` — scales masses to integer units and solves a min-cost
  perfect matching of the units, exhaustively for tiny unit counts and by
  shortest-augmenting-path matching otherwise. Transportation polytopes
  have integral vertices, so the unit optimum equals the LP optimum.

Both are deterministic: simplex ties break lexicographically by (row, col).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CostError, MarginalMismatchError, OracleScopeError

MASS_TOL = 1e-9
_PIVOT_TOL = 1e-12
_MAX_ORACLE_DENOMINATOR = 5040
_MAX_ORACLE_SUPPORT = 7
_ENUMERATION_LIMIT = 8  # up to 8! unit permutations checked exhaustively


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure on a finite site list."""

    support: tuple
    masses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=np.float64))
        if len(set(self.support)) != len(self.support):
            raise MarginalMismatchError("duplicate sites in support")
        if len(self.support) != len(self.masses):
            raise MarginalMismatchError("support and masses differ in length")
        if np.any(self.masses < 0):
            raise MarginalMismatchError("masses must be nonnegative")
        if abs(float(self.masses.sum()) - 1.0) > 1e-12:
            raise MarginalMismatchError("masses must sum to 1 within 1e-12")


def w1_distance(mu: DiscreteMeasure, nu: DiscreteMeasure, cost) -> float:
    """Exact W1 between two measures under the given ground-cost matrix.

    ``cost[i][j]`` prices one unit of mass moved from ``mu.support[i]`` to
    ``nu.support[j]``. Solves the transportation LP to a basic optimum.
    """
    c = np.asarray(cost, dtype=np.float64)
    a = np.asarray(mu.masses, dtype=np.float64)
    b = np.asarray(nu.masses, dtype=np.float64)
    if c.shape != (len(a), len(b)):
        raise CostError(f"cost shape {c.shape} does not match supports")
    if not np.all(np.isfinite(c)):
        raise CostError("cost matrix contains non-finite entries")
    if np.any(c < 0):
        raise CostError("cost matrix contains negative entries")
    if abs(float(a.sum()) - float(b.sum())) > MASS_TOL:
        raise MarginalMismatchError(
            f"marginal masses differ: {a.sum()!r} vs {b.sum()!r}"
        )
    return transport_cost(a, b, c)


def transport_cost(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Minimum transport cost between nonnegative vectors of equal mass.

    Low-level entry point: no probability normalization is required, only
    equal totals. Zero-mass rows and columns are dropped up front.
    """
    ai = np.flatnonzero(a > 0.0)
    bj = np.flatnonzero(b > 0.0)
    if len(ai) == 0 or len(bj) == 0:
        return 0.0
    a = a[ai]
    b = b[bj]
    c = c[np.ix_(ai, bj)]
    m, n = c.shape
    if m == 1:
        return float(np.dot(b, c[0]))
    if n == 1:
        return float(np.dot(a, c[:, 0]))
    if m == 2:
        return _two_row_cost(a, b, c)
    if n == 2:
        return _two_row_cost(b, a, c.T)
    return _transportation_simplex(a, b, c)


def _two_row_cost(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Exact optimum for the 2 x n transportation problem.

    With two suppliers the plan is determined by how much of supplier 0 each
    sink receives; filling sinks in order of cost advantage is optimal by a
    pairwise exchange argument.
    """
    diff = c[0] - c[1]
    base = float(np.dot(b, c[1]))
    remaining = float(a[0])
    total = base
    for j in sorted(range(len(b)), key=lambda j: (diff[j], j)):
        if remaining <= 0.0:
            break
        take = min(remaining, float(b[j]))
        total += take * float(diff[j])
        remaining -= take
    return total


def _transportation_simplex(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Primal transportation simplex; see ``_pivot_to_optimal`` for rules."""
    a = a.astype(np.float64).copy()
    b = b.astype(np.float64).copy()
    # Balance tiny float mismatch (<= MASS_TOL) onto the last consumer so
    # the north-west fill closes exactly.
    b[-1] += float(a.sum()) - float(b.sum())
    basis, flow = _northwest_basis(a, b)
    c_np = np.asarray(c, dtype=np.float64)
    c_rows = [list(map(float, row)) for row in c_np]
    value, _ = _pivot_to_optimal(c_np, c_rows, basis, flow)
    return value


def transport_cost_warm(a: list, b: list, c_np: np.ndarray, c_rows, basis):
    """Exact transport cost reusing a previous optimal basis when possible.

    ``a`` and ``b`` cover the full (possibly zero-mass) site sets so bases
    stay index-stable across repeated solves of the same ground cost with
    drifting marginals. Returns (cost, optimal basis).
    """
    av = list(a)
    bv = list(b)
    bv[-1] += sum(av) - sum(bv)
    if basis is not None:
        flow = _tree_flows(basis, av, bv)
        if flow is not None:
            return _pivot_to_optimal(c_np, c_rows, list(basis), flow)
    nb, flow = _northwest_basis(np.asarray(av), np.asarray(bv))
    return _pivot_to_optimal(c_np, c_rows, nb, flow)


def _northwest_basis(a: np.ndarray, b: np.ndarray):
    """North-west-corner initial basis: exactly m+n-1 cells, tree-shaped."""
    m, n = len(a), len(b)
    flow: dict[tuple[int, int], float] = {}
    basis: list[tuple[int, int]] = []
    ar = a.astype(np.float64).copy()
    bc = b.astype(np.float64).copy()
    i = j = 0
    while True:
        q = min(ar[i], bc[j])
        basis.append((i, j))
        flow[(i, j)] = float(q)
        ar[i] -= q
        bc[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if ar[i] <= bc[j] and i < m - 1:
            i += 1
        elif j < n - 1:
            j += 1
        else:
            i += 1
    return basis, flow


def _tree_flows(basis, a: list, b: list):
    """Unique flow carried by a basis tree, or None if any flow is negative.

    Leaf elimination: a degree-1 node's single incident cell must carry that
    node's entire residual. Tiny negatives from float noise count as zero.
    """
    m, n = len(a), len(b)
    total = m + n
    adj: list[list[int]] = [[] for _ in range(total)]
    for t, (i, j) in enumerate(basis):
        adj[i].append(t)
        adj[m + j].append(t)
    deg = [len(x) for x in adj]
    residual = list(a) + list(b)
    alive = [True] * len(basis)
    flow: dict[tuple[int, int], float] = {}
    stack = [node for node in range(total) if deg[node] == 1]
    processed = 0
    while stack:
        node = stack.pop()
        if deg[node] != 1:
            continue
        cell_idx = next(t for t in adj[node] if alive[t])
        i, j = basis[cell_idx]
        q = residual[node]
        if q < -1e-12:
            return None
        if q < 0.0:
            q = 0.0
        flow[(i, j)] = q
        alive[cell_idx] = False
        other = m + j if node == i else i
        residual[other] -= q
        residual[node] = 0.0
        deg[node] -= 1
        deg[other] -= 1
        if deg[other] == 1:
            stack.append(other)
        processed += 1
    if processed != len(basis):
        return None  # basis was not a spanning tree
    return flow


def _pivot_to_optimal(c_np: np.ndarray, c_rows, basis, flow):
    """Pivot a basic feasible solution to optimality.

    Entering rule: steepest (most negative reduced cost), ties broken
    lexicographically by (row, col) via argmin on the flattened matrix;
    past a pivot budget it switches to Bland's first-negative rule, which
    cannot cycle. Returns (optimal cost, basis).
    """
    m, n = c_np.shape
    tol = _PIVOT_TOL * max(1.0, float(c_np.max()))
    bland_after = 8 * (m + n)
    max_pivots = bland_after + 4 * (m + n) * m * n
    for pivot in range(max_pivots):
        u, v = _potentials(basis, c_rows, m, n)
        entering = None
        if pivot < bland_after:
            reduced = c_np - np.asarray(u)[:, None] - np.asarray(v)[None, :]
            flat = int(reduced.argmin())
            cell = (flat // n, flat % n)
            if reduced[cell] < -tol:
                entering = cell
        else:
            basis_set = set(basis)
            for cell in itertools.product(range(m), range(n)):
                if cell not in basis_set and c_rows[cell[0]][cell[1]] - u[cell[0]] - v[cell[1]] < -tol:
                    entering = cell
                    break
        if entering is None:
            return (
                sum(q * c_rows[i][j] for (i, j), q in flow.items()),
                basis,
            )
        cycle = _basis_cycle(basis, entering, m)
        # Odd positions in the alternating cycle lose flow.
        givers = cycle[1::2]
        theta = min(flow[cell] for cell in givers)
        leaving = min(cell for cell in givers if flow[cell] <= theta)
        for idx, cell in enumerate(cycle):
            flow[cell] = flow.get(cell, 0.0) + (theta if idx % 2 == 0 else -theta)
        del flow[leaving]
        basis[basis.index(leaving)] = entering
    raise RuntimeError("transportation simplex failed to terminate")


def _potentials(basis, c_rows, m, n):
    """Dual potentials u, v with u[0] = 0, solved over the basis tree."""
    u: list = [None] * m
    v: list = [None] * n
    row_cells: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    col_cells: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for cell in basis:
        row_cells[cell[0]].append(cell)
        col_cells[cell[1]].append(cell)
    u[0] = 0.0
    stack = [("r", 0)]
    while stack:
        kind, idx = stack.pop()
        if kind == "r":
            ui = u[idx]
            for (i, j) in row_cells[idx]:
                if v[j] is None:
                    v[j] = c_rows[i][j] - ui
                    stack.append(("c", j))
        else:
            vj = v[idx]
            for (i, j) in col_cells[idx]:
                if u[i] is None:
                    u[i] = c_rows[i][j] - vj
                    stack.append(("r", i))
    return u, v


def _basis_cycle(basis, entering, m):
    """Alternating cycle created by adding ``entering`` to the basis tree.

    Returned as [entering, ...] so even positions gain flow and odd lose.
    """
    # Bipartite node ids: rows 0..m-1, columns m..m+n-1.
    adj: dict[int, list[tuple[int, tuple[int, int]]]] = {}
    for (i, j) in basis:
        adj.setdefault(i, []).append((m + j, (i, j)))
        adj.setdefault(m + j, []).append((i, (i, j)))
    start, goal = entering[0], m + entering[1]
    parent: dict[int, tuple[int, tuple[int, int]]] = {start: (-1, entering)}
    queue = [start]
    head = 0
    while head < len(queue):
        node = queue[head]
        head += 1
        if node == goal:
            break
        for nxt, cell in adj.get(node, ()):
            if nxt not in parent:
                parent[nxt] = (node, cell)
                queue.append(nxt)
    path_cells = []
    node = goal
    while node != start:
        prev, cell = parent[node]
        path_cells.append(cell)
        node = prev
    return [entering] + path_cells


# -- integer-unit oracle --------------------------------------------------------


def w1_oracle(mu: DiscreteMeasure, nu: DiscreteMeasure, cost) -> float:
    """Independent W1 check via min-cost matching of integer mass units.

    Masses must be multiples of 1/D for some common D <= 5040 and supports
    must not exceed 7 sites. The mass vectors are scaled to D unit tokens
    per side and matched one-to-one: exhaustive permutation search when
    D <= 8, shortest-augmenting-path matching otherwise. Integrality of the
    transportation polytope makes the unit optimum the LP optimum.
    """
    c = np.asarray(cost, dtype=np.float64)
    if len(mu.support) > _MAX_ORACLE_SUPPORT or len(nu.support) > _MAX_ORACLE_SUPPORT:
        raise OracleScopeError("oracle accepts supports of at most 7 sites")
    if c.shape != (len(mu.masses), len(nu.masses)):
        raise CostError(f"cost shape {c.shape} does not match supports")
    if not np.all(np.isfinite(c)):
        raise CostError("cost matrix contains non-finite entries")
    d = _common_denominator(np.concatenate([mu.masses, nu.masses]))
    left = _unit_counts(mu.masses, d)
    right = _unit_counts(nu.masses, d)
    left_sites = np.repeat(np.arange(len(left)), left)
    right_sites = np.repeat(np.arange(len(right)), right)
    unit_cost = c[np.ix_(left_sites, right_sites)]
    if d <= _ENUMERATION_LIMIT:
        best = min(
            sum(unit_cost[k, perm[k]] for k in range(d))
            for perm in itertools.permutations(range(d))
        )
    else:
        best = _min_cost_assignment(unit_cost)
    return float(best) / d


def _common_denominator(masses: np.ndarray) -> int:
    for d in range(1, _MAX_ORACLE_DENOMINATOR + 1):
        scaled = masses * d
        if np.all(np.abs(scaled - np.round(scaled)) <= 1e-9 * d):
            return d
    raise OracleScopeError(
        f"masses are not multiples of 1/D for any D <= {_MAX_ORACLE_DENOMINATOR}"
    )


def _unit_counts(masses: np.ndarray, d: int) -> np.ndarray:
    units = np.round(masses * d).astype(int)
    if int(units.sum()) != d:
        raise OracleScopeError("unit masses do not add up to the denominator")
    return units


def _min_cost_assignment(cost: np.ndarray) -> float:
    """Exact min-cost perfect matching on a square matrix.

    Classic shortest-augmenting-path scheme with dual potentials; O(N^3).
    """
    n = cost.shape[0]
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)  # match[j] = row assigned to column j (1-based)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    return float(sum(cost[match[j] - 1, j - 1] for j in range(1, n + 1)))
