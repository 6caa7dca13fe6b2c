"""Exact optimal transport between NL-word and FOL-token embeddings.

The solver is a transportation simplex (network simplex on the dense
bipartite graph) rather than an entropic approximation: downstream
connective handling keys off exact zeros in the plan, and Sinkhorn-style
plans are dense everywhere. Bland's lowest-index pivot rule keeps runs
reproducible and cycle-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_THRESHOLD = 1e-9  # below this a plan entry counts as an exact zero
_PIVOT_TOL = 1e-11  # reduced-cost negativity cutoff
_NORM_TOL = 1e-12


class OtError(Exception):
    """Base class for alignment failures."""


class DimensionMismatchError(OtError):
    pass


class ZeroNormRowError(OtError):
    def __init__(self, index: int, side: str):
        super().__init__(f"zero-norm row {index} on {side} side")
        self.index = index
        self.side = side


class InfeasibleMarginalsError(OtError):
    pass


class NumericalFailureError(OtError):
    pass


@dataclass(frozen=True)
class TransportProblem:
    """Cosine cost matrix with source/target marginals."""

    cost: np.ndarray  # (m, n)
    source_marginal: np.ndarray  # (m,)
    target_marginal: np.ndarray  # (n,)

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=np.float64)
        a = np.asarray(self.source_marginal, dtype=np.float64)
        b = np.asarray(self.target_marginal, dtype=np.float64)
        if cost.ndim != 2 or a.ndim != 1 or b.ndim != 1:
            raise DimensionMismatchError("cost must be 2-d and marginals 1-d")
        if cost.shape != (a.size, b.size):
            raise DimensionMismatchError(
                f"cost shape {cost.shape} incompatible with marginals ({a.size}, {b.size})"
            )
        if np.any(a < 0) or np.any(b < 0):
            raise ValueError("marginals must be nonnegative")
        if abs(a.sum() - 1.0) > 1e-12 or abs(b.sum() - 1.0) > 1e-12:
            raise ValueError("marginals must each sum to 1 within 1e-12")
        if np.any(cost < -1e-9) or np.any(cost > 2.0 + 1e-9):
            raise ValueError("cost entries must lie in [0, 2]")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "source_marginal", a)
        object.__setattr__(self, "target_marginal", b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cost.shape


@dataclass(frozen=True)
class AlignmentPlan:
    """Vertex-optimal transport plan and its objective value."""

    plan: np.ndarray  # (m, n)
    objective: float
    zero_mask: np.ndarray  # (m, n) bool, True where plan entry is an exact zero


def build_cost_matrix(H: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Pairwise cosine distances 1 - cos(h_i, z_j), clipped into [0, 2]."""
    H = np.asarray(H, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    if H.ndim != 2 or Z.ndim != 2:
        raise DimensionMismatchError("token matrices must be 2-d")
    if H.shape[1] != Z.shape[1]:
        raise DimensionMismatchError(
            f"embedding dimensions differ: {H.shape[1]} vs {Z.shape[1]}"
        )
    h_norms = np.linalg.norm(H, axis=1)
    z_norms = np.linalg.norm(Z, axis=1)
    for idx in np.flatnonzero(h_norms < _NORM_TOL):
        raise ZeroNormRowError(int(idx), "source")
    for idx in np.flatnonzero(z_norms < _NORM_TOL):
        raise ZeroNormRowError(int(idx), "target")
    cosine = (H / h_norms[:, None]) @ (Z / z_norms[:, None]).T
    return np.clip(1.0 - cosine, 0.0, 2.0)


def uniform_marginals(m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform source/target marginals 1/m and 1/n."""
    if m < 1 or n < 1:
        raise ValueError("marginal sizes must be >= 1")
    return np.full(m, 1.0 / m), np.full(n, 1.0 / n)


def solve_ot(problem: TransportProblem, zero_threshold: float = ZERO_THRESHOLD) -> AlignmentPlan:
    """Solve the transportation problem exactly.

    Returns a basic (vertex) optimal plan: at most m+n-1 entries exceed
    the zero threshold and the objective matches the LP optimum.
    """
    a = problem.source_marginal
    b = problem.target_marginal
    C = problem.cost
    m, n = problem.shape
    if abs(a.sum() - b.sum()) > 1e-9:
        raise InfeasibleMarginalsError("marginal sums differ")

    if m == 1:
        plan = b[None, :].copy()
    elif n == 1:
        plan = a[:, None].copy()
    else:
        plan = _transportation_simplex(C, a, b)

    objective = float(np.sum(plan * C))
    return AlignmentPlan(plan=plan, objective=objective, zero_mask=plan < zero_threshold)


def _northwest_corner(a: np.ndarray, b: np.ndarray) -> dict[tuple[int, int], float]:
    """Initial basic feasible solution with exactly m+n-1 cells."""
    m, n = a.size, b.size
    ra = a.copy()
    rb = b.copy()
    basis: dict[tuple[int, int], float] = {}
    i = j = 0
    while True:
        f = max(min(ra[i], rb[j]), 0.0)
        basis[(i, j)] = f
        ra[i] -= f
        rb[j] -= f
        if i == m - 1 and j == n - 1:
            break
        if i < m - 1 and (ra[i] <= rb[j] or j == n - 1):
            i += 1
        else:
            j += 1
    return basis


def _compute_duals(basis: dict[tuple[int, int], float], C: np.ndarray, m: int, n: int):
    """Solve u_i + v_j = c_ij over the basis tree (row 0 rooted at 0)."""
    adj: dict[int, list[tuple[int, tuple[int, int]]]] = {k: [] for k in range(m + n)}
    for (i, j) in basis:
        adj[i].append((m + j, (i, j)))
        adj[m + j].append((i, (i, j)))
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    stack = [0]
    seen = {0}
    while stack:
        node = stack.pop()
        for nbr, (i, j) in adj[node]:
            if nbr in seen:
                continue
            seen.add(nbr)
            if nbr >= m:
                v[nbr - m] = C[i, j] - u[i]
            else:
                u[nbr] = C[i, j] - v[j]
            stack.append(nbr)
    if len(seen) != m + n:
        raise NumericalFailureError("basis does not span the bipartite graph")
    return u, v


def _find_cycle(basis: dict[tuple[int, int], float], entering: tuple[int, int], m: int):
    """Cells of the unique basis-tree cycle closed by the entering cell.

    Returned in traversal order starting at the entering cell, so signs
    alternate +, -, +, ... along the list.
    """
    i0, j0 = entering
    adj: dict[int, list[int]] = {}
    for (i, j) in basis:
        adj.setdefault(i, []).append(m + j)
        adj.setdefault(m + j, []).append(i)
    # Path from the entering column node back to the entering row node.
    parent = {m + j0: None}
    stack = [m + j0]
    while stack:
        node = stack.pop()
        if node == i0:
            break
        for nbr in adj.get(node, ()):
            if nbr not in parent:
                parent[nbr] = node
                stack.append(nbr)
    if i0 not in parent:
        raise NumericalFailureError("entering cell closes no cycle")
    path = [i0]
    while path[-1] is not None:
        path.append(parent[path[-1]])
    path.pop()  # drop the terminating None
    cells = [entering]
    for node, nxt in zip(path, path[1:]):
        if node < m:
            cells.append((node, nxt - m))
        else:
            cells.append((nxt, node - m))
    return cells


def _transportation_simplex(C: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, n = C.shape
    basis = _northwest_corner(a, b)
    max_pivots = 50 * m * n + 1000

    for _ in range(max_pivots):
        u, v = _compute_duals(basis, C, m, n)
        reduced = C - u[:, None] - v[None, :]
        mask = np.ones((m, n), dtype=bool)
        for (i, j) in basis:
            mask[i, j] = False
        candidates = np.flatnonzero((reduced < -_PIVOT_TOL).ravel() & mask.ravel())
        if candidates.size == 0:
            plan = np.zeros((m, n))
            for (i, j), f in basis.items():
                plan[i, j] = max(f, 0.0)
            return plan
        entering = divmod(int(candidates[0]), n)  # Bland: lowest flat index

        cycle = _find_cycle(basis, entering, m)
        minus_cells = cycle[1::2]
        theta = min(basis[c] for c in minus_cells)
        leaving = min(c for c in minus_cells if basis[c] <= theta)

        basis[entering] = 0.0
        for k, cell in enumerate(cycle):
            basis[cell] += theta if k % 2 == 0 else -theta
        del basis[leaving]

    raise NumericalFailureError("pivot limit exceeded")
