"""Directed weighted interaction networks.

Networks are built from Barabasi-Albert preferential attachment graphs that
are turned into directed graphs by deleting arcs at random while keeping the
graph strongly connected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class NetworkError(ValueError):
    """A network violates one of its invariants."""


class NetworkParseError(NetworkError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Network:
    """Directed graph with weights ``a_ij`` in [0, 1] and no self loops.

    ``adjacency[i, j]`` is the strength with which agent ``i`` listens to
    agent ``j``.  Instances are validated on construction; pass
    ``require_strong=False`` to build intermediate, possibly disconnected
    graphs.
    """

    adjacency: np.ndarray
    require_strong: bool = field(default=True, repr=False)

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NetworkError(f"adjacency must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NetworkError("weights must be finite")
        if np.any(np.diag(a) != 0):
            raise NetworkError("self loops: a_ii must be 0")
        if np.any(a < 0) or np.any(a > 1):
            raise NetworkError("weights out of range [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)
        if self.require_strong:
            if np.any(self.neighbor_counts == 0):
                raise NetworkError("isolated agent: every n_i must be >= 1")
            if not is_strongly_connected(self):
                raise NetworkError("graph is not strongly connected")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def laplacian(self) -> np.ndarray:
        a = self.adjacency
        lap = -a.copy()
        lap[np.diag_indices_from(lap)] = a.sum(axis=1)
        lap.setflags(write=False)
        return lap

    @cached_property
    def neighbor_counts(self) -> np.ndarray:
        counts = np.count_nonzero(self.adjacency > 0, axis=1)
        counts.setflags(write=False)
        return counts

    @property
    def arcs(self) -> list[tuple[int, int, float]]:
        rows, cols = np.nonzero(self.adjacency)
        return [(int(i), int(j), float(self.adjacency[i, j])) for i, j in zip(rows, cols)]

    def successors(self) -> list[list[int]]:
        return [list(np.flatnonzero(row)) for row in self.adjacency]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())


def generate_ba(n: int, m: int = 2, seed=None) -> list[tuple[int, int]]:
    """Undirected Barabasi-Albert graph as a sorted edge list.

    Starts from a complete graph on ``m + 1`` nodes; every further node
    attaches to ``m`` distinct existing nodes chosen with probability
    proportional to their degree.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if n < m + 1:
        raise ValueError(f"need n >= m + 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    # each node appears once per incident edge, so uniform draws are degree-weighted
    ends = [v for e in edges for v in e]
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[rng.integers(len(ends))])
        for t in sorted(targets):
            edges.append((t, new))
            ends.extend((t, new))
    return sorted(edges)


def strongly_connected_components(succ: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative so deep graphs do not hit the recursion limit."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            nbrs = succ[v]
            if pos < len(nbrs):
                work[-1] = (v, pos + 1)
                w = nbrs[pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def is_strongly_connected(net) -> bool:
    """True iff ``net`` (a Network or adjacency matrix) has a single SCC."""
    adj = net.adjacency if isinstance(net, Network) else np.asarray(net)
    if adj.shape[0] == 0:
        return False
    succ = [list(np.flatnonzero(row)) for row in adj]
    return len(strongly_connected_components(succ)) == 1


@dataclass(frozen=True)
class DirectifyReport:
    requested: int
    removed: int
    total_arcs: int

    @property
    def realized_fraction(self) -> float:
        return self.removed / self.total_arcs if self.total_arcs else 0.0


def directify(edges, removal_fraction: float = 0.2, seed=None, n: int | None = None,
              return_report: bool = False):
    """Turn an undirected edge list into a strongly connected directed Network.

    Each edge gives two unit-weight arcs.  ``floor(removal_fraction * arcs)``
    arcs are then tried in random order; a removal is undone when it would
    break strong connectivity, so fewer arcs may end up removed.
    """
    if not 0 <= removal_fraction < 1:
        raise ValueError(f"removal_fraction must be in [0, 1), got {removal_fraction}")
    edges = [(int(u), int(v)) for u, v in edges]
    if n is None:
        n = 1 + max(max(e) for e in edges) if edges else 0
    adj = np.zeros((n, n))
    for u, v in edges:
        if u == v:
            raise NetworkError(f"self loop on node {u}")
        adj[u, v] = adj[v, u] = 1.0
    if not is_strongly_connected(adj):
        raise NetworkError("input graph is not connected")

    arcs = [(int(i), int(j)) for i, j in zip(*np.nonzero(adj))]
    requested = int(np.floor(removal_fraction * len(arcs)))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(arcs))[:requested]
    succ = [set(np.flatnonzero(row).tolist()) for row in adj]
    removed = 0
    for k in order:
        i, j = arcs[k]
        # out-degree 1 means i would be cut off
        if len(succ[i]) == 1:
            continue
        succ[i].discard(j)
        if len(strongly_connected_components([sorted(s) for s in succ])) == 1:
            adj[i, j] = 0.0
            removed += 1
        else:
            succ[i].add(j)
    net = Network(adj)
    if return_report:
        return net, DirectifyReport(requested, removed, len(arcs))
    return net


def random_network(n: int, m: int = 2, removal_fraction: float = 0.2, seed=None) -> Network:
    """BA graph followed by :func:`directify`, both driven by one generator."""
    rng = np.random.default_rng(seed)
    edges = generate_ba(n, m, rng)
    return directify(edges, removal_fraction, rng, n=n)


def format_network(net: Network) -> str:
    lines = [f"n {net.n}"]
    lines += [f"{i} {j} {w!r}" for i, j, w in net.arcs]
    return "\n".join(lines) + "\n"


def save_network(net: Network, path) -> None:
    Path(path).write_text(format_network(net))


def load_network(path) -> Network:
    """Read the ``n <count>`` / ``i j w`` edge-list format.

    Blank lines and ``#`` comments are ignored.
    """
    n = None
    adj = None
    seen = set()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise NetworkParseError("expected header 'n <count>'", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise NetworkParseError(f"bad agent count {parts[1]!r}", lineno) from None
            if n < 1:
                raise NetworkParseError("agent count must be positive", lineno)
            adj = np.zeros((n, n))
            continue
        if len(parts) != 3:
            raise NetworkParseError(f"expected 'i j w', got {line!r}", lineno)
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise NetworkParseError(f"cannot parse {line!r}", lineno) from None
        if not (0 <= i < n and 0 <= j < n):
            raise NetworkParseError(f"index out of range for n={n}", lineno)
        if (i, j) in seen:
            raise NetworkParseError(f"duplicate arc {i} {j}", lineno)
        seen.add((i, j))
        if i == j and w != 0:
            raise NetworkError(f"line {lineno}: self loops: a_ii must be 0")
        if not 0 <= w <= 1:
            raise NetworkError(f"line {lineno}: weight {w} out of range [0, 1]")
        adj[i, j] = w
    if n is None:
        raise NetworkParseError("empty file: missing header 'n <count>'")
    return Network(adj)
