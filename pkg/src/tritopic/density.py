"""Hierarchical density clustering with a noise label.

The pipeline is the standard one: per-point core distances, the
mutual-reachability graph, its minimum spanning tree, a single-linkage
hierarchy, a condensed cluster tree pruned at the minimum cluster size, and
excess-of-mass cluster extraction. Points not absorbed by any selected
cluster come back labeled -1. Everything is deterministic: ties in the tree
construction and in the greedy selection break toward lower indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Stand-in for an infinite density level when points coincide (distance 0).
_MAX_LAMBDA = 1e12


@dataclass
class _CondensedTree:
    # point_rows: (parent cluster id, point index, lambda)
    # cluster_rows: (parent cluster id, child cluster id, lambda, child size)
    point_rows: list[tuple[int, int, float]]
    cluster_rows: list[tuple[int, int, float, int]]
    n_clusters: int


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix."""
    X = np.asarray(X, dtype=np.float64)
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def core_distances(dist: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to the min_samples-th nearest neighbor, counting the point itself."""
    n = dist.shape[0]
    k = min(max(min_samples, 1), n)
    return np.sort(dist, axis=1)[:, k - 1]


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    """max(core_i, core_j, d_ij) off-diagonal; 0 on the diagonal."""
    mr = np.maximum(np.maximum(core[:, None], core[None, :]), dist)
    np.fill_diagonal(mr, 0.0)
    return mr


def _minimum_spanning_tree(graph: np.ndarray) -> list[tuple[int, int, float]]:
    """Prim's algorithm on a dense weight matrix; returns (u, v, weight) edges."""
    n = graph.shape[0]
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    best = graph[0].copy()
    best_from = np.zeros(n, dtype=np.intp)
    edges = []
    for _ in range(n - 1):
        masked = np.where(visited, np.inf, best)
        j = int(np.argmin(masked))
        edges.append((int(best_from[j]), j, float(best[j])))
        visited[j] = True
        closer = graph[j] < best
        best_from[closer] = j
        best[closer] = graph[j][closer]
    return edges


def _single_linkage(edges: list[tuple[int, int, float]], n: int) -> np.ndarray:
    """Union MST edges in ascending weight order into a linkage table.

    Row t describes merge node n+t: (left node, right node, weight, size).
    """
    order = sorted(range(len(edges)), key=lambda i: (edges[i][2], i))
    # Union-find over hierarchy node ids; a component's root IS its newest node.
    parent = np.arange(2 * n - 1, dtype=np.intp)
    size = np.ones(2 * n - 1, dtype=np.intp)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    table = np.zeros((n - 1, 4))
    for t, i in enumerate(order):
        u, v, w = edges[i]
        left, right = find(u), find(v)
        node = n + t
        table[t] = (left, right, w, size[left] + size[right])
        parent[left] = node
        parent[right] = node
        size[node] = size[left] + size[right]
    return table


def _subtree_points(node: int, table: np.ndarray, n: int) -> list[int]:
    points = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur < n:
            points.append(cur)
        else:
            row = table[cur - n]
            stack.extend((int(row[0]), int(row[1])))
    return sorted(points)


def _condense(table: np.ndarray, n: int, min_cluster_size: int) -> _CondensedTree:
    """Prune the hierarchy: splits where both sides reach min_cluster_size create
    new clusters; smaller sides shed their points at the split's density level."""
    sizes = np.ones(2 * n - 1, dtype=np.intp)
    for t in range(n - 1):
        sizes[n + t] = int(table[t][3])

    relabel = np.full(2 * n - 1, -1, dtype=np.intp)
    root = 2 * n - 2
    relabel[root] = 0
    next_cid = 1
    ignore = np.zeros(2 * n - 1, dtype=bool)
    point_rows: list[tuple[int, int, float]] = []
    cluster_rows: list[tuple[int, int, float, int]] = []

    def shed(subtree: int, cid: int, lam: float) -> None:
        for p in _subtree_points(subtree, table, n):
            point_rows.append((cid, p, lam))
        stack = [subtree]
        while stack:
            cur = stack.pop()
            ignore[cur] = True
            if cur >= n:
                row = table[cur - n]
                stack.extend((int(row[0]), int(row[1])))

    for node in range(root, n - 1, -1):
        if ignore[node]:
            continue
        cid = int(relabel[node])
        left, right, dist, _ = table[node - n]
        left, right = int(left), int(right)
        lam = 1.0 / dist if dist > 0.0 else _MAX_LAMBDA
        big_left = sizes[left] >= min_cluster_size
        big_right = sizes[right] >= min_cluster_size

        if big_left and big_right:
            for child in (left, right):
                relabel[child] = next_cid
                cluster_rows.append((cid, next_cid, lam, int(sizes[child])))
                next_cid += 1
        elif big_left:
            relabel[left] = cid
            shed(right, cid, lam)
        elif big_right:
            relabel[right] = cid
            shed(left, cid, lam)
        else:
            shed(left, cid, lam)
            shed(right, cid, lam)

    return _CondensedTree(point_rows, cluster_rows, next_cid)


def _stability(tree: _CondensedTree) -> np.ndarray:
    births = np.zeros(tree.n_clusters)
    for _, child, lam, _ in tree.cluster_rows:
        births[child] = lam
    stab = np.zeros(tree.n_clusters)
    for parent, _, lam in tree.point_rows:
        stab[parent] += lam - births[parent]
    for parent, _, lam, size in tree.cluster_rows:
        stab[parent] += (lam - births[parent]) * size
    return stab


def _select_excess_of_mass(tree: _CondensedTree, allow_single_cluster: bool) -> set[int]:
    children: dict[int, list[int]] = {c: [] for c in range(tree.n_clusters)}
    for parent, child, _, _ in tree.cluster_rows:
        children[parent].append(child)

    stability = _stability(tree)
    # Leaves first (children always carry higher ids than their parent); the
    # root (id 0) competes only when a single all-points cluster is allowed.
    lowest = 0 if allow_single_cluster else 1
    candidates = list(range(tree.n_clusters - 1, lowest - 1, -1))

    is_cluster = {c: True for c in candidates}
    for node in candidates:
        subtree = sum(stability[c] for c in children[node])
        if children[node] and subtree > stability[node]:
            is_cluster[node] = False
            stability[node] = subtree
        else:
            stack = list(children[node])
            while stack:
                desc = stack.pop()
                if desc in is_cluster:
                    is_cluster[desc] = False
                stack.extend(children[desc])
    return {c for c, keep in is_cluster.items() if keep}


def density_cluster(
    points: np.ndarray,
    min_cluster_size: int,
    min_samples: int | None = None,
    allow_single_cluster: bool = False,
) -> np.ndarray:
    """Cluster rows of `points`; returns integer labels with -1 for noise.

    `min_samples` defaults to `min_cluster_size`. Labels are renumbered
    densely in order of each cluster's first member.
    """
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = X.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.intp)
    if n == 1:
        return np.full(1, -1, dtype=np.intp)
    mcs = max(2, int(min_cluster_size))
    k = int(min_samples) if min_samples is not None else mcs

    dist = pairwise_distances(X)
    core = core_distances(dist, k)
    mst = _minimum_spanning_tree(mutual_reachability(dist, core))
    table = _single_linkage(mst, n)
    tree = _condense(table, n, mcs)
    selected = _select_excess_of_mass(tree, allow_single_cluster)

    parent_of = {child: parent for parent, child, _, _ in tree.cluster_rows}
    labels = np.full(n, -1, dtype=np.intp)
    for parent, point, _ in tree.point_rows:
        cid: int | None = parent
        while cid is not None and cid not in selected:
            cid = parent_of.get(cid)
        if cid is not None:
            labels[point] = cid

    return _renumber(labels)


def _renumber(labels: np.ndarray) -> np.ndarray:
    """Dense ids 0..T-1 in order of first appearance; -1 passes through."""
    mapping: dict[int, int] = {}
    out = np.full_like(labels, -1)
    for i, lab in enumerate(labels):
        if lab == -1:
            continue
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out
