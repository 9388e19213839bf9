"""s-t minimum cut on networks with real capacities.

Highest-label push-relabel with the gap heuristic and periodic global
relabeling.  Only the first phase (maximum preflow) is run since the cut is
all that is needed.  The source is implicit: source arcs start saturated, so
their capacities are handed in as initial node excesses.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _global_relabel(n, start, to, cap, rev, label, tol):
    # exact residual distances to the sink (node n); unreachable nodes get n + 1
    N = n + 1
    for i in range(N):
        label[i] = N
    label[n] = 0
    queue = np.empty(N, np.int64)
    queue[0] = n
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        for a in range(start[v], start[v + 1]):
            u = to[a]
            if u != n and label[u] == N and cap[rev[a]] > tol:
                label[u] = label[v] + 1
                queue[tail] = u
                tail += 1


@njit(cache=True)
def _preflow(n, start, to, cap, rev, excess, tol):
    N = n + 1
    label = np.empty(N, np.int64)
    current = start[:N].copy()
    count = np.zeros(2 * N + 2, np.int64)
    bucket = np.full(2 * N + 2, -1, np.int64)
    nxt = np.full(N, -1, np.int64)
    queued = np.zeros(N, np.bool_)

    _global_relabel(n, start, to, cap, rev, label, tol)
    for i in range(n):
        count[label[i]] += 1
    top = -1
    for i in range(n - 1, -1, -1):
        if excess[i] > tol and label[i] < N:
            nxt[i] = bucket[label[i]]
            bucket[label[i]] = i
            queued[i] = True
            if label[i] > top:
                top = label[i]

    work = 0
    relabel_every = 6 * N + (start[N] >> 1)
    while top >= 0:
        u = bucket[top]
        if u == -1:
            top -= 1
            continue
        bucket[top] = nxt[u]
        queued[u] = False

        while excess[u] > tol and label[u] < N:
            a = current[u]
            if a == start[u + 1]:
                old = label[u]
                m = 2 * N
                for b in range(start[u], start[u + 1]):
                    if cap[b] > tol and label[to[b]] + 1 < m:
                        m = label[to[b]] + 1
                work += 12 + start[u + 1] - start[u]
                count[old] -= 1
                if count[old] == 0:
                    # gap: nothing at `old` can reach the sink any more
                    for v in range(n):
                        if label[v] > old and label[v] < N:
                            count[label[v]] -= 1
                            label[v] = N
                    label[u] = N
                    break
                if m >= N:
                    label[u] = N
                    break
                label[u] = m
                count[m] += 1
                current[u] = start[u]
                continue
            v = to[a]
            if cap[a] > tol and label[u] == label[v] + 1:
                delta = min(excess[u], cap[a])
                cap[a] -= delta
                cap[rev[a]] += delta
                excess[u] -= delta
                excess[v] += delta
                if v != n and not queued[v] and excess[v] > tol:
                    nxt[v] = bucket[label[v]]
                    bucket[label[v]] = v
                    queued[v] = True
                    if label[v] > top:
                        top = label[v]
            else:
                current[u] = a + 1

        if excess[u] > tol and label[u] < N and not queued[u]:
            nxt[u] = bucket[label[u]]
            bucket[label[u]] = u
            queued[u] = True
        if label[u] < N and label[u] > top:
            top = label[u]

        if work > relabel_every:
            work = 0
            _global_relabel(n, start, to, cap, rev, label, tol)
            count[:] = 0
            bucket[:] = -1
            queued[:] = False
            for i in range(n):
                count[label[i]] += 1
            top = -1
            for i in range(n):
                current[i] = start[i]
                if excess[i] > tol and label[i] < N:
                    nxt[i] = bucket[label[i]]
                    bucket[label[i]] = i
                    queued[i] = True
                    if label[i] > top:
                        top = label[i]

    # nodes that can still reach the sink form the sink side
    _global_relabel(n, start, to, cap, rev, label, tol)
    return label[:n] >= N


def min_cut(n_nodes: int, edges_u, edges_v, edges_w, source_cap, sink_cap, rtol: float = 1e-12):
    """Minimum s-t cut of an undirected graph with unary source/sink arcs.

    Returns a boolean array marking the source side, chosen as the largest
    minimum-cut source set (nodes that cannot reach the sink in the final
    residual network).
    """
    n = int(n_nodes)
    eu = np.asarray(edges_u, np.int64)
    ev = np.asarray(edges_v, np.int64)
    ew = np.asarray(edges_w, np.float64)
    s = np.asarray(source_cap, np.float64)
    t = np.asarray(sink_cap, np.float64)
    common = np.minimum(s, t)
    s, t = s - common, t - common
    scale = max(float(ew.max()) if ew.size else 0.0, float(s.max()) if n else 0.0,
                float(t.max()) if n else 0.0, 1e-300)
    tol = rtol * scale

    sink_nodes = np.nonzero(t > 0)[0]
    tails = np.concatenate([eu, ev, sink_nodes, np.full(sink_nodes.size, n)])
    heads = np.concatenate([ev, eu, np.full(sink_nodes.size, n), sink_nodes])
    caps = np.concatenate([ew, ew, t[sink_nodes], np.zeros(sink_nodes.size)])
    m_e, m_s = eu.size, sink_nodes.size
    pair = np.concatenate([np.arange(m_e) + m_e, np.arange(m_e),
                           np.arange(m_s) + 2 * m_e + m_s, np.arange(m_s) + 2 * m_e])
    order = np.argsort(tails, kind="stable")
    position = np.empty_like(order)
    position[order] = np.arange(order.size)
    to = heads[order]
    cap = caps[order].copy()
    rev = position[pair[order]]
    start = np.zeros(n + 2, np.int64)
    np.add.at(start, tails + 1, 1)
    start = np.cumsum(start)

    excess = np.zeros(n + 1)
    excess[:n] = s
    return _preflow(n, start, to, cap, rev, excess, tol)
