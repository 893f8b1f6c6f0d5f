"""
Bisimulation engine for membership graphs.

Pure functions over adjacency lists (`succ[v]` = children of node v).
No I/O, no set semantics beyond the graph: hyperset.py builds on these.

- coarsest_partition: relational coarsest partition (Paige-Tarjan), the
  maximum bisimulation of the graph.
- naive_partition: greatest fixed point by repeated pair elimination;
  quadratic, kept as a test oracle.
- canonical_labels: isomorphism-invariant total order on a minimal graph.
"""

from __future__ import annotations

import logging
from collections import deque
from typing import Sequence

logger = logging.getLogger(__name__)

Succ = Sequence[Sequence[int]]


def _dedupe(succ: Succ) -> list[list[int]]:
    return [sorted(set(children)) for children in succ]


def coarsest_partition(succ: Succ) -> list[int]:
    """
    Return a block id per node; two nodes share a block iff they are bisimilar.

    Block ids are dense and numbered by first occurrence in node order.
    Runs in O(m log n): each round splits on the smaller half of a compound
    block and keeps per-edge counts so the complement is never scanned.
    Blocks are lists with a position index, so picking and removing a
    member is O(1) however much a block has shrunk.
    """
    n = len(succ)
    if n == 0:
        return []
    succ = _dedupe(succ)
    pred: list[list[int]] = [[] for _ in range(n)]
    for x, children in enumerate(succ):
        for y in children:
            pred[y].append(x)

    # Q: fine partition. X: coarse partition, each X block a union of Q blocks.
    leaves = [v for v in range(n) if not succ[v]]
    inner = [v for v in range(n) if succ[v]]
    blocks: list[list[int]] = []
    block_of = [0] * n
    npos = [0] * n  # index of a node inside blocks[block_of[node]]
    for part in (leaves, inner):
        if part:
            for i, v in enumerate(part):
                block_of[v] = len(blocks)
                npos[v] = i
            blocks.append(part)

    xblock_of_q: list[int] = [0] * len(blocks)
    xmembers: list[list[int]] = [list(range(len(blocks)))]
    xpos: list[int] = list(range(len(blocks)))  # index of a Q block inside its X block
    compound: list[int] = [0] if len(blocks) > 1 else []
    in_compound: list[bool] = [bool(compound)]

    # count[S * n + x] = number of children of x inside X block S
    count: dict[int, int] = {x: len(succ[x]) for x in inner}

    def mark_compound(xid: int) -> None:
        if len(xmembers[xid]) > 1 and not in_compound[xid]:
            in_compound[xid] = True
            compound.append(xid)

    def move(x: int, twin: int) -> None:
        members = blocks[block_of[x]]
        i = npos[x]
        last = members.pop()
        if last != x:
            members[i] = last
            npos[last] = i
        npos[x] = len(blocks[twin])
        blocks[twin].append(x)
        block_of[x] = twin

    def split(marked) -> None:
        twins: dict[int, int] = {}
        for x in marked:
            d = block_of[x]
            twin = twins.get(d)
            if twin is None:
                twin = len(blocks)
                blocks.append([])
                xblock_of_q.append(xblock_of_q[d])
                xpos.append(-1)
                twins[d] = twin
            move(x, twin)
        for d, twin in twins.items():
            if not blocks[d]:
                # every node moved: no split, fold back into d
                for x in blocks[twin]:
                    block_of[x] = d
                blocks[d], blocks[twin] = blocks[twin], []
                continue
            xid = xblock_of_q[d]
            xpos[twin] = len(xmembers[xid])
            xmembers[xid].append(twin)
            mark_compound(xid)

    rounds = 0
    while compound:
        s = compound[-1]
        members = xmembers[s]
        first, second = members[-1], members[-2]
        b = first if len(blocks[first]) <= len(blocks[second]) else second
        last = members.pop()
        if last != b:
            members[xpos[b]] = last
            xpos[last] = xpos[b]
        if len(members) < 2:
            compound.pop()
            in_compound[s] = False

        new_x = len(xmembers)
        xmembers.append([b])
        xpos[b] = 0
        in_compound.append(False)
        xblock_of_q[b] = new_x

        count_b: dict[int, int] = {}
        for y in blocks[b]:
            for x in pred[y]:
                count_b[x] = count_b.get(x, 0) + 1

        split(count_b)
        split([x for x, c in count_b.items() if count[s * n + x] == c])

        for x, c in count_b.items():
            key = s * n + x
            rest = count[key] - c
            if rest:
                count[key] = rest
            else:
                del count[key]
            count[new_x * n + x] = c
        rounds += 1

    logger.debug("partition refinement: %d nodes, %d rounds", n, rounds)
    return _relabel(block_of)


def _relabel(block_of: Sequence[int]) -> list[int]:
    ids: dict[int, int] = {}
    return [ids.setdefault(b, len(ids)) for b in block_of]


def naive_partition(succ: Succ) -> list[int]:
    """Maximum bisimulation by pair elimination. Test oracle only."""
    n = len(succ)
    succ = _dedupe(succ)
    related = {(u, v) for u in range(n) for v in range(n)}
    changed = True
    while changed:
        changed = False
        for u, v in sorted(related):
            forth = all(any((a, b) in related for b in succ[v]) for a in succ[u])
            back = all(any((a, b) in related for a in succ[u]) for b in succ[v])
            if not (forth and back):
                related.discard((u, v))
                changed = True
    block_of = [min(v for v in range(n) if (u, v) in related) for u in range(n)]
    return _relabel(block_of)


def bfs_depths(succ: Succ, root: int) -> list[int]:
    """Breadth-first distance from root; -1 for unreachable nodes."""
    depth = [-1] * len(succ)
    depth[root] = 0
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for c in succ[v]:
            if depth[c] < 0:
                depth[c] = depth[v] + 1
                queue.append(c)
    return depth


def canonical_labels(succ: Succ, root: int) -> list[int]:
    """
    Canonical index per node of a minimal accessible graph.

    Ordered-partition refinement in the style of nauty: cells start as BFS
    layers and are named by their first position. Each splitter cell W
    splits every cell by the number of children its nodes have in W;
    nodes with none stay in front and the rest follow by ascending count.
    Splitters are queued by position and a split cell queues all its parts
    but the largest. Nothing depends on node ids, so isomorphic inputs end
    with identical positions. In a minimal graph the stable partition is
    discrete; the position of a node is its label and the root lands at 0.
    """
    n = len(succ)
    pred: list[list[int]] = [[] for _ in range(n)]
    for x, children in enumerate(succ):
        for y in children:
            pred[y].append(x)

    depth = bfs_depths(succ, root)
    lab = sorted(range(n), key=depth.__getitem__)
    pos = [0] * n
    cell_of = [0] * n
    cell_end = [0] * n
    queue: deque[int] = deque()
    queued = [False] * n
    start = 0
    for i, v in enumerate(lab):
        if i and depth[v] != depth[lab[i - 1]]:
            start = i
        if not queued[start]:
            queued[start] = True
            queue.append(start)
        pos[v] = i
        cell_of[v] = start
        cell_end[start] = i + 1

    while queue:
        w = queue.popleft()
        queued[w] = False
        hits: dict[int, int] = {}
        for i in range(w, cell_end[w]):
            for p in pred[lab[i]]:
                hits[p] = hits.get(p, 0) + 1
        touched: dict[int, list[int]] = {}
        for p in hits:
            touched.setdefault(cell_of[p], []).append(p)

        for s in sorted(touched):
            end = cell_end[s]
            if end - s == 1:
                continue
            group = touched[s]
            # touched nodes to the back of the cell, ordered by count
            boundary = end
            for p in group:
                boundary -= 1
                q, i = lab[boundary], pos[p]
                lab[i], lab[boundary] = q, p
                pos[q], pos[p] = i, boundary
            group.sort(key=hits.__getitem__)
            for i, p in enumerate(group, boundary):
                lab[i] = p
                pos[p] = i

            starts = [s] if boundary > s else []
            previous = -1
            for i in range(boundary, end):
                c = hits[lab[i]]
                if c != previous:
                    starts.append(i)
                    previous = c
            if len(starts) == 1:
                continue
            bounds = starts + [end]
            for a, b in zip(starts, bounds[1:]):
                cell_end[a] = b
                if a != s:
                    for i in range(a, b):
                        cell_of[lab[i]] = a

            if queued[s]:
                fresh = starts[1:]
            else:
                sizes = [b - a for a, b in zip(starts, bounds[1:])]
                largest = sizes.index(max(sizes))
                fresh = starts[:largest] + starts[largest + 1:]
            for a in fresh:
                queued[a] = True
                queue.append(a)

    if any(cell_end[cell_of[v]] - cell_of[v] != 1 for v in range(n)):
        raise ValueError("graph is not minimal: bisimilar nodes remain")
    return pos
