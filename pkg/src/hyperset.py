"""
Hypersets as accessible pointed graphs.

An Apg is a raw picture of a set: nodes, membership edges (parent, child)
and a root. A CanonSet is the unique minimal picture under maximum
bisimulation, with nodes numbered canonically (root = 0). Equality of
CanonSets is plain structural equality, which is bisimilarity of the
pictures they came from.

All values are immutable; every operation here is a pure function.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

from src.bisimulation import canonical_labels, coarsest_partition
from src.errors import WorkbenchError
from src.models import ErrorCode

logger = logging.getLogger(__name__)

NodeId = int


class GraphError(WorkbenchError):
    """Raised for malformed pictures (dangling edge, unreachable node, ...)."""

    code = ErrorCode.invalid_graph


@dataclass(frozen=True)
class Apg:
    """Accessible pointed graph: edge (p, c) means c's set is a member of p's."""

    nodes: tuple[NodeId, ...]
    edges: tuple[tuple[NodeId, NodeId], ...]
    root: NodeId

    @classmethod
    def from_succ(cls, succ: Sequence[Sequence[int]], root: int = 0) -> "Apg":
        """Build from adjacency lists over nodes 0..n-1."""
        edges = tuple((p, c) for p, children in enumerate(succ) for c in children)
        return cls(nodes=tuple(range(len(succ))), edges=edges, root=root)

    def validate(self) -> None:
        """Raise GraphError unless every Apg invariant holds."""
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise GraphError("duplicate node ids")
        if self.root not in known:
            raise GraphError(f"root {self.root} is not a node")
        seen: set[tuple[NodeId, NodeId]] = set()
        for parent, child in self.edges:
            if parent not in known or child not in known:
                raise GraphError(f"dangling edge ({parent}, {child})")
            if (parent, child) in seen:
                raise GraphError(f"duplicate edge ({parent}, {child})")
            seen.add((parent, child))
        reached = _reachable(self._succ_by_id(), self.root)
        missing = known - reached
        if missing:
            raise GraphError(f"nodes unreachable from root: {sorted(missing)}")

    def _succ_by_id(self) -> dict[NodeId, list[NodeId]]:
        succ: dict[NodeId, list[NodeId]] = {v: [] for v in self.nodes}
        for parent, child in self.edges:
            succ[parent].append(child)
        return succ


def _reachable(succ, root) -> set:
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for c in succ[v]:
            if c not in seen:
                seen.add(c)
                queue.append(c)
    return seen


@dataclass(frozen=True, eq=False)
class CanonSet:
    """
    Canonical hyperset: minimal picture with deterministic node order.

    `succ[i]` lists the children of canonical node i in ascending order;
    node 0 is the root.
    """

    succ: tuple[tuple[int, ...], ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CanonSet):
            return NotImplemented
        return self._hash == other._hash and self.succ == other.succ

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"CanonSet(nodes={self.size}, succ={self.succ})"

    @cached_property
    def _hash(self) -> int:
        return hash(self.succ)

    @property
    def size(self) -> int:
        return len(self.succ)

    @cached_property
    def element_list(self) -> tuple["CanonSet", ...]:
        return tuple(reroot(self, c) for c in self.succ[0])

    @cached_property
    def element_set(self) -> frozenset["CanonSet"]:
        return frozenset(self.element_list)

    @cached_property
    def well_founded(self) -> bool:
        # Kahn: acyclic iff every node can be peeled off
        indegree = [0] * self.size
        for children in self.succ:
            for c in children:
                indegree[c] += 1
        ready = [v for v in range(self.size) if indegree[v] == 0]
        peeled = 0
        while ready:
            v = ready.pop()
            peeled += 1
            for c in self.succ[v]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    ready.append(c)
        return peeled == self.size

    def to_apg(self) -> Apg:
        return Apg.from_succ(self.succ, 0)


class GraphBuilder:
    """
    Mutable scratch graph for composing sets before canonicalisation.

    Embedded CanonSets are copied once each; `canonical(v)` canonicalises
    the part of the scratch graph reachable from v.
    """

    def __init__(self) -> None:
        self.succ: list[list[int]] = []
        self._embedded: dict[CanonSet, int] = {}

    def add_node(self) -> int:
        self.succ.append([])
        return len(self.succ) - 1

    def add_edge(self, parent: int, child: int) -> None:
        if child not in self.succ[parent]:
            self.succ[parent].append(child)

    def embed(self, s: CanonSet) -> int:
        """Copy s into the graph (once per distinct set); return its root."""
        offset = self._embedded.get(s)
        if offset is None:
            offset = len(self.succ)
            self.succ.extend([offset + c for c in children] for children in s.succ)
            self._embedded[s] = offset
        return offset

    def canonical(self, root: int) -> CanonSet:
        return _canonical(self.succ, root)


def _canonical(succ: Sequence[Sequence[int]], root: int, minimal: bool = False) -> CanonSet:
    """Canonicalise the subgraph reachable from root (adjacency-list input)."""
    order = [root]
    index = {root: 0}
    for v in order:
        for c in succ[v]:
            if c not in index:
                index[c] = len(order)
                order.append(c)
    sub = [[index[c] for c in succ[v]] for v in order]

    if minimal:
        quotient = [sorted(set(children)) for children in sub]
        quotient_root = 0
    else:
        block_of = coarsest_partition(sub)
        merged: list[set[int]] = [set() for _ in range(max(block_of) + 1)]
        for v, children in enumerate(sub):
            merged[block_of[v]].update(block_of[c] for c in children)
        quotient = [sorted(children) for children in merged]
        quotient_root = block_of[0]

    labels = canonical_labels(quotient, quotient_root)
    out: list[tuple[int, ...]] = [()] * len(quotient)
    for b, children in enumerate(quotient):
        out[labels[b]] = tuple(sorted(labels[c] for c in children))
    return CanonSet(tuple(out))


def canonical_from_succ(succ: Sequence[Sequence[int]], root: int = 0) -> CanonSet:
    """Canonicalise adjacency lists without validation; unreachable nodes are ignored."""
    return _canonical(succ, root)


def reroot(s: CanonSet, node: int) -> CanonSet:
    """The set pictured by canonical node `node` of s."""
    if node == 0:
        return s
    return _canonical(s.succ, node, minimal=True)


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------


def canonicalize(g: Apg) -> CanonSet:
    """Validate g and return its canonical form."""
    g.validate()
    ids = {v: i for i, v in enumerate(g.nodes)}
    succ: list[list[int]] = [[] for _ in g.nodes]
    for parent, child in g.edges:
        succ[ids[parent]].append(ids[child])
    result = _canonical(succ, ids[g.root])
    logger.debug("canonicalised %d nodes to %d", len(g.nodes), result.size)
    return result


SetLike = Union[Apg, CanonSet]


def _as_canon(x: SetLike) -> CanonSet:
    return x if isinstance(x, CanonSet) else canonicalize(x)


def bisimilar(a: SetLike, b: SetLike) -> bool:
    """True iff the two pictures denote the same hyperset."""
    return _as_canon(a) == _as_canon(b)


def empty() -> CanonSet:
    return CanonSet(((),))


def omega() -> CanonSet:
    """The Quine atom: the set whose only member is itself."""
    return CanonSet(((0,),))


def from_elements(xs: Iterable[CanonSet]) -> CanonSet:
    """Aggregate sets into one; duplicates collapse by bisimulation."""
    builder = GraphBuilder()
    root = builder.add_node()
    for x in xs:
        builder.add_edge(root, builder.embed(x))
    return builder.canonical(root)


def elements(s: CanonSet) -> list[CanonSet]:
    """Members of s, pairwise non-bisimilar, in canonical child order."""
    return list(s.element_list)


def is_member(a: CanonSet, b: CanonSet) -> bool:
    return a in b.element_set


def is_well_founded(s: CanonSet) -> bool:
    return s.well_founded


def transitive_closure(s: CanonSet) -> list[CanonSet]:
    """Every set reachable by repeated elements(), in canonical node order."""
    reached = set()
    queue = deque(s.succ[0])
    while queue:
        v = queue.popleft()
        if v in reached:
            continue
        reached.add(v)
        queue.extend(s.succ[v])
    return [reroot(s, v) for v in sorted(reached)]


def ordinal(n: int) -> CanonSet:
    """Von Neumann ordinal n = {0, ..., n-1}."""
    if n < 0:
        raise ValueError("ordinal index must be non-negative")
    succ = [list(range(i)) for i in range(n + 1)]
    return _canonical(succ, n, minimal=True)


def is_ordinal(s: CanonSet) -> bool:
    """
    Transitive, linearly ordered by membership, and containing 0 when
    nonempty. The last clause keeps the Quine atom out while admitting
    self-membered solutions such as C = {0, 1, C}.
    """
    members = s.element_list
    if not members:
        return True
    if empty() not in s.element_set:
        return False
    if not all(m.element_set <= s.element_set for m in members):
        return False
    return all(
        a in b.element_set or b in a.element_set
        for a, b in combinations(members, 2)
    )


def replace(s: CanonSet, x: CanonSet, y: CanonSet) -> CanonSet:
    """
    Replace x with y inside s without propagating.

    If s is x the result is y. Otherwise every membership edge that points
    at (the unique node picturing) x is redirected to y; y itself is not
    searched, and whatever sat only below x is dropped. If x does not occur
    in the transitive closure of s the replacement is latent: s comes back.
    """
    if s == x:
        return y
    target = _find_node(s, x)
    if target is None:
        return s
    builder = GraphBuilder()
    for _ in s.succ:
        builder.add_node()
    y_root = builder.embed(y)
    for parent, children in enumerate(s.succ):
        if parent == target:
            continue
        for c in children:
            builder.add_edge(parent, y_root if c == target else c)
    return builder.canonical(0)


def _find_node(s: CanonSet, x: CanonSet) -> Optional[int]:
    for v in range(1, s.size):
        if len(_reachable(s.succ, v)) == x.size and reroot(s, v) == x:
            return v
    return None
