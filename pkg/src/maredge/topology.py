"""Tree-shaped edge network: routers, edge-cloud sites, region servers and terminals.

Node ids are dense non-negative integers.  Routers come first (breadth-first
order from the root), then the relay/server nodes of every metaverse region,
then one terminal node per request.  Terminals hang off their access router
through the radio link, which carries no wired hop cost.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class TopologyError(ValueError):
    """Raised for malformed topology descriptions or unknown node ids."""


@dataclass(frozen=True)
class TopologySpec:
    branching: tuple[int, ...] = (4, 4)
    # explicit router tree; overrides ``branching`` when given
    edges: tuple[tuple[int, int], ...] | None = None
    root: int = 0
    per_hop_ms: float = 2.0
    ec_sites: tuple[int, ...] | None = None
    active_ecs: tuple[int, ...] | None = None
    active_count: int = 6
    # "spread": evenly spaced access-level sites; "random": seeded draw over all sites
    active_rule: str = "spread"
    region_level: int = 1
    region_hops: int = 1
    terminal_routers: tuple[int, ...] = ()


@dataclass(frozen=True)
class MobilityProfile:
    origin: int
    destinations: tuple[tuple[int, float], ...] = ()

    @property
    def total(self) -> float:
        return float(sum(p for _, p in self.destinations))


@dataclass(frozen=True)
class NetworkTopology:
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    root: int
    routers: tuple[int, ...]
    ec_sites: tuple[int, ...]
    ec_nodes: tuple[int, ...]
    access_routers: tuple[int, ...]
    terminal_nodes: tuple[int, ...]
    terminal_router: tuple[int, ...]
    region_servers: tuple[tuple[int, int], ...]
    node_region: tuple[tuple[int, int], ...]
    per_hop_ms: float
    _parent: dict = field(init=False, repr=False, compare=False)
    _depth: dict = field(init=False, repr=False, compare=False)
    _region: dict = field(init=False, repr=False, compare=False)
    _attach: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.per_hop_ms <= 0:
            raise TopologyError("per-hop latency must be positive")
        adjacency = _adjacency(self.nodes, self.edges)
        _check_tree(self.nodes, self.edges, adjacency)
        parent, depth = _bfs_tree(self.root, adjacency)
        attach = dict(zip(self.terminal_nodes, self.terminal_router))
        for t, router in attach.items():
            if router not in self.access_routers:
                raise TopologyError(f"terminal {t} attaches to non-access node {router}")
            if sorted(adjacency[t]) != [router]:
                raise TopologyError(f"terminal {t} must hang off exactly one access router")
        region = dict(self.node_region)
        if set(region) != set(self.nodes):
            raise TopologyError("every node needs exactly one metaverse region")
        object.__setattr__(self, "_parent", parent)
        object.__setattr__(self, "_depth", depth)
        object.__setattr__(self, "_region", region)
        object.__setattr__(self, "_attach", attach)

    # -- queries -----------------------------------------------------------

    def wired_anchor(self, node: int) -> int:
        """Map a terminal onto its access router; other nodes map to themselves."""
        self._check(node)
        return self._attach.get(node, node)

    def hops(self, i: int, j: int) -> int:
        """Wired edge count between ``i`` and ``j`` (terminal radio links are free)."""
        a, b = self.wired_anchor(i), self.wired_anchor(j)
        da, db = self._depth[a], self._depth[b]
        n = 0
        while da > db:
            a, da, n = self._parent[a], da - 1, n + 1
        while db > da:
            b, db, n = self._parent[b], db - 1, n + 1
        while a != b:
            a, b, n = self._parent[a], self._parent[b], n + 2
        return n

    def region_server(self, region: int) -> int:
        for rid, node in self.region_servers:
            if rid == region:
                return node
        raise TopologyError(f"unknown region {region}")

    @property
    def regions(self) -> tuple[int, ...]:
        return tuple(rid for rid, _ in self.region_servers)

    def children(self, node: int) -> list[int]:
        return sorted(n for n, p in self._parent.items() if p == node)

    def parent(self, node: int) -> int | None:
        self._check(node)
        return self._parent.get(node)

    def depth(self, node: int) -> int:
        self._check(node)
        return self._depth[node]

    def _check(self, node: int) -> None:
        if node not in self._depth:
            raise TopologyError(f"unknown node {node}")


def hop_delay(t: NetworkTopology, i: int, j: int) -> float:
    """Wired latency in ms between two nodes."""
    return t.hops(i, j) * t.per_hop_ms


def region_of(t: NetworkTopology, node: int) -> int:
    t._check(node)
    return t._region[node]


def adjacent_access_routers(t: NetworkTopology, node: int) -> list[int]:
    """Neighbouring cells of ``node``: access routers sharing its parent router."""
    node = t.wired_anchor(node)
    if node not in t.access_routers:
        raise TopologyError(f"{node} is not an access router")
    parent = t.parent(node)
    if parent is None:
        return []
    return [c for c in t.children(parent) if c != node and c in t.access_routers]


def mobility_profile(
    t: NetworkTopology,
    origin: int,
    total: float,
    split: str = "uniform",
    rng: np.random.Generator | None = None,
) -> MobilityProfile:
    if not 0.0 <= total <= 1.0:
        raise ValueError("total mobility probability must lie in [0, 1]")
    neighbours = adjacent_access_routers(t, origin)
    if not neighbours or total == 0.0:
        return MobilityProfile(origin, tuple((k, 0.0) for k in neighbours))
    if split == "uniform":
        weights = np.full(len(neighbours), 1.0 / len(neighbours))
    elif split == "random":
        if rng is None:
            raise ValueError("random split needs a random source")
        weights = rng.dirichlet(np.ones(len(neighbours)))
    else:
        raise ValueError(f"unknown mobility split {split!r}")
    probs = [float(total * w) for w in weights]
    return MobilityProfile(origin, tuple(zip(neighbours, probs)))


def build_topology(spec: TopologySpec, seed: int = 0) -> NetworkTopology:
    if spec.per_hop_ms <= 0:
        raise TopologyError("per-hop latency must be positive")
    if spec.edges is not None:
        router_edges = [tuple(map(int, e)) for e in spec.edges]
        routers = sorted({n for e in router_edges for n in e} | {spec.root})
        if any(n < 0 for n in routers):
            raise TopologyError("node ids must be non-negative")
        _check_tree(routers, router_edges, _adjacency(routers, router_edges))
        root = spec.root
    else:
        router_edges, routers = _branching_tree(spec.branching)
        root = 0

    adjacency = _adjacency(routers, router_edges)
    parent, depth = _bfs_tree(root, adjacency)
    leaves = [n for n in routers if n != root and len(adjacency[n]) == 1]
    access = tuple(sorted(leaves)) if leaves else (root,)

    ec_sites = tuple(sorted(spec.ec_sites)) if spec.ec_sites is not None else tuple(
        n for n in routers if n != root
    ) or (root,)
    if not set(ec_sites) <= set(routers):
        raise TopologyError("EC sites must be routers")
    if spec.active_ecs is not None:
        active = tuple(sorted(spec.active_ecs))
        if not set(active) <= set(ec_sites):
            raise TopologyError("activated ECs must be EC sites")
    else:
        if not 1 <= spec.active_count <= len(ec_sites):
            raise TopologyError("active EC count out of range")
        if spec.active_rule == "spread":
            edge_sites = [n for n in ec_sites if n in access]
            pool = edge_sites if len(edge_sites) >= spec.active_count else list(ec_sites)
            picks = np.round(np.linspace(0, len(pool) - 1, spec.active_count)).astype(int)
            active = tuple(sorted(pool[k] for k in picks))
        elif spec.active_rule == "random":
            rng = np.random.default_rng(seed)
            active = tuple(sorted(int(n) for n in rng.choice(ec_sites, spec.active_count, replace=False)))
        else:
            raise TopologyError(f"unknown activation rule {spec.active_rule!r}")
    if len(active) < 1:
        raise TopologyError("at least one EC must be active")

    # metaverse regions: one per subtree rooted at ``region_level``
    region_roots = sorted(n for n in routers if depth[n] == spec.region_level)
    if not region_roots:
        region_roots = [root]
    region_index = {r: k for k, r in enumerate(region_roots)}
    node_region: dict[int, int] = {}
    for n in routers:
        a = n
        while a not in region_index and a != root:
            a = parent[a]
        node_region[n] = region_index.get(a, 0)

    if spec.region_hops < 1:
        raise TopologyError("region servers sit at least one hop from an EC")
    next_id = max(routers) + 1
    edges = list(router_edges)
    region_servers = []
    for rid, anchor in enumerate(region_roots):
        prev = anchor
        for _ in range(spec.region_hops):
            edges.append((prev, next_id))
            node_region[next_id] = rid
            prev = next_id
            next_id += 1
        region_servers.append((rid, prev))

    terminals = []
    for router in spec.terminal_routers:
        if router not in access:
            raise TopologyError(f"terminal attached to non-access node {router}")
        edges.append((router, next_id))
        node_region[next_id] = node_region[router]
        terminals.append(next_id)
        next_id += 1

    nodes = tuple(sorted(node_region))
    return NetworkTopology(
        nodes=nodes,
        edges=tuple(edges),
        root=root,
        routers=tuple(routers),
        ec_sites=ec_sites,
        ec_nodes=active,
        access_routers=access,
        terminal_nodes=tuple(terminals),
        terminal_router=tuple(spec.terminal_routers),
        region_servers=tuple(region_servers),
        node_region=tuple(sorted(node_region.items())),
        per_hop_ms=float(spec.per_hop_ms),
    )


def export_edge_list(t: NetworkTopology) -> str:
    return "".join(f"{i} {j}\n" for i, j in t.edges)


def parse_edge_list(text: str) -> list[tuple[int, int]]:
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TopologyError(f"line {lineno}: expected 'i j'")
        i, j = int(parts[0]), int(parts[1])
        if i < 0 or j < 0:
            raise TopologyError(f"line {lineno}: node ids must be non-negative")
        edges.append((i, j))
    return edges


def _branching_tree(branching: Sequence[int]) -> tuple[list[tuple[int, int]], list[int]]:
    if any(b < 1 for b in branching):
        raise TopologyError("branching factors must be >= 1")
    edges = []
    level = [0]
    next_id = 1
    for b in branching:
        new_level = []
        for p in level:
            for _ in range(b):
                edges.append((p, next_id))
                new_level.append(next_id)
                next_id += 1
        level = new_level
    return edges, list(range(next_id))


def _adjacency(nodes: Iterable[int], edges: Iterable[tuple[int, int]]) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {n: [] for n in nodes}
    for i, j in edges:
        if i not in adj or j not in adj:
            raise TopologyError(f"edge ({i}, {j}) references an unknown node")
        if i == j:
            raise TopologyError(f"self-loop at {i}")
        adj[i].append(j)
        adj[j].append(i)
    return adj


def _check_tree(nodes, edges, adjacency) -> None:
    nodes = list(nodes)
    if len(list(edges)) != len(nodes) - 1:
        raise TopologyError("edge list does not form a tree (|E| != |V| - 1)")
    seen = {nodes[0]}
    queue = deque([nodes[0]])
    while queue:
        n = queue.popleft()
        for m in adjacency[n]:
            if m not in seen:
                seen.add(m)
                queue.append(m)
    if len(seen) != len(nodes):
        raise TopologyError("edge list does not form a tree (disconnected)")


def _bfs_tree(root: int, adjacency: dict[int, list[int]]) -> tuple[dict[int, int], dict[int, int]]:
    parent: dict[int, int] = {}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        n = queue.popleft()
        for m in sorted(adjacency[n]):
            if m not in depth:
                depth[m] = depth[n] + 1
                parent[m] = n
                queue.append(m)
    return parent, depth
