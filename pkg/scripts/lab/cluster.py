"""Clusters, re-rooting moves and the rooted-ball ultrametric.

A RootedGraph is a finite connected subgraph of the Cayley graph rooted at
the identity, together with the radius (truncation) up to which it is known
exactly. Clusters cut out of a finite window are only known up to the
window boundary, so every comparison reports whether it stayed inside the
horizon.
"""

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property

from config_space import (
    edge_endpoints,
    edge_lines,
    orbit_related,
    parse_edge_line,
    read_header,
    restrict,
    shift,
    translate_edges,
)
from group import get_group
from shared import HorizonError, UsageError


@dataclass(frozen=True)
class RootedGraph:
    spec: object
    vertices: frozenset
    edges: frozenset
    truncation: int

    def __post_init__(self):
        if self.spec.identity not in self.vertices:
            raise UsageError("rooted graph must contain the identity")
        if self.truncation < 0:
            raise UsageError(f"truncation must be >= 0, got {self.truncation}")
        for e in self.edges:
            a, b = edge_endpoints(self.spec, e)
            if a not in self.vertices or b not in self.vertices:
                raise UsageError(f"edge {e} has an endpoint outside the vertex set")

    def key(self):
        """Labeled vertex/edge sets; what ball comparisons look at."""
        return self.vertices, self.edges

    def sort_key(self):
        spec = self.spec
        return (len(self.vertices), len(self.edges),
                sorted(spec.sort_key(v) for v in self.vertices),
                sorted((spec.sort_key(e.base), e.dir) for e in self.edges))

    @cached_property
    def adjacency(self):
        adj = {v: [] for v in self.vertices}
        for e in self.edges:
            a, b = edge_endpoints(self.spec, e)
            adj[a].append(b)
            adj[b].append(a)
        return adj

    @cached_property
    def distances(self):
        """Graph distance from the root to every vertex."""
        root = self.spec.identity
        dist = {root: 0}
        queue = deque([root])
        adj = self.adjacency
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist


def _ball_sets(H, r):
    dist = H.distances
    vertices = frozenset(v for v, d in dist.items() if d <= r)
    edges = frozenset(e for e in H.edges
                      if all(x in vertices for x in edge_endpoints(H.spec, e)))
    return vertices, edges


def ball(H, r):
    """B_H(1, r): vertices within graph distance r, with the edges between them."""
    if r < 0:
        raise UsageError(f"radius must be >= 0, got {r}")
    if r > H.truncation:
        raise HorizonError(f"ball of radius {r} requested beyond truncation {H.truncation}")
    vertices, edges = _ball_sets(H, r)
    return RootedGraph(H.spec, vertices, edges, r)


def gh_distance(H, K):
    """(exp(-rho), exact): rho is the largest radius where the rooted balls agree.

    exact is False when the balls agree all the way to the shared horizon;
    the value is then only an upper bound.
    """
    horizon = min(H.truncation, K.truncation)
    rho = 0
    for r in range(1, horizon + 1):
        if _ball_sets(H, r) != _ball_sets(K, r):
            break
        rho = r
    return math.exp(-rho), rho < horizon


# ── Clusters in a configuration ─────────────────────────────────────────────
def component(config, g):
    """Vertex set of C_g(w), in the configuration's own frame."""
    if g not in config.window.vertex_set:
        raise UsageError(f"{config.spec.format(g)} lies outside the window")
    adj = config.adjacency
    seen = {g}
    queue = deque([g])
    while queue:
        v = queue.popleft()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def cluster_of(config, g):
    """C_g(w) g^-1 as a RootedGraph, truncated at the window boundary."""
    spec = config.spec
    spec.validate(g)
    vertices = component(config, g)
    edges = [e for e in config.open if e.base in vertices]
    g_inv = spec.inv(g)
    return RootedGraph(
        spec,
        frozenset(spec.mul(v, g_inv) for v in vertices),
        translate_edges(spec, edges, g_inv),
        config.window.radius - config.window.depth(g),
    )


def cluster_size(config, g):
    return len(component(config, g))


def reroot(config, g):
    """The cluster-relation move w -> g.w, allowed only for g in C_1(w)."""
    spec = config.spec
    spec.validate(g)
    if g not in component(config, spec.identity):
        raise UsageError(f"{spec.format(g)} is not in the identity's cluster; "
                         "the move is not in the cluster relation")
    return shift(config, g)


def cluster_related(config, other):
    """Is `other` a re-rooting of `config` by an element of C_1(config)?"""
    related, g = orbit_related(config, other)
    if not related:
        return False
    return g in component(config, config.spec.identity)


def boundary_reach(config, radius=None):
    """Does the identity's cluster touch the window boundary?

    With `radius` the configuration is first restricted to that ball.
    """
    if radius is not None:
        config = restrict(config, radius)
    window = config.window
    return any(window.depth(v) == window.radius
               for v in component(config, config.spec.identity))


# ── Union-find labelling ────────────────────────────────────────────────────
class UnionFind:
    """Union by size with path compression over hashable items."""

    def __init__(self, items):
        self._leader = {s: s for s in items}
        self._size = {s: 1 for s in items}

    def find(self, s):
        path = [s]
        parent = self._leader[s]
        while parent != self._leader[parent]:
            path.append(parent)
            parent = self._leader[parent]
        for a in path:
            self._leader[a] = parent
        return parent

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._leader[rb] = ra
        self._size[ra] += self._size[rb]

    def size(self, s):
        return self._size[self.find(s)]


def cluster_labels(config):
    """UnionFind over the window vertices joined along open edges."""
    uf = UnionFind(config.window.vertices)
    for e in config.open:
        a, b = edge_endpoints(config.spec, e)
        uf.union(a, b)
    return uf


# ── Text format ─────────────────────────────────────────────────────────────
def dump_rooted_graph(H, path):
    spec = H.spec
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# root {spec.format(spec.identity)} truncation {H.truncation} group {spec.id}\n")
        for line in edge_lines(spec, H.edges):
            f.write(line + "\n")


def load_rooted_graph(path):
    with open(path, encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    header = read_header(lines)
    try:
        spec = get_group(header["group"][0])
        truncation = int(header["truncation"][0])
    except (KeyError, IndexError, ValueError) as e:
        raise UsageError(f"{path}: missing or bad '# root ... truncation ... group ...' header") from e
    edges = frozenset(parse_edge_line(spec, line) for line in lines if not line.startswith("#"))
    vertices = {spec.identity}
    for e in edges:
        vertices.update(edge_endpoints(spec, e))
    return RootedGraph(spec, frozenset(vertices), edges, truncation)
