"""Finite windows of the configuration space 2^E.

An edge {g, s.g} is stored once, as EdgeId(base, dir) with S+[dir].base at
the other end. A Window is the set E_R of edges with both endpoints in the
ball of radius R around its center; a Configuration is the subset of
Window edges that are open. The group acts by g.w = w g^-1 (right
translation of every edge, window included).

Edge-list text format (dump/load): one edge per line, the two endpoints
written one after the other ("x1 y1 x2 y2" on z2, "word1 word2" on f2).
Lines starting with '#' are headers/comments.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple

from group import get_group, word_ball
from shared import UsageError


class EdgeId(NamedTuple):
    base: tuple
    dir: int


def edge_endpoints(spec, e):
    return e.base, spec.mul(spec.positive[e.dir], e.base)


def canonical_edge(spec, a, b):
    """The EdgeId of {a, b}; same result for (a, b) and (b, a)."""
    spec.validate(a)
    spec.validate(b)
    s = spec.mul(b, spec.inv(a))
    i = spec.positive_index(s)
    if i is not None:
        return EdgeId(a, i)
    i = spec.positive_index(spec.inv(s))
    if i is not None:
        return EdgeId(b, i)
    raise UsageError(f"{spec.format(a)} and {spec.format(b)} are not adjacent in {spec.id}")


def translate_edges(spec, edges, g):
    """Right translation F.g of an edge set."""
    return frozenset(EdgeId(spec.mul(e.base, g), e.dir) for e in edges)


# ── Windows ─────────────────────────────────────────────────────────────────
@lru_cache(maxsize=256)
def _window_data(spec, radius, center):
    vertices = tuple(spec.mul(g, center) for g in word_ball(spec, radius))
    vertex_set = frozenset(vertices)
    edges = []
    endpoints = []
    for v in vertices:
        for i, s in enumerate(spec.positive):
            w = spec.mul(s, v)
            if w in vertex_set:
                edges.append(EdgeId(v, i))
                endpoints.append((v, w))
    edges = tuple(edges)
    return vertices, vertex_set, edges, {e: k for k, e in enumerate(edges)}, tuple(endpoints)


@dataclass(frozen=True)
class Window:
    spec: object
    radius: int
    center: tuple

    @property
    def vertices(self):
        """Ball vertices, ordered by distance from the center."""
        return _window_data(self.spec, self.radius, self.center)[0]

    @property
    def vertex_set(self):
        return _window_data(self.spec, self.radius, self.center)[1]

    @property
    def edges(self):
        """E_R in its deterministic order."""
        return _window_data(self.spec, self.radius, self.center)[2]

    @property
    def edge_index(self):
        return _window_data(self.spec, self.radius, self.center)[3]

    @property
    def endpoints(self):
        return _window_data(self.spec, self.radius, self.center)[4]

    def __len__(self):
        return len(self.edges)

    def contains_edges(self, edges):
        index = self.edge_index
        return all(e in index for e in edges)

    def depth(self, g):
        """Word distance of g from the window center."""
        return self.spec.distance(self.center, g)


def window_edges(spec, radius, center=None):
    """The Window of radius `radius` (around the identity unless given)."""
    if radius < 0:
        raise UsageError(f"window radius must be >= 0, got {radius}")
    center = spec.identity if center is None else spec.validate(center)
    window = Window(spec, radius, center)
    _window_data(spec, radius, center)  # enumerate now so guards fire here
    return window


# ── Configurations ──────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Configuration:
    window: Window
    open: frozenset

    @classmethod
    def empty(cls, window):
        return cls(window, frozenset())

    @classmethod
    def full(cls, window):
        return cls(window, frozenset(window.edges))

    @classmethod
    def from_edges(cls, window, edges):
        edges = frozenset(edges)
        if not window.contains_edges(edges):
            raise UsageError("configuration has edges outside its window")
        return cls(window, edges)

    @classmethod
    def from_mask(cls, window, mask):
        """Open set from an int bitmask over window.edges (bit k = edge k)."""
        edges = window.edges
        return cls(window, frozenset(edges[k] for k in range(len(edges)) if mask >> k & 1))

    def to_mask(self):
        index = self.window.edge_index
        mask = 0
        for e in self.open:
            mask |= 1 << index[e]
        return mask

    @property
    def spec(self):
        return self.window.spec

    @cached_property
    def adjacency(self):
        """vertex -> neighbors through open edges."""
        spec = self.window.spec
        index = self.window.edge_index
        endpoints = self.window.endpoints
        adj = {}
        for e in self.open:
            k = index.get(e)
            a, b = endpoints[k] if k is not None else edge_endpoints(spec, e)
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        return adj


def shift(config, g):
    """g.w = w g^-1: every open edge and the window move by g^-1 on the right."""
    spec = config.spec
    spec.validate(g)
    g_inv = spec.inv(g)
    window = Window(spec, config.window.radius, spec.mul(config.window.center, g_inv))
    return Configuration(window, translate_edges(spec, config.open, g_inv))


def insert(config, edges):
    """i_F(w) = w u F."""
    edges = frozenset(edges)
    if not config.window.contains_edges(edges):
        raise UsageError("inserted edges lie outside the configuration window; extend the window first")
    return Configuration(config.window, config.open | edges)


def cylinder_contains(config, edges):
    """Is w in the cylinder U_F, i.e. F contained in w?"""
    return config.open.issuperset(edges)


def restrict(config, radius):
    """The configuration seen through the radius-`radius` ball around its center."""
    if radius > config.window.radius:
        raise UsageError(f"cannot restrict a radius-{config.window.radius} window to radius {radius}")
    window = window_edges(config.spec, radius, config.window.center)
    index = window.edge_index
    return Configuration(window, frozenset(e for e in config.open if e in index))


def exhaustion(window):
    """F_0 c F_1 c ... c F_R: edge sets of the radius-n sub-windows."""
    return [frozenset(window_edges(window.spec, n, window.center).edges)
            for n in range(window.radius + 1)]


def orbit_related(config, other):
    """(related, g): other == shift(config, g) for the g fixed by the window centers."""
    if config.spec != other.spec or config.window.radius != other.window.radius:
        return False, None
    spec = config.spec
    g = spec.mul(spec.inv(other.window.center), config.window.center)
    return shift(config, g).open == other.open, g


# ── Edge-list text format ───────────────────────────────────────────────────
HEADER_KEYS = ("group", "radius", "center", "root", "truncation")


def edge_lines(spec, edges):
    """Edge-list lines, sorted by (base, dir) in the group's total order."""
    lines = []
    for e in sorted(edges, key=lambda e: (spec.sort_key(e.base), e.dir)):
        a, b = edge_endpoints(spec, e)
        lines.append(f"{spec.format(a)} {spec.format(b)}")
    return lines


def parse_edge_line(spec, line):
    tokens = line.split()
    k = spec.tokens_per_element
    if len(tokens) != 2 * k:
        raise UsageError(f"bad edge line {line!r} for group {spec.id}")
    return canonical_edge(spec, spec.parse(tokens[:k]), spec.parse(tokens[k:]))


def read_header(lines):
    """'# key value key value ...' header line -> dict of raw strings."""
    for line in lines:
        if line.startswith("#"):
            tokens = line[1:].split()
            out = {}
            key = None
            for t in tokens:
                if t in HEADER_KEYS:
                    key = t
                    out[key] = []
                elif key is not None:
                    out[key].append(t)
            return out
    return {}


def dump_configuration(config, path):
    spec = config.spec
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# group {spec.id} radius {config.window.radius} "
                f"center {spec.format(config.window.center)}\n")
        for line in edge_lines(spec, config.open):
            f.write(line + "\n")


def load_configuration(path):
    with open(path, encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    header = read_header(lines)
    try:
        spec = get_group(header["group"][0])
        radius = int(header["radius"][0])
        center = spec.parse(header["center"])
    except (KeyError, IndexError, ValueError) as e:
        raise UsageError(f"{path}: missing or bad '# group ... radius ... center ...' header") from e
    window = window_edges(spec, radius, center)
    edges = [parse_edge_line(spec, line) for line in lines if not line.startswith("#")]
    return Configuration.from_edges(window, edges)
