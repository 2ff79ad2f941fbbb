"""Repetitive subgraphs of the square lattice and their pattern libraries.

A SubgraphModel is an infinite spanning subgraph H of the z2 Cayley graph,
given by an edge oracle. Its orbit closure is only ever seen at finite
stage: the PatternLibrary at radius r is the set of rooted r-balls of H
seen from every vertex of a scan window, each translated so the root is the
identity.

Model ids:
    full                              the whole Cayley graph
    even-rows                         vertical edges, horizontal edges on even rows
    periodic:bx1,by1;bx2,by2;FILE     period lattice + motif edge list
    fib-fence                         Sturmian fence for alpha = (sqrt5 - 1)/2
    sturmian:u,v,d,w                  Sturmian fence for alpha = (u + v sqrt d)/w
"""

import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import isqrt

from cluster import RootedGraph, UnionFind, ball, dump_rooted_graph, load_rooted_graph
from config_space import Configuration, EdgeId, parse_edge_line, window_edges
from group import get_group, word_ball
from shared import (
    HorizonError,
    UsageError,
    ensure_dir,
    log,
    read_json,
    run_sharded,
    write_json,
)

Z2 = get_group("z2")
HORIZONTAL, VERTICAL = 0, 1


# ── Models ──────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class SubgraphModel:
    id: str

    spec = Z2

    def is_edge(self, e):
        raise NotImplementedError

    @property
    def period_index(self):
        """Index of the period lattice, or None for non-periodic models."""
        return None


@dataclass(frozen=True)
class FullModel(SubgraphModel):
    id: str = "full"

    def is_edge(self, e):
        return True

    @property
    def period_index(self):
        return 1


def _hermite(b1, b2):
    """Row Hermite form ((g, h12), (0, h22)) of the lattice spanned by b1, b2."""
    (p, q), (r, s) = b1, b2
    det = p * s - q * r
    if det == 0:
        raise UsageError(f"period vectors {b1} and {b2} do not span a finite-index sublattice")
    g, u, v = _ext_gcd(p, r)
    h22 = abs(det) // g
    h12 = (u * q + v * s) % h22
    return g, h12, h22


def _ext_gcd(a, b):
    """(g, u, v) with u a + v b = g = gcd(a, b) >= 0."""
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, u, v = _ext_gcd(b, a % b)
    return g, v, u - (a // b) * v


@dataclass(frozen=True)
class PeriodicModel(SubgraphModel):
    basis: tuple = ((1, 0), (0, 1))
    motif: frozenset = frozenset()
    hermite: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hermite", _hermite(*self.basis))
        for base, d in self.motif:
            if d not in (HORIZONTAL, VERTICAL):
                raise UsageError(f"motif direction {d} is not 0 (horizontal) or 1 (vertical)")
            if self.reduce(base) != base:
                raise UsageError(f"motif edge at {base} is not in the fundamental domain "
                                 f"{self.fundamental_domain_shape}")

    @property
    def fundamental_domain_shape(self):
        g, _, h22 = self.hermite
        return g, h22

    @property
    def period_index(self):
        g, _, h22 = self.hermite
        return g * h22

    def reduce(self, v):
        """Canonical representative of v modulo the period lattice."""
        g, h12, h22 = self.hermite
        x, y = v
        k = x // g
        return (x - k * g, (y - k * h12) % h22)

    def is_edge(self, e):
        return (self.reduce(e.base), e.dir) in self.motif


def even_rows():
    motif = frozenset({((0, 0), HORIZONTAL), ((0, 0), VERTICAL), ((0, 1), VERTICAL)})
    return PeriodicModel("even-rows", ((1, 0), (0, 2)), motif)


def periodic_from_file(model_id, basis, path):
    """Motif from an edge-list file; every edge is reduced into the fundamental domain."""
    if not os.path.exists(path):
        raise UsageError(f"motif file not found: {path}")
    with open(path, encoding="utf-8") as f:
        edges = [parse_edge_line(Z2, line) for line in f
                 if line.strip() and not line.startswith("#")]
    frame = PeriodicModel(model_id, basis, frozenset())
    motif = frozenset((frame.reduce(e.base), e.dir) for e in edges)
    model = PeriodicModel(model_id, basis, motif)
    # a box spanning a few fundamental domains in each direction
    half_width = 2 * max(model.fundamental_domain_shape) + 2
    if not model_is_connected(model, half_width):
        raise UsageError(f"motif in {path} does not give a connected subgraph of z2 "
                         f"(checked on [-{half_width}, {half_width}]^2)")
    return model


@lru_cache(maxsize=1 << 16)
def floor_times_alpha(n, u, v, d, w):
    """floor(n (u + v sqrt d) / w), exactly."""
    b = n * v
    root = isqrt(b * b * d)
    floor_b_sqrt_d = root if b >= 0 else -root - 1
    return (n * u + floor_b_sqrt_d) // w


@dataclass(frozen=True)
class SturmianFence(SubgraphModel):
    """All vertical edges; row y keeps its horizontal edges iff s(y) = 1."""
    alpha: tuple = (-1, 1, 5, 2)  # (u, v, d, w): alpha = (u + v sqrt d) / w

    def __post_init__(self):
        u, v, d, w = self.alpha
        if w <= 0 or v == 0 or d <= 1 or isqrt(d) ** 2 == d:
            raise UsageError(f"alpha parameters {self.alpha} do not define a quadratic irrational")
        value = (u + v * d ** 0.5) / w
        if not 0 < value < 1:
            raise UsageError(f"alpha = {value:.6f} must lie in (0, 1)")

    def letter(self, y):
        """s(y) = floor((y + 1) alpha) - floor(y alpha)."""
        return floor_times_alpha(y + 1, *self.alpha) - floor_times_alpha(y, *self.alpha)

    def is_edge(self, e):
        if e.dir == VERTICAL:
            return True
        return self.letter(e.base[1]) == 1


def fib_fence():
    return SturmianFence("fib-fence")


def parse_model(model_id):
    """SubgraphModel from its id string."""
    if model_id == "full":
        return FullModel()
    if model_id == "even-rows":
        return even_rows()
    if model_id == "fib-fence":
        return fib_fence()
    try:
        if model_id.startswith("sturmian:"):
            u, v, d, w = (int(t) for t in model_id.split(":", 1)[1].split(","))
            return SturmianFence(model_id, (u, v, d, w))
        if model_id.startswith("periodic:"):
            b1, b2, path = model_id.split(":", 1)[1].split(";")
            basis = tuple(tuple(int(t) for t in b.split(",")) for b in (b1, b2))
            if any(len(b) != 2 for b in basis):
                raise ValueError(model_id)
            return periodic_from_file(model_id, basis, path)
    except ValueError as e:
        raise UsageError(f"cannot parse model id {model_id!r}") from e
    raise UsageError(f"unknown model {model_id!r} (full, even-rows, fib-fence, "
                     "periodic:bx1,by1;bx2,by2;FILE, sturmian:u,v,d,w)")


# ── Sturmian words ──────────────────────────────────────────────────────────
def sturmian_letters(model, start, length):
    return [model.letter(y) for y in range(start, start + length)]


def factor_counts(letters, n_max):
    """{n: number of distinct length-n factors} for n = 1..n_max."""
    word = "".join(str(c) for c in letters)
    return {n: len({word[i:i + n] for i in range(len(word) - n + 1)})
            for n in range(1, n_max + 1)}


# ── Local structure ─────────────────────────────────────────────────────────
def model_neighbors(model, v):
    """Neighbors of v in H, in generator order."""
    spec = model.spec
    out = []
    for j, s in enumerate(spec.generators):
        w = spec.mul(s, v)
        # generators alternate s, s^-1: even j leaves from v, odd j arrives at v
        e = EdgeId(v, j // 2) if j % 2 == 0 else EdgeId(w, j // 2)
        if model.is_edge(e):
            out.append(w)
    return out


def local_ball(model, g, r):
    """B_{g.H}(1, r): the r-ball of H around g, translated so g sits at the identity."""
    spec = model.spec
    spec.validate(g)
    dist = {g: 0}
    queue = deque([g])
    while queue:
        v = queue.popleft()
        if dist[v] == r:
            continue
        for w in model_neighbors(model, v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    g_inv = spec.inv(g)
    edges = set()
    for v in dist:
        for i, s in enumerate(spec.positive):
            w = spec.mul(s, v)
            e = EdgeId(v, i)
            if w in dist and model.is_edge(e):
                edges.add(EdgeId(spec.mul(v, g_inv), i))
    return RootedGraph(spec, frozenset(spec.mul(v, g_inv) for v in dist), frozenset(edges), r)


@dataclass(frozen=True)
class PatternLibrary:
    model_id: str
    r: int
    patterns: tuple       # RootedGraphs, sorted
    counts: tuple         # occurrences of each pattern in the scan window
    scan_radius: int
    stable: bool

    @cached_property
    def keys(self):
        return frozenset(p.key() for p in self.patterns)

    def __len__(self):
        return len(self.patterns)


def _scan(model, r, centers):
    """key -> [first center index, pattern, count] over the given centers."""
    def task(start, stop):
        found = {}
        for k in range(start, stop):
            pattern = local_ball(model, centers[k], r)
            key = pattern.key()
            if key in found:
                found[key][2] += 1
            else:
                found[key] = [k, pattern, 1]
        return found

    merged = {}
    for found in run_sharded(task, len(centers)):
        for key, (k, pattern, count) in found.items():
            if key in merged:
                merged[key][0] = min(merged[key][0], k)
                merged[key][2] += count
            else:
                merged[key] = [k, pattern, count]
    return merged


def patterns(model, r, scan_radius, check_stability=True):
    """The radius-r pattern library of H seen from every g in word_ball(scan_radius).

    With check_stability the scan runs over the doubled ball; the library is
    stable when no pattern first appears outside the original ball.
    """
    if r < 0 or scan_radius < r:
        raise UsageError(f"need 0 <= r <= scan_radius, got r={r}, scan_radius={scan_radius}")
    inner = word_ball(model.spec, scan_radius)
    centers = word_ball(model.spec, 2 * scan_radius) if check_stability else inner
    merged = _scan(model, r, centers)

    limit = len(inner)
    kept = [(pattern, count) for k, pattern, count in merged.values() if k < limit]
    kept.sort(key=lambda pc: pc[0].sort_key())
    stable = all(k < limit for k, _, _ in merged.values()) if check_stability else False
    return PatternLibrary(
        model_id=model.id,
        r=r,
        patterns=tuple(p for p, _ in kept),
        counts=tuple(c for _, c in kept),
        scan_radius=scan_radius,
        stable=stable,
    )


def in_closure(K, library):
    """Does the r-ball of K appear among the library patterns?"""
    if K.truncation < library.r:
        raise HorizonError(f"graph known to radius {K.truncation}, library needs {library.r}")
    return ball(K, library.r).key() in library.keys


def is_repetitive(model, r, R, scan_radius):
    """(ok, witness): does every center see every r-pattern within H-distance R?

    witness is (missing pattern, center) for the first failing center.
    """
    if scan_radius < R + r:
        raise UsageError(f"scan radius {scan_radius} must be at least R + r = {R + r}")
    library = patterns(model, r, scan_radius, check_stability=False)
    index = {p.key(): i for i, p in enumerate(library.patterns)}
    wanted = len(index)
    seen_at = {}

    def pattern_at(h):
        if h not in seen_at:
            seen_at[h] = index.get(local_ball(model, h, r).key())
        return seen_at[h]

    for g in word_ball(model.spec, scan_radius - R):
        found = {pattern_at(g)}
        dist = {g: 0}
        queue = deque([g])
        while queue and len(found) < wanted:
            v = queue.popleft()
            if dist[v] == R:
                continue
            for w in model_neighbors(model, v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                    found.add(pattern_at(w))
        if len(found - {None}) < wanted:
            missing = next(i for i in range(wanted) if i not in found)
            return False, (library.patterns[missing], g)
    return True, None


def is_proper(model, scan_radius):
    """Is some Cayley-graph edge of the scan window missing from H?"""
    return any(not model.is_edge(e) for e in window_edges(model.spec, scan_radius).edges)


def model_is_connected(model, half_width):
    """Is H restricted to the box [-n, n]^2 connected?"""
    n = half_width
    vertices = [(x, y) for x in range(-n, n + 1) for y in range(-n, n + 1)]
    vertex_set = set(vertices)
    open_edges = []
    for v in vertices:
        for i, s in enumerate(model.spec.positive):
            w = model.spec.mul(s, v)
            e = EdgeId(v, i)
            if w in vertex_set and model.is_edge(e):
                open_edges.append(e)
    uf = UnionFind(vertices)
    for e in open_edges:
        uf.union(e.base, model.spec.mul(model.spec.positive[e.dir], e.base))
    return uf.size((0, 0)) == len(vertices)


def model_window(model, radius):
    """H restricted to the radius-`radius` window, as a Configuration."""
    window = window_edges(model.spec, radius)
    return Configuration(window, frozenset(e for e in window.edges if model.is_edge(e)))


# ── Library directories ─────────────────────────────────────────────────────
def save_library(library, directory):
    """pattern_<k>.txt edge lists plus manifest.json."""
    ensure_dir(directory)
    files = []
    for k, pattern in enumerate(library.patterns):
        name = f"pattern_{k:04d}.txt"
        dump_rooted_graph(pattern, os.path.join(directory, name))
        files.append(name)
    write_json(os.path.join(directory, "manifest.json"), {
        "model": library.model_id,
        "r": library.r,
        "scan_radius": library.scan_radius,
        "stable": library.stable,
        "count": len(files),
        "counts": list(library.counts),
        "files": files,
    })
    log(f"  Saved {len(files)} patterns to {directory}")


def load_library(directory):
    manifest_path = os.path.join(directory, "manifest.json")
    if not os.path.exists(manifest_path):
        raise UsageError(f"no manifest.json in {directory}")
    manifest = read_json(manifest_path)
    loaded = tuple(load_rooted_graph(os.path.join(directory, name)) for name in manifest["files"])
    for pattern in loaded:
        if pattern.truncation != manifest["r"]:
            raise UsageError(f"{directory}: pattern truncation {pattern.truncation} != r {manifest['r']}")
    return PatternLibrary(
        model_id=manifest["model"],
        r=manifest["r"],
        patterns=loaded,
        counts=tuple(manifest.get("counts", [0] * len(loaded))),
        scan_radius=manifest["scan_radius"],
        stable=manifest["stable"],
    )

