"""Bernoulli bond percolation on finite windows, exact oracles and estimators.

Every sample is a pure function of (window, p, sample_index, master_seed):
the per-sample numpy generator is seeded with a 64-bit mix of the master
seed and the index, so shards can run in any order on any number of
workers and still merge to the same counts.
"""

import math
from dataclasses import dataclass

import numpy as np

from cluster import boundary_reach, cluster_labels, cluster_of, cluster_size, component
from config_space import (
    Configuration,
    canonical_edge,
    exhaustion,
    insert,
    translate_edges,
    window_edges,
)
from repetitive import in_closure, patterns
from shared import (
    MAX_BRUTE_EDGES,
    SCAN_RADIUS,
    ConfigError,
    ResourceError,
    UnstableLibraryError,
    UsageError,
    log,
    run_sharded,
)

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class BernoulliLaw:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class SampleSpec:
    """One Monte Carlo run: n samples on the radius-`radius` window at law p."""

    radius: int
    p: float
    seed: int
    n: int

    def __post_init__(self):
        BernoulliLaw(self.p)
        if self.n < 1:
            raise ConfigError(f"sample count must be >= 1, got {self.n}")
        if self.radius < 0:
            raise ConfigError(f"window radius must be >= 0, got {self.radius}")

    def window(self, spec):
        return window_edges(spec, self.radius)

    def draw(self, window, index):
        return sample(window, self.p, index, self.seed)


@dataclass(frozen=True)
class EstimateRow:
    parameter: int
    estimate: float  # None when the (conditional) denominator is zero
    stderr: float
    n: int

    @classmethod
    def from_counts(cls, parameter, hits, n):
        if n == 0:
            return cls(parameter, None, None, 0)
        est = hits / n
        return cls(parameter, est, math.sqrt(est * (1.0 - est) / n), n)

    @property
    def defined(self):
        return self.estimate is not None


# ── Sampling ────────────────────────────────────────────────────────────────
def mix_seed(master_seed, sample_index):
    """splitmix64 finalizer over the pair; one 64-bit stream seed per sample."""
    z = (master_seed * 0x9E3779B97F4A7C15 + sample_index + 0x632BE59BD9B4E019) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def sample(window, p, sample_index, master_seed):
    """Each edge of E_R open independently with probability p."""
    BernoulliLaw(p)
    rng = np.random.default_rng(mix_seed(master_seed, sample_index))
    edges = window.edges
    mask = rng.random(len(edges)) < p
    return Configuration(window, frozenset(edges[k] for k in np.flatnonzero(mask)))


def cylinder_probability(edges, p):
    """mu(U_F) = p^|F| under the product measure."""
    BernoulliLaw(p)
    return p ** len(edges)


def exhaustion_support(window, p):
    """Cylinder probabilities along the exhaustion F_0 c ... c F_R of the window."""
    return [cylinder_probability(f, p) for f in exhaustion(window)]


# ── Exact oracles ───────────────────────────────────────────────────────────
def _check_brute_size(window):
    if len(window.edges) > MAX_BRUTE_EDGES:
        raise ResourceError(f"window has {len(window.edges)} edges; brute force is limited "
                            f"to {MAX_BRUTE_EDGES}")


def _weights(m, p):
    return [p**k * (1.0 - p) ** (m - k) for k in range(m + 1)]


def brute_force_probability(window, p, event):
    """Sum of p^open (1-p)^closed over all 2^|E_R| configurations satisfying event."""
    BernoulliLaw(p)
    _check_brute_size(window)
    m = len(window.edges)
    weights = _weights(m, p)
    total = 0.0
    for mask in range(1 << m):
        if event(Configuration.from_mask(window, mask)):
            total += weights[bin(mask).count("1")]
    return total


def insertion_image_probability(window, p, edges, event):
    """Exact mu(i_F(B)) for B = {w : event(w)}: the image set is built through insert()."""
    BernoulliLaw(p)
    _check_brute_size(window)
    m = len(window.edges)
    weights = _weights(m, p)
    image = set()
    for mask in range(1 << m):
        config = Configuration.from_mask(window, mask)
        if event(config):
            image.add(insert(config, edges).to_mask())
    return sum(weights[bin(mask).count("1")] for mask in image)


def estimate_event(window, p, event, n, seed):
    """Monte Carlo counterpart of brute_force_probability."""
    run = SampleSpec(window.radius, p, seed, n)

    def task(start, stop):
        return sum(1 for i in range(start, stop) if event(run.draw(window, i)))

    return EstimateRow.from_counts(window.radius, sum(run_sharded(task, run.n)), run.n)


# ── Named events (oracle subcommand and tests) ──────────────────────────────
def _root_edges(spec):
    identity = spec.identity
    return [canonical_edge(spec, identity, s) for s in spec.generators]


def event_isolated(config):
    return cluster_size(config, config.spec.identity) == 1


def event_plus(config):
    """Every edge at the root is open."""
    return config.open.issuperset(_root_edges(config.spec))


def event_vertical_path(config):
    """At the root, only the edges along the last generator pair are open."""
    spec = config.spec
    root_edges = _root_edges(spec)
    vertical = set(root_edges[-2:])
    return all((e in config.open) == (e in vertical) for e in root_edges)


def event_cluster_ge_3(config):
    return cluster_size(config, config.spec.identity) >= 3


def event_boundary(config):
    return boundary_reach(config)


EVENTS = {
    "isolated": event_isolated,
    "plus": event_plus,
    "vertical-path": event_vertical_path,
    "cluster-ge-3": event_cluster_ge_3,
    "boundary": event_boundary,
}


# ── Pattern matching (finite-stage orbit closure membership) ────────────────
def require_stable(library, force=False):
    """The library itself, or UnstableLibraryError when it grew under a doubled scan."""
    if not library.stable:
        if not force:
            raise UnstableLibraryError(
                f"pattern library for {library.model_id} at r={library.r} changed when the scan "
                f"radius was doubled from {library.scan_radius}; raise --scan-radius or pass "
                "--force-unstable")
        log(f"  WARNING: using unstable library for {library.model_id} at r={library.r}")
    return library


def library_for(model, r, scan_radius=None, force=False):
    """Stable pattern library at radius r, or UnstableLibraryError."""
    scan_radius = max(SCAN_RADIUS if scan_radius is None else scan_radius, r)
    return require_stable(patterns(model, r, scan_radius), force)


def match_counts(model, radii, p, n, seed, condition_radius=None, scan_radius=None,
                 force=False, libraries=None):
    """(hits per radius, denominator) with every radius evaluated on every sample.

    `libraries`, when given, are saved libraries (one per radius) used instead
    of scanning the model again.
    """
    spec = model.spec
    run = SampleSpec(max(max(radii), condition_radius or 0), p, seed, n)
    if libraries is None:
        scan_radius = max(SCAN_RADIUS if scan_radius is None else scan_radius, max(radii))
        libraries = [library_for(model, r, scan_radius, force) for r in radii]
    else:
        if [lib.r for lib in libraries] != list(radii):
            raise UsageError(f"library radii {[lib.r for lib in libraries]} do not match {list(radii)}")
        for lib in libraries:
            if lib.model_id != model.id:
                raise UsageError(f"library at r={lib.r} was built for {lib.model_id}, not {model.id}")
        libraries = [require_stable(lib, force) for lib in libraries]
    window = run.window(spec)

    def task(start, stop):
        hits = [0] * len(radii)
        counted = 0
        for i in range(start, stop):
            config = run.draw(window, i)
            if condition_radius is not None and not boundary_reach(config, condition_radius):
                continue
            counted += 1
            K = cluster_of(config, spec.identity)
            for j, library in enumerate(libraries):
                if in_closure(K, library):
                    hits[j] += 1
        return hits, counted

    hits = [0] * len(radii)
    counted = 0
    for shard_hits, shard_counted in run_sharded(task, run.n):
        hits = [a + b for a, b in zip(hits, shard_hits)]
        counted += shard_counted
    return hits, counted


def match_probability(model, r, p, n, seed, condition_radius=None, scan_radius=None,
                      force=False):
    """Fraction of samples whose root-cluster r-ball is a pattern of the model."""
    hits, counted = match_counts(model, [r], p, n, seed, condition_radius, scan_radius, force)
    return EstimateRow.from_counts(r, hits[0], counted)


# ── Saturation of a cylinder under the cluster relation ─────────────────────
def _reach(spec, edges):
    return max((spec.length(x) for e in edges
                for x in (e.base, spec.mul(spec.positive[e.dir], e.base))), default=0)


def _check_saturation_window(config, edges, R):
    spec = config.spec
    if config.window.center != spec.identity:
        raise UsageError("saturation is defined on windows centered at the identity")
    need = R + _reach(spec, edges)
    if config.window.radius < need:
        raise UsageError(f"window radius {config.window.radius} too small: translates of F "
                         f"by |g| <= {R} need radius {need}")


def saturation_member(config, edges, R):
    """Is there g in C_1(w) with |g| <= R and F.g contained in w (i.e. g.w in U_F)?"""
    _check_saturation_window(config, edges, R)
    spec = config.spec
    return any(spec.length(g) <= R and config.open.issuperset(translate_edges(spec, edges, g))
               for g in component(config, spec.identity))


def saturation_depth(config, edges, R_max):
    """Smallest |g| over the witnesses g of saturation_member, or None beyond R_max."""
    _check_saturation_window(config, edges, R_max)
    spec = config.spec
    best = None
    for g in component(config, spec.identity):
        depth = spec.length(g)
        if depth > R_max or (best is not None and depth >= best):
            continue
        if config.open.issuperset(translate_edges(spec, edges, g)):
            best = depth
    return best


def origin_edge(spec):
    """The edge from the identity along the first positive generator."""
    return frozenset({canonical_edge(spec, spec.identity, spec.positive[0])})


def saturation_counts(spec, radii, p, n, seed, edges=None, condition_radius=None):
    """(hits per R, denominator); one saturation depth per sample serves every R."""
    edges = origin_edge(spec) if edges is None else frozenset(edges)
    R_max = max(radii)
    run = SampleSpec(max(R_max + _reach(spec, edges), condition_radius or 0), p, seed, n)
    window = run.window(spec)

    def task(start, stop):
        hits = [0] * len(radii)
        counted = 0
        for i in range(start, stop):
            config = run.draw(window, i)
            if condition_radius is not None and not boundary_reach(config, condition_radius):
                continue
            counted += 1
            depth = saturation_depth(config, edges, R_max)
            if depth is None:
                continue
            for j, R in enumerate(radii):
                if depth <= R:
                    hits[j] += 1
        return hits, counted

    hits = [0] * len(radii)
    counted = 0
    for shard_hits, shard_counted in run_sharded(task, run.n):
        hits = [a + b for a, b in zip(hits, shard_hits)]
        counted += shard_counted
    return hits, counted


def sample_stats(window, p, index, seed):
    """Row for the `sample` subcommand."""
    config = sample(window, p, index, seed)
    identity = window.spec.identity
    labels = cluster_labels(config)
    return {
        "index": index,
        "open_edges": len(config.open),
        "cluster_size": labels.size(identity),
        "boundary_reach": int(boundary_reach(config)),
        "root_degree": sum(1 for e in _root_edges(window.spec) if e in config.open),
        "clusters": len({labels.find(v) for v in window.vertices}),
    }
