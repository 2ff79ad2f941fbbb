"""Group arithmetic in normal form and Cayley-graph adjacency.

Built-in groups, selected by id:
    z1   the integers, S = {+1, -1}
    z2   the square lattice, S = {+x, -x, +y, -y}
    f2   the free group on a, b, S = {a, a^-1, b, b^-1}

Elements are plain tuples in normal form: integer vectors for the lattices,
reduced words for the free group (letter k > 0 is the k-th generator, -k its
inverse). Neighbors are taken by left multiplication, h = s.g, so
(g, h) is an edge exactly when h g^-1 is in S.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

from shared import MAX_BALL, ResourceError, UsageError

LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class GroupSpec:
    id: str
    kind: str  # "lattice" or "free"
    rank: int
    generators: tuple  # ordered symmetric S
    positive: tuple    # S+: one of each inverse pair, in generator order
    inverse_index: tuple = field(repr=False)  # i -> index of S[i]^-1 in S
    _positive_index: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def identity(self):
        return (0,) * self.rank if self.kind == "lattice" else ()

    # ── validation ───────────────────────────────────────────────────────
    def is_element(self, a):
        if not isinstance(a, tuple):
            return False
        if self.kind == "lattice":
            return len(a) == self.rank and all(isinstance(x, int) for x in a)
        for i, x in enumerate(a):
            if not isinstance(x, int) or x == 0 or abs(x) > self.rank:
                return False
            if i and a[i - 1] == -x:
                return False
        return True

    def validate(self, a):
        if not self.is_element(a):
            raise UsageError(f"{a!r} is not a normal-form element of group {self.id}")
        return a

    # ── arithmetic ───────────────────────────────────────────────────────
    def mul(self, a, b):
        """a.b without validation (hot path)."""
        if self.kind == "lattice":
            return tuple(x + y for x, y in zip(a, b))
        out = list(a)
        for letter in b:
            if out and out[-1] == -letter:
                out.pop()
            else:
                out.append(letter)
        return tuple(out)

    def inv(self, a):
        if self.kind == "lattice":
            return tuple(-x for x in a)
        return tuple(-x for x in reversed(a))

    def multiply(self, a, b):
        self.validate(a)
        self.validate(b)
        return self.mul(a, b)

    def inverse(self, a):
        return self.inv(self.validate(a))

    def length(self, a):
        """Word length |a| with respect to S."""
        if self.kind == "lattice":
            return sum(abs(x) for x in a)
        return len(a)

    def distance(self, a, b):
        """Word distance |b a^-1|; invariant under right translation."""
        return self.length(self.mul(b, self.inv(a)))

    def sort_key(self, g):
        """Total order used everywhere: word length first, then the tuple."""
        return (self.length(g), g)

    def neighbors(self, g):
        """[s.g for s in S], in generator order."""
        return [self.mul(s, g) for s in self.generators]

    def positive_index(self, s):
        """Index of s in S+, or None if s is not a positive generator."""
        return self._positive_index.get(s)

    # ── text ─────────────────────────────────────────────────────────────
    def format(self, a):
        if self.kind == "lattice":
            return " ".join(str(x) for x in a)
        if not a:
            return "e"
        return "".join(LETTERS[x - 1] if x > 0 else LETTERS[-x - 1].upper() for x in a)

    def parse(self, tokens):
        """Inverse of format(); tokens is a list of strings."""
        try:
            if self.kind == "lattice":
                return self.validate(tuple(int(t) for t in tokens))
            (word,) = tokens
            if word == "e":
                return ()
            letters = []
            for ch in word:
                k = LETTERS.index(ch.lower()) + 1
                letters.append(k if ch.islower() else -k)
            return self.validate(tuple(letters))
        except ValueError as e:
            raise UsageError(f"cannot parse {' '.join(tokens)!r} as an element of {self.id}") from e

    @property
    def tokens_per_element(self):
        return self.rank if self.kind == "lattice" else 1


def _build(id, kind, rank):
    generators = []
    if kind == "lattice":
        for axis in range(rank):
            for sign in (1, -1):
                generators.append(tuple(sign if i == axis else 0 for i in range(rank)))
    else:
        for k in range(1, rank + 1):
            generators.extend([(k,), (-k,)])
    # generators come in (s, s^-1) pairs, the first of each pair is positive
    positive = tuple(generators[0::2])
    inverse_index = tuple(i + 1 if i % 2 == 0 else i - 1 for i in range(len(generators)))
    return GroupSpec(
        id=id,
        kind=kind,
        rank=rank,
        generators=tuple(generators),
        positive=positive,
        inverse_index=inverse_index,
        _positive_index={s: i for i, s in enumerate(positive)},
    )


GROUPS = {
    "z1": ("lattice", 1),
    "z2": ("lattice", 2),
    "f2": ("free", 2),
}


@lru_cache(maxsize=None)
def get_group(group_id):
    """GroupSpec for a built-in group id ("z1", "z2", "f2")."""
    if group_id not in GROUPS:
        raise UsageError(f"unknown group {group_id!r} (choose from {', '.join(GROUPS)})")
    kind, rank = GROUPS[group_id]
    return _build(group_id, kind, rank)


# ── Module-level operations ─────────────────────────────────────────────────
def multiply(spec, a, b):
    return spec.multiply(a, b)


def inverse(spec, a):
    return spec.inverse(a)


def cayley_neighbors(spec, g):
    return spec.neighbors(spec.validate(g))


def ball_size(spec, r):
    """Number of elements at word distance <= r, by closed formula."""
    if r < 0:
        return 0
    if spec.kind == "lattice":
        d = spec.rank
        return sum(2**k * comb(d, k) * comb(r, k) for k in range(min(d, r) + 1))
    k = spec.rank
    if k == 1:
        return 2 * r + 1
    return 1 + 2 * k * ((2 * k - 1) ** r - 1) // (2 * k - 2)


@lru_cache(maxsize=64)
def word_ball(spec, r):
    """All elements with |g| <= r, BFS order (by distance, then normal form)."""
    if r < 0:
        raise UsageError(f"radius must be >= 0, got {r}")
    size = ball_size(spec, r)
    if size > MAX_BALL:
        raise ResourceError(f"word ball of radius {r} in {spec.id} has {size:,} elements "
                            f"(guard {MAX_BALL:,})")
    identity = spec.identity
    layers = [[identity]]
    seen = {identity}
    for _ in range(r):
        nxt = set()
        for g in layers[-1]:
            for h in spec.neighbors(g):
                if h not in seen:
                    seen.add(h)
                    nxt.add(h)
        layers.append(sorted(nxt))
    return tuple(g for layer in layers for g in layer)
