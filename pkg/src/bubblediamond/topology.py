"""Bubble-diamond graph approximations G_l.

Points of V_* are named by addresses ``F_w(q_a)``: a word ``w`` over the copy
indices ``1..b+2`` (outermost map first) and a boundary anchor ``a`` in
``{1, 2}``.  Copies ``1..b`` are the bubble copies joining the two junction
points, copy ``b+1`` contains ``q1`` and copy ``b+2`` contains ``q2``.

The gluing identifies

    F_{b+1}(q1) = q1,   F_{b+2}(q2) = q2,
    F_i(q1) = F_{b+1}(q2),   F_i(q2) = F_{b+2}(q1)   (i <= b),

inside any prefix.  The canonical address of a point uses the shortest word;
junction points are written through the spine copies, ``w.(b+1):q2`` and
``w.(b+2):q1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple

from ._rational import frac_str

Q1, Q2 = 1, 2


class Address(NamedTuple):
    word: tuple[int, ...]
    anchor: int

    def __str__(self) -> str:
        return ".".join(map(str, self.word)) + f":q{self.anchor}"

    @classmethod
    def parse(cls, text: str) -> "Address":
        """Inverse of ``str``: ``"3.1.2:q1"``, ``":q2"``."""
        try:
            word_part, anchor_part = text.rsplit(":", 1)
            if anchor_part not in ("q1", "q2"):
                raise ValueError
            word = tuple(int(t) for t in word_part.split(".")) if word_part else ()
        except ValueError:
            raise ValueError(f"malformed vertex address {text!r}") from None
        return cls(word, int(anchor_part[1]))


def check_branching(b) -> int:
    if isinstance(b, bool) or not isinstance(b, int) or b < 1:
        raise ValueError(f"branching parameter must be a positive integer, got {b!r}")
    return b


def canonicalize(addr: Address, b: int) -> Address:
    """Return the canonical representative of the point named by *addr*."""
    check_branching(b)
    word, anchor = tuple(addr.word), addr.anchor
    if anchor not in (Q1, Q2):
        raise ValueError(f"anchor must be 1 or 2, got {anchor!r}")
    for letter in word:
        if not 1 <= letter <= b + 2:
            raise ValueError(f"copy index {letter} out of range 1..{b + 2}")
    w = list(word)
    while w and ((w[-1] == b + 1 and anchor == Q1) or (w[-1] == b + 2 and anchor == Q2)):
        w.pop()
    if w and w[-1] <= b:
        if anchor == Q1:
            w[-1], anchor = b + 1, Q2
        else:
            w[-1], anchor = b + 2, Q1
    return Address(tuple(w), anchor)


def mirror(addr: Address, b: int) -> Address:
    """Image under the reflection exchanging q1 and q2 (copies b+1 and b+2 swap)."""
    swap = {b + 1: b + 2, b + 2: b + 1}
    return canonicalize(Address(tuple(swap.get(i, i) for i in addr.word), 3 - addr.anchor), b)


def vertex_count(b: int, level: int) -> int:
    return 2 + 2 * ((b + 2) ** level - 1) // (b + 1)


def _children(b: int, word: tuple[int, ...], ends: tuple[Address, Address]):
    """Sub-cells of the cell ``word`` in copy order 1..b+2, with their boundary pairs."""
    left = Address(word + (b + 1,), Q2)
    right = Address(word + (b + 2,), Q1)
    for i in range(1, b + 1):
        yield word + (i,), (left, right)
    yield word + (b + 1,), (ends[0], left)
    yield word + (b + 2,), (right, ends[1])


def iter_cells(b: int, level: int):
    """All level-``level`` cells as ``(word, (end1, end2))``, in lexicographic word order."""
    cells = [((), (Address((), Q1), Address((), Q2)))]
    for _ in range(level):
        cells = [child for w, ends in cells for child in _children(b, w, ends)]
    return cells


@dataclass(frozen=True, eq=False)
class GraphLevel:
    """The graph G_l.  Immutable; vertices are sorted canonical addresses."""

    b: int
    level: int
    vertices: tuple[Address, ...]
    cells: tuple[tuple[tuple[int, ...], tuple[int, int]], ...]
    edges: dict  # (i, j) with i < j  ->  multiplicity

    @cached_property
    def index(self) -> dict[Address, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def boundary(self) -> tuple[int, int]:
        return self.index[Address((), Q1)], self.index[Address((), Q2)]

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex: ``(neighbor, multiplicity)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for (i, j), mult in self.edges.items():
            adj[i].append((j, mult))
            adj[j].append((i, mult))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sum(m for _, m in nb) for nb in self.neighbors)

    @cached_property
    def cell_counts(self) -> tuple[int, ...]:
        counts = [0] * len(self.vertices)
        for _, (i, j) in self.cells:
            counts[i] += 1
            counts[j] += 1
        return tuple(counts)

    @cached_property
    def weights(self) -> tuple[Fraction, ...]:
        den = 2 * (self.b + 2) ** self.level
        return tuple(Fraction(c, den) for c in self.cell_counts)

    @cached_property
    def coords(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(vertex_coords(v, self.b) for v in self.vertices)

    def interior(self) -> list[int]:
        bd = set(self.boundary)
        return [i for i in range(len(self.vertices)) if i not in bd]

    def __len__(self) -> int:
        return len(self.vertices)


def build_graph(b: int, level: int) -> GraphLevel:
    """Construct G_level for branching parameter *b*."""
    check_branching(b)
    if isinstance(level, bool) or not isinstance(level, int) or level < 0:
        raise ValueError(f"level must be a non-negative integer, got {level!r}")
    raw_cells = iter_cells(b, level)
    verts = set()
    for _, (x, y) in raw_cells:
        verts.add(x)
        verts.add(y)
    vertices = tuple(sorted(verts))
    index = {v: i for i, v in enumerate(vertices)}
    cells = []
    edges: dict[tuple[int, int], int] = {}
    for w, (x, y) in raw_cells:
        i, j = index[x], index[y]
        cells.append((w, (i, j)))
        key = (i, j) if i < j else (j, i)
        edges[key] = edges.get(key, 0) + 1
    g = GraphLevel(b, level, vertices, tuple(cells), edges)
    g.__dict__["index"] = index
    return g


def measure_weights(g: GraphLevel) -> dict[Address, Fraction]:
    """Vertex masses c(x) / (2 (b+2)^l): the integrals of the level-l tent functions."""
    return dict(zip(g.vertices, g.weights))


# -- planar layout -----------------------------------------------------------

def _apply_copy(i: int, b: int, x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
    third = Fraction(1, 3)
    half = Fraction(1, 2)
    if i == b + 1:
        return x * third, half + (y - half) * third
    if i == b + 2:
        return 2 * third + x * third, half + (y - half) * third
    centre = half + (i - Fraction(b + 1, 2)) / b
    return third + x * third, centre + (y - half) / b


def vertex_coords(addr: Address, b: int) -> tuple[Fraction, Fraction]:
    """Coordinates in [0,1]^2 of a canonical address.

    Spine copies occupy the left and right thirds of the parent box (scaled
    by 1/3 about the mid-line); bubble copy i occupies a 1/3-by-1/b box of
    the middle third, centred at height 1/2 + (i - (b+1)/2)/b.
    """
    x = Fraction(0) if addr.anchor == Q1 else Fraction(1)
    y = Fraction(1, 2)
    for i in reversed(addr.word):
        x, y = _apply_copy(i, b, x, y)
    return x, y


def layout(g: GraphLevel) -> dict[Address, tuple[Fraction, Fraction]]:
    return dict(zip(g.vertices, g.coords))


def to_json_dict(g: GraphLevel) -> dict:
    names = [str(v) for v in g.vertices]
    return {
        "b": g.b,
        "level": g.level,
        "vertices": names,
        "edges": [[names[i], names[j], m] for (i, j), m in sorted(g.edges.items())],
        "weights": {n: frac_str(w) for n, w in zip(names, g.weights)},
        "coords": {n: [float(x), float(y)] for n, (x, y) in zip(names, g.coords)},
    }


def cell_vertices(b: int, word: Iterable[int], depth: int) -> list[Address]:
    """Canonical addresses of the vertices of the cell ``F_word`` refined ``depth`` more levels."""
    word = tuple(word)
    out = []
    for v in build_graph(b, depth).vertices:
        out.append(canonicalize(Address(word + v.word, v.anchor), b))
    return out
