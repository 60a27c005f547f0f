"""Finite windows of the recurrent graph families and their wired truncations.

Vertex labels are family-native coordinates:

* ``line``            integers ``n``
* ``grid2d``          pairs ``(x, y)``
* ``ladder``          pairs ``(x, s)`` with ``s in {0, 1}``
* ``stretched_line``  integers on the line, plus ``("s", k, j)`` for the
                      ``j``-th interior vertex of the length ``2**k`` path
                      joining ``-k`` to ``k``.

The wired boundary vertex is the string ``"∂"``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Iterator

import numpy as np
import scipy.sparse as sp

BOUNDARY = "∂"
FAMILIES = ("line", "grid2d", "ladder", "stretched_line")
TWO_ENDED = ("line", "ladder", "stretched_line")

Label = Hashable


# ---------------------------------------------------------------------------
# infinite-graph neighbourhoods


def _check_family(family: str) -> None:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def stretch_cap(family: str, params: dict | None) -> int:
    if family != "stretched_line":
        return 0
    return int((params or {}).get("stretch", 0))


def _stretch_path(k: int) -> list:
    """Vertices of the k-th stretch path, from -k to k inclusive."""
    return [-k] + [("s", k, j) for j in range(1, 2**k)] + [k]


def neighbours(family: str, v: Label, params: dict | None = None) -> list:
    """Neighbours of ``v`` in the infinite graph, repeated by multiplicity."""
    if family == "line":
        return [v - 1, v + 1]
    if family == "grid2d":
        x, y = v
        return [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
    if family == "ladder":
        x, s = v
        return [(x - 1, s), (x + 1, s), (x, 1 - s)]
    if family == "stretched_line":
        cap = stretch_cap(family, params)
        if isinstance(v, tuple):
            _, k, j = v
            left = -k if j == 1 else ("s", k, j - 1)
            right = k if j == 2**k - 1 else ("s", k, j + 1)
            return [left, right]
        out = [v - 1, v + 1]
        k = abs(v)
        if 1 <= k <= cap:
            out.append(("s", k, 1) if v < 0 else ("s", k, 2**k - 1))
        return out
    _check_family(family)
    raise AssertionError


def in_window(family: str, v: Label, radius: int) -> bool:
    if family == "line":
        return abs(v) <= radius
    if family == "grid2d":
        return abs(v[0]) + abs(v[1]) <= radius
    if family == "ladder":
        return abs(v[0]) <= radius
    if family == "stretched_line":
        if isinstance(v, tuple):
            return v[1] <= radius
        return abs(v) <= radius
    _check_family(family)
    raise AssertionError


def window_vertices(family: str, radius: int, params: dict | None = None) -> list:
    """Vertices of the radius-``radius`` window in a canonical order."""
    _check_family(family)
    if radius < 1:
        raise ValueError("window radius must be >= 1")
    r = radius
    if family == "line":
        return list(range(-r, r + 1))
    if family == "grid2d":
        return [(x, y) for x in range(-r, r + 1) for y in range(-(r - abs(x)), r - abs(x) + 1)]
    if family == "ladder":
        return [(x, s) for x in range(-r, r + 1) for s in (0, 1)]
    cap = stretch_cap(family, params)
    out: list = list(range(-r, r + 1))
    for k in range(1, min(cap, r) + 1):
        out.extend(_stretch_path(k)[1:-1])
    return out


def graph_distance_from_origin(family: str, v: Label) -> int:
    """Graph distance to the family origin (line/stretched: 0, others (0, 0))."""
    if family == "grid2d":
        return abs(v[0]) + abs(v[1])
    if family == "ladder":
        return abs(v[0]) + v[1]
    if family == "line":
        return abs(v)
    if isinstance(v, tuple):
        _, k, j = v
        return min(j + k, 2**k - j + k)
    return abs(v)


def origin(family: str) -> Label:
    return (0, 0) if family in ("grid2d", "ladder") else 0


def end_vertex(family: str, side: str, radius: int) -> Label:
    """The far vertex of the window on the given side of a two-ended family."""
    if family not in TWO_ENDED:
        raise ValueError(f"family {family!r} has no directional ends")
    sign = {"right": 1, "left": -1}[side]
    if family == "ladder":
        return (sign * radius, 0)
    return sign * radius


# ---------------------------------------------------------------------------
# finite multigraphs


def _freeze(label: Any) -> Label:
    if isinstance(label, list):
        return tuple(_freeze(x) for x in label)
    return label


def _thaw(label: Label) -> Any:
    if isinstance(label, tuple):
        return [_thaw(x) for x in label]
    return label


@dataclass(frozen=True, eq=False)
class FiniteGraph:
    """A finite connected multigraph, optionally with a wired boundary vertex.

    ``edges`` holds ``(u, v, multiplicity)`` triples with ``u != v``.
    """

    vertices: tuple
    edges: tuple
    boundary: Label | None = None
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        index = {v: i for i, v in enumerate(self.vertices)}
        if len(index) != len(self.vertices):
            raise ValueError("vertex labels must be unique")
        if self.boundary is not None and self.boundary not in index:
            raise ValueError("boundary vertex missing from vertex list")
        n = len(self.vertices)
        rows, cols, vals = [], [], []
        for u, v, m in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if m < 1:
                raise ValueError("edge multiplicity must be positive")
            i, j = index[u], index[v]
            rows += [i, j]
            cols += [j, i]
            vals += [m, m]
        adj = sp.csr_matrix((np.asarray(vals, dtype=np.int64), (rows, cols)), shape=(n, n))
        adj.sum_duplicates()
        deg = np.asarray(adj.sum(axis=1)).ravel().astype(np.int64)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "degree", deg)
        object.__setattr__(self, "_cache", {})
        if n and (deg == 0).any() and n > 1:
            raise ValueError("graph has an isolated vertex")
        if not self.is_connected():
            raise ValueError("graph is not connected")

    # -- basic queries -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v) -> bool:
        return v in self.index

    def idx(self, v: Label) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise KeyError(f"vertex {v!r} not in graph") from None

    def deg(self, v: Label) -> int:
        return int(self.degree[self.idx(v)])

    def multiplicity(self, u: Label, v: Label) -> int:
        return int(self.adjacency[self.idx(u), self.idx(v)])

    def neighbours(self, v: Label) -> list[tuple[Label, int]]:
        i = self.idx(v)
        a = self.adjacency
        lo, hi = a.indptr[i], a.indptr[i + 1]
        return [(self.vertices[j], int(m)) for j, m in zip(a.indices[lo:hi], a.data[lo:hi])]

    def is_connected(self) -> bool:
        n = len(self.vertices)
        if n <= 1:
            return True
        ncomp, _ = sp.csgraph.connected_components(self.adjacency, directed=False)
        return ncomp == 1

    def laplacian(self) -> sp.csr_matrix:
        return (sp.diags(self.degree.astype(float)) - self.adjacency.astype(float)).tocsr()

    @property
    def family(self) -> str | None:
        return self.source.get("family")

    @property
    def radius(self) -> int | None:
        return self.source.get("radius")

    def edge_list(self) -> list[tuple[Label, Label, int]]:
        return [(u, v, int(m)) for u, v, m in self.edges]

    def without_boundary(self) -> "FiniteGraph":
        """Delete the wired boundary vertex and its edges."""
        if self.boundary is None:
            return self
        b = self.boundary
        verts = tuple(v for v in self.vertices if v != b)
        edges = tuple(e for e in self.edges if b not in (e[0], e[1]))
        src = dict(self.source, wired=False)
        return FiniteGraph(verts, edges, None, src)

    # -- interchange ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "family": self.source.get("family"),
            "params": self.source.get("params", {}),
            "radius": self.source.get("radius"),
            "wired": bool(self.source.get("wired", False)),
            "vertices": [_thaw(v) for v in self.vertices],
            "edges": [[_thaw(u), _thaw(v), int(m)] for u, v, m in self.edges],
            "boundary": _thaw(self.boundary),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteGraph":
        verts = tuple(_freeze(v) for v in doc["vertices"])
        edges = tuple((_freeze(u), _freeze(v), int(m)) for u, v, m in doc["edges"])
        src = {
            "family": doc.get("family"),
            "params": doc.get("params") or {},
            "radius": doc.get("radius"),
            "wired": bool(doc.get("wired", doc.get("boundary") is not None)),
        }
        return cls(verts, edges, _freeze(doc.get("boundary")), src)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)

    @classmethod
    def loads(cls, text: str) -> "FiniteGraph":
        return cls.from_json(json.loads(text))


def graph_from_edges(edges: Iterable[tuple], vertices: Iterable | None = None) -> FiniteGraph:
    """Build a FiniteGraph from ``(u, v)`` or ``(u, v, mult)`` tuples."""
    counts: Counter = Counter()
    order: list = list(vertices) if vertices is not None else []
    seen = set(order)
    for e in edges:
        u, v = e[0], e[1]
        m = e[2] if len(e) > 2 else 1
        for w in (u, v):
            if w not in seen:
                seen.add(w)
                order.append(w)
        key = (u, v) if (order.index(u) <= order.index(v)) else (v, u)
        counts[key] += m
    return FiniteGraph(tuple(order), tuple((u, v, m) for (u, v), m in counts.items()))


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True, eq=False)
class GraphWindow:
    """The induced window of radius ``params['radius']`` of an infinite family."""

    family: str
    params: dict
    vertices: tuple
    adjacency: dict  # label -> tuple[(neighbour, multiplicity), ...]
    degree: dict  # label -> int

    @property
    def radius(self) -> int:
        return int(self.params["radius"])

    def edges(self) -> list[tuple[Label, Label, int]]:
        index = {v: i for i, v in enumerate(self.vertices)}
        out = []
        for u in self.vertices:
            for v, m in self.adjacency[u]:
                if index[u] < index[v]:
                    out.append((u, v, m))
        return out

    def to_graph(self) -> FiniteGraph:
        src = {"family": self.family, "params": dict(self.params), "radius": self.radius, "wired": False}
        return FiniteGraph(self.vertices, tuple(self.edges()), None, src)


def _validate_params(family: str, params: dict) -> dict:
    _check_family(family)
    params = dict(params)
    r = int(params.get("radius", 0))
    if r < 1:
        raise ValueError("radius must be >= 1")
    params["radius"] = r
    if family == "stretched_line":
        n = int(params.get("stretch", 0))
        if n < 1:
            raise ValueError("stretch count N must be >= 1")
        params["stretch"] = n
    return params


def build_family(family: str, params: dict) -> GraphWindow:
    """Induced window of the family; ``params`` holds ``radius`` (and ``stretch``)."""
    params = _validate_params(family, params)
    r = params["radius"]
    verts = window_vertices(family, r, params)
    vset = set(verts)
    adjacency, degree = {}, {}
    for v in verts:
        c = Counter(w for w in neighbours(family, v, params) if w in vset)
        adjacency[v] = tuple(c.items())
        degree[v] = sum(c.values())
    return GraphWindow(family, params, tuple(verts), adjacency, degree)


def free_window(family: str, radius: int, params: dict | None = None) -> FiniteGraph:
    p = dict(params or {})
    p["radius"] = radius
    return build_family(family, p).to_graph()


def wired_truncation(family: str, params: dict | None, radius: int, max_vertices: int = 2_000_000) -> FiniteGraph:
    """Contract everything outside the radius-``radius`` window to a single vertex ``∂``."""
    p = dict(params or {})
    p["radius"] = radius
    p = _validate_params(family, p)
    verts = window_vertices(family, radius, p)
    if len(verts) + 1 > max_vertices:
        raise ValueError(f"radius {radius} too large for a finite representation")
    vset = set(verts)
    index = {v: i for i, v in enumerate(verts)}
    edges: Counter = Counter()
    to_boundary: Counter = Counter()
    for v in verts:
        for w in neighbours(family, v, p):
            if w in vset:
                if index[v] < index[w]:
                    edges[(v, w)] += 1
            else:
                to_boundary[v] += 1
    all_edges = [(u, w, m) for (u, w), m in edges.items()]
    all_edges += [(v, BOUNDARY, m) for v, m in to_boundary.items()]
    src = {"family": family, "params": p, "radius": radius, "wired": True}
    return FiniteGraph(tuple(verts) + (BOUNDARY,), tuple(all_edges), BOUNDARY, src)


@dataclass(frozen=True)
class ExhaustionSpec:
    family: str
    radii: tuple

    def __post_init__(self):
        _check_family(self.family)
        radii = tuple(int(r) for r in self.radii)
        if not radii or radii[0] < 1 or any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("exhaustion radii must be positive and strictly increasing")
        object.__setattr__(self, "radii", radii)


def exhaustion_sets(family: str, radii: Iterable[int], params: dict | None = None) -> tuple[ExhaustionSpec, list[frozenset]]:
    spec = ExhaustionSpec(family, tuple(radii))
    return spec, [frozenset(window_vertices(family, r, params)) for r in spec.radii]


def interior_vertices(F: FiniteGraph) -> list:
    """Window vertices whose whole infinite-graph neighbourhood lies in the window."""
    fam = F.family
    if fam is None:
        return [v for v in F.vertices if v != F.boundary]
    params = F.source.get("params", {})
    out = []
    for v in F.vertices:
        if v == F.boundary:
            continue
        if all(w in F.index for w in neighbours(fam, v, params)):
            out.append(v)
    return out


def ball_sizes(family: str, radii: Iterable[int], params: dict | None = None, center: Label | None = None) -> dict[int, int]:
    """|B(o, r)| in the infinite graph, by breadth-first search."""
    radii = sorted(int(r) for r in radii)
    o = origin(family) if center is None else center
    dist = {o: 0}
    frontier = [o]
    rmax = radii[-1]
    for d in range(1, rmax + 1):
        nxt = []
        for v in frontier:
            for w in neighbours(family, v, params):
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    counts = np.bincount(list(dist.values()), minlength=rmax + 1).cumsum()
    return {r: int(counts[r]) for r in radii}


def iter_labels(F: FiniteGraph) -> Iterator[Label]:
    return iter(F.vertices)
