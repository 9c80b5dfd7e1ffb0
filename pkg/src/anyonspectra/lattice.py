"""Square-lattice torus as a cell complex with oriented edges.

Vertices live on Z_Lx x Z_Ly.  The horizontal edge h(x,y) points from
(x,y) to (x+1,y), the vertical edge u(x,y) from (x,y) to (x,y+1); every
horizontal edge points right and every vertical edge up.  Face (x,y) is
the unit square whose lower-left corner is vertex (x,y).

Edge ids are fixed once and for all (they set the tensor-factor order of
the many-body basis):

    edge_id = 2*(y*Lx + x) + (0 if horizontal else 1)

Strings are sequences of (vertex, edge) pairs, dual strings sequences of
(face, edge) pairs; both carry an orientation from the ordering.  The
signed crossing number of a string with a dual string is calibrated so
that the string-operator commutation phase is chi(g)**crossing_number and
a counterclockwise face boundary has winding +1 around its own face.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TorusLattice",
    "StringPath",
    "DualStringPath",
    "face_boundary",
    "vertex_dual_star",
    "crossing_number",
    "winding_number",
    "path_between",
    "concat",
]

HORIZONTAL = 0
VERTICAL = 1

# unit direction of an edge traversal, keyed by (kind, forward?)
_DIRECTIONS = {
    (HORIZONTAL, True): (1, 0),
    (HORIZONTAL, False): (-1, 0),
    (VERTICAL, True): (0, 1),
    (VERTICAL, False): (0, -1),
}


class TorusLattice:
    """Lx x Ly torus; Lx, Ly >= 2 so no edge is a self-loop."""

    def __init__(self, Lx: int, Ly: int):
        Lx, Ly = int(Lx), int(Ly)
        if Lx < 2 or Ly < 2:
            raise ValueError("torus needs Lx, Ly >= 2")
        self.Lx, self.Ly = Lx, Ly
        self.n_vertices = Lx * Ly
        self.n_faces = Lx * Ly
        self.n_edges = 2 * Lx * Ly

    # -- coordinates --------------------------------------------------------

    def wrap(self, site):
        x, y = site
        return (x % self.Lx, y % self.Ly)

    def vertices(self):
        return [(x, y) for y in range(self.Ly) for x in range(self.Lx)]

    faces = vertices

    def edge_id(self, x, y, kind):
        x, y = x % self.Lx, y % self.Ly
        return 2 * (y * self.Lx + x) + kind

    def h_edge(self, x, y):
        return self.edge_id(x, y, HORIZONTAL)

    def u_edge(self, x, y):
        return self.edge_id(x, y, VERTICAL)

    def edge_base(self, e):
        """(x, y, kind) with the edge's tail at (x, y)."""
        kind = e % 2
        cell = e // 2
        return (cell % self.Lx, cell // self.Lx, kind)

    def edges(self):
        return list(range(self.n_edges))

    # -- incidence ----------------------------------------------------------

    def edge_endpoints(self, e):
        """(tail, head) vertices of an oriented edge."""
        x, y, kind = self.edge_base(e)
        if kind == HORIZONTAL:
            return (x, y), self.wrap((x + 1, y))
        return (x, y), self.wrap((x, y + 1))

    def edge_faces(self, e):
        """(right, left) faces seen walking along the edge orientation."""
        x, y, kind = self.edge_base(e)
        if kind == HORIZONTAL:
            return self.wrap((x, y - 1)), (x, y)
        return (x, y), self.wrap((x - 1, y))

    def is_tail(self, v, e) -> bool:
        """True if e leaves v (outgoing), False if it enters v."""
        tail, head = self.edge_endpoints(e)
        v = self.wrap(v)
        if v == tail:
            return True
        if v == head:
            return False
        raise ValueError(f"vertex {v} is not an endpoint of edge {e}")

    def face_on_right(self, f, e) -> bool:
        right, left = self.edge_faces(e)
        f = self.wrap(f)
        if f == right:
            return True
        if f == left:
            return False
        raise ValueError(f"face {f} is not adjacent to edge {e}")

    def vertex_edges(self, v):
        """The four edges at v as (edge, outgoing?) pairs."""
        x, y = self.wrap(v)
        return [
            (self.h_edge(x, y), True),
            (self.u_edge(x, y), True),
            (self.h_edge(x - 1, y), False),
            (self.u_edge(x, y - 1), False),
        ]

    def face_edges(self, f):
        """The four boundary edges of f as (edge, ccw-forward?) pairs."""
        x, y = self.wrap(f)
        return [
            (self.h_edge(x, y), True),
            (self.u_edge(x + 1, y), True),
            (self.h_edge(x, y + 1), False),
            (self.u_edge(x, y), False),
        ]

    def __repr__(self):
        return f"TorusLattice({self.Lx}x{self.Ly})"

    def __eq__(self, other):
        return (
            isinstance(other, TorusLattice)
            and (self.Lx, self.Ly) == (other.Lx, other.Ly)
        )

    def __hash__(self):
        return hash((self.Lx, self.Ly))


@dataclass(frozen=True)
class StringPath:
    """Oriented vertex path: pairs (v_i, e_i) with e_i joining v_i to v_{i+1}."""

    lattice: TorusLattice
    pairs: tuple

    def __post_init__(self):
        lat = self.lattice
        norm = []
        v = None
        for vi, ei in self.pairs:
            vi = lat.wrap(vi)
            if v is not None and vi != v:
                raise ValueError("consecutive string pairs do not share a vertex")
            v = self._other(vi, ei)
            norm.append((vi, int(ei)))
        object.__setattr__(self, "pairs", tuple(norm))

    def _other(self, v, e):
        tail, head = self.lattice.edge_endpoints(e)
        v = self.lattice.wrap(v)
        if v == tail:
            return head
        if v == head:
            return tail
        raise ValueError(f"vertex {v} is not an endpoint of edge {e}")

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def start(self):
        return self.lattice.wrap(self.pairs[0][0]) if self.pairs else None

    @property
    def end(self):
        if not self.pairs:
            return None
        v, e = self.pairs[-1]
        return self._other(v, e)

    @property
    def is_closed(self):
        return bool(self.pairs) and self.start == self.end

    def directions(self):
        """Unit traversal direction per pair."""
        out = []
        for v, e in self.pairs:
            kind = e % 2
            out.append(_DIRECTIONS[(kind, self.lattice.is_tail(v, e))])
        return out

    def reversed(self) -> "StringPath":
        pairs = []
        for v, e in reversed(self.pairs):
            pairs.append((self._other(v, e), e))
        return StringPath(self.lattice, tuple(pairs))

    def displacement(self):
        """Total raw displacement; (0, 0) iff contractible (for closed paths)."""
        dx = dy = 0
        for d in self.directions():
            dx += d[0]
            dy += d[1]
        return dx, dy


@dataclass(frozen=True)
class DualStringPath:
    """Oriented face path: pairs (f_i, e_i), e_i shared by f_i and f_{i+1}."""

    lattice: TorusLattice
    pairs: tuple

    def __post_init__(self):
        lat = self.lattice
        norm = []
        f = None
        for fi, ei in self.pairs:
            fi = lat.wrap(fi)
            if f is not None and fi != f:
                raise ValueError("consecutive dual pairs do not share a face")
            f = self._other(fi, ei)
            norm.append((fi, int(ei)))
        object.__setattr__(self, "pairs", tuple(norm))

    def _other(self, f, e):
        right, left = self.lattice.edge_faces(e)
        f = self.lattice.wrap(f)
        if f == right:
            return left
        if f == left:
            return right
        raise ValueError(f"face {f} is not adjacent to edge {e}")

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def start(self):
        return self.lattice.wrap(self.pairs[0][0]) if self.pairs else None

    @property
    def end(self):
        if not self.pairs:
            return None
        f, e = self.pairs[-1]
        return self._other(f, e)

    @property
    def is_closed(self):
        return bool(self.pairs) and self.start == self.end

    def directions(self):
        """Unit direction of the crossing, from f_i towards f_{i+1}."""
        out = []
        for f, e in self.pairs:
            kind = e % 2
            # crossing a horizontal edge moves vertically and vice versa
            if kind == HORIZONTAL:
                out.append((0, 1) if self.lattice.face_on_right(f, e) else (0, -1))
            else:
                out.append((-1, 0) if self.lattice.face_on_right(f, e) else (1, 0))
        return out

    def reversed(self) -> "DualStringPath":
        pairs = []
        for f, e in reversed(self.pairs):
            pairs.append((self._other(f, e), e))
        return DualStringPath(self.lattice, tuple(pairs))


def face_boundary(lat: TorusLattice, f) -> StringPath:
    """Counterclockwise boundary string of face f, based at its lower-left corner."""
    x, y = lat.wrap(f)
    pairs = (
        ((x, y), lat.h_edge(x, y)),
        (lat.wrap((x + 1, y)), lat.u_edge(x + 1, y)),
        (lat.wrap((x + 1, y + 1)), lat.h_edge(x, y + 1)),
        (lat.wrap((x, y + 1)), lat.u_edge(x, y)),
    )
    return StringPath(lat, pairs)


def vertex_dual_star(lat: TorusLattice, v) -> DualStringPath:
    """Closed length-4 dual string around vertex v, based at its lower-left
    face.

    Traversed clockwise; combined with the face-side operator rule this
    makes the associated flux-string average the standard gauge
    transformation at v (the orientation is fixed by the projector and
    string-commutation identities, not free).
    """
    x, y = lat.wrap(v)
    pairs = (
        (lat.wrap((x - 1, y - 1)), lat.h_edge(x - 1, y)),
        (lat.wrap((x - 1, y)), lat.u_edge(x, y)),
        ((x, y), lat.h_edge(x, y)),
        (lat.wrap((x, y - 1)), lat.u_edge(x, y - 1)),
    )
    return DualStringPath(lat, pairs)


def crossing_number(gamma: StringPath, dual: DualStringPath) -> int:
    """Signed crossings of a string with a dual string.

    A crossing where the dual string passes from the right of gamma to its
    left counts +1, the opposite sense -1.  This is the sign for which the
    string operators obey  F_gamma F_dual = chi(g)^c F_dual F_gamma.
    """
    if gamma.lattice != dual.lattice:
        raise ValueError("paths live on different lattices")
    gdirs = gamma.directions()
    ddirs = dual.directions()
    total = 0
    for (v, e), t in zip(gamma.pairs, gdirs):
        for (f, eb), tb in zip(dual.pairs, ddirs):
            if e == eb:
                total += t[0] * tb[1] - t[1] * tb[0]
    return total


def _dual_ray(lat: TorusLattice, f, direction) -> DualStringPath:
    """Dual ray from face f, truncated one step before it would wrap."""
    x, y = lat.wrap(f)
    dx, dy = direction
    steps = (lat.Lx if dx else lat.Ly) - 1
    pairs = []
    for _ in range(steps):
        if dx == 1:
            e = lat.u_edge(x + 1, y)
        elif dx == -1:
            e = lat.u_edge(x, y)
        elif dy == 1:
            e = lat.h_edge(x, y + 1)
        else:
            e = lat.h_edge(x, y)
        pairs.append(((x, y), e))
        x, y = lat.wrap((x + dx, y + dy))
    return DualStringPath(lat, tuple(pairs))


def _check_windable(gamma: StringPath):
    if not gamma.is_closed:
        raise ValueError("winding number needs a closed string")
    if gamma.displacement() != (0, 0):
        raise ValueError("string wraps the torus; winding number undefined")


def winding_function(gamma: StringPath) -> dict:
    """Winding number of a closed contractible loop around every face.

    On the torus the winding is defined up to a global constant; it is
    fixed by assigning 0 to the most common value (the exterior of any
    loop that encloses a minority of faces).  Raises when the tie cannot
    be broken, which only happens for loops enclosing exactly half the
    torus.
    """
    _check_windable(gamma)
    lat = gamma.lattice
    # boustrophedon dual path visiting every face without wrapping
    snake = [(0, 0)]
    for y in range(lat.Ly):
        xs = range(1, lat.Lx) if y % 2 == 0 else range(lat.Lx - 2, -1, -1)
        if y > 0:
            snake.append((snake[-1][0], y))
        for x in xs:
            snake.append((x, y))
    rel = {snake[0]: 0}
    pos = snake[0]
    for nxt in snake[1:]:
        dx, dy = nxt[0] - pos[0], nxt[1] - pos[1]
        step = _dual_ray_step(lat, pos, (dx, dy))
        # crossing telescopes as w(start) - w(end) along a dual path
        rel[nxt] = rel[pos] - crossing_number(gamma, step)
        pos = nxt
    values, counts = np.unique(list(rel.values()), return_counts=True)
    top = values[np.argmax(counts)]
    ties = counts == counts.max()
    if np.sum(ties) > 1:
        raise ValueError("winding normalization ambiguous: loop encloses "
                         "half the torus")
    return {f: int(v - top) for f, v in rel.items()}


def _dual_ray_step(lat: TorusLattice, f, direction) -> DualStringPath:
    x, y = lat.wrap(f)
    dx, dy = direction
    if dx == 1:
        e = lat.u_edge(x + 1, y)
    elif dx == -1:
        e = lat.u_edge(x, y)
    elif dy == 1:
        e = lat.h_edge(x, y + 1)
    else:
        e = lat.h_edge(x, y)
    return DualStringPath(lat, (((x, y), e),))


def winding_number(gamma: StringPath, f, direction=None) -> int:
    """Winding of a closed contractible string around face f.

    With a direction given, computed as the signed crossing count with a
    dual ray leaving f along that axis, truncated before wrapping (valid
    when the ray terminates outside the loop).  By default the exact
    winding function is used instead, normalized to vanish on the
    majority of faces.  Non-contractible loops are rejected.

    With the crossing sign calibrated above, clockwise loops wind
    positively; this is the sign for which a charge braided around a flux
    g along a loop of winding w acquires exactly chi(g)**w.
    """
    if direction is None:
        return winding_function(gamma)[gamma.lattice.wrap(f)]
    _check_windable(gamma)
    if tuple(direction) not in _DIRECTIONS.values():
        raise ValueError("direction must be a unit axis vector")
    ray = _dual_ray(gamma.lattice, f, tuple(direction))
    return crossing_number(gamma, ray)


def path_between(lat: TorusLattice, v, w) -> StringPath:
    """A shortest string from v to w (x moves first, wrap-aware)."""
    x, y = lat.wrap(v)
    wx, wy = lat.wrap(w)
    pairs = []

    def step_x(x, y, forward):
        if forward:
            return ((x, y), lat.h_edge(x, y)), lat.wrap((x + 1, y))[0]
        return ((x, y), lat.h_edge(x - 1, y)), lat.wrap((x - 1, y))[0]

    dist = (wx - x) % lat.Lx
    forward = dist <= lat.Lx - dist
    n = dist if forward else lat.Lx - dist
    for _ in range(n):
        pair, x = step_x(x, y, forward)
        pairs.append(pair)

    def step_y(x, y, forward):
        if forward:
            return ((x, y), lat.u_edge(x, y)), lat.wrap((x, y + 1))[1]
        return ((x, y), lat.u_edge(x, y - 1)), lat.wrap((x, y - 1))[1]

    dist = (wy - y) % lat.Ly
    forward = dist <= lat.Ly - dist
    n = dist if forward else lat.Ly - dist
    for _ in range(n):
        pair, y = step_y(x, y, forward)
        pairs.append(pair)
    return StringPath(lat, tuple(pairs))


def concat(a, b):
    """Concatenation; defined iff a ends where b starts."""
    if type(a) is not type(b):
        raise TypeError("cannot concatenate a string with a dual string")
    if a.lattice != b.lattice:
        raise ValueError("paths live on different lattices")
    if a.pairs and b.pairs and a.end != b.start:
        raise ValueError(f"endpoints do not compose: {a.end} != {b.start}")
    return type(a)(a.lattice, a.pairs + b.pairs)


_STEPS = {"R": (1, 0), "U": (0, 1), "L": (-1, 0), "D": (0, -1)}


def string_from_steps(lat: TorusLattice, base, steps: str) -> StringPath:
    """String from a base vertex and comma-separated step letters R,U,L,D."""
    x, y = lat.wrap(base)
    pairs = []
    for token in steps.split(","):
        token = token.strip().upper()
        if token not in _STEPS:
            raise ValueError(f"bad step {token!r}; use R,U,L,D")
        dx, dy = _STEPS[token]
        if dx == 1:
            e = lat.h_edge(x, y)
        elif dx == -1:
            e = lat.h_edge(x - 1, y)
        elif dy == 1:
            e = lat.u_edge(x, y)
        else:
            e = lat.u_edge(x, y - 1)
        pairs.append(((x, y), e))
        x, y = lat.wrap((x + dx, y + dy))
    return StringPath(lat, tuple(pairs))


def dual_string_from_steps(lat: TorusLattice, base, steps: str) -> DualStringPath:
    """Dual string from a base face and comma-separated step letters."""
    x, y = lat.wrap(base)
    pairs = []
    for token in steps.split(","):
        token = token.strip().upper()
        if token not in _STEPS:
            raise ValueError(f"bad step {token!r}; use R,U,L,D")
        dx, dy = _STEPS[token]
        if dx == 1:
            e = lat.u_edge(x + 1, y)
        elif dx == -1:
            e = lat.u_edge(x, y)
        elif dy == 1:
            e = lat.h_edge(x, y + 1)
        else:
            e = lat.h_edge(x, y)
        pairs.append(((x, y), e))
        x, y = lat.wrap((x + dx, y + dy))
    return DualStringPath(lat, tuple(pairs))
