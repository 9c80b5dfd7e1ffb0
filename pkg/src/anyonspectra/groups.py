"""Finite abelian groups Z_{n1} x ... x Z_{nr}, their characters, and the
group Fourier transform.

Elements and characters are both stored as integer residue tuples.  A
character with exponents (m_1, ..., m_r) evaluates on (g_1, ..., g_r) as

    chi(g) = exp(2*pi*i * sum_i m_i * g_i / n_i),

computed from the exact rational angle so that group laws hold to round-off
and never drift through cached float products.

Enumeration of elements and characters is lexicographic on the residue
tuples; every matrix basis downstream inherits this order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "FiniteAbelianGroup",
    "GroupElement",
    "Character",
    "make_group",
    "parse_group",
    "char_eval",
    "fourier_matrix",
]


@dataclass(frozen=True)
class GroupElement:
    """Element of a product of cyclic groups, one residue per factor."""

    coords: tuple

    def __iter__(self):
        return iter(self.coords)


@dataclass(frozen=True)
class Character:
    """One-dimensional character, stored by its integer exponents."""

    coords: tuple

    def __iter__(self):
        return iter(self.coords)


class FiniteAbelianGroup:
    """Z_{n1} x ... x Z_{nr} with lexicographic element/character order."""

    def __init__(self, orders):
        orders = tuple(int(n) for n in orders)
        if not orders:
            raise ValueError("group needs at least one cyclic factor")
        if any(n < 1 for n in orders):
            raise ValueError(f"cyclic orders must be >= 1, got {orders}")
        self.orders = orders
        self.order = int(np.prod(orders, dtype=np.int64))
        # index <-> coordinate tables, lexicographic on coords
        self._coords = np.array(
            list(itertools.product(*(range(n) for n in orders))), dtype=np.int64
        ).reshape(self.order, len(orders))
        # Cayley table of indices for vectorized many-body arithmetic
        a = self._coords[:, None, :]
        b = self._coords[None, :, :]
        self.cayley = self._index_of((a + b) % np.array(orders))
        self.inverse = self._index_of((-self._coords) % np.array(orders))
        # char_table[m, g] = chi_m(g), exact roots of unity
        lcm = np.lcm.reduce(orders)
        phases = np.exp(2j * np.pi * np.arange(lcm) / lcm)
        exponent = np.zeros((self.order, self.order), dtype=np.int64)
        for i, n in enumerate(orders):
            exponent += (
                self._coords[:, None, i] * self._coords[None, :, i] * (lcm // n)
            )
        self.char_table = phases[exponent % lcm]

    def _index_of(self, coords):
        """Lexicographic rank of residue tuples (vectorized)."""
        idx = np.zeros(coords.shape[:-1], dtype=np.int64)
        for i, n in enumerate(self.orders):
            idx = idx * n + coords[..., i]
        return idx

    # -- element/character views ------------------------------------------

    def element(self, coords) -> GroupElement:
        return GroupElement(self._validate(coords))

    def character(self, coords) -> Character:
        return Character(self._validate(coords))

    def _validate(self, coords):
        if isinstance(coords, (GroupElement, Character)):
            coords = coords.coords
        coords = tuple(int(c) for c in coords)
        if len(coords) != len(self.orders):
            raise ValueError(
                f"expected {len(self.orders)} coordinates, got {len(coords)}"
            )
        return tuple(c % n for c, n in zip(coords, self.orders))

    def index(self, x) -> int:
        """Lexicographic index of an element or character."""
        coords = self._validate(x)
        idx = 0
        for c, n in zip(coords, self.orders):
            idx = idx * n + c
        return idx

    def coords_of(self, index: int) -> tuple:
        return tuple(int(c) for c in self._coords[index])

    def elements(self):
        return [GroupElement(self.coords_of(i)) for i in range(self.order)]

    def characters(self):
        return [Character(self.coords_of(i)) for i in range(self.order)]

    @property
    def identity(self) -> GroupElement:
        return GroupElement((0,) * len(self.orders))

    @property
    def trivial_character(self) -> Character:
        return Character((0,) * len(self.orders))

    # -- arithmetic --------------------------------------------------------

    def mul(self, a, b):
        """Componentwise modular addition; works on elements or characters."""
        ca, cb = self._validate(a), self._validate(b)
        coords = tuple((x + y) % n for x, y, n in zip(ca, cb, self.orders))
        cls = Character if isinstance(a, Character) else GroupElement
        return cls(coords)

    def inv(self, a):
        coords = tuple((-x) % n for x, n in zip(self._validate(a), self.orders))
        return Character(coords) if isinstance(a, Character) else GroupElement(coords)

    def char_value(self, chi, g) -> complex:
        """chi(g) as an exact root of unity (table lookup)."""
        return complex(self.char_table[self.index(chi), self.index(g)])

    def __repr__(self):
        return "x".join(f"Z{n}" for n in self.orders)

    def __eq__(self, other):
        return isinstance(other, FiniteAbelianGroup) and self.orders == other.orders

    def __hash__(self):
        return hash(self.orders)


def make_group(orders) -> FiniteAbelianGroup:
    """Group Z_{n1} x ... x Z_{nr} from a list of cyclic orders."""
    return FiniteAbelianGroup(orders)


def parse_group(spec: str) -> FiniteAbelianGroup:
    """Parse a spec string like "Z2", "Z3" or "Z2xZ4"."""
    parts = spec.strip().split("x")
    orders = []
    for p in parts:
        p = p.strip()
        if not p or p[0] not in "zZ" or not p[1:].isdigit():
            raise ValueError(f"bad group spec {spec!r}; expected e.g. 'Z2' or 'Z2xZ4'")
        orders.append(int(p[1:]))
    return make_group(orders)


def char_eval(group: FiniteAbelianGroup, chi, g) -> complex:
    """Evaluate chi(g); unit modulus up to floating round-off."""
    return group.char_value(chi, g)


def char_angle(group: FiniteAbelianGroup, chi, g) -> Fraction:
    """The rational multiple of 2*pi in chi(g) = exp(2*pi*i * angle)."""
    total = Fraction(0)
    for m, x, n in zip(group._validate(chi), group._validate(g), group.orders):
        total += Fraction(m * x, n)
    return total % 1


def fourier_matrix(group: FiniteAbelianGroup) -> np.ndarray:
    """Unitary U with U[chi, g] = conj(chi(g)) / sqrt(|G|).

    U diagonalizes every left-translation L^h and maps each T^chi to a
    translation on the character basis; for Z_N it is the usual discrete
    Fourier transform.
    """
    return group.char_table.conj() / np.sqrt(group.order)
