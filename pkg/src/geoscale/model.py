"""Exact numeric helpers, 0/1 polytopes, instances and their generators.

Integers are plain Python ``int`` (arbitrary precision) and rationals are
``fractions.Fraction``, which is kept in lowest terms with a positive
denominator.  Nothing in this package touches floating point.

Coordinate 1 is the leftmost character of a bitstring, so ``x^i`` on the
simplex (last ``i`` coordinates equal to one) reads ``0...01...1``.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Sequence

__all__ = [
    "BitVertex",
    "Polytope",
    "Instance",
    "InstanceError",
    "BitstringLengthError",
    "DuplicateVertexError",
    "NonIntegerObjectiveError",
    "StartIndexError",
    "make_simplex",
    "objective_linear",
    "objective_geometric",
    "random_polytope",
    "dot",
    "l1_dist",
    "ratio",
    "parse_rational",
    "format_rational",
    "parse_instance",
    "write_instance",
    "simplex_instance",
]


@dataclass(frozen=True, order=True)
class BitVertex:
    """A vertex of the unit cube, coordinate 1 first.

    Ordering is lexicographic on the bitstring, which is the tie-break rule
    used by every oracle.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be 0/1, got {self.bits!r}")

    @classmethod
    def from_str(cls, s: str) -> "BitVertex":
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {s!r}")
        return cls(tuple(int(ch) for ch in s))

    @property
    def n(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class Polytope:
    """A 0/1 polytope given by its explicit vertex list."""

    n: int
    vertices: tuple[BitVertex, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be positive, got {self.n}")
        if not self.vertices:
            raise ValueError("polytope needs at least one vertex")
        object.__setattr__(self, "vertices", tuple(self.vertices))
        for v in self.vertices:
            if len(v) != self.n:
                raise BitstringLengthError(
                    f"vertex {v} has length {len(v)}, expected {self.n}")
        if len(set(self.vertices)) != len(self.vertices):
            raise DuplicateVertexError("polytope vertices must be distinct")

    def __len__(self) -> int:
        return len(self.vertices)

    def index(self, v: BitVertex) -> int:
        return self.vertices.index(v)


@dataclass(frozen=True)
class Instance:
    """Maximize ``objective . x`` over the vertices of ``polytope``."""

    polytope: Polytope
    objective: tuple[int, ...]
    start: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objective", tuple(self.objective))
        for c in self.objective:
            # bool is an int subclass; reject it along with floats/Fractions
            if type(c) is not int:
                raise NonIntegerObjectiveError(
                    f"objective entries must be integers, got {c!r}")
        if len(self.objective) != self.polytope.n:
            raise BitstringLengthError(
                f"objective has length {len(self.objective)}, "
                f"expected {self.polytope.n}")
        if not 0 <= self.start < len(self.polytope):
            raise StartIndexError(
                f"start index {self.start} outside 0..{len(self.polytope) - 1}")

    @property
    def n(self) -> int:
        return self.polytope.n

    @property
    def vertices(self) -> tuple[BitVertex, ...]:
        return self.polytope.vertices

    @property
    def c_inf(self) -> int:
        return max(abs(c) for c in self.objective)

    def value(self, i: int) -> int:
        return self.values[i]

    # lookup tables for the oracles; not part of equality or hashing
    @cached_property
    def values(self) -> tuple[int, ...]:
        return tuple(dot(self.objective, v) for v in self.vertices)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(int(str(v), 2) for v in self.vertices)

    @cached_property
    def vertex_index(self) -> dict[BitVertex, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def locate(self, x: BitVertex) -> int:
        try:
            return self.vertex_index[x]
        except KeyError:
            raise ValueError(f"{x} is not a vertex of the polytope") from None


class InstanceError(ValueError):
    """Base class for malformed instance data."""


class BitstringLengthError(InstanceError):
    pass


class DuplicateVertexError(InstanceError):
    pass


class NonIntegerObjectiveError(InstanceError):
    pass


class StartIndexError(InstanceError):
    pass


# --- generators ------------------------------------------------------------

def make_simplex(n: int) -> Polytope:
    """The simplex with vertices ``x^0 .. x^n``; vertex ``i`` has its last
    ``i`` coordinates set and vertex 0 is the origin."""
    if n < 1:
        raise ValueError(f"simplex dimension must be >= 1, got {n}")
    verts = [BitVertex((0,) * (n - i) + (1,) * i) for i in range(n + 1)]
    return Polytope(n, tuple(verts))


def objective_linear(n: int) -> tuple[int, ...]:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return tuple(range(1, n + 1))


def objective_geometric(n: int, base: int) -> tuple[int, ...]:
    """``(base, base**2, ..., base**n)``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if type(base) is not int or base < 2:
        raise ValueError(f"base must be an integer >= 2, got {base!r}")
    return tuple(base ** i for i in range(1, n + 1))


def simplex_instance(n: int, objective: Sequence[int]) -> Instance:
    return Instance(make_simplex(n), tuple(objective), 0)


def random_polytope(n: int, m: int, seed: int) -> Polytope:
    """``m`` distinct cube vertices drawn without replacement.

    Uses ``random.Random(seed)``, so the result is reproducible across runs
    and platforms.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= m <= 2 ** n:
        raise ValueError(f"vertex count m={m} must lie in 1..2^{n}")
    rng = random.Random(seed)
    codes = rng.sample(range(2 ** n), m)
    verts = [BitVertex.from_str(format(code, f"0{n}b")) for code in codes]
    return Polytope(n, tuple(verts))


# --- arithmetic ------------------------------------------------------------

def dot(c: Sequence[int], x: BitVertex) -> int:
    return sum(ci for ci, b in zip(c, x.bits) if b)


def l1_dist(x: BitVertex, y: BitVertex) -> int:
    return sum(a != b for a, b in zip(x.bits, y.bits))


def ratio(c: Sequence[int], x_from: BitVertex, y: BitVertex) -> Fraction:
    """Gain per unit of l1 distance when moving from ``x_from`` to ``y``."""
    d = l1_dist(x_from, y)
    if d == 0:
        raise ZeroDivisionError("ratio of a vertex to itself is 0/0")
    return Fraction(dot(c, y) - dot(c, x_from), d)


_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; decimals and floats are rejected."""
    m = _RATIONAL_RE.match(str(text))
    if not m:
        raise ValueError(f"not a rational literal (expected p/q): {text!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def format_rational(r: Fraction | int) -> str:
    # Fraction.__str__ already gives "p/q", or "p" when q == 1
    return str(Fraction(r))


# --- instance files --------------------------------------------------------

_INT_RE = re.compile(r"^[+-]?\d+$")


def parse_instance(text: str) -> Instance:
    """Read the JSON instance format::

        {"n": 2, "vertices": ["00", "11"], "c": ["1", "3"], "start": 0}
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"instance is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    missing = {"n", "vertices", "c", "start"} - data.keys()
    if missing:
        raise InstanceError(f"instance is missing keys: {sorted(missing)}")

    n = data["n"]
    if type(n) is not int or n < 1:
        raise InstanceError(f"'n' must be a positive integer, got {n!r}")

    vertices = []
    for s in data["vertices"]:
        if not isinstance(s, str) or set(s) - {"0", "1"}:
            raise InstanceError(f"vertex {s!r} is not a 0/1 bitstring")
        if len(s) != n:
            raise BitstringLengthError(
                f"vertex {s!r} has length {len(s)}, expected n={n}")
        vertices.append(BitVertex.from_str(s))
    seen = set()
    for v in vertices:
        if v in seen:
            raise DuplicateVertexError(f"duplicate vertex {v}")
        seen.add(v)

    c = []
    for entry in data["c"]:
        if isinstance(entry, bool) or not (
                type(entry) is int
                or (isinstance(entry, str) and _INT_RE.match(entry.strip()))):
            raise NonIntegerObjectiveError(
                f"objective entry {entry!r} is not an integer")
        c.append(int(entry))

    start = data["start"]
    if type(start) is not int or not 0 <= start < len(vertices):
        raise StartIndexError(
            f"start {start!r} is not an index into {len(vertices)} vertices")

    return Instance(Polytope(n, tuple(vertices)), tuple(c), start)


def write_instance(inst: Instance) -> str:
    return json.dumps({
        "n": inst.n,
        "vertices": [str(v) for v in inst.vertices],
        "c": [str(ci) for ci in inst.objective],
        "start": inst.start,
    })

