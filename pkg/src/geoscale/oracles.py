"""Augmentation oracles over an explicit vertex list.

Every oracle enumerates ``v(P)``.  Ratios are compared by cross
multiplication on integers; ``Fraction`` objects are only built for the
answers handed back to callers.  Ties are always broken towards the
lexicographically smallest bitstring.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import BitVertex, Instance

__all__ = [
    "PolicyKind",
    "Policy",
    "OracleAnswer",
    "MAX_RATIO",
    "MAX_GAIN",
    "MIN_GAIN",
    "LEX_FIRST",
    "mra_argmax",
    "feasible_set",
    "select",
    "improve_any",
    "brute_force_opt",
]


class PolicyKind(enum.Enum):
    MAX_RATIO = "max-ratio"
    MAX_GAIN = "max-gain"
    MIN_GAIN = "min-gain"
    LEX_FIRST = "lex"
    RANDOM = "random"


@dataclass(frozen=True)
class Policy:
    """How the feasibility oracle picks among qualifying vertices."""

    kind: PolicyKind
    seed: int = 0

    @classmethod
    def parse(cls, name: str, seed: int = 0) -> "Policy":
        try:
            kind = PolicyKind(name)
        except ValueError:
            choices = ", ".join(k.value for k in PolicyKind)
            raise ValueError(
                f"unknown policy {name!r} (choose from {choices})") from None
        return cls(kind, seed)

    @property
    def name(self) -> str:
        return self.kind.value

    def __str__(self) -> str:
        if self.kind is PolicyKind.RANDOM:
            return f"random({self.seed})"
        return self.kind.value


MAX_RATIO = Policy(PolicyKind.MAX_RATIO)
MAX_GAIN = Policy(PolicyKind.MAX_GAIN)
MIN_GAIN = Policy(PolicyKind.MIN_GAIN)
LEX_FIRST = Policy(PolicyKind.LEX_FIRST)


@dataclass(frozen=True)
class OracleAnswer:
    vertex: Optional[BitVertex] = None
    ratio: Optional[Fraction] = None
    index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.vertex is not None


NONE = OracleAnswer()


def _answer(inst: Instance, src: int, j: int) -> OracleAnswer:
    gain = inst.values[j] - inst.values[src]
    dist = (inst.masks[j] ^ inst.masks[src]).bit_count()
    return OracleAnswer(inst.vertices[j], Fraction(gain, dist), j)


def _index(inst: Instance, x: BitVertex | int) -> int:
    if isinstance(x, int):
        if not 0 <= x < len(inst.vertices):
            raise ValueError(f"vertex index {x} out of range")
        return x
    return inst.locate(x)


def _lex_less(inst: Instance, a: int, b: int) -> bool:
    return inst.vertices[a] < inst.vertices[b]


def mra_argmax(inst: Instance, x: BitVertex | int) -> OracleAnswer:
    """Vertex maximizing ``c.(y - x) / ||y - x||_1`` over ``v(P) minus {x}``.

    Returns an empty answer only for a single-vertex polytope.  Raises
    ``ValueError`` if ``x`` is not a vertex.
    """
    src = _index(inst, x)
    vals, masks = inst.values, inst.masks
    v0, m0 = vals[src], masks[src]
    best = -1
    best_gain = best_dist = 0
    for j in range(len(vals)):
        if j == src:
            continue
        gain = vals[j] - v0
        dist = (masks[j] ^ m0).bit_count()
        if best < 0:
            better = True
        else:
            lhs, rhs = gain * best_dist, best_gain * dist
            better = lhs > rhs or (lhs == rhs and _lex_less(inst, j, best))
        if better:
            best, best_gain, best_dist = j, gain, dist
    if best < 0:
        return NONE
    return _answer(inst, src, best)


def _feasible_indices(inst: Instance, src: int, mu: Fraction) -> list[int]:
    p, q = mu.numerator, mu.denominator
    vals, masks = inst.values, inst.masks
    v0, m0 = vals[src], masks[src]
    # c.(y - x) > mu * ||y - x||_1, strict, as q*gain > p*dist
    return [j for j in range(len(vals))
            if j != src and q * (vals[j] - v0) > p * (masks[j] ^ m0).bit_count()]


def feasible_set(inst: Instance, x: BitVertex | int, mu: Fraction) -> list[BitVertex]:
    """All vertices ``y`` with ``c.(y - x) > mu ||y - x||_1``, in polytope order."""
    mu = Fraction(mu)
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    src = _index(inst, x)
    return [inst.vertices[j] for j in _feasible_indices(inst, src, mu)]


def _random_pick(policy: Policy, inst: Instance, src: int, mu: Fraction,
                 count: int) -> int:
    # Stateless: the draw depends only on (seed, iterate, mu), so a run can be
    # replayed from any step and parallel runs never share generator state.
    key = f"{policy.seed}|{inst.vertices[src]}|{mu}".encode()
    derived = int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
    return random.Random(derived).randrange(count)


def select(policy: Policy, inst: Instance, x: BitVertex | int,
           mu: Fraction) -> OracleAnswer:
    """Feasibility oracle: pick one qualifying vertex according to ``policy``.

    The answer is empty exactly when :func:`feasible_set` is empty.
    """
    mu = Fraction(mu)
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    src = _index(inst, x)
    cand = _feasible_indices(inst, src, mu)
    if not cand:
        return NONE
    verts, vals, masks = inst.vertices, inst.values, inst.masks
    cand.sort(key=verts.__getitem__)
    kind = policy.kind
    if kind is PolicyKind.LEX_FIRST:
        pick = cand[0]
    elif kind is PolicyKind.MAX_GAIN:
        # max() keeps the first maximal element, i.e. the lex-smallest one
        pick = max(cand, key=vals.__getitem__)
    elif kind is PolicyKind.MIN_GAIN:
        pick = min(cand, key=vals.__getitem__)
    elif kind is PolicyKind.MAX_RATIO:
        m0, v0 = masks[src], vals[src]
        pick = max(cand, key=lambda j: Fraction(vals[j] - v0,
                                                (masks[j] ^ m0).bit_count()))
    elif kind is PolicyKind.RANDOM:
        pick = cand[_random_pick(policy, inst, src, mu, len(cand))]
    else:  # pragma: no cover
        raise ValueError(f"unhandled policy {policy!r}")
    return _answer(inst, src, pick)


def improve_any(inst: Instance, x: BitVertex | int) -> OracleAnswer:
    """Lex-smallest vertex with strictly larger objective, or empty if ``x``
    is optimal."""
    src = _index(inst, x)
    vals, verts = inst.values, inst.vertices
    better = [j for j in range(len(vals)) if vals[j] > vals[src]]
    if not better:
        return NONE
    return _answer(inst, src, min(better, key=verts.__getitem__))


def brute_force_opt(inst: Instance) -> tuple[BitVertex, int]:
    """Exhaustive maximum of ``c.x``; ties go to the lex-smallest vertex."""
    best = None
    best_val = 0
    for v in inst.vertices:
        val = sum(ci for ci, b in zip(inst.objective, v.bits) if b)
        if best is None or val > best_val or (val == best_val and v < best):
            best, best_val = v, val
    return best, best_val
