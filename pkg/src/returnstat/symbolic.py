"""Words over a symbol alphabet and the combinatorics of periodic cylinders.

Words are plain tuples of non-negative integers.  A cylinder ``[w]`` is the
set of sequences starting with ``w``; everything here is purely
combinatorial and never touches a measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParameterError

Word = tuple[int, ...]

__all__ = [
    "Word",
    "ReturnSetup",
    "as_word",
    "format_word",
    "parse_word",
    "periodic_extension",
    "period",
    "primitive_root",
    "rotations",
    "kappa",
    "cluster_exponent",
]


def as_word(symbols: Iterable[int]) -> Word:
    """Validate and freeze a symbol sequence."""
    w = tuple(int(a) for a in symbols)
    if not w:
        raise ParameterError("a word must contain at least one symbol")
    if any(a < 0 for a in w):
        raise ParameterError("symbols are non-negative integers")
    return w


def format_word(w: Sequence[int]) -> str:
    return ",".join(str(a) for a in w)


def parse_word(text: str) -> Word:
    """Parse ``"0,1,1"``, ``"011"`` (single-digit symbols) or ``"abb"`` (``a`` = 0)."""
    text = text.strip()
    if text.isalpha() and text.isascii() and text.islower():
        return as_word(ord(c) - ord("a") for c in text)
    if "," in text:
        parts = [p for p in text.split(",") if p.strip()]
    else:
        parts = list(text)
    try:
        return as_word(int(p) for p in parts)
    except ValueError:
        raise ParameterError(f"cannot parse word {text!r}") from None


@dataclass(frozen=True)
class ReturnSetup:
    """The rate ``t`` and the return times ``d_1 < ... < d_ell``.

    ``ReturnSetup(t)`` is the conventional setup (``ell = 1``, ``d = (1,)``).
    """

    t: float
    d: tuple[int, ...] = (1,)

    def __post_init__(self):
        d = tuple(int(x) for x in self.d)
        object.__setattr__(self, "d", d)
        if not (math.isfinite(self.t) and self.t > 0):
            raise ParameterError(f"t must be > 0, got {self.t!r}")
        if not d or d[0] < 1 or any(b <= a for a, b in zip(d, d[1:])):
            raise ParameterError(f"d must be strictly increasing positive integers, got {d}")

    @property
    def ell(self) -> int:
        return len(self.d)

    @property
    def conventional(self) -> bool:
        return self.d == (1,)

    def to_dict(self):
        return {"t": self.t, "d": list(self.d)}

    @classmethod
    def from_dict(cls, data):
        return cls(float(data["t"]), tuple(data.get("d", (1,))))


def periodic_extension(w: Sequence[int], n: int) -> Word:
    """The length-``n`` word ``w w w ...`` cut after ``n`` symbols."""
    w = as_word(w)
    if n < 1:
        raise ParameterError("n must be >= 1")
    q, rem = divmod(n, len(w))
    return w * q + w[:rem]


def period(w: Sequence[int]) -> int:
    """Smallest ``j`` with ``[w]`` overlapping its own ``j``-shift.

    That is the least ``j`` in ``1..n`` with ``w[k + j] == w[k]`` for all
    valid ``k``; ``j = n`` always qualifies.
    """
    w = as_word(w)
    n = len(w)
    for j in range(1, n):
        if w[j:] == w[: n - j]:
            return j
    return n


def primitive_root(w: Sequence[int]) -> Word:
    """Shortest block ``u`` with ``w == u**k``; identifies the minimal period of ``w^inf``."""
    w = as_word(w)
    n = len(w)
    for r in range(1, n + 1):
        if n % r == 0 and w[:r] * (n // r) == w:
            return w[:r]
    return w


def rotations(w: Sequence[int]) -> list[Word]:
    """Blocks of ``T^j(w^inf)`` for ``j = 0..|w|-1``."""
    w = as_word(w)
    return [w[j:] + w[:j] for j in range(len(w))]


def kappa(r: int, d: Sequence[int] | ReturnSetup) -> int:
    """``lcm{ r / gcd(r, d_j) }`` over the return times."""
    if r < 1:
        raise ParameterError("r must be >= 1")
    ds = d.d if isinstance(d, ReturnSetup) else tuple(d)
    return math.lcm(*(r // math.gcd(r, dj) for dj in ds))


def cluster_exponent(r: int, d: Sequence[int] | ReturnSetup) -> Fraction:
    """Exponent ``a = kappa(r) * sum(d) / r`` relating the cluster parameter to beta."""
    ds = d.d if isinstance(d, ReturnSetup) else tuple(d)
    return Fraction(kappa(r, ds) * sum(ds), r)
