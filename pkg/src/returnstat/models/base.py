"""Abstract stationary symbolic source."""

from __future__ import annotations

import abc
import itertools
import math
from typing import Any, Sequence

import numpy as np

from ..errors import DomainError, ParameterError, ProbabilityUnderflow, UnsupportedOperation
from ..symbolic import Word, as_word, rotations


class ShiftModel(abc.ABC):
    """A shift-invariant probability measure on sequences over an alphabet.

    Subclasses supply exact cylinder probabilities and stationary path
    sampling.  Finite alphabets are ``{0, ..., alphabet_size - 1}``; a
    countable alphabet sets ``alphabet_size = None`` and carries a
    ``truncation`` bound used wherever a sum over symbols is needed.

    Attributes
    ----------
    psi0 : float or None
        Known bound on the mixing coefficient at gap 0, if any.
    factorization_gap : int or None
        Gap from which cylinder events factorize exactly (0 for iid).
    gamma_bound : float or None
        A rate with ``P[w] <= exp(-gamma_bound * |w|)`` for every word.
    """

    name: str = "abstract"
    alphabet_size: int | None = None
    truncation: int | None = None
    psi0: float | None = None
    factorization_gap: int | None = None
    gamma_bound: float | None = None

    # -- symbols ---------------------------------------------------------

    @property
    def finite(self) -> bool:
        return self.alphabet_size is not None

    def symbols(self) -> list[int]:
        """Every symbol for finite alphabets; symbols up to the truncation otherwise."""
        if self.finite:
            return list(range(self.alphabet_size))
        return list(range(1, self.truncation + 1))

    def validate_word(self, w: Sequence[int]) -> Word:
        w = as_word(w)
        if self.finite and max(w) >= self.alphabet_size:
            raise ParameterError(f"symbol {max(w)} outside alphabet of size {self.alphabet_size}")
        return w

    # -- measure ---------------------------------------------------------

    @abc.abstractmethod
    def cylinder_prob(self, w: Sequence[int]) -> float:
        """Exact measure of the cylinder ``[w]``."""

    def log_cylinder_prob(self, w: Sequence[int]) -> float:
        p = self.cylinder_prob(w)
        return math.log(p) if p > 0 else -math.inf

    def extension_tail(self, w: Sequence[int], K: int) -> float:
        """Measure of ``[w]`` followed by a symbol beyond ``K`` (0 for finite alphabets)."""
        return 0.0

    def path_probs(self, paths: np.ndarray) -> np.ndarray:
        """Cylinder probabilities of each row of ``paths``."""
        return np.array([self.cylinder_prob(row) for row in np.asarray(paths)])

    def joint_prob(self, E: Sequence[int], gap: int, F: Sequence[int]) -> float:
        """``P([E] ∩ T^{-(|E| + gap)} [F])`` by summing over the gap symbols."""
        if not self.finite:
            raise UnsupportedOperation("gap enumeration needs a finite alphabet")
        E, F = self.validate_word(E), self.validate_word(F)
        total = 0.0
        for mid in itertools.product(self.symbols(), repeat=gap):
            total += self.cylinder_prob(E + tuple(mid) + F)
        return total

    # -- sampling --------------------------------------------------------

    @abc.abstractmethod
    def sample_paths(self, count: int, length: int, rng: np.random.Generator) -> np.ndarray:
        """``count`` independent stationary paths, shape ``(count, length)``."""

    def sample_path(self, length: int, rng: np.random.Generator) -> np.ndarray:
        if length < 1:
            raise ParameterError("length must be >= 1")
        return self.sample_paths(1, length, rng)[0]

    # -- inverse Jacobian ------------------------------------------------

    def inverse_jacobian(self, block: Sequence[int]) -> float:
        """Inverse Jacobian evaluated at the periodic point ``block^inf``."""
        raise UnsupportedOperation(f"{self.name} model has no closed-form inverse Jacobian")

    def jacobian_product(self, block: Sequence[int]) -> float:
        """Product of the inverse Jacobian along the orbit of ``block^inf``."""
        return math.prod(self.inverse_jacobian(b) for b in rotations(block))

    # -- mixing ----------------------------------------------------------

    def psi(self, m: int) -> float | None:
        if m == 0:
            return self.psi0
        if self.factorization_gap is not None and m >= self.factorization_gap:
            return 0.0
        return None

    def mixing_profile(self) -> dict[str, Any]:
        return {"psi0": self.psi0, "factorization_gap": self.factorization_gap, "gamma_bound": self.gamma_bound}

    # -- serialization ---------------------------------------------------

    @abc.abstractmethod
    def to_dict(self) -> dict[str, Any]:
        """Config record that rebuilds this model via ``model_from_config``."""

    def describe(self) -> dict[str, Any]:
        """Config echo plus derived data for reports."""
        out = dict(self.to_dict())
        out["mixing"] = self.mixing_profile()
        return out

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


def checked_prob(value: float, positive: bool) -> float:
    """Return ``value`` unless a positive probability underflowed to zero."""
    if value == 0.0 and positive:
        raise ProbabilityUnderflow("cylinder probability underflows double precision")
    return value


def _short(w: Sequence[int], limit: int = 24) -> str:
    w = tuple(w)
    if len(w) <= limit:
        return str(w)
    return f"{str(w[:limit])[:-1]}, ... (length {len(w)})"


def ratio(model: ShiftModel, num: Sequence[int], den: Sequence[int]) -> float:
    """``P[num] / P[den]`` that survives underflow of both factors."""
    try:
        d = model.cylinder_prob(den)
        if d > 1e-290:
            return model.cylinder_prob(num) / d
    except ProbabilityUnderflow:
        pass
    ld = model.log_cylinder_prob(den)
    if ld == -math.inf:
        raise DomainError(f"zero-measure cylinder {_short(den)}")
    return math.exp(model.log_cylinder_prob(num) - ld)
