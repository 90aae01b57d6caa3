"""Binary successor indicators over i.i.d. ``2^-a`` symbols.

Hidden coordinates ``a_j`` are i.i.d. on ``{1, 2, ...}`` with
``P(a) = 2^-a``.  The observed bit is ``b_j = 1`` exactly when
``a_{j+1} = a_j + 1``.  Cylinder measures come from a forward dynamic
program over the hidden value, truncated at a finite bound.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError, ProbabilityUnderflow
from .base import ShiftModel


def ones_closed_form(n: int) -> float:
    """``P[1^n] = 2^{-n(n+1)/2} 2^{-(n+1)} / (1 - 2^{-(n+1)})``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    return math.ldexp(1.0, -(n * (n + 1) // 2) - (n + 1)) / -math.expm1(-(n + 1) * math.log(2.0))


class SuccessorModel(ShiftModel):
    """Bits marking whether consecutive hidden symbols increase by exactly one.

    ``truncation`` is the number of hidden values tracked beyond the word
    length; the neglected mass is at most ``(n + 1) 2^-truncation``.
    """

    name = "successor"
    alphabet_size = 2
    psi0 = 7.0
    factorization_gap = 1

    def __init__(self, truncation: int = 64):
        if truncation < 8:
            raise ParameterError("truncation must be >= 8")
        self.truncation = int(truncation)

    def truncation_error(self, w) -> float:
        """Bound on the hidden-value mass dropped by the dynamic program."""
        n = len(w)
        return (n + 1) * 2.0 ** (-(self.truncation + n))

    def _dp(self, w):
        K = self.truncation + len(w)
        a = np.arange(1, K + 1)
        prior = np.ldexp(1.0, -a)
        f = prior.copy()  # f[a-1]: scaled mass of paths so far ending at hidden value a
        log_scale = 0.0
        for b in w:
            shifted = np.concatenate(([0.0], f[:-1]))  # mass at a' - 1
            if b == 1:
                f = prior * shifted
            else:
                f = prior * (f.sum() - shifted)
            top = f.max()
            if top == 0.0:
                return 0.0, -math.inf
            f = f / top
            log_scale += math.log(top)
        return float(f.sum()), log_scale

    def path_probs(self, paths):
        """Vectorized dynamic program over many words of equal length (no rescaling)."""
        paths = np.asarray(paths)
        K = self.truncation + paths.shape[1]
        prior = np.ldexp(1.0, -np.arange(1, K + 1))
        f = np.broadcast_to(prior, (paths.shape[0], K)).copy()
        for j in range(paths.shape[1]):
            shifted = np.concatenate([np.zeros((f.shape[0], 1)), f[:, :-1]], axis=1)
            ones = paths[:, j : j + 1] == 1
            f = prior * np.where(ones, shifted, f.sum(axis=1, keepdims=True) - shifted)
        return f.sum(axis=1)

    def cylinder_prob(self, w):
        w = self.validate_word(w)
        total, log_scale = self._dp(w)
        value = total * math.exp(log_scale)
        if value == 0.0:
            # every binary word has positive measure here
            raise ProbabilityUnderflow(f"successor cylinder of length {len(w)} underflows")
        return value

    def log_cylinder_prob(self, w):
        w = self.validate_word(w)
        total, log_scale = self._dp(w)
        return math.log(total) + log_scale

    def sample_paths(self, count, length, rng):
        hidden = rng.geometric(0.5, size=(count, length + 1))
        return (hidden[:, 1:] == hidden[:, :-1] + 1).astype(np.int8)

    def to_dict(self):
        return {"model": self.name, "truncation": self.truncation}
