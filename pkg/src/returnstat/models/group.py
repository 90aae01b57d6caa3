"""Window sums of i.i.d. elements of a finite abelian group.

Base coordinates ``x_j`` are i.i.d. with law ``p`` on
``G = Z_{m1} x ... x Z_{mk}``; the observed sequence is
``y_j = x_j + ... + x_{j+N-1}``.  Elements are stored as mixed-radix
integer codes, first modulus least significant.

A cylinder ``[g_0 .. g_{n-1}]`` fixes ``x_{N-1}, x_N, ...`` once the first
``N-1`` base symbols are chosen, so its measure is a sum of ``|G|^(N-1)``
products.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..errors import CapacityError, ParameterError, ProbabilityUnderflow
from .base import ShiftModel

_RESCALE_BELOW = 1e-250


class GroupConvolutionModel(ShiftModel):
    """Pushforward of an i.i.d. group-valued sequence under an ``N``-window sum.

    Parameters
    ----------
    moduli : sequence of int
        Cyclic factors of the group.
    probs : sequence of float
        Strictly positive law on the ``prod(moduli)`` element codes.
    window : int
        Window length ``N >= 2``.
    max_enumeration : int
        Guard on ``|G|^(N-1)``, the number of summed base prefixes.
    """

    name = "group"

    def __init__(self, moduli, probs, window: int, max_enumeration: int = 10**6):
        moduli = tuple(int(m) for m in np.atleast_1d(moduli))
        if not moduli or min(moduli) < 2:
            raise ParameterError("moduli must be integers >= 2")
        size = math.prod(moduli)
        p = np.asarray(probs, dtype=float).ravel()
        if p.size != size:
            raise ParameterError(f"need {size} probabilities for the group, got {p.size}")
        if np.any(p <= 0) or np.any(p >= 1) or abs(math.fsum(p) - 1.0) > 1e-12:
            raise ParameterError("group probabilities must lie in (0,1) and sum to 1")
        if int(window) < 2:
            raise ParameterError("window N must be >= 2")
        self.moduli = moduli
        self.probs = p
        self.window = int(window)
        self.alphabet_size = size
        self.max_enumeration = int(max_enumeration)

        digits = np.array(list(itertools.product(*[range(m) for m in reversed(moduli)])))[:, ::-1]
        self._radix = np.cumprod((1,) + moduli[:-1])
        self._digits = digits  # row c = digits of code c
        total = (digits[:, None, :] + digits[None, :, :]) % np.array(moduli)
        self.add_table = (total * self._radix).sum(axis=-1)
        self.neg_table = (((-digits) % np.array(moduli)) * self._radix).sum(axis=-1)

        order = np.lexsort((np.arange(size), -p))
        self.h = int(order[0])
        self.r = int(order[1])
        self.dominant = bool(p[self.h] > p[self.r])
        self.s = self.add(self.multiple(self.h, self.window - 1), self.r)
        self.lambda_min = float(p.min())
        self.psi0 = 1.0 + self.lambda_min ** (-(self.window - 1))
        self.factorization_gap = self.window - 1

    # -- group arithmetic ------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def multiple(self, m: int, g: int) -> int:
        out = 0
        for _ in range(m):
            out = self.add(out, g)
        return out

    def encode(self, digits) -> int:
        return int(np.dot(np.asarray(digits) % np.array(self.moduli), self._radix))

    def decode(self, code: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._digits[code])

    # -- measure ---------------------------------------------------------

    def _enumerate(self, w):
        """``(sum of scaled weights, log scale)`` for the cylinder ``[w]``."""
        size, N = self.alphabet_size, self.window
        count = size ** (N - 1)
        if count > self.max_enumeration:
            raise CapacityError(f"|G|^(N-1) = {count} exceeds the enumeration guard {self.max_enumeration}")
        prefix = np.array(list(itertools.product(range(size), repeat=N - 1)), dtype=np.int64).reshape(count, N - 1)
        weight = np.prod(self.probs[prefix], axis=1)
        # running window: the last N-1 base symbols and their group sum
        buf = prefix.copy()
        partial = np.zeros(count, dtype=np.int64)
        for j in range(N - 1):
            partial = self.add_table[partial, buf[:, j]]
        log_scale = 0.0
        for j, g in enumerate(w):
            x_new = self.add_table[g, self.neg_table[partial]]
            weight = weight * self.probs[x_new]
            slot = j % (N - 1)
            partial = self.add_table[self.add_table[partial, self.neg_table[buf[:, slot]]], x_new]
            buf[:, slot] = x_new
            top = weight.max()
            if top < _RESCALE_BELOW:
                weight = weight / top
                log_scale += math.log(top)
        return float(weight.sum()), log_scale

    def path_probs(self, paths):
        """Cylinder probabilities of many words at once (no rescaling)."""
        paths = np.asarray(paths, dtype=np.int64)
        size, N = self.alphabet_size, self.window
        count = size ** (N - 1)
        if count * paths.shape[0] > 50 * self.max_enumeration:
            raise CapacityError("batched group enumeration exceeds the size guard")
        prefix = np.array(list(itertools.product(range(size), repeat=N - 1)), dtype=np.int64).reshape(count, N - 1)
        weight = np.broadcast_to(np.prod(self.probs[prefix], axis=1), (paths.shape[0], count)).copy()
        buf = np.broadcast_to(prefix, (paths.shape[0], count, N - 1)).copy()
        partial = np.zeros((paths.shape[0], count), dtype=np.int64)
        for j in range(N - 1):
            partial = self.add_table[partial, buf[..., j]]
        for j in range(paths.shape[1]):
            x_new = self.add_table[paths[:, j : j + 1], self.neg_table[partial]]
            weight *= self.probs[x_new]
            slot = j % (N - 1)
            partial = self.add_table[self.add_table[partial, self.neg_table[buf[..., slot]]], x_new]
            buf[..., slot] = x_new
        return weight.sum(axis=1)

    def cylinder_prob(self, w):
        w = self.validate_word(w)
        total, log_scale = self._enumerate(w)
        value = total * math.exp(log_scale)
        if value == 0.0:
            raise ProbabilityUnderflow(f"group cylinder of length {len(w)} underflows")
        return value

    def log_cylinder_prob(self, w):
        w = self.validate_word(w)
        total, log_scale = self._enumerate(w)
        return math.log(total) + log_scale

    # -- oscillation constants ---------------------------------------------

    def conditional_limits(self) -> tuple[float, float]:
        """Partial limits of ``P[s^(n+1)] / P[s^n]`` along the two residue classes.

        The first applies when ``(n + N - 1) mod N == 0``, the second when it
        equals ``N - 1``.  They coincide exactly when ``p_h == p_r``.
        """
        N = self.window
        ph, pr = self.probs[self.h], self.probs[self.r]
        return float((pr + (N - 1) * ph) / N), float(N * ph * pr / ((N - 1) * pr + ph))

    def limit_class(self, n: int) -> int | None:
        """0 or 1 indexing ``conditional_limits`` for this ``n``, else ``None``."""
        b = (n + self.window - 1) % self.window
        if b == 0:
            return 0
        if b == self.window - 1:
            return 1
        return None

    # -- sampling --------------------------------------------------------

    def sample_paths(self, count, length, rng):
        N = self.window
        base = rng.choice(self.alphabet_size, size=(count, length + N - 1), p=self.probs)
        out = np.zeros((count, length), dtype=np.int64)
        for c, m in enumerate(self.moduli):
            comp = self._digits[base, c]
            cs = np.concatenate([np.zeros((count, 1), dtype=np.int64), np.cumsum(comp, axis=1)], axis=1)
            out += ((cs[:, N:] - cs[:, :-N]) % m) * int(self._radix[c])
        return out

    # -- serialization -----------------------------------------------------

    def to_dict(self):
        return {
            "model": self.name,
            "moduli": list(self.moduli),
            "probs": [float(x) for x in self.probs],
            "window": self.window,
            "max_enumeration": self.max_enumeration,
        }

    def describe(self):
        out = super().describe()
        out.update(h=self.h, r=self.r, s=self.s, lambda_min=self.lambda_min, dominant=self.dominant)
        return out
