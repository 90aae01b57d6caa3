"""Continued-fraction digits under the Gauss measure.

The digit cylinder ``[a1, ..., an]`` is the set of ``x = [0; a1, ..., an + s]``
for a tail ``s`` in ``[0, 1]``.  With convergents ``p/q`` and ``pp/qp`` of
the last two depths,

    x(s) = (p + pp s) / (q + qp s),   x(s) - x(0) = ±s / (q^2 (1 + y s)),

where ``y = qp / q``.  Measures are ``log2`` ratios of ``1 + x`` at the
endpoints; writing the ratio as ``1 + delta`` with ``delta`` an exact
rational keeps full relative precision at any depth.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..errors import ParameterError, ProbabilityUnderflow
from ..symbolic import as_word, rotations
from .base import ShiftModel

LN2 = math.log(2.0)
_MAX_DIGIT = float(2**62)


def convergents(w):
    """``(pp, p, qp, q)`` for the digit word ``w`` (starting from ``[0;]``)."""
    pp, p, qp, q = 1, 0, 0, 1
    for a in w:
        pp, p = p, a * p + pp
        qp, q = q, a * q + qp
    return pp, p, qp, q


class GaussModel(ShiftModel):
    """Shift on continued-fraction digits ``{1, 2, ...}`` with the Gauss measure.

    ``truncation`` bounds the digits summed over in consistency checks; it
    does not affect cylinder probabilities or sampling.
    """

    name = "gauss"
    alphabet_size = None

    def __init__(self, truncation: int = 64):
        if truncation < 1:
            raise ParameterError("truncation must be >= 1")
        self.truncation = int(truncation)

    def validate_word(self, w):
        w = as_word(w)
        if min(w) < 1:
            raise ParameterError("continued-fraction digits are >= 1")
        return w

    # -- measure ---------------------------------------------------------

    def _tail_measure(self, w, s0: Fraction, s1: Fraction):
        """``(mu, log mu)`` of the part of ``[w]`` with tail in ``[s0, s1]``."""
        pp, p, qp, q = convergents(w)

        def one_plus_x(s):
            # (1 + x(s)) as numerator/denominator over s = a/b
            a, b = s.numerator, s.denominator
            return b * (q + p) + a * (qp + pp), b * q + a * qp

        n1, d1 = one_plus_x(s1)
        n0, d0 = one_plus_x(s0)
        num = n1 * d0 - n0 * d1
        den = n0 * d1
        if num == 0:
            return 0.0, -math.inf
        delta = num / den  # correctly rounded even for huge integers
        val = abs(math.log1p(delta))
        if abs(delta) > 1e-300:
            log_mu = math.log(val) - math.log(LN2)
        else:
            # log1p(delta) == delta below this scale
            log_mu = math.log(abs(num)) - math.log(den) - math.log(LN2)
        return val / LN2, log_mu

    def cylinder_prob(self, w):
        w = self.validate_word(w)
        mu, _ = self._tail_measure(w, Fraction(0), Fraction(1))
        if mu == 0.0:
            raise ProbabilityUnderflow(f"Gauss cylinder of depth {len(w)} underflows")
        return mu

    def log_cylinder_prob(self, w):
        w = self.validate_word(w)
        return self._tail_measure(w, Fraction(0), Fraction(1))[1]

    def extension_tail(self, w, K):
        """``P[w]`` restricted to a next digit larger than ``K``."""
        w = self.validate_word(w)
        return self._tail_measure(w, Fraction(0), Fraction(1, K + 1))[0]

    def digit_marginal(self, k: int) -> float:
        """``P(a1 = k) = log2(1 + 1 / (k (k + 2)))``."""
        return math.log1p(1.0 / (k * (k + 2))) / LN2

    # -- periodic points ---------------------------------------------------

    @staticmethod
    def fixed_point(block) -> float:
        """Quadratic irrational ``[0; block, block, ...]``."""
        pp, p, qp, q = convergents(block)
        # qp x^2 + (q - pp) x - p = 0, positive root in the cancellation-free form
        b = q - pp
        return 2.0 * p / (b + math.sqrt(b * b + 4.0 * qp * p))

    def inverse_jacobian(self, block):
        """``p(x) / (|f'(x)| p(Tx))`` at ``x`` the fixed point of ``block``.

        The Gauss branches are decreasing; ``|f'(x)| = 1 / x^2`` keeps the
        value positive.
        """
        block = self.validate_word(block)
        x = self.fixed_point(block)
        xt = self.fixed_point(block[1:] + block[:1])
        return x * x * (1.0 + xt) / (1.0 + x)

    def jacobian_product(self, block):
        """``prod_j |f'(Theta(T^j w))|^{-1}`` over the orbit, i.e. ``prod x_j^2``."""
        block = self.validate_word(block)
        return math.prod(self.fixed_point(b) ** 2 for b in rotations(block))

    # -- sampling --------------------------------------------------------

    def sample_paths(self, count, length, rng):
        """Digits drawn sequentially from their exact conditional law.

        Per path the state is ``(y, x0, eps, sign)`` with ``y = qp/q``,
        ``x0 = p/q``, ``eps = 1 / (q^2 (1 + x0))``.  The conditional
        probability that the tail lies in ``[0, s]`` is
        ``log1p(sign eps s/(1+ys)) / log1p(sign eps/(1+y))``, which is
        inverted in closed form.  Once ``eps`` is below double resolution
        the ratio equals the kernel ``(1+y) s / (1+ys)`` to machine
        precision and that form is used.
        """
        out = np.empty((count, length), dtype=np.int64)
        y = np.zeros(count)
        x0 = np.zeros(count)
        eps = np.ones(count)
        sign = np.ones(count)
        for i in range(length):
            u = 1.0 - rng.random(count)  # (0, 1]
            exact = eps > 1e-17
            s = u / (1.0 + y - u * y)
            if exact.any():
                e, sg, yy = eps[exact], sign[exact], y[exact]
                lam = u[exact] * np.log1p(sg * e / (1.0 + yy))
                g = np.expm1(lam) / (sg * e)
                s[exact] = g / (1.0 - yy * g)
            s = np.clip(s, 1.0 / _MAX_DIGIT, 1.0)
            k = np.floor(1.0 / s)
            k = np.maximum(k, 1.0)
            out[:, i] = k.astype(np.int64)
            step = sign * eps * (1.0 + x0) / (k + y)
            x0_new = x0 + step
            eps = eps * (1.0 + x0) / ((k + y) ** 2 * (1.0 + x0_new))
            x0 = x0_new
            y = 1.0 / (k + y)
            sign = -sign
        return out

    def to_dict(self):
        return {"model": self.name, "truncation": self.truncation}
