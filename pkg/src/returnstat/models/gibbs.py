"""Gibbs measures of two-coordinate potentials on a subshift of finite type.

For ``phi(w) = phi(w0, w1)`` the Gibbs measure is a stationary Markov
chain.  With ``M[a, b] = exp(phi[a, b]) * S[a, b]``, Perron eigenvalue
``lam = exp(P)``, right eigenvector ``h`` and left eigenvector ``nu``::

    Q[a, b] = M[a, b] h[b] / (lam h[a]),     pi[a] ∝ nu[a] h[a].

The transfer operator acts on functions of the first coordinate as
``M.T``, so its eigenfunction (the ``h`` in the inverse Jacobian
``exp(phi - P) h(w) / h(Tw)``) is the *left* Perron vector ``nu``.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError
from .base import ShiftModel


def _is_primitive(adj: np.ndarray) -> bool:
    k = adj.shape[0]
    B = adj.astype(bool)
    P = B.copy()
    # Wielandt: a primitive k x k matrix has A^m > 0 for m = (k-1)^2 + 1
    for _ in range((k - 1) ** 2 + 1):
        if P.all():
            return True
        P = (P.astype(np.int64) @ B.astype(np.int64)) > 0
    return bool(P.all())


def perron_vector(M: np.ndarray, tol: float = 1e-14, max_iter: int = 100_000):
    """Positive eigenvector of ``M`` by power iteration, normalized to sum 1.

    Returns ``(eigenvalue, vector)``.
    """
    v = np.full(M.shape[0], 1.0 / M.shape[0])
    for _ in range(max_iter):
        w = M @ v
        lam = w.sum()
        w /= lam
        if np.max(np.abs(w - v)) < tol:
            return float(lam), w
        v = w
    raise ParameterError(f"power iteration did not converge in {max_iter} steps")


class GibbsMarkovModel(ShiftModel):
    """Gibbs measure of a range-2 potential on a topologically mixing SFT.

    Parameters
    ----------
    potential : array_like, shape (k, k)
        ``potential[a, b]`` is ``phi`` on sequences starting ``a, b``.
    admissible : array_like of 0/1, optional
        Transition matrix of the subshift; all-ones (full shift) by default.
    """

    name = "gibbs"

    def __init__(self, potential, admissible=None, tol: float = 1e-14, max_iter: int = 100_000):
        phi = np.asarray(potential, dtype=float)
        if phi.ndim != 2 or phi.shape[0] != phi.shape[1] or phi.shape[0] < 2:
            raise ParameterError("potential must be a square table over >= 2 symbols")
        S = np.ones_like(phi, dtype=np.int64) if admissible is None else np.asarray(admissible, dtype=np.int64)
        if S.shape != phi.shape or not np.isin(S, (0, 1)).all():
            raise ParameterError("admissible must be a 0/1 matrix matching the potential")
        if (S.sum(axis=0) == 0).any() or (S.sum(axis=1) == 0).any():
            raise ParameterError("admissibility matrix has an all-zero row or column")
        if not _is_primitive(S):
            raise ParameterError("admissibility matrix is not primitive (shift not mixing)")
        if not np.isfinite(phi[S == 1]).all():
            raise ParameterError("potential must be finite on admissible transitions")

        self.potential = np.where(S == 1, phi, 0.0)
        self.admissible = S
        self.alphabet_size = phi.shape[0]
        M = np.where(S == 1, np.exp(self.potential), 0.0)
        self.M = M
        lam, h = perron_vector(M, tol, max_iter)
        lam_left, nu = perron_vector(M.T, tol, max_iter)
        self.eigenvalue = lam
        self.pressure = math.log(lam)
        self.right = h
        self.left = nu
        Q = M * h[None, :] / (lam * h[:, None])
        Q /= Q.sum(axis=1, keepdims=True)
        self.Q = Q
        pi = nu * h
        self.pi = pi / pi.sum()
        self._cumQ = np.cumsum(Q, axis=1)
        self._cumpi = np.cumsum(self.pi)
        self.psi0 = self.psi(0)
        self.factorization_gap = None

    def cylinder_prob(self, w):
        w = self.validate_word(w)
        p = self.pi[w[0]]
        for a, b in zip(w, w[1:]):
            p *= self.Q[a, b]
        return float(p)

    def log_cylinder_prob(self, w):
        w = self.validate_word(w)
        with np.errstate(divide="ignore"):
            return float(np.log(self.pi[w[0]]) + sum(np.log(self.Q[a, b]) for a, b in zip(w, w[1:])))

    def path_probs(self, paths):
        paths = np.asarray(paths)
        p = self.pi[paths[:, 0]]
        if paths.shape[1] > 1:
            p = p * np.prod(self.Q[paths[:, :-1], paths[:, 1:]], axis=1)
        return p

    def sample_paths(self, count, length, rng):
        out = np.empty((count, length), dtype=np.int16)
        last = self.alphabet_size - 1
        cur = np.minimum(np.searchsorted(self._cumpi, rng.random(count), side="right"), last)
        out[:, 0] = cur
        for i in range(1, length):
            u = rng.random(count)
            cur = np.minimum((u[:, None] >= self._cumQ[cur]).sum(axis=1), last)
            out[:, i] = cur
        return out

    def inverse_jacobian(self, block):
        block = self.validate_word(block)
        a, b = block[0], block[1 % len(block)]
        if not self.admissible[a, b]:
            raise ParameterError("block is not admissible")
        return math.exp(self.potential[a, b] - self.pressure) * self.left[a] / self.left[b]

    def jacobian_product(self, block):
        block = self.validate_word(block)
        r = len(block)
        total = sum(self.potential[block[j], block[(j + 1) % r]] - self.pressure for j in range(r))
        return math.exp(total)

    def psi(self, m):
        """Exact mixing coefficient: ``max |Q^{m+1}[a, b] / pi[b] - 1|``."""
        Qm = np.linalg.matrix_power(self.Q, m + 1)
        return float(np.max(np.abs(Qm / self.pi[None, :] - 1.0)))

    def sandwich_constants(self) -> tuple[float, float]:
        """Exact bounds ``c1 <= P[w] / exp(-P n + sum_{j<n} phi(T^j x)) <= c2``.

        With ``nu . h`` normalized to 1 the ratio equals
        ``lam * nu[w0] * h[w_{n-1}] * exp(-phi(w_{n-1}, x_n))``, so the
        constants are its extremes over admissible ``(w0, w_{n-1}, x_n)``.
        """
        nh = float(self.left @ self.right)
        vals = []
        k = self.alphabet_size
        for a in range(k):
            for b in range(k):
                for c in range(k):
                    if self.admissible[b, c]:
                        vals.append(self.eigenvalue * self.left[a] * self.right[b] * math.exp(-self.potential[b, c]) / nh)
        return min(vals), max(vals)

    def to_dict(self):
        return {
            "model": self.name,
            "potential": self.potential.tolist(),
            "admissible": self.admissible.tolist(),
        }

    def describe(self):
        out = super().describe()
        out.update(
            pressure=self.pressure,
            right_eigenvector=self.right.tolist(),
            left_eigenvector=self.left.tolist(),
            stationary=self.pi.tolist(),
        )
        return out
