"""Probability distributions on the non-negative integers.

Every law is stored as a truncated mass vector ``masses[0..kmax]`` plus the
probability ``tail_mass`` that lies beyond ``kmax``.  The closed-form
families (Poisson, geometric, compound Poisson, Polya-Aeppli) are built with
a truncation tolerance so that ``tail_mass`` never exceeds it.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import special, stats

from .errors import ParameterError, UsageError

__all__ = [
    "DistributionOnN",
    "CompoundParams",
    "poisson_pmf",
    "geometric_pmf",
    "polya_aeppli_pmf",
    "compound_poisson_pmf",
    "poisson",
    "geometric",
    "polya_aeppli",
    "compound_poisson",
    "point_mass",
    "convolve",
    "characteristic_function",
    "geometric_characteristic",
    "total_variation",
    "sample_polya_aeppli",
    "empirical_distribution",
]

KINDS = ("poisson", "geometric", "compound_poisson", "polya_aeppli", "empirical", "generic")
NORMALIZATION_TOL = 1e-12
DEFAULT_TOL = 1e-15
_DIRECT_K_MAX = 30


@dataclass(frozen=True, eq=False)
class DistributionOnN:
    """A truncated probability mass function on {0, 1, 2, ...}.

    Parameters
    ----------
    masses : array_like
        ``masses[k]`` is the probability of ``k`` for ``k <= kmax``.
    tail_mass : float
        Probability of the event ``{k > kmax}``.
    kind : str
        Descriptive family tag, one of ``KINDS``.
    params : dict
        Family parameters, echoed into serialized output.
    """

    masses: np.ndarray
    tail_mass: float = 0.0
    kind: str = "generic"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.masses, dtype=float).ravel()
        if m.size == 0:
            raise ParameterError("a distribution needs at least one mass")
        if self.kind not in KINDS:
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        if np.any(~np.isfinite(m)) or np.any(m < 0.0) or np.any(m > 1.0):
            raise ParameterError("masses must lie in [0, 1]")
        tail = float(self.tail_mass)
        if not (tail >= 0.0):
            raise ParameterError("tail_mass must be non-negative")
        total = math.fsum(m) + tail
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ParameterError(f"masses + tail_mass sum to {total!r}, not 1")
        m.flags.writeable = False
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "tail_mass", tail)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def kmax(self) -> int:
        return self.masses.size - 1

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        return float(self.masses[k]) if k <= self.kmax else 0.0

    def __getitem__(self, k: int) -> float:
        return self.pmf(k)

    def padded(self, kmax: int) -> np.ndarray:
        """Mass vector zero-padded (or cut) to length ``kmax + 1``."""
        out = np.zeros(kmax + 1)
        n = min(kmax, self.kmax) + 1
        out[:n] = self.masses[:n]
        return out

    def mean(self) -> float:
        """Mean of the truncated part; exact when ``tail_mass == 0``."""
        return float(np.dot(np.arange(self.masses.size), self.masses))

    def survival(self, b: int) -> float:
        """Lower estimate of ``P[b, inf)``: retained masses from ``b`` on plus the tail."""
        if b <= 0:
            return 1.0
        return float(self.masses[b:].sum()) + self.tail_mass

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "params": self.params,
            "masses": [float(x) for x in self.masses],
            "tail_mass": self.tail_mass,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DistributionOnN":
        try:
            return cls(
                masses=data["masses"],
                tail_mass=data.get("tail_mass", 0.0),
                kind=data.get("kind", "generic"),
                params=data.get("params", {}),
            )
        except KeyError as exc:
            raise ParameterError(f"missing field {exc} in distribution record") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DistributionOnN":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        head = ", ".join(f"{x:.6g}" for x in self.masses[:6])
        more = ", ..." if self.kmax >= 6 else ""
        return f"DistributionOnN({self.kind}, [{head}{more}], tail={self.tail_mass:.3g})"


@dataclass(frozen=True)
class CompoundParams:
    """Rate and compounding law of a compound Poisson distribution."""

    t: float
    nu: DistributionOnN

    def __post_init__(self):
        _check_rate(self.t)
        if not isinstance(self.nu, DistributionOnN):
            raise ParameterError("nu must be a DistributionOnN")


def _check_rate(t):
    if not (np.isfinite(t) and t > 0):
        raise ParameterError(f"t must be > 0, got {t!r}")


def _check_p(p):
    if not (0.0 <= p < 1.0):
        raise ParameterError(f"p must be in [0,1), got {p!r}")


def _check_k(k):
    if int(k) != k or k < 0:
        raise ParameterError(f"k must be a natural number, got {k!r}")
    return int(k)


# ---------------------------------------------------------------------------
# closed-form pmfs

def poisson_pmf(t: float, k: int) -> float:
    """``exp(-t) t**k / k!``; evaluated in log space for ``k > 30``."""
    _check_rate(t)
    k = _check_k(k)
    if k <= _DIRECT_K_MAX:
        return math.exp(-t) * t**k / math.factorial(k)
    return math.exp(k * math.log(t) - t - math.lgamma(k + 1))


def geometric_pmf(p: float, k: int) -> float:
    """``(1-p) p**(k-1)`` on k >= 1; the support excludes 0."""
    _check_p(p)
    k = _check_k(k)
    if k == 0:
        return 0.0
    return (1.0 - p) * p ** (k - 1)


def polya_aeppli_pmf(t: float, p: float, k: int) -> float:
    _check_rate(t)
    _check_p(p)
    k = _check_k(k)
    if k == 0:
        return math.exp(-t)
    if p == 0.0:
        return poisson_pmf(t, k)
    j = np.arange(1, k + 1)
    # log C(k-1, j-1) via log-gamma
    logc = special.gammaln(k) - special.gammaln(j) - special.gammaln(k - j + 1)
    logs = logc + j * math.log(t) - special.gammaln(j + 1) + (k - j) * math.log(p) + j * math.log1p(-p)
    return float(math.exp(special.logsumexp(logs) - t))


def compound_poisson_pmf(params: CompoundParams, k: int, tol: float = 1e-12) -> float:
    """Mass at ``k`` of CP(t, nu), with absolute error at most ``tol``.

    The series over the number of jumps includes the j = 0 term (a point
    mass at 0), so the value at k = 0 is at least ``exp(-t)``.
    """
    k = _check_k(k)
    if not tol > 0:
        raise ParameterError("tol must be > 0")
    masses = _cp_masses(params.t, params.nu.padded(k).tobytes(), k, tol)
    return float(masses[k])


def _poisson_cutoff(t: float, tol: float) -> int:
    """Smallest J with P(Pois(t) > J) < tol."""
    J = max(int(stats.poisson.isf(tol, t)), 0)
    while stats.poisson.sf(J, t) >= tol:
        J += 1
    while J > 0 and stats.poisson.sf(J - 1, t) < tol:
        J -= 1
    return J


@functools.lru_cache(maxsize=64)
def _cp_masses(t: float, nu_bytes: bytes, kmax: int, tol: float) -> np.ndarray:
    nu = np.frombuffer(nu_bytes, dtype=float)
    J = _poisson_cutoff(t, tol)
    if nu[0] == 0.0:
        J = min(J, kmax)
    out = np.zeros(kmax + 1)
    power = np.zeros(kmax + 1)
    power[0] = 1.0
    logt = math.log(t)
    for j in range(J + 1):
        weight = math.exp(j * logt - t - math.lgamma(j + 1))
        out += weight * power
        power = np.convolve(power, nu)[: kmax + 1]
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# distribution objects

def point_mass(k: int) -> DistributionOnN:
    k = _check_k(k)
    m = np.zeros(k + 1)
    m[k] = 1.0
    return DistributionOnN(m, 0.0, "generic", {"point": k})


def poisson(t: float, tol: float = DEFAULT_TOL) -> DistributionOnN:
    _check_rate(t)
    K = _poisson_cutoff(t, tol)
    masses = stats.poisson.pmf(np.arange(K + 1), t)
    tail = float(stats.poisson.sf(K, t))
    return _normalized(masses, tail, "poisson", {"t": t})


def geometric(p: float, tol: float = DEFAULT_TOL) -> DistributionOnN:
    _check_p(p)
    if p == 0.0:
        K = 1
    else:
        # tail beyond K is p**K
        K = max(1, math.ceil(math.log(tol) / math.log(p)))
    k = np.arange(K + 1)
    masses = np.where(k >= 1, (1.0 - p) * p ** np.maximum(k - 1, 0), 0.0)
    return _normalized(masses, p**K, "geometric", {"p": p})


def polya_aeppli(t: float, p: float, tol: float = DEFAULT_TOL, kmax: int | None = None) -> DistributionOnN:
    """PA(t, p) truncated where the remaining mass drops below ``tol``."""
    _check_rate(t)
    _check_p(p)
    if p == 0.0:
        d = poisson(t, tol)
        return DistributionOnN(d.masses, d.tail_mass, "polya_aeppli", {"t": t, "p": p})
    masses = [math.exp(-t)]
    k = 0
    while True:
        k += 1
        masses.append(polya_aeppli_pmf(t, p, k))
        if kmax is not None:
            if k >= kmax:
                break
        elif 1.0 - math.fsum(masses) < tol and masses[-1] < tol:
            break
    tail = max(1.0 - math.fsum(masses), 0.0)
    return _normalized(np.array(masses), tail, "polya_aeppli", {"t": t, "p": p})


def compound_poisson(t: float, nu: DistributionOnN, kmax: int, tol: float = DEFAULT_TOL) -> DistributionOnN:
    """CP(t, nu) on {0..kmax}; the mass beyond ``kmax`` becomes the tail."""
    params = CompoundParams(t, nu)
    kmax = _check_k(kmax)
    masses = np.array(_cp_masses(params.t, nu.padded(kmax).tobytes(), kmax, tol))
    tail = max(1.0 - math.fsum(masses), 0.0)
    return _normalized(masses, tail, "compound_poisson", {"t": t, "nu": nu.to_dict()})


def _normalized(masses, tail, kind, params):
    masses = np.clip(np.asarray(masses, dtype=float), 0.0, 1.0)
    tail = float(tail)
    # absorb float drift into the tail so the normalization invariant holds
    drift = 1.0 - (math.fsum(masses) + tail)
    if drift > 0:
        tail += drift
    return DistributionOnN(masses, tail, kind, params)


def convolve(mu: DistributionOnN, nu: DistributionOnN) -> DistributionOnN:
    """Law of X + Y for independent X ~ mu, Y ~ nu."""
    masses = np.clip(np.convolve(mu.masses, nu.masses), 0.0, 1.0)
    # P(X > kx or Y > ky) = a + b - ab bounds the mass lost to truncation
    tail = mu.tail_mass + nu.tail_mass - mu.tail_mass * nu.tail_mass
    return DistributionOnN(masses, tail, "generic", {})


def characteristic_function(dist: DistributionOnN, x):
    """``sum_k masses[k] exp(i x k)``; broadcasts over array ``x``."""
    x = np.asarray(x, dtype=float)
    k = np.arange(dist.masses.size)
    phase = np.exp(1j * np.multiply.outer(x, k))
    out = phase @ dist.masses
    return complex(out) if out.ndim == 0 else out


def geometric_characteristic(p: float, x):
    """Closed form of the characteristic function of Geo(p) on k >= 1."""
    _check_p(p)
    z = np.exp(1j * np.asarray(x, dtype=float))
    return (1.0 - p) * z / (1.0 - p * z)


def total_variation(mu: DistributionOnN, nu: DistributionOnN, with_uncertainty: bool = False):
    """Half the L1 distance between two laws.

    The retained masses contribute ``0.5 * sum |mu{k} - nu{k}|`` and the
    tails contribute ``0.5 * |tail_mu - tail_nu|``.  The true distance lies
    within ``0.5 * (tail_mu + tail_nu)`` of this value; pass
    ``with_uncertainty=True`` to get ``(value, uncertainty)``.
    """
    K = max(mu.kmax, nu.kmax)
    diff = np.abs(mu.padded(K) - nu.padded(K))
    value = 0.5 * math.fsum(diff) + 0.5 * abs(mu.tail_mass - nu.tail_mass)
    value = min(max(value, 0.0), 1.0)
    if with_uncertainty:
        return value, 0.5 * (mu.tail_mass + nu.tail_mass)
    return value


# ---------------------------------------------------------------------------
# sampling and empirical laws

def sample_polya_aeppli(t: float, p: float, rng: np.random.Generator, size: int | None = None):
    """Exact draws from PA(t, p): a Poisson(t) number of Geo(p) jumps summed.

    With ``p == 0`` the result is exactly ``rng.poisson(t, size)``.
    """
    _check_rate(t)
    _check_p(p)
    if p == 0.0:
        return rng.poisson(t, size)
    n = 1 if size is None else int(size)
    W = rng.poisson(t, n)
    jumps = rng.geometric(1.0 - p, int(W.sum()))
    owner = np.repeat(np.arange(n), W)
    out = np.bincount(owner, weights=jumps, minlength=n).astype(np.int64)
    return int(out[0]) if size is None else out


def empirical_distribution(samples: Iterable[int] | Sequence[int] | np.ndarray) -> DistributionOnN:
    """Normalized histogram of natural-number samples."""
    x = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples)
    if x.size == 0:
        raise UsageError("empirical_distribution needs at least one sample")
    if np.any(x < 0) or np.any(x != np.floor(x)):
        raise UsageError("samples must be natural numbers")
    counts = np.bincount(x.astype(np.int64).ravel())
    masses = counts / x.size
    drift = 1.0 - math.fsum(masses)
    if drift != 0.0:
        masses[np.argmax(masses)] += drift
    return DistributionOnN(masses, 0.0, "empirical", {"samples": int(x.size)})
