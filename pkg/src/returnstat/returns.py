"""Cluster quantities for periodic cylinders and the multiple-return count.

For a word ``w`` of length ``n`` and return times ``d_1 < ... < d_ell``
the count is

    S = sum_{k=1}^{N} prod_j 1{ path[d_j k : d_j k + n] == w },

with ``N = floor(t P[w]^-ell)``.  Around a periodic point with primitive
block ``R`` of length ``r`` its law approaches ``PA(t (1 - rho), rho)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dist import DistributionOnN
from .errors import CapacityError, DomainError, ParameterError, UnsupportedOperation
from .models.base import ShiftModel, ratio
from .symbolic import ReturnSetup, Word, as_word, cluster_exponent, format_word, kappa, period, periodic_extension, primitive_root

__all__ = [
    "CountSample",
    "ClusterStats",
    "trials_count",
    "beta",
    "rho",
    "predicted_rho",
    "cluster_stats",
    "path_length",
    "count_hits",
    "simulate_count",
    "simulate_counts",
    "exact_count_distribution",
    "fit_decay",
    "mean_envelope",
]

# Symbols per sampling chunk.  Fixed so that chunk boundaries, and with them
# the random streams, do not depend on the number of workers.
CHUNK_SYMBOLS = 1 << 22
EXACT_PATH_LIMIT = 10**7
# N = floor(t / P^ell) is evaluated in floating point; a value within this
# relative distance below an integer is treated as that integer.
_FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class CountSample:
    value: int
    path_length: int


def _positive_prob(model: ShiftModel, w: Word) -> float:
    p = model.cylinder_prob(w)
    if p <= 0.0:
        raise DomainError(f"cylinder {format_word(w)} has zero measure")
    return p


def trials_count(model: ShiftModel, w: Sequence[int], setup: ReturnSetup) -> int:
    """``N = floor(t * P[w]^-ell)``."""
    w = model.validate_word(w)
    log_p = model.log_cylinder_prob(w)
    if log_p == -math.inf:
        raise DomainError(f"cylinder {format_word(w)} has zero measure")
    log_x = math.log(setup.t) - setup.ell * log_p
    if log_x > 700:
        raise CapacityError(f"N = t * P[w]^-ell is astronomically large (log N = {log_x:.1f})")
    x = math.exp(log_x) if log_p < -300 else setup.t / _positive_prob(model, w) ** setup.ell
    N = math.floor(x)
    if (N + 1) - x <= _FLOOR_SLACK * x:
        N += 1
    if N < 1:
        raise ParameterError(f"degenerate setup: t * P[w]^-ell = {x:.6g} < 1, so N = 0")
    return N


def _primitive_block(w: Sequence[int]) -> Word:
    w = as_word(w)
    if primitive_root(w) != w:
        raise ParameterError(f"block {w} is not primitive; use {primitive_root(w)}")
    return w


def beta(model: ShiftModel, w: Sequence[int], n: int) -> float:
    """``P[w^{(n+r)/r}] / P[w^{n/r}]`` for a primitive block ``w`` of length ``r``."""
    w = _primitive_block(model.validate_word(w))
    r = len(w)
    if n < r:
        raise ParameterError(f"n = {n} must be at least the block length {r}")
    return ratio(model, periodic_extension(w, n + r), periodic_extension(w, n))


def rho(model: ShiftModel, w: Sequence[int], setup: ReturnSetup) -> float:
    """``prod_j P[R^{(n + d_j kappa)/r}] / P[w]`` with ``r = period(w)``, ``R = w[:r]``.

    Since ``w[k + r] == w[k]`` for every valid ``k``, the cylinder is exactly
    ``[R^{n/r}]`` and each conditional probability is a plain ratio.
    """
    w = model.validate_word(w)
    n = len(w)
    r = period(w)
    R = w[:r]
    k = kappa(r, setup)
    out = 1.0
    for dj in setup.d:
        out *= ratio(model, periodic_extension(R, n + dj * k), w)
    return out


def predicted_rho(model: ShiftModel, w: Sequence[int], setup: ReturnSetup) -> float:
    """Limit ``(prod_j J(T^j omega))^a`` for ``omega = w^inf`` from the model's closed form."""
    w = _primitive_block(model.validate_word(w))
    a = cluster_exponent(len(w), setup)
    value = model.jacobian_product(w) ** float(a)
    if not 0.0 <= value < 1.0:
        raise DomainError(f"predicted rho = {value} lies outside [0, 1)")
    return value


@dataclass(frozen=True)
class ClusterStats:
    """Derived quantities of the cylinder ``[w^{n/r}]``."""

    word: Word
    n: int
    prob: float
    period_r: int
    kappa: int
    exponent_a: Fraction
    rho: float
    beta: float
    trials_N: int
    predicted_rho: float | None
    setup: ReturnSetup

    @property
    def predicted_pa(self) -> tuple[float, float] | None:
        """``(t (1 - rho_omega), rho_omega)``, when the limit is known."""
        if self.predicted_rho is None:
            return None
        return self.setup.t * (1.0 - self.predicted_rho), self.predicted_rho

    def to_dict(self):
        out = asdict(self)
        out["word"] = list(self.word)
        out["exponent_a"] = str(self.exponent_a)
        out["setup"] = self.setup.to_dict()
        out["predicted_pa"] = None if self.predicted_pa is None else list(self.predicted_pa)
        return out


def cluster_stats(model: ShiftModel, block: Sequence[int], n: int, setup: ReturnSetup) -> ClusterStats:
    """All cluster quantities for the ``n``-cylinder around ``block^inf``.

    ``predicted_rho`` is ``None`` for models without a closed-form inverse
    Jacobian.
    """
    block = _primitive_block(model.validate_word(block))
    if n < len(block):
        raise ParameterError(f"n = {n} must be at least the block length {len(block)}")
    w = periodic_extension(block, n)
    r = period(w)
    # N first: it is the cheap guard against cells too large to simulate
    N = trials_count(model, w, setup)
    try:
        pred = predicted_rho(model, block, setup)
    except UnsupportedOperation:
        pred = None
    return ClusterStats(
        word=w,
        n=n,
        prob=model.cylinder_prob(w),
        period_r=r,
        kappa=kappa(r, setup),
        exponent_a=cluster_exponent(r, setup),
        rho=rho(model, w, setup),
        beta=beta(model, block, n),
        trials_N=N,
        predicted_rho=pred,
        setup=setup,
    )


# ---------------------------------------------------------------------------
# the counting statistic


def path_length(n: int, N: int, setup: ReturnSetup) -> int:
    return setup.d[-1] * N + n


def count_hits(paths: np.ndarray, w: Sequence[int], N: int, setup: ReturnSetup) -> np.ndarray:
    """``S`` for each row of ``paths`` (shape ``(count, L)`` with ``L >= d_ell N + n``).

    Only the probed offsets ``d_j k`` are compared, which is never more work
    than scanning every offset.
    """
    w = as_word(w)
    paths = np.asarray(paths)
    both = None
    for dj in setup.d:
        stop = dj * N + 1
        match = paths[:, dj:stop:dj] == w[0]
        for m in range(1, len(w)):
            match &= paths[:, dj + m : stop + m : dj] == w[m]
        both = match if both is None else both & match
    return both.sum(axis=1)


def simulate_count(model: ShiftModel, w: Sequence[int], setup: ReturnSetup, rng: np.random.Generator) -> CountSample:
    """One realization of ``S`` on a freshly sampled stationary path."""
    w = model.validate_word(w)
    N = trials_count(model, w, setup)
    L = path_length(len(w), N, setup)
    path = model.sample_paths(1, L, rng)
    return CountSample(int(count_hits(path, w, N, setup)[0]), L)


def _chunk_rng(seed: int, stream: Sequence[int], index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(*stream, index)))


def _count_chunk(args):
    model, w, N, setup, rows, seed, stream, index = args
    rng = _chunk_rng(seed, stream, index)
    paths = model.sample_paths(rows, path_length(len(w), N, setup), rng)
    return count_hits(paths, w, N, setup)


def simulate_counts(
    model: ShiftModel,
    w: Sequence[int],
    setup: ReturnSetup,
    M: int,
    seed: int,
    stream: Sequence[int] = (),
    workers: int = 1,
    N: int | None = None,
) -> np.ndarray:
    """``M`` independent draws of ``S``.

    Draws are split into chunks of a size fixed by the path length; chunk
    ``i`` uses the stream ``SeedSequence(seed, spawn_key=(*stream, i))``.
    The result therefore depends only on ``(seed, stream)`` and not on
    ``workers``.
    """
    w = model.validate_word(w)
    if M < 1:
        raise ParameterError("M must be >= 1")
    if N is None:
        N = trials_count(model, w, setup)
    L = path_length(len(w), N, setup)
    rows = max(1, CHUNK_SYMBOLS // L)
    jobs = []
    start = 0
    while start < M:
        take = min(rows, M - start)
        jobs.append((model, w, N, setup, take, int(seed), tuple(stream), len(jobs)))
        start += take
    workers = max(1, int(workers))
    if workers == 1 or len(jobs) == 1:
        parts = [_count_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            parts = list(pool.map(_count_chunk, jobs))
    return np.concatenate(parts).astype(np.int64)


def exact_count_distribution(model: ShiftModel, w: Sequence[int], setup: ReturnSetup) -> DistributionOnN:
    """Exact law of ``S`` by enumerating every path of length ``d_ell N + n``."""
    if not model.finite:
        raise UnsupportedOperation("exact enumeration needs a finite alphabet")
    w = model.validate_word(w)
    N = trials_count(model, w, setup)
    L = path_length(len(w), N, setup)
    A = model.alphabet_size
    total = A**L
    if total > EXACT_PATH_LIMIT:
        raise CapacityError(f"{A}^{L} = {total} paths exceed the enumeration limit {EXACT_PATH_LIMIT}")
    weights = np.zeros(N + 1)
    chunk = max(1, min(total, CHUNK_SYMBOLS // L))
    powers = A ** np.arange(L - 1, -1, -1, dtype=np.int64)
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        paths = (codes[:, None] // powers[None, :]) % A
        probs = model.path_probs(paths)
        S = count_hits(paths, w, N, setup)
        weights += np.bincount(S, weights=probs, minlength=N + 1)
    tail = max(0.0, 1.0 - math.fsum(weights))
    return DistributionOnN(weights, tail, "generic", {"exact": True, "N": N})


# ---------------------------------------------------------------------------
# diagnostics


def fit_decay(model: ShiftModel, block: Sequence[int], n_values: Sequence[int]) -> tuple[float, float]:
    """Least-squares fit of ``P(A_n) ~ C exp(-Gamma n)`` along ``block^inf``.

    Returns ``(Gamma, C)``.
    """
    block = model.validate_word(block)
    ns = np.asarray(list(n_values), dtype=float)
    if ns.size < 2:
        raise ParameterError("need at least two lengths to fit a decay rate")
    logs = np.array([model.log_cylinder_prob(periodic_extension(block, int(n))) for n in ns])
    slope, intercept = np.polyfit(ns, logs, 1)
    return float(-slope), float(math.exp(intercept))


def mean_envelope(model: ShiftModel, setup: ReturnSetup) -> float | None:
    """``1 + (1 + psi0)^ell t``, the bound on the mean count; ``None`` if ``psi0`` is unknown."""
    if model.psi0 is None:
        return None
    return 1.0 + (1.0 + model.psi0) ** setup.ell * setup.t


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
