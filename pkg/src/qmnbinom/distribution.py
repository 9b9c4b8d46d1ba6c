"""The (q, mu, nu)-deformed binomial distribution.

For ``0 <= j <= m`` the weight is::

    phi(j | m) = mu**j (nu/mu; q)_j (mu; q)_{m-j} / (nu; q)_m * [m choose j]_q

with ``mu**j (nu/mu; q)_j`` evaluated as ``prod_{i<j} (mu - nu q**i)`` so that
``mu = 0`` needs no division.
"""
from __future__ import annotations

import functools
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Sequence

import numpy as np

from .qseries import (
    DeformParams,
    Scalar,
    q_binomial,
    q_pochhammer,
    q_pochhammer_infinite,
)

__all__ = [
    "INF",
    "ConvergenceError",
    "PmfTable",
    "SampleStream",
    "TAIL_EPSILON",
    "deformed_power",
    "pmf",
    "pmf_table",
    "pmf_table_infinite",
    "sample",
]

INF = math.inf
TAIL_EPSILON = 1e-12
MAX_INFINITE_TERMS = 100_000


class ConvergenceError(RuntimeError):
    """The infinite-m table did not accumulate enough mass within the term cap."""


def deformed_power(params: DeformParams, j: int) -> Scalar:
    """``mu**j (nu/mu; q)_j`` in product form ``prod_{i<j} (mu - nu q**i)``."""
    q, mu, nu = params.astuple()
    result = params.backend.coerce(1)
    power = params.backend.coerce(1)
    for _ in range(j):
        result *= mu - nu * power
        power *= q
    return result


def pmf(params: DeformParams, j: int, m: int) -> Scalar:
    """Return ``phi(j | m)`` evaluated straight from the definition."""
    if j < 0 or j > m:
        raise ValueError(f"pmf requires 0 <= j <= m, got j={j}, m={m}")
    q, mu, nu = params.astuple()
    return (
        deformed_power(params, j)
        * q_pochhammer(mu, q, m - j)
        / q_pochhammer(nu, q, m)
        * q_binomial(m, j, q)
    )


@dataclass(frozen=True)
class PmfTable:
    """Weights ``phi(0 | m), ..., phi(J | m)`` for one parameter triple.

    For the infinite-m table ``m`` is :data:`INF` and ``effective_len`` is the
    truncation length.
    """

    params: DeformParams
    m: int | float
    weights: tuple[Scalar, ...]
    effective_len: int = field(default=-1)

    def __post_init__(self):
        if self.effective_len < 0:
            object.__setattr__(self, "effective_len", len(self.weights))

    @property
    def is_infinite(self) -> bool:
        return self.m == INF

    @property
    def total(self) -> Scalar:
        return sum(self.weights, self.params.backend.coerce(0))

    def cumulative(self) -> list[Scalar]:
        return list(accumulate(self.weights))

    @functools.cached_property
    def cdf(self) -> tuple[float, ...]:
        """Float cumulative table used for inverse-CDF lookup.

        Exact weights are accumulated exactly before conversion.
        """
        return tuple(float(c) for c in accumulate(self.weights))

    def mean(self) -> Scalar:
        return sum((j * w for j, w in enumerate(self.weights)), self.params.backend.coerce(0))

    def variance(self) -> Scalar:
        mu = self.mean()
        second = sum((j * j * w for j, w in enumerate(self.weights)), self.params.backend.coerce(0))
        return second - mu * mu

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, j: int) -> Scalar:
        return self.weights[j]


def _prefix_products(values: Sequence[Scalar], one: Scalar) -> list[Scalar]:
    out = [one]
    for v in values:
        out.append(out[-1] * v)
    return out


@functools.lru_cache(maxsize=8192)
def pmf_table(params: DeformParams, m: int) -> PmfTable:
    """All weights for ``j = 0..m``.

    Shares the Pochhammer prefix products across ``j``; each weight is the same
    product of factors :func:`pmf` forms on its own.
    """
    if m < 0:
        raise ValueError(f"pmf_table requires m >= 0, got m={m}")
    q, mu, nu = params.astuple()
    one = params.backend.coerce(1)
    powers = _prefix_products([q] * m, one)  # q**i, i = 0..m
    qq = _prefix_products([1 - powers[i + 1] for i in range(m)], one)  # (q;q)_k
    dp = _prefix_products([mu - nu * powers[i] for i in range(m)], one)
    mu_poch = _prefix_products([1 - mu * powers[i] for i in range(m)], one)
    nu_poch = q_pochhammer(nu, q, m)
    weights = tuple(
        dp[j] * mu_poch[m - j] / nu_poch * (qq[m] / (qq[j] * qq[m - j]))
        for j in range(m + 1)
    )
    return PmfTable(params, m, weights)


@functools.lru_cache(maxsize=256)
def pmf_table_infinite(params: DeformParams, tail_epsilon: float = TAIL_EPSILON) -> PmfTable:
    """Termwise ``m -> inf`` limit of the weights, truncated once mass >= 1 - tail_epsilon.

    ``w_j = prod_{i<j}(mu - nu q**i) * (mu;q)_inf / (nu;q)_inf / (q;q)_j``.
    Always evaluated in floating point; exact triples are converted.
    """
    if not tail_epsilon > 0:
        raise ValueError("tail_epsilon must be positive")
    fp = params.as_float()
    q, mu, nu = fp.astuple()
    scale = q_pochhammer_infinite(mu, q) / q_pochhammer_infinite(nu, q)
    target = 1.0 - tail_epsilon
    weights = []
    term = scale  # w_j, updated by the factor (mu - nu q**j) / (1 - q**(j+1))
    power = 1.0
    total = 0.0
    for j in range(MAX_INFINITE_TERMS):
        weights.append(term)
        total += term
        if total >= target:
            return PmfTable(fp, INF, tuple(weights), effective_len=j + 1)
        term *= (mu - nu * power) / (1.0 - power * q)
        power *= q
    raise ConvergenceError(
        f"infinite-m weights reached mass {total!r} < {target!r} after "
        f"{MAX_INFINITE_TERMS} terms ({fp})"
    )


class SampleStream:
    """Seeded source of draws from a :class:`PmfTable` by inverse-CDF lookup.

    A stream owns one numpy ``Generator``; it is not safe to share between
    threads.  Draws from other tables through :meth:`draw` consume the same
    generator, which is how the particle simulators use one stream per replica.
    """

    def __init__(self, pmf: PmfTable | None = None, seed: int = 0):
        self.pmf = pmf
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    @property
    def rng(self) -> np.random.Generator:
        return self._rng

    def uniforms(self, count: int) -> list[float]:
        return self._rng.random(count).tolist()

    @staticmethod
    def lookup(cdf: Sequence[float], u: float) -> int:
        """Smallest ``j`` with ``u * total <= cdf[j]`` (ties go to the smaller j)."""
        return bisect_left(cdf, u * cdf[-1])

    def draw(self, table: PmfTable) -> int:
        return self.lookup(table.cdf, self._rng.random())

    def sample(self, count: int) -> list[int]:
        if self.pmf is None:
            raise ValueError("stream has no pmf table attached")
        cdf = np.asarray(self.pmf.cdf)
        u = self._rng.random(count)
        return np.searchsorted(cdf, u * cdf[-1], side="left").tolist()


def sample(stream: SampleStream, count: int) -> list[int]:
    """``count`` i.i.d. draws from the stream's table."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return stream.sample(count)

