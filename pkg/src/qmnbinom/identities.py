"""Moment sums ``S[x][y] = sum_j phi(j | x) q**(j*y)`` and checks on them.

``S`` is computed two independent ways: termwise from the weights, and from
the boundary ``S[x][0] = S[0][y] = 1`` alone via the three-term relation::

    (1 - nu q**x) S[x+1][y] = (1 - nu q**y) S[x][y+1] + mu (q**y - q**x) S[x][y]

Every check returns a :class:`Report` of per-case :class:`CheckRecord` rows
instead of raising, so a sweep always runs to completion.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .distribution import SampleStream, pmf_table
from .qseries import DeformParams, InvalidParameters, Scalar, q_binomial, q_pochhammer

__all__ = [
    "CheckRecord",
    "Provenance",
    "Report",
    "STable",
    "mc_duality_check",
    "s_direct",
    "s_direct_table",
    "s_recurrence_table",
    "verify_lemma_recursion",
    "verify_normalization",
    "verify_recurrence_consistency",
    "verify_route_equivalence",
    "verify_symmetry",
    "default_grid",
    "grid_from_values",
]

FLOAT_TOLERANCE = 1e-12


class Provenance(str, enum.Enum):
    DIRECT = "direct"
    RECURRENCE = "recurrence"


@dataclass(frozen=True)
class CheckRecord:
    check_name: str
    params: DeformParams
    indices: tuple[int, ...]
    lhs: Scalar | None
    rhs: Scalar | None
    equal: bool
    tolerance: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.equal


@dataclass
class Report:
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.equal for r in self.records)

    @property
    def first_violation(self) -> CheckRecord | None:
        return next((r for r in self.records if not r.equal), None)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.equal]

    def extend(self, other: Report | Iterable[CheckRecord]) -> Report:
        self.records.extend(other.records if isinstance(other, Report) else other)
        return self

    def by_check(self) -> dict[str, list[CheckRecord]]:
        out: dict[str, list[CheckRecord]] = {}
        for r in self.records:
            out.setdefault(r.check_name, []).append(r)
        return out

    def __iter__(self) -> Iterator[CheckRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def _compare(params: DeformParams, lhs, rhs, tolerance: float | None) -> tuple[bool, float]:
    if params.is_exact and tolerance is None:
        return lhs == rhs, 0.0
    tol = FLOAT_TOLERANCE if tolerance is None else tolerance
    scale = max(1.0, abs(float(lhs)), abs(float(rhs)))
    return abs(float(lhs) - float(rhs)) <= tol * scale, tol


def _record(name, params, indices, lhs, rhs, tolerance=None, note="") -> CheckRecord:
    equal, tol = _compare(params, lhs, rhs, tolerance)
    return CheckRecord(name, params, tuple(indices), lhs, rhs, equal, tol, note)


def _powers(q: Scalar, n: int, one: Scalar) -> list[Scalar]:
    out = [one]
    for _ in range(n):
        out.append(out[-1] * q)
    return out


def s_direct(params: DeformParams, x: int, y: int) -> Scalar:
    """``sum_{j=0..x} phi(j | x) q**(j*y)``, term by term."""
    if x < 0 or y < 0:
        raise ValueError("s_direct requires x, y >= 0")
    weights = pmf_table(params, x).weights
    qy = params.q**y
    total = params.backend.coerce(0)
    power = params.backend.coerce(1)
    for w in weights:
        total += w * power
        power *= qy
    return total


@dataclass(frozen=True)
class STable:
    """``S[x][y]`` for ``0 <= x <= max_x`` and ``0 <= y <= max_y``."""

    params: DeformParams
    max_x: int
    max_y: int
    values: tuple[tuple[Scalar, ...], ...]
    provenance: Provenance

    def __getitem__(self, xy: tuple[int, int]) -> Scalar:
        x, y = xy
        return self.values[x][y]

    def transpose_equal(self, x: int, y: int) -> bool:
        return self.values[x][y] == self.values[y][x]


def s_direct_table(params: DeformParams, max_x: int, max_y: int) -> STable:
    values = tuple(tuple(s_direct(params, x, y) for y in range(max_y + 1)) for x in range(max_x + 1))
    return STable(params, max_x, max_y, values, Provenance.DIRECT)


def s_recurrence_table(params: DeformParams, max_x: int, max_y: int) -> STable:
    """Fill ``S`` from the boundary and the three-term relation only.

    ``S[x][y]`` depends on ``S[x-1][y+1]`` (same anti-diagonal, smaller x) and
    ``S[x-1][y]`` (previous anti-diagonal), so the sweep runs over diagonals
    ``d = x + y`` in increasing order and over increasing ``x`` within one.
    The rectangle's corner sits on diagonal ``max_x + max_y``, so the whole
    triangle below it is filled and then cropped.
    """
    if max_x < 0 or max_y < 0:
        raise ValueError("table bounds must be >= 0")
    q, mu, nu = params.astuple()
    one = params.backend.coerce(1)
    depth = max_x + max_y
    qp = _powers(q, depth, one)
    tri: list[list[Scalar]] = [[one] * (depth + 1 - x) for x in range(depth + 1)]
    for d in range(2, depth + 1):
        for x in range(1, d):
            y = d - x
            divisor = 1 - nu * qp[x - 1]
            assert divisor != 0, "1 - nu q**x vanished; parameters were not validated"
            tri[x][y] = (
                (1 - nu * qp[y]) * tri[x - 1][y + 1] + mu * (qp[y] - qp[x - 1]) * tri[x - 1][y]
            ) / divisor
    values = tuple(tuple(tri[x][: max_y + 1]) for x in range(max_x + 1))
    return STable(params, max_x, max_y, values, Provenance.RECURRENCE)


def verify_normalization(params: DeformParams, max_m: int, tolerance: float | None = None) -> Report:
    """Weights for each ``m <= max_m`` sum to one and none is negative."""
    report = Report()
    one = params.backend.coerce(1)
    for m in range(max_m + 1):
        table = pmf_table(params, m)
        report.records.append(_record("normalization", params, (m,), table.total, one, tolerance))
        negative = [j for j, w in enumerate(table.weights) if w < 0]
        if negative:
            report.records.append(
                CheckRecord("nonnegativity", params, (m, negative[0]), table.weights[negative[0]], 0, False)
            )
    return report


def verify_symmetry(params: DeformParams, max_n: int, tolerance: float | None = None) -> Report:
    """``S[x][y] == S[y][x]`` for all ``x, y <= max_n`` on the termwise table."""
    table = s_direct_table(params, max_n, max_n)
    return Report(
        [
            _record("symmetry", params, (x, y), table[x, y], table[y, x], tolerance)
            for x in range(max_n + 1)
            for y in range(max_n + 1)
        ]
    )


def verify_recurrence_consistency(params: DeformParams, max_n: int, tolerance: float | None = None) -> Report:
    """Plug termwise ``S`` values into both sides of the three-term relation."""
    q, mu, nu = params.astuple()
    table = s_direct_table(params, max_n + 1, max_n + 1)
    qp = _powers(q, max_n, params.backend.coerce(1))
    records = []
    for x in range(max_n + 1):
        for y in range(max_n + 1):
            lhs = (1 - nu * qp[x]) * table[x + 1, y]
            rhs = (1 - nu * qp[y]) * table[x, y + 1] + mu * (qp[y] - qp[x]) * table[x, y]
            records.append(_record("recurrence", params, (x, y), lhs, rhs, tolerance))
    return Report(records)


def verify_route_equivalence(params: DeformParams, max_n: int, tolerance: float | None = None) -> Report:
    """Termwise and recurrence-filled tables agree on the full square."""
    direct = s_direct_table(params, max_n, max_n)
    filled = s_recurrence_table(params, max_n, max_n)
    return Report(
        [
            _record("routes", params, (x, y), direct[x, y], filled[x, y], tolerance)
            for x in range(max_n + 1)
            for y in range(max_n + 1)
        ]
    )


def _pascal_split(params: DeformParams, m: int) -> Scalar:
    """``S[m+1][0]`` with ``[m+1 choose j]_q`` expanded as ``[m choose j]_q q**j + [m choose j-1]_q``."""
    q, mu, nu = params.astuple()
    zero = params.backend.coerce(0)
    dp = [params.backend.coerce(1)]
    for i in range(m + 1):
        dp.append(dp[-1] * (mu - nu * q**i))
    denom = q_pochhammer(nu, q, m + 1)
    total = zero
    for j in range(m + 2):
        prefactor = dp[j] * q_pochhammer(mu, q, m + 1 - j) / denom
        first = q_binomial(m, j, q) * q**j if j <= m else zero
        second = q_binomial(m, j - 1, q) if j >= 1 else zero
        total += prefactor * (first + second)
    return total


def verify_lemma_recursion(params: DeformParams, max_m: int, tolerance: float | None = None) -> Report:
    """The inductive step for the normalization, for each ``m <= max_m``.

    Checks::

        S[m+1][0] = (1-mu)/(1-nu) S'[m][0] + mu/(1 - nu q**m) (S[m][0] - nu/mu S[m][1])

    where ``S'`` uses the triple ``(q, q mu, q nu)``; also checks that the
    Pascal-expanded sum reproduces ``S[m+1][0]``.  With ``mu = 0`` the formula
    divides by zero, and with ``q < 0`` the shifted triple leaves the domain;
    both are recorded as vacuous passes.
    """
    q, mu, nu = params.astuple()
    if mu == 0:
        return Report([CheckRecord("lemma-recursion", params, (), None, None, True, note="vacuous: mu = 0")])
    try:
        shifted = params.shifted()
    except InvalidParameters as exc:
        return Report(
            [CheckRecord("lemma-recursion", params, (), None, None, True, note=f"vacuous: shifted triple invalid ({exc})")]
        )
    records = []
    for m in range(max_m + 1):
        lhs = s_direct(params, m + 1, 0)
        rhs = (1 - mu) / (1 - nu) * s_direct(shifted, m, 0) + mu / (1 - nu * q**m) * (
            s_direct(params, m, 0) - nu / mu * s_direct(params, m, 1)
        )
        records.append(_record("lemma-recursion", params, (m,), lhs, rhs, tolerance))
        records.append(_record("lemma-recursion-split", params, (m,), lhs, _pascal_split(params, m), tolerance))
    return Report(records)


def _moment_estimate(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = float(values.mean())
    if n < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(n))


def mc_duality_check(params: DeformParams, x: int, y: int, n_samples: int, seed: int = 0) -> Report:
    """Monte Carlo estimates of ``E[q**(x Y)]`` and ``E[q**(y X)]`` against exact ``S``.

    ``X`` and ``Y`` are drawn from independent streams spawned from ``seed``.
    Each estimate must lie within three standard errors of the termwise
    value; the tolerance recorded is that band.
    """
    if x < 0 or y < 0:
        raise ValueError("x, y must be >= 0")
    fp = params.as_float()
    exact = float(s_direct(params, x, y))
    exact_t = float(s_direct(params, y, x))
    seed_x, seed_y = np.random.SeedSequence(seed).spawn(2)
    draws_y = np.asarray(SampleStream(pmf_table(fp, y), seed_y).sample(n_samples))
    draws_x = np.asarray(SampleStream(pmf_table(fp, x), seed_x).sample(n_samples))
    records = []
    for name, draws, power, target in (
        ("mc-duality:E[q^(xY)]", draws_y, x, exact),
        ("mc-duality:E[q^(yX)]", draws_x, y, exact_t),
    ):
        values = np.power(fp.q, power * draws.astype(float))
        mean, se = _moment_estimate(values)
        band = 3.0 * se
        records.append(
            CheckRecord(name, params, (x, y), mean, target, abs(mean - target) <= band, band, note=f"se={se!r}")
        )
    return Report(records)


def default_grid(include_negative_q: bool = True) -> list[DeformParams]:
    """Rational triples from {0, 1/10, 1/4, 1/2, 3/4, 9/10} with ``nu <= mu``.

    Negative-q spot checks at ``q in {-1/4, -1/2}`` are appended when asked.
    """
    values = ["0", "1/10", "1/4", "1/2", "3/4", "9/10"]
    qs = values + (["-1/4", "-1/2"] if include_negative_q else [])
    return grid_from_values(qs, values, values)


def grid_from_values(qs: Sequence[str], mus: Sequence[str], nus: Sequence[str], backend="exact") -> list[DeformParams]:
    grid = []
    for q in qs:
        for mu in mus:
            for nu in nus:
                try:
                    grid.append(DeformParams(q, mu, nu, backend))
                except InvalidParameters:
                    continue
    return grid
