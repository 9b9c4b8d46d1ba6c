"""q-Pochhammer symbols, Gaussian binomial coefficients and the parameter triple.

Two scalar backends are supported.  ``Backend.EXACT`` stores every value as a
:class:`fractions.Fraction`, so all arithmetic on rational inputs is exact and
equality is decidable.  ``Backend.FLOAT`` stores IEEE doubles; callers compare
float results with explicit tolerances.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union[Fraction, float]

__all__ = [
    "Backend",
    "DeformParams",
    "InvalidParameters",
    "Scalar",
    "q_binomial",
    "q_pochhammer",
    "q_pochhammer_infinite",
    "to_scalar",
]


class InvalidParameters(ValueError):
    """Raised when a (q, mu, nu) triple violates the domain constraints."""


class Backend(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"

    def coerce(self, value) -> Scalar:
        return to_scalar(value, self)


def to_scalar(value, backend: Backend | str = Backend.EXACT) -> Scalar:
    """Convert ``value`` to the scalar type of ``backend``.

    Strings may be ``"p/q"`` fractions or decimals.  In the exact backend a
    decimal string such as ``"0.1"`` becomes exactly ``1/10``, not the binary
    double nearest to it.
    """
    backend = Backend(backend)
    if isinstance(value, str):
        text = value.strip()
        try:
            exact = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {value!r} as a number") from exc
        return exact if backend is Backend.EXACT else float(exact)
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (Rational, float)):
        return Fraction(value) if backend is Backend.EXACT else float(value)
    raise TypeError(f"unsupported scalar type {type(value).__name__}")


def _one_like(*values) -> Scalar:
    if any(isinstance(v, float) for v in values):
        return 1.0
    return Fraction(1)


def _check_q(q) -> None:
    if not abs(q) < 1:
        raise ValueError(f"requires |q| < 1, got q={q}")


def q_pochhammer(z: Scalar, q: Scalar, n: int) -> Scalar:
    """Return ``(z; q)_n``, the product of ``1 - z q**i`` for ``i < n``.

    The empty product (``n == 0``) is one.
    """
    if n < 0:
        raise ValueError(f"q_pochhammer requires n >= 0, got n={n}")
    _check_q(q)
    result = _one_like(z, q)
    power = _one_like(z, q)
    for _ in range(n):
        result *= 1 - power * z
        power *= q
    return result


def q_pochhammer_infinite(z: float, q: float, cutoff: float = 1e-17) -> float:
    """Float evaluation of ``(z; q)_inf``.

    The product stops at the first factor ``1 - z q**i`` lying within
    ``cutoff`` of one; every later factor is closer still because ``|q| < 1``.
    """
    z = float(z)
    q = float(q)
    _check_q(q)
    result = 1.0
    term = z
    while abs(term) >= cutoff:
        result *= 1.0 - term
        term *= q
    return result


def q_binomial(m: int, j: int, q: Scalar) -> Scalar:
    """Gaussian binomial coefficient ``(q;q)_m / ((q;q)_j (q;q)_{m-j})``.

    Evaluated as ``prod_{i=1..j} (1 - q**(m-j+i)) / (1 - q**i)``, which carries
    the same value without forming the three Pochhammer symbols separately.
    """
    if j < 0 or j > m:
        raise ValueError(f"q_binomial requires 0 <= j <= m, got m={m}, j={j}")
    _check_q(q)
    result = _one_like(q)
    for i in range(1, j + 1):
        result = result * (1 - q ** (m - j + i)) / (1 - q**i)
    return result


@dataclass(frozen=True)
class DeformParams:
    """A validated ``(q, mu, nu)`` triple with ``|q| < 1`` and ``0 <= nu <= mu < 1``.

    Inputs are coerced to the requested backend; when ``backend`` is omitted
    the triple is exact unless one of the inputs is a float.

    >>> DeformParams("1/2", "1/2", "1/4")
    DeformParams(q=Fraction(1, 2), mu=Fraction(1, 2), nu=Fraction(1, 4), backend=<Backend.EXACT: 'exact'>)
    """

    q: Scalar
    mu: Scalar
    nu: Scalar
    backend: Backend = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        backend = self.backend
        if backend is None:
            floats = any(isinstance(v, float) for v in (self.q, self.mu, self.nu))
            backend = Backend.FLOAT if floats else Backend.EXACT
        backend = Backend(backend)
        q, mu, nu = (to_scalar(v, backend) for v in (self.q, self.mu, self.nu))
        if not abs(q) < 1:
            raise InvalidParameters(f"requires |q| < 1 (got q={q})")
        if not nu >= 0:
            raise InvalidParameters(f"requires nu >= 0 (got nu={nu})")
        if not nu <= mu:
            raise InvalidParameters(f"requires nu <= mu (got mu={mu}, nu={nu})")
        if not mu < 1:
            raise InvalidParameters(f"requires mu < 1 (got mu={mu})")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "backend", backend)

    @property
    def is_exact(self) -> bool:
        return self.backend is Backend.EXACT

    def as_backend(self, backend: Backend | str) -> DeformParams:
        backend = Backend(backend)
        if backend is self.backend:
            return self
        return DeformParams(self.q, self.mu, self.nu, backend)

    def as_float(self) -> DeformParams:
        return self.as_backend(Backend.FLOAT)

    def shifted(self) -> DeformParams:
        """The triple ``(q, q*mu, q*nu)``; raises when it leaves the domain (q < 0)."""
        return DeformParams(self.q, self.q * self.mu, self.q * self.nu, self.backend)

    def astuple(self) -> tuple[Scalar, Scalar, Scalar]:
        return (self.q, self.mu, self.nu)

    def __str__(self) -> str:
        return f"q={self.q}, mu={self.mu}, nu={self.nu}"
