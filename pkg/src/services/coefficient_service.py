import logging
import math
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.exceptions import QuadratureError
from src.services.quadrature_service import integrate

logger = logging.getLogger(__name__)

# Explicit partial tails run up to this index.
TAIL_CUTOFF = 1_000_000
# |a_k| <= 8/(pi k^3) for k >= 3 and only odd k contribute, so sum_{k>K} |a_k| < 1/K^2.
TAIL_REMAINDER = 1.0 / TAIL_CUTOFF**2
# Remainder carried by tail_abs_sum_bound; sum_{k>K} |a_k| < 1/K.
BOUND_REMAINDER = 1.0 / TAIL_CUTOFF


class ShiftParameters(BaseModel):
    """Translation spacing lambda and truncation order n of a translate network."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0, allow_inf_nan=False)
    n: int = Field(ge=1)


class CoefficientTable(BaseModel):
    """
    Closed-form Fourier cosine coefficients a_0..a_n of the auxiliary function H,
    with a rigorous bound for the absolute tail beyond max_index.
    """
    model_config = ConfigDict(frozen=True)

    max_index: int = Field(ge=1)
    values: tuple[float, ...]
    tail_bound: float

    @model_validator(mode="after")
    def _check_invariants(self) -> "CoefficientTable":
        if len(self.values) != self.max_index + 1:
            raise ValueError("values must hold a_0..a_n")
        if self.values[0] != 0.75:
            raise ValueError("a_0 must equal 3/4")
        for k, a_k in enumerate(self.values[1:], start=1):
            if abs(a_k) > 1.0 / k**2:
                raise ValueError(f"|a_{k}| exceeds 1/k^2")
            if k >= 4 and k % 2 == 0 and a_k != 0.0:
                raise ValueError(f"a_{k} must vanish for even k >= 4")
        return self


def auxiliary_H(x):
    """
    The even, 2*pi-periodic auxiliary function: 1 on |x| <= pi/2 and sin^2 x
    on pi/2 < |x| <= pi. Accepts scalars or numpy arrays.
    """
    x = np.asarray(x, dtype=float)
    reduced = np.abs(np.remainder(x + np.pi, 2.0 * np.pi) - np.pi)
    values = np.where(reduced <= np.pi / 2, 1.0, np.sin(reduced) ** 2)
    return values[()] if values.ndim == 0 else values


def cosine_coefficient(k: int) -> float:
    """Closed-form Fourier cosine coefficient a_k of H."""
    if k < 0:
        raise ValueError(f"coefficient index must be non-negative, got {k}")
    if k == 0:
        return 0.75
    if k == 1:
        return 4.0 / (3.0 * math.pi)
    if k == 2:
        return -0.25
    if k % 2 == 0:
        return 0.0
    magnitude = 4.0 / (math.pi * k * (k * k - 4))
    return -magnitude if k % 4 == 1 else magnitude


def cosine_coefficients(n: int) -> np.ndarray:
    """Vector a_0..a_n of closed-form coefficients."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    k = np.arange(n + 1, dtype=float)
    values = np.zeros(n + 1)
    odd = (np.arange(n + 1) % 2 == 1) & (np.arange(n + 1) >= 3)
    sign = np.where(np.arange(n + 1) % 4 == 1, -1.0, 1.0)
    values[odd] = sign[odd] * 4.0 / (np.pi * k[odd] * (k[odd] ** 2 - 4.0))
    values[0] = 0.75
    if n >= 1:
        values[1] = 4.0 / (3.0 * np.pi)
    if n >= 2:
        values[2] = -0.25
    return values


def coefficient_table(n: int) -> CoefficientTable:
    return CoefficientTable(
        max_index=n,
        values=tuple(float(v) for v in cosine_coefficients(n)),
        tail_bound=tail_abs_sum_bound(n),
    )


def cosine_coefficient_oracle(k: int, tol: float) -> float:
    """
    Brute-force Fourier cosine coefficient of H by adaptive quadrature.

    H is even, so (1/pi) * integral over [-pi, pi] becomes (2/pi) * integral over
    [0, pi]; the two branches of H are integrated separately with a cosine weight.

    Raises:
        QuadratureError: If the combined error estimate stays above tol.
    """
    if k < 0 or tol <= 0:
        raise ValueError("need k >= 0 and tol > 0")
    scale = 1.0 / math.pi if k == 0 else 2.0 / math.pi
    budget = tol / (4.0 * scale)
    weight = {"weight": "cos", "wvar": k} if k > 0 else {}
    flat = integrate(lambda x: 1.0, 0.0, math.pi / 2, epsabs=budget, **weight)
    curved = integrate(lambda x: math.sin(x) ** 2, math.pi / 2, math.pi, epsabs=budget, **weight)
    error = scale * (flat.error + curved.error)
    if error > tol:
        raise QuadratureError(f"coefficient oracle for k={k} reached only {error:.3e} > {tol:.3e}")
    return scale * (flat.value + curved.value)


@lru_cache(maxsize=1)
def _absolute_suffix_sums() -> np.ndarray:
    """suffix[j] = sum_{k=j}^{TAIL_CUTOFF} |a_k|, accumulated from the small end."""
    magnitudes = np.abs(cosine_coefficients(TAIL_CUTOFF))
    suffix = np.cumsum(magnitudes[::-1])[::-1]
    logger.info(f"Tabulated absolute coefficient tails up to k={TAIL_CUTOFF}")
    return np.append(suffix, 0.0)


def tail_abs_sum_estimate(n: int) -> float:
    """
    Upper bound for sum_{k>n} |a_k| from the explicit partial tail up to
    TAIL_CUTOFF plus TAIL_REMAINDER.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n >= TAIL_CUTOFF:
        return 1.0 / (n * n)
    return float(_absolute_suffix_sums()[n + 1]) + TAIL_REMAINDER


def tail_abs_sum_bound(n: int) -> float:
    """
    Rigorous upper bound min(1/n, sum_{k=n+1}^{TAIL_CUTOFF} |a_k| + 1/TAIL_CUTOFF)
    for sum_{k>n} |a_k|. tail_abs_sum_estimate is the sharper variant.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n >= TAIL_CUTOFF:
        return 1.0 / n
    return min(1.0 / n, float(_absolute_suffix_sums()[n + 1]) + BOUND_REMAINDER)


def absolute_coefficient_sum() -> tuple[float, float]:
    """
    Numerical value of sum_{k>=1} |a_k| as (partial sum to TAIL_CUTOFF, remainder bound).
    """
    return float(_absolute_suffix_sums()[1]), TAIL_REMAINDER


def squared_coefficient_sum() -> tuple[float, float]:
    """sum_{k>=1} a_k^2 as (partial sum to TAIL_CUTOFF, remainder bound)."""
    squares = cosine_coefficients(TAIL_CUTOFF)[1:] ** 2
    # sum_{k>K} 1/k^4 < 1/(3 K^3)
    return float(np.sum(squares[::-1])), 1.0 / (3.0 * TAIL_CUTOFF**3)


def partial_a_functional(lam: float, n: int) -> float:
    """A_n(lambda) = -sum_{k=1}^n a_k phi(lambda k); the empty sum (n = 0) is 0."""
    if n <= 0:
        return 0.0
    k = np.arange(1, n + 1, dtype=float)
    # exp underflow to 0 is treated as exact
    return float(-np.sum(cosine_coefficients(n)[1:] * np.exp(-((lam * k) ** 2))))


def coefficient_functionals(p: ShiftParameters) -> tuple[float, float]:
    """Truncated functionals (A_n(lambda), F_n(lambda)) with F_n = a_0 - A_n."""
    a_n = partial_a_functional(p.lam, p.n)
    return a_n, 0.75 - a_n


def limit_functionals(lam: float) -> tuple[float, float]:
    """
    (A_inf(lambda), F(lambda)), summed until phi(lambda k) underflows.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    cutoff = int(math.ceil(math.sqrt(745.0) / lam)) + 1
    a_inf = partial_a_functional(lam, cutoff)
    return a_inf, 0.75 - a_inf
