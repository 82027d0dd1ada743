import logging
import math
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import minimize_scalar

from src.services.kernel_service import TranslateNetwork
from src.services.norm_service import l2_norm_squared
from src.services.quadrature_service import integrate

logger = logging.getLogger(__name__)

DEFAULT_OMEGA_GRID = 4096
MIN_OMEGA_GRID = 64
RELATIVE_TAIL = 1e-15


class FrameBounds(BaseModel):
    """
    Riesz-type bounds mu(lambda) <= ||f||^2 / sum|c_k|^2 <= M(lambda) for networks
    sum_k c_k phi(x - lambda k).

    mu and big_m are certified ends; mu_estimate and big_m_estimate are the
    refined grid extrema of (2 pi/lambda) times the periodized energy.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    mu: float = Field(ge=0)
    big_m: float = Field(gt=0)
    mu_estimate: float = Field(ge=0)
    big_m_estimate: float = Field(gt=0)
    explicit_lower_bound: float = Field(ge=0)
    explicit_bound_confirmed: bool
    omega_grid: int = Field(gt=0)
    l_truncation: int = Field(gt=0)


class FrameCheck(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    l2_norm_squared: float = Field(ge=0)
    coefficient_energy: float = Field(ge=0)
    lower_side: float = Field(ge=0)
    upper_side: float = Field(ge=0)
    holds: bool
    upper_holds: bool


def explicit_mu_lower_bound(lam: float) -> float:
    """(pi/lambda) exp(-pi^2/(2 lambda^2))."""
    return math.pi / lam * math.exp(-(math.pi**2) / (2.0 * lam * lam))


def periodization_cutoff(lam: float) -> int:
    """Smallest L >= 1 whose dropped terms |l| > L stay below RELATIVE_TAIL of the sum, for |omega| <= pi."""
    cutoff = 1
    # the smallest retained term is >= exp(-pi^2/(2 lam^2))/2; the first dropped one is exp(-pi^2 (2L+1)^2/(2 lam^2))/2
    while 2.0 * math.exp(-(math.pi**2) * ((2 * cutoff + 1) ** 2 - 1) / (2.0 * lam * lam)) >= RELATIVE_TAIL:
        cutoff += 1
    return cutoff


def periodized_transform_energy(lam: float, omega, l_max: int):
    """
    sum_{|l| <= l_max} |phi_hat((omega + 2 pi l)/lambda)|^2.

    omega is first reduced to [-pi, pi]; the sum is 2 pi-periodic and even.
    """
    if l_max < 1:
        raise ValueError(f"l_max must be at least 1, got {l_max}")
    omega = np.asarray(omega, dtype=float)
    reduced = np.remainder(omega + np.pi, 2.0 * np.pi) - np.pi
    shifted = reduced[..., None] + 2.0 * np.pi * np.arange(-l_max, l_max + 1)
    values = np.sum(0.5 * np.exp(-(shifted**2) / (2.0 * lam * lam)), axis=-1)
    return values[()] if values.ndim == 0 else values


def _cellwise_bounds(lam: float, nodes: np.ndarray, l_max: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Rigorous per-cell min and max of the truncated energy. Each term is a
    Gaussian bump centred at -2 pi l, so on a cell its minimum sits at an
    endpoint and its maximum at an endpoint or at the peak.
    """
    left, right = nodes[:-1, None], nodes[1:, None]
    peaks = -2.0 * np.pi * np.arange(-l_max, l_max + 1)[None, :]
    at_left = 0.5 * np.exp(-((left - peaks) ** 2) / (2.0 * lam * lam))
    at_right = 0.5 * np.exp(-((right - peaks) ** 2) / (2.0 * lam * lam))
    inside = (left <= peaks) & (peaks <= right)
    lower = np.sum(np.minimum(at_left, at_right), axis=1)
    upper = np.sum(np.where(inside, 0.5, np.maximum(at_left, at_right)), axis=1)
    return lower, upper


@lru_cache(maxsize=64)
def frame_bounds(lam: float, grid: int = DEFAULT_OMEGA_GRID) -> FrameBounds:
    """
    Certified mu(lambda) and M(lambda) over one period [0, 2 pi].

    Args:
        lam (float): Translation step.
        grid (int): Number of omega cells, at least 64.

    Returns:
        FrameBounds: Certified and estimated bounds, and whether the explicit
        Gaussian lower bound for mu was confirmed.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if grid < MIN_OMEGA_GRID:
        raise ValueError(f"omega grid must have at least {MIN_OMEGA_GRID} cells, got {grid}")

    l_max = periodization_cutoff(lam)
    nodes = np.linspace(0.0, 2.0 * np.pi, grid + 1)
    cell_lower, cell_upper = _cellwise_bounds(lam, nodes, l_max)
    # dropped terms only add energy; the upper end carries their relative bound
    scale = 2.0 * np.pi / lam
    mu = scale * float(np.min(cell_lower))
    big_m = scale * float(np.max(cell_upper)) * (1.0 + RELATIVE_TAIL)

    energy = periodized_transform_energy(lam, nodes, l_max)
    spacing = nodes[1] - nodes[0]
    i_min, i_max = int(np.argmin(energy)), int(np.argmax(energy))
    low = minimize_scalar(
        lambda w: float(periodized_transform_energy(lam, w, l_max)),
        bounds=(nodes[i_min] - spacing, nodes[i_min] + spacing),
        method="bounded",
    )
    high = minimize_scalar(
        lambda w: -float(periodized_transform_energy(lam, w, l_max)),
        bounds=(nodes[i_max] - spacing, nodes[i_max] + spacing),
        method="bounded",
    )
    mu_estimate = scale * min(float(energy[i_min]), float(low.fun))
    big_m_estimate = scale * max(float(energy[i_max]), float(-high.fun))

    explicit = explicit_mu_lower_bound(lam)
    confirmed = mu >= explicit
    if not confirmed:
        logger.warning(f"Certified mu({lam}) = {mu:.6e} does not confirm the explicit bound {explicit:.6e}")
    logger.info(f"Frame bounds for lambda={lam}: mu in [{mu:.6e}, {mu_estimate:.6e}], M <= {big_m:.6e} (L={l_max})")
    return FrameBounds(
        lam=lam,
        mu=mu,
        big_m=big_m,
        mu_estimate=mu_estimate,
        big_m_estimate=big_m_estimate,
        explicit_lower_bound=explicit,
        explicit_bound_confirmed=confirmed,
        omega_grid=grid,
        l_truncation=l_max,
    )


def frame_inequality_check(net: TranslateNetwork, tol: float = 1e-9) -> FrameCheck:
    """Checks mu(lambda) sum|c_k|^2 <= ||f||_2^2 <= M(lambda) sum|c_k|^2 up to tol."""
    energy = net.coefficient_l2_squared
    norm = l2_norm_squared(net, tol).value
    bounds = frame_bounds(net.lam)
    lower_side, upper_side = bounds.mu * energy, bounds.big_m * energy
    holds = norm >= lower_side - tol
    upper_holds = norm <= upper_side + tol
    if not (holds and upper_holds):
        logger.error(f"Frame inequality violated for lambda={net.lam}: {lower_side:.6e} <= {norm:.6e} <= {upper_side:.6e}")
    return FrameCheck(
        lam=net.lam,
        l2_norm_squared=norm,
        coefficient_energy=energy,
        lower_side=lower_side,
        upper_side=upper_side,
        holds=holds,
        upper_holds=upper_holds,
    )


def periodized_l2_norm_squared(net: TranslateNetwork, tol: float = 1e-10) -> float:
    """
    ||f||_2^2 via Plancherel and periodization:
    (1/lambda) int_{-pi}^{pi} E(omega) |sum_k c_k e^{i k omega}|^2 d omega.
    """
    if len(net.shifts) == 0:
        return 0.0
    l_max = periodization_cutoff(net.lam)
    shifts, coefficients = net.shifts.astype(float), net.coefficients

    def integrand(w: float) -> float:
        s = np.sum(coefficients * np.exp(1j * shifts * w))
        return float(periodized_transform_energy(net.lam, w, l_max)) * float(abs(s) ** 2)

    result = integrate(integrand, -math.pi, math.pi, epsabs=tol, epsrel=1e-9, points=[0.0], limit=2000)
    return result.value / net.lam


def translate_sum(lam: float, x):
    """sum_k phi(k lambda - x) over all integers k."""
    x = np.asarray(x, dtype=float)
    reach = int(math.ceil(40.0 / lam))
    nearest = np.rint(x / lam)
    offsets = np.arange(-reach, reach + 1)
    u = (nearest[..., None] + offsets) * lam - x[..., None]
    values = np.sum(np.exp(-u * u), axis=-1)
    return values[()] if values.ndim == 0 else values


def translate_sum_bound(lam: float) -> float:
    """Riemann-sum bound sum_k phi(k lambda - x) <= 1 + sqrt(pi)/lambda, uniform in x."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return 1.0 + math.sqrt(math.pi) / lam
