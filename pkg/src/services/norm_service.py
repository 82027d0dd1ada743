import logging
import math
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import minimize_scalar
from scipy.special import erfc

from src.exceptions import DomainError, NormCertificationError, QuadratureError
from src.services.kernel_service import (
    GAUSSIAN_DERIVATIVE_SUP,
    GAUSSIAN_SECOND_DERIVATIVE_SUP,
    GAUSSIAN_THIRD_DERIVATIVE_SUP,
    SQRT_2PI,
    FourierProfile,
    TranslateNetwork,
    evaluate,
    evaluate_derivative,
)
from src.services.quadrature_service import integrate

logger = logging.getLogger(__name__)

# Refuse gaps below this multiple of sum|c_k|; float64 grid values carry ~1e-16 relative noise.
MIN_RELATIVE_GAP = 1e-12
MAX_GRID_POINTS = 200_000_000
_GRID_CHUNK = 1 << 16


class NormEstimate(BaseModel):
    """A certified interval [lower, upper] containing a norm, with the point estimate."""
    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0)
    lower: float = Field(ge=0)
    upper: float = Field(ge=0)
    grid_points: int = Field(ge=0)
    truncation_radius: float = Field(ge=0)
    location: Optional[float] = None

    @model_validator(mode="after")
    def _ordered(self) -> "NormEstimate":
        if not self.lower <= self.value <= self.upper:
            raise ValueError(f"estimate not ordered: {self.lower} <= {self.value} <= {self.upper}")
        return self

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def decay_envelope(lam: float, x):
    """
    Uniform decay envelope 24/(1 + x^2) of the limit witness P_inf(lambda, .),
    established for lambda in (0, 1).
    """
    if not 0 < lam < 1:
        raise DomainError(f"decay envelope holds for lambda in (0, 1), got {lam}")
    x = np.asarray(x, dtype=float)
    values = 24.0 / (1.0 + x * x)
    return values[()] if values.ndim == 0 else values


def reciprocal_envelope(x):
    """The weaker envelope 12/|x|, valid for x != 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise DomainError("the 12/|x| envelope is not defined at x = 0")
    values = 12.0 / np.abs(x)
    return values[()] if values.ndim == 0 else values


def estimate_sup(net: TranslateNetwork) -> float:
    """Uncertified max |P| on a coarse grid; used only to scale default gaps."""
    if net.coefficient_l1 == 0.0:
        return 0.0
    radius = net.lam * net.max_shift + 6.0
    x = np.linspace(-radius, radius, int(math.ceil(2.0 * radius / (0.05 * min(1.0, net.lam)))) + 1)
    return float(np.max(np.abs(evaluate(net, x))))


def _truncation_radius(net: TranslateNetwork, gap: float, derivative: bool) -> tuple[float, float]:
    """
    Radius X beyond which the termwise Gaussian decay keeps |P| (or |P'|) below gap/2,
    together with the resulting tail bound.
    """
    total = net.coefficient_l1
    offset = net.lam * net.max_shift
    y = math.sqrt(max(math.log(2.0 * total / gap), 0.0))
    if derivative:
        # 2(y+1)exp(-(y+1)^2) <= exp(-y^2) for y >= 0
        y += 1.0
        tail = total * 2.0 * y * math.exp(-y * y)
    else:
        tail = total * math.exp(-y * y)
    return offset + y, tail


def _certify_sup(
    net: TranslateNetwork,
    gap: float,
    evaluator: Callable,
    lipschitz: float,
    curvature: float,
    derivative: bool,
) -> NormEstimate:
    if gap <= 0:
        raise ValueError(f"gap must be positive, got {gap}")
    total = net.coefficient_l1
    if total == 0.0:
        return NormEstimate(value=0.0, lower=0.0, upper=0.0, grid_points=0, truncation_radius=0.0, location=0.0)
    if gap < MIN_RELATIVE_GAP * total:
        raise NormCertificationError(f"gap {gap:.3e} is below float64 resolution for sum|c_k| = {total:.3e}")

    radius, tail = _truncation_radius(net, gap, derivative)
    spacing = 0.01 * min(1.0, net.lam)
    refinements = 0
    # Lipschitz slack L s/2 or interpolation slack M s^2/8, whichever is smaller
    while min(lipschitz * spacing / 2.0, curvature * spacing**2 / 8.0) > gap:
        spacing /= 2.0
        refinements += 1
    points = int(math.ceil(2.0 * radius / spacing)) + 1
    if points > MAX_GRID_POINTS:
        raise NormCertificationError(f"certifying gap {gap:.3e} needs {points} grid points")
    spacing = 2.0 * radius / (points - 1)
    slack = min(lipschitz * spacing / 2.0, curvature * spacing**2 / 8.0)

    best, best_x = -1.0, 0.0
    for start in range(0, points, _GRID_CHUNK):
        x = -radius + spacing * np.arange(start, min(start + _GRID_CHUNK, points))
        values = np.abs(evaluator(net, x))
        i = int(np.argmax(values))
        if values[i] > best:
            best, best_x = float(values[i]), float(x[i])

    refined = minimize_scalar(
        lambda t: -abs(float(evaluator(net, t))),
        bounds=(best_x - spacing, best_x + spacing),
        method="bounded",
        options={"xatol": 1e-12},
    )
    value, location = best, best_x
    if -refined.fun > best:
        value, location = float(-refined.fun), float(refined.x)

    upper = max(best + slack, tail, value)
    logger.info(
        f"Certified sup of {'P′' if derivative else 'P'}: [{value:.12g}, {upper:.12g}] "
        f"on {points} points over |x| <= {radius:.4g} after {refinements} refinements"
    )
    return NormEstimate(
        value=value,
        lower=value,
        upper=upper,
        grid_points=points,
        truncation_radius=radius,
        location=location,
    )


def sup_norm(net: TranslateNetwork, gap: float) -> NormEstimate:
    """
    Certified ||P||_inf with upper - lower <= gap.

    The slope of P is bounded by ||phi'||_inf sum|c_k| and its curvature by
    ||phi''||_inf sum|c_k|; between two grid nodes |P| exceeds the larger node
    value by at most the smaller of the two resulting slacks.
    """
    total = net.coefficient_l1
    return _certify_sup(
        net,
        gap,
        evaluate,
        lipschitz=GAUSSIAN_DERIVATIVE_SUP * total,
        curvature=GAUSSIAN_SECOND_DERIVATIVE_SUP * total,
        derivative=False,
    )


def sup_norm_derivative(net: TranslateNetwork, gap: float) -> NormEstimate:
    """Certified ||P'||_inf, using ||phi''||_inf = 2 and ||phi'''||_inf for the slacks."""
    total = net.coefficient_l1
    return _certify_sup(
        net,
        gap,
        evaluate_derivative,
        lipschitz=GAUSSIAN_SECOND_DERIVATIVE_SUP * total,
        curvature=GAUSSIAN_THIRD_DERIVATIVE_SUP * total,
        derivative=True,
    )


def l2_norm_squared_closed_form(net: TranslateNetwork) -> float:
    """sum_{j,k} c_j c_k sqrt(pi/2) exp(-(lambda (j - k))^2 / 2)."""
    if len(net.shifts) == 0:
        return 0.0
    centers = net.centers
    gram = np.sqrt(np.pi / 2.0) * np.exp(-((centers[:, None] - centers[None, :]) ** 2) / 2.0)
    return max(float(net.coefficients @ gram @ net.coefficients), 0.0)


def l2_norm_squared_quadrature(net: TranslateNetwork, tol: float) -> tuple[float, float, int]:
    """
    Integral of P^2 over the real line by adaptive quadrature.

    Returns:
        tuple[float, float, int]: value, error bound (quadrature plus truncated tails)
        and number of integrand evaluations.
    """
    total = net.coefficient_l1
    if total == 0.0:
        return 0.0, 0.0, 0
    # |P(x)|^2 <= total^2 exp(-2 (|x| - offset)^2) outside the window
    y = 1.0
    while total**2 * math.sqrt(math.pi / 2.0) * erfc(math.sqrt(2.0) * y) > tol / 4.0:
        y += 0.5
    tail = total**2 * math.sqrt(math.pi / 2.0) * float(erfc(math.sqrt(2.0) * y))
    radius = net.lam * net.max_shift + y
    centers = net.centers
    breaks = centers if len(centers) <= 200 else np.linspace(-radius, radius, 201)
    result = integrate(
        lambda x: float(evaluate(net, x)) ** 2,
        -radius,
        radius,
        epsabs=tol / 4.0,
        epsrel=1e-13,
        points=[float(b) for b in breaks],
    )
    return result.value, result.error + tail, result.evaluations


def l2_norm_squared(net: TranslateNetwork, tol: float, cross_check: bool = True) -> NormEstimate:
    """
    ||P||_2^2 from the closed-form Gaussian Gram sum, cross-checked by quadrature.

    Raises:
        QuadratureError: If quadrature fails or disagrees with the closed form by more than 2 tol.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    closed = l2_norm_squared_closed_form(net)
    evaluations = 0
    radius = net.lam * net.max_shift
    if cross_check:
        numeric, error, evaluations = l2_norm_squared_quadrature(net, tol)
        if abs(numeric - closed) > 2.0 * tol:
            logger.error(f"L2 closed form {closed!r} and quadrature {numeric!r} disagree (error bound {error:.3e})")
            raise QuadratureError(f"L2 closed form {closed!r} and quadrature {numeric!r} disagree beyond 2*tol")
    return NormEstimate(
        value=closed,
        lower=max(closed - tol, 0.0),
        upper=closed + tol,
        grid_points=evaluations,
        truncation_radius=radius,
    )


def fourier_sup_bound(profile: FourierProfile, tol: float = 1e-10) -> float:
    """
    Upper bound ||P||_inf <= (1/sqrt(2 pi)) * integral of |P_hat| (Fourier inversion).
    """
    if not profile.is_real:
        raise ValueError("fourier_sup_bound needs a real-valued profile")
    radius = profile.band_radius
    result = integrate(lambda w: abs(float(profile(w))), -radius, radius, epsabs=tol, epsrel=1e-10, limit=2000)
    return (result.value + result.error + profile.tail_mass(radius)) / SQRT_2PI
