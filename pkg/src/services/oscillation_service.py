import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from src.exceptions import DomainError, HypothesisViolationError, SignChangeIsolationError
from src.services.coefficient_service import ShiftParameters, tail_abs_sum_bound
from src.services.kernel_service import (
    SQRT_2PI,
    FourierProfile,
    TranslateNetwork,
    analytic_fourier_transform,
    canonical_witness,
    evaluate,
    fejer_scaled,
)
from src.services.norm_service import NormEstimate, estimate_sup, sup_norm, sup_norm_derivative
from src.services.quadrature_service import integrate

logger = logging.getLogger(__name__)

# 8^3 / pi
LEMMA_CONSTANT = 512.0 / math.pi
DEFAULT_SAFETY = 1.01
MAX_SIGN_CHANGES = 10_000
ZERO_XTOL = 1e-13
PASS_RELATIVE_SLACK = 1e-6
_SCAN_CHUNK = 8192


class OscillationReport(BaseModel):
    """Positive and negative Fourier mass of P_hat over [-r, r]."""
    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0)
    plus_mass: float = Field(ge=0)
    minus_mass: float = Field(ge=0)
    quad_error: float = Field(ge=0)
    sign_changes: int = Field(ge=0)
    sup_norm_used: Optional[NormEstimate] = None
    threshold: Optional[float] = None
    ratio: Optional[float] = None
    passed: Optional[bool] = None


class FejerSmoothingReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0)
    max_error: float = Field(ge=0)
    quadrature_error: float = Field(ge=0)
    truncation_radius: float = Field(ge=0)
    truncation_error: float = Field(ge=0)
    bound: float = Field(ge=0)
    passed: bool


class SmallWindowReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0)
    plus_mass: float = Field(ge=0)
    minus_mass: float = Field(ge=0)
    bound: float = Field(ge=0)
    holds: bool


def _scan_sign_changes(profile: FourierProfile, radius: float) -> list[float]:
    """
    Zeros of profile on [-radius, radius], isolated on the profile's scan grid
    and polished by bisection.
    """
    points = int(math.ceil(2.0 * radius / profile.scan_step)) + 1
    grid = np.linspace(-radius, radius, points)
    values = np.empty(points)
    for start in range(0, points, _SCAN_CHUNK):
        values[start:start + _SCAN_CHUNK] = profile(grid[start:start + _SCAN_CHUNK])

    zeros = [float(x) for x in grid[1:-1][values[1:-1] == 0.0]]
    crossings = np.nonzero(values[:-1] * values[1:] < 0.0)[0]
    if len(crossings) + len(zeros) > MAX_SIGN_CHANGES:
        raise SignChangeIsolationError(
            f"found {len(crossings) + len(zeros)} sign changes on [-{radius:.4g}, {radius:.4g}]"
        )
    for i in crossings:
        zeros.append(brentq(lambda w: float(profile(w)), grid[i], grid[i + 1], xtol=ZERO_XTOL))
    return sorted(zeros)


def signed_part_integrals(profile: FourierProfile, r: float, tol: float) -> OscillationReport:
    """
    Integrates (P_hat)_+ and (P_hat)_- over [-r, r].

    The kinks of the positive and negative parts sit at the zeros of P_hat, so
    the window is split there and each single-signed piece is integrated
    separately. Beyond the band radius |P_hat| is bounded analytically and that
    tail is added to quad_error.

    Args:
        profile (FourierProfile): Real-valued analytic transform.
        r (float): Frequency radius.
        tol (float): Absolute error target for the two masses together.

    Returns:
        OscillationReport: Masses with the accumulated error.

    Raises:
        SignChangeIsolationError: If more than MAX_SIGN_CHANGES zeros are found.
        QuadratureError: If a piece fails to converge.
    """
    if r <= 0 or tol <= 0:
        raise ValueError("need r > 0 and tol > 0")
    if not profile.is_real:
        raise ValueError("signed_part_integrals needs a real-valued profile")

    radius = min(r, profile.band_radius)
    zeros = _scan_sign_changes(profile, radius)
    breaks = [-radius, *zeros, radius]
    pieces = len(breaks) - 1
    budget = tol / (2.0 * pieces)

    plus = minus = error = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        piece = integrate(lambda w: float(profile(w)), a, b, epsabs=budget, epsrel=1e-13)
        error += piece.error
        if float(profile(0.5 * (a + b))) >= 0.0:
            plus += max(piece.value, 0.0)
        else:
            minus += max(-piece.value, 0.0)
    if r > radius:
        error += profile.tail_mass(radius)

    logger.info(
        f"Signed masses on [-{r:.6g}, {r:.6g}]: plus={plus:.12g}, minus={minus:.12g}, "
        f"{len(zeros)} sign changes, error={error:.3e}"
    )
    return OscillationReport(r=r, plus_mass=plus, minus_mass=minus, quad_error=error, sign_changes=len(zeros))


def _certified_norms(
    net: TranslateNetwork,
    gap: Optional[float],
    sup_estimate: Optional[NormEstimate],
    deriv_estimate: Optional[NormEstimate],
) -> tuple[NormEstimate, NormEstimate]:
    if gap is None:
        gap = 1e-4 * estimate_sup(net)
    sup = sup_estimate if sup_estimate is not None else sup_norm(net, gap)
    deriv = deriv_estimate if deriv_estimate is not None else sup_norm_derivative(net, gap)
    return sup, deriv


def lemma1_certificate(
    net: TranslateNetwork,
    safety: float = DEFAULT_SAFETY,
    tol: Optional[float] = None,
    gap: Optional[float] = None,
    sup_estimate: Optional[NormEstimate] = None,
    deriv_estimate: Optional[NormEstimate] = None,
) -> OscillationReport:
    """
    Checks that both signed Fourier masses over [-r, r] reach (sqrt(2 pi)/4) ||P||_inf
    for r = safety * (8^3/pi) * ||P'||_inf / ||P||_inf.

    The ratio defining r takes ||P'|| at its certified upper end and ||P|| at its
    lower end, and the threshold uses ||P|| at its upper end, so neither r nor the
    threshold is underestimated.

    Raises:
        HypothesisViolationError: If |P(0)| exceeds 1e-12 (relative to sum|c_k| when that exceeds 1).
    """
    if safety < 1:
        raise ValueError(f"safety must be at least 1, got {safety}")
    if not net.is_symmetric():
        raise ValueError("the oscillation check needs an even network (real-valued transform)")
    at_zero = abs(float(evaluate(net, 0.0)))
    if at_zero > 1e-12 * max(1.0, net.coefficient_l1):
        raise HypothesisViolationError(f"the oscillation estimate needs P(0) = 0, got P(0) = {at_zero:.3e}")

    sup, deriv = _certified_norms(net, gap, sup_estimate, deriv_estimate)
    if sup.lower <= 0:
        raise HypothesisViolationError("the oscillation estimate needs a non-zero network")
    ratio = deriv.upper / sup.lower
    r = safety * LEMMA_CONSTANT * ratio
    threshold = SQRT_2PI / 4.0 * sup.upper
    if tol is None:
        tol = 1e-7 * sup.upper

    masses = signed_part_integrals(analytic_fourier_transform(net), r, tol)
    passed = min(masses.plus_mass, masses.minus_mass) - masses.quad_error >= threshold * (1.0 - PASS_RELATIVE_SLACK)
    if not passed:
        logger.warning(
            f"Oscillation check failed at r={r:.6g}: masses ({masses.plus_mass:.6g}, {masses.minus_mass:.6g}) "
            f"against threshold {threshold:.6g}"
        )
    return masses.model_copy(update={"sup_norm_used": sup, "threshold": threshold, "ratio": ratio, "passed": passed})


def _fejer_lobe_rules(r: float, half_width: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on every lobe [2 pi j/r, 2 pi (j+1)/r] covering [-T, T]."""
    lobe = 2.0 * math.pi / r
    count = int(math.ceil(half_width / lobe))
    left = lobe * np.arange(-count, count)
    t, w = np.polynomial.legendre.leggauss(nodes)
    points = left[:, None] + 0.5 * lobe * (t[None, :] + 1.0)
    weights = np.broadcast_to(0.5 * lobe * w, points.shape)
    return points.reshape(-1), weights.reshape(-1)


def fejer_smoothing_report(
    net: TranslateNetwork,
    r: float,
    x_samples: Sequence[float],
    tol: Optional[float] = None,
    gap: Optional[float] = None,
    sup_estimate: Optional[NormEstimate] = None,
    deriv_estimate: Optional[NormEstimate] = None,
) -> FejerSmoothingReport:
    """
    Computes f = P * h_r, with the convolution (1/sqrt(2 pi)) int P(x - t) h_r(t) dt,
    at the sample points and compares it to P.

    The kernel is cut at |t| <= T with 8 ||P||/(pi r T) <= tol/2; each lobe of h_r
    between consecutive zeros gets a 24-node Gauss-Legendre rule, and the 12-node
    rule on the same lobes gives the quadrature error estimate.

    Raises:
        HypothesisViolationError: If r does not exceed (8^3/pi) ||P'||/||P||.
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    samples = np.asarray(list(x_samples), dtype=float)
    if net.coefficient_l1 == 0.0:
        return FejerSmoothingReport(
            r=r, max_error=0.0, quadrature_error=0.0, truncation_radius=0.0, truncation_error=0.0, bound=0.0, passed=True
        )

    sup, deriv = _certified_norms(net, gap, sup_estimate, deriv_estimate)
    required = LEMMA_CONSTANT * deriv.upper / sup.lower
    if r <= required:
        raise HypothesisViolationError(f"Fejer smoothing bound needs r > {required:.6g}, got r = {r:.6g}")
    if tol is None:
        tol = 1e-3 * sup.upper

    half_width = 16.0 * sup.upper / (math.pi * r * tol)
    truncation_error = 8.0 * sup.upper / (math.pi * r * half_width)
    fine_t, fine_w = _fejer_lobe_rules(r, half_width, 24)
    coarse_t, coarse_w = _fejer_lobe_rules(r, half_width, 12)
    fine_kernel = fine_w * fejer_scaled(r, fine_t) / SQRT_2PI
    coarse_kernel = coarse_w * fejer_scaled(r, coarse_t) / SQRT_2PI

    max_error = quad_error = 0.0
    for x in samples:
        smoothed = float(evaluate(net, x - fine_t) @ fine_kernel)
        check = float(evaluate(net, x - coarse_t) @ coarse_kernel)
        max_error = max(max_error, abs(smoothed - float(evaluate(net, x))))
        quad_error = max(quad_error, abs(smoothed - check))

    bound = sup.lower / 4.0
    passed = max_error + quad_error + truncation_error < bound
    logger.info(
        f"Fejer smoothing at r={r:.6g} over {len(samples)} samples: max |f - P| = {max_error:.6g} "
        f"(quadrature {quad_error:.2e}, truncation {truncation_error:.2e}) against {bound:.6g}"
    )
    return FejerSmoothingReport(
        r=r,
        max_error=max_error,
        quadrature_error=quad_error,
        truncation_radius=half_width,
        truncation_error=truncation_error,
        bound=bound,
        passed=passed,
    )


def fejer_smoothing_error(net: TranslateNetwork, r: float, x_samples: Sequence[float], **kwargs) -> float:
    """max |(P * h_r)(x) - P(x)| over x_samples."""
    return fejer_smoothing_report(net, r, x_samples, **kwargs).max_error


def small_window_bound(p: ShiftParameters, r: float, tol: float = 1e-10) -> SmallWindowReport:
    """
    On a window |omega| <= r <= pi/(2 lambda) the limit transform is non-negative, so the
    smaller signed mass of the truncated witness is at most 4 sqrt(2 pi) sum_{k>n} |a_k|.
    """
    if not 0 < r <= math.pi / (2.0 * p.lam):
        raise DomainError(f"the small-window bound needs 0 < r <= pi/(2 lambda), got r = {r}")
    masses = signed_part_integrals(analytic_fourier_transform(canonical_witness(p)), r, tol)
    bound = 4.0 * SQRT_2PI * tail_abs_sum_bound(p.n)
    holds = min(masses.plus_mass, masses.minus_mass) <= bound + masses.quad_error
    return SmallWindowReport(r=r, plus_mass=masses.plus_mass, minus_mass=masses.minus_mass, bound=bound, holds=holds)
