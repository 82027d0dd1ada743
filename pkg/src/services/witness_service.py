import logging
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import erfc

from src.exceptions import (
    DomainError,
    HypothesisViolationError,
    NormCertificationError,
    SearchExhaustedError,
)
from src.services.coefficient_service import (
    ShiftParameters,
    auxiliary_H,
    coefficient_functionals,
    cosine_coefficients,
    limit_functionals,
    tail_abs_sum_bound,
)
from src.services.kernel_service import (
    SQRT_2PI,
    TranslateNetwork,
    canonical_witness,
    evaluate,
    gaussian_hat,
    trig_polynomial_T,
)
from src.services.norm_service import NormEstimate, estimate_sup, sup_norm, sup_norm_derivative
from src.services.oscillation_service import (
    LEMMA_CONSTANT,
    FejerSmoothingReport,
    OscillationReport,
    fejer_smoothing_report,
    lemma1_certificate,
)
from src.services.quadrature_service import integrate

logger = logging.getLogger(__name__)

MAX_N = 10_000_000
PRINTED_C0 = 1280.0 / (3.0 * math.pi)
# same derivation with sum_{k>=1} a_k^2 = 1/4
RECOMPUTED_C0 = 1920.0 / math.pi
# decay constant C = 12 of the |P_inf(x)| <= C/|x| envelope
DECAY_CONSTANT = 12.0
PRINTED_SQUARED_SUM = 9.0 / 8.0
RECOMPUTED_SQUARED_SUM = 0.25
DEFAULT_RELATIVE_GAP = 1e-4
# bound on the float64 error of F(lambda) = 3/4 - A_inf(lambda)
FUNCTIONAL_ROUNDOFF = 1e-14


def ratio_threshold(lam: float) -> float:
    """pi^2 / (2^10 lambda)."""
    return math.pi**2 / (1024.0 * lam)


class WitnessCertificate(BaseModel):
    """
    Audit record for one canonical witness: the certified norm intervals, the
    conservative ratio, the truncation condition and the reported thresholds.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    n: int = Field(ge=1)
    n0_paper: Optional[float] = None
    n0_recomputed: Optional[float] = None
    n_exceeds_n0_paper: Optional[bool] = None
    ratio_lower: float = Field(ge=0)
    threshold: float
    passed: bool
    sup_norm: NormEstimate
    deriv_norm: NormEstimate
    gap: float = Field(gt=0)
    tail_bound: float = Field(ge=0)
    p_infty_lower: float = Field(ge=0)
    p_infty_upper: float = Field(ge=0)
    tail_condition_met: bool
    oscillation: Optional[OscillationReport] = None

    @model_validator(mode="after")
    def _consistent(self) -> "WitnessCertificate":
        if self.passed != (self.ratio_lower >= self.threshold):
            raise ValueError("passed must equal ratio_lower >= threshold")
        return self

    @property
    def product(self) -> float:
        return self.ratio_lower * self.lam


class AnalyticBounds(BaseModel):
    """Closed-form lower bounds for ||P_inf||_inf with the printed and the recomputed constants."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    printed_bound: float = Field(ge=0)
    recomputed_bound: float = Field(ge=0)


class TruncationDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    n: int = Field(ge=1)
    delta_bound: float = Field(ge=0)
    p_diff_bound: float = Field(ge=0)
    empirical_delta: float = Field(ge=0)
    empirical_ok: bool


def _require_unit_interval(lam: float) -> None:
    if not 0 < lam < 1:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")


def _exp_scaled(c0: float, lam: float) -> float:
    try:
        return c0 * lam * math.exp(math.pi**2 / (2.0 * lam * lam))
    except OverflowError:
        return math.inf


def paper_n0(lam: float) -> float:
    """N_0 = C_0 lambda exp(pi^2/(2 lambda^2)) with C_0 = 1280/(3 pi); inf when it overflows."""
    _require_unit_interval(lam)
    return _exp_scaled(PRINTED_C0, lam)


def recomputed_n0(lam: float) -> float:
    """The same threshold with C_0 = 1920/pi, as implied by sum_{k>=1} a_k^2 = 1/4."""
    _require_unit_interval(lam)
    return _exp_scaled(RECOMPUTED_C0, lam)


def analytic_p_infty_bounds(lam: float) -> AnalyticBounds:
    """
    ||P_inf|| >= mu(lambda) sum|c_k|^2 / (4 C) with mu(lambda) >= (pi/lambda) exp(-pi^2/(2 lambda^2))
    and sum|c_k|^2 >= 2 sum_{k>=1} a_k^2, evaluated with both values of that sum.
    """
    _require_unit_interval(lam)
    base = math.pi / (4.0 * DECAY_CONSTANT * lam) * math.exp(-(math.pi**2) / (2.0 * lam * lam))
    return AnalyticBounds(
        lam=lam,
        printed_bound=base * 2.0 * PRINTED_SQUARED_SUM,
        recomputed_bound=base * 2.0 * RECOMPUTED_SQUARED_SUM,
    )


def _lower_bound_from_sup(sup: NormEstimate, n: int) -> float:
    return max(0.0, sup.lower - 4.0 * tail_abs_sum_bound(n))


def _resolve_gap(net: TranslateNetwork, gap: Optional[float]) -> float:
    if gap is not None:
        if gap <= 0:
            raise ValueError(f"gap must be positive, got {gap}")
        return gap
    return DEFAULT_RELATIVE_GAP * estimate_sup(net)


def p_infty_sup_lower_bound(lam: float, n_probe: int, gap: Optional[float] = None) -> float:
    """
    Certified lower bound max(0, sup(P_n).lower - 4 sum_{k>n} |a_k|) for ||P_inf||_inf.

    Returns 0 when the bound is vacuous; a larger n_probe is then needed.
    """
    p = ShiftParameters(lam=lam, n=n_probe)
    net = canonical_witness(p)
    bound = _lower_bound_from_sup(sup_norm(net, _resolve_gap(net, gap)), n_probe)
    if 0 < lam < 1:
        analytic = analytic_p_infty_bounds(lam)
        logger.info(
            f"||P_inf|| >= {bound:.6e} at n={n_probe}; analytic bounds {analytic.printed_bound:.3e} "
            f"(printed constants) and {analytic.recomputed_bound:.3e} (recomputed)"
        )
    if bound == 0.0:
        logger.warning(f"Lower bound for ||P_inf|| is vacuous at lambda={lam}, n={n_probe}")
    return bound


def _upper_bound_break_points(lam: float, f_value: float, radius: float) -> list[float]:
    """Kinks of |H(lambda omega) - F| on [0, radius]: branch joins of H and solutions of H = F."""
    breaks = []
    periods = int(math.ceil(lam * radius / (2.0 * math.pi))) + 1
    offsets = [math.pi / 2.0, 3.0 * math.pi / 2.0]
    if 0.0 <= f_value <= 1.0:
        root = math.asin(math.sqrt(f_value))
        offsets += [math.pi - root, math.pi + root]
    for j in range(periods):
        for offset in offsets:
            w = (2.0 * math.pi * j + offset) / lam
            if 0.0 < w < radius:
                breaks.append(w)
    return sorted(breaks)


def p_infty_sup_upper_bound(lam: float, tol: float = 1e-12) -> float:
    """
    ||P_inf||_inf <= (2/sqrt(2 pi)) int phi_hat(omega) |H(lambda omega) - F(lambda)| d omega,
    by Fourier inversion of P_inf_hat = 2 phi_hat (H(lambda .) - F(lambda)).
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    _, f_value = limit_functionals(lam)
    radius = 20.0
    result = integrate(
        lambda w: float(gaussian_hat(w)) * abs(float(auxiliary_H(lam * w)) - f_value),
        0.0,
        radius,
        epsabs=tol,
        epsrel=1e-12,
        points=_upper_bound_break_points(lam, f_value, radius),
        limit=2000,
    )
    # |H - F| <= 1 + |F| beyond the radius
    tail = (1.0 + abs(f_value)) * SQRT_2PI * float(erfc(radius / 2.0)) / 2.0
    # an error d in F moves the bound by at most 2 d
    return 2.0 * 2.0 * (result.value + result.error + tail) / SQRT_2PI + 2.0 * FUNCTIONAL_ROUNDOFF


def _search_n(lam: float, gap: Optional[float]) -> tuple[int, NormEstimate, float]:
    """Doubling search for the tail condition; returns n with the sup estimate and gap it was certified with."""
    upper = p_infty_sup_upper_bound(lam)
    if 20.0 * tail_abs_sum_bound(MAX_N) >= upper:
        raise SearchExhaustedError(
            f"lambda={lam}: ||P_inf|| <= {upper:.3e} is below 20/{MAX_N}, no n <= {MAX_N} can qualify"
        )
    n = 1
    while n <= MAX_N:
        tail = tail_abs_sum_bound(n)
        if 20.0 * tail < upper:
            net = canonical_witness(ShiftParameters(lam=lam, n=n))
            probe_gap = _resolve_gap(net, gap)
            try:
                sup = sup_norm(net, probe_gap)
            except NormCertificationError as e:
                logger.error(f"Sup norm certification failed at lambda={lam}, n={n}", exc_info=True)
                raise SearchExhaustedError(f"lambda={lam}: sup certification failed at n={n}") from e
            lower = _lower_bound_from_sup(sup, n)
            if 20.0 * tail < lower:
                logger.info(f"Chose n={n} for lambda={lam}: 20*tail={20.0 * tail:.3e} < ||P_inf|| lower bound {lower:.3e}")
                return n, sup, probe_gap
        n *= 2
    raise SearchExhaustedError(f"lambda={lam}: no n <= {MAX_N} satisfies the tail condition")


def choose_n(lam: float, gap: Optional[float] = None) -> int:
    """
    Smallest n of the doubling search 1, 2, 4, ... with 20 sum_{k>n} |a_k| below the
    certified lower bound for ||P_inf||_inf.

    Raises:
        SearchExhaustedError: If no n <= MAX_N qualifies.
    """
    n, _, _ = _search_n(lam, gap)
    if 0 < lam < 1:
        n0 = paper_n0(lam)
        logger.info(f"lambda={lam}: chosen n={n} {'exceeds' if n > n0 else 'is below'} N_0={n0:.4g}")
    return n


def certify(
    lam: float,
    gap: Optional[float] = None,
    with_oscillation: bool = False,
    n: Optional[int] = None,
) -> WitnessCertificate:
    """
    Builds the canonical witness and certifies ||P'||/||P|| >= pi^2/(2^10 lambda).

    Args:
        lam (float): Translation step, positive.
        gap (float, optional): Certification gap for both norms; defaults to
            1e-4 times a coarse estimate of ||P||.
        with_oscillation (bool): Attach the oscillation check.
        n (int, optional): Truncation order; chosen by choose_n when omitted.

    Returns:
        WitnessCertificate: Every intermediate quantity of the pipeline.

    Raises:
        SearchExhaustedError: If no truncation order is feasible.
        NormCertificationError: If a norm cannot be certified to the gap.
    """
    p = ShiftParameters(lam=lam, n=n if n is not None else 1)
    if n is None:
        chosen, sup, gap_used = _search_n(p.lam, gap)
        p = ShiftParameters(lam=p.lam, n=chosen)
        net = canonical_witness(p)
    else:
        net = canonical_witness(p)
        gap_used = _resolve_gap(net, gap)
        sup = sup_norm(net, gap_used)

    at_zero = abs(float(evaluate(net, 0.0)))
    if at_zero > 1e-12:
        raise HypothesisViolationError(f"canonical witness has P(0) = {at_zero:.3e}")

    deriv = sup_norm_derivative(net, gap_used)
    tail = tail_abs_sum_bound(p.n)
    p_lower = _lower_bound_from_sup(sup, p.n)
    threshold = ratio_threshold(p.lam)
    ratio_lower = deriv.lower / sup.upper if sup.upper > 0 else 0.0
    passed = ratio_lower >= threshold

    n0 = n0_recomputed = exceeds = None
    if p.lam < 1:
        n0, n0_recomputed = paper_n0(p.lam), recomputed_n0(p.lam)
        exceeds = p.n > n0
        if exceeds and not passed:
            logger.critical(f"Certificate failed at lambda={p.lam} with n={p.n} above N_0={n0:.4g}")

    oscillation = lemma1_certificate(net, sup_estimate=sup, deriv_estimate=deriv) if with_oscillation else None
    _, f_n = coefficient_functionals(p)
    logger.info(
        f"Certificate lambda={p.lam}, n={p.n}, F_n={f_n:.12g}: ratio >= {ratio_lower:.8g} "
        f"vs threshold {threshold:.8g} -> {'passed' if passed else 'FAILED'}"
    )
    return WitnessCertificate(
        lam=p.lam,
        n=p.n,
        n0_paper=n0,
        n0_recomputed=n0_recomputed,
        n_exceeds_n0_paper=exceeds,
        ratio_lower=ratio_lower,
        threshold=threshold,
        passed=passed,
        sup_norm=sup,
        deriv_norm=deriv,
        gap=gap_used,
        tail_bound=tail,
        p_infty_lower=p_lower,
        p_infty_upper=p_infty_sup_upper_bound(p.lam),
        tail_condition_met=20.0 * tail < p_lower,
        oscillation=oscillation,
    )


def truncation_diagnostics(lam: float, n: int, grid: int = 2001) -> TruncationDiagnostics:
    """
    Bounds ||Delta_n|| <= 2 sum_{k>n} |a_k| and ||P_inf - P_n|| <= 4 sum_{k>n} |a_k|, with the
    first checked on one period of omega: T_n(omega) + F_n(lambda) is the n-th partial cosine
    sum of H at lambda omega.
    """
    p = ShiftParameters(lam=lam, n=n)
    tail = tail_abs_sum_bound(p.n)
    omega = np.linspace(0.0, 2.0 * math.pi / p.lam, grid)
    _, f_n = coefficient_functionals(p)
    delta = np.abs(trig_polynomial_T(p, omega) - auxiliary_H(p.lam * omega) + f_n)
    empirical = float(np.max(delta))
    # float64 roundoff of the n-term cosine sum
    roundoff = 64.0 * np.finfo(float).eps * float(np.sum(np.abs(cosine_coefficients(p.n))))
    return TruncationDiagnostics(
        lam=p.lam,
        n=p.n,
        delta_bound=2.0 * tail,
        p_diff_bound=4.0 * tail,
        empirical_delta=empirical,
        empirical_ok=bool(empirical <= 2.0 * tail + roundoff),
    )


class WitnessOscillation(BaseModel):
    """Oscillation and Fejer smoothing checks for one canonical witness."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    n: int = Field(ge=1)
    lemma1: OscillationReport
    fejer_smoothing: FejerSmoothingReport
    # TranslateNetwork.to_payload form: lambda and [k, c_k] pairs
    network: dict

    @property
    def passed(self) -> bool:
        return bool(self.lemma1.passed) and self.fejer_smoothing.passed


def witness_oscillation(lam: float, n: Optional[int] = None, gap: Optional[float] = None) -> WitnessOscillation:
    """
    Runs the oscillation check at r = 1.01 (8^3/pi) ratio and the Fejer smoothing
    check at twice the critical radius on 50 points of [0, 10].
    """
    if n is None:
        n, sup, gap_used = _search_n(lam, gap)
        net = canonical_witness(ShiftParameters(lam=lam, n=n))
    else:
        net = canonical_witness(ShiftParameters(lam=lam, n=n))
        gap_used = _resolve_gap(net, gap)
        sup = sup_norm(net, gap_used)
    deriv = sup_norm_derivative(net, gap_used)
    lemma1 = lemma1_certificate(net, sup_estimate=sup, deriv_estimate=deriv)
    r = 2.0 * LEMMA_CONSTANT * deriv.upper / sup.lower
    fejer = fejer_smoothing_report(net, r, np.linspace(0.0, 10.0, 50), sup_estimate=sup, deriv_estimate=deriv)
    return WitnessOscillation(lam=lam, n=n, lemma1=lemma1, fejer_smoothing=fejer, network=net.to_payload())
