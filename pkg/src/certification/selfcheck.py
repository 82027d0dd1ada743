import logging
import math
from typing import List, Optional

import mpmath
from pydantic import BaseModel, ConfigDict

from src.services.coefficient_service import (
    ShiftParameters,
    absolute_coefficient_sum,
    cosine_coefficient,
    cosine_coefficient_oracle,
    squared_coefficient_sum,
    tail_abs_sum_estimate,
)
from src.services.frame_service import periodized_l2_norm_squared
from src.services.kernel_service import canonical_witness
from src.services.norm_service import l2_norm_squared_closed_form
from src.services.quadrature_service import integrate
from src.services.witness_service import PRINTED_C0, PRINTED_SQUARED_SUM, RECOMPUTED_C0

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-12
AGREE_TOL = 1e-9
PLANCHEREL_RTOL = 1e-6


class SelfcheckRow(BaseModel):
    """A printed constant next to its recomputed value."""
    model_config = ConfigDict(frozen=True)

    name: str
    printed: Optional[float]
    recomputed: float
    agree: bool


def _row(name: str, printed: Optional[float], recomputed: float, tol: float = AGREE_TOL) -> SelfcheckRow:
    agree = printed is not None and abs(printed - recomputed) <= tol * max(1.0, abs(printed))
    if printed is not None and not agree:
        logger.warning(f"{name}: printed {printed!r} disagrees with recomputed {recomputed!r}")
    return SelfcheckRow(name=name, printed=printed, recomputed=recomputed, agree=agree)


def _reference_sums() -> tuple[float, float]:
    """High-precision sum |a_k| and sum a_k^2 over k >= 1."""
    with mpmath.workdps(30):
        def odd_term(j):
            k = 2 * j + 1
            return 4 / (mpmath.pi * k * (k * k - 4))

        odd_abs = mpmath.nsum(odd_term, [1, mpmath.inf])
        odd_sq = mpmath.nsum(lambda j: odd_term(j) ** 2, [1, mpmath.inf])
        head = 4 / (3 * mpmath.pi)
        return float(head + mpmath.mpf(1) / 4 + odd_abs), float(head**2 + mpmath.mpf(1) / 16 + odd_sq)


def _parseval_integral() -> float:
    """(1/pi) int_{-pi}^{pi} H^2 by quadrature of the two branches."""
    flat = integrate(lambda x: 1.0, 0.0, math.pi / 2, epsabs=ORACLE_TOL)
    curved = integrate(lambda x: math.sin(x) ** 4, math.pi / 2, math.pi, epsabs=ORACLE_TOL)
    return 2.0 / math.pi * (flat.value + curved.value)


def selfcheck() -> List[SelfcheckRow]:
    """
    Audits the printed constants: the first coefficients against quadrature,
    the coefficient sums against summation and high-precision references,
    Parseval, the tail bound, the Plancherel cross-check and the N_0 constant.
    """
    rows = [
        _row(f"a_{k}", cosine_coefficient(k), cosine_coefficient_oracle(k, ORACLE_TOL))
        for k in range(3)
    ]

    reference_abs, reference_sq = _reference_sums()
    partial_abs, _ = absolute_coefficient_sum()
    partial_sq, _ = squared_coefficient_sum()
    rows.append(_row("sum_abs_a_k", 1.0 + 5.0 / (3.0 * math.pi), partial_abs))
    rows.append(_row("sum_abs_a_k_reference", reference_abs, partial_abs))
    rows.append(_row("sum_a_k_squared", PRINTED_SQUARED_SUM, partial_sq))
    rows.append(_row("sum_a_k_squared_reference", reference_sq, partial_sq))
    rows.append(_row("parseval", _parseval_integral(), 2.0 * cosine_coefficient(0) ** 2 + partial_sq))

    orders = range(1, 1001)
    worst = max(float(k) * tail_abs_sum_estimate(int(k)) for k in orders)
    rows.append(SelfcheckRow(name="max_n_times_tail", printed=1.0, recomputed=worst, agree=worst < 1.0))

    net = canonical_witness(ShiftParameters(lam=0.8, n=16))
    closed, periodized = l2_norm_squared_closed_form(net), periodized_l2_norm_squared(net)
    rows.append(_row("plancherel_l2", closed, periodized, tol=PLANCHEREL_RTOL))

    rows.append(_row("n0_constant", PRINTED_C0, RECOMPUTED_C0))
    logger.info(f"Selfcheck: {sum(r.agree for r in rows)}/{len(rows)} rows agree")
    return rows
