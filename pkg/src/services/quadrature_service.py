import logging
import warnings
from typing import Callable, Optional, Sequence

from pydantic import BaseModel, ConfigDict
from scipy.integrate import IntegrationWarning, quad

from src.exceptions import QuadratureError

logger = logging.getLogger(__name__)

DEFAULT_SUBDIVISION_LIMIT = 500


class QuadratureResult(BaseModel):
    """Value of a definite integral together with QUADPACK's error estimate."""
    model_config = ConfigDict(frozen=True)

    value: float
    error: float
    evaluations: int


def integrate(
    func: Callable[[float], float],
    a: float,
    b: float,
    epsabs: float,
    epsrel: float = 0.0,
    points: Optional[Sequence[float]] = None,
    weight: Optional[str] = None,
    wvar: Optional[float] = None,
    limit: int = DEFAULT_SUBDIVISION_LIMIT,
) -> QuadratureResult:
    """
    Integrates func over [a, b] with scipy's adaptive Gauss-Kronrod scheme.

    Args:
        func (Callable[[float], float]): Scalar integrand.
        a (float): Lower limit.
        b (float): Upper limit.
        epsabs (float): Absolute error target.
        epsrel (float): Relative error target, 0 for a pure absolute target.
        points (Sequence[float], optional): Interior break points (kinks, peaks).
        weight (str, optional): QUADPACK weight, e.g. "cos" for oscillatory integrands.
        wvar (float, optional): Frequency of the weight function.
        limit (int): Subdivision budget.

    Returns:
        QuadratureResult: Value, error estimate and number of integrand evaluations.

    Raises:
        QuadratureError: If QUADPACK reports non-convergence within the budget.
    """
    if a == b:
        return QuadratureResult(value=0.0, error=0.0, evaluations=0)

    kwargs = {"epsabs": epsabs, "epsrel": epsrel, "limit": limit, "full_output": 1}
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
    elif points is not None:
        inner = sorted(p for p in points if a < p < b)
        if inner:
            kwargs["points"] = inner
            kwargs["limit"] = max(limit, 2 * len(inner) + 50)

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            output = quad(func, a, b, **kwargs)
        except IntegrationWarning as e:
            logger.error(f"Quadrature on [{a}, {b}] did not converge: {e}")
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {e}") from e

    # With full_output QUADPACK appends a message instead of warning.
    if len(output) > 3:
        logger.error(f"Quadrature on [{a}, {b}] did not converge: {output[3]}")
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {output[3]}")

    value, error, info = output[0], output[1], output[2]
    evaluations = int(info.get("neval", 0)) if isinstance(info, dict) else 0
    return QuadratureResult(value=float(value), error=float(error), evaluations=evaluations)
