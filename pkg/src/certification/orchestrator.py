import asyncio
import logging
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm.asyncio import tqdm as async_tqdm

from src.exceptions import CertificationError
from src.services.witness_service import WitnessCertificate, certify, ratio_threshold

logger = logging.getLogger(__name__)


class SweepRow(BaseModel):
    """One row of the sharpness table; failed rows keep their error message."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0)
    n: Optional[int] = None
    ratio_lower: Optional[float] = None
    threshold: float
    product: Optional[float] = None
    passed: bool
    error: Optional[str] = None

    @classmethod
    def from_certificate(cls, certificate: WitnessCertificate) -> "SweepRow":
        return cls(
            lam=certificate.lam,
            n=certificate.n,
            ratio_lower=certificate.ratio_lower,
            threshold=certificate.threshold,
            product=certificate.product,
            passed=certificate.passed,
        )


def lambda_range(lambda_min: float, lambda_max: float, steps: int) -> List[float]:
    """steps equally spaced values from lambda_min to lambda_max inclusive."""
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    if not 0 < lambda_min <= lambda_max:
        raise ValueError(f"need 0 < lambda_min <= lambda_max, got [{lambda_min}, {lambda_max}]")
    return [float(v) for v in np.linspace(lambda_min, lambda_max, steps)]


class SweepOrchestrator:
    """
    Runs independent certificates for a list of lambdas concurrently and collects
    one row per lambda, in input order.
    """

    def __init__(self, gap: Optional[float] = None, n: Optional[int] = None, show_progress: bool = True):
        self.gap = gap
        self.n = n
        self.show_progress = show_progress

    def _row(self, lam: float) -> SweepRow:
        try:
            return SweepRow.from_certificate(certify(lam, gap=self.gap, n=self.n))
        except (CertificationError, ValueError) as e:
            logger.error(f"Sweep row lambda={lam} failed: {e}", exc_info=True)
            return SweepRow(lam=lam, threshold=ratio_threshold(lam), passed=False, error=str(e))

    async def run(self, lambdas: Sequence[float]) -> List[SweepRow]:
        if not lambdas:
            return []
        tasks = [asyncio.to_thread(self._row, lam) for lam in lambdas]
        rows = await async_tqdm.gather(*tasks, desc="Sweep", unit="lambda", disable=not self.show_progress)
        passed = sum(row.passed for row in rows)
        logger.info(f"Sweep finished: {passed}/{len(rows)} rows passed")
        return list(rows)


def sharpness_sweep(lambdas: Sequence[float], gap: Optional[float] = None, n: Optional[int] = None) -> List[SweepRow]:
    """Rows (lambda, n, ratio_lower, threshold, ratio_lower * lambda, passed) for each lambda."""
    return asyncio.run(SweepOrchestrator(gap=gap, n=n).run(list(lambdas)))
