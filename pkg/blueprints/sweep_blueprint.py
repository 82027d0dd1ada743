import logging

from src.certification.orchestrator import lambda_range, sharpness_sweep
from src.command_app import CommandBlueprint
from src.exceptions import EXIT_FAILED_CERTIFICATE, EXIT_OK
from src.utils import RunConfig, emit, render

logger = logging.getLogger(__name__)

sweep_bp = CommandBlueprint()

SWEEP_HEADER = ("lambda", "n", "ratio_lower", "threshold", "product", "passed")


@sweep_bp.command("sweep", help="certify a range of lambdas and tabulate ratio_lower * lambda")
def sweep_command(config: RunConfig) -> int:
    lambdas = lambda_range(*config.lambda_range)
    rows = sharpness_sweep(lambdas, gap=config.gap, n=config.n_override)
    csv_rows = [(r.lam, r.n, r.ratio_lower, r.threshold, r.product, r.passed) for r in rows]
    emit(render(rows, config.resolved_format, SWEEP_HEADER, csv_rows), config.output_path)
    failed = [r.lam for r in rows if not r.passed]
    if failed:
        logger.warning(f"Sweep rows without a passing certificate: {failed}")
        return EXIT_FAILED_CERTIFICATE
    return EXIT_OK
