import logging

from src.command_app import CommandBlueprint
from src.exceptions import EXIT_FAILED_CERTIFICATE, EXIT_OK
from src.services.witness_service import certify
from src.utils import RunConfig, emit, render

logger = logging.getLogger(__name__)

certify_bp = CommandBlueprint()


@certify_bp.command("certify", help="certify ||P'||/||P|| >= pi^2/(2^10 lambda) for the canonical witness")
def certify_command(config: RunConfig) -> int:
    """Emits the witness certificate; exit status 2 when it does not pass."""
    certificate = certify(
        config.lam,
        gap=config.gap,
        with_oscillation=config.with_oscillation,
        n=config.n_override,
    )
    emit(render(certificate, config.resolved_format), config.output_path)
    if not certificate.passed:
        logger.warning(f"Certificate for lambda={config.lam} did not pass")
        return EXIT_FAILED_CERTIFICATE
    return EXIT_OK
