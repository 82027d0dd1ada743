from src.command_app import CommandBlueprint
from src.exceptions import EXIT_FAILED_CERTIFICATE, EXIT_OK
from src.services.witness_service import witness_oscillation
from src.utils import RunConfig, emit, render

oscillation_bp = CommandBlueprint()


@oscillation_bp.command("oscillation", help="check the Fourier oscillation estimate and the Fejer smoothing bound")
def oscillation_command(config: RunConfig) -> int:
    report = witness_oscillation(config.lam, n=config.n_override, gap=config.gap)
    emit(render(report, config.resolved_format), config.output_path)
    return EXIT_OK if report.passed else EXIT_FAILED_CERTIFICATE
