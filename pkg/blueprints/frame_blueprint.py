from src.command_app import CommandBlueprint
from src.exceptions import EXIT_OK
from src.services.frame_service import frame_bounds
from src.utils import RunConfig, emit, render

frame_bp = CommandBlueprint()


@frame_bp.command("frame", help="Riesz-type bounds mu(lambda) and M(lambda)")
def frame_command(config: RunConfig) -> int:
    emit(render(frame_bounds(config.lam), config.resolved_format), config.output_path)
    return EXIT_OK
