from src.certification.selfcheck import selfcheck
from src.command_app import CommandBlueprint
from src.exceptions import EXIT_OK
from src.utils import RunConfig, emit, render

selfcheck_bp = CommandBlueprint()


@selfcheck_bp.command("selfcheck", help="audit printed constants against recomputed values")
def selfcheck_command(config: RunConfig) -> int:
    """Disagreeing rows are reported, not failed; only oracle non-convergence is an error."""
    rows = selfcheck()
    csv_rows = [(r.name, r.printed, r.recomputed, r.agree) for r in rows]
    emit(render(rows, config.resolved_format, ("name", "printed", "recomputed", "agree"), csv_rows), config.output_path)
    return EXIT_OK
