from src.command_app import CommandBlueprint
from src.exceptions import EXIT_OK
from src.services.coefficient_service import coefficient_table
from src.utils import RunConfig, emit, render

coeffs_bp = CommandBlueprint()


@coeffs_bp.command("coeffs", help="tabulate the cosine coefficients a_0..a_n")
def coeffs_command(config: RunConfig) -> int:
    table = coefficient_table(config.n_override)
    csv_rows = list(enumerate(table.values))
    emit(render(table, config.resolved_format, ("k", "a_k"), csv_rows), config.output_path)
    return EXIT_OK
