import logging
import sys
from typing import Optional, Sequence

from blueprints.certify_blueprint import certify_bp
from blueprints.coeffs_blueprint import coeffs_bp
from blueprints.frame_blueprint import frame_bp
from blueprints.oscillation_blueprint import oscillation_bp
from blueprints.selfcheck_blueprint import selfcheck_bp
from blueprints.sweep_blueprint import sweep_bp
from src.command_app import CommandApp

# Logs go to stderr; stdout carries only the artifact.
logging.basicConfig(level=logging.INFO, stream=sys.stderr)

app = CommandApp(prog="turan-certify")

app.register_blueprint(certify_bp)
app.register_blueprint(sweep_bp)
app.register_blueprint(coeffs_bp)
app.register_blueprint(oscillation_bp)
app.register_blueprint(frame_bp)
app.register_blueprint(selfcheck_bp)


def main(argv: Optional[Sequence[str]] = None) -> int:
    return app.run(argv)


if __name__ == "__main__":
    sys.exit(main())
