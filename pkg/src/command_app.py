import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from src.exceptions import EXIT_USAGE, CertificationError, UsageError
from src.utils import RunConfig, parse_run_config

logger = logging.getLogger(__name__)

Handler = Callable[[RunConfig], int]


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    handler: Handler


class CommandBlueprint:
    """Collects command handlers; an app registers them all at once."""

    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, help: str) -> Callable[[Handler], Handler]:
        def decorator(handler: Handler) -> Handler:
            if name in self.commands:
                raise ValueError(f"command '{name}' registered twice")
            self.commands[name] = Command(name=name, help=help, handler=handler)
            return handler
        return decorator


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; route those through UsageError instead."""

    def error(self, message: str):
        raise UsageError(message)


def _add_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--lambda-min", dest="lambda_min", type=float)
    parser.add_argument("--lambda-max", dest="lambda_max", type=float)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--n", dest="n_override", type=int)
    parser.add_argument("--gap", type=float)
    parser.add_argument("--format", dest="output_format", choices=["json", "csv", "text"])
    parser.add_argument("--out", dest="output_path")
    parser.add_argument("--with-oscillation", dest="with_oscillation", action="store_true", default=None)


class CommandApp:
    """
    Sub-command application. Blueprints contribute handlers; run() parses flags
    into a RunConfig, dispatches, and maps failures to exit codes.
    """

    def __init__(self, prog: str):
        self.prog = prog
        self.commands: Dict[str, Command] = {}

    def register_blueprint(self, blueprint: CommandBlueprint) -> None:
        for name, command in blueprint.commands.items():
            if name in self.commands:
                raise ValueError(f"command '{name}' registered twice")
            self.commands[name] = command

    def build_parser(self) -> argparse.ArgumentParser:
        parser = _ArgumentParser(prog=self.prog)
        subparsers = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
        subparsers.required = True
        for command in self.commands.values():
            _add_flags(subparsers.add_parser(command.name, help=command.help))
        return parser

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        args: List[str] = list(sys.argv[1:] if argv is None else argv)
        try:
            namespace = self.build_parser().parse_args(args)
            config = parse_run_config(namespace)
            logger.info(f"Running '{config.command}'")
            return self.commands[config.command].handler(config)
        except CertificationError as e:
            logger.error(f"'{' '.join(args)}' failed: {e}", exc_info=True)
            print(f"{self.prog}: error: {e}", file=sys.stderr)
            return e.exit_code
        except ValueError as e:
            logger.error(f"'{' '.join(args)}' rejected: {e}", exc_info=True)
            print(f"{self.prog}: error: {e}", file=sys.stderr)
            return EXIT_USAGE
