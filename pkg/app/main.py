import argparse
import logging
import sys
from typing import List, Optional

from app.config import get_settings
from app.errors import UsageError

# Import commands
from app.commands import convert, evaluate, prepare, probe, project, train

settings = get_settings()
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nrvc", description=settings.APP_NAME)
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    # Include commands
    prepare.register(subparsers)   # manifest + noisy copies
    train.register(subparsers)     # training loop
    convert.register(subparsers)   # run-time conversion
    evaluate.register(subparsers)  # MCD report
    probe.register(subparsers)     # domain probe
    project.register(subparsers)   # 2-D projection
    return parser


def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Точка входа CLI

    Returns:
        int: 0 успех, 2 ошибка использования, 1 ошибка выполнения
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return int(e.code or 0)

    configure_logging()
    try:
        args.handler(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{parser.prog} {args.command}: error: {e}\n")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
