import sys
from typing import Sequence

from cli import commands
from config import environment_loader, logging_configurator
from config.environment_loader import Environment


def main(argv: Sequence[str] | None = None) -> int:
    # Load our environment variables (see our .env files) (MUST RUN FIRST)
    environment_loader.init()
    # Load our structured logging configuration
    logger = logging_configurator.init()

    logger.debug(f"Initialising: {Environment.APP_NAME.get()}")
    logger.debug(f"Version: {Environment.APP_VERSION.get()}")
    logger.debug(f"Environment: {Environment.NAME.get()}")

    return commands.main(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
