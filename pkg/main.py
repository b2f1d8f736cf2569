import logging
import sys

from config import LOG_LEVEL

logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(name)s %(levelname)s: %(message)s")

from cli import run  # noqa: E402

if __name__ == '__main__':
    sys.exit(run())
