"""Entry point for ``python -m xygibbs``."""
import sys

from xygibbs.cli import main

if __name__ == "__main__":
    sys.exit(main())
