"""Main entry point for the chirpscatter command line."""
import sys

from src.ui.cli import run


def main() -> None:
    """Run the command line and exit with its status."""
    sys.exit(run())


if __name__ == "__main__":
    main()
