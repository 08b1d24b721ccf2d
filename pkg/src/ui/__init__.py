"""Command-line interface and colored terminal output."""
