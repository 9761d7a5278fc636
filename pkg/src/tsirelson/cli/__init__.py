"""Command-line surface for tsirelson."""
