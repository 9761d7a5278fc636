"""Allow ``python -m tsirelson``."""

from tsirelson.cli.main import run

run()
