"""Protocol for the built-in invariant suites."""

from typing import Protocol

from tsirelson.models import SelftestReport


class SelftestServiceProtocol(Protocol):
    """Interface for running named property suites."""

    def run(self, suites: list[str] | None = None, n: int | None = None, seed: int = 0) -> SelftestReport:
        """
        Run the selected suites, or all of them.

        Args:
            suites: Suite names; None runs every suite.
            n: Cases per suite; None uses each suite's default.
            seed: Root seed, spawned into one stream per suite.

        Returns:
            SelftestReport with one SuiteResult per suite.
        """
        ...
