"""
Exception hierarchy for treedist
Library code raises these; the CLI maps them onto stable exit codes
"""

from typing import Iterable, Optional


class TreeDistError(Exception):
    """Base class for every error raised by treedist"""

    exit_code = 4


class NewickParseError(TreeDistError):
    """Malformed Newick text"""

    exit_code = 1

    def __init__(
        self, message: str, position: Optional[int] = None, line: Optional[int] = None
    ):
        self.message = message
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")

    def __reduce__(self):
        return (type(self), (self.message, self.position, self.line))


class MissingBranchLengthError(NewickParseError):
    """A branch has no length and no default was supplied"""


class DuplicateTaxonError(NewickParseError):
    """The same leaf name occurs twice in one tree"""


class TaxaMismatchError(TreeDistError):
    """Trees being compared do not share one leaf set"""

    exit_code = 2

    def __init__(self, missing: Iterable[str] = (), extra: Iterable[str] = ()):
        self.missing = sorted(missing)
        self.extra = sorted(extra)
        names = ", ".join(self.missing + self.extra)
        super().__init__(f"Leaf sets differ between trees: {names}")

    def __reduce__(self):
        return (type(self), (self.missing, self.extra))


class ChainCapExceeded(TreeDistError):
    """Brute-force enumeration went past the configured chain cap"""

    exit_code = 3

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(
            f"Brute-force enumeration exceeded the chain cap of {cap} maximal chains"
        )

    def __reduce__(self):
        return (type(self), (self.cap,))


class CommonSplitError(TreeDistError):
    """A core search was handed trees that still share splits"""


class IncompatibleSplitsError(TreeDistError):
    """A split set that should describe one tree contains a crossing pair"""


class OverlappingSupportError(TreeDistError):
    """Ratios or sequences being combined share splits"""


class NotAscendingError(TreeDistError):
    """A ratio sequence that must be ascending is not"""


class SettingsError(TreeDistError):
    """A configuration value could not be parsed"""

    exit_code = 5
