"""Exception types shared across the package.

The CLI maps these to exit codes: InputError -> 3, GuardExceeded -> 4,
CheckFailed (a theorem-backed identity broke) -> 2.
"""


class TowerlimError(Exception):
    """Base class for package errors."""


class InputError(TowerlimError):
    """Invalid user input (config, arguments, preconditions)."""


class GuardExceeded(TowerlimError):
    """A desk-scale resource guard would be exceeded."""


class CheckFailed(TowerlimError):
    """An identity that must hold failed; indicates a bug or a broken theorem."""


class PrecisionExhausted(TowerlimError):
    """Division loss consumed all working precision."""
